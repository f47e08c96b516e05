//! Complex helpers, reproducible random streams and the wide least-norm solver.
//!
//! Every small-scale channel coefficient in the simulator is a
//! [`ComplexGain`]. Random draws come from [`RandomStream`]s, which are
//! addressed by a `(master_seed, stream_id)` pair so that any channel of any
//! Monte-Carlo drop can be regenerated independently of evaluation order.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A dimensionless complex channel coefficient.
pub type ComplexGain = Complex64;

/// Default cap on the condition number of the Gram matrix `A Aᴴ`.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Polar accessors with the phase convention used throughout the crate.
pub trait Polar {
    fn magnitude(&self) -> f64;
    /// Phase in `[0, 2π)`.
    fn phase(&self) -> f64;
}

impl Polar for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn phase(&self) -> f64 {
        wrap_phase(self.arg())
    }
}

/// Maps any finite angle onto `[0, 2π)`.
pub fn wrap_phase(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    // rem_euclid may round up to exactly TAU for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// Phase shift that rotates a path with phase `path_phase` onto `target_phase`.
pub fn cophase_angle(target_phase: f64, path_phase: f64) -> f64 {
    wrap_phase(target_phase - path_phase)
}

/// Address of an independent pseudo-random sequence.
///
/// The generator is ChaCha8 keyed by `master_seed` with `stream_id` selecting
/// the ChaCha stream, so distinct ids never share keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Draws a circularly-symmetric complex Gaussian with unit mean power.
pub fn sample_standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> ComplexGain {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Dense row-major complex matrix with at least as many columns as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WideMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl WideMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    /// Matrix-vector product `A x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, x)| a * x).sum())
            .collect()
    }
}

/// Minimum-norm solution of the wide system `A x = b` with the default
/// conditioning cap.
pub fn least_norm_solve(a: &WideMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    least_norm_solve_capped(a, b, DEFAULT_CONDITION_CAP)
}

/// Minimum-norm solution `x = Aᴴ (A Aᴴ)⁻¹ b` for one- and two-row systems.
///
/// The Gram matrix is inverted in closed form. A Gram condition number above
/// `condition_cap` is reported as [`Error::SingularSystem`].
pub fn least_norm_solve_capped(
    a: &WideMatrix,
    b: &[Complex64],
    condition_cap: f64,
) -> Result<Vec<Complex64>> {
    if b.len() != a.rows {
        return Err(Error::Dimension(format!(
            "right-hand side has {} entries, matrix has {} rows",
            b.len(),
            a.rows
        )));
    }
    if a.rows > a.cols {
        return Err(Error::Dimension(format!(
            "system is not wide ({}x{})",
            a.rows, a.cols
        )));
    }

    let y = match a.rows {
        1 => {
            let g = a.row(0).iter().map(|v| v.norm_sqr()).sum::<f64>();
            if g <= 0.0 || !g.is_finite() {
                return Err(Error::SingularSystem {
                    condition: f64::INFINITY,
                    cap: condition_cap,
                });
            }
            vec![b[0] / g]
        }
        2 => {
            let (r0, r1) = (a.row(0), a.row(1));
            let g00: f64 = r0.iter().map(|v| v.norm_sqr()).sum();
            let g11: f64 = r1.iter().map(|v| v.norm_sqr()).sum();
            // g01 = row0 · conj(row1)
            let g01: Complex64 = r0.iter().zip(r1).map(|(u, v)| u * v.conj()).sum();
            let det = g00 * g11 - g01.norm_sqr();

            let half_trace = 0.5 * (g00 + g11);
            let spread = (0.25 * (g00 - g11).powi(2) + g01.norm_sqr()).sqrt();
            let lambda_max = half_trace + spread;
            let lambda_min = if lambda_max > 0.0 {
                det / lambda_max
            } else {
                0.0
            };
            let condition = if lambda_min > 0.0 {
                lambda_max / lambda_min
            } else {
                f64::INFINITY
            };
            if !(condition <= condition_cap) {
                return Err(Error::SingularSystem {
                    condition,
                    cap: condition_cap,
                });
            }

            vec![
                (b[0] * g11 - g01 * b[1]) / det,
                (b[1] * g00 - g01.conj() * b[0]) / det,
            ]
        }
        m => {
            return Err(Error::Dimension(format!(
                "least-norm solver supports at most 2 rows, got {m}"
            )))
        }
    };

    Ok((0..a.cols)
        .map(|c| (0..a.rows).map(|r| a.get(r, c).conj() * y[r]).sum())
        .collect())
}
