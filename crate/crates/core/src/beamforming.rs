//! Passive beamforming for the two STAR-RIS arrays.
//!
//! Each RIS serves its own BS. Its transmitted wave leaks into the other
//! cell and is used to cancel the inter-cell interference seen by that
//! cell's CCU and CEU; whatever energy is left per element is reflected back
//! into the own cell and co-phased with the direct path of the focus user.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::{Cell, LargeScale, SmallScaleDrop, User};
use crate::error::{Error, Result};
use crate::numerics::{cophase_angle, least_norm_solve, ComplexGain, Polar, WideMatrix};

/// Per-element amplitudes and phase shifts of one STAR-RIS array.
#[derive(Debug, Clone, PartialEq)]
pub struct StarRisConfig {
    pub beta_t: Vec<f64>,
    pub theta_t: Vec<f64>,
    pub beta_r: Vec<f64>,
    pub theta_r: Vec<f64>,
}

impl StarRisConfig {
    /// All amplitudes zero: the surface neither reflects nor transmits.
    pub fn off(len: usize) -> Self {
        Self {
            beta_t: vec![0.0; len],
            theta_t: vec![0.0; len],
            beta_r: vec![0.0; len],
            theta_r: vec![0.0; len],
        }
    }

    /// Full reflection with the given phase shifts and no transmission.
    pub fn pure_reflection(theta_r: Vec<f64>) -> Self {
        let len = theta_r.len();
        Self {
            beta_t: vec![0.0; len],
            theta_t: vec![0.0; len],
            beta_r: vec![1.0; len],
            theta_r,
        }
    }

    pub fn len(&self) -> usize {
        self.beta_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_t.is_empty()
    }

    /// `β_t e^{jθ_t}` of element `l`.
    pub fn transmit_coefficient(&self, l: usize) -> ComplexGain {
        Complex64::from_polar(self.beta_t[l], self.theta_t[l])
    }

    /// `β_r e^{jθ_r}` of element `l`.
    pub fn reflect_coefficient(&self, l: usize) -> ComplexGain {
        Complex64::from_polar(self.beta_r[l], self.theta_r[l])
    }

    /// Largest `|β_t² + β_r² − 1|` over the elements.
    pub fn energy_split_error(&self) -> f64 {
        self.beta_t
            .iter()
            .zip(&self.beta_r)
            .map(|(t, r)| (t * t + r * r - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// True when no element exceeds the passive amplitude budget.
    pub fn is_passive(&self) -> bool {
        self.beta_t
            .iter()
            .zip(&self.beta_r)
            .all(|(t, r)| t * t + r * r <= 1.0 + 1e-12)
    }
}

/// Result of solving one through-surface cancellation system.
#[derive(Debug, Clone, PartialEq)]
pub struct CancellationOutcome {
    /// `β_t e^{jθ_t}` per element, already scaled into the amplitude budget.
    pub coefficients: Vec<ComplexGain>,
    /// Uniform down-scaling applied to the least-norm solution.
    pub scale: f64,
    /// The least-norm solution fit without scaling.
    pub feasible: bool,
    /// Right-hand side of the system; the achieved value is `scale * target`.
    pub target: [ComplexGain; 2],
    /// The Gram matrix was singular and transmission was switched off.
    pub singular: bool,
}

impl CancellationOutcome {
    /// Outcome used when the system cannot be solved: no transmission.
    pub fn blocked(len: usize, target: [ComplexGain; 2]) -> Self {
        Self {
            coefficients: vec![Complex64::new(0.0, 0.0); len],
            scale: 0.0,
            feasible: false,
            target,
            singular: true,
        }
    }

    /// Interference left uncancelled, in units of the system's right-hand side.
    pub fn residual_target(&self) -> [ComplexGain; 2] {
        self.target.map(|t| t * (1.0 - self.scale))
    }
}

/// Passive beamforming strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignKind {
    /// Transmission cancels, reflection co-phases at the CCU.
    Ssecb,
    /// Reflection only, co-phased at the CCU.
    SebCcu,
    /// Reflection only, co-phased at the CEU.
    SebCeu,
    /// Transmission only, cancelling interference.
    Scb,
    /// No RIS assistance.
    NoRis,
}

impl DesignKind {
    pub const ALL: [DesignKind; 5] = [
        DesignKind::Ssecb,
        DesignKind::SebCcu,
        DesignKind::SebCeu,
        DesignKind::Scb,
        DesignKind::NoRis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DesignKind::Ssecb => "ssecb",
            DesignKind::SebCcu => "seb-ccu",
            DesignKind::SebCeu => "seb-ceu",
            DesignKind::Scb => "scb",
            DesignKind::NoRis => "none",
        }
    }

    /// Whether the design solves a cancellation system (and so needs L ≥ 2).
    pub fn cancels(self) -> bool {
        matches!(self, DesignKind::Ssecb | DesignKind::Scb)
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DesignKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        DesignKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| {
                format!("unknown design `{s}` (expected ssecb, seb-ccu, seb-ceu, scb or none)")
            })
    }
}

/// What to do when a drop's cancellation system is singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularPolicy {
    Propagate,
    /// Switch transmission off for that RIS and flag the outcome.
    Suppress,
}

/// Configurations of both arrays, indexed by cell, plus the cancellation
/// outcome of each RIS when the design solved one.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignedPair {
    pub ris: [StarRisConfig; 2],
    pub cancellation: [Option<CancellationOutcome>; 2],
}

impl DesignedPair {
    pub fn config(&self, cell: Cell) -> &StarRisConfig {
        &self.ris[cell.index()]
    }

    /// Outcome of the solve at the RIS that cancels interference for the
    /// users of `victim`.
    pub fn cancelling_for(&self, victim: Cell) -> Option<&CancellationOutcome> {
        self.cancellation[victim.other().index()].as_ref()
    }
}

/// Effective through-surface channels from BS`source` via RIS`source` to the
/// users of the other cell, and the values that null their interference.
///
/// Row `u` holds `h[l] t_u[l]`; entry `u` of the target is
/// `-sqrt(ε_interf/ε_transmit) w_interf` for victim user `u` (CCU, CEU).
pub fn build_cancellation_system(
    drop: &SmallScaleDrop,
    ls: &LargeScale,
    source: Cell,
) -> (WideMatrix, [ComplexGain; 2]) {
    let victim = source.other();
    let h = drop.bs_ris(source);
    let mut data = Vec::with_capacity(2 * h.len());
    for user in User::ALL {
        data.extend(
            h.iter()
                .zip(drop.transmit(source, user))
                .map(|(h, t)| h * t),
        );
    }
    let system = WideMatrix::new(2, h.len(), data).expect("drop vectors share one length");
    let target = User::ALL
        .map(|u| -(ls.interf(victim, u) / ls.transmit(victim, u)).sqrt() * drop.interf(victim, u));
    (system, target)
}

/// Least-norm transmission coefficients, uniformly scaled down when any
/// element would exceed unit amplitude.
pub fn solve_transmission(
    system: &WideMatrix,
    target: &[ComplexGain],
) -> Result<CancellationOutcome> {
    let x = least_norm_solve(system, target)?;
    let peak = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (scale, coefficients) = if peak <= 1.0 {
        (1.0, x)
    } else {
        let s = 1.0 / peak;
        (s, x.into_iter().map(|v| v * s).collect())
    };
    let mut padded = [Complex64::new(0.0, 0.0); 2];
    for (slot, t) in padded.iter_mut().zip(target) {
        *slot = *t;
    }
    Ok(CancellationOutcome {
        coefficients,
        scale,
        feasible: scale == 1.0,
        target: padded,
        singular: false,
    })
}

/// `β_r = sqrt(1 − β_t²)` per element.
pub fn derive_reflection_amplitudes(beta_t: &[f64]) -> Result<Vec<f64>> {
    beta_t
        .iter()
        .map(|&b| {
            if (0.0..=1.0).contains(&b) {
                Ok((1.0 - b * b).sqrt())
            } else {
                Err(Error::Domain(format!(
                    "transmission amplitude {b} outside [0, 1]"
                )))
            }
        })
        .collect()
}

/// Reflection phases that align every `h[l] r[l]` path of RIS`cell` with the
/// direct path to `focus`.
pub fn cophase_reflection(drop: &SmallScaleDrop, cell: Cell, focus: User) -> Vec<f64> {
    let direct_phase = drop.direct(cell, focus).phase();
    drop.bs_ris(cell)
        .iter()
        .zip(drop.reflect(cell, focus))
        .map(|(h, r)| cophase_angle(direct_phase, (h * r).phase()))
        .collect()
}

fn transmission_amplitudes(coefficients: &[ComplexGain]) -> (Vec<f64>, Vec<f64>) {
    coefficients
        .iter()
        .map(|c| {
            // rounding in the scaled solve can leave the peak a hair above 1
            let beta = c.norm().min(1.0);
            let theta = if beta > 0.0 { c.phase() } else { 0.0 };
            (beta, theta)
        })
        .unzip()
}

fn cancel(
    drop: &SmallScaleDrop,
    ls: &LargeScale,
    source: Cell,
    policy: SingularPolicy,
) -> Result<CancellationOutcome> {
    let (system, target) = build_cancellation_system(drop, ls, source);
    match solve_transmission(&system, &target) {
        Err(Error::SingularSystem { .. }) if policy == SingularPolicy::Suppress => {
            Ok(CancellationOutcome::blocked(system.cols(), target))
        }
        other => other,
    }
}

fn ssecb(drop: &SmallScaleDrop, ls: &LargeScale, policy: SingularPolicy) -> Result<DesignedPair> {
    let mut configs = Vec::with_capacity(2);
    let mut outcomes = Vec::with_capacity(2);
    for cell in Cell::ALL {
        let outcome = cancel(drop, ls, cell, policy)?;
        let (beta_t, theta_t) = transmission_amplitudes(&outcome.coefficients);
        let beta_r = derive_reflection_amplitudes(&beta_t)?;
        let theta_r = cophase_reflection(drop, cell, User::Ccu);
        configs.push(StarRisConfig {
            beta_t,
            theta_t,
            beta_r,
            theta_r,
        });
        outcomes.push(Some(outcome));
    }
    Ok(pair_from(configs, outcomes))
}

fn pair_from(
    configs: Vec<StarRisConfig>,
    outcomes: Vec<Option<CancellationOutcome>>,
) -> DesignedPair {
    let [c1, c2]: [StarRisConfig; 2] = configs.try_into().expect("one config per cell");
    let [o1, o2]: [Option<CancellationOutcome>; 2] =
        outcomes.try_into().expect("one outcome per cell");
    DesignedPair {
        ris: [c1, c2],
        cancellation: [o1, o2],
    }
}

/// Joint design: each RIS cancels interference in the opposite cell by
/// transmission and co-phases its reflection at its own CCU.
pub fn design_ssecb(drop: &SmallScaleDrop, ls: &LargeScale) -> Result<DesignedPair> {
    ssecb(drop, ls, SingularPolicy::Propagate)
}

/// SEB, SCB and no-RIS reference configurations.
pub fn design_baseline(
    kind: DesignKind,
    drop: &SmallScaleDrop,
    ls: &LargeScale,
) -> Result<DesignedPair> {
    baseline(kind, drop, ls, SingularPolicy::Propagate)
}

fn baseline(
    kind: DesignKind,
    drop: &SmallScaleDrop,
    ls: &LargeScale,
    policy: SingularPolicy,
) -> Result<DesignedPair> {
    let len = drop.elements();
    let mut configs = Vec::with_capacity(2);
    let mut outcomes = Vec::with_capacity(2);
    for cell in Cell::ALL {
        match kind {
            DesignKind::Ssecb => {
                return Err(Error::Domain("SSECB is not a baseline design".into()));
            }
            DesignKind::SebCcu | DesignKind::SebCeu => {
                let focus = if kind == DesignKind::SebCcu {
                    User::Ccu
                } else {
                    User::Ceu
                };
                configs.push(StarRisConfig::pure_reflection(cophase_reflection(
                    drop, cell, focus,
                )));
                outcomes.push(None);
            }
            DesignKind::Scb => {
                let outcome = cancel(drop, ls, cell, policy)?;
                let (beta_t, theta_t) = transmission_amplitudes(&outcome.coefficients);
                configs.push(StarRisConfig {
                    beta_t,
                    theta_t,
                    beta_r: vec![0.0; len],
                    theta_r: vec![0.0; len],
                });
                outcomes.push(Some(outcome));
            }
            DesignKind::NoRis => {
                configs.push(StarRisConfig::off(len));
                outcomes.push(None);
            }
        }
    }
    Ok(pair_from(configs, outcomes))
}

/// Dispatches to the joint or a baseline design.
pub fn design(
    kind: DesignKind,
    drop: &SmallScaleDrop,
    ls: &LargeScale,
    policy: SingularPolicy,
) -> Result<DesignedPair> {
    match kind {
        DesignKind::Ssecb => ssecb(drop, ls, policy),
        other => baseline(other, drop, ls, policy),
    }
}
