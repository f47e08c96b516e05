use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use starcomp::beamforming::{solve_transmission, DesignKind};
use starcomp::channel::{large_scale_from_geometry, path_loss};
use starcomp::cli::{parse_config, OutputFormat, Preset, RunConfig};
use starcomp::experiment::{min_element_grid, ExponentGrid, Scenario};
use starcomp::link::{rate, sinr_ceu, sinr_sic, snr_ccu};
use starcomp::numerics::{cophase_angle, least_norm_solve, WideMatrix};
use starcomp::{PowerAllocation, ScenarioGeometry};

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn wide_system() -> impl Strategy<Value = (Vec<Vec<Complex64>>, Vec<Complex64>)> {
    (1usize..=2, 2usize..=12).prop_flat_map(|(m, l)| {
        let l = l.max(m);
        (
            prop::collection::vec(prop::collection::vec(complex(), l), m),
            prop::collection::vec(complex(), m),
        )
    })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Projects `v` onto the null space of `a` (rows assumed independent).
fn null_space_component(a: &WideMatrix, v: &[Complex64]) -> Vec<Complex64> {
    let av = a.apply(v);
    let row_part = least_norm_solve(a, &av).unwrap();
    v.iter().zip(&row_part).map(|(x, r)| x - r).collect()
}

proptest! {
    #[test]
    fn least_norm_residual_and_minimality(
        (rows, b) in wide_system(),
        perturbations in prop::collection::vec(prop::collection::vec(complex(), 12), 5),
    ) {
        let a = WideMatrix::from_rows(rows).unwrap();
        let Ok(x) = least_norm_solve(&a, &b) else {
            return Ok(()); // random rows may be nearly dependent
        };
        let ax = a.apply(&x);
        let resid: Vec<_> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        prop_assert!(norm(&resid) <= 1e-10 * norm(&b).max(1.0));

        for p in perturbations {
            let n = null_space_component(&a, &p[..a.cols()]);
            // n really is in the null space
            prop_assert!(norm(&a.apply(&n)) <= 1e-8 * norm(&p).max(1.0));
            let moved: Vec<_> = x.iter().zip(&n).map(|(x, n)| x + n).collect();
            prop_assert!(norm(&moved) >= norm(&x) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn cophase_range_and_periodicity(t in -50.0..50.0f64, p in -50.0..50.0f64, k in -5i32..5) {
        let base = cophase_angle(t, p);
        prop_assert!((0.0..TAU).contains(&base));
        let shifted_t = cophase_angle(t + TAU * k as f64, p);
        let shifted_p = cophase_angle(t, p + TAU * k as f64);
        for s in [shifted_t, shifted_p] {
            let d = (s - base).abs();
            prop_assert!(d.min(TAU - d) < 1e-9);
        }
    }

    #[test]
    fn shrinking_target_scales_coefficients(
        (rows, b) in wide_system(),
        c in 0.01..=1.0f64,
    ) {
        let a = WideMatrix::from_rows(rows).unwrap();
        let Ok(full) = solve_transmission(&a, &b) else { return Ok(()); };
        let small_b: Vec<_> = b.iter().map(|v| v * c).collect();
        let small = solve_transmission(&a, &small_b).unwrap();
        prop_assert!(small.scale >= full.scale * (1.0 - 1e-12));
        if full.feasible {
            prop_assert!(small.feasible);
            for (s, f) in small.coefficients.iter().zip(&full.coefficients) {
                prop_assert!((s - f * c).norm() <= 1e-9 * (1.0 + f.norm()));
            }
        }
        for out in [&full, &small] {
            prop_assert!(out.coefficients.iter().all(|v| v.norm() <= 1.0 + 1e-12));
        }
        // achieved value is scale * target
        let achieved = a.apply(&full.coefficients);
        for (got, t) in achieved.iter().zip(&b) {
            prop_assert!((got - t * full.scale).norm() <= 1e-9 * (1.0 + t.norm()));
        }
    }

    #[test]
    fn rate_formulas_reduce_without_residual(
        h in 0.0..1e3f64, p in 1e-6..1e3f64, noise in 1e-6..10.0f64, gc in 0.05..0.45f64,
    ) {
        let alloc = PowerAllocation::new(gc, 1.0 - gc).unwrap();
        let ge = 1.0 - gc;
        prop_assert_eq!(sinr_ceu(h, 0.0, p, &alloc, noise), h * p * ge / (h * p * gc + noise));
        prop_assert_eq!(sinr_sic(h, 0.0, p, &alloc, noise), h * p * ge / (h * p * gc + noise));
        prop_assert_eq!(snr_ccu(h, 0.0, p, &alloc, noise), h * p * gc / noise);
    }

    #[test]
    fn rates_monotone_in_power_and_ceu_bounded(
        h in 0.0..1e3f64, g in 0.0..1e3f64, p in 1e-6..1e3f64, noise in 1e-6..10.0f64,
    ) {
        let alloc = PowerAllocation::default();
        let ceiling = alloc.ceu_rate_ceiling();
        prop_assert!(rate(sinr_ceu(h, g, p, &alloc, noise)) <= ceiling + 1e-12);
        prop_assert!(rate(snr_ccu(h, 0.0, 2.0 * p, &alloc, noise)) >= rate(snr_ccu(h, 0.0, p, &alloc, noise)));
        prop_assert!(rate(sinr_ceu(h, 0.0, 2.0 * p, &alloc, noise)) >= rate(sinr_ceu(h, 0.0, p, &alloc, noise)));
    }

    #[test]
    fn path_loss_decreasing(d in 1.001..1e4f64, alpha in 0.5..6.0f64, dd in 0.001..100.0f64, da in 0.001..2.0f64) {
        let base = path_loss(d, alpha).unwrap();
        prop_assert!(path_loss(d + dd, alpha).unwrap() < base);
        prop_assert!(path_loss(d, alpha + da).unwrap() < base);
    }

    #[test]
    fn config_round_trip(
        preset in prop::sample::select(vec![Preset::Table2, Preset::Fig2, Preset::Fig3, Preset::Fig4]),
        drops in 1u64..1_000_000,
        seed in any::<u64>(),
        alpha4 in 2.0..5.0f64,
        d_ris_ccu in 1.0..500.0f64,
        powers in prop::collection::vec(-120.0..40.0f64, 1..6),
        json in any::<bool>(),
    ) {
        let mut cfg = RunConfig::from_preset(preset);
        cfg.drops = drops;
        cfg.seed = seed;
        cfg.geometry.alpha4 = alpha4;
        cfg.geometry.d_ris_ccu = d_ris_ccu;
        cfg.power_dbm = powers;
        cfg.format = if json { OutputFormat::Json } else { OutputFormat::Csv };
        let text = cfg.to_config_text();
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}

#[test]
fn min_elements_monotone_in_exponents() {
    let g = ScenarioGeometry::table2();
    let axis: Vec<f64> = (0..=10).map(|k| 2.0 + 0.2 * k as f64).collect();
    let grid = ExponentGrid {
        alpha2: axis.clone(),
        alpha3: axis.clone(),
        alpha4: axis.iter().map(|a| a + 1.0).collect(),
    };
    let pts = min_element_grid(&g, &grid).unwrap();
    let n = axis.len();
    let at = |i: usize, j: usize, k: usize| pts[(i * n + j) * n + k].min_elements;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i + 1 < n {
                    assert!(at(i + 1, j, k) >= at(i, j, k));
                }
                if j + 1 < n {
                    assert!(at(i, j + 1, k) >= at(i, j, k));
                }
                if k + 1 < n {
                    assert!(at(i, j, k + 1) <= at(i, j, k));
                }
            }
        }
    }
}

#[test]
fn table2_large_scale_in_open_unit_interval() {
    let ls = large_scale_from_geometry(&ScenarioGeometry::table2()).unwrap();
    for t in [
        ls.eps_direct,
        ls.eps_interf,
        ls.eps_reflect,
        ls.eps_transmit,
    ] {
        assert!(t.iter().flatten().all(|v| *v > 0.0 && *v < 1.0));
    }
}

#[test]
fn mean_is_invariant_under_thread_count() {
    let scenario = Scenario::new(ScenarioGeometry::table2()).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                scenario
                    .run_power_series(DesignKind::Ssecb, 54, &[-40.0, -20.0], 500, 42)
                    .unwrap()
            })
    };
    let single = run(1);
    for threads in [2, 4, 7] {
        let multi = run(threads);
        for (a, b) in single.iter().zip(&multi) {
            for u in 0..2 {
                assert_eq!(
                    a.users[u].mean_rate.to_bits(),
                    b.users[u].mean_rate.to_bits()
                );
                assert!((a.users[u].mean_rate - b.users[u].mean_rate).abs() <= 1e-12);
            }
        }
        assert_eq!(single, multi);
    }
}

#[test]
fn feasible_fraction_grows_with_elements() {
    let scenario = Scenario::new(ScenarioGeometry::table2()).unwrap();
    let fractions: Vec<f64> = [27, 54, 81, 108]
        .into_iter()
        .map(|l| {
            scenario
                .run_drops(DesignKind::Ssecb, l, -30.0, 2000, 42)
                .unwrap()
                .feasible_fraction
        })
        .collect();
    for w in fractions.windows(2) {
        assert!(w[1] >= w[0], "{fractions:?}");
    }
}

#[test]
fn every_design_stays_within_the_amplitude_budget() {
    use starcomp::beamforming::{design, SingularPolicy};
    use starcomp::channel::draw_channel_drop;
    use starcomp::Cell;

    let g = ScenarioGeometry::table2();
    let ls = large_scale_from_geometry(&g).unwrap();
    for i in 0..100 {
        let drop = draw_channel_drop(&g, 27, i, 3).unwrap();
        for kind in [
            DesignKind::Ssecb,
            DesignKind::SebCcu,
            DesignKind::SebCeu,
            DesignKind::Scb,
            DesignKind::NoRis,
        ] {
            let pair = design(kind, &drop, &ls, SingularPolicy::Suppress).unwrap();
            for cell in Cell::ALL {
                assert!(pair.config(cell).is_passive(), "{kind} drop {i}");
            }
        }
    }
}
