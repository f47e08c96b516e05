//! Monte-Carlo rate estimation, sweeps and the minimal-element rule.
//!
//! Drops are generated and evaluated in parallel but always reduced in
//! drop-index order, so results are bitwise identical for any thread count.
//! Every design sees the same drops for a given seed and element count.

use rayon::prelude::*;

use crate::beamforming::{design, DesignKind, SingularPolicy};
use crate::channel::{
    draw_channel_drop, large_scale_from_geometry, Cell, LargeScale, ScenarioGeometry, User,
};
use crate::error::{Error, Result};
use crate::link::{effective_link, rates_from_links, PowerAllocation};

/// Thermal noise density in dBm/Hz.
pub const NOISE_DENSITY_DBM_HZ: f64 = -174.0;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn noise_power_dbm(bandwidth_hz: f64) -> f64 {
    NOISE_DENSITY_DBM_HZ + 10.0 * bandwidth_hz.log10()
}

/// Noise power in mW over `bandwidth_hz`.
pub fn noise_power(bandwidth_hz: f64) -> f64 {
    dbm_to_mw(noise_power_dbm(bandwidth_hz))
}

/// `sqrt(ε_interf / ε_transmit)` for the CCU and the CEU of cell one: the
/// number of unit-gain elements needed to null each user's interference.
pub fn feasibility_ratios(ls: &LargeScale) -> [f64; 2] {
    User::ALL.map(|u| (ls.interf(Cell::One, u) / ls.transmit(Cell::One, u)).sqrt())
}

/// Smallest element count strictly above both feasibility ratios.
pub fn min_elements(ls: &LargeScale) -> u64 {
    let [c, e] = feasibility_ratios(ls);
    c.max(e).floor() as u64 + 1
}

/// Mean and standard error of one user's rate at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserStats {
    pub mean_rate: f64,
    /// NaN when only one drop was run.
    pub std_error: f64,
}

impl UserStats {
    fn from_samples(samples: impl Iterator<Item = f64> + Clone, n: u64) -> Self {
        let nf = n as f64;
        let mean = samples.clone().sum::<f64>() / nf;
        let std_error = if n < 2 {
            f64::NAN
        } else {
            let ss: f64 = samples.map(|x| (x - mean) * (x - mean)).sum();
            (ss / (nf - 1.0) / nf).sqrt()
        };
        Self {
            mean_rate: mean,
            std_error,
        }
    }
}

/// Monte-Carlo estimate at one `(design, L, p)` point for the users of cell one.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub design: DesignKind,
    pub elements: usize,
    pub p_dbm: f64,
    /// Indexed by [`User::index`].
    pub users: [UserStats; 2],
    /// Fraction of drops whose cancelling solve met the amplitude budget
    /// without scaling; zero for designs that do not cancel.
    pub feasible_fraction: f64,
    pub singular_drops: u64,
    pub drops: u64,
    pub seed: u64,
}

impl PointResult {
    pub fn user(&self, user: User) -> &UserStats {
        &self.users[user.index()]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonteCarloResult {
    pub points: Vec<PointResult>,
}

/// Everything measured on one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct DropEvaluation {
    /// `[ccu, ceu]` rates for each requested power.
    pub rates: Vec<[f64; 2]>,
    /// Diagnostic CCU-decodes-CEU rate for each requested power.
    pub sic_rates: Vec<f64>,
    /// The cancelling solve for cell one needed no scaling.
    pub feasible: bool,
    pub singular: bool,
    /// `|residual| / |uncancelled interference|` per user of cell one.
    pub residual_ratio: [f64; 2],
}

/// Shared, immutable evaluation context for one scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub geometry: ScenarioGeometry,
    pub large_scale: LargeScale,
    pub alloc: PowerAllocation,
    pub noise_mw: f64,
}

impl Scenario {
    pub fn new(geometry: ScenarioGeometry) -> Result<Self> {
        geometry.validate()?;
        let large_scale = large_scale_from_geometry(&geometry)?;
        let alloc = PowerAllocation::from_geometry(&geometry)?;
        let noise_mw = noise_power(geometry.bandwidth_hz);
        Ok(Self {
            geometry,
            large_scale,
            alloc,
            noise_mw,
        })
    }

    /// Draws drop `drop_index`, applies `kind` and evaluates cell one at
    /// every power in `powers_mw`.
    pub fn evaluate_drop(
        &self,
        kind: DesignKind,
        elements: usize,
        powers_mw: &[f64],
        drop_index: u64,
        master_seed: u64,
    ) -> Result<DropEvaluation> {
        let ls = &self.large_scale;
        let drop = draw_channel_drop(&self.geometry, elements, drop_index, master_seed)?;
        let pair = design(kind, &drop, ls, SingularPolicy::Suppress)?;
        let ccu = effective_link(Cell::One, User::Ccu, &drop, &pair, ls);
        let ceu = effective_link(Cell::One, User::Ceu, &drop, &pair, ls);

        let (rates, sic_rates) = powers_mw
            .iter()
            .map(|&p| {
                let r = rates_from_links(&ccu, &ceu, p, &self.alloc, self.noise_mw);
                ([r.rate_ccu, r.rate_ceu], r.rate_sic)
            })
            .unzip();

        let outcome = pair.cancelling_for(Cell::One);
        let residual_ratio = [(User::Ccu, &ccu), (User::Ceu, &ceu)].map(|(u, link)| {
            let uncancelled = drop.interf(Cell::One, u).norm() * ls.interf(Cell::One, u).sqrt();
            link.residual.norm() / uncancelled
        });
        Ok(DropEvaluation {
            rates,
            sic_rates,
            feasible: outcome.is_some_and(|o| o.feasible),
            singular: outcome.is_some_and(|o| o.singular),
            residual_ratio,
        })
    }

    /// All drops of one `(design, L)` pair, evaluated at several powers.
    pub fn run_power_series(
        &self,
        kind: DesignKind,
        elements: usize,
        powers_dbm: &[f64],
        drops: u64,
        master_seed: u64,
    ) -> Result<Vec<PointResult>> {
        if drops == 0 {
            return Err(Error::config(0, "drops", "at least one drop is required"));
        }
        if elements == 0 || (kind.cancels() && elements < 2) {
            return Err(Error::config(
                0,
                "elements",
                format!(
                    "{kind} needs at least {} elements",
                    if kind.cancels() { 2 } else { 1 }
                ),
            ));
        }
        if powers_dbm.is_empty() || powers_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::config(
                0,
                "power_dbm",
                "powers must be finite and non-empty",
            ));
        }
        let powers_mw: Vec<f64> = powers_dbm.iter().copied().map(dbm_to_mw).collect();

        let evaluations = (0..drops)
            .into_par_iter()
            .map(|i| self.evaluate_drop(kind, elements, &powers_mw, i, master_seed))
            .collect::<Result<Vec<_>>>()?;

        let feasible = evaluations.iter().filter(|e| e.feasible).count() as f64 / drops as f64;
        let singular = evaluations.iter().filter(|e| e.singular).count() as u64;
        Ok(powers_dbm
            .iter()
            .enumerate()
            .map(|(k, &p_dbm)| PointResult {
                design: kind,
                elements,
                p_dbm,
                users: User::ALL.map(|u| {
                    UserStats::from_samples(
                        evaluations.iter().map(|e| e.rates[k][u.index()]),
                        drops,
                    )
                }),
                feasible_fraction: feasible,
                singular_drops: singular,
                drops,
                seed: master_seed,
            })
            .collect())
    }

    pub fn run_drops(
        &self,
        kind: DesignKind,
        elements: usize,
        p_dbm: f64,
        drops: u64,
        master_seed: u64,
    ) -> Result<PointResult> {
        let mut points = self.run_power_series(kind, elements, &[p_dbm], drops, master_seed)?;
        Ok(points.remove(0))
    }
}

/// Monte-Carlo rate estimate at a single point.
pub fn run_drops(
    geom: &ScenarioGeometry,
    kind: DesignKind,
    elements: usize,
    p_dbm: f64,
    drops: u64,
    master_seed: u64,
) -> Result<PointResult> {
    Scenario::new(geom.clone())?.run_drops(kind, elements, p_dbm, drops, master_seed)
}

/// Exponent grids for the minimal-element map. An empty axis keeps the
/// geometry's value; a non-empty `alpha3` sets both RIS-user exponents.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExponentGrid {
    pub alpha2: Vec<f64>,
    pub alpha3: Vec<f64>,
    pub alpha4: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinElementPoint {
    pub alpha2: f64,
    pub alpha3_c: f64,
    pub alpha3_e: f64,
    pub alpha4: f64,
    pub ratio_ccu: f64,
    pub ratio_ceu: f64,
    pub min_elements: u64,
}

/// Evaluates [`min_elements`] over the Cartesian product of the grid axes,
/// α2 outermost and α4 innermost. No sampling is involved.
pub fn min_element_grid(
    geom: &ScenarioGeometry,
    grid: &ExponentGrid,
) -> Result<Vec<MinElementPoint>> {
    let axis = |values: &[f64], default: Option<f64>| -> Vec<Option<f64>> {
        if values.is_empty() {
            vec![default]
        } else {
            values.iter().copied().map(Some).collect()
        }
    };
    let mut out = Vec::new();
    for a2 in axis(&grid.alpha2, Some(geom.alpha2)) {
        for a3 in axis(&grid.alpha3, None) {
            for a4 in axis(&grid.alpha4, Some(geom.alpha4)) {
                let mut g = geom.clone();
                g.alpha2 = a2.expect("alpha2 axis has a default");
                g.alpha4 = a4.expect("alpha4 axis has a default");
                if let Some(a3) = a3 {
                    g.alpha3_c = a3;
                    g.alpha3_e = a3;
                }
                g.validate()?;
                let ls = large_scale_from_geometry(&g)?;
                let [ratio_ccu, ratio_ceu] = feasibility_ratios(&ls);
                out.push(MinElementPoint {
                    alpha2: g.alpha2,
                    alpha3_c: g.alpha3_c,
                    alpha3_e: g.alpha3_e,
                    alpha4: g.alpha4,
                    ratio_ccu,
                    ratio_ceu,
                    min_elements: min_elements(&ls),
                });
            }
        }
    }
    Ok(out)
}

/// A sweep request. With `exponent_grid` set the sweep evaluates the
/// minimal-element map; otherwise it runs Monte-Carlo over
/// `designs × elements × power_dbm`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub designs: Vec<DesignKind>,
    pub elements: Vec<usize>,
    pub power_dbm: Vec<f64>,
    pub exponent_grid: Option<ExponentGrid>,
    pub drops: u64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutput {
    Rates(MonteCarloResult),
    MinElements(Vec<MinElementPoint>),
}

impl SweepSpec {
    /// Transmit-power axis from `start` to `stop` inclusive.
    pub fn power_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
        if !(step > 0.0) || stop < start {
            return vec![start];
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| start + k as f64 * step).collect()
    }

    /// Rates versus power for L ∈ {27, 54}, with and without the RIS.
    pub fn fig3(drops: u64, master_seed: u64) -> Self {
        Self {
            designs: vec![DesignKind::Ssecb, DesignKind::NoRis],
            elements: vec![27, 54],
            power_dbm: Self::power_range(-60.0, -10.0, 5.0),
            exponent_grid: None,
            drops,
            master_seed,
        }
    }

    /// All designs versus L at −50 dBm.
    pub fn fig4(drops: u64, master_seed: u64) -> Self {
        Self {
            designs: DesignKind::ALL.to_vec(),
            elements: (27..=108).step_by(9).collect(),
            power_dbm: vec![-50.0],
            exponent_grid: None,
            drops,
            master_seed,
        }
    }

    /// Minimal-element map over (α3, α4) with α2 from the geometry.
    pub fn fig2() -> Self {
        Self {
            designs: vec![DesignKind::Ssecb],
            elements: Vec::new(),
            power_dbm: Vec::new(),
            exponent_grid: Some(ExponentGrid {
                alpha2: Vec::new(),
                alpha3: Self::power_range(2.0, 3.0, 0.1),
                alpha4: Self::power_range(3.0, 4.0, 0.1),
            }),
            drops: 1,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.exponent_grid.is_some() {
            return Ok(());
        }
        if self.designs.is_empty() {
            return Err(Error::config(0, "design", "no design requested"));
        }
        if self.elements.is_empty() {
            return Err(Error::config(0, "elements", "no element count requested"));
        }
        if self.power_dbm.is_empty() {
            return Err(Error::config(0, "power_dbm", "no transmit power requested"));
        }
        if self.drops == 0 {
            return Err(Error::config(0, "drops", "at least one drop is required"));
        }
        Ok(())
    }
}

pub fn sweep(spec: &SweepSpec, geom: &ScenarioGeometry) -> Result<SweepOutput> {
    spec.validate()?;
    if let Some(grid) = &spec.exponent_grid {
        return Ok(SweepOutput::MinElements(min_element_grid(geom, grid)?));
    }
    let scenario = Scenario::new(geom.clone())?;
    let mut points = Vec::new();
    for &kind in &spec.designs {
        for &l in &spec.elements {
            points.extend(scenario.run_power_series(
                kind,
                l,
                &spec.power_dbm,
                spec.drops,
                spec.master_seed,
            )?);
        }
    }
    Ok(SweepOutput::Rates(MonteCarloResult { points }))
}
