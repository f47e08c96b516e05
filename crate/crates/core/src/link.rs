//! Received-signal composition and NOMA rate evaluation.
//!
//! Residual inter-cell interference enters every denominator. With zero
//! residual the expressions collapse to the interference-free NOMA forms.

use crate::beamforming::DesignedPair;
use crate::channel::{Cell, LargeScale, ScenarioGeometry, SmallScaleDrop, User};
use crate::error::{Error, Result};
use crate::numerics::ComplexGain;

/// Fixed NOMA power split between the cell-center and cell-edge user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub gamma_c_sq: f64,
    pub gamma_e_sq: f64,
}

impl PowerAllocation {
    pub fn new(gamma_c_sq: f64, gamma_e_sq: f64) -> Result<Self> {
        let ok = gamma_c_sq > 0.0
            && gamma_c_sq < 1.0
            && gamma_e_sq > 0.0
            && gamma_e_sq < 1.0
            && (gamma_c_sq + gamma_e_sq - 1.0).abs() <= 1e-9
            && gamma_e_sq > gamma_c_sq;
        if !ok {
            return Err(Error::Domain(format!(
                "invalid power allocation (gamma_c_sq={gamma_c_sq}, gamma_e_sq={gamma_e_sq})"
            )));
        }
        Ok(Self {
            gamma_c_sq,
            gamma_e_sq,
        })
    }

    pub fn from_geometry(geom: &ScenarioGeometry) -> Result<Self> {
        Self::new(geom.gamma_c_sq, geom.gamma_e_sq)
    }

    /// Rate ceiling of the CEU, `log2(1 + γ_e²/γ_c²)`.
    pub fn ceu_rate_ceiling(&self) -> f64 {
        (1.0 + self.gamma_e_sq / self.gamma_c_sq).log2()
    }
}

impl Default for PowerAllocation {
    fn default() -> Self {
        Self {
            gamma_c_sq: 0.4,
            gamma_e_sq: 0.6,
        }
    }
}

/// Amplitude channels seen by one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveLink {
    pub desired: ComplexGain,
    pub residual: ComplexGain,
}

impl EffectiveLink {
    pub fn desired_power(&self) -> f64 {
        self.desired.norm_sqr()
    }

    pub fn residual_power(&self) -> f64 {
        self.residual.norm_sqr()
    }
}

/// Direct path plus the own RIS's reflected paths.
pub fn effective_desired_channel(
    cell: Cell,
    user: User,
    drop: &SmallScaleDrop,
    configs: &DesignedPair,
    ls: &LargeScale,
) -> ComplexGain {
    let ris = configs.config(cell);
    let reflected: ComplexGain = drop
        .bs_ris(cell)
        .iter()
        .zip(drop.reflect(cell, user))
        .enumerate()
        .map(|(l, (h, r))| h * r * ris.reflect_coefficient(l))
        .sum();
    reflected * ls.reflect(cell, user).sqrt()
        + drop.direct(cell, user) * ls.direct(cell, user).sqrt()
}

/// Interference from the other BS: its direct path plus what the other RIS
/// transmits through the surface.
pub fn residual_interference(
    cell: Cell,
    user: User,
    drop: &SmallScaleDrop,
    configs: &DesignedPair,
    ls: &LargeScale,
) -> ComplexGain {
    let source = cell.other();
    let ris = configs.config(source);
    let transmitted: ComplexGain = drop
        .bs_ris(source)
        .iter()
        .zip(drop.transmit(source, user))
        .enumerate()
        .map(|(l, (h, t))| h * t * ris.transmit_coefficient(l))
        .sum();
    drop.interf(cell, user) * ls.interf(cell, user).sqrt()
        + transmitted * ls.transmit(cell, user).sqrt()
}

pub fn effective_link(
    cell: Cell,
    user: User,
    drop: &SmallScaleDrop,
    configs: &DesignedPair,
    ls: &LargeScale,
) -> EffectiveLink {
    EffectiveLink {
        desired: effective_desired_channel(cell, user, drop, configs, ls),
        residual: residual_interference(cell, user, drop, configs, ls),
    }
}

fn superposed_sinr(h_pow: f64, g_pow: f64, p: f64, alloc: &PowerAllocation, noise: f64) -> f64 {
    let signal = h_pow * p;
    signal * alloc.gamma_e_sq / (signal * alloc.gamma_c_sq + g_pow * p + noise)
}

/// SINR of the CEU decoding its own message with the CCU's share as noise.
pub fn sinr_ceu(h_pow: f64, g_pow: f64, p: f64, alloc: &PowerAllocation, noise: f64) -> f64 {
    superposed_sinr(h_pow, g_pow, p, alloc, noise)
}

/// SINR of the CCU decoding the CEU's message (first SIC stage).
pub fn sinr_sic(h_pow: f64, g_pow: f64, p: f64, alloc: &PowerAllocation, noise: f64) -> f64 {
    superposed_sinr(h_pow, g_pow, p, alloc, noise)
}

/// SINR of the CCU decoding its own message after SIC.
pub fn snr_ccu(h_pow: f64, g_pow: f64, p: f64, alloc: &PowerAllocation, noise: f64) -> f64 {
    h_pow * p * alloc.gamma_c_sq / (g_pow * p + noise)
}

pub fn rate(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

/// Instantaneous rates of one cell's NOMA pair (bit/s/Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub rate_ccu: f64,
    pub rate_ceu: f64,
    /// Rate at which the CCU could decode the CEU's message. Diagnostic only.
    pub rate_sic: f64,
    pub snr_ccu: f64,
    pub sinr_ceu: f64,
    pub sinr_sic: f64,
}

impl RateReport {
    pub fn rate(&self, user: User) -> f64 {
        match user {
            User::Ccu => self.rate_ccu,
            User::Ceu => self.rate_ceu,
        }
    }
}

/// Evaluates both users of `cell` from precomputed effective links.
pub fn rates_from_links(
    ccu: &EffectiveLink,
    ceu: &EffectiveLink,
    p: f64,
    alloc: &PowerAllocation,
    noise: f64,
) -> RateReport {
    let snr_c = snr_ccu(ccu.desired_power(), ccu.residual_power(), p, alloc, noise);
    let sinr_e = sinr_ceu(ceu.desired_power(), ceu.residual_power(), p, alloc, noise);
    let sinr_s = sinr_sic(ccu.desired_power(), ccu.residual_power(), p, alloc, noise);
    RateReport {
        rate_ccu: rate(snr_c),
        rate_ceu: rate(sinr_e),
        rate_sic: rate(sinr_s),
        snr_ccu: snr_c,
        sinr_ceu: sinr_e,
        sinr_sic: sinr_s,
    }
}

/// `p` and `noise` in mW.
pub fn instantaneous_rates(
    cell: Cell,
    drop: &SmallScaleDrop,
    configs: &DesignedPair,
    ls: &LargeScale,
    p: f64,
    alloc: &PowerAllocation,
    noise: f64,
) -> RateReport {
    let ccu = effective_link(cell, User::Ccu, drop, configs, ls);
    let ceu = effective_link(cell, User::Ceu, drop, configs, ls);
    rates_from_links(&ccu, &ceu, p, alloc, noise)
}
