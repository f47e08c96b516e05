//! Scenario geometry, large-scale path loss and small-scale channel drops.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{sample_standard_complex_gaussian, ComplexGain, RandomStream};

/// One of the two cooperating cells. Cell `k` holds BS`k`, RIS`k` and its
/// CCU/CEU pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    One,
    Two,
}

impl Cell {
    pub const ALL: [Cell; 2] = [Cell::One, Cell::Two];

    pub fn index(self) -> usize {
        match self {
            Cell::One => 0,
            Cell::Two => 1,
        }
    }

    pub fn other(self) -> Cell {
        match self {
            Cell::One => Cell::Two,
            Cell::Two => Cell::One,
        }
    }
}

/// NOMA user role within a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum User {
    /// Cell-center user, decodes with SIC.
    Ccu,
    /// Cell-edge user, receives the larger power share.
    Ceu,
}

impl User {
    pub const ALL: [User; 2] = [User::Ccu, User::Ceu];

    pub fn index(self) -> usize {
        match self {
            User::Ccu => 0,
            User::Ceu => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            User::Ccu => "ccu",
            User::Ceu => "ceu",
        }
    }
}

impl fmt::Display for User {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Distances, exponents and fading parameters shared by both (mirrored) cells.
///
/// The RIS sits at the cell boundary, so the distance from RIS`k` to a user
/// of the other cell equals the distance to the same-role user of its own
/// cell; `d_ris_ccu`/`d_ris_ceu` serve both the reflected and the
/// transmitted legs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGeometry {
    pub d_bs_ccu: f64,
    pub d_bs_ceu: f64,
    pub d_bs_ris: f64,
    pub d_ris_ceu: f64,
    pub d_ris_ccu: f64,
    pub d_bs_other_ccu: f64,
    pub d_bs_other_ceu: f64,
    /// BS-user links.
    pub alpha1: f64,
    /// BS-RIS links.
    pub alpha2: f64,
    /// RIS-CCU links.
    pub alpha3_c: f64,
    /// RIS-CEU links.
    pub alpha3_e: f64,
    /// Inter-cell interference links.
    pub alpha4: f64,
    /// Rician factor of the reflected RIS-user links.
    pub k1: f64,
    /// Rician factor of the transmitted RIS-user links.
    pub k2: f64,
    pub bandwidth_hz: f64,
    pub gamma_c_sq: f64,
    pub gamma_e_sq: f64,
}

/// Exponents below this value are accepted but usually indicate a typo.
pub const EXPONENT_WARNING_THRESHOLD: f64 = 2.0;

const ALLOCATION_TOLERANCE: f64 = 1e-9;

impl ScenarioGeometry {
    /// The reference two-cell deployment.
    pub fn table2() -> Self {
        Self {
            d_bs_ccu: 30.0,
            d_bs_ceu: 60.0,
            d_bs_ris: 70.0,
            d_ris_ceu: 15.0,
            d_ris_ccu: 50.0,
            d_bs_other_ccu: 120.0,
            d_bs_other_ceu: 90.0,
            alpha1: 3.0,
            alpha2: 3.0,
            alpha3_c: 2.7,
            alpha3_e: 2.4,
            alpha4: 3.5,
            k1: 2.0,
            k2: 3.0,
            bandwidth_hz: 1e6,
            gamma_c_sq: 0.4,
            gamma_e_sq: 0.6,
        }
    }

    pub fn distances(&self) -> [(&'static str, f64); 7] {
        [
            ("d_bs_ccu", self.d_bs_ccu),
            ("d_bs_ceu", self.d_bs_ceu),
            ("d_bs_ris", self.d_bs_ris),
            ("d_ris_ceu", self.d_ris_ceu),
            ("d_ris_ccu", self.d_ris_ccu),
            ("d_bs_other_ccu", self.d_bs_other_ccu),
            ("d_bs_other_ceu", self.d_bs_other_ceu),
        ]
    }

    pub fn exponents(&self) -> [(&'static str, f64); 5] {
        [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("alpha3_c", self.alpha3_c),
            ("alpha3_e", self.alpha3_e),
            ("alpha4", self.alpha4),
        ]
    }

    /// Checks every invariant and returns the names of exponents that fall
    /// below [`EXPONENT_WARNING_THRESHOLD`].
    pub fn validate(&self) -> Result<Vec<&'static str>> {
        for (name, d) in self.distances() {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Domain(format!(
                    "{name} must be a positive distance, got {d}"
                )));
            }
        }
        let mut low = Vec::new();
        for (name, a) in self.exponents() {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {a}")));
            }
            if a < EXPONENT_WARNING_THRESHOLD {
                low.push(name);
            }
        }
        for (name, k) in [("k1", self.k1), ("k2", self.k2)] {
            if !(k >= 0.0) {
                return Err(Error::Domain(format!(
                    "{name} must be non-negative, got {k}"
                )));
            }
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::Domain(format!(
                "bandwidth_hz must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        let (c, e) = (self.gamma_c_sq, self.gamma_e_sq);
        if !(c > 0.0 && c < 1.0 && e > 0.0 && e < 1.0) {
            return Err(Error::Domain(format!(
                "power allocation factors must lie in (0, 1), got gamma_c_sq={c}, gamma_e_sq={e}"
            )));
        }
        if (c + e - 1.0).abs() > ALLOCATION_TOLERANCE {
            return Err(Error::Domain(format!(
                "power allocation factors must sum to 1, got {}",
                c + e
            )));
        }
        if e <= c {
            return Err(Error::Domain(
                "gamma_e_sq must exceed gamma_c_sq (cell-edge user gets more power)".into(),
            ));
        }
        Ok(low)
    }
}

impl Default for ScenarioGeometry {
    fn default() -> Self {
        Self::table2()
    }
}

/// Power-law path gain `d^(-alpha)`.
pub fn path_loss(d: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "path-loss exponent must be positive, got {alpha}"
        )));
    }
    Ok(d.powf(-alpha))
}

/// Large-scale power gains indexed `[cell][user]`. The geometry is mirrored,
/// so both cells hold the same values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScale {
    pub eps_direct: [[f64; 2]; 2],
    pub eps_interf: [[f64; 2]; 2],
    pub eps_reflect: [[f64; 2]; 2],
    pub eps_transmit: [[f64; 2]; 2],
}

impl LargeScale {
    /// Every gain set to `value`; handy for unit-geometry checks.
    pub fn uniform(value: f64) -> Self {
        let v = [[value; 2]; 2];
        Self {
            eps_direct: v,
            eps_interf: v,
            eps_reflect: v,
            eps_transmit: v,
        }
    }

    pub fn direct(&self, cell: Cell, user: User) -> f64 {
        self.eps_direct[cell.index()][user.index()]
    }

    pub fn interf(&self, cell: Cell, user: User) -> f64 {
        self.eps_interf[cell.index()][user.index()]
    }

    pub fn reflect(&self, cell: Cell, user: User) -> f64 {
        self.eps_reflect[cell.index()][user.index()]
    }

    /// Gain of the through-surface path from the other cell's BS/RIS into
    /// `user` of `cell`.
    pub fn transmit(&self, cell: Cell, user: User) -> f64 {
        self.eps_transmit[cell.index()][user.index()]
    }
}

pub fn large_scale_from_geometry(geom: &ScenarioGeometry) -> Result<LargeScale> {
    let bs_ris = path_loss(geom.d_bs_ris, geom.alpha2)?;
    let ccu = [
        path_loss(geom.d_bs_ccu, geom.alpha1)?,
        path_loss(geom.d_bs_other_ccu, geom.alpha4)?,
        bs_ris * path_loss(geom.d_ris_ccu, geom.alpha3_c)?,
    ];
    let ceu = [
        path_loss(geom.d_bs_ceu, geom.alpha1)?,
        path_loss(geom.d_bs_other_ceu, geom.alpha4)?,
        bs_ris * path_loss(geom.d_ris_ceu, geom.alpha3_e)?,
    ];
    let pair = |i: usize| [[ccu[i], ceu[i]]; 2];
    Ok(LargeScale {
        eps_direct: pair(0),
        eps_interf: pair(1),
        eps_reflect: pair(2),
        eps_transmit: pair(2),
    })
}

pub fn sample_rayleigh_vector(len: usize, stream: RandomStream) -> Result<Vec<ComplexGain>> {
    if len == 0 {
        return Err(Error::Domain(
            "channel vector length must be at least 1".into(),
        ));
    }
    let mut rng = stream.rng();
    Ok(rayleigh(&mut rng, len))
}

/// Rician vector with an all-ones line-of-sight component.
pub fn sample_rician_vector(len: usize, k: f64, stream: RandomStream) -> Result<Vec<ComplexGain>> {
    if len == 0 {
        return Err(Error::Domain(
            "channel vector length must be at least 1".into(),
        ));
    }
    if !(k >= 0.0) {
        return Err(Error::Domain(format!(
            "Rician factor must be non-negative, got {k}"
        )));
    }
    let (los, nlos) = rician_weights(k);
    let mut rng = stream.rng();
    Ok(rayleigh(&mut rng, len)
        .into_iter()
        .map(|g| g * nlos + los)
        .collect())
}

/// Amplitude weights `(sqrt(K/(K+1)), sqrt(1/(K+1)))`.
pub fn rician_weights(k: f64) -> (f64, f64) {
    ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
}

fn rayleigh<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<ComplexGain> {
    (0..len)
        .map(|_| sample_standard_complex_gaussian(rng))
        .collect()
}

/// Identifies a channel inside a drop. Folded into the stream id together
/// with the drop index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelLabel {
    Direct(Cell, User),
    Interference(Cell, User),
    BsToRis(Cell),
    Reflect(Cell, User),
    Transmit(Cell, User),
}

const LABEL_BITS: u32 = 5;

impl ChannelLabel {
    fn code(self) -> u64 {
        let pair = |c: Cell, u: User| (c.index() * 2 + u.index()) as u64;
        match self {
            ChannelLabel::Direct(c, u) => pair(c, u),
            ChannelLabel::Interference(c, u) => 4 + pair(c, u),
            ChannelLabel::BsToRis(c) => 8 + c.index() as u64,
            ChannelLabel::Reflect(c, u) => 12 + pair(c, u),
            ChannelLabel::Transmit(c, u) => 16 + pair(c, u),
        }
    }

    pub fn stream(self, master_seed: u64, drop_index: u64) -> RandomStream {
        assert!(
            drop_index < 1 << (64 - LABEL_BITS),
            "drop index {drop_index} out of range"
        );
        RandomStream::new(master_seed, (drop_index << LABEL_BITS) | self.code())
    }
}

/// One Monte-Carlo realization of every small-scale channel of both cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallScaleDrop {
    /// BS`k` to user of cell `k`.
    pub w_direct: [[ComplexGain; 2]; 2],
    /// Other-cell BS to user of cell `k`.
    pub w_interf: [[ComplexGain; 2]; 2],
    /// BS`k` to RIS`k`.
    pub h_bs_ris: [Vec<ComplexGain>; 2],
    /// RIS`k` to user of cell `k` (reflection side).
    pub r_ris_user: [[Vec<ComplexGain>; 2]; 2],
    /// RIS`k` to user of the other cell (transmission side), indexed by the
    /// source cell `k` and the victim user's role.
    pub t_ris_user: [[Vec<ComplexGain>; 2]; 2],
}

impl SmallScaleDrop {
    pub fn elements(&self) -> usize {
        self.h_bs_ris[0].len()
    }

    /// A drop where every small-scale gain equals one.
    pub fn all_ones(len: usize) -> Self {
        let one = ComplexGain::new(1.0, 0.0);
        let v = vec![one; len];
        Self {
            w_direct: [[one; 2]; 2],
            w_interf: [[one; 2]; 2],
            h_bs_ris: [v.clone(), v.clone()],
            r_ris_user: [[v.clone(), v.clone()], [v.clone(), v.clone()]],
            t_ris_user: [[v.clone(), v.clone()], [v.clone(), v]],
        }
    }

    pub fn direct(&self, cell: Cell, user: User) -> ComplexGain {
        self.w_direct[cell.index()][user.index()]
    }

    pub fn interf(&self, cell: Cell, user: User) -> ComplexGain {
        self.w_interf[cell.index()][user.index()]
    }

    pub fn bs_ris(&self, cell: Cell) -> &[ComplexGain] {
        &self.h_bs_ris[cell.index()]
    }

    pub fn reflect(&self, cell: Cell, user: User) -> &[ComplexGain] {
        &self.r_ris_user[cell.index()][user.index()]
    }

    pub fn transmit(&self, source: Cell, victim_user: User) -> &[ComplexGain] {
        &self.t_ris_user[source.index()][victim_user.index()]
    }

    fn check(&self) -> bool {
        let l = self.elements();
        l >= 1
            && self.h_bs_ris.iter().all(|v| v.len() == l)
            && self.r_ris_user.iter().flatten().all(|v| v.len() == l)
            && self.t_ris_user.iter().flatten().all(|v| v.len() == l)
    }
}

/// Draws every channel of drop `drop_index` from its own stream.
pub fn draw_channel_drop(
    geom: &ScenarioGeometry,
    len: usize,
    drop_index: u64,
    master_seed: u64,
) -> Result<SmallScaleDrop> {
    if len == 0 {
        return Err(Error::Domain("RIS must have at least one element".into()));
    }
    let stream = |label: ChannelLabel| label.stream(master_seed, drop_index);
    let scalar = |label: ChannelLabel| sample_standard_complex_gaussian(&mut stream(label).rng());

    let per_user =
        |f: &dyn Fn(Cell, User) -> ComplexGain| Cell::ALL.map(|c| User::ALL.map(|u| f(c, u)));
    let w_direct = per_user(&|c, u| scalar(ChannelLabel::Direct(c, u)));
    let w_interf = per_user(&|c, u| scalar(ChannelLabel::Interference(c, u)));

    let h_bs_ris = [
        sample_rayleigh_vector(len, stream(ChannelLabel::BsToRis(Cell::One)))?,
        sample_rayleigh_vector(len, stream(ChannelLabel::BsToRis(Cell::Two)))?,
    ];
    let mut r_ris_user: [[Vec<ComplexGain>; 2]; 2] = Default::default();
    let mut t_ris_user: [[Vec<ComplexGain>; 2]; 2] = Default::default();
    for c in Cell::ALL {
        for u in User::ALL {
            r_ris_user[c.index()][u.index()] =
                sample_rician_vector(len, geom.k1, stream(ChannelLabel::Reflect(c, u)))?;
            t_ris_user[c.index()][u.index()] =
                sample_rician_vector(len, geom.k2, stream(ChannelLabel::Transmit(c, u)))?;
        }
    }

    let drop = SmallScaleDrop {
        w_direct,
        w_interf,
        h_bs_ris,
        r_ris_user,
        t_ris_user,
    };
    debug_assert!(drop.check());
    Ok(drop)
}
