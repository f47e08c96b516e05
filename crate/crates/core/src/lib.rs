//! Link-level Monte-Carlo simulator for a two-cell NOMA downlink in which
//! each base station is paired with a STAR-RIS (simultaneously transmitting
//! and reflecting reconfigurable surface).
//!
//! The joint design uses each surface's transmission to cancel the
//! inter-cell interference seen by the neighbouring cell and its reflection
//! to coherently boost the own cell-center user. Signal-enhancement-only,
//! cancellation-only and no-RIS baselines are provided for comparison.
//!
//! Module map:
//! - [`numerics`]: complex helpers, random streams, wide least-norm solver
//! - [`channel`]: geometry, path loss and per-drop fading
//! - [`beamforming`]: surface configurations for every design
//! - [`link`]: effective channels and NOMA rates
//! - [`experiment`]: Monte-Carlo engine, sweeps, minimal element count
//! - [`cli`]: config files, presets and CSV/JSON output

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod channel;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod link;
pub mod numerics;

pub use beamforming::{CancellationOutcome, DesignKind, DesignedPair, StarRisConfig};
pub use channel::{Cell, LargeScale, ScenarioGeometry, SmallScaleDrop, User};
pub use error::{Error, Result};
pub use experiment::{MonteCarloResult, PointResult, Scenario, SweepOutput, SweepSpec};
pub use link::{PowerAllocation, RateReport};
pub use numerics::{ComplexGain, RandomStream};
