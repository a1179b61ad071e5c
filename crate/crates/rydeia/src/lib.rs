//! Simulation and extraction toolkit for microwave electrometry with
//! MW-dressed four-level cascade atoms.
//!
//! The crate covers the full desk-scale chain:
//!
//! * closed-form weak-probe susceptibility of the four-level system and its
//!   decomposition into three decaying dressed resonances
//!   ([`susceptibility`]);
//! * the adiabatically eliminated three-level EIA model with its two-pole
//!   response and double-Lorentzian limit ([`eia`]);
//! * an independent full Lindblad steady-state solver used as ground truth
//!   for the analytics ([`lindblad`]);
//! * transmission-spectrum synthesis with calibrated synthetic noise
//!   ([`spectrum`]);
//! * two independent splitting-extraction pipelines — local Lorentzian dip
//!   fits and global susceptibility fits — plus deviation metrics, linewidth
//!   and visibility ([`fitting`]);
//! * parameter-sweep orchestration with regime classification ([`sweeps`]).
//!
//! All frequencies inside the library are angular (rad/s); file formats and
//! CLI flags are in Hz/MHz. See [`params`] for the conversion helpers and
//! pinned SI constants.

// Validation guards are written as `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eia;
pub mod error;
pub mod fitting;
pub mod lindblad;
pub mod lm;
pub mod params;
pub mod rng;
pub mod spectrum;
pub mod susceptibility;
pub mod sweeps;

pub use error::{Error, Result};
pub use params::{DipoleTransition, SystemParams};
pub use spectrum::{GridSpec, NoiseModel, Spectrum};
