//! Phase-space quasiprobability functions of order `s`, noise as a change of
//! order, and a bounded CHSH-shaped entanglement witness with optimization
//! and sweep drivers.
//!
//! Conventions: `W(alpha; s) = (2/pi) sum_n c_n(s) p_alpha(n)` with
//! `c_n(s) = ((s+1)/(s-1))^n / (1-s)`, so `s = 0` is the Wigner function and
//! `s = -1` the Husimi Q function. Displacements are complex amplitudes.

pub mod error;
pub mod noise;
pub mod order;
pub mod qp;
pub mod quad;
pub mod search;
pub mod states;
pub mod sweep_io;
pub mod validate;
pub mod witness;

pub use error::{Error, Result};
pub use noise::{DetectionNoise, ThermalNoise};
pub use order::{OrderKind, OrderParam, PhaseSpacePoint};
pub use qp::PhotonDistribution;
pub use search::{SearchConfig, SweepResult};
pub use states::{SingleModeState, TmsvSpec};
pub use witness::{BellSettings, ClampRule, WitnessReport};
