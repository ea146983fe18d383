//! Phase-measurement statistics of a Mach-Zehnder interferometer fed with
//! a laser and squeezed vacuum, with a phase-sensitive amplifier and a
//! photon-counting detector at each output.
//!
//! Closed-form, linearized moments live in [`quadratures`], [`photostats`]
//! and [`sensitivity`]. [`oracle`] checks them by sampling the Gaussian input
//! noise and propagating it exactly through the optical chain. [`cli`] backs
//! the `mzsense` binary.
//!
//! ```
//! use mzsense::{model::{InterferometerParams, Strategy}, sensitivity};
//!
//! // 10 dB of input squeezing, no loss, coherent laser.
//! let params = InterferometerParams::lossless(0.5 * 10f64.ln(), 1e6);
//! let r = sensitivity::phase_uncertainty(Strategy::OptimalCombination, &params, 1.0);
//! assert!((r.normalized - 0.1f64.sqrt()).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod exec;
pub mod model;
pub mod oracle;
pub mod photostats;
pub mod quadratures;
pub mod sensitivity;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{InterferometerParams, LaserNoise, PhaseConfig, Strategy};
pub use oracle::{MomentReport, OracleConfig};
pub use photostats::PhotonStats;
pub use quadratures::{InputNoiseSpec, Quadrature, QuadratureStats};
pub use sensitivity::SensitivityResult;
