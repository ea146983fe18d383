//! Parameter types and unit conventions.
//!
//! Phases are in radians. Squeeze factors are natural-log amplitude gains
//! `r >= 0`; a DOPA with factor `r` scales one quadrature by `e^r` and the
//! orthogonal one by `e^-r`. Decibels appear only at the CLI boundary and
//! are variance-referred: `dB = 10 log10(e^{2r})`.
//!
//! The squeezer and the output amplifiers act with opposite signs in the
//! physical setup. That sign is fixed by which quadrature each device acts
//! on (the input squeezes the sine quadrature of the dark input mode, the
//! output DOPAs amplify the detected quadratures), so only magnitudes are
//! stored here.

use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Laser excess noise, given either as `g2` or as the variance factor
/// `A = N (g2 - 1) + 1` directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LaserNoise {
    /// Degree of second-order coherence, `g2 >= 1`.
    G2(f64),
    /// Amplitude-quadrature variance inflation factor `A >= 1`.
    Factor(f64),
}

/// All physical knobs of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerParams {
    /// Squeeze factor of the input squeezer (DOPA1).
    pub r1: f64,
    /// Squeeze factor of each output amplifier (DOPA2 = DOPA3).
    pub r2: f64,
    /// Internal power transmissivity, in (0, 1].
    pub mu: f64,
    /// External power transmissivity including detector efficiency, in (0, 1].
    pub eta: f64,
    /// Mean photon number `N` of the laser; the classical amplitude is `sqrt(N)`.
    pub n_photons: f64,
    pub laser: LaserNoise,
}

impl Default for InterferometerParams {
    fn default() -> Self {
        Self {
            r1: 0.0,
            r2: 0.0,
            mu: 1.0,
            eta: 1.0,
            n_photons: 1e6,
            laser: LaserNoise::G2(1.0),
        }
    }
}

impl InterferometerParams {
    /// Lossless, coherent-laser interferometer with the given squeezing.
    pub fn lossless(r1: f64, n_photons: f64) -> Self {
        Self {
            r1,
            n_photons,
            ..Self::default()
        }
    }

    /// Sets the laser noise through `A` instead of `g2`.
    pub fn with_noise_factor(mut self, a: f64) -> Self {
        self.laser = LaserNoise::Factor(a);
        self
    }

    pub fn with_g2(mut self, g2: f64) -> Self {
        self.laser = LaserNoise::G2(g2);
        self
    }

    /// Classical amplitude `alpha = sqrt(N)`, taken real.
    pub fn alpha(&self) -> f64 {
        self.n_photons.sqrt()
    }

    pub fn g2(&self) -> f64 {
        match self.laser {
            LaserNoise::G2(g2) => g2,
            LaserNoise::Factor(a) => 1.0 + (a - 1.0) / self.n_photons,
        }
    }

    /// Squeezed-quadrature variance ratio `e^{-2 r1}`.
    pub fn squeezing(&self) -> f64 {
        (-2.0 * self.r1).exp()
    }

    pub fn technical_noise_factor(&self) -> f64 {
        technical_noise_factor(self)
    }

    pub fn validate(&self) -> Result<()> {
        validate(self)
    }
}

/// Converts variance-referred squeezing in dB to a squeeze factor, so that
/// `e^{2r} = 10^{dB/10}`.
pub fn db_to_squeeze_factor(db: f64) -> Result<f64> {
    if !db.is_finite() {
        return Err(Error::Domain(format!("squeezing in dB must be finite, got {db}")));
    }
    Ok(db * LN_10 / 20.0)
}

pub fn squeeze_factor_to_db(r: f64) -> f64 {
    20.0 * r / LN_10
}

/// `A = N (g2 - 1) + 1`.
pub fn technical_noise_factor(params: &InterferometerParams) -> f64 {
    match params.laser {
        LaserNoise::G2(g2) => params.n_photons * (g2 - 1.0) + 1.0,
        LaserNoise::Factor(a) => a,
    }
}

/// Checks every field invariant and reports all violations at once.
pub fn validate(params: &InterferometerParams) -> Result<()> {
    let mut errs = Vec::new();
    let mut push = |field: &'static str, message: String| errs.push(Violation { field, message });

    for (field, name, r) in [
        ("r1", "input squeeze factor", params.r1),
        ("r2", "output squeeze factor", params.r2),
    ] {
        if !r.is_finite() {
            push(field, format!("{name} {field} must be finite, got {r}"));
        } else if r < 0.0 {
            push(field, format!("{name} {field} must be >= 0, got {r}"));
        }
    }
    for (field, name, t) in [
        ("mu", "internal transmissivity", params.mu),
        ("eta", "external transmissivity", params.eta),
    ] {
        if t.is_nan() || t <= 0.0 {
            push(field, format!("{name} must be > 0, got {t}"));
        } else if t > 1.0 {
            push(field, format!("{name} must be <= 1, got {t}"));
        }
    }
    let n = params.n_photons;
    if !(n.is_finite() && n > 0.0) {
        push("n_photons", format!("photon number must be finite and > 0, got {n}"));
    }
    match params.laser {
        LaserNoise::G2(g2) if !(g2.is_finite() && g2 >= 1.0) => {
            push("g2", format!("g2 must be ≥ 1, got {g2}"));
        }
        LaserNoise::Factor(a) if !(a.is_finite() && a >= 1.0) => {
            push("A", format!("technical noise factor A must be ≥ 1, got {a}"));
        }
        _ => {}
    }

    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(errs))
    }
}

/// Interferometer phase and the a-priori estimate used by the suboptimal
/// strategy. The arm phases are `+phi/2` and `-phi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub phi: f64,
    pub phi_apr: f64,
}

/// Which observable is used to read out the phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    /// Photon number at output 1 only.
    SingleDetector,
    /// Difference `N1 - N2`.
    Differential,
    /// `N_- + k N_+` with the optimal weight `k = cos(phi)`.
    OptimalCombination,
    /// `N_- + k N_+` with `k = cos(phi_apr)`.
    Suboptimal { phi_apr: f64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::SingleDetector => "single",
            Strategy::Differential => "differential",
            Strategy::OptimalCombination => "optimal",
            Strategy::Suboptimal { .. } => "suboptimal",
        }
    }
}
