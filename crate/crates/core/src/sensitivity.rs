//! Phase uncertainty for each readout strategy, via the error-propagation
//! formula `Δφ = sqrt(Var O) / |d<O>/dφ|`, together with the width of the
//! high-sensitivity range and a few design helpers.
//!
//! Every closed form here is independent of the laser power through the
//! normalization `Δφ / Δφ_SNL`, and of the transfer gain `G`, which cancels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InterferometerParams, Strategy};
use crate::photostats::{
    cos_difference, photon_means, photon_second_moments, sumdiff_stats, transfer_gain, weighted_variance,
};

/// Below this magnitude `sin φ` (or `cos(φ/2)` for the single detector) is
/// treated as an exact zero of the signal slope.
pub const SINGULAR_TOL: f64 = 1e-9;

/// At a zero of `sin φ` the suboptimal formula has a removable singularity
/// when `|cos φ - cos φ_apr|` is below this.
pub const REMOVABLE_TOL: f64 = 1e-12;

/// Outcome of [`phase_uncertainty`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub strategy: Strategy,
    pub phi: f64,
    /// `+inf` at points where the strategy carries no phase information.
    pub dphi: f64,
    pub dphi_min: f64,
    pub dphi_snl: f64,
    pub k_factor: f64,
    pub eps2: f64,
    pub normalized: f64,
    /// Width of one high-sensitivity lobe; `None` for combination strategies.
    pub fwhm: Option<f64>,
    /// Number of high-sensitivity lobes per `2π`.
    pub fwhm_lobes: Option<u32>,
    /// Weight `k` of `N_k = N_- + k N_+`, for combination strategies.
    pub k_opt: Option<f64>,
    /// Why `dphi` diverges, when it does.
    pub diagnostic: Option<String>,
}

impl SensitivityResult {
    pub fn is_divergent(&self) -> bool {
        self.dphi.is_infinite()
    }
}

/// `Δφ_SNL = 1/sqrt(N)`.
pub fn snl(n_photons: f64) -> f64 {
    1.0 / n_photons.sqrt()
}

/// Overall quantum inefficiency `eps² = (1-mu)/mu + (1-eta)/(mu eta) e^{-2 r2}`.
pub fn inefficiency(params: &InterferometerParams) -> f64 {
    let (mu, eta) = (params.mu, params.eta);
    (1.0 - mu) / mu + (1.0 - eta) / (mu * eta) * (-2.0 * params.r2).exp()
}

/// Best sensitivity `sqrt((e^{-2 r1} + eps²)/N)`.
pub fn dphi_min(params: &InterferometerParams) -> f64 {
    ((params.squeezing() + inefficiency(params)) / params.n_photons).sqrt()
}

/// Deterioration factor `K = (A + eps²)/N`.
pub fn k_factor(params: &InterferometerParams) -> f64 {
    (params.technical_noise_factor() + inefficiency(params)) / params.n_photons
}

/// Sensitivity gain over shot noise, amplitude-referred:
/// `-20 log10(Δφ_min / Δφ_SNL)`.
pub fn gain_db(params: &InterferometerParams) -> f64 {
    -10.0 * (params.squeezing() + inefficiency(params)).log10()
}

/// Optimal weight `k_opt = -Cov(N+, N-)/Var(N+) = cos φ`.
pub fn optimal_weight(phi: f64) -> f64 {
    phi.cos()
}

pub fn phase_uncertainty(strategy: Strategy, params: &InterferometerParams, phi: f64) -> SensitivityResult {
    let min = dphi_min(params);
    let min2 = min * min;
    let k = k_factor(params);
    let mut diagnostic = None;

    let dphi = match strategy {
        Strategy::SingleDetector => {
            let (s, c) = (0.5 * phi).sin_cos();
            if c.abs() < SINGULAR_TOL {
                diagnostic = Some("single detector: bright fringe at port 1, signal slope vanishes".to_string());
                f64::INFINITY
            } else {
                let t = s / c;
                (min2 + k * t * t).sqrt()
            }
        }
        Strategy::Differential => {
            let (s, c) = phi.sin_cos();
            if s.abs() < SINGULAR_TOL {
                diagnostic = Some("differential: sin(phi) = 0, signal slope vanishes".to_string());
                f64::INFINITY
            } else {
                let cot = c / s;
                (min2 + k * cot * cot).sqrt()
            }
        }
        Strategy::OptimalCombination => min,
        Strategy::Suboptimal { phi_apr } => {
            let s = phi.sin();
            let dcos = cos_difference(phi, phi_apr);
            if s.abs() < SINGULAR_TOL {
                if dcos.abs() < REMOVABLE_TOL {
                    min
                } else {
                    diagnostic = Some(
                        "suboptimal: sin(phi) = 0 with cos(phi_apr) != cos(phi), signal slope vanishes".to_string(),
                    );
                    f64::INFINITY
                }
            } else {
                let ratio = dcos / s;
                (min2 + k * ratio * ratio).sqrt()
            }
        }
    };

    let (fwhm_w, lobes) = match strategy {
        Strategy::SingleDetector => (fwhm(strategy, params).ok(), Some(1)),
        Strategy::Differential => (fwhm(strategy, params).ok(), Some(2)),
        _ => (None, None),
    };
    let k_opt = match strategy {
        Strategy::OptimalCombination => Some(optimal_weight(phi)),
        Strategy::Suboptimal { phi_apr } => Some(phi_apr.cos()),
        _ => None,
    };
    let snl = snl(params.n_photons);

    SensitivityResult {
        strategy,
        phi,
        dphi,
        dphi_min: min,
        dphi_snl: snl,
        k_factor: k,
        eps2: inefficiency(params),
        normalized: dphi / snl,
        fwhm: fwhm_w,
        fwhm_lobes: lobes,
        k_opt,
        diagnostic,
    }
}

/// Weight `k` of the combined observable used by `strategy` at `phi`.
fn combination_weight(strategy: Strategy, phi: f64) -> Option<f64> {
    match strategy {
        Strategy::OptimalCombination => Some(phi.cos()),
        Strategy::Suboptimal { phi_apr } => Some(phi_apr.cos()),
        _ => None,
    }
}

/// Mean of the measured observable. For combination strategies the weight is
/// held fixed at its value for `weight_phi`.
pub fn observable_mean(strategy: Strategy, params: &InterferometerParams, phi: f64, weight_phi: f64) -> f64 {
    let (n1, n2) = photon_means(params, phi);
    match combination_weight(strategy, weight_phi) {
        None if strategy == Strategy::SingleDetector => n1,
        None => n1 - n2,
        Some(k) => (n1 - n2) + k * (n1 + n2),
    }
}

/// Variance of the measured observable.
pub fn observable_variance(strategy: Strategy, params: &InterferometerParams, phi: f64) -> f64 {
    match strategy {
        Strategy::SingleDetector => photon_second_moments(params, phi).0,
        Strategy::Differential => sumdiff_stats(params, phi).3,
        Strategy::OptimalCombination => weighted_variance(params, phi, phi),
        Strategy::Suboptimal { phi_apr } => weighted_variance(params, phi, phi_apr),
    }
}

/// Analytic `d<O>/dφ`. `<N+>` is phase independent, so every combination
/// shares the slope of `<N->`.
pub fn signal_slope(strategy: Strategy, params: &InterferometerParams, phi: f64) -> f64 {
    let scale = transfer_gain(params).powi(2) * params.n_photons;
    match strategy {
        Strategy::SingleDetector => 0.5 * scale * phi.sin(),
        _ => scale * phi.sin(),
    }
}

/// `sqrt(Var O)/|d<O>/dφ|` from the photon statistics. `None` where the
/// slope is exactly zero.
pub fn error_propagation(strategy: Strategy, params: &InterferometerParams, phi: f64) -> Option<f64> {
    let slope = signal_slope(strategy, params, phi);
    if slope == 0.0 {
        return None;
    }
    let v = observable_variance(strategy, params, phi);
    Some(v.max(0.0).sqrt() / slope.abs())
}

fn fwhm_ratio(params: &InterferometerParams) -> f64 {
    let eps2 = inefficiency(params);
    ((params.squeezing() + eps2) / (params.technical_noise_factor() + eps2)).sqrt()
}

/// Width of the phase range where `(Δφ)²` stays within twice its minimum:
/// `4 atan(sqrt((e^{-2r1}+eps²)/(A+eps²)))` for one detector, half that
/// (per lobe, two lobes per period) for differential detection.
pub fn fwhm(strategy: Strategy, params: &InterferometerParams) -> Result<f64> {
    let w = fwhm_ratio(params).atan();
    match strategy {
        Strategy::SingleDetector => Ok(4.0 * w),
        Strategy::Differential => Ok(2.0 * w),
        _ => Err(Error::FwhmUndefined),
    }
}

/// High-sensitivity approximation `(4 or 2)/sqrt(A) · Δφ_min/Δφ_SNL`.
pub fn fwhm_approx(strategy: Strategy, params: &InterferometerParams) -> Result<f64> {
    let norm = dphi_min(params) / snl(params.n_photons);
    let a = params.technical_noise_factor().sqrt();
    match strategy {
        Strategy::SingleDetector => Ok(4.0 / a * norm),
        Strategy::Differential => Ok(2.0 / a * norm),
        _ => Err(Error::FwhmUndefined),
    }
}

/// Largest a-priori phase error `sqrt((e^{-2r1}+eps²)/(A+eps²))` that keeps
/// the suboptimal strategy within `sqrt(2)` of the optimum. Independent of N.
pub fn apriori_tolerance(params: &InterferometerParams) -> f64 {
    fwhm_ratio(params)
}

/// `(Δφ)² ≈ Δφ_min² + K (Δφ_apr)²` for a small a-priori error.
pub fn small_deviation_dphi2(params: &InterferometerParams, dphi_apr: f64) -> f64 {
    dphi_min(params).powi(2) + k_factor(params) * dphi_apr * dphi_apr
}

/// Result of [`required_r2`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum R2Requirement {
    Attainable(f64),
    /// The target is at or below the internal-loss floor `(1-mu)/mu`.
    Unattainable {
        floor: f64,
    },
}

/// Output squeeze factor needed to reach `target_eps2`, or the internal-loss
/// floor if no amount of output amplification suffices.
pub fn required_r2(mu: f64, eta: f64, target_eps2: f64) -> R2Requirement {
    let floor = (1.0 - mu) / mu;
    if eta >= 1.0 {
        return if target_eps2 >= floor {
            R2Requirement::Attainable(0.0)
        } else {
            R2Requirement::Unattainable { floor }
        };
    }
    if target_eps2 <= floor {
        return R2Requirement::Unattainable { floor };
    }
    let r2 = -0.5 * ((target_eps2 - floor) * mu * eta / (1.0 - eta)).ln();
    R2Requirement::Attainable(r2.max(0.0))
}

/// Inefficiency implied by an observed amplitude-referred gain (dB) at the
/// given input squeezing. `None` if the gain exceeds what the squeezing
/// alone allows.
pub fn implied_inefficiency(r1: f64, gain_db: f64) -> Option<f64> {
    let eps2 = 10f64.powf(-gain_db / 10.0) - (-2.0 * r1).exp();
    (eps2 >= 0.0).then_some(eps2)
}

/// External transmissivity that yields `eps2` for given `mu` and `r2`.
pub fn required_eta(mu: f64, r2: f64, eps2: f64) -> Option<f64> {
    let excess = eps2 - (1.0 - mu) / mu;
    (excess >= 0.0).then(|| 1.0 / (1.0 + excess * mu * (2.0 * r2).exp()))
}
