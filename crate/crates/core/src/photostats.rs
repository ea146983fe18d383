//! Linearized photon-counting statistics of the two detectors.
//!
//! Counts are `N_i = (g_i)²/2` for the amplified quadrature at each port,
//! expanded to first order in the noise: `N_i = <g_i>²/2 + <g_i> dg_i`.
//! The vacuum offset and terms quadratic in the noise are dropped here; the
//! Monte-Carlo oracle keeps them.

use serde::{Deserialize, Serialize};

use crate::model::InterferometerParams;
use crate::quadratures::{detector_field_stats, InputNoiseSpec, Quadrature, QuadratureStats};
use crate::sensitivity::inefficiency;

/// First and second moments of `N1`, `N2` and of `N± = N1 ± N2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhotonStats {
    pub mean_n1: f64,
    pub mean_n2: f64,
    pub var_n1: f64,
    pub var_n2: f64,
    pub cov_n1n2: f64,
    pub mean_nplus: f64,
    pub mean_nminus: f64,
    pub var_nplus: f64,
    pub var_nminus: f64,
    pub cov_npm: f64,
}

impl PhotonStats {
    pub const FIELD_NAMES: [&'static str; 10] = [
        "mean_n1",
        "mean_n2",
        "var_n1",
        "var_n2",
        "cov_n1n2",
        "mean_nplus",
        "mean_nminus",
        "var_nplus",
        "var_nminus",
        "cov_npm",
    ];

    /// Completes the sum/difference moments from the N1/N2 moments.
    pub fn from_pair(mean_n1: f64, mean_n2: f64, var_n1: f64, var_n2: f64, cov_n1n2: f64) -> Self {
        Self {
            mean_n1,
            mean_n2,
            var_n1,
            var_n2,
            cov_n1n2,
            mean_nplus: mean_n1 + mean_n2,
            mean_nminus: mean_n1 - mean_n2,
            var_nplus: var_n1 + var_n2 + 2.0 * cov_n1n2,
            var_nminus: var_n1 + var_n2 - 2.0 * cov_n1n2,
            cov_npm: var_n1 - var_n2,
        }
    }

    pub fn values(&self) -> [f64; 10] {
        [
            self.mean_n1,
            self.mean_n2,
            self.var_n1,
            self.var_n2,
            self.cov_n1n2,
            self.mean_nplus,
            self.mean_nminus,
            self.var_nplus,
            self.var_nminus,
            self.cov_npm,
        ]
    }

    pub fn from_values(v: [f64; 10]) -> Self {
        Self {
            mean_n1: v[0],
            mean_n2: v[1],
            var_n1: v[2],
            var_n2: v[3],
            cov_n1n2: v[4],
            mean_nplus: v[5],
            mean_nminus: v[6],
            var_nplus: v[7],
            var_nminus: v[8],
            cov_npm: v[9],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> {
        Self::FIELD_NAMES.into_iter().zip(self.values())
    }

    /// Variance of `N_k = N_- + k N_+`.
    pub fn weighted_variance(&self, k: f64) -> f64 {
        self.var_nminus + 2.0 * k * self.cov_npm + k * k * self.var_nplus
    }

    /// Pearson correlation of `N1` and `N2`; zero when either is deterministic.
    pub fn correlation(&self) -> f64 {
        let denom = (self.var_n1 * self.var_n2).sqrt();
        if denom > 0.0 {
            self.cov_n1n2 / denom
        } else {
            0.0
        }
    }
}

/// Amplitude transfer `G = sqrt(mu eta) e^{r2}` from the laser to the detectors.
pub fn transfer_gain(params: &InterferometerParams) -> f64 {
    (params.mu * params.eta).sqrt() * params.r2.exp()
}

/// `(<N1>, <N2>) = G² N (sin²(phi/2), cos²(phi/2))`.
pub fn photon_means(params: &InterferometerParams, phi: f64) -> (f64, f64) {
    let scale = transfer_gain(params).powi(2) * params.n_photons;
    let (s, c) = (0.5 * phi).sin_cos();
    (scale * s * s, scale * c * c)
}

/// `(Var N1, Var N2, Cov(N1, N2))`.
pub fn photon_second_moments(params: &InterferometerParams, phi: f64) -> (f64, f64, f64) {
    let scale = transfer_gain(params).powi(4) * params.n_photons;
    let sq = params.squeezing();
    let a = params.technical_noise_factor();
    let eps2 = inefficiency(params);
    let (s, c) = (0.5 * phi).sin_cos();
    let (s2, c2) = (s * s, c * c);
    let var1 = scale * s2 * (sq * c2 + a * s2 + eps2);
    let var2 = scale * c2 * (sq * s2 + a * c2 + eps2);
    let cov = 0.25 * scale * (a - sq) * phi.sin().powi(2);
    (var1, var2, cov)
}

/// `(<N+>, <N->, Var N+, Var N-, Cov(N+, N-))` from their own closed forms.
pub fn sumdiff_stats(params: &InterferometerParams, phi: f64) -> (f64, f64, f64, f64, f64) {
    let g2 = transfer_gain(params).powi(2);
    let n = params.n_photons;
    let scale = g2 * g2 * n;
    let sq = params.squeezing();
    let a = params.technical_noise_factor();
    let eps2 = inefficiency(params);
    let (s, c) = phi.sin_cos();
    (
        g2 * n,
        -g2 * n * c,
        scale * (a + eps2),
        scale * (sq * s * s + a * c * c + eps2),
        -scale * (a + eps2) * c,
    )
}

/// Variance of `N_k` with `k = cos(phi_apr)`:
/// `G⁴ N [(e^{-2r1} + eps²) sin²phi + (A + eps²)(cos phi - cos phi_apr)²]`.
pub fn weighted_variance(params: &InterferometerParams, phi: f64, phi_apr: f64) -> f64 {
    let scale = transfer_gain(params).powi(4) * params.n_photons;
    let sq = params.squeezing();
    let a = params.technical_noise_factor();
    let eps2 = inefficiency(params);
    let dcos = cos_difference(phi, phi_apr);
    let out = scale * ((sq + eps2) * phi.sin().powi(2) + (a + eps2) * dcos * dcos);
    debug_assert!({
        let alt = weighted_variance_decomposed(params, phi, phi_apr);
        (out - alt).abs() <= 1e-12 * out.abs().max(alt.abs()) + 1e-9 * scale
    });
    out
}

/// Same quantity assembled as `Var N- + 2 Cov(N+,N-) cos phi_apr + Var N+ cos² phi_apr`.
pub fn weighted_variance_decomposed(params: &InterferometerParams, phi: f64, phi_apr: f64) -> f64 {
    let (_, _, vp, vm, cpm) = sumdiff_stats(params, phi);
    let k = phi_apr.cos();
    vm + 2.0 * cpm * k + vp * k * k
}

/// `cos(a) - cos(b)` via the product form, accurate when `a ≈ b`.
pub(crate) fn cos_difference(a: f64, b: f64) -> f64 {
    -2.0 * (0.5 * (a + b)).sin() * (0.5 * (a - b)).sin()
}

/// All closed-form moments at phase `phi`.
pub fn photon_stats(params: &InterferometerParams, phi: f64) -> PhotonStats {
    let (m1, m2) = photon_means(params, phi);
    let (v1, v2, c) = photon_second_moments(params, phi);
    let (mp, mm, vp, vm, cpm) = sumdiff_stats(params, phi);
    PhotonStats {
        mean_n1: m1,
        mean_n2: m2,
        var_n1: v1,
        var_n2: v2,
        cov_n1n2: c,
        mean_nplus: mp,
        mean_nminus: mm,
        var_nplus: vp,
        var_nminus: vm,
        cov_npm: cpm,
    }
}

/// Moments obtained from the detector quadrature statistics instead:
/// `<N> = <g>²/2`, `Var N = <g>² Var(dg)`, `Cov = <g1><g2> Cov(dg1, dg2)`.
pub fn photon_stats_from_fields(fields: &QuadratureStats) -> PhotonStats {
    let m1 = fields.mean_of(Quadrature::G1s);
    let m2 = fields.mean_of(Quadrature::G2c);
    PhotonStats::from_pair(
        0.5 * m1 * m1,
        0.5 * m2 * m2,
        m1 * m1 * fields.var(Quadrature::G1s),
        m2 * m2 * fields.var(Quadrature::G2c),
        m1 * m2 * fields.covariance(Quadrature::G1s, Quadrature::G2c),
    )
}

/// Convenience: field-route moments with the default noise assumptions.
pub fn photon_stats_via_fields(params: &InterferometerParams, phi: f64) -> PhotonStats {
    let noise = InputNoiseSpec::from_params(params);
    photon_stats_from_fields(&detector_field_stats(params, phi, &noise))
}
