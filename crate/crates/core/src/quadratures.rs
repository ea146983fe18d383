//! Means and covariances of quadrature observables along the optical chain:
//! squeezer, 50/50 beamsplitter, arm phases `±phi/2` with internal loss `mu`,
//! 50/50 beamsplitter, output DOPAs, external loss `eta`.
//!
//! Quadratures are normalized so that the vacuum variance is 1/2.

use std::fmt;

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::model::InterferometerParams;
use crate::sensitivity::inefficiency;

/// Quadrature identifiers. `E*` are the outputs of the core interferometer
/// (after the second beamsplitter), `G*` the fields at the photodetectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    E1c,
    E1s,
    E2c,
    E2s,
    G1c,
    G1s,
    G2c,
    G2s,
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quadrature::E1c => "e1c",
            Quadrature::E1s => "e1s",
            Quadrature::E2c => "e2c",
            Quadrature::E2s => "e2s",
            Quadrature::G1c => "g1c",
            Quadrature::G1s => "g1s",
            Quadrature::G2c => "g2c",
            Quadrature::G2s => "g2s",
        };
        f.write_str(s)
    }
}

/// Mean vector and covariance matrix over a labeled set of quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureStats {
    pub labels: Vec<Quadrature>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl QuadratureStats {
    pub fn new(labels: Vec<Quadrature>, mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        assert_eq!(labels.len(), mean.len(), "one mean per label");
        assert_eq!(
            (labels.len(), labels.len()),
            cov.shape(),
            "square covariance over the labels"
        );
        Self { labels, mean, cov }
    }

    pub fn index(&self, q: Quadrature) -> Option<usize> {
        self.labels.iter().position(|&l| l == q)
    }

    fn idx(&self, q: Quadrature) -> usize {
        self.index(q).unwrap_or_else(|| panic!("quadrature {q} not tracked"))
    }

    pub fn mean_of(&self, q: Quadrature) -> f64 {
        self.mean[self.idx(q)]
    }

    pub fn var(&self, q: Quadrature) -> f64 {
        let i = self.idx(q);
        self.cov[(i, i)]
    }

    pub fn covariance(&self, a: Quadrature, b: Quadrature) -> f64 {
        self.cov[(self.idx(a), self.idx(b))]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.cov
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric, non-negative diagonal, and no eigenvalue below `-tol`
    /// (relative to the largest diagonal entry when that exceeds 1).
    pub fn is_valid_covariance(&self, tol: f64) -> bool {
        let n = self.labels.len();
        let scale = (0..n).map(|i| self.cov[(i, i)]).fold(1.0, f64::max);
        let symmetric = (0..n).all(|i| (0..n).all(|j| (self.cov[(i, j)] - self.cov[(j, i)]).abs() <= tol * scale));
        symmetric && (0..n).all(|i| self.cov[(i, i)] >= 0.0) && self.min_eigenvalue() >= -tol * scale
    }
}

/// Variances of every independent input noise quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputNoiseSpec {
    /// Squeezed sine quadrature of the dark input, `e^{-2 r1}/2`.
    pub var_a1s: f64,
    /// Anti-squeezed cosine quadrature, `e^{2 r1}/2` for a minimum-uncertainty state.
    pub var_a1c: f64,
    /// Laser amplitude quadrature, `A/2`.
    pub var_z2c: f64,
    /// Laser phase quadrature. Never enters a linearized moment.
    pub var_z2s: f64,
    /// Every loss port.
    pub vacuum: f64,
}

impl InputNoiseSpec {
    pub fn from_params(params: &InterferometerParams) -> Self {
        Self {
            var_a1s: 0.5 * (-2.0 * params.r1).exp(),
            var_a1c: 0.5 * (2.0 * params.r1).exp(),
            var_z2c: 0.5 * params.technical_noise_factor(),
            var_z2s: 0.5,
            vacuum: 0.5,
        }
    }

    pub fn with_laser_phase_variance(mut self, var: f64) -> Self {
        self.var_z2s = var;
        self
    }

    /// `var_a1s * var_a1c >= 1/4` up to rounding.
    pub fn satisfies_uncertainty_relation(&self) -> bool {
        self.var_a1s * self.var_a1c >= 0.25 * (1.0 - 1e-12)
    }

    /// Diagonal covariance of the core inputs, ordered
    /// `(a1c, a1s, z2c, z2s, m+c, m+s, m-c, m-s)`.
    fn core_input_variances(&self) -> SVector<f64, 8> {
        SVector::from([
            self.var_a1c,
            self.var_a1s,
            self.var_z2c,
            self.var_z2s,
            self.vacuum,
            self.vacuum,
            self.vacuum,
            self.vacuum,
        ])
    }
}

/// Classical means `(<e1s>, <e2c>)` of the core outputs. The other two
/// output quadratures have zero mean.
pub fn core_output_means(params: &InterferometerParams, phi: f64) -> (f64, f64) {
    let amp = (2.0 * params.mu).sqrt() * params.alpha();
    let (s, c) = (0.5 * phi).sin_cos();
    (amp * s, amp * c)
}

/// Linear map from the core input noise `(a1c, a1s, z2c, z2s, m+c, m+s,
/// m-c, m-s)` to the output noise `(de1c, de1s, de2c, de2s)`.
pub fn core_transfer(params: &InterferometerParams, phi: f64) -> SMatrix<f64, 4, 8> {
    let t = params.mu.sqrt();
    let l = (1.0 - params.mu).sqrt();
    let (s, c) = (0.5 * phi).sin_cos();
    #[rustfmt::skip]
    let m = SMatrix::<f64, 4, 8>::from_row_slice(&[
        //  a1c     a1s     z2c     z2s    m+c  m+s  m-c  m-s
        t * c,   0.0,    0.0,   -t * s,   l,  0.0, 0.0, 0.0,
        0.0,     t * c,  t * s,  0.0,    0.0,  l,  0.0, 0.0,
        0.0,    -t * s,  t * c,  0.0,    0.0, 0.0,  l,  0.0,
        t * s,   0.0,    0.0,    t * c,  0.0, 0.0, 0.0,  l,
    ]);
    m
}

/// Covariance of the zero-mean core output noise `(de1c, de1s, de2c, de2s)`.
pub fn core_noise_covariance(params: &InterferometerParams, phi: f64, noise: &InputNoiseSpec) -> QuadratureStats {
    let t = core_transfer(params, phi);
    let sigma_in = SMatrix::<f64, 8, 8>::from_diagonal(&noise.core_input_variances());
    let cov = t * sigma_in * t.transpose();
    QuadratureStats::new(
        vec![Quadrature::E1c, Quadrature::E1s, Quadrature::E2c, Quadrature::E2s],
        DVector::zeros(4),
        DMatrix::from_iterator(4, 4, cov.iter().copied()),
    )
}

/// Closed-form statistics of the two measured quadratures `(g1s, g2c)`.
///
/// With `G = sqrt(mu eta) e^{r2}` and default noise this is
/// `Var(dg1s) = G²/2 (e^{-2r1} cos²(phi/2) + A sin²(phi/2) + eps²)`,
/// `Var(dg2c)` with sin and cos swapped, and
/// `Cov = G²/4 (A - e^{-2r1}) sin(phi)`.
pub fn detector_field_stats(params: &InterferometerParams, phi: f64, noise: &InputNoiseSpec) -> QuadratureStats {
    let amp = params.eta.sqrt() * params.r2.exp();
    let (m1, m2) = core_output_means(params, phi);
    let g2 = params.mu * params.eta * (2.0 * params.r2).exp();
    let eps2 = inefficiency(params);
    let (s, c) = (0.5 * phi).sin_cos();

    let v1 = g2 * (noise.var_a1s * c * c + noise.var_z2c * s * s + noise.vacuum * eps2);
    let v2 = g2 * (noise.var_a1s * s * s + noise.var_z2c * c * c + noise.vacuum * eps2);
    let cv = g2 * (noise.var_z2c - noise.var_a1s) * s * c;

    QuadratureStats::new(
        vec![Quadrature::G1s, Quadrature::G2c],
        DVector::from_vec(vec![amp * m1, amp * m2]),
        DMatrix::from_row_slice(2, 2, &[v1, cv, cv, v2]),
    )
}

/// Maps core output noise through the output DOPAs and external loss,
/// giving all four detector quadratures `(g1c, g1s, g2c, g2s)`.
///
/// DOPA2 amplifies `e1s` and deamplifies `e1c`; DOPA3 amplifies `e2c` and
/// deamplifies `e2s`. Each external loss port adds independent vacuum.
pub fn propagate_to_detectors(
    params: &InterferometerParams,
    phi: f64,
    core: &QuadratureStats,
    noise: &InputNoiseSpec,
) -> QuadratureStats {
    let up = params.eta.sqrt() * params.r2.exp();
    let down = params.eta.sqrt() * (-params.r2).exp();
    let gain = DMatrix::from_diagonal(&DVector::from_vec(vec![down, up, up, down]));
    let order = [Quadrature::E1c, Quadrature::E1s, Quadrature::E2c, Quadrature::E2s];
    let idx: Vec<usize> = order.iter().map(|&q| core.idx(q)).collect();
    let core_cov = DMatrix::from_fn(4, 4, |i, j| core.cov[(idx[i], idx[j])]);

    let loss = DMatrix::identity(4, 4) * ((1.0 - params.eta) * noise.vacuum);
    let cov = &gain * core_cov * gain.transpose() + loss;

    let (m1, m2) = core_output_means(params, phi);
    QuadratureStats::new(
        vec![Quadrature::G1c, Quadrature::G1s, Quadrature::G2c, Quadrature::G2s],
        DVector::from_vec(vec![0.0, up * m1, up * m2, 0.0]),
        cov,
    )
}

/// All four detector quadratures, built from the core covariance.
pub fn detector_field_stats_extended(
    params: &InterferometerParams,
    phi: f64,
    noise: &InputNoiseSpec,
) -> QuadratureStats {
    let core = core_noise_covariance(params, phi, noise);
    propagate_to_detectors(params, phi, &core, noise)
}
