//! Monte-Carlo check of the closed-form photon statistics.
//!
//! Every input noise quadrature is drawn as an independent Gaussian with the
//! variances of [`InputNoiseSpec`], pushed mode by mode through the optical
//! chain (beamsplitters, arm phases, loss mixing, DOPA gains), and turned into
//! photon counts per sample. In exact mode the count is
//! `((g^c)² + (g^s)² - 1)/2` with both quadratures at each detector, so the
//! terms the linearized theory drops are kept. In linearized mode the count
//! is `<g>²/2 + <g> dg` for the amplified quadrature, which the closed forms
//! describe exactly.
//!
//! # Random streams
//!
//! Samples are split into (up to) 32 batches. Each of the 12 noise channels
//! of each batch reads its own ChaCha8 stream, `seed` with stream id
//! `batch * 12 + channel`. Batches reduce in index order, so results are
//! bit-identical between sequential and parallel execution.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::model::InterferometerParams;
use crate::photostats::{photon_stats, PhotonStats};
use crate::quadratures::InputNoiseSpec;

pub const CHANNELS: usize = 12;
pub const BATCHES: usize = 32;

/// Noise channels, in stream order.
pub const CHANNEL_NAMES: [&str; CHANNELS] = [
    "a1c", "a1s", "z2c", "z2s", "m1c", "m1s", "m2c", "m2s", "n1c", "n1s", "n2c", "n2s",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Subtract the vacuum `1/2` from each exact photon number.
    pub include_vacuum_offset: bool,
    /// Keep only the first-order noise term in the photon numbers.
    pub linearized_mode: bool,
    /// Laser phase-quadrature variance; vacuum unless overridden.
    pub laser_phase_variance: f64,
    pub execution: Execution,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 0x5eed_2021,
            include_vacuum_offset: true,
            linearized_mode: false,
            laser_phase_variance: 0.5,
            execution: Execution::default(),
        }
    }
}

impl OracleConfig {
    pub fn linearized(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            linearized_mode: true,
            ..Self::default()
        }
    }

    pub fn exact(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            linearized_mode: false,
            ..Self::default()
        }
    }
}

/// Empirical against closed-form moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub phi: f64,
    pub n_samples: usize,
    pub empirical: PhotonStats,
    /// Delete-one-batch jackknife standard errors.
    pub standard_errors: PhotonStats,
    pub closed_form: PhotonStats,
    /// `(empirical - closed_form)/standard_error`, zero where both the
    /// deviation and the error vanish.
    pub z_scores: PhotonStats,
    /// Leave-one-batch-out estimates, for errors of derived quantities.
    pub replicates: Vec<PhotonStats>,
}

impl MomentReport {
    /// Largest `|z|` and the moment it belongs to.
    pub fn max_abs_z(&self) -> (&'static str, f64) {
        self.z_scores
            .iter()
            .map(|(n, z)| (n, z.abs()))
            .fold(("", 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    }

    /// Estimate and jackknife standard error of any function of the moments.
    pub fn derived<F: Fn(&PhotonStats) -> f64>(&self, f: F) -> (f64, f64) {
        (f(&self.empirical), jackknife_se(self.replicates.iter().map(&f)))
    }
}

/// One quadrature pair of a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Mode {
    c: f64,
    s: f64,
}

impl Mode {
    fn new(c: f64, s: f64) -> Self {
        Self { c, s }
    }

    fn scale(self, k: f64) -> Self {
        Self::new(k * self.c, k * self.s)
    }

    fn add(self, o: Self) -> Self {
        Self::new(self.c + o.c, self.s + o.s)
    }

    fn sub(self, o: Self) -> Self {
        Self::new(self.c - o.c, self.s - o.s)
    }

    /// `a -> a e^{i theta}`.
    fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(self.c * c - self.s * s, self.c * s + self.s * c)
    }

    /// Power transmission `t`, the rest replaced by `vac`.
    fn lossy(self, t: f64, vac: Self) -> Self {
        self.scale(t.sqrt()).add(vac.scale((1.0 - t).sqrt()))
    }
}

/// 50/50 beamsplitter `(1/sqrt 2)[[1, 1], [1, -1]]`.
fn beamsplitter(x: Mode, y: Mode) -> (Mode, Mode) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    (x.add(y).scale(h), x.sub(y).scale(h))
}

/// One draw of every input-noise quadrature, in [`CHANNEL_NAMES`] order.
type NoiseDraw = [f64; CHANNELS];

/// Fields at both detectors, `(g1, g2)`.
fn propagate(params: &InterferometerParams, phi: f64, noise: &NoiseDraw, with_laser: bool) -> (Mode, Mode) {
    let [a1c, a1s, z2c, z2s, m1c, m1s, m2c, m2s, n1c, n1s, n2c, n2s] = *noise;
    let alpha = if with_laser { params.alpha() } else { 0.0 };
    let a1 = Mode::new(a1c, a1s);
    let a2 = Mode::new(std::f64::consts::SQRT_2 * alpha + z2c, z2s);

    let (b1, b2) = beamsplitter(a1, a2);
    let c1 = b1.rotate(0.5 * phi).lossy(params.mu, Mode::new(m1c, m1s));
    let c2 = b2.rotate(-0.5 * phi).lossy(params.mu, Mode::new(m2c, m2s));
    let (e1, e2) = beamsplitter(c1, c2);

    let (up, down) = (params.r2.exp(), (-params.r2).exp());
    // DOPA2 amplifies the sine quadrature of port 1, DOPA3 the cosine of port 2.
    let f1 = Mode::new(e1.c * down, e1.s * up);
    let f2 = Mode::new(e2.c * up, e2.s * down);
    (
        f1.lossy(params.eta, Mode::new(n1c, n1s)),
        f2.lossy(params.eta, Mode::new(n2c, n2s)),
    )
}

/// Per-channel random streams of one batch.
struct NoiseSampler {
    rngs: Vec<ChaCha8Rng>,
    sd: [f64; CHANNELS],
}

impl NoiseSampler {
    fn new(seed: u64, batch: usize, noise: &InputNoiseSpec) -> Self {
        let rngs = (0..CHANNELS)
            .map(|ch| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((batch * CHANNELS + ch) as u64);
                rng
            })
            .collect();
        let v = noise.vacuum;
        let var = [
            noise.var_a1c,
            noise.var_a1s,
            noise.var_z2c,
            noise.var_z2s,
            v,
            v,
            v,
            v,
            v,
            v,
            v,
            v,
        ];
        Self {
            rngs,
            sd: var.map(f64::sqrt),
        }
    }

    fn draw(&mut self) -> NoiseDraw {
        let mut out = [0.0; CHANNELS];
        for ((x, rng), sd) in out.iter_mut().zip(self.rngs.iter_mut()).zip(self.sd) {
            let z: f64 = StandardNormal.sample(rng);
            *x = sd * z;
        }
        out
    }
}

/// Streaming bivariate moments (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    m1: f64,
    m2: f64,
    c11: f64,
    c22: f64,
    c12: f64,
}

impl Moments {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let n = self.n as f64;
        let d1 = x - self.m1;
        let d2 = y - self.m2;
        self.m1 += d1 / n;
        self.m2 += d2 / n;
        self.c11 += d1 * (x - self.m1);
        self.c22 += d2 * (y - self.m2);
        self.c12 += d1 * (y - self.m2);
    }

    fn merge(&self, o: &Self) -> Self {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return *self;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let d1 = o.m1 - self.m1;
        let d2 = o.m2 - self.m2;
        let w = na * nb / n;
        Self {
            n: self.n + o.n,
            m1: self.m1 + d1 * nb / n,
            m2: self.m2 + d2 * nb / n,
            c11: self.c11 + o.c11 + d1 * d1 * w,
            c22: self.c22 + o.c22 + d2 * d2 * w,
            c12: self.c12 + o.c12 + d1 * d2 * w,
        }
    }

    fn stats(&self) -> PhotonStats {
        let dof = if self.n > 1 { (self.n - 1) as f64 } else { f64::INFINITY };
        PhotonStats::from_pair(self.m1, self.m2, self.c11 / dof, self.c22 / dof, self.c12 / dof)
    }
}

fn jackknife_se(replicates: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = replicates.collect();
    let b = xs.len();
    if b < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / b as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    ((b - 1) as f64 / b as f64 * ss).sqrt()
}

/// Photon counts `(N1, N2)` of one sample.
struct Counter<'a> {
    params: &'a InterferometerParams,
    phi: f64,
    config: &'a OracleConfig,
    mean_fields: (Mode, Mode),
}

impl<'a> Counter<'a> {
    fn new(params: &'a InterferometerParams, phi: f64, config: &'a OracleConfig) -> Self {
        let mean_fields = propagate(params, phi, &[0.0; CHANNELS], true);
        Self {
            params,
            phi,
            config,
            mean_fields,
        }
    }

    fn count(&self, draw: &NoiseDraw) -> (f64, f64) {
        let (g1, g2) = propagate(self.params, self.phi, draw, true);
        if self.config.linearized_mode {
            let (m1, m2) = (self.mean_fields.0.s, self.mean_fields.1.c);
            (0.5 * m1 * m1 + m1 * (g1.s - m1), 0.5 * m2 * m2 + m2 * (g2.c - m2))
        } else {
            let off = if self.config.include_vacuum_offset { 1.0 } else { 0.0 };
            (
                0.5 * (g1.c * g1.c + g1.s * g1.s - off),
                0.5 * (g2.c * g2.c + g2.s * g2.s - off),
            )
        }
    }
}

fn batch_sizes(n: usize) -> Vec<usize> {
    let b = BATCHES.min(n);
    (0..b).map(|i| n / b + usize::from(i < n % b)).collect()
}

fn check_config(config: &OracleConfig) -> Result<()> {
    if config.n_samples < 2 {
        return Err(Error::TooFewSamples(config.n_samples));
    }
    if !(config.laser_phase_variance.is_finite() && config.laser_phase_variance > 0.0) {
        return Err(Error::Domain(format!(
            "laser phase variance must be finite and > 0, got {}",
            config.laser_phase_variance
        )));
    }
    Ok(())
}

fn noise_spec(params: &InterferometerParams, config: &OracleConfig) -> InputNoiseSpec {
    InputNoiseSpec::from_params(params).with_laser_phase_variance(config.laser_phase_variance)
}

/// Samples the interferometer at `phi` and compares empirical photon
/// statistics with the closed forms.
pub fn run(params: &InterferometerParams, phi: f64, config: &OracleConfig) -> Result<MomentReport> {
    params.validate()?;
    check_config(config)?;
    let noise = noise_spec(params, config);
    let counter = Counter::new(params, phi, config);
    let sizes = batch_sizes(config.n_samples);

    let batches: Vec<Moments> = map_indexed(sizes.len(), config.execution, |b| {
        let mut sampler = NoiseSampler::new(config.seed, b, &noise);
        let mut acc = Moments::default();
        for _ in 0..sizes[b] {
            let (n1, n2) = counter.count(&sampler.draw());
            acc.push(n1, n2);
        }
        acc
    });

    let total = batches.iter().fold(Moments::default(), |a, b| a.merge(b));
    let replicates: Vec<PhotonStats> = (0..batches.len())
        .map(|skip| {
            batches
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .fold(Moments::default(), |a, (_, b)| a.merge(b))
                .stats()
        })
        .collect();

    let empirical = total.stats();
    let closed_form = photon_stats(params, phi);
    let mut se = [0.0; 10];
    for (k, s) in se.iter_mut().enumerate() {
        *s = jackknife_se(replicates.iter().map(|r| r.values()[k]));
    }
    let standard_errors = PhotonStats::from_values(se);
    let scale = closed_form.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut z = [0.0; 10];
    for (k, zk) in z.iter_mut().enumerate() {
        let d = empirical.values()[k] - closed_form.values()[k];
        *zk = if se[k] > 0.0 {
            d / se[k]
        } else if d.abs() <= 1e-9 * scale {
            0.0
        } else {
            d.signum() * f64::INFINITY
        };
    }

    Ok(MomentReport {
        phi,
        n_samples: config.n_samples,
        empirical,
        standard_errors,
        closed_form,
        z_scores: PhotonStats::from_values(z),
        replicates,
    })
}

/// Writes one `N1 N2` row per sample, in the same order and from the same
/// streams as [`run`].
pub fn dump_samples<W: Write>(
    params: &InterferometerParams,
    phi: f64,
    config: &OracleConfig,
    mut out: W,
) -> Result<()> {
    params.validate()?;
    check_config(config)?;
    let noise = noise_spec(params, config);
    let counter = Counter::new(params, phi, config);
    writeln!(out, "N1 N2")?;
    for (b, &size) in batch_sizes(config.n_samples).iter().enumerate() {
        let mut sampler = NoiseSampler::new(config.seed, b, &noise);
        for _ in 0..size {
            let (n1, n2) = counter.count(&sampler.draw());
            writeln!(out, "{n1:e} {n2:e}")?;
        }
    }
    Ok(())
}

/// Relative deviation of sampled moments from the closed forms at one
/// photon number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationRow {
    pub n_photons: f64,
    /// `(empirical - closed)/|closed|` per moment; the absolute deviation
    /// where the closed form vanishes.
    pub deviation: PhotonStats,
    pub standard_error: PhotonStats,
    /// Exact-mode minus linearized-mode estimate on identical samples, in
    /// the same units as `deviation`. Isolates the dropped terms from
    /// sampling noise.
    pub paired_deviation: PhotonStats,
}

/// Runs the oracle (in the mode given by `config`) over increasing photon
/// numbers. All rows share the seed, hence the same noise draws.
pub fn linearization_error(
    params: &InterferometerParams,
    phi: f64,
    config: &OracleConfig,
    photon_numbers: &[f64],
) -> Result<Vec<LinearizationRow>> {
    let ascending = photon_numbers.windows(2).all(|w| w[0] < w[1]);
    if photon_numbers.is_empty() || !ascending || photon_numbers.iter().any(|&n| n.is_nan() || n <= 0.0) {
        return Err(Error::Domain(
            "photon-number grid must be positive and strictly ascending".into(),
        ));
    }
    let lin_cfg = OracleConfig {
        linearized_mode: true,
        ..*config
    };
    photon_numbers
        .iter()
        .map(|&n| {
            let p = InterferometerParams {
                n_photons: n,
                ..*params
            };
            let report = run(&p, phi, config)?;
            let lin = run(&p, phi, &lin_cfg)?;
            let closed = report.closed_form.values();
            let rel = |x: f64, k: usize| if closed[k] != 0.0 { x / closed[k].abs() } else { x };
            let emp = report.empirical.values();
            let se = report.standard_errors.values();
            let lv = lin.empirical.values();
            let mut dev = [0.0; 10];
            let mut err = [0.0; 10];
            let mut paired = [0.0; 10];
            for k in 0..10 {
                dev[k] = rel(emp[k] - closed[k], k);
                err[k] = rel(se[k], k);
                paired[k] = rel(emp[k] - lv[k], k);
            }
            Ok(LinearizationRow {
                n_photons: n,
                deviation: PhotonStats::from_values(dev),
                standard_error: PhotonStats::from_values(err),
                paired_deviation: PhotonStats::from_values(paired),
            })
        })
        .collect()
}
