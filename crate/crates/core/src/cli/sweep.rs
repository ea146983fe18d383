//! Phase sweeps over one or more strategies, with optional Monte-Carlo
//! columns, and oracle validation over a grid.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cli::format::sig;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::model::{InterferometerParams, Strategy};
use crate::oracle::{self, MomentReport, OracleConfig};
use crate::photostats::PhotonStats;
use crate::sensitivity::{phase_uncertainty, signal_slope};

pub const CSV_HEADER: &str = "phi,strategy,dphi,dphi_normalized,k_opt";
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub phi_start: f64,
    pub phi_end: f64,
    pub n_points: usize,
    pub strategies: Vec<Strategy>,
    pub params: InterferometerParams,
    pub output_format: OutputFormat,
    pub oracle: Option<OracleConfig>,
    pub execution: Execution,
}

impl SweepSpec {
    pub fn new(params: InterferometerParams, strategies: Vec<Strategy>) -> Self {
        Self {
            phi_start: 0.0,
            phi_end: std::f64::consts::TAU,
            n_points: 721,
            strategies,
            params,
            output_format: OutputFormat::Csv,
            oracle: None,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.phi_start.is_finite() && self.phi_end.is_finite()) {
            return Err(Error::InvalidSweep("phase range must be finite".into()));
        }
        if self.phi_end <= self.phi_start {
            return Err(Error::InvalidSweep(format!(
                "phi_end ({}) must exceed phi_start ({})",
                self.phi_end, self.phi_start
            )));
        }
        if self.n_points < 2 {
            return Err(Error::InvalidSweep(format!(
                "need at least 2 grid points, got {}",
                self.n_points
            )));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidSweep("no strategy selected".into()));
        }
        for s in &self.strategies {
            if let Strategy::Suboptimal { phi_apr } = s {
                if !phi_apr.is_finite() {
                    return Err(Error::InvalidSweep("a-priori phase must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Inclusive, evenly spaced grid.
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.phi_end - self.phi_start) / (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| {
                if i + 1 == self.n_points {
                    self.phi_end
                } else {
                    self.phi_start + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub phi: f64,
    pub strategy: &'static str,
    /// `null` in JSON where the strategy diverges.
    pub dphi: f64,
    pub dphi_normalized: f64,
    pub k_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_dphi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_dphi_se: Option<f64>,
}

/// Variance of the observable behind `strategy`, from any photon statistics.
pub fn observable_variance_of(stats: &PhotonStats, strategy: Strategy, phi: f64) -> f64 {
    match strategy {
        Strategy::SingleDetector => stats.var_n1,
        Strategy::Differential => stats.var_nminus,
        Strategy::OptimalCombination => stats.weighted_variance(phi.cos()),
        Strategy::Suboptimal { phi_apr } => stats.weighted_variance(phi_apr.cos()),
    }
}

fn oracle_dphi(report: &MomentReport, strategy: Strategy, params: &InterferometerParams, phi: f64) -> (f64, f64) {
    let slope = signal_slope(strategy, params, phi).abs();
    if slope == 0.0 {
        return (f64::INFINITY, f64::INFINITY);
    }
    report.derived(|s| observable_variance_of(s, strategy, phi).max(0.0).sqrt() / slope)
}

/// Evaluates every strategy at every grid point. Rows come out in grid
/// order, strategies in the order given.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    if let Some(cfg) = &spec.oracle {
        if cfg.n_samples < 2 {
            return Err(Error::TooFewSamples(cfg.n_samples));
        }
    }
    let grid = spec.grid();
    let per_point: Vec<Result<Vec<SweepRow>>> = map_indexed(grid.len(), spec.execution, |i| {
        let phi = grid[i];
        let report = spec
            .oracle
            .as_ref()
            .map(|cfg| oracle::run(&spec.params, phi, cfg))
            .transpose()?;
        Ok(spec
            .strategies
            .iter()
            .map(|&strategy| {
                let r = phase_uncertainty(strategy, &spec.params, phi);
                let (od, ose) = match &report {
                    Some(rep) => {
                        let (d, e) = oracle_dphi(rep, strategy, &spec.params, phi);
                        (Some(d), Some(e))
                    }
                    None => (None, None),
                };
                SweepRow {
                    phi,
                    strategy: strategy.name(),
                    dphi: r.dphi,
                    dphi_normalized: r.normalized,
                    k_opt: r.k_opt,
                    oracle_dphi: od,
                    oracle_dphi_se: ose,
                }
            })
            .collect())
    });
    let mut rows = Vec::with_capacity(grid.len() * spec.strategies.len());
    for chunk in per_point {
        rows.extend(chunk?);
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let with_oracle = rows.iter().any(|r| r.oracle_dphi.is_some());
    let mut out = String::from(CSV_HEADER);
    if with_oracle {
        out.push_str(",oracle_dphi,oracle_dphi_se");
    }
    out.push('\n');
    let opt = |x: Option<f64>| x.map(|v| sig(v, CSV_DIGITS)).unwrap_or_default();
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            sig(r.phi, CSV_DIGITS),
            r.strategy,
            sig(r.dphi, CSV_DIGITS),
            sig(r.dphi_normalized, CSV_DIGITS),
            opt(r.k_opt)
        );
        if with_oracle {
            let _ = write!(out, ",{},{}", opt(r.oracle_dphi), opt(r.oracle_dphi_se));
        }
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[SweepRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize") + "\n"
}

pub fn render(rows: &[SweepRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => to_json(rows),
    }
}

/// Largest `|z|` per moment over a grid of oracle runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub threshold: f64,
    pub n_points: usize,
    pub max_abs_z: PhotonStats,
    /// Phase where each maximum occurred.
    pub worst_phi: [f64; 10],
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.max_abs_z.values().iter().all(|&z| z <= self.threshold)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "oracle validation over {} phase points, threshold |z| <= {}",
            self.n_points, self.threshold
        );
        for ((name, z), phi) in self.max_abs_z.iter().zip(self.worst_phi) {
            let verdict = if z <= self.threshold { "ok" } else { "FAIL" };
            let _ = writeln!(
                out,
                "  {name:<12} max|z| = {:>10}  at phi = {:<14} {verdict}",
                sig(z, 4),
                sig(phi, 6)
            );
        }
        let _ = writeln!(out, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

/// Runs the oracle at every grid point and records the worst `|z|` per
/// moment.
pub fn validate_against_oracle(spec: &SweepSpec, threshold: f64) -> Result<ValidationReport> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::Domain(format!(
            "threshold must be finite and > 0, got {threshold}"
        )));
    }
    spec.validate()?;
    let cfg = spec
        .oracle
        .ok_or_else(|| Error::InvalidSweep("oracle validation needs an oracle configuration".into()))?;
    let grid = spec.grid();
    let reports: Vec<Result<MomentReport>> =
        map_indexed(grid.len(), spec.execution, |i| oracle::run(&spec.params, grid[i], &cfg));

    let mut max = [0.0f64; 10];
    let mut worst = [grid[0]; 10];
    for rep in reports {
        let rep = rep?;
        for (k, z) in rep.z_scores.values().iter().enumerate() {
            if z.abs() > max[k] {
                max[k] = z.abs();
                worst[k] = rep.phi;
            }
        }
    }
    Ok(ValidationReport {
        threshold,
        n_points: grid.len(),
        max_abs_z: PhotonStats::from_values(max),
        worst_phi: worst,
    })
}
