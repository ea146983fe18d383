//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error.
//!
//! Settings are layered: built-in defaults, then a `--preset`, then the
//! `--config` file, then explicit flags.

pub mod config;
pub mod format;
pub mod report;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::model::{db_to_squeeze_factor, InterferometerParams, LaserNoise, Strategy};
use crate::oracle::{self, OracleConfig};
use config::{ConfigFile, Preset};
use sweep::{OutputFormat, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Relative `--output` paths resolve against this directory when set.
pub const OUTPUT_DIR_ENV: &str = "MZSENSE_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "mzsense",
    version,
    about = "Phase sensitivity of a squeezing-assisted two-detector Mach-Zehnder interferometer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the phase uncertainty of each strategy over a phase grid.
    Sweep(SweepArgs),
    /// Print headline figures for one parameter set.
    Report(ReportArgs),
    /// Check closed-form photon statistics against Monte-Carlo sampling.
    Validate(ValidateArgs),
    /// Write raw Monte-Carlo photon counts, one `N1 N2` row per sample.
    Dump(DumpArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Key-value config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Input squeezing in dB (variance-referred).
    #[arg(long = "r1-db", allow_hyphen_values = true, conflicts_with = "r1")]
    pub r1_db: Option<f64>,
    /// Input squeeze factor.
    #[arg(long)]
    pub r1: Option<f64>,
    /// Output amplification in dB (variance-referred).
    #[arg(long = "r2-db", allow_hyphen_values = true, conflicts_with = "r2")]
    pub r2_db: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    /// Internal power transmissivity.
    #[arg(long)]
    pub mu: Option<f64>,
    /// External power transmissivity (detector efficiency included).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Mean photon number of the laser.
    #[arg(long = "n-photons")]
    pub n_photons: Option<f64>,
    /// Degree of second-order coherence of the laser.
    #[arg(long, conflicts_with = "noise_factor")]
    pub g2: Option<f64>,
    /// Technical-noise factor A = N(g2-1)+1, instead of --g2.
    #[arg(long = "A")]
    pub noise_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long = "phi-start", allow_hyphen_values = true)]
    pub phi_start: Option<f64>,
    #[arg(long = "phi-end", allow_hyphen_values = true)]
    pub phi_end: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Repeatable: single, differential, optimal, suboptimal.
    #[arg(long, value_enum)]
    pub strategy: Vec<StrategyKind>,
    /// A-priori phase for the suboptimal strategy [rad].
    #[arg(long = "phi-apr", allow_hyphen_values = true)]
    pub phi_apr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    Single,
    Differential,
    Optimal,
    Suboptimal,
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        <StrategyKind as ValueEnum>::from_str(s, true).map_err(|_| Error::Domain(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Add Monte-Carlo columns with this many samples per point.
    #[arg(long = "oracle-samples")]
    pub oracle_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Solve for the inefficiency that would yield this gain [dB, amplitude].
    #[arg(long = "target-gain-db")]
    pub target_gain_db: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long = "oracle-samples")]
    pub oracle_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample exact photon numbers instead of the linearized ones.
    #[arg(long)]
    pub exact: bool,
    /// Largest acceptable |z| per moment.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long = "oracle-samples")]
    pub oracle_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_config(path: Option<&Path>) -> CliResult<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", p.display())))?;
            Ok(ConfigFile::parse(&text)?)
        }
    }
}

/// Flag first, then config key, then nothing.
fn layered<T: std::str::FromStr>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> CliResult<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => Ok(cfg.parse_value(key)?),
    }
}

fn squeeze(db_flag: Option<f64>, raw_flag: Option<f64>, cfg: &ConfigFile, key: &str) -> CliResult<Option<f64>> {
    if let Some(db) = db_flag {
        return Ok(Some(db_to_squeeze_factor(db)?));
    }
    if raw_flag.is_some() {
        return Ok(raw_flag);
    }
    if let Some(db) = cfg.parse_value::<f64>(&format!("{key}-db"))? {
        return Ok(Some(db_to_squeeze_factor(db)?));
    }
    Ok(cfg.parse_value(key)?)
}

pub fn resolve_params(args: &ParamArgs, cfg: &ConfigFile) -> Result<InterferometerParams, String> {
    resolve_params_inner(args, cfg).map_err(|f| f.message)
}

fn resolve_params_inner(args: &ParamArgs, cfg: &ConfigFile) -> CliResult<InterferometerParams> {
    let preset = layered(args.preset, cfg, "preset")?;
    let mut p = preset.map(|p| p.params()).unwrap_or_default();
    if let Some(r1) = squeeze(args.r1_db, args.r1, cfg, "r1")? {
        p.r1 = r1;
    }
    if let Some(r2) = squeeze(args.r2_db, args.r2, cfg, "r2")? {
        p.r2 = r2;
    }
    if let Some(mu) = layered(args.mu, cfg, "mu")? {
        p.mu = mu;
    }
    if let Some(eta) = layered(args.eta, cfg, "eta")? {
        p.eta = eta;
    }
    if let Some(n) = layered(args.n_photons, cfg, "n-photons")? {
        p.n_photons = n;
    }
    match (args.noise_factor, args.g2) {
        (Some(a), _) => p.laser = LaserNoise::Factor(a),
        (None, Some(g2)) => p.laser = LaserNoise::G2(g2),
        (None, None) => {
            let (a, g2) = (cfg.parse_value::<f64>("A")?, cfg.parse_value::<f64>("g2")?);
            if a.is_some() && g2.is_some() {
                return Err(Failure::usage("config sets both `A` and `g2`"));
            }
            if let Some(a) = a {
                p.laser = LaserNoise::Factor(a);
            } else if let Some(g2) = g2 {
                p.laser = LaserNoise::G2(g2);
            }
        }
    }
    p.validate()?;
    Ok(p)
}

fn resolve_strategies(grid: &GridArgs, cfg: &ConfigFile) -> CliResult<Vec<Strategy>> {
    let kinds: Vec<StrategyKind> = if !grid.strategy.is_empty() {
        grid.strategy.clone()
    } else if let Some(list) = cfg.get("strategy") {
        list.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?
    } else {
        vec![StrategyKind::Single, StrategyKind::Differential, StrategyKind::Optimal]
    };
    let phi_apr = layered(grid.phi_apr, cfg, "phi-apr")?;
    kinds
        .into_iter()
        .map(|k| match k {
            StrategyKind::Single => Ok(Strategy::SingleDetector),
            StrategyKind::Differential => Ok(Strategy::Differential),
            StrategyKind::Optimal => Ok(Strategy::OptimalCombination),
            StrategyKind::Suboptimal => phi_apr
                .map(|phi_apr| Strategy::Suboptimal { phi_apr })
                .ok_or_else(|| Failure::usage("the suboptimal strategy needs --phi-apr")),
        })
        .collect()
}

fn resolve_spec(params: &ParamArgs, grid: &GridArgs, cfg: &ConfigFile, default_points: usize) -> CliResult<SweepSpec> {
    let p = resolve_params_inner(params, cfg)?;
    let mut spec = SweepSpec::new(p, resolve_strategies(grid, cfg)?);
    if let Some(v) = layered(grid.phi_start, cfg, "phi-start")? {
        spec.phi_start = v;
    }
    if let Some(v) = layered(grid.phi_end, cfg, "phi-end")? {
        spec.phi_end = v;
    }
    spec.n_points = layered(grid.points, cfg, "points")?.unwrap_or(default_points);
    Ok(spec)
}

fn resolve_format(flag: Option<FormatArg>, cfg: &ConfigFile) -> CliResult<OutputFormat> {
    let f = match flag {
        Some(f) => f,
        None => match cfg.get("format") {
            None => FormatArg::Csv,
            Some(s) => FormatArg::from_str(s, true).map_err(|_| Failure::usage(format!("unknown format `{s}`")))?,
        },
    };
    Ok(match f {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    })
}

fn oracle_config(
    samples: Option<usize>,
    seed: Option<u64>,
    exact: bool,
    cfg: &ConfigFile,
) -> CliResult<Option<OracleConfig>> {
    let samples = layered(samples, cfg, "oracle-samples")?;
    let seed = layered(seed, cfg, "seed")?.unwrap_or(OracleConfig::default().seed);
    let exact = exact || layered::<bool>(None, cfg, "exact")?.unwrap_or(false);
    Ok(samples.map(|n| OracleConfig {
        n_samples: n,
        seed,
        linearized_mode: !exact,
        ..OracleConfig::default()
    }))
}

fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes the whole file or nothing.
fn write_atomically(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: std::io::Error| Failure::usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(fail)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        fail(e)
    })
}

fn emit(out: &mut dyn Write, output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => write_atomically(&output_path(p), text.as_bytes()),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("cannot write output: {e}"))),
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> CliResult<i32> {
    let cfg = load_config(a.params.config.as_deref())?;
    let mut spec = resolve_spec(&a.params, &a.grid, &cfg, 721)?;
    spec.output_format = resolve_format(a.format, &cfg)?;
    spec.oracle = oracle_config(a.oracle_samples, a.seed, false, &cfg)?;
    let rows = sweep::sweep(&spec)?;
    let text = sweep::render(&rows, spec.output_format);
    let output = layered(a.output.clone(), &cfg, "output")?;
    emit(out, output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> CliResult<i32> {
    let cfg = load_config(a.params.config.as_deref())?;
    let p = resolve_params_inner(&a.params, &cfg)?;
    let summary = report::summarize(&p, a.target_gain_db);
    let text = match resolve_format(a.format, &cfg)? {
        OutputFormat::Csv => summary.render(),
        OutputFormat::Json => serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    };
    emit(out, None, &text)?;
    Ok(EXIT_OK)
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> CliResult<i32> {
    let cfg = load_config(a.params.config.as_deref())?;
    let mut spec = resolve_spec(&a.params, &a.grid, &cfg, 12)?;
    let samples = a
        .oracle_samples
        .or(Some(cfg.parse_value("oracle-samples")?.unwrap_or(100_000)));
    spec.oracle = oracle_config(samples, a.seed, a.exact, &cfg)?;
    let threshold = layered(a.threshold, &cfg, "threshold")?.unwrap_or(5.0);
    if let Some(o) = &spec.oracle {
        if o.n_samples < 2 {
            return Err(Error::TooFewSamples(o.n_samples).into());
        }
    }
    let report = sweep::validate_against_oracle(&spec, threshold)?;
    emit(out, None, &report.render())?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_dump(a: &DumpArgs, out: &mut dyn Write) -> CliResult<i32> {
    let cfg = load_config(a.params.config.as_deref())?;
    let p = resolve_params_inner(&a.params, &cfg)?;
    let samples = a
        .oracle_samples
        .or(Some(cfg.parse_value("oracle-samples")?.unwrap_or(10_000)));
    let oc = oracle_config(samples, a.seed, a.exact, &cfg)?.expect("samples set");
    let mut buf = Vec::new();
    oracle::dump_samples(&p, a.phi, &oc, &mut buf)?;
    let text = String::from_utf8(buf).expect("ascii output");
    emit(out, a.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Report(a) => cmd_report(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Dump(a) => cmd_dump(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
