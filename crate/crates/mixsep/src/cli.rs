//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixsep_core::confidence::{asymptotic_cvm_quantile, lower_bound_with_cn, DEFAULT_REPLICATIONS};
use mixsep_core::identifiability::{self, MixedComponent};
use mixsep_core::mixture::{default_cn, DEFAULT_GRID};
use mixsep_core::sim::{ScenarioConfig, SimulationConfig, ASYMPTOTIC_MIN_N};
use mixsep_core::signal::{self, lfdr, recover_signal};
use mixsep_core::{rng, CriterionEvaluator, CriticalMethod, CriticalValueSpec, Error, KnownCdf, SortedSample};
use serde::Serialize;

use crate::background::parse_distribution;
use crate::cache::QuantileCache;
use crate::error::CliError;
use crate::io::{parse_observations, read_input};
use crate::parallel::Runner;
use crate::report::*;

/// Seed used whenever `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Parser)]
#[command(name = "mixsep", version, about = "Estimate the signal proportion of a two-component mixture with a known background")]
pub struct Cli {
    /// Upper bound on worker threads for Monte-Carlo work.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimates, elbow estimate and lower confidence bound.
    Estimate(EstimateArgs),
    /// Criterion curve as CSV (gamma, criterion, second_difference).
    Curve(CurveArgs),
    /// Signal CDF, its concave majorant, density and local FDR.
    Signal(SignalArgs),
    /// Run a simulation study described by a TOML file.
    Simulate(SimulateArgs),
    /// Identifiable proportion of a fully specified mixture.
    Identifiability(IdentifiabilityArgs),
    /// Write a simulated data set as a one-column CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV with one numeric column; a header row is optional.
    pub input: PathBuf,
    /// Column to read when the file has a header.
    #[arg(long)]
    pub column: Option<String>,
    /// Background distribution, `family:params` or `table:path.csv`.
    #[arg(long, default_value = "uniform")]
    pub background: String,
    /// Output file; standard output if omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriticalChoice {
    /// Asymptotic from n = 500 when the level is tabulated, Monte Carlo otherwise.
    Auto,
    Asymptotic,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `c_n = tau log log n` for the point estimate.
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    /// One minus the confidence level of the lower bound.
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = CriticalChoice::Auto)]
    pub critical: CriticalChoice,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    pub mc_reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write the criterion curve CSV here.
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    /// Add a signal-recovery summary at the elbow estimate.
    #[arg(long)]
    pub signal: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphaSource {
    Elbow,
    Cn,
    Value,
}

impl AlphaSource {
    fn name(self) -> &'static str {
        match self {
            AlphaSource::Elbow => "elbow",
            AlphaSource::Cn => "cn",
            AlphaSource::Value => "value",
        }
    }
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    /// CSV with one numeric column; a header row is optional.
    pub input: PathBuf,
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long, default_value = "uniform")]
    pub background: String,
    /// Directory receiving signal.json and the CSV files.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = AlphaSource::Elbow)]
    pub alpha_source: AlphaSource,
    /// Proportion used with `--alpha-source value`.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Local FDR is evaluated at sample points up to this value.
    #[arg(long, default_value_t = 0.05)]
    pub lfdr_max: f64,
    /// Evaluate the local FDR at every sample point.
    #[arg(long)]
    pub lfdr_all: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML simulation config.
    pub config: PathBuf,
    /// Directory for metrics.csv and metrics.json; CSV to standard output if omitted.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Overrides the config's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config's replication count.
    #[arg(long)]
    pub replications: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IdentifiabilityArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Signal distribution (continuous part when mixed).
    #[arg(long)]
    pub signal: String,
    /// Background distribution (continuous part when mixed).
    #[arg(long)]
    pub background: String,
    /// Number of background quantiles scanned for the ratio infimum.
    #[arg(long, default_value_t = identifiability::DEFAULT_GRID)]
    pub grid: usize,
    /// Continuous mass of a mixed signal.
    #[arg(long, requires_all = ["signal_discrete", "background_kappa", "background_discrete"])]
    pub signal_kappa: Option<f64>,
    #[arg(long)]
    pub signal_discrete: Option<String>,
    /// Continuous mass of a mixed background.
    #[arg(long, requires = "signal_kappa")]
    pub background_kappa: Option<f64>,
    #[arg(long)]
    pub background_discrete: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioKind {
    A,
    B,
    SettingI,
    SettingIi,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub alpha: f64,
    /// Observations per unit (scenario A).
    #[arg(long, default_value_t = 10)]
    pub j: usize,
    /// Within-block correlation (scenario A).
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 100)]
    pub block_size: usize,
    /// Moving-average lag (scenario B).
    #[arg(long, default_value_t = 0)]
    pub l: usize,
    /// Smallest alternative shift (scenario B).
    #[arg(long, default_value_t = 1.0)]
    pub m_star: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let runner = Runner::new(cli.threads).map_err(|e| CliError::input(e.to_string()))?;
    match cli.command {
        Command::Estimate(a) => estimate(a, &runner),
        Command::Curve(a) => curve(a),
        Command::Signal(a) => signal_cmd(a),
        Command::Simulate(a) => simulate(a, &runner),
        Command::Identifiability(a) => identifiability_cmd(a),
        Command::Generate(a) => generate(a),
    }
}

fn warn(warnings: &mut Vec<String>, msg: String) {
    eprintln!("warning: {msg}");
    warnings.push(msg);
}

struct Loaded {
    sample: SortedSample,
    background: KnownCdf,
    sha256: String,
    warnings: Vec<String>,
}

fn load(input: &Path, column: Option<&str>, background: &str) -> Result<Loaded, CliError> {
    let raw = read_input(input)?;
    let values = parse_observations(&raw.bytes, &input.display().to_string(), column)?;
    let background_cdf = parse_distribution(background)?;
    let mut warnings = Vec::new();
    if let KnownCdf::Uniform { lo, hi } = background_cdf {
        let outside = values.iter().filter(|&&v| v < lo || v > hi).count();
        if outside > 0 {
            warn(
                &mut warnings,
                format!("{outside} observation(s) outside the background support [{lo}, {hi}]"),
            );
        }
    }
    Ok(Loaded {
        sample: SortedSample::new(values)?,
        background: background_cdf,
        sha256: raw.sha256,
        warnings,
    })
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout().write_all(bytes).map_err(CliError::from),
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("reports serialize");
    out.push(b'\n');
    out
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::numerical(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::numerical(e.to_string()))
}

#[derive(Serialize)]
struct CurveRow {
    gamma: f64,
    criterion: f64,
    second_difference: Option<f64>,
}

fn curve_csv(curve: &mixsep_core::CriterionCurve) -> Result<Vec<u8>, CliError> {
    let sd = curve.second_differences();
    csv_bytes(
        curve
            .gammas()
            .iter()
            .zip(curve.values())
            .enumerate()
            .map(|(i, (&gamma, &criterion))| CurveRow {
                gamma,
                criterion,
                second_difference: sd.get(i).copied(),
            }),
    )
}

fn lower_bound_spec(a: &EstimateArgs, n: usize) -> Result<CriticalValueSpec, CliError> {
    let monte_carlo = CriticalMethod::MonteCarlo {
        replications: a.mc_reps,
        seed: a.seed,
    };
    let asymptotic = CriticalMethod::Asymptotic { interpolate: false };
    let method = match a.critical {
        CriticalChoice::Asymptotic => asymptotic,
        CriticalChoice::MonteCarlo => monte_carlo,
        CriticalChoice::Auto => {
            if n >= ASYMPTOTIC_MIN_N && asymptotic_cvm_quantile(a.beta, false).is_ok() {
                asymptotic
            } else {
                monte_carlo
            }
        }
    };
    let spec = CriticalValueSpec { beta: a.beta, method };
    spec.validate()?;
    Ok(spec)
}

fn estimate(a: EstimateArgs, runner: &Runner) -> Result<(), CliError> {
    let Loaded {
        sample,
        background,
        sha256,
        mut warnings,
    } = load(&a.data.input, a.data.column.as_deref(), &a.data.background)?;
    let n = sample.len();
    let ev = CriterionEvaluator::new(&sample, &background);
    let c_n = default_cn(n, a.tau)?;
    let alpha_hat_cn = ev.estimate_alpha(c_n)?;

    let curve = ev.curve(a.grid)?;
    let elbow = match curve.elbow() {
        Ok(e) => Some(e),
        Err(Error::NoElbow) => {
            warn(&mut warnings, "no elbow detected in the criterion curve".into());
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &a.curve_out {
        emit(Some(path), &curve_csv(&curve)?)?;
    }

    let spec = lower_bound_spec(&a, n)?;
    let critical = runner.critical_value(n, &spec, &QuantileCache::from_env())?;
    let (method, replications) = match spec.method {
        CriticalMethod::MonteCarlo { replications, .. } => ("monte_carlo", Some(replications)),
        CriticalMethod::Asymptotic { .. } => ("asymptotic", None),
        CriticalMethod::Fixed { .. } => ("fixed", None),
    };
    let bound = lower_bound_with_cn(&ev, a.beta, critical)?;

    let signal = if a.signal {
        let (alpha, source) = match &elbow {
            Some(e) if e.estimate > 0.0 => (e.estimate, "elbow"),
            _ => (alpha_hat_cn, "cn"),
        };
        if alpha > 0.0 {
            let step = signal::estimate_fs(&sample, &background, alpha)?;
            let concave = signal::concavify(&step).ok();
            Some(SignalSummary {
                alpha_used: alpha,
                alpha_source: source,
                step_points: step.len(),
                concave_knots: concave.as_ref().map(|c| c.knots().len()),
                density_at_zero: concave
                    .as_ref()
                    .map(|c| signal::density_estimate(c).eval(0.0)),
            })
        } else {
            warn(&mut warnings, "estimated signal proportion is zero; no signal summary".into());
            None
        }
    } else {
        None
    };

    let report = EstimateReport {
        n,
        background: a.data.background.clone(),
        tau: a.tau,
        c_n,
        alpha_hat_cn,
        alpha_tilde_elbow: elbow.as_ref().map(|e| e.estimate),
        elbow,
        lower_bound: CriticalValueReport {
            method,
            bound,
            replications,
        },
        criterion_curve: CurveReference {
            grid: a.grid,
            path: a.curve_out.as_ref().map(|p| p.display().to_string()),
        },
        signal,
        warnings,
        provenance: Provenance::new(a.seed, Some(sha256)),
    };
    emit(a.data.output.as_deref(), &json(&report))
}

fn curve(a: CurveArgs) -> Result<(), CliError> {
    let loaded = load(&a.data.input, a.data.column.as_deref(), &a.data.background)?;
    let curve = CriterionEvaluator::new(&loaded.sample, &loaded.background).curve(a.grid)?;
    emit(a.data.output.as_deref(), &curve_csv(&curve)?)
}

#[derive(Serialize)]
struct CdfRow {
    x: f64,
    cdf: f64,
}

#[derive(Serialize)]
struct DensityRow {
    left: f64,
    right: f64,
    density: f64,
}

#[derive(Serialize)]
struct LfdrRow {
    x: f64,
    lfdr: f64,
}

fn signal_cmd(a: SignalArgs) -> Result<(), CliError> {
    let Loaded {
        sample,
        background,
        sha256,
        mut warnings,
    } = load(&a.input, a.column.as_deref(), &a.background)?;
    let ev = CriterionEvaluator::new(&sample, &background);
    let alpha = match a.alpha_source {
        AlphaSource::Value => {
            let v = a
                .alpha
                .ok_or_else(|| CliError::input("--alpha-source value needs --alpha"))?;
            if !(v > 0.0 && v <= 1.0) {
                return Err(CliError::input(format!("--alpha {v} must lie in (0, 1]")));
            }
            v
        }
        AlphaSource::Cn => ev.estimate_alpha(default_cn(sample.len(), a.tau)?)?,
        AlphaSource::Elbow => ev.curve(a.grid)?.elbow()?.estimate,
    };
    if alpha == 0.0 {
        return Err(Error::ZeroSignal.into());
    }
    fs::create_dir_all(&a.out_dir)?;
    let write = |name: &str, bytes: Vec<u8>| -> Result<String, CliError> {
        emit(Some(&a.out_dir.join(name)), &bytes)?;
        Ok(name.to_owned())
    };

    let est = match recover_signal(&sample, &background, alpha) {
        Ok(est) => Some(est),
        Err(Error::NegativeSupport) => {
            warn(
                &mut warnings,
                "sample has negative values; concave majorant, density and local FDR need support on [0, inf)".into(),
            );
            None
        }
        Err(e) => return Err(e.into()),
    };
    let step = match &est {
        Some(e) => e.fs_step.clone(),
        None => signal::estimate_fs(&sample, &background, alpha)?,
    };
    let fs_step = write(
        "fs_step.csv",
        csv_bytes(step.locations().iter().zip(step.values()).map(|(&x, &cdf)| CdfRow { x, cdf }))?,
    )?;

    let mut files = SignalFiles {
        fs_step,
        fs_concave: None,
        density: None,
        lfdr: None,
    };
    let mut lfdr_points = None;
    if let Some(est) = &est {
        let c = &est.fs_concave;
        files.fs_concave = Some(write(
            "fs_concave.csv",
            csv_bytes(c.knots().iter().zip(c.values()).map(|(&x, &cdf)| CdfRow { x, cdf }))?,
        )?);
        let d = &est.density;
        files.density = Some(write(
            "density.csv",
            csv_bytes(d.knots().windows(2).zip(d.values()).map(|(w, &density)| DensityRow {
                left: w[0],
                right: w[1],
                density,
            }))?,
        )?);
        if alpha < 1.0 {
            let points: Vec<f64> = sample
                .values()
                .iter()
                .copied()
                .filter(|&x| a.lfdr_all || x <= a.lfdr_max)
                .collect();
            match lfdr(&points, alpha, d, &background) {
                Ok(curve) => {
                    lfdr_points = Some(points.len());
                    files.lfdr = Some(write(
                        "lfdr.csv",
                        csv_bytes(
                            curve
                                .points()
                                .iter()
                                .zip(curve.values())
                                .map(|(&x, &lfdr)| LfdrRow { x, lfdr }),
                        )?,
                    )?);
                }
                Err(Error::NoDensity) => {
                    warn(&mut warnings, "background has no density; local FDR skipped".into());
                }
                Err(e) => return Err(e.into()),
            }
        } else {
            warn(&mut warnings, "signal proportion is 1; local FDR skipped".into());
        }
    }

    let report = SignalReport {
        n: sample.len(),
        background: a.background.clone(),
        alpha_used: alpha,
        alpha_source: a.alpha_source.name(),
        lfdr_points,
        files,
        warnings,
        provenance: Provenance::new(DEFAULT_SEED, Some(sha256)),
    };
    write("signal.json", json(&report))?;
    Ok(())
}

fn simulate(a: SimulateArgs, runner: &Runner) -> Result<(), CliError> {
    let raw = read_input(&a.config)?;
    let text = String::from_utf8(raw.bytes).map_err(|_| CliError::input("config is not UTF-8"))?;
    let mut config: SimulationConfig =
        toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", a.config.display())))?;
    if let Some(seed) = a.seed {
        config.base_seed = seed;
    }
    if let Some(r) = a.replications {
        config.replications = r;
    }
    let metrics = runner.run_replications(config.clone(), &QuantileCache::from_env())?;
    let table = csv_bytes(&metrics.rows)?;
    match &a.out_dir {
        None => emit(None, &table),
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let lower_bound_c_n = if config.estimators.lower_bound {
                Some(runner.critical_value(config.scenario.n(), &config.critical_spec(), &QuantileCache::from_env())?)
            } else {
                None
            };
            emit(Some(&dir.join("metrics.csv")), &table)?;
            let report = SimulationReport {
                provenance: Provenance::new(config.base_seed, Some(raw.sha256)),
                config,
                metrics,
                lower_bound_c_n,
            };
            emit(Some(&dir.join("metrics.json")), &json(&report))
        }
    }
}

fn identifiability_cmd(a: IdentifiabilityArgs) -> Result<(), CliError> {
    let fs_c = parse_distribution(&a.signal)?;
    let fb_c = parse_distribution(&a.background)?;
    let (alpha0, method, signal, background) = match (a.signal_kappa, a.background_kappa) {
        (Some(ks), Some(kb)) => {
            let sd = a.signal_discrete.as_deref().expect("clap enforces");
            let bd = a.background_discrete.as_deref().expect("clap enforces");
            let s = MixedComponent::new(ks, fs_c, parse_distribution(sd)?)?;
            let b = MixedComponent::new(kb, fb_c, parse_distribution(bd)?)?;
            (
                identifiability::alpha0_mixed(a.alpha, &s, &b, a.grid)?,
                "mixed",
                format!("{ks}*{}+{}*{sd}", a.signal, 1.0 - ks),
                format!("{kb}*{}+{}*{bd}", a.background, 1.0 - kb),
            )
        }
        _ => {
            let (v, method) = if fs_c.is_discrete() && fb_c.is_discrete() {
                (identifiability::alpha0_discrete(a.alpha, &fs_c, &fb_c)?, "discrete")
            } else {
                (
                    identifiability::alpha0_continuous(a.alpha, &fs_c, &fb_c, a.grid)?,
                    "continuous",
                )
            };
            (v, method, a.signal.clone(), a.background.clone())
        }
    };
    let report = IdentifiabilityReport {
        alpha: a.alpha,
        alpha0,
        identifiable: (a.alpha - alpha0).abs() <= 1e-12,
        signal,
        background,
        method,
    };
    emit(a.output.as_deref(), &json(&report))
}

fn generate(a: GenerateArgs) -> Result<(), CliError> {
    let scenario = match a.scenario {
        ScenarioKind::A => ScenarioConfig::A {
            n: a.n,
            j: a.j,
            alpha: a.alpha,
            rho: a.rho,
            block_size: a.block_size,
        },
        ScenarioKind::B => ScenarioConfig::B {
            n: a.n,
            l: a.l,
            m_star: a.m_star,
            alpha: a.alpha,
        },
        ScenarioKind::SettingI => ScenarioConfig::SettingI { n: a.n, alpha: a.alpha },
        ScenarioKind::SettingIi => ScenarioConfig::SettingII { n: a.n, alpha: a.alpha },
    };
    scenario.validate()?;
    let values = scenario.generate(&mut rng::seeded(a.seed));
    let mut out = String::from("x\n");
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    emit(a.output.as_deref(), out.as_bytes())
}
