//! Command-line interface. `run` parses arguments, executes one command and
//! returns the process exit code: 0 on success, 2 for usage, configuration
//! and domain errors, 3 for numerical failures and degenerate samples.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::geom::UnitVector;
use crate::io::{load_experiment, load_sample, DatasetSpec};
use crate::limits::{asymptotic_power, LimitLaw, QuantileCache, DEFAULT_MC_DRAWS};
use crate::mc::{format_sig, run_figure, run_thm21_study, ExperimentSpec, Figure};
use crate::model::{calibrate_kappa, moments, RadialFunction, RegimeKind, RegimeSpec, RotSymModel};
use crate::sampling::DEFAULT_SEED;
use crate::stats::{decide, TestKind};
use crate::zones::{invert_test, zone_area_fraction, COARSE_RESOLUTION};

#[derive(Debug, Parser)]
#[command(
    name = "rotsym",
    version,
    about = "Tests and confidence zones for the location of rotationally symmetric spherical data near uniformity"
)]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation study and write its CSV
    Simulate(SimulateArgs),
    /// Test H0: theta = theta0 on a data file
    Test(TestArgs),
    /// Confidence zone for theta by test inversion on a spherical grid
    Zone(ZoneArgs),
    /// Concentration kappa giving a target mean E[X'theta]
    Calibrate(CalibrateArgs),
    /// Asymptotic power curves over a grid of ||tau||
    Power(PowerArgs),
    /// Monte-Carlo (1 - alpha)-quantile of a limit law
    LimitsQuantile(QuantileArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// fig1, fig2, fig3 or thm21 (may instead come from --config)
    #[arg(long)]
    pub figure: Option<String>,
    /// key=value configuration overriding the figure preset
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed [default: 20160309 or the config's seed]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV (default: standard output)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Use 2000 replicates per cell
    #[arg(long)]
    pub fast: bool,
    /// File of cached Monte-Carlo critical values, read and updated
    #[arg(long, value_name = "PATH")]
    pub quantile_cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Data file, one observation per row
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// cartesian or angles_deg (colatitude,longitude in degrees)
    #[arg(long, default_value = "cartesian")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Null location, comma-separated coordinates (normalized)
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    pub theta0: String,
    /// watson or wald
    #[arg(long, default_value = "watson")]
    pub test: String,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct ZoneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// watson or wald
    #[arg(long, default_value = "watson")]
    pub test: String,
    /// Confidence level
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 20_000)]
    pub resolution: usize,
    /// Zone CSV (default: no file)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Ambient dimension
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    /// fvml, linear or logistic
    #[arg(long, default_value = "fvml")]
    pub radial: String,
    /// Target E[X'theta]
    #[arg(long, conflicts_with = "regime", required_unless_present = "regime")]
    pub e1: Option<f64>,
    /// Target n^(-l/d)/sqrt(p) given as "l/d,n", e.g. "2/4,200"
    #[arg(long, value_name = "L/D,N")]
    pub regime: Option<String>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// away, beyond, contiguity or strict
    #[arg(long)]
    pub regime: String,
    /// Locality parameter
    #[arg(long, default_value_t = 1.0)]
    pub xi: f64,
    /// Ambient dimension
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Var[X'theta]; required for the away regime
    #[arg(long)]
    pub e2_tilde: Option<f64>,
    /// Values of ||tau||: a list "a,b,c" or a range "start:stop:step"
    #[arg(long, default_value = "0:2:0.1")]
    pub tau_grid: String,
    /// Output CSV (default: standard output)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuantileArgs {
    /// Law descriptor, e.g. wald_mixture:df=2:lambda=1 or chi2:df=2
    #[arg(long)]
    pub law: String,
    /// Upper-tail probability
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Monte-Carlo draws
    #[arg(long, default_value_t = DEFAULT_MC_DRAWS)]
    pub draws: usize,
    /// Master seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// File of cached critical values, read and updated
    #[arg(long, value_name = "PATH")]
    pub cache: Option<PathBuf>,
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return e.exit_code();
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::domain("--workers must be >= 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::domain(e.to_string()))?;
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let result = pool.install(|| {
        let (out, err): (&mut dyn Write, &mut dyn Write) = (&mut o, &mut e);
        match cli.command {
            Command::Simulate(a) => simulate(a, out, err),
            Command::Test(a) => test(a, out),
            Command::Zone(a) => zone(a, out, err),
            Command::Calibrate(a) => calibrate(a, out),
            Command::Power(a) => power(a, out),
            Command::LimitsQuantile(a) => limits_quantile(a, out, err),
        }
    });
    let _ = err.write_all(&e);
    out.write_all(&o)?;
    result
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let flag_figure = a.figure.as_deref().map(str::parse::<Figure>).transpose()?;
    let mut spec = match (&a.config, flag_figure) {
        (Some(path), fig) => {
            let spec = load_experiment(path)?;
            if let Some(f) = fig.filter(|&f| f != spec.figure) {
                return Err(Error::Config {
                    key: "figure".into(),
                    message: format!("--figure {f} disagrees with the config's {}", spec.figure),
                });
            }
            spec
        }
        (None, Some(f)) => ExperimentSpec::preset(f),
        (None, None) => {
            return Err(Error::Config {
                key: "figure".into(),
                message: "give --figure or --config".into(),
            })
        }
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if a.fast {
        spec = spec.fast();
    }
    spec.validate()?;
    let _ = writeln!(err, "seed: {}", spec.seed);
    let csv = if spec.figure == Figure::Thm21 {
        run_thm21_study(&spec)?.to_csv()
    } else {
        let cache = QuantileCache::new(spec.mc_draws, spec.seed);
        if let Some(path) = a.quantile_cache.as_ref().filter(|p| p.exists()) {
            cache.load(path)?;
        }
        let csv = run_figure(&spec, &cache)?.to_csv();
        if let Some(path) = &a.quantile_cache {
            cache.save(path)?;
        }
        csv
    };
    emit(out, a.out.as_ref(), &csv)
}

fn load_data(d: &DataArgs) -> Result<crate::sampling::Sample> {
    load_sample(&DatasetSpec {
        path: d.data.clone(),
        format: d.format.parse()?,
        p: None,
    })
}

fn inversion_test(name: &str) -> Result<TestKind> {
    match name.parse()? {
        t @ (TestKind::Watson | TestKind::Wald) => Ok(t),
        other => Err(Error::domain(format!("--test must be watson or wald, not {other}"))),
    }
}

fn parse_vector(text: &str) -> Result<UnitVector> {
    let coords = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::domain(format!("bad coordinate `{v}` in `{text}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    UnitVector::new(coords)
}

fn test(a: TestArgs, out: &mut dyn Write) -> Result<()> {
    let sample = load_data(&a.data)?;
    let kind = inversion_test(&a.test)?;
    let theta0 = parse_vector(&a.theta0)?;
    let statistic = kind.statistic(&sample, &theta0, 1.0)?;
    let law = kind.null_law(sample.dim(), 1.0)?;
    let outcome = decide(kind.name(), statistic, &law, a.alpha, &QuantileCache::new(1, 0))?;
    writeln!(out, "test: {}", outcome.test)?;
    writeln!(out, "n: {}", sample.len())?;
    writeln!(out, "statistic: {}", format_sig(outcome.statistic))?;
    writeln!(out, "critical_value: {}", format_sig(outcome.critical_value))?;
    if let Some(pv) = outcome.p_value {
        writeln!(out, "p_value: {}", format_sig(pv))?;
    }
    writeln!(out, "alpha: {}", format_sig(outcome.alpha))?;
    writeln!(out, "decision: {}", if outcome.reject { "reject" } else { "do not reject" })?;
    Ok(())
}

fn zone(a: ZoneArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let sample = load_data(&a.data)?;
    let kind = inversion_test(&a.test)?;
    if a.resolution < COARSE_RESOLUTION {
        let _ = writeln!(
            err,
            "warning: resolution {} is coarse; zone areas and components may be unreliable",
            a.resolution
        );
    }
    let zone = invert_test(&sample, kind, a.level, a.resolution)?;
    if let Some(path) = &a.out {
        std::fs::write(path, zone.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    writeln!(out, "test: {}", kind)?;
    writeln!(out, "level: {}", format_sig(a.level))?;
    let hat: Vec<String> = zone.theta_hat().iter().map(|v| format_sig(*v)).collect();
    writeln!(out, "theta_hat: {}", hat.join(","))?;
    writeln!(out, "grid_points: {}", zone.grid().len())?;
    writeln!(out, "area_fraction: {}", format_sig(zone_area_fraction(&zone)))?;
    writeln!(out, "components: {}", zone.components().len())?;
    writeln!(out, "preferred_points: {}", zone.preferred().len())?;
    Ok(())
}

fn parse_regime_target(text: &str, p: usize) -> Result<f64> {
    let bad = || Error::domain(format!("--regime expects \"l/d,n\", got `{text}`"));
    let (frac, n) = text.split_once(',').ok_or_else(bad)?;
    let (l, d) = frac.split_once('/').ok_or_else(bad)?;
    let l: f64 = l.trim().parse().map_err(|_| bad())?;
    let d: f64 = d.trim().parse().map_err(|_| bad())?;
    let n: f64 = n.trim().parse().map_err(|_| bad())?;
    if !(d > 0.0 && n >= 1.0 && l >= 0.0) {
        return Err(bad());
    }
    Ok(n.powf(-l / d) / (p as f64).sqrt())
}

fn calibrate(a: CalibrateArgs, out: &mut dyn Write) -> Result<()> {
    let radial = RadialFunction::by_name(&a.radial)?;
    let target = match (a.e1, &a.regime) {
        (Some(e1), _) => e1,
        (None, Some(r)) => parse_regime_target(r, a.p)?,
        (None, None) => return Err(Error::domain("give --e1 or --regime")),
    };
    let kappa = calibrate_kappa(a.p, &radial, target)?;
    let m = moments(&RotSymModel::new(UnitVector::pole(a.p), kappa, radial)?)?;
    writeln!(out, "kappa: {}", format_sig(kappa))?;
    writeln!(out, "e1: {}", format_sig(m.e1))?;
    writeln!(out, "e2_tilde: {}", format_sig(m.e2_tilde))?;
    writeln!(out, "d: {}", format_sig(m.d))?;
    Ok(())
}

fn parse_tau_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::domain(format!("bad --tau-grid `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (start, stop, step) = (v[0], v[1], v[2]);
        if !(step > 0.0 && stop >= start) {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| start + i as f64 * step).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn power(a: PowerArgs, out: &mut dyn Write) -> Result<()> {
    let kind: RegimeKind = a.regime.parse()?;
    let regime = RegimeSpec::canonical(kind, a.xi, a.e2_tilde)?;
    let grid = parse_tau_grid(&a.tau_grid)?;
    let mut csv = String::from("test,tau_norm,power\n");
    for test in TestKind::ALL {
        let mut rows = Vec::new();
        for &tau in &grid {
            match asymptotic_power(test, &regime, tau, a.p, a.alpha) {
                Ok(v) => rows.push(format!("{test},{},{}\n", format_sig(tau), format_sig(v))),
                Err(Error::UnsupportedRegime(_)) => {
                    rows.clear();
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        csv.extend(rows);
    }
    emit(out, a.out.as_ref(), &csv)
}

fn limits_quantile(a: QuantileArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let law = LimitLaw::from_descriptor(&a.law)?;
    if !law.is_scalar() {
        return Err(Error::domain(format!("{} is direction-valued", law.descriptor())));
    }
    let cache = QuantileCache::new(a.draws, a.seed);
    if let Some(path) = a.cache.as_ref().filter(|p| p.exists()) {
        cache.load(path)?;
    }
    let _ = writeln!(err, "seed: {}", a.seed);
    let value = cache.critical_value(&law, a.alpha)?;
    if let Some(path) = &a.cache {
        cache.save(path)?;
    }
    writeln!(out, "{} {} {}", law.descriptor(), format_sig(a.alpha), format_sig(value))?;
    Ok(())
}
