//! `breakscan` command line.
//!
//! Every subcommand accepts `--config file.json` holding the same field
//! names as its flags; flags given on the command line win. The resolved
//! arguments, including the seed, are echoed in a provenance block that
//! can be fed back through `--config` to reproduce a run.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::breaktest::{scan, Restriction, ScanConfig, StatisticKind};
use crate::dgp::{simulate_sample, BreakDgp, InnovationLaw, RegressorLaw, Sample};
use crate::harness::{run_moment_check, run_power, run_size, CriticalSource, Experiment, ExperimentResult, MomentOptions};
use crate::ivx::IvxConfig;
use crate::limitdist::{build_table, p_value, CriticalValueTable, FunctionalKind, FunctionalSpec};
use crate::rng::{entropy_seed, replicate_stream};

pub const THREADS_ENV: &str = "BREAKSCAN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "breakscan", version, about = "Sup-Wald break tests for predictive regressions")]
pub struct Cli {
    /// Worker thread cap (falls back to BREAKSCAN_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a sample and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a sup-Wald scan on a CSV sample.
    Test(TestArgs),
    /// Simulate a critical value table.
    Critvals(CritvalsArgs),
    /// Empirical size of a scan test.
    Size(ExperimentArgs),
    /// Empirical power of a scan test.
    Power(ExperimentArgs),
    /// Sample-moment convergence diagnostics.
    Moments(MomentsArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct DgpArgs {
    /// Sample size.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: Option<usize>,
    /// Number of regressors.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Decay coefficients, one value or one per regressor.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub c: Option<Vec<f64>>,
    #[arg(long)]
    pub sigma_u: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub sigma_v: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho_uv: Option<f64>,
    /// Moving-average weights for v, starting with 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ma: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha2: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta1: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta2: Option<Vec<f64>>,
    /// True break fraction.
    #[arg(long, allow_hyphen_values = true)]
    pub pi0: Option<f64>,
    /// Add regime intercepts to the response.
    #[arg(long)]
    pub dgp_intercept: bool,
}

fn broadcast(name: &str, v: Option<Vec<f64>>, p: usize, default: f64) -> Result<Vec<f64>> {
    match v {
        None => Ok(vec![default; p]),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; p]),
        Some(v) if v.len() == p => Ok(v),
        Some(v) => bail!("--{name} has {} values, expected 1 or {p}", v.len()),
    }
}

impl DgpArgs {
    fn p(&self) -> usize {
        self.p
            .or_else(|| self.c.as_ref().filter(|c| c.len() > 1).map(Vec::len))
            .unwrap_or(1)
    }

    pub fn law(&self) -> Result<RegressorLaw> {
        let p = self.p();
        if p == 0 {
            bail!("--p must be at least 1");
        }
        let law = RegressorLaw {
            gamma: self.gamma.unwrap_or(1.0),
            c: broadcast("c", self.c.clone(), p, 1.0)?,
            innovations: InnovationLaw {
                sigma_u: self.sigma_u.unwrap_or(1.0),
                sigma_v: broadcast("sigma-v", self.sigma_v.clone(), p, 1.0)?,
                rho_uv: self.rho_uv.unwrap_or(0.0),
                ma_weights: self.ma.clone(),
            },
        };
        law.validate()?;
        Ok(law)
    }

    pub fn dgp(&self) -> Result<BreakDgp> {
        let law = self.law()?;
        let p = law.p();
        let beta1 = broadcast("beta1", self.beta1.clone(), p, 0.0)?;
        let beta2 = match &self.beta2 {
            None => beta1.clone(),
            b => broadcast("beta2", b.clone(), p, 0.0)?,
        };
        let alpha1 = self.alpha1.unwrap_or(0.0);
        let dgp = BreakDgp {
            law,
            t: self.t.unwrap_or(200),
            alpha1,
            alpha2: self.alpha2.unwrap_or(alpha1),
            beta1,
            beta2,
            pi0: self.pi0.unwrap_or(0.5),
            include_intercept: self.dgp_intercept,
        };
        dgp.validate()?;
        Ok(dgp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Ols,
    Ivx,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ScanArgs {
    /// Statistic: ols or ivx.
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// IVX persistence exponent (default 0.95).
    #[arg(long)]
    pub delta: Option<f64>,
    /// IVX decay coefficient (default 5).
    #[arg(long)]
    pub cz: Option<f64>,
    #[arg(long)]
    pub pi_lo: Option<f64>,
    #[arg(long)]
    pub pi_hi: Option<f64>,
    /// Break-fraction grid step; every feasible k when omitted.
    #[arg(long)]
    pub step: Option<f64>,
    /// Include an intercept in both regimes.
    #[arg(long)]
    pub intercept: bool,
    /// Test the slopes only (with --intercept).
    #[arg(long)]
    pub slopes_only: bool,
}

impl ScanArgs {
    pub fn config(&self) -> Result<ScanConfig> {
        let kind = match self.kind.unwrap_or(KindArg::Ols) {
            KindArg::Ols => StatisticKind::WaldOls,
            KindArg::Ivx => StatisticKind::WaldIvx,
        };
        if kind == StatisticKind::WaldOls && (self.delta.is_some() || self.cz.is_some()) {
            bail!("--delta and --cz only apply to --kind ivx");
        }
        let ivx = match kind {
            StatisticKind::WaldIvx => {
                let d = IvxConfig::default();
                Some(IvxConfig::new(self.delta.unwrap_or(d.delta), self.cz.unwrap_or(d.c_z))?)
            }
            StatisticKind::WaldOls => None,
        };
        let cfg = ScanConfig {
            pi_lo: self.pi_lo.unwrap_or(0.15),
            pi_hi: self.pi_hi.unwrap_or(0.85),
            step: self.step,
            kind,
            intercept: self.intercept,
            restriction: if self.slopes_only { Restriction::SlopesOnly } else { Restriction::Full },
            ivx,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dgp: DgpArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Prefix the CSV with a JSON provenance line.
    #[arg(long)]
    pub with_meta: bool,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct TestArgs {
    /// Sample CSV (`t,y,x1..xp[,u,v1..vp]`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub scan: ScanArgs,
    /// Critical value table for a p-value.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Write the scan JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the `pi,k,stat` CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalArg {
    Supnbb,
    ChisqPlusSupbb,
    Chisq,
    OuQuadratic,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct CritvalsArgs {
    #[arg(long, value_enum)]
    pub kind: Option<FunctionalArg>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub pi_lo: Option<f64>,
    #[arg(long)]
    pub pi_hi: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// OU decay for ou-quadratic.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite an existing table.
    #[arg(long)]
    pub force: bool,
    /// Store the sorted draws for exact p-values.
    #[arg(long)]
    pub keep_draws: bool,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ExperimentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dgp: DgpArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub scan: ScanArgs,
    /// Critical value table (JSON).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Fixed critical value instead of a table.
    #[arg(long, allow_hyphen_values = true)]
    pub crit: Option<f64>,
    /// Nominal level (default 0.05).
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep per-replicate records in the result.
    #[arg(long)]
    pub per_replicate: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the CSV summary here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct MomentsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dgp: DgpArgs,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Break fraction for the regime moments (default 0.3).
    #[arg(long)]
    pub pi: Option<f64>,
    /// IVX exponent; with --cz adds the instrument moment for gamma = 1.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub cz: Option<f64>,
    /// Replicates for the Euler oracle of E Q(1).
    #[arg(long)]
    pub oracle_reps: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Drops unset values so they do not shadow the config file.
fn strip_unset(v: Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.into_iter()
                .filter(|(_, v)| !v.is_null() && *v != Value::Bool(false))
                .map(|(k, v)| (k, strip_unset(v)))
                .collect(),
        ),
        other => other,
    }
}

/// Overlays command-line values on the optional config file.
fn merge_config<T: Serialize + DeserializeOwned>(cli: &T, file: Option<&Path>) -> Result<T> {
    let mut base = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            match v {
                Value::Object(m) => m,
                _ => bail!("config file {} must hold a JSON object", path.display()),
            }
        }
        None => Map::new(),
    };
    if let Value::Object(m) = strip_unset(serde_json::to_value(cli)?) {
        base.extend(m);
    }
    Ok(serde_json::from_value(Value::Object(base))?)
}

/// Arguments that reproduce a run, without its output destinations.
fn replay_args(args: &impl Serialize) -> Value {
    let mut v = strip_unset(serde_json::to_value(args).unwrap_or(Value::Null));
    if let Value::Object(m) = &mut v {
        for key in ["out", "csv", "force"] {
            m.remove(key);
        }
    }
    v
}

fn provenance(command: &str, args: &impl Serialize, resolved: Value, seed: Option<u64>) -> Value {
    json!({
        "provenance": {
            "tool": "breakscan",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": seed,
            "args": replay_args(args),
            "resolved": resolved,
        }
    })
}

fn resolve_seed(seed: &mut Option<u64>, err: &mut dyn Write) -> Result<u64> {
    let s = *seed.get_or_insert_with(entropy_seed);
    writeln!(err, "seed: {s}")?;
    Ok(s)
}

fn write_output(path: Option<&Path>, data: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, data).with_context(|| format!("writing {}", p.display()))?,
        None => out.write_all(data.as_bytes())?,
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut args = merge_config(args, args.config.as_deref())?;
    let seed = resolve_seed(&mut args.seed, err)?;
    let dgp = args.dgp.dgp()?;
    let sample = simulate_sample(&dgp, &mut replicate_stream(seed, 0))?;
    let mut data = String::new();
    if args.with_meta {
        let meta = provenance("simulate", &args, serde_json::to_value(&dgp)?, Some(seed));
        data.push_str(&serde_json::to_string(&meta)?);
        data.push('\n');
    }
    data.push_str(&sample.to_csv());
    write_output(args.out.as_deref(), &data, out)
}

/// Reads a sample CSV, skipping a leading JSON provenance line.
pub fn read_sample(path: &Path) -> Result<Sample> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let body = match text.strip_prefix('{') {
        Some(_) => text.split_once('\n').map_or("", |(_, rest)| rest),
        None => &text,
    };
    Sample::from_csv(body).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn cmd_test(args: &TestArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let args = merge_config(args, args.config.as_deref())?;
    let input = args.input.as_deref().ok_or_else(|| anyhow!("--input is required"))?;
    let sample = read_sample(input)?;
    let cfg = args.scan.config()?;
    if let Some(ivx) = cfg.resolved_ivx() {
        writeln!(err, "ivx: delta = {}, c_z = {}", ivx.delta, ivx.c_z)?;
    }
    let sc = scan(&sample, &cfg)?;
    let table = args.table.as_deref().map(CriticalValueTable::load).transpose()?;
    let pv = table.as_ref().map(|t| p_value(t, sc.sup_value));

    let mut doc = provenance("test", &args, serde_json::to_value(&cfg)?, None);
    doc["scan"] = serde_json::to_value(&sc)?;
    if let Some(pv) = pv {
        doc["p_value"] = serde_json::to_value(pv)?;
    }
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"), out)?;
    if let Some(csv) = &args.csv {
        std::fs::write(csv, sc.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    }
    write!(err, "sup W = {} at k = {} (pi = {})", sc.sup_value, sc.argmax_k, sc.argmax_fraction)?;
    if let Some(pv) = pv {
        write!(err, ", p-value {}{}", pv.value, if pv.clamped { " (clamped)" } else { "" })?;
    }
    writeln!(err)?;
    if !sc.failures.is_empty() {
        writeln!(err, "{} grid points failed and were excluded", sc.failures.len())?;
    }
    Ok(())
}

fn cmd_critvals(args: &CritvalsArgs, err: &mut dyn Write) -> Result<()> {
    let mut args = merge_config(args, args.config.as_deref())?;
    let path = args.out.clone().ok_or_else(|| anyhow!("--out is required"))?;
    if path.exists() && !args.force {
        bail!("{} exists; pass --force to overwrite", path.display());
    }
    let seed = resolve_seed(&mut args.seed, err)?;
    let kind = match args.kind.unwrap_or(FunctionalArg::Supnbb) {
        FunctionalArg::Supnbb => FunctionalKind::SupNBB,
        FunctionalArg::ChisqPlusSupbb => FunctionalKind::ChiSqPlusSupBB,
        FunctionalArg::Chisq => FunctionalKind::ChiSq,
        FunctionalArg::OuQuadratic => FunctionalKind::OUQuadratic,
    };
    let spec = FunctionalSpec {
        kind,
        p: args.p.unwrap_or(1),
        trimming: [args.pi_lo.unwrap_or(0.15), args.pi_hi.unwrap_or(0.85)],
        grid_points: args.grid.unwrap_or(1000),
        c: args.c,
    };
    spec.validate()?;
    let levels = args.levels.clone().unwrap_or_else(|| vec![0.90, 0.95, 0.99]);
    let table = build_table(&spec, args.reps.unwrap_or(20_000), &levels, seed, args.keep_draws)?;
    table.save(&path)?;
    let meta = provenance("critvals", &args, serde_json::to_value(&spec)?, Some(seed));
    writeln!(err, "{}", serde_json::to_string(&meta)?)?;
    for (l, v) in &table.quantiles {
        writeln!(err, "  {l}: {v}")?;
    }
    Ok(())
}

fn experiment(args: &mut ExperimentArgs, err: &mut dyn Write) -> Result<Experiment> {
    let seed = resolve_seed(&mut args.seed, err)?;
    let critical = match (&args.table, args.crit) {
        (Some(p), None) => CriticalSource::Table(CriticalValueTable::load(p)?),
        (None, Some(v)) => CriticalSource::Fixed(v),
        _ => bail!("give exactly one of --table and --crit"),
    };
    let exp = Experiment {
        dgp: args.dgp.dgp()?,
        test: args.scan.config()?,
        critical,
        level: args.level.unwrap_or(0.05),
        replications: args.reps.unwrap_or(1000),
        master_seed: seed,
        keep_per_replicate: args.per_replicate,
    };
    exp.validate()?;
    Ok(exp)
}

fn cmd_experiment(name: &str, args: &ExperimentArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut args = merge_config(args, args.config.as_deref())?;
    let exp = experiment(&mut args, err)?;
    let result: ExperimentResult = match name {
        "size" => run_size(&exp)?,
        _ => run_power(&exp)?,
    };
    let meta = provenance(name, &args, serde_json::to_value(exp.config())?, Some(exp.master_seed));
    writeln!(err, "{}", serde_json::to_string(&meta)?)?;
    write_output(args.out.as_deref(), &(result.to_json() + "\n"), out)?;
    if let Some(csv) = &args.csv {
        let text = format!("{}\n{}\n", ExperimentResult::CSV_HEADER, result.csv_row(name));
        std::fs::write(csv, text).with_context(|| format!("writing {}", csv.display()))?;
    }
    writeln!(
        err,
        "{name}: rejection rate {:.4} (se {:.4}), critical value {}, mean argmax {:.3}, failures {}, tainted: {}",
        result.rejection_rate,
        result.mc_stderr,
        result.critical_value,
        result.mean_argmax_fraction,
        result.failures.len(),
        result.tainted
    )?;
    Ok(())
}

fn cmd_moments(args: &MomentsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut args = merge_config(args, args.config.as_deref())?;
    let seed = resolve_seed(&mut args.seed, err)?;
    let law = args.dgp.law()?;
    let ivx = match (args.delta, args.cz) {
        (None, None) => None,
        (d, c) => {
            let def = IvxConfig::default();
            Some(IvxConfig::new(d.unwrap_or(def.delta), c.unwrap_or(def.c_z))?)
        }
    };
    let mut opts = MomentOptions { ivx, ..MomentOptions::default() };
    if let Some(pi) = args.pi {
        opts.pi = pi;
    }
    if let Some(r) = args.oracle_reps {
        opts.oracle_replications = r;
    }
    let t = args.dgp.t.unwrap_or(5000);
    let report = run_moment_check(&law, t, args.reps.unwrap_or(2000), seed, &opts)?;
    let mut doc = provenance("moments", &args, serde_json::to_value(&law)?, Some(seed));
    doc["report"] = serde_json::to_value(&report)?;
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"), out)?;
    for r in &report.rows {
        writeln!(
            err,
            "{:<22} mean {:>10.5} (se {:.5})  target {:>10.5}  rel err {:.3}",
            r.name, r.empirical_mean, r.mc_stderr, r.target, r.relative_error
        )?;
    }
    Ok(())
}

fn configure_threads(threads: Option<usize>) {
    let n = threads.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()));
    if let Some(n) = n.filter(|n| *n > 0) {
        // Fails only if a global pool already exists, in which case it stays.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `argv` and runs the subcommand, writing data to `out` and
/// diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    configure_threads(cli.threads);
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, out, err),
        Command::Test(a) => cmd_test(a, out, err),
        Command::Critvals(a) => cmd_critvals(a, err),
        Command::Size(a) => cmd_experiment("size", a, out, err),
        Command::Power(a) => cmd_experiment("power", a, out, err),
        Command::Moments(a) => cmd_moments(a, out, err),
    }
}

/// Process entry point; returns the exit code.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    match run(std::env::args_os(), &mut out, &mut err) {
        Ok(()) => 0,
        Err(e) => {
            if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
                let _ = write!(err, "{clap_err}");
                return if clap_err.use_stderr() { 2 } else { 0 };
            }
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> Result<(String, String)> {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["breakscan"];
        argv.extend_from_slice(args);
        run(argv, &mut out, &mut err)?;
        Ok((String::from_utf8(out)?, String::from_utf8(err)?))
    }

    #[test]
    fn simulate_is_deterministic_and_has_t_rows() {
        let args = ["simulate", "--T", "100", "--p", "1", "--gamma", "1", "--c", "1", "--seed", "7"];
        let (a, _) = run_capture(&args).unwrap();
        let (b, _) = run_capture(&args).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 101);
    }

    #[test]
    fn zero_break_fraction_is_rejected() {
        assert!(run_capture(&["simulate", "--pi0", "0", "--seed", "1"]).is_err());
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"T": 60, "gamma": 0.5, "seed": 3}"#).unwrap();
        let cfg = cfg.to_str().unwrap();
        let (a, _) = run_capture(&["simulate", "--config", cfg]).unwrap();
        assert_eq!(a.lines().count(), 61);
        let (b, _) = run_capture(&["simulate", "--config", cfg, "--T", "40"]).unwrap();
        assert_eq!(b.lines().count(), 41);
    }

    #[test]
    fn provenance_args_reproduce_the_run() {
        let (a, _) = run_capture(&["simulate", "--T", "50", "--with-meta", "--rho-uv", "-0.4"]).unwrap();
        let meta: Value = serde_json::from_str(a.lines().next().unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("p.json");
        std::fs::write(&cfg, meta["provenance"]["args"].to_string()).unwrap();
        let (b, _) = run_capture(&["simulate", "--config", cfg.to_str().unwrap()]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ivx_defaults_are_echoed() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("s.csv");
        let input = input.to_str().unwrap();
        run_capture(&["simulate", "--T", "80", "--seed", "2", "--out", input]).unwrap();
        let (out, err) = run_capture(&["test", "--input", input, "--kind", "ivx"]).unwrap();
        assert!(err.contains("delta = 0.95, c_z = 5"));
        let doc: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["scan"]["config"]["ivx"]["delta"], 0.95);
        let (out, _) = run_capture(&["test", "--input", input, "--kind", "ols"]).unwrap();
        let doc: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["scan"]["statistic_kind"], "WaldOLS");
    }
}
