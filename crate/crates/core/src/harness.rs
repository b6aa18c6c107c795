//! Monte Carlo experiments: empirical size and power of the scan tests,
//! sample-moment diagnostics and persisted result records.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::breaktest::{scan, BreakTestError, ScanConfig, StatisticKind};
use crate::dgp::{simulate_innovations, simulate_regressors, simulate_sample, BreakDgp, DgpError, RegressorLaw};
use crate::ivx::{build_instruments, IvxConfig};
use crate::limitdist::{mean_q1, CriticalValueTable, LimitError};
use crate::rng::replicate_stream;

/// Share of failed replicates above which a result is tainted.
pub const MAX_FAILURE_SHARE: f64 = 0.02;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error(transparent)]
    Dgp(#[from] DgpError),
    #[error(transparent)]
    Test(#[from] BreakTestError),
    #[error(transparent)]
    Table(#[from] LimitError),
    #[error("result tainted: {failed} of {replications} replicates failed")]
    TaintedResult { failed: usize, replications: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("result file does not match schema: {0}")]
    SchemaMismatch(String),
}

/// Serde helpers writing non-finite floats as strings (`"inf"`, `"-inf"`),
/// since JSON numbers cannot hold them.
mod lossless_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse::<f64>().map_err(serde::de::Error::custom),
        }
    }
}

/// Where the rejection threshold comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CriticalSource {
    Table(CriticalValueTable),
    Fixed(f64),
}

/// Short serialisable description of a [`CriticalSource`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalSourceRecord {
    Table { spec: crate::limitdist::FunctionalSpec, replications: usize, seed: u64 },
    Fixed(#[serde(with = "lossless_f64")] f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub dgp: BreakDgp,
    pub test: ScanConfig,
    pub critical: CriticalSource,
    /// Nominal rejection probability.
    pub level: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub keep_per_replicate: bool,
}

/// Everything that determines an experiment's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dgp: BreakDgp,
    pub test: ScanConfig,
    pub critical: CriticalSourceRecord,
    pub level: f64,
    pub replications: usize,
    pub master_seed: u64,
}

impl Experiment {
    /// Threshold the sup statistic must exceed. Level 1 rejects always and
    /// level 0 never.
    pub fn critical_value(&self) -> Result<f64, HarnessError> {
        if self.level >= 1.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if self.level <= 0.0 {
            return Ok(f64::INFINITY);
        }
        match &self.critical {
            CriticalSource::Fixed(v) => Ok(*v),
            CriticalSource::Table(t) => Ok(t.quantile(1.0 - self.level)?),
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            dgp: self.dgp.clone(),
            test: self.test.clone(),
            critical: match &self.critical {
                CriticalSource::Fixed(v) => CriticalSourceRecord::Fixed(*v),
                CriticalSource::Table(t) => CriticalSourceRecord::Table {
                    spec: t.spec.clone(),
                    replications: t.replications,
                    seed: t.seed,
                },
            },
            level: self.level,
            replications: self.replications,
            master_seed: self.master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.dgp.validate()?;
        self.test.validate()?;
        if self.replications < 100 {
            return Err(HarnessError::InvalidExperiment(format!(
                "{} replications, need at least 100",
                self.replications
            )));
        }
        if !(0.0..=1.0).contains(&self.level) {
            return Err(HarnessError::InvalidExperiment(format!("level {} outside [0, 1]", self.level)));
        }
        if self.test.kind == StatisticKind::WaldIvx && self.test.resolved_ivx().is_none() {
            return Err(HarnessError::InvalidExperiment("IVX scan without IVX settings".into()));
        }
        self.critical_value()?;
        Ok(())
    }
}

/// SHA-256 of the canonical JSON of `config`.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let json = serde_json::to_string(config).expect("config serialises");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    #[serde(with = "lossless_f64")]
    pub sup_value: f64,
    pub argmax_fraction: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// Replicate `r` draws from ChaCha8 stream `r` of `master_seed`.
    pub stream_scheme: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentResult {
    pub rejection_rate: f64,
    pub mc_stderr: f64,
    pub rejections: usize,
    pub successful: usize,
    #[serde(with = "lossless_f64")]
    pub critical_value: f64,
    pub mean_argmax_fraction: f64,
    pub failures: Vec<ReplicateFailure>,
    pub tainted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_replicate: Option<Vec<ReplicateRecord>>,
    pub provenance: Provenance,
}

impl ExperimentResult {
    /// Error when more than the tolerated share of replicates failed.
    pub fn ensure_untainted(&self) -> Result<&Self, HarnessError> {
        if self.tainted {
            return Err(HarnessError::TaintedResult {
                failed: self.failures.len(),
                replications: self.provenance.config.replications,
            });
        }
        Ok(self)
    }

    /// Rejection rate of the stored replicates against another threshold.
    pub fn rejection_rate_at(&self, critical_value: f64) -> Option<f64> {
        let recs = self.per_replicate.as_ref()?;
        if recs.is_empty() {
            return Some(0.0);
        }
        let r = recs.iter().filter(|r| r.sup_value > critical_value).count();
        Some(r as f64 / recs.len() as f64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::SchemaMismatch(e.to_string()))
    }

    pub const CSV_HEADER: &'static str =
        "experiment,kind,T,gamma,c,delta,cz,pi0,level,reps,rejection_rate,stderr";

    /// One summary row matching [`Self::CSV_HEADER`].
    pub fn csv_row(&self, experiment: &str) -> String {
        let cfg = &self.provenance.config;
        let kind = match cfg.test.kind {
            StatisticKind::WaldOls => "WaldOLS",
            StatisticKind::WaldIvx => "WaldIVX",
        };
        let c: Vec<String> = cfg.dgp.law.c.iter().map(|c| c.to_string()).collect();
        let (delta, cz) = match cfg.test.resolved_ivx() {
            Some(ivx) => (ivx.delta.to_string(), ivx.c_z.to_string()),
            None => (String::new(), String::new()),
        };
        let mut row = String::new();
        let _ = write!(
            row,
            "{experiment},{kind},{},{},{},{delta},{cz},{},{},{},{},{}",
            cfg.dgp.t,
            cfg.dgp.law.gamma,
            c.join(";"),
            cfg.dgp.pi0,
            cfg.level,
            cfg.replications,
            self.rejection_rate,
            self.mc_stderr
        );
        row
    }
}

fn run_replicates(exp: &Experiment) -> Result<ExperimentResult, HarnessError> {
    exp.validate()?;
    let critical_value = exp.critical_value()?;
    let outcomes: Vec<Result<ReplicateRecord, ReplicateFailure>> = (0..exp.replications)
        .into_par_iter()
        .map(|index| {
            let mut stream = replicate_stream(exp.master_seed, index as u64);
            let sample = simulate_sample(&exp.dgp, &mut stream)
                .map_err(|e| ReplicateFailure { index, reason: e.to_string() })?;
            let sc = scan(&sample, &exp.test).map_err(|e| ReplicateFailure { index, reason: e.to_string() })?;
            Ok(ReplicateRecord {
                index,
                sup_value: sc.sup_value,
                argmax_fraction: sc.argmax_fraction,
                reject: sc.sup_value > critical_value,
            })
        })
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    let successful = records.len();
    let rejections = records.iter().filter(|r| r.reject).count();
    let rate = if successful > 0 { rejections as f64 / successful as f64 } else { 0.0 };
    let mc_stderr = if successful > 0 { (rate * (1.0 - rate) / successful as f64).sqrt() } else { 0.0 };
    let mean_argmax_fraction = if successful > 0 {
        records.iter().map(|r| r.argmax_fraction).sum::<f64>() / successful as f64
    } else {
        0.0
    };
    let tainted = failures.len() as f64 > MAX_FAILURE_SHARE * exp.replications as f64;
    let config = exp.config();
    Ok(ExperimentResult {
        rejection_rate: rate,
        mc_stderr,
        rejections,
        successful,
        critical_value,
        mean_argmax_fraction,
        failures,
        tainted,
        per_replicate: exp.keep_per_replicate.then_some(records),
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(&config),
            config,
            stream_scheme: "chacha8(master_seed).set_stream(replicate_index)".into(),
        },
    })
}

/// Empirical size: requires a no-break DGP.
pub fn run_size(exp: &Experiment) -> Result<ExperimentResult, HarnessError> {
    if !exp.dgp.is_null() {
        return Err(HarnessError::InvalidExperiment(
            "size experiments need alpha1 = alpha2 and beta1 = beta2".into(),
        ));
    }
    run_replicates(exp)
}

/// Empirical power. A zero-magnitude break reproduces [`run_size`].
pub fn run_power(exp: &Experiment) -> Result<ExperimentResult, HarnessError> {
    run_replicates(exp)
}

pub fn persist(result: &ExperimentResult, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, result.to_json() + "\n")?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ExperimentResult, HarnessError> {
    ExperimentResult::from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub name: String,
    pub empirical_mean: f64,
    pub mc_stderr: f64,
    pub target: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub law: RegressorLaw,
    #[serde(rename = "T")]
    pub t: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub pi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ivx: Option<IvxConfig>,
    pub rows: Vec<MomentRow>,
}

impl MomentReport {
    pub fn row(&self, name: &str) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    /// Break fraction for the regime moments.
    pub pi: f64,
    /// Adds the regressor-instrument moment for local-to-unity laws.
    pub ivx: Option<IvxConfig>,
    pub oracle_grid: usize,
    pub oracle_replications: usize,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self { pi: 0.3, ivx: None, oracle_grid: 1000, oracle_replications: 20_000 }
    }
}

/// `E ∫₀^π J_c(r)² dr` for a unit-variance OU process started at zero.
fn ou_second_moment_integral(c: f64, pi: f64) -> f64 {
    pi / (2.0 * c) - (1.0 - (-2.0 * c * pi).exp()) / (4.0 * c * c)
}

/// Replicate means of normalised sample moments against their limits.
///
/// For `γ < 1`, `Σx²/T^{1+γ} → ω²/(2c)` with factors `π` and `1-π` for the
/// regime sums. For `γ = 1` the normalisation is `T²` and the limits are
/// `ω² E∫J_c²` over the matching interval. With IVX settings and `γ = 1`
/// the moment `Σ x_{t-1} z̃_{t-1} / T^{1+δ}` is compared with
/// `(σ_v² + ω²(E Q(1) - 1)) / c_z`, where `E Q(1)` comes from Euler paths.
pub fn run_moment_check(
    law: &RegressorLaw,
    t: usize,
    replications: usize,
    master_seed: u64,
    opts: &MomentOptions,
) -> Result<MomentReport, HarnessError> {
    law.validate()?;
    law.roots(t)?;
    if t < 500 {
        return Err(HarnessError::InvalidExperiment(format!("T = {t} below 500")));
    }
    if replications < 2 {
        return Err(HarnessError::InvalidExperiment("need at least two replicates".into()));
    }
    if !(opts.pi > 0.0 && opts.pi < 1.0) {
        return Err(HarnessError::InvalidExperiment(format!("pi = {} not in (0, 1)", opts.pi)));
    }
    if let Some(ivx) = &opts.ivx {
        ivx.validate().map_err(|e| HarnessError::InvalidExperiment(e.to_string()))?;
    }
    let p = law.p();
    let k = (t as f64 * opts.pi).floor() as usize;
    let lur = law.gamma == 1.0;
    let norm = (t as f64).powf(1.0 + law.gamma);
    let with_ivx = lur && opts.ivx.is_some();

    let per_rep: Vec<Vec<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut stream = replicate_stream(master_seed, r);
            let (_, v) = simulate_innovations(&law.innovations, t, &mut stream).expect("law validated");
            let x = simulate_regressors(law, t, &v).expect("roots validated");
            let z = opts.ivx.filter(|_| with_ivx).map(|ivx| build_instruments(&x, &ivx));
            let mut out = Vec::new();
            for j in 0..p {
                let col = x.col_vec(j);
                let s1: f64 = col[..k].iter().map(|v| v * v).sum();
                let s2: f64 = col[k..].iter().map(|v| v * v).sum();
                out.extend([(s1 + s2) / norm, s1 / norm, s2 / norm]);
                if let (Some(z), Some(ivx)) = (&z, &opts.ivx) {
                    let xz: f64 = (0..t - 1).map(|s| x[(s, j)] * z[(s, j)]).sum();
                    out.push(xz / (t as f64).powf(1.0 + ivx.delta));
                }
            }
            out
        })
        .collect();

    let lrv = law.innovations.long_run_variance();
    let mut targets = Vec::new();
    for j in 0..p {
        let c = law.c[j];
        let (full, first) = if lur {
            (lrv[j] * ou_second_moment_integral(c, 1.0), lrv[j] * ou_second_moment_integral(c, opts.pi))
        } else {
            let full = lrv[j] / (2.0 * c);
            (full, opts.pi * full)
        };
        targets.push((format!("sum_x2[{}]", j + 1), full));
        targets.push((format!("sum_x2_regime1[{}]", j + 1), first));
        targets.push((format!("sum_x2_regime2[{}]", j + 1), full - first));
        if let (true, Some(ivx)) = (with_ivx, &opts.ivx) {
            let sigma_v2 = law.innovations.sigma_v[j].powi(2);
            let oracle_seed = master_seed ^ 0x9e37_79b9_7f4a_7c15;
            let q1 = mean_q1(c, opts.oracle_grid, opts.oracle_replications, oracle_seed);
            targets.push((format!("sum_x_ztilde[{}]", j + 1), (sigma_v2 + lrv[j] * (q1 - 1.0)) / ivx.c_z));
        }
    }

    let n = replications as f64;
    let rows = targets
        .into_iter()
        .enumerate()
        .map(|(i, (name, target))| {
            let mean = per_rep.iter().map(|r| r[i]).sum::<f64>() / n;
            let var = per_rep.iter().map(|r| (r[i] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            MomentRow {
                name,
                empirical_mean: mean,
                mc_stderr: (var / n).sqrt(),
                target,
                relative_error: (mean - target).abs() / target.abs(),
            }
        })
        .collect();
    Ok(MomentReport {
        law: law.clone(),
        t,
        replications,
        master_seed,
        pi: opts.pi,
        ivx: opts.ivx.filter(|_| with_ivx),
        rows,
    })
}

/// Counts failure reasons, for summaries.
pub fn failure_histogram(result: &ExperimentResult) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for f in &result.failures {
        *h.entry(f.reason.clone()).or_insert(0) += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::InnovationLaw;

    fn law(gamma: f64, c: f64) -> RegressorLaw {
        RegressorLaw { gamma, c: vec![c], innovations: InnovationLaw::standard(1) }
    }

    fn experiment(critical: f64, level: f64) -> Experiment {
        Experiment {
            dgp: BreakDgp::null(law(1.0, 1.0), 100, vec![0.0]),
            test: ScanConfig::new(StatisticKind::WaldOls),
            critical: CriticalSource::Fixed(critical),
            level,
            replications: 200,
            master_seed: 3,
            keep_per_replicate: true,
        }
    }

    #[test]
    fn infinite_critical_value_never_rejects() {
        let r = run_size(&experiment(f64::INFINITY, 0.05)).unwrap();
        assert_eq!(r.rejection_rate, 0.0);
        assert_eq!(r.mc_stderr, 0.0);
    }

    #[test]
    fn unit_level_always_rejects() {
        let r = run_size(&experiment(8.0, 1.0)).unwrap();
        assert_eq!(r.rejection_rate, 1.0);
    }

    #[test]
    fn size_requires_null_dgp() {
        let mut exp = experiment(8.0, 0.05);
        exp.dgp.beta2 = vec![1.0];
        assert!(matches!(run_size(&exp), Err(HarnessError::InvalidExperiment(_))));
    }

    #[test]
    fn zero_break_power_equals_size() {
        let exp = experiment(8.0, 0.05);
        assert_eq!(run_power(&exp).unwrap(), run_size(&exp).unwrap());
    }

    #[test]
    fn noiseless_break_is_always_detected() {
        let mut exp = experiment(9.0, 0.05);
        exp.dgp.law.innovations.sigma_u = 0.0;
        exp.dgp.beta2 = vec![1.0];
        let r = run_power(&exp).unwrap();
        assert_eq!(r.rejection_rate, 1.0);
    }

    #[test]
    fn extending_replications_keeps_earlier_records() {
        let mut exp = experiment(8.0, 0.05);
        let a = run_size(&exp).unwrap();
        exp.replications = 300;
        let b = run_size(&exp).unwrap();
        let (ra, rb) = (a.per_replicate.unwrap(), b.per_replicate.unwrap());
        assert_eq!(ra[..], rb[..200]);
    }

    #[test]
    fn rejection_rate_is_monotone_in_level() {
        let r = run_size(&experiment(8.0, 0.05)).unwrap();
        let at = |c: f64| r.rejection_rate_at(c).unwrap();
        assert!(at(7.0) >= at(8.0) && at(8.0) >= at(11.0));
    }

    #[test]
    fn persist_and_load_round_trip() {
        let r = run_size(&experiment(f64::INFINITY, 0.05)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        persist(&r, &path).unwrap();
        assert_eq!(load(&path).unwrap(), r);
        std::fs::write(&path, "{\"rejection_rate\": \"x\"}").unwrap();
        assert!(matches!(load(&path), Err(HarnessError::SchemaMismatch(_))));
    }

    #[test]
    fn config_hash_tracks_dgp_fields() {
        let exp = experiment(8.0, 0.05);
        let base = config_hash(&exp.config());
        assert_eq!(base, config_hash(&exp.config()));
        let mut other = exp.clone();
        other.dgp.law.c = vec![2.0];
        assert_ne!(base, config_hash(&other.config()));
        let mut other = exp.clone();
        other.dgp.t = 101;
        assert_ne!(base, config_hash(&other.config()));
        let mut other = exp;
        other.dgp.law.innovations.rho_uv = 0.1;
        assert_ne!(base, config_hash(&other.config()));
    }

    #[test]
    fn moment_targets() {
        let rep = run_moment_check(&law(0.5, 1.0), 500, 10, 1, &MomentOptions::default()).unwrap();
        assert_eq!(rep.row("sum_x2[1]").unwrap().target, 0.5);
        assert!((rep.row("sum_x2_regime1[1]").unwrap().target - 0.15).abs() < 1e-15);
        assert!((rep.row("sum_x2_regime2[1]").unwrap().target - 0.35).abs() < 1e-15);
    }

    #[test]
    fn lur_second_moment_target_matches_quadrature() {
        // E J(r)² = (1 - e^{-2cr}) / (2c), integrated by the midpoint rule.
        let c = 1.5;
        let n = 200_000;
        let quad: f64 = (0..n)
            .map(|i| {
                let r = (i as f64 + 0.5) / n as f64 * 0.4;
                (1.0 - (-2.0 * c * r).exp()) / (2.0 * c)
            })
            .sum::<f64>()
            * 0.4
            / n as f64;
        assert!((ou_second_moment_integral(c, 0.4) - quad).abs() < 1e-10);
    }

    #[test]
    fn csv_summary_row() {
        let r = run_size(&experiment(f64::INFINITY, 0.05)).unwrap();
        let row = r.csv_row("size");
        assert_eq!(row.split(',').count(), ExperimentResult::CSV_HEADER.split(',').count());
        assert!(row.starts_with("size,WaldOLS,100,1,1,,,0.5,0.05,200,0,0"));
    }
}
