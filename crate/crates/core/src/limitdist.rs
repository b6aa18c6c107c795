//! Limiting functionals of the break statistics and their critical values.
//!
//! All functionals are evaluated on a uniform grid `{i/n}` by Euler
//! discretisation of standard Brownian motion:
//!
//! * `SupNBB`: `sup_π |W(π) - πW(1)|² / (π(1-π))` over the trimming window,
//!   with `W` of dimension `p`.
//! * `ChiSqPlusSupBB`: an independent `χ²_p` draw plus the `SupNBB` term.
//! * `ChiSq`: `χ²_p`.
//! * `OUQuadratic`: `∫₀¹ J_c(r)² dr` for the Ornstein–Uhlenbeck process
//!   `dJ = -c J dt + dW`, `J(0) = 0`.
//!
//! Tables are built from independent replicate streams and are therefore
//! reproducible from `(spec, replications, seed)` alone.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::Mat;
use crate::rng::{replicate_stream, NormalSource};

/// Smallest replication count accepted for a table written to disk.
pub const MIN_PERSISTED_REPLICATIONS: usize = 10_000;

#[derive(Debug, Error)]
pub enum LimitError {
    #[error("invalid functional spec: {0}")]
    InvalidSpec(String),
    #[error("invalid probability levels: {0}")]
    InvalidLevels(String),
    #[error("{0} replications requested, need at least {1}")]
    TooFewReplications(usize, usize),
    #[error("table does not bracket level {0}")]
    LevelNotCovered(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("table file does not match schema: {0}")]
    SchemaMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionalKind {
    SupNBB,
    ChiSqPlusSupBB,
    ChiSq,
    OUQuadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSpec {
    pub kind: FunctionalKind,
    pub p: usize,
    pub trimming: [f64; 2],
    pub grid_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl FunctionalSpec {
    pub fn new(kind: FunctionalKind, p: usize) -> Self {
        Self { kind, p, trimming: [0.15, 0.85], grid_points: 1000, c: None }
    }

    pub fn sup_nbb(p: usize, pi_lo: f64, pi_hi: f64) -> Self {
        Self { trimming: [pi_lo, pi_hi], ..Self::new(FunctionalKind::SupNBB, p) }
    }

    pub fn ou_quadratic(c: f64) -> Self {
        Self { c: Some(c), ..Self::new(FunctionalKind::OUQuadratic, 1) }
    }

    pub fn with_grid(mut self, grid_points: usize) -> Self {
        self.grid_points = grid_points;
        self
    }

    /// A single-point window `[π, π]` is allowed and gives the fixed-break
    /// functional.
    pub fn validate(&self) -> Result<(), LimitError> {
        let [lo, hi] = self.trimming;
        if self.p == 0 {
            return Err(LimitError::InvalidSpec("p must be at least 1".into()));
        }
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(LimitError::InvalidSpec(format!("trimming [{lo}, {hi}] must satisfy 0 < lo <= hi < 1")));
        }
        if self.grid_points < 100 {
            return Err(LimitError::InvalidSpec(format!("grid_points = {} below 100", self.grid_points)));
        }
        if self.kind == FunctionalKind::OUQuadratic {
            match self.c {
                Some(c) if c >= 0.0 && c.is_finite() => {}
                _ => return Err(LimitError::InvalidSpec("OUQuadratic needs a decay c >= 0".into())),
            }
        }
        Ok(())
    }

    /// Grid indices inside the trimming window, excluding the endpoints.
    fn window(&self) -> (usize, usize) {
        const EPS: f64 = 1e-9;
        let n = self.grid_points as f64;
        let [lo, hi] = self.trimming;
        let mut i_lo = (lo * n - EPS).ceil() as usize;
        let mut i_hi = (hi * n + EPS).floor() as usize;
        if i_lo > i_hi {
            i_lo = (lo * n).round() as usize;
            i_hi = i_lo;
        }
        (i_lo.max(1), i_hi.min(self.grid_points - 1))
    }
}

/// Standard Brownian motion at `{0, 1/n, …, 1}`; row `i` is `W(i/n)`.
pub fn simulate_brownian_grid<S: NormalSource + ?Sized>(n: usize, dim: usize, stream: &mut S) -> Mat {
    assert!(n >= 2, "need at least two grid intervals");
    let sd = (1.0 / n as f64).sqrt();
    let mut w = Mat::zeros(n + 1, dim);
    for i in 1..=n {
        for j in 0..dim {
            w[(i, j)] = w[(i - 1, j)] + sd * stream.standard_normal();
        }
    }
    w
}

/// Euler path of `dJ = -c J dt + dW` on `{i/n}`; `c = 0` gives `W` itself.
pub fn simulate_ou_grid<S: NormalSource + ?Sized>(n: usize, c: f64, stream: &mut S) -> Vec<f64> {
    assert!(n >= 2, "need at least two grid intervals");
    let dt = 1.0 / n as f64;
    let sd = dt.sqrt();
    let mut j = Vec::with_capacity(n + 1);
    j.push(0.0);
    let mut cur: f64 = 0.0;
    for _ in 0..n {
        let dw = sd * stream.standard_normal();
        cur = if c == 0.0 { cur + dw } else { cur - c * cur * dt + dw };
        j.push(cur);
    }
    j
}

/// Path functionals of a unit-variance OU path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuFunctionals {
    /// `∫ J²`, left-point rule.
    pub integral_sq: f64,
    /// `∫ J dJ`, Itô left-point sum.
    pub stochastic_integral: f64,
    /// `1 + ∫ J dJ`.
    pub q1: f64,
    pub terminal: f64,
}

pub fn ou_functionals(path: &[f64]) -> OuFunctionals {
    let n = path.len() - 1;
    let dt = 1.0 / n as f64;
    let mut integral_sq = 0.0;
    let mut stochastic_integral = 0.0;
    for i in 0..n {
        integral_sq += path[i] * path[i] * dt;
        stochastic_integral += path[i] * (path[i + 1] - path[i]);
    }
    OuFunctionals { integral_sq, stochastic_integral, q1: 1.0 + stochastic_integral, terminal: path[n] }
}

/// Monte Carlo mean of `Q(1) = 1 + ∫ J_c dJ_c` from Euler paths.
pub fn mean_q1(c: f64, grid_points: usize, replications: usize, seed: u64) -> f64 {
    let draws: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|r| ou_functionals(&simulate_ou_grid(grid_points, c, &mut replicate_stream(seed, r))).q1)
        .collect();
    draws.iter().sum::<f64>() / replications as f64
}

fn sup_bridge<S: NormalSource + ?Sized>(spec: &FunctionalSpec, stream: &mut S) -> f64 {
    let n = spec.grid_points;
    let w = simulate_brownian_grid(n, spec.p, stream);
    let end = w.row(n).to_vec();
    let (i_lo, i_hi) = spec.window();
    let mut best = f64::NEG_INFINITY;
    for i in i_lo..=i_hi {
        let pi = i as f64 / n as f64;
        let norm2: f64 = w.row(i).iter().zip(&end).map(|(a, b)| (a - pi * b).powi(2)).sum();
        best = best.max(norm2 / (pi * (1.0 - pi)));
    }
    best
}

fn chi_square<S: NormalSource + ?Sized>(p: usize, stream: &mut S) -> f64 {
    (0..p).map(|_| stream.standard_normal().powi(2)).sum()
}

/// One draw of the functional described by `spec`.
///
/// Panics if `spec` is invalid; call [`FunctionalSpec::validate`] first.
pub fn draw_functional<S: NormalSource + ?Sized>(spec: &FunctionalSpec, stream: &mut S) -> f64 {
    spec.validate().expect("invalid functional spec");
    match spec.kind {
        FunctionalKind::SupNBB => sup_bridge(spec, stream),
        FunctionalKind::ChiSqPlusSupBB => {
            let chi = chi_square(spec.p, stream);
            chi + sup_bridge(spec, stream)
        }
        FunctionalKind::ChiSq => chi_square(spec.p, stream),
        FunctionalKind::OUQuadratic => {
            let path = simulate_ou_grid(spec.grid_points, spec.c.unwrap_or(0.0), stream);
            ou_functionals(&path).integral_sq
        }
    }
}

/// `replications` independent draws; draw `r` uses stream `(seed, r)`.
pub fn simulate_draws(spec: &FunctionalSpec, replications: usize, seed: u64) -> Result<Vec<f64>, LimitError> {
    spec.validate()?;
    Ok((0..replications as u64)
        .into_par_iter()
        .map(|r| draw_functional(spec, &mut replicate_stream(seed, r)))
        .collect())
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn empirical_quantile(sorted: &[f64], level: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Simulated quantiles of a limiting functional.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValueTable {
    pub spec: FunctionalSpec,
    pub replications: usize,
    pub seed: u64,
    /// `(level, value)` sorted by level.
    pub quantiles: Vec<(f64, f64)>,
    /// Sorted draws, when kept.
    pub draws: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    spec: FunctionalSpec,
    replications: usize,
    seed: u64,
    quantiles: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    draws: Option<Vec<f64>>,
}

/// `"0.90"` style key; more digits only when two would lose precision.
pub fn level_key(level: f64) -> String {
    let two = format!("{level:.2}");
    if two.parse::<f64>().ok() == Some(level) {
        two
    } else {
        format!("{level}")
    }
}

/// Empirical quantiles at `levels`; draws are kept when `keep_draws`.
pub fn build_table(
    spec: &FunctionalSpec,
    replications: usize,
    levels: &[f64],
    master_seed: u64,
    keep_draws: bool,
) -> Result<CriticalValueTable, LimitError> {
    if replications < 1000 {
        return Err(LimitError::TooFewReplications(replications, 1000));
    }
    if levels.is_empty() || levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(LimitError::InvalidLevels(format!("{levels:?} must be nonempty and inside (0, 1)")));
    }
    let mut draws = simulate_draws(spec, replications, master_seed)?;
    draws.sort_by(f64::total_cmp);
    let mut sorted_levels = levels.to_vec();
    sorted_levels.sort_by(f64::total_cmp);
    sorted_levels.dedup();
    let quantiles = sorted_levels.iter().map(|l| (*l, empirical_quantile(&draws, *l))).collect();
    Ok(CriticalValueTable {
        spec: spec.clone(),
        replications,
        seed: master_seed,
        quantiles,
        draws: keep_draws.then_some(draws),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub value: f64,
    /// Set when the observation fell outside the range the table resolves.
    pub clamped: bool,
}

/// Upper-tail probability of `observed` under the tabulated distribution.
pub fn p_value(table: &CriticalValueTable, observed: f64) -> PValue {
    if let Some(draws) = table.draws.as_deref().filter(|d| !d.is_empty()) {
        let below = draws.partition_point(|d| *d < observed);
        let value = (draws.len() - below) as f64 / draws.len() as f64;
        let clamped = observed < draws[0] || observed > draws[draws.len() - 1];
        return PValue { value, clamped };
    }
    let q = &table.quantiles;
    assert!(!q.is_empty(), "empty critical value table");
    let (first, last) = (q[0], q[q.len() - 1]);
    if observed <= first.1 {
        return PValue { value: 1.0 - first.0, clamped: observed < first.1 };
    }
    if observed >= last.1 {
        return PValue { value: 1.0 - last.0, clamped: observed > last.1 };
    }
    let cdf = q
        .windows(2)
        .find(|w| observed >= w[0].1 && observed <= w[1].1)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if b.1 == a.1 {
                b.0
            } else {
                a.0 + (b.0 - a.0) * (observed - a.1) / (b.1 - a.1)
            }
        })
        .expect("quantiles are nondecreasing");
    PValue { value: 1.0 - cdf, clamped: false }
}

impl CriticalValueTable {
    /// Quantile at `level`, interpolating between stored levels (or from
    /// the draws when kept).
    pub fn quantile(&self, level: f64) -> Result<f64, LimitError> {
        if let Some(draws) = self.draws.as_deref().filter(|d| !d.is_empty()) {
            if (0.0..=1.0).contains(&level) {
                return Ok(empirical_quantile(draws, level));
            }
        }
        if let Some((_, v)) = self.quantiles.iter().find(|(l, _)| (l - level).abs() < 1e-12) {
            return Ok(*v);
        }
        self.quantiles
            .windows(2)
            .find(|w| level > w[0].0 && level < w[1].0)
            .map(|w| w[0].1 + (w[1].1 - w[0].1) * (level - w[0].0) / (w[1].0 - w[0].0))
            .ok_or(LimitError::LevelNotCovered(level))
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            spec: self.spec.clone(),
            replications: self.replications,
            seed: self.seed,
            quantiles: self.quantiles.iter().map(|(l, v)| (level_key(*l), *v)).collect(),
            draws: self.draws.clone(),
        };
        serde_json::to_string_pretty(&file).expect("table serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, LimitError> {
        let file: TableFile = serde_json::from_str(text).map_err(|e| LimitError::SchemaMismatch(e.to_string()))?;
        file.spec.validate().map_err(|e| LimitError::SchemaMismatch(e.to_string()))?;
        let mut quantiles = Vec::with_capacity(file.quantiles.len());
        for (k, v) in &file.quantiles {
            let level: f64 = k
                .parse()
                .map_err(|_| LimitError::SchemaMismatch(format!("quantile key `{k}` is not a probability")))?;
            quantiles.push((level, *v));
        }
        quantiles.sort_by(|a, b| a.0.total_cmp(&b.0));
        if quantiles.is_empty() {
            return Err(LimitError::SchemaMismatch("no quantiles".into()));
        }
        if quantiles.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(LimitError::SchemaMismatch("quantiles decrease with level".into()));
        }
        Ok(Self {
            spec: file.spec,
            replications: file.replications,
            seed: file.seed,
            quantiles,
            draws: file.draws,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), LimitError> {
        if self.replications < MIN_PERSISTED_REPLICATIONS {
            return Err(LimitError::TooFewReplications(self.replications, MIN_PERSISTED_REPLICATIONS));
        }
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LimitError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
