//! Two-regime fits and sup-Wald break statistics.
//!
//! For a candidate break index `k`, regime 1 is rows `0..k` and regime 2 is
//! rows `k..T`. With design `X_i` and instruments `Z_i` restricted to regime
//! `i` the estimators are `θ̂_i = (Z_i'X_i)⁻¹ Z_i'y` and the Wald statistic is
//!
//! ```text
//! W(k) = (θ̂₁ - θ̂₂)' Q⁻¹ (θ̂₁ - θ̂₂) / σ̂²,
//! Q    = Σ_i (Z_i'X_i)⁻¹ (Z_i'Z_i) (X_i'Z_i)⁻¹.
//! ```
//!
//! OLS is the special case `Z = X`, where `Q` collapses to
//! `(X₁'X₁)⁻¹ + (X₂'X₂)⁻¹`; both statistics run through the same code so
//! that substituting `z = x` reproduces Wald-OLS bit for bit. `σ̂²` is the
//! mean squared residual of the unrestricted two-regime fit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::{checked_lu, LinalgError, Lu, Mat};
use crate::ivx::{augment_with_intercept, build_instruments, IvxConfig, IvxError};
use crate::dgp::{fmt_sig17, Sample};

/// Share of grid points allowed to fail before a scan is abandoned.
pub const MAX_SCAN_FAILURE_SHARE: f64 = 0.05;

/// Residual sum of squares below this fraction of `y'y` is treated as an
/// exact fit.
const EXACT_FIT_RATIO: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BreakTestError {
    #[error("break at k = {k} leaves regimes of {n1} and {n2} rows, need at least {need} each")]
    RegimeTooSmall { k: usize, n1: usize, n2: usize, need: usize },
    #[error("regime design matrix is singular: {0}")]
    SingularDesign(LinalgError),
    #[error("regime instrument moment matrix is singular: {0}")]
    SingularMoment(LinalgError),
    #[error("Wald covariance matrix is singular: {0}")]
    SingularQ(LinalgError),
    #[error("degenerate denominator in simplified statistic")]
    DegenerateDenominator,
    #[error("no feasible break index in trimming range")]
    EmptyGrid,
    #[error("{failed} of {total} grid points failed")]
    ScanFailed { failed: usize, total: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ivx(#[from] IvxError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatisticKind {
    #[serde(rename = "WaldOLS")]
    WaldOls,
    #[serde(rename = "WaldIVX")]
    WaldIvx,
}

/// Which coefficient differences the Wald statistic tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    /// Intercept (when present) and slopes jointly.
    #[default]
    Full,
    /// Slopes only. Uses the slope sub-block of `Q`.
    SlopesOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    pub intercept: bool,
    pub restriction: Restriction,
}

impl TestOptions {
    pub fn new(intercept: bool) -> Self {
        Self { intercept, restriction: Restriction::Full }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeFit {
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sigma2_hat: f64,
    pub k: usize,
}

/// Regime sums of cross products.
#[derive(Debug, Clone)]
struct RegimeMoments {
    zx: Mat,
    zz: Mat,
    zy: Vec<f64>,
    xx: Mat,
    xy: Vec<f64>,
    yy: f64,
}

impl RegimeMoments {
    fn zeros(d: usize) -> Self {
        Self {
            zx: Mat::zeros(d, d),
            zz: Mat::zeros(d, d),
            zy: vec![0.0; d],
            xx: Mat::zeros(d, d),
            xy: vec![0.0; d],
            yy: 0.0,
        }
    }

    fn add_row(&mut self, x: &[f64], z: &[f64], y: f64) {
        let d = x.len();
        for a in 0..d {
            for b in 0..d {
                self.zx[(a, b)] += z[a] * x[b];
                self.zz[(a, b)] += z[a] * z[b];
                self.xx[(a, b)] += x[a] * x[b];
            }
            self.zy[a] += z[a] * y;
            self.xy[a] += x[a] * y;
        }
        self.yy += y * y;
    }

    fn over_rows(xd: &Mat, zd: &Mat, y: &[f64], rows: std::ops::Range<usize>) -> Self {
        let mut m = Self::zeros(xd.cols());
        for r in rows {
            m.add_row(xd.row(r), zd.row(r), y[r]);
        }
        m
    }

    /// Residual sum of squares of `θ` computed from the moments.
    fn ssr(&self, theta: &[f64]) -> f64 {
        let d = theta.len();
        let mut quad = 0.0;
        let mut lin = 0.0;
        for a in 0..d {
            lin += theta[a] * self.xy[a];
            for b in 0..d {
                quad += theta[a] * self.xx[(a, b)] * theta[b];
            }
        }
        (self.yy - 2.0 * lin + quad).max(0.0)
    }
}

/// Estimator of one regime with the factorised `Z'X`.
struct RegimeEstimate {
    lu: Lu,
    theta: Vec<f64>,
}

fn estimate(m: &RegimeMoments, ols: bool) -> Result<RegimeEstimate, BreakTestError> {
    let lu = checked_lu(&m.zx).map_err(|e| {
        if ols {
            BreakTestError::SingularDesign(e)
        } else {
            BreakTestError::SingularMoment(e)
        }
    })?;
    let theta = lu.solve(&Mat::column(&m.zy)).col_vec(0);
    Ok(RegimeEstimate { lu, theta })
}

/// `(Z'X)⁻¹ (Z'Z) (X'Z)⁻¹` via two solves.
fn sandwich(est: &RegimeEstimate, zz: &Mat) -> Mat {
    let left = est.lu.solve(zz);
    est.lu.solve(&left.transpose())
}

struct TwoRegime {
    est1: RegimeEstimate,
    est2: RegimeEstimate,
}

fn two_regime(m1: &RegimeMoments, m2: &RegimeMoments, ols: bool) -> Result<TwoRegime, BreakTestError> {
    Ok(TwoRegime { est1: estimate(m1, ols)?, est2: estimate(m2, ols)? })
}

/// Quadratic form of the coefficient difference, divided by `σ̂²`.
fn wald_from_parts(
    fit: &TwoRegime,
    m1: &RegimeMoments,
    m2: &RegimeMoments,
    ssr: f64,
    t: usize,
    opts: &TestOptions,
) -> Result<f64, BreakTestError> {
    let d = fit.est1.theta.len();
    let q = &sandwich(&fit.est1, &m1.zz) + &sandwich(&fit.est2, &m2.zz);
    let first = match opts.restriction {
        Restriction::SlopesOnly if opts.intercept => 1,
        _ => 0,
    };
    let r = d - first;
    let q_sub = q.block(first, first, r, r);
    let diff: Vec<f64> = (first..d).map(|i| fit.est1.theta[i] - fit.est2.theta[i]).collect();
    let sol = checked_lu(&q_sub)
        .map_err(BreakTestError::SingularQ)?
        .solve(&Mat::column(&diff))
        .col_vec(0);
    let quad: f64 = diff.iter().zip(&sol).map(|(a, b)| a * b).sum::<f64>().max(0.0);

    let yy = m1.yy + m2.yy;
    if ssr <= EXACT_FIT_RATIO * yy || yy == 0.0 {
        let scale = fit
            .est1
            .theta
            .iter()
            .chain(&fit.est2.theta)
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let gap = diff.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        return Ok(if gap <= 1e-8 * scale { 0.0 } else { f64::INFINITY });
    }
    let sigma2 = ssr / t as f64;
    Ok(quad / sigma2)
}

fn design(x: &Mat, intercept: bool) -> Mat {
    if intercept {
        augment_with_intercept(x)
    } else {
        x.clone()
    }
}

fn check_regimes(t: usize, k: usize, d: usize) -> Result<(), BreakTestError> {
    let need = d + 2;
    if k < need || t.saturating_sub(k) < need {
        return Err(BreakTestError::RegimeTooSmall { k, n1: k, n2: t.saturating_sub(k), need });
    }
    Ok(())
}

fn check_instruments(sample: &Sample, z: &Mat) -> Result<(), BreakTestError> {
    if z.rows() != sample.len() || z.cols() != sample.p() {
        return Err(BreakTestError::InvalidConfig(format!(
            "instruments are {}x{}, sample is {}x{}",
            z.rows(),
            z.cols(),
            sample.len(),
            sample.p()
        )));
    }
    Ok(())
}

struct DirectFit {
    m1: RegimeMoments,
    m2: RegimeMoments,
    fit: TwoRegime,
    residuals: Vec<f64>,
    ssr: f64,
}

/// Fits both regimes from data, with residuals computed row by row.
fn direct_fit(sample: &Sample, z: Option<&Mat>, k: usize, intercept: bool) -> Result<DirectFit, BreakTestError> {
    let t = sample.len();
    let xd = design(&sample.x, intercept);
    let zd = match z {
        Some(z) => {
            check_instruments(sample, z)?;
            design(z, intercept)
        }
        None => xd.clone(),
    };
    check_regimes(t, k, xd.cols())?;
    let m1 = RegimeMoments::over_rows(&xd, &zd, &sample.y, 0..k);
    let m2 = RegimeMoments::over_rows(&xd, &zd, &sample.y, k..t);
    let fit = two_regime(&m1, &m2, z.is_none())?;
    let mut residuals = Vec::with_capacity(t);
    for r in 0..t {
        let theta = if r < k { &fit.est1.theta } else { &fit.est2.theta };
        let fitted: f64 = xd.row(r).iter().zip(theta).map(|(a, b)| a * b).sum();
        residuals.push(sample.y[r] - fitted);
    }
    let ssr = residuals.iter().map(|e| e * e).sum();
    Ok(DirectFit { m1, m2, fit, residuals, ssr })
}

impl DirectFit {
    fn into_regime_fit(self, k: usize) -> RegimeFit {
        let t = self.residuals.len();
        RegimeFit {
            theta1: self.fit.est1.theta,
            theta2: self.fit.est2.theta,
            sigma2_hat: self.ssr / t as f64,
            residuals: self.residuals,
            k,
        }
    }
}

/// Regime-wise OLS at break index `k`.
pub fn fit_two_regime_ols(sample: &Sample, k: usize, intercept: bool) -> Result<RegimeFit, BreakTestError> {
    Ok(direct_fit(sample, None, k, intercept)?.into_regime_fit(k))
}

/// Regime-wise IVX at break index `k`; `z` holds the raw instruments
/// (without the ones column).
pub fn fit_two_regime_ivx(sample: &Sample, z: &Mat, k: usize, intercept: bool) -> Result<RegimeFit, BreakTestError> {
    Ok(direct_fit(sample, Some(z), k, intercept)?.into_regime_fit(k))
}

/// Wald statistic at `k`. `z = None` gives Wald-OLS.
pub fn wald_at(sample: &Sample, z: Option<&Mat>, k: usize, opts: &TestOptions) -> Result<f64, BreakTestError> {
    let f = direct_fit(sample, z, k, opts.intercept)?;
    wald_from_parts(&f.fit, &f.m1, &f.m2, f.ssr, sample.len(), opts)
}

pub fn wald_ols_at(sample: &Sample, k: usize, intercept: bool) -> Result<f64, BreakTestError> {
    wald_at(sample, None, k, &TestOptions::new(intercept))
}

pub fn wald_ivx_at(sample: &Sample, z: &Mat, k: usize, intercept: bool) -> Result<f64, BreakTestError> {
    wald_at(sample, Some(z), k, &TestOptions::new(intercept))
}

/// Single-regressor Wald-IVX through the weights
/// `w_t = z_t 1{t < k} - (Σ₁ z x / Σ z x) z_t`:
///
/// ```text
/// W = (Σ w_t û_t)² / (σ̂² Σ w_t²)
/// ```
///
/// `û` are residuals of the full-sample IVX fit without a break; any common
/// slope gives the same numerator, and the regime-specific residuals would
/// make it vanish. `σ̂²` is the unrestricted two-regime residual variance, as
/// in [`wald_ivx_at`], with which this agrees algebraically.
pub fn wald_ivx_simplified(sample: &Sample, z: &Mat, k: usize) -> Result<f64, BreakTestError> {
    if sample.p() != 1 {
        return Err(BreakTestError::InvalidConfig(format!(
            "simplified statistic needs one regressor, got {}",
            sample.p()
        )));
    }
    check_instruments(sample, z)?;
    let t = sample.len();
    check_regimes(t, k, 1)?;
    let x = sample.x.as_slice();
    let zs = z.as_slice();
    let y = &sample.y;

    let zx_all: f64 = zs.iter().zip(x).map(|(a, b)| a * b).sum();
    let zx_1: f64 = zs[..k].iter().zip(&x[..k]).map(|(a, b)| a * b).sum();
    let zy_all: f64 = zs.iter().zip(y).map(|(a, b)| a * b).sum();
    if zx_all.abs() < 1e-300 {
        return Err(BreakTestError::DegenerateDenominator);
    }
    let beta = zy_all / zx_all;
    let ratio = zx_1 / zx_all;

    let mut num = 0.0;
    let mut den = 0.0;
    for r in 0..t {
        let z1 = if r < k { zs[r] } else { 0.0 };
        let w = z1 - ratio * zs[r];
        let u = y[r] - beta * x[r];
        num += w * u;
        den += w * w;
    }
    if den < 1e-300 {
        return Err(BreakTestError::DegenerateDenominator);
    }

    let f = direct_fit(sample, Some(z), k, false)?;
    let yy = f.m1.yy + f.m2.yy;
    if f.ssr <= EXACT_FIT_RATIO * yy || yy == 0.0 {
        let opts = TestOptions::new(false);
        return wald_from_parts(&f.fit, &f.m1, &f.m2, f.ssr, t, &opts);
    }
    let sigma2 = f.ssr / t as f64;
    Ok(num * num / (sigma2 * den))
}

/// Settings for a sup-Wald scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub pi_lo: f64,
    pub pi_hi: f64,
    /// Grid step in break-fraction units; `None` evaluates every feasible `k`.
    #[serde(default)]
    pub step: Option<f64>,
    pub kind: StatisticKind,
    #[serde(default)]
    pub intercept: bool,
    #[serde(default)]
    pub restriction: Restriction,
    /// IVX settings; defaults apply when `kind` is IVX and this is unset.
    #[serde(default)]
    pub ivx: Option<IvxConfig>,
}

impl ScanConfig {
    pub fn new(kind: StatisticKind) -> Self {
        Self {
            pi_lo: 0.15,
            pi_hi: 0.85,
            step: None,
            kind,
            intercept: false,
            restriction: Restriction::Full,
            ivx: match kind {
                StatisticKind::WaldIvx => Some(IvxConfig::default()),
                StatisticKind::WaldOls => None,
            },
        }
    }

    pub fn with_trimming(mut self, pi_lo: f64, pi_hi: f64) -> Self {
        self.pi_lo = pi_lo;
        self.pi_hi = pi_hi;
        self
    }

    pub fn options(&self) -> TestOptions {
        TestOptions { intercept: self.intercept, restriction: self.restriction }
    }

    /// IVX settings in effect, filling in defaults.
    pub fn resolved_ivx(&self) -> Option<IvxConfig> {
        match self.kind {
            StatisticKind::WaldIvx => Some(self.ivx.unwrap_or_default()),
            StatisticKind::WaldOls => None,
        }
    }

    pub fn validate(&self) -> Result<(), BreakTestError> {
        if !(self.pi_lo > 0.0 && self.pi_lo <= self.pi_hi && self.pi_hi < 1.0) {
            return Err(BreakTestError::InvalidConfig(format!(
                "trimming [{}, {}] must satisfy 0 < lo <= hi < 1",
                self.pi_lo, self.pi_hi
            )));
        }
        if let Some(step) = self.step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(BreakTestError::InvalidConfig(format!("grid step {step} must be positive")));
            }
        }
        if let Some(ivx) = &self.ivx {
            ivx.validate()?;
        }
        Ok(())
    }

    /// Candidate `(π, k)` pairs for a sample of size `t`, before feasibility
    /// filtering. Duplicate `k` keep their first `π`.
    pub fn candidate_breaks(&self, t: usize) -> Vec<(f64, usize)> {
        const EPS: f64 = 1e-9;
        let tf = t as f64;
        let mut out: Vec<(f64, usize)> = Vec::new();
        match self.step {
            None => {
                let lo = (tf * self.pi_lo - EPS).ceil().max(0.0) as usize;
                let hi = (tf * self.pi_hi + EPS).floor() as usize;
                for k in lo..=hi.min(t) {
                    out.push((k as f64 / tf, k));
                }
            }
            Some(step) => {
                let n = ((self.pi_hi - self.pi_lo) / step + EPS).floor() as usize;
                for i in 0..=n {
                    let pi = self.pi_lo + i as f64 * step;
                    let k = (tf * pi + EPS).floor() as usize;
                    if out.last().is_none_or(|(_, last)| *last != k) {
                        out.push((pi, k));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFailure {
    pub k: usize,
    pub reason: String,
}

/// Wald process over the trimmed grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldScan {
    pub statistic_kind: StatisticKind,
    #[serde(rename = "T")]
    pub t: usize,
    pub trimming: [f64; 2],
    pub grid: Vec<f64>,
    pub ks: Vec<usize>,
    pub stats: Vec<f64>,
    pub sup_value: f64,
    pub argmax_fraction: f64,
    pub argmax_k: usize,
    pub failures: Vec<ScanFailure>,
    pub config: ScanConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl WaldScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pi,k,stat\n");
        for ((pi, k), s) in self.grid.iter().zip(&self.ks).zip(&self.stats) {
            let _ = writeln!(out, "{},{},{}", fmt_sig17(*pi), k, fmt_sig17(*s));
        }
        out
    }
}

/// Evaluates the configured statistic at every grid point and takes the sup.
///
/// Regime moments are accumulated incrementally, so the cost is linear in
/// `T` for a given dimension.
pub fn scan(sample: &Sample, cfg: &ScanConfig) -> Result<WaldScan, BreakTestError> {
    cfg.validate()?;
    let t = sample.len();
    let xd = design(&sample.x, cfg.intercept);
    let d = xd.cols();
    let ivx = cfg.resolved_ivx();
    let zd = match &ivx {
        Some(ivx) => design(&build_instruments(&sample.x, ivx), cfg.intercept),
        None => xd.clone(),
    };
    let ols = ivx.is_none();
    let need = d + 2;
    let candidates: Vec<(f64, usize)> = cfg
        .candidate_breaks(t)
        .into_iter()
        .filter(|(_, k)| *k >= need && t.saturating_sub(*k) >= need)
        .collect();
    if candidates.is_empty() {
        return Err(BreakTestError::EmptyGrid);
    }

    // suffix[j] holds the moments of rows j..T for every candidate start.
    let k_min = candidates[0].1;
    let mut suffix: Vec<RegimeMoments> = Vec::with_capacity(t - k_min + 1);
    let mut acc = RegimeMoments::zeros(d);
    suffix.push(acc.clone());
    for r in (k_min..t).rev() {
        acc.add_row(xd.row(r), zd.row(r), sample.y[r]);
        suffix.push(acc.clone());
    }
    suffix.reverse();

    let opts = cfg.options();
    let mut prefix = RegimeMoments::zeros(d);
    let mut next_row = 0;
    let mut grid = Vec::with_capacity(candidates.len());
    let mut ks = Vec::with_capacity(candidates.len());
    let mut stats = Vec::with_capacity(candidates.len());
    let mut failures = Vec::new();
    for &(pi, k) in &candidates {
        while next_row < k {
            prefix.add_row(xd.row(next_row), zd.row(next_row), sample.y[next_row]);
            next_row += 1;
        }
        let m2 = &suffix[k - k_min];
        let result = two_regime(&prefix, m2, ols).and_then(|fit| {
            let ssr = prefix.ssr(&fit.est1.theta) + m2.ssr(&fit.est2.theta);
            wald_from_parts(&fit, &prefix, m2, ssr, t, &opts)
        });
        match result {
            Ok(stat) => {
                grid.push(pi);
                ks.push(k);
                stats.push(stat);
            }
            Err(e) => failures.push(ScanFailure { k, reason: e.to_string() }),
        }
    }
    let total = candidates.len();
    if stats.is_empty() || failures.len() as f64 > MAX_SCAN_FAILURE_SHARE * total as f64 {
        return Err(BreakTestError::ScanFailed { failed: failures.len(), total });
    }

    let mut best = 0;
    for (i, s) in stats.iter().enumerate() {
        if *s > stats[best] {
            best = i;
        }
    }
    let mut config = cfg.clone();
    config.ivx = ivx;
    Ok(WaldScan {
        statistic_kind: cfg.kind,
        t,
        trimming: [cfg.pi_lo, cfg.pi_hi],
        sup_value: stats[best],
        argmax_fraction: grid[best],
        argmax_k: ks[best],
        grid,
        ks,
        stats,
        failures,
        config,
        seed: None,
    })
}
