//! Data-generating processes for predictive regressions with a single break.
//!
//! Regressors follow `x_t = (I - C / T^γ) x_{t-1} + v_t` with `x_0 = 0` and
//! diagonal `C`; `γ = 1` is the local-to-unity case and `γ < 1` gives a
//! mildly integrated regressor. The response switches regime after
//! `k = ⌊T π₀⌋`:
//!
//! ```text
//! y_{t+1} = (α₁ + β₁'x_t) 1{t ≤ k} + (α₂ + β₂'x_t) 1{t > k} + u_{t+1}
//! ```
//!
//! Rows of a [`Sample`] are aligned so that row `t` holds `y_{t+1}`, `x_t`
//! and `u_{t+1}`. The shock `u_{t+1}` is correlated with `v_{t+1}`, the
//! innovation of the *next* regressor value, which is the usual source of
//! endogeneity in predictive regressions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::Mat;
use crate::rng::NormalSource;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DgpError {
    #[error("innovation covariance is not positive semidefinite: {0}")]
    InvalidCovariance(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Joint Gaussian law of `(u_t, v_t)`.
///
/// Each `v` component is `sigma_v[i]` times an independent standard normal
/// `e_i`, optionally passed through the moving-average filter `ma_weights`.
/// The shock `u` has correlation `rho_uv` with every `e_i`, which requires
/// `p ρ² ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnovationLaw {
    pub sigma_u: f64,
    pub sigma_v: Vec<f64>,
    pub rho_uv: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ma_weights: Option<Vec<f64>>,
}

impl InnovationLaw {
    /// Independent unit-variance shocks for `p` regressors.
    pub fn standard(p: usize) -> Self {
        Self { sigma_u: 1.0, sigma_v: vec![1.0; p], rho_uv: 0.0, ma_weights: None }
    }

    pub fn p(&self) -> usize {
        self.sigma_v.len()
    }

    pub fn validate(&self) -> Result<(), DgpError> {
        if !(self.sigma_u >= 0.0 && self.sigma_u.is_finite()) {
            return Err(DgpError::InvalidParameter(format!("sigma_u = {}", self.sigma_u)));
        }
        if let Some(s) = self.sigma_v.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(DgpError::InvalidParameter(format!("sigma_v entry {s}")));
        }
        if !(-1.0..=1.0).contains(&self.rho_uv) {
            return Err(DgpError::InvalidParameter(format!("rho_uv = {}", self.rho_uv)));
        }
        let load = self.p() as f64 * self.rho_uv * self.rho_uv;
        if load > 1.0 + 1e-12 {
            return Err(DgpError::InvalidCovariance(format!(
                "p * rho_uv^2 = {load} exceeds 1"
            )));
        }
        if let Some(w) = &self.ma_weights {
            if w.is_empty() || w.len() > 4 {
                return Err(DgpError::InvalidParameter(format!(
                    "ma_weights must have 1 to 4 entries, got {}",
                    w.len()
                )));
            }
            if w[0] != 1.0 {
                return Err(DgpError::InvalidParameter("ma_weights[0] must equal 1".into()));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(DgpError::InvalidParameter("ma_weights must be finite".into()));
            }
        }
        Ok(())
    }

    /// Long-run variance of each `v` component: `σ_v² (Σ w)²`.
    pub fn long_run_variance(&self) -> Vec<f64> {
        let gain: f64 = self.ma_weights.as_ref().map_or(1.0, |w| w.iter().sum());
        self.sigma_v.iter().map(|s| s * s * gain * gain).collect()
    }
}

/// Persistence law of the regressors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorLaw {
    pub gamma: f64,
    /// Diagonal of the decay matrix `C`.
    pub c: Vec<f64>,
    pub innovations: InnovationLaw,
}

impl RegressorLaw {
    pub fn p(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<(), DgpError> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(DgpError::InvalidParameter(format!("gamma = {} not in (0, 1]", self.gamma)));
        }
        if self.c.is_empty() {
            return Err(DgpError::InvalidParameter("at least one regressor required".into()));
        }
        if let Some(c) = self.c.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(DgpError::InvalidParameter(format!("decay coefficient {c} must be positive")));
        }
        if self.innovations.p() != self.p() {
            return Err(DgpError::InvalidParameter(format!(
                "{} decay coefficients but {} innovation scales",
                self.p(),
                self.innovations.p()
            )));
        }
        self.innovations.validate()
    }

    /// Autoregressive roots `1 - c_i / T^γ`.
    pub fn roots(&self, t: usize) -> Result<Vec<f64>, DgpError> {
        let scale = (t as f64).powf(self.gamma);
        self.c
            .iter()
            .map(|c| {
                let root = 1.0 - c / scale;
                if (0.0..1.0).contains(&root) {
                    Ok(root)
                } else {
                    Err(DgpError::InvalidParameter(format!(
                        "root 1 - {c}/{t}^{} = {root} outside [0, 1)",
                        self.gamma
                    )))
                }
            })
            .collect()
    }
}

/// Two-regime predictive regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakDgp {
    pub law: RegressorLaw,
    #[serde(rename = "T")]
    pub t: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub pi0: f64,
    /// When unset the regime intercepts are not added to the response.
    pub include_intercept: bool,
}

impl BreakDgp {
    /// No-break model `y_{t+1} = β'x_t + u_{t+1}` without intercept.
    pub fn null(law: RegressorLaw, t: usize, beta: Vec<f64>) -> Self {
        Self {
            law,
            t,
            alpha1: 0.0,
            alpha2: 0.0,
            beta1: beta.clone(),
            beta2: beta,
            pi0: 0.5,
            include_intercept: false,
        }
    }

    pub fn break_index(&self) -> usize {
        (self.t as f64 * self.pi0).floor() as usize
    }

    pub fn is_null(&self) -> bool {
        self.beta1 == self.beta2 && (!self.include_intercept || self.alpha1 == self.alpha2)
    }

    pub fn validate(&self) -> Result<(), DgpError> {
        self.law.validate()?;
        if self.t < 20 {
            return Err(DgpError::InvalidParameter(format!("T = {} below 20", self.t)));
        }
        if !(self.pi0 > 0.0 && self.pi0 < 1.0) {
            return Err(DgpError::InvalidParameter(format!("pi0 = {} not in (0, 1)", self.pi0)));
        }
        let k = self.break_index();
        if k < 1 || k > self.t - 1 {
            return Err(DgpError::InvalidParameter(format!("break index {k} outside [1, T-1]")));
        }
        let p = self.law.p();
        if self.beta1.len() != p || self.beta2.len() != p {
            return Err(DgpError::InvalidParameter(format!(
                "beta lengths {} and {} differ from p = {p}",
                self.beta1.len(),
                self.beta2.len()
            )));
        }
        let all = [self.alpha1, self.alpha2].into_iter().chain(self.beta1.iter().copied());
        if all.chain(self.beta2.iter().copied()).any(|v| !v.is_finite()) {
            return Err(DgpError::InvalidParameter("coefficients must be finite".into()));
        }
        self.law.roots(self.t)?;
        Ok(())
    }

    /// Conditional mean of row `row` (0-based) given the regressors.
    pub fn regime_mean(&self, row: usize, x: &[f64]) -> f64 {
        let (alpha, beta) = if row < self.break_index() {
            (self.alpha1, &self.beta1)
        } else {
            (self.alpha2, &self.beta2)
        };
        let mut m = if self.include_intercept { alpha } else { 0.0 };
        for (b, xi) in beta.iter().zip(x) {
            m += b * xi;
        }
        m
    }
}

/// Simulated shocks and generating model kept alongside a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub u: Vec<f64>,
    pub v: Mat,
    pub dgp: Option<BreakDgp>,
}

/// Aligned observations: row `t` holds `(y_{t+1}, x_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub y: Vec<f64>,
    pub x: Mat,
    pub truth: Option<Truth>,
}

impl Sample {
    pub fn from_observations(y: Vec<f64>, x: Mat) -> Result<Self, DgpError> {
        if y.len() != x.rows() {
            return Err(DgpError::InvalidParameter(format!(
                "{} responses but {} regressor rows",
                y.len(),
                x.rows()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(DgpError::InvalidParameter("responses must be finite".into()));
        }
        Ok(Self { y, x, truth: None })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// CSV with header `t,y,x1..xp[,u,v1..vp]`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let p = self.p();
        let mut out = String::from("t,y");
        for j in 1..=p {
            let _ = write!(out, ",x{j}");
        }
        if self.truth.is_some() {
            out.push_str(",u");
            for j in 1..=p {
                let _ = write!(out, ",v{j}");
            }
        }
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(out, "{},{}", i + 1, fmt_sig17(self.y[i]));
            for v in self.x.row(i) {
                let _ = write!(out, ",{}", fmt_sig17(*v));
            }
            if let Some(truth) = &self.truth {
                let _ = write!(out, ",{}", fmt_sig17(truth.u[i]));
                for v in truth.v.row(i) {
                    let _ = write!(out, ",{}", fmt_sig17(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the export schema or the plain `t,y,x1..xp` form.
    pub fn from_csv(text: &str) -> Result<Self, DgpError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(DgpError::Parse { line: 1, message: "empty input".into() })?;
        let names: Vec<&str> = header.split(',').map(str::trim).collect();
        let parse_err = |message: String| DgpError::Parse { line: 1, message };
        if names.len() < 3 || names[0] != "t" || names[1] != "y" {
            return Err(parse_err(format!("expected header starting with t,y,x1 but found `{header}`")));
        }
        let p = names[2..].iter().take_while(|n| n.starts_with('x')).count();
        if p == 0 {
            return Err(parse_err("no regressor columns x1..xp".into()));
        }
        for (j, n) in names[2..2 + p].iter().enumerate() {
            if *n != format!("x{}", j + 1) {
                return Err(parse_err(format!("column `{n}` should be x{}", j + 1)));
            }
        }
        let rest = &names[2 + p..];
        let has_truth = match rest.len() {
            0 => false,
            n if n == p + 1 && rest[0] == "u" => {
                for (j, n) in rest[1..].iter().enumerate() {
                    if *n != format!("v{}", j + 1) {
                        return Err(parse_err(format!("column `{n}` should be v{}", j + 1)));
                    }
                }
                true
            }
            _ => return Err(parse_err(format!("unexpected trailing columns {rest:?}"))),
        };

        let (mut y, mut x, mut u, mut v) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (idx, line) in lines {
            let line_no = idx + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != names.len() {
                return Err(DgpError::Parse {
                    line: line_no,
                    message: format!("expected {} fields, found {}", names.len(), fields.len()),
                });
            }
            let mut nums = Vec::with_capacity(fields.len() - 1);
            for f in &fields[1..] {
                let value: f64 = f.parse().map_err(|_| DgpError::Parse {
                    line: line_no,
                    message: format!("`{f}` is not a number"),
                })?;
                if !value.is_finite() {
                    return Err(DgpError::Parse { line: line_no, message: format!("non-finite value `{f}`") });
                }
                nums.push(value);
            }
            y.push(nums[0]);
            x.extend_from_slice(&nums[1..1 + p]);
            if has_truth {
                u.push(nums[1 + p]);
                v.extend_from_slice(&nums[2 + p..]);
            }
        }
        let t = y.len();
        let x = Mat::new(t, p, x).expect("row lengths checked");
        let truth = has_truth.then(|| Truth { u, v: Mat::new(t, p, v).expect("row lengths checked"), dgp: None });
        Ok(Self { y, x, truth })
    }
}

/// Formats with 17 significant digits.
pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Draws `t` periods of `(u, v)`.
pub fn simulate_innovations<S: NormalSource + ?Sized>(
    law: &InnovationLaw,
    t: usize,
    stream: &mut S,
) -> Result<(Vec<f64>, Mat), DgpError> {
    law.validate()?;
    let p = law.p();
    let weights: &[f64] = law.ma_weights.as_deref().unwrap_or(&[1.0]);
    let burn_in = weights.len() - 1;
    let n = t + burn_in;
    let rho = law.rho_uv;
    let idio = (1.0 - p as f64 * rho * rho).max(0.0).sqrt();

    let mut u = Vec::with_capacity(n);
    let mut e = Mat::zeros(n, p);
    for s in 0..n {
        let mut common = 0.0;
        for j in 0..p {
            let z = stream.standard_normal();
            e[(s, j)] = z;
            common += z;
        }
        let eta = stream.standard_normal();
        u.push(law.sigma_u * (rho * common + idio * eta));
    }

    let mut v = Mat::zeros(t, p);
    for s in 0..t {
        for j in 0..p {
            let mut acc = 0.0;
            for (lag, w) in weights.iter().enumerate() {
                acc += w * e[(s + burn_in - lag, j)];
            }
            v[(s, j)] = law.sigma_v[j] * acc;
        }
    }
    Ok((u.split_off(burn_in), v))
}

/// Runs the autoregressive recursion from `x_0 = 0`.
pub fn simulate_regressors(law: &RegressorLaw, t: usize, v: &Mat) -> Result<Mat, DgpError> {
    if v.rows() != t || v.cols() != law.p() {
        return Err(DgpError::InvalidParameter(format!(
            "innovations are {}x{}, expected {t}x{}",
            v.rows(),
            v.cols(),
            law.p()
        )));
    }
    let roots = law.roots(t)?;
    let p = law.p();
    let mut x = Mat::zeros(t, p);
    for j in 0..p {
        let mut prev = 0.0;
        for s in 0..t {
            let cur = roots[j] * prev + v[(s, j)];
            x[(s, j)] = cur;
            prev = cur;
        }
    }
    Ok(x)
}

/// Simulates one sample from `dgp`.
pub fn simulate_sample<S: NormalSource + ?Sized>(dgp: &BreakDgp, stream: &mut S) -> Result<Sample, DgpError> {
    dgp.validate()?;
    let t = dgp.t;
    let p = dgp.law.p();
    // Periods 1..=T+1: x uses v_1..v_T, row t of y uses u_{t+1}.
    let (u_all, v_all) = simulate_innovations(&dgp.law.innovations, t + 1, stream)?;
    let v = v_all.block(0, 0, t, p);
    let u = u_all[1..].to_vec();
    let x = simulate_regressors(&dgp.law, t, &v)?;
    let y = (0..t).map(|i| dgp.regime_mean(i, x.row(i)) + u[i]).collect();
    Ok(Sample { y, x, truth: Some(Truth { u, v, dgp: Some(dgp.clone()) }) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{replicate_stream, ZeroNoise};

    fn law(gamma: f64, c: f64) -> RegressorLaw {
        RegressorLaw { gamma, c: vec![c], innovations: InnovationLaw::standard(1) }
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let mut sab = 0.0;
        let mut saa = 0.0;
        let mut sbb = 0.0;
        for (x, y) in a.iter().zip(b) {
            sab += (x - ma) * (y - mb);
            saa += (x - ma).powi(2);
            sbb += (y - mb).powi(2);
        }
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn degenerate_variances_give_zero_draws() {
        let law = InnovationLaw { sigma_u: 0.0, sigma_v: vec![0.0], rho_uv: 0.3, ma_weights: None };
        let (u, v) = simulate_innovations(&law, 50, &mut replicate_stream(1, 0)).unwrap();
        assert!(u.iter().all(|x| *x == 0.0));
        assert!(v.as_slice().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn innovation_correlation_matches_rho() {
        for rho in [0.0, 0.9] {
            let law = InnovationLaw { sigma_u: 2.0, sigma_v: vec![0.5], rho_uv: rho, ma_weights: None };
            let (u, v) = simulate_innovations(&law, 100_000, &mut replicate_stream(11, 0)).unwrap();
            let r = corr(&u, &v.col_vec(0));
            assert!((r - rho).abs() < 0.02, "rho {rho}: sample corr {r}");
        }
    }

    #[test]
    fn ma_filter_applies_weights_after_burn_in() {
        let law = InnovationLaw {
            sigma_u: 1.0,
            sigma_v: vec![1.0],
            rho_uv: 0.0,
            ma_weights: Some(vec![1.0, 0.5]),
        };
        assert_eq!(law.long_run_variance(), vec![2.25]);
        let (_, v) = simulate_innovations(&law, 200_000, &mut replicate_stream(5, 0)).unwrap();
        let v = v.col_vec(0);
        let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        assert!((var - 1.25).abs() < 0.03, "variance {var}");
        let lag1 = v.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (v.len() - 1) as f64;
        assert!((lag1 - 0.5).abs() < 0.03, "lag-1 autocovariance {lag1}");
    }

    #[test]
    fn invalid_laws_are_rejected() {
        let mut l = InnovationLaw::standard(2);
        l.rho_uv = 0.9;
        assert!(matches!(l.validate(), Err(DgpError::InvalidCovariance(_))));
        l.rho_uv = 0.0;
        l.ma_weights = Some(vec![0.5, 1.0]);
        assert!(l.validate().is_err());
        l.ma_weights = Some(vec![1.0; 5]);
        assert!(l.validate().is_err());
        assert!(law(0.0, 1.0).validate().is_err());
        assert!(law(1.0, -1.0).validate().is_err());
    }

    #[test]
    fn regressor_recursion_examples() {
        let zeros = Mat::zeros(10, 1);
        assert_eq!(simulate_regressors(&law(1.0, 1.0), 10, &zeros).unwrap(), zeros);

        let ones = Mat::column(&[1.0; 4]);
        let x = simulate_regressors(&law(1.0, 4.0), 4, &ones).unwrap();
        assert_eq!(x.col_vec(0), vec![1.0, 1.0, 1.0, 1.0]);

        let impulse = Mat::column(&[1.0, 0.0, 0.0, 0.0]);
        let x = simulate_regressors(&law(0.5, 1.0), 4, &impulse).unwrap();
        assert_eq!(x.col_vec(0), vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn roots_outside_unit_interval_are_rejected() {
        assert!(law(1.0, 5.0).roots(4).is_err());
    }

    #[test]
    fn noiseless_samples() {
        let mut l = law(1.0, 1.0);
        l.innovations.sigma_u = 0.0;
        let dgp = BreakDgp::null(l.clone(), 50, vec![0.0]);
        let s = simulate_sample(&dgp, &mut replicate_stream(3, 0)).unwrap();
        assert!(s.y.iter().all(|y| *y == 0.0));

        let dgp = BreakDgp::null(l, 50, vec![1.0]);
        let s = simulate_sample(&dgp, &mut replicate_stream(3, 0)).unwrap();
        assert_eq!(s.y, s.x.col_vec(0));
    }

    #[test]
    fn first_regressor_row_equals_first_innovation() {
        let dgp = BreakDgp::null(law(1.0, 2.0), 30, vec![0.3]);
        let s = simulate_sample(&dgp, &mut replicate_stream(8, 2)).unwrap();
        let truth = s.truth.as_ref().unwrap();
        assert_eq!(s.x.row(0), truth.v.row(0));
    }

    #[test]
    fn same_seed_gives_identical_samples() {
        let dgp = BreakDgp::null(law(0.5, 1.0), 100, vec![0.5]);
        let a = simulate_sample(&dgp, &mut replicate_stream(42, 7)).unwrap();
        let b = simulate_sample(&dgp, &mut replicate_stream(42, 7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn regime_switch_happens_at_break_index() {
        let mut l = law(1.0, 1.0);
        l.innovations.sigma_u = 0.0;
        let dgp = BreakDgp {
            law: l,
            t: 40,
            alpha1: 1.0,
            alpha2: -1.0,
            beta1: vec![0.0],
            beta2: vec![0.0],
            pi0: 0.3,
            include_intercept: true,
        };
        let s = simulate_sample(&dgp, &mut ZeroNoise).unwrap();
        let k = dgp.break_index();
        assert_eq!(k, 12);
        assert!(s.y[..k].iter().all(|y| *y == 1.0));
        assert!(s.y[k..].iter().all(|y| *y == -1.0));
    }

    #[test]
    fn regime_identity_reconstructs_responses() {
        let mut l = law(0.7, 2.0);
        l.innovations.rho_uv = -0.5;
        let dgp = BreakDgp {
            law: l,
            t: 120,
            alpha1: 0.3,
            alpha2: -0.2,
            beta1: vec![0.1],
            beta2: vec![0.9],
            pi0: 0.4,
            include_intercept: true,
        };
        let s = simulate_sample(&dgp, &mut replicate_stream(1, 1)).unwrap();
        let u = &s.truth.as_ref().unwrap().u;
        for i in 0..s.len() {
            assert_eq!(s.y[i], dgp.regime_mean(i, s.x.row(i)) + u[i]);
        }
    }

    #[test]
    fn dgp_validation() {
        let mut dgp = BreakDgp::null(law(1.0, 1.0), 100, vec![0.0]);
        assert!(dgp.validate().is_ok());
        dgp.pi0 = 0.0;
        assert!(dgp.validate().is_err());
        dgp.pi0 = 0.5;
        dgp.t = 10;
        assert!(dgp.validate().is_err());
        dgp.t = 100;
        dgp.beta2 = vec![0.0, 1.0];
        assert!(dgp.validate().is_err());
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let dgp = BreakDgp::null(law(1.0, 1.0), 25, vec![0.5]);
        let s = simulate_sample(&dgp, &mut replicate_stream(2, 0)).unwrap();
        let text = s.to_csv();
        assert!(text.starts_with("t,y,x1,u,v1\n"));
        assert_eq!(text.lines().count(), 26);
        let back = Sample::from_csv(&text).unwrap();
        assert_eq!(back.y, s.y);
        assert_eq!(back.x, s.x);
        assert_eq!(back.truth.unwrap().u, s.truth.unwrap().u);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = Sample::from_csv("t,y,x1\n1,0.5,1\n2,abc,2\n").unwrap_err();
        assert_eq!(err, DgpError::Parse { line: 3, message: "`abc` is not a number".into() });
        assert!(matches!(Sample::from_csv("a,b\n"), Err(DgpError::Parse { line: 1, .. })));
        assert!(matches!(Sample::from_csv("t,y,x1\n1,2\n"), Err(DgpError::Parse { line: 2, .. })));
    }
}
