//! Uncertainty-radius selection: the (1-alpha) chi-square_T quantile divided
//! by 2N, justified by the empirical-likelihood limit 2N R_N -> chi^2_T, plus
//! the EPL dual solver itself for validation.

use crate::error::{Error, Result};
use crate::gamma::reg_lower_incomplete_gamma;
use nalgebra::{DMatrix, DVector};

/// Inputs to the radius recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSpec {
    /// Desired coverage 1 - alpha, strictly inside (0, 1).
    pub confidence: f64,
    /// Dimension of the spanned function space.
    pub t: usize,
    /// Sample count.
    pub n: usize,
}

impl CalibrationSpec {
    pub fn new(confidence: f64, t: usize, n: usize) -> Result<Self> {
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::BadQuantileLevel(confidence));
        }
        if t < 1 || n < 1 {
            return Err(Error::InvalidConfig("calibration needs T >= 1 and N >= 1".into()));
        }
        Ok(CalibrationSpec { confidence, t, n })
    }
}

/// Chi-square CDF with `t` degrees of freedom.
pub fn chi2_cdf(t: usize, x: f64) -> Result<f64> {
    if t < 1 {
        return Err(Error::InvalidConfig("chi-square needs T >= 1".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(reg_lower_incomplete_gamma(t as f64 / 2.0, x / 2.0))
}

/// p-quantile of the chi-square distribution with `t` degrees of freedom,
/// solved by bisection on the regularized incomplete gamma CDF to an absolute
/// 1e-10.
pub fn chi2_quantile(t: usize, p: f64) -> Result<f64> {
    if t < 1 {
        return Err(Error::InvalidConfig("chi-square needs T >= 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadQuantileLevel(p));
    }
    let a = t as f64 / 2.0;
    let cdf = |q: f64| reg_lower_incomplete_gamma(a, q / 2.0);

    let mut lo = 0.0;
    let mut hi = t as f64 + 40.0 * (t as f64).sqrt() + 100.0;
    // The standard bound covers any sane p; extend just in case.
    for _ in 0..10 {
        if cdf(hi) > p {
            break;
        }
        hi *= 2.0;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// delta = chi2_quantile(T, confidence) / (2N).
pub fn select_delta(spec: &CalibrationSpec) -> Result<f64> {
    Ok(chi2_quantile(spec.t, spec.confidence)? / (2.0 * spec.n as f64))
}

/// N×T gradient rows M_i, row i being the loss gradient at datapoint i.
#[derive(Debug, Clone)]
pub struct Moments {
    values: Vec<f64>, // row-major, n * t
    n: usize,
    t: usize,
}

impl Moments {
    pub fn new(values: Vec<f64>, n: usize, t: usize) -> Result<Self> {
        if n == 0 || t == 0 {
            return Err(Error::EmptyDataset);
        }
        if t > n {
            return Err(Error::InvalidConfig(format!("need T <= N, got T={t} N={n}")));
        }
        if values.len() != n * t {
            return Err(Error::LengthMismatch { left: values.len(), right: n * t });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Moments { values, n, t })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != t {
                return Err(Error::RaggedRow { row: i, expected: t, got: r.len() });
            }
        }
        Moments::new(rows.iter().flatten().copied().collect(), n, t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.t..(i + 1) * self.t]
    }
}

/// Full EPL solution, for tests and diagnostics.
#[derive(Debug, Clone)]
pub struct EplSolution {
    pub r_n: f64,
    pub lambda: Vec<f64>,
    pub weights: Vec<f64>,
}

const EPL_MAX_ITERS: usize = 100;
const EPL_DENOM_FLOOR: f64 = 1e-12;

/// Smallest KL discrepancy R_N between the uniform weights and a reweighting
/// satisfying the estimating equation sum_i w_i M_i = 0.
///
/// Solved through the dual: damped Newton on f(lambda) =
/// -(1/N) sum ln(1 + lambda' M_i), whose stationary point satisfies
/// (1/N) sum M_i / (1 + lambda' M_i) = 0; then R_N = -f(lambda*).
pub fn epl_value(moments: &Moments) -> Result<f64> {
    Ok(epl_solve(moments)?.r_n)
}

pub fn epl_solve(moments: &Moments) -> Result<EplSolution> {
    let (n, t) = (moments.n, moments.t);
    let nf = n as f64;

    // Exact interiority check in one dimension: zero must sit strictly
    // between the extremes.
    if t == 1 {
        let lo = (0..n).map(|i| moments.row(i)[0]).fold(f64::INFINITY, f64::min);
        let hi = (0..n).map(|i| moments.row(i)[0]).fold(f64::NEG_INFINITY, f64::max);
        if !(lo < 0.0 && hi > 0.0) && !(lo == 0.0 && hi == 0.0) {
            return Err(Error::EplInfeasible);
        }
    }

    let scale = moments.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let grad_tol = 1e-11 * scale;

    let mut lambda = DVector::<f64>::zeros(t);
    let mut denoms = vec![1.0; n];
    let mut f_val = 0.0_f64;

    let objective = |lambda: &DVector<f64>, denoms: &mut [f64]| -> Option<f64> {
        let mut acc = 0.0;
        for i in 0..n {
            let mut w = 1.0;
            for (j, &m) in moments.row(i).iter().enumerate() {
                w += lambda[j] * m;
            }
            if w <= EPL_DENOM_FLOOR {
                return None;
            }
            denoms[i] = w;
            acc -= w.ln();
        }
        Some(acc / nf)
    };

    for _ in 0..EPL_MAX_ITERS {
        // Residual of the estimating equation and the dual Hessian.
        let mut grad = DVector::<f64>::zeros(t);
        let mut hess = DMatrix::<f64>::zeros(t, t);
        for i in 0..n {
            let row = moments.row(i);
            let d = denoms[i];
            for j in 0..t {
                grad[j] += row[j] / d;
                for k in 0..t {
                    hess[(j, k)] += row[j] * row[k] / (d * d);
                }
            }
        }
        grad /= nf;
        hess /= nf;

        if grad.amax() <= grad_tol {
            let weights: Vec<f64> = denoms.iter().map(|&d| 1.0 / (nf * d)).collect();
            let r_n = (-f_val).max(0.0);
            return Ok(EplSolution { r_n, lambda: lambda.iter().copied().collect(), weights });
        }

        let step = match hess.clone().lu().solve(&grad) {
            Some(s) => s,
            None => return Err(Error::EplInfeasible),
        };
        if step.amax() <= 1e-14 * (1.0 + lambda.amax()) {
            // Newton has stagnated at float resolution; the residual check
            // above decides, so a still-large gradient means no root.
            return Err(Error::EplInfeasible);
        }

        // Step halving: denominators must stay strictly positive and the
        // convex objective must not increase beyond summation noise.
        let mut eta = 1.0;
        let mut advanced = false;
        while eta >= 1e-16 {
            let cand = &lambda + eta * &step;
            let mut cand_denoms = vec![0.0; n];
            if let Some(f_new) = objective(&cand, &mut cand_denoms) {
                if f_new <= f_val + 1e-12 * (1.0 + f_val.abs()) {
                    lambda = cand;
                    denoms = cand_denoms;
                    f_val = f_new;
                    advanced = true;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !advanced {
            return Err(Error::EplInfeasible);
        }
    }
    Err(Error::EplInfeasible)
}
