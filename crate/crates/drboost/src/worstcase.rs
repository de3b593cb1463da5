//! Worst-case reweighting over a KL ball: maximize sum_i w_i L_i over
//! weight vectors w with D(w || uniform) <= delta, where
//! D(w || uniform) = -(1/N) sum_i ln(N w_i).
//!
//! The maximizer has the closed form w_i proportional to 1/(L_i + beta) with
//! beta the unique root of Psi(beta) = 0 on (-inf, -max_i L_i). Psi equals
//! delta - D(w(beta) || uniform) identically, so the KL constraint is tight at
//! the root. Psi is strictly decreasing on the domain: its derivative is
//! mean(r) - mean(r^2)/mean(r) <= 0 by Cauchy-Schwarz, with r_i = 1/(-beta - L_i).

use crate::error::{Error, Result};
use crate::loss::LossVector;

/// Loss vectors whose spread falls below this are treated as constant; the
/// dual problem is ill-conditioned against the pole there.
const CONSTANT_SPREAD: f64 = 1e-12;
/// |Psi| convergence target for the safeguarded Newton iteration.
const PSI_TOL: f64 = 1e-12;
/// Bracket-width convergence target, relative to 1 + |beta|.
const WIDTH_TOL: f64 = 1e-14;
const MAX_ITERS: usize = 200;
const MAX_BRACKET_STEPS: usize = 200;

/// The KL uncertainty ball around the uniform weights on N points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlBall {
    pub delta: f64,
    pub n: usize,
}

impl KlBall {
    pub fn new(delta: f64, n: usize) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::InvalidConfig(format!("KL radius must be >= 0, got {delta}")));
        }
        if n == 0 {
            return Err(Error::InvalidConfig("KL ball needs support size >= 1".into()));
        }
        Ok(KlBall { delta, n })
    }
}

/// Solution of the inner maximization.
#[derive(Debug, Clone)]
pub struct WorstCase {
    /// Maximizing weights; nonnegative, summing to 1.
    pub weights: Vec<f64>,
    /// Dual root, or `None` in the uniform/degenerate case.
    pub beta_star: Option<f64>,
    /// KL divergence actually attained by `weights`.
    pub achieved_kl: f64,
    /// sum_i weights[i] * losses[i].
    pub objective: f64,
}

/// D(w || uniform) = -(1/N) sum ln(N w_i). Infinite if any weight is zero.
pub fn kl_divergence(weights: &[f64]) -> Result<f64> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut sum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w < 0.0 {
            return Err(Error::NegativeWeight { index: i, value: w });
        }
        sum += w;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::WeightSum { sum, tolerance: 1e-9 });
    }
    if weights.iter().any(|&w| w == 0.0) {
        return Ok(f64::INFINITY);
    }
    let nf = n as f64;
    Ok(-weights.iter().map(|&w| (nf * w).ln()).sum::<f64>() / nf)
}

fn max_loss(losses: &[f64]) -> f64 {
    losses.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_loss(losses: &[f64]) -> f64 {
    losses.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Psi(beta) = (1/N) sum ln(-1/(L_i+beta)) - ln((1/N) sum -1/(L_i+beta)) + delta,
/// defined for beta < -max_i L_i.
pub fn psi(beta: f64, losses: &LossVector, delta: f64) -> Result<f64> {
    let bound = -max_loss(losses.values());
    if !(beta < bound) {
        return Err(Error::BetaOutOfDomain { beta, bound });
    }
    let n = losses.len() as f64;
    let mut log_sum = 0.0;
    let mut recip_sum = 0.0;
    for &l in losses.values() {
        let r = -1.0 / (l + beta); // > 0 on the domain
        log_sum += r.ln();
        recip_sum += r;
    }
    Ok(log_sum / n - (recip_sum / n).ln() + delta)
}

/// d Psi / d beta. Nonpositive on the domain.
fn psi_prime(beta: f64, losses: &[f64]) -> f64 {
    let n = losses.len() as f64;
    let mut r_sum = 0.0;
    let mut r2_sum = 0.0;
    for &l in losses {
        let r = -1.0 / (l + beta);
        r_sum += r;
        r2_sum += r * r;
    }
    r_sum / n - (r2_sum / n) / (r_sum / n)
}

/// Weights w_i = (L_i + beta)^-1 / sum_k (L_k + beta)^-1 for beta in the domain.
fn weights_at(beta: f64, losses: &[f64]) -> Vec<f64> {
    let recips: Vec<f64> = losses.iter().map(|&l| -1.0 / (l + beta)).collect();
    let total: f64 = recips.iter().sum();
    recips.into_iter().map(|r| r / total).collect()
}

fn uniform_case(losses: &LossVector) -> WorstCase {
    let n = losses.len();
    WorstCase {
        weights: vec![1.0 / n as f64; n],
        beta_star: None,
        achieved_kl: 0.0,
        objective: losses.mean(),
    }
}

/// Solve the inner maximization for a given loss vector and radius.
///
/// Constant losses or delta = 0 short-circuit to uniform weights. Otherwise
/// the dual root is found by Newton-Raphson safeguarded with bisection inside
/// a sign-change bracket, and the KL constraint comes out tight.
pub fn solve_worst_case(losses: &LossVector, delta: f64) -> Result<WorstCase> {
    if losses.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidConfig(format!("delta must be >= 0, got {delta}")));
    }
    let vals = losses.values();
    let hi_l = max_loss(vals);
    let spread = hi_l - min_loss(vals);
    if delta == 0.0 || spread < CONSTANT_SPREAD {
        return Ok(uniform_case(losses));
    }

    let bound = -hi_l; // open upper end of the beta domain
    let scale = spread.max(1.0);

    // Right end: approach the pole until Psi < 0 (KL exceeds delta there).
    let mut dist = 1e-9 * scale;
    let mut hi = bound - dist;
    let mut psi_hi = psi(hi, losses, delta)?;
    let mut steps = 0;
    while psi_hi >= 0.0 {
        steps += 1;
        dist *= 0.5;
        if steps > MAX_BRACKET_STEPS || dist < f64::MIN_POSITIVE * scale {
            return Err(Error::BracketFailure { attempts: steps, spread });
        }
        hi = bound - dist;
        psi_hi = psi(hi, losses, delta)?;
    }

    // Left end: retreat geometrically until Psi > 0 (weights near uniform).
    let mut offset = scale;
    let mut lo = bound - offset;
    let mut psi_lo = psi(lo, losses, delta)?;
    steps = 0;
    while psi_lo <= 0.0 {
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Err(Error::BracketFailure { attempts: steps, spread });
        }
        offset *= 2.0;
        lo = bound - offset;
        psi_lo = psi(lo, losses, delta)?;
    }

    // Safeguarded Newton: keep Psi(lo) > 0 > Psi(hi) at all times.
    let mut beta = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, beta);
    let mut converged = false;
    for _ in 0..MAX_ITERS {
        let f = psi(beta, losses, delta)?;
        if f.abs() < best.0 {
            best = (f.abs(), beta);
        }
        if f.abs() < PSI_TOL {
            converged = true;
            break;
        }
        if f > 0.0 {
            lo = beta;
        } else {
            hi = beta;
        }
        if hi - lo < WIDTH_TOL * (1.0 + beta.abs()) {
            converged = true;
            break;
        }
        let fp = psi_prime(beta, vals);
        let newton = beta - f / fp;
        beta = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    if !converged {
        return Err(Error::NoConvergence { max_iters: MAX_ITERS });
    }

    // Polish: a couple of plain Newton steps, kept only while |Psi| improves.
    // Downstream equivalence checks need the root at float precision.
    let mut beta = best.1;
    for _ in 0..3 {
        let f = psi(beta, losses, delta)?;
        let fp = psi_prime(beta, vals);
        let next = beta - f / fp;
        if !(next < bound) || !next.is_finite() {
            break;
        }
        let f_next = psi(next, losses, delta)?;
        if f_next.abs() >= f.abs() {
            break;
        }
        beta = next;
    }

    let weights = weights_at(beta, vals);
    let achieved_kl = kl_divergence(&weights)?;
    let objective = weights.iter().zip(vals).map(|(w, l)| w * l).sum();
    Ok(WorstCase { weights, beta_star: Some(beta), achieved_kl, objective })
}
