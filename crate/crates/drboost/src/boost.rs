//! The robust boosting loop: worst-case reweighting, subgradient projection
//! onto the tree class, line search, repeat.
//!
//! Each iteration: (a) form the subgradient representer g_i =
//! N w_i phi'(m_i) Y_i under the current worst-case weights, (b) fit a tree
//! to -g, (c) line-search the step size, (d) append the term, (e) re-solve
//! the worst case at the new margins. Margins are cached and updated
//! incrementally as terms are appended.

use crate::calibrate::{select_delta, CalibrationSpec};
use crate::dataset::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::learners::{fit_projection, TreeConfig};
use crate::loss::{loss_vector, LossVector, MarginLoss};
use crate::tree::Tree;
use crate::worstcase::{solve_worst_case, WorstCase};

/// How the KL radius is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaPolicy {
    /// A fixed radius for every iteration. Zero reduces the trainer to plain
    /// empirical-risk functional gradient boosting.
    Fixed(f64),
    /// chi-square calibration: delta = chi2_quantile(dim, confidence) / (2N).
    Calibrated { confidence: f64, dim: usize },
    /// Per-round radius from the AdaBoost corollary: with losses -exp(m_i)
    /// the inner solve lands on beta* = 0 and the AdaBoost weights
    /// exp(-m_i)/sum_k exp(-m_k). Requires the exponential loss.
    AdaboostCorollary,
}

/// Objective evaluated along the search direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchKind {
    /// Re-solve the inner worst case at every trial step. Guarantees the
    /// robust loss never increases.
    ExactRobust,
    /// Hold the current weights fixed: sum_i w_i phi(m_i + a y_i h_i).
    FixedWeights,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    pub kind: LineSearchKind,
    /// Absolute bracket-width stopping tolerance.
    pub tolerance: f64,
    /// Cap on bracket doublings away from the initial probe step.
    pub max_expansions: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        LineSearchConfig { kind: LineSearchKind::ExactRobust, tolerance: 1e-6, max_expansions: 60 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub delta: DeltaPolicy,
    pub loss: MarginLoss,
    pub tree: TreeConfig,
    pub max_iters: usize,
    pub line_search: LineSearchConfig,
    /// Relative improvement threshold below which training stops.
    pub stall_tolerance: f64,
    /// Recorded in the trace; the pipeline itself is deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            delta: DeltaPolicy::Fixed(0.0),
            loss: MarginLoss::Exponential,
            tree: TreeConfig::default(),
            max_iters: 100,
            line_search: LineSearchConfig::default(),
            stall_tolerance: 1e-9,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.tree.validate()?;
        if !(self.stall_tolerance > 0.0) {
            return Err(Error::InvalidConfig("stall_tolerance must be > 0".into()));
        }
        if !(self.line_search.tolerance > 0.0) {
            return Err(Error::InvalidConfig("line-search tolerance must be > 0".into()));
        }
        if let DeltaPolicy::Fixed(d) = self.delta {
            if !(d >= 0.0) {
                return Err(Error::InvalidConfig(format!("delta must be >= 0, got {d}")));
            }
        }
        if self.delta == DeltaPolicy::AdaboostCorollary && self.loss != MarginLoss::Exponential {
            return Err(Error::InvalidConfig(
                "the AdaBoost corollary radius requires the exponential loss".into(),
            ));
        }
        Ok(())
    }
}

/// One row of the training trace. Record 0 describes the zero ensemble; each
/// later record describes the state after appending that iteration's term.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub robust_loss: f64,
    pub empirical_loss: f64,
    pub achieved_kl: f64,
    /// Radius the reweighting used this iteration (per-round under the
    /// corollary policy).
    pub delta: f64,
    pub beta_star: Option<f64>,
    pub step_size: Option<f64>,
    pub learner: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// Radius resolved up front, when the policy is not per-round.
    pub resolved_delta: Option<f64>,
    pub seed: u64,
    pub records: Vec<TraceRecord>,
}

/// Subgradient representer of the robust loss at fixed weights:
/// g_i = N * weights_i * phi'(m_i) * Y_i, so that the directional derivative
/// along h is the empirical inner product <g, h>.
pub fn robust_gradient(
    margins: &[f64],
    labels: &[f64],
    loss: MarginLoss,
    weights: &[f64],
) -> Result<Vec<f64>> {
    let n = margins.len();
    if labels.len() != n {
        return Err(Error::LengthMismatch { left: labels.len(), right: n });
    }
    if weights.len() != n {
        return Err(Error::LengthMismatch { left: weights.len(), right: n });
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
    let nf = n as f64;
    let mut g = Vec::with_capacity(n);
    for i in 0..n {
        let slope = loss.phi_prime(margins[i]);
        if !slope.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        g.push(nf * weights[i] * slope * labels[i]);
    }
    Ok(g)
}

/// Golden-section minimization over step sizes >= 0. The bracket grows by
/// doubling from 1e-3 until the objective rises (non-finite values count as
/// a rise). Returns the best evaluated step; never one whose objective
/// exceeds the value at zero.
fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    tolerance: f64,
    max_expansions: usize,
    max_evals: usize,
) -> Result<f64> {
    let f0 = f(0.0);
    if !f0.is_finite() {
        return Err(Error::LineSearch("objective non-finite at the current point".into()));
    }
    let mut evals = 1usize;
    let mut best = (0.0f64, f0);
    let observe = |x: f64, fx: f64, best: &mut (f64, f64)| {
        if fx < best.1 {
            *best = (x, fx);
        }
    };

    // Bracket by doubling.
    let mut prev_x = 0.0;
    let mut prev_f = f0;
    let mut x = 1e-3;
    let mut lo = 0.0;
    let hi;
    loop {
        let fx = f(x);
        evals += 1;
        observe(x, fx, &mut best);
        if !fx.is_finite() || fx > prev_f {
            hi = x;
            break;
        }
        lo = prev_x;
        prev_x = x;
        prev_f = fx;
        if evals - 1 > max_expansions || evals >= max_evals {
            // Still descending at the cap: settle for the best probe.
            return Ok(best.0);
        }
        x *= 2.0;
    }

    // Interior refinement; non-finite trial values are treated as +inf.
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    evals += 2;
    observe(x1, f1, &mut best);
    observe(x2, f2, &mut best);
    while b - a > tolerance && evals < max_evals {
        let keep_left = match (f1.is_finite(), f2.is_finite()) {
            (true, true) => f1 < f2,
            (true, false) => true,
            (false, true) => false,
            (false, false) => true, // both overflowed; shrink toward zero
        };
        if keep_left {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
            observe(x1, f1, &mut best);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
            observe(x2, f2, &mut best);
        }
        evals += 1;
    }
    Ok(best.0)
}

/// The per-round corollary radius: log mean exp(-m) + mean m, the KL
/// divergence of the AdaBoost weights from uniform. beta* = 0 at this radius.
pub fn corollary_delta(margins: &[f64]) -> f64 {
    let n = margins.len() as f64;
    let mean_margin = margins.iter().sum::<f64>() / n;
    let log_mean_exp = (margins.iter().map(|&m| (-m).exp()).sum::<f64>() / n).ln();
    log_mean_exp + mean_margin
}

/// The corollary's loss vector -exp(m_i).
fn corollary_losses(margins: &[f64]) -> Result<LossVector> {
    LossVector::new(margins.iter().map(|&m| -m.exp()).collect())
}

enum Mode {
    /// Fixed or calibrated radius, losses from the configured margin loss.
    Radius(f64),
    /// Per-round corollary radius on the losses -exp(m).
    Corollary,
}

impl Mode {
    fn reweight(&self, margins: &[f64], losses: &LossVector) -> Result<(WorstCase, f64)> {
        match self {
            Mode::Radius(delta) => Ok((solve_worst_case(losses, *delta)?, *delta)),
            Mode::Corollary => {
                let delta = corollary_delta(margins);
                let wc = solve_worst_case(&corollary_losses(margins)?, delta)?;
                Ok((wc, delta))
            }
        }
    }
}

struct Objective<'a> {
    margins: &'a [f64],
    labels: &'a [f64],
    direction: &'a [f64],
    loss: MarginLoss,
}

impl Objective<'_> {
    /// Trial margins at step alpha; None when the exponential loss would
    /// overflow there.
    fn trial_losses(&self, alpha: f64) -> Option<LossVector> {
        let margins: Vec<f64> = self
            .margins
            .iter()
            .zip(self.labels)
            .zip(self.direction)
            .map(|((&m, &y), &h)| m + alpha * y * h)
            .collect();
        loss_vector(self.loss, &margins).ok()
    }

    fn exact_robust(&self, alpha: f64, delta: f64) -> f64 {
        match self.trial_losses(alpha) {
            Some(l) => solve_worst_case(&l, delta).map_or(f64::INFINITY, |wc| wc.objective),
            None => f64::INFINITY,
        }
    }

    fn fixed_weights(&self, alpha: f64, weights: &[f64]) -> f64 {
        match self.trial_losses(alpha) {
            Some(l) => weights.iter().zip(l.values()).map(|(w, v)| w * v).sum(),
            None => f64::INFINITY,
        }
    }

    /// Uniform-weight empirical loss — AdaBoost's exact objective.
    fn empirical(&self, alpha: f64) -> f64 {
        match self.trial_losses(alpha) {
            Some(l) => l.mean(),
            None => f64::INFINITY,
        }
    }
}

/// Step size approximately minimizing the configured objective along
/// `direction` from the ensemble's current position.
pub fn line_search(
    data: &Dataset,
    ensemble: &Ensemble,
    direction: &Tree,
    config: &TrainConfig,
) -> Result<f64> {
    config.validate()?;
    let margins = crate::ensemble::evaluate_margins(ensemble, data)?;
    let dir_values: Vec<f64> =
        (0..data.n()).map(|i| direction.predict_unchecked(data.row(i))).collect();
    if dir_values.iter().all(|&h| h == 0.0) {
        return Err(Error::LineSearch("direction vanishes on every data point".into()));
    }
    let losses = loss_vector(config.loss, &margins)?;
    let mode = resolve_mode(config, data.n())?;
    let (wc, delta) = mode.reweight(&margins, &losses)?;
    let objective =
        Objective { margins: &margins, labels: data.labels(), direction: &dir_values, loss: config.loss };
    search_step(&objective, &mode, delta, &wc.weights, &config.line_search)
}

fn search_step(
    objective: &Objective<'_>,
    mode: &Mode,
    delta: f64,
    weights: &[f64],
    ls: &LineSearchConfig,
) -> Result<f64> {
    match (mode, ls.kind) {
        // The corollary mode descends the empirical exponential loss. Along a
        // ±1 direction that objective is S+ e^{-a} + S- e^{a}, minimized
        // exactly at a = 0.5 ln(S+/S-); comparison-based search cannot reach
        // the precision the weight identity with AdaBoost requires.
        (Mode::Corollary, _) => {
            let mut s_agree = 0.0;
            let mut s_disagree = 0.0;
            let mut sign_valued = true;
            for ((&m, &y), &h) in
                objective.margins.iter().zip(objective.labels).zip(objective.direction)
            {
                match y * h {
                    v if v == 1.0 => s_agree += (-m).exp(),
                    v if v == -1.0 => s_disagree += (-m).exp(),
                    _ => {
                        sign_valued = false;
                        break;
                    }
                }
            }
            if sign_valued {
                if s_disagree <= 0.0 {
                    // Perfect direction; mirror the baseline's capped step.
                    return Ok(crate::adaboost::PERFECT_ROUND_ALPHA);
                }
                if s_agree <= 0.0 {
                    return Ok(0.0);
                }
                return Ok(0.5 * (s_agree / s_disagree).ln());
            }
            golden_section(|a| objective.empirical(a), ls.tolerance, ls.max_expansions, 100)
        }
        (Mode::Radius(_), LineSearchKind::ExactRobust) => golden_section(
            |a| objective.exact_robust(a, delta),
            ls.tolerance,
            ls.max_expansions,
            100,
        ),
        (Mode::Radius(_), LineSearchKind::FixedWeights) => golden_section(
            |a| objective.fixed_weights(a, weights),
            ls.tolerance,
            ls.max_expansions,
            100,
        ),
    }
}

fn resolve_mode(config: &TrainConfig, n: usize) -> Result<Mode> {
    match config.delta {
        DeltaPolicy::Fixed(d) => Ok(Mode::Radius(d)),
        DeltaPolicy::Calibrated { confidence, dim } => {
            let spec = CalibrationSpec::new(confidence, dim, n)?;
            Ok(Mode::Radius(select_delta(&spec)?))
        }
        DeltaPolicy::AdaboostCorollary => Ok(Mode::Corollary),
    }
}

/// Run the boosting loop. Returns the fitted ensemble and a per-iteration
/// trace; the trace always carries at least the initial record.
pub fn train(data: &Dataset, config: &TrainConfig) -> Result<(Ensemble, TrainTrace)> {
    config.validate()?;
    let n = data.n();
    let nf = n as f64;
    let mode = resolve_mode(config, n)?;
    let resolved_delta = match mode {
        Mode::Radius(d) => Some(d),
        Mode::Corollary => None,
    };

    let fail = |iteration: usize, source: Error| Error::Training {
        iteration,
        source: Box::new(source),
    };

    let mut ensemble = Ensemble::new();
    let mut margins = vec![0.0; n];
    let mut losses = loss_vector(config.loss, &margins).map_err(|e| fail(0, e))?;
    let (mut wc, mut delta_t) = mode.reweight(&margins, &losses).map_err(|e| fail(0, e))?;

    let mut records = vec![TraceRecord {
        iteration: 0,
        robust_loss: wc.objective,
        empirical_loss: losses.mean(),
        achieved_kl: wc.achieved_kl,
        delta: delta_t,
        beta_star: wc.beta_star,
        step_size: None,
        learner: None,
    }];
    // Stall detection tracks the quantity the line search descends.
    let mut monitor = match mode {
        Mode::Radius(_) => wc.objective,
        Mode::Corollary => losses.mean(),
    };

    for t in 1..=config.max_iters {
        let target = match mode {
            Mode::Radius(_) => {
                let g = robust_gradient(&margins, data.labels(), config.loss, &wc.weights)
                    .map_err(|e| fail(t, e))?;
                g.into_iter().map(|v| -v).collect::<Vec<f64>>()
            }
            // Under the corollary the fit target is the weighted labels,
            // AdaBoost's weak-learner problem.
            Mode::Corollary => {
                wc.weights.iter().zip(data.labels()).map(|(&w, &y)| nf * w * y).collect()
            }
        };

        let tree = fit_projection(data, &target, &config.tree).map_err(|e| fail(t, e))?;
        let dir_values: Vec<f64> =
            (0..n).map(|i| tree.predict_unchecked(data.row(i))).collect();

        let objective = Objective {
            margins: &margins,
            labels: data.labels(),
            direction: &dir_values,
            loss: config.loss,
        };
        let alpha = search_step(&objective, &mode, delta_t, &wc.weights, &config.line_search)
            .map_err(|e| fail(t, e))?;
        if alpha <= 0.0 {
            break; // no descent direction left
        }

        for i in 0..n {
            margins[i] += alpha * data.label(i) * dir_values[i];
        }
        losses = loss_vector(config.loss, &margins).map_err(|e| fail(t, e))?;
        let (wc_new, delta_new) = mode.reweight(&margins, &losses).map_err(|e| fail(t, e))?;
        wc = wc_new;
        delta_t = delta_new;
        ensemble.push(alpha, tree.clone());
        records.push(TraceRecord {
            iteration: t,
            robust_loss: wc.objective,
            empirical_loss: losses.mean(),
            achieved_kl: wc.achieved_kl,
            delta: delta_t,
            beta_star: wc.beta_star,
            step_size: Some(alpha),
            learner: Some(tree.summary()),
        });

        let new_monitor = match mode {
            Mode::Radius(_) => wc.objective,
            Mode::Corollary => losses.mean(),
        };
        let improvement = monitor - new_monitor;
        monitor = new_monitor;
        if improvement < config.stall_tolerance * (1.0 + monitor.abs()) {
            break;
        }
    }

    Ok((ensemble, TrainTrace { resolved_delta, seed: config.seed, records }))
}
