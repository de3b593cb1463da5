//! Shared oracles for the integration suites: simplex grid search for the
//! worst case, a reference empirical-risk booster, synthetic data, and
//! distribution-test helpers. Everything here is independent of the solver
//! paths it checks.

#![allow(dead_code)]

use drboost::Dataset;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// KL divergence from uniform, written out directly.
fn kl(weights: &[f64]) -> f64 {
    let n = weights.len() as f64;
    -weights.iter().map(|&w| (n * w).ln()).sum::<f64>() / n
}

fn objective(weights: &[f64], losses: &[f64]) -> f64 {
    weights.iter().zip(losses).map(|(w, l)| w * l).sum()
}

/// Best feasible point found by a grid over the simplex, then local
/// refinement of the grid around the incumbent. Returns (objective, weights).
pub fn grid_worst_case(
    losses: &[f64],
    delta: f64,
    coarse_steps: usize,
    refinements: usize,
) -> (f64, Vec<f64>) {
    grid_worst_case_boxed(losses, delta, coarse_steps, refinements, 10)
}

/// As `grid_worst_case`, with an explicit refinement-box half-width in units
/// of the refined step. The objective can be nearly flat along the KL
/// boundary; a wide box is what lets the refinement actually reach the
/// argmax rather than a nearby lattice stall point.
pub fn grid_worst_case_boxed(
    losses: &[f64],
    delta: f64,
    coarse_steps: usize,
    refinements: usize,
    box_factor: usize,
) -> (f64, Vec<f64>) {
    let n = losses.len();
    assert!((2..=4).contains(&n), "grid oracle covers N in 2..=4");

    let mut best_obj = f64::NEG_INFINITY;
    let mut best_w = vec![1.0 / n as f64; n];

    let mut consider = |w: &[f64], best_obj: &mut f64, best_w: &mut Vec<f64>| {
        if w.iter().any(|&x| x <= 0.0) {
            return;
        }
        if kl(w) > delta {
            return;
        }
        let obj = objective(w, losses);
        if obj > *best_obj {
            *best_obj = obj;
            *best_w = w.to_vec();
        }
    };

    // Full coarse sweep.
    let h = 1.0 / coarse_steps as f64;
    sweep(n, &mut |free: &[f64]| {
        let tail = 1.0 - free.iter().sum::<f64>();
        if tail <= 0.0 {
            return;
        }
        let mut w = free.to_vec();
        w.push(tail);
        consider(&w, &mut best_obj, &mut best_w);
    }, coarse_steps, h);

    // Shrinking local boxes around the incumbent. Each level re-centers and
    // walks until the incumbent stops moving before the step shrinks.
    let mut step = h;
    for _ in 0..refinements {
        let fine = step / 10.0;
        for _ in 0..30 {
            let center = best_w.clone();
            local_sweep(n, &center, box_factor as f64 * fine, fine, &mut |w: &[f64]| {
                consider(w, &mut best_obj, &mut best_w);
            });
            let moved = center
                .iter()
                .zip(&best_w)
                .any(|(a, b)| (a - b).abs() > 0.25 * fine);
            if !moved {
                break;
            }
        }
        step = fine;
    }
    (best_obj, best_w)
}

/// Visit every grid point of the first n-1 simplex coordinates.
fn sweep(n: usize, visit: &mut impl FnMut(&[f64]), steps: usize, h: f64) {
    match n {
        2 => {
            for i in 1..steps {
                visit(&[i as f64 * h]);
            }
        }
        3 => {
            for i in 1..steps {
                for j in 1..steps - i {
                    visit(&[i as f64 * h, j as f64 * h]);
                }
            }
        }
        4 => {
            for i in 1..steps {
                for j in 1..steps - i {
                    for k in 1..steps - i - j {
                        visit(&[i as f64 * h, j as f64 * h, k as f64 * h]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Visit a box of side 2*radius around `center` (first n-1 coordinates) with
/// spacing `fine`; the last coordinate closes the simplex.
fn local_sweep(
    n: usize,
    center: &[f64],
    radius: f64,
    fine: f64,
    visit: &mut impl FnMut(&[f64]),
) {
    let span = (2.0 * radius / fine).round() as i64;
    let coord = |c: f64, t: i64| c - radius + t as f64 * fine;
    match n {
        2 => {
            for i in 0..=span {
                let w0 = coord(center[0], i);
                if w0 > 0.0 && w0 < 1.0 {
                    visit(&[w0, 1.0 - w0]);
                }
            }
        }
        3 => {
            for i in 0..=span {
                for j in 0..=span {
                    let (w0, w1) = (coord(center[0], i), coord(center[1], j));
                    let w2 = 1.0 - w0 - w1;
                    if w0 > 0.0 && w1 > 0.0 && w2 > 0.0 {
                        visit(&[w0, w1, w2]);
                    }
                }
            }
        }
        4 => {
            for i in 0..=span {
                for j in 0..=span {
                    for k in 0..=span {
                        let (w0, w1, w2) =
                            (coord(center[0], i), coord(center[1], j), coord(center[2], k));
                        let w3 = 1.0 - w0 - w1 - w2;
                        if w0 > 0.0 && w1 > 0.0 && w2 > 0.0 && w3 > 0.0 {
                            visit(&[w0, w1, w2, w3]);
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Random classification data: uniform features, linear scores with label
/// noise.
pub fn synthetic_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, flip: f64) -> Dataset {
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let coeffs: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let score: f64 = x.iter().zip(&coeffs).map(|(a, b)| a * b).sum::<f64>() + 0.1;
        let mut y = if score >= 0.0 { 1.0 } else { -1.0 };
        if rng.gen_range(0.0..1.0) < flip {
            y = -y;
        }
        rows.push(x);
        labels.push(y);
    }
    Dataset::from_rows(&rows, &labels).unwrap()
}

/// Kolmogorov-Smirnov statistic between a sample and a reference CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Order-statistic p-quantile of a sample.
pub fn empirical_quantile(samples: &mut [f64], p: f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((samples.len() as f64) * p) as usize;
    samples[idx.min(samples.len() - 1)]
}

/// Plain empirical-risk functional gradient boosting (no reweighting): fit a
/// tree to -phi'(m_i) Y_i, take the step minimizing the mean loss, repeat.
/// The line search is an independent bracketing + ternary search.
pub fn reference_gradient_boost(
    data: &Dataset,
    loss: drboost::MarginLoss,
    tree: &drboost::TreeConfig,
    iters: usize,
) -> drboost::Ensemble {
    let n = data.n();
    let mut margins = vec![0.0; n];
    let mut ensemble = drboost::Ensemble::new();
    for _ in 0..iters {
        let target: Vec<f64> = (0..n)
            .map(|i| -loss.phi_prime(margins[i]) * data.label(i))
            .collect();
        let learner = drboost::fit_projection(data, &target, tree).unwrap();
        let dir: Vec<f64> = (0..n).map(|i| learner.predict(data.row(i)).unwrap()).collect();

        let mean_loss = |a: f64| -> f64 {
            (0..n)
                .map(|i| loss.phi(margins[i] + a * data.label(i) * dir[i]))
                .sum::<f64>()
                / n as f64
        };
        // Bracket by doubling, then ternary search.
        let mut hi = 1e-3;
        let f0 = mean_loss(0.0);
        let mut grew = 0;
        while mean_loss(hi * 2.0) < mean_loss(hi).min(f0) && grew < 60 {
            hi *= 2.0;
            grew += 1;
        }
        hi *= 2.0;
        let (mut a, mut b) = (0.0f64, hi);
        for _ in 0..200 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if mean_loss(m1) <= mean_loss(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let alpha = 0.5 * (a + b);
        if alpha <= 0.0 || mean_loss(alpha) >= f0 {
            break;
        }
        for i in 0..n {
            margins[i] += alpha * data.label(i) * dir[i];
        }
        ensemble.push(alpha, learner);
    }
    ensemble
}

/// Write a dataset out as a generic-schema CSV (label column first).
pub fn to_generic_csv(data: &Dataset) -> String {
    let mut out = String::from("label");
    for j in 0..data.d() {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for i in 0..data.n() {
        out.push_str(if data.label(i) > 0.0 { "1" } else { "-1" });
        for v in data.row(i) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}
