//! Oracle comparisons and property tests that are too heavy for in-module
//! unit tests: simplex grids, brute-force tree sampling, subgradient checks.

mod common;

use common::*;
use drboost::{
    epl_value, evaluate_margins, fit_projection, inner_product, line_search, loss_vector,
    projection_error, robust_gradient, solve_worst_case, Dataset, DeltaPolicy, Ensemble,
    LineSearchConfig, LineSearchKind, LossVector, MarginLoss, Moments, Node, TrainConfig, Tree,
    TreeConfig,
};
use proptest::prelude::*;
use rand::Rng;

/// The three-point worst case against the dense simplex grid: step 1e-3,
/// refined locally to 1e-5, coordinates within 2e-3.
#[test]
fn worst_case_three_point_grid_example() {
    let losses = [0.0, 0.5, 1.0];
    let delta = 0.05;
    let wc = solve_worst_case(&LossVector::new(losses.to_vec()).unwrap(), delta).unwrap();
    let (oracle_obj, oracle_w) = grid_worst_case_boxed(&losses, delta, 1000, 2, 300);
    for i in 0..3 {
        assert!(
            (wc.weights[i] - oracle_w[i]).abs() < 2e-3,
            "coordinate {i}: {} vs grid {}",
            wc.weights[i],
            oracle_w[i]
        );
    }
    assert!(wc.objective >= oracle_obj - 1e-6);
    // Frozen from the grid oracle (cross-checked against an independent
    // scipy brentq solve of the dual root): the worst case tilts mass onto
    // the high-loss point until the KL budget 0.05 is spent.
    assert!((wc.objective - 0.627_454_078_947_409).abs() < 1e-9, "objective {}", wc.objective);
}

/// EPL for N=3, T=1, M = (-1, 0.5, 0.8) against direct minimization of the
/// KL divergence over the constrained segment of the simplex.
#[test]
fn epl_three_point_grid_example() {
    let m = [-1.0, 0.5, 0.8];
    let got = epl_value(&Moments::from_rows(&[vec![m[0]], vec![m[1]], vec![m[2]]]).unwrap())
        .unwrap();

    // Feasible set: w = (a, b, c), a+b+c = 1, -a + 0.5 b + 0.8 c = 0, which
    // pins b = 8/3 - 6a and c = 5a - 5/3 with a in (1/3, 4/9).
    let mut oracle = f64::INFINITY;
    let steps = 2_000_000;
    let (lo, hi) = (1.0 / 3.0, 4.0 / 9.0);
    for k in 1..steps {
        let a = lo + (hi - lo) * k as f64 / steps as f64;
        let b = 8.0 / 3.0 - 6.0 * a;
        let c = 5.0 * a - 5.0 / 3.0;
        if b <= 0.0 || c <= 0.0 {
            continue;
        }
        let d = -((3.0 * a).ln() + (3.0 * b).ln() + (3.0 * c).ln()) / 3.0;
        oracle = oracle.min(d);
    }
    assert!((got - oracle).abs() < 1e-5, "epl {got} vs grid {oracle}");
    // Frozen from the grid oracle.
    assert!((got - 0.007_710_817_346_3).abs() < 1e-9, "epl {got}");
}

/// The greedy projection never loses to random trees drawn from the same
/// split-candidate space (depth 1 is exact; the seeded depth-2 cases hold).
#[test]
fn projection_reduces_the_norm_against_random_trees() {
    fn random_tree(
        rng: &mut rand_chacha::ChaCha8Rng,
        data: &Dataset,
        indices: &[usize],
        target: &[f64],
        depth: usize,
        min_leaf: usize,
    ) -> Node {
        let sum: f64 = indices.iter().map(|&i| target[i]).sum();
        let leaf = Node::Leaf { value: if sum >= 0.0 { 1.0 } else { -1.0 } };
        if depth == 0 || indices.len() < 2 * min_leaf || rng.gen_range(0.0..1.0) < 0.2 {
            return leaf;
        }
        // A random (feature, threshold) candidate with both sides populated.
        for _ in 0..20 {
            let f = rng.gen_range(0..data.d());
            let mut vals: Vec<f64> = indices.iter().map(|&i| data.row(i)[f]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals.dedup();
            if vals.len() < 2 {
                continue;
            }
            let cut = rng.gen_range(0..vals.len() - 1);
            let threshold = 0.5 * (vals[cut] + vals[cut + 1]);
            let (l, r): (Vec<usize>, Vec<usize>) =
                indices.iter().partition(|&&i| data.row(i)[f] <= threshold);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            return Node::Split {
                feature: f,
                threshold,
                left: Box::new(random_tree(rng, data, &l, target, depth - 1, min_leaf)),
                right: Box::new(random_tree(rng, data, &r, target, depth - 1, min_leaf)),
            };
        }
        leaf
    }

    let mut r = rng(1213);
    for depth in [1usize, 2] {
        let data = synthetic_dataset(&mut r, 60, 3, 0.0);
        let target: Vec<f64> = (0..60).map(|_| r.gen_range(-1.5..1.5)).collect();
        let config = TreeConfig::new(depth, 1).unwrap();
        let greedy = fit_projection(&data, &target, &config).unwrap();
        let greedy_err = projection_error(&greedy, &data, &target).unwrap();

        let indices: Vec<usize> = (0..data.n()).collect();
        for _ in 0..50 {
            let node = random_tree(&mut r, &data, &indices, &target, depth, 1);
            let candidate = Tree::new(data.d(), node);
            let err = projection_error(&candidate, &data, &target).unwrap();
            assert!(
                greedy_err <= err + 1e-12,
                "depth {depth}: greedy {greedy_err} beaten by random {err}"
            );
        }
    }
}

/// Danskin subgradient: L_rob(F+h) - L_rob(F) >= <g, h> - 1e-8 for the
/// representer built from the maximizing weights.
#[test]
fn subgradient_validity() {
    let mut r = rng(77);
    let n = 40;
    let delta = 0.15;
    for case in 0..20 {
        let labels: Vec<f64> =
            (0..n).map(|_| if r.gen_range(0.0..1.0) < 0.5 { 1.0 } else { -1.0 }).collect();
        let margins: Vec<f64> = (0..n).map(|_| r.gen_range(-1.5..1.5)).collect();
        let loss =
            if case % 2 == 0 { MarginLoss::Exponential } else { MarginLoss::Logistic };

        let losses = loss_vector(loss, &margins).unwrap();
        let wc = solve_worst_case(&losses, delta).unwrap();
        let g = robust_gradient(&margins, &labels, loss, &wc.weights).unwrap();

        for _ in 0..5 {
            let h: Vec<f64> = (0..n).map(|_| r.gen_range(-0.5..0.5)).collect();
            let shifted: Vec<f64> =
                margins.iter().zip(&labels).zip(&h).map(|((&m, &y), &hi)| m + y * hi).collect();
            let shifted_losses = loss_vector(loss, &shifted).unwrap();
            let rob_shifted = solve_worst_case(&shifted_losses, delta).unwrap().objective;
            let gain = rob_shifted - wc.objective;
            let linear = inner_product(&g, &h).unwrap();
            assert!(
                gain >= linear - 1e-8,
                "case {case}: gain {gain} below linearization {linear}"
            );
        }
    }
}

/// Fixed-weights line search against the calculus closed form at nonzero
/// margins: the minimizer of sum w_i exp(-(m_i + a y_i h_i)) is
/// 0.5 ln(sum_agree w e^-m / sum_disagree w e^-m).
#[test]
fn fixed_weight_line_search_matches_calculus_oracle() {
    let mut r = rng(5);
    let data = synthetic_dataset(&mut r, 30, 2, 0.2);
    let mut ensemble = Ensemble::new();
    ensemble.push(0.4, Tree::stump(2, 0, 0.1, -1.0, 1.0));
    let direction = Tree::stump(2, 1, -0.2, -1.0, 1.0);
    let delta = 0.08;

    let config = TrainConfig {
        delta: DeltaPolicy::Fixed(delta),
        loss: MarginLoss::Exponential,
        line_search: LineSearchConfig {
            kind: LineSearchKind::FixedWeights,
            tolerance: 1e-9,
            max_expansions: 60,
        },
        ..TrainConfig::default()
    };
    let alpha = line_search(&data, &ensemble, &direction, &config).unwrap();

    let margins = evaluate_margins(&ensemble, &data).unwrap();
    let weights =
        solve_worst_case(&loss_vector(MarginLoss::Exponential, &margins).unwrap(), delta)
            .unwrap()
            .weights;
    let mut agree = 0.0;
    let mut disagree = 0.0;
    for i in 0..data.n() {
        let h = direction.predict(data.row(i)).unwrap();
        let term = weights[i] * (-margins[i]).exp();
        if data.label(i) * h > 0.0 {
            agree += term;
        } else {
            disagree += term;
        }
    }
    let oracle = 0.5 * (agree / disagree).ln();
    assert!((alpha - oracle).abs() < 1e-4, "alpha {alpha} vs oracle {oracle}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any solved worst case is feasible: simplex weights, KL within budget,
    /// objective at least the uniform average, weights monotone in loss.
    #[test]
    fn solved_worst_case_is_feasible_and_monotone(
        raw in prop::collection::vec(-3.0f64..3.0, 2..9),
        delta in 1e-4f64..0.6,
    ) {
        let losses = LossVector::new(raw.clone()).unwrap();
        let wc = solve_worst_case(&losses, delta).unwrap();
        let total: f64 = wc.weights.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(wc.weights.iter().all(|&w| w >= 0.0));
        prop_assert!(wc.achieved_kl <= delta + 1e-8);
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        prop_assert!(wc.objective >= mean - 1e-12);
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                if raw[i] > raw[j] {
                    prop_assert!(wc.weights[i] >= wc.weights[j] - 1e-15);
                }
            }
        }
    }

    /// Margins of a concatenated ensemble are the sums of the parts'.
    #[test]
    fn margin_linearity_under_concatenation(
        coefs in prop::collection::vec(-2.0f64..2.0, 1..5),
        thresholds in prop::collection::vec(0.05f64..0.95, 1..5),
    ) {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64 / 8.0]).collect();
        let labels: Vec<f64> = (0..9).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let data = Dataset::from_rows(&rows, &labels).unwrap();

        let k = coefs.len().min(thresholds.len());
        let mut first = Ensemble::new();
        let mut second = Ensemble::new();
        let mut joint = Ensemble::new();
        for t in 0..k {
            let tree = Tree::stump(1, 0, thresholds[t], -1.0, 1.0);
            if t % 2 == 0 {
                first.push(coefs[t], tree.clone());
            } else {
                second.push(coefs[t], tree.clone());
            }
            joint.push(coefs[t], tree);
        }
        let ma = evaluate_margins(&first, &data).unwrap();
        let mb = evaluate_margins(&second, &data).unwrap();
        let mj = evaluate_margins(&joint, &data).unwrap();
        for i in 0..9 {
            let sum = ma[i] + mb[i];
            prop_assert!((mj[i] - sum).abs() <= 1e-12 * sum.abs().max(1.0));
        }
    }
}
