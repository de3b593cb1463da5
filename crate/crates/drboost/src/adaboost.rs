//! Discrete AdaBoost (Freund–Schapire): the baseline the robust trainer is
//! compared against, and the oracle for the corollary equivalence.

use crate::dataset::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::learners::{fit_projection, TreeConfig};

/// Step size assigned when a round classifies everything correctly.
pub const PERFECT_ROUND_ALPHA: f64 = 10.0;

/// Trained ensemble plus the weight vector after every round (entry 0 is the
/// initial uniform vector).
#[derive(Debug, Clone)]
pub struct AdaboostOutput {
    pub ensemble: Ensemble,
    pub weight_trace: Vec<Vec<f64>>,
}

/// Standard AdaBoost loop. The weak-learner fit routes through the same
/// projection as the robust trainer: a least-squares fit of a ±1 tree to the
/// target N * w_i * Y_i minimizes the w-weighted misclassification.
///
/// Early exits: a perfect round gets the capped step and stops; a round with
/// no edge (weighted error >= 1/2) stops without appending.
pub fn train_adaboost(
    data: &Dataset,
    tree: &TreeConfig,
    rounds: usize,
) -> Result<AdaboostOutput> {
    if rounds < 1 {
        return Err(Error::InvalidConfig("adaboost needs rounds >= 1".into()));
    }
    let n = data.n();
    let nf = n as f64;
    let labels = data.labels();
    if labels.iter().all(|&y| y == 1.0) || labels.iter().all(|&y| y == -1.0) {
        return Err(Error::DegenerateLabels);
    }

    let mut weights = vec![1.0 / nf; n];
    let mut weight_trace = vec![weights.clone()];
    let mut ensemble = Ensemble::new();

    for _ in 0..rounds {
        let target: Vec<f64> =
            weights.iter().zip(labels).map(|(&w, &y)| nf * w * y).collect();
        let learner = fit_projection(data, &target, tree)?;
        let predictions: Vec<f64> =
            (0..n).map(|i| learner.predict_unchecked(data.row(i))).collect();

        let err: f64 = predictions
            .iter()
            .zip(labels)
            .zip(&weights)
            .filter(|((&p, &y), _)| p != y)
            .map(|(_, &w)| w)
            .sum();

        if err == 0.0 {
            ensemble.push(PERFECT_ROUND_ALPHA, learner);
            for (w, (&p, &y)) in weights.iter_mut().zip(predictions.iter().zip(labels)) {
                *w *= (-PERFECT_ROUND_ALPHA * y * p).exp();
            }
            let z: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= z);
            weight_trace.push(weights.clone());
            break;
        }
        if err >= 0.5 {
            break;
        }

        let alpha = 0.5 * ((1.0 - err) / err).ln();
        ensemble.push(alpha, learner);
        for (w, (&p, &y)) in weights.iter_mut().zip(predictions.iter().zip(labels)) {
            *w *= (-alpha * y * p).exp();
        }
        let z: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= z);
        weight_trace.push(weights.clone());
    }

    Ok(AdaboostOutput { ensemble, weight_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::evaluate_margins;
    use crate::loss::{loss_vector, MarginLoss};

    fn mixed_data(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![(i as f64 * 0.731).sin(), (i as f64 * 0.377).cos(), i as f64 % 4.0])
            .collect();
        let labels: Vec<f64> = (0..n)
            .map(|i| if ((i * 5) % 7 < 3) ^ (i % 11 == 0) { 1.0 } else { -1.0 })
            .collect();
        Dataset::from_rows(&rows, &labels).unwrap()
    }

    #[test]
    fn first_round_equals_the_uniform_weight_fit() {
        let data = mixed_data(40);
        let tree = TreeConfig::new(1, 1).unwrap();
        let out = train_adaboost(&data, &tree, 1).unwrap();
        let target: Vec<f64> = data.labels().to_vec();
        let plain = fit_projection(&data, &target, &tree).unwrap();
        assert_eq!(out.ensemble.terms()[0].learner, plain);
    }

    #[test]
    fn weights_match_the_margin_closed_form_each_round() {
        // w_i after round t must equal exp(-Y_i F_t(X_i)) normalized.
        let data = mixed_data(50);
        let tree = TreeConfig::new(1, 1).unwrap();
        let out = train_adaboost(&data, &tree, 10).unwrap();

        let mut partial = Ensemble::new();
        for (t, term) in out.ensemble.terms().iter().enumerate() {
            partial.push(term.coefficient, term.learner.clone());
            let margins = evaluate_margins(&partial, &data).unwrap();
            let unnorm: Vec<f64> = margins.iter().map(|&m| (-m).exp()).collect();
            let z: f64 = unnorm.iter().sum();
            for (i, &u) in unnorm.iter().enumerate() {
                let expected = u / z;
                let got = out.weight_trace[t + 1][i];
                assert!(
                    (got - expected).abs() < 1e-12,
                    "round {t} weight {i}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn training_exponential_loss_non_increasing() {
        let data = mixed_data(60);
        let tree = TreeConfig::new(2, 1).unwrap();
        let out = train_adaboost(&data, &tree, 12).unwrap();
        let mut partial = Ensemble::new();
        let mut prev = 1.0; // exp loss of the zero ensemble
        for term in out.ensemble.terms() {
            partial.push(term.coefficient, term.learner.clone());
            let margins = evaluate_margins(&partial, &data).unwrap();
            let loss = loss_vector(MarginLoss::Exponential, &margins).unwrap().mean();
            assert!(loss <= prev + 1e-12, "loss rose: {prev} -> {loss}");
            prev = loss;
        }
    }

    #[test]
    fn separable_toy_set_takes_the_capped_branch() {
        let data = Dataset::from_rows(&[vec![0.0], vec![1.0]], &[-1.0, 1.0]).unwrap();
        let out = train_adaboost(&data, &TreeConfig::new(1, 1).unwrap(), 5).unwrap();
        assert_eq!(out.ensemble.len(), 1);
        assert_eq!(out.ensemble.terms()[0].coefficient, PERFECT_ROUND_ALPHA);
    }

    #[test]
    fn single_class_data_rejected() {
        let data = Dataset::from_rows(&[vec![0.0], vec![1.0]], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            train_adaboost(&data, &TreeConfig::new(1, 1).unwrap(), 3),
            Err(Error::DegenerateLabels)
        ));
    }
}
