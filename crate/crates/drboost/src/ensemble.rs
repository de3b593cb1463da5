//! Linear combinations of weak learners, plus the empirical inner product
//! <F,G> = (1/N) sum_i F(X_i) G(X_i) that all gradient geometry runs through.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::tree::Tree;

/// One ensemble term: coefficient times learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub learner: Tree,
}

/// F = sum_t alpha_t f_t. The empty ensemble is identically zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ensemble {
    terms: Vec<Term>,
}

impl Ensemble {
    pub fn new() -> Self {
        Ensemble { terms: Vec::new() }
    }

    pub fn push(&mut self, coefficient: f64, learner: Tree) {
        self.terms.push(Term { coefficient, learner });
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Feature count the ensemble expects, if it has any terms.
    pub fn arity(&self) -> Option<usize> {
        self.terms.first().map(|t| t.learner.arity())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for term in &self.terms {
            acc += term.coefficient * term.learner.predict(x)?;
        }
        Ok(acc)
    }

    /// Predicted label sgn(F(x)), with sgn(0) = +1.
    pub fn predict_label(&self, x: &[f64]) -> Result<f64> {
        Ok(if self.evaluate(x)? >= 0.0 { 1.0 } else { -1.0 })
    }
}

/// Margins m_i = Y_i * F(X_i) for every row of `data`.
pub fn evaluate_margins(ensemble: &Ensemble, data: &Dataset) -> Result<Vec<f64>> {
    if let Some(arity) = ensemble.arity() {
        if arity != data.d() {
            return Err(Error::ArityMismatch { expected: arity, got: data.d() });
        }
    }
    let mut margins = vec![0.0; data.n()];
    for term in ensemble.terms() {
        if term.learner.arity() != data.d() {
            return Err(Error::ArityMismatch { expected: term.learner.arity(), got: data.d() });
        }
        for (i, m) in margins.iter_mut().enumerate() {
            *m += term.coefficient * term.learner.predict_unchecked(data.row(i));
        }
    }
    for (m, &y) in margins.iter_mut().zip(data.labels()) {
        *m *= y;
    }
    Ok(margins)
}

/// Empirical inner product of two per-datapoint value vectors.
pub fn inner_product(f_values: &[f64], g_values: &[f64]) -> Result<f64> {
    if f_values.len() != g_values.len() {
        return Err(Error::LengthMismatch { left: f_values.len(), right: g_values.len() });
    }
    let n = f_values.len() as f64;
    Ok(f_values.iter().zip(g_values).map(|(f, g)| f * g).sum::<f64>() / n)
}
