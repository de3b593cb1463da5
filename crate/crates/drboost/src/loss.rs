//! Margin losses. A loss here is phi(Y * F(X)) for a convex, non-increasing
//! phi; the per-point values form the empirical loss vector the worst-case
//! reweighting acts on.

use crate::error::{Error, Result};

/// Exponential margins blow past f64 range below this.
const EXP_MARGIN_FLOOR: f64 = -700.0;

/// Supported margin losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginLoss {
    /// phi(m) = exp(-m). AdaBoost's loss.
    Exponential,
    /// phi(m) = ln(1 + exp(-m)).
    Logistic,
}

impl MarginLoss {
    pub fn phi(&self, m: f64) -> f64 {
        match self {
            MarginLoss::Exponential => (-m).exp(),
            // ln(1+e^-m) = -m + ln(1+e^m) keeps the large-|m| tails stable.
            MarginLoss::Logistic => {
                if m < 0.0 {
                    -m + m.exp().ln_1p()
                } else {
                    (-m).exp().ln_1p()
                }
            }
        }
    }

    pub fn phi_prime(&self, m: f64) -> f64 {
        match self {
            MarginLoss::Exponential => -(-m).exp(),
            MarginLoss::Logistic => -1.0 / (1.0 + m.exp()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MarginLoss::Exponential => "exponential",
            MarginLoss::Logistic => "logistic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exp" | "exponential" => Ok(MarginLoss::Exponential),
            "logistic" | "log" => Ok(MarginLoss::Logistic),
            other => Err(Error::InvalidConfig(format!("unknown loss {other:?}"))),
        }
    }
}

/// Per-point losses values[i] = phi(Y_i * F(X_i)). Always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    /// Wrap precomputed values, enforcing finiteness.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(LossVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

/// Apply the loss pointwise to a margin vector.
///
/// Exponential margins below -700 are rejected rather than silently producing
/// infinity.
pub fn loss_vector(loss: MarginLoss, margins: &[f64]) -> Result<LossVector> {
    let mut values = Vec::with_capacity(margins.len());
    for (i, &m) in margins.iter().enumerate() {
        if !m.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        if loss == MarginLoss::Exponential && m < EXP_MARGIN_FLOOR {
            return Err(Error::MarginOutOfRange { index: i, margin: m });
        }
        values.push(loss.phi(m));
    }
    LossVector::new(values)
}
