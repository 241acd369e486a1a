use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interface width `ε` and time step `τ`; `λ = τ/ε` is always derived.
///
/// `ε = +∞` encodes `λ = 0` (pure diffusion) and negative `ε` encodes the
/// `λ < 0` regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    epsilon: f64,
    tau: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `0 ≤ λ < 1`
    SubUnit,
    /// `λ = 1`
    Mbo,
    /// `λ > 1`
    SuperUnit,
    /// `λ < 0`
    Negative,
}

impl SchemeParams {
    pub fn new(epsilon: f64, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must be positive and finite, got {tau}"
            )));
        }
        if epsilon.is_nan() || epsilon == 0.0 || epsilon == f64::NEG_INFINITY {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be nonzero, got {epsilon}"
            )));
        }
        Ok(Self { epsilon, tau })
    }

    /// Parameters with the given `λ` and `τ`.
    pub fn from_lambda(lambda: f64, tau: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        let epsilon = if lambda == 0.0 {
            f64::INFINITY
        } else {
            tau / lambda
        };
        Self::new(epsilon, tau)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn lambda(&self) -> f64 {
        self.tau / self.epsilon
    }

    pub fn regime(&self) -> Regime {
        let l = self.lambda();
        if l < 0.0 {
            Regime::Negative
        } else if l < 1.0 {
            Regime::SubUnit
        } else if l == 1.0 {
            Regime::Mbo
        } else {
            Regime::SuperUnit
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(
            SchemeParams::new(1.0, 0.5).unwrap().regime(),
            Regime::SubUnit
        );
        assert_eq!(SchemeParams::new(0.3, 0.3).unwrap().regime(), Regime::Mbo);
        assert_eq!(
            SchemeParams::new(0.1, 0.3).unwrap().regime(),
            Regime::SuperUnit
        );
        assert_eq!(
            SchemeParams::new(-1.0, 0.3).unwrap().regime(),
            Regime::Negative
        );
        let zero = SchemeParams::from_lambda(0.0, 0.2).unwrap();
        assert_eq!(zero.lambda(), 0.0);
        assert_eq!(zero.regime(), Regime::SubUnit);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(SchemeParams::new(1.0, 0.0).is_err());
        assert!(SchemeParams::new(0.0, 1.0).is_err());
        assert!(SchemeParams::new(f64::NAN, 1.0).is_err());
        assert!(SchemeParams::from_lambda(f64::INFINITY, 1.0).is_err());
    }
}
