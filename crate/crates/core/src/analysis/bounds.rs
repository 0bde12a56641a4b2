use serde::{Deserialize, Serialize};

use crate::error::{Result, TabError};

/// Which tail of the reference bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Upper,
    Lower,
}

/// A deviation query: `Pr[X >= (1 + δ)µ]` or `Pr[X <= (1 - δ)µ]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundQuery {
    pub mu: f64,
    pub delta: f64,
    pub side: BoundSide,
}

impl BoundQuery {
    fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(TabError::Domain(format!("mu = {} must be >= 0", self.mu)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(TabError::Domain(format!(
                "delta = {} must be > 0",
                self.delta
            )));
        }
        if matches!(self.side, BoundSide::Lower) && self.delta > 1.0 {
            return Err(TabError::Domain(format!(
                "lower-side delta = {} must be <= 1",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Natural log of the bound, computed without forming the huge intermediate
/// powers. Upper: `µ (δ - (1 + δ) ln(1 + δ))`; lower:
/// `µ (-δ - (1 - δ) ln(1 - δ))`. Finite for any valid query; capped at 0
/// (probability 1).
pub fn chernoff_bound_ln(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    let ln = match q.side {
        BoundSide::Upper => q.mu * (q.delta - (1.0 + q.delta) * q.delta.ln_1p()),
        BoundSide::Lower => {
            if q.delta == 1.0 {
                // By convention the lower bound degenerates to 0 at δ = 1.
                return Ok(f64::NEG_INFINITY);
            }
            q.mu * (-q.delta - (1.0 - q.delta) * (1.0 - q.delta).ln())
        }
    };
    Ok(ln.min(0.0))
}

/// The bound as a probability in `[0, 1]`.
pub fn chernoff_bound(q: &BoundQuery) -> Result<f64> {
    Ok(chernoff_bound_ln(q)?.exp())
}

/// Mean of `(x - mu)^k` over the samples.
pub fn empirical_central_moment(samples: &[f64], k: u32, mu: f64) -> Result<f64> {
    if k == 0 {
        return Err(TabError::Domain("moment order k must be >= 1".into()));
    }
    if samples.is_empty() {
        return Err(TabError::Domain("empty sample".into()));
    }
    let sum: f64 = samples.iter().map(|&x| (x - mu).powi(k as i32)).sum();
    Ok(sum / samples.len() as f64)
}
