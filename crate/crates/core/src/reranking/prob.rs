use serde::{Deserialize, Serialize};

use super::RerankError;

/// Probability of the positive target word under a softmax restricted to
/// the two target logits: `1 / (1 + exp(neg − pos))`.
///
/// Evaluated so that the exponent is never positive, which keeps it finite
/// for any finite inputs.
pub fn relevance_prob(logit_pos: f64, logit_neg: f64) -> Result<f64, RerankError> {
    if !(logit_pos.is_finite() && logit_neg.is_finite()) {
        return Err(RerankError::NonFiniteLogit(logit_pos, logit_neg));
    }
    let diff = logit_pos - logit_neg;
    Ok(if diff >= 0.0 {
        1.0 / (1.0 + (-diff).exp())
    } else {
        let e = diff.exp();
        e / (1.0 + e)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub logit_pos: f64,
    pub logit_neg: f64,
    pub prob: f64,
}

impl ScoreRecord {
    pub fn new(logit_pos: f64, logit_neg: f64) -> Result<Self, RerankError> {
        Ok(ScoreRecord {
            logit_pos,
            logit_neg,
            prob: relevance_prob(logit_pos, logit_neg)?,
        })
    }
}
