use super::OrchestrationError;
use crate::corpus_io::{Label, TrainInstance};
use crate::rng::{below, seeded};

/// Picks `count` of `indices` uniformly without replacement with a partial
/// Fisher-Yates shuffle, then restores pool order.
fn pick(indices: &mut [usize], count: usize, rng: &mut rand_xoshiro::SplitMix64) -> Vec<usize> {
    for i in 0..count {
        let j = i + below(rng, indices.len() - i);
        indices.swap(i, j);
    }
    let mut chosen = indices[..count].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Draws `n_pos` positives and `n_neg` negatives without replacement.
///
/// A SplitMix64 generator seeded with `seed` drives a partial Fisher-Yates
/// shuffle over the positives, then over the negatives. The result lists
/// the chosen positives, then the chosen negatives, each in pool order.
pub fn sample_balanced(
    instances: &[TrainInstance],
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<Vec<TrainInstance>, OrchestrationError> {
    let mut pos: Vec<usize> = Vec::new();
    let mut neg: Vec<usize> = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        match inst.label {
            Label::Positive => pos.push(i),
            Label::Negative => neg.push(i),
        }
    }
    for (class, requested, available) in [("positive", n_pos, pos.len()), ("negative", n_neg, neg.len())] {
        if requested > available {
            return Err(OrchestrationError::InsufficientPool {
                class,
                requested,
                available,
            });
        }
    }
    let mut rng = seeded(seed);
    let chosen_pos = pick(&mut pos, n_pos, &mut rng);
    let chosen_neg = pick(&mut neg, n_neg, &mut rng);
    Ok(chosen_pos
        .into_iter()
        .chain(chosen_neg)
        .map(|i| instances[i].clone())
        .collect())
}
