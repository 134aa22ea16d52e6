//! Seeded random-network generation for benchmarks and oracle tests.
//!
//! The model is the usual A(n, d, l) scheme: n variables; each unordered
//! pair is constrained with probability d (density); a constrained edge gets
//! a uniformly random label of exactly l base relations (capped at the
//! calculus size). Everything is driven by a seeded ChaCha stream, so one
//! (model, seed) pair names one network on every platform.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Calculus, Relation};
use crate::error::{Error, Result};
use crate::network::Qcn;

/// Parameters of the A(n, d, l) random-network model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomModel {
    /// Number of variables, n >= 1.
    pub variables: usize,
    /// Probability that an unordered pair is constrained, in [0, 1].
    pub density: f64,
    /// Base relations per constrained edge, >= 1 (capped at |B|).
    pub label_size: usize,
}

impl RandomModel {
    pub fn new(variables: usize, density: f64, label_size: usize) -> Result<Self> {
        if variables == 0 {
            return Err(Error::NoVariables);
        }
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::InvalidDistribution(format!(
                "density {density} outside [0, 1]"
            )));
        }
        if label_size == 0 {
            return Err(Error::InvalidDistribution("label size must be >= 1".into()));
        }
        Ok(RandomModel { variables, density, label_size })
    }
}

/// Draws one network from the model. Variables are named v1..vn; unpicked
/// edges stay universal.
pub fn random_qcn(calculus: &Arc<Calculus>, model: &RandomModel, seed: u64) -> Result<Qcn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=model.variables).map(|i| format!("v{i}")).collect();
    let mut qcn = Qcn::new(calculus, names)?;
    let label = model.label_size.min(calculus.len());
    for i in 0..model.variables {
        for j in i + 1..model.variables {
            if rng.gen::<f64>() >= model.density {
                continue;
            }
            // Fisher-Yates prefix: the first `label` slots end up holding a
            // uniform sample without replacement.
            let mut indices: Vec<usize> = (0..calculus.len()).collect();
            for t in 0..label {
                let pick = rng.gen_range(t..indices.len());
                indices.swap(t, pick);
            }
            let bits = indices[..label].iter().fold(0u64, |acc, &b| acc | (1 << b));
            let r = Relation::from_bits(calculus, bits).expect("indices from the calculus");
            qcn.set_constraint(i, j, r)?;
        }
    }
    Ok(qcn)
}
