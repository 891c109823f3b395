//! Power-law allocation of examples to instructions.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::GenError;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawAllocation {
    /// Examples per instruction, summing to the requested total.
    pub counts: Vec<usize>,
    /// Raw draws from the density `alpha * x^(alpha - 1)` on `(0, 1]`.
    pub weights: Vec<f64>,
    /// Normalized weights, aligned with `counts`.
    pub probabilities: Vec<f64>,
}

impl PowerLawAllocation {
    /// Probabilities sorted in descending order.
    pub fn sorted_probabilities(&self) -> Vec<f64> {
        let mut p = self.probabilities.clone();
        p.sort_by(|a, b| b.total_cmp(a));
        p
    }
}

/// Distributes `total` examples over `instructions` instructions.
///
/// Weights are drawn by inverse CDF, `u^(1/alpha)` with `u` uniform on
/// `(0, 1]`, normalized, then the examples are allocated by one multinomial
/// draw (sequential conditional binomials). Instructions may get zero
/// examples.
pub fn allocate_power_law<R: Rng + ?Sized>(
    instructions: usize,
    total: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<PowerLawAllocation, GenError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(GenError::InvalidParameter(format!("power-law shape must be positive, got {alpha}")));
    }
    if instructions == 0 {
        return Err(GenError::InvalidParameter("need at least one instruction".into()));
    }
    let weights: Vec<f64> = (0..instructions)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>();
            u.powf(1.0 / alpha)
        })
        .collect();
    let sum: f64 = weights.iter().sum();
    let probabilities: Vec<f64> = weights.iter().map(|w| w / sum).collect();

    let mut counts = Vec::with_capacity(instructions);
    let mut remaining = total as u64;
    let mut mass_left = 1.0f64;
    for (i, &p) in probabilities.iter().enumerate() {
        let c = if i + 1 == instructions {
            remaining
        } else if remaining == 0 || mass_left <= 0.0 {
            0
        } else {
            let q = (p / mass_left).clamp(0.0, 1.0);
            Binomial::new(remaining, q).expect("probability clamped to [0, 1]").sample(rng)
        };
        counts.push(c as usize);
        remaining -= c;
        mass_left -= p;
    }
    Ok(PowerLawAllocation {
        counts,
        weights,
        probabilities,
    })
}
