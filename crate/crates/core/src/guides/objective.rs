//! Length-weighted sigmoid cross-entropy over independent outputs.
//!
//! For examples `i` with weight `w_i`, feature vector `x_i` and targets
//! `y_ij`, and heads `θ_j`:
//!
//! ```text
//! L(θ) = Σ_i w_i Σ_j bce(σ(θ_j · x_i), y_ij) / Σ_i w_i
//! ∂L/∂θ_j = Σ_i w_i (σ(θ_j · x_i) − y_ij) x_i / Σ_i w_i
//! ```

use super::features::FeatureVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub features: FeatureVector,
    pub targets: Vec<f64>,
    pub weight: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-[y ln σ(z) + (1 - y) ln(1 - σ(z))]`, computed without overflow.
pub fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

/// Unweighted loss of one example, summed over outputs.
pub fn example_loss(heads: &[Vec<f64>], ex: &Encoded) -> f64 {
    heads
        .iter()
        .zip(&ex.targets)
        .map(|(w, &y)| bce_with_logit(ex.features.dot(w), y))
        .sum()
}

pub fn weighted_loss(heads: &[Vec<f64>], data: &[Encoded]) -> f64 {
    let total_weight: f64 = data.iter().map(|e| e.weight).sum();
    if total_weight == 0.0 {
        return 0.0;
    }
    data.iter().map(|e| e.weight * example_loss(heads, e)).sum::<f64>() / total_weight
}

pub fn weighted_loss_gradient(heads: &[Vec<f64>], data: &[Encoded]) -> Vec<Vec<f64>> {
    let mut grad: Vec<Vec<f64>> = heads.iter().map(|h| vec![0.0; h.len()]).collect();
    let total_weight: f64 = data.iter().map(|e| e.weight).sum();
    if total_weight == 0.0 {
        return grad;
    }
    for e in data {
        for (j, w) in heads.iter().enumerate() {
            let residual = sigmoid(e.features.dot(w)) - e.targets[j];
            let scale = e.weight * residual / total_weight;
            for &(i, v) in &e.features.entries {
                grad[j][i as usize] += scale * v;
            }
        }
    }
    grad
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn sigmoid_and_loss_are_well_behaved(z in -700.0f64..700.0, y in 0.0f64..=1.0) {
            let s = sigmoid(z);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((s + sigmoid(-z) - 1.0).abs() < 1e-12);
            let l = bce_with_logit(z, y);
            prop_assert!(l.is_finite() && l >= 0.0);
        }
    }
}
