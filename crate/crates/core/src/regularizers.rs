//! Distance-generating functions on the probability simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entropy iterates are floored here before taking logs.
pub const ENTROPY_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    /// `½‖x‖₂²`, 1-strongly convex w.r.t. ℓ₂.
    Euclidean,
    /// `Σ x log x`, 1-strongly convex w.r.t. ℓ₁ by Pinsker.
    #[serde(alias = "entropy")]
    NegativeEntropy,
}

/// Norm w.r.t. which a regularizer is strongly convex; the dual norm is
/// used on utilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormPair {
    /// primal ℓ₁, dual ℓ∞
    L1Linf,
    /// primal ℓ₂, dual ℓ₂
    L2L2,
}

impl NormPair {
    pub fn primal(&self, v: &[f64]) -> f64 {
        match self {
            NormPair::L1Linf => norm1(v),
            NormPair::L2L2 => norm2(v),
        }
    }

    pub fn dual(&self, v: &[f64]) -> f64 {
        match self {
            NormPair::L1Linf => norm_inf(v),
            NormPair::L2L2 => norm2(v),
        }
    }
}

impl Regularizer {
    pub fn norm_pair(&self) -> NormPair {
        match self {
            Regularizer::Euclidean => NormPair::L2L2,
            Regularizer::NegativeEntropy => NormPair::L1Linf,
        }
    }

    /// Smoothness constant of the gradient map; `None` when not smooth.
    pub fn smoothness(&self) -> Option<f64> {
        match self {
            Regularizer::Euclidean => Some(1.0),
            Regularizer::NegativeEntropy => None,
        }
    }

    /// `sup_x D(x, x̂⁰)` over the d-simplex, where x̂⁰ = argmin R is uniform.
    /// This is the range `sup R − inf R` as well, for both kinds.
    pub fn omega(&self, d: usize) -> f64 {
        let d = d as f64;
        match self {
            Regularizer::Euclidean => 0.5 * (1.0 - 1.0 / d),
            Regularizer::NegativeEntropy => d.ln(),
        }
    }

    /// `sup_{x,y} D(x, y)` over the d-simplex (infinite for entropy).
    pub fn omega_full(&self, d: usize) -> f64 {
        match self {
            Regularizer::Euclidean if d > 1 => 1.0,
            Regularizer::Euclidean => 0.0,
            Regularizer::NegativeEntropy if d > 1 => f64::INFINITY,
            Regularizer::NegativeEntropy => 0.0,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Regularizer::Euclidean => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            Regularizer::NegativeEntropy => x.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum(),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Regularizer::Euclidean => x.to_vec(),
            Regularizer::NegativeEntropy => x.iter().map(|v| v.max(ENTROPY_FLOOR).ln() + 1.0).collect(),
        }
    }

    /// Bregman divergence `D(x, y) = R(x) − R(y) − ⟨∇R(y), x − y⟩`.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!("bregman: {} vs {}", x.len(), y.len())));
        }
        match self {
            Regularizer::Euclidean => Ok(0.5 * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()),
            Regularizer::NegativeEntropy => {
                let mut kl = 0.0;
                for (&a, &b) in x.iter().zip(y) {
                    if a > 0.0 {
                        if b <= 0.0 {
                            return Err(Error::Domain("entropy divergence with zero reference coordinate".into()));
                        }
                        kl += a * (a / b).ln();
                    }
                }
                // simplex points: the linear terms cancel, but keep them for
                // inputs that are only approximately normalized
                let sx: f64 = x.iter().sum();
                let sy: f64 = y.iter().sum();
                Ok(kl - sx + sy)
            }
        }
    }

    /// `argmax_x ⟨x, g⟩·η − D(x, anchor)` over the simplex.
    pub fn prox(&self, anchor: &[f64], g: &[f64], eta: f64) -> Result<Vec<f64>> {
        if anchor.len() != g.len() {
            return Err(Error::Dimension(format!("prox: anchor {} vs direction {}", anchor.len(), g.len())));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prox direction".into()));
        }
        Ok(match self {
            Regularizer::Euclidean => {
                let v: Vec<f64> = anchor.iter().zip(g).map(|(a, gi)| a + eta * gi).collect();
                project_simplex(&v)
            }
            Regularizer::NegativeEntropy => {
                let logits: Vec<f64> = anchor.iter().zip(g).map(|(a, gi)| a.max(ENTROPY_FLOOR).ln() + eta * gi).collect();
                softmax(&logits)
            }
        })
    }

    /// `argmax_x ⟨x, s⟩ − R(x)/η` over the simplex (the FTRL map).
    pub fn argmax_linear(&self, s: &[f64], eta: f64) -> Result<Vec<f64>> {
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cumulative utility".into()));
        }
        let scaled: Vec<f64> = s.iter().map(|v| eta * v).collect();
        Ok(match self {
            Regularizer::Euclidean => project_simplex(&scaled),
            Regularizer::NegativeEntropy => softmax(&scaled),
        })
    }

    /// True when entropy would have to floor a coordinate of `x`.
    pub fn needs_floor(&self, x: &[f64]) -> bool {
        matches!(self, Regularizer::NegativeEntropy) && x.iter().any(|&v| v < ENTROPY_FLOOR)
    }
}

/// Euclidean projection onto the probability simplex by sort and threshold.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    project_scaled_simplex(v, 1.0)
}

/// Projection onto `{x ≥ 0, Σx = r}`.
pub fn project_scaled_simplex(v: &[f64], r: f64) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut css = 0.0;
    let mut tau = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        css += uk;
        let t = (css - r) / (k + 1) as f64;
        if uk - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&vi| (vi - tau).max(0.0)).collect()
}

/// Euclidean projection onto the ℓ₁ ball of radius `r`.
pub fn project_l1_ball(v: &[f64], r: f64) -> Vec<f64> {
    if norm1(v) <= r {
        return v.to_vec();
    }
    let mag: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let w = project_scaled_simplex(&mag, r);
    v.iter().zip(w).map(|(x, wi)| wi.copysign(*x)).collect()
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
