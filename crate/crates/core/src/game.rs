//! Normal-form games stored as dense utility tensors.
//!
//! Internally every player maximizes utility in `[-1, 1]`. Cost inputs are
//! negated at ingestion and anything outside the unit box is rescaled by one
//! common factor; both facts are recorded on the game.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on pure-profile enumeration (welfare, smoothness, verifiers).
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Tolerance for a mixed strategy to count as a probability vector.
pub const PROFILE_TOL: f64 = 1e-12;

/// Sign convention of the numbers a game was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Maximize,
    Minimize,
}

/// A mixed profile: one probability vector per player.
pub type Profile = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormGame {
    action_counts: Vec<usize>,
    strides: Vec<usize>,
    utilities: Vec<Vec<f64>>,
    orientation: Orientation,
    scales: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    pub lambda: f64,
    pub mu: f64,
}

impl SmoothnessParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(mu >= 0.0) {
            return Err(Error::Config(format!("smoothness needs lambda > 0, mu >= 0 (got {lambda}, {mu})")));
        }
        Ok(Self { lambda, mu })
    }

    /// Robust price of anarchy bound `λ / (1 + μ)`.
    pub fn robust_poa(&self) -> f64 {
        self.lambda / (1.0 + self.mu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub holds: bool,
    pub worst_slack: f64,
    /// `(a, a*)` attaining the worst slack.
    pub worst_pair: (Vec<usize>, Vec<usize>),
}

impl NormalFormGame {
    /// Build from per-player flat tensors in row-major order (player 0's
    /// action is the slowest index).
    pub fn new(action_counts: Vec<usize>, utilities: Vec<Vec<f64>>, orientation: Orientation) -> Result<Self> {
        Self::build(action_counts, utilities, orientation, true)
    }

    /// Same layout without the [-1, 1] normalisation; used for auxiliary
    /// multilinear tables such as potentials.
    pub(crate) fn unscaled(action_counts: Vec<usize>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(action_counts, utilities, Orientation::Maximize, false)
    }

    fn build(action_counts: Vec<usize>, utilities: Vec<Vec<f64>>, orientation: Orientation, rescale: bool) -> Result<Self> {
        if action_counts.is_empty() || action_counts.iter().any(|&c| c == 0) {
            return Err(Error::Dimension("every player needs at least one action".into()));
        }
        if utilities.len() != action_counts.len() {
            return Err(Error::Dimension(format!(
                "{} utility tensors for {} players",
                utilities.len(),
                action_counts.len()
            )));
        }
        let size: usize = action_counts.iter().product();
        let mut strides = vec![1usize; action_counts.len()];
        for i in (0..action_counts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * action_counts[i + 1];
        }
        let mut us = Vec::with_capacity(utilities.len());
        for (i, mut u) in utilities.into_iter().enumerate() {
            if u.len() != size {
                return Err(Error::Dimension(format!("player {i}: tensor has {} entries, expected {size}", u.len())));
            }
            if let Some(p) = u.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("player {i} utility entry {p}")));
            }
            if orientation == Orientation::Minimize {
                u.iter_mut().for_each(|v| *v = -*v);
            }
            us.push(u);
        }
        // one factor for everybody so zero-sum and constant-sum structure survives
        let m = us.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = if rescale && m > 1.0 { 1.0 / m } else { 1.0 };
        if s != 1.0 {
            us.iter_mut().flatten().for_each(|v| *v *= s);
        }
        let scales = vec![s; us.len()];
        Ok(Self { action_counts, strides, utilities: us, orientation, scales })
    }

    /// Two-player game from row-major matrices; `a[r][c]` is the row
    /// player's number and `b[r][c]` the column player's.
    pub fn bimatrix(a: &[Vec<f64>], b: &[Vec<f64>], orientation: Orientation) -> Result<Self> {
        let rows = a.len();
        let cols = a.first().map_or(0, |r| r.len());
        if b.len() != rows || a.iter().chain(b).any(|r| r.len() != cols) {
            return Err(Error::Dimension("bimatrix shapes differ".into()));
        }
        let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<_>>();
        Self::new(vec![rows, cols], vec![flat(a), flat(b)], orientation)
    }

    /// Two-player zero-sum game with row payoff `a` (column gets `-a`).
    pub fn zero_sum(a: &[Vec<f64>], orientation: Orientation) -> Result<Self> {
        let neg: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        Self::bimatrix(a, &neg, orientation)
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_profiles(&self) -> usize {
        self.utilities[0].len()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Per-player multiplicative factor applied at ingestion (1 if none).
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Flat utility tensor of player `i` (internal maximize convention).
    pub fn tensor(&self, i: usize) -> &[f64] {
        &self.utilities[i]
    }

    pub fn index_of(&self, a: &[usize]) -> usize {
        a.iter().zip(&self.strides).map(|(ai, s)| ai * s).sum()
    }

    pub fn profile_of(&self, mut idx: usize) -> Vec<usize> {
        let mut a = vec![0; self.action_counts.len()];
        for (j, s) in self.strides.iter().enumerate() {
            a[j] = idx / s;
            idx %= s;
        }
        a
    }

    pub fn utility(&self, i: usize, a: &[usize]) -> f64 {
        self.utilities[i][self.index_of(a)]
    }

    /// Index of profile `a` with player `i` switched to action `ai`.
    pub fn deviate(&self, idx: usize, i: usize, ai: usize) -> usize {
        let cur = (idx / self.strides[i]) % self.action_counts[i];
        idx - cur * self.strides[i] + ai * self.strides[i]
    }

    pub fn uniform_profile(&self) -> Profile {
        self.action_counts.iter().map(|&d| vec![1.0 / d as f64; d]).collect()
    }

    pub fn pure_profile(&self, a: &[usize]) -> Profile {
        self.action_counts
            .iter()
            .zip(a)
            .map(|(&d, &ai)| {
                let mut v = vec![0.0; d];
                v[ai] = 1.0;
                v
            })
            .collect()
    }

    pub fn check_profile(&self, x: &[Vec<f64>]) -> Result<()> {
        if x.len() != self.num_players() {
            return Err(Error::Dimension(format!("profile has {} players, game {}", x.len(), self.num_players())));
        }
        for (i, (xi, &d)) in x.iter().zip(&self.action_counts).enumerate() {
            if xi.len() != d {
                return Err(Error::Dimension(format!("player {i}: {} probabilities for {d} actions", xi.len())));
            }
            check_simplex(xi, PROFILE_TOL).map_err(|e| Error::Domain(format!("player {i}: {e}")))?;
        }
        Ok(())
    }

    /// `uᵢ(aᵢ, x₋ᵢ)` for every player at once, one pass over the tensor.
    pub fn utility_vectors(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.num_players() || x.iter().zip(&self.action_counts).any(|(v, &d)| v.len() != d) {
            return Err(Error::Dimension("profile shape does not match game".into()));
        }
        Ok(self.utility_vectors_unchecked(x))
    }

    pub(crate) fn utility_vectors_unchecked(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.num_players();
        let mut out: Vec<Vec<f64>> = self.action_counts.iter().map(|&d| vec![0.0; d]).collect();
        if n == 2 {
            let (r, c) = (self.action_counts[0], self.action_counts[1]);
            let (u0, u1) = (&self.utilities[0], &self.utilities[1]);
            for a in 0..r {
                let row = a * c;
                let mut acc = 0.0;
                for b in 0..c {
                    acc += u0[row + b] * x[1][b];
                    out[1][b] += u1[row + b] * x[0][a];
                }
                out[0][a] = acc;
            }
            return out;
        }
        let mut a = vec![0usize; n];
        let mut prefix = vec![1.0; n + 1];
        let mut suffix = vec![1.0; n + 1];
        for idx in 0..self.num_profiles() {
            for j in 0..n {
                prefix[j + 1] = prefix[j] * x[j][a[j]];
            }
            for j in (0..n).rev() {
                suffix[j] = suffix[j + 1] * x[j][a[j]];
            }
            for i in 0..n {
                let w = prefix[i] * suffix[i + 1];
                if w != 0.0 {
                    out[i][a[i]] += w * self.utilities[i][idx];
                }
            }
            for j in (0..n).rev() {
                a[j] += 1;
                if a[j] < self.action_counts[j] {
                    break;
                }
                a[j] = 0;
            }
        }
        out
    }

    /// `uᵢ(·, x₋ᵢ)` as a vector over player `i`'s actions.
    pub fn utility_vector(&self, i: usize, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        if i >= self.num_players() {
            return Err(Error::Dimension(format!("no player {i}")));
        }
        Ok(self.utility_vectors(x)?.swap_remove(i))
    }

    /// Expected utility of player `i` under the product distribution `x`.
    pub fn expected_utility(&self, i: usize, x: &[Vec<f64>]) -> Result<f64> {
        let v = self.utility_vector(i, x)?;
        Ok(dot(&x[i], &v))
    }

    /// Largest gain any player gets from a unilateral (pure) deviation.
    pub fn nash_gap(&self, x: &[Vec<f64>]) -> Result<f64> {
        let us = self.utility_vectors(x)?;
        Ok(nash_gap_from(x, &us))
    }

    pub fn social_welfare(&self, x: &[Vec<f64>]) -> Result<f64> {
        let us = self.utility_vectors(x)?;
        Ok(x.iter().zip(&us).map(|(xi, ui)| dot(xi, ui)).sum())
    }

    fn enum_guard(&self, cap: u64, pairs: bool) -> Result<()> {
        let p = self.num_profiles() as u128;
        let needed = if pairs { p * p } else { p };
        if needed > cap as u128 {
            return Err(Error::EnumerationCap { needed, cap });
        }
        Ok(())
    }

    /// Maximum social welfare over pure profiles, and a maximizer.
    pub fn optimal_welfare(&self, cap: u64) -> Result<(f64, Vec<usize>)> {
        self.enum_guard(cap, false)?;
        let mut best = (f64::NEG_INFINITY, 0usize);
        for idx in 0..self.num_profiles() {
            let sw: f64 = self.utilities.iter().map(|u| u[idx]).sum();
            if sw > best.0 {
                best = (sw, idx);
            }
        }
        Ok((best.0, self.profile_of(best.1)))
    }

    /// Exhaustive check of `Σᵢ uᵢ(a*ᵢ, a₋ᵢ) ≥ λ·sw(a*) − μ·sw(a)` over all
    /// pure pairs `(a, a*)`.
    pub fn verify_smoothness(&self, params: SmoothnessParams, cap: u64) -> Result<SmoothnessReport> {
        self.enum_guard(cap, true)?;
        let np = self.num_profiles();
        let sw: Vec<f64> = (0..np).map(|k| self.utilities.iter().map(|u| u[k]).sum()).collect();
        let mut worst = (f64::INFINITY, 0usize, 0usize);
        for a in 0..np {
            for s in 0..np {
                let ps = self.profile_of(s);
                let lhs: f64 = (0..self.num_players())
                    .map(|i| self.utilities[i][self.deviate(a, i, ps[i])])
                    .sum();
                let slack = lhs - params.lambda * sw[s] + params.mu * sw[a];
                if slack < worst.0 {
                    worst = (slack, a, s);
                }
            }
        }
        Ok(SmoothnessReport {
            holds: worst.0 >= -1e-12,
            worst_slack: worst.0,
            worst_pair: (self.profile_of(worst.1), self.profile_of(worst.2)),
        })
    }
}

/// Nash gap from precomputed utility vectors.
pub fn nash_gap_from(x: &[Vec<f64>], us: &[Vec<f64>]) -> f64 {
    x.iter()
        .zip(us)
        .map(|(xi, ui)| {
            let best = ui.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (best - dot(xi, ui)).max(0.0)
        })
        .fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn check_simplex(x: &[f64], tol: f64) -> std::result::Result<(), String> {
    if let Some(p) = x.iter().position(|v| !v.is_finite() || *v < -tol) {
        return Err(format!("entry {p} = {} is not a probability", x[p]));
    }
    let s: f64 = x.iter().sum();
    if (s - 1.0).abs() > tol.max(1e-12) * x.len().max(1) as f64 {
        return Err(format!("entries sum to {s}"));
    }
    Ok(())
}
