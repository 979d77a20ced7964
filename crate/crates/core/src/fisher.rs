//! Linear Fisher markets, the Shmyrev potential and Proportional Response.
//!
//! Spending `b` has one row per buyer summing to that buyer's budget; prices
//! are column sums and the allocation is `x_ij = b_ij / p_j`, so the market
//! clears by construction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::Transform;
use crate::metrics::AuditReport;
use crate::potential::concave_rate_slacks;
use crate::regularizers::Regularizer;

/// Floor for spends inside logarithms.
pub const SPEND_FLOOR: f64 = 1e-300;

/// Spending matrix `b[i][j]`.
pub type Spend = Vec<Vec<f64>>;

fn default_budgets() -> Vec<f64> {
    Vec::new()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherMarket {
    pub utilities: Vec<Vec<f64>>,
    /// empty means unit budgets
    #[serde(default = "default_budgets")]
    pub budgets: Vec<f64>,
}

impl FisherMarket {
    pub fn new(utilities: Vec<Vec<f64>>, budgets: Option<Vec<f64>>) -> Result<Self> {
        let n = utilities.len();
        let budgets = budgets.unwrap_or_else(|| vec![1.0; n]);
        let m = Self { utilities, budgets };
        m.validate()?;
        Ok(m)
    }

    /// Fill in unit budgets when missing and check the market.
    pub fn validate(&self) -> Result<()> {
        let n = self.utilities.len();
        if n == 0 {
            return Err(Error::Config("market has no buyers".into()));
        }
        let m = self.utilities[0].len();
        if m == 0 || self.utilities.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("utility matrix must be rectangular with at least one good".into()));
        }
        if self.utilities.iter().flatten().any(|&u| !(u.is_finite() && u > 0.0)) {
            return Err(Error::Domain("Fisher utilities must be positive".into()));
        }
        if !self.budgets.is_empty() && self.budgets.len() != n {
            return Err(Error::Dimension(format!("{} budgets for {n} buyers", self.budgets.len())));
        }
        if self.budgets.iter().any(|&b| !(b.is_finite() && b > 0.0)) {
            return Err(Error::Domain("budgets must be positive".into()));
        }
        Ok(())
    }

    pub fn buyers(&self) -> usize {
        self.utilities.len()
    }

    pub fn goods(&self) -> usize {
        self.utilities[0].len()
    }

    pub fn budget(&self, i: usize) -> f64 {
        self.budgets.get(i).copied().unwrap_or(1.0)
    }

    /// Every buyer splits their budget evenly.
    pub fn uniform_spend(&self) -> Spend {
        let m = self.goods();
        (0..self.buyers()).map(|i| vec![self.budget(i) / m as f64; m]).collect()
    }

    pub fn check_spend(&self, b: &[Vec<f64>]) -> Result<()> {
        if b.len() != self.buyers() || b.iter().any(|r| r.len() != self.goods()) {
            return Err(Error::Dimension("spend matrix shape does not match the market".into()));
        }
        for (i, row) in b.iter().enumerate() {
            if row.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
                return Err(Error::Domain(format!("buyer {i} has a negative or non-finite spend")));
            }
            let s: f64 = row.iter().sum();
            let bi = self.budget(i);
            if (s - bi).abs() > 1e-9 * bi {
                return Err(Error::Domain(format!("buyer {i} spends {s}, budget {bi}")));
            }
        }
        Ok(())
    }

    pub fn prices(&self, b: &[Vec<f64>]) -> Vec<f64> {
        (0..self.goods()).map(|j| b.iter().map(|r| r[j]).sum()).collect()
    }

    /// `x_ij = b_ij / p_j` (zero for unpriced goods).
    pub fn allocation(&self, b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let p = self.prices(b);
        b.iter()
            .map(|r| r.iter().zip(&p).map(|(v, pj)| if *pj > 0.0 { v / pj } else { 0.0 }).collect())
            .collect()
    }

    /// `Φ(b) = Σ_ij b_ij log(u_ij / p_j)` with `0 log(·) = 0`.
    pub fn shmyrev_objective(&self, b: &[Vec<f64>]) -> Result<f64> {
        self.check_spend(b)?;
        let p = self.prices(b);
        let mut s = 0.0;
        for (row, u) in b.iter().zip(&self.utilities) {
            for j in 0..row.len() {
                if row[j] > 0.0 {
                    s += row[j] * (u[j] / p[j]).ln();
                }
            }
        }
        Ok(s)
    }

    fn priced(&self, b: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_spend(b)?;
        let p = self.prices(b);
        if let Some(j) = p.iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain(format!("good {j} has no spend, so its allocation is undefined")));
        }
        Ok(p)
    }

    /// Proportional Response: `b′_ij = u_ij x_ij / Σ_k u_ik x_ik · Bᵢ`.
    pub fn pr_step(&self, b: &[Vec<f64>]) -> Result<Spend> {
        let p = self.priced(b)?;
        Ok(pr_step_priced(&self.utilities, &self.budgets, b, &p))
    }

    /// The same step computed as entropic mirror descent with unit step on
    /// the per-dollar utilities `u_ij / p_j` passed through `v ↦ log v − 1`.
    pub fn pr_step_via_md(&self, b: &[Vec<f64>]) -> Result<Spend> {
        let p = self.priced(b)?;
        let reg = Regularizer::NegativeEntropy;
        b.iter()
            .zip(&self.utilities)
            .enumerate()
            .map(|(i, (row, u))| {
                let bi = self.budget(i);
                let bang: Vec<f64> = u.iter().zip(&p).map(|(uj, pj)| uj / pj).collect();
                let g = Transform::LogShift.apply(&bang)?;
                let x: Vec<f64> = row.iter().map(|v| v / bi).collect();
                Ok(reg.prox(&x, &g, 1.0)?.into_iter().map(|v| v * bi).collect())
            })
            .collect()
    }

    /// `maxᵢ (max_j u_ij/p_j − Σ_j b_ij (u_ij/p_j) / Bᵢ)`; zero exactly at
    /// equilibrium, infinite when a good is unsold.
    pub fn equilibrium_residual(&self, b: &[Vec<f64>]) -> Result<f64> {
        self.check_spend(b)?;
        let p = self.prices(b);
        if p.iter().any(|&v| v <= 0.0) {
            return Ok(f64::INFINITY);
        }
        let mut worst: f64 = 0.0;
        for (i, (row, u)) in b.iter().zip(&self.utilities).enumerate() {
            let bang: Vec<f64> = u.iter().zip(&p).map(|(uj, pj)| uj / pj).collect();
            let best = bang.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let got: f64 = row.iter().zip(&bang).map(|(v, k)| v * k).sum::<f64>() / self.budget(i);
            worst = worst.max(best - got);
        }
        Ok(worst)
    }
}

fn pr_step_priced(u: &[Vec<f64>], budgets: &[f64], b: &[Vec<f64>], p: &[f64]) -> Spend {
    b.iter()
        .zip(u)
        .enumerate()
        .map(|(i, (row, ui))| {
            let bi = budgets.get(i).copied().unwrap_or(1.0);
            let w: Vec<f64> = row.iter().zip(ui).zip(p).map(|((v, uj), pj)| uj * v / pj).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s * bi).collect()
        })
        .collect()
}

/// `Σ_j a_j log(a_j / b_j)` with spends floored at [`SPEND_FLOOR`].
pub fn spend_kl(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| x * (x / y.max(SPEND_FLOOR)).ln())
        .sum()
}

/// Random market with utilities in `[0.1, 1]` and unit budgets.
pub fn random_market<R: Rng>(rng: &mut R, buyers: usize, goods: usize) -> Result<FisherMarket> {
    let u = (0..buyers).map(|_| (0..goods).map(|_| rng.gen_range(0.1..=1.0)).collect()).collect();
    FisherMarket::new(u, None)
}

/// A Proportional Response trajectory.
#[derive(Clone, Debug)]
pub struct PrRun {
    /// `b[t]` for `t = 0..=T`
    pub b: Vec<Spend>,
    pub phi: Vec<f64>,
    pub residual: Vec<f64>,
    /// `Φ(b⁽ᵗ⁺¹⁾) − Φ(b⁽ᵗ⁾)` per step, tolerance 1e-10
    pub monotone: AuditReport,
}

impl PrRun {
    pub fn horizon(&self) -> usize {
        self.b.len() - 1
    }
}

pub fn run_pr(market: &FisherMarket, b0: Spend, horizon: usize) -> Result<PrRun> {
    let mut b = vec![b0];
    let mut phi = vec![market.shmyrev_objective(&b[0])?];
    let mut residual = vec![market.equilibrium_residual(&b[0])?];
    for t in 0..horizon {
        let next = market.pr_step(&b[t]).map_err(|e| Error::Step { step: t + 1, source: Box::new(e) })?;
        phi.push(market.shmyrev_objective(&next)?);
        residual.push(market.equilibrium_residual(&next)?);
        b.push(next);
    }
    let steps = (0..horizon).map(|t| (t, phi[t + 1] - phi[t]));
    let monotone = AuditReport::from_slacks("shmyrev_monotone", steps.collect::<Vec<_>>().into_iter(), 1e-10);
    Ok(PrRun { b, phi, residual, monotone })
}

/// Long-run PR used as the equilibrium oracle. Fails when the residual is
/// still above `tol` after `steps` iterations.
pub fn pr_oracle(market: &FisherMarket, steps: usize, tol: f64) -> Result<Spend> {
    let (n, m) = (market.buyers(), market.goods());
    let u: Vec<f64> = market.utilities.iter().flatten().copied().collect();
    let budgets: Vec<f64> = (0..n).map(|i| market.budget(i)).collect();
    let mut b: Vec<f64> = market.uniform_spend().into_iter().flatten().collect();
    let mut p = vec![0.0; m];
    for _ in 0..steps {
        p.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            for j in 0..m {
                p[j] += b[i * m + j];
            }
        }
        for i in 0..n {
            let row = &mut b[i * m..(i + 1) * m];
            let mut s = 0.0;
            for j in 0..m {
                row[j] *= u[i * m + j] / p[j];
                // decaying spends would otherwise run through subnormals
                if row[j] < 1e-250 {
                    row[j] = 0.0;
                }
                s += row[j];
            }
            let k = budgets[i] / s;
            row.iter_mut().for_each(|v| *v *= k);
        }
    }
    let b: Spend = b.chunks(m).map(|r| r.to_vec()).collect();
    let r = market.equilibrium_residual(&b)?;
    if !(r <= tol) {
        return Err(Error::NotConverged(format!("PR oracle residual {r:e} after {steps} steps")));
    }
    Ok(b)
}

/// Slack of `Φ* − Φ(b⁽ᵀ⁺¹⁾) ≤ (2/T) Σᵢ KL(bᵢ*, bᵢ⁽¹⁾)` per `T`.
#[derive(Clone, Debug, Serialize)]
pub struct PrRateReport {
    /// index `T = 1..T_max−1`; entry 0 unused
    pub slacks: Vec<f64>,
    pub worst_slack: f64,
    /// `max_T T (Φ* − Φ(b⁽ᵀ⁺¹⁾)) / Σᵢ KL(bᵢ*, bᵢ⁽¹⁾)`; the certificate allows 2
    pub max_ratio: f64,
    pub pass: bool,
}

pub fn pr_rate_certificate(market: &FisherMarket, run: &PrRun, b_star: &[Vec<f64>]) -> Result<PrRateReport> {
    if run.horizon() < 2 {
        return Err(Error::Config("rate certificate needs at least two steps".into()));
    }
    let phi_star = market.shmyrev_objective(b_star)?;
    let div: f64 = b_star.iter().zip(&run.b[1]).map(|(a, b)| spend_kl(a, b)).sum();
    let slacks = concave_rate_slacks(&run.phi, phi_star, 2.0 * div);
    let worst_slack = slacks[1..].iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = if div > 0.0 {
        (1..slacks.len()).map(|t| t as f64 * (phi_star - run.phi[t + 1]) / div).fold(f64::NEG_INFINITY, f64::max)
    } else {
        0.0
    };
    Ok(PrRateReport { slacks, worst_slack, max_ratio, pass: worst_slack >= -1e-8 })
}

/// One CSV row per (iteration, buyer).
#[derive(Clone, Debug, Serialize)]
pub struct PrCsvRow {
    pub iter: usize,
    pub buyer: usize,
    pub spend: String,
    pub phi: f64,
    pub residual: f64,
}

impl PrRun {
    pub fn csv_rows(&self) -> Vec<PrCsvRow> {
        let mut out = Vec::new();
        for (t, b) in self.b.iter().enumerate() {
            for (i, row) in b.iter().enumerate() {
                let spend = row.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(";");
                out.push(PrCsvRow { iter: t, buyer: i, spend, phi: self.phi[t], residual: self.residual[t] });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shmyrev_examples() {
        let m = FisherMarket::new(vec![vec![1.0]], None).unwrap();
        assert_eq!(m.shmyrev_objective(&[vec![1.0]]).unwrap(), 0.0);
        let m = FisherMarket::new(vec![vec![2.0, 1.0]], None).unwrap();
        let phi = m.shmyrev_objective(&[vec![2.0 / 3.0, 1.0 / 3.0]]).unwrap();
        assert!((phi - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn single_buyer_converges_in_one_step() {
        let m = FisherMarket::new(vec![vec![2.0, 1.0]], None).unwrap();
        let b1 = m.pr_step(&m.uniform_spend()).unwrap();
        assert!((b1[0][0] - 2.0 / 3.0).abs() < 1e-15 && (b1[0][1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.pr_step(&b1).unwrap(), b1);
        assert!(m.equilibrium_residual(&b1).unwrap() < 1e-15);
    }

    #[test]
    fn symmetric_market_fixed_point() {
        let m = FisherMarket::new(vec![vec![0.7; 3]; 3], None).unwrap();
        let b = m.uniform_spend();
        let b1 = m.pr_step(&b).unwrap();
        for (r, s) in b.iter().zip(&b1) {
            for (x, y) in r.iter().zip(s) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_by_two_specialises() {
        let m = FisherMarket::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]], Some(vec![1.0, 1.0])).unwrap();
        assert!(m.equilibrium_residual(&m.uniform_spend()).unwrap() > 0.0);
        let run = run_pr(&m, m.uniform_spend(), 200).unwrap();
        let b = &run.b[200];
        assert!(b[0][1] > 0.999 && b[1][0] > 0.999);
        assert!(run.residual[200] < 1e-6);
        assert!(run.monotone.pass);
    }

    #[test]
    fn pr_matches_mirror_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = random_market(&mut rng, 3, 4).unwrap();
            let b: Spend = (0..3).map(|_| crate::learners::random_simplex_point(&mut rng, 4)).collect();
            let a = m.pr_step(&b).unwrap();
            let c = m.pr_step_via_md(&b).unwrap();
            for (r, s) in a.iter().zip(&c) {
                for (x, y) in r.iter().zip(s) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn clearing_and_budgets_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = FisherMarket::new(
            (0..3).map(|_| (0..4).map(|_| rng.gen_range(0.1..1.0)).collect()).collect(),
            Some(vec![1.0, 2.0, 0.5]),
        )
        .unwrap();
        let run = run_pr(&m, m.uniform_spend(), 500).unwrap();
        for b in &run.b {
            let x = m.allocation(b);
            for j in 0..4 {
                assert!((x.iter().map(|r| r[j]).sum::<f64>() - 1.0).abs() < 1e-12);
            }
            for (i, r) in b.iter().enumerate() {
                assert!((r.iter().sum::<f64>() - m.budget(i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_buyer_rate_envelope() {
        let m = FisherMarket::new(vec![vec![0.3, 0.9, 0.5]], None).unwrap();
        let total: f64 = m.utilities[0].iter().sum();
        let b_star = vec![m.utilities[0].iter().map(|u| u / total).collect::<Vec<_>>()];
        // from a skewed start the optimum is reached at b⁽¹⁾, so every slack equals the bound
        let run = run_pr(&m, vec![vec![0.8, 0.1, 0.1]], 10).unwrap();
        let rep = pr_rate_certificate(&m, &run, &b_star).unwrap();
        assert!(rep.pass);
        let rep = pr_rate_certificate(&m, &run_pr(&m, b_star.clone(), 5).unwrap(), &b_star).unwrap();
        assert!(rep.slacks[1..].iter().all(|&s| s.abs() < 1e-15));
    }

    #[test]
    fn random_market_rate_and_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_market(&mut rng, 3, 4).unwrap();
        let b_star = pr_oracle(&m, 200_000, 1e-9).unwrap();
        let run = run_pr(&m, m.uniform_spend(), 2000).unwrap();
        assert!(run.monotone.pass);
        let rep = pr_rate_certificate(&m, &run, &b_star).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn json_round_trip_defaults_budgets() {
        let m: FisherMarket = serde_json::from_str(r#"{"utilities": [[1.0, 2.0]]}"#).unwrap();
        m.validate().unwrap();
        assert_eq!(m.budget(0), 1.0);
        assert!(FisherMarket::new(vec![vec![1.0, 0.0]], None).is_err());
    }
}
