//! Regret, path length, RVU audits, gaps and welfare certificates computed
//! from run logs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{NormalFormGame, SmoothnessParams};
use crate::learners::{Algorithm, LearnerConfig, Prediction, RunLog};
use crate::regularizers::{diff, norm1, norm2, norm_inf, NormPair, Regularizer};

/// Per-player cumulative regret for every prefix `T = 0..=horizon`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RegretReport {
    /// `per_player[i][T]`, with `per_player[i][0] = 0`
    pub per_player: Vec<Vec<f64>>,
    /// hindsight-best pure action at the full horizon
    pub best_action: Vec<usize>,
    /// signed sum over players, per prefix
    pub sum: Vec<f64>,
}

impl RegretReport {
    pub fn final_regret(&self, i: usize) -> f64 {
        *self.per_player[i].last().unwrap_or(&0.0)
    }

    pub fn max_regret(&self, i: usize) -> f64 {
        self.per_player[i].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum of `Σᵢ wᵢ Regᵢᵀ` over prefixes `T ≥ 1`.
    pub fn min_weighted_sum(&self, w: &[f64]) -> f64 {
        let horizon = self.per_player.first().map_or(0, |v| v.len());
        (1..horizon)
            .map(|t| self.per_player.iter().zip(w).map(|(r, wi)| wi * r[t]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}

/// External regret of one player over rounds `1..=T` for every prefix.
/// `u[t]`, `x[t]` for `t = 0..=T`; round 0 is not counted.
pub fn external_regret(u: &[&[f64]], x: &[&[f64]]) -> (Vec<f64>, usize) {
    let d = u.first().map_or(0, |v| v.len());
    let mut cum = vec![0.0; d];
    let mut got = 0.0;
    let mut out = Vec::with_capacity(u.len());
    out.push(0.0);
    for t in 1..u.len() {
        for (c, v) in cum.iter_mut().zip(u[t]) {
            *c += v;
        }
        got += crate::game::dot(x[t], u[t]);
        let best = cum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(best - got);
    }
    let arg = (0..d).fold(0, |b, k| if cum[k] > cum[b] { k } else { b });
    (out, arg)
}

/// Regret of every player against the raw game utilities in `log`.
pub fn regret_report(log: &RunLog) -> RegretReport {
    let n = log.num_players();
    let mut rep = RegretReport::default();
    for i in 0..n {
        let (r, a) = external_regret(&log.player_u(i), &log.player_x(i));
        rep.per_player.push(r);
        rep.best_action.push(a);
    }
    let len = log.x.len();
    rep.sum = (0..len).map(|t| rep.per_player.iter().map(|r| r[t]).sum()).collect();
    rep
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathNorm {
    L1,
    L2,
}

/// Prefix sums of `‖x⁽ᵗ⁾ − x⁽ᵗ⁻¹⁾‖²`, index `T = 0..=horizon`.
pub fn path_length_sq(x: &[&[f64]], norm: PathNorm) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for t in 1..x.len() {
        let dx = diff(x[t], x[t - 1]);
        let v = match norm {
            PathNorm::L1 => norm1(&dx),
            PathNorm::L2 => norm2(&dx),
        };
        acc += v * v;
        out.push(acc);
    }
    out
}

/// `Σᵢ Σₜ ‖Δxᵢ‖²` over all players of a log.
pub fn total_path_length_sq(log: &RunLog, norm: PathNorm) -> f64 {
    (0..log.num_players())
        .map(|i| *path_length_sq(&log.player_x(i), norm).last().unwrap_or(&0.0))
        .sum()
}

/// Declared `(α, β, γ)` of an RVU bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RvuParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub norm: NormPair,
}

impl RvuParams {
    /// Cor. bound on individual regret: `α + 2n(n−1)αβ/γ`.
    pub fn individual_regret_bound(&self, n: usize) -> f64 {
        let n = n as f64;
        self.alpha + 2.0 * n * (n - 1.0) * self.alpha * self.beta / self.gamma
    }
}

/// `γᵢ ≥ 2(n−1) Σ_{j≠i} βⱼ` for every player.
pub fn rvu_condition(params: &[RvuParams]) -> bool {
    let n = params.len();
    let total: f64 = params.iter().map(|p| p.beta).sum();
    params
        .iter()
        .all(|p| p.gamma >= 2.0 * (n as f64 - 1.0) * (total - p.beta) * (1.0 - 1e-12))
}

/// `max_x D(x, x0)` over the simplex; D is convex in `x`, so a vertex attains it.
pub fn omega_from(reg: Regularizer, x0: &[f64]) -> f64 {
    let d = x0.len();
    (0..d)
        .map(|k| {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            reg.bregman(&e, x0).unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

/// RVU parameters a learner started at `x0` is known to satisfy, in the
/// norm pair native to its regularizer. `None` when no bound is declared.
pub fn declared_rvu(cfg: &LearnerConfig, x0: &[f64]) -> Option<RvuParams> {
    let eta = cfg.eta;
    let omega = omega_from(cfg.regularizer, x0);
    let norm = cfg.regularizer.norm_pair();
    let p = |alpha: f64, beta: f64, gamma: f64| Some(RvuParams { alpha, beta, gamma, norm });
    // the OFTRL bounds assume play starts at the regularizer's minimiser
    let d = x0.len() as f64;
    let uniform_start = x0.iter().all(|v| (v - 1.0 / d).abs() <= 1e-12);
    match (cfg.algorithm, cfg.prediction) {
        (Algorithm::Oftrl, _) if !uniform_start => None,
        (Algorithm::Oftrl, Prediction::OneStep) => p(omega / eta, eta, 1.0 / (4.0 * eta)),
        (Algorithm::Oftrl, Prediction::HStep { h }) => p(omega / eta, eta * (h * h) as f64, 1.0 / (4.0 * eta)),
        (Algorithm::Oftrl, Prediction::Discounted { delta }) => {
            p(omega / eta, eta / (1.0 - delta).powi(3), 1.0 / (8.0 * eta))
        }
        (Algorithm::Omd, Prediction::OneStep) => p(omega / eta, eta, 1.0 / (8.0 * eta)),
        // OMWU is entropic OMD whose secondary iterate starts at
        // x̂⁰ ∝ x⁰·exp(−η u⁰): KL(x, x̂⁰) ≤ KL(x, x⁰) + 2η‖u⁰‖∞
        (Algorithm::Omwu, Prediction::OneStep) => p(omega / eta + 2.0, eta, 1.0 / (8.0 * eta)),
        _ => None,
    }
}

/// Result of a prefix-wise inequality audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub check: String,
    pub pass: bool,
    /// minimum of (bound − measured) over prefixes
    pub worst_slack: f64,
    /// prefix attaining the worst slack
    pub prefix: usize,
}

impl AuditReport {
    pub(crate) fn from_slacks(check: impl Into<String>, slacks: impl Iterator<Item = (usize, f64)>, tol: f64) -> Self {
        let (prefix, worst_slack) = slacks.fold((0, f64::INFINITY), |b, s| if s.1 < b.1 { s } else { b });
        Self { check: check.into(), pass: worst_slack >= -tol, worst_slack, prefix }
    }
}

/// Check `Regᵀ ≤ α + β Σ‖Δu‖*² − γ Σ‖Δx‖²` for every prefix `T ≥ 1`.
/// `regret[T]`, `u[t]`, `x[t]` indexed from 0.
pub fn rvu_audit(regret: &[f64], params: &RvuParams, u: &[&[f64]], x: &[&[f64]]) -> AuditReport {
    let mut du = 0.0;
    let mut dx = 0.0;
    let tol = 1e-9 * (1.0 + params.alpha.abs());
    let slacks = (1..u.len()).map(|t| {
        let a = params.norm.dual(&diff(u[t], u[t - 1]));
        let b = params.norm.primal(&diff(x[t], x[t - 1]));
        du += a * a;
        dx += b * b;
        (t, params.alpha + params.beta * du - params.gamma * dx - regret[t])
    });
    AuditReport::from_slacks("rvu", slacks.collect::<Vec<_>>().into_iter(), tol)
}

/// Declared RVU parameters of player `i` in a log.
pub fn declared_rvu_for(log: &RunLog, i: usize) -> Option<RvuParams> {
    declared_rvu(&log.configs[i], &log.x[0][i])
}

/// RVU audit of player `i` against the utilities it actually observed.
pub fn rvu_audit_player(log: &RunLog, i: usize, params: &RvuParams) -> Result<AuditReport> {
    let t = log.configs[i].transform;
    let seen: Vec<Vec<f64>> = log.u.iter().map(|p| t.apply(&p[i])).collect::<Result<_>>()?;
    let seen_ref: Vec<&[f64]> = seen.iter().map(|v| v.as_slice()).collect();
    let xs = log.player_x(i);
    let (reg, _) = external_regret(&seen_ref, &xs);
    let mut rep = rvu_audit(&reg, params, &seen_ref, &xs);
    rep.check = format!("rvu[player {i}]");
    Ok(rep)
}

/// `‖Δuᵢ‖∞ ≤ Σ_{j≠i} ‖Δxⱼ‖₁` at every step (utilities in [-1,1]).
pub fn utility_variation_audit(log: &RunLog) -> AuditReport {
    let n = log.num_players();
    let mut slacks = Vec::new();
    for t in 1..log.x.len() {
        let dx: Vec<f64> = (0..n).map(|j| norm1(&diff(&log.x[t][j], &log.x[t - 1][j]))).collect();
        let total: f64 = dx.iter().sum();
        for i in 0..n {
            let du = norm_inf(&diff(&log.u[t][i], &log.u[t - 1][i]));
            slacks.push((t, total - dx[i] - du));
        }
    }
    AuditReport::from_slacks("utility_variation", slacks.into_iter(), 1e-12)
}

/// `max_{y'} xᵀAy' − min_{x'} x'ᵀAy` for `min_x max_y xᵀAy` on simplices.
pub fn saddle_point_gap(a: &[Vec<f64>], x: &[f64], y: &[f64]) -> Result<f64> {
    if a.len() != x.len() || a.iter().any(|r| r.len() != y.len()) {
        return Err(Error::Dimension("saddle gap: matrix does not match strategies".into()));
    }
    let ay: Vec<f64> = a.iter().map(|r| crate::game::dot(r, y)).collect();
    let m = y.len();
    let atx: Vec<f64> = (0..m).map(|j| a.iter().zip(x).map(|(r, xi)| r[j] * xi).sum()).collect();
    let best_y = atx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best_x = ay.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((best_y - best_x).max(0.0))
}

/// `Σᵢ (‖xᵢ⁽ᵗ⁾ − x̂ᵢ⁽ᵗ⁾‖₂² + ‖xᵢ⁽ᵗ⁾ − x̂ᵢ⁽ᵗ⁻¹⁾‖₂²)` for `t = 1..=T` (index 0 unused).
pub fn proximal_residual(log: &RunLog) -> Vec<f64> {
    let mut out = vec![f64::NAN];
    for t in 1..log.x.len() {
        let mut s = 0.0;
        for i in 0..log.num_players() {
            let a = norm2(&diff(&log.x[t][i], &log.xhat[t][i]));
            let b = norm2(&diff(&log.x[t][i], &log.xhat[t - 1][i]));
            s += a * a + b * b;
        }
        out.push(s);
    }
    out
}

/// Constants of the ℓ₂ near-equilibrium bound for OMD with smooth
/// regularizers: returns `C* + 2 max(Gᵢ Ω′ᵢ)/η` (multiply by ε).
pub fn near_nash_factor(log: &RunLog) -> Result<f64> {
    let dmax = *log.dims.iter().max().unwrap_or(&1) as f64;
    let c_star = dmax.sqrt();
    let mut worst: f64 = 0.0;
    let mut eta = f64::INFINITY;
    for c in &log.configs {
        if c.algorithm != Algorithm::Omd {
            return Err(Error::Config("near-equilibrium certificate needs OMD learners".into()));
        }
        let g = c
            .regularizer
            .smoothness()
            .ok_or_else(|| Error::Config("near-equilibrium certificate needs smooth regularizers".into()))?;
        worst = worst.max(g * std::f64::consts::SQRT_2);
        eta = eta.min(c.eta);
    }
    Ok(c_star + 2.0 * worst / eta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LastIterateReport {
    pub epsilon: f64,
    /// `⌈8 Σ Ωᵢ / ε²⌉`
    pub t_bound: usize,
    /// first `t ≥ 1` with residual ≤ ε²
    pub found_at: Option<usize>,
    pub residual: f64,
    pub gap_bound: f64,
    pub measured_gap: f64,
    pub pass: bool,
}

/// Search for an iterate whose proximal residual is at most `ε²` within
/// `⌈8ΣΩᵢ/ε²⌉` rounds and compare its Nash gap to the implied bound.
pub fn last_iterate_certificate(log: &RunLog, epsilon: f64) -> Result<LastIterateReport> {
    let factor = near_nash_factor(log)?;
    let omega: f64 = log
        .configs
        .iter()
        .zip(&log.dims)
        .map(|(c, &d)| c.regularizer.omega_full(d))
        .sum();
    let t_bound = (8.0 * omega / (epsilon * epsilon)).ceil() as usize;
    let res = proximal_residual(log);
    let limit = t_bound.min(log.horizon());
    let found_at = (1..=limit).find(|&t| res[t] <= epsilon * epsilon);
    let gap_bound = epsilon * factor;
    let (residual, measured_gap) = match found_at {
        Some(t) => (res[t], log.nash_gap[t]),
        None => (f64::NAN, f64::NAN),
    };
    Ok(LastIterateReport {
        epsilon,
        t_bound,
        found_at,
        residual,
        gap_bound,
        measured_gap,
        pass: found_at.is_some() && measured_gap <= gap_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub required_t: usize,
    /// `(t, residual, measured gap, gap bound)` of the first near-stationary iterate
    pub branch1: Option<(usize, f64, f64, f64)>,
    pub avg_welfare: f64,
    pub welfare_bound: f64,
    pub branch2_holds: bool,
    /// worst slack of `avg sw ≥ ρ opt − (1/(1+μ)) ΣReg/T` over prefixes
    pub regret_welfare_slack: f64,
    pub holds: bool,
}

/// Either some iterate is γ-close to stationary (and hence near Nash), or
/// average welfare beats `ρ·opt + γ²/(16η(1+μ))`.
pub fn welfare_dichotomy_check(
    game: &NormalFormGame,
    log: &RunLog,
    params: SmoothnessParams,
    gamma: f64,
    opt: f64,
) -> Result<DichotomyReport> {
    let factor = near_nash_factor(log)?;
    let eta = log.configs.iter().map(|c| c.eta).fold(f64::INFINITY, f64::min);
    let omega: f64 = log
        .configs
        .iter()
        .zip(&log.dims)
        .map(|(c, &d)| c.regularizer.omega_full(d))
        .sum();
    let required_t = (16.0 * omega / (gamma * gamma)).ceil() as usize;
    let horizon = log.horizon();
    if horizon < required_t {
        return Err(Error::Config(format!("welfare dichotomy needs T >= {required_t}, run has {horizon}")));
    }
    let _ = game;
    let res = proximal_residual(log);
    let branch1 = (1..=horizon)
        .find(|&t| res[t] <= gamma * gamma)
        .map(|t| (t, res[t], log.nash_gap[t], gamma * factor));
    let avg_welfare = log.welfare[1..].iter().sum::<f64>() / horizon as f64;
    let rho = params.robust_poa();
    let welfare_bound = rho * opt + gamma * gamma / (16.0 * eta * (1.0 + params.mu));
    let branch2_holds = avg_welfare >= welfare_bound - 1e-12;

    let reg = regret_report(log);
    let mut sw = 0.0;
    let mut worst = f64::INFINITY;
    for t in 1..=horizon {
        sw += log.welfare[t];
        let lhs = sw / t as f64;
        let rhs = rho * opt - reg.sum[t] / (t as f64 * (1.0 + params.mu));
        worst = worst.min(lhs - rhs);
    }
    let b1_ok = branch1.map_or(false, |(_, _, g, b)| g <= b);
    Ok(DichotomyReport {
        required_t,
        branch1,
        avg_welfare,
        welfare_bound,
        branch2_holds,
        regret_welfare_slack: worst,
        holds: b1_ok || branch2_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Orientation, DEFAULT_ENUM_CAP};
    use crate::learners::{run_dynamics, Init};

    fn pennies() -> NormalFormGame {
        NormalFormGame::zero_sum(&[vec![1.0, -1.0], vec![-1.0, 1.0]], Orientation::Maximize).unwrap()
    }

    #[test]
    fn regret_examples() {
        let u0 = [0.0, 0.0];
        let u1 = [1.0, 0.0];
        let x = [0.5, 0.5];
        let (r, a) = external_regret(&[&u0, &u1], &[&x, &x]);
        assert_eq!(r, vec![0.0, 0.5]);
        assert_eq!(a, 0);
        let e = [1.0, 0.0];
        let us: Vec<&[f64]> = vec![&u1; 5];
        let xs: Vec<&[f64]> = vec![&e; 5];
        assert!(external_regret(&us, &xs).0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn path_length_examples() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        assert_eq!(path_length_sq(&[&a, &b], PathNorm::L1), vec![0.0, 4.0]);
        assert_eq!(path_length_sq(&[&a, &a, &a], PathNorm::L2), vec![0.0; 3]);
    }

    #[test]
    fn saddle_gap_examples() {
        let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        assert_eq!(saddle_point_gap(&a, &[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(saddle_point_gap(&a, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn rvu_audit_passes_for_omd_and_fails_with_inflated_gamma() {
        let g = pennies();
        let eta = 0.25;
        let c = LearnerConfig::omd(Regularizer::Euclidean, eta);
        let log = run_dynamics(&g, &[c, c], 2000, &Init::Random { seed: 2 }).unwrap();
        for i in 0..2 {
            let p = declared_rvu_for(&log, i).unwrap();
            assert!(rvu_audit_player(&log, i, &p).unwrap().pass);
        }
        // a large step makes the iterates oscillate; 10x gamma must break
        let c = LearnerConfig::omd(Regularizer::Euclidean, 1.0);
        let log = run_dynamics(&g, &[c, c], 200, &Init::Random { seed: 2 }).unwrap();
        let mut p = declared_rvu_for(&log, 0).unwrap();
        assert!(rvu_audit_player(&log, 0, &p).unwrap().pass);
        p.gamma *= 10.0;
        assert!(!rvu_audit_player(&log, 0, &p).unwrap().pass);
    }

    #[test]
    fn single_round_audit_is_trivial() {
        let g = pennies();
        let c = LearnerConfig::omd(Regularizer::Euclidean, 0.25);
        let log = run_dynamics(&g, &[c, c], 1, &Init::Uniform).unwrap();
        let rep = rvu_audit_player(&log, 0, &declared_rvu_for(&log, 0).unwrap()).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn utility_variation_holds() {
        let g = NormalFormGame::new(
            vec![2, 3, 2],
            (0..3).map(|i| (0..12).map(|k| (((k * 5 + i * 3) % 9) as f64) / 4.5 - 1.0).collect()).collect(),
            Orientation::Maximize,
        )
        .unwrap();
        let c = LearnerConfig::omd(Regularizer::NegativeEntropy, 0.3);
        let log = run_dynamics(&g, &[c, c, c], 500, &Init::Random { seed: 5 }).unwrap();
        assert!(utility_variation_audit(&log).pass);
    }

    #[test]
    fn omega_from_uniform_matches_closed_form() {
        for d in [2usize, 3, 7] {
            let u = vec![1.0 / d as f64; d];
            assert!((omega_from(Regularizer::Euclidean, &u) - 0.5 * (1.0 - 1.0 / d as f64)).abs() < 1e-12);
            assert!((omega_from(Regularizer::NegativeEntropy, &u) - (d as f64).ln()).abs() < 1e-12);
        }
        assert!((omega_from(Regularizer::Euclidean, &[1.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rvu_condition_check() {
        let p = RvuParams { alpha: 1.0, beta: 0.25, gamma: 0.5, norm: NormPair::L1Linf };
        assert!(rvu_condition(&[p, p]));
        let q = RvuParams { gamma: 0.4, ..p };
        assert!(!rvu_condition(&[q, q]));
        // Cor. bound at η = 1/(4(n−1)) is at most 8nΩ
        let eta = 0.25;
        let omega = 0.5f64;
        let r = RvuParams { alpha: omega / eta, beta: eta, gamma: 1.0 / (8.0 * eta), norm: NormPair::L1Linf };
        assert!(r.individual_regret_bound(2) <= 16.0 * omega + 1e-12);
    }

    #[test]
    fn dichotomy_at_exact_equilibrium_takes_branch_one_immediately() {
        let m = vec![vec![1.0, 0.0], vec![0.0, 0.5]];
        let g = NormalFormGame::bimatrix(&m, &m, Orientation::Maximize).unwrap();
        let c = LearnerConfig::omd(Regularizer::Euclidean, 1.0 / 8.0);
        let gamma = 0.5;
        let t = (16.0 * 2.0 / (gamma * gamma)) as usize;
        let log = run_dynamics(&g, &[c, c], t, &Init::Given { profile: vec![vec![1.0, 0.0], vec![1.0, 0.0]] }).unwrap();
        let opt = g.optimal_welfare(DEFAULT_ENUM_CAP).unwrap().0;
        let rep = welfare_dichotomy_check(&g, &log, SmoothnessParams::new(1.0, 1.0).unwrap(), gamma, opt).unwrap();
        assert_eq!(rep.branch1.map(|b| b.0), Some(1));
        assert!(rep.holds);
        assert!(rep.regret_welfare_slack >= -1e-9);
        let short = run_dynamics(&g, &[c, c], 10, &Init::Uniform).unwrap();
        assert!(welfare_dichotomy_check(&g, &short, SmoothnessParams::new(1.0, 1.0).unwrap(), gamma, opt).is_err());
    }
}
