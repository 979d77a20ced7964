//! Weighted and near-potential games: the mixed-extension potential, mirror
//! descent and OMWU dynamics, and the monotonicity / rate certificates that
//! go with them.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{dot, NormalFormGame, Orientation, Profile};
use crate::learners::{run_dynamics, Init, LearnerConfig, RunLog, Transform};
use crate::metrics::{external_regret, omega_from, AuditReport};
use crate::regularizers::{diff, norm1, norm2, Regularizer};

/// Tolerance of the per-step monotonicity certificates.
pub const STEP_TOL: f64 = 1e-9;

/// A game with a pure potential `Φ` such that every unilateral deviation
/// changes `Φ` by `wᵢ` times the deviator's utility change.
#[derive(Clone, Debug)]
pub struct PotentialGame {
    game: NormalFormGame,
    phi: Vec<f64>,
    weights: Vec<f64>,
    phi_max: f64,
    // Φ copied into every player's slot; its utility vectors are ∇Φ
    phi_eval: NormalFormGame,
}

impl PotentialGame {
    /// Wrap `game` with potential table `phi` (indexed like the game's
    /// tensors) and weights `w`. The deviation identity is checked on every
    /// profile.
    pub fn new(game: NormalFormGame, phi: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = game.num_players();
        if phi.len() != game.num_profiles() {
            return Err(Error::Dimension(format!("potential has {} entries, game {}", phi.len(), game.num_profiles())));
        }
        if weights.len() != n {
            return Err(Error::Dimension(format!("{} weights for {n} players", weights.len())));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Domain("potential weights must be positive".into()));
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("potential table".into()));
        }
        let phi_max = phi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = 1e-9 * (1.0 + phi_max);
        for idx in 0..game.num_profiles() {
            let a = game.profile_of(idx);
            for i in 0..n {
                let u = game.tensor(i);
                for ai in 0..game.action_counts()[i] {
                    if ai == a[i] {
                        continue;
                    }
                    let dev = game.deviate(idx, i, ai);
                    let miss = (phi[idx] - phi[dev]) - weights[i] * (u[idx] - u[dev]);
                    if miss.abs() > tol {
                        return Err(Error::Domain(format!(
                            "not a weighted potential: player {i} deviating {a:?} -> {ai} misses by {miss:e}"
                        )));
                    }
                }
            }
        }
        let phi_eval = NormalFormGame::unscaled(game.action_counts().to_vec(), vec![phi.clone(); n])?;
        Ok(Self { game, phi, weights, phi_max, phi_eval })
    }

    /// Build the game `uᵢ = (Φ + hᵢ)/wᵢ` from a potential, per-player
    /// offsets `hᵢ` that must not depend on player `i`'s own action, and
    /// weights. Any rescaling of the utilities is folded into the weights.
    pub fn from_potential(counts: Vec<usize>, phi: Vec<f64>, offsets: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        if offsets.len() != counts.len() || weights.len() != counts.len() {
            return Err(Error::Dimension("one offset table and weight per player".into()));
        }
        let utils = offsets
            .iter()
            .zip(weights)
            .map(|(h, w)| {
                if h.len() != phi.len() {
                    return Err(Error::Dimension("offset table size".into()));
                }
                Ok(phi.iter().zip(h).map(|(p, hv)| (p + hv) / w).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let game = NormalFormGame::new(counts, utils, Orientation::Maximize)?;
        let w: Vec<f64> = weights.iter().zip(game.scales()).map(|(w, s)| w / s).collect();
        Self::new(game, phi, w)
    }

    pub fn game(&self) -> &NormalFormGame {
        &self.game
    }

    pub fn phi_table(&self) -> &[f64] {
        &self.phi
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn phi_max(&self) -> f64 {
        self.phi_max
    }

    /// `L = ½ Φmax Σᵢ |Aᵢ|`.
    pub fn lipschitz_constant(&self) -> f64 {
        0.5 * self.phi_max * self.game.action_counts().iter().sum::<usize>() as f64
    }

    /// Default mirror-descent step `1/(2L)`.
    pub fn md_eta(&self) -> Result<f64> {
        let l = self.lipschitz_constant();
        if l <= 0.0 {
            return Err(Error::Config("potential is identically zero; no step size is implied".into()));
        }
        Ok(1.0 / (2.0 * l))
    }

    /// `Φ(x) = E_{a∼x} Φ(a)`.
    pub fn mixed_potential(&self, x: &[Vec<f64>]) -> Result<f64> {
        let g = self.phi_eval.utility_vector(0, x)?;
        Ok(dot(&g, &x[0]))
    }

    /// `∂Φ/∂xᵢ(aᵢ) = E_{a₋ᵢ} Φ(aᵢ, a₋ᵢ)` for every player.
    pub fn mixed_potential_gradient(&self, x: &[Vec<f64>]) -> Result<Profile> {
        self.phi_eval.utility_vectors(x)
    }

    /// Largest deviation from `∇ᵢΦ(x) = wᵢ uᵢ(·, x₋ᵢ)` at `x`, up to a
    /// constant shift per player (the offset `E hᵢ(a₋ᵢ)`, invisible on the
    /// simplex).
    pub fn gradient_identity_error(&self, x: &[Vec<f64>]) -> Result<f64> {
        let g = self.mixed_potential_gradient(x)?;
        let u = self.game.utility_vectors(x)?;
        let mut worst: f64 = 0.0;
        for ((gi, ui), w) in g.iter().zip(&u).zip(&self.weights) {
            let d: Vec<f64> = gi.iter().zip(ui).map(|(a, b)| a - w * b).collect();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            worst = d.iter().fold(worst, |m, v| m.max((v - mean).abs()));
        }
        Ok(worst)
    }

    /// Both one-sided smoothness inequalities
    /// `|Φ(x̃) − Φ(x) − ⟨∇Φ(x), x̃ − x⟩| ≤ L‖x̃ − x‖₂²` on random pairs.
    pub fn smoothness_audit<R: Rng>(&self, rng: &mut R, samples: usize) -> Result<AuditReport> {
        let l = self.lipschitz_constant();
        let dims = self.game.action_counts().to_vec();
        let mut slacks = Vec::with_capacity(2 * samples);
        for k in 0..samples {
            let x = random_profile(rng, &dims);
            let y = random_profile(rng, &dims);
            let (px, py) = (self.mixed_potential(&x)?, self.mixed_potential(&y)?);
            let g = self.mixed_potential_gradient(&x)?;
            let lin: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| dot(gi, &diff(yi, xi))).sum();
            let d2 = profile_dist_sq(&y, &x);
            slacks.push((k, px + lin + l * d2 - py));
            slacks.push((k, py - px - lin + l * d2));
        }
        Ok(AuditReport::from_slacks("one_sided_smoothness", slacks.into_iter(), 1e-12))
    }

    /// Midpoint concavity test of the mixed potential on random pairs.
    pub fn is_concave<R: Rng>(&self, rng: &mut R, samples: usize) -> Result<bool> {
        let dims = self.game.action_counts().to_vec();
        for _ in 0..samples {
            let x = random_profile(rng, &dims);
            let y = random_profile(rng, &dims);
            let m: Profile = x
                .iter()
                .zip(&y)
                .map(|(a, b)| a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect())
                .collect();
            let lhs = self.mixed_potential(&m)?;
            let rhs = 0.5 * (self.mixed_potential(&x)? + self.mixed_potential(&y)?);
            if lhs < rhs - STEP_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Maximiser of the potential. A multilinear function attains its
    /// maximum over a product of simplices at a vertex.
    pub fn best_pure_profile(&self) -> (f64, Vec<usize>) {
        let (idx, v) = self
            .phi
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (k, &v)| if v > b.1 { (k, v) } else { b });
        (v, self.game.profile_of(idx))
    }
}

fn random_profile<R: Rng>(rng: &mut R, dims: &[usize]) -> Profile {
    dims.iter().map(|&d| crate::learners::random_simplex_point(rng, d)).collect()
}

fn profile_dist_sq(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| norm2(&diff(x, y)).powi(2)).sum()
}

fn phi_series(pg: &PotentialGame, log: &RunLog) -> Result<Vec<f64>> {
    log.x.iter().map(|x| pg.mixed_potential(x)).collect()
}

/// Random weighted potential game: `Φ, hᵢ ∈ [−½, ½]`, `wᵢ ∈ [1, 3]`, so
/// `|wᵢuᵢ| ≤ 1` and no rescaling happens.
pub fn random_weighted_potential<R: Rng>(rng: &mut R, counts: &[usize]) -> Result<PotentialGame> {
    let size: usize = counts.iter().product();
    let phi: Vec<f64> = (0..size).map(|_| rng.gen_range(-0.5..=0.5)).collect();
    let shape = NormalFormGame::unscaled(counts.to_vec(), vec![vec![0.0; size]; counts.len()])?;
    let offsets: Vec<Vec<f64>> = (0..counts.len())
        .map(|i| {
            let raw: Vec<f64> = (0..size).map(|_| rng.gen_range(-0.5..=0.5)).collect();
            (0..size).map(|idx| raw[shape.deviate(idx, i, 0)]).collect()
        })
        .collect();
    let weights: Vec<f64> = counts.iter().map(|_| rng.gen_range(1.0..=3.0)).collect();
    PotentialGame::from_potential(counts.to_vec(), phi, &offsets, &weights)
}

/// Mirror descent run on a potential game with its potential series.
#[derive(Clone, Debug)]
pub struct PotentialRun {
    pub log: RunLog,
    pub eta: f64,
    /// `Φ(x⁽ᵗ⁾)` for `t = 0..=T`
    pub phi: Vec<f64>,
    /// `ΔΦ − (1/2η) Σᵢ‖Δxᵢ‖₂²` per step
    pub monotone: AuditReport,
    /// `2Φmax − (1/2η) Σₜ Σᵢ‖Δxᵢ‖₂²` per prefix
    pub cumulative: AuditReport,
}

/// Mirror descent at `η = 1/(2L)`, each player feeding back `wᵢuᵢ`.
pub fn run_md_potential(pg: &PotentialGame, regs: &[Regularizer], horizon: usize, init: &Init) -> Result<PotentialRun> {
    run_md_potential_with_eta(pg, regs, horizon, init, pg.md_eta()?)
}

/// [`run_md_potential`] with an explicit step. The certificates are only
/// guaranteed for `η ≤ 1/(2L)`; a violation is returned as an error.
pub fn run_md_potential_with_eta(
    pg: &PotentialGame,
    regs: &[Regularizer],
    horizon: usize,
    init: &Init,
    eta: f64,
) -> Result<PotentialRun> {
    if regs.len() != pg.game.num_players() {
        return Err(Error::Config(format!("{} regularizers for {} players", regs.len(), pg.game.num_players())));
    }
    let configs: Vec<LearnerConfig> = regs
        .iter()
        .zip(&pg.weights)
        .map(|(&r, &w)| LearnerConfig::md(r, eta).with_transform(Transform::Scale { w }))
        .collect();
    let log = run_dynamics(&pg.game, &configs, horizon, init)?;
    let phi = phi_series(pg, &log)?;
    let mut steps = Vec::with_capacity(horizon);
    let mut cum_slacks = Vec::with_capacity(horizon);
    let mut cum = 0.0;
    for t in 0..horizon {
        let d2 = profile_dist_sq(&log.x[t + 1], &log.x[t]);
        let slack = phi[t + 1] - phi[t] - d2 / (2.0 * eta);
        if slack < -STEP_TOL {
            return Err(Error::Certificate { step: t, what: "potential monotonicity".into(), slack });
        }
        steps.push((t, slack));
        cum += d2 / (2.0 * eta);
        let c = 2.0 * pg.phi_max - cum;
        if c < -STEP_TOL {
            return Err(Error::Certificate { step: t + 1, what: "cumulative path bound".into(), slack: c });
        }
        cum_slacks.push((t + 1, c));
    }
    let monotone = AuditReport::from_slacks("potential_monotone", steps.into_iter(), STEP_TOL);
    let cumulative = AuditReport::from_slacks("potential_path_bound", cum_slacks.into_iter(), STEP_TOL);
    Ok(PotentialRun { log, eta, phi, monotone, cumulative })
}

/// Near-stationary iterate located by [`md_rate_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateCertificate {
    pub epsilon: f64,
    /// `⌈4ηΦmax/ε²⌉ + 1`
    pub t_bound: usize,
    pub found_at: usize,
    /// `‖x⁽ᵗ⁺¹⁾ − x⁽ᵗ⁾‖₂` at the found iterate
    pub step_norm: f64,
    /// implied Nash gap; only for all-euclidean runs
    pub gap_bound: Option<f64>,
    pub measured_gap: f64,
}

/// Find `t ≤ ⌈4ηΦmax/ε²⌉ + 1` with `‖x⁽ᵗ⁺¹⁾ − x⁽ᵗ⁾‖₂ ≤ ε` and, for
/// euclidean players, the gap it implies:
/// `maxᵢ ε(√2/(η wᵢ) + √|Aᵢ|)`.
pub fn md_rate_certificate(pg: &PotentialGame, run: &PotentialRun, epsilon: f64) -> Result<RateCertificate> {
    if !(epsilon > 0.0) {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    let eta = run.eta;
    let t_bound = (4.0 * eta * pg.phi_max / (epsilon * epsilon)).ceil() as usize + 1;
    let log = &run.log;
    let limit = t_bound.min(log.horizon().saturating_sub(1));
    let hit = (0..=limit)
        .map(|t| (t, profile_dist_sq(&log.x[t + 1], &log.x[t]).sqrt()))
        .find(|&(_, s)| s <= epsilon);
    let Some((found_at, step_norm)) = hit else {
        if log.horizon() < t_bound + 1 {
            return Err(Error::Config(format!("run of {} steps is shorter than the bound {t_bound}", log.horizon())));
        }
        return Err(Error::Certificate {
            step: t_bound,
            what: "no near-stationary iterate within the rate bound".into(),
            slack: f64::NAN,
        });
    };
    let euclid = log.configs.iter().all(|c| c.regularizer == Regularizer::Euclidean);
    let gap_bound = euclid.then(|| {
        pg.weights
            .iter()
            .zip(pg.game.action_counts())
            .map(|(w, &d)| epsilon * (std::f64::consts::SQRT_2 / (eta * w) + (d as f64).sqrt()))
            .fold(0.0, f64::max)
    });
    Ok(RateCertificate { epsilon, t_bound, found_at, step_norm, gap_bound, measured_gap: log.nash_gap[found_at] })
}

/// `Regᵢᵀ ≤ Ωᵢ/η + Uᵢ √(T · 4ηΦmax)` for every prefix, with `Ωᵢ` measured
/// from `xᵢ⁽¹⁾` and `Uᵢ` the largest ℓ₂ norm of the fed-back utilities.
pub fn sqrt_regret_audit(pg: &PotentialGame, run: &PotentialRun) -> Result<Vec<AuditReport>> {
    let log = &run.log;
    if log.horizon() < 1 {
        return Err(Error::Config("regret audit needs at least one round".into()));
    }
    let path = 4.0 * run.eta * pg.phi_max;
    (0..log.num_players())
        .map(|i| {
            let cfg = &log.configs[i];
            let seen: Vec<Vec<f64>> = log.u.iter().map(|p| cfg.transform.apply(&p[i])).collect::<Result<_>>()?;
            let seen_ref: Vec<&[f64]> = seen.iter().map(|v| v.as_slice()).collect();
            let xs = log.player_x(i);
            let (reg, _) = external_regret(&seen_ref, &xs);
            let omega = omega_from(cfg.regularizer, &log.x[1][i]);
            let u_max = seen[1..].iter().map(|v| norm2(v)).fold(0.0, f64::max);
            let slacks = (1..reg.len()).map(|t| (t, omega / run.eta + u_max * (t as f64 * path).sqrt() - reg[t]));
            let mut rep = AuditReport::from_slacks("sqrt_regret", slacks.collect::<Vec<_>>().into_iter(), 1e-9);
            rep.check = format!("sqrt_regret[player {i}]");
            Ok(rep)
        })
        .collect()
}

/// `c/T − (Φ* − Φ(x⁽ᵀ⁺¹⁾))` for `T = 1..len−1` (index 0 unused).
pub fn concave_rate_slacks(phi: &[f64], phi_star: f64, c: f64) -> Vec<f64> {
    let mut out = vec![f64::NAN];
    for t in 1..phi.len().saturating_sub(1) {
        out.push(c / t as f64 - (phi_star - phi[t + 1]));
    }
    out
}

/// Slack of `Φ(x*) − Φ(x⁽ᵀ⁺¹⁾) ≤ (2L/T) Σᵢ D(xᵢ*, xᵢ⁽¹⁾)` for every `T`,
/// after certifying concavity of the mixed potential.
pub fn concave_rate_check<R: Rng>(
    pg: &PotentialGame,
    run: &PotentialRun,
    x_star: &[Vec<f64>],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !pg.is_concave(rng, 10_000)? {
        return Err(Error::Domain("mixed potential failed the midpoint concavity test".into()));
    }
    let log = &run.log;
    if log.horizon() < 2 {
        return Err(Error::Config("rate check needs at least two rounds".into()));
    }
    let mut div = 0.0;
    for (i, c) in log.configs.iter().enumerate() {
        div += c.regularizer.bregman(&x_star[i], &log.x[1][i])?;
    }
    let c = 2.0 * pg.lipschitz_constant() * div;
    Ok(concave_rate_slacks(&run.phi, pg.mixed_potential(x_star)?, c))
}

/// `η ≤ min{1/(2L), 1/(2√|Aᵢ|(n−1)), 1/(4Σ_{j≠i}√|Aⱼ|)}`.
pub fn omwu_eta(pg: &PotentialGame) -> Result<f64> {
    let counts = pg.game.action_counts();
    let n = counts.len();
    let roots: Vec<f64> = counts.iter().map(|&d| (d as f64).sqrt()).collect();
    let total: f64 = roots.iter().sum();
    let mut eta = pg.md_eta()?;
    for r in &roots {
        if n > 1 {
            eta = eta.min(1.0 / (2.0 * r * (n - 1) as f64));
            eta = eta.min(1.0 / (4.0 * (total - r)));
        }
    }
    Ok(eta)
}

/// OMWU run with its path and regret certificates.
#[derive(Clone, Debug)]
pub struct OmwuPotentialRun {
    pub log: RunLog,
    pub eta: f64,
    pub phi: Vec<f64>,
    /// `Σ_{s≤t} Σᵢ ‖xᵢ⁽ˢ⁾ − xᵢ⁽ˢ⁻¹⁾‖₂²` per prefix
    pub path: Vec<f64>,
    /// `16ηΦmax`
    pub path_bound: f64,
    /// `ΔΦ ≥ Σᵢ [(1/4η)‖Δᵢ⁽ᵗ⁺¹⁾‖² − ½(Σ_{j≠i}√|Aⱼ|)‖Δᵢ⁽ᵗ⁾‖²]` per step
    pub step_audit: AuditReport,
    /// per-player `α + η(n−1)·maxⱼ|Aⱼ|·16ηΦmax`
    pub regret_constant: Vec<f64>,
    /// same chain with the measured path length in place of its bound
    pub regret_constant_measured: Vec<f64>,
    /// per-player maximum regret over prefixes (fed-back utilities)
    pub max_regret: Vec<f64>,
}

/// OMWU at [`omwu_eta`]; utilities are fed back as `wᵢuᵢ`, which must stay
/// in [−1, 1].
pub fn omwu_potential_run(pg: &PotentialGame, horizon: usize, init: &Init) -> Result<OmwuPotentialRun> {
    let n = pg.game.num_players();
    for i in 0..n {
        let m = pg.game.tensor(i).iter().fold(0.0_f64, |m, v| m.max(v.abs())) * pg.weights[i];
        if m > 1.0 + 1e-12 {
            return Err(Error::Config(format!("weighted utilities of player {i} reach {m}, above 1")));
        }
    }
    let eta = omwu_eta(pg)?;
    let configs: Vec<LearnerConfig> =
        pg.weights.iter().map(|&w| LearnerConfig::omwu(eta).with_transform(Transform::Scale { w })).collect();
    let log = run_dynamics(&pg.game, &configs, horizon, init)?;
    let phi = phi_series(pg, &log)?;
    let counts = pg.game.action_counts();
    let roots: Vec<f64> = counts.iter().map(|&d| (d as f64).sqrt()).collect();
    let total_root: f64 = roots.iter().sum();

    let step_sq = |t: usize, i: usize| norm2(&diff(&log.x[t][i], &log.x[t - 1][i])).powi(2);
    let mut path = vec![0.0];
    for t in 1..=horizon {
        let s: f64 = (0..n).map(|i| step_sq(t, i)).sum();
        path.push(path[t - 1] + s);
    }
    let path_bound = 16.0 * eta * pg.phi_max;
    // (1/8η) Σ_{t≥2} ‖Δ‖² ≤ 2Φmax, with Δ⁽¹⁾ = 0
    if let Some(t) = (1..=horizon).find(|&t| path[t] > path_bound + STEP_TOL) {
        return Err(Error::Certificate { step: t, what: "OMWU path bound".into(), slack: path_bound - path[t] });
    }
    let steps = (1..horizon).map(|t| {
        let rhs: f64 =
            (0..n).map(|i| step_sq(t + 1, i) / (4.0 * eta) - 0.5 * (total_root - roots[i]) * step_sq(t, i)).sum();
        (t, phi[t + 1] - phi[t] - rhs)
    });
    let step_audit = AuditReport::from_slacks("omwu_potential_step", steps.collect::<Vec<_>>().into_iter(), STEP_TOL);

    let max_a = *counts.iter().max().unwrap_or(&1) as f64;
    let mut regret_constant = Vec::with_capacity(n);
    let mut regret_constant_measured = Vec::with_capacity(n);
    let mut max_regret = Vec::with_capacity(n);
    for i in 0..n {
        let seen: Vec<Vec<f64>> = log.u.iter().map(|p| configs[i].transform.apply(&p[i])).collect::<Result<_>>()?;
        let seen_ref: Vec<&[f64]> = seen.iter().map(|v| v.as_slice()).collect();
        let (reg, _) = external_regret(&seen_ref, &log.player_x(i));
        let alpha = omega_from(Regularizer::NegativeEntropy, &log.x[0][i]) / eta + 2.0;
        let k = eta * (n as f64 - 1.0) * max_a;
        regret_constant.push(alpha + k * path_bound);
        regret_constant_measured.push(alpha + k * path[horizon]);
        max_regret.push(reg.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(OmwuPotentialRun {
        log,
        eta,
        phi,
        path,
        path_bound,
        step_audit,
        regret_constant,
        regret_constant_measured,
        max_regret,
    })
}

/// A game `Γ` paired with a reference exact potential game `Γ̂`.
#[derive(Clone, Debug)]
pub struct NearPotentialSpec {
    pub game: NormalFormGame,
    pub reference: PotentialGame,
    /// MPD distance between the two games
    pub delta: f64,
    /// largest `|eᵢ|`, with `eᵢ = Φ − uᵢ` centred over own actions
    pub e_max: f64,
    /// `e_max / δ` (0 when `δ = 0`)
    pub c: f64,
}

impl NearPotentialSpec {
    /// The reference must have unit weights (its potential is exact).
    pub fn new(game: NormalFormGame, reference: PotentialGame) -> Result<Self> {
        if reference.weights.iter().any(|w| (w - 1.0).abs() > 1e-12) {
            return Err(Error::Config("near-potential reference must be an exact potential game".into()));
        }
        let delta = crate::classes::mpd_distance(&game, &reference.game)?;
        let mut e_max: f64 = 0.0;
        for i in 0..game.num_players() {
            let u = game.tensor(i);
            for idx in 0..game.num_profiles() {
                if game.profile_of(idx)[i] != 0 {
                    continue;
                }
                let vals: Vec<f64> = (0..game.action_counts()[i])
                    .map(|ai| {
                        let k = game.deviate(idx, i, ai);
                        reference.phi[k] - u[k]
                    })
                    .collect();
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                e_max = e_max.max(0.5 * (hi - lo));
            }
        }
        let c = if delta > 0.0 { e_max / delta } else { 0.0 };
        Ok(Self { game, reference, delta, e_max, c })
    }
}

#[derive(Clone, Debug)]
pub struct NearPotentialRun {
    pub log: RunLog,
    pub eta: f64,
    /// reference potential along the run
    pub phi: Vec<f64>,
    /// `2√(η n e_max)`
    pub threshold: f64,
    /// steps `t` with `‖x⁽ᵗ⁺¹⁾ − x⁽ᵗ⁾‖₂ ≥ threshold`
    pub events: Vec<usize>,
    /// minimum of `ΔΦ − (1/2η)‖Δ‖² + 2n·e_max` over the events
    pub worst_event_slack: f64,
}

/// Mirror descent on `Γ` at `η = 1/(2L̂)`; wherever the step is at least the
/// threshold, `ΔΦ̂ ≥ (1/2η)‖Δ‖² − 2n·e_max` is asserted.
pub fn near_potential_run(
    spec: &NearPotentialSpec,
    regs: &[Regularizer],
    horizon: usize,
    init: &Init,
) -> Result<NearPotentialRun> {
    let n = spec.game.num_players();
    if regs.len() != n {
        return Err(Error::Config(format!("{} regularizers for {n} players", regs.len())));
    }
    let eta = spec.reference.md_eta()?;
    let configs: Vec<LearnerConfig> = regs.iter().map(|&r| LearnerConfig::md(r, eta)).collect();
    let log = run_dynamics(&spec.game, &configs, horizon, init)?;
    let phi = phi_series(&spec.reference, &log)?;
    let slack_const = 2.0 * n as f64 * spec.e_max;
    let threshold = 2.0 * (eta * n as f64 * spec.e_max).sqrt();
    let mut events = Vec::new();
    let mut worst = f64::INFINITY;
    for t in 0..horizon {
        let d2 = profile_dist_sq(&log.x[t + 1], &log.x[t]);
        if d2.sqrt() >= threshold {
            let slack = phi[t + 1] - phi[t] - d2 / (2.0 * eta) + slack_const;
            if slack < -STEP_TOL {
                return Err(Error::Certificate { step: t, what: "near-potential increase".into(), slack });
            }
            events.push(t);
            worst = worst.min(slack);
        }
    }
    Ok(NearPotentialRun { log, eta, phi, threshold, events, worst_event_slack: worst })
}

/// `‖·‖₁` total variation of a profile step, used by reports.
pub fn profile_step_l1(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| norm1(&diff(x, y))).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coordination() -> PotentialGame {
        // identical-interest game: Φ = u₁ = u₂
        let phi = vec![1.0, 0.0, 0.0, 0.5];
        PotentialGame::from_potential(vec![2, 2], phi, &[vec![0.0; 4], vec![0.0; 4]], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn lipschitz_formula() {
        assert_eq!(coordination().lipschitz_constant(), 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let size = 24;
        let mut phi: Vec<f64> = (0..size).map(|_| rng.gen_range(-0.4..0.4)).collect();
        phi[5] = -0.5;
        let zeros = vec![vec![0.0; size]; 3];
        let pg = PotentialGame::from_potential(vec![2, 3, 4], phi, &zeros, &[1.0; 3]).unwrap();
        assert_eq!(pg.phi_max(), 0.5);
        assert_eq!(pg.lipschitz_constant(), 2.25);
    }

    #[test]
    fn construction_rejects_non_potential() {
        let g = NormalFormGame::bimatrix(&[vec![1.0, 0.0], vec![0.0, 0.0]], &[vec![0.0, 0.0], vec![0.0, 1.0]], Orientation::Maximize)
            .unwrap();
        assert!(PotentialGame::new(g, vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn rescaling_folds_into_weights() {
        // utilities up to 2 are halved; weights double to compensate
        let phi = vec![2.0, 0.0, 0.0, 1.0];
        let pg = PotentialGame::from_potential(vec![2, 2], phi, &[vec![0.0; 4], vec![0.0; 4]], &[1.0, 1.0]).unwrap();
        assert_eq!(pg.weights(), &[2.0, 2.0]);
    }

    #[test]
    fn pure_profile_gives_table_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pg = random_weighted_potential(&mut rng, &[2, 3, 2]).unwrap();
        for idx in 0..pg.game().num_profiles() {
            let a = pg.game().profile_of(idx);
            let x = pg.game().pure_profile(&a);
            assert!((pg.mixed_potential(&x).unwrap() - pg.phi_table()[idx]).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_identity_and_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let pg = random_weighted_potential(&mut rng, &[3, 2, 4]).unwrap();
            let x = random_profile(&mut rng, &[3, 2, 4]);
            assert!(pg.gradient_identity_error(&x).unwrap() < 1e-10);
            let g = pg.mixed_potential_gradient(&x).unwrap();
            let h = 1e-5;
            for i in 0..3 {
                for a in 0..x[i].len() {
                    // Φ is affine in each coordinate, so central differences are exact up to rounding
                    let mut p = x.clone();
                    let mut m = x.clone();
                    p[i][a] += h;
                    m[i][a] -= h;
                    let fd = (pg.mixed_potential(&p).unwrap() - pg.mixed_potential(&m).unwrap()) / (2.0 * h);
                    assert!((fd - g[i][a]).abs() < 1e-6, "fd {fd} vs {}", g[i][a]);
                }
            }
        }
    }

    #[test]
    fn smoothness_holds_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pg = random_weighted_potential(&mut rng, &[2, 3]).unwrap();
        assert!(pg.smoothness_audit(&mut rng, 10_000).unwrap().pass);
    }

    #[test]
    fn stationary_start_at_pure_equilibrium() {
        let pg = coordination();
        let init = Init::Given { profile: pg.game().pure_profile(&[0, 0]) };
        let run = run_md_potential(&pg, &[Regularizer::Euclidean; 2], 20, &init).unwrap();
        assert!(run.phi.iter().all(|&p| p == 1.0));
        let cert = md_rate_certificate(&pg, &run, 1e-3).unwrap();
        assert_eq!(cert.found_at, 0);
        let om = omwu_potential_run(&pg, 10, &init).unwrap();
        assert_eq!(om.path[10], 0.0);
    }

    #[test]
    fn potential_increases_from_uniform() {
        // battle-of-sexes style: both prefer to match, disagree on which
        let phi = vec![1.0, 0.0, 0.0, 1.0];
        let h0 = vec![0.0, 0.0, 0.0, 0.0];
        let h1 = vec![0.0, 0.0, 0.0, 0.0];
        let mut pg_phi = phi.clone();
        pg_phi[0] += 0.2; // break the tie toward (0, 0)
        let pg = PotentialGame::from_potential(vec![2, 2], pg_phi, &[h0, h1], &[1.0, 1.0]).unwrap();
        let run = run_md_potential(&pg, &[Regularizer::Euclidean; 2], 200, &Init::Uniform).unwrap();
        let first_still = (0..200).find(|&t| profile_dist_sq(&run.log.x[t + 1], &run.log.x[t]) < 1e-20).unwrap();
        assert!(first_still > 0);
        for t in 0..first_still {
            assert!(run.phi[t + 1] > run.phi[t]);
        }
        assert!(run.log.nash_gap[first_still] < 1e-9);
    }

    #[test]
    fn heterogeneous_regularizers_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let pg = random_weighted_potential(&mut rng, &[3, 4]).unwrap();
            let run = run_md_potential(
                &pg,
                &[Regularizer::Euclidean, Regularizer::NegativeEntropy],
                2000,
                &Init::Random { seed: rng.gen() },
            )
            .unwrap();
            assert!(run.monotone.pass && run.cumulative.pass);
            for rep in sqrt_regret_audit(&pg, &run).unwrap() {
                assert!(rep.pass, "{rep:?}");
            }
        }
    }

    #[test]
    fn rate_certificate_bounds_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pg = random_weighted_potential(&mut rng, &[3, 3]).unwrap();
        let eps = 0.01;
        let eta = pg.md_eta().unwrap();
        let bound = (4.0 * eta * pg.phi_max() / (eps * eps)).ceil() as usize + 1;
        let run = run_md_potential(&pg, &[Regularizer::Euclidean; 2], bound + 1, &Init::Uniform).unwrap();
        let cert = md_rate_certificate(&pg, &run, eps).unwrap();
        assert!(cert.found_at <= cert.t_bound);
        assert!(cert.measured_gap <= cert.gap_bound.unwrap());
    }

    #[test]
    fn large_step_violates_monotonicity() {
        // both players jump to match the other's old choice and miss again
        let pg = PotentialGame::from_potential(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0], &[vec![0.0; 4], vec![0.0; 4]], &[1.0, 1.0])
            .unwrap();
        let init = Init::Given { profile: vec![vec![0.9, 0.1], vec![0.1, 0.9]] };
        let eta = 20.0 * pg.md_eta().unwrap();
        let r = run_md_potential_with_eta(&pg, &[Regularizer::Euclidean; 2], 5, &init, eta);
        assert!(matches!(r, Err(Error::Certificate { step: 0, .. })), "{r:?}");
        assert!(run_md_potential(&pg, &[Regularizer::Euclidean; 2], 5, &init).is_ok());
    }

    #[test]
    fn linear_potential_rate() {
        // Φ(a) = f(a₀) + g(a₁) is linear in the mixed extension, hence concave
        let f = [0.1, -0.3, 0.2];
        let g = [0.25, -0.1];
        let phi: Vec<f64> = (0..6).map(|idx| f[idx / 2] + g[idx % 2]).collect();
        let pg = PotentialGame::from_potential(vec![3, 2], phi, &[vec![0.0; 6], vec![0.0; 6]], &[1.0, 1.0]).unwrap();
        let run = run_md_potential(&pg, &[Regularizer::Euclidean, Regularizer::NegativeEntropy], 500, &Init::Uniform)
            .unwrap();
        let (_, best) = pg.best_pure_profile();
        let x_star = pg.game().pure_profile(&best);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let slack = concave_rate_check(&pg, &run, &x_star, &mut rng).unwrap();
        assert!(slack[1..].iter().all(|&s| s >= -1e-8));
        // a coordination potential is not concave
        let run = run_md_potential(&coordination(), &[Regularizer::Euclidean; 2], 10, &Init::Uniform).unwrap();
        let x = coordination().game().pure_profile(&[0, 0]);
        assert!(concave_rate_check(&coordination(), &run, &x, &mut rng).is_err());
    }

    #[test]
    fn omwu_path_and_regret() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pg = random_weighted_potential(&mut rng, &[2, 2]).unwrap();
        let run = omwu_potential_run(&pg, 20_000, &Init::Random { seed: 3 }).unwrap();
        assert!(run.path.windows(2).all(|w| w[1] >= w[0]));
        assert!(run.path[20_000] <= run.path_bound);
        for i in 0..2 {
            assert!(run.max_regret[i] <= run.regret_constant[i]);
        }
    }

    #[test]
    fn near_potential_zero_delta_and_perturbed() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        // a wide potential so that steps can exceed the event threshold
        let phi: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let zeros = vec![vec![0.0; 9]; 2];
        let reference = PotentialGame::from_potential(vec![3, 3], phi, &zeros, &[1.0, 1.0]).unwrap();
        let spec = NearPotentialSpec::new(reference.game().clone(), reference.clone()).unwrap();
        assert_eq!(spec.delta, 0.0);
        assert!(spec.e_max < 1e-15);
        let mut utils: Vec<Vec<f64>> = (0..2).map(|i| reference.game().tensor(i).to_vec()).collect();
        utils[0][4] -= 0.05f64.copysign(utils[0][4]);
        let g = NormalFormGame::new(vec![3, 3], utils, Orientation::Maximize).unwrap();
        let spec = NearPotentialSpec::new(g, reference).unwrap();
        assert!((spec.delta - 0.05).abs() < 1e-12);
        let mut events = 0;
        for a in 0..3 {
            for b in 0..3 {
                let init = Init::Given { profile: spec.game.pure_profile(&[a, b]) };
                let run = near_potential_run(&spec, &[Regularizer::Euclidean; 2], 500, &init).unwrap();
                events += run.events.len();
                assert!(run.events.is_empty() || run.worst_event_slack >= 0.0);
            }
        }
        assert!(events > 0);
    }
}
