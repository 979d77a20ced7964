//! Per-player online learners and the multi-player runner.
//!
//! Time convention: at `t = 0` every player sits at `x⁽⁰⁾` (uniform unless an
//! initial profile is given) and observes `u⁽⁰⁾`, the utility at the initial
//! profile. Each round then produces `x⁽ᵗ⁺¹⁾` from the history and feeds back
//! `u⁽ᵗ⁺¹⁾`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{nash_gap_from, NormalFormGame, Profile};
use crate::regularizers::{softmax, Regularizer, ENTROPY_FLOOR};

/// How a learner forms its optimistic guess `m⁽ᵗ⁾` of the next utility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prediction {
    /// `m⁽ᵗ⁾ = u⁽ᵗ⁻¹⁾`
    #[default]
    OneStep,
    /// mean of the last `h` utilities
    HStep { h: usize },
    /// geometric average, weight `δ^{-τ}` on `u⁽τ⁾`
    Discounted { delta: f64 },
    /// finite-difference extrapolation of order `h` (1..=4)
    HOrder { h: usize },
}

/// Extrapolation coefficients applied to `u⁽ᵗ⁻¹⁾, u⁽ᵗ⁻²⁾, …`.
pub fn h_order_coefficients(h: usize) -> Option<&'static [f64]> {
    match h {
        1 => Some(&[1.0]),
        2 => Some(&[2.0, -1.0]),
        3 => Some(&[3.0, -3.0, 1.0]),
        4 => Some(&[4.0, -6.0, 4.0, -1.0]),
        _ => None,
    }
}

impl Prediction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Prediction::OneStep => Ok(()),
            Prediction::HStep { h } if h >= 1 => Ok(()),
            Prediction::Discounted { delta } if delta > 0.0 && delta < 1.0 => Ok(()),
            Prediction::HOrder { h } if h_order_coefficients(h).is_some() => Ok(()),
            other => Err(Error::Config(format!("invalid prediction {other:?}"))),
        }
    }

    /// Number of past utilities the window must hold.
    pub fn window(&self) -> usize {
        match *self {
            Prediction::OneStep | Prediction::Discounted { .. } => 1,
            Prediction::HStep { h } | Prediction::HOrder { h } => h,
        }
    }
}

/// `m⁽ᵗ⁾` from the full history `u⁽⁰⁾, …, u⁽ᵗ⁻¹⁾` (oldest first). Entries
/// before time 0 are taken to be `u⁽⁰⁾`.
pub fn predict(mech: &Prediction, history: &[Vec<f64>]) -> Result<Vec<f64>> {
    let t = history.len();
    if t == 0 {
        return Err(Error::Domain("prediction needs u(0)".into()));
    }
    let d = history[0].len();
    let at = |back: usize| -> &Vec<f64> {
        // u^(t-back), back >= 1
        if back > t {
            &history[0]
        } else {
            &history[t - back]
        }
    };
    let mut m = vec![0.0; d];
    match *mech {
        Prediction::OneStep => m.copy_from_slice(at(1)),
        Prediction::HStep { h } => {
            for back in 1..=h {
                for (mk, v) in m.iter_mut().zip(at(back)) {
                    *mk += v / h as f64;
                }
            }
        }
        Prediction::Discounted { delta } => {
            // δ^{-τ} normalised; rewritten with δ^{t-1-τ} to stay finite
            let mut den = 0.0;
            for (tau, u) in history.iter().enumerate() {
                let w = delta.powi((t - 1 - tau) as i32);
                den += w;
                for (mk, v) in m.iter_mut().zip(u) {
                    *mk += w * v;
                }
            }
            m.iter_mut().for_each(|v| *v /= den);
        }
        Prediction::HOrder { h } => {
            let c = h_order_coefficients(h).ok_or_else(|| Error::Config(format!("h_order {h}")))?;
            for (k, ck) in c.iter().enumerate() {
                for (mk, v) in m.iter_mut().zip(at(k + 1)) {
                    *mk += ck * v;
                }
            }
        }
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Omd,
    Oftrl,
    Omwu,
    Md,
}

/// Coordinate-wise map applied to the utility feedback before the update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    #[default]
    Identity,
    /// `v ↦ w·v` (weighted potential games)
    Scale { w: f64 },
    /// `v ↦ log v − 1` (Fisher markets)
    LogShift,
}

impl Transform {
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Transform::Identity => Ok(u.to_vec()),
            Transform::Scale { w } => Ok(u.iter().map(|v| w * v).collect()),
            Transform::LogShift => u
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        Ok(v.ln() - 1.0)
                    } else {
                        Err(Error::Domain(format!("log transform of non-positive utility {v}")))
                    }
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub algorithm: Algorithm,
    pub regularizer: Regularizer,
    pub eta: f64,
    #[serde(default)]
    pub prediction: Prediction,
    #[serde(default)]
    pub transform: Transform,
}

impl LearnerConfig {
    pub fn new(algorithm: Algorithm, regularizer: Regularizer, eta: f64) -> Self {
        Self { algorithm, regularizer, eta, prediction: Prediction::OneStep, transform: Transform::Identity }
    }

    pub fn omd(regularizer: Regularizer, eta: f64) -> Self {
        Self::new(Algorithm::Omd, regularizer, eta)
    }

    pub fn oftrl(regularizer: Regularizer, eta: f64) -> Self {
        Self::new(Algorithm::Oftrl, regularizer, eta)
    }

    pub fn omwu(eta: f64) -> Self {
        Self::new(Algorithm::Omwu, Regularizer::NegativeEntropy, eta)
    }

    pub fn md(regularizer: Regularizer, eta: f64) -> Self {
        Self::new(Algorithm::Md, regularizer, eta)
    }

    pub fn with_prediction(mut self, p: Prediction) -> Self {
        self.prediction = p;
        self
    }

    pub fn with_transform(mut self, t: Transform) -> Self {
        self.transform = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if self.algorithm == Algorithm::Omwu && self.regularizer != Regularizer::NegativeEntropy {
            return Err(Error::Config("omwu requires the entropy regularizer".into()));
        }
        if self.transform == Transform::LogShift && self.algorithm != Algorithm::Md {
            return Err(Error::Config("log_shift transform is only used with md".into()));
        }
        if let Transform::Scale { w } = self.transform {
            if !(w > 0.0) {
                return Err(Error::Config(format!("scale transform needs w > 0, got {w}")));
            }
        }
        self.prediction.validate()
    }
}

/// Default rate for optimistic learners in an n-player game.
pub fn default_eta(n: usize) -> f64 {
    1.0 / (4.0 * (n.max(2) - 1) as f64)
}

/// State of one learner.
#[derive(Clone, Debug)]
pub struct Learner {
    cfg: LearnerConfig,
    x: Vec<f64>,
    xhat: Vec<f64>,
    /// OFTRL: Σ_{τ=1..t} u⁽τ⁾
    cum: Vec<f64>,
    /// most recent utilities, newest at the back; front padded with u⁽⁰⁾
    window: VecDeque<Vec<f64>>,
    disc_num: Vec<f64>,
    disc_den: f64,
    t: usize,
    floored: bool,
}

impl Learner {
    /// Learner starting from `argmin R` (uniform).
    pub fn new(cfg: LearnerConfig, d: usize) -> Result<Self> {
        Self::with_initial(cfg, vec![1.0 / d as f64; d])
    }

    pub fn with_initial(cfg: LearnerConfig, x0: Vec<f64>) -> Result<Self> {
        cfg.validate()?;
        let d = x0.len();
        if d == 0 {
            return Err(Error::Dimension("learner needs at least one action".into()));
        }
        crate::game::check_simplex(&x0, 1e-10).map_err(Error::Domain)?;
        Ok(Self {
            cfg,
            xhat: x0.clone(),
            x: x0,
            cum: vec![0.0; d],
            window: VecDeque::new(),
            disc_num: vec![0.0; d],
            disc_den: 0.0,
            t: 0,
            floored: false,
        })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.cfg
    }

    pub fn strategy(&self) -> &[f64] {
        &self.x
    }

    /// `x̂⁽ᵗ⁾` for OMD; the primary iterate for the other algorithms.
    pub fn secondary(&self) -> &[f64] {
        &self.xhat
    }

    /// True if an entropy update ever had to floor a coordinate.
    pub fn floored(&self) -> bool {
        self.floored
    }

    fn push(&mut self, g: Vec<f64>) {
        let cap = self.cfg.prediction.window().max(2);
        if let Prediction::Discounted { delta } = self.cfg.prediction {
            for (n, v) in self.disc_num.iter_mut().zip(&g) {
                *n = delta * *n + v;
            }
            self.disc_den = delta * self.disc_den + 1.0;
        }
        if self.window.is_empty() {
            // back-fill with u(0)
            for _ in 0..cap {
                self.window.push_back(g.clone());
            }
            return;
        }
        self.window.push_back(g);
        while self.window.len() > cap {
            self.window.pop_front();
        }
    }

    fn back(&self, k: usize) -> &[f64] {
        // k = 1 is the newest
        &self.window[self.window.len() - k]
    }

    fn prediction(&self) -> Vec<f64> {
        let d = self.x.len();
        match self.cfg.prediction {
            Prediction::OneStep => self.back(1).to_vec(),
            Prediction::HStep { h } => {
                let mut m = vec![0.0; d];
                for k in 1..=h {
                    for (mk, v) in m.iter_mut().zip(self.back(k)) {
                        *mk += v / h as f64;
                    }
                }
                m
            }
            Prediction::Discounted { .. } => self.disc_num.iter().map(|v| v / self.disc_den).collect(),
            Prediction::HOrder { h } => {
                let c = h_order_coefficients(h).expect("validated");
                let mut m = vec![0.0; d];
                for (k, ck) in c.iter().enumerate() {
                    for (mk, v) in m.iter_mut().zip(self.back(k + 1)) {
                        *mk += ck * v;
                    }
                }
                m
            }
        }
    }

    /// Observe `u⁽⁰⁾` at the initial profile.
    pub fn start(&mut self, u0: &[f64]) -> Result<()> {
        self.check_dim(u0)?;
        let g = self.cfg.transform.apply(u0)?;
        self.push(g);
        Ok(())
    }

    fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.x.len() {
            return Err(Error::Dimension(format!("utility has {} entries, learner {}", u.len(), self.x.len())));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("utility feedback".into()));
        }
        Ok(())
    }

    /// Produce `x⁽ᵗ⁺¹⁾`.
    pub fn next(&mut self) -> Result<&[f64]> {
        if self.window.is_empty() {
            return Err(Error::Domain("learner has not observed u(0)".into()));
        }
        let eta = self.cfg.eta;
        let reg = self.cfg.regularizer;
        if reg.needs_floor(&self.x) || reg.needs_floor(&self.xhat) {
            self.floored = true;
        }
        let x = match self.cfg.algorithm {
            Algorithm::Omd => reg.prox(&self.xhat, &self.prediction(), eta)?,
            Algorithm::Oftrl => {
                let m = self.prediction();
                let s: Vec<f64> = self.cum.iter().zip(&m).map(|(a, b)| a + b).collect();
                reg.argmax_linear(&s, eta)?
            }
            Algorithm::Omwu => {
                if self.t == 0 {
                    // x(1) = x(0)
                    self.x.clone()
                } else {
                    let (ut, up) = (self.back(1), self.back(2));
                    let z: Vec<f64> = self
                        .x
                        .iter()
                        .zip(ut.iter().zip(up))
                        .map(|(xa, (a, b))| xa.max(ENTROPY_FLOOR).ln() + 2.0 * eta * a - eta * b)
                        .collect();
                    softmax(&z)
                }
            }
            Algorithm::Md => reg.prox(&self.x, self.back(1), eta)?,
        };
        self.x = x;
        if self.cfg.algorithm != Algorithm::Omd {
            self.xhat.clone_from(&self.x);
        }
        self.t += 1;
        Ok(&self.x)
    }

    /// Feed back `u⁽ᵗ⁺¹⁾` after [`Learner::next`].
    pub fn observe(&mut self, u: &[f64]) -> Result<()> {
        self.check_dim(u)?;
        let g = self.cfg.transform.apply(u)?;
        match self.cfg.algorithm {
            Algorithm::Omd => self.xhat = self.cfg.regularizer.prox(&self.xhat, &g, self.cfg.eta)?,
            Algorithm::Oftrl => self.cum.iter_mut().zip(&g).for_each(|(c, v)| *c += v),
            Algorithm::Omwu | Algorithm::Md => {}
        }
        self.push(g);
        Ok(())
    }
}

/// Initial profile for a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Init {
    #[default]
    Uniform,
    /// Random interior profile drawn from the run seed.
    Random { seed: u64 },
    Given { profile: Profile },
}

impl Init {
    pub fn resolve(&self, dims: &[usize]) -> Profile {
        match self {
            Init::Uniform => dims.iter().map(|&d| vec![1.0 / d as f64; d]).collect(),
            Init::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                dims.iter().map(|&d| random_simplex_point(&mut rng, d)).collect()
            }
            Init::Given { profile } => profile.clone(),
        }
    }
}

/// Uniform sample from the simplex interior.
pub fn random_simplex_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| -(rng.gen::<f64>().max(1e-300)).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Full trajectory of a run: entries `0..=T`.
#[derive(Clone, Debug, Default)]
pub struct RunLog {
    pub dims: Vec<usize>,
    pub configs: Vec<LearnerConfig>,
    /// `x[t][i]`
    pub x: Vec<Profile>,
    /// `x̂[t][i]` (equal to `x` for learners without a secondary iterate)
    pub xhat: Vec<Profile>,
    /// raw (untransformed) utility vectors `u[t][i]` at `x[t]`
    pub u: Vec<Profile>,
    pub nash_gap: Vec<f64>,
    pub welfare: Vec<f64>,
    /// an entropy learner floored a coordinate at some point
    pub floored: bool,
}

impl RunLog {
    pub fn horizon(&self) -> usize {
        self.x.len().saturating_sub(1)
    }

    pub fn num_players(&self) -> usize {
        self.dims.len()
    }

    /// Trajectory of player `i`.
    pub fn player_x(&self, i: usize) -> Vec<&[f64]> {
        self.x.iter().map(|p| p[i].as_slice()).collect()
    }

    pub fn player_u(&self, i: usize) -> Vec<&[f64]> {
        self.u.iter().map(|p| p[i].as_slice()).collect()
    }
}

/// Anything that maps a mixed profile to per-player utility vectors.
pub trait UtilityOracle: Sync {
    fn dims(&self) -> Vec<usize>;
    fn utilities(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>>;
}

impl UtilityOracle for NormalFormGame {
    fn dims(&self) -> Vec<usize> {
        self.action_counts().to_vec()
    }

    fn utilities(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.utility_vectors(x)
    }
}

/// Run `T` rounds of simultaneous learning on `game`.
pub fn run_dynamics<G: UtilityOracle + ?Sized>(
    game: &G,
    configs: &[LearnerConfig],
    horizon: usize,
    init: &Init,
) -> Result<RunLog> {
    let dims = game.dims();
    if configs.len() != dims.len() {
        return Err(Error::Config(format!("{} learner configs for {} players", configs.len(), dims.len())));
    }
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let x0 = init.resolve(&dims);
    if x0.len() != dims.len() || x0.iter().zip(&dims).any(|(v, &d)| v.len() != d) {
        return Err(Error::Dimension("initial profile shape".into()));
    }
    let mut learners = configs
        .iter()
        .zip(x0)
        .map(|(c, x)| Learner::with_initial(*c, x))
        .collect::<Result<Vec<_>>>()?;

    let mut log = RunLog { dims: dims.clone(), configs: configs.to_vec(), ..Default::default() };
    log.x.reserve(horizon + 1);
    log.u.reserve(horizon + 1);
    log.xhat.reserve(horizon + 1);

    let record = |log: &mut RunLog, learners: &[Learner], u: Profile| {
        let x: Profile = learners.iter().map(|l| l.strategy().to_vec()).collect();
        log.nash_gap.push(nash_gap_from(&x, &u));
        log.welfare.push(x.iter().zip(&u).map(|(a, b)| crate::game::dot(a, b)).sum());
        log.xhat.push(learners.iter().map(|l| l.secondary().to_vec()).collect());
        log.x.push(x);
        log.u.push(u);
    };

    let x: Profile = learners.iter().map(|l| l.strategy().to_vec()).collect();
    let u = game.utilities(&x).map_err(|e| Error::Step { step: 0, source: Box::new(e) })?;
    for (l, ui) in learners.iter_mut().zip(&u) {
        l.start(ui).map_err(|e| Error::Step { step: 0, source: Box::new(e) })?;
    }
    record(&mut log, &learners, u);

    for t in 1..=horizon {
        let wrap = |e: Error| Error::Step { step: t, source: Box::new(e) };
        let mut x = Vec::with_capacity(learners.len());
        for l in learners.iter_mut() {
            x.push(l.next().map_err(wrap)?.to_vec());
        }
        let u = game.utilities(&x).map_err(wrap)?;
        for (l, ui) in learners.iter_mut().zip(&u) {
            l.observe(ui).map_err(wrap)?;
        }
        record(&mut log, &learners, u);
    }
    log.floored = learners.iter().any(|l| l.floored());
    Ok(log)
}
