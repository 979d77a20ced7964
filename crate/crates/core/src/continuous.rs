//! Unconstrained and ℓ₁-ball bilinear games under linear "historical"
//! gradient methods: simulation, spectral prediction through the
//! characteristic equation, and synthesis of games a given method cannot
//! stabilise.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularizers::project_l1_ball;

/// Norm above which a run is declared diverged and halted.
pub const DIVERGENCE_NORM: f64 = 1e12;
/// Relative step size below which a run counts as settled.
pub const PLATEAU_TOL: f64 = 1e-9;
/// Window over which [`PLATEAU_TOL`] must hold.
pub const PLATEAU_WINDOW: usize = 100;
/// `|Im z| ≤ REAL_TOL·(1 + |Re z|)` counts as real.
pub const REAL_TOL: f64 = 1e-9;

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |v| v.len());
    if r == 0 || c == 0 || rows.iter().any(|v| v.len() != c) {
        return Err(Error::Dimension("matrix must be non-empty and rectangular".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entry".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Two-player game `max_x xᵀAy`, `max_y xᵀBy`, optionally on ℓ₁ balls.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearGame {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub radius: Option<f64>,
}

impl BilinearGame {
    pub fn new(a: &[Vec<f64>], b: &[Vec<f64>], radius: Option<f64>) -> Result<Self> {
        let (a, b) = (to_matrix(a)?, to_matrix(b)?);
        Self::from_matrices(a, b, radius)
    }

    pub fn from_matrices(a: DMatrix<f64>, b: DMatrix<f64>, radius: Option<f64>) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::Dimension("bilinear games need two square matrices of equal size".into()));
        }
        if let Some(r) = radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config("ball radius must be positive".into()));
            }
        }
        Ok(Self { a, b, radius })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `AᵀB`, whose spectrum governs the dynamics.
    pub fn interaction(&self) -> DMatrix<f64> {
        self.a.transpose() * &self.b
    }

    pub fn full_rank(&self) -> bool {
        smallest_singular_value(&self.a) > 1e-10 && smallest_singular_value(&self.b) > 1e-10
    }

    pub fn to_linear(&self) -> LinearGame {
        LinearGame {
            dims: vec![self.dim(); 2],
            blocks: vec![vec![None, Some(self.a.clone())], vec![Some(self.b.transpose()), None]],
            radius: self.radius,
        }
    }

    pub fn welfare(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.a * y)) + x.dot(&(&self.b * y))
    }
}

/// Player 1 plays against players `2..n`, who only interact with player 1:
/// `u₁ = Σⱼ x₁ᵀA₁ⱼxⱼ`, `uⱼ = xⱼᵀAⱼ₁x₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneVsMany {
    pub a_1j: Vec<DMatrix<f64>>,
    pub a_j1: Vec<DMatrix<f64>>,
}

impl OneVsMany {
    pub fn new(a_1j: Vec<DMatrix<f64>>, a_j1: Vec<DMatrix<f64>>) -> Result<Self> {
        if a_1j.is_empty() || a_1j.len() != a_j1.len() {
            return Err(Error::Dimension("one matrix pair per opponent".into()));
        }
        let d = a_1j[0].nrows();
        if a_1j.iter().chain(&a_j1).any(|m| m.shape() != (d, d)) {
            return Err(Error::Dimension("one-vs-many blocks must share a square shape".into()));
        }
        Ok(Self { a_1j, a_j1 })
    }

    /// `M = Σⱼ A₁ⱼAⱼ₁`.
    pub fn interaction(&self) -> DMatrix<f64> {
        let d = self.a_1j[0].nrows();
        self.a_1j.iter().zip(&self.a_j1).fold(DMatrix::zeros(d, d), |acc, (p, q)| acc + p * q)
    }

    pub fn to_linear(&self) -> LinearGame {
        let n = self.a_1j.len() + 1;
        let d = self.a_1j[0].nrows();
        let mut blocks = vec![vec![None; n]; n];
        for (k, (p, q)) in self.a_1j.iter().zip(&self.a_j1).enumerate() {
            blocks[0][k + 1] = Some(p.clone());
            blocks[k + 1][0] = Some(q.clone());
        }
        LinearGame { dims: vec![d; n], blocks, radius: None }
    }
}

/// Game whose gradients are linear: `∇ᵢuᵢ(x) = Σⱼ blocks[i][j]·xⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearGame {
    pub dims: Vec<usize>,
    pub blocks: Vec<Vec<Option<DMatrix<f64>>>>,
    pub radius: Option<f64>,
}

impl LinearGame {
    fn gradients(&self, x: &[DVector<f64>]) -> Vec<DVector<f64>> {
        self.blocks
            .iter()
            .zip(&self.dims)
            .map(|(row, &d)| {
                row.iter()
                    .zip(x)
                    .filter_map(|(m, xj)| m.as_ref().map(|m| m * xj))
                    .fold(DVector::zeros(d), |acc, v| acc + v)
            })
            .collect()
    }
}

/// Coefficients of `x⁽ᵗ⁺¹⁾ = Σ α_τ x⁽ᵗ⁻τ⁾ + Σ β_τ ∇u(x⁽ᵗ⁻τ⁾)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HgdMethod {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl HgdMethod {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() || beta.is_empty() || alpha.iter().chain(&beta).any(|v| !v.is_finite()) {
            return Err(Error::Config("HGD needs finite, non-empty coefficient lists".into()));
        }
        Ok(Self { alpha, beta })
    }

    /// Optimistic gradient descent: `α = (1)`, `β = (2η, −η)`.
    pub fn ogd(eta: f64) -> Self {
        Self { alpha: vec![1.0], beta: vec![2.0 * eta, -eta] }
    }

    pub fn gd(eta: f64) -> Self {
        Self { alpha: vec![1.0], beta: vec![eta] }
    }

    /// How far back the update looks.
    pub fn order(&self) -> usize {
        self.alpha.len().max(self.beta.len()) - 1
    }

    fn eval(c: &[f64], z: Complex<f64>) -> Complex<f64> {
        let zi = z.inv();
        let mut p = Complex::new(1.0, 0.0);
        let mut s = Complex::new(0.0, 0.0);
        for v in c {
            s += p * *v;
            p *= zi;
        }
        s
    }

    /// `S(z) = Σ α_τ z^{−τ}`.
    pub fn s(&self, z: Complex<f64>) -> Complex<f64> {
        Self::eval(&self.alpha, z)
    }

    /// `G(z) = Σ β_τ z^{−τ}`.
    pub fn g(&self, z: Complex<f64>) -> Complex<f64> {
        Self::eval(&self.beta, z)
    }

    /// `S(1) = 1` and `G(1) ≠ 0`.
    pub fn is_regular(&self) -> bool {
        let one = Complex::new(1.0, 0.0);
        (self.s(one).re - 1.0).abs() <= 1e-12 && self.g(one).norm() > 1e-12
    }

    /// `zᵀ⁺¹ − Σ α_τ zᵀ⁻τ` and `Σ β_τ zᵀ⁻τ` in ascending powers.
    fn polys(&self) -> (Vec<f64>, Vec<f64>) {
        let t = self.order();
        let mut p = vec![0.0; t + 2];
        p[t + 1] = 1.0;
        for (k, a) in self.alpha.iter().enumerate() {
            p[t - k] -= a;
        }
        let mut g = vec![0.0; t + 1];
        for (k, b) in self.beta.iter().enumerate() {
            g[t - k] += b;
        }
        (p, g)
    }

    /// `G` and `S(z) − z` share no root (checked on their numerators).
    pub fn coprime(&self) -> bool {
        let (p, g) = self.polys();
        let rp = poly_roots(&p);
        let rg = poly_roots(&trim(&g));
        // a zero root of the numerators is an artefact of clearing z^{−T}
        let nz = |r: &Complex<f64>| r.norm() > 1e-9;
        !rg.iter().filter(|r| nz(r)).any(|a| rp.iter().filter(|r| nz(r)).any(|b| (a - b).norm() <= 1e-7))
    }

    /// Roots of `(z − S(z))² − μ G(z)² = 0` for one eigenvalue `μ` of `AᵀB`.
    pub fn characteristic_roots(&self, mu: Complex<f64>) -> Vec<Complex<f64>> {
        let (p, g) = self.polys();
        let p2 = poly_mul(&p, &p);
        let g2 = poly_mul(&g, &g);
        let mut c: Vec<Complex<f64>> = p2.iter().map(|v| Complex::new(*v, 0.0)).collect();
        for (k, v) in g2.iter().enumerate() {
            c[k] -= mu * *v;
        }
        complex_poly_roots(&c)
    }
}

fn trim(c: &[f64]) -> Vec<f64> {
    let mut v = c.to_vec();
    while v.len() > 1 && v.last().is_some_and(|x| x.abs() < 1e-15) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_roots(c: &[f64]) -> Vec<Complex<f64>> {
    complex_poly_roots(&c.iter().map(|v| Complex::new(*v, 0.0)).collect::<Vec<_>>())
}

/// Roots of `Σ c_k z^k` via the eigenvalues of the companion matrix.
fn complex_poly_roots(c: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().is_some_and(|x| x.norm() < 1e-15) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let mut m = DMatrix::<Complex<f64>>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    // Schur form of the complex companion matrix; its diagonal holds the roots
    let schur = nalgebra::Schur::new(m);
    let (_, t) = schur.unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    m.complex_eigenvalues().iter().copied().collect()
}

pub fn is_real(z: &Complex<f64>) -> bool {
    z.im.abs() <= REAL_TOL * (1.0 + z.re.abs())
}

/// `|z±|²` of the OGD roots for an eigenvalue `−λ` of `AᵀB`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootMagnitudes {
    pub plus_sq: f64,
    pub minus_sq: f64,
}

impl RootMagnitudes {
    /// Per-step contraction `max |z±|`.
    pub fn rate(&self) -> f64 {
        self.plus_sq.max(self.minus_sq).sqrt()
    }
}

/// `|z±|² = ½(1 ± √(1 − 4η²λ))` for `λ > 0`, `η ≤ 1/(2√λ)`.
pub fn characteristic_roots(lambda: f64, eta: f64) -> Result<RootMagnitudes> {
    if !(lambda > 0.0 && eta > 0.0) {
        return Err(Error::Domain("need λ > 0 and η > 0".into()));
    }
    let mut disc = 1.0 - 4.0 * eta * eta * lambda;
    // η = 1/(2√λ) exactly lands here with rounding noise
    if disc.abs() < 1e-12 {
        disc = 0.0;
    }
    if disc < 0.0 {
        return Err(Error::Domain(format!("η = {eta} exceeds 1/(2√λ) = {}; roots leave the real branch", 0.5 / lambda.sqrt())));
    }
    let s = disc.sqrt();
    Ok(RootMagnitudes { plus_sq: 0.5 * (1.0 + s), minus_sq: 0.5 * (1.0 - s) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Converge { rate: f64 },
    Diverge { witness_re: f64, witness_im: f64, modulus: f64 },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    /// `(re, im)` of each eigenvalue of the interaction matrix
    pub eigenvalues: Vec<(f64, f64)>,
    pub condition: String,
    pub verdict: Verdict,
    pub predicted_rate: Option<f64>,
}

/// Predict the behaviour of `method` from the spectrum of the interaction
/// matrix (`AᵀB`, or `M` for one-vs-many).
///
/// For OGD with a negative real spectrum and `η ≤ 1/(2√γ)` the rate is the
/// closed form `max |z±|`. Otherwise every characteristic root is computed
/// numerically; any complex eigenvalue makes the answer inconclusive.
pub fn spectral_predict(interaction: &DMatrix<f64>, method: &HgdMethod) -> Result<SpectralReport> {
    if !interaction.is_square() {
        return Err(Error::Dimension("interaction matrix must be square".into()));
    }
    let eig = eigenvalues(interaction);
    if eig.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NotConverged("eigenvalue computation".into()));
    }
    let pairs: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    let report = |condition: String, verdict: Verdict| {
        let predicted_rate = match verdict {
            Verdict::Converge { rate } => Some(rate),
            _ => None,
        };
        Ok(SpectralReport { eigenvalues: pairs.clone(), condition, verdict, predicted_rate })
    };
    if eig.iter().any(|z| !is_real(z)) {
        return report("complex spectrum".into(), Verdict::Inconclusive { reason: "complex eigenvalues".into() });
    }
    let gamma = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ogd_eta = (method.alpha == [1.0] && method.beta.len() == 2 && method.beta[1] == -0.5 * method.beta[0])
        .then(|| -method.beta[1]);
    if let Some(eta) = ogd_eta {
        if eta > 0.0 && eig.iter().all(|z| z.re < 0.0) && eta <= 0.5 / gamma.sqrt() {
            let mut rate: f64 = 0.0;
            for z in &eig {
                rate = rate.max(characteristic_roots(-z.re, eta)?.rate());
            }
            return report(
                format!("negative real spectrum, η = {eta} ≤ 1/(2√γ) = {}", 0.5 / gamma.sqrt()),
                Verdict::Converge { rate },
            );
        }
    }
    let mut worst = Complex::new(0.0, 0.0);
    for z in &eig {
        for r in method.characteristic_roots(Complex::new(z.re, 0.0)) {
            if r.norm() > worst.norm() {
                worst = r;
            }
        }
    }
    let modulus = worst.norm();
    let cond = format!("real spectrum, largest characteristic root modulus {modulus}");
    if modulus > 1.0 + 1e-9 {
        report(cond, Verdict::Diverge { witness_re: worst.re, witness_im: worst.im, modulus })
    } else if modulus < 1.0 - 1e-9 {
        report(cond, Verdict::Converge { rate: modulus })
    } else {
        report(cond, Verdict::Inconclusive { reason: "characteristic root on the unit circle".into() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// step sizes stayed below the plateau tolerance over the final window
    Settled,
    /// norm passed [`DIVERGENCE_NORM`] at this step; the run was halted
    Diverged { step: usize },
    Running,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    /// `‖x⁽ᵗ⁾‖₂` over all players, `t = 0..`
    pub norms: Vec<f64>,
    /// `Σᵢ‖xᵢ⁽ᵗ⁾ − xᵢ⁽ᵗ⁻¹⁾‖₂` (entry 0 is 0)
    pub steps: Vec<f64>,
    pub last: Vec<DVector<f64>>,
    /// full trajectory when requested
    pub trajectory: Vec<Vec<DVector<f64>>>,
    pub outcome: Outcome,
    /// the ball projection changed some iterate
    pub projected: bool,
}

impl Simulation {
    pub fn max_norm(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }
}

/// Run every player with `method` for `horizon` steps from `x0`. Missing
/// history is filled with the initial point.
pub fn simulate(
    game: &LinearGame,
    method: &HgdMethod,
    x0: &[DVector<f64>],
    horizon: usize,
    record: bool,
) -> Result<Simulation> {
    if x0.len() != game.dims.len() || x0.iter().zip(&game.dims).any(|(v, &d)| v.len() != d) {
        return Err(Error::Dimension("initial point does not match the game".into()));
    }
    let depth = method.order() + 1;
    let g0 = game.gradients(x0);
    // newest first
    let mut xs: std::collections::VecDeque<Vec<DVector<f64>>> = std::iter::repeat(x0.to_vec()).take(depth).collect();
    let mut gs: std::collections::VecDeque<Vec<DVector<f64>>> = std::iter::repeat(g0).take(depth).collect();
    let norm = |x: &[DVector<f64>]| x.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
    let mut sim = Simulation {
        norms: vec![norm(x0)],
        steps: vec![0.0],
        last: x0.to_vec(),
        trajectory: if record { vec![x0.to_vec()] } else { Vec::new() },
        outcome: Outcome::Running,
        projected: false,
    };
    for t in 1..=horizon {
        let mut next: Vec<DVector<f64>> = game.dims.iter().map(|&d| DVector::zeros(d)).collect();
        for (k, a) in method.alpha.iter().enumerate() {
            for (n, x) in next.iter_mut().zip(&xs[k]) {
                n.axpy(*a, x, 1.0);
            }
        }
        for (k, b) in method.beta.iter().enumerate() {
            for (n, g) in next.iter_mut().zip(&gs[k]) {
                n.axpy(*b, g, 1.0);
            }
        }
        if let Some(r) = game.radius {
            for v in next.iter_mut() {
                let p = project_l1_ball(v.as_slice(), r);
                if p.iter().zip(v.iter()).any(|(a, b)| (a - b).abs() > 1e-15 * (1.0 + b.abs())) {
                    sim.projected = true;
                }
                *v = DVector::from_vec(p);
            }
        }
        let step: f64 = next.iter().zip(&xs[0]).map(|(a, b)| (a - b).norm()).sum();
        let nn = norm(&next);
        sim.norms.push(nn);
        sim.steps.push(step);
        if record {
            sim.trajectory.push(next.clone());
        }
        if !nn.is_finite() || nn > DIVERGENCE_NORM {
            sim.outcome = Outcome::Diverged { step: t };
            sim.last = next;
            return Ok(sim);
        }
        let g = game.gradients(&next);
        xs.push_front(next);
        gs.push_front(g);
        xs.truncate(depth);
        gs.truncate(depth);
    }
    sim.last = xs[0].clone();
    if settled(&sim) {
        sim.outcome = Outcome::Settled;
    }
    Ok(sim)
}

fn settled(sim: &Simulation) -> bool {
    let n = sim.steps.len();
    n > PLATEAU_WINDOW
        && sim.steps[n - PLATEAU_WINDOW..]
            .iter()
            .zip(&sim.norms[n - PLATEAU_WINDOW..])
            .all(|(s, x)| *s <= PLATEAU_TOL * x.max(1.0))
}

/// Per-step linear rate `exp(slope)` from a least-squares fit of
/// `log ‖x⁽ᵗ⁾‖` over the second half of the usable trajectory.
pub fn fit_linear_rate(norms: &[f64]) -> Option<f64> {
    let usable = norms.iter().position(|&v| !(v > 1e-250)).unwrap_or(norms.len());
    if usable < 20 {
        return None;
    }
    let pts: Vec<(f64, f64)> = (usable / 2..usable).map(|t| (t as f64, norms[t].ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}

/// Game `(I, λI)` on which a regular method diverges:
/// `λ = ((1 + ε − S(1 + ε)) / G(1 + ε))²` makes `z = 1 + ε` a root.
/// A degenerate `ε` is halved until usable.
pub fn adversarial_game_for(method: &HgdMethod, eps: f64, dim: usize) -> Result<(BilinearGame, f64)> {
    if !method.is_regular() {
        return Err(Error::Config("adversarial construction needs a regular method".into()));
    }
    if !(eps > 0.0) || dim == 0 {
        return Err(Error::Config("need ε > 0 and a positive dimension".into()));
    }
    let mut e = eps;
    for _ in 0..40 {
        let z = Complex::new(1.0 + e, 0.0);
        let (s, g) = (method.s(z).re, method.g(z).re);
        if g.abs() > 1e-12 && (1.0 + e - s).abs() > 1e-12 {
            let lambda = ((1.0 + e - s) / g).powi(2);
            let game = BilinearGame::from_matrices(DMatrix::identity(dim, dim), DMatrix::identity(dim, dim) * lambda, None)?;
            return Ok((game, lambda));
        }
        e *= 0.5;
    }
    Err(Error::Domain("no usable ε found for the adversarial construction".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct InefficiencyReport {
    pub radius: f64,
    /// `‖(x, y)‖₂` at the end of each run
    pub final_norms: Vec<f64>,
    pub limit_welfare: Vec<f64>,
    /// welfare `2R²` of the equilibrium `((R, 0), (R, 0))`
    pub equilibrium_welfare: f64,
    /// best-response slack of each player at that equilibrium (≤ 0 means optimal)
    pub equilibrium_slack: (f64, f64),
    pub converged: bool,
}

/// OGD on the inefficiency game within ℓ₁ balls of radius `R` from the given
/// initial points. Errors if the ball constraint ever binds.
pub fn inefficiency_demo(radius: f64, eta: f64, inits: &[Vec<DVector<f64>>], horizon: usize) -> Result<InefficiencyReport> {
    let (a, b) = crate::builtins::inefficiency_matrices();
    let game = BilinearGame::new(&a, &b, Some(radius))?;
    let lin = game.to_linear();
    let method = HgdMethod::ogd(eta);
    let mut final_norms = Vec::new();
    let mut limit_welfare = Vec::new();
    let mut converged = true;
    for x0 in inits {
        let sim = simulate(&lin, &method, x0, horizon, false)?;
        if sim.projected {
            return Err(Error::Config(format!("ball of radius {radius} binds along the run; enlarge it")));
        }
        final_norms.push(*sim.norms.last().unwrap_or(&f64::NAN));
        limit_welfare.push(game.welfare(&sim.last[0], &sim.last[1]));
        converged &= sim.outcome == Outcome::Settled;
    }
    // ℓ₁/ℓ∞ duality: max_{‖x‖₁≤R} xᵀv = R‖v‖∞
    let star = DVector::from_vec(vec![radius, 0.0]);
    let ay = &game.a * &star;
    let btx = game.b.transpose() * &star;
    let sx = radius * ay.amax() - star.dot(&ay);
    let sy = radius * btx.amax() - star.dot(&btx);
    Ok(InefficiencyReport {
        radius,
        final_norms,
        limit_welfare,
        equilibrium_welfare: game.welfare(&star, &star),
        equilibrium_slack: (sx, sy),
        converged,
    })
}

/// Uniform point in `[−s, s]^d` per player.
pub fn random_point<R: Rng>(rng: &mut R, dims: &[usize], scale: f64) -> Vec<DVector<f64>> {
    dims.iter().map(|&d| DVector::from_fn(d, |_, _| rng.gen_range(-scale..=scale))).collect()
}

fn random_invertible<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..=1.0));
        if smallest_singular_value(&m) > 0.1 {
            return m;
        }
    }
}

/// Random full-rank game whose `AᵀB` has the given real spectrum.
pub fn random_game_with_spectrum<R: Rng>(rng: &mut R, spectrum: &[f64]) -> Result<BilinearGame> {
    let d = spectrum.len();
    let a = random_invertible(rng, d);
    let v = random_invertible(rng, d);
    let target = &v * DMatrix::from_diagonal(&DVector::from_column_slice(spectrum)) * v.clone().try_inverse().unwrap();
    let at_inv = a.transpose().try_inverse().ok_or_else(|| Error::Domain("singular draw".into()))?;
    BilinearGame::from_matrices(a, at_inv * target, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn closed_form_roots() {
        let r = characteristic_roots(1.0, 0.5).unwrap();
        assert!(close(r.plus_sq, 0.5, 1e-15) && close(r.minus_sq, 0.5, 1e-15));
        let r = characteristic_roots(2.0, 0.5 / 2f64.sqrt()).unwrap();
        assert!(close(r.plus_sq, 0.5, 1e-12) && close(r.minus_sq, 0.5, 1e-12));
        let r = characteristic_roots(1.0, 1e-6).unwrap();
        assert!(r.plus_sq < 1.0 && r.plus_sq > 1.0 - 1e-11);
        assert!(characteristic_roots(1.0, 0.6).is_err());
    }

    #[test]
    fn numeric_roots_match_closed_form() {
        let eta = 0.2;
        for lambda in [0.3, 1.0, 4.0, 6.0] {
            let roots = HgdMethod::ogd(eta).characteristic_roots(Complex::new(-lambda, 0.0));
            let max = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(close(max, characteristic_roots(lambda, eta).unwrap().rate(), 1e-9), "λ = {lambda}");
        }
    }

    #[test]
    fn inefficiency_spectrum() {
        let (a, b) = crate::builtins::inefficiency_matrices();
        let g = BilinearGame::new(&a, &b, None).unwrap();
        let m = g.interaction();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -1.0, -3.0]));
        let mut ev: Vec<f64> = eigenvalues(&m).iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!(close(ev[0], -2.0, 1e-9) && close(ev[1], -1.0, 1e-9));
        let rep = spectral_predict(&m, &HgdMethod::ogd(0.5 / 2f64.sqrt())).unwrap();
        assert!(matches!(rep.verdict, Verdict::Converge { .. }));
    }

    #[test]
    fn robustness_spectrum_diverges() {
        let (a, b) = crate::builtins::robustness_matrices(0.05);
        let g = BilinearGame::new(&a, &b, None).unwrap();
        let ev = eigenvalues(&g.interaction());
        assert!(ev.iter().any(|z| close(z.re, 0.05f64.powi(2) / 4.0, 1e-15)));
        let rep = spectral_predict(&g.interaction(), &HgdMethod::ogd(0.5)).unwrap();
        assert!(matches!(rep.verdict, Verdict::Diverge { .. }));
        // the paired zero-sum game converges at the same step
        let z = BilinearGame::new(&a, &a.iter().map(|r| r.iter().map(|v| -v).collect()).collect::<Vec<_>>(), None).unwrap();
        let rep = spectral_predict(&z.interaction(), &HgdMethod::ogd(0.5)).unwrap();
        assert!(matches!(rep.verdict, Verdict::Converge { .. }));
    }

    #[test]
    fn zero_matrices_keep_iterates() {
        let g = BilinearGame::from_matrices(DMatrix::zeros(2, 2), DMatrix::zeros(2, 2), None).unwrap();
        let x0 = vec![DVector::from_vec(vec![0.3, -1.0]), DVector::from_vec(vec![2.0, 0.5])];
        let sim = simulate(&g.to_linear(), &HgdMethod::ogd(0.1), &x0, 50, false).unwrap();
        assert_eq!(sim.last, x0);
    }

    #[test]
    fn zero_sum_identity_contracts() {
        let g = BilinearGame::from_matrices(DMatrix::identity(2, 2), -DMatrix::identity(2, 2), None).unwrap();
        let x0 = vec![DVector::from_vec(vec![1.0, 1.0]), DVector::from_vec(vec![1.0, 1.0])];
        let sim = simulate(&g.to_linear(), &HgdMethod::ogd(0.1), &x0, 6000, false).unwrap();
        assert!(sim.norms[10..].windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(sim.outcome, Outcome::Settled);
    }

    #[test]
    fn ogd_adversary_matches_hand_value() {
        let (g, lambda) = adversarial_game_for(&HgdMethod::ogd(0.1), 1.0, 2).unwrap();
        assert!(close(lambda, (1.0 / 0.15f64).powi(2), 1e-9));
        assert!(g.a != -g.b.clone());
        let rep = spectral_predict(&g.interaction(), &HgdMethod::ogd(0.1)).unwrap();
        match rep.verdict {
            Verdict::Diverge { modulus, .. } => assert!(modulus >= 2.0 - 1e-9),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn regularity_and_common_roots() {
        assert!(HgdMethod::ogd(0.1).is_regular());
        assert!(!HgdMethod::new(vec![0.9], vec![0.1]).unwrap().is_regular());
        assert!(HgdMethod::new(vec![1.5, -0.5], vec![0.1]).unwrap().coprime());
        // G and S(z) − z both vanish at z = −1/2
        assert!(!HgdMethod::new(vec![0.5, 0.5], vec![0.1, 0.05]).unwrap().coprime());
        assert!(HgdMethod::new(vec![0.5, 0.5], vec![0.1, 0.03]).unwrap().coprime());
    }

    #[test]
    fn measured_rate_tracks_prediction() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = random_game_with_spectrum(&mut rng, &[-0.5, -1.5, -0.8]).unwrap();
        let gamma = 1.5f64;
        let method = HgdMethod::ogd(0.25 / gamma.sqrt());
        let rep = spectral_predict(&g.interaction(), &method).unwrap();
        let pred = rep.predicted_rate.unwrap();
        let x0 = random_point(&mut rng, &[3, 3], 1.0);
        let sim = simulate(&g.to_linear(), &method, &x0, 20_000, false).unwrap();
        let fit = fit_linear_rate(&sim.norms).unwrap();
        assert!((fit - pred).abs() <= 0.1 * pred, "fit {fit} vs {pred}");
    }

    #[test]
    fn inefficiency_limit_is_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let inits: Vec<_> = (0..3).map(|_| random_point(&mut rng, &[2, 2], 1.0)).collect();
        let rep = inefficiency_demo(10.0, 0.2, &inits, 2000).unwrap();
        assert!(rep.converged);
        assert!(rep.final_norms.iter().all(|&n| n <= 1e-6));
        assert!(close(rep.equilibrium_welfare, 200.0, 1e-12));
        assert!(rep.equilibrium_slack.0 <= 1e-12 && rep.equilibrium_slack.1 <= 1e-12);
        // a tiny ball binds immediately
        assert!(inefficiency_demo(0.05, 0.2, &inits, 10).is_err());
    }

    #[test]
    fn one_vs_many_converges_with_negative_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = 2;
        let a12 = random_invertible(&mut rng, d);
        let a13 = random_invertible(&mut rng, d);
        // choose the replies so that M = −(P + Q) with P, Q positive definite
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.6]);
        let q = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.9]);
        let a21 = -a12.clone().try_inverse().unwrap() * p;
        let a31 = -a13.clone().try_inverse().unwrap() * q;
        let g = OneVsMany::new(vec![a12, a13], vec![a21, a31]).unwrap();
        let m = g.interaction();
        let gamma = eigenvalues(&m).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let method = HgdMethod::ogd(0.5 / gamma.sqrt());
        let rep = spectral_predict(&m, &method).unwrap();
        assert!(matches!(rep.verdict, Verdict::Converge { .. }));
        let x0 = random_point(&mut rng, &[2, 2, 2], 1.0);
        let sim = simulate(&g.to_linear(), &method, &x0, 20_000, false).unwrap();
        assert_eq!(sim.outcome, Outcome::Settled);
    }
}
