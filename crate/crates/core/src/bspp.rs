//! Bilinear saddle-point problems `min_x max_y xᵀAy` over simplices,
//! boxes and sequence-form polytopes, solved by euclidean OMD.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularizers::project_simplex;

/// Dykstra stops once an iterate moves less than this.
pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_CAP: usize = 100_000;
const PLAN_CAP: usize = 1 << 20;

/// Decision point: the sequences it can extend and the sequence leading to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Infoset {
    pub parent: usize,
    pub actions: Vec<usize>,
}

/// Sequence-form strategy polytope. Sequence 0 is the empty sequence,
/// fixed to 1; infosets are listed parents first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeplexSpec")]
pub struct Treeplex {
    dim: usize,
    infosets: Vec<Infoset>,
    #[serde(skip)]
    affine: Affine,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
struct TreeplexSpec {
    dim: usize,
    infosets: Vec<Infoset>,
}

impl TryFrom<TreeplexSpec> for Treeplex {
    type Error = Error;
    fn try_from(s: TreeplexSpec) -> Result<Self> {
        Treeplex::new(s.dim, s.infosets)
    }
}

/// Orthogonal projector onto `{x : Cx = e₀}` as `x ↦ Px + q`.
#[derive(Clone, Debug, PartialEq, Default)]
struct Affine {
    p: DMatrix<f64>,
    q: DVector<f64>,
}

impl Treeplex {
    pub fn new(dim: usize, infosets: Vec<Infoset>) -> Result<Self> {
        let mut owner = vec![None; dim];
        for (k, inf) in infosets.iter().enumerate() {
            if inf.actions.is_empty() {
                return Err(Error::Config(format!("infoset {k} has no actions")));
            }
            if inf.parent >= dim {
                return Err(Error::Dimension(format!("infoset {k} parent out of range")));
            }
            // parents must be placed by an earlier infoset
            if inf.parent != 0 && !matches!(owner[inf.parent], Some(j) if j < k) {
                return Err(Error::Config(format!("infoset {k} listed before its parent sequence")));
            }
            for &a in &inf.actions {
                if a == 0 || a >= dim || owner[a].is_some() {
                    return Err(Error::Config(format!("sequence {a} invalid or owned twice")));
                }
                owner[a] = Some(k);
            }
        }
        if owner.iter().skip(1).any(Option::is_none) {
            return Err(Error::Config("every non-empty sequence must belong to an infoset".into()));
        }
        let affine = Self::affine(dim, &infosets)?;
        Ok(Self { dim, infosets, affine })
    }

    /// A simplex over `n` actions as a one-infoset treeplex.
    pub fn simplex(n: usize) -> Result<Self> {
        Self::new(n + 1, vec![Infoset { parent: 0, actions: (1..=n).collect() }])
    }

    fn affine(dim: usize, infosets: &[Infoset]) -> Result<Affine> {
        let rows = infosets.len() + 1;
        let mut c = DMatrix::zeros(rows, dim);
        let mut b = DVector::zeros(rows);
        c[(0, 0)] = 1.0;
        b[0] = 1.0;
        for (k, inf) in infosets.iter().enumerate() {
            c[(k + 1, inf.parent)] = -1.0;
            for &a in &inf.actions {
                c[(k + 1, a)] = 1.0;
            }
        }
        let gram = (&c * c.transpose())
            .try_inverse()
            .ok_or_else(|| Error::Domain("dependent treeplex constraints".into()))?;
        let ct_g = c.transpose() * gram;
        Ok(Affine { p: DMatrix::identity(dim, dim) - &ct_g * &c, q: ct_g * b })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    /// Largest violation of flow conservation, sign or the empty-sequence value.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut v = (x[0] - 1.0).abs();
        for inf in &self.infosets {
            let s: f64 = inf.actions.iter().map(|&a| x[a]).sum();
            v = v.max((s - x[inf.parent]).abs());
        }
        x.iter().fold(v, |m, &a| m.max(-a))
    }

    /// `max ⟨g, x⟩` over the treeplex by a bottom-up pass; returns a maximising
    /// vertex and the value.
    pub fn best_response(&self, g: &[f64]) -> (Vec<f64>, f64) {
        let mut seq_val = g.to_vec();
        let mut choice = vec![0; self.infosets.len()];
        for (k, inf) in self.infosets.iter().enumerate().rev() {
            let (best, v) = inf
                .actions
                .iter()
                .map(|&a| (a, seq_val[a]))
                .fold((inf.actions[0], f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
            choice[k] = best;
            seq_val[inf.parent] += v;
        }
        let mut x = vec![0.0; self.dim];
        x[0] = 1.0;
        for (k, inf) in self.infosets.iter().enumerate() {
            if x[inf.parent] > 0.0 {
                x[choice[k]] = x[inf.parent];
            }
        }
        (x, seq_val[0])
    }

    /// Euclidean projection by Dykstra's method alternating between the flow
    /// constraints and the nonnegative orthant.
    pub fn project(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.dim {
            return Err(Error::Dimension("point does not match the treeplex".into()));
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("projection input".into()));
        }
        let Affine { p, q } = &self.affine;
        let mut x = DVector::from_column_slice(point);
        let mut corr = DVector::zeros(self.dim);
        for _ in 0..DYKSTRA_CAP {
            // the affine set needs no correction term
            let y = p * &x + q;
            let z = &y + &corr;
            let next = z.map(|v| v.max(0.0));
            corr = z - &next;
            let moved = (&next - &x).norm();
            x = next;
            if moved < DYKSTRA_TOL {
                let out: Vec<f64> = x.iter().copied().collect();
                return Ok(out);
            }
        }
        let out: Vec<f64> = x.iter().copied().collect();
        Err(Error::NotConverged(format!("Dykstra projection, residual {:e}", self.violation(&out))))
    }

    /// Every pure sequence-form strategy.
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        let needed = self.infosets.iter().fold(1u128, |acc, inf| acc.saturating_mul(inf.actions.len() as u128));
        if needed > PLAN_CAP as u128 {
            return Err(Error::EnumerationCap { needed, cap: PLAN_CAP as u64 });
        }
        let plans = needed as usize;
        let mut seen = std::collections::BTreeSet::new();
        let mut out: Vec<Vec<f64>> = Vec::new();
        for mut code in 0..plans {
            let mut x = vec![0.0; self.dim];
            x[0] = 1.0;
            for inf in &self.infosets {
                let a = inf.actions[code % inf.actions.len()];
                code /= inf.actions.len();
                x[a] = x[inf.parent];
            }
            // plans differing only at unreached infosets coincide
            if seen.insert(x.iter().map(|v: &f64| v.to_bits()).collect::<Vec<_>>()) {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Uniform behavioural strategy in sequence form.
    pub fn uniform(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        x[0] = 1.0;
        for inf in &self.infosets {
            for &a in &inf.actions {
                x[a] = x[inf.parent] / inf.actions.len() as f64;
            }
        }
        x
    }
}

/// Feasible set of one player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Simplex { dim: usize },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Treeplex { treeplex: Treeplex },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Simplex { dim } => *dim,
            Domain::Box { lo, .. } => lo.len(),
            Domain::Treeplex { treeplex } => treeplex.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Simplex { dim: 0 } => Err(Error::Dimension("empty simplex".into())),
            Domain::Box { lo, hi } if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(hi).any(|(a, b)| !(a <= b)) => {
                Err(Error::Config("box needs lo ≤ hi coordinatewise".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            Domain::Simplex { .. } => Ok(project_simplex(v)),
            Domain::Box { lo, hi } => Ok(v.iter().zip(lo.iter().zip(hi)).map(|(x, (l, h))| x.clamp(*l, *h)).collect()),
            Domain::Treeplex { treeplex } => treeplex.project(v),
        }
    }

    /// `max ⟨g, x⟩` and a maximiser.
    pub fn best_response(&self, g: &[f64]) -> (Vec<f64>, f64) {
        match self {
            Domain::Simplex { dim } => {
                let (k, v) = g.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |a, c| if c.1 > a.1 { c } else { a });
                let mut x = vec![0.0; *dim];
                x[k] = 1.0;
                (x, v)
            }
            Domain::Box { lo, hi } => {
                let x: Vec<f64> = g.iter().zip(lo.iter().zip(hi)).map(|(gi, (l, h))| if *gi >= 0.0 { *h } else { *l }).collect();
                let v = x.iter().zip(g).map(|(a, b)| a * b).sum();
                (x, v)
            }
            Domain::Treeplex { treeplex } => treeplex.best_response(g),
        }
    }

    /// `max_z ½‖z − x0‖²` over the domain, attained at a vertex.
    pub fn omega_from(&self, x0: &[f64]) -> Result<f64> {
        let far = |v: &[f64]| 0.5 * v.iter().zip(x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        Ok(match self {
            Domain::Simplex { dim } => (0..*dim)
                .map(|k| {
                    let mut e = vec![0.0; *dim];
                    e[k] = 1.0;
                    far(&e)
                })
                .fold(0.0, f64::max),
            Domain::Box { lo, hi } => {
                0.5 * x0.iter().zip(lo.iter().zip(hi)).map(|(x, (l, h))| (x - l).powi(2).max((h - x).powi(2))).sum::<f64>()
            }
            Domain::Treeplex { treeplex } => treeplex.vertices()?.iter().map(|v| far(v)).fold(0.0, f64::max),
        })
    }

    /// Minimiser of `½‖x‖²`, the default start.
    pub fn center(&self) -> Result<Vec<f64>> {
        self.project(&vec![0.0; self.dim()])
    }
}

/// `min_x max_y xᵀAy` with `x ∈ X`, `y ∈ Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bspp {
    pub a: DMatrix<f64>,
    pub x: Domain,
    pub y: Domain,
    spectral_norm: f64,
}

/// Largest singular value by power iteration on `AᵀA`.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    let ata = a.transpose() * a;
    let n = ata.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v /= v.norm();
    let mut est = 0.0;
    for _ in 0..1_000_000 {
        let w = &ata * &v;
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / nw;
        if (next - est).abs() <= 1e-13 * next.abs() {
            return next.sqrt();
        }
        est = next;
    }
    est.sqrt()
}

impl Bspp {
    pub fn new(a: DMatrix<f64>, x: Domain, y: Domain) -> Result<Self> {
        x.validate()?;
        y.validate()?;
        if a.shape() != (x.dim(), y.dim()) {
            return Err(Error::Dimension(format!("A is {:?}, domains are {}×{}", a.shape(), x.dim(), y.dim())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("payoff matrix".into()));
        }
        let spectral_norm = spectral_norm(&a);
        Ok(Self { a, x, y, spectral_norm })
    }

    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }

    /// Largest step size the path bound is stated for.
    pub fn default_eta(&self) -> f64 {
        0.25 / self.spectral_norm
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        DVector::from_column_slice(x).dot(&(&self.a * DVector::from_column_slice(y)))
    }

    /// `max_y' xᵀAy' − min_x' x'ᵀAy`.
    pub fn saddle_point_gap(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = &self.a * DVector::from_column_slice(y);
        let atx = self.a.transpose() * DVector::from_column_slice(x);
        let neg: Vec<f64> = ay.iter().map(|v| -v).collect();
        self.y.best_response(atx.as_slice()).1 + self.x.best_response(&neg).1
    }
}

/// Kuhn poker in sequence form. Player 1 (rows) minimises `xᵀAy`, so `A`
/// holds player 1's expected loss.
pub fn build_kuhn() -> Result<Bspp> {
    // per card c: 1+4c check, 2+4c bet, 3+4c check-fold, 4+4c check-call
    let p1: Vec<Infoset> = (0..3)
        .flat_map(|c| {
            [
                Infoset { parent: 0, actions: vec![1 + 4 * c, 2 + 4 * c] },
                Infoset { parent: 1 + 4 * c, actions: vec![3 + 4 * c, 4 + 4 * c] },
            ]
        })
        .collect();
    // per card c: 1+4c check, 2+4c bet (after a check); 3+4c fold, 4+4c call (after a bet)
    let p2: Vec<Infoset> = (0..3)
        .flat_map(|c| {
            [
                Infoset { parent: 0, actions: vec![1 + 4 * c, 2 + 4 * c] },
                Infoset { parent: 0, actions: vec![3 + 4 * c, 4 + 4 * c] },
            ]
        })
        .collect();
    let mut a = DMatrix::zeros(13, 13);
    let chance = 1.0 / 6.0;
    for c1 in 0..3 {
        for c2 in (0..3).filter(|&c| c != c1) {
            let win = if c1 > c2 { 1.0 } else { -1.0 };
            // entries are player 1's losses
            let mut add = |i: usize, j: usize, payoff: f64| a[(i, j)] -= chance * payoff;
            add(1 + 4 * c1, 1 + 4 * c2, win);
            add(3 + 4 * c1, 2 + 4 * c2, -1.0);
            add(4 + 4 * c1, 2 + 4 * c2, 2.0 * win);
            add(2 + 4 * c1, 3 + 4 * c2, 1.0);
            add(2 + 4 * c1, 4 + 4 * c2, 2.0 * win);
        }
    }
    Bspp::new(
        a,
        Domain::Treeplex { treeplex: Treeplex::new(13, p1)? },
        Domain::Treeplex { treeplex: Treeplex::new(13, p2)? },
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct BsppRun {
    pub eta: f64,
    /// gap of `(x⁽ᵗ⁾, y⁽ᵗ⁾)`, `t = 0..=T`
    pub last_gap: Vec<f64>,
    /// gap of the running average of `t = 1..=T` (entry 0 uses the start)
    pub avg_gap: Vec<f64>,
    /// `Σₜ ‖Δx‖₂² + ‖Δy‖₂²`
    pub path: f64,
    pub path_bound: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    /// sum of both players' (linearised) regrets after each prefix `T ≥ 1`
    pub regret_sum: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl BsppRun {
    /// `minₛ≤ₜ last_gap[s]`.
    pub fn best_last_gap(&self) -> Vec<f64> {
        self.last_gap
            .iter()
            .scan(f64::INFINITY, |m, &g| {
                *m = m.min(g);
                Some(*m)
            })
            .collect()
    }

    pub fn path_slack(&self) -> f64 {
        self.path_bound - self.path
    }
}

/// Iterates and the gradients `(∇ₓf, ∇_yf)` observed at them.
struct Trajectory {
    xs: Vec<Vec<f64>>,
    ys: Vec<Vec<f64>>,
    gx: Vec<Vec<f64>>,
    gy: Vec<Vec<f64>>,
}

/// Euclidean OMD for both players: `x` descends `∇ₓf`, `y` ascends `∇_yf`.
fn omd_pair<F>(x: &Domain, y: &Domain, x0: Vec<f64>, y0: Vec<f64>, eta: f64, horizon: usize, grad: F) -> Result<Trajectory>
where
    F: Fn(&[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>)>,
{
    let step = |d: &Domain, anchor: &[f64], g: &[f64], sign: f64| {
        let v: Vec<f64> = anchor.iter().zip(g).map(|(a, b)| a + sign * eta * b).collect();
        d.project(&v)
    };
    let (g0x, g0y) = grad(&x0, &y0)?;
    let mut tr = Trajectory { xs: vec![x0.clone()], ys: vec![y0.clone()], gx: vec![g0x], gy: vec![g0y] };
    let (mut xh, mut yh) = (x0, y0);
    for t in 0..horizon {
        let (gx, gy) = (&tr.gx[t], &tr.gy[t]);
        xh = step(x, &xh, gx, -1.0)?;
        yh = step(y, &yh, gy, 1.0)?;
        let xn = step(x, &xh, gx, -1.0)?;
        let yn = step(y, &yh, gy, 1.0)?;
        let (gxn, gyn) = grad(&xn, &yn)?;
        if gxn.iter().chain(&gyn).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient at step {}", t + 1)));
        }
        tr.xs.push(xn);
        tr.ys.push(yn);
        tr.gx.push(gxn);
        tr.gy.push(gyn);
    }
    Ok(tr)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum()
}

fn finish(x: &Domain, y: &Domain, tr: &Trajectory, eta: f64, x0: &[f64], y0: &[f64]) -> Result<(f64, f64, f64, Vec<f64>)> {
    let omega_x = x.omega_from(x0)?;
    let omega_y = y.omega_from(y0)?;
    let path = (1..tr.xs.len()).map(|t| sq_dist(&tr.xs[t], &tr.xs[t - 1]) + sq_dist(&tr.ys[t], &tr.ys[t - 1])).sum();
    // linearised regrets against the best fixed point in hindsight
    let (mut cgx, mut cgy) = (vec![0.0; x.dim()], vec![0.0; y.dim()]);
    let (mut played_x, mut played_y) = (0.0, 0.0);
    let mut regret_sum = Vec::with_capacity(tr.xs.len() - 1);
    for t in 1..tr.xs.len() {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        played_x += dot(&tr.gx[t], &tr.xs[t]);
        played_y += dot(&tr.gy[t], &tr.ys[t]);
        cgx.iter_mut().zip(&tr.gx[t]).for_each(|(c, g)| *c -= g);
        cgy.iter_mut().zip(&tr.gy[t]).for_each(|(c, g)| *c += g);
        let rx = played_x + x.best_response(&cgx).1;
        let ry = y.best_response(&cgy).1 - played_y;
        regret_sum.push(rx + ry);
    }
    let _ = eta;
    Ok((omega_x, omega_y, path, regret_sum))
}

fn start(d: &Domain, given: Option<Vec<f64>>) -> Result<Vec<f64>> {
    match given {
        Some(v) if v.len() != d.dim() => Err(Error::Dimension("start does not match its domain".into())),
        Some(v) => d.project(&v),
        None => d.center(),
    }
}

/// Euclidean OMD on both sides of `bspp`, logging last- and average-iterate
/// gaps and the path-length certificate.
pub fn bspp_omd_run(bspp: &Bspp, eta: f64, horizon: usize, x0: Option<Vec<f64>>, y0: Option<Vec<f64>>) -> Result<BsppRun> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Config("η must be positive".into()));
    }
    let (x0, y0) = (start(&bspp.x, x0)?, start(&bspp.y, y0)?);
    let a = &bspp.a;
    let tr = omd_pair(&bspp.x, &bspp.y, x0.clone(), y0.clone(), eta, horizon, |x, y| {
        let gx = a * DVector::from_column_slice(y);
        let gy = a.transpose() * DVector::from_column_slice(x);
        Ok((gx.as_slice().to_vec(), gy.as_slice().to_vec()))
    })?;
    let (omega_x, omega_y, path, regret_sum) = finish(&bspp.x, &bspp.y, &tr, eta, &x0, &y0)?;
    let last_gap: Vec<f64> = tr.xs.iter().zip(&tr.ys).map(|(x, y)| bspp.saddle_point_gap(x, y)).collect();
    let mut avg_gap = vec![last_gap[0]];
    let (mut sx, mut sy) = (vec![0.0; bspp.x.dim()], vec![0.0; bspp.y.dim()]);
    for t in 1..tr.xs.len() {
        sx.iter_mut().zip(&tr.xs[t]).for_each(|(s, v)| *s += v);
        sy.iter_mut().zip(&tr.ys[t]).for_each(|(s, v)| *s += v);
        let k = t as f64;
        let ax: Vec<f64> = sx.iter().map(|v| v / k).collect();
        let ay: Vec<f64> = sy.iter().map(|v| v / k).collect();
        avg_gap.push(bspp.saddle_point_gap(&ax, &ay));
    }
    Ok(BsppRun {
        eta,
        last_gap,
        avg_gap,
        path,
        path_bound: 16.0 * (omega_x + omega_y),
        omega_x,
        omega_y,
        regret_sum,
        x: tr.xs.last().cloned().unwrap_or_default(),
        y: tr.ys.last().cloned().unwrap_or_default(),
    })
}

/// Gradients `(∇ₓf, ∇_yf)` of a convex-concave `f` at `(x, y)`.
pub type GradOracle<'a> = &'a dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>);

#[derive(Clone, Debug, Serialize)]
pub struct ConvexConcaveRun {
    pub eta: f64,
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<Vec<f64>>,
    pub path: f64,
    pub path_bound: f64,
    pub regret_sum: Vec<f64>,
}

/// OMD on the tangent planes of an `L`-smooth convex-concave `f` with
/// `η = 1/(8L)`; `x` minimises.
pub fn convex_concave_run(grad: GradOracle, x: &Domain, y: &Domain, l: f64, horizon: usize) -> Result<ConvexConcaveRun> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Config("smoothness constant must be positive".into()));
    }
    convex_concave_run_with_eta(grad, x, y, 1.0 / (8.0 * l), horizon, None, None)
}

pub fn convex_concave_run_with_eta(
    grad: GradOracle,
    x: &Domain,
    y: &Domain,
    eta: f64,
    horizon: usize,
    x0: Option<Vec<f64>>,
    y0: Option<Vec<f64>>,
) -> Result<ConvexConcaveRun> {
    x.validate()?;
    y.validate()?;
    let (x0, y0) = (start(x, x0)?, start(y, y0)?);
    let tr = omd_pair(x, y, x0.clone(), y0.clone(), eta, horizon, |a, b| {
        let (gx, gy) = grad(a, b);
        if gx.len() != x.dim() || gy.len() != y.dim() {
            return Err(Error::Dimension("gradient oracle returned the wrong length".into()));
        }
        if gx.iter().chain(&gy).any(|v| v.is_nan()) {
            return Err(Error::NonFinite("gradient oracle returned NaN".into()));
        }
        Ok((gx, gy))
    })?;
    let (omega_x, omega_y, path, regret_sum) = finish(x, y, &tr, eta, &x0, &y0)?;
    Ok(ConvexConcaveRun { eta, xs: tr.xs, ys: tr.ys, path, path_bound: 16.0 * (omega_x + omega_y), regret_sum })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCsvRow {
    pub iter: usize,
    pub last_gap: String,
    pub avg_gap: String,
}

impl BsppRun {
    pub fn csv_rows(&self) -> Vec<GapCsvRow> {
        self.last_gap
            .iter()
            .zip(&self.avg_gap)
            .enumerate()
            .map(|(iter, (l, a))| GapCsvRow { iter, last_gap: format!("{l:.16e}"), avg_gap: format!("{a:.16e}") })
            .collect()
    }
}
