//! Fixed test games used by the experiments and the CLI.

use crate::error::{Error, Result};
use crate::game::{NormalFormGame, Orientation};

/// Cost matrix of the row player in zero-sum game `k` (1-based); the
/// column player receives it as payoff.
pub fn zero_sum_cost(k: usize) -> Result<Vec<Vec<f64>>> {
    let m = match k {
        1 => [[1.0, -1.0, -1.0], [-1.0, -1.0, 0.0], [-0.5, 0.0, -1.0]],
        2 => [[1.0, -2.0, -1.0], [-1.0, 1.0, 0.0], [-0.5, 1.0, -1.0]],
        3 => [[-1.0, 1.0, -1.0], [0.0, 0.5, -1.0], [0.3, -0.5, -0.5]],
        _ => return Err(Error::Config(format!("no zero-sum builtin {k} (expected 1..3)"))),
    };
    Ok(m.iter().map(|r| r.to_vec()).collect())
}

/// Column player's cost in strategically zero-sum game `k`, built from its
/// decomposition `B = −λ′A + 1 v_bᵀ` against [`zero_sum_cost`].
pub fn szs_cost(k: usize) -> Result<Vec<Vec<f64>>> {
    let a = zero_sum_cost(k)?;
    let (l, vb) = szs_known_decomposition(k)?;
    Ok(a.iter().map(|r| r.iter().zip(&vb).map(|(v, b)| -l * v + b).collect()).collect())
}

/// The column cost matrices as they are commonly tabulated. Only the first
/// agrees with its decomposition; the other two are kept for reference.
pub fn szs_cost_tabulated(k: usize) -> Result<Vec<Vec<f64>>> {
    let m = match k {
        1 => [[-1.0, 0.5, 1.0], [0.0, 0.5, 0.5], [-0.25, 0.0, 1.0]],
        2 => [[0.3, 0.0, 0.3], [-0.2, 0.25, 0.3], [-0.35, 0.75, 0.05]],
        3 => [[0.7, 0.5, 0.56], [0.4, 0.4, 0.7], [0.5, 0.6, 0.5]],
        _ => return Err(Error::Config(format!("no strategically zero-sum builtin {k} (expected 1..3)"))),
    };
    Ok(m.iter().map(|r| r.to_vec()).collect())
}

/// Known scale `λ′` and column offset `v_b` with `B = −λ′A + 1 v_bᵀ`.
pub fn szs_known_decomposition(k: usize) -> Result<(f64, Vec<f64>)> {
    match k {
        1 => Ok((0.5, vec![-0.5, 0.0, 0.5])),
        2 => Ok((0.5, vec![-0.2, 0.5, -0.2])),
        3 => Ok((0.2, vec![0.5, 0.5, 0.5])),
        _ => Err(Error::Config(format!("no strategically zero-sum builtin {k}"))),
    }
}

pub fn zero_sum_game(k: usize) -> Result<NormalFormGame> {
    NormalFormGame::zero_sum(&zero_sum_cost(k)?, Orientation::Minimize)
}

pub fn szs_game(k: usize) -> Result<NormalFormGame> {
    NormalFormGame::bimatrix(&zero_sum_cost(k)?, &szs_cost(k)?, Orientation::Minimize)
}

/// Bilinear game whose OGD limit is the zero-welfare origin although a
/// welfare-`2R²` equilibrium exists on the ℓ₁ ball of radius R.
pub fn inefficiency_matrices() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (vec![vec![1.0, -2.0], vec![-1.0, 1.0]], vec![vec![1.0, 1.0], vec![1.0, -1.0]])
}

/// `ε`-perturbation of a zero-sum game (`‖A + B‖_F = ε`) on which OGD diverges.
pub fn robustness_matrices(eps: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (vec![vec![1.0, 0.0], vec![0.0, eps / 2.0]], vec![vec![-1.0, 0.0], vec![0.0, eps / 2.0]])
}

/// Names accepted by [`normal_form`].
pub const NORMAL_FORM_NAMES: [&str; 6] = ["zero_sum_1", "zero_sum_2", "zero_sum_3", "szs_1", "szs_2", "szs_3"];

/// Look up a normal-form builtin by name.
pub fn normal_form(name: &str) -> Result<NormalFormGame> {
    let parse = |p: &str| name.strip_prefix(p).and_then(|s| s.parse::<usize>().ok());
    if let Some(k) = parse("zero_sum_") {
        zero_sum_game(k)
    } else if let Some(k) = parse("szs_") {
        szs_game(k)
    } else {
        Err(Error::Config(format!("unknown builtin game '{name}'")))
    }
}
