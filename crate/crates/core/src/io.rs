//! File formats: JSON game, market and saddle-point descriptions, matrix
//! CSV input, and the CSV logs written by runs.
//!
//! Floats in CSV output use `{:.16e}` (17 significant digits) so identical
//! runs produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bspp::{Bspp, Domain, Treeplex};
use crate::classes::{Edge, PolymatrixGame};
use crate::error::{Error, Result};
use crate::game::{NormalFormGame, Orientation, DEFAULT_ENUM_CAP};
use crate::learners::RunLog;
use crate::metrics::{path_length_sq, regret_report, PathNorm};
use crate::potential::PotentialGame;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

/// Utilities as per-player flat tensors, per-player nested matrices (two
/// players), or a polymatrix edge list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Utilities {
    Flat(Vec<Vec<f64>>),
    Matrices(Vec<Vec<Vec<f64>>>),
    Edges { edges: Vec<Edge> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub players: usize,
    pub action_counts: Vec<usize>,
    pub utilities: Utilities,
    #[serde(default)]
    pub orientation: Orientation,
}

impl GameFile {
    pub fn into_game(self) -> Result<NormalFormGame> {
        if self.players != self.action_counts.len() {
            return Err(Error::Config(format!("{} players but {} action counts", self.players, self.action_counts.len())));
        }
        let game = match self.utilities {
            Utilities::Flat(u) => NormalFormGame::new(self.action_counts.clone(), u, self.orientation)?,
            Utilities::Matrices(m) => {
                if m.len() != 2 || self.players != 2 {
                    return Err(Error::Config("nested matrices describe two-player games only".into()));
                }
                NormalFormGame::bimatrix(&m[0], &m[1], self.orientation)?
            }
            Utilities::Edges { edges } => {
                let pg = PolymatrixGame::new(self.action_counts.clone(), edges)?;
                let g = pg.to_normal_form(DEFAULT_ENUM_CAP)?;
                if self.orientation == Orientation::Minimize {
                    let t = (0..g.num_players()).map(|i| g.tensor(i).to_vec()).collect();
                    NormalFormGame::new(self.action_counts.clone(), t, Orientation::Minimize)?
                } else {
                    g
                }
            }
        };
        if game.action_counts() != self.action_counts.as_slice() {
            return Err(Error::Dimension("action counts do not match the utilities".into()));
        }
        Ok(game)
    }

    pub fn polymatrix(&self) -> Result<Option<PolymatrixGame>> {
        match &self.utilities {
            Utilities::Edges { edges } => Ok(Some(PolymatrixGame::new(self.action_counts.clone(), edges.clone())?)),
            _ => Ok(None),
        }
    }
}

/// A game file extended with a potential table and weights; the weights
/// relate `Φ` to the utilities as written in the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialFile {
    #[serde(flatten)]
    pub game: GameFile,
    pub phi_table: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PotentialFile {
    pub fn into_potential(self) -> Result<PotentialGame> {
        let game = self.game.into_game()?;
        let w: Vec<f64> = self.weights.iter().zip(game.scales()).map(|(w, s)| w / s).collect();
        PotentialGame::new(game, self.phi_table, w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Simplex,
    Treeplex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeplexPair {
    pub x: Treeplex,
    pub y: Treeplex,
}

/// `min_x max_y xᵀAy` with both players on simplices or treeplexes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsppFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub domain: DomainKind,
    #[serde(default)]
    pub treeplex: Option<TreeplexPair>,
}

impl BsppFile {
    pub fn into_bspp(self) -> Result<Bspp> {
        let rows = self.a.len();
        let cols = self.a.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || self.a.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("A must be a non-empty rectangular matrix".into()));
        }
        let a = DMatrix::from_fn(rows, cols, |i, j| self.a[i][j]);
        let (x, y) = match (self.domain, self.treeplex) {
            (DomainKind::Simplex, _) => (Domain::Simplex { dim: rows }, Domain::Simplex { dim: cols }),
            (DomainKind::Treeplex, Some(t)) => (Domain::Treeplex { treeplex: t.x }, Domain::Treeplex { treeplex: t.y }),
            (DomainKind::Treeplex, None) => return Err(Error::Config("treeplex domain needs a treeplex spec".into())),
        };
        Bspp::new(a, x, y)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Row-major matrix without a header.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("{}: bad number {s:?}: {e}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Dimension(format!("{}: matrix must be non-empty and rectangular", path.display())));
    }
    Ok(rows)
}

/// Write rows under a fixed header.
pub fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub const RUNLOG_HEADER: [&str; 8] = ["iter", "player", "x", "u", "regret", "path_sq_l1", "nash_gap", "welfare"];
pub const METRICS_HEADER: [&str; 5] = ["iter", "regret_sum", "path_sq_l1", "nash_gap", "welfare"];

/// Per player and iteration: strategy, utility vector (both `;`-joined),
/// cumulative regret, cumulative squared ℓ₁ path length, and the
/// profile's Nash gap and welfare.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLogRow {
    pub iter: usize,
    pub player: usize,
    pub x: String,
    pub u: String,
    pub regret: String,
    pub path_sq_l1: String,
    pub nash_gap: String,
    pub welfare: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub iter: usize,
    pub regret_sum: String,
    pub path_sq_l1: String,
    pub nash_gap: String,
    pub welfare: String,
}

pub fn runlog_rows(log: &RunLog) -> (Vec<RunLogRow>, Vec<MetricsRow>) {
    let reg = regret_report(log);
    let paths: Vec<Vec<f64>> = (0..log.num_players()).map(|i| path_length_sq(&log.player_x(i), PathNorm::L1)).collect();
    let mut rows = Vec::with_capacity(log.x.len() * log.num_players());
    let mut metrics = Vec::with_capacity(log.x.len());
    for t in 0..log.x.len() {
        for i in 0..log.num_players() {
            rows.push(RunLogRow {
                iter: t,
                player: i,
                x: fmt_vec(&log.x[t][i]),
                u: fmt_vec(&log.u[t][i]),
                regret: fmt_f64(reg.per_player[i][t]),
                path_sq_l1: fmt_f64(paths[i][t]),
                nash_gap: fmt_f64(log.nash_gap[t]),
                welfare: fmt_f64(log.welfare[t]),
            });
        }
        metrics.push(MetricsRow {
            iter: t,
            regret_sum: fmt_f64(reg.sum[t]),
            path_sq_l1: fmt_f64(paths.iter().map(|p| p[t]).sum()),
            nash_gap: fmt_f64(log.nash_gap[t]),
            welfare: fmt_f64(log.welfare[t]),
        });
    }
    (rows, metrics)
}

/// Check that a CSV file has exactly `header`, that every record has that
/// many fields, and that every field other than `;`-joined vectors parses.
pub fn lint_csv(path: &Path, header: &[&str]) -> Result<usize> {
    let mut rdr = csv::Reader::from_path(path)?;
    let got: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if got != header {
        return Err(Error::Config(format!("{}: header {got:?}, expected {header:?}", path.display())));
    }
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec?;
        for field in rec.iter() {
            for part in field.split(';') {
                part.parse::<f64>().map_err(|_| Error::Config(format!("{}: record {n}: bad field {field:?}", path.display())))?;
            }
        }
        n += 1;
    }
    Ok(n)
}

/// Write `text` followed by a newline.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    writeln!(f, "{text}").map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn game_file_forms_agree() {
        let nested = r#"{"players":2,"action_counts":[2,2],"utilities":[[[1,-1],[-1,1]],[[-1,1],[1,-1]]]}"#;
        let flat = r#"{"players":2,"action_counts":[2,2],"utilities":[[1,-1,-1,1],[-1,1,1,-1]],"orientation":"maximize"}"#;
        let edges = r#"{"players":2,"action_counts":[2,2],"utilities":{"edges":[{"i":0,"j":1,"A_ij":[[1,-1],[-1,1]],"A_ji":[[-1,1],[1,-1]]}]}}"#;
        let g1 = serde_json::from_str::<GameFile>(nested).unwrap().into_game().unwrap();
        let g2 = serde_json::from_str::<GameFile>(flat).unwrap().into_game().unwrap();
        let g3 = serde_json::from_str::<GameFile>(edges).unwrap().into_game().unwrap();
        assert_eq!(g1, g2);
        assert_eq!(g1.tensor(0), g3.tensor(0));
        assert_eq!(g1.tensor(1), g3.tensor(1));
        let bad = r#"{"players":3,"action_counts":[2,2],"utilities":[[1,-1,-1,1],[-1,1,1,-1]]}"#;
        assert!(serde_json::from_str::<GameFile>(bad).unwrap().into_game().is_err());
    }

    #[test]
    fn potential_file_folds_scale() {
        // coordination game with entries 2, rescaled to 1 internally
        let text = r#"{"players":2,"action_counts":[2,2],"utilities":[[2,0,0,2],[2,0,0,2]],
                       "phi_table":[2,0,0,2],"weights":[1,1]}"#;
        let pg = serde_json::from_str::<PotentialFile>(text).unwrap().into_potential().unwrap();
        assert_eq!(pg.weights(), &[2.0, 2.0]);
    }

    #[test]
    fn fmt_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
