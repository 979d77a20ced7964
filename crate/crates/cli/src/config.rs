//! Experiment configuration files (one JSON object per experiment).

use std::path::{Path, PathBuf};

use gamelab::bspp::Bspp;
use gamelab::continuous::{BilinearGame, HgdMethod};
use gamelab::fisher::FisherMarket;
use gamelab::game::NormalFormGame;
use gamelab::io::{read_json, read_matrix_csv, BsppFile, GameFile, PotentialFile};
use gamelab::learners::{Init, LearnerConfig};
use gamelab::potential::PotentialGame;
use gamelab::regularizers::Regularizer;
use gamelab::{builtins, Error, Result};
use serde::{Deserialize, Serialize};

/// Builtin name or a path relative to the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Source {
    Builtin { builtin: String },
    File { file: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PotentialSource {
    File { file: PathBuf },
    /// random weighted potential game drawn from the experiment seed
    Random { random: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum MarketSource {
    File { file: PathBuf },
    Random { buyers: usize, goods: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum BilinearSource {
    /// `inefficiency` or `robustness`
    Builtin {
        builtin: String,
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default)]
        radius: Option<f64>,
    },
    Files {
        a: PathBuf,
        b: PathBuf,
        #[serde(default)]
        radius: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum MethodSpec {
    Ogd { ogd: f64 },
    Coefficients { alpha: Vec<f64>, beta: Vec<f64> },
}

impl MethodSpec {
    pub fn method(&self) -> Result<HgdMethod> {
        match self {
            MethodSpec::Ogd { ogd } if *ogd > 0.0 => Ok(HgdMethod::ogd(*ogd)),
            MethodSpec::Ogd { .. } => Err(Error::Config("OGD step must be positive".into())),
            MethodSpec::Coefficients { alpha, beta } => HgdMethod::new(alpha.clone(), beta.clone()),
        }
    }
}

fn default_seed() -> u64 {
    0
}

fn default_inits() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    NfgRun {
        game: Source,
        learners: Vec<LearnerConfig>,
        horizon: usize,
        #[serde(default)]
        init: Init,
        /// accuracy for the last-iterate certificate (OMD with smooth regularizers only)
        #[serde(default)]
        epsilon: Option<f64>,
    },
    PotentialRun {
        game: PotentialSource,
        regularizers: Vec<Regularizer>,
        horizon: usize,
        /// overrides `1/(2L)`
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        init: Init,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    FisherRun {
        market: MarketSource,
        horizon: usize,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    ContinuousRun {
        game: BilinearSource,
        method: MethodSpec,
        horizon: usize,
        #[serde(default = "default_seed")]
        seed: u64,
        /// number of random initial points in `[−1, 1]^d`
        #[serde(default = "default_inits")]
        inits: usize,
    },
    BsppRun {
        game: Source,
        /// defaults to `1/(4‖A‖₂)`
        #[serde(default)]
        eta: Option<f64>,
        horizon: usize,
    },
    Verify {
        game: Source,
        class: String,
    },
    Analyze {
        game: BilinearSource,
        method: MethodSpec,
    },
}

pub fn load(path: &Path) -> Result<Experiment> {
    read_json(path)
}

/// Resolve `p` against the directory holding the config.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn normal_form(base: &Path, src: &Source) -> Result<NormalFormGame> {
    match src {
        Source::Builtin { builtin } => builtins::normal_form(builtin),
        Source::File { file } => read_json::<GameFile>(&resolve(base, file))?.into_game(),
    }
}

pub fn potential_file(base: &Path, file: &Path) -> Result<PotentialGame> {
    read_json::<PotentialFile>(&resolve(base, file))?.into_potential()
}

pub fn market_file(base: &Path, file: &Path) -> Result<FisherMarket> {
    let m: FisherMarket = read_json(&resolve(base, file))?;
    m.validate()?;
    Ok(m)
}

pub fn bspp(base: &Path, src: &Source) -> Result<Bspp> {
    match src {
        Source::Builtin { builtin } if builtin == "kuhn" => gamelab::bspp::build_kuhn(),
        Source::Builtin { builtin } => Err(Error::Config(format!("unknown saddle-point builtin '{builtin}'"))),
        Source::File { file } => read_json::<BsppFile>(&resolve(base, file))?.into_bspp(),
    }
}

pub fn bilinear(base: &Path, src: &BilinearSource) -> Result<BilinearGame> {
    match src {
        BilinearSource::Builtin { builtin, epsilon, radius } => {
            let (a, b) = match builtin.as_str() {
                "inefficiency" => builtins::inefficiency_matrices(),
                "robustness" => builtins::robustness_matrices(epsilon.unwrap_or(0.05)),
                other => return Err(Error::Config(format!("unknown bilinear builtin '{other}'"))),
            };
            BilinearGame::new(&a, &b, *radius)
        }
        BilinearSource::Files { a, b, radius } => {
            let a = read_matrix_csv(&resolve(base, a))?;
            let b = read_matrix_csv(&resolve(base, b))?;
            if a.len() != a[0].len() || b.len() != b[0].len() {
                return Err(Error::Dimension("bilinear games need square matrices".into()));
            }
            BilinearGame::new(&a, &b, *radius)
        }
    }
}
