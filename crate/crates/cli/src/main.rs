//! `gamelab` command-line driver.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 certificate
//! violation, 3 divergence.

mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gamelab::continuous::{spectral_predict, BilinearGame, HgdMethod};
use gamelab::io::read_matrix_csv;
use gamelab::{Error, Result};
use rayon::prelude::*;

use crate::run::{error_code, Status};

#[derive(Parser)]
#[command(name = "gamelab", version, about = "Learning dynamics in games: runs, class checks and spectral analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment file, or every `*.json` in a directory
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a game against a class and print the verdict as JSON
    Verify {
        /// game file, or a builtin name such as `szs_1`
        #[arg(long)]
        game: String,
        #[arg(long)]
        class: String,
    },
    /// Spectral stability report of OGD on a bilinear game
    Analyze {
        #[arg(long, required_unless_present = "builtin")]
        a: Option<PathBuf>,
        #[arg(long, required_unless_present = "builtin")]
        b: Option<PathBuf>,
        /// `inefficiency` or `robustness`
        #[arg(long, conflicts_with_all = ["a", "b"])]
        builtin: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long)]
        eta: f64,
    },
}

fn workers() -> Result<usize> {
    match std::env::var("GAMELAB_WORKERS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("GAMELAB_WORKERS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn run_one(path: &Path, out: &Path) -> i32 {
    let base = path.parent().unwrap_or(Path::new("."));
    let result = config::load(path).and_then(|exp| run::run(&exp, base, out));
    match result {
        Ok(done) => {
            if done.status != Status::Ok {
                eprintln!("{}: {:?}", path.display(), done.status);
            }
            done.status.exit_code()
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            error_code(&e)
        }
    }
}

/// Suite exit code: configuration errors first, then violations, then divergence.
fn combine(codes: &[i32]) -> i32 {
    [1, 2, 3].into_iter().find(|c| codes.contains(c)).unwrap_or(0)
}

fn cmd_run(config: &Path, out: &Path) -> Result<i32> {
    if !config.is_dir() {
        return Ok(run_one(config, out));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(config)
        .map_err(|e| Error::Io(format!("{}: {e}", config.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers()?)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let codes: Vec<i32> = pool.install(|| {
        files
            .par_iter()
            .map(|f| {
                let stem = f.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
                run_one(f, &out.join(stem))
            })
            .collect()
    });
    Ok(combine(&codes))
}

fn cmd_verify(game: &str, class: &str) -> Result<i32> {
    let src = if Path::new(game).is_file() {
        config::Source::File { file: PathBuf::from(game) }
    } else {
        config::Source::Builtin { builtin: game.to_string() }
    };
    let done = run::verify(Path::new("."), &src, class)?;
    println!("{}", serde_json::to_string_pretty(&done.report).map_err(|e| Error::Io(e.to_string()))?);
    Ok(done.status.exit_code())
}

fn cmd_analyze(a: Option<&Path>, b: Option<&Path>, builtin: Option<&str>, epsilon: f64, eta: f64) -> Result<i32> {
    if !(eta > 0.0) {
        return Err(Error::Config("--eta must be positive".into()));
    }
    let (a, b) = match (builtin, a, b) {
        (Some("inefficiency"), ..) => gamelab::builtins::inefficiency_matrices(),
        (Some("robustness"), ..) => gamelab::builtins::robustness_matrices(epsilon),
        (Some(other), ..) => return Err(Error::Config(format!("unknown bilinear builtin '{other}'"))),
        (None, Some(a), Some(b)) => (read_matrix_csv(a)?, read_matrix_csv(b)?),
        _ => return Err(Error::Config("need --a and --b, or --builtin".into())),
    };
    if a.len() != a[0].len() || b.len() != b[0].len() {
        return Err(Error::Dimension("analyze needs square matrices".into()));
    }
    let g = BilinearGame::new(&a, &b, None)?;
    let rep = spectral_predict(&g.interaction(), &HgdMethod::ogd(eta))?;
    println!("{}", serde_json::to_string_pretty(&rep).map_err(|e| Error::Io(e.to_string()))?);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { config, out } => cmd_run(config, out),
        Cmd::Verify { game, class } => cmd_verify(game, class),
        Cmd::Analyze { a, b, builtin, epsilon, eta } => cmd_analyze(a.as_deref(), b.as_deref(), builtin.as_deref(), *epsilon, *eta),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        error_code(&e)
    });
    ExitCode::from(code as u8)
}

#[cfg(test)]
mod tests {
    use super::combine;

    #[test]
    fn suite_code_precedence() {
        assert_eq!(combine(&[0, 0]), 0);
        assert_eq!(combine(&[3, 0, 2]), 2);
        assert_eq!(combine(&[3, 1]), 1);
        assert_eq!(combine(&[]), 0);
    }
}
