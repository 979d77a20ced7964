//! One experiment: load inputs, run, write artifacts, classify the outcome.

use std::fs;
use std::path::Path;

use gamelab::bspp::bspp_omd_run;
use gamelab::classes::{verify_constant_sum_dense, verify_strategically_zero_sum, ConstantSum};
use gamelab::continuous::{fit_linear_rate, random_point, simulate, spectral_predict, BilinearGame, HgdMethod, Outcome, Verdict};
use gamelab::fisher::{random_market, run_pr};
use gamelab::game::{NormalFormGame, Orientation};
use gamelab::io::{fmt_f64, runlog_rows, write_csv, write_json};
use gamelab::learners::run_dynamics;
use gamelab::metrics::{declared_rvu_for, last_iterate_certificate, rvu_audit_player, utility_variation_audit, AuditReport};
use gamelab::potential::{random_weighted_potential, run_md_potential_with_eta, sqrt_regret_audit};
use gamelab::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, Experiment, MarketSource, PotentialSource};

/// How a finished experiment should be reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    Diverged,
    Violation,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Violation => 2,
            Status::Diverged => 3,
        }
    }
}

pub struct Finished {
    pub status: Status,
    pub report: Value,
}

fn status_of(audits: &[AuditReport]) -> Status {
    if audits.iter().all(|a| a.pass) {
        Status::Ok
    } else {
        Status::Violation
    }
}

#[derive(Serialize)]
struct NormRow {
    init: usize,
    iter: usize,
    norm: String,
}

/// Run `exp` (read relative to `base`) and write its artifacts into `out`.
pub fn run(exp: &Experiment, base: &Path, out: &Path) -> Result<Finished> {
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let done = match exp {
        Experiment::NfgRun { game, learners, horizon, init, epsilon } => {
            let g = config::normal_form(base, game)?;
            let log = run_dynamics(&g, learners, *horizon, init)?;
            let (rows, metrics) = runlog_rows(&log);
            write_csv(&out.join("runlog.csv"), &rows)?;
            write_csv(&out.join("metrics.csv"), &metrics)?;
            let mut audits = vec![utility_variation_audit(&log)];
            for i in 0..log.num_players() {
                if let Some(p) = declared_rvu_for(&log, i) {
                    audits.push(rvu_audit_player(&log, i, &p)?);
                }
            }
            let last = epsilon.map(|e| last_iterate_certificate(&log, e)).transpose()?;
            let mut status = status_of(&audits);
            if last.as_ref().is_some_and(|c| !c.pass) {
                status = Status::Violation;
            }
            Finished {
                status,
                report: json!({
                    "kind": "nfg_run",
                    "horizon": horizon,
                    "final_nash_gap": log.nash_gap.last(),
                    "audits": audits,
                    "last_iterate": last,
                }),
            }
        }
        Experiment::PotentialRun { game, regularizers, horizon, eta, init, seed } => {
            let pg = match game {
                PotentialSource::File { file } => config::potential_file(base, file)?,
                PotentialSource::Random { random } => random_weighted_potential(&mut ChaCha8Rng::seed_from_u64(*seed), random)?,
            };
            let eta = match eta {
                Some(e) => *e,
                None => pg.md_eta()?,
            };
            match run_md_potential_with_eta(&pg, regularizers, *horizon, init, eta) {
                Ok(run) => {
                    let (rows, metrics) = runlog_rows(&run.log);
                    write_csv(&out.join("runlog.csv"), &rows)?;
                    write_csv(&out.join("metrics.csv"), &metrics)?;
                    let regret = sqrt_regret_audit(&pg, &run)?;
                    let mut audits = vec![run.monotone.clone(), run.cumulative.clone()];
                    audits.extend(regret);
                    Finished {
                        status: status_of(&audits),
                        report: json!({
                            "kind": "potential_run",
                            "eta": eta,
                            "phi_final": run.phi.last(),
                            "audits": audits,
                        }),
                    }
                }
                Err(Error::Certificate { step, what, slack }) => Finished {
                    status: Status::Violation,
                    report: json!({
                        "kind": "potential_run",
                        "eta": eta,
                        "violation": { "step": step, "check": what, "slack": slack },
                    }),
                },
                Err(e) => return Err(e),
            }
        }
        Experiment::FisherRun { market, horizon, seed } => {
            let m = match market {
                MarketSource::File { file } => config::market_file(base, file)?,
                MarketSource::Random { buyers, goods } => random_market(&mut ChaCha8Rng::seed_from_u64(*seed), *buyers, *goods)?,
            };
            let run = run_pr(&m, m.uniform_spend(), *horizon)?;
            write_csv(&out.join("runlog.csv"), &run.csv_rows())?;
            Finished {
                status: status_of(std::slice::from_ref(&run.monotone)),
                report: json!({
                    "kind": "fisher_run",
                    "phi_final": run.phi.last(),
                    "residual_final": run.residual.last(),
                    "prices": m.prices(run.b.last().expect("non-empty run")),
                    "audits": [run.monotone],
                }),
            }
        }
        Experiment::ContinuousRun { game, method, horizon, seed, inits } => {
            let g = config::bilinear(base, game)?;
            let m = method.method()?;
            continuous(&g, &m, *horizon, *seed, *inits, out)?
        }
        Experiment::BsppRun { game, eta, horizon } => {
            let b = config::bspp(base, game)?;
            let eta = eta.unwrap_or_else(|| b.default_eta());
            let run = bspp_omd_run(&b, eta, *horizon, None, None)?;
            write_csv(&out.join("gaps.csv"), &run.csv_rows())?;
            let regret_min = run.regret_sum.iter().copied().fold(f64::INFINITY, f64::min);
            let audits = vec![
                AuditReport { check: "path_length".into(), pass: run.path_slack() >= 0.0, worst_slack: run.path_slack(), prefix: *horizon },
                AuditReport { check: "regret_sum".into(), pass: regret_min >= -1e-9, worst_slack: regret_min, prefix: 0 },
            ];
            Finished {
                status: status_of(&audits),
                report: json!({
                    "kind": "bspp_run",
                    "eta": eta,
                    "spectral_norm": b.spectral_norm(),
                    "last_gap": run.last_gap.last(),
                    "best_last_gap": run.best_last_gap().last(),
                    "avg_gap": run.avg_gap.last(),
                    "path": run.path,
                    "path_bound": run.path_bound,
                    "audits": audits,
                }),
            }
        }
        Experiment::Verify { game, class } => verify(base, game, class)?,
        Experiment::Analyze { game, method } => {
            let g = config::bilinear(base, game)?;
            let rep = spectral_predict(&g.interaction(), &method.method()?)?;
            Finished { status: Status::Ok, report: serde_json::to_value(rep).map_err(|e| Error::Io(e.to_string()))? }
        }
    };
    write_json(&out.join("report.json"), &done.report)?;
    Ok(done)
}

fn continuous(g: &BilinearGame, m: &HgdMethod, horizon: usize, seed: u64, inits: usize, out: &Path) -> Result<Finished> {
    let spectral = spectral_predict(&g.interaction(), m)?;
    let lin = g.to_linear();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut sims = Vec::new();
    let mut diverged = matches!(spectral.verdict, Verdict::Diverge { .. });
    for k in 0..inits.max(1) {
        let x0 = random_point(&mut rng, &[g.dim(), g.dim()], 1.0);
        let sim = simulate(&lin, m, &x0, horizon, false)?;
        rows.extend(sim.norms.iter().enumerate().map(|(iter, n)| NormRow { init: k, iter, norm: fmt_f64(*n) }));
        diverged |= matches!(sim.outcome, Outcome::Diverged { .. });
        sims.push(json!({
            "outcome": sim.outcome,
            "max_norm": sim.max_norm(),
            "final_norm": sim.norms.last(),
            "fitted_rate": fit_linear_rate(&sim.norms),
            "projected": sim.projected,
        }));
    }
    write_csv(&out.join("runlog.csv"), &rows)?;
    Ok(Finished {
        status: if diverged { Status::Diverged } else { Status::Ok },
        report: json!({ "kind": "continuous_run", "spectral": spectral, "simulations": sims }),
    })
}

/// Utilities as written in the source, undoing the internal sign and scale.
fn file_units(g: &NormalFormGame, i: usize) -> Vec<f64> {
    let sign = if g.orientation() == Orientation::Minimize { -1.0 } else { 1.0 };
    g.tensor(i).iter().map(|v| sign * v / g.scales()[i]).collect()
}

pub fn verify(base: &Path, game: &config::Source, class: &str) -> Result<Finished> {
    let g = config::normal_form(base, game)?;
    let tol = 1e-9;
    let (pass, detail) = match class {
        "constant_sum" | "zero_sum" => {
            let n = g.num_players();
            let sums: Vec<f64> = (0..g.num_profiles()).map(|idx| (0..n).map(|i| file_units(&g, i)[idx]).sum()).collect();
            let res = verify_constant_sum_dense(&g, tol);
            let pass = match &res {
                ConstantSum::Constant { .. } => class == "constant_sum" || sums[0].abs() <= tol,
                ConstantSum::Witness { .. } => false,
            };
            (pass, json!({ "result": res, "c": sums[0] }))
        }
        "strategically_zero_sum" => {
            if g.num_players() != 2 {
                return Err(Error::Config("strategically zero-sum check needs two players".into()));
            }
            let (r, c) = (g.action_counts()[0], g.action_counts()[1]);
            let mat = |i| {
                let t = file_units(&g, i);
                (0..r).map(|a| t[a * c..(a + 1) * c].to_vec()).collect::<Vec<_>>()
            };
            let d = verify_strategically_zero_sum(&mat(0), &mat(1), 1e-9)?;
            (d.accepted, serde_json::to_value(&d).map_err(|e| Error::Io(e.to_string()))?)
        }
        other => return Err(Error::Config(format!("unknown class '{other}' (expected constant_sum, zero_sum, strategically_zero_sum)"))),
    };
    Ok(Finished {
        status: if pass { Status::Ok } else { Status::Violation },
        report: json!({ "kind": "verify", "class": class, "pass": pass, "detail": detail }),
    })
}

/// Exit code for an error: certificate failures are violations, divergence
/// is divergence, everything else is a configuration or input problem.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::Certificate { .. } => 2,
        Error::Diverged(_) => 3,
        Error::Step { source, .. } => error_code(source),
        _ => 1,
    }
}
