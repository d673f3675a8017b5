//! One configured run: dynamics, every diagnostic, trace and summary files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classes::{regret_prefixes, RegretWeights};
use crate::diagnostics::{
    detect_convergence, extract_best_iterate, path_length_bound_check, payoff_lipschitz_check,
    round_diagnostics, rvu_bound_check, BestIterate, BoundCheck, ConvergenceReport, LipschitzCheck,
    RvuCheck, DEFAULT_CONVERGENCE_TOL, DEFAULT_WINDOW,
};
use crate::dynamics::{run_dynamics, theorem_lr_cap, Algorithm};
use crate::error::{LabError, Result};
use crate::game::nash_gap;
use crate::regularizer::NormConstants;
use crate::runner::config::{GameSource, RunConfig};
use crate::trajectory::Trajectory;

pub const TRACE_HEADER: &str = "# regret-lab trace v1";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// `printf("%.12g")`.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= DIGITS {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RvuStatus {
    pub player: usize,
    pub holds: bool,
    pub worst_slack: f64,
    pub divergence_bound: f64,
}

impl From<&RvuCheck> for RvuStatus {
    fn from(c: &RvuCheck) -> Self {
        Self {
            player: c.player,
            holds: c.holds,
            worst_slack: c.worst_slack,
            divergence_bound: c.divergence_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PathStatus {
    Evaluated {
        corrupted: bool,
        holds: bool,
        pigeonhole_holds: bool,
        worst_slack: f64,
        final_lhs: f64,
        final_rhs: f64,
    },
    Skipped {
        reason: String,
    },
    Unavailable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsStatus {
    /// Empty for OFTRL runs, which keep no anchors.
    pub rvu: Vec<RvuStatus>,
    pub lipschitz: Option<LipschitzCheck>,
    pub path_length: PathStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub game: GameSource,
    pub action_counts: Vec<usize>,
    pub regret_weights: Vec<f64>,
    pub lr_cap: f64,
    pub eta_initial: f64,
    pub within_cap: bool,
    pub initial_gap: f64,
    pub final_gap: f64,
    pub best_iterate: BestIterate,
    pub regret: Vec<f64>,
    pub weighted_regret: f64,
    pub bounds_status: BoundsStatus,
    pub corruption_totals: Vec<f64>,
    pub corruption_sups: Vec<f64>,
    pub convergence: Option<ConvergenceReport>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: RunSummary,
    pub trajectory: Trajectory,
    /// Trace and summary paths when an output directory was configured.
    pub files: Option<(PathBuf, PathBuf)>,
}

pub fn run_experiment(config: &RunConfig) -> Result<ExperimentOutput> {
    let run = config.resolve()?;
    let game = &run.game;
    let n = game.num_players();
    let traj = run_dynamics(game, &run.dynamics)?;
    let specs = run.dynamics.regularizer.for_game(game.action_counts())?;
    let schedule = &run.dynamics.schedule;

    let lr_cap = theorem_lr_cap(n, NormConstants::combined(&specs), &run.weights, traj.is_corrupted())?;
    let eta_initial = schedule.initial_max();
    let within_cap = eta_initial <= lr_cap * (1.0 + 1e-12);
    if !within_cap {
        log::warn!("initial learning rate {eta_initial} exceeds the admissible cap {lr_cap}; bound checks are skipped");
    }

    let rounds = round_diagnostics(game, &traj, &specs)?;
    let regrets: Vec<Vec<f64>> = (0..n).map(|i| regret_prefixes(&traj, i)).collect::<Result<_>>()?;
    let rvu: Vec<RvuCheck> = match run.dynamics.algorithm {
        Algorithm::Omd => (0..n)
            .map(|i| rvu_bound_check(&traj, &specs, schedule, i))
            .collect::<Result<_>>()?,
        Algorithm::Oftrl => Vec::new(),
    };
    let lipschitz = if traj.len() >= 2 {
        Some(payoff_lipschitz_check(&traj)?)
    } else {
        None
    };
    let path = match path_length_bound_check(&traj, &specs, schedule, &run.weights) {
        Ok(c) => Some(c),
        Err(LabError::DiagnosticUnavailable(_)) => None,
        Err(e) => return Err(e),
    };
    let path_status = match &path {
        Some(BoundCheck::Evaluated(c)) => PathStatus::Evaluated {
            corrupted: c.corrupted,
            holds: c.holds,
            pigeonhole_holds: c.pigeonhole_holds,
            worst_slack: c.worst_slack,
            final_lhs: *c.lhs.last().expect("non-empty"),
            final_rhs: *c.rhs.last().expect("non-empty"),
        },
        Some(BoundCheck::Skipped { reason, .. }) => PathStatus::Skipped { reason: reason.clone() },
        None => PathStatus::Unavailable {
            reason: "no anchors recorded for this algorithm".into(),
        },
    };
    let best = extract_best_iterate(game, &traj, &specs, schedule, None)?;
    let window = config.window.unwrap_or(DEFAULT_WINDOW);
    let tol = config.tol.unwrap_or(DEFAULT_CONVERGENCE_TOL);
    let convergence = if window <= traj.len() {
        Some(detect_convergence(game, &traj, window, tol)?)
    } else {
        log::info!("convergence check skipped: window {window} exceeds {} rounds", traj.len());
        None
    };
    let t_last = traj.len();
    let regret: Vec<f64> = regrets.iter().map(|r| r[t_last - 1]).collect();
    let summary = RunSummary {
        config: config.clone(),
        game: run.source.clone(),
        action_counts: game.action_counts().to_vec(),
        regret_weights: run.weights.values().to_vec(),
        lr_cap,
        eta_initial,
        within_cap,
        initial_gap: nash_gap(game, traj.initial().expect("dynamics record x^0"))?,
        final_gap: rounds[t_last - 1].nash_gap,
        weighted_regret: weighted(&regret, &run.weights),
        regret,
        best_iterate: best,
        bounds_status: BoundsStatus {
            rvu: rvu.iter().map(RvuStatus::from).collect(),
            lipschitz,
            path_length: path_status,
        },
        corruption_totals: (0..n).map(|i| traj.corruption_total(i, t_last)).collect(),
        corruption_sups: (0..n).map(|i| traj.corruption_sup(i, t_last)).collect(),
        convergence,
    };

    let files = match &config.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| LabError::Io(format!("cannot create {}: {e}", dir.display())))?;
            let trace = dir.join(TRACE_FILE);
            write_trace(&trace, &traj, game.action_counts(), &run.weights, &regrets, &rounds, &rvu, path.as_ref())?;
            let summary_path = dir.join(SUMMARY_FILE);
            std::fs::write(&summary_path, serde_json::to_string_pretty(&summary).expect("summary serializes"))
                .map_err(|e| LabError::Io(format!("cannot write {}: {e}", summary_path.display())))?;
            Some((trace, summary_path))
        }
        None => None,
    };
    Ok(ExperimentOutput {
        summary,
        trajectory: traj,
        files,
    })
}

fn weighted(regret: &[f64], weights: &RegretWeights) -> f64 {
    regret.iter().zip(weights.values()).map(|(r, m)| r * m).sum()
}

/// Column names of the trace; identical for both algorithms.
pub fn trace_columns(action_counts: &[usize]) -> Vec<String> {
    let n = action_counts.len();
    let mut cols = vec!["t".to_string()];
    for (i, &k) in action_counts.iter().enumerate() {
        cols.extend((0..k).map(|a| format!("x{i}_{a}")));
    }
    cols.extend((0..n).map(|i| format!("regret{i}")));
    cols.push("weighted_regret".into());
    cols.push("nash_gap".into());
    cols.push("eps_t".into());
    cols.extend((0..n).map(|i| format!("corruption{i}")));
    cols.extend((0..n).map(|i| format!("anchor_dist{i}")));
    cols.extend((0..n).map(|i| format!("prev_anchor_dist{i}")));
    cols.extend((0..n).map(|i| format!("rvu_slack{i}")));
    cols.push("path_slack".into());
    cols.extend((0..n).map(|i| format!("lipschitz_slack{i}")));
    cols
}

#[allow(clippy::too_many_arguments)]
fn write_trace(
    path: &Path,
    traj: &Trajectory,
    action_counts: &[usize],
    weights: &RegretWeights,
    regrets: &[Vec<f64>],
    rounds: &[crate::diagnostics::RoundDiagnostics],
    rvu: &[RvuCheck],
    path_check: Option<&BoundCheck>,
) -> Result<()> {
    let io = |e: std::io::Error| LabError::Io(format!("cannot write {}: {e}", path.display()));
    let csv_err = |e: csv::Error| LabError::Io(format!("cannot write {}: {e}", path.display()));
    let mut file = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(file, "{TRACE_HEADER}").map_err(io)?;
    let mut out = csv::Writer::from_writer(file);
    out.write_record(trace_columns(action_counts)).map_err(csv_err)?;
    let n = action_counts.len();
    let opt = |x: Option<f64>| x.map(fmt_g).unwrap_or_default();
    let evaluated = path_check.and_then(BoundCheck::evaluated);
    for (k, row) in rounds.iter().enumerate() {
        let mut rec = vec![row.t.to_string()];
        for s in traj.played()[k].strategies() {
            rec.extend(s.probs().iter().map(|p| fmt_g(*p)));
        }
        let regret: Vec<f64> = (0..n).map(|i| regrets[i][k]).collect();
        rec.extend(regret.iter().map(|r| fmt_g(*r)));
        rec.push(fmt_g(weighted(&regret, weights)));
        rec.push(fmt_g(row.nash_gap));
        rec.push(opt(row.eps));
        rec.extend(row.corruption.iter().map(|c| fmt_g(*c)));
        for dists in [&row.to_anchor, &row.to_previous_anchor] {
            rec.extend((0..n).map(|i| opt(dists.as_ref().map(|d| d[i]))));
        }
        rec.extend((0..n).map(|i| opt(rvu.get(i).map(|c| c.rhs[k] - c.lhs[k]))));
        rec.push(opt(evaluated.map(|c| c.rhs[k] - c.lhs[k])));
        let lipschitz = match (&row.step, &row.payoff_variation) {
            (Some(step), Some(var)) => {
                let total: f64 = step.iter().sum();
                (0..n).map(|i| Some(total - step[i] - var[i])).collect()
            }
            _ => vec![None; n],
        };
        rec.extend(lipschitz.into_iter().map(opt));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush().map_err(io)?;
    Ok(())
}
