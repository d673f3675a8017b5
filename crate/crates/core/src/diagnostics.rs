//! Runtime certificates computed from finished trajectories.
//!
//! Distances between strategies are measured in the norm paired with each
//! player's regularizer (`l1` for entropy, `l2` for euclid); payoff differences
//! in its dual. Path length at round `t` is
//! `P^t = sum_i ||x~_i^t - g_i^t||^2 + ||x~_i^t - g_i^{t-1}||^2` over prescribed
//! strategies, and `eps_t = sqrt(P^t)`.

use serde::Serialize;

use crate::classes::{regret_prefixes_of, RegretWeights};
use crate::dynamics::{theorem_lr_cap, LearningRateSchedule};
use crate::error::{LabError, Result};
use crate::game::{nash_gap_from_fields, NormalFormGame, StrategyProfile};
use crate::regularizer::{NormConstants, RegularizerSpec};
use crate::trajectory::Trajectory;

/// Slack allowed on the regret and path-length inequalities.
pub const BOUND_TOLERANCE: f64 = 1e-6;
/// Slack allowed on the payoff Lipschitz inequality.
pub const LIPSCHITZ_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_WINDOW: usize = 50;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundDiagnostics {
    pub t: usize,
    pub nash_gap: f64,
    /// `||x~_i^t - g_i^t||`, OMD only.
    pub to_anchor: Option<Vec<f64>>,
    /// `||x~_i^t - g_i^{t-1}||`, OMD only.
    pub to_previous_anchor: Option<Vec<f64>>,
    /// `||v_i^t - v_i^{t-1}||_inf`, absent at `t = 1` without a starting profile.
    pub payoff_variation: Option<Vec<f64>>,
    /// `||x_i^t - x_i^{t-1}||_1`.
    pub step: Option<Vec<f64>>,
    pub corruption: Vec<f64>,
    pub eps: Option<f64>,
}

fn check_specs(traj: &Trajectory, specs: &[RegularizerSpec]) -> Result<()> {
    if specs.len() != traj.num_players() {
        return Err(LabError::InvalidArgument(format!(
            "{} regularizers for {} players",
            specs.len(),
            traj.num_players()
        )));
    }
    Ok(())
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Path length `P^t` for `t` in `1..=T`, or `None` without anchors.
fn path_lengths(traj: &Trajectory, specs: &[RegularizerSpec]) -> Option<Vec<f64>> {
    traj.anchors()?;
    Some(
        (1..=traj.len())
            .map(|t| {
                let x = &traj.prescribed()[t - 1];
                let g = traj.anchor_at(t).expect("anchor recorded");
                let g_prev = traj.anchor_at(t - 1).expect("initial recorded");
                specs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        s.distance(x.strategy(i), g.strategy(i)).powi(2)
                            + s.distance(x.strategy(i), g_prev.strategy(i)).powi(2)
                    })
                    .sum()
            })
            .collect(),
    )
}

/// Per-round quantities for every `t` in `1..=T`.
pub fn round_diagnostics(
    game: &NormalFormGame,
    traj: &Trajectory,
    specs: &[RegularizerSpec],
) -> Result<Vec<RoundDiagnostics>> {
    check_specs(traj, specs)?;
    let n = traj.num_players();
    let anchored = traj.anchors().is_some() && traj.initial().is_some();
    let mut rows = Vec::with_capacity(traj.len());
    for t in 1..=traj.len() {
        let played = &traj.played()[t - 1];
        let prescribed = &traj.prescribed()[t - 1];
        let fields = &traj.payoffs()[t - 1];
        game.check_profile(played)?;
        let distances = |g: &StrategyProfile| -> Vec<f64> {
            (0..n)
                .map(|i| specs[i].distance(prescribed.strategy(i), g.strategy(i)))
                .collect()
        };
        let (to_anchor, to_previous_anchor) = if anchored {
            (
                traj.anchor_at(t).map(distances),
                traj.anchor_at(t - 1).map(distances),
            )
        } else {
            (None, None)
        };
        let eps = match (&to_anchor, &to_previous_anchor) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).map(|d| d * d).sum::<f64>().sqrt()),
            _ => None,
        };
        let previous = traj.played_at(t - 1);
        let step = previous.map(|p| {
            (0..n)
                .map(|i| played.strategy(i).l1_distance(p.strategy(i)))
                .collect()
        });
        let payoff_variation = traj.payoffs_at(t - 1).map(|v_prev| {
            (0..n)
                .map(|i| fields[i].sup_distance(&v_prev[i]))
                .collect()
        });
        rows.push(RoundDiagnostics {
            t,
            nash_gap: nash_gap_from_fields(played, fields),
            to_anchor,
            to_previous_anchor,
            payoff_variation,
            step,
            corruption: traj.corruption_norms()[t - 1].clone(),
            eps,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RvuCheck {
    pub player: usize,
    /// Regret of the prescribed strategies after each prefix.
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Divergence bound actually used, see [`effective_divergence_bound`].
    pub divergence_bound: f64,
    pub worst_slack: f64,
    pub holds: bool,
}

impl RvuCheck {
    /// Whether the inequality holds for the first `t` rounds.
    pub fn holds_at(&self, t: usize) -> bool {
        self.rhs[t - 1] - self.lhs[t - 1] >= -BOUND_TOLERANCE
    }
}

/// `R-bar_i` large enough to dominate `D(x, g_i^s)` for all comparators `x`
/// and every anchor the telescoping argument touches: the starting anchor for
/// constant rates, every anchor otherwise. Never below the regularizer's own
/// bound.
pub fn effective_divergence_bound(
    traj: &Trajectory,
    spec: &RegularizerSpec,
    schedule: &LearningRateSchedule,
    player: usize,
) -> Result<f64> {
    let g0 = traj
        .anchor_at(0)
        .ok_or_else(|| LabError::DiagnosticUnavailable("trajectory has no starting anchor".into()))?;
    let mut bound = spec.divergence_bound().max(spec.max_divergence_from(g0.strategy(player))?);
    if !schedule.is_constant() {
        for g in traj.anchors().unwrap_or_default() {
            bound = bound.max(spec.max_divergence_from(g.strategy(player))?);
        }
    }
    Ok(bound)
}

/// Regret-by-variation-in-utilities inequality for one player at every prefix:
/// `Reg^T <= R/eta^T + sum_t eta^t ||v^t - v^{t-1}||_*^2
///   - 1/4 sum_t (||g^t - x~^t||^2 + ||x~^t - g^{t-1}||^2) / eta^t`.
pub fn rvu_bound_check(
    traj: &Trajectory,
    specs: &[RegularizerSpec],
    schedule: &LearningRateSchedule,
    player: usize,
) -> Result<RvuCheck> {
    check_specs(traj, specs)?;
    traj.ensure_non_empty()?;
    if player >= traj.num_players() {
        return Err(LabError::InvalidArgument(format!("player {player} out of range")));
    }
    if traj.anchors().is_none() || traj.initial_payoffs().is_none() {
        return Err(LabError::DiagnosticUnavailable(
            "regret bound needs an OMD trajectory with recorded anchors".into(),
        ));
    }
    let spec = &specs[player];
    let r_bar = effective_divergence_bound(traj, spec, schedule, player)?;
    let lhs = regret_prefixes_of(
        traj.prescribed().iter().map(|p| p.strategy(player)),
        traj.payoffs().iter().map(|v| v[player].values()),
    );
    let mut variation = 0.0;
    let mut path = 0.0;
    let mut rhs = Vec::with_capacity(traj.len());
    for t in 1..=traj.len() {
        let eta = schedule.eta(player, t);
        let v = &traj.payoffs_at(t).expect("recorded")[player];
        let v_prev = &traj.payoffs_at(t - 1).expect("recorded")[player];
        variation += eta * spec.dual_norm(&diff(v.values(), v_prev.values())).powi(2);
        let x = traj.prescribed()[t - 1].strategy(player);
        let g = traj.anchor_at(t).expect("recorded").strategy(player);
        let g_prev = traj.anchor_at(t - 1).expect("recorded").strategy(player);
        path += (spec.distance(g, x).powi(2) + spec.distance(x, g_prev).powi(2)) / eta;
        rhs.push(r_bar / eta + variation - 0.25 * path);
    }
    let worst_slack = rhs
        .iter()
        .zip(&lhs)
        .map(|(r, l)| r - l)
        .fold(f64::INFINITY, f64::min);
    Ok(RvuCheck {
        player,
        lhs,
        rhs,
        divergence_bound: r_bar,
        worst_slack,
        holds: worst_slack >= -BOUND_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzCheck {
    /// `min_{t,i} sum_{j != i} ||x_j^t - x_j^{t-1}||_1 - ||v_i^t - v_i^{t-1}||_inf`.
    pub worst_slack: f64,
    /// Round and player where the minimum is attained.
    pub at: (usize, usize),
    pub holds: bool,
}

/// Payoff fields move no faster than the opponents' strategies, checked at
/// every consecutive pair (including `x^0, x^1` when the start is recorded).
pub fn payoff_lipschitz_check(traj: &Trajectory) -> Result<LipschitzCheck> {
    if traj.len() < 2 {
        return Err(LabError::InvalidArgument(format!(
            "Lipschitz check needs at least 2 rounds, got {}",
            traj.len()
        )));
    }
    let first = if traj.initial().is_some() && traj.initial_payoffs().is_some() {
        1
    } else {
        2
    };
    let n = traj.num_players();
    let mut worst = (f64::INFINITY, (0, 0));
    for t in first..=traj.len() {
        let (x, x_prev) = (traj.played_at(t).unwrap(), traj.played_at(t - 1).unwrap());
        let (v, v_prev) = (traj.payoffs_at(t).unwrap(), traj.payoffs_at(t - 1).unwrap());
        let steps: Vec<f64> = (0..n)
            .map(|j| x.strategy(j).l1_distance(x_prev.strategy(j)))
            .collect();
        let total: f64 = steps.iter().sum();
        for i in 0..n {
            let slack = (total - steps[i]) - v[i].sup_distance(&v_prev[i]);
            if slack < worst.0 {
                worst = (slack, (t, i));
            }
        }
    }
    Ok(LipschitzCheck {
        worst_slack: worst.0,
        at: worst.1,
        holds: worst.0 >= -LIPSCHITZ_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathLengthCheck {
    pub corrupted: bool,
    pub lr_cap: f64,
    pub eta_initial: f64,
    /// Cumulative path length after each prefix.
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub worst_slack: f64,
    pub holds: bool,
    /// `min_{s <= t} P^s <= rhs_t / t` at every prefix.
    pub pigeonhole_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum BoundCheck {
    Evaluated(PathLengthCheck),
    Skipped { reason: String, lr_cap: f64, eta_initial: f64 },
}

impl BoundCheck {
    pub fn evaluated(&self) -> Option<&PathLengthCheck> {
        match self {
            Self::Evaluated(c) => Some(c),
            Self::Skipped { .. } => None,
        }
    }

    /// `None` when skipped.
    pub fn holds(&self) -> Option<bool> {
        self.evaluated().map(|c| c.holds && c.pigeonhole_holds)
    }
}

/// Total path-length bound for non-negative weighted regret games:
/// `sum_t P^t <= sum_i 8 R_i m_i eta^1 / (eta_i m_min)`. Corrupted runs add
/// `48 (eta^1)^2 (m_max/m_min) c_*^2 (n-1)^2 sum_i M_i C_i
///   + 8 eta^1 (m_max/m_min) sum_i C_i` with `C_i`, `M_i` taken over the prefix.
///
/// The check is skipped when `eta^1` exceeds the matching learning-rate cap,
/// since the bound is not claimed there.
pub fn path_length_bound_check(
    traj: &Trajectory,
    specs: &[RegularizerSpec],
    schedule: &LearningRateSchedule,
    weights: &RegretWeights,
) -> Result<BoundCheck> {
    check_specs(traj, specs)?;
    traj.ensure_non_empty()?;
    let n = traj.num_players();
    if weights.len() != n {
        return Err(LabError::InvalidArgument(format!(
            "{} regret weights for {n} players",
            weights.len()
        )));
    }
    let lengths = path_lengths(traj, specs).ok_or_else(|| {
        LabError::DiagnosticUnavailable("path length needs an OMD trajectory with recorded anchors".into())
    })?;
    let corrupted = traj.is_corrupted();
    let constants = NormConstants::combined(specs);
    let lr_cap = theorem_lr_cap(n, constants, weights, corrupted)?;
    let eta1 = schedule.initial_max();
    if eta1 > lr_cap * (1.0 + 1e-12) {
        let reason = format!("initial learning rate {eta1} exceeds the cap {lr_cap}");
        log::info!("path-length bound skipped: {reason}");
        return Ok(BoundCheck::Skipped {
            reason,
            lr_cap,
            eta_initial: eta1,
        });
    }
    let (m_min, m_max) = (weights.min(), weights.max());
    let base: f64 = (0..n)
        .map(|i| {
            let r = effective_divergence_bound(traj, &specs[i], schedule, i)?;
            Ok(8.0 * r * weights.values()[i] * eta1 / (schedule.floor(i) * m_min))
        })
        .sum::<Result<f64>>()?;
    let mut lhs = Vec::with_capacity(traj.len());
    let mut rhs = Vec::with_capacity(traj.len());
    let mut sum = 0.0;
    let mut best = f64::INFINITY;
    let mut pigeonhole_holds = true;
    let mut totals = vec![0.0; n];
    let mut sups = vec![0.0f64; n];
    for (t, p) in lengths.iter().enumerate() {
        sum += p;
        best = best.min(*p);
        let bound = if corrupted {
            for i in 0..n {
                let c = traj.corruption_norms()[t][i];
                totals[i] += c;
                sups[i] = sups[i].max(c);
            }
            let ratio = m_max / m_min;
            let mc: f64 = (0..n).map(|i| sups[i] * totals[i]).sum();
            let c_sum: f64 = totals.iter().sum();
            base + 48.0 * eta1 * eta1 * ratio * constants.c_star.powi(2) * ((n - 1) as f64).powi(2) * mc
                + 8.0 * eta1 * ratio * c_sum
        } else {
            base
        };
        if best > bound / (t + 1) as f64 + BOUND_TOLERANCE {
            pigeonhole_holds = false;
        }
        lhs.push(sum);
        rhs.push(bound);
    }
    let worst_slack = rhs
        .iter()
        .zip(&lhs)
        .map(|(r, l)| r - l)
        .fold(f64::INFINITY, f64::min);
    Ok(BoundCheck::Evaluated(PathLengthCheck {
        corrupted,
        lr_cap,
        eta_initial: eta1,
        lhs,
        rhs,
        worst_slack,
        holds: worst_slack >= -BOUND_TOLERANCE,
        pigeonhole_holds,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestIterate {
    /// 1-based round with the smallest measured Nash gap, first on ties.
    pub t: usize,
    pub gap: f64,
    /// `eps_t` at that round, OMD only.
    pub eps: Option<f64>,
    /// `eps_t (c_* + 2 max_i G_i Omega_i / eta_i)`, plus `max_i ||c_i^t||_1`
    /// for corrupted runs; `None` without anchors.
    pub certified_bound: Option<f64>,
    /// `max_i ||c_i^t||_1` at that round.
    pub corruption: f64,
    /// First round whose `eps_t` is at most the requested tolerance.
    pub first_within_eps: Option<usize>,
}

pub fn extract_best_iterate(
    game: &NormalFormGame,
    traj: &Trajectory,
    specs: &[RegularizerSpec],
    schedule: &LearningRateSchedule,
    eps: Option<f64>,
) -> Result<BestIterate> {
    check_specs(traj, specs)?;
    traj.ensure_non_empty()?;
    let mut best = (0, f64::INFINITY);
    for (k, (x, v)) in traj.played().iter().zip(traj.payoffs()).enumerate() {
        game.check_profile(x)?;
        let gap = nash_gap_from_fields(x, v);
        if gap < best.1 {
            best = (k, gap);
        }
    }
    let (k, gap) = best;
    let eps_series = path_lengths(traj, specs).map(|p| p.into_iter().map(f64::sqrt).collect::<Vec<_>>());
    let constants = NormConstants::combined(specs);
    let factor = constants.c_star
        + 2.0
            * specs
                .iter()
                .enumerate()
                .map(|(i, s)| s.smoothness() * s.diameter() / schedule.floor(i))
                .fold(0.0, f64::max);
    let corruption = traj.corruption_norms()[k].iter().copied().fold(0.0, f64::max);
    let eps_t = eps_series.as_ref().map(|e| e[k]);
    let certified_bound = eps_t.map(|e| e * factor + if traj.is_corrupted() { corruption } else { 0.0 });
    let first_within_eps = match (eps, &eps_series) {
        (Some(target), Some(series)) => series.iter().position(|e| *e <= target).map(|k| k + 1),
        _ => None,
    };
    Ok(BestIterate {
        t: k + 1,
        gap,
        eps: eps_t,
        certified_bound,
        corruption,
        first_within_eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceStatus {
    ConvergedToPoint,
    ApproachingSet,
    Inconclusive,
}

impl std::fmt::Display for ConvergenceStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ConvergedToPoint => "converged-to-point",
            Self::ApproachingSet => "approaching-set",
            Self::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub status: ConvergenceStatus,
    /// Largest pairwise `l1` distance among the last `window` played profiles.
    pub spread: f64,
    pub final_gap: f64,
    pub window: usize,
    pub tol: f64,
}

/// Point convergence when the last `window` profiles are within `tol` of each
/// other and the last gap is within `tol`; set convergence when only the gap
/// is small.
pub fn detect_convergence(
    game: &NormalFormGame,
    traj: &Trajectory,
    window: usize,
    tol: f64,
) -> Result<ConvergenceReport> {
    if window < 2 {
        return Err(LabError::InvalidArgument(format!("window must be at least 2, got {window}")));
    }
    if window > traj.len() {
        return Err(LabError::InvalidArgument(format!(
            "window {window} longer than the trajectory ({})",
            traj.len()
        )));
    }
    let tail = &traj.played()[traj.len() - window..];
    let mut spread = 0.0f64;
    for (k, a) in tail.iter().enumerate() {
        for b in &tail[k + 1..] {
            spread = spread.max(a.l1_distance(b));
        }
    }
    let last = traj.played().last().expect("non-empty");
    game.check_profile(last)?;
    let final_gap = nash_gap_from_fields(last, traj.payoffs().last().expect("non-empty"));
    let status = match (final_gap <= tol, spread <= tol) {
        (true, true) => ConvergenceStatus::ConvergedToPoint,
        (true, false) => ConvergenceStatus::ApproachingSet,
        _ => ConvergenceStatus::Inconclusive,
    };
    Ok(ConvergenceReport {
        status,
        spread,
        final_gap,
        window,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::regret;
    use crate::dynamics::{run_dynamics, Algorithm, DynamicsConfig};
    use crate::game::MixedStrategy;
    use crate::regularizer::Regularizer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pennies() -> NormalFormGame {
        NormalFormGame::bimatrix(
            &[vec![1.0, -1.0], vec![-1.0, 1.0]],
            &[vec![-1.0, 1.0], vec![1.0, -1.0]],
        )
        .unwrap()
    }

    fn skewed() -> StrategyProfile {
        StrategyProfile::new(vec![
            MixedStrategy::new(vec![0.9, 0.1]).unwrap(),
            MixedStrategy::uniform(2),
        ])
    }

    fn run(reg: Regularizer, eta: f64, iters: usize) -> (DynamicsConfig, Trajectory) {
        let cfg = DynamicsConfig::new(Algorithm::Omd, reg, LearningRateSchedule::uniform(2, eta), iters)
            .with_initial(skewed());
        let traj = run_dynamics(&pennies(), &cfg).unwrap();
        (cfg, traj)
    }

    #[test]
    fn zero_game_certificates_are_trivial() {
        let game = NormalFormGame::new(vec![2, 3], vec![vec![0.0; 6], vec![0.0; 6]]).unwrap();
        let cfg = DynamicsConfig::new(
            Algorithm::Omd,
            Regularizer::entropy(),
            LearningRateSchedule::uniform(2, 0.1),
            10,
        );
        let traj = run_dynamics(&game, &cfg).unwrap();
        let specs = cfg.regularizer.for_game(&[2, 3]).unwrap();
        for i in 0..2 {
            let c = rvu_bound_check(&traj, &specs, &cfg.schedule, i).unwrap();
            assert!(c.holds);
            assert!(c.lhs.iter().all(|l| l.abs() < 1e-15));
        }
        let lip = payoff_lipschitz_check(&traj).unwrap();
        assert_eq!(lip.worst_slack, 0.0);
        let best = extract_best_iterate(&game, &traj, &specs, &cfg.schedule, Some(1e-9)).unwrap();
        assert_eq!((best.t, best.gap), (1, 0.0));
        assert_eq!(best.first_within_eps, Some(1));
        let pl = path_length_bound_check(&traj, &specs, &cfg.schedule, &RegretWeights::uniform(2)).unwrap();
        let pl = pl.evaluated().unwrap();
        assert!(pl.lhs.iter().all(|l| *l == 0.0) && pl.holds);
    }

    #[test]
    fn rvu_holds_on_pennies_prefixes() {
        let (cfg, traj) = run(Regularizer::entropy(), 0.1, 100);
        let specs = cfg.regularizer.for_game(&[2, 2]).unwrap();
        for i in 0..2 {
            let c = rvu_bound_check(&traj, &specs, &cfg.schedule, i).unwrap();
            assert!(c.holds, "slack {}", c.worst_slack);
            assert!((1..=100).all(|t| c.holds_at(t)));
            assert!((c.lhs[99] - regret(&traj, i).unwrap()).abs() < 1e-12);
            let expected = if i == 0 { 10f64.ln() } else { 2f64.ln() + 2e-8 };
            assert!((c.divergence_bound - expected).abs() < 1e-7);
        }
    }

    #[test]
    fn rvu_holds_on_random_three_player_game() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let counts = vec![2, 3, 2];
        let u = (0..3).map(|_| (0..12).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let game = NormalFormGame::new(counts.clone(), u).unwrap();
        for reg in [Regularizer::entropy(), Regularizer::euclid()] {
            let specs = reg.for_game(&counts).unwrap();
            let cap = theorem_lr_cap(3, NormConstants::combined(&specs), &RegretWeights::uniform(3), false).unwrap();
            let cfg = DynamicsConfig::new(Algorithm::Omd, reg, LearningRateSchedule::uniform(3, cap), 300);
            let traj = run_dynamics(&game, &cfg).unwrap();
            for i in 0..3 {
                assert!(rvu_bound_check(&traj, &specs, &cfg.schedule, i).unwrap().holds);
            }
        }
    }

    #[test]
    fn path_length_on_compliant_pennies() {
        let (cfg, traj) = run(Regularizer::entropy(), 0.2, 400);
        let specs = cfg.regularizer.for_game(&[2, 2]).unwrap();
        let check = path_length_bound_check(&traj, &specs, &cfg.schedule, &RegretWeights::uniform(2)).unwrap();
        assert_eq!(check.holds(), Some(true));
        let (cfg, traj) = run(Regularizer::entropy(), 0.3, 10);
        let check = path_length_bound_check(&traj, &specs, &cfg.schedule, &RegretWeights::uniform(2)).unwrap();
        assert!(matches!(check, BoundCheck::Skipped { .. }));
        assert_eq!(check.holds(), None);
    }

    #[test]
    fn corrupted_path_length_holds() {
        let specs = Regularizer::entropy().for_game(&[2, 2]).unwrap();
        let cap = theorem_lr_cap(2, NormConstants::combined(&specs), &RegretWeights::uniform(2), true).unwrap();
        let cfg = DynamicsConfig::new(
            Algorithm::Omd,
            Regularizer::entropy(),
            LearningRateSchedule::uniform(2, cap),
            500,
        )
        .with_initial(skewed())
        .with_corruption("geometric:0.5,0.4".parse().unwrap(), 2);
        let traj = run_dynamics(&pennies(), &cfg).unwrap();
        let check = path_length_bound_check(&traj, &specs, &cfg.schedule, &RegretWeights::uniform(2)).unwrap();
        let c = check.evaluated().unwrap();
        assert!(c.corrupted && c.holds && c.pigeonhole_holds);
    }

    #[test]
    fn lipschitz_is_unconditional() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let counts = [3, 2, 2];
        let u = (0..3).map(|_| (0..12).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let game = NormalFormGame::new(counts.to_vec(), u).unwrap();
        let random = |rng: &mut ChaCha8Rng| {
            StrategyProfile::new(
                counts
                    .iter()
                    .map(|&k| {
                        let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                        let s: f64 = w.iter().sum();
                        MixedStrategy::new(w.iter().map(|x| x / s).collect()).unwrap()
                    })
                    .collect(),
            )
        };
        let played: Vec<_> = (0..500).map(|_| random(&mut rng)).collect();
        let traj = Trajectory::from_played(&game, played).unwrap();
        assert!(payoff_lipschitz_check(&traj).unwrap().holds);

        let fixed = Trajectory::from_played(&game, vec![random(&mut rng); 3]).unwrap();
        assert_eq!(payoff_lipschitz_check(&fixed).unwrap().worst_slack, 0.0);
        assert!(payoff_lipschitz_check(&fixed.prefix(1)).is_err());
    }

    #[test]
    fn best_iterate_is_certified_for_euclid() {
        let (cfg, traj) = run(Regularizer::euclid(), 0.1125, 300);
        let specs = cfg.regularizer.for_game(&[2, 2]).unwrap();
        let best = extract_best_iterate(&pennies(), &traj, &specs, &cfg.schedule, Some(0.05)).unwrap();
        let rounds = round_diagnostics(&pennies(), &traj, &specs).unwrap();
        assert!(best.gap <= best.certified_bound.unwrap() + 1e-12);
        assert!(best.gap < rounds[0].nash_gap);
        for r in &rounds {
            let bound = r.eps.unwrap() * (2f64.sqrt() + 2.0 * 2f64.sqrt() / 0.1125);
            assert!(r.nash_gap <= bound + 1e-12, "round {}", r.t);
            assert!(best.gap <= r.nash_gap);
        }
        let first = best.first_within_eps.unwrap();
        assert!(rounds[first - 1].eps.unwrap() <= 0.05);
        assert!(rounds[..first - 1].iter().all(|r| r.eps.unwrap() > 0.05));
    }

    #[test]
    fn best_iterate_picks_first_tie() {
        let game = pennies();
        let ne = StrategyProfile::uniform(&[2, 2]);
        let traj = Trajectory::from_played(&game, vec![skewed(), ne.clone(), ne]).unwrap();
        let specs = Regularizer::euclid().for_game(&[2, 2]).unwrap();
        let best = extract_best_iterate(&game, &traj, &specs, &LearningRateSchedule::uniform(2, 0.1), None).unwrap();
        assert_eq!((best.t, best.gap), (2, 0.0));
        assert!(best.eps.is_none() && best.certified_bound.is_none());
    }

    #[test]
    fn convergence_statuses() {
        let game = pennies();
        let ne = StrategyProfile::uniform(&[2, 2]);
        let still = Trajectory::from_played(&game, vec![ne.clone(); 5]).unwrap();
        assert_eq!(
            detect_convergence(&game, &still, 5, 1e-2).unwrap().status,
            ConvergenceStatus::ConvergedToPoint
        );
        assert!(detect_convergence(&game, &still, 1, 1e-2).is_err());
        assert!(detect_convergence(&game, &still, 6, 1e-2).is_err());

        let swing = Trajectory::from_played(&game, vec![skewed(), ne.clone(), skewed(), skewed()]).unwrap();
        assert_eq!(
            detect_convergence(&game, &swing, 4, 1e-2).unwrap().status,
            ConvergenceStatus::Inconclusive
        );
        let settle = Trajectory::from_played(&game, vec![skewed(), ne.clone()]).unwrap();
        assert_eq!(
            detect_convergence(&game, &settle, 2, 1e-2).unwrap().status,
            ConvergenceStatus::ApproachingSet
        );

        // far above the cap the iterates keep circling
        let (_, traj) = run(Regularizer::euclid(), 2.0, 200);
        assert_eq!(
            detect_convergence(&game, &traj, 50, 1e-2).unwrap().status,
            ConvergenceStatus::Inconclusive
        );
    }

    #[test]
    fn round_rows_line_up() {
        let (cfg, traj) = run(Regularizer::entropy(), 0.1, 20);
        let specs = cfg.regularizer.for_game(&[2, 2]).unwrap();
        let rows = round_diagnostics(&pennies(), &traj, &specs).unwrap();
        assert_eq!(rows.len(), 20);
        assert!(rows.iter().all(|r| r.step.is_some() && r.payoff_variation.is_some() && r.eps.is_some()));
        let oftrl = DynamicsConfig {
            algorithm: Algorithm::Oftrl,
            ..cfg
        };
        let traj = run_dynamics(&pennies(), &oftrl).unwrap();
        let rows = round_diagnostics(&pennies(), &traj, &specs).unwrap();
        assert!(rows.iter().all(|r| r.eps.is_none() && r.to_anchor.is_none()));
        assert!(matches!(
            rvu_bound_check(&traj, &specs, &oftrl.schedule, 0),
            Err(LabError::DiagnosticUnavailable(_))
        ));
    }
}
