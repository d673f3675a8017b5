//! Configuration, builtin games and the experiment driver behind the CLI.

pub mod catalog;
pub mod config;
pub mod experiment;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classes::{
    harmonic_residual, is_constant_sum, regret_weights_from_harmonic, solve_harmonic_weights,
    weighted_regret, HarmonicWeights, RegretWeights,
};
use crate::dynamics::{run_dynamics, Algorithm, DynamicsConfig, LearningRateSchedule};
use crate::error::{LabError, Result};
use crate::game::{MixedStrategy, NormalFormGame, StrategyProfile};
use crate::regularizer::Regularizer;
use crate::trajectory::Trajectory;

pub use config::{load_game, RunConfig};
pub use experiment::{run_experiment, ExperimentOutput, RunSummary};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    /// The constant `c` with `sum_i u_i = c`, if any.
    pub constant_sum: Option<f64>,
    pub zero_sum: bool,
    pub harmonic_weights: Option<HarmonicWeights>,
    /// Residual of the returned weights, or of uniform weights when none were found.
    pub harmonic_residual: f64,
    /// Weights under which the weighted regret is non-negative, when known.
    pub suggested_regret_weights: Option<RegretWeights>,
}

/// Structural certificates of a game: constant-sum and harmonic checks plus
/// the regret weights they imply.
pub fn classify_game(game: &NormalFormGame) -> Result<ClassReport> {
    let constant_sum = is_constant_sum(game);
    let harmonic_weights = solve_harmonic_weights(game);
    let harmonic_residual = match &harmonic_weights {
        Some(w) => harmonic_residual(game, w)?,
        None => harmonic_residual(game, &HarmonicWeights::uniform(game.action_counts()))?,
    };
    let suggested_regret_weights = match (&harmonic_weights, constant_sum) {
        (Some(w), _) => Some(regret_weights_from_harmonic(w).0),
        (None, Some(_)) if game.num_players() == 2 => Some(RegretWeights::uniform(2)),
        _ => None,
    };
    Ok(ClassReport {
        constant_sum,
        zero_sum: constant_sum == Some(0.0),
        harmonic_weights,
        harmonic_residual,
        suggested_regret_weights,
    })
}

/// How scatter trajectories are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryFamily {
    /// Independent uniformly drawn pure profiles.
    RandomPure,
    /// Independent random mixed profiles.
    RandomMixed,
    /// Entropy OMD from a random starting profile.
    Dynamics { eta: f64 },
}

impl std::str::FromStr for TrajectoryFamily {
    type Err = LabError;

    /// `random-pure`, `random-mixed` or `omd:<eta>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-pure" => Ok(Self::RandomPure),
            "random-mixed" => Ok(Self::RandomMixed),
            other => match other.strip_prefix("omd:").map(str::parse::<f64>) {
                Some(Ok(eta)) if eta > 0.0 => Ok(Self::Dynamics { eta }),
                _ => Err(LabError::Config(format!("unknown trajectory family {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub seed: u64,
    /// `sum_i Reg_i`.
    pub total_regret: f64,
    /// `sum_i m_i Reg_i`.
    pub weighted_total: f64,
}

fn random_profile(rng: &mut ChaCha8Rng, counts: &[usize], pure: bool) -> StrategyProfile {
    StrategyProfile::new(
        counts
            .iter()
            .map(|&k| {
                if pure {
                    MixedStrategy::vertex(k, rng.random_range(0..k))
                } else {
                    // Exponential spacings give a uniform point on the simplex.
                    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                    let s: f64 = w.iter().sum();
                    MixedStrategy::new(w.iter().map(|x| x / s).collect()).expect("normalized")
                }
            })
            .collect(),
    )
}

/// One seeded trajectory of `rounds` rounds from `family`.
pub fn sample_trajectory(
    game: &NormalFormGame,
    family: TrajectoryFamily,
    rounds: usize,
    seed: u64,
) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = game.action_counts();
    match family {
        TrajectoryFamily::RandomPure | TrajectoryFamily::RandomMixed => {
            let pure = family == TrajectoryFamily::RandomPure;
            let played = (0..rounds).map(|_| random_profile(&mut rng, counts, pure)).collect();
            Trajectory::from_played(game, played)
        }
        TrajectoryFamily::Dynamics { eta } => {
            let cfg = DynamicsConfig::new(
                Algorithm::Omd,
                Regularizer::entropy(),
                LearningRateSchedule::uniform(counts.len(), eta),
                rounds,
            )
            .with_initial(random_profile(&mut rng, counts, false));
            run_dynamics(game, &cfg)
        }
    }
}

/// Total against weighted total regret over `seeds` trajectories.
pub fn regret_scatter(
    game: &NormalFormGame,
    weights: &RegretWeights,
    family: TrajectoryFamily,
    rounds: usize,
    seeds: u64,
) -> Result<Vec<ScatterPoint>> {
    if rounds == 0 {
        return Err(LabError::InvalidArgument("rounds must be at least 1".into()));
    }
    let uniform = RegretWeights::uniform(game.num_players());
    (0..seeds)
        .map(|seed| {
            let traj = sample_trajectory(game, family, rounds, seed)?;
            Ok(ScatterPoint {
                seed,
                total_regret: weighted_regret(&traj, &uniform)?.total,
                weighted_total: weighted_regret(&traj, weights)?.total,
            })
        })
        .collect()
}
