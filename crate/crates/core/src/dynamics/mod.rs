//! Optimistic mirror descent and optimistic FTRL.
//!
//! Round convention: the state after round `t` holds `x^t`, the anchor `g^t`
//! (OMD) or the cumulative sum `S^t` (OFTRL), and the last observed payoff
//! field `v^t`. Before the first round `x^0 = g^0` and `v^0 = v(x^0)`.

mod corruption;
mod schedule;

use serde::{Deserialize, Serialize};

pub use corruption::{CorruptionKind, CorruptionTracker};
pub use schedule::LearningRateSchedule;

use crate::classes::RegretWeights;
use crate::error::{LabError, Result};
use crate::game::{payoff_fields, NormalFormGame, PayoffVector, StrategyProfile};
use crate::regularizer::{NormConstants, Regularizer, RegularizerKind, RegularizerSpec};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Omd,
    Oftrl,
}

impl std::str::FromStr for Algorithm {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "omd" => Ok(Self::Omd),
            "oftrl" => Ok(Self::Oftrl),
            other => Err(LabError::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Omd => "omd",
            Self::Oftrl => "oftrl",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmdState {
    /// Number of completed rounds.
    pub t: usize,
    /// Played profile `x^t`.
    pub strategy: StrategyProfile,
    /// Anchor `g^t`.
    pub anchor: StrategyProfile,
    /// `v^t`, observed at the played profile.
    pub last_payoff: Vec<PayoffVector>,
}

impl OmdState {
    /// `x^0 = g^0 = initial` and `v^0 = v(initial)`.
    pub fn new(game: &NormalFormGame, initial: StrategyProfile) -> Result<Self> {
        let last_payoff = payoff_fields(game, &initial)?;
        Ok(Self {
            t: 0,
            anchor: initial.clone(),
            strategy: initial,
            last_payoff,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OftrlState {
    pub t: usize,
    /// `S_i = sum_{s=1}^t v_i^s`.
    pub cumulative: Vec<Vec<f64>>,
    pub last_payoff: Vec<PayoffVector>,
    pub strategy: StrategyProfile,
    /// `grad R_i(x_i^0)`. FTRL runs on `R_i - <grad R_i(x_i^0), .>`, which is
    /// minimized at `x^0`, so a non-uniform start matches OMD from the same point.
    pub origin_gradient: Vec<Vec<f64>>,
}

impl OftrlState {
    pub fn new(game: &NormalFormGame, specs: &[RegularizerSpec], initial: StrategyProfile) -> Result<Self> {
        check_specs(game, specs)?;
        let last_payoff = payoff_fields(game, &initial)?;
        let origin_gradient = specs
            .iter()
            .zip(initial.strategies())
            .map(|(s, x)| s.gradient(x))
            .collect::<Result<_>>()?;
        Ok(Self {
            t: 0,
            cumulative: game.action_counts().iter().map(|&k| vec![0.0; k]).collect(),
            strategy: initial,
            last_payoff,
            origin_gradient,
        })
    }
}

/// What one round produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub prescribed: StrategyProfile,
    pub played: StrategyProfile,
    pub payoffs: Vec<PayoffVector>,
    pub corruption: Vec<f64>,
}

fn check_specs(game: &NormalFormGame, specs: &[RegularizerSpec]) -> Result<()> {
    if specs.len() != game.num_players() {
        return Err(LabError::InvalidArgument(format!(
            "{} regularizers for {} players",
            specs.len(),
            game.num_players()
        )));
    }
    for (i, (s, &k)) in specs.iter().zip(game.action_counts()).enumerate() {
        if s.dimension() != k {
            return Err(LabError::DimensionMismatch {
                player: i,
                expected: k,
                actual: s.dimension(),
            });
        }
    }
    Ok(())
}

/// Rates for round `t + 1`, rejecting any increase over round `t`.
fn rates_for(schedule: &LearningRateSchedule, n: usize, t: usize) -> Result<Vec<f64>> {
    if schedule.num_players() != n {
        return Err(LabError::Config(format!(
            "schedule has {} players, game has {n}",
            schedule.num_players()
        )));
    }
    (0..n)
        .map(|i| {
            let eta = schedule.eta(i, t + 1);
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(LabError::Config(format!("learning rate {eta} of player {i} is not positive")));
            }
            if t >= 1 && eta > schedule.eta(i, t) {
                return Err(LabError::Config(format!(
                    "learning rate of player {i} increases at round {}",
                    t + 1
                )));
            }
            Ok(eta)
        })
        .collect()
}

fn observe(
    game: &NormalFormGame,
    prescribed: StrategyProfile,
    t: usize,
    corruption: &mut CorruptionTracker,
) -> Result<RoundOutcome> {
    let (played, norms) = corruption.apply(&prescribed, t)?;
    let payoffs = payoff_fields(game, &played)?;
    Ok(RoundOutcome {
        prescribed,
        played,
        payoffs,
        corruption: norms,
    })
}

/// One OMD round: `x~^{t+1} = prox(g^t, v^t)`, payoffs observed at the played
/// (possibly corrupted) profile, then `g^{t+1} = prox(g^t, v^{t+1})`. Both
/// prox steps use `eta^{t+1}` and the same anchor `g^t`.
pub fn omd_round(
    game: &NormalFormGame,
    specs: &[RegularizerSpec],
    state: &OmdState,
    schedule: &LearningRateSchedule,
    corruption: &mut CorruptionTracker,
) -> Result<(OmdState, RoundOutcome)> {
    check_specs(game, specs)?;
    let n = game.num_players();
    let t = state.t;
    let eta = rates_for(schedule, n, t)?;
    let prescribed = StrategyProfile::new(
        (0..n)
            .map(|i| specs[i].prox_step(state.anchor.strategy(i), &state.last_payoff[i], eta[i]))
            .collect::<Result<_>>()?,
    );
    let outcome = observe(game, prescribed, t + 1, corruption)?;
    let anchor = StrategyProfile::new(
        (0..n)
            .map(|i| specs[i].prox_step(state.anchor.strategy(i), &outcome.payoffs[i], eta[i]))
            .collect::<Result<_>>()?,
    );
    let next = OmdState {
        t: t + 1,
        strategy: outcome.played.clone(),
        anchor,
        last_payoff: outcome.payoffs.clone(),
    };
    Ok((next, outcome))
}

/// One OFTRL round: `x^{t+1} = ftrl(v^t + S^t)`, then `S^{t+1} = S^t + v^{t+1}`.
/// Needs a constant schedule.
pub fn oftrl_round(
    game: &NormalFormGame,
    specs: &[RegularizerSpec],
    state: &OftrlState,
    schedule: &LearningRateSchedule,
    corruption: &mut CorruptionTracker,
) -> Result<(OftrlState, RoundOutcome)> {
    check_specs(game, specs)?;
    if !schedule.is_constant() {
        return Err(LabError::Config("OFTRL needs a constant learning rate".into()));
    }
    let n = game.num_players();
    let eta = rates_for(schedule, n, state.t)?;
    let prescribed = StrategyProfile::new(
        (0..n)
            .map(|i| {
                let optimistic: Vec<f64> = state.cumulative[i]
                    .iter()
                    .zip(state.last_payoff[i].values())
                    .zip(&state.origin_gradient[i])
                    .map(|((s, v), g)| s + v + g / eta[i])
                    .collect();
                specs[i].ftrl_step(&optimistic, eta[i])
            })
            .collect::<Result<_>>()?,
    );
    let outcome = observe(game, prescribed, state.t + 1, corruption)?;
    let cumulative = state
        .cumulative
        .iter()
        .zip(&outcome.payoffs)
        .map(|(s, v)| s.iter().zip(v.values()).map(|(a, b)| a + b).collect())
        .collect();
    let next = OftrlState {
        t: state.t + 1,
        cumulative,
        last_payoff: outcome.payoffs.clone(),
        strategy: outcome.played.clone(),
        origin_gradient: state.origin_gradient.clone(),
    };
    Ok((next, outcome))
}

/// Largest admissible `eta^1`: `c / (4 c_* (n - 1)) * sqrt(m_min / m_max)`,
/// with an extra `1 / sqrt(3)` under corruption.
pub fn theorem_lr_cap(
    n: usize,
    constants: NormConstants,
    weights: &RegretWeights,
    corrupted: bool,
) -> Result<f64> {
    if n < 2 {
        return Err(LabError::InvalidArgument(format!("cap needs at least 2 players, got {n}")));
    }
    let mut ratio = weights.min() / weights.max();
    if corrupted {
        ratio /= 3.0;
    }
    Ok(constants.c / (4.0 * constants.c_star * (n - 1) as f64) * ratio.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub algorithm: Algorithm,
    pub regularizer: Regularizer,
    pub schedule: LearningRateSchedule,
    pub iterations: usize,
    pub corruption: CorruptionKind,
    pub seed: u64,
    /// Overrides the regularizer min-point as `x^0`.
    pub initial: Option<StrategyProfile>,
}

impl DynamicsConfig {
    pub fn new(algorithm: Algorithm, regularizer: Regularizer, schedule: LearningRateSchedule, iterations: usize) -> Self {
        Self {
            algorithm,
            regularizer,
            schedule,
            iterations,
            corruption: CorruptionKind::None,
            seed: 0,
            initial: None,
        }
    }

    pub fn with_corruption(mut self, corruption: CorruptionKind, seed: u64) -> Self {
        self.corruption = corruption;
        self.seed = seed;
        self
    }

    pub fn with_initial(mut self, initial: StrategyProfile) -> Self {
        self.initial = Some(initial);
        self
    }
}

/// Runs `T` rounds on a game with utilities in `[-1, 1]`.
///
/// Under the entropy regularizer the starting profile is pushed into the
/// `delta`-interior so that the divergence to it stays finite.
pub fn run_dynamics(game: &NormalFormGame, config: &DynamicsConfig) -> Result<Trajectory> {
    if config.iterations == 0 {
        return Err(LabError::InvalidArgument("need at least one iteration".into()));
    }
    if !game.is_normalized() {
        return Err(LabError::InvalidGame(
            "utilities must lie in [-1, 1]; normalize the game first".into(),
        ));
    }
    let n = game.num_players();
    config.schedule.validate(n)?;
    let specs = config.regularizer.for_game(game.action_counts())?;
    let initial = match &config.initial {
        Some(p) => {
            game.check_profile(p)?;
            p.clone()
        }
        None => StrategyProfile::new(specs.iter().map(RegularizerSpec::min_point).collect()),
    };
    let initial = match config.regularizer.kind() {
        RegularizerKind::Entropy => StrategyProfile::new(
            specs
                .iter()
                .zip(initial.strategies())
                .map(|(s, x)| s.clip_interior(x.probs().to_vec()))
                .collect(),
        ),
        RegularizerKind::Euclid => initial,
    };
    let mut tracker = CorruptionTracker::new(config.corruption.clone(), n, config.seed)?;
    let capacity = config.iterations;
    let mut traj = Trajectory {
        initial: Some(initial.clone()),
        initial_payoffs: Some(payoff_fields(game, &initial)?),
        prescribed: Vec::with_capacity(capacity),
        played: Vec::with_capacity(capacity),
        payoffs: Vec::with_capacity(capacity),
        anchors: None,
        corruption: Vec::with_capacity(capacity),
        corrupted: tracker.is_active(),
    };
    let record = |traj: &mut Trajectory, out: RoundOutcome| {
        traj.prescribed.push(out.prescribed);
        traj.played.push(out.played);
        traj.payoffs.push(out.payoffs);
        traj.corruption.push(out.corruption);
    };
    match config.algorithm {
        Algorithm::Omd => {
            let mut anchors = Vec::with_capacity(capacity);
            let mut state = OmdState::new(game, initial)?;
            for _ in 0..config.iterations {
                let (next, out) = omd_round(game, &specs, &state, &config.schedule, &mut tracker)?;
                anchors.push(next.anchor.clone());
                record(&mut traj, out);
                state = next;
            }
            traj.anchors = Some(anchors);
        }
        Algorithm::Oftrl => {
            let mut state = OftrlState::new(game, &specs, initial)?;
            for _ in 0..config.iterations {
                let (next, out) = oftrl_round(game, &specs, &state, &config.schedule, &mut tracker)?;
                record(&mut traj, out);
                state = next;
            }
        }
    }
    log::debug!(
        "{} run finished after {} rounds, corruption totals {:?}",
        config.algorithm,
        config.iterations,
        tracker.totals()
    );
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::make_harmonic_game;
    use crate::classes::HarmonicWeights;
    use crate::game::{nash_gap, MixedStrategy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pennies() -> NormalFormGame {
        NormalFormGame::bimatrix(
            &[vec![1.0, -1.0], vec![-1.0, 1.0]],
            &[vec![-1.0, 1.0], vec![1.0, -1.0]],
        )
        .unwrap()
    }

    fn skewed_init() -> StrategyProfile {
        StrategyProfile::new(vec![
            MixedStrategy::new(vec![0.9, 0.1]).unwrap(),
            MixedStrategy::uniform(2),
        ])
    }

    #[test]
    fn uniform_is_fixed_point_of_pennies() {
        let cfg = DynamicsConfig::new(
            Algorithm::Omd,
            Regularizer::entropy(),
            LearningRateSchedule::uniform(2, 0.1),
            5,
        );
        let traj = run_dynamics(&pennies(), &cfg).unwrap();
        for x in traj.played() {
            for s in x.strategies() {
                assert!((s.probs()[0] - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pennies_gap_drops_below_initial() {
        let game = pennies();
        let cfg = DynamicsConfig::new(
            Algorithm::Omd,
            Regularizer::entropy(),
            LearningRateSchedule::uniform(2, 0.1),
            100,
        )
        .with_initial(skewed_init());
        let traj = run_dynamics(&game, &cfg).unwrap();
        let initial = nash_gap(&game, traj.initial().unwrap()).unwrap();
        let best = traj
            .played()
            .iter()
            .map(|x| nash_gap(&game, x).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(best < initial, "best {best} vs initial {initial}");
    }

    /// Straight-line transcription of one entropy OMD round on a 2x2 game.
    #[test]
    fn one_round_matches_hand_transcription() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let u: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let game = NormalFormGame::new(vec![2, 2], u.clone()).unwrap();
        let eta = 0.3;
        let p = [0.7, 0.3];
        let q = [0.4, 0.6];
        let init = StrategyProfile::new(vec![
            MixedStrategy::new(p.to_vec()).unwrap(),
            MixedStrategy::new(q.to_vec()).unwrap(),
        ]);

        // u[i][2 * a0 + a1]
        let field = |p: [f64; 2], q: [f64; 2]| -> [[f64; 2]; 2] {
            [
                [
                    u[0][0] * q[0] + u[0][1] * q[1],
                    u[0][2] * q[0] + u[0][3] * q[1],
                ],
                [
                    u[1][0] * p[0] + u[1][2] * p[1],
                    u[1][1] * p[0] + u[1][3] * p[1],
                ],
            ]
        };
        let mw = |g: [f64; 2], v: [f64; 2]| -> [f64; 2] {
            let a = g[0] * (eta * v[0]).exp();
            let b = g[1] * (eta * v[1]).exp();
            [a / (a + b), b / (a + b)]
        };
        let v0 = field(p, q);
        let x1 = [mw(p, v0[0]), mw(q, v0[1])];
        let v1 = field(x1[0], x1[1]);
        let g1 = [mw(p, v1[0]), mw(q, v1[1])];

        let specs = Regularizer::entropy().for_game(&[2, 2]).unwrap();
        let state = OmdState::new(&game, init).unwrap();
        let (next, out) = omd_round(
            &game,
            &specs,
            &state,
            &LearningRateSchedule::uniform(2, eta),
            &mut CorruptionTracker::none(2),
        )
        .unwrap();
        for i in 0..2 {
            for a in 0..2 {
                assert!((out.played.strategy(i).probs()[a] - x1[i][a]).abs() < 1e-14);
                assert!((next.anchor.strategy(i).probs()[a] - g1[i][a]).abs() < 1e-14);
                assert!((out.payoffs[i].values()[a] - v1[i][a]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn omd_matches_oftrl_under_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..4 {
            let counts: Vec<usize> = (0..rng.random_range(2..4)).map(|_| rng.random_range(2..5)).collect();
            let u = counts
                .iter()
                .map(|_| (0..counts.iter().product::<usize>()).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let game = NormalFormGame::new(counts, u).unwrap();
            let mut cfg = DynamicsConfig::new(
                Algorithm::Omd,
                Regularizer::entropy(),
                LearningRateSchedule::uniform(game.num_players(), 0.1),
                200,
            );
            cfg.seed = seed;
            let omd = run_dynamics(&game, &cfg).unwrap();
            cfg.algorithm = Algorithm::Oftrl;
            let ftrl = run_dynamics(&game, &cfg).unwrap();
            for (a, b) in omd.played().iter().zip(ftrl.played()) {
                assert!(a.max_coordinate_difference(b) <= 1e-8);
            }
        }
    }

    #[test]
    fn omd_matches_oftrl_from_skewed_start() {
        let mut cfg = DynamicsConfig::new(
            Algorithm::Omd,
            Regularizer::entropy(),
            LearningRateSchedule::uniform(2, 0.1),
            300,
        )
        .with_initial(skewed_init());
        let omd = run_dynamics(&pennies(), &cfg).unwrap();
        cfg.algorithm = Algorithm::Oftrl;
        let ftrl = run_dynamics(&pennies(), &cfg).unwrap();
        for (a, b) in omd.played().iter().zip(ftrl.played()) {
            assert!(a.max_coordinate_difference(b) <= 1e-8);
        }
    }

    #[test]
    fn zero_game_stays_uniform() {
        let game = NormalFormGame::new(vec![3, 2], vec![vec![0.0; 6], vec![0.0; 6]]).unwrap();
        for algo in [Algorithm::Omd, Algorithm::Oftrl] {
            for reg in [Regularizer::entropy(), Regularizer::euclid()] {
                let cfg = DynamicsConfig::new(algo, reg, LearningRateSchedule::uniform(2, 0.1), 20);
                let traj = run_dynamics(&game, &cfg).unwrap();
                let last = traj.played().last().unwrap();
                assert!(last.max_coordinate_difference(&StrategyProfile::uniform(&[3, 2])) < 1e-15);
            }
        }
    }

    #[test]
    fn first_oftrl_iterate_is_ftrl_of_initial_payoff() {
        let game = pennies();
        let specs = Regularizer::euclid().for_game(&[2, 2]).unwrap();
        let state = OftrlState::new(&game, &specs, skewed_init()).unwrap();
        let (_, out) = oftrl_round(
            &game,
            &specs,
            &state,
            &LearningRateSchedule::uniform(2, 0.5),
            &mut CorruptionTracker::none(2),
        )
        .unwrap();
        for i in 0..2 {
            let shifted: Vec<f64> = state.last_payoff[i]
                .values()
                .iter()
                .zip(skewed_init().strategy(i).probs())
                .map(|(v, x)| v + x / 0.5)
                .collect();
            let expected = specs[i].ftrl_step(&shifted, 0.5).unwrap();
            assert_eq!(out.played.strategy(i), &expected);
        }
    }

    #[test]
    fn single_round_equals_run_of_length_one() {
        let game = make_harmonic_game(&HarmonicWeights::uniform(&[2, 3]), &[2, 3], 4).unwrap();
        let cfg = DynamicsConfig::new(
            Algorithm::Omd,
            Regularizer::euclid(),
            LearningRateSchedule::uniform(2, 0.2),
            1,
        );
        let traj = run_dynamics(&game, &cfg).unwrap();
        let specs = Regularizer::euclid().for_game(&[2, 3]).unwrap();
        let state = OmdState::new(&game, StrategyProfile::uniform(&[2, 3])).unwrap();
        let (next, out) = omd_round(&game, &specs, &state, &cfg.schedule, &mut CorruptionTracker::none(2)).unwrap();
        assert_eq!(traj.played()[0], out.played);
        assert_eq!(traj.anchors().unwrap()[0], next.anchor);
        assert_eq!(run_dynamics(&game, &cfg).unwrap(), traj);
    }

    #[test]
    fn corrupted_runs_are_deterministic() {
        let game = pennies();
        let cfg = DynamicsConfig::new(
            Algorithm::Omd,
            Regularizer::entropy(),
            LearningRateSchedule::uniform(2, 0.1),
            50,
        )
        .with_corruption("geometric:0.5,0.4".parse().unwrap(), 11);
        let a = run_dynamics(&game, &cfg).unwrap();
        assert_eq!(a, run_dynamics(&game, &cfg).unwrap());
        assert!(a.is_corrupted());
        let total: f64 = a.corruption_norms().iter().map(|c| c[0]).sum();
        assert_eq!(total, a.corruption_total(0, 50));
        assert!(total <= 1.6);
    }

    #[test]
    fn rejects_bad_configs() {
        let game = pennies();
        let mut cfg = DynamicsConfig::new(
            Algorithm::Omd,
            Regularizer::entropy(),
            LearningRateSchedule::uniform(2, 0.1),
            0,
        );
        assert!(run_dynamics(&game, &cfg).is_err());
        cfg.iterations = 3;
        cfg.schedule = LearningRateSchedule::uniform(2, -0.1);
        assert!(matches!(run_dynamics(&game, &cfg), Err(LabError::Config(_))));
        cfg.schedule = LearningRateSchedule::InverseSqrt {
            initial: vec![0.2, 0.2],
            floor: vec![0.05, 0.05],
        };
        cfg.algorithm = Algorithm::Oftrl;
        assert!(matches!(run_dynamics(&game, &cfg), Err(LabError::Config(_))));
        let big = NormalFormGame::bimatrix(&[vec![2.0, 0.0]], &[vec![0.0, 0.0]]).unwrap();
        cfg.algorithm = Algorithm::Omd;
        assert!(matches!(run_dynamics(&big, &cfg), Err(LabError::InvalidGame(_))));
    }

    #[test]
    fn lr_caps() {
        let entropy = NormConstants { c: 1.0, c_star: 1.0 };
        let m = RegretWeights::uniform(2);
        assert!((theorem_lr_cap(2, entropy, &m, false).unwrap() - 0.25).abs() < 1e-15);
        let corrupted = theorem_lr_cap(2, entropy, &m, true).unwrap();
        assert!((corrupted - 0.25 / 3f64.sqrt()).abs() < 1e-15);
        let a = RegretWeights::new(vec![1.0, 4.0]).unwrap();
        let b = RegretWeights::new(vec![2.5, 10.0]).unwrap();
        assert_eq!(
            theorem_lr_cap(3, entropy, &a, false).unwrap(),
            theorem_lr_cap(3, entropy, &b, false).unwrap()
        );
        assert!(theorem_lr_cap(1, entropy, &RegretWeights::uniform(1), false).is_err());
    }
}
