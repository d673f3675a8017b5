//! Values observed on the first verified matching pennies run (entropy,
//! eta = 0.1, start (0.9, 0.1), 100 rounds), frozen to catch drift.

use regret_lab::diagnostics::extract_best_iterate;
use regret_lab::dynamics::{run_dynamics, Algorithm, DynamicsConfig, LearningRateSchedule};
use regret_lab::game::{nash_gap, MixedStrategy, StrategyProfile};
use regret_lab::regularizer::Regularizer;
use regret_lab::runner::catalog;

const FIXTURE_TOL: f64 = 1e-9;

#[test]
fn pennies_hundred_round_fixture() {
    let game = catalog::builtin("matching_pennies").unwrap();
    let init = StrategyProfile::new(vec![
        MixedStrategy::new(vec![0.9, 0.1]).unwrap(),
        MixedStrategy::uniform(2),
    ]);
    for algorithm in [Algorithm::Omd, Algorithm::Oftrl] {
        let cfg = DynamicsConfig::new(algorithm, Regularizer::entropy(), LearningRateSchedule::uniform(2, 0.1), 100)
            .with_initial(init.clone());
        let traj = run_dynamics(&game, &cfg).unwrap();
        let specs = cfg.regularizer.for_game(&[2, 2]).unwrap();
        let best = extract_best_iterate(&game, &traj, &specs, &cfg.schedule, None).unwrap();
        let gaps: Vec<f64> = traj.played().iter().map(|x| nash_gap(&game, x).unwrap()).collect();
        let tail_mean = gaps[80..].iter().sum::<f64>() / 20.0;

        assert_eq!(best.t, 98);
        assert!((best.gap - 0.474_667_048_964).abs() < FIXTURE_TOL, "{}", best.gap);
        assert!((gaps[99] - 0.554_113_894_542).abs() < FIXTURE_TOL, "{}", gaps[99]);
        assert!((tail_mean - 0.673_832_914_750).abs() < FIXTURE_TOL, "{tail_mean}");
    }
}
