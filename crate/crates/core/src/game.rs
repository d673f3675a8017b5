//! Finite normal-form games, mixed strategies and payoff fields.
//!
//! Utilities are stored as one dense tensor per player, flattened in
//! mixed-radix order with player 0's action as the most significant digit:
//!
//! ```text
//! index(a_0, ..., a_{n-1}) = sum_i a_i * prod_{j > i} |A_j|
//! ```
//!
//! For a two-player game this is the usual row-major layout of the payoff
//! matrix, with player 0 choosing the row.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Accepted drift of a probability vector's sum before construction rejects it.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

/// Slack used by [`is_eps_nash`].
pub const NASH_SLACK: f64 = 1e-12;

/// A probability vector over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl MixedStrategy {
    /// Builds a strategy, renormalizing when the sum is within
    /// [`SIMPLEX_TOLERANCE`] of one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(LabError::InvalidStrategy("empty probability vector".into()));
        }
        let mut probs = probs;
        for p in probs.iter_mut() {
            if !p.is_finite() {
                return Err(LabError::InvalidStrategy(format!("non-finite entry {p}")));
            }
            if *p < 0.0 {
                if *p < -1e-12 {
                    return Err(LabError::InvalidStrategy(format!("negative entry {p}")));
                }
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(LabError::InvalidStrategy(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        if sum != 1.0 {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(Self { probs })
    }

    pub fn uniform(dim: usize) -> Self {
        Self {
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn vertex(dim: usize, action: usize) -> Self {
        let mut probs = vec![0.0; dim];
        probs[action] = 1.0;
        Self { probs }
    }

    /// Normalizes a non-negative weight vector into a strategy.
    pub(crate) fn from_weights(mut weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= sum);
        Self { probs: weights }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.probs.iter().zip(other).map(|(p, v)| p * v).sum()
    }

    pub fn l1_distance(&self, other: &MixedStrategy) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = LabError;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(value: MixedStrategy) -> Self {
        value.probs
    }
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile {
    strategies: Vec<MixedStrategy>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Self {
        Self { strategies }
    }

    pub fn uniform(action_counts: &[usize]) -> Self {
        Self::new(action_counts.iter().map(|&k| MixedStrategy::uniform(k)).collect())
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.strategies
    }

    pub fn strategy(&self, player: usize) -> &MixedStrategy {
        &self.strategies[player]
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }

    pub fn l1_distance(&self, other: &StrategyProfile) -> f64 {
        self.strategies
            .iter()
            .zip(&other.strategies)
            .map(|(a, b)| a.l1_distance(b))
            .sum()
    }

    pub fn max_coordinate_difference(&self, other: &StrategyProfile) -> f64 {
        self.strategies
            .iter()
            .zip(&other.strategies)
            .flat_map(|(a, b)| a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Expected utility of each pure action of one player against the others'
/// mixed strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PayoffVector {
    values: Vec<f64>,
}

impl PayoffVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![0.0; dim])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_distance(&self, other: &PayoffVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    action_counts: Vec<usize>,
    strides: Vec<usize>,
    utilities: Vec<Vec<f64>>,
}

impl NormalFormGame {
    /// Builds a game from flat per-player utility tensors.
    ///
    /// Entries are only required to be finite; use [`normalize_game`] to
    /// bring them into `[-1, 1]` before running dynamics.
    pub fn new(action_counts: Vec<usize>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        if action_counts.len() < 2 {
            return Err(LabError::InvalidGame(format!(
                "need at least 2 players, got {}",
                action_counts.len()
            )));
        }
        if let Some(i) = action_counts.iter().position(|&k| k == 0) {
            return Err(LabError::InvalidGame(format!("player {i} has no actions")));
        }
        if utilities.len() != action_counts.len() {
            return Err(LabError::InvalidGame(format!(
                "{} utility tensors for {} players",
                utilities.len(),
                action_counts.len()
            )));
        }
        let joint: usize = action_counts.iter().product();
        for (i, u) in utilities.iter().enumerate() {
            if u.len() != joint {
                return Err(LabError::DimensionMismatch {
                    player: i,
                    expected: joint,
                    actual: u.len(),
                });
            }
            if let Some(x) = u.iter().find(|x| !x.is_finite()) {
                return Err(LabError::InvalidGame(format!(
                    "player {i} has non-finite utility {x}"
                )));
            }
        }
        let mut strides = vec![1; action_counts.len()];
        for i in (0..action_counts.len() - 1).rev() {
            strides[i] = strides[i + 1] * action_counts[i + 1];
        }
        Ok(Self {
            action_counts,
            strides,
            utilities,
        })
    }

    /// Two-player game from row-major payoff matrices (player 0 picks the row).
    pub fn bimatrix(rows: &[Vec<f64>], cols_player: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if cols_player.len() != m || rows.iter().chain(cols_player).any(|r| r.len() != n) {
            return Err(LabError::InvalidGame("payoff matrices must be m x n".into()));
        }
        Self::new(
            vec![m, n],
            vec![
                rows.iter().flatten().copied().collect(),
                cols_player.iter().flatten().copied().collect(),
            ],
        )
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_joint_actions(&self) -> usize {
        self.utilities[0].len()
    }

    pub fn utilities(&self, player: usize) -> &[f64] {
        &self.utilities[player]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn joint_index(&self, actions: &[usize]) -> usize {
        actions.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// Action of `player` in the joint action with flat index `index`.
    pub fn action_of(&self, index: usize, player: usize) -> usize {
        (index / self.strides[player]) % self.action_counts[player]
    }

    /// Flat index obtained by replacing `player`'s action in `index` by `action`.
    pub fn deviate(&self, index: usize, player: usize, action: usize) -> usize {
        let current = self.action_of(index, player);
        index + action * self.strides[player] - current * self.strides[player]
    }

    pub fn utility(&self, player: usize, actions: &[usize]) -> f64 {
        self.utilities[player][self.joint_index(actions)]
    }

    pub fn is_normalized(&self) -> bool {
        self.utilities
            .iter()
            .flatten()
            .all(|u| (-1.0..=1.0).contains(u))
    }

    pub fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.num_players() != self.num_players() {
            return Err(LabError::InvalidArgument(format!(
                "profile has {} players, game has {}",
                profile.num_players(),
                self.num_players()
            )));
        }
        for (i, (s, &k)) in profile.strategies().iter().zip(&self.action_counts).enumerate() {
            if s.dim() != k {
                return Err(LabError::DimensionMismatch {
                    player: i,
                    expected: k,
                    actual: s.dim(),
                });
            }
        }
        Ok(())
    }

    /// Probability that every player other than `player` plays its part of
    /// the joint action `index`.
    fn opponents_prob(&self, profile: &StrategyProfile, index: usize, player: usize) -> f64 {
        let mut p = 1.0;
        for j in 0..self.num_players() {
            if j != player {
                p *= profile.strategy(j).probs()[self.action_of(index, j)];
                if p == 0.0 {
                    break;
                }
            }
        }
        p
    }
}

fn check_player(game: &NormalFormGame, player: usize) -> Result<()> {
    if player >= game.num_players() {
        return Err(LabError::InvalidArgument(format!(
            "player {player} out of range for {}-player game",
            game.num_players()
        )));
    }
    Ok(())
}

/// `sum_a u_i(a) prod_j x_j(a_j)`.
pub fn expected_utility(game: &NormalFormGame, profile: &StrategyProfile, player: usize) -> Result<f64> {
    let field = payoff_field(game, profile, player)?;
    Ok(profile.strategy(player).dot(field.values()))
}

/// `v_i(x)`: component `a_i` is `u_i(a_i, x_{-i})`.
pub fn payoff_field(
    game: &NormalFormGame,
    profile: &StrategyProfile,
    player: usize,
) -> Result<PayoffVector> {
    check_player(game, player)?;
    game.check_profile(profile)?;
    let mut values = vec![0.0; game.action_counts[player]];
    for (index, &u) in game.utilities[player].iter().enumerate() {
        let p = game.opponents_prob(profile, index, player);
        if p != 0.0 {
            values[game.action_of(index, player)] += u * p;
        }
    }
    Ok(PayoffVector::new(values))
}

/// Payoff fields of all players.
pub fn payoff_fields(game: &NormalFormGame, profile: &StrategyProfile) -> Result<Vec<PayoffVector>> {
    (0..game.num_players())
        .map(|i| payoff_field(game, profile, i))
        .collect()
}

/// Largest gain any single player can obtain by deviating to a best response.
pub fn nash_gap(game: &NormalFormGame, profile: &StrategyProfile) -> Result<f64> {
    let fields = payoff_fields(game, profile)?;
    Ok(nash_gap_from_fields(profile, &fields))
}

pub(crate) fn nash_gap_from_fields(profile: &StrategyProfile, fields: &[PayoffVector]) -> f64 {
    fields
        .iter()
        .zip(profile.strategies())
        .map(|(v, x)| (v.max() - x.dot(v.values())).max(0.0))
        .fold(0.0, f64::max)
}

pub fn is_eps_nash(game: &NormalFormGame, profile: &StrategyProfile, eps: f64) -> Result<bool> {
    if !(eps >= 0.0) {
        return Err(LabError::InvalidArgument(format!("eps must be >= 0, got {eps}")));
    }
    Ok(nash_gap(game, profile)? <= eps + NASH_SLACK)
}

/// Affinely rescales each player's utilities into `[-1, 1]`.
///
/// Players already inside the range are left untouched. Otherwise the
/// player's utilities are shifted by the midpoint of their range and divided
/// by the half-range; a constant player maps to all zeros.
pub fn normalize_game(game: &NormalFormGame) -> Result<NormalFormGame> {
    let mut utilities = Vec::with_capacity(game.num_players());
    for (i, u) in game.utilities.iter().enumerate() {
        if let Some(x) = u.iter().find(|x| !x.is_finite()) {
            return Err(LabError::InvalidGame(format!(
                "player {i} has non-finite utility {x}"
            )));
        }
        let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo >= -1.0 && hi <= 1.0 {
            utilities.push(u.clone());
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        if half == 0.0 {
            utilities.push(vec![0.0; u.len()]);
        } else {
            utilities.push(u.iter().map(|x| ((x - mid) / half).clamp(-1.0, 1.0)).collect());
        }
    }
    NormalFormGame::new(game.action_counts.clone(), utilities)
}

/// On-disk JSON layout of a game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: usize,
    pub actions: Vec<usize>,
    pub utilities: Vec<Vec<f64>>,
}

impl GameFile {
    pub fn into_game(self) -> Result<NormalFormGame> {
        if self.players != self.actions.len() {
            return Err(LabError::InvalidGame(format!(
                "\"players\" is {} but {} action counts were given",
                self.players,
                self.actions.len()
            )));
        }
        NormalFormGame::new(self.actions, self.utilities)
    }
}

impl From<&NormalFormGame> for GameFile {
    fn from(game: &NormalFormGame) -> Self {
        Self {
            players: game.num_players(),
            actions: game.action_counts.clone(),
            utilities: game.utilities.clone(),
        }
    }
}

impl NormalFormGame {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text)
            .map_err(|e| LabError::InvalidGame(format!("cannot parse game JSON: {e}")))?;
        file.into_game()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GameFile::from(self)).expect("game serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matching_pennies() -> NormalFormGame {
        NormalFormGame::bimatrix(
            &[vec![-1.0, 1.0], vec![1.0, -1.0]],
            &[vec![1.0, -1.0], vec![-1.0, 1.0]],
        )
        .unwrap()
    }

    fn random_strategy(rng: &mut ChaCha8Rng, dim: usize) -> MixedStrategy {
        let w: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 1e-3).collect();
        MixedStrategy::from_weights(w)
    }

    fn random_game(rng: &mut ChaCha8Rng, counts: Vec<usize>) -> NormalFormGame {
        let joint: usize = counts.iter().product();
        let utilities = (0..counts.len())
            .map(|_| (0..joint).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        NormalFormGame::new(counts, utilities).unwrap()
    }

    fn profile(probs: &[&[f64]]) -> StrategyProfile {
        StrategyProfile::new(probs.iter().map(|p| MixedStrategy::new(p.to_vec()).unwrap()).collect())
    }

    #[test]
    fn uniform_matching_pennies_has_zero_utility() {
        let g = matching_pennies();
        let x = StrategyProfile::uniform(&[2, 2]);
        assert_eq!(expected_utility(&g, &x, 0).unwrap(), 0.0);
        assert_eq!(expected_utility(&g, &x, 1).unwrap(), 0.0);
        assert_eq!(payoff_field(&g, &x, 0).unwrap().values(), &[0.0, 0.0]);
        assert_eq!(nash_gap(&g, &x).unwrap(), 0.0);
        assert!(is_eps_nash(&g, &x, 0.0).unwrap());
    }

    #[test]
    fn pure_heads_heads() {
        let g = matching_pennies();
        let x = profile(&[&[1.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(expected_utility(&g, &x, 0).unwrap(), -1.0);
        assert_eq!(expected_utility(&g, &x, 1).unwrap(), 1.0);
        assert_eq!(payoff_field(&g, &x, 0).unwrap().values(), &[-1.0, 1.0]);
        assert_eq!(nash_gap(&g, &x).unwrap(), 2.0);
        assert!(!is_eps_nash(&g, &x, 1.0).unwrap());
        assert!(is_eps_nash(&g, &x, 2.0).unwrap());
        assert!(is_eps_nash(&g, &x, -1.0).is_err());
    }

    #[test]
    fn three_player_utility_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_game(&mut rng, vec![2, 2, 2]);
        let x: Vec<MixedStrategy> = (0..3).map(|_| random_strategy(&mut rng, 2)).collect();
        let p = StrategyProfile::new(x.clone());
        for i in 0..3 {
            let mut brute = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        brute += g.utility(i, &[a, b, c])
                            * x[0].probs()[a]
                            * x[1].probs()[b]
                            * x[2].probs()[c];
                    }
                }
            }
            assert!((expected_utility(&g, &p, i).unwrap() - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn bimatrix_field_is_matrix_vector_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_game(&mut rng, vec![3, 3]);
        let p = StrategyProfile::new(vec![random_strategy(&mut rng, 3), random_strategy(&mut rng, 3)]);
        let v = payoff_field(&g, &p, 0).unwrap();
        for a in 0..3 {
            let expected: f64 = (0..3)
                .map(|b| g.utility(0, &[a, b]) * p.strategy(1).probs()[b])
                .sum();
            assert!((v.values()[a] - expected).abs() < 1e-12);
        }
        let w = payoff_field(&g, &p, 1).unwrap();
        for b in 0..3 {
            let expected: f64 = (0..3)
                .map(|a| g.utility(1, &[a, b]) * p.strategy(0).probs()[a])
                .sum();
            assert!((w.values()[b] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_names_player() {
        let g = matching_pennies();
        let x = profile(&[&[1.0, 0.0], &[0.2, 0.3, 0.5]]);
        assert_eq!(
            payoff_field(&g, &x, 0),
            Err(LabError::DimensionMismatch {
                player: 1,
                expected: 2,
                actual: 3
            })
        );
    }

    #[test]
    fn strategy_construction_tolerance() {
        let s = MixedStrategy::new(vec![0.5, 0.5 + 1e-7]).unwrap();
        assert!((s.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![1.1, -0.1]).is_err());
        assert!(MixedStrategy::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn normalization() {
        let g = matching_pennies();
        assert_eq!(normalize_game(&g).unwrap(), g);

        let raw = NormalFormGame::new(vec![2, 1], vec![vec![0.0, 10.0], vec![0.5, 0.5]]).unwrap();
        let n = normalize_game(&raw).unwrap();
        assert_eq!(n.utilities(0), &[-1.0, 1.0]);
        assert_eq!(n.utilities(1), &[0.5, 0.5]);

        let bad = NormalFormGame {
            action_counts: vec![1, 1],
            strides: vec![1, 1],
            utilities: vec![vec![f64::INFINITY], vec![0.0]],
        };
        assert!(normalize_game(&bad).is_err());
    }

    #[test]
    fn normalization_preserves_best_responses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let counts = vec![3, 2, 2];
            let joint: usize = counts.iter().product();
            let utilities = (0..3)
                .map(|_| (0..joint).map(|_| rng.random_range(-20.0..30.0)).collect())
                .collect();
            let raw = NormalFormGame::new(counts.clone(), utilities).unwrap();
            let norm = normalize_game(&raw).unwrap();
            assert!(norm.is_normalized());
            let p = StrategyProfile::new(counts.iter().map(|&k| random_strategy(&mut rng, k)).collect());
            for i in 0..3 {
                let argmax = |v: PayoffVector| {
                    v.values()
                        .iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |b, (k, &x)| if x > b.1 { (k, x) } else { b })
                        .0
                };
                assert_eq!(
                    argmax(payoff_field(&raw, &p, i).unwrap()),
                    argmax(payoff_field(&norm, &p, i).unwrap())
                );
            }
        }
    }

    #[test]
    fn singleton_action_player_contributes_no_gap() {
        let g = NormalFormGame::new(vec![1, 2], vec![vec![0.3, -0.2], vec![1.0, -1.0]]).unwrap();
        let p = profile(&[&[1.0], &[1.0, 0.0]]);
        assert_eq!(nash_gap(&g, &p).unwrap(), 0.0);
    }

    #[test]
    fn json_round_trip_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_game(&mut rng, vec![2, 3, 2]);
        let text = g.to_json();
        let back = NormalFormGame::from_json(&text).unwrap();
        for i in 0..3 {
            for (a, b) in g.utilities(i).iter().zip(back.utilities(i)) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        assert_eq!(back.to_json(), text);
        assert!(NormalFormGame::from_json(r#"{"players":2,"actions":[2,2],"utilities":[[0,0,0,0]]}"#).is_err());
        assert!(NormalFormGame::from_json(r#"{"players":3,"actions":[2,2],"utilities":[[0,0,0,0],[0,0,0,0]]}"#).is_err());
    }

    #[test]
    fn mixed_radix_layout_player_zero_most_significant() {
        let g = NormalFormGame::new(
            vec![2, 3],
            vec![(0..6).map(f64::from).collect(), vec![0.0; 6]],
        )
        .unwrap();
        assert_eq!(g.utility(0, &[1, 0]), 3.0);
        assert_eq!(g.utility(0, &[0, 2]), 2.0);
        assert_eq!(g.deviate(g.joint_index(&[1, 2]), 1, 0), g.joint_index(&[1, 0]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        fn game_and_profiles() -> impl Strategy<Value = (u64, usize)> {
            (any::<u64>(), 2usize..=3)
        }

        proptest! {
            #[test]
            fn field_inner_product_is_utility((seed, n) in game_and_profiles()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let counts: Vec<usize> = (0..n).map(|_| rng.random_range(1..=4)).collect();
                let g = random_game(&mut rng, counts.clone());
                let p = StrategyProfile::new(counts.iter().map(|&k| random_strategy(&mut rng, k)).collect());
                for i in 0..n {
                    let v = payoff_field(&g, &p, i).unwrap();
                    let direct: f64 = (0..g.num_joint_actions())
                        .map(|idx| {
                            g.utilities(i)[idx]
                                * (0..n).map(|j| p.strategy(j).probs()[g.action_of(idx, j)]).product::<f64>()
                        })
                        .sum();
                    prop_assert!((p.strategy(i).dot(v.values()) - direct).abs() < 1e-12);
                }
                let gap = nash_gap(&g, &p).unwrap();
                prop_assert!(gap >= 0.0);
                prop_assert!(is_eps_nash(&g, &p, gap).unwrap());
            }

            #[test]
            fn payoff_variation_bounded_by_opponent_movement((seed, n) in game_and_profiles()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let counts: Vec<usize> = (0..n).map(|_| rng.random_range(1..=4)).collect();
                let g = random_game(&mut rng, counts.clone());
                let p = StrategyProfile::new(counts.iter().map(|&k| random_strategy(&mut rng, k)).collect());
                let q = StrategyProfile::new(counts.iter().map(|&k| random_strategy(&mut rng, k)).collect());
                for i in 0..n {
                    let lhs = payoff_field(&g, &p, i).unwrap().sup_distance(&payoff_field(&g, &q, i).unwrap());
                    let rhs: f64 = (0..n).filter(|&j| j != i).map(|j| p.strategy(j).l1_distance(q.strategy(j))).sum();
                    prop_assert!(rhs - lhs >= -1e-12);
                }
            }

            #[test]
            fn field_is_affine_in_each_opponent(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let counts = vec![3, 2, 3];
                let g = random_game(&mut rng, counts.clone());
                let base: Vec<MixedStrategy> = counts.iter().map(|&k| random_strategy(&mut rng, k)).collect();
                let y0 = random_strategy(&mut rng, 3);
                let y1 = random_strategy(&mut rng, 3);
                let at = |lambda: f64| {
                    let mix: Vec<f64> = y0.probs().iter().zip(y1.probs()).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
                    let mut s = base.clone();
                    s[2] = MixedStrategy::new(mix).unwrap();
                    payoff_field(&g, &StrategyProfile::new(s), 0).unwrap()
                };
                let (f0, fh, f1) = (at(0.0), at(0.5), at(1.0));
                for k in 0..3 {
                    prop_assert!((fh.values()[k] - 0.5 * (f0.values()[k] + f1.values()[k])).abs() < 1e-12);
                }
            }
        }
    }
}
