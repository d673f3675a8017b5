//! Game-class certificates: harmonic weights, constant-sum detection and
//! (weighted) regret of trajectories.
//!
//! The harmonic condition used throughout weights each deviation term by the
//! deviation target:
//!
//! ```text
//! sum_i sum_{b_i} mu_{i,b_i} (u_i(a_i, a_-i) - u_i(b_i, a_-i)) = 0   for every joint a
//! ```
//!
//! With this indexing, `m_i = sum_b mu_{i,b}` turns the harmonic identity into
//! a non-negative weighted regret certificate for every trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::game::{MixedStrategy, NormalFormGame, StrategyProfile};
use crate::linalg;
use crate::trajectory::Trajectory;

/// Residual below which a game counts as harmonic for given weights.
pub const HARMONIC_TOLERANCE: f64 = 1e-9;

const PIVOT_TOLERANCE: f64 = 1e-10;
const CONSTANT_SUM_TOLERANCE: f64 = 1e-12;

/// Strictly positive weights `mu_{i,b}`, one vector per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct HarmonicWeights {
    mu: Vec<Vec<f64>>,
}

impl HarmonicWeights {
    pub fn new(mu: Vec<Vec<f64>>) -> Result<Self> {
        for (i, w) in mu.iter().enumerate() {
            if w.is_empty() {
                return Err(LabError::InvalidArgument(format!("player {i} has no weights")));
            }
            if let Some(x) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(LabError::InvalidArgument(format!(
                    "harmonic weight {x} of player {i} is not strictly positive"
                )));
            }
        }
        Ok(Self { mu })
    }

    pub fn uniform(action_counts: &[usize]) -> Self {
        Self {
            mu: action_counts.iter().map(|&k| vec![1.0; k]).collect(),
        }
    }

    pub fn mu(&self) -> &[Vec<f64>] {
        &self.mu
    }

    pub fn player(&self, i: usize) -> &[f64] {
        &self.mu[i]
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.mu.iter().map(|w| w.iter().map(|x| x * k).collect()).collect())
    }

    fn check_dims(&self, action_counts: &[usize]) -> Result<()> {
        if self.mu.len() != action_counts.len() {
            return Err(LabError::InvalidArgument(format!(
                "weights for {} players, game has {}",
                self.mu.len(),
                action_counts.len()
            )));
        }
        for (i, (w, &k)) in self.mu.iter().zip(action_counts).enumerate() {
            if w.len() != k {
                return Err(LabError::DimensionMismatch {
                    player: i,
                    expected: k,
                    actual: w.len(),
                });
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for HarmonicWeights {
    type Error = LabError;
    fn try_from(value: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<HarmonicWeights> for Vec<Vec<f64>> {
    fn from(value: HarmonicWeights) -> Self {
        value.mu
    }
}

/// Strictly positive per-player regret weights `m_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RegretWeights {
    m: Vec<f64>,
}

impl RegretWeights {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        if m.is_empty() {
            return Err(LabError::InvalidArgument("no regret weights".into()));
        }
        if let Some(x) = m.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(LabError::InvalidArgument(format!(
                "regret weight {x} is not strictly positive"
            )));
        }
        Ok(Self { m })
    }

    pub fn uniform(n: usize) -> Self {
        Self { m: vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.m
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Smallest weight.
    pub fn min(&self) -> f64 {
        self.m.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest weight.
    pub fn max(&self) -> f64 {
        self.m.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl TryFrom<Vec<f64>> for RegretWeights {
    type Error = LabError;
    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<RegretWeights> for Vec<f64> {
    fn from(value: RegretWeights) -> Self {
        value.m
    }
}

/// Left-hand side of the harmonic identity at joint action `index`.
fn harmonic_lhs(game: &NormalFormGame, mu: &[Vec<f64>], index: usize) -> f64 {
    let mut total = 0.0;
    for (i, w) in mu.iter().enumerate() {
        let u = game.utilities(i);
        let here = u[index];
        for (b, &mu_b) in w.iter().enumerate() {
            total += mu_b * (here - u[game.deviate(index, i, b)]);
        }
    }
    total
}

/// Largest absolute violation of the harmonic identity over joint actions.
pub fn harmonic_residual(game: &NormalFormGame, weights: &HarmonicWeights) -> Result<f64> {
    weights.check_dims(game.action_counts())?;
    Ok((0..game.num_joint_actions())
        .map(|a| harmonic_lhs(game, weights.mu(), a).abs())
        .fold(0.0, f64::max))
}

fn weight_offsets(action_counts: &[usize]) -> Vec<usize> {
    action_counts
        .iter()
        .scan(0, |acc, &k| {
            let o = *acc;
            *acc += k;
            Some(o)
        })
        .collect()
}

/// Searches for strictly positive harmonic weights.
///
/// The harmonic identity is linear in `mu`; its nullspace is computed by
/// elimination and a handful of candidate vectors from it are tried: every
/// basis vector and its negation, the sum of the basis, and the projection of
/// the all-ones vector onto the nullspace. The first strictly positive
/// candidate that passes [`harmonic_residual`] is returned with min entry 1.
///
/// `None` means no candidate was positive; it is not a proof that no positive
/// weights exist when the nullspace has dimension above one.
pub fn solve_harmonic_weights(game: &NormalFormGame) -> Option<HarmonicWeights> {
    let counts = game.action_counts();
    let offsets = weight_offsets(counts);
    let cols: usize = counts.iter().sum();
    let rows: Vec<Vec<f64>> = (0..game.num_joint_actions())
        .map(|a| {
            let mut row = vec![0.0; cols];
            for (i, &k) in counts.iter().enumerate() {
                let u = game.utilities(i);
                for b in 0..k {
                    row[offsets[i] + b] = u[a] - u[game.deviate(a, i, b)];
                }
            }
            row
        })
        .collect();
    let basis = linalg::nullspace(&rows, cols, PIVOT_TOLERANCE);
    if basis.is_empty() {
        return None;
    }

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for v in &basis {
        candidates.push(v.clone());
        candidates.push(v.iter().map(|x| -x).collect());
    }
    let sum: Vec<f64> = (0..cols).map(|c| basis.iter().map(|v| v[c]).sum()).collect();
    candidates.push(sum.iter().map(|x| -x).collect());
    candidates.push(sum);
    let ortho = linalg::orthonormal_basis(&basis, PIVOT_TOLERANCE);
    candidates.push(linalg::project_onto(&ortho, &vec![1.0; cols]));

    candidates.into_iter().find_map(|v| {
        let max = v.iter().copied().fold(0.0, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        if !(max > 0.0 && min > 1e-9 * max) {
            return None;
        }
        let mu: Vec<Vec<f64>> = counts
            .iter()
            .zip(&offsets)
            .map(|(&k, &o)| v[o..o + k].iter().map(|x| x / min).collect())
            .collect();
        let weights = HarmonicWeights::new(mu).ok()?;
        let scale = max / min;
        (harmonic_residual(game, &weights).ok()? <= HARMONIC_TOLERANCE * scale.max(1.0))
            .then_some(weights)
    })
}

/// Samples a game that is harmonic for `weights`.
///
/// A uniform random utility vector is orthogonally projected onto the solution
/// space of the (utility-linear) harmonic identity and then divided by its
/// largest absolute entry, a common positive scale that keeps the identity.
pub fn make_harmonic_game(
    weights: &HarmonicWeights,
    action_counts: &[usize],
    seed: u64,
) -> Result<NormalFormGame> {
    weights.check_dims(action_counts)?;
    let scaffold = NormalFormGame::new(
        action_counts.to_vec(),
        vec![vec![0.0; action_counts.iter().product()]; action_counts.len()],
    )?;
    let joint = scaffold.num_joint_actions();
    let n = action_counts.len();
    let cols = n * joint;

    // Row a: sum_i (m_i u_i(a) - sum_b mu_{i,b} u_i(b, a_-i)).
    let rows: Vec<Vec<f64>> = (0..joint)
        .map(|a| {
            let mut row = vec![0.0; cols];
            for i in 0..n {
                let mu = weights.player(i);
                let m_i: f64 = mu.iter().sum();
                row[i * joint + a] += m_i;
                for (b, &mu_b) in mu.iter().enumerate() {
                    row[i * joint + scaffold.deviate(a, i, b)] -= mu_b;
                }
            }
            row
        })
        .collect();
    let row_space = linalg::orthonormal_basis(&rows, PIVOT_TOLERANCE);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let projected = linalg::project_out(&row_space, &sample);
    let scale = projected.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let utilities: Vec<Vec<f64>> = projected
        .chunks(joint)
        .map(|u| {
            u.iter()
                .map(|x| if scale > 0.0 { (x / scale).clamp(-1.0, 1.0) } else { 0.0 })
                .collect()
        })
        .collect();
    NormalFormGame::new(action_counts.to_vec(), utilities)
}

/// `m_i = sum_b mu_{i,b}` and the profile `x*_i = mu_i / m_i`.
pub fn regret_weights_from_harmonic(weights: &HarmonicWeights) -> (RegretWeights, StrategyProfile) {
    let m: Vec<f64> = weights.mu().iter().map(|w| w.iter().sum()).collect();
    let profile = StrategyProfile::new(
        weights
            .mu()
            .iter()
            .map(|w| MixedStrategy::from_weights(w.clone()))
            .collect(),
    );
    (RegretWeights { m }, profile)
}

/// Regret of `player` after each prefix of the trajectory.
pub fn regret_prefixes(trajectory: &Trajectory, player: usize) -> Result<Vec<f64>> {
    trajectory.ensure_non_empty()?;
    if player >= trajectory.num_players() {
        return Err(LabError::InvalidArgument(format!("player {player} out of range")));
    }
    Ok(regret_prefixes_of(
        trajectory.played().iter().map(|p| p.strategy(player)),
        trajectory.payoffs().iter().map(|v| v[player].values()),
    ))
}

/// Prefix regrets of an arbitrary strategy sequence against a payoff sequence.
pub(crate) fn regret_prefixes_of<'a>(
    strategies: impl Iterator<Item = &'a MixedStrategy>,
    payoffs: impl Iterator<Item = &'a [f64]>,
) -> Vec<f64> {
    let mut cumulative: Vec<f64> = Vec::new();
    let mut realized = 0.0;
    strategies
        .zip(payoffs)
        .map(|(x, v)| {
            if cumulative.is_empty() {
                cumulative = vec![0.0; v.len()];
            }
            cumulative.iter_mut().zip(v).for_each(|(c, vi)| *c += vi);
            realized += x.dot(v);
            cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max) - realized
        })
        .collect()
}

/// `max_a sum_t v_i^t(a) - sum_t <x_i^t, v_i^t>` over the whole trajectory.
pub fn regret(trajectory: &Trajectory, player: usize) -> Result<f64> {
    Ok(*regret_prefixes(trajectory, player)?.last().expect("non-empty"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedRegret {
    pub per_player: Vec<f64>,
    pub total: f64,
}

pub fn weighted_regret(trajectory: &Trajectory, weights: &RegretWeights) -> Result<WeightedRegret> {
    trajectory.ensure_non_empty()?;
    if weights.len() != trajectory.num_players() {
        return Err(LabError::InvalidArgument(format!(
            "{} regret weights for {} players",
            weights.len(),
            trajectory.num_players()
        )));
    }
    let per_player = weights
        .values()
        .iter()
        .enumerate()
        .map(|(i, m)| Ok(m * regret(trajectory, i)?))
        .collect::<Result<Vec<_>>>()?;
    let total = per_player.iter().sum();
    Ok(WeightedRegret { per_player, total })
}

/// The constant `c` when `sum_i u_i(a) = c` at every joint action.
pub fn is_constant_sum(game: &NormalFormGame) -> Option<f64> {
    let sum_at = |a: usize| (0..game.num_players()).map(|i| game.utilities(i)[a]).sum::<f64>();
    let c = sum_at(0);
    (0..game.num_joint_actions())
        .all(|a| (sum_at(a) - c).abs() <= CONSTANT_SUM_TOLERANCE)
        .then_some(c)
}
