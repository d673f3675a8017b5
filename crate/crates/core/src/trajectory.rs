use crate::error::{LabError, Result};
use crate::game::{payoff_fields, MixedStrategy, NormalFormGame, PayoffVector, StrategyProfile};

/// Ordered record of one run.
///
/// Round `t` (1-based) is stored at index `t - 1`. `prescribed[t]` is what the
/// learning rule produced, `played[t]` what was actually committed after
/// corruption, and `payoffs[t][i] = v_i(played[t])`. OMD runs also carry the
/// anchors `g^1..g^T`; the shared starting point `x^0 = g^0` and its payoff
/// field `v^0` are kept separately since round 1 refers to them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub(crate) initial: Option<StrategyProfile>,
    pub(crate) initial_payoffs: Option<Vec<PayoffVector>>,
    pub(crate) prescribed: Vec<StrategyProfile>,
    pub(crate) played: Vec<StrategyProfile>,
    pub(crate) payoffs: Vec<Vec<PayoffVector>>,
    pub(crate) anchors: Option<Vec<StrategyProfile>>,
    pub(crate) corruption: Vec<Vec<f64>>,
    pub(crate) corrupted: bool,
}

impl Trajectory {
    /// Trajectory of arbitrary committed profiles with no corruption and no
    /// learner state, e.g. for checking regret identities.
    pub fn from_played(game: &NormalFormGame, played: Vec<StrategyProfile>) -> Result<Self> {
        let payoffs = played
            .iter()
            .map(|x| payoff_fields(game, x))
            .collect::<Result<Vec<_>>>()?;
        let n = game.num_players();
        Ok(Self {
            initial: None,
            initial_payoffs: None,
            prescribed: played.clone(),
            corruption: vec![vec![0.0; n]; played.len()],
            played,
            payoffs,
            anchors: None,
            corrupted: false,
        })
    }

    pub fn len(&self) -> usize {
        self.played.len()
    }

    pub fn is_empty(&self) -> bool {
        self.played.is_empty()
    }

    pub fn num_players(&self) -> usize {
        self.played
            .first()
            .or(self.initial.as_ref())
            .map_or(0, StrategyProfile::num_players)
    }

    pub fn initial(&self) -> Option<&StrategyProfile> {
        self.initial.as_ref()
    }

    pub fn initial_payoffs(&self) -> Option<&[PayoffVector]> {
        self.initial_payoffs.as_deref()
    }

    pub fn prescribed(&self) -> &[StrategyProfile] {
        &self.prescribed
    }

    pub fn played(&self) -> &[StrategyProfile] {
        &self.played
    }

    pub fn payoffs(&self) -> &[Vec<PayoffVector>] {
        &self.payoffs
    }

    pub fn anchors(&self) -> Option<&[StrategyProfile]> {
        self.anchors.as_deref()
    }

    /// `||c_i^t||_1` per round and player.
    pub fn corruption_norms(&self) -> &[Vec<f64>] {
        &self.corruption
    }

    /// Whether the run went through a corruption layer other than `none`.
    pub fn is_corrupted(&self) -> bool {
        self.corrupted
    }

    /// `C_i` over the first `t` rounds.
    pub fn corruption_total(&self, player: usize, t: usize) -> f64 {
        self.corruption[..t].iter().map(|c| c[player]).sum()
    }

    /// `M_i = max_{s <= t} ||c_i^s||_1`.
    pub fn corruption_sup(&self, player: usize, t: usize) -> f64 {
        self.corruption[..t].iter().map(|c| c[player]).fold(0.0, f64::max)
    }

    /// Anchor `g^{t}` for `t` in `0..=T`, `g^0` being the initial profile.
    pub fn anchor_at(&self, t: usize) -> Option<&StrategyProfile> {
        if t == 0 {
            self.initial.as_ref()
        } else {
            self.anchors.as_ref().and_then(|a| a.get(t - 1))
        }
    }

    /// Played profile `x^t` for `t` in `0..=T`.
    pub fn played_at(&self, t: usize) -> Option<&StrategyProfile> {
        if t == 0 {
            self.initial.as_ref()
        } else {
            self.played.get(t - 1)
        }
    }

    /// Payoff field `v^t` for `t` in `0..=T`.
    pub fn payoffs_at(&self, t: usize) -> Option<&[PayoffVector]> {
        if t == 0 {
            self.initial_payoffs.as_deref()
        } else {
            self.payoffs.get(t - 1).map(Vec::as_slice)
        }
    }

    /// Strategies of one player over all rounds.
    pub fn player_strategies(&self, player: usize) -> impl Iterator<Item = &MixedStrategy> {
        self.played.iter().map(move |p| p.strategy(player))
    }

    /// First `t` rounds as a standalone trajectory.
    pub fn prefix(&self, t: usize) -> Self {
        Self {
            initial: self.initial.clone(),
            initial_payoffs: self.initial_payoffs.clone(),
            prescribed: self.prescribed[..t].to_vec(),
            played: self.played[..t].to_vec(),
            payoffs: self.payoffs[..t].to_vec(),
            anchors: self.anchors.as_ref().map(|a| a[..t].to_vec()),
            corruption: self.corruption[..t].to_vec(),
            corrupted: self.corrupted,
        }
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(LabError::InvalidArgument("trajectory is empty".into()))
        } else {
            Ok(())
        }
    }
}
