use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Per-player learning rates `eta_i^t`, indexed from round `t = 1`.
///
/// Every mode is non-increasing in `t` and bounded below by a positive floor
/// `eta_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum LearningRateSchedule {
    Constant { eta: Vec<f64> },
    /// `eta_i^t = max(floor_i, initial_i / sqrt(t))`.
    InverseSqrt { initial: Vec<f64>, floor: Vec<f64> },
    /// `rates[t - 1][i]`; the last row repeats after the list ends.
    Explicit { rates: Vec<Vec<f64>> },
}

impl LearningRateSchedule {
    pub fn constant(eta: Vec<f64>) -> Self {
        Self::Constant { eta }
    }

    pub fn uniform(n: usize, eta: f64) -> Self {
        Self::Constant { eta: vec![eta; n] }
    }

    pub fn num_players(&self) -> usize {
        match self {
            Self::Constant { eta } => eta.len(),
            Self::InverseSqrt { initial, .. } => initial.len(),
            Self::Explicit { rates } => rates.first().map_or(0, Vec::len),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant { .. } => true,
            Self::InverseSqrt { initial, floor } => initial == floor,
            Self::Explicit { rates } => rates.windows(2).all(|w| w[0] == w[1]),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let positive = |v: &[f64], what: &str| -> Result<()> {
            if v.len() != n {
                return Err(LabError::Config(format!(
                    "{what} has {} entries for {n} players",
                    v.len()
                )));
            }
            match v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                Some(x) => Err(LabError::Config(format!("{what} entry {x} is not positive"))),
                None => Ok(()),
            }
        };
        match self {
            Self::Constant { eta } => positive(eta, "learning rate"),
            Self::InverseSqrt { initial, floor } => {
                positive(initial, "initial learning rate")?;
                positive(floor, "learning rate floor")?;
                if let Some(i) = (0..n).find(|&i| floor[i] > initial[i]) {
                    return Err(LabError::Config(format!(
                        "player {i}: floor {} above initial rate {}",
                        floor[i], initial[i]
                    )));
                }
                Ok(())
            }
            Self::Explicit { rates } => {
                if rates.is_empty() {
                    return Err(LabError::Config("explicit schedule is empty".into()));
                }
                for row in rates {
                    positive(row, "learning rate")?;
                }
                for (t, w) in rates.windows(2).enumerate() {
                    if let Some(i) = (0..n).find(|&i| w[1][i] > w[0][i]) {
                        return Err(LabError::Config(format!(
                            "learning rate of player {i} increases at round {}",
                            t + 2
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// `eta_i^t` for `t >= 1`.
    pub fn eta(&self, player: usize, t: usize) -> f64 {
        let t = t.max(1);
        match self {
            Self::Constant { eta } => eta[player],
            Self::InverseSqrt { initial, floor } => {
                (initial[player] / (t as f64).sqrt()).max(floor[player])
            }
            Self::Explicit { rates } => rates[(t - 1).min(rates.len() - 1)][player],
        }
    }

    /// Lower bound `eta_i` of the schedule.
    pub fn floor(&self, player: usize) -> f64 {
        match self {
            Self::Constant { eta } => eta[player],
            Self::InverseSqrt { floor, .. } => floor[player],
            Self::Explicit { rates } => rates[rates.len() - 1][player],
        }
    }

    /// `eta^1 = max_i eta_i^1`.
    pub fn initial_max(&self) -> f64 {
        (0..self.num_players())
            .map(|i| self.eta(i, 1))
            .fold(0.0, f64::max)
    }

    /// Same schedule with every rate multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|x| x * k).collect::<Vec<_>>();
        match self {
            Self::Constant { eta } => Self::Constant { eta: s(eta) },
            Self::InverseSqrt { initial, floor } => Self::InverseSqrt {
                initial: s(initial),
                floor: s(floor),
            },
            Self::Explicit { rates } => Self::Explicit {
                rates: rates.iter().map(|r| s(r)).collect(),
            },
        }
    }
}
