//! Deviations between prescribed and played strategies.
//!
//! A corruption replaces the prescribed `x~_i^t` by another simplex point
//! `x_i^t`; the deviation is `c_i^t = x_i^t - x~_i^t`. Generated kinds mix the
//! prescribed strategy toward a uniformly drawn vertex:
//! `x = (1 - w_t) x~ + w_t e_k`, so `||c^t||_1 <= 2 w_t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::game::{MixedStrategy, StrategyProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CorruptionKind {
    None,
    /// Mixing weight `magnitude * rho^t`.
    GeometricDecay { rho: f64, magnitude: f64 },
    /// Mixing weight `magnitude` for `start <= t < start + width`, zero otherwise.
    Burst {
        start: usize,
        width: usize,
        magnitude: f64,
    },
    /// Explicit deviation vectors `offsets[t - 1][i]`; rounds past the end are
    /// uncorrupted.
    Custom { offsets: Vec<Vec<Vec<f64>>> },
}

impl CorruptionKind {
    pub fn validate(&self) -> Result<()> {
        let weight = |m: f64| {
            if (0.0..=1.0).contains(&m) {
                Ok(())
            } else {
                Err(LabError::Config(format!("corruption magnitude {m} outside [0, 1]")))
            }
        };
        match self {
            Self::None | Self::Custom { .. } => Ok(()),
            Self::GeometricDecay { rho, magnitude } => {
                if !(0.0..1.0).contains(rho) {
                    return Err(LabError::Config(format!("decay rate {rho} outside [0, 1)")));
                }
                weight(*magnitude)
            }
            Self::Burst { magnitude, .. } => weight(*magnitude),
        }
    }

    /// Mixing weight of generated kinds at round `t`.
    fn mixing_weight(&self, t: usize) -> f64 {
        match self {
            Self::GeometricDecay { rho, magnitude } => magnitude * rho.powi(t as i32),
            Self::Burst {
                start,
                width,
                magnitude,
            } if t >= *start && t < start + width => *magnitude,
            _ => 0.0,
        }
    }

    /// Analytic bound on `C_i = sum_t ||c_i^t||_1` for generated kinds.
    pub fn total_bound(&self) -> Option<f64> {
        match self {
            Self::None => Some(0.0),
            Self::GeometricDecay { rho, magnitude } => Some(2.0 * magnitude * rho / (1.0 - rho)),
            Self::Burst {
                width, magnitude, ..
            } => Some(2.0 * magnitude * *width as f64),
            Self::Custom { .. } => None,
        }
    }
}

impl std::str::FromStr for CorruptionKind {
    type Err = LabError;

    /// `none`, `geometric:<rho>,<magnitude>` or `burst:<start>,<width>,<magnitude>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>> {
            params
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| LabError::Config(format!("bad corruption parameter {p:?}")))
                })
                .collect()
        };
        let kind = match name.trim() {
            "none" => Self::None,
            "geometric" | "geometric-decay" => match nums()?[..] {
                [rho, magnitude] => Self::GeometricDecay { rho, magnitude },
                _ => return Err(LabError::Config("geometric corruption takes rho,magnitude".into())),
            },
            "burst" => match nums()?[..] {
                [start, width, magnitude] if start >= 0.0 && width >= 0.0 => Self::Burst {
                    start: start as usize,
                    width: width as usize,
                    magnitude,
                },
                _ => {
                    return Err(LabError::Config(
                        "burst corruption takes start,width,magnitude".into(),
                    ))
                }
            },
            other => return Err(LabError::Config(format!("unknown corruption kind {other:?}"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl std::fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::None => write!(f, "none"),
            Self::GeometricDecay { rho, magnitude } => write!(f, "geometric:{rho},{magnitude}"),
            Self::Burst {
                start,
                width,
                magnitude,
            } => write!(f, "burst:{start},{width},{magnitude}"),
            Self::Custom { offsets } => write!(f, "custom({} rounds)", offsets.len()),
        }
    }
}

/// Applies a corruption kind round by round and accumulates `C_i` and `M_i`.
#[derive(Debug, Clone)]
pub struct CorruptionTracker {
    kind: CorruptionKind,
    rng: ChaCha8Rng,
    totals: Vec<f64>,
    sups: Vec<f64>,
}

impl CorruptionTracker {
    pub fn new(kind: CorruptionKind, num_players: usize, seed: u64) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            rng: ChaCha8Rng::seed_from_u64(seed),
            totals: vec![0.0; num_players],
            sups: vec![0.0; num_players],
        })
    }

    pub fn none(num_players: usize) -> Self {
        Self::new(CorruptionKind::None, num_players, 0).expect("none is valid")
    }

    pub fn kind(&self) -> &CorruptionKind {
        &self.kind
    }

    pub fn is_active(&self) -> bool {
        !matches!(self.kind, CorruptionKind::None)
    }

    /// `C_i` so far.
    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    /// `M_i = sup_t ||c_i^t||_1` so far.
    pub fn sups(&self) -> &[f64] {
        &self.sups
    }

    /// Played profile for round `t` and the per-player `||c_i^t||_1`.
    pub fn apply(&mut self, prescribed: &StrategyProfile, t: usize) -> Result<(StrategyProfile, Vec<f64>)> {
        let played: Vec<MixedStrategy> = match &self.kind {
            CorruptionKind::None => prescribed.strategies().to_vec(),
            CorruptionKind::Custom { offsets } => match offsets.get(t.wrapping_sub(1)) {
                None => prescribed.strategies().to_vec(),
                Some(round) => {
                    if round.len() != prescribed.num_players() {
                        return Err(LabError::InvalidStrategy(format!(
                            "custom corruption at round {t} has {} players",
                            round.len()
                        )));
                    }
                    prescribed
                        .strategies()
                        .iter()
                        .zip(round)
                        .enumerate()
                        .map(|(i, (x, c))| {
                            if c.len() != x.dim() {
                                return Err(LabError::DimensionMismatch {
                                    player: i,
                                    expected: x.dim(),
                                    actual: c.len(),
                                });
                            }
                            let moved: Vec<f64> = x.probs().iter().zip(c).map(|(a, b)| a + b).collect();
                            if moved.iter().any(|p| *p < -1e-12) {
                                return Err(LabError::InvalidStrategy(format!(
                                    "custom corruption moves player {i} off the simplex at round {t}"
                                )));
                            }
                            MixedStrategy::new(moved).map_err(|e| {
                                LabError::InvalidStrategy(format!(
                                    "custom corruption of player {i} at round {t}: {e}"
                                ))
                            })
                        })
                        .collect::<Result<_>>()?
                }
            },
            kind => {
                let w = kind.mixing_weight(t);
                prescribed
                    .strategies()
                    .iter()
                    .map(|x| {
                        if w == 0.0 {
                            return x.clone();
                        }
                        let k = self.rng.random_range(0..x.dim());
                        let mixed: Vec<f64> = x
                            .probs()
                            .iter()
                            .enumerate()
                            .map(|(a, p)| (1.0 - w) * p + if a == k { w } else { 0.0 })
                            .collect();
                        MixedStrategy::from_weights(mixed)
                    })
                    .collect()
            }
        };
        let played = StrategyProfile::new(played);
        let norms: Vec<f64> = played
            .strategies()
            .iter()
            .zip(prescribed.strategies())
            .map(|(a, b)| a.l1_distance(b))
            .collect();
        for (i, c) in norms.iter().enumerate() {
            self.totals[i] += c;
            self.sups[i] = self.sups[i].max(*c);
        }
        Ok((played, norms))
    }
}
