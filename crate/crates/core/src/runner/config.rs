//! Run configuration read from JSON or TOML and from command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classes::{regret_weights_from_harmonic, solve_harmonic_weights, RegretWeights};
use crate::dynamics::{Algorithm, CorruptionKind, DynamicsConfig, LearningRateSchedule};
use crate::error::{LabError, Result};
use crate::game::{normalize_game, MixedStrategy, NormalFormGame, StrategyProfile};
use crate::regularizer::{Regularizer, RegularizerKind};
use crate::runner::catalog;

/// A scalar shared by all players or one value per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerPlayer {
    Scalar(f64),
    List(Vec<f64>),
}

impl PerPlayer {
    pub fn expand(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            Self::Scalar(x) => Ok(vec![*x; n]),
            Self::List(v) if v.len() == n => Ok(v.clone()),
            Self::List(v) => Err(LabError::Config(format!(
                "{} per-player values for {n} players",
                v.len()
            ))),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Self::Scalar(x) => vec![*x],
            Self::List(v) => v.clone(),
        }
    }
}

impl std::str::FromStr for PerPlayer {
    type Err = LabError;

    /// `0.1` or `0.1,0.2`.
    fn from_str(s: &str) -> Result<Self> {
        let values = parse_floats(s, "learning rate")?;
        Ok(match values[..] {
            [x] => Self::Scalar(x),
            _ => Self::List(values),
        })
    }
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| LabError::Config(format!("bad {what} value {p:?}")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(LabError::Config(format!("empty {what} list")));
    }
    Ok(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    #[default]
    Constant,
    /// `eta / sqrt(t)` bounded below by `eta_floor`.
    InverseSqrt,
}

impl std::str::FromStr for ScheduleMode {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "inverse-sqrt" => Ok(Self::InverseSqrt),
            other => Err(LabError::Config(format!("unknown schedule {other:?}"))),
        }
    }
}

fn default_algo() -> Algorithm {
    Algorithm::Omd
}

fn default_reg() -> RegularizerKind {
    RegularizerKind::Entropy
}

fn default_corruption() -> String {
    "none".into()
}

fn default_weights() -> String {
    "uniform".into()
}

/// Everything needed to reproduce one run. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Builtin name or path to a game JSON file.
    pub game: String,
    #[serde(default = "default_algo")]
    pub algo: Algorithm,
    #[serde(default = "default_reg")]
    pub reg: RegularizerKind,
    /// Interior clip for the entropy regularizer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub eta: PerPlayer,
    #[serde(default)]
    pub schedule: ScheduleMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_floor: Option<PerPlayer>,
    pub iters: usize,
    /// `none`, `geometric:<rho>,<magnitude>` or `burst:<start>,<width>,<magnitude>`.
    #[serde(default = "default_corruption")]
    pub corruption: String,
    #[serde(default)]
    pub seed: u64,
    /// `0.9,0.1;0.5,0.5`; missing or empty players start uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    /// `uniform`, `harmonic` or comma-separated `m_i`.
    #[serde(default = "default_weights")]
    pub weights: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Output directory; nothing is written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(game: impl Into<String>, eta: f64, iters: usize) -> Self {
        Self {
            game: game.into(),
            algo: default_algo(),
            reg: default_reg(),
            delta: None,
            eta: PerPlayer::Scalar(eta),
            schedule: ScheduleMode::Constant,
            eta_floor: None,
            iters,
            corruption: default_corruption(),
            seed: 0,
            init: None,
            weights: default_weights(),
            window: None,
            tol: None,
            out: None,
        }
    }

    /// TOML when the extension is `.toml`, JSON otherwise.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "toml") {
            Self::from_toml(&text)
        } else {
            Self::from_json(&text)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that do not need the game.
    pub fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(LabError::Config("iters must be at least 1".into()));
        }
        let positive = |v: &PerPlayer, what: &str| match v.values().iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            Some(x) => Err(LabError::Config(format!("{what} must be positive, got {x}"))),
            None => Ok(()),
        };
        positive(&self.eta, "eta")?;
        if let Some(f) = &self.eta_floor {
            positive(f, "eta_floor")?;
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 0.5) {
                return Err(LabError::Config(format!("delta must lie in (0, 0.5), got {d}")));
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(LabError::Config(format!("tol must be positive, got {tol}")));
            }
        }
        if matches!(self.window, Some(w) if w < 2) {
            return Err(LabError::Config("window must be at least 2".into()));
        }
        self.corruption.parse::<CorruptionKind>()?;
        Ok(())
    }

    /// Loads the game and turns every field into library types.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        self.validate()?;
        let (game, source) = load_game(&self.game)?;
        let n = game.num_players();
        let eta = self.eta.expand(n)?;
        let schedule = match self.schedule {
            ScheduleMode::Constant => LearningRateSchedule::constant(eta),
            ScheduleMode::InverseSqrt => {
                let floor = match &self.eta_floor {
                    Some(f) => f.expand(n)?,
                    None => eta.iter().map(|e| e / (self.iters as f64).sqrt()).collect(),
                };
                LearningRateSchedule::InverseSqrt { initial: eta, floor }
            }
        };
        schedule.validate(n)?;
        let regularizer = Regularizer::new(self.reg, self.delta)?;
        regularizer.for_game(game.action_counts())?;
        let mut dynamics = DynamicsConfig::new(self.algo, regularizer, schedule, self.iters)
            .with_corruption(self.corruption.parse()?, self.seed);
        if let Some(init) = &self.init {
            dynamics = dynamics.with_initial(parse_init(init, game.action_counts())?);
        }
        let weights = resolve_weights(&self.weights, &game, &source)?;
        Ok(ResolvedRun {
            game,
            source,
            dynamics,
            weights,
        })
    }
}

/// A config with its game loaded and normalized.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub game: NormalFormGame,
    pub source: GameSource,
    pub dynamics: DynamicsConfig,
    pub weights: RegretWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSource {
    pub name: String,
    pub builtin: bool,
    /// Whether utilities had to be rescaled into `[-1, 1]`.
    pub rescaled: bool,
}

/// Builtin name or JSON file, rescaled into `[-1, 1]` when needed.
pub fn load_game(spec: &str) -> Result<(NormalFormGame, GameSource)> {
    let (raw, builtin) = if catalog::is_builtin(spec) {
        (catalog::builtin(spec)?, true)
    } else {
        let path = Path::new(spec);
        if !path.exists() {
            return Err(LabError::Config(format!(
                "{spec:?} is neither a builtin game nor a readable file"
            )));
        }
        let text = std::fs::read_to_string(path)?;
        (NormalFormGame::from_json(&text)?, false)
    };
    let rescaled = !raw.is_normalized();
    if rescaled {
        log::warn!("utilities of {spec} lie outside [-1, 1]; rescaling per player");
    }
    Ok((
        normalize_game(&raw)?,
        GameSource {
            name: spec.to_string(),
            builtin,
            rescaled,
        },
    ))
}

/// `0.9,0.1;0.5,0.5`. Trailing players may be omitted and any player may be
/// left empty; those start uniform.
pub fn parse_init(text: &str, action_counts: &[usize]) -> Result<StrategyProfile> {
    let parts: Vec<&str> = text.split(';').collect();
    if parts.len() > action_counts.len() {
        return Err(LabError::Config(format!(
            "initial profile lists {} players, game has {}",
            parts.len(),
            action_counts.len()
        )));
    }
    let strategies = action_counts
        .iter()
        .enumerate()
        .map(|(i, &k)| match parts.get(i).map(|p| p.trim()) {
            None | Some("") => Ok(MixedStrategy::uniform(k)),
            Some(p) => {
                let probs = parse_floats(p, "initial probability")?;
                if probs.len() != k {
                    return Err(LabError::DimensionMismatch {
                        player: i,
                        expected: k,
                        actual: probs.len(),
                    });
                }
                MixedStrategy::new(probs)
            }
        })
        .collect::<Result<_>>()?;
    Ok(StrategyProfile::new(strategies))
}

fn resolve_weights(spec: &str, game: &NormalFormGame, source: &GameSource) -> Result<RegretWeights> {
    let n = game.num_players();
    match spec.trim() {
        "uniform" => Ok(RegretWeights::uniform(n)),
        "harmonic" => {
            let mu = source
                .builtin
                .then(|| catalog::preset_weights(&source.name))
                .flatten()
                .or_else(|| solve_harmonic_weights(game))
                .ok_or_else(|| {
                    LabError::Config(format!("no harmonic weights found for {}", source.name))
                })?;
            Ok(regret_weights_from_harmonic(&mu).0)
        }
        list => {
            let m = parse_floats(list, "regret weight")?;
            if m.len() != n {
                return Err(LabError::Config(format!("{} regret weights for {n} players", m.len())));
            }
            RegretWeights::new(m).map_err(|e| LabError::Config(e.to_string()))
        }
    }
}
