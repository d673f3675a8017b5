//! Regularizers on the simplex, their Bregman divergences and the two
//! argmax oracles the optimistic dynamics need.
//!
//! | kind      | R(x)         | norm / dual | c, c_*                 | G         | Omega   | R-bar                    |
//! |-----------|--------------|-------------|------------------------|-----------|---------|--------------------------|
//! | entropy   | sum x ln x   | l1 / linf   | 1, 1                   | 1/delta   | 2       | ln(dim) + dim * delta    |
//! | euclid    | 1/2 \|x\|^2 | l2 / l2     | 1/sqrt(dim), sqrt(dim) | 1         | sqrt(2) | 1                        |
//!
//! Entropy iterates are kept in the `delta`-interior: any closed-form output
//! with a coordinate below `delta` is clipped at `delta` and renormalized.
//! This keeps the divergence finite and gives the smoothness constant
//! `1/delta`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::game::{MixedStrategy, PayoffVector};

pub const DEFAULT_ENTROPY_CLIP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegularizerKind {
    Entropy,
    #[serde(alias = "euclidean")]
    Euclid,
}

impl std::str::FromStr for RegularizerKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy" => Ok(Self::Entropy),
            "euclid" | "euclidean" => Ok(Self::Euclid),
            other => Err(LabError::Config(format!(
                "unknown regularizer {other:?}, expected entropy or euclid"
            ))),
        }
    }
}

impl std::fmt::Display for RegularizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Entropy => "entropy",
            Self::Euclid => "euclid",
        })
    }
}

/// A regularizer family shared by all players; instantiate per dimension with
/// [`Regularizer::for_dim`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularizer {
    kind: RegularizerKind,
    clip: f64,
}

impl Regularizer {
    pub fn entropy() -> Self {
        Self {
            kind: RegularizerKind::Entropy,
            clip: DEFAULT_ENTROPY_CLIP,
        }
    }

    pub fn euclid() -> Self {
        Self {
            kind: RegularizerKind::Euclid,
            clip: 0.0,
        }
    }

    pub fn new(kind: RegularizerKind, clip: Option<f64>) -> Result<Self> {
        match kind {
            RegularizerKind::Entropy => {
                let clip = clip.unwrap_or(DEFAULT_ENTROPY_CLIP);
                if !(clip > 0.0 && clip.is_finite()) {
                    return Err(LabError::Config(format!("entropy clip must be positive, got {clip}")));
                }
                Ok(Self { kind, clip })
            }
            RegularizerKind::Euclid => Ok(Self::euclid()),
        }
    }

    pub fn kind(&self) -> RegularizerKind {
        self.kind
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    pub fn for_dim(&self, dimension: usize) -> Result<RegularizerSpec> {
        if dimension == 0 {
            return Err(LabError::InvalidArgument("regularizer dimension must be positive".into()));
        }
        if self.kind == RegularizerKind::Entropy && self.clip > 0.5 / dimension as f64 {
            return Err(LabError::Config(format!(
                "entropy clip {} exceeds 1/(2*{dimension})",
                self.clip
            )));
        }
        Ok(RegularizerSpec {
            kind: self.kind,
            dimension,
            clip: self.clip,
        })
    }

    /// One spec per player.
    pub fn for_game(&self, action_counts: &[usize]) -> Result<Vec<RegularizerSpec>> {
        action_counts.iter().map(|&k| self.for_dim(k)).collect()
    }
}

/// Norm-comparison constants `c`, `c_*` with `||x|| >= c ||x||_1` and
/// `||x||_* <= c_* ||x||_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormConstants {
    pub c: f64,
    pub c_star: f64,
}

impl NormConstants {
    /// Constants valid simultaneously for all players.
    pub fn combined(specs: &[RegularizerSpec]) -> Self {
        specs.iter().map(RegularizerSpec::norm_constants).fold(
            Self {
                c: f64::INFINITY,
                c_star: 0.0,
            },
            |acc, k| Self {
                c: acc.c.min(k.c),
                c_star: acc.c_star.max(k.c_star),
            },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizerSpec {
    kind: RegularizerKind,
    dimension: usize,
    clip: f64,
}

impl RegularizerSpec {
    pub fn kind(&self) -> RegularizerKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dimension {
            return Err(LabError::InvalidArgument(format!(
                "vector of length {len} for a {}-dimensional regularizer",
                self.dimension
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: &MixedStrategy) -> f64 {
        match self.kind {
            RegularizerKind::Entropy => x
                .probs()
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|p| p * p.ln())
                .sum(),
            RegularizerKind::Euclid => 0.5 * x.probs().iter().map(|p| p * p).sum::<f64>(),
        }
    }

    /// `D_R(x, y) = R(x) - R(y) - <grad R(y), x - y>`.
    pub fn bregman(&self, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
        self.check_dim(x.dim())?;
        self.check_dim(y.dim())?;
        match self.kind {
            RegularizerKind::Entropy => {
                let mut d = 0.0;
                for (&p, &q) in x.probs().iter().zip(y.probs()) {
                    if q <= 0.0 {
                        return Err(LabError::Domain(
                            "entropy divergence needs a strictly positive second argument".into(),
                        ));
                    }
                    if p > 0.0 {
                        d += p * (p / q).ln();
                    }
                }
                Ok(d.max(0.0))
            }
            RegularizerKind::Euclid => Ok(0.5
                * x.probs()
                    .iter()
                    .zip(y.probs())
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()),
        }
    }

    /// `argmax_x eta <x, v> - D_R(x, anchor)`.
    pub fn prox_step(&self, anchor: &MixedStrategy, payoff: &PayoffVector, eta: f64) -> Result<MixedStrategy> {
        check_eta(eta)?;
        self.check_dim(anchor.dim())?;
        self.check_dim(payoff.dim())?;
        match self.kind {
            RegularizerKind::Entropy => {
                if anchor.min_prob() <= 0.0 {
                    return Err(LabError::Domain("entropy prox anchor must be interior".into()));
                }
                let logits: Vec<f64> = anchor
                    .probs()
                    .iter()
                    .zip(payoff.values())
                    .map(|(g, v)| g.ln() + eta * v)
                    .collect();
                Ok(self.clip_interior(softmax(&logits)))
            }
            RegularizerKind::Euclid => {
                let y: Vec<f64> = anchor
                    .probs()
                    .iter()
                    .zip(payoff.values())
                    .map(|(g, v)| g + eta * v)
                    .collect();
                project_simplex(&y)
            }
        }
    }

    /// `grad R(x)`; entropy needs an interior point.
    pub fn gradient(&self, x: &MixedStrategy) -> Result<Vec<f64>> {
        self.check_dim(x.dim())?;
        match self.kind {
            RegularizerKind::Entropy => {
                if x.min_prob() <= 0.0 {
                    return Err(LabError::Domain("entropy gradient needs an interior point".into()));
                }
                Ok(x.probs().iter().map(|p| p.ln() + 1.0).collect())
            }
            RegularizerKind::Euclid => Ok(x.probs().to_vec()),
        }
    }

    /// `argmax_x eta <x, S> - R(x)`.
    pub fn ftrl_step(&self, cumulative: &[f64], eta: f64) -> Result<MixedStrategy> {
        check_eta(eta)?;
        self.check_dim(cumulative.len())?;
        let scaled: Vec<f64> = cumulative.iter().map(|s| eta * s).collect();
        match self.kind {
            RegularizerKind::Entropy => Ok(self.clip_interior(softmax(&scaled))),
            RegularizerKind::Euclid => project_simplex(&scaled),
        }
    }

    /// `argmin_x R(x)`: the uniform distribution for both kinds.
    pub fn min_point(&self) -> MixedStrategy {
        MixedStrategy::uniform(self.dimension)
    }

    pub(crate) fn clip_interior(&self, probs: Vec<f64>) -> MixedStrategy {
        if self.clip > 0.0 && probs.iter().any(|&p| p < self.clip) {
            MixedStrategy::from_weights(probs.into_iter().map(|p| p.max(self.clip)).collect())
        } else {
            MixedStrategy::from_weights(probs)
        }
    }

    /// Primal norm the regularizer is 1-strongly convex in.
    pub fn norm(&self, x: &[f64]) -> f64 {
        match self.kind {
            RegularizerKind::Entropy => x.iter().map(|v| v.abs()).sum(),
            RegularizerKind::Euclid => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    pub fn dual_norm(&self, v: &[f64]) -> f64 {
        match self.kind {
            RegularizerKind::Entropy => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            RegularizerKind::Euclid => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn distance(&self, x: &MixedStrategy, y: &MixedStrategy) -> f64 {
        let diff: Vec<f64> = x.probs().iter().zip(y.probs()).map(|(a, b)| a - b).collect();
        self.norm(&diff)
    }

    pub fn norm_constants(&self) -> NormConstants {
        match self.kind {
            RegularizerKind::Entropy => NormConstants { c: 1.0, c_star: 1.0 },
            RegularizerKind::Euclid => {
                let d = (self.dimension as f64).sqrt();
                NormConstants { c: 1.0 / d, c_star: d }
            }
        }
    }

    /// Smoothness constant `G`.
    pub fn smoothness(&self) -> f64 {
        match self.kind {
            RegularizerKind::Entropy => 1.0 / self.clip,
            RegularizerKind::Euclid => 1.0,
        }
    }

    /// Diameter of the simplex in the primal norm.
    pub fn diameter(&self) -> f64 {
        match self.kind {
            RegularizerKind::Entropy => 2.0,
            RegularizerKind::Euclid => 2.0f64.sqrt(),
        }
    }

    /// Divergence bound `R-bar` used by the regret bounds.
    pub fn divergence_bound(&self) -> f64 {
        match self.kind {
            RegularizerKind::Entropy => {
                (self.dimension as f64).ln() + self.dimension as f64 * self.clip
            }
            RegularizerKind::Euclid => 0.5 * self.diameter().powi(2),
        }
    }

    /// `sup_x D_R(x, anchor)`; the divergence is convex in `x` so the sup is
    /// attained at a vertex.
    pub fn max_divergence_from(&self, anchor: &MixedStrategy) -> Result<f64> {
        (0..self.dimension)
            .map(|a| self.bregman(&MixedStrategy::vertex(self.dimension, a), anchor))
            .try_fold(0.0, |m, d| Ok(f64::max(m, d?)))
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(LabError::InvalidArgument(format!("learning rate must be positive, got {eta}")));
    }
    Ok(())
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Threshold `tau` of the Euclidean simplex projection: the projection is
/// `max(y - tau, 0)`.
pub fn simplex_threshold(y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(LabError::InvalidArgument("cannot project an empty vector".into()));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(LabError::InvalidArgument(format!("non-finite entry {v}")));
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = sorted[0] - 1.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    Ok(tau)
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(y: &[f64]) -> Result<MixedStrategy> {
    let tau = simplex_threshold(y)?;
    let x: Vec<f64> = y.iter().map(|v| (v - tau).max(0.0)).collect();
    MixedStrategy::new(x)
}
