//! Builtin games addressable by name.

use crate::classes::{make_harmonic_game, HarmonicWeights};
use crate::error::{LabError, Result};
use crate::game::NormalFormGame;

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
}

/// Seeded harmonic instances: name, action counts, weights `mu`, seed.
const HARMONIC_PRESETS: &[(&str, &[usize], &[&[f64]], u64)] = &[
    ("harmonic_skewed_2x2", &[2, 2], &[&[1.0, 1.0], &[3.0, 5.0]], 1),
    ("harmonic_skewed_3x3", &[3, 3], &[&[1.0, 2.0, 1.0], &[4.0, 6.0, 5.0]], 2),
    ("harmonic_uniform_3x2", &[3, 2], &[&[1.0, 1.0, 1.0], &[1.0, 1.0]], 3),
    (
        "harmonic_three_player",
        &[2, 2, 2],
        &[&[1.0, 2.0], &[2.0, 2.0], &[5.0, 3.0]],
        4,
    ),
];

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "matching_pennies",
        description: "u1 = [[-1, 1], [1, -1]], u2 = -u1",
    },
    CatalogEntry {
        name: "harmonic_2x2_zero_sum",
        description: "u1 = [[1, 2], [2, 1]] rescaled to [-1, 1], u2 = -u1",
    },
    CatalogEntry {
        name: "identical_interest_2x2",
        description: "u1 = u2 = [[1, 2], [2, 1]], not harmonic",
    },
    CatalogEntry {
        name: "zero_game",
        description: "2x2 game with all utilities zero",
    },
    CatalogEntry {
        name: "harmonic_skewed_2x2",
        description: "generated harmonic game, mu = [[1, 1], [3, 5]]",
    },
    CatalogEntry {
        name: "harmonic_skewed_3x3",
        description: "generated harmonic game, mu = [[1, 2, 1], [4, 6, 5]]",
    },
    CatalogEntry {
        name: "harmonic_uniform_3x2",
        description: "generated harmonic game, uniform mu",
    },
    CatalogEntry {
        name: "harmonic_three_player",
        description: "generated 2x2x2 harmonic game, mu = [[1, 2], [2, 2], [5, 3]]",
    },
];

fn negated(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| -x).collect()
}

/// Builtin game by name.
pub fn builtin(name: &str) -> Result<NormalFormGame> {
    let grid = |rows: [[f64; 2]; 2]| rows.iter().flatten().copied().collect::<Vec<_>>();
    match name {
        "matching_pennies" => {
            let u = grid([[-1.0, 1.0], [1.0, -1.0]]);
            NormalFormGame::new(vec![2, 2], vec![u.clone(), negated(&u)])
        }
        "harmonic_2x2_zero_sum" => {
            let u: Vec<f64> = grid([[1.0, 2.0], [2.0, 1.0]]).iter().map(|x| (x - 1.5) / 0.5).collect();
            NormalFormGame::new(vec![2, 2], vec![u.clone(), negated(&u)])
        }
        "identical_interest_2x2" => {
            let u = grid([[1.0, 2.0], [2.0, 1.0]]);
            NormalFormGame::new(vec![2, 2], vec![u.clone(), u])
        }
        "zero_game" => NormalFormGame::new(vec![2, 2], vec![vec![0.0; 4]; 2]),
        other => {
            let weights = preset_weights(other).ok_or_else(|| {
                LabError::Config(format!("unknown builtin game {other:?}; see the catalog"))
            })?;
            let (_, counts, _, seed) = HARMONIC_PRESETS
                .iter()
                .find(|p| p.0 == other)
                .expect("preset exists");
            make_harmonic_game(&weights, counts, *seed)
        }
    }
}

/// Weights a generated preset was built for.
pub fn preset_weights(name: &str) -> Option<HarmonicWeights> {
    HARMONIC_PRESETS.iter().find(|p| p.0 == name).map(|(_, _, mu, _)| {
        HarmonicWeights::new(mu.iter().map(|m| m.to_vec()).collect()).expect("preset weights are positive")
    })
}

pub fn is_builtin(name: &str) -> bool {
    ENTRIES.iter().any(|e| e.name == name)
}
