//! Seeded benchmark generators and fixture games.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, so a given
//! parameter set yields the same game on every platform.

mod bargain;
pub mod fixtures;
mod goof;
mod random;

use thiserror::Error;

use crate::efg::GameError;

pub use bargain::{
    bargain_export, sample_valuations, uniform_outside_offers, BargainAction, BargainError,
    BargainParams, BargainSim, Observation, Private, Signal, EXPORT_MAX_OFFERS, EXPORT_MAX_ROUNDS,
    PAPER_POOLS, VALUATION_DRAW_CAP,
};
pub use fixtures::{fixture, fixture_games};
pub use goof::{gen_goof, gen_goof_size, private_gen_goof, GenGoofParams};
pub use random::{random_game, RandomGameParams};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("game would have {nodes} nodes, more than the limit of {limit}")]
    TooLarge { nodes: u128, limit: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Bargain(#[from] BargainError),
}
