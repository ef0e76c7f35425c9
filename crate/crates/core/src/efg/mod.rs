//! Extensive-form game representation and the probability/utility calculus.

mod calc;
mod error;
mod game;
mod io;
mod profile;

pub use calc::{
    believed_action_utilities, believed_action_utility, believed_utility, believed_utility_from,
    best_response, counterfactual_reach_all, expected_utility, infoset_reach, node_values,
    reach_all, reach_probability, regret, weighted_best_response, BestResponse, NodeValues, Reach,
    Regret,
};
pub use error::{EfgError, GameError, ProfileError};
pub use game::{
    own_history, Game, GameBuilder, Handle, Infoset, InfosetId, Node, NodeId, NodeKind, MAX_NODES,
};
pub use io::{
    assessment_from_json, assessment_from_json_lenient, assessment_to_json, game_from_json,
    game_to_json, LoadError,
};
pub use profile::{Assessment, BeliefSystem, StrategyProfile, ROW_TOL};

/// Rejects games that do not have exactly two strategic players.
pub fn require_two_players(game: &Game) -> Result<(), EfgError> {
    if game.players() != 2 {
        return Err(EfgError::PlayerCount {
            expected: 2,
            found: game.players(),
        });
    }
    Ok(())
}
