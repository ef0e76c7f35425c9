use std::fmt;
use std::str::FromStr;

use crate::efg::{reach_all, BeliefSystem, Game, InfosetId, NodeKind, StrategyProfile};
use crate::plausibility::{construct_order_given_profile, PlausibilityOrder};

/// How an off-path infoset's belief is spread over its most plausible members.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum OffPath {
    /// Equal weight on each most plausible member.
    Uniform,
    /// Weight proportional to the product of the positive probabilities on the
    /// member's path, with zero-probability actions counted as 1. Members that
    /// share the same deviation are then weighed by chance and the other moves
    /// actually played.
    #[default]
    PathWeighted,
}

impl fmt::Display for OffPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OffPath::Uniform => "uniform",
            OffPath::PathWeighted => "path-weighted",
        })
    }
}

impl FromStr for OffPath {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(OffPath::Uniform),
            "path-weighted" | "weighted" => Ok(OffPath::PathWeighted),
            other => Err(format!("unknown off-path rule `{other}`")),
        }
    }
}

/// Beliefs induced by `profile`: Bayes' rule on reached infosets, and uniform
/// over the most plausible members elsewhere.
///
/// Off-path infosets are handled in index order. Each one's outcome is folded
/// into the order before the next is examined, so later infosets respect the
/// ties already chosen and the result is AGM-consistent.
pub fn update_beliefs(game: &Game, profile: &StrategyProfile) -> BeliefSystem {
    update_beliefs_by(game, profile, OffPath::Uniform)
}

/// [`update_beliefs`] with a choice of off-path rule.
pub fn update_beliefs_by(game: &Game, profile: &StrategyProfile, rule: OffPath) -> BeliefSystem {
    let reach = reach_all(game, profile);
    let weights = match rule {
        OffPath::Uniform => None,
        OffPath::PathWeighted => Some(positive_reach(game, profile)),
    };
    update_beliefs_with(game, &reach, weights.as_deref(), || {
        construct_order_given_profile(game, profile)
    })
}

/// Reach with every zero-probability action counted as 1.
pub fn positive_reach(game: &Game, profile: &StrategyProfile) -> Vec<f64> {
    let mut r = vec![0.0; game.num_nodes()];
    r[0] = 1.0;
    for (i, n) in game.nodes().iter().enumerate() {
        let probs = match n.kind() {
            NodeKind::Chance => n.chance_probs(),
            NodeKind::Player(_) => profile.row(n.infoset().unwrap()),
            NodeKind::Terminal => continue,
        };
        let ri = r[i];
        for (c, &p) in n.children().iter().zip(probs) {
            r[c.0] = if p > 0.0 { ri * p } else { ri };
        }
    }
    r
}

/// `reach` holds each node's reach probability; `make_order` builds the profile's
/// plausibility order and is called only if some infoset is off the path.
/// With `weights`, off-path beliefs follow them instead of being uniform.
pub(crate) fn update_beliefs_with<'g>(
    game: &'g Game,
    reach: &[f64],
    weights: Option<&[f64]>,
    make_order: impl FnOnce() -> PlausibilityOrder<'g>,
) -> BeliefSystem {
    let mut make_order = Some(make_order);
    let mut beliefs = BeliefSystem::uniform(game);
    let mut order: Option<PlausibilityOrder> = None;
    let mut best = Vec::new();
    for (i, s) in game.infosets().iter().enumerate() {
        let id = InfosetId(i);
        let members = s.members();
        if members.len() == 1 {
            beliefs.row_mut(id)[0] = 1.0;
            continue;
        }
        let total: f64 = members.iter().map(|m| reach[m.0]).sum();
        let row = beliefs.row_mut(id);
        if total > 0.0 {
            for (b, m) in row.iter_mut().zip(members) {
                *b = reach[m.0] / total;
            }
            continue;
        }
        let order = order.get_or_insert_with(|| (make_order.take().unwrap())());
        let count = order.settle_most_plausible(id, &mut best);
        let row = beliefs.row_mut(id);
        let w = |k: usize| weights.map_or(1.0, |w| w[members[k].0]);
        let z: f64 = (0..members.len()).filter(|&k| best[k]).map(w).sum();
        for (k, b) in row.iter_mut().enumerate() {
            *b = if !best[k] {
                0.0
            } else if z > 0.0 {
                w(k) / z
            } else {
                1.0 / count as f64
            };
        }
    }
    beliefs
}
