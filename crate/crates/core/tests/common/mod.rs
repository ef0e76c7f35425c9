//! Brute-force oracles shared by the integration tests. Each one works from the
//! definitions directly, without the library's traversal code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pbe_core::efg::{Assessment, BeliefSystem, Game, InfosetId, NodeId, NodeKind, StrategyProfile};
use pbe_core::games::{fixture_games, random_game, RandomGameParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random distribution in quarters of a random weight; each entry is zero with
/// probability `zero`, but at least one entry stays positive.
pub fn random_row(rng: &mut impl Rng, n: usize, zero: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < zero {
                0.0
            } else {
                rng.random_range(1..=4) as f64
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

pub fn random_profile(game: &Game, rng: &mut impl Rng, zero: f64) -> StrategyProfile {
    let rows = game
        .infosets()
        .iter()
        .map(|s| random_row(rng, s.num_actions(), zero))
        .collect();
    StrategyProfile::from_rows(game, rows).unwrap()
}

pub fn random_beliefs(game: &Game, rng: &mut impl Rng, zero: f64) -> BeliefSystem {
    let rows = game
        .infosets()
        .iter()
        .map(|s| random_row(rng, s.members().len(), zero))
        .collect();
    BeliefSystem::from_rows(game, rows).unwrap()
}

fn edge_prob(game: &Game, profile: &StrategyProfile, parent: NodeId, k: usize) -> f64 {
    let n = game.node(parent);
    match n.kind() {
        NodeKind::Chance => n.chance_probs()[k],
        NodeKind::Player(_) => profile.row(n.infoset().unwrap())[k],
        NodeKind::Terminal => unreachable!(),
    }
}

/// Product of edge probabilities along the path from the root.
pub fn path_reach(game: &Game, profile: &StrategyProfile, h: NodeId) -> f64 {
    game.path_to(h)
        .iter()
        .map(|&(p, k)| edge_prob(game, profile, p, k))
        .product()
}

/// Σ_z u_j(z)·Pr(z | h, σ) over the leaves below `h`.
pub fn leaf_value(game: &Game, profile: &StrategyProfile, h: NodeId, player: usize) -> f64 {
    let depth = game.node(h).depth();
    let mut total = 0.0;
    for z in game.terminals() {
        if !game.is_ancestor_or_self(h, z) {
            continue;
        }
        let p: f64 = game.path_to(z)[depth..]
            .iter()
            .map(|&(q, k)| edge_prob(game, profile, q, k))
            .product();
        total += p * game.node(z).utility()[player - 1];
    }
    total
}

/// Every pure assignment of actions to `infosets`.
pub fn assignments(game: &Game, infosets: &[InfosetId]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &i in infosets {
        let n = game.infoset(i).num_actions();
        out = out
            .into_iter()
            .flat_map(|a| (0..n).map(move |k| [a.clone(), vec![k]].concat()))
            .collect();
    }
    out
}

pub fn with_pure(
    profile: &StrategyProfile,
    infosets: &[InfosetId],
    choice: &[usize],
) -> StrategyProfile {
    let mut out = profile.clone();
    for (&i, &a) in infosets.iter().zip(choice) {
        let row = out.row_mut(i);
        row.fill(0.0);
        row[a] = 1.0;
    }
    out
}

/// Best-response value for `player` by enumerating all of their pure strategies.
pub fn exhaustive_br_value(game: &Game, profile: &StrategyProfile, player: usize) -> f64 {
    let own: Vec<InfosetId> = game.player_infosets(player).collect();
    assignments(game, &own)
        .iter()
        .map(|c| leaf_value(game, &with_pure(profile, &own, c), game.root(), player))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Best believed gain at `infoset` over all pure continuation strategies of its
/// owner, enumerated over every owner infoset met below the members.
pub fn continuation_regret(game: &Game, assessment: &Assessment, infoset: InfosetId) -> f64 {
    let s = game.infoset(infoset);
    let j = s.player();
    let mu = assessment.beliefs.row(infoset);
    let below: Vec<InfosetId> = game
        .player_infosets(j)
        .filter(|&k| {
            game.infoset(k)
                .members()
                .iter()
                .any(|&x| s.members().iter().any(|&m| game.is_ancestor_or_self(m, x)))
        })
        .collect();
    let believed = |p: &StrategyProfile| -> f64 {
        s.members()
            .iter()
            .zip(mu)
            .map(|(&h, &w)| w * leaf_value(game, p, h, j))
            .sum()
    };
    let best = assignments(game, &below)
        .iter()
        .map(|c| believed(&with_pure(&assessment.strategy, &below, c)))
        .fold(f64::NEG_INFINITY, f64::max);
    best - believed(&assessment.strategy)
}

/// Searches every total preorder compatible with the tree for one that
/// rationalizes the assessment: positive-probability edges (and chance edges)
/// join equal classes, zero-probability edges go strictly down, and a member
/// has positive belief exactly when no other member of its infoset is
/// strictly more plausible.
///
/// Nodes joined by positive edges must share a class, so the search assigns a
/// rank to each such block. Ranks range over 0..blocks, which covers every
/// total preorder on the blocks.
pub fn agm_oracle(game: &Game, assessment: &Assessment) -> bool {
    let n = game.num_nodes();
    let sigma = &assessment.strategy;
    let mut block = vec![0usize; n];
    let mut block_parent: Vec<Option<usize>> = vec![None];
    for (i, node) in game.nodes().iter().enumerate().skip(1) {
        let p = node.parent().unwrap();
        if edge_prob(game, sigma, p, node.incoming_edge()) > 0.0 {
            block[i] = block[p.0];
        } else {
            block[i] = block_parent.len();
            block_parent.push(Some(block[p.0]));
        }
    }
    let c = block_parent.len();
    // Infosets become checkable once their highest block has a rank.
    let mut due: Vec<Vec<InfosetId>> = vec![Vec::new(); c];
    for (i, s) in game.infosets().iter().enumerate() {
        if s.members().len() > 1 {
            let last = s.members().iter().map(|m| block[m.0]).max().unwrap();
            due[last].push(InfosetId(i));
        }
    }
    let ok = |rank: &[usize], id: InfosetId| -> bool {
        let s = game.infoset(id);
        let ranks: Vec<usize> = s.members().iter().map(|m| rank[block[m.0]]).collect();
        let lo = *ranks.iter().min().unwrap();
        ranks
            .iter()
            .zip(assessment.beliefs.row(id))
            .all(|(&r, &p)| (p > 0.0) == (r == lo))
    };
    fn search(
        b: usize,
        c: usize,
        rank: &mut Vec<usize>,
        parents: &[Option<usize>],
        due: &[Vec<InfosetId>],
        ok: &dyn Fn(&[usize], InfosetId) -> bool,
    ) -> bool {
        if b == c {
            return true;
        }
        let lo = parents[b].map_or(0, |p| rank[p] + 1);
        let hi = if b == 0 { 0 } else { c - 1 };
        for r in lo..=hi {
            rank[b] = r;
            if due[b].iter().all(|&i| ok(rank, i)) && search(b + 1, c, rank, parents, due, ok) {
                return true;
            }
        }
        false
    }
    let mut rank = vec![0usize; c];
    search(0, c, &mut rank, &block_parent, &due, &ok)
}

/// Fixtures and random games with at most 20 nodes.
pub fn micro_suite() -> Vec<(String, Game)> {
    let mut out: Vec<(String, Game)> = fixture_games()
        .into_iter()
        .filter(|(_, g)| g.num_nodes() <= 20)
        .map(|(n, g)| (n.to_string(), g))
        .collect();
    for seed in 0..60 {
        let g = random_game(&RandomGameParams::new(20, seed)).unwrap();
        out.push((format!("random-{seed}"), g));
    }
    out
}
