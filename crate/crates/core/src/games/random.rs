use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GenError;
use crate::efg::{Game, GameBuilder, Handle};

/// Random games with perfect recall. Utilities are small integers and chance
/// probabilities are multiples of 1/8, so most sums are exact in floating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomGameParams {
    pub players: usize,
    pub max_nodes: usize,
    pub max_depth: usize,
    /// Actions per decision node are drawn from 2..=max_actions.
    pub max_actions: usize,
    pub chance_prob: f64,
    pub terminal_prob: f64,
    /// Probability of joining an existing compatible infoset.
    pub merge_prob: f64,
    pub max_utility: i32,
    pub seed: u64,
}

impl RandomGameParams {
    pub fn new(max_nodes: usize, seed: u64) -> Self {
        RandomGameParams {
            players: 2,
            max_nodes,
            max_depth: 8,
            max_actions: 3,
            chance_prob: 0.15,
            terminal_prob: 0.2,
            merge_prob: 0.6,
            max_utility: 10,
            seed,
        }
    }
}

enum Kind {
    Terminal,
    Chance(Vec<u32>),
    Decision { player: usize, infoset: usize },
}

struct Proto {
    kind: Kind,
    children: Vec<usize>,
    depth: usize,
    /// Own-history key per player: the (infoset, action) pairs that player has taken.
    history: Vec<Vec<(usize, usize)>>,
}

pub fn random_game(params: &RandomGameParams) -> Result<Game, GenError> {
    if params.players == 0 || params.max_nodes == 0 || params.max_actions < 2 {
        return Err(GenError::Params(
            "need players >= 1, max_nodes >= 1 and max_actions >= 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut protos = vec![Proto {
        kind: Kind::Terminal,
        children: Vec::new(),
        depth: 0,
        history: vec![Vec::new(); params.players],
    }];
    // (player, own history, actions, members)
    let mut infosets: Vec<(usize, Vec<(usize, usize)>, usize, Vec<usize>)> = Vec::new();
    let mut frontier = std::collections::VecDeque::from([0usize]);
    while let Some(i) = frontier.pop_front() {
        let room = params.max_nodes - protos.len();
        let depth = protos[i].depth;
        if room < 2
            || depth >= params.max_depth
            || (i > 0 && rng.random::<f64>() < params.terminal_prob)
        {
            continue;
        }
        let (kind, n) = if rng.random::<f64>() < params.chance_prob {
            let n = rng.random_range(2..=params.max_actions.min(room).min(8));
            // Split 8 eighths into n positive parts.
            let mut parts = vec![1u32; n];
            for _ in n..8 {
                parts[rng.random_range(0..n)] += 1;
            }
            (Kind::Chance(parts), n)
        } else {
            let player = rng.random_range(1..=params.players);
            let key = &protos[i].history[player - 1];
            let joinable: Vec<usize> = infosets
                .iter()
                .enumerate()
                .filter(|(_, s)| s.0 == player && &s.1 == key && s.2 <= room)
                .map(|(k, _)| k)
                .collect();
            if !joinable.is_empty() && rng.random::<f64>() < params.merge_prob {
                let k = joinable[rng.random_range(0..joinable.len())];
                infosets[k].3.push(i);
                (Kind::Decision { player, infoset: k }, infosets[k].2)
            } else {
                let n = rng.random_range(2..=params.max_actions.min(room));
                infosets.push((player, key.clone(), n, vec![i]));
                (
                    Kind::Decision {
                        player,
                        infoset: infosets.len() - 1,
                    },
                    n,
                )
            }
        };
        for a in 0..n {
            let mut history = protos[i].history.clone();
            if let Kind::Decision { player, infoset } = kind {
                history[player - 1].push((infoset, a));
            }
            protos.push(Proto {
                kind: Kind::Terminal,
                children: Vec::new(),
                depth: depth + 1,
                history,
            });
            let c = protos.len() - 1;
            protos[i].children.push(c);
            frontier.push_back(c);
        }
        protos[i].kind = kind;
    }

    let mut b = GameBuilder::new(params.players);
    let handles: Vec<Handle> = protos
        .iter()
        .enumerate()
        .map(|(i, p)| match p.kind {
            Kind::Terminal => {
                let u = (0..params.players)
                    .map(|_| rng.random_range(-params.max_utility..=params.max_utility) as f64);
                b.terminal(format!("n{i}"), u.collect())
            }
            Kind::Chance(_) => b.chance(format!("n{i}")),
            Kind::Decision { player, .. } => b.decision(format!("n{i}"), player),
        })
        .collect();
    b.set_root(handles[0]);
    for (i, p) in protos.iter().enumerate() {
        for (a, &c) in p.children.iter().enumerate() {
            match &p.kind {
                Kind::Chance(parts) => b.chance_edge(
                    handles[i],
                    format!("c{a}"),
                    handles[c],
                    parts[a] as f64 / 8.0,
                ),
                _ => b.edge(handles[i], format!("a{a}"), handles[c]),
            }
        }
    }
    for (k, (player, _, n, members)) in infosets.iter().enumerate() {
        let members: Vec<Handle> = members.iter().map(|&m| handles[m]).collect();
        b.infoset(
            format!("I{k}"),
            *player,
            &members,
            (0..*n).map(|a| format!("a{a}")),
        );
    }
    Ok(b.build()?)
}
