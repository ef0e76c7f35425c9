use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::GenError;
use crate::efg::{Game, GameBuilder, Handle, MAX_NODES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenGoofParams {
    /// Outcomes and actions per round; the game has `k - 1` rounds.
    pub k: usize,
    /// Per-round reward cap.
    pub u_max: f64,
    pub seed: u64,
}

impl GenGoofParams {
    pub fn new(k: usize, u_max: f64, seed: u64) -> Self {
        GenGoofParams { k, u_max, seed }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.k < 2 {
            return Err(GenError::Params(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return Err(GenError::Params(format!(
                "u_max must be positive, got {}",
                self.u_max
            )));
        }
        Ok(())
    }
}

/// Node count of a GenGoof(k) tree (both variants share the shape).
pub fn gen_goof_size(k: usize) -> u128 {
    let k = k as u128;
    let (mut states, mut total) = (1u128, 0u128);
    for r in 0..k.saturating_sub(1) {
        let rem = k - r;
        total = total.saturating_add(states.saturating_mul(1 + rem + rem * k));
        states = states.saturating_mul(rem * k * k);
    }
    total.saturating_add(states)
}

/// Sampled parameters of one instance.
struct Instance {
    k: usize,
    /// Round-1 outcome distribution.
    probs: Vec<f64>,
    /// rewards[j][((r * k + e) * k + a1) * k + a2]
    rewards: [Vec<f64>; 2],
}

impl Instance {
    fn sample(p: &GenGoofParams) -> Self {
        let k = p.k;
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut probs: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|x| *x /= s);
        let len = (k - 1) * k * k * k;
        let mut rewards = [Vec::with_capacity(len), Vec::with_capacity(len)];
        for _ in 0..len {
            for r in &mut rewards {
                r.push(rng.random::<f64>() * p.u_max);
            }
        }
        Instance { k, probs, rewards }
    }

    fn reward(&self, j: usize, r: usize, e: usize, a1: usize, a2: usize) -> f64 {
        let k = self.k;
        self.rewards[j][((r * k + e) * k + a1) * k + a2]
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Variant {
    Public,
    Private,
}

/// GenGoof(k): each round Nature reveals an outcome drawn without replacement,
/// then player 1 and player 2 act, player 2 not seeing player 1's action.
pub fn gen_goof(params: &GenGoofParams) -> Result<Game, GenError> {
    build(params, Variant::Public)
}

/// PrivateGenGoof(k): like [`gen_goof`], but the round's outcome stays hidden
/// until the end of the round and player 2 sees player 1's action.
pub fn private_gen_goof(params: &GenGoofParams) -> Result<Game, GenError> {
    build(params, Variant::Private)
}

fn build(params: &GenGoofParams, variant: Variant) -> Result<Game, GenError> {
    params.validate()?;
    let size = gen_goof_size(params.k);
    if size > MAX_NODES as u128 {
        return Err(GenError::TooLarge {
            nodes: size,
            limit: MAX_NODES,
        });
    }
    let inst = Instance::sample(params);
    let k = inst.k;
    let rounds = k - 1;
    let x: Vec<String> = (0..k).map(|a| format!("x{a}")).collect();
    let y: Vec<String> = (0..k).map(|a| format!("y{a}")).collect();

    let mut b = GameBuilder::new(2);
    let mut next_name = 0usize;
    let mut name = || {
        next_name += 1;
        format!("n{}", next_name - 1)
    };
    let mut infosets = [0usize; 2];
    let mut infoset_name = |j: usize| {
        infosets[j - 1] += 1;
        format!("I{j}.{}", infosets[j - 1] - 1)
    };

    struct Pending {
        node: Handle,
        round: usize,
        remaining: Vec<usize>,
        acc: [f64; 2],
    }
    let root = b.chance(name());
    b.set_root(root);
    let mut queue = vec![Pending {
        node: root,
        round: 0,
        remaining: (0..k).collect(),
        acc: [0.0; 2],
    }];
    while let Some(Pending {
        node,
        round,
        remaining,
        acc,
    }) = queue.pop()
    {
        let mass: f64 = remaining.iter().map(|&e| inst.probs[e]).sum();
        let mut p1_nodes = Vec::with_capacity(remaining.len());
        let mut p2_by_action: Vec<Vec<Handle>> = vec![Vec::new(); k];
        for &e in &remaining {
            let h1 = b.decision(name(), 1);
            b.chance_edge(node, format!("o{e}"), h1, inst.probs[e] / mass);
            p1_nodes.push(h1);
            let mut siblings = Vec::with_capacity(k);
            for a1 in 0..k {
                let h2 = b.decision(name(), 2);
                b.edge(h1, &x[a1], h2);
                siblings.push(h2);
                p2_by_action[a1].push(h2);
                for a2 in 0..k {
                    let acc = [
                        acc[0] + inst.reward(0, round, e, a1, a2),
                        acc[1] + inst.reward(1, round, e, a1, a2),
                    ];
                    let child = if round + 1 == rounds {
                        b.terminal(name(), acc.to_vec())
                    } else {
                        let c = b.chance(name());
                        let rest = remaining.iter().copied().filter(|&o| o != e).collect();
                        queue.push(Pending {
                            node: c,
                            round: round + 1,
                            remaining: rest,
                            acc,
                        });
                        c
                    };
                    b.edge(h2, &y[a2], child);
                }
            }
            if variant == Variant::Public {
                b.infoset(infoset_name(1), 1, &[h1], x.iter());
                b.infoset(infoset_name(2), 2, &siblings, y.iter());
            }
        }
        if variant == Variant::Private {
            b.infoset(infoset_name(1), 1, &p1_nodes, x.iter());
            for members in &p2_by_action {
                b.infoset(infoset_name(2), 2, members, y.iter());
            }
        }
    }
    Ok(b.build()?)
}
