//! Struct-of-arrays copy of a game tree for the solver inner loops.

use crate::efg::{Game, NodeKind};

pub(crate) const CHANCE: u32 = 0;
pub(crate) const TERMINAL: u32 = u32::MAX;

pub(crate) struct Flat {
    pub n: usize,
    /// Owner per node: `CHANCE`, `TERMINAL` or the player number.
    pub owner: Vec<u32>,
    pub infoset: Vec<u32>,
    /// Start of the node's infoset row in a flat strategy, or of its
    /// probabilities in `chance_p` for chance nodes.
    pub row: Vec<u32>,
    pub edge_start: Vec<u32>,
    pub child: Vec<u32>,
    pub chance_p: Vec<f64>,
    /// Utilities of players 1 and 2; zero for non-terminals.
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl Flat {
    pub fn new(game: &Game, offsets: &[usize]) -> Self {
        let n = game.num_nodes();
        let mut f = Flat {
            n,
            owner: Vec::with_capacity(n),
            infoset: Vec::with_capacity(n),
            row: Vec::with_capacity(n),
            edge_start: Vec::with_capacity(n + 1),
            child: Vec::with_capacity(n),
            chance_p: Vec::new(),
            u1: vec![0.0; n],
            u2: vec![0.0; n],
        };
        for (i, node) in game.nodes().iter().enumerate() {
            f.edge_start.push(f.child.len() as u32);
            f.child.extend(node.children().iter().map(|c| c.0 as u32));
            match node.kind() {
                NodeKind::Chance => {
                    f.owner.push(CHANCE);
                    f.infoset.push(u32::MAX);
                    f.row.push(f.chance_p.len() as u32);
                    f.chance_p.extend_from_slice(node.chance_probs());
                }
                NodeKind::Player(j) => {
                    let is = node.infoset().unwrap().0;
                    f.owner.push(j as u32);
                    f.infoset.push(is as u32);
                    f.row.push(offsets[is] as u32);
                }
                NodeKind::Terminal => {
                    f.owner.push(TERMINAL);
                    f.infoset.push(u32::MAX);
                    f.row.push(0);
                    f.u1[i] = node.utility()[0];
                    f.u2[i] = node.utility().get(1).copied().unwrap_or(0.0);
                }
            }
        }
        f.edge_start.push(f.child.len() as u32);
        f
    }

    /// Edge strictness and `~`-tops of the plausibility order induced by `sigma`.
    pub fn order_parts(&self, sigma: &[f64]) -> (Vec<bool>, Vec<usize>) {
        let mut strict = vec![false; self.n];
        let mut top: Vec<usize> = (0..self.n).collect();
        top[0] = 0;
        for i in 0..self.n {
            let owner = self.owner[i];
            if owner == TERMINAL {
                continue;
            }
            let base = self.row[i] as usize;
            let t = top[i];
            for (k, e) in self.edges(i).enumerate() {
                let c = self.child[e] as usize;
                if owner != CHANCE && sigma[base + k] <= 0.0 {
                    strict[c] = true;
                } else {
                    top[c] = t;
                }
            }
        }
        (strict, top)
    }

    #[inline]
    pub fn edges(&self, i: usize) -> std::ops::Range<usize> {
        self.edge_start[i] as usize..self.edge_start[i + 1] as usize
    }

    /// U^E for both players at every node under the flat strategy `sigma`.
    pub fn values(&self, sigma: &[f64], v1: &mut [f64], v2: &mut [f64]) {
        for i in (0..self.n).rev() {
            let owner = self.owner[i];
            if owner == TERMINAL {
                v1[i] = self.u1[i];
                v2[i] = self.u2[i];
                continue;
            }
            let probs = if owner == CHANCE {
                &self.chance_p[..]
            } else {
                sigma
            };
            let base = self.row[i] as usize;
            let (mut a, mut b) = (0.0, 0.0);
            for (k, e) in self.edges(i).enumerate() {
                let c = self.child[e] as usize;
                let p = probs[base + k];
                a += p * v1[c];
                b += p * v2[c];
            }
            v1[i] = a;
            v2[i] = b;
        }
    }

    /// Product reach of every node.
    pub fn reach(&self, sigma: &[f64], r: &mut [f64]) {
        r[0] = 1.0;
        for i in 0..self.n {
            let owner = self.owner[i];
            if owner == TERMINAL {
                continue;
            }
            let probs = if owner == CHANCE {
                &self.chance_p[..]
            } else {
                sigma
            };
            let base = self.row[i] as usize;
            let ri = r[i];
            for (k, e) in self.edges(i).enumerate() {
                r[self.child[e] as usize] = ri * probs[base + k];
            }
        }
    }
}
