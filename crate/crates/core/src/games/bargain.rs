use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::GenError;
use crate::efg::{Game, GameBuilder, Handle};

/// Item pools used by the `paper` preset.
pub const PAPER_POOLS: [[u32; 3]; 5] = [[2, 0, 3], [3, 1, 2], [1, 2, 2], [1, 4, 2], [0, 0, 5]];

/// Cap on rejection-sampling draws for one valuation pair.
pub const VALUATION_DRAW_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BargainParams {
    /// Item counts per type.
    pub pool: Vec<u32>,
    /// Common total valuation of the pool.
    pub v_bar: u32,
    /// Signal threshold: H iff the outside offer is worth more than this.
    pub nu: f64,
    pub gamma: f64,
    pub rounds: usize,
    /// Weighted support of each player's outside-offer distribution.
    pub outside: [Vec<(Vec<u32>, f64)>; 2],
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum BargainError {
    #[error("invalid bargain parameters: {0}")]
    Params(String),
    #[error("no valuation pair found after {0} draws")]
    SamplingExhausted(usize),
    #[error("illegal action {action:?} at turn {turn}")]
    IllegalAction { action: BargainAction, turn: usize },
    #[error("episode is over")]
    EpisodeOver,
    #[error("no episode in progress; call reset first")]
    NoEpisode,
}

impl BargainParams {
    /// τ = 3, V̄ = 10, ν = 5, γ = 0.99, R = 5 on one of [`PAPER_POOLS`].
    pub fn paper(pool_index: usize, seed: u64) -> Self {
        let pool = PAPER_POOLS[pool_index % PAPER_POOLS.len()].to_vec();
        let offers = uniform_outside_offers(&pool);
        BargainParams {
            pool,
            v_bar: 10,
            nu: 5.0,
            gamma: 0.99,
            rounds: 5,
            outside: [offers.clone(), offers],
            seed,
        }
    }

    /// A configuration small enough for [`bargain_export`].
    pub fn small(seed: u64) -> Self {
        let pool = vec![1, 1, 0];
        let offers = uniform_outside_offers(&pool);
        BargainParams {
            pool,
            v_bar: 4,
            nu: 2.0,
            gamma: 0.9,
            rounds: 1,
            outside: [offers.clone(), offers],
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), BargainError> {
        let bad = |m: String| Err(BargainError::Params(m));
        if self.pool.is_empty() || self.pool.iter().sum::<u32>() == 0 {
            return bad("the pool must contain at least one item".into());
        }
        if !(1.0 < self.nu && self.nu < self.v_bar as f64) {
            return bad(format!(
                "need 1 < nu < v_bar, got nu = {} and v_bar = {}",
                self.nu, self.v_bar
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        for (j, support) in self.outside.iter().enumerate() {
            if support.is_empty() {
                return bad(format!("player {} has no outside offers", j + 1));
            }
            for (bundle, w) in support {
                if bundle.len() != self.pool.len() || !(*w > 0.0 && w.is_finite()) {
                    return bad(format!(
                        "player {} has a malformed outside offer {bundle:?}",
                        j + 1
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn num_offers(&self) -> usize {
        self.pool.iter().map(|&p| p as usize + 1).product()
    }
}

/// Every bundle bounded componentwise by `pool`, with equal weight.
pub fn uniform_outside_offers(pool: &[u32]) -> Vec<(Vec<u32>, f64)> {
    bundles(pool).into_iter().map(|b| (b, 1.0)).collect()
}

/// All bundles below `pool`, in lexicographic order.
fn bundles(pool: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &p in pool {
        out = out
            .into_iter()
            .flat_map(|b| (0..=p).map(move |x| [b.as_slice(), &[x]].concat()))
            .collect();
    }
    out
}

fn dot(a: &[u32], b: &[u32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x * y) as f64).sum()
}

/// Draws (v1, v2) uniformly from the valuation pairs with v·p = V̄ for both
/// players, every type valued by someone, and some type valued by both.
pub fn sample_valuations<R: Rng>(
    pool: &[u32],
    v_bar: u32,
    rng: &mut R,
) -> Result<(Vec<u32>, Vec<u32>), BargainError> {
    // v·p = V̄ bounds every entry with p_i > 0; free entries are capped at V̄.
    let caps: Vec<u32> = pool
        .iter()
        .map(|&p| if p > 0 { v_bar / p } else { v_bar })
        .collect();
    let mut draws = 0;
    let mut draw = |rng: &mut R| -> Result<Vec<u32>, BargainError> {
        loop {
            if draws == VALUATION_DRAW_CAP {
                return Err(BargainError::SamplingExhausted(draws));
            }
            draws += 1;
            let v: Vec<u32> = caps.iter().map(|&c| rng.random_range(0..=c)).collect();
            if dot(&v, pool) == v_bar as f64 {
                return Ok(v);
            }
        }
    };
    loop {
        let v1 = draw(rng)?;
        let v2 = draw(rng)?;
        let covered = v1.iter().zip(&v2).all(|(a, b)| a + b > 0);
        let shared = v1.iter().zip(&v2).any(|(a, b)| a * b > 0);
        if covered && shared {
            return Ok((v1, v2));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BargainAction {
    Deal,
    Walk,
    /// Offer `offer` (index into the partition list, giving player 1's bundle)
    /// and optionally reveal the outside-offer signal.
    Offer {
        offer: usize,
        reveal: bool,
    },
}

impl BargainAction {
    pub fn label(&self) -> String {
        match self {
            BargainAction::Deal => "deal".into(),
            BargainAction::Walk => "walk".into(),
            BargainAction::Offer {
                offer,
                reveal: false,
            } => format!("o{offer}"),
            BargainAction::Offer {
                offer,
                reveal: true,
            } => format!("o{offer}r"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Signal {
    L,
    H,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Private {
    pub values: Vec<u32>,
    pub outside: Vec<u32>,
}

/// What one player knows at a given point of an episode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Observation {
    pub player: usize,
    pub private: Private,
    pub own_signal: Signal,
    pub opponent_signal: Option<Signal>,
    pub history: Vec<BargainAction>,
}

#[derive(Clone, Debug)]
struct Episode {
    private: [Private; 2],
    turn: usize,
    last_offer: Option<usize>,
    history: Vec<BargainAction>,
    revealed: [bool; 2],
    payoffs: Option<[f64; 2]>,
}

/// Episodic Bargain simulator. Player 1 moves first in every round.
#[derive(Clone, Debug)]
pub struct BargainSim {
    params: BargainParams,
    offers: Vec<Vec<u32>>,
    outside_dist: [WeightedIndex<f64>; 2],
    rng: ChaCha8Rng,
    episode: Option<Episode>,
}

impl BargainSim {
    pub fn new(params: BargainParams) -> Result<Self, BargainError> {
        params.validate()?;
        let dist = |j: usize| {
            WeightedIndex::new(params.outside[j].iter().map(|(_, w)| *w))
                .map_err(|e| BargainError::Params(e.to_string()))
        };
        let outside_dist = [dist(0)?, dist(1)?];
        Ok(BargainSim {
            offers: bundles(&params.pool),
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            outside_dist,
            params,
            episode: None,
        })
    }

    pub fn params(&self) -> &BargainParams {
        &self.params
    }

    /// Player 1's bundle for each offer index; player 2 gets the rest.
    pub fn offers(&self) -> &[Vec<u32>] {
        &self.offers
    }

    /// Samples Nature's move for a fresh episode.
    pub fn sample_private(&mut self) -> Result<[Private; 2], BargainError> {
        let (v1, v2) = sample_valuations(&self.params.pool, self.params.v_bar, &mut self.rng)?;
        let o1 = self.params.outside[0][self.outside_dist[0].sample(&mut self.rng)]
            .0
            .clone();
        let o2 = self.params.outside[1][self.outside_dist[1].sample(&mut self.rng)]
            .0
            .clone();
        Ok([
            Private {
                values: v1,
                outside: o1,
            },
            Private {
                values: v2,
                outside: o2,
            },
        ])
    }

    pub fn reset(&mut self) -> Result<(), BargainError> {
        let private = self.sample_private()?;
        self.reset_with(private);
        Ok(())
    }

    /// Starts an episode from a given Nature outcome.
    pub fn reset_with(&mut self, private: [Private; 2]) {
        self.episode = Some(Episode {
            private,
            turn: 0,
            last_offer: None,
            history: Vec::new(),
            revealed: [false; 2],
            payoffs: None,
        });
    }

    fn episode(&self) -> Result<&Episode, BargainError> {
        self.episode.as_ref().ok_or(BargainError::NoEpisode)
    }

    /// 1-based round of the current turn.
    pub fn round(&self) -> Option<usize> {
        self.episode.as_ref().map(|e| e.turn / 2 + 1)
    }

    /// Player to move, or `None` when the episode is over.
    pub fn current_player(&self) -> Option<usize> {
        let e = self.episode.as_ref()?;
        e.payoffs.is_none().then_some(e.turn % 2 + 1)
    }

    pub fn is_terminal(&self) -> bool {
        self.episode.as_ref().is_some_and(|e| e.payoffs.is_some())
    }

    pub fn payoffs(&self) -> Option<[f64; 2]> {
        self.episode.as_ref()?.payoffs
    }

    pub fn legal_actions(&self) -> Vec<BargainAction> {
        let Some(e) = self.episode.as_ref().filter(|e| e.payoffs.is_none()) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(2 + 2 * self.offers.len());
        if e.last_offer.is_some() {
            out.push(BargainAction::Deal);
        }
        out.push(BargainAction::Walk);
        for offer in 0..self.offers.len() {
            for reveal in [false, true] {
                out.push(BargainAction::Offer { offer, reveal });
            }
        }
        out
    }

    pub fn signal(&self, private: &Private) -> Signal {
        if dot(&private.outside, &private.values) > self.params.nu {
            Signal::H
        } else {
            Signal::L
        }
    }

    pub fn observation(&self, player: usize) -> Result<Observation, BargainError> {
        let e = self.episode()?;
        let (me, other) = (player - 1, 2 - player);
        Ok(Observation {
            player,
            private: e.private[me].clone(),
            own_signal: self.signal(&e.private[me]),
            opponent_signal: e.revealed[other].then(|| self.signal(&e.private[other])),
            history: e.history.clone(),
        })
    }

    pub fn step(&mut self, action: BargainAction) -> Result<(), BargainError> {
        let gamma = self.params.gamma;
        let rounds = self.params.rounds;
        let e = self.episode.as_mut().ok_or(BargainError::NoEpisode)?;
        if e.payoffs.is_some() {
            return Err(BargainError::EpisodeOver);
        }
        let round = e.turn / 2 + 1;
        let player = e.turn % 2;
        let fallback = |e: &Episode, rho: usize| {
            let d = gamma.powi(rho as i32);
            [
                d * dot(&e.private[0].outside, &e.private[0].values),
                d * dot(&e.private[1].outside, &e.private[1].values),
            ]
        };
        match action {
            BargainAction::Deal => {
                let Some(k) = e.last_offer else {
                    return Err(BargainError::IllegalAction {
                        action,
                        turn: e.turn,
                    });
                };
                let p1 = &self.offers[k];
                let p2: Vec<u32> = self
                    .params
                    .pool
                    .iter()
                    .zip(p1)
                    .map(|(p, a)| p - a)
                    .collect();
                let d = gamma.powi(round as i32 - 1);
                e.payoffs = Some([
                    d * dot(p1, &e.private[0].values),
                    d * dot(&p2, &e.private[1].values),
                ]);
            }
            BargainAction::Walk => e.payoffs = Some(fallback(e, round)),
            BargainAction::Offer { offer, reveal } => {
                if offer >= self.offers.len() {
                    return Err(BargainError::IllegalAction {
                        action,
                        turn: e.turn,
                    });
                }
                e.last_offer = Some(offer);
                e.revealed[player] |= reveal;
                if e.turn + 1 == 2 * rounds {
                    e.payoffs = Some(fallback(e, rounds));
                }
            }
        }
        e.history.push(action);
        e.turn += 1;
        Ok(())
    }
}

/// Largest number of offers allowed by [`bargain_export`].
pub const EXPORT_MAX_OFFERS: usize = 6;
/// Largest number of rounds allowed by [`bargain_export`].
pub const EXPORT_MAX_ROUNDS: usize = 2;

/// Expands the simulator into an explicit game. Nature's move is replaced by
/// `scenarios` draws from the simulator, merged into an empirical distribution.
pub fn bargain_export(params: &BargainParams, scenarios: usize) -> Result<Game, GenError> {
    if params.rounds > EXPORT_MAX_ROUNDS || params.num_offers() > EXPORT_MAX_OFFERS {
        return Err(GenError::Params(format!(
            "explicit export needs at most {EXPORT_MAX_ROUNDS} rounds and {EXPORT_MAX_OFFERS} offers, got {} and {}",
            params.rounds,
            params.num_offers()
        )));
    }
    if scenarios == 0 {
        return Err(GenError::Params("at least one scenario is needed".into()));
    }
    let mut sim = BargainSim::new(params.clone())?;
    let mut draws: Vec<([Private; 2], usize)> = Vec::new();
    for _ in 0..scenarios {
        let p = sim.sample_private()?;
        match draws.iter_mut().find(|(q, _)| *q == p) {
            Some((_, n)) => *n += 1,
            None => draws.push((p, 1)),
        }
    }

    let mut b = GameBuilder::new(2);
    let mut count = 0usize;
    let mut name = move || {
        count += 1;
        format!("n{}", count - 1)
    };
    let root = b.chance(name());
    b.set_root(root);
    let mut infosets: HashMap<String, (usize, Vec<Handle>, Vec<String>)> = HashMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut stack: Vec<(Handle, BargainSim)> = Vec::new();
    for (k, (private, n)) in draws.into_iter().enumerate() {
        let mut s = sim.clone();
        s.reset_with(private);
        let h = b.decision(name(), 1);
        b.chance_edge(root, format!("s{k}"), h, n as f64 / scenarios as f64);
        stack.push((h, s));
    }
    while let Some((h, s)) = stack.pop() {
        let player = s.current_player().expect("non-terminal");
        let obs = s.observation(player)?;
        let key = serde_json::to_string(&obs).expect("observation serializes");
        let actions = s.legal_actions();
        let labels: Vec<String> = actions.iter().map(BargainAction::label).collect();
        let entry = infosets.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (player, Vec::new(), labels.clone())
        });
        entry.1.push(h);
        for (a, label) in actions.into_iter().zip(labels) {
            let mut next = s.clone();
            next.step(a)?;
            let child = match next.payoffs() {
                Some(u) => b.terminal(name(), u.to_vec()),
                None => {
                    let c = b.decision(name(), next.current_player().expect("non-terminal"));
                    stack.push((c, next));
                    c
                }
            };
            b.edge(h, label, child);
        }
    }
    for (i, key) in order.iter().enumerate() {
        let (player, members, actions) = &infosets[key];
        b.infoset(format!("I{player}.{i}"), *player, members, actions.iter());
    }
    Ok(b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundles_enumerate_partitions() {
        assert_eq!(bundles(&[1, 2]).len(), 6);
        assert_eq!(bundles(&[1, 2])[1], vec![0, 1]);
    }

    #[test]
    fn valuations_meet_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for pool in PAPER_POOLS {
            for _ in 0..50 {
                let (v1, v2) = sample_valuations(&pool, 10, &mut rng).unwrap();
                assert_eq!(dot(&v1, &pool), 10.0);
                assert_eq!(dot(&v2, &pool), 10.0);
                assert!(v1.iter().zip(&v2).all(|(a, b)| a + b > 0));
                assert!(v1.iter().zip(&v2).any(|(a, b)| a * b > 0));
            }
        }
    }

    #[test]
    fn deal_and_walk_payoffs() {
        let mut sim = BargainSim::new(BargainParams::paper(1, 0)).unwrap();
        sim.reset().unwrap();
        assert!(!sim.legal_actions().contains(&BargainAction::Deal));
        assert_eq!(
            sim.step(BargainAction::Deal),
            Err(BargainError::IllegalAction {
                action: BargainAction::Deal,
                turn: 0
            })
        );
        let offer = 7;
        sim.step(BargainAction::Offer {
            offer,
            reveal: false,
        })
        .unwrap();
        sim.step(BargainAction::Deal).unwrap();
        let obs = sim.observation(1).unwrap();
        let p1 = sim.offers()[offer].clone();
        let p2: Vec<u32> = sim
            .params()
            .pool
            .iter()
            .zip(&p1)
            .map(|(p, a)| p - a)
            .collect();
        let obs2 = sim.observation(2).unwrap();
        assert_eq!(
            sim.payoffs().unwrap(),
            [
                dot(&p1, &obs.private.values),
                dot(&p2, &obs2.private.values)
            ]
        );
        assert_eq!(
            sim.step(BargainAction::Walk),
            Err(BargainError::EpisodeOver)
        );
    }

    #[test]
    fn timeout_pays_discounted_outside_offer() {
        let mut p = BargainParams::paper(0, 1);
        p.rounds = 1;
        let mut sim = BargainSim::new(p).unwrap();
        sim.reset().unwrap();
        sim.step(BargainAction::Offer {
            offer: 0,
            reveal: true,
        })
        .unwrap();
        assert_eq!(sim.observation(2).unwrap().opponent_signal.is_some(), true);
        assert_eq!(sim.observation(1).unwrap().opponent_signal, None);
        sim.step(BargainAction::Offer {
            offer: 1,
            reveal: false,
        })
        .unwrap();
        let o = sim.observation(1).unwrap().private;
        assert!((sim.payoffs().unwrap()[0] - 0.99 * dot(&o.outside, &o.values)).abs() < 1e-12);
    }

    #[test]
    fn export_guard_and_small_export() {
        assert!(bargain_export(&BargainParams::paper(0, 0), 4).is_err());
        let g = bargain_export(&BargainParams::small(3), 4).unwrap();
        assert_eq!(g.players(), 2);
        assert!(g.num_nodes() > 1);
    }
}
