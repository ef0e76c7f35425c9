use std::time::Instant;

use super::beliefs::{update_beliefs_by, update_beliefs_with, OffPath};
use super::flat::Flat;
use super::regret::regret_matching_into;
use super::{
    require_two, Algorithm, Checkpoint, IterationLog, RegretState, SolveConfig, SolveError,
};
use crate::efg::{Assessment, BeliefSystem, Game};
use crate::plausibility::PlausibilityOrder;
use crate::verify::worst_case_local_regret;

/// Reusable buffers for belief-weighted traversals.
pub(crate) struct Traverser {
    flat: Flat,
    v1: Vec<f64>,
    v2: Vec<f64>,
    reach: Vec<f64>,
    weights: Vec<f64>,
    q: Vec<f64>,
}

impl Traverser {
    pub fn new(game: &Game, state: &RegretState) -> Self {
        let flat = Flat::new(game, state.current.offsets());
        let n = flat.n;
        Traverser {
            flat,
            v1: vec![0.0; n],
            v2: vec![0.0; n],
            reach: vec![0.0; n],
            weights: vec![0.0; n],
            q: Vec::new(),
        }
    }

    /// Accumulates believed regrets at σ^t = `state.current` under `beliefs`,
    /// then overwrites `state.current` with σ^{t+1}. Returns U^E(σ^t) at the root.
    /// With `plus`, cumulative regrets are floored at zero first.
    pub fn step(
        &mut self,
        game: &Game,
        state: &mut RegretState,
        beliefs: &BeliefSystem,
        plus: bool,
    ) -> [f64; 2] {
        let sigma = state.current.flat();
        self.flat.values(sigma, &mut self.v1, &mut self.v2);
        let root = [self.v1[0], self.v2[0]];
        let offsets = state.current.offsets().to_vec();
        for (i, s) in game.infosets().iter().enumerate() {
            let (a0, a1) = (offsets[i], offsets[i + 1]);
            let na = a1 - a0;
            let v = if s.player() == 1 { &self.v1 } else { &self.v2 };
            self.q.clear();
            self.q.resize(na, 0.0);
            let mu = beliefs.row(crate::efg::InfosetId(i));
            for (m, &w) in s.members().iter().zip(mu) {
                if w == 0.0 {
                    continue;
                }
                let e0 = self.flat.edge_start[m.0] as usize;
                for a in 0..na {
                    self.q[a] += w * v[self.flat.child[e0 + a] as usize];
                }
            }
            let sigma = state.current.flat();
            let ub: f64 = (0..na).map(|a| sigma[a0 + a] * self.q[a]).sum();
            for a in 0..na {
                state.regrets[a0 + a] += self.q[a] - ub;
            }
        }
        if plus {
            state.floor_regrets();
        }
        let flat = state.current.flat_mut();
        for w in offsets.windows(2) {
            regret_matching_into(&state.regrets[w[0]..w[1]], &mut flat[w[0]..w[1]]);
        }
        root
    }

    pub fn beliefs(&mut self, game: &Game, state: &RegretState, rule: OffPath) -> BeliefSystem {
        let sigma = state.current.flat();
        self.flat.reach(sigma, &mut self.reach);
        let weights = match rule {
            OffPath::Uniform => None,
            OffPath::PathWeighted => {
                let positive: Vec<f64> = sigma
                    .iter()
                    .map(|&p| if p > 0.0 { p } else { 1.0 })
                    .collect();
                self.flat.reach(&positive, &mut self.weights);
                Some(&self.weights[..])
            }
        };
        let flat = &self.flat;
        update_beliefs_with(game, &self.reach, weights, || {
            let (strict, top) = flat.order_parts(sigma);
            PlausibilityOrder::from_parts(game, strict, top)
        })
    }
}

/// One PBE-CFR iteration; see [`pbe_cfr`]. Returns U^E(σ^t) at the root.
pub fn traverse_with_beliefs(
    game: &Game,
    state: &mut RegretState,
    beliefs: &BeliefSystem,
) -> Result<[f64; 2], SolveError> {
    require_two(game)?;
    let mut t = Traverser::new(game, state);
    Ok(t.step(game, state, beliefs, false))
}

/// Runs PBE-CFR for `config.iterations` iterations.
///
/// Regrets are believed regrets without opponent-reach weighting. The returned
/// strategy is the unweighted mean of σ^1..σ^T and the beliefs are
/// `update_beliefs_by` of that mean under `config.off_path`, so the assessment
/// is Bayes- and AGM-consistent. The same rule forms the beliefs between iterations.
pub fn pbe_cfr(
    game: &Game,
    config: &SolveConfig,
) -> Result<(Assessment, IterationLog), SolveError> {
    require_two(game)?;
    config.validate()?;
    let mut state = RegretState::new(game);
    let mut trav = Traverser::new(game, &state);
    let mut beliefs = BeliefSystem::uniform(game);
    let mut log = IterationLog {
        algorithm: Algorithm::PbeCfr,
        checkpoints: Vec::new(),
        total_wall_ms: 0.0,
    };
    let mut elapsed = 0.0;
    let mut clock = Instant::now();
    let total = config.iterations;
    for t in 1..=total {
        for (s, c) in state.strategy_sum.iter_mut().zip(state.current.flat()) {
            *s += c;
        }
        trav.step(game, &mut state, &beliefs, config.plus);
        if t < total {
            beliefs = trav.beliefs(game, &state, config.off_path);
        }
        if config.is_checkpoint(t) {
            elapsed += clock.elapsed().as_secs_f64() * 1e3;
            let avg = state.average();
            let mu = update_beliefs_by(game, &avg, config.off_path);
            let regret = worst_case_local_regret(game, &Assessment::new(avg, mu));
            let (lemma2_bound, max_immediate_regret, lemma2_max_ratio, lemma2_violations) =
                state.lemma2(game, t);
            log.checkpoints.push(Checkpoint {
                t,
                wall_ms: elapsed,
                regret,
                lemma2_bound,
                max_immediate_regret,
                lemma2_max_ratio,
                lemma2_violations,
            });
            clock = Instant::now();
        }
    }
    elapsed += clock.elapsed().as_secs_f64() * 1e3;
    log.total_wall_ms = elapsed;
    let avg = state.average();
    let mu = update_beliefs_by(game, &avg, config.off_path);
    Ok((Assessment::new(avg, mu), log))
}
