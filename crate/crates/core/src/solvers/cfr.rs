use std::time::Instant;

use super::flat::{Flat, CHANCE, TERMINAL};
use super::regret::regret_matching_into;
use super::{
    require_two, Algorithm, Checkpoint, IterationLog, RegretState, SolveConfig, SolveError,
};
use crate::efg::{regret, Game, StrategyProfile};

/// Vanilla CFR with counterfactual (opponent- and chance-reach weighted)
/// regrets and own-reach weighted strategy averaging.
pub fn cfr(
    game: &Game,
    config: &SolveConfig,
) -> Result<(StrategyProfile, IterationLog), SolveError> {
    require_two(game)?;
    config.validate()?;
    let mut state = RegretState::new(game);
    let offsets = state.current.offsets().to_vec();
    let flat = Flat::new(game, &offsets);
    let n = flat.n;
    let (mut v1, mut v2) = (vec![0.0; n], vec![0.0; n]);
    // Reach split into chance, player 1 and player 2 factors.
    let (mut rc, mut r1, mut r2) = (vec![1.0; n], vec![1.0; n], vec![1.0; n]);
    let mut log = IterationLog {
        algorithm: Algorithm::Cfr,
        checkpoints: Vec::new(),
        total_wall_ms: 0.0,
    };
    let mut elapsed = 0.0;
    let mut clock = Instant::now();
    for t in 1..=config.iterations {
        let sigma = state.current.flat();
        for i in 0..n {
            let owner = flat.owner[i];
            if owner == TERMINAL {
                continue;
            }
            let base = flat.row[i] as usize;
            for (k, e) in flat.edges(i).enumerate() {
                let c = flat.child[e] as usize;
                rc[c] = rc[i];
                r1[c] = r1[i];
                r2[c] = r2[i];
                match owner {
                    CHANCE => rc[c] *= flat.chance_p[base + k],
                    1 => r1[c] *= sigma[base + k],
                    _ => r2[c] *= sigma[base + k],
                }
            }
        }
        flat.values(sigma, &mut v1, &mut v2);
        for (i, s) in game.infosets().iter().enumerate() {
            let (a0, a1) = (offsets[i], offsets[i + 1]);
            let (v, own, opp) = if s.player() == 1 {
                (&v1, &r1, &r2)
            } else {
                (&v2, &r2, &r1)
            };
            for m in s.members() {
                let h = m.0;
                let w = rc[h] * opp[h];
                if w == 0.0 {
                    continue;
                }
                let e0 = flat.edge_start[h] as usize;
                for a in 0..a1 - a0 {
                    state.regrets[a0 + a] += w * (v[flat.child[e0 + a] as usize] - v[h]);
                }
            }
            let pi = own[s.members()[0].0];
            for k in a0..a1 {
                state.strategy_sum[k] += pi * sigma[k];
            }
        }
        if config.plus {
            state.floor_regrets();
        }
        let next = state.current.flat_mut();
        for w in offsets.windows(2) {
            regret_matching_into(&state.regrets[w[0]..w[1]], &mut next[w[0]..w[1]]);
        }
        if config.is_checkpoint(t) {
            elapsed += clock.elapsed().as_secs_f64() * 1e3;
            let avg = state.average();
            let exploitability = regret(game, &avg)?.total;
            let (lemma2_bound, max_immediate_regret, lemma2_max_ratio, lemma2_violations) =
                state.lemma2(game, t);
            log.checkpoints.push(Checkpoint {
                t,
                wall_ms: elapsed,
                regret: exploitability,
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
    Ok((state.average(), log))
}
