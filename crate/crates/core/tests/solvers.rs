mod common;

use pbe_core::efg::{
    assessment_to_json, regret, Game, GameBuilder, Handle, InfosetId, NodeKind, StrategyProfile,
};
use pbe_core::games::fixtures::matching_pennies;
use pbe_core::games::{random_game, RandomGameParams};
use pbe_core::solvers::{cfr, pbe_cfr, Algorithm, OffPath, SolveConfig, SolveError};
use pbe_core::verify::{is_agm_consistent, satisfies_bayes, worst_case_local_regret};

/// Copy of `game` with player 2's utility replaced by minus player 1's.
fn zero_sum(game: &Game) -> Game {
    let mut b = GameBuilder::new(2);
    let handles: Vec<Handle> = game
        .nodes()
        .iter()
        .map(|n| match n.kind() {
            NodeKind::Terminal => b.terminal(n.name(), vec![n.utility()[0], -n.utility()[0]]),
            NodeKind::Chance => b.chance(n.name()),
            NodeKind::Player(j) => b.decision(n.name(), j),
        })
        .collect();
    b.set_root(handles[0]);
    for (i, n) in game.nodes().iter().enumerate() {
        for (k, c) in n.children().iter().enumerate() {
            let label = game.edge_label(pbe_core::efg::NodeId(i), k);
            match n.kind() {
                NodeKind::Chance => {
                    b.chance_edge(handles[i], label, handles[c.0], n.chance_probs()[k])
                }
                _ => b.edge(handles[i], label, handles[c.0]),
            }
        }
    }
    for s in game.infosets() {
        let members: Vec<Handle> = s.members().iter().map(|m| handles[m.0]).collect();
        b.infoset(s.name(), s.player(), &members, s.actions().iter().cloned());
    }
    b.build().unwrap()
}

fn max_dist_from_uniform(p: &StrategyProfile, game: &Game) -> f64 {
    (0..game.num_infosets())
        .flat_map(|i| {
            p.row(InfosetId(i))
                .iter()
                .map(|x| (x - 0.5).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

#[test]
fn matching_pennies_converges_to_uniform() {
    let g = matching_pennies();
    let (s, _) = cfr(&g, &SolveConfig::new(Algorithm::Cfr, 10_000)).unwrap();
    assert!(max_dist_from_uniform(&s, &g) <= 0.02);
    let (a, _) = pbe_cfr(&g, &SolveConfig::new(Algorithm::PbeCfr, 10_000)).unwrap();
    assert!(max_dist_from_uniform(&a.strategy, &g) <= 0.02);
    assert!(worst_case_local_regret(&g, &a) <= 0.02);
}

#[test]
fn one_iteration_returns_uniform() {
    for seed in 0..10 {
        let g = random_game(&RandomGameParams::new(80, seed)).unwrap();
        let uniform = StrategyProfile::uniform(&g);
        let (a, _) = pbe_cfr(&g, &SolveConfig::new(Algorithm::PbeCfr, 1)).unwrap();
        assert_eq!(a.strategy, uniform);
        let (s, _) = cfr(&g, &SolveConfig::new(Algorithm::Cfr, 1)).unwrap();
        assert_eq!(s, uniform);
    }
}

#[test]
fn zero_iterations_rejected() {
    let g = matching_pennies();
    assert!(matches!(
        pbe_cfr(&g, &SolveConfig::new(Algorithm::PbeCfr, 0)),
        Err(SolveError::Config(_))
    ));
    assert!(matches!(
        cfr(&g, &SolveConfig::new(Algorithm::Cfr, 0)),
        Err(SolveError::Config(_))
    ));
}

#[test]
fn three_players_rejected() {
    let g = pbe_core::games::fixtures::figure3();
    assert!(matches!(
        pbe_cfr(&g, &SolveConfig::new(Algorithm::PbeCfr, 5)),
        Err(SolveError::Game(_))
    ));
}

#[test]
fn outputs_are_bayes_and_agm_consistent() {
    for seed in 0..30 {
        let g = random_game(&RandomGameParams::new(300, seed)).unwrap();
        for off_path in [OffPath::Uniform, OffPath::PathWeighted] {
            for plus in [false, true] {
                let config = SolveConfig {
                    off_path,
                    plus,
                    ..SolveConfig::new(Algorithm::PbeCfr, 50)
                };
                let (a, _) = pbe_cfr(&g, &config).unwrap();
                assert!(satisfies_bayes(&g, &a, 1e-9).pass, "seed {seed}");
                assert!(is_agm_consistent(&g, &a).pass, "seed {seed}");
            }
        }
    }
}

#[test]
fn lemma2_bound_holds_on_random_games() {
    for seed in 0..20 {
        let g = random_game(&RandomGameParams::new(200, seed)).unwrap();
        for plus in [false, true] {
            let config = SolveConfig {
                plus,
                ..SolveConfig::new(Algorithm::PbeCfr, 1000)
            }
            .with_checkpoints(50);
            let (_, log) = pbe_cfr(&g, &config).unwrap();
            for c in &log.checkpoints {
                assert_eq!(c.lemma2_violations, 0, "seed {seed} t {}", c.t);
                assert!(c.lemma2_max_ratio <= 1.0);
                assert!(c.max_immediate_regret <= c.lemma2_bound);
            }
        }
    }
}

#[test]
fn cfr_regret_bound_on_zero_sum_game() {
    let g = zero_sum(&random_game(&RandomGameParams::new(200, 3)).unwrap());
    let t = 50_000;
    let (s, _) = cfr(&g, &SolveConfig::new(Algorithm::Cfr, t)).unwrap();
    let (lo, hi) = g.utility_range(1);
    let bound = (hi - lo) * g.max_actions() as f64 * g.num_infosets() as f64 / (t as f64).sqrt();
    let total = regret(&g, &s).unwrap().total;
    assert!(total <= bound, "{total} > {bound}");
}

#[test]
fn solvers_are_deterministic() {
    let g = random_game(&RandomGameParams::new(300, 11)).unwrap();
    let config = SolveConfig::new(Algorithm::PbeCfr, 200);
    let (a, _) = pbe_cfr(&g, &config).unwrap();
    let (b, _) = pbe_cfr(&g, &config).unwrap();
    assert_eq!(
        assessment_to_json(&g, &a, None),
        assessment_to_json(&g, &b, None)
    );
    let config = SolveConfig::new(Algorithm::Cfr, 200);
    assert_eq!(cfr(&g, &config).unwrap().0, cfr(&g, &config).unwrap().0);
}

#[test]
fn pbe_cfr_regret_falls_with_iterations() {
    let g = pbe_core::games::private_gen_goof(&pbe_core::games::GenGoofParams::new(3, 10.0, 1))
        .unwrap();
    let config = SolveConfig::new(Algorithm::PbeCfr, 2000).with_checkpoints(100);
    let (_, log) = pbe_cfr(&g, &config).unwrap();
    let first = log.checkpoints.first().unwrap().regret;
    let last = log.checkpoints.last().unwrap().regret;
    assert!(last < first / 4.0, "{first} -> {last}");
}
