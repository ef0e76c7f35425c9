mod common;

use common::*;
use pbe_core::efg::{
    best_response, expected_utility, infoset_reach, node_values, reach_all, reach_probability,
    Assessment, InfosetId, NodeId,
};
use pbe_core::games::{random_game, RandomGameParams};
use pbe_core::solvers::{update_beliefs, update_beliefs_by, OffPath};
use pbe_core::verify::{full_believed_regret, is_agm_consistent};

const EPS: f64 = 1e-9;

#[test]
fn reach_matches_path_walk() {
    for seed in 0..20 {
        let g = random_game(&RandomGameParams::new(50, seed)).unwrap();
        let p = random_profile(&g, &mut rng(seed), 0.2);
        let all = reach_all(&g, &p);
        for h in 0..g.num_nodes() {
            let want = path_reach(&g, &p, NodeId(h));
            assert!((reach_probability(&g, &p, NodeId(h)).unwrap().product - want).abs() < EPS);
            assert!((all[h] - want).abs() < EPS);
        }
        for (i, s) in g.infosets().iter().enumerate() {
            let want: f64 = s.members().iter().map(|&m| path_reach(&g, &p, m)).sum();
            assert!((infoset_reach(&g, &p, InfosetId(i)).unwrap() - want).abs() < EPS);
        }
    }
}

#[test]
fn reach_factors_multiply_to_product() {
    for seed in 0..20 {
        let g = random_game(&RandomGameParams::new(50, seed)).unwrap();
        let p = random_profile(&g, &mut rng(seed + 100), 0.2);
        for h in 0..g.num_nodes() {
            let r = reach_probability(&g, &p, NodeId(h)).unwrap();
            let prod = r.chance * r.players.iter().product::<f64>();
            assert!((prod - r.product).abs() < EPS);
            for j in 1..=g.players() {
                assert!((r.others(j) * r.player(j) - r.product).abs() < EPS);
            }
        }
    }
}

#[test]
fn expected_utility_matches_leaf_enumeration() {
    for seed in 0..20 {
        let g = random_game(&RandomGameParams::new(60, seed)).unwrap();
        let p = random_profile(&g, &mut rng(seed + 200), 0.2);
        let values = node_values(&g, &p);
        for h in 0..g.num_nodes() {
            let eu = expected_utility(&g, &p, NodeId(h)).unwrap();
            for j in 1..=g.players() {
                let want = leaf_value(&g, &p, NodeId(h), j);
                assert!((eu[j - 1] - want).abs() < EPS);
                assert!((values.get(NodeId(h), j) - want).abs() < EPS);
            }
        }
    }
}

#[test]
fn best_response_matches_pure_enumeration() {
    let mut checked = 0;
    for seed in 0..60 {
        let g = random_game(&RandomGameParams::new(30, seed)).unwrap();
        let p = random_profile(&g, &mut rng(seed + 300), 0.3);
        for j in 1..=g.players() {
            let own: Vec<InfosetId> = g.player_infosets(j).collect();
            if assignments(&g, &own).len() > 64 {
                continue;
            }
            let br = best_response(&g, &p, j).unwrap();
            let want = exhaustive_br_value(&g, &p, j);
            assert!(
                (br.value - want).abs() < EPS,
                "seed {seed} player {j}: {} vs {want}",
                br.value
            );
            let applied = leaf_value(&g, &br.apply(&p), g.root(), j);
            assert!((applied - want).abs() < EPS);
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn agm_matches_preorder_search() {
    let (mut yes, mut no) = (0, 0);
    for (name, g) in micro_suite() {
        let mut r = rng(name.len() as u64 * 7919 + g.num_nodes() as u64);
        for round in 0..12 {
            let p = random_profile(&g, &mut r, if round % 2 == 0 { 0.3 } else { 0.5 });
            let mu = match round % 3 {
                0 => update_beliefs(&g, &p),
                1 => update_beliefs_by(&g, &p, OffPath::PathWeighted),
                _ => random_beliefs(&g, &mut r, 0.4),
            };
            let a = Assessment::new(p, mu);
            let want = agm_oracle(&g, &a);
            assert_eq!(is_agm_consistent(&g, &a).pass, want, "{name} round {round}");
            if want {
                yes += 1;
            } else {
                no += 1;
            }
        }
    }
    assert!(yes > 0 && no > 0, "both verdicts exercised: {yes} / {no}");
}

#[test]
fn full_believed_regret_matches_continuation_enumeration() {
    for (name, g) in micro_suite() {
        let mut r = rng(g.num_nodes() as u64 + 31 * name.len() as u64);
        for _ in 0..4 {
            let p = random_profile(&g, &mut r, 0.3);
            let mu = random_beliefs(&g, &mut r, 0.3);
            let a = Assessment::new(p, mu);
            for i in 0..g.num_infosets() {
                let got = full_believed_regret(&g, &a, InfosetId(i));
                let want = continuation_regret(&g, &a, InfosetId(i));
                assert!(
                    (got - want).abs() < EPS,
                    "{name} infoset {i}: {got} vs {want}"
                );
            }
        }
    }
}
