//! Acceptance suite. Runs every criterion in sequence (timing criteria need
//! the machine to themselves), prints one PASS/FAIL line each to stderr, then
//! fails if any criterion failed.
//!
//! Run with `cargo test -p pbe-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use common::*;
use pbe_core::efg::{assessment_to_json, Assessment, Game, InfosetId, StrategyProfile};
use pbe_core::games::fixtures;
use pbe_core::games::{gen_goof, private_gen_goof, random_game, GenGoofParams, RandomGameParams};
use pbe_core::psro::{run_psro, Mss, PsroConfig};
use pbe_core::solvers::{cfr, pbe_cfr, update_beliefs, Algorithm, SolveConfig};
use pbe_core::verify::{
    full_believed_regret, is_agm_consistent, satisfies_bayes, worst_case_local_regret,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

fn goof(k: usize, seed: u64) -> Game {
    gen_goof(&GenGoofParams::new(k, 10.0, seed)).unwrap()
}

fn private_goof(k: usize, seed: u64) -> Game {
    private_gen_goof(&GenGoofParams::new(k, 10.0, seed)).unwrap()
}

fn solve_pbe(game: &Game, iterations: usize) -> (Assessment, f64) {
    let (a, log) = pbe_cfr(game, &SolveConfig::new(Algorithm::PbeCfr, iterations)).unwrap();
    (a, log.total_wall_ms)
}

fn fixture_correctness() -> Outcome {
    let start = Instant::now();
    let g = fixtures::figure1();
    let a = fixtures::figure1_assessment(&g);
    let fig1 = satisfies_bayes(&g, &a, 1e-9).pass && is_agm_consistent(&g, &a).pass;
    let g = fixtures::figure3();
    let mut fig3 = true;
    for mu_be in [0.1, 0.5, 1.0] {
        let r = is_agm_consistent(&g, &fixtures::figure3_assessment(&g, mu_be));
        fig3 &= !r.pass && r.certificate.is_some();
    }
    let t = secs(start);
    outcome(
        fig1 && fig3 && t < 1.0,
        format!("figure1 consistent: {fig1}, figure3 rejected with certificate: {fig3}, {t:.3} s"),
    )
}

/// 100 random two-player games up to 500 nodes plus both GenGoof(3) variants.
fn consistency_suite() -> Vec<Game> {
    let mut games: Vec<Game> = (0..100)
        .map(|seed| random_game(&RandomGameParams::new(500, seed)).unwrap())
        .collect();
    games.push(goof(3, 0));
    games.push(private_goof(3, 0));
    games
}

fn solver_consistency(games: &[Game]) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for (i, g) in games.iter().enumerate() {
        let (a, _) = solve_pbe(g, 500);
        if !(satisfies_bayes(g, &a, 1e-9).pass && is_agm_consistent(g, &a).pass) {
            bad.push(i);
        }
    }
    let t = secs(start);
    outcome(
        bad.is_empty() && t < 120.0,
        format!(
            "{} games, inconsistent outputs: {bad:?}, {t:.1} s",
            games.len()
        ),
    )
}

fn lemma2(games: &[Game]) -> Outcome {
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for g in games {
        let config = SolveConfig::new(Algorithm::PbeCfr, 2000).with_checkpoints(100);
        let (_, log) = pbe_cfr(g, &config).unwrap();
        for c in &log.checkpoints {
            violations += c.lemma2_violations;
            worst = worst.max(c.lemma2_max_ratio);
        }
    }
    outcome(
        violations == 0,
        format!("violations {violations}, largest regret/bound ratio {worst:.4}"),
    )
}

fn zero_sum_convergence() -> Outcome {
    let start = Instant::now();
    let g = fixtures::matching_pennies();
    let dist = |p: &StrategyProfile| {
        (0..g.num_infosets())
            .flat_map(|i| p.row(InfosetId(i)).to_vec())
            .map(|x| (x - 0.5).abs())
            .fold(0.0, f64::max)
    };
    let (s, _) = cfr(&g, &SolveConfig::new(Algorithm::Cfr, 10_000)).unwrap();
    let (a, _) = solve_pbe(&g, 10_000);
    let (dc, dp) = (dist(&s), dist(&a.strategy));
    let wclr = worst_case_local_regret(&g, &a);
    let t = secs(start);
    outcome(
        dc <= 0.02 && dp <= 0.02 && wclr <= 0.02 && t < 5.0,
        format!("cfr dist {dc:.4}, pbe-cfr dist {dp:.4}, wclr {wclr:.4}, {t:.2} s"),
    )
}

fn table1_scale() -> Outcome {
    let start = Instant::now();
    let (mut short, mut long) = (0.0, 0.0);
    for seed in 0..20 {
        let g = private_goof(4, seed);
        short += worst_case_local_regret(&g, &solve_pbe(&g, 500).0);
        long += worst_case_local_regret(&g, &solve_pbe(&g, 5000).0);
    }
    let (short, long) = (short / 20.0, long / 20.0);
    let t = secs(start);
    outcome(
        short <= 0.05 && long < short && t < 1800.0,
        format!("mean wclr T=500 {short:.5}, T=5000 {long:.5}, {t:.0} s"),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn linearity() -> Outcome {
    let g = goof(4, 0);
    let time = |t: usize| median((0..3).map(|_| solve_pbe(&g, t).1).collect());
    let base = time(500);
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, want) in [(1000, 2.0), (2000, 4.0), (5000, 10.0)] {
        let ratio = time(t) / base;
        pass &= (ratio - want).abs() <= 0.25 * want;
        parts.push(format!("T={t}: {ratio:.2} (want {want})"));
    }
    outcome(pass, parts.join(", "))
}

fn runtime_parity() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let g = goof(4, seed);
        let (_, pbe) = solve_pbe(&g, 1000);
        let (_, log) = cfr(&g, &SolveConfig::new(Algorithm::Cfr, 1000)).unwrap();
        worst = worst.max(pbe / log.total_wall_ms);
    }
    outcome(
        worst <= 10.0,
        format!("largest pbe-cfr/cfr time ratio {worst:.2}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let (mut agm_cases, mut agm_bad, mut regret_cases, mut regret_bad) = (0, 0, 0, 0);
    for (name, g) in micro_suite() {
        let mut r = rng(g.num_nodes() as u64 * 131 + name.len() as u64);
        for round in 0..10 {
            let p = random_profile(&g, &mut r, if round % 2 == 0 { 0.3 } else { 0.5 });
            let mu = if round % 2 == 0 {
                update_beliefs(&g, &p)
            } else {
                random_beliefs(&g, &mut r, 0.4)
            };
            let a = Assessment::new(p, mu);
            agm_cases += 1;
            if is_agm_consistent(&g, &a).pass != agm_oracle(&g, &a) {
                agm_bad += 1;
            }
            for i in 0..g.num_infosets() {
                regret_cases += 1;
                let got = full_believed_regret(&g, &a, InfosetId(i));
                if (got - continuation_regret(&g, &a, InfosetId(i))).abs() > 1e-9 {
                    regret_bad += 1;
                }
            }
        }
    }
    outcome(
        agm_bad == 0 && regret_bad == 0,
        format!("agm mismatches {agm_bad}/{agm_cases}, full regret mismatches {regret_bad}/{regret_cases}"),
    )
}

fn psro_trend() -> Outcome {
    let g = goof(4, 0);
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [2, 4] {
        for mss in [Mss::Ne, Mss::Pbe] {
            let log = run_psro(&g, &PsroConfig::new(mss, m, 30, 500, 0)).unwrap();
            let r: Vec<f64> = log.iter().map(|e| e.eval_regret).collect();
            let ratio = r[30] / r[1];
            let ma: Vec<f64> = (5..=30)
                .map(|k| r[k - 4..=k].iter().sum::<f64>() / 5.0)
                .collect();
            let rises = ma.windows(2).filter(|w| w[1] > w[0]).count();
            pass &= ratio <= 0.2 && rises == 0;
            parts.push(format!(
                "M={m} {mss}: ratio {ratio:.3}, moving-average rises {rises}"
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn determinism() -> Outcome {
    let g = private_goof(3, 7);
    let json = |g: &Game| assessment_to_json(g, &solve_pbe(g, 300).0, None);
    let assessments = json(&g) == json(&g);
    let dir = tempfile::tempdir().unwrap();
    let bench = |name: &str| -> Vec<Vec<String>> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_pbe"))
            .args([
                "bench",
                "--generator",
                "private-gengoof",
                "--k",
                "3",
                "--instances",
                "5",
                "--iters",
                "200,400",
            ])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        let mut reader = csv::Reader::from_path(&out).unwrap();
        let wall = reader
            .headers()
            .unwrap()
            .iter()
            .position(|h| h == "wall_ms")
            .unwrap();
        reader
            .records()
            .map(|r| {
                r.unwrap()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != wall)
                    .map(|(_, v)| v.to_string())
                    .collect()
            })
            .collect()
    };
    let csvs = bench("a.csv") == bench("b.csv");
    outcome(
        assessments && csvs,
        format!("assessments identical: {assessments}, bench values identical: {csvs}"),
    )
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut report = |n: usize, name: &str, run: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let line = format!(
            "criterion {n:>2} {verdict} {name}: {} [{:.1} s]",
            o.detail,
            secs(start)
        );
        // Bypass the test harness's capture so the lines always show.
        writeln!(std::io::stderr(), "{line}").unwrap();
        if !o.pass {
            failed.push(line);
        }
    };
    let suite = consistency_suite();
    report(1, "fixture correctness", &fixture_correctness);
    report(2, "solver-output consistency", &|| {
        solver_consistency(&suite)
    });
    report(3, "lemma-2 bound", &|| lemma2(&suite));
    report(4, "zero-sum convergence", &zero_sum_convergence);
    report(5, "table-1 scale check", &table1_scale);
    report(6, "time linearity", &linearity);
    report(7, "runtime parity", &runtime_parity);
    report(8, "oracle equivalence", &oracle_equivalence);
    report(9, "psro trend", &psro_trend);
    report(10, "determinism", &determinism);
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
