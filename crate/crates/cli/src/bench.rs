//! Benchmark suites: CFR and PBE-CFR over seeded generated games.

use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use pbe_core::efg::{regret, Assessment, Game};
use pbe_core::games::{gen_goof, private_gen_goof, random_game, GenGoofParams, RandomGameParams};
use pbe_core::solvers::{cfr, pbe_cfr, update_beliefs, Algorithm, SolveConfig};
use pbe_core::verify::worst_case_local_regret;

use crate::{print_stdout, usage, Failure, VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Gengoof,
    PrivateGengoof,
    Random,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Generator::PrivateGengoof)]
    pub generator: Generator,
    /// GenGoof size, or the node budget for random games.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 10.0)]
    pub umax: f64,
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    /// Instance i uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated iteration counts.
    #[arg(long, value_delimiter = ',', default_value = "500")]
    pub iters: Vec<usize>,
    /// Comma-separated subset of cfr, pbe-cfr.
    #[arg(long, value_delimiter = ',', default_value = "cfr,pbe-cfr")]
    #[serde(serialize_with = "algorithms")]
    pub algs: Vec<Algorithm>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV with one row per run.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// JSON report with the config, rows and means.
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

fn algorithms<S: serde::Serializer>(algs: &[Algorithm], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(algs.iter().map(|a| a.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub instance: usize,
    pub seed: u64,
    pub algorithm: String,
    pub iterations: usize,
    pub nodes: usize,
    pub infosets: usize,
    pub wall_ms: f64,
    pub worst_case_local_regret: f64,
    pub exploitability: f64,
    pub error: String,
}

fn generate(args: &BenchArgs, seed: u64) -> Result<Game, String> {
    let r = match args.generator {
        Generator::Gengoof => gen_goof(&GenGoofParams::new(args.k, args.umax, seed)),
        Generator::PrivateGengoof => private_gen_goof(&GenGoofParams::new(args.k, args.umax, seed)),
        Generator::Random => random_game(&RandomGameParams::new(args.k, seed)),
    };
    r.map_err(|e| e.to_string())
}

fn solve(
    game: &Game,
    alg: Algorithm,
    iterations: usize,
    seed: u64,
) -> Result<(Assessment, f64), String> {
    let config = SolveConfig {
        seed,
        ..SolveConfig::new(alg, iterations)
    };
    match alg {
        Algorithm::PbeCfr => pbe_cfr(game, &config).map(|(a, log)| (a, log.total_wall_ms)),
        Algorithm::Cfr => cfr(game, &config).map(|(s, log)| {
            let mu = update_beliefs(game, &s);
            (Assessment::new(s, mu), log.total_wall_ms)
        }),
    }
    .map_err(|e| e.to_string())
}

/// Runs every (instance, iterations, algorithm) combination. Failures are
/// recorded in the row's `error` column.
pub fn run_suite(args: &BenchArgs) -> Vec<Row> {
    let mut tasks = Vec::new();
    for i in 0..args.instances {
        for &t in &args.iters {
            for &alg in &args.algs {
                tasks.push((i, t, alg));
            }
        }
    }
    let games: Vec<Result<Game, String>> = (0..args.instances)
        .into_par_iter()
        .map(|i| generate(args, args.seed + i as u64))
        .collect();
    tasks
        .par_iter()
        .map(|&(i, t, alg)| {
            let seed = args.seed + i as u64;
            let mut row = Row {
                instance: i,
                seed,
                algorithm: alg.to_string(),
                iterations: t,
                nodes: 0,
                infosets: 0,
                wall_ms: f64::NAN,
                worst_case_local_regret: f64::NAN,
                exploitability: f64::NAN,
                error: String::new(),
            };
            let game = match &games[i] {
                Ok(g) => g,
                Err(e) => {
                    row.error = e.clone();
                    return row;
                }
            };
            row.nodes = game.num_nodes();
            row.infosets = game.num_infosets();
            match solve(game, alg, t, seed) {
                Ok((a, wall)) => {
                    row.wall_ms = wall;
                    row.worst_case_local_regret = worst_case_local_regret(game, &a);
                    row.exploitability = regret(game, &a.strategy)
                        .map(|r| r.total)
                        .unwrap_or(f64::NAN);
                }
                Err(e) => row.error = e,
            }
            log::info!("bench instance {i} {alg} T={t}: {:.1} ms", row.wall_ms);
            row
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Mean {
    pub algorithm: String,
    pub iterations: usize,
    pub runs: usize,
    pub failures: usize,
    pub wall_ms: f64,
    pub worst_case_local_regret: f64,
    pub exploitability: f64,
}

pub fn means(args: &BenchArgs, rows: &[Row]) -> Vec<Mean> {
    let mut out = Vec::new();
    for &t in &args.iters {
        for alg in &args.algs {
            let name = alg.to_string();
            let group: Vec<&Row> = rows
                .iter()
                .filter(|r| r.iterations == t && r.algorithm == name)
                .collect();
            let ok: Vec<&&Row> = group.iter().filter(|r| r.error.is_empty()).collect();
            let mean = |f: fn(&Row) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            out.push(Mean {
                algorithm: name,
                iterations: t,
                runs: ok.len(),
                failures: group.len() - ok.len(),
                wall_ms: mean(|r| r.wall_ms),
                worst_case_local_regret: mean(|r| r.worst_case_local_regret),
                exploitability: mean(|r| r.exploitability),
            });
        }
    }
    out
}

pub fn run(args: BenchArgs) -> Result<(), Failure> {
    if args.instances == 0
        || args.jobs == 0
        || args.iters.is_empty()
        || args.iters.contains(&0)
        || args.algs.is_empty()
    {
        return Err(usage(anyhow!(
            "need --instances, --jobs and every --iters value at least 1"
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(anyhow::Error::from)?;
    let rows = pool.install(|| run_suite(&args));
    let means = means(&args, &rows);
    if let Some(path) = &args.out {
        let mut w =
            csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        for r in &rows {
            w.serialize(r).map_err(anyhow::Error::from)?;
        }
        w.flush().map_err(anyhow::Error::from)?;
    }
    let report = json!({
        "config": { "suite": &args, "version": VERSION },
        "means": means,
        "rows": rows,
    });
    let text = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
    match &args.report {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print_stdout(
            &serde_json::to_string_pretty(&report["means"]).map_err(anyhow::Error::from)?,
        )?,
    }
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    if failed > 0 {
        log::warn!("{failed} of {} runs failed", rows.len());
    }
    Ok(())
}
