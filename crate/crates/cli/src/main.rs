//! `pbe`: generate games, solve them, verify assessments, run benchmark suites
//! and the PSRO loop.

mod bench;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pbe_core::efg::{
    assessment_from_json_lenient, assessment_to_json, game_from_json, game_to_json, Assessment,
    Game,
};
use pbe_core::games::{
    bargain_export, fixture, fixtures, gen_goof, private_gen_goof, random_game, BargainParams,
    GenGoofParams, RandomGameParams,
};
use pbe_core::psro::{run_psro, Estimation, Mss, PsroConfig};
use pbe_core::solvers::{cfr, pbe_cfr, update_beliefs, Algorithm, OffPath, SolveConfig};
use pbe_core::verify::{is_pbe, worst_case_local_regret, DEFAULT_TOL};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "pbe",
    version,
    about = "Perfect Bayesian equilibrium tools for extensive-form games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated or fixture game as JSON.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Run CFR or PBE-CFR on a game file.
    Solve(SolveArgs),
    /// Check whether an assessment is a perfect Bayesian equilibrium (exit 1 if not).
    Verify(VerifyArgs),
    /// Run CFR and PBE-CFR over a suite of generated games.
    Bench(bench::BenchArgs),
    /// Run the PSRO loop on a true game.
    Psro(PsroArgs),
}

#[derive(Args)]
struct GoofArgs {
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 10.0)]
    umax: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Paper,
    Small,
}

#[derive(Subcommand)]
enum GenCommand {
    Gengoof(GoofArgs),
    PrivateGengoof(GoofArgs),
    /// Bargaining parameters, or an explicit game for small presets with --export.
    Bargain {
        #[arg(long, value_enum, default_value_t = Preset::Paper)]
        preset: Preset,
        /// Index into the five paper pools.
        #[arg(long, default_value_t = 0)]
        pool: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Export an explicit game with this many sampled scenarios.
        #[arg(long)]
        export: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Random {
        #[arg(long, default_value_t = 40)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A hand-built game, optionally with its reference assessment.
    Fixture {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        assessment: Option<PathBuf>,
        /// Belief on node `be` in the figure3 assessment.
        #[arg(long, default_value_t = 0.5)]
        mu_be: f64,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, default_value = "pbe-cfr")]
    alg: Algorithm,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Off-path belief rule for PBE-CFR: `path-weighted` or `uniform`.
    #[arg(long, default_value = "path-weighted")]
    off_path: OffPath,
    /// Floor cumulative regrets at zero; defaults to true for pbe-cfr, false for cfr.
    #[arg(long)]
    plus: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    assessment: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PsroArgs {
    /// `gengoof:K`, `private-gengoof:K` or a game file.
    #[arg(long)]
    true_game: String,
    #[arg(long, default_value = "pbe")]
    mss: Mss,
    #[arg(long, default_value_t = 2)]
    growth: usize,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed of a generated true game; defaults to --seed.
    #[arg(long)]
    game_seed: Option<u64>,
    #[arg(long, default_value_t = 10.0)]
    umax: f64,
    /// `exact` or `mc:N`.
    #[arg(long, default_value = "exact")]
    estimation: String,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    log: Option<PathBuf>,
}

/// Failure kinds that map to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
    Verification,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EFG_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}\n\nRun `pbe --help` for usage.");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen { what } => gen(what),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench::run(a),
        Command::Psro(a) => psro(a),
    }
}

/// Prints to stdout; a closed pipe (`pbe ... | head`) is not an error.
pub(crate) fn print_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => print_stdout(text),
    }
}

pub(crate) fn load_game(path: &Path) -> Result<Game> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    game_from_json(&text).with_context(|| format!("loading game {}", path.display()))
}

fn gen(what: GenCommand) -> Result<(), Failure> {
    match what {
        GenCommand::Gengoof(a) | GenCommand::PrivateGengoof(a) if a.k < 2 || !(a.umax > 0.0) => {
            Err(usage(anyhow!("need --k >= 2 and --umax > 0")))
        }
        GenCommand::Gengoof(a) => {
            let g =
                gen_goof(&GenGoofParams::new(a.k, a.umax, a.seed)).map_err(anyhow::Error::from)?;
            Ok(write_out(a.out.as_deref(), &game_to_json(&g))?)
        }
        GenCommand::PrivateGengoof(a) => {
            let g = private_gen_goof(&GenGoofParams::new(a.k, a.umax, a.seed))
                .map_err(anyhow::Error::from)?;
            Ok(write_out(a.out.as_deref(), &game_to_json(&g))?)
        }
        GenCommand::Bargain {
            preset,
            pool,
            seed,
            export,
            out,
        } => {
            let params = match preset {
                Preset::Paper => BargainParams::paper(pool, seed),
                Preset::Small => BargainParams::small(seed),
            };
            params.validate().map_err(usage)?;
            let text = match export {
                Some(n) => game_to_json(&bargain_export(&params, n).map_err(anyhow::Error::from)?),
                None => serde_json::to_string_pretty(&params).map_err(anyhow::Error::from)?,
            };
            Ok(write_out(out.as_deref(), &text)?)
        }
        GenCommand::Random {
            max_nodes,
            seed,
            out,
        } => {
            let g = random_game(&RandomGameParams::new(max_nodes, seed)).map_err(usage)?;
            Ok(write_out(out.as_deref(), &game_to_json(&g))?)
        }
        GenCommand::Fixture {
            name,
            out,
            assessment,
            mu_be,
        } => {
            let g = fixture(&name).ok_or_else(|| {
                usage(anyhow!(
                    "unknown fixture `{name}` (expected one of {})",
                    fixtures::FIXTURE_NAMES.join(", ")
                ))
            })?;
            write_out(out.as_deref(), &game_to_json(&g))?;
            if let Some(path) = assessment {
                let a = match name.as_str() {
                    "figure1" => fixtures::figure1_assessment(&g),
                    "figure3" => fixtures::figure3_assessment(&g, mu_be),
                    "assessments_example" => fixtures::assessments_example_assessment(&g),
                    _ => {
                        let s = pbe_core::efg::StrategyProfile::uniform(&g);
                        let mu = update_beliefs(&g, &s);
                        Assessment::new(s, mu)
                    }
                };
                write_out(Some(&path), &assessment_to_json(&g, &a, None))?;
            }
            Ok(())
        }
    }
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    if a.iters == 0 || a.checkpoint_every == Some(0) {
        return Err(usage(anyhow!(
            "--iters and --checkpoint-every must be at least 1"
        )));
    }
    let game = load_game(&a.game)?;
    let mut config = SolveConfig {
        seed: a.seed,
        off_path: a.off_path,
        ..SolveConfig::new(a.alg, a.iters)
    };
    if let Some(p) = a.plus {
        config.plus = p;
    }
    if let Some(k) = a.checkpoint_every {
        config = config.with_checkpoints(k);
    }
    let (assessment, log) = match a.alg {
        Algorithm::PbeCfr => pbe_cfr(&game, &config).map_err(anyhow::Error::from)?,
        Algorithm::Cfr => {
            let (s, log) = cfr(&game, &config).map_err(anyhow::Error::from)?;
            let mu = update_beliefs(&game, &s);
            (Assessment::new(s, mu), log)
        }
    };
    let meta = json!({
        "algorithm": a.alg.to_string(),
        "iterations": a.iters,
        "seed": a.seed,
        "checkpoint_every": a.checkpoint_every,
        "off_path": config.off_path.to_string(),
        "plus": config.plus,
        "version": VERSION,
        "worst_case_local_regret": worst_case_local_regret(&game, &assessment),
    });
    if let Some(path) = &a.log {
        let regret_col = match a.alg {
            Algorithm::PbeCfr => "worst_case_local_regret",
            Algorithm::Cfr => "exploitability",
        };
        let mut w =
            csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["t", "wall_ms", regret_col, "lemma2_bound"])
            .map_err(anyhow::Error::from)?;
        for c in &log.checkpoints {
            w.write_record([
                c.t.to_string(),
                c.wall_ms.to_string(),
                c.regret.to_string(),
                c.lemma2_bound.to_string(),
            ])
            .map_err(anyhow::Error::from)?;
        }
        w.flush().map_err(anyhow::Error::from)?;
    }
    log::info!("solved {} in {:.1} ms", a.game.display(), log.total_wall_ms);
    Ok(write_out(
        a.out.as_deref(),
        &assessment_to_json(&game, &assessment, Some(meta)),
    )?)
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    if !(a.tol >= 0.0) {
        return Err(usage(anyhow!("--tol must be non-negative")));
    }
    let game = load_game(&a.game)?;
    let text = fs::read_to_string(&a.assessment)
        .with_context(|| format!("reading {}", a.assessment.display()))?;
    let assessment = assessment_from_json_lenient(&game, &text)
        .with_context(|| format!("loading assessment {}", a.assessment.display()))?;
    let report = is_pbe(&game, &assessment, a.tol);
    let mut body = report.to_json(&game);
    body["config"] = json!({ "tol": a.tol, "version": VERSION });
    write_out(
        a.out.as_deref(),
        &serde_json::to_string_pretty(&body).map_err(anyhow::Error::from)?,
    )?;
    if report.pass() {
        Ok(())
    } else {
        eprintln!("not a PBE: failed {}", report.failures().join(", "));
        Err(Failure::Verification)
    }
}

/// Resolves `gengoof:K`, `private-gengoof:K` or a path.
pub(crate) fn true_game(spec: &str, umax: f64, seed: u64) -> Result<Game, Failure> {
    let generated = |k: &str, private: bool| -> Result<Game, Failure> {
        let k: usize = k.parse().map_err(|_| usage(anyhow!("bad K in `{spec}`")))?;
        let p = GenGoofParams::new(k, umax, seed);
        p.validate().map_err(usage)?;
        let g = if private {
            private_gen_goof(&p)
        } else {
            gen_goof(&p)
        };
        Ok(g.map_err(anyhow::Error::from)?)
    };
    if let Some(k) = spec.strip_prefix("gengoof:") {
        generated(k, false)
    } else if let Some(k) = spec.strip_prefix("private-gengoof:") {
        generated(k, true)
    } else if Path::new(spec).exists() {
        Ok(load_game(Path::new(spec))?)
    } else {
        Err(usage(anyhow!(
            "unknown true game `{spec}` (expected gengoof:K, private-gengoof:K or a file)"
        )))
    }
}

fn parse_estimation(s: &str) -> Result<Estimation> {
    if s == "exact" {
        return Ok(Estimation::Exact);
    }
    match s.strip_prefix("mc:").map(str::parse::<usize>) {
        Some(Ok(n)) if n > 0 => Ok(Estimation::MonteCarlo(n)),
        _ => bail!("bad estimation `{s}` (expected exact or mc:N with N >= 1)"),
    }
}

fn psro(a: PsroArgs) -> Result<(), Failure> {
    if a.growth == 0 || a.epochs == 0 || a.iters == 0 {
        return Err(usage(anyhow!(
            "--growth, --epochs and --iters must be at least 1"
        )));
    }
    let estimation = parse_estimation(&a.estimation).map_err(usage)?;
    let game = true_game(&a.true_game, a.umax, a.game_seed.unwrap_or(a.seed))?;
    let mut config = PsroConfig::new(a.mss, a.growth, a.epochs, a.iters, a.seed);
    config.estimation = estimation;
    if let Some(t) = a.temperature {
        config.temperature = t;
    }
    let records = run_psro(&game, &config).map_err(anyhow::Error::from)?;
    if let Some(path) = &a.log {
        let mut w =
            csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["epoch", "empirical_nodes", "eval_regret"])
            .map_err(anyhow::Error::from)?;
        for r in &records {
            w.write_record([
                r.epoch.to_string(),
                r.empirical_nodes.to_string(),
                r.eval_regret.to_string(),
            ])
            .map_err(anyhow::Error::from)?;
        }
        w.flush().map_err(anyhow::Error::from)?;
    }
    let summary = json!({
        "config": {
            "true_game": a.true_game,
            "game_seed": a.game_seed.unwrap_or(a.seed),
            "umax": a.umax,
            "psro": config,
            "version": VERSION,
        },
        "epochs": records,
    });
    Ok(print_stdout(
        &serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)?,
    )?)
}
