//! CFR and PBE-CFR for two-player games.

mod beliefs;
mod cfr;
mod flat;
mod pbe_cfr;
mod regret;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::efg::{EfgError, Game, InfosetId, StrategyProfile};

pub use beliefs::{positive_reach, update_beliefs, update_beliefs_by, OffPath};
pub use cfr::cfr;
pub use pbe_cfr::{pbe_cfr, traverse_with_beliefs};
pub use regret::{regret_matching, regret_matching_into};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Cfr,
    PbeCfr,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Cfr => "cfr",
            Algorithm::PbeCfr => "pbe-cfr",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cfr" => Ok(Algorithm::Cfr),
            "pbe-cfr" | "pbecfr" | "pbe_cfr" => Ok(Algorithm::PbeCfr),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub iterations: usize,
    /// Recorded for reproducibility; both solvers are deterministic.
    pub seed: u64,
    /// Record a checkpoint every this many iterations.
    pub checkpoint_every: Option<usize>,
    pub algorithm: Algorithm,
    /// Off-path belief rule used by PBE-CFR.
    pub off_path: OffPath,
    /// Floor cumulative regrets at zero after every iteration (regret matching+).
    /// On by default for PBE-CFR, off for CFR.
    pub plus: bool,
}

impl SolveConfig {
    pub fn new(algorithm: Algorithm, iterations: usize) -> Self {
        SolveConfig {
            iterations,
            seed: 0,
            checkpoint_every: None,
            algorithm,
            off_path: OffPath::default(),
            plus: algorithm == Algorithm::PbeCfr,
        }
    }

    pub fn with_checkpoints(mut self, every: usize) -> Self {
        self.checkpoint_every = Some(every);
        self
    }

    fn validate(&self) -> Result<(), SolveError> {
        if self.iterations == 0 {
            return Err(SolveError::Config("iterations must be at least 1".into()));
        }
        if self.checkpoint_every == Some(0) {
            return Err(SolveError::Config(
                "checkpoint interval must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn is_checkpoint(&self, t: usize) -> bool {
        self.checkpoint_every
            .is_some_and(|k| t % k == 0 || t == self.iterations)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Game(#[from] EfgError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub t: usize,
    /// Solver time so far, excluding checkpoint evaluation.
    pub wall_ms: f64,
    /// Worst-case local regret (PBE-CFR) or exploitability (CFR) of the average.
    pub regret: f64,
    /// Largest per-infoset bound Δ_{u,j}·|A(I)|/√t.
    pub lemma2_bound: f64,
    /// Largest running immediate regret max_a R^t(I)(a)/t over infosets.
    pub max_immediate_regret: f64,
    /// Largest ratio of an infoset's running immediate regret to its own bound.
    pub lemma2_max_ratio: f64,
    pub lemma2_violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationLog {
    pub algorithm: Algorithm,
    pub checkpoints: Vec<Checkpoint>,
    pub total_wall_ms: f64,
}

/// Cumulative regrets and strategy weights, aligned with the flat strategy layout.
#[derive(Clone, Debug)]
pub struct RegretState {
    pub regrets: Vec<f64>,
    pub strategy_sum: Vec<f64>,
    pub current: StrategyProfile,
}

impl RegretState {
    pub fn new(game: &Game) -> Self {
        let current = StrategyProfile::uniform(game);
        let len = current.flat().len();
        RegretState {
            regrets: vec![0.0; len],
            strategy_sum: vec![0.0; len],
            current,
        }
    }

    pub fn floor_regrets(&mut self) {
        for r in &mut self.regrets {
            *r = r.max(0.0);
        }
    }

    /// Normalized strategy sums; uniform where nothing was accumulated.
    pub fn average(&self) -> StrategyProfile {
        let mut out = self.current.clone();
        let offsets = out.offsets().to_vec();
        let flat = out.flat_mut();
        for w in offsets.windows(2) {
            let (a, b) = (w[0], w[1]);
            let total: f64 = self.strategy_sum[a..b].iter().sum();
            for k in a..b {
                flat[k] = if total > 0.0 {
                    self.strategy_sum[k] / total
                } else {
                    1.0 / (b - a) as f64
                };
            }
        }
        out
    }

    /// Running immediate regret statistics after `t` iterations against the
    /// bound Δ_{u,j}·|A(I)|/√t: (max bound, max regret, max ratio, violations).
    pub fn lemma2(&self, game: &Game, t: usize) -> (f64, f64, f64, usize) {
        let delta: Vec<f64> = (1..=game.players())
            .map(|j| {
                let (lo, hi) = game.utility_range(j);
                hi - lo
            })
            .collect();
        let offsets = self.current.offsets();
        let sqrt_t = (t as f64).sqrt();
        let (mut max_bound, mut max_reg, mut max_ratio, mut violations) =
            (0.0f64, f64::NEG_INFINITY, 0.0f64, 0);
        for (i, s) in game.infosets().iter().enumerate() {
            let r = self.regrets[offsets[i]..offsets[i + 1]]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
                / t as f64;
            let bound = delta[s.player() - 1] * s.num_actions() as f64 / sqrt_t;
            max_bound = max_bound.max(bound);
            max_reg = max_reg.max(r);
            if bound > 0.0 {
                max_ratio = max_ratio.max(r / bound);
            }
            if r > bound + 1e-9 {
                violations += 1;
            }
        }
        (max_bound, max_reg, max_ratio, violations)
    }

    pub fn row(&self, infoset: InfosetId) -> &[f64] {
        self.current.row(infoset)
    }
}

fn require_two(game: &Game) -> Result<(), SolveError> {
    crate::efg::require_two_players(game).map_err(SolveError::from)
}
