//! A compact tree-exploiting PSRO loop with exact best responses.
//!
//! The empirical game is the true game restricted to a growing set of allowed
//! actions at each infoset. Every epoch solves it with the meta-strategy
//! solver, computes both players' best responses in the true game, and adds
//! best-response actions at up to `growth` sampled infosets per player.
//!
//! The gain of an infoset is the believed gain of the best response over the
//! target there, weighted by the infoset's counterfactual reach. Infosets
//! outside the model follow a pure policy: random at first, then each player's
//! best response to the other's latest best response.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::efg::{
    counterfactual_reach_all, node_values, regret, BeliefSystem, EfgError, Game, GameBuilder,
    GameError, Handle, InfosetId, NodeKind, StrategyProfile,
};
use crate::solvers::{
    cfr, pbe_cfr, update_beliefs_by, Algorithm, OffPath, SolveConfig, SolveError,
};

/// Meta-strategy solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mss {
    /// Nash equilibrium via CFR.
    Ne,
    /// Perfect Bayesian equilibrium via PBE-CFR.
    Pbe,
}

impl fmt::Display for Mss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mss::Ne => "ne",
            Mss::Pbe => "pbe",
        })
    }
}

impl FromStr for Mss {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ne" => Ok(Mss::Ne),
            "pbe" => Ok(Mss::Pbe),
            other => Err(format!(
                "unknown meta-strategy solver `{other}` (expected ne or pbe)"
            )),
        }
    }
}

/// How the empirical game's chance probabilities are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Estimation {
    Exact,
    /// `n` samples per chance node, add-one smoothed.
    MonteCarlo(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsroConfig {
    pub mss: Mss,
    /// Infosets sampled per player and epoch.
    pub growth: usize,
    pub epochs: usize,
    /// Solver iterations per epoch.
    pub iterations: usize,
    pub seed: u64,
    pub estimation: Estimation,
    /// Softmax temperature over gains scaled so the largest is 1.
    pub temperature: f64,
    pub max_nodes: usize,
}

impl PsroConfig {
    pub fn new(mss: Mss, growth: usize, epochs: usize, iterations: usize, seed: u64) -> Self {
        PsroConfig {
            mss,
            growth,
            epochs,
            iterations,
            seed,
            estimation: Estimation::Exact,
            temperature: 0.1,
            max_nodes: crate::efg::MAX_NODES,
        }
    }

    fn validate(&self) -> Result<(), PsroError> {
        if self.growth == 0 || self.epochs == 0 || self.iterations == 0 {
            return Err(PsroError::Config(
                "growth, epochs and iterations must be at least 1".into(),
            ));
        }
        if let Estimation::MonteCarlo(0) = self.estimation {
            return Err(PsroError::Config(
                "Monte Carlo estimation needs at least one sample".into(),
            ));
        }
        if !self.temperature.is_finite() {
            return Err(PsroError::Config("temperature must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PsroError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Game(#[from] EfgError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("empirical game is malformed: {0}")]
    Build(#[from] GameError),
    #[error("empirical game has {nodes} nodes, more than the cap of {cap}")]
    TooLarge { nodes: usize, cap: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub empirical_nodes: usize,
    pub empirical_infosets: usize,
    /// Regret in the true game of the empirical game's CFR solution.
    pub eval_regret: f64,
    /// Actions added at the end of this epoch, over both players.
    pub added: usize,
}

/// Samples up to `m` distinct indices with probabilities proportional to
/// `exp(gain / temperature)`, renormalized after each draw. A temperature of
/// zero or below picks the `m` largest gains, lowest index first on ties.
pub fn softmax_infoset_sampler(gains: &[f64], m: usize, temperature: f64, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    softmax_sample(gains, m, temperature, &mut rng)
}

fn softmax_sample<R: Rng>(gains: &[f64], m: usize, temperature: f64, rng: &mut R) -> Vec<usize> {
    let mut left: Vec<usize> = (0..gains.len()).collect();
    let mut out = Vec::with_capacity(m.min(gains.len()));
    while out.len() < m && !left.is_empty() {
        let best = left
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, |a, i| a.max(gains[i]));
        let pick = if temperature > 0.0 {
            let weights = left
                .iter()
                .map(|&i| ((gains[i] - best) / temperature).exp());
            match WeightedIndex::new(weights) {
                Ok(dist) => dist.sample(rng),
                Err(_) => left.iter().position(|&i| gains[i] == best).unwrap(),
            }
        } else {
            left.iter().position(|&i| gains[i] == best).unwrap()
        };
        out.push(left.remove(pick));
    }
    out
}

/// The true game restricted to allowed actions.
struct Empirical {
    game: Game,
    /// Empirical infoset -> true infoset.
    infoset_map: Vec<InfosetId>,
}

struct Model<'g> {
    truth: &'g Game,
    /// Allowed true action indices per true infoset, sorted; `None` outside the model.
    allowed: Vec<Option<Vec<usize>>>,
    /// Pure policy used outside the model and to seed newly reached infosets.
    outside: Vec<usize>,
}

impl<'g> Model<'g> {
    /// Gives every reachable infoset without allowed actions its outside action.
    fn close(&mut self) {
        let nodes = self.truth.nodes();
        let mut kept = vec![false; nodes.len()];
        kept[0] = true;
        for (i, n) in nodes.iter().enumerate() {
            if !kept[i] {
                continue;
            }
            match n.kind() {
                NodeKind::Terminal => {}
                NodeKind::Chance => n.children().iter().for_each(|c| kept[c.0] = true),
                NodeKind::Player(_) => {
                    let s = n.infoset().unwrap();
                    let allowed = self.allowed[s.0].get_or_insert_with(|| vec![self.outside[s.0]]);
                    for &a in allowed.iter() {
                        kept[n.children()[a].0] = true;
                    }
                }
            }
        }
    }

    fn build<R: Rng>(
        &self,
        estimation: Estimation,
        rng: &mut R,
        cap: usize,
    ) -> Result<Empirical, PsroError> {
        let truth = self.truth;
        let mut b = GameBuilder::new(truth.players());
        let mut handle: Vec<Option<Handle>> = vec![None; truth.num_nodes()];
        let mut members: Vec<Vec<Handle>> = vec![Vec::new(); truth.num_infosets()];
        let root = make(&mut b, truth.node(truth.root()));
        b.set_root(root);
        handle[0] = Some(root);
        for (i, n) in truth.nodes().iter().enumerate() {
            let Some(h) = handle[i] else {
                continue;
            };
            if b.num_nodes() > cap {
                return Err(PsroError::TooLarge {
                    nodes: b.num_nodes(),
                    cap,
                });
            }
            match n.kind() {
                NodeKind::Terminal => {}
                NodeKind::Chance => {
                    let probs = estimate(n.chance_probs(), estimation, rng);
                    for (k, (c, p)) in n.children().iter().zip(probs).enumerate() {
                        let ch = make(&mut b, truth.node(*c));
                        b.chance_edge(h, truth.edge_label(crate::efg::NodeId(i), k), ch, p);
                        handle[c.0] = Some(ch);
                    }
                }
                NodeKind::Player(_) => {
                    let s = n.infoset().unwrap();
                    members[s.0].push(h);
                    for &a in self.allowed[s.0].as_ref().expect("closed model") {
                        let c = n.children()[a];
                        let ch = make(&mut b, truth.node(c));
                        b.edge(h, truth.edge_label(crate::efg::NodeId(i), a), ch);
                        handle[c.0] = Some(ch);
                    }
                }
            }
        }
        let mut infoset_map = Vec::new();
        for (k, s) in truth.infosets().iter().enumerate() {
            if members[k].is_empty() {
                continue;
            }
            let allowed = self.allowed[k].as_ref().unwrap();
            b.infoset(
                s.name(),
                s.player(),
                &members[k],
                allowed.iter().map(|&a| s.actions()[a].as_str()),
            );
            infoset_map.push(InfosetId(k));
        }
        Ok(Empirical {
            game: b.build()?,
            infoset_map,
        })
    }

    /// A true-game profile playing `profile` inside the model and the outside policy elsewhere.
    fn lift(&self, emp: &Empirical, profile: &StrategyProfile) -> StrategyProfile {
        let mut out = StrategyProfile::pure(self.truth, &self.outside);
        for (k, &t) in emp.infoset_map.iter().enumerate() {
            let row = out.row_mut(t);
            row.fill(0.0);
            for (&a, &p) in self.allowed[t.0]
                .as_ref()
                .unwrap()
                .iter()
                .zip(profile.row(InfosetId(k)))
            {
                row[a] = p;
            }
        }
        out
    }

    /// True-game beliefs agreeing with `beliefs` on model infosets; `fallback` elsewhere.
    fn lift_beliefs(
        &self,
        emp: &Empirical,
        beliefs: &BeliefSystem,
        fallback: BeliefSystem,
    ) -> BeliefSystem {
        let mut out = fallback;
        for (k, &t) in emp.infoset_map.iter().enumerate() {
            let true_members = self.truth.infoset(t).members();
            let emp_set = emp.game.infoset(InfosetId(k));
            let mut row = vec![0.0; true_members.len()];
            for (m, &p) in emp_set.members().iter().zip(beliefs.row(InfosetId(k))) {
                let name = emp.game.node(*m).name();
                let node = self
                    .truth
                    .node_by_name(name)
                    .expect("empirical nodes come from the true game");
                row[self.truth.infoset(t).member_index(node).unwrap()] = p;
            }
            out.set_row(t, &row);
        }
        out
    }
}

fn make(b: &mut GameBuilder, n: &crate::efg::Node) -> Handle {
    match n.kind() {
        NodeKind::Chance => b.chance(n.name()),
        NodeKind::Player(j) => b.decision(n.name(), j),
        NodeKind::Terminal => b.terminal(n.name(), n.utility().to_vec()),
    }
}

fn estimate<R: Rng>(probs: &[f64], estimation: Estimation, rng: &mut R) -> Vec<f64> {
    match estimation {
        Estimation::Exact => probs.to_vec(),
        Estimation::MonteCarlo(n) => {
            let dist = WeightedIndex::new(probs).expect("valid chance distribution");
            let mut counts = vec![1.0; probs.len()];
            for _ in 0..n {
                counts[dist.sample(rng)] += 1.0;
            }
            let total = (n + probs.len()) as f64;
            counts.iter().map(|c| c / total).collect()
        }
    }
}

/// Player `player`'s pure strategy choosing, at every one of its infosets, the
/// action with the highest believed value given its own choices further down
/// and `profile` for everyone else. Returns the choices and each node's value
/// for the player under that strategy.
fn sequential_best_response(
    game: &Game,
    profile: &StrategyProfile,
    beliefs: &BeliefSystem,
    player: usize,
) -> (Vec<Option<usize>>, Vec<f64>) {
    enum Task {
        Eval(usize),
        Choose(usize),
        Finish(usize),
    }
    let nodes = game.nodes();
    let mut value = vec![0.0; nodes.len()];
    let mut done = vec![false; nodes.len()];
    let mut choice: Vec<Option<usize>> = vec![None; game.num_infosets()];
    let mut stack = vec![Task::Eval(0)];
    while let Some(task) = stack.pop() {
        match task {
            Task::Eval(x) => {
                if done[x] {
                    continue;
                }
                let n = &nodes[x];
                stack.push(Task::Finish(x));
                match n.kind() {
                    NodeKind::Terminal => {}
                    NodeKind::Player(j) if j == player => {
                        let is = n.infoset().unwrap().0;
                        if choice[is].is_none() {
                            stack.push(Task::Choose(is));
                            for m in game.infosets()[is].members() {
                                stack.extend(nodes[m.0].children().iter().map(|c| Task::Eval(c.0)));
                            }
                        }
                    }
                    _ => stack.extend(n.children().iter().map(|c| Task::Eval(c.0))),
                }
            }
            Task::Choose(is) => {
                if choice[is].is_some() {
                    continue;
                }
                let s = &game.infosets()[is];
                let mut best = (0, f64::NEG_INFINITY);
                for a in 0..s.num_actions() {
                    let q: f64 = s
                        .members()
                        .iter()
                        .zip(beliefs.row(InfosetId(is)))
                        .map(|(m, mu)| mu * value[nodes[m.0].children()[a].0])
                        .sum();
                    if q > best.1 {
                        best = (a, q);
                    }
                }
                choice[is] = Some(best.0);
            }
            Task::Finish(x) => {
                if done[x] {
                    continue;
                }
                let n = &nodes[x];
                value[x] = match n.kind() {
                    NodeKind::Terminal => n.utility()[player - 1],
                    NodeKind::Chance => n
                        .children()
                        .iter()
                        .zip(n.chance_probs())
                        .map(|(c, p)| p * value[c.0])
                        .sum(),
                    NodeKind::Player(j) if j == player => {
                        value[n.children()[choice[n.infoset().unwrap().0].unwrap()].0]
                    }
                    NodeKind::Player(_) => n
                        .children()
                        .iter()
                        .zip(profile.row(n.infoset().unwrap()))
                        .map(|(c, p)| p * value[c.0])
                        .sum(),
                };
                done[x] = true;
            }
        }
    }
    (choice, value)
}

/// Runs `config.epochs` epochs and records epochs `0..=epochs`.
pub fn run_psro(truth: &Game, config: &PsroConfig) -> Result<Vec<EpochRecord>, PsroError> {
    crate::efg::require_two_players(truth)?;
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let outside: Vec<usize> = truth
        .infosets()
        .iter()
        .map(|s| rng.random_range(0..s.num_actions()))
        .collect();
    let mut model = Model {
        truth,
        allowed: vec![None; truth.num_infosets()],
        outside,
    };
    let solve = |alg| SolveConfig {
        seed: config.seed,
        ..SolveConfig::new(alg, config.iterations)
    };
    let mut log = Vec::with_capacity(config.epochs + 1);
    for epoch in 0..=config.epochs {
        model.close();
        let emp = model.build(config.estimation, &mut rng, config.max_nodes)?;
        let (eval, _) = cfr(&emp.game, &solve(Algorithm::Cfr))?;
        let eval_true = model.lift(&emp, &eval);
        let eval_regret = regret(truth, &eval_true)?.total;
        let mut record = EpochRecord {
            epoch,
            empirical_nodes: emp.game.num_nodes(),
            empirical_infosets: emp.game.num_infosets(),
            eval_regret,
            added: 0,
        };
        log::info!(
            "psro epoch {epoch}: {} nodes, eval regret {eval_regret:.6}",
            record.empirical_nodes
        );
        if epoch == config.epochs {
            log.push(record);
            break;
        }
        let (target, beliefs) = match config.mss {
            Mss::Ne => {
                let t = eval_true;
                let mu = update_beliefs_by(truth, &t, OffPath::default());
                (t, mu)
            }
            Mss::Pbe => {
                let (a, _) = pbe_cfr(&emp.game, &solve(Algorithm::PbeCfr))?;
                let t = model.lift(&emp, &a.strategy);
                let mu = model.lift_beliefs(
                    &emp,
                    &a.beliefs,
                    update_beliefs_by(truth, &t, OffPath::default()),
                );
                (t, mu)
            }
        };
        let base = node_values(truth, &target);
        let mut additions = Vec::new();
        let mut responses = Vec::with_capacity(2);
        for j in 1..=2 {
            let (choices, values) = sequential_best_response(truth, &target, &beliefs, j);
            let cf = counterfactual_reach_all(truth, &target, j);
            let mut candidates = Vec::new();
            let mut gains = Vec::new();
            for s in truth.player_infosets(j) {
                let (Some(allowed), Some(a)) = (&model.allowed[s.0], choices[s.0]) else {
                    continue;
                };
                if allowed.contains(&a) {
                    continue;
                }
                let members = truth.infoset(s).members();
                let reach: f64 = members.iter().map(|h| cf[h.0]).sum();
                let believed: f64 = members
                    .iter()
                    .zip(beliefs.row(s))
                    .map(|(h, &mu)| mu * (values[h.0] - base.get(*h, j)))
                    .sum();
                candidates.push((s, a));
                gains.push(reach * believed);
            }
            let top = gains.iter().copied().fold(0.0, f64::max);
            if top > 0.0 {
                gains.iter_mut().for_each(|g| *g /= top);
            }
            for k in softmax_sample(&gains, config.growth, config.temperature, &mut rng) {
                additions.push(candidates[k]);
            }
            responses.push(choices);
        }
        // Outside the model each player now answers the other's best response.
        for j in 1..=2 {
            let mut against = target.clone();
            for (s, c) in responses[2 - j].iter().enumerate() {
                if let Some(c) = *c {
                    let row = against.row_mut(InfosetId(s));
                    row.fill(0.0);
                    row[c] = 1.0;
                }
            }
            let mu = update_beliefs_by(truth, &against, OffPath::default());
            let (choices, _) = sequential_best_response(truth, &against, &mu, j);
            for (s, c) in choices.iter().enumerate() {
                if let Some(c) = *c {
                    model.outside[s] = c;
                }
            }
        }
        record.added = additions.len();
        for (s, a) in additions {
            let allowed = model.allowed[s.0].as_mut().unwrap();
            let pos = allowed.binary_search(&a).unwrap_err();
            allowed.insert(pos, a);
        }
        log.push(record);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_edge_cases() {
        assert_eq!(softmax_infoset_sampler(&[0.3], 4, 1.0, 0), vec![0]);
        assert_eq!(softmax_infoset_sampler(&[], 2, 1.0, 0), Vec::<usize>::new());
        assert_eq!(
            softmax_infoset_sampler(&[1.0, 5.0, 3.0, 5.0], 2, 0.0, 9),
            vec![1, 3]
        );
        assert_eq!(
            softmax_infoset_sampler(&[1.0, 5.0, 3.0], 2, 1e-9, 9),
            vec![1, 2]
        );
        let s = softmax_infoset_sampler(&[1.0, 2.0, 3.0, 4.0], 3, 1.0, 1);
        assert_eq!(s.len(), 3);
        let mut d = s.clone();
        d.sort();
        d.dedup();
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn mss_parses() {
        assert_eq!("pbe".parse::<Mss>().unwrap(), Mss::Pbe);
        assert!("x".parse::<Mss>().is_err());
    }
}
