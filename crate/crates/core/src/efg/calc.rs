//! Reach probabilities, expected and believed utilities, best responses and regret.

use super::error::{EfgError, ProfileError};
use super::game::{Game, InfosetId, NodeId, NodeKind};
use super::profile::{Assessment, StrategyProfile};

/// Reach probability of a node split into chance and per-player factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Reach {
    pub chance: f64,
    /// `players[j - 1]` is player j's own contribution.
    pub players: Vec<f64>,
    pub product: f64,
}

impl Reach {
    pub fn player(&self, j: usize) -> f64 {
        self.players[j - 1]
    }

    /// Product of everything except player `j`'s own factor.
    pub fn others(&self, j: usize) -> f64 {
        self.chance
            * self
                .players
                .iter()
                .enumerate()
                .filter(|(i, _)| i + 1 != j)
                .map(|(_, p)| p)
                .product::<f64>()
    }
}

fn check_node(game: &Game, node: NodeId) -> Result<(), EfgError> {
    if node.0 >= game.num_nodes() {
        return Err(EfgError::UnknownNode(node.0));
    }
    Ok(())
}

fn check_infoset(game: &Game, infoset: InfosetId) -> Result<(), EfgError> {
    if infoset.0 >= game.num_infosets() {
        return Err(EfgError::UnknownInfoset(infoset.0));
    }
    Ok(())
}

fn check_shape(game: &Game, profile: &StrategyProfile) -> Result<(), EfgError> {
    if profile.num_rows() != game.num_infosets() {
        return Err(ProfileError::RowCount {
            expected: game.num_infosets(),
            found: profile.num_rows(),
        }
        .into());
    }
    Ok(())
}

fn check_player(game: &Game, player: usize) -> Result<(), EfgError> {
    if player == 0 || player > game.players() {
        return Err(EfgError::BadPlayer(player));
    }
    Ok(())
}

pub fn reach_probability(
    game: &Game,
    profile: &StrategyProfile,
    node: NodeId,
) -> Result<Reach, EfgError> {
    check_node(game, node)?;
    check_shape(game, profile)?;
    let mut r = Reach {
        chance: 1.0,
        players: vec![1.0; game.players()],
        product: 1.0,
    };
    for (p, k) in game.path_to(node) {
        let n = game.node(p);
        match n.kind() {
            NodeKind::Chance => r.chance *= n.chance_probs()[k],
            NodeKind::Player(j) => {
                let i = n.infoset().unwrap();
                let row = profile.row(i);
                if row.len() != game.infoset(i).num_actions() {
                    return Err(
                        ProfileError::MissingInfoset(game.infoset(i).name().to_string()).into(),
                    );
                }
                r.players[j - 1] *= row[k];
            }
            NodeKind::Terminal => unreachable!(),
        }
    }
    r.product = r.chance * r.players.iter().product::<f64>();
    Ok(r)
}

/// Product reach probability of every node, in one top-down pass.
pub fn reach_all(game: &Game, profile: &StrategyProfile) -> Vec<f64> {
    let mut r = vec![0.0; game.num_nodes()];
    r[0] = 1.0;
    for (i, n) in game.nodes().iter().enumerate() {
        let ri = r[i];
        match n.kind() {
            NodeKind::Chance => {
                for (c, p) in n.children().iter().zip(n.chance_probs()) {
                    r[c.0] = ri * p;
                }
            }
            NodeKind::Player(_) => {
                let row = profile.row(n.infoset().unwrap());
                for (c, p) in n.children().iter().zip(row) {
                    r[c.0] = ri * p;
                }
            }
            NodeKind::Terminal => {}
        }
    }
    r
}

/// Reach of every node excluding `player`'s own action probabilities.
pub fn counterfactual_reach_all(game: &Game, profile: &StrategyProfile, player: usize) -> Vec<f64> {
    let mut r = vec![0.0; game.num_nodes()];
    r[0] = 1.0;
    for (i, n) in game.nodes().iter().enumerate() {
        let ri = r[i];
        match n.kind() {
            NodeKind::Chance => {
                for (c, p) in n.children().iter().zip(n.chance_probs()) {
                    r[c.0] = ri * p;
                }
            }
            NodeKind::Player(j) if j == player => {
                for c in n.children() {
                    r[c.0] = ri;
                }
            }
            NodeKind::Player(_) => {
                let row = profile.row(n.infoset().unwrap());
                for (c, p) in n.children().iter().zip(row) {
                    r[c.0] = ri * p;
                }
            }
            NodeKind::Terminal => {}
        }
    }
    r
}

pub fn infoset_reach(
    game: &Game,
    profile: &StrategyProfile,
    infoset: InfosetId,
) -> Result<f64, EfgError> {
    check_infoset(game, infoset)?;
    let mut total = 0.0;
    for &m in game.infoset(infoset).members() {
        total += reach_probability(game, profile, m)?.product;
    }
    Ok(total)
}

/// Expected utility of every node for every player.
#[derive(Clone, Debug)]
pub struct NodeValues {
    players: usize,
    data: Vec<f64>,
}

impl NodeValues {
    /// U^E_j(σ | h).
    pub fn get(&self, node: NodeId, player: usize) -> f64 {
        self.data[node.0 * self.players + player - 1]
    }

    pub fn vector(&self, node: NodeId) -> &[f64] {
        &self.data[node.0 * self.players..(node.0 + 1) * self.players]
    }
}

/// One bottom-up pass computing U^E(σ | h) at every node.
pub fn node_values(game: &Game, profile: &StrategyProfile) -> NodeValues {
    let np = game.players();
    let mut data = vec![0.0; game.num_nodes() * np];
    for i in (0..game.num_nodes()).rev() {
        let n = &game.nodes()[i];
        match n.kind() {
            NodeKind::Terminal => data[i * np..(i + 1) * np].copy_from_slice(n.utility()),
            NodeKind::Chance | NodeKind::Player(_) => {
                let probs = match n.kind() {
                    NodeKind::Chance => n.chance_probs(),
                    _ => profile.row(n.infoset().unwrap()),
                };
                for j in 0..np {
                    let mut v = 0.0;
                    for (c, p) in n.children().iter().zip(probs) {
                        v += p * data[c.0 * np + j];
                    }
                    data[i * np + j] = v;
                }
            }
        }
    }
    NodeValues { players: np, data }
}

/// U^E(σ | from) for every player, evaluated over `from`'s subtree only.
pub fn expected_utility(
    game: &Game,
    profile: &StrategyProfile,
    from: NodeId,
) -> Result<Vec<f64>, EfgError> {
    check_node(game, from)?;
    check_shape(game, profile)?;
    let np = game.players();
    let start = from.0;
    let end = game.subtree_end(from);
    let mut data = vec![0.0; (end - start) * np];
    for i in (start..end).rev() {
        let n = &game.nodes()[i];
        let li = i - start;
        if n.is_terminal() {
            data[li * np..(li + 1) * np].copy_from_slice(n.utility());
            continue;
        }
        let probs = match n.kind() {
            NodeKind::Chance => n.chance_probs(),
            _ => profile.row(n.infoset().unwrap()),
        };
        for j in 0..np {
            let mut v = 0.0;
            for (c, p) in n.children().iter().zip(probs) {
                v += p * data[(c.0 - start) * np + j];
            }
            data[li * np + j] = v;
        }
    }
    Ok(data[..np].to_vec())
}

/// Believed action utilities U^B_j(σ|_{I→a}, μ | I) for every action of `infoset`,
/// from precomputed node values.
pub fn believed_action_utilities(
    game: &Game,
    assessment: &Assessment,
    values: &NodeValues,
    infoset: InfosetId,
) -> Vec<f64> {
    let s = game.infoset(infoset);
    let mu = assessment.beliefs.row(infoset);
    let mut out = vec![0.0; s.num_actions()];
    for (&h, &m) in s.members().iter().zip(mu) {
        if m == 0.0 {
            continue;
        }
        for (a, c) in game.node(h).children().iter().enumerate() {
            out[a] += m * values.get(*c, s.player());
        }
    }
    out
}

/// U^B_j(σ, μ | I) from precomputed node values.
pub fn believed_utility_from(
    game: &Game,
    assessment: &Assessment,
    values: &NodeValues,
    infoset: InfosetId,
) -> f64 {
    let s = game.infoset(infoset);
    let mu = assessment.beliefs.row(infoset);
    s.members()
        .iter()
        .zip(mu)
        .map(|(&h, &m)| m * values.get(h, s.player()))
        .sum()
}

pub fn believed_utility(
    game: &Game,
    assessment: &Assessment,
    infoset: InfosetId,
) -> Result<f64, EfgError> {
    check_infoset(game, infoset)?;
    check_shape(game, &assessment.strategy)?;
    let s = game.infoset(infoset);
    let mu = assessment.beliefs.row(infoset);
    let mut total = 0.0;
    for (&h, &m) in s.members().iter().zip(mu) {
        total += m * expected_utility(game, &assessment.strategy, h)?[s.player() - 1];
    }
    Ok(total)
}

/// Believed utility of taking `action` at `infoset`. With perfect recall the
/// continuation below `ha` never revisits the infoset, so U^E(σ|_{I→a} | ha) = U^E(σ | ha).
pub fn believed_action_utility(
    game: &Game,
    assessment: &Assessment,
    infoset: InfosetId,
    action: usize,
) -> Result<f64, EfgError> {
    check_infoset(game, infoset)?;
    check_shape(game, &assessment.strategy)?;
    let s = game.infoset(infoset);
    if action >= s.num_actions() {
        return Err(EfgError::UnknownAction {
            infoset: infoset.0,
            action,
        });
    }
    let mu = assessment.beliefs.row(infoset);
    let mut total = 0.0;
    for (&h, &m) in s.members().iter().zip(mu) {
        let child = game.node(h).children()[action];
        total += m * expected_utility(game, &assessment.strategy, child)?[s.player() - 1];
    }
    Ok(total)
}

/// A pure best response for one player.
#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    pub player: usize,
    /// Chosen action at each of the player's infosets; `None` elsewhere.
    pub choices: Vec<Option<usize>>,
    pub value: f64,
}

impl BestResponse {
    /// `profile` with the player's rows replaced by the pure best response.
    pub fn apply(&self, profile: &StrategyProfile) -> StrategyProfile {
        let mut out = profile.clone();
        for (i, c) in self.choices.iter().enumerate() {
            if let Some(a) = c {
                let row = out.row_mut(InfosetId(i));
                row.fill(0.0);
                row[*a] = 1.0;
            }
        }
        out
    }
}

enum Task {
    Eval(usize),
    Finish(usize),
    Choose(usize),
}

/// Best-response search for `player` below the weighted start nodes.
///
/// Each start node carries an initial weight; below it, weights multiply
/// chance and opponent probabilities only. The player's choice at an infoset
/// maximizes the weighted value summed over all its members. Returns the
/// choices made and the sum of weighted values of the start nodes. Start
/// subtrees must be disjoint and every infoset of `player` met below them
/// must lie entirely below them, which perfect recall guarantees when the
/// starts are the root or the members of one of the player's infosets.
pub fn weighted_best_response(
    game: &Game,
    profile: &StrategyProfile,
    player: usize,
    starts: &[(NodeId, f64)],
) -> (Vec<Option<usize>>, f64) {
    let nn = game.num_nodes();
    let nodes = game.nodes();
    let mut weight = vec![0.0; nn];
    for &(s, w0) in starts {
        weight[s.0] = w0;
        for i in s.0..game.subtree_end(s) {
            let wi = weight[i];
            let n = &nodes[i];
            match n.kind() {
                NodeKind::Chance => {
                    for (c, p) in n.children().iter().zip(n.chance_probs()) {
                        weight[c.0] = wi * p;
                    }
                }
                NodeKind::Player(j) if j == player => {
                    for c in n.children() {
                        weight[c.0] = wi;
                    }
                }
                NodeKind::Player(_) => {
                    for (c, p) in n.children().iter().zip(profile.row(n.infoset().unwrap())) {
                        weight[c.0] = wi * p;
                    }
                }
                NodeKind::Terminal => {}
            }
        }
    }

    let mut value = vec![0.0; nn];
    let mut done = vec![false; nn];
    let mut choice: Vec<Option<usize>> = vec![None; game.num_infosets()];
    let mut stack: Vec<Task> = starts.iter().rev().map(|s| Task::Eval(s.0 .0)).collect();
    while let Some(task) = stack.pop() {
        match task {
            Task::Eval(x) => {
                if done[x] {
                    continue;
                }
                let n = &nodes[x];
                match n.kind() {
                    NodeKind::Terminal => {
                        value[x] = weight[x] * n.utility()[player - 1];
                        done[x] = true;
                    }
                    NodeKind::Player(j) if j == player => {
                        let is = n.infoset().unwrap().0;
                        stack.push(Task::Finish(x));
                        match choice[is] {
                            Some(a) => stack.push(Task::Eval(n.children()[a].0)),
                            None => {
                                stack.push(Task::Choose(is));
                                for &m in game.infosets()[is].members().iter().rev() {
                                    for c in nodes[m.0].children().iter().rev() {
                                        stack.push(Task::Eval(c.0));
                                    }
                                }
                            }
                        }
                    }
                    _ => {
                        stack.push(Task::Finish(x));
                        for c in n.children().iter().rev() {
                            stack.push(Task::Eval(c.0));
                        }
                    }
                }
            }
            Task::Choose(is) => {
                if choice[is].is_some() {
                    continue;
                }
                let s = &game.infosets()[is];
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                for a in 0..s.num_actions() {
                    let q: f64 = s
                        .members()
                        .iter()
                        .map(|m| value[nodes[m.0].children()[a].0])
                        .sum();
                    if q > best_v {
                        best_v = q;
                        best = a;
                    }
                }
                choice[is] = Some(best);
            }
            Task::Finish(x) => {
                if done[x] {
                    continue;
                }
                let n = &nodes[x];
                value[x] = match n.kind() {
                    NodeKind::Player(j) if j == player => {
                        value[n.children()[choice[n.infoset().unwrap().0].unwrap()].0]
                    }
                    _ => n.children().iter().map(|c| value[c.0]).sum(),
                };
                done[x] = true;
            }
        }
    }
    let total = starts.iter().map(|s| value[s.0 .0]).sum();
    (choice, total)
}

pub fn best_response(
    game: &Game,
    profile: &StrategyProfile,
    player: usize,
) -> Result<BestResponse, EfgError> {
    check_player(game, player)?;
    check_shape(game, profile)?;
    let (mut choices, value) = weighted_best_response(game, profile, player, &[(game.root(), 1.0)]);
    // Infosets the search never visited cannot occur below the root; keep the map total.
    for (i, s) in game.infosets().iter().enumerate() {
        if s.player() == player && choices[i].is_none() {
            choices[i] = Some(0);
        }
    }
    Ok(BestResponse {
        player,
        choices,
        value,
    })
}

/// Per-player regret of a profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Regret {
    /// `per_player[j - 1]` is player j's best-response gain.
    pub per_player: Vec<f64>,
    pub total: f64,
}

pub fn regret(game: &Game, profile: &StrategyProfile) -> Result<Regret, EfgError> {
    check_shape(game, profile)?;
    let root = node_values(game, profile);
    let mut per_player = Vec::with_capacity(game.players());
    for j in 1..=game.players() {
        let br = best_response(game, profile, j)?;
        per_player.push(br.value - root.get(game.root(), j));
    }
    let total = per_player.iter().sum();
    Ok(Regret { per_player, total })
}
