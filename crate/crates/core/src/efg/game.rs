//! Game trees stored in a flat preorder arena.
//!
//! After [`GameBuilder::build`] the root has id 0, every parent precedes its
//! children, and the subtree of node `h` is the id range `h..subtree_end(h)`.
//! Forward iteration is therefore a top-down pass and reverse iteration a
//! bottom-up pass.

use std::collections::HashMap;
use std::fmt;

use super::error::GameError;

/// Index of a node in the game arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Index of an information set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InfosetId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for InfosetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I{}", self.0)
    }
}

/// Who moves at a node. Players are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Chance,
    Player(usize),
    Terminal,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub(crate) name: String,
    pub(crate) kind: NodeKind,
    pub(crate) parent: Option<NodeId>,
    /// Position of this node among its parent's children.
    pub(crate) edge: usize,
    pub(crate) children: Vec<NodeId>,
    /// Outcome labels, chance nodes only. Decision nodes use their infoset's actions.
    pub(crate) labels: Vec<String>,
    pub(crate) chance: Vec<f64>,
    pub(crate) utility: Vec<f64>,
    pub(crate) infoset: Option<InfosetId>,
    pub(crate) end: usize,
    pub(crate) depth: usize,
}

impl Node {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn kind(&self) -> NodeKind {
        self.kind
    }
    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }
    /// Index of the edge leading into this node from its parent.
    pub fn incoming_edge(&self) -> usize {
        self.edge
    }
    pub fn children(&self) -> &[NodeId] {
        &self.children
    }
    pub fn infoset(&self) -> Option<InfosetId> {
        self.infoset
    }
    /// Utility vector indexed by `player - 1`; empty for non-terminals.
    pub fn utility(&self) -> &[f64] {
        &self.utility
    }
    /// Outcome probabilities aligned with `children`; empty unless chance.
    pub fn chance_probs(&self) -> &[f64] {
        &self.chance
    }
    pub fn is_terminal(&self) -> bool {
        self.kind == NodeKind::Terminal
    }
    pub fn depth(&self) -> usize {
        self.depth
    }
}

#[derive(Clone, Debug)]
pub struct Infoset {
    pub(crate) name: String,
    pub(crate) player: usize,
    pub(crate) members: Vec<NodeId>,
    pub(crate) actions: Vec<String>,
}

impl Infoset {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn player(&self) -> usize {
        self.player
    }
    /// Members in increasing node-id order.
    pub fn members(&self) -> &[NodeId] {
        &self.members
    }
    pub fn actions(&self) -> &[String] {
        &self.actions
    }
    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }
    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == label)
    }
    pub fn member_index(&self, node: NodeId) -> Option<usize> {
        self.members.binary_search(&node).ok()
    }
}

/// An immutable extensive-form game.
#[derive(Clone, Debug)]
pub struct Game {
    pub(crate) players: usize,
    pub(crate) nodes: Vec<Node>,
    pub(crate) infosets: Vec<Infoset>,
    node_names: HashMap<String, NodeId>,
    infoset_names: HashMap<String, InfosetId>,
}

impl Game {
    pub fn players(&self) -> usize {
        self.players
    }
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }
    pub fn num_infosets(&self) -> usize {
        self.infosets.len()
    }
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }
    pub fn get_node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0)
    }
    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }
    pub fn infoset(&self, id: InfosetId) -> &Infoset {
        &self.infosets[id.0]
    }
    pub fn get_infoset(&self, id: InfosetId) -> Option<&Infoset> {
        self.infosets.get(id.0)
    }
    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.node_names.get(name).copied()
    }
    pub fn infoset_by_name(&self, name: &str) -> Option<InfosetId> {
        self.infoset_names.get(name).copied()
    }
    /// One past the last node of `id`'s subtree.
    pub fn subtree_end(&self, id: NodeId) -> usize {
        self.nodes[id.0].end
    }
    pub fn is_ancestor_or_self(&self, anc: NodeId, desc: NodeId) -> bool {
        anc.0 <= desc.0 && desc.0 < self.nodes[anc.0].end
    }
    /// Label of the `k`-th outgoing edge of `id`.
    pub fn edge_label(&self, id: NodeId, k: usize) -> &str {
        let n = &self.nodes[id.0];
        match n.kind {
            NodeKind::Chance => &n.labels[k],
            NodeKind::Player(_) => &self.infosets[n.infoset.expect("decision node").0].actions[k],
            NodeKind::Terminal => panic!("terminal node has no edges"),
        }
    }
    pub fn player_infosets(&self, player: usize) -> impl Iterator<Item = InfosetId> + '_ {
        self.infosets
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.player == player)
            .map(|(i, _)| InfosetId(i))
    }
    pub fn terminals(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == NodeKind::Terminal)
            .map(|(i, _)| NodeId(i))
    }
    /// (min, max) of player `player`'s utility over all leaves.
    pub fn utility_range(&self, player: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for n in &self.nodes {
            if n.kind == NodeKind::Terminal {
                let u = n.utility[player - 1];
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        (lo, hi)
    }
    pub fn max_actions(&self) -> usize {
        self.infosets
            .iter()
            .map(|s| s.actions.len())
            .max()
            .unwrap_or(0)
    }
    /// Path of edge indices from the root to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<(NodeId, usize)> {
        let mut out = Vec::with_capacity(self.nodes[id.0].depth);
        let mut cur = id;
        while let Some(p) = self.nodes[cur.0].parent {
            out.push((p, self.nodes[cur.0].edge));
            cur = p;
        }
        out.reverse();
        out
    }
}

/// Handle to a node under construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Handle(usize);

#[derive(Clone, Debug)]
struct BNode {
    name: String,
    kind: NodeKind,
    children: Vec<(String, usize, f64)>,
    utility: Vec<f64>,
    parent: Option<usize>,
    parent_conflict: bool,
}

#[derive(Clone, Debug)]
struct BInfoset {
    name: String,
    player: usize,
    members: Vec<usize>,
    actions: Vec<String>,
}

/// Incremental game construction; all invariants are checked in [`build`](Self::build).
#[derive(Clone, Debug)]
pub struct GameBuilder {
    players: usize,
    nodes: Vec<BNode>,
    infosets: Vec<BInfoset>,
    root: Option<usize>,
}

/// Hard cap on game size.
pub const MAX_NODES: usize = 10_000_000;

impl GameBuilder {
    pub fn new(players: usize) -> Self {
        GameBuilder {
            players,
            nodes: Vec::new(),
            infosets: Vec::new(),
            root: None,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn push(&mut self, name: String, kind: NodeKind, utility: Vec<f64>) -> Handle {
        self.nodes.push(BNode {
            name,
            kind,
            children: Vec::new(),
            utility,
            parent: None,
            parent_conflict: false,
        });
        Handle(self.nodes.len() - 1)
    }

    pub fn chance(&mut self, name: impl Into<String>) -> Handle {
        self.push(name.into(), NodeKind::Chance, Vec::new())
    }

    pub fn decision(&mut self, name: impl Into<String>, player: usize) -> Handle {
        self.push(name.into(), NodeKind::Player(player), Vec::new())
    }

    pub fn terminal(&mut self, name: impl Into<String>, utility: Vec<f64>) -> Handle {
        self.push(name.into(), NodeKind::Terminal, utility)
    }

    /// Marks the root explicitly. Without it the unique parentless node is used.
    pub fn set_root(&mut self, root: Handle) {
        self.root = Some(root.0);
    }

    fn attach(&mut self, parent: Handle, label: String, child: Handle, prob: f64) {
        self.nodes[parent.0].children.push((label, child.0, prob));
        let c = &mut self.nodes[child.0];
        if c.parent.is_some() {
            c.parent_conflict = true;
        }
        c.parent = Some(parent.0);
    }

    /// Adds a decision edge.
    pub fn edge(&mut self, parent: Handle, label: impl Into<String>, child: Handle) {
        self.attach(parent, label.into(), child, f64::NAN);
    }

    /// Adds a chance edge with its probability.
    pub fn chance_edge(
        &mut self,
        parent: Handle,
        label: impl Into<String>,
        child: Handle,
        prob: f64,
    ) {
        self.attach(parent, label.into(), child, prob);
    }

    pub fn infoset<S: Into<String>>(
        &mut self,
        name: impl Into<String>,
        player: usize,
        members: &[Handle],
        actions: impl IntoIterator<Item = S>,
    ) {
        self.infosets.push(BInfoset {
            name: name.into(),
            player,
            members: members.iter().map(|h| h.0).collect(),
            actions: actions.into_iter().map(Into::into).collect(),
        });
    }

    pub fn build(self) -> Result<Game, GameError> {
        let GameBuilder {
            players,
            nodes: bnodes,
            infosets: binfosets,
            root,
        } = self;
        if players == 0 {
            return Err(GameError::NoPlayers);
        }
        if bnodes.is_empty() {
            return Err(GameError::Empty);
        }
        if bnodes.len() > MAX_NODES {
            return Err(GameError::TooLarge(bnodes.len()));
        }

        let mut node_names: HashMap<String, NodeId> = HashMap::with_capacity(bnodes.len());
        for (i, n) in bnodes.iter().enumerate() {
            if node_names.insert(n.name.clone(), NodeId(i)).is_some() {
                return Err(GameError::DuplicateNode(n.name.clone()));
            }
            if n.parent_conflict {
                return Err(GameError::MultipleParents(n.name.clone()));
            }
        }
        let root = match root {
            Some(r) => {
                if let Some(p) = bnodes[r].parent {
                    return Err(GameError::RootHasParent(
                        bnodes[r].name.clone(),
                        bnodes[p].name.clone(),
                    ));
                }
                r
            }
            None => {
                let mut roots = bnodes
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| n.parent.is_none());
                let first = roots.next().map(|(i, _)| i).ok_or(GameError::NoRoot)?;
                if let Some((j, _)) = roots.next() {
                    return Err(GameError::MultipleRoots(
                        bnodes[first].name.clone(),
                        bnodes[j].name.clone(),
                    ));
                }
                first
            }
        };

        // Per-node checks that do not need infosets.
        for n in &bnodes {
            match n.kind {
                NodeKind::Terminal => {
                    if !n.children.is_empty() {
                        return Err(GameError::TerminalWithChildren(n.name.clone()));
                    }
                    if n.utility.len() != players {
                        return Err(GameError::UtilityLength {
                            node: n.name.clone(),
                            expected: players,
                            found: n.utility.len(),
                        });
                    }
                    if n.utility.iter().any(|u| !u.is_finite()) {
                        return Err(GameError::NonFiniteUtility(n.name.clone()));
                    }
                }
                NodeKind::Chance => {
                    if n.children.is_empty() {
                        return Err(GameError::NoChildren(n.name.clone()));
                    }
                    let mut sum = 0.0;
                    for (label, _, p) in &n.children {
                        if !(p.is_finite() && *p > 0.0) {
                            return Err(GameError::ChanceProbability {
                                node: n.name.clone(),
                                detail: format!("outcome `{label}` has probability {p}"),
                            });
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > 1e-12 {
                        return Err(GameError::ChanceProbability {
                            node: n.name.clone(),
                            detail: format!("probabilities sum to {sum}"),
                        });
                    }
                }
                NodeKind::Player(j) => {
                    if j == 0 || j > players {
                        return Err(GameError::BadPlayer {
                            name: n.name.clone(),
                            player: j,
                        });
                    }
                    if n.children.is_empty() {
                        return Err(GameError::NoChildren(n.name.clone()));
                    }
                }
            }
            if !n.utility.is_empty() && n.kind != NodeKind::Terminal {
                return Err(GameError::UtilityOnNonTerminal(n.name.clone()));
            }
            let mut labels: Vec<&str> = n.children.iter().map(|c| c.0.as_str()).collect();
            labels.sort_unstable();
            if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
                return Err(GameError::DuplicateLabel {
                    node: n.name.clone(),
                    label: w[0].to_string(),
                });
            }
        }

        // Infoset membership and action sets.
        let mut node_infoset: Vec<Option<usize>> = vec![None; bnodes.len()];
        let mut infoset_names: HashMap<String, InfosetId> = HashMap::with_capacity(binfosets.len());
        for (k, s) in binfosets.iter().enumerate() {
            if infoset_names.insert(s.name.clone(), InfosetId(k)).is_some() {
                return Err(GameError::DuplicateInfoset(s.name.clone()));
            }
            if s.player == 0 || s.player > players {
                return Err(GameError::BadPlayer {
                    name: s.name.clone(),
                    player: s.player,
                });
            }
            if s.members.is_empty() {
                return Err(GameError::EmptyInfoset(s.name.clone()));
            }
            if s.actions.is_empty() {
                return Err(GameError::NoActions(s.name.clone()));
            }
            let mut sorted_actions: Vec<&str> = s.actions.iter().map(String::as_str).collect();
            sorted_actions.sort_unstable();
            if let Some(w) = sorted_actions.windows(2).find(|w| w[0] == w[1]) {
                return Err(GameError::DuplicateLabel {
                    node: s.name.clone(),
                    label: w[0].to_string(),
                });
            }
            for &m in &s.members {
                let n = &bnodes[m];
                if n.kind != NodeKind::Player(s.player) {
                    return Err(GameError::OwnerMismatch {
                        infoset: s.name.clone(),
                        node: n.name.clone(),
                    });
                }
                if node_infoset[m].replace(k).is_some() {
                    return Err(GameError::InMultipleInfosets(n.name.clone()));
                }
                let mut labels: Vec<&str> = n.children.iter().map(|c| c.0.as_str()).collect();
                labels.sort_unstable();
                if labels != sorted_actions {
                    return Err(GameError::ActionMismatch {
                        infoset: s.name.clone(),
                        node: n.name.clone(),
                    });
                }
            }
        }
        for (i, n) in bnodes.iter().enumerate() {
            if matches!(n.kind, NodeKind::Player(_)) && node_infoset[i].is_none() {
                return Err(GameError::NotInInfoset(n.name.clone()));
            }
        }

        // Preorder relabeling; decision children follow infoset action order.
        let mut order: Vec<usize> = Vec::with_capacity(bnodes.len());
        let mut new_id = vec![usize::MAX; bnodes.len()];
        let mut stack = vec![root];
        let mut child_order: Vec<Vec<usize>> = vec![Vec::new(); bnodes.len()];
        while let Some(b) = stack.pop() {
            if new_id[b] != usize::MAX {
                return Err(GameError::Cycle(bnodes[b].name.clone()));
            }
            new_id[b] = order.len();
            order.push(b);
            let n = &bnodes[b];
            let kids: Vec<usize> = match n.kind {
                NodeKind::Player(_) => {
                    let s = &binfosets[node_infoset[b].unwrap()];
                    s.actions
                        .iter()
                        .map(|a| n.children.iter().find(|c| &c.0 == a).unwrap().1)
                        .collect()
                }
                _ => n.children.iter().map(|c| c.1).collect(),
            };
            for &c in kids.iter().rev() {
                stack.push(c);
            }
            child_order[b] = kids;
        }
        if order.len() != bnodes.len() {
            let lost = bnodes
                .iter()
                .enumerate()
                .find(|(i, _)| new_id[*i] == usize::MAX)
                .unwrap()
                .1;
            return Err(GameError::Unreachable(lost.name.clone()));
        }

        let mut nodes: Vec<Node> = Vec::with_capacity(order.len());
        for &b in &order {
            let n = &bnodes[b];
            let children: Vec<NodeId> = child_order[b].iter().map(|&c| NodeId(new_id[c])).collect();
            let (labels, chance) = if n.kind == NodeKind::Chance {
                (
                    n.children.iter().map(|c| c.0.clone()).collect(),
                    n.children.iter().map(|c| c.2).collect(),
                )
            } else {
                (Vec::new(), Vec::new())
            };
            nodes.push(Node {
                name: n.name.clone(),
                kind: n.kind,
                parent: n.parent.map(|p| NodeId(new_id[p])),
                edge: 0,
                children,
                labels,
                chance,
                utility: n.utility.clone(),
                infoset: node_infoset[b].map(InfosetId),
                end: 0,
                depth: 0,
            });
        }
        for i in 0..nodes.len() {
            for k in 0..nodes[i].children.len() {
                let c = nodes[i].children[k].0;
                nodes[c].edge = k;
                nodes[c].depth = nodes[i].depth + 1;
            }
        }
        for i in (0..nodes.len()).rev() {
            let end = nodes[i].children.last().map_or(i + 1, |c| nodes[c.0].end);
            nodes[i].end = end;
        }
        for v in node_names.values_mut() {
            *v = NodeId(new_id[v.0]);
        }
        let infosets: Vec<Infoset> = binfosets
            .into_iter()
            .map(|s| {
                let mut members: Vec<NodeId> =
                    s.members.iter().map(|&m| NodeId(new_id[m])).collect();
                members.sort_unstable();
                Infoset {
                    name: s.name,
                    player: s.player,
                    members,
                    actions: s.actions,
                }
            })
            .collect();

        let game = Game {
            players,
            nodes,
            infosets,
            node_names,
            infoset_names,
        };
        check_perfect_recall(&game)?;
        Ok(game)
    }
}

/// The sequence of (infoset, action) pairs of `player`'s own moves on the path to `h`.
pub fn own_history(game: &Game, h: NodeId, player: usize) -> Vec<(InfosetId, usize)> {
    game.path_to(h)
        .into_iter()
        .filter_map(|(p, k)| match game.node(p).kind {
            NodeKind::Player(j) if j == player => Some((game.node(p).infoset.unwrap(), k)),
            _ => None,
        })
        .collect()
}

fn check_perfect_recall(game: &Game) -> Result<(), GameError> {
    for s in &game.infosets {
        let first = own_history(game, s.members[0], s.player);
        for &m in &s.members[1..] {
            if own_history(game, m, s.player) != first {
                return Err(GameError::PerfectRecall {
                    infoset: s.name.clone(),
                    first: game.node(s.members[0]).name.clone(),
                    second: game.node(m).name.clone(),
                });
            }
        }
    }
    Ok(())
}
