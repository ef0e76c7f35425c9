//! Plausibility orders over game nodes.
//!
//! An order built from a profile has one relation per tree edge: `h ~ ha` when
//! the edge has positive probability (always for chance), `h ≺ ha` otherwise.
//! Belief updates add extra relations between arbitrary nodes. "x is at least
//! as plausible as y" holds iff y is reachable from x, where tree edges point
//! downwards, `~` edges also point upwards and extra relations point from the
//! more plausible node.
//!
//! Because downward edges always exist, everything below the highest ancestor
//! reachable through `~` edges (the node's *top*) is reachable, so queries only
//! search over extra relations.

use std::cell::RefCell;
use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::efg::{BeliefSystem, Game, InfosetId, NodeId, NodeKind, ProfileError, StrategyProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Plausibility {
    Equal,
    FirstMorePlausible,
    SecondMorePlausible,
    Incomparable,
}

/// What a belief row demands of a pair of members.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Requirement {
    Equal,
    FirstMorePlausible,
}

/// A belief requirement that conflicts with the order.
#[derive(Clone, Debug, PartialEq)]
pub struct Contradiction {
    pub infoset: InfosetId,
    pub first: NodeId,
    pub second: NodeId,
    pub required: Requirement,
    pub found: Plausibility,
    /// Chain of nodes, each at least as plausible as the next, establishing `found`.
    pub witness: Vec<NodeId>,
}

#[derive(Serialize)]
struct ContradictionJson<'a> {
    infoset: &'a str,
    first: &'a str,
    second: &'a str,
    required: Requirement,
    found: Plausibility,
    witness: Vec<&'a str>,
}

impl Contradiction {
    pub fn to_json(&self, game: &Game) -> serde_json::Value {
        let name = |n: NodeId| game.node(n).name();
        serde_json::to_value(ContradictionJson {
            infoset: game.infoset(self.infoset).name(),
            first: name(self.first),
            second: name(self.second),
            required: self.required,
            found: self.found,
            witness: self.witness.iter().map(|&n| name(n)).collect(),
        })
        .expect("contradiction serializes")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PlausibilityError {
    #[error("malformed beliefs: {0}")]
    Beliefs(#[from] ProfileError),
}

/// Result of extending an order with a belief system.
#[derive(Clone, Debug)]
pub enum OrderUpdate<'g> {
    Consistent(PlausibilityOrder<'g>),
    Contradiction(Contradiction),
}

#[derive(Clone, Debug)]
pub struct PlausibilityOrder<'g> {
    game: &'g Game,
    /// Whether the edge into each node is strict.
    strict: Vec<bool>,
    top: Vec<usize>,
    /// Extra relations as (more plausible, less plausible) pairs.
    extra: BTreeSet<(usize, usize)>,
    /// Whether a node's subtree holds the source of an extra relation.
    extra_below: Vec<bool>,
    /// Extra relations in insertion order: (more plausible, less plausible, strict).
    added: Vec<(NodeId, NodeId, bool)>,
    scratch: RefCell<Scratch>,
    pairs: Vec<Plausibility>,
}

/// Reusable search state; `seen[t] == stamp` marks blocks visited by the current search.
#[derive(Clone, Debug, Default)]
struct Scratch {
    stamp: u32,
    seen: Vec<u32>,
    prev: Vec<(usize, usize, usize)>,
    queue: Vec<usize>,
}

pub fn construct_order_given_profile<'g>(
    game: &'g Game,
    profile: &StrategyProfile,
) -> PlausibilityOrder<'g> {
    let n = game.num_nodes();
    let mut strict = vec![false; n];
    let mut top = vec![0usize; n];
    for (i, node) in game.nodes().iter().enumerate() {
        if let NodeKind::Player(_) = node.kind() {
            let row = profile.row(node.infoset().unwrap());
            for (c, &p) in node.children().iter().zip(row) {
                strict[c.0] = p <= 0.0;
            }
        }
        if i > 0 {
            let parent = node.parent().unwrap().0;
            top[i] = if strict[i] { i } else { top[parent] };
        }
    }
    PlausibilityOrder::from_parts(game, strict, top)
}

impl<'g> PlausibilityOrder<'g> {
    /// Order with no extra relations, from per-node edge strictness and tops.
    pub(crate) fn from_parts(game: &'g Game, strict: Vec<bool>, top: Vec<usize>) -> Self {
        let n = strict.len();
        PlausibilityOrder {
            game,
            strict,
            top,
            extra: BTreeSet::new(),
            extra_below: vec![false; n],
            added: Vec::new(),
            scratch: RefCell::default(),
            pairs: Vec::new(),
        }
    }

    pub fn game(&self) -> &'g Game {
        self.game
    }

    fn in_subtree(&self, t: usize, y: usize) -> bool {
        t <= y && y < self.game.nodes()[t].end
    }

    fn extra_in(&self, t: usize) -> impl Iterator<Item = &(usize, usize)> + '_ {
        self.extra.range((t, 0)..(self.game.nodes()[t].end, 0))
    }

    /// Breadth-first search over blocks; returns the chain of extra relations used.
    fn search(&self, x: usize, y: usize) -> Option<Vec<(usize, usize)>> {
        let t0 = self.top[x];
        if self.in_subtree(t0, y) {
            return Some(Vec::new());
        }
        if !self.extra_below[t0] {
            return None;
        }
        let mut guard = self.scratch.borrow_mut();
        let sc = &mut *guard;
        if sc.seen.is_empty() {
            sc.seen = vec![0; self.top.len()];
            sc.prev = vec![(0, 0, 0); self.top.len()];
        }
        sc.stamp = sc.stamp.wrapping_add(1);
        if sc.stamp == 0 {
            sc.seen.fill(0);
            sc.stamp = 1;
        }
        let stamp = sc.stamp;
        sc.queue.clear();
        sc.queue.push(t0);
        sc.seen[t0] = stamp;
        sc.prev[t0] = (usize::MAX, 0, 0);
        let mut head = 0;
        while head < sc.queue.len() {
            let t = sc.queue[head];
            head += 1;
            for &(s, d) in self.extra_in(t) {
                let td = self.top[d];
                // A block nested in `t` adds nothing: its range was just scanned.
                if self.in_subtree(t, td) || sc.seen[td] == stamp {
                    continue;
                }
                sc.seen[td] = stamp;
                sc.prev[td] = (t, s, d);
                if self.in_subtree(td, y) {
                    let mut chain = Vec::new();
                    let mut cur = td;
                    while sc.prev[cur].0 != usize::MAX {
                        let (pt, s, d) = sc.prev[cur];
                        chain.push((s, d));
                        cur = pt;
                    }
                    chain.reverse();
                    return Some(chain);
                }
                sc.queue.push(td);
            }
        }
        None
    }

    /// Whether `x` is at least as plausible as `y`.
    pub fn at_least_as_plausible(&self, x: NodeId, y: NodeId) -> bool {
        x == y || self.search(x.0, y.0).is_some()
    }

    pub fn compare(&self, h1: NodeId, h2: NodeId) -> Plausibility {
        if h1 == h2 {
            return Plausibility::Equal;
        }
        match (
            self.at_least_as_plausible(h1, h2),
            self.at_least_as_plausible(h2, h1),
        ) {
            (true, true) => Plausibility::Equal,
            (true, false) => Plausibility::FirstMorePlausible,
            (false, true) => Plausibility::SecondMorePlausible,
            (false, false) => Plausibility::Incomparable,
        }
    }

    fn up(&self, from: usize, to: usize, out: &mut Vec<NodeId>) {
        let mut cur = from;
        loop {
            if out.last() != Some(&NodeId(cur)) {
                out.push(NodeId(cur));
            }
            if cur == to {
                break;
            }
            cur = self.game.nodes()[cur].parent().unwrap().0;
        }
    }

    fn down(&self, from: usize, to: usize, out: &mut Vec<NodeId>) {
        let mut seg = Vec::new();
        self.up(to, from, &mut seg);
        for n in seg.into_iter().rev() {
            if out.last() != Some(&n) {
                out.push(n);
            }
        }
    }

    /// A chain of nodes from `x` to `y`, each at least as plausible as the next.
    pub fn witness_path(&self, x: NodeId, y: NodeId) -> Option<Vec<NodeId>> {
        if x == y {
            return Some(vec![x]);
        }
        let chain = self.search(x.0, y.0)?;
        let mut out = Vec::new();
        let mut cur = x.0;
        for (s, d) in chain {
            let t = self.top[cur];
            self.up(cur, t, &mut out);
            self.down(t, s, &mut out);
            out.push(NodeId(d));
            cur = d;
        }
        let t = self.top[cur];
        self.up(cur, t, &mut out);
        self.down(t, y.0, &mut out);
        Some(out)
    }

    fn mark_extra(&mut self, mut s: usize) {
        while !self.extra_below[s] {
            self.extra_below[s] = true;
            match self.game.nodes()[s].parent() {
                Some(p) => s = p.0,
                None => break,
            }
        }
    }

    fn add(&mut self, from: NodeId, to: NodeId, strict: bool) {
        self.extra.insert((from.0, to.0));
        self.mark_extra(from.0);
        if !strict {
            self.extra.insert((to.0, from.0));
            self.mark_extra(to.0);
        }
        self.added.push((from, to, strict));
    }

    /// Members of `infoset` not strictly less plausible than another member.
    /// Incomparable members count as equally plausible, so the result is never empty.
    pub fn most_plausible_members(&self, infoset: InfosetId) -> Vec<NodeId> {
        let members = self.game.infoset(infoset).members();
        let k = members.len();
        if k == 1 {
            return members.to_vec();
        }
        let mut dominated = vec![false; k];
        for i in 0..k {
            for j in i + 1..k {
                match self.compare(members[i], members[j]) {
                    Plausibility::FirstMorePlausible => dominated[j] = true,
                    Plausibility::SecondMorePlausible => dominated[i] = true,
                    _ => {}
                }
            }
        }
        members
            .iter()
            .zip(&dominated)
            .filter(|(_, d)| !**d)
            .map(|(m, _)| *m)
            .collect()
    }

    /// Flags the most plausible members of `infoset` in `best` and records
    /// them as equally plausible. Returns how many there are.
    pub(crate) fn settle_most_plausible(
        &mut self,
        infoset: InfosetId,
        best: &mut Vec<bool>,
    ) -> usize {
        let game = self.game;
        let members = game.infoset(infoset).members();
        let k = members.len();
        best.clear();
        best.resize(k, true);
        if k == 1 {
            return 1;
        }
        let mut rel = std::mem::take(&mut self.pairs);
        rel.clear();
        rel.resize(k * k, Plausibility::Equal);
        for i in 0..k {
            for j in i + 1..k {
                let r = self.compare(members[i], members[j]);
                rel[i * k + j] = r;
                match r {
                    Plausibility::FirstMorePlausible => best[j] = false,
                    Plausibility::SecondMorePlausible => best[i] = false,
                    _ => {}
                }
            }
        }
        let first = best
            .iter()
            .position(|&b| b)
            .expect("a maximal member exists");
        let mut count = 1;
        for j in first + 1..k {
            if best[j] {
                count += 1;
                if rel[first * k + j] == Plausibility::Incomparable {
                    self.add(members[first], members[j], false);
                }
            }
        }
        self.pairs = rel;
        count
    }

    /// All `~` pairs: tree edges with positive probability plus added relations.
    pub fn equal_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (i, n) in self.game.nodes().iter().enumerate().skip(1) {
            if !self.strict[i] {
                out.push((n.parent().unwrap(), NodeId(i)));
            }
        }
        out.extend(self.added.iter().filter(|r| !r.2).map(|r| (r.0, r.1)));
        out
    }

    /// All `≺` pairs, more plausible first: zero-probability tree edges,
    /// positive-versus-zero siblings, and added relations.
    pub fn strict_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (i, n) in self.game.nodes().iter().enumerate() {
            if !matches!(n.kind(), NodeKind::Player(_)) {
                continue;
            }
            for &c in n.children() {
                if self.strict[c.0] {
                    out.push((NodeId(i), c));
                }
            }
            for &v in n.children().iter().filter(|c| !self.strict[c.0]) {
                for &w in n.children().iter().filter(|c| self.strict[c.0]) {
                    out.push((v, w));
                }
            }
        }
        out.extend(self.added.iter().filter(|r| r.2).map(|r| (r.0, r.1)));
        out
    }

    /// Relations added by belief updates, in insertion order.
    pub fn added_relations(&self) -> &[(NodeId, NodeId, bool)] {
        &self.added
    }

    /// `{"equal": [[h1, h2], ...], "strict": [[h1, h2], ...]}` with node names.
    pub fn to_json(&self) -> serde_json::Value {
        let name = |n: NodeId| self.game.node(n).name().to_string();
        let pairs = |v: Vec<(NodeId, NodeId)>| -> Vec<[String; 2]> {
            v.into_iter().map(|(a, b)| [name(a), name(b)]).collect()
        };
        serde_json::json!({ "equal": pairs(self.equal_pairs()), "strict": pairs(self.strict_pairs()) })
    }
}

/// Extends `order` with the relations demanded by `beliefs`, or reports the first conflict.
pub fn update_order_given_belief<'g>(
    mut order: PlausibilityOrder<'g>,
    beliefs: &BeliefSystem,
) -> Result<OrderUpdate<'g>, PlausibilityError> {
    let game = order.game;
    beliefs.validate(game)?;
    for (i, s) in game.infosets().iter().enumerate() {
        if s.members().len() < 2 {
            continue;
        }
        let id = InfosetId(i);
        let row = beliefs.row(id);
        let v: Vec<NodeId> = s
            .members()
            .iter()
            .zip(row)
            .filter(|(_, p)| **p > 0.0)
            .map(|(m, _)| *m)
            .collect();
        let w: Vec<NodeId> = s
            .members()
            .iter()
            .zip(row)
            .filter(|(_, p)| **p <= 0.0)
            .map(|(m, _)| *m)
            .collect();
        let v0 = v[0];
        // Comparing against v0 suffices: once every member of V is tied to v0 they are mutually equal.
        for &h in &v[1..] {
            match order.compare(v0, h) {
                Plausibility::Equal => {}
                Plausibility::Incomparable => order.add(v0, h, false),
                found => {
                    let (a, b) = if found == Plausibility::FirstMorePlausible {
                        (v0, h)
                    } else {
                        (h, v0)
                    };
                    let witness = order.witness_path(a, b).unwrap_or_default();
                    return Ok(OrderUpdate::Contradiction(Contradiction {
                        infoset: id,
                        first: v0,
                        second: h,
                        required: Requirement::Equal,
                        found,
                        witness,
                    }));
                }
            }
        }
        for &h in &w {
            match order.compare(v0, h) {
                Plausibility::FirstMorePlausible => {}
                Plausibility::Incomparable => order.add(v0, h, true),
                found => {
                    let witness = order.witness_path(h, v0).unwrap_or_default();
                    return Ok(OrderUpdate::Contradiction(Contradiction {
                        infoset: id,
                        first: v0,
                        second: h,
                        required: Requirement::FirstMorePlausible,
                        found,
                        witness,
                    }));
                }
            }
        }
    }
    Ok(OrderUpdate::Consistent(order))
}
