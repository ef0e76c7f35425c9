//! JSON interchange for games and assessments.
//!
//! Game files look like
//! `{"players": 2, "root": "r", "nodes": [...], "infosets": [...], "chance": {...}}`
//! where each node is `{"id", "owner", "infoset", "children": {label: id}, "utility"}`
//! and `owner` is a player number, `"chance"` or `"terminal"`. Assessment files are
//! `{"strategy": {infoset: {action: p}}, "beliefs": {infoset: {node: p}}}`; entries
//! left out of a row count as zero.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::error::{GameError, ProfileError};
use super::game::{Game, GameBuilder, Handle, InfosetId, NodeKind};
use super::profile::{Assessment, BeliefSystem, StrategyProfile};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {error}", line = fmt_line(*.line))]
    Game {
        line: Option<usize>,
        error: GameError,
    },
    #[error("line {line}: {error}", line = fmt_line(*.line))]
    Profile {
        line: Option<usize>,
        error: ProfileError,
    },
}

fn fmt_line(line: Option<usize>) -> String {
    line.map_or_else(|| "?".to_string(), |l| l.to_string())
}

impl LoadError {
    pub fn line(&self) -> Option<usize> {
        match self {
            LoadError::Json(e) => Some(e.line()),
            LoadError::Game { line, .. } | LoadError::Profile { line, .. } => *line,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Owner {
    Player(usize),
    Named(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeEntry {
    id: String,
    owner: Owner,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    infoset: Option<String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    children: IndexMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    utility: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InfosetEntry {
    id: String,
    owner: usize,
    members: Vec<String>,
    actions: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GameFile {
    players: usize,
    root: String,
    nodes: Vec<NodeEntry>,
    infosets: Vec<InfosetEntry>,
    #[serde(default)]
    chance: IndexMap<String, IndexMap<String, f64>>,
}

/// First line of `text` where `key` is followed by the JSON string `value`.
fn locate(text: &str, key: &str, value: &str) -> Option<usize> {
    let quoted = serde_json::to_string(value).ok()?;
    let key = format!("\"{key}\"");
    let mut from = 0;
    while let Some(pos) = text[from..].find(&quoted) {
        let at = from + pos;
        let before = text[..at].trim_end();
        if let Some(b) = before.strip_suffix(':') {
            if b.trim_end().ends_with(&key) {
                return Some(text[..at].matches('\n').count() + 1);
            }
        }
        from = at + quoted.len();
    }
    None
}

/// Line of the object defining `name`, or of its first mention as a value or key.
fn line_of(text: &str, name: &str) -> Option<usize> {
    if let Some(l) = locate(text, "id", name) {
        return Some(l);
    }
    let quoted = serde_json::to_string(name).ok()?;
    text.find(&quoted)
        .map(|p| text[..p].matches('\n').count() + 1)
}

fn game_err(text: &str, error: GameError) -> LoadError {
    let line = error.subject().and_then(|s| line_of(text, s));
    LoadError::Game { line, error }
}

pub fn game_from_json(text: &str) -> Result<Game, LoadError> {
    let file: GameFile = serde_json::from_str(text)?;
    let mut b = GameBuilder::new(file.players);
    let mut handles: HashMap<&str, Handle> = HashMap::with_capacity(file.nodes.len());
    for n in &file.nodes {
        let h = match &n.owner {
            Owner::Player(j) => b.decision(n.id.clone(), *j),
            Owner::Named(s) if s == "chance" => b.chance(n.id.clone()),
            Owner::Named(s) if s == "terminal" => {
                let u = n.utility.clone().ok_or_else(|| {
                    game_err(
                        text,
                        GameError::UtilityLength {
                            node: n.id.clone(),
                            expected: file.players,
                            found: 0,
                        },
                    )
                })?;
                b.terminal(n.id.clone(), u)
            }
            Owner::Named(s) => {
                return Err(game_err(
                    text,
                    GameError::BadPlayer {
                        name: format!("{} (owner `{s}`)", n.id),
                        player: 0,
                    },
                ))
            }
        };
        if n.utility.is_some() && !matches!(&n.owner, Owner::Named(s) if s == "terminal") {
            return Err(game_err(
                text,
                GameError::UtilityOnNonTerminal(n.id.clone()),
            ));
        }
        if handles.insert(n.id.as_str(), h).is_some() {
            return Err(game_err(text, GameError::DuplicateNode(n.id.clone())));
        }
    }
    let lookup = |name: &str| {
        handles
            .get(name)
            .copied()
            .ok_or_else(|| game_err(text, GameError::UnknownNode(name.to_string())))
    };
    for n in &file.nodes {
        let parent = handles[n.id.as_str()];
        let is_chance = matches!(&n.owner, Owner::Named(s) if s == "chance");
        if is_chance {
            let dist = file.chance.get(&n.id).ok_or_else(|| {
                game_err(
                    text,
                    GameError::ChanceProbability {
                        node: n.id.clone(),
                        detail: "no distribution".into(),
                    },
                )
            })?;
            if dist.len() != n.children.len() || n.children.keys().any(|k| !dist.contains_key(k)) {
                return Err(game_err(
                    text,
                    GameError::ChanceProbability {
                        node: n.id.clone(),
                        detail: "support differs from edge labels".into(),
                    },
                ));
            }
            for (label, child) in &n.children {
                b.chance_edge(parent, label.clone(), lookup(child)?, dist[label]);
            }
        } else {
            if file.chance.contains_key(&n.id) {
                return Err(game_err(
                    text,
                    GameError::ChanceProbability {
                        node: n.id.clone(),
                        detail: "node is not a chance node".into(),
                    },
                ));
            }
            for (label, child) in &n.children {
                b.edge(parent, label.clone(), lookup(child)?);
            }
        }
    }
    for name in file.chance.keys() {
        lookup(name)?;
    }
    let root = lookup(&file.root)?;
    b.set_root(root);
    let mut declared: HashMap<&str, &str> = HashMap::new();
    for n in &file.nodes {
        if let Some(i) = &n.infoset {
            declared.insert(n.id.as_str(), i.as_str());
        }
    }
    for s in &file.infosets {
        let mut members = Vec::with_capacity(s.members.len());
        for m in &s.members {
            members.push(lookup(m)?);
            if let Some(&d) = declared.get(m.as_str()) {
                if d != s.id {
                    return Err(game_err(text, GameError::InMultipleInfosets(m.clone())));
                }
            }
        }
        b.infoset(s.id.clone(), s.owner, &members, s.actions.iter().cloned());
    }
    let game = b.build().map_err(|e| game_err(text, e))?;
    for n in &file.nodes {
        if let Some(i) = &n.infoset {
            let id = game.node_by_name(&n.id).unwrap();
            let actual = game.node(id).infoset().map(|x| game.infoset(x).name());
            if actual != Some(i.as_str()) {
                return Err(game_err(
                    text,
                    GameError::OwnerMismatch {
                        infoset: i.clone(),
                        node: n.id.clone(),
                    },
                ));
            }
        }
    }
    Ok(game)
}

pub fn game_to_json(game: &Game) -> String {
    let mut chance = IndexMap::new();
    let nodes = game
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let id = crate::efg::NodeId(i);
            let children: IndexMap<String, String> = n
                .children()
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    (
                        game.edge_label(id, k).to_string(),
                        game.node(*c).name().to_string(),
                    )
                })
                .collect();
            let owner = match n.kind() {
                NodeKind::Chance => {
                    let dist: IndexMap<String, f64> = n
                        .labels
                        .iter()
                        .cloned()
                        .zip(n.chance_probs().iter().copied())
                        .collect();
                    chance.insert(n.name().to_string(), dist);
                    Owner::Named("chance".into())
                }
                NodeKind::Terminal => Owner::Named("terminal".into()),
                NodeKind::Player(j) => Owner::Player(j),
            };
            NodeEntry {
                id: n.name().to_string(),
                owner,
                infoset: n.infoset().map(|i| game.infoset(i).name().to_string()),
                children,
                utility: if n.is_terminal() {
                    Some(n.utility().to_vec())
                } else {
                    None
                },
            }
        })
        .collect();
    let infosets = game
        .infosets()
        .iter()
        .map(|s| InfosetEntry {
            id: s.name().to_string(),
            owner: s.player(),
            members: s
                .members()
                .iter()
                .map(|m| game.node(*m).name().to_string())
                .collect(),
            actions: s.actions().to_vec(),
        })
        .collect();
    let file = GameFile {
        players: game.players(),
        root: game.node(game.root()).name().to_string(),
        nodes,
        infosets,
        chance,
    };
    serde_json::to_string_pretty(&file).expect("game serializes")
}

#[derive(Debug, Serialize, Deserialize)]
struct AssessmentFile {
    strategy: IndexMap<String, IndexMap<String, f64>>,
    beliefs: IndexMap<String, IndexMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

fn profile_err(text: &str, error: ProfileError) -> LoadError {
    profile_err_in(text, "", error)
}

/// Like `profile_err`, but searches for the infoset after the `section` key.
fn profile_err_in(text: &str, section: &str, error: ProfileError) -> LoadError {
    let name = match &error {
        ProfileError::MissingInfoset(s)
        | ProfileError::UnknownInfoset(s)
        | ProfileError::UnknownAction { infoset: s, .. }
        | ProfileError::UnknownMember { infoset: s, .. }
        | ProfileError::RowLength { infoset: s, .. }
        | ProfileError::NotDistribution { infoset: s, .. } => Some(s.clone()),
        ProfileError::RowCount { .. } => None,
    };
    let base = if section.is_empty() {
        0
    } else {
        text.find(&format!("\"{section}\"")).unwrap_or(0)
    };
    let line = name.and_then(|n| {
        let quoted = serde_json::to_string(&n).ok()?;
        let rest = &text[base..];
        rest.find(&format!("{quoted}:"))
            .or_else(|| rest.find(&quoted))
            .map(|p| text[..base + p].matches('\n').count() + 1)
    });
    LoadError::Profile { line, error }
}

/// Parses an assessment. Rows must be distributions within 1e-9.
pub fn assessment_from_json(game: &Game, text: &str) -> Result<Assessment, LoadError> {
    let (strategy, beliefs) = parse_assessment(game, text)?;
    let strategy = StrategyProfile::from_rows(game, strategy)
        .map_err(|e| profile_err_in(text, "strategy", e))?;
    let beliefs =
        BeliefSystem::from_rows(game, beliefs).map_err(|e| profile_err_in(text, "beliefs", e))?;
    Ok(Assessment::new(strategy, beliefs))
}

/// Parses an assessment, validating the strategy but leaving belief rows unnormalized
/// so that verifiers can report how far they are off.
pub fn assessment_from_json_lenient(game: &Game, text: &str) -> Result<Assessment, LoadError> {
    let (strategy, beliefs) = parse_assessment(game, text)?;
    let strategy = StrategyProfile::from_rows(game, strategy)
        .map_err(|e| profile_err_in(text, "strategy", e))?;
    let beliefs = BeliefSystem::from_rows_unnormalized(game, beliefs)
        .map_err(|e| profile_err_in(text, "beliefs", e))?;
    Ok(Assessment::new(strategy, beliefs))
}

type Rows = Vec<Vec<f64>>;

fn parse_assessment(game: &Game, text: &str) -> Result<(Rows, Rows), LoadError> {
    let file: AssessmentFile = serde_json::from_str(text)?;
    let mut strategy: Vec<Option<Vec<f64>>> = vec![None; game.num_infosets()];
    for (name, row) in &file.strategy {
        let id = game
            .infoset_by_name(name)
            .ok_or_else(|| profile_err(text, ProfileError::UnknownInfoset(name.clone())))?;
        let s = game.infoset(id);
        let mut out = vec![0.0; s.num_actions()];
        for (action, p) in row {
            let k = s.action_index(action).ok_or_else(|| {
                profile_err(
                    text,
                    ProfileError::UnknownAction {
                        infoset: name.clone(),
                        action: action.clone(),
                    },
                )
            })?;
            out[k] = *p;
        }
        strategy[id.0] = Some(out);
    }
    let mut beliefs: Vec<Option<Vec<f64>>> = vec![None; game.num_infosets()];
    for (name, row) in &file.beliefs {
        let id = game
            .infoset_by_name(name)
            .ok_or_else(|| profile_err(text, ProfileError::UnknownInfoset(name.clone())))?;
        let s = game.infoset(id);
        let mut out = vec![0.0; s.members().len()];
        for (node, p) in row {
            let k = game
                .node_by_name(node)
                .and_then(|n| s.member_index(n))
                .ok_or_else(|| {
                    profile_err(
                        text,
                        ProfileError::UnknownMember {
                            infoset: name.clone(),
                            node: node.clone(),
                        },
                    )
                })?;
            out[k] = *p;
        }
        beliefs[id.0] = Some(out);
    }
    let complete = |rows: Vec<Option<Vec<f64>>>| -> Result<Rows, LoadError> {
        rows.into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.ok_or_else(|| {
                    profile_err(
                        text,
                        ProfileError::MissingInfoset(game.infoset(InfosetId(i)).name().to_string()),
                    )
                })
            })
            .collect()
    };
    Ok((complete(strategy)?, complete(beliefs)?))
}

/// Serializes an assessment; `meta` is embedded verbatim when given.
pub fn assessment_to_json(
    game: &Game,
    assessment: &Assessment,
    meta: Option<serde_json::Value>,
) -> String {
    let mut strategy = IndexMap::new();
    let mut beliefs = IndexMap::new();
    for (i, s) in game.infosets().iter().enumerate() {
        let id = InfosetId(i);
        let row: IndexMap<String, f64> = s
            .actions()
            .iter()
            .cloned()
            .zip(assessment.strategy.row(id).iter().copied())
            .collect();
        strategy.insert(s.name().to_string(), row);
        let brow: IndexMap<String, f64> = s
            .members()
            .iter()
            .map(|m| game.node(*m).name().to_string())
            .zip(assessment.beliefs.row(id).iter().copied())
            .collect();
        beliefs.insert(s.name().to_string(), brow);
    }
    let file = AssessmentFile {
        strategy,
        beliefs,
        meta,
    };
    serde_json::to_string_pretty(&file).expect("assessment serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MP: &str = r#"{
  "players": 2,
  "root": "r",
  "nodes": [
    {"id": "r", "owner": 1, "infoset": "p1", "children": {"H": "H", "T": "T"}},
    {"id": "H", "owner": 2, "infoset": "p2", "children": {"h": "Hh", "t": "Ht"}},
    {"id": "T", "owner": 2, "infoset": "p2", "children": {"h": "Th", "t": "Tt"}},
    {"id": "Hh", "owner": "terminal", "utility": [1, -1]},
    {"id": "Ht", "owner": "terminal", "utility": [-1, 1]},
    {"id": "Th", "owner": "terminal", "utility": [-1, 1]},
    {"id": "Tt", "owner": "terminal", "utility": [1, -1]}
  ],
  "infosets": [
    {"id": "p1", "owner": 1, "members": ["r"], "actions": ["H", "T"]},
    {"id": "p2", "owner": 2, "members": ["H", "T"], "actions": ["h", "t"]}
  ]
}"#;

    #[test]
    fn round_trip() {
        let g = game_from_json(MP).unwrap();
        assert_eq!(g.num_nodes(), 7);
        let text = game_to_json(&g);
        let g2 = game_from_json(&text).unwrap();
        assert_eq!(game_to_json(&g2), text);
    }

    #[test]
    fn chance_round_trip() {
        let text = r#"{"players": 1, "root": "c",
          "nodes": [
            {"id": "c", "owner": "chance", "children": {"x": "a", "y": "b"}},
            {"id": "a", "owner": "terminal", "utility": [1]},
            {"id": "b", "owner": "terminal", "utility": [2]}],
          "infosets": [],
          "chance": {"c": {"x": 0.25, "y": 0.75}}}"#;
        let g = game_from_json(text).unwrap();
        assert_eq!(g.node(g.root()).chance_probs(), &[0.25, 0.75]);
        let g2 = game_from_json(&game_to_json(&g)).unwrap();
        assert_eq!(g2.node(g2.root()).chance_probs(), &[0.25, 0.75]);
    }

    #[test]
    fn invariant_errors_carry_lines() {
        let bad = MP.replace(
            r#""utility": [-1, 1]},
    {"id": "Th""#,
            r#""utility": [-1]},
    {"id": "Th""#,
        );
        let err = game_from_json(&bad).unwrap_err();
        assert_eq!(err.line(), Some(9), "{err}");
        assert!(err.to_string().starts_with("line 9:"));

        let unknown = MP.replace(r#""t": "Tt""#, r#""t": "Zz""#);
        let err = game_from_json(&unknown).unwrap_err();
        assert!(matches!(
            err,
            LoadError::Game {
                error: GameError::UnknownNode(_),
                ..
            }
        ));

        let syntax = MP.replace("\"players\": 2,", "\"players\": 2");
        let err = game_from_json(&syntax).unwrap_err();
        assert!(matches!(err, LoadError::Json(_)));
        assert_eq!(err.line(), Some(3));
    }

    #[test]
    fn assessment_round_trip_and_errors() {
        let g = game_from_json(MP).unwrap();
        let text = r#"{"strategy": {"p1": {"H": 0.5, "T": 0.5}, "p2": {"h": 1}},
                       "beliefs": {"p1": {"r": 1}, "p2": {"H": 0.5, "T": 0.5}}}"#;
        let a = assessment_from_json(&g, text).unwrap();
        assert_eq!(a.strategy.row(InfosetId(1)), &[1.0, 0.0]);
        let out = assessment_to_json(&g, &a, None);
        assert_eq!(assessment_from_json(&g, &out).unwrap(), a);

        let missing = r#"{"strategy": {"p1": {"H": 1}},
                          "beliefs": {"p1": {"r": 1}, "p2": {"H": 1}}}"#;
        assert!(matches!(
            assessment_from_json(&g, missing),
            Err(LoadError::Profile {
                error: ProfileError::MissingInfoset(_),
                ..
            })
        ));
        let bad_sum = "{\"strategy\": {\"p1\": {\"H\": 1}, \"p2\": {\"h\": 1}},\n\"beliefs\": {\"p1\": {\"r\": 1},\n\"p2\": {\"H\": 0.7}}}";
        let err = assessment_from_json(&g, bad_sum).unwrap_err();
        assert_eq!(err.line(), Some(3), "{err}");
        assert!(assessment_from_json_lenient(&g, bad_sum).is_ok());
    }
}
