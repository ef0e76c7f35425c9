use thiserror::Error;

/// Structural invariant violations found while building or loading a game.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("game has no players")]
    NoPlayers,
    #[error("game has no nodes")]
    Empty,
    #[error("game has {0} nodes, above the size cap")]
    TooLarge(usize),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate infoset id `{0}`")]
    DuplicateInfoset(String),
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` has more than one parent")]
    MultipleParents(String),
    #[error("root `{0}` is the child of `{1}`")]
    RootHasParent(String, String),
    #[error("no root node")]
    NoRoot,
    #[error("more than one parentless node: `{0}` and `{1}`")]
    MultipleRoots(String, String),
    #[error("node `{0}` lies on a cycle")]
    Cycle(String),
    #[error("node `{0}` is not reachable from the root")]
    Unreachable(String),
    #[error("terminal node `{0}` has children")]
    TerminalWithChildren(String),
    #[error("non-terminal node `{0}` has no children")]
    NoChildren(String),
    #[error("node `{node}` has a utility vector of length {found}, expected {expected}")]
    UtilityLength {
        node: String,
        expected: usize,
        found: usize,
    },
    #[error("node `{0}` has a non-finite utility")]
    NonFiniteUtility(String),
    #[error("non-terminal node `{0}` carries a utility")]
    UtilityOnNonTerminal(String),
    #[error("chance node `{node}`: {detail}")]
    ChanceProbability { node: String, detail: String },
    #[error("`{name}` refers to player {player}, which does not exist")]
    BadPlayer { name: String, player: usize },
    #[error("`{node}` has duplicate label `{label}`")]
    DuplicateLabel { node: String, label: String },
    #[error("infoset `{0}` has no members")]
    EmptyInfoset(String),
    #[error("infoset `{0}` has no actions")]
    NoActions(String),
    #[error("node `{node}` in infoset `{infoset}` is not owned by the infoset's player")]
    OwnerMismatch { infoset: String, node: String },
    #[error("node `{0}` appears in more than one infoset")]
    InMultipleInfosets(String),
    #[error("decision node `{0}` is not in any infoset")]
    NotInInfoset(String),
    #[error("node `{node}` has edge labels different from the actions of infoset `{infoset}`")]
    ActionMismatch { infoset: String, node: String },
    #[error("infoset `{infoset}` violates perfect recall: `{first}` and `{second}` have different own histories")]
    PerfectRecall {
        infoset: String,
        first: String,
        second: String,
    },
}

impl GameError {
    /// Name of the node or infoset the error is about, if any.
    pub fn subject(&self) -> Option<&str> {
        use GameError::*;
        match self {
            DuplicateNode(s)
            | DuplicateInfoset(s)
            | UnknownNode(s)
            | MultipleParents(s)
            | Cycle(s)
            | Unreachable(s)
            | TerminalWithChildren(s)
            | NoChildren(s)
            | NonFiniteUtility(s)
            | UtilityOnNonTerminal(s)
            | EmptyInfoset(s)
            | NoActions(s)
            | InMultipleInfosets(s)
            | NotInInfoset(s) => Some(s),
            RootHasParent(s, _) | MultipleRoots(_, s) => Some(s),
            UtilityLength { node, .. }
            | ChanceProbability { node, .. }
            | DuplicateLabel { node, .. } => Some(node),
            BadPlayer { name, .. } => Some(name),
            OwnerMismatch { node, .. } | ActionMismatch { node, .. } => Some(node),
            PerfectRecall { second, .. } => Some(second),
            NoPlayers | Empty | TooLarge(_) | NoRoot => None,
        }
    }
}

/// Errors from the probability and utility calculus.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EfgError {
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("unknown infoset {0}")]
    UnknownInfoset(usize),
    #[error("infoset {infoset} has no action {action}")]
    UnknownAction { infoset: usize, action: usize },
    #[error("player {0} does not exist")]
    BadPlayer(usize),
    #[error("expected a {expected}-player game, found {found} players")]
    PlayerCount { expected: usize, found: usize },
    #[error("{0}")]
    Profile(#[from] ProfileError),
}

/// Strategy or belief data that does not fit the game.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("expected rows for {expected} infosets, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("row for infoset `{infoset}` has length {found}, expected {expected}")]
    RowLength {
        infoset: String,
        expected: usize,
        found: usize,
    },
    #[error("row for infoset `{infoset}` is not a distribution: {detail}")]
    NotDistribution { infoset: String, detail: String },
    #[error("missing entry for infoset `{0}`")]
    MissingInfoset(String),
    #[error("unknown infoset `{0}`")]
    UnknownInfoset(String),
    #[error("infoset `{infoset}` has no action `{action}`")]
    UnknownAction { infoset: String, action: String },
    #[error("node `{node}` is not a member of infoset `{infoset}`")]
    UnknownMember { infoset: String, node: String },
}
