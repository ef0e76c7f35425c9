//! Small hand-built games.

use crate::efg::{Assessment, BeliefSystem, Game, GameBuilder, StrategyProfile};

pub const FIXTURE_NAMES: [&str; 4] = [
    "figure1",
    "figure3",
    "matching_pennies",
    "assessments_example",
];

pub fn fixture_games() -> Vec<(&'static str, Game)> {
    FIXTURE_NAMES
        .iter()
        .map(|&n| (n, fixture(n).unwrap()))
        .collect()
}

pub fn fixture(name: &str) -> Option<Game> {
    Some(match name {
        "figure1" => figure1(),
        "figure3" => figure3(),
        "matching_pennies" => matching_pennies(),
        "assessments_example" => assessments_example(),
        _ => return None,
    })
}

/// Player 1 picks a, b, c or d; after b or c player 2 picks e or f without
/// knowing which. Utilities make (a, e) with belief 1 on c sequentially rational.
pub fn figure1() -> Game {
    let mut g = GameBuilder::new(2);
    let root = g.decision("root", 1);
    let b = g.decision("b", 2);
    let c = g.decision("c", 2);
    let a = g.terminal("a", vec![3.0, 1.0]);
    let d = g.terminal("d", vec![1.0, 0.0]);
    g.edge(root, "a", a);
    g.edge(root, "b", b);
    g.edge(root, "c", c);
    g.edge(root, "d", d);
    for (node, prefix, ue, uf) in [
        (b, "b", [1.0, 2.0], [0.0, 3.0]),
        (c, "c", [2.0, 2.0], [4.0, 1.0]),
    ] {
        let e = g.terminal(format!("{prefix}e"), ue.to_vec());
        let f = g.terminal(format!("{prefix}f"), uf.to_vec());
        g.edge(node, "e", e);
        g.edge(node, "f", f);
    }
    g.infoset("I1", 1, &[root], ["a", "b", "c", "d"]);
    g.infoset("I2", 2, &[b, c], ["e", "f"]);
    g.build().expect("figure1 fixture")
}

/// σ = (a, e) with μ(c) = 1.
pub fn figure1_assessment(game: &Game) -> Assessment {
    let strategy =
        StrategyProfile::from_rows(game, vec![vec![1.0, 0.0, 0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let beliefs = BeliefSystem::from_rows(game, vec![vec![1.0], vec![0.0, 1.0]]).unwrap();
    Assessment::new(strategy, beliefs)
}

/// Three players. Player 1 picks a (end), b or c. After b, player 2 picks d or e
/// and player 3 then picks h or k without seeing that choice. After c, player 3
/// picks f or g.
pub fn figure3() -> Game {
    let mut g = GameBuilder::new(3);
    let root = g.decision("root", 1);
    let a = g.terminal("a", vec![1.0, 1.0, 1.0]);
    let b = g.decision("b", 2);
    let c = g.decision("c", 3);
    g.edge(root, "a", a);
    g.edge(root, "b", b);
    g.edge(root, "c", c);
    let cf = g.terminal("cf", vec![2.0, 0.0, 2.0]);
    let cg = g.terminal("cg", vec![0.0, 1.0, 0.0]);
    g.edge(c, "f", cf);
    g.edge(c, "g", cg);
    let bd = g.decision("bd", 3);
    let be = g.decision("be", 3);
    g.edge(b, "d", bd);
    g.edge(b, "e", be);
    let leaves = [
        (bd, "bdh", [0.0, 2.0, 1.0]),
        (bd, "bdk", [0.0, 0.0, 0.0]),
        (be, "beh", [0.0, 0.0, 0.0]),
        (be, "bek", [0.0, 1.0, 1.0]),
    ];
    for (parent, name, u) in leaves {
        let z = g.terminal(name, u.to_vec());
        g.edge(parent, &name[2..], z);
    }
    g.infoset("I1", 1, &[root], ["a", "b", "c"]);
    g.infoset("I2", 2, &[b], ["d", "e"]);
    g.infoset("I3c", 3, &[c], ["f", "g"]);
    g.infoset("I3b", 3, &[bd, be], ["h", "k"]);
    g.build().expect("figure3 fixture")
}

/// σ = (c; d; f, h) with belief `mu_be` on be.
pub fn figure3_assessment(game: &Game, mu_be: f64) -> Assessment {
    let rows = |name: &str| -> Vec<f64> {
        match name {
            "I1" => vec![0.0, 0.0, 1.0],
            "I2" => vec![1.0, 0.0],
            _ => vec![1.0, 0.0],
        }
    };
    let strategy = StrategyProfile::from_rows(
        game,
        game.infosets().iter().map(|s| rows(s.name())).collect(),
    )
    .unwrap();
    let beliefs = BeliefSystem::from_rows(
        game,
        game.infosets()
            .iter()
            .map(|s| {
                if s.name() == "I3b" {
                    vec![1.0 - mu_be, mu_be]
                } else {
                    vec![1.0]
                }
            })
            .collect(),
    )
    .unwrap();
    Assessment::new(strategy, beliefs)
}

/// Player 1 shows heads or tails, player 2 guesses blind. Zero-sum, ±1.
pub fn matching_pennies() -> Game {
    let mut g = GameBuilder::new(2);
    let root = g.decision("root", 1);
    let h = g.decision("H", 2);
    let t = g.decision("T", 2);
    g.edge(root, "H", h);
    g.edge(root, "T", t);
    for (node, first) in [(h, "H"), (t, "T")] {
        for second in ["H", "T"] {
            let u = if first == second { 1.0 } else { -1.0 };
            let z = g.terminal(format!("{first}{second}"), vec![u, -u]);
            g.edge(node, second, z);
        }
    }
    g.infoset("P1", 1, &[root], ["H", "T"]);
    g.infoset("P2", 2, &[h, t], ["H", "T"]);
    g.build().expect("matching pennies fixture")
}

/// Three players. Player 1 picks U or D. After U player 2 picks L or R and
/// player 3 moves (X or Y) without seeing it. After D player 2 picks A or B and
/// player 1 moves again (P or Q) without seeing it.
pub fn assessments_example() -> Game {
    let mut g = GameBuilder::new(3);
    let root = g.decision("root", 1);
    let u = g.decision("U", 2);
    let d = g.decision("D", 2);
    g.edge(root, "U", u);
    g.edge(root, "D", d);
    let node = |g: &mut GameBuilder, parent, label: &str, player| {
        let h = g.decision(
            format!("{}{label}", if parent == u { "U" } else { "D" }),
            player,
        );
        g.edge(parent, label, h);
        h
    };
    let ul = node(&mut g, u, "L", 3);
    let ur = node(&mut g, u, "R", 3);
    let da = node(&mut g, d, "A", 1);
    let db = node(&mut g, d, "B", 1);
    let leaves: [(_, &str, &str, [f64; 3]); 8] = [
        (ul, "ULX", "X", [2.0, 1.0, 0.0]),
        (ul, "ULY", "Y", [1.0, 2.0, 3.0]),
        (ur, "URX", "X", [0.0, 3.0, 1.0]),
        (ur, "URY", "Y", [3.0, 0.0, 2.0]),
        (da, "DAP", "P", [1.0, 1.0, 1.0]),
        (da, "DAQ", "Q", [2.0, 0.0, 1.0]),
        (db, "DBP", "P", [3.0, 1.0, 0.0]),
        (db, "DBQ", "Q", [0.0, 2.0, 2.0]),
    ];
    for (parent, name, label, u) in leaves {
        let z = g.terminal(name, u.to_vec());
        g.edge(parent, label, z);
    }
    g.infoset("I1.1", 1, &[root], ["U", "D"]);
    g.infoset("I1.2", 1, &[da, db], ["P", "Q"]);
    g.infoset("I2.1", 2, &[u], ["L", "R"]);
    g.infoset("I2.2", 2, &[d], ["A", "B"]);
    g.infoset("I3.1", 3, &[ul, ur], ["X", "Y"]);
    g.build().expect("assessments example fixture")
}

/// σ1 = (U 1/3, D 2/3; P), σ2 = (L 1/2, R 1/2; B), σ3 = Y; μ(DB) = 1, μ(UL) = μ(UR) = 1/2.
pub fn assessments_example_assessment(game: &Game) -> Assessment {
    let strat = |name: &str| -> Vec<f64> {
        match name {
            "I1.1" => vec![1.0 / 3.0, 2.0 / 3.0],
            "I1.2" => vec![1.0, 0.0],
            "I2.1" => vec![0.5, 0.5],
            "I2.2" => vec![0.0, 1.0],
            _ => vec![0.0, 1.0],
        }
    };
    let belief = |name: &str| -> Vec<f64> {
        match name {
            "I1.2" => vec![0.0, 1.0],
            "I3.1" => vec![0.5, 0.5],
            _ => vec![1.0],
        }
    };
    let strategy = StrategyProfile::from_rows(
        game,
        game.infosets().iter().map(|s| strat(s.name())).collect(),
    )
    .unwrap();
    let beliefs = BeliefSystem::from_rows(
        game,
        game.infosets().iter().map(|s| belief(s.name())).collect(),
    )
    .unwrap();
    Assessment::new(strategy, beliefs)
}
