use super::error::ProfileError;
use super::game::{Game, InfosetId, NodeId, NodeKind};

/// Tolerance for rows of strategies and beliefs summing to one.
pub const ROW_TOL: f64 = 1e-9;

fn check_row(name: &str, row: &[f64]) -> Result<(), ProfileError> {
    let mut sum = 0.0;
    for &p in row {
        if !p.is_finite() || p < 0.0 {
            return Err(ProfileError::NotDistribution {
                infoset: name.to_string(),
                detail: format!("entry {p}"),
            });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > ROW_TOL {
        return Err(ProfileError::NotDistribution {
            infoset: name.to_string(),
            detail: format!("sums to {sum}"),
        });
    }
    Ok(())
}

fn check_flat(
    game: &Game,
    data: &[f64],
    offsets: &[usize],
    width: impl Fn(InfosetId) -> usize,
) -> Result<(), ProfileError> {
    if offsets.len() != game.num_infosets() + 1 {
        return Err(ProfileError::RowCount {
            expected: game.num_infosets(),
            found: offsets.len().saturating_sub(1),
        });
    }
    for i in 0..game.num_infosets() {
        let name = game.infoset(InfosetId(i)).name();
        let w = width(InfosetId(i));
        let row = &data[offsets[i]..offsets[i + 1]];
        if row.len() != w {
            return Err(ProfileError::RowLength {
                infoset: name.to_string(),
                expected: w,
                found: row.len(),
            });
        }
        check_row(name, row)?;
    }
    Ok(())
}

fn flatten(
    game: &Game,
    rows: Vec<Vec<f64>>,
    width: impl Fn(InfosetId) -> usize,
) -> Result<Rows, ProfileError> {
    if rows.len() != game.num_infosets() {
        return Err(ProfileError::RowCount {
            expected: game.num_infosets(),
            found: rows.len(),
        });
    }
    let mut offsets = Vec::with_capacity(rows.len() + 1);
    let mut data = Vec::new();
    offsets.push(0);
    for (i, row) in rows.into_iter().enumerate() {
        let w = width(InfosetId(i));
        if row.len() != w {
            let name = game.infoset(InfosetId(i)).name().to_string();
            return Err(ProfileError::RowLength {
                infoset: name,
                expected: w,
                found: row.len(),
            });
        }
        data.extend(row);
        offsets.push(data.len());
    }
    Ok(Rows { data, offsets })
}

/// Variable-width rows stored contiguously.
#[derive(Clone, Debug, PartialEq)]
struct Rows {
    data: Vec<f64>,
    offsets: Vec<usize>,
}

impl Rows {
    fn uniform(game: &Game, width: impl Fn(InfosetId) -> usize) -> Self {
        let mut offsets = Vec::with_capacity(game.num_infosets() + 1);
        let mut data = Vec::new();
        offsets.push(0);
        for i in 0..game.num_infosets() {
            let w = width(InfosetId(i));
            data.extend(std::iter::repeat_n(1.0 / w as f64, w));
            offsets.push(data.len());
        }
        Rows { data, offsets }
    }
    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.offsets[i]..self.offsets[i + 1]]
    }
    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[self.offsets[i]..self.offsets[i + 1]]
    }
    fn len(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// A behavioral strategy for every player: one distribution per infoset.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyProfile {
    rows: Rows,
}

impl StrategyProfile {
    pub fn uniform(game: &Game) -> Self {
        StrategyProfile {
            rows: Rows::uniform(game, |i| game.infoset(i).num_actions()),
        }
    }

    /// Pure profile choosing `choice[i]` at infoset `i`.
    pub fn pure(game: &Game, choice: &[usize]) -> Self {
        let mut p = Self::uniform(game);
        for (i, &c) in choice.iter().enumerate() {
            let row = p.rows.row_mut(i);
            row.fill(0.0);
            row[c] = 1.0;
        }
        p
    }

    pub fn from_rows(game: &Game, rows: Vec<Vec<f64>>) -> Result<Self, ProfileError> {
        let rows = flatten(game, rows, |i| game.infoset(i).num_actions())?;
        check_flat(game, &rows.data, &rows.offsets, |i| {
            game.infoset(i).num_actions()
        })?;
        Ok(StrategyProfile { rows })
    }

    pub fn validate(&self, game: &Game) -> Result<(), ProfileError> {
        check_flat(game, &self.rows.data, &self.rows.offsets, |i| {
            game.infoset(i).num_actions()
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, infoset: InfosetId) -> &[f64] {
        self.rows.row(infoset.0)
    }

    /// Mutable access to one row; callers keep it a distribution.
    pub fn row_mut(&mut self, infoset: InfosetId) -> &mut [f64] {
        self.rows.row_mut(infoset.0)
    }

    /// All rows concatenated in infoset order.
    pub fn flat(&self) -> &[f64] {
        &self.rows.data
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.rows.data
    }

    /// Start of each infoset's row within [`flat`](Self::flat), plus the total length.
    pub fn offsets(&self) -> &[usize] {
        &self.rows.offsets
    }

    /// Replaces one row. The row must be a distribution over the infoset's actions.
    pub fn set_row(&mut self, infoset: InfosetId, row: &[f64]) {
        self.rows.row_mut(infoset.0).copy_from_slice(row);
    }

    /// Probability of the `k`-th edge out of `node`, chance or strategic.
    pub fn edge_prob(&self, game: &Game, node: NodeId, k: usize) -> f64 {
        let n = game.node(node);
        match n.kind() {
            NodeKind::Chance => n.chance_probs()[k],
            NodeKind::Player(_) => self.row(n.infoset().unwrap())[k],
            NodeKind::Terminal => 0.0,
        }
    }
}

/// A distribution over members for every infoset.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefSystem {
    rows: Rows,
}

impl BeliefSystem {
    pub fn uniform(game: &Game) -> Self {
        BeliefSystem {
            rows: Rows::uniform(game, |i| game.infoset(i).members().len()),
        }
    }

    pub fn from_rows(game: &Game, rows: Vec<Vec<f64>>) -> Result<Self, ProfileError> {
        let b = Self::from_rows_unnormalized(game, rows)?;
        b.validate(game)?;
        Ok(b)
    }

    /// Accepts rows whose lengths fit the game without checking that they are distributions.
    pub fn from_rows_unnormalized(game: &Game, rows: Vec<Vec<f64>>) -> Result<Self, ProfileError> {
        Ok(BeliefSystem {
            rows: flatten(game, rows, |i| game.infoset(i).members().len())?,
        })
    }

    pub fn validate(&self, game: &Game) -> Result<(), ProfileError> {
        check_flat(game, &self.rows.data, &self.rows.offsets, |i| {
            game.infoset(i).members().len()
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Beliefs aligned with `game.infoset(infoset).members()`.
    pub fn row(&self, infoset: InfosetId) -> &[f64] {
        self.rows.row(infoset.0)
    }

    pub fn row_mut(&mut self, infoset: InfosetId) -> &mut [f64] {
        self.rows.row_mut(infoset.0)
    }

    pub fn set_row(&mut self, infoset: InfosetId, row: &[f64]) {
        self.rows.row_mut(infoset.0).copy_from_slice(row);
    }

    /// μ(h | I(h)); zero for nodes outside any infoset.
    pub fn of(&self, game: &Game, node: NodeId) -> f64 {
        match game.node(node).infoset() {
            Some(i) => {
                let k = game.infoset(i).member_index(node).unwrap();
                self.row(i)[k]
            }
            None => 0.0,
        }
    }
}

/// A strategy profile together with a belief system.
#[derive(Clone, Debug, PartialEq)]
pub struct Assessment {
    pub strategy: StrategyProfile,
    pub beliefs: BeliefSystem,
}

impl Assessment {
    pub fn new(strategy: StrategyProfile, beliefs: BeliefSystem) -> Self {
        Assessment { strategy, beliefs }
    }

    pub fn validate(&self, game: &Game) -> Result<(), ProfileError> {
        self.strategy.validate(game)?;
        self.beliefs.validate(game)
    }
}
