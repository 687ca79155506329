//! Finite symmetric two-player games and their relative payoff transform.
//!
//! Orientation is fixed throughout the crate: `payoff(i, j)` is the payoff to
//! the player choosing action `i` while the opponent chooses `j`.

use std::collections::HashSet;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{max_abs, EntryFault, Scalar, Tolerance};

/// A finite symmetric two-player game.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricGame<T> {
    name: String,
    actions: Vec<String>,
    payoff: Vec<T>,
}

impl<T: Scalar> SymmetricGame<T> {
    /// Validates and builds a game from row-major payoff rows.
    pub fn new(name: impl Into<String>, actions: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self> {
        let n = actions.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut seen = HashSet::with_capacity(n);
        for label in &actions {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateAction(label.clone()));
            }
        }
        if rows.len() != n {
            return Err(Error::NonSquare {
                rows: rows.len(),
                row: rows.len().min(n),
                cols: n,
            });
        }
        let mut payoff = Vec::with_capacity(n * n);
        for (row, entries) in rows.into_iter().enumerate() {
            if entries.len() != n {
                return Err(Error::NonSquare {
                    rows: n,
                    row,
                    cols: entries.len(),
                });
            }
            for (col, value) in entries.into_iter().enumerate() {
                match value.check_entry() {
                    Ok(()) => {}
                    Err(EntryFault::NonFinite) => return Err(Error::NonFinite { row, col }),
                    Err(EntryFault::OutOfRange) => {
                        return Err(Error::OutOfExactRange {
                            row,
                            col,
                            value: value.to_f64() as i128,
                        })
                    }
                }
                payoff.push(value);
            }
        }
        Ok(SymmetricGame {
            name: name.into(),
            actions,
            payoff,
        })
    }

    /// Builds a game by evaluating `payoff(i, j)` on every index pair.
    pub fn from_fn(
        name: impl Into<String>,
        actions: Vec<String>,
        mut payoff: impl FnMut(usize, usize) -> T,
    ) -> Result<Self> {
        let n = actions.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| payoff(i, j)).collect())
            .collect();
        Self::new(name, actions, rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn n(&self) -> usize {
        self.actions.len()
    }

    pub fn payoff(&self, i: usize, j: usize) -> T {
        self.payoff[i * self.n() + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.payoff.chunks(self.n()).map(|r| r.to_vec()).collect()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownAction(label.to_string()))
    }

    pub fn max_abs_payoff(&self) -> T {
        max_abs(&self.payoff)
    }

    /// Comparator scaled to this game's payoff magnitudes.
    pub fn tolerance(&self, epsilon: f64) -> Tolerance {
        Tolerance::scaled(epsilon, self.max_abs_payoff())
    }

    /// `true` when `payoff(i, j) == payoff(j, i)` everywhere.
    pub fn is_payoff_symmetric(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..i).all(|j| self.payoff(i, j) == self.payoff(j, i)))
    }

    /// Applies `map` to every payoff entry, keeping labels and name.
    pub fn map_payoffs<U: Scalar>(&self, map: impl Fn(T) -> U) -> Result<SymmetricGame<U>> {
        SymmetricGame::new(
            self.name.clone(),
            self.actions.clone(),
            self.rows()
                .into_iter()
                .map(|r| r.into_iter().map(&map).collect())
                .collect(),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl<T: Scalar> Serialize for SymmetricGame<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SymmetricGame", 3)?;
        s.serialize_field("name", &self.name)?;
        s.serialize_field("actions", &self.actions)?;
        s.serialize_field("payoff", &self.rows())?;
        s.end()
    }
}

/// The skew-symmetric game `delta(x, y) = payoff(x, y) - payoff(y, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativePayoffGame<T> {
    actions: Vec<String>,
    delta: Vec<T>,
    max_abs: T,
}

impl<T: Scalar> RelativePayoffGame<T> {
    pub fn from_game(game: &SymmetricGame<T>) -> Self {
        let n = game.n();
        let mut delta = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                delta.push(game.payoff(i, j) - game.payoff(j, i));
            }
        }
        RelativePayoffGame {
            actions: game.actions().to_vec(),
            max_abs: max_abs(&delta),
            delta,
        }
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn n(&self) -> usize {
        self.actions.len()
    }

    #[inline]
    pub fn delta(&self, x: usize, y: usize) -> T {
        self.delta[x * self.n() + y]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.delta.chunks(self.n()).map(|r| r.to_vec()).collect()
    }

    /// The largest one-period payoff differential, `max delta(x, y)`.
    ///
    /// Never negative since the diagonal is zero.
    pub fn max_relative_payoff(&self) -> T {
        self.delta.iter().fold(T::ZERO, |acc, &v| acc.max(v))
    }

    pub fn max_abs_delta(&self) -> T {
        self.max_abs
    }

    pub fn tolerance(&self, epsilon: f64) -> Tolerance {
        Tolerance::scaled(epsilon, self.max_abs_delta())
    }

    /// Views the relative payoffs as a symmetric game in their own right.
    pub fn as_game(&self) -> SymmetricGame<T> {
        SymmetricGame {
            name: "relative".to_string(),
            actions: self.actions.clone(),
            payoff: self.delta.clone(),
        }
    }
}

/// Shorthand for [`RelativePayoffGame::from_game`].
pub fn build_relative_game<T: Scalar>(game: &SymmetricGame<T>) -> RelativePayoffGame<T> {
    RelativePayoffGame::from_game(game)
}

/// A game in either numeric mode.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyGame {
    Exact(SymmetricGame<i64>),
    Float(SymmetricGame<f64>),
}

impl AnyGame {
    pub fn name(&self) -> &str {
        match self {
            AnyGame::Exact(g) => g.name(),
            AnyGame::Float(g) => g.name(),
        }
    }

    pub fn actions(&self) -> &[String] {
        match self {
            AnyGame::Exact(g) => g.actions(),
            AnyGame::Float(g) => g.actions(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyGame::Exact(_))
    }

    pub fn to_float(&self) -> SymmetricGame<f64> {
        match self {
            AnyGame::Exact(g) => g
                .map_payoffs(|v| v as f64)
                .expect("exact-range integers are finite floats"),
            AnyGame::Float(g) => g.clone(),
        }
    }
}

impl From<SymmetricGame<i64>> for AnyGame {
    fn from(g: SymmetricGame<i64>) -> Self {
        AnyGame::Exact(g)
    }
}

impl From<SymmetricGame<f64>> for AnyGame {
    fn from(g: SymmetricGame<f64>) -> Self {
        AnyGame::Float(g)
    }
}

impl Serialize for AnyGame {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AnyGame::Exact(g) => g.serialize(serializer),
            AnyGame::Float(g) => g.serialize(serializer),
        }
    }
}

pub(crate) fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
