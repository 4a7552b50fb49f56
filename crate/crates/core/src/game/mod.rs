//! Killall-Go rules: board representation, legality, captures, ko and
//! path superko, block analysis, Benson life and terminal adjudication.

mod benson;
pub(crate) mod bitboard;
mod position;
mod zobrist;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use benson::Life;
pub use bitboard::{PointSet, MAX_SIZE, MIN_SIZE};
pub use position::{Block, BoardPosition};

/// A board intersection, row-major index into an `n x n` board.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(u8);

impl Point {
    #[inline]
    pub const fn new(index: u8) -> Self {
        Point(index)
    }

    pub fn from_rc(row: u8, col: u8, n: u8) -> Self {
        debug_assert!(row < n && col < n);
        Point(row * n + col)
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub fn row(self, n: u8) -> u8 {
        self.0 / n
    }

    pub fn col(self, n: u8) -> u8 {
        self.0 % n
    }

    /// Column letter then 1-based row counted from the top, e.g. `c2`.
    pub fn label(self, n: u8) -> String {
        format!("{}{}", (b'a' + self.col(n)) as char, self.row(n) + 1)
    }

    pub fn parse_label(text: &str, n: u8) -> Option<Self> {
        let mut chars = text.chars();
        let c = chars.next()?;
        if !c.is_ascii_lowercase() {
            return None;
        }
        let col = c as u8 - b'a';
        let row: u8 = chars.as_str().parse().ok()?;
        if col >= n || row == 0 || row > n {
            return None;
        }
        Some(Point::from_rc(row - 1, col, n))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    #[inline]
    pub fn opponent(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Black => "B",
            Color::White => "W",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty,
    Black,
    White,
}

impl From<Color> for Cell {
    fn from(c: Color) -> Cell {
        match c {
            Color::Black => Cell::Black,
            Color::White => Cell::White,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Play(Point),
    Pass,
}

impl Move {
    pub fn point(self) -> Option<Point> {
        match self {
            Move::Play(p) => Some(p),
            Move::Pass => None,
        }
    }

    pub fn label(self, n: u8) -> String {
        match self {
            Move::Play(p) => p.label(n),
            Move::Pass => "pass".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatus {
    Ongoing,
    WhiteWin,
    BlackWin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum IllegalMove {
    #[error("point is occupied")]
    Occupied,
    #[error("point is banned by ko")]
    Ko,
    #[error("move is suicide")]
    Suicide,
    #[error("move repeats a position on the current path")]
    Superko,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PositionError {
    #[error("board size {0} is outside 5..=9")]
    BoardSize(u8),
    #[error("expected {expected} cells, got {got}")]
    CellCount { expected: usize, got: usize },
    #[error("block at {0} has no liberties")]
    ZeroLiberties(String),
    #[error("ko point {0} is not empty")]
    KoNotEmpty(String),
    #[error("pass streak {0} is out of range")]
    PassStreak(u8),
}
