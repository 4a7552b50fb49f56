use std::fmt;

use super::bitboard::{geometry, Geometry, PointSet, MAX_SIZE, MIN_SIZE};
use super::zobrist::KEYS;
use super::{Cell, Color, IllegalMove, Move, Point, PositionError};

/// A maximal orthogonally connected set of same-coloured stones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub color: Color,
    pub stones: PointSet,
    pub liberties: PointSet,
}

/// Full game state. Values are immutable; `play` returns a new position.
///
/// `path` holds the digests of every position on the current line of play,
/// including this one, and drives positional superko. Equality ignores the
/// path and the last-move marker.
#[derive(Clone, Debug)]
pub struct BoardPosition {
    size: u8,
    black: u128,
    white: u128,
    to_move: Color,
    ko_ban: Option<Point>,
    pass_streak: u8,
    last_move: Option<Point>,
    hash: u64,
    path: Vec<u64>,
}

impl PartialEq for BoardPosition {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
            && self.black == other.black
            && self.white == other.white
            && self.to_move == other.to_move
            && self.ko_ban == other.ko_ban
            && self.pass_streak == other.pass_streak
    }
}

impl Eq for BoardPosition {}

/// Outcome of placing a stone, before the superko check.
struct Placement {
    own: u128,
    opp: u128,
    captured: u128,
    ko_ban: Option<Point>,
    hash: u64,
}

impl BoardPosition {
    pub fn empty(size: u8) -> Result<Self, PositionError> {
        Self::from_stones(size, 0, 0, Color::Black)
    }

    pub fn from_cells(size: u8, cells: &[Cell], to_move: Color) -> Result<Self, PositionError> {
        check_size(size)?;
        let area = size as usize * size as usize;
        if cells.len() != area {
            return Err(PositionError::CellCount {
                expected: area,
                got: cells.len(),
            });
        }
        let (mut black, mut white) = (0u128, 0u128);
        for (i, c) in cells.iter().enumerate() {
            match c {
                Cell::Black => black |= 1 << i,
                Cell::White => white |= 1 << i,
                Cell::Empty => {}
            }
        }
        Self::from_stones(size, black, white, to_move)
    }

    pub(crate) fn from_stones(
        size: u8,
        black: u128,
        white: u128,
        to_move: Color,
    ) -> Result<Self, PositionError> {
        check_size(size)?;
        let g = geometry(size);
        debug_assert_eq!(black & white, 0);
        debug_assert_eq!((black | white) & !g.board, 0);
        let mut pos = BoardPosition {
            size,
            black,
            white,
            to_move,
            ko_ban: None,
            pass_streak: 0,
            last_move: None,
            hash: 0,
            path: Vec::new(),
        };
        pos.validate()?;
        pos.rehash();
        Ok(pos)
    }

    pub fn with_to_move(mut self, to_move: Color) -> Self {
        self.to_move = to_move;
        self.rehash();
        self
    }

    pub fn with_ko_ban(mut self, ko: Option<Point>) -> Result<Self, PositionError> {
        if let Some(p) = ko {
            if p.index() >= self.area() || (self.black | self.white) >> p.index() & 1 == 1 {
                return Err(PositionError::KoNotEmpty(p.label(self.size)));
            }
        }
        self.ko_ban = ko;
        self.rehash();
        Ok(self)
    }

    pub fn with_pass_streak(mut self, streak: u8) -> Result<Self, PositionError> {
        if streak > 2 {
            return Err(PositionError::PassStreak(streak));
        }
        self.pass_streak = streak;
        Ok(self)
    }

    /// Same state with the path history reset to this position alone.
    pub fn with_fresh_history(&self) -> Self {
        let mut pos = self.clone();
        pos.path.clear();
        pos.path.push(pos.hash);
        pos.last_move = None;
        pos
    }

    fn rehash(&mut self) {
        let mut h = KEYS.stones_hash(Color::Black, self.black)
            ^ KEYS.stones_hash(Color::White, self.white)
            ^ KEYS.to_move(self.to_move);
        if let Some(k) = self.ko_ban {
            h ^= KEYS.ko(k);
        }
        self.hash = h;
        self.path.clear();
        self.path.push(h);
    }

    fn validate(&self) -> Result<(), PositionError> {
        let g = self.geom();
        let empty = self.empty_bits();
        for stones in [self.black, self.white] {
            for block in g.components(stones) {
                if g.adjacent(block) & empty == 0 {
                    let first = Point::new(block.trailing_zeros() as u8);
                    return Err(PositionError::ZeroLiberties(first.label(self.size)));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn geom(&self) -> &'static Geometry {
        geometry(self.size)
    }

    #[inline]
    pub fn size(&self) -> u8 {
        self.size
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.size as usize * self.size as usize
    }

    #[inline]
    pub fn to_move(&self) -> Color {
        self.to_move
    }

    #[inline]
    pub fn ko_ban(&self) -> Option<Point> {
        self.ko_ban
    }

    #[inline]
    pub fn pass_streak(&self) -> u8 {
        self.pass_streak
    }

    #[inline]
    pub fn last_move(&self) -> Option<Point> {
        self.last_move
    }

    /// 64-bit Zobrist digest over (cells, side to move, ko ban).
    #[inline]
    pub fn digest(&self) -> u64 {
        self.hash
    }

    pub fn path_hashes(&self) -> &[u64] {
        &self.path
    }

    pub fn cell(&self, p: Point) -> Cell {
        if self.black >> p.index() & 1 == 1 {
            Cell::Black
        } else if self.white >> p.index() & 1 == 1 {
            Cell::White
        } else {
            Cell::Empty
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        (0..self.area() as u8).map(|i| self.cell(Point::new(i))).collect()
    }

    #[inline]
    pub(crate) fn stone_bits(&self, color: Color) -> u128 {
        match color {
            Color::Black => self.black,
            Color::White => self.white,
        }
    }

    #[inline]
    pub(crate) fn empty_bits(&self) -> u128 {
        self.geom().board & !(self.black | self.white)
    }

    pub fn stones(&self, color: Color) -> PointSet {
        PointSet::from_bits(self.stone_bits(color))
    }

    pub fn empty_points(&self) -> PointSet {
        PointSet::from_bits(self.empty_bits())
    }

    pub fn blocks(&self) -> Vec<Block> {
        let g = self.geom();
        let empty = self.empty_bits();
        let mut out: Vec<Block> = [Color::Black, Color::White]
            .into_iter()
            .flat_map(|color| {
                g.components(self.stone_bits(color))
                    .into_iter()
                    .map(move |b| Block {
                        color,
                        stones: PointSet::from_bits(b),
                        liberties: PointSet::from_bits(g.adjacent(b) & empty),
                    })
            })
            .collect();
        out.sort_by_key(|b| b.stones.bits().trailing_zeros());
        out
    }

    /// The block containing `p`, if `p` holds a stone.
    pub fn block_at(&self, p: Point) -> Option<Block> {
        let color = match self.cell(p) {
            Cell::Empty => return None,
            Cell::Black => Color::Black,
            Cell::White => Color::White,
        };
        let stones = self.block_bits(p.index(), color);
        Some(Block {
            color,
            stones: PointSet::from_bits(stones),
            liberties: PointSet::from_bits(self.geom().adjacent(stones) & self.empty_bits()),
        })
    }

    #[inline]
    pub(crate) fn block_bits(&self, index: usize, color: Color) -> u128 {
        self.geom().flood(1u128 << index, self.stone_bits(color))
    }

    /// Smallest liberty count over `color`'s blocks.
    pub fn min_liberties(&self, color: Color) -> Option<usize> {
        let g = self.geom();
        let empty = self.empty_bits();
        g.components(self.stone_bits(color))
            .into_iter()
            .map(|b| (g.adjacent(b) & empty).count_ones() as usize)
            .min()
    }

    fn place(&self, p: Point, color: Color) -> Result<Placement, IllegalMove> {
        let g = self.geom();
        let bit = 1u128 << p.index();
        if (self.black | self.white) & bit != 0 {
            return Err(IllegalMove::Occupied);
        }
        if self.ko_ban == Some(p) && color == self.to_move {
            return Err(IllegalMove::Ko);
        }
        let own = self.stone_bits(color) | bit;
        let mut opp = self.stone_bits(color.opponent());
        let mut empty = g.board & !(own | opp);
        let mut captured = 0u128;
        let mut candidates = g.neighbors(bit) & opp;
        while candidates != 0 {
            let seed = candidates & candidates.wrapping_neg();
            let block = g.flood(seed, opp);
            candidates &= !block;
            if g.adjacent(block) & empty == 0 {
                captured |= block;
            }
        }
        opp &= !captured;
        empty |= captured;
        let own_block = g.flood(bit, own);
        let libs = g.adjacent(own_block) & empty;
        if libs == 0 {
            return Err(IllegalMove::Suicide);
        }
        let ko_ban = if captured.count_ones() == 1 && own_block == bit && libs.count_ones() == 1
        {
            Some(Point::new(captured.trailing_zeros() as u8))
        } else {
            None
        };
        let mut hash = self.hash
            ^ KEYS.stone(color, p)
            ^ KEYS.stones_hash(color.opponent(), captured)
            ^ KEYS.to_move(Color::White);
        if let Some(k) = self.ko_ban {
            hash ^= KEYS.ko(k);
        }
        if let Some(k) = ko_ban {
            hash ^= KEYS.ko(k);
        }
        Ok(Placement {
            own,
            opp,
            captured,
            ko_ban,
            hash,
        })
    }

    fn child(&self, p: Point, pl: Placement) -> BoardPosition {
        let (black, white) = match self.to_move {
            Color::Black => (pl.own, pl.opp),
            Color::White => (pl.opp, pl.own),
        };
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(pl.hash);
        BoardPosition {
            size: self.size,
            black,
            white,
            to_move: self.to_move.opponent(),
            ko_ban: pl.ko_ban,
            pass_streak: 0,
            last_move: Some(p),
            hash: pl.hash,
            path,
        }
    }

    fn pass(&self) -> BoardPosition {
        let mut hash = self.hash ^ KEYS.to_move(Color::White);
        if let Some(k) = self.ko_ban {
            hash ^= KEYS.ko(k);
        }
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(hash);
        BoardPosition {
            size: self.size,
            black: self.black,
            white: self.white,
            to_move: self.to_move.opponent(),
            ko_ban: None,
            pass_streak: (self.pass_streak + 1).min(2),
            last_move: None,
            hash,
            path,
        }
    }

    pub fn play(&self, mv: Move) -> Result<BoardPosition, IllegalMove> {
        match mv {
            Move::Pass => Ok(self.pass()),
            Move::Play(p) => {
                if p.index() >= self.area() {
                    return Err(IllegalMove::Occupied);
                }
                let pl = self.place(p, self.to_move)?;
                if self.path.contains(&pl.hash) {
                    return Err(IllegalMove::Superko);
                }
                Ok(self.child(p, pl))
            }
        }
    }

    /// Number of stones `mv` would capture, ignoring superko.
    pub fn captures_of(&self, p: Point) -> Option<usize> {
        self.place(p, self.to_move)
            .ok()
            .map(|pl| pl.captured.count_ones() as usize)
    }

    /// Every legal successor in ascending point order, then the pass.
    /// The flag reports whether any point move was rejected by superko alone.
    pub(crate) fn successors(&self) -> (Vec<(Move, BoardPosition)>, bool) {
        let mut out = Vec::new();
        let mut superko_hit = false;
        let mut empty = self.empty_bits();
        while empty != 0 {
            let i = empty.trailing_zeros() as u8;
            empty &= empty - 1;
            let p = Point::new(i);
            if let Ok(pl) = self.place(p, self.to_move) {
                if self.path.contains(&pl.hash) {
                    superko_hit = true;
                    continue;
                }
                out.push((Move::Play(p), self.child(p, pl)));
            }
        }
        out.push((Move::Pass, self.pass()));
        (out, superko_hit)
    }

    pub fn legal_moves(&self) -> Vec<Move> {
        self.successors().0.into_iter().map(|(m, _)| m).collect()
    }

    /// Empty points where `color` would commit suicide, ignoring ko and superko.
    pub fn suicide_points(&self, color: Color) -> PointSet {
        let g = self.geom();
        let empty = self.empty_bits();
        let mut out = 0u128;
        let mut cand = empty & !g.neighbors(empty);
        while cand != 0 {
            let i = cand.trailing_zeros();
            cand &= cand - 1;
            if let Err(IllegalMove::Suicide) = self.place(Point::new(i as u8), color) {
                out |= 1 << i;
            }
        }
        PointSet::from_bits(out)
    }
}

fn check_size(size: u8) -> Result<(), PositionError> {
    if (MIN_SIZE..=MAX_SIZE).contains(&size) {
        Ok(())
    } else {
        Err(PositionError::BoardSize(size))
    }
}

/// Canonical text form: diagram rows, then `to_move`, then optional `ko` and
/// `passes` lines.
impl fmt::Display for BoardPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.size;
        for r in 0..n {
            for c in 0..n {
                let ch = match self.cell(Point::from_rc(r, c, n)) {
                    Cell::Empty => '.',
                    Cell::Black => 'X',
                    Cell::White => 'O',
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "to_move: {}", self.to_move)?;
        if let Some(k) = self.ko_ban {
            writeln!(f, "ko: {}", k.label(n))?;
        }
        if self.pass_streak > 0 {
            writeln!(f, "passes: {}", self.pass_streak)?;
        }
        Ok(())
    }
}
