//! Bitboards over boards of up to 9x9 points, stored in a `u128`.
//!
//! Point `i` of an `n x n` board is bit `i` in row-major order.

use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, Not, Sub};

use super::Point;

pub const MIN_SIZE: u8 = 5;
pub const MAX_SIZE: u8 = 9;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Geometry {
    pub n: u8,
    pub board: u128,
    not_first_col: u128,
    not_last_col: u128,
}

const fn build_geometry(n: u8) -> Geometry {
    let area = (n as u32) * (n as u32);
    let board = if area == 128 { u128::MAX } else { (1u128 << area) - 1 };
    let mut first_col = 0u128;
    let mut last_col = 0u128;
    let mut row = 0;
    while row < n as u32 {
        first_col |= 1u128 << (row * n as u32);
        last_col |= 1u128 << (row * n as u32 + n as u32 - 1);
        row += 1;
    }
    Geometry {
        n,
        board,
        not_first_col: board & !first_col,
        not_last_col: board & !last_col,
    }
}

static GEOMETRIES: [Geometry; 5] = [
    build_geometry(5),
    build_geometry(6),
    build_geometry(7),
    build_geometry(8),
    build_geometry(9),
];

#[inline]
pub(crate) fn geometry(n: u8) -> &'static Geometry {
    debug_assert!((MIN_SIZE..=MAX_SIZE).contains(&n));
    &GEOMETRIES[(n - MIN_SIZE) as usize]
}

impl Geometry {
    /// Points orthogonally adjacent to `b`, excluding `b` itself only when
    /// no point of `b` neighbours another.
    #[inline]
    pub fn neighbors(&self, b: u128) -> u128 {
        (((b << 1) & self.not_first_col)
            | ((b >> 1) & self.not_last_col)
            | (b << self.n)
            | (b >> self.n))
            & self.board
    }

    /// Strict neighbourhood: adjacent points not in `b`.
    #[inline]
    pub fn adjacent(&self, b: u128) -> u128 {
        self.neighbors(b) & !b
    }

    /// Connected component of `within` containing `seed`.
    #[inline]
    pub fn flood(&self, seed: u128, within: u128) -> u128 {
        let mut cur = seed & within;
        loop {
            let next = (cur | self.neighbors(cur)) & within;
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    pub fn components(&self, mut set: u128) -> Vec<u128> {
        let mut out = Vec::new();
        while set != 0 {
            let seed = set & set.wrapping_neg();
            let comp = self.flood(seed, set);
            out.push(comp);
            set &= !comp;
        }
        out
    }
}

/// A set of board points.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet(u128);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    #[inline]
    pub const fn from_bits(bits: u128) -> Self {
        PointSet(bits)
    }

    #[inline]
    pub const fn bits(self) -> u128 {
        self.0
    }

    /// Every point of an `n x n` board.
    pub fn full(n: u8) -> Self {
        PointSet(geometry(n).board)
    }

    pub fn single(p: Point) -> Self {
        PointSet(1u128 << p.index())
    }

    #[inline]
    pub fn contains(self, p: Point) -> bool {
        self.0 >> p.index() & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, p: Point) {
        self.0 |= 1u128 << p.index();
    }

    #[inline]
    pub fn remove(&mut self, p: Point) {
        self.0 &= !(1u128 << p.index());
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn intersects(self, other: PointSet) -> bool {
        self.0 & other.0 != 0
    }

    #[inline]
    pub fn is_subset(self, other: PointSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, n: u8) -> Self {
        PointSet(!self.0 & geometry(n).board)
    }

    /// Points in ascending index order.
    pub fn iter(self) -> PointIter {
        PointIter(self.0)
    }

    /// Lowercase hex, most significant nibble first, `ceil(n*n/4)` digits.
    pub fn to_hex(self, n: u8) -> String {
        let width = hex_width(n);
        format!("{:0width$x}", self.0, width = width)
    }

    pub fn from_hex(n: u8, text: &str) -> Option<Self> {
        let text = text.trim();
        if text.is_empty() || text.len() > hex_width(n) {
            return None;
        }
        if !text.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        let bits = u128::from_str_radix(text, 16).ok()?;
        if bits & !geometry(n).board != 0 {
            return None;
        }
        Some(PointSet(bits))
    }
}

pub(crate) fn hex_width(n: u8) -> usize {
    (n as usize * n as usize).div_ceil(4)
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|p| p.index())).finish()
    }
}

impl FromIterator<Point> for PointSet {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        let mut s = PointSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl BitOr for PointSet {
    type Output = PointSet;
    fn bitor(self, rhs: PointSet) -> PointSet {
        PointSet(self.0 | rhs.0)
    }
}

impl BitOrAssign for PointSet {
    fn bitor_assign(&mut self, rhs: PointSet) {
        self.0 |= rhs.0;
    }
}

impl BitAnd for PointSet {
    type Output = PointSet;
    fn bitand(self, rhs: PointSet) -> PointSet {
        PointSet(self.0 & rhs.0)
    }
}

impl BitAndAssign for PointSet {
    fn bitand_assign(&mut self, rhs: PointSet) {
        self.0 &= rhs.0;
    }
}

impl Sub for PointSet {
    type Output = PointSet;
    fn sub(self, rhs: PointSet) -> PointSet {
        PointSet(self.0 & !rhs.0)
    }
}

impl Not for PointSet {
    type Output = PointSet;
    /// Unbounded complement; mask with a board before use.
    fn not(self) -> PointSet {
        PointSet(!self.0)
    }
}

pub struct PointIter(u128);

impl Iterator for PointIter {
    type Item = Point;

    #[inline]
    fn next(&mut self) -> Option<Point> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(Point::new(i as u8))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for PointIter {}
