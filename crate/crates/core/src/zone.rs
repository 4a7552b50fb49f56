//! Relevance zones: closure, propagation through OR and AND nodes, and the
//! patterns stored in the pattern table.
//!
//! A zone is closed at a position when every block with a stone in the zone
//! lies wholly inside it together with all of its liberties, and every white
//! block adjacent to a black block of the zone is inside as well. Any
//! position that agrees with the source on a closed zone then has the same
//! black blocks with the same liberties inside the zone, while white blocks
//! inside can only have gained liberties. Moves played outside the zone
//! cannot touch either.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::game::{BoardPosition, Cell, Color, GameStatus, Move, Point, PointSet};

pub type Zone = PointSet;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ZoneError {
    #[error("position has an active ko ban")]
    KoBanActive,
    #[error("zone is not closed at the position")]
    NotClosed,
    #[error("pattern contents do not match the zone size")]
    ContentLength,
    #[error("board size mismatch")]
    SizeMismatch,
}

/// Smallest closed superset of `zone` at `pos`.
pub fn closure(pos: &BoardPosition, zone: Zone) -> Zone {
    let g = pos.geom();
    let black = pos.stone_bits(Color::Black);
    let white = pos.stone_bits(Color::White);
    let empty = pos.empty_bits();
    let mut z = zone.bits() & g.board;
    loop {
        let prev = z;
        let b = g.flood(z & black, black);
        let w = g.flood((z & white) | (g.neighbors(b) & white), white);
        z |= b | w | (g.adjacent(b | w) & empty);
        if z == prev {
            return Zone::from_bits(z);
        }
    }
}

/// Points whose contents decide the local effect of playing at `p`: the
/// played block and its liberties after the move, adjacent opponent blocks
/// with their liberties before it, and the neighbourhood of any captured
/// stones.
pub(crate) fn footprint(pos: &BoardPosition, p: Point) -> u128 {
    let g = pos.geom();
    let mover = pos.to_move();
    let bit = 1u128 << p.index();
    let own = pos.stone_bits(mover) | bit;
    let opp = pos.stone_bits(mover.opponent());
    let empty_before = pos.empty_bits();
    let adj_opp = g.flood(g.neighbors(bit) & opp, opp);
    let after_empty = empty_before & !bit;
    let mut captured = 0u128;
    for block in g.components(adj_opp) {
        if g.adjacent(block) & after_empty == 0 {
            captured |= block;
        }
    }
    let own_block = g.flood(bit, own);
    let own_libs = g.adjacent(own_block) & (after_empty | captured);
    bit | own_block
        | own_libs
        | adj_opp
        | (g.adjacent(adj_opp) & empty_before)
        | captured
        | g.neighbors(captured)
}

/// Zone of an OR node whose winning move is `mv` and whose proven child
/// has zone `child_zone`.
pub fn or_propagate(pos: &BoardPosition, mv: Move, child_zone: Zone) -> Zone {
    match mv {
        Move::Pass => closure(pos, child_zone),
        Move::Play(p) => closure(pos, Zone::from_bits(child_zone.bits() | footprint(pos, p))),
    }
}

/// Closes `union` at an AND node and extends it until every empty in-zone
/// point where Black's move is suicide has its neighbours inside, so that
/// the move stays illegal in any matching position. Returns the zone and
/// the legal Black points it contains.
pub(crate) fn and_zone(pos: &BoardPosition, legal: u128, suicide: u128, union: Zone) -> (Zone, u128) {
    let g = pos.geom();
    let mut z = closure(pos, union);
    loop {
        let s = suicide & z.bits();
        let grown = closure(pos, Zone::from_bits(z.bits() | g.neighbors(s)));
        if grown == z {
            break;
        }
        z = grown;
    }
    (z, legal & z.bits())
}

/// Fixed point for an AND node. `refutations` maps each refuted Black move
/// to the zone of its proven child expanded by the move's footprint (see
/// [`refutation_zone`]). Returns the zone when every legal Black move
/// inside it, and the pass, is refuted; otherwise the moves still missing.
pub fn and_closure(pos: &BoardPosition, refutations: &BTreeMap<Move, Zone>) -> Result<Zone, Vec<Move>> {
    let legal = pos
        .legal_moves()
        .into_iter()
        .filter_map(Move::point)
        .fold(0u128, |acc, p| acc | 1 << p.index());
    let suicide = pos.suicide_points(pos.to_move()).bits();
    let union = refutations.values().fold(Zone::EMPTY, |acc, z| acc | *z);
    let (zone, required) = and_zone(pos, legal, suicide, union);
    let mut missing: Vec<Move> = Zone::from_bits(required)
        .iter()
        .map(Move::Play)
        .filter(|m| !refutations.contains_key(m))
        .collect();
    if !refutations.contains_key(&Move::Pass) {
        missing.push(Move::Pass);
    }
    if missing.is_empty() {
        Ok(zone)
    } else {
        Err(missing)
    }
}

/// Zone contributed by refuting Black's move `mv`; same expansion as an OR
/// move.
pub fn refutation_zone(pos: &BoardPosition, mv: Move, child_zone: Zone) -> Zone {
    or_propagate(pos, mv, child_zone)
}

/// A proven White win restricted to a zone: the RZ pattern-table unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RZPattern {
    size: u8,
    zone: Zone,
    black: u128,
    white: u128,
    to_move: Color,
    outcome: GameStatus,
    ko_free: bool,
}

impl RZPattern {
    /// Builds a pattern from explicit contents, one cell per zone point in
    /// ascending order.
    pub fn new(
        size: u8,
        zone: Zone,
        contents: &[Cell],
        to_move: Color,
        outcome: GameStatus,
        ko_free: bool,
    ) -> Result<Self, ZoneError> {
        if !zone.is_subset(Zone::full(size)) {
            return Err(ZoneError::SizeMismatch);
        }
        if contents.len() != zone.len() {
            return Err(ZoneError::ContentLength);
        }
        let (mut black, mut white) = (0u128, 0u128);
        for (p, c) in zone.iter().zip(contents) {
            match c {
                Cell::Black => black |= 1 << p.index(),
                Cell::White => white |= 1 << p.index(),
                Cell::Empty => {}
            }
        }
        Ok(RZPattern {
            size,
            zone,
            black,
            white,
            to_move,
            outcome,
            ko_free,
        })
    }

    pub fn size(&self) -> u8 {
        self.size
    }

    pub fn zone(&self) -> Zone {
        self.zone
    }

    pub fn to_move(&self) -> Color {
        self.to_move
    }

    pub fn outcome(&self) -> GameStatus {
        self.outcome
    }

    pub fn ko_free(&self) -> bool {
        self.ko_free
    }

    pub fn contents(&self) -> Vec<Cell> {
        self.zone
            .iter()
            .map(|p| {
                if self.black >> p.index() & 1 == 1 {
                    Cell::Black
                } else if self.white >> p.index() & 1 == 1 {
                    Cell::White
                } else {
                    Cell::Empty
                }
            })
            .collect()
    }

    pub(crate) fn stone_masks(&self) -> (u128, u128) {
        (self.black, self.white)
    }
}

/// Extracts the pattern of a proven White win at `pos` over `zone`.
pub fn pattern_of(pos: &BoardPosition, zone: Zone, ko_free: bool) -> Result<RZPattern, ZoneError> {
    if pos.ko_ban().is_some() {
        return Err(ZoneError::KoBanActive);
    }
    if closure(pos, zone) != zone {
        return Err(ZoneError::NotClosed);
    }
    let z = zone.bits();
    Ok(RZPattern {
        size: pos.size(),
        zone,
        black: pos.stone_bits(Color::Black) & z,
        white: pos.stone_bits(Color::White) & z,
        to_move: pos.to_move(),
        outcome: GameStatus::WhiteWin,
        ko_free,
    })
}

/// Whether `pos` agrees with `pattern` on every zone point, with the same
/// side to move and no ko ban. Black-to-move positions right after a pass
/// never match: Black could end the game by passing there.
pub fn matches(pattern: &RZPattern, pos: &BoardPosition) -> bool {
    let z = pattern.zone.bits();
    pos.size() == pattern.size
        && pos.to_move() == pattern.to_move
        && pos.ko_ban().is_none()
        && !(pos.to_move() == Color::Black && pos.pass_streak() > 0)
        && pos.stone_bits(Color::Black) & z == pattern.black
        && pos.stone_bits(Color::White) & z == pattern.white
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&str], to_move: Color) -> BoardPosition {
        let cells: Vec<Cell> = rows
            .iter()
            .flat_map(|r| r.chars())
            .map(|ch| match ch {
                'X' => Cell::Black,
                'O' => Cell::White,
                _ => Cell::Empty,
            })
            .collect();
        BoardPosition::from_cells(rows.len() as u8, &cells, to_move).unwrap()
    }

    fn pt(r: u8, c: u8) -> Point {
        Point::from_rc(r, c, 5)
    }

    fn zone_of(points: &[(u8, u8)]) -> Zone {
        points.iter().map(|&(r, c)| pt(r, c)).collect()
    }

    #[test]
    fn closure_grows_to_block_and_liberties() {
        // Black block b2,c2,d2 (row 1) with liberties b1,c1,d1,a2,e2,b3,c3,d3.
        // Hand count: 3 stones + 8 liberties = 11 points.
        let pos = from_rows(&[".....", ".XXX.", ".....", ".....", "....."], Color::White);
        let z = closure(&pos, zone_of(&[(1, 2)]));
        let expected = zone_of(&[
            (1, 1), (1, 2), (1, 3),
            (0, 1), (0, 2), (0, 3),
            (1, 0), (1, 4),
            (2, 1), (2, 2), (2, 3),
        ]);
        assert_eq!(z, expected);
    }

    #[test]
    fn closure_of_three_stone_block_with_five_liberties() {
        // Corner block a1,b1,a2: liberties c1,b2,a3 plus... hand count below.
        // a1(0,0) b1(0,1) a2(1,0); liberties c1(0,2) b2(1,1) a3(2,0) = 3.
        // Use an edge block instead: a1,a2,a3 has liberties b1,b2,b3,a4 = 4.
        // Edge block b1,c1,d1 has liberties a1,e1,b2,c2,d2 = 5.
        let pos = from_rows(&[".XXX.", ".....", ".....", ".....", "....."], Color::White);
        let z = closure(&pos, zone_of(&[(0, 1)]));
        assert_eq!(z.len(), 8);
        assert_eq!(
            z,
            zone_of(&[(0, 1), (0, 2), (0, 3), (0, 0), (0, 4), (1, 1), (1, 2), (1, 3)])
        );
    }

    #[test]
    fn closure_pulls_white_neighbours_of_black_blocks() {
        let pos = from_rows(&[".XO..", ".....", ".....", ".....", "....."], Color::White);
        let z = closure(&pos, zone_of(&[(0, 1)]));
        // black b1 with liberties a1,b2; white c1 with liberties d1,c2.
        assert_eq!(
            z,
            zone_of(&[(0, 1), (0, 0), (1, 1), (0, 2), (0, 3), (1, 2)])
        );
        // A white block does not pull in adjacent black blocks.
        let zw = closure(&pos, zone_of(&[(0, 2)]));
        assert_eq!(zw, zone_of(&[(0, 2), (0, 3), (1, 2)]));
    }

    #[test]
    fn closure_of_empty_points_is_unchanged() {
        let pos = from_rows(&["XX...", ".....", ".....", "...OO", "....."], Color::White);
        let z = zone_of(&[(2, 2), (4, 0), (1, 4)]);
        assert_eq!(closure(&pos, z), z);
    }

    #[test]
    fn pass_propagation_keeps_closed_zone() {
        let pos = from_rows(&[".XXX.", ".....", ".....", ".....", "....."], Color::White);
        let child = closure(&pos, zone_of(&[(0, 1)]));
        assert_eq!(or_propagate(&pos, Move::Pass, child), child);
    }

    #[test]
    fn isolated_move_covers_its_neighbours() {
        let pos = BoardPosition::empty(5).unwrap().with_to_move(Color::White);
        let z = or_propagate(&pos, Move::Play(pt(2, 2)), Zone::EMPTY);
        assert_eq!(z, zone_of(&[(2, 2), (1, 2), (3, 2), (2, 1), (2, 3)]));
        let corner = or_propagate(&pos, Move::Play(pt(0, 0)), Zone::EMPTY);
        assert_eq!(corner, zone_of(&[(0, 0), (0, 1), (1, 0)]));
    }

    #[test]
    fn capture_propagation_covers_captured_block() {
        // White captures the black pair a1,b1 by playing c1.
        let pos = from_rows(&["XX...", "OO...", ".....", ".....", "....."], Color::White);
        let z = or_propagate(&pos, Move::Play(pt(0, 2)), Zone::EMPTY);
        for p in [(0, 0), (0, 1), (0, 2)] {
            assert!(z.contains(pt(p.0, p.1)), "missing {p:?}");
        }
        // Neighbours of the captured stones include the white a2,b2 block,
        // whose liberties come with it.
        assert!(z.contains(pt(1, 0)) && z.contains(pt(2, 0)));
        assert_eq!(closure(&pos, z), z);
    }

    #[test]
    fn and_closure_requires_pass_first() {
        let pos = from_rows(&[".....", ".....", ".....", ".....", "....."], Color::Black);
        let missing = and_closure(&pos, &BTreeMap::new()).unwrap_err();
        assert_eq!(missing, vec![Move::Pass]);
    }

    #[test]
    fn and_closure_reports_in_zone_moves() {
        let pos = from_rows(&[".O.OX", "OOOOX", "XXXXX", ".....", "....."], Color::Black);
        let mut refs = BTreeMap::new();
        refs.insert(Move::Pass, closure(&pos, zone_of(&[(0, 1)])));
        // a1 and c1 are suicide for Black, so only the pass is required.
        let z = and_closure(&pos, &refs).unwrap();
        assert!(z.contains(pt(0, 0)) && z.contains(pt(0, 2)));

        let open = from_rows(&["..O..", "OOO..", ".....", ".....", "....."], Color::Black);
        let mut refs = BTreeMap::new();
        refs.insert(Move::Pass, closure(&open, zone_of(&[(0, 2)])));
        let missing = and_closure(&open, &refs).unwrap_err();
        assert!(missing.contains(&Move::Play(pt(0, 1))));
        assert!(missing.contains(&Move::Play(pt(0, 3))));
        assert!(!missing.contains(&Move::Pass));
    }

    #[test]
    fn and_closure_full_board() {
        let pos = from_rows(&["XXXXX", "XXXXX", "XX.XX", "XXXXX", "XXXXX"], Color::Black);
        let mut refs = BTreeMap::new();
        refs.insert(Move::Pass, Zone::full(5));
        assert_eq!(and_closure(&pos, &refs), Ok(Zone::full(5)));
    }

    #[test]
    fn pattern_matching_semantics() {
        let pos = from_rows(&[".O.OX", "OOOOX", "XXXXX", ".....", "....."], Color::Black);
        let zone = closure(&pos, pos.benson_alive(Color::White).life_zone);
        let pat = pattern_of(&pos, zone, true).unwrap();
        assert!(matches(&pat, &pos));
        assert_eq!(pat.contents().len(), zone.len());

        let outside = from_rows(&[".O.OX", "OOOOX", "XXXXX", ".....", "..O.."], Color::Black);
        assert!(!zone.contains(pt(4, 2)));
        assert!(matches(&pat, &outside));

        let flipped = from_rows(&[".O.OX", "OOOOX", "XXXXX", ".....", "....."], Color::White);
        assert!(!matches(&pat, &flipped));
        let cell_flip = from_rows(&["...OX", "OOOOX", "XXXXX", ".....", "....."], Color::Black);
        assert!(!matches(&pat, &cell_flip));
    }

    #[test]
    fn pattern_of_rejects_ko_and_open_zones() {
        let pos = from_rows(&[".OX..", "O.OX.", ".OX..", ".....", "....."], Color::Black);
        let ko = pos.play(Move::Play(pt(1, 1))).unwrap();
        assert_eq!(
            pattern_of(&ko, Zone::full(5), true),
            Err(ZoneError::KoBanActive)
        );
        assert_eq!(
            pattern_of(&pos, zone_of(&[(0, 1)]), true),
            Err(ZoneError::NotClosed)
        );
    }
}
