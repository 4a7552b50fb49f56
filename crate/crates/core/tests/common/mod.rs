//! Plain array-based reference rules, Benson check and exhaustive minimax,
//! written independently of the library's bitboards, plus the random
//! positions, scan-based matching and report checks the integration tests
//! share.
#![allow(dead_code)]

use std::collections::HashSet;

use rzr::game::{BoardPosition, Cell, Color, Move, Point, PointSet};
use rzr::reduce::ReductionReport;
use rzr::table::RZTable;
use rzr::zone::{closure, pattern_of, RZPattern};

pub const EMPTY: u8 = 0;
pub const BLACK: u8 = 1;
pub const WHITE: u8 = 2;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RefBoard {
    pub n: usize,
    pub cells: Vec<u8>,
    pub to_move: u8,
    pub ko: Option<usize>,
    pub passes: u8,
}

/// Repetition key: cells, side to move, ko point.
pub type Key = (Vec<u8>, u8, Option<usize>);

pub fn neighbours(n: usize, i: usize) -> Vec<usize> {
    let (r, c) = (i / n, i % n);
    let mut out = Vec::with_capacity(4);
    if r > 0 {
        out.push(i - n);
    }
    if r + 1 < n {
        out.push(i + n);
    }
    if c > 0 {
        out.push(i - 1);
    }
    if c + 1 < n {
        out.push(i + 1);
    }
    out
}

fn other(c: u8) -> u8 {
    3 - c
}

impl RefBoard {
    pub fn from_position(pos: &BoardPosition) -> Self {
        RefBoard {
            n: pos.size() as usize,
            cells: pos
                .cells()
                .iter()
                .map(|c| match c {
                    Cell::Empty => EMPTY,
                    Cell::Black => BLACK,
                    Cell::White => WHITE,
                })
                .collect(),
            to_move: match pos.to_move() {
                Color::Black => BLACK,
                Color::White => WHITE,
            },
            ko: pos.ko_ban().map(|p| p.index()),
            passes: pos.pass_streak(),
        }
    }

    pub fn key(&self) -> Key {
        (self.cells.clone(), self.to_move, self.ko)
    }

    /// Stones and liberties of the block at `i`.
    pub fn group(&self, i: usize) -> (Vec<usize>, HashSet<usize>) {
        let color = self.cells[i];
        let mut stones = vec![i];
        let mut seen = HashSet::from([i]);
        let mut libs = HashSet::new();
        let mut k = 0;
        while k < stones.len() {
            let s = stones[k];
            k += 1;
            for nb in neighbours(self.n, s) {
                if self.cells[nb] == EMPTY {
                    libs.insert(nb);
                } else if self.cells[nb] == color && seen.insert(nb) {
                    stones.push(nb);
                }
            }
        }
        (stones, libs)
    }

    /// Board after `mv` (None = pass), ignoring superko.
    pub fn play(&self, mv: Option<usize>) -> Option<RefBoard> {
        let mut next = self.clone();
        next.to_move = other(self.to_move);
        next.ko = None;
        let Some(i) = mv else {
            next.passes = (self.passes + 1).min(2);
            return Some(next);
        };
        if self.cells[i] != EMPTY || self.ko == Some(i) {
            return None;
        }
        next.passes = 0;
        next.cells[i] = self.to_move;
        let mut captured = Vec::new();
        for nb in neighbours(self.n, i) {
            if next.cells[nb] == other(self.to_move) {
                let (stones, libs) = next.group(nb);
                if libs.is_empty() {
                    for s in stones {
                        next.cells[s] = EMPTY;
                        captured.push(s);
                    }
                }
            }
        }
        let (own, libs) = next.group(i);
        if libs.is_empty() {
            return None;
        }
        captured.sort();
        captured.dedup();
        if captured.len() == 1 && own.len() == 1 && libs.len() == 1 {
            next.ko = Some(captured[0]);
        }
        Some(next)
    }

    /// Legal successors given the history `path` (positional superko on
    /// the repetition key; passes are always legal).
    pub fn successors(&self, path: &[Key]) -> Vec<(Option<usize>, RefBoard)> {
        let mut out = Vec::new();
        for i in 0..self.cells.len() {
            if let Some(b) = self.play(Some(i)) {
                if !path.contains(&b.key()) {
                    out.push((Some(i), b));
                }
            }
        }
        out.push((None, self.play(None).unwrap()));
        out
    }

    /// Benson's algorithm for White, from scratch.
    pub fn white_alive(&self) -> bool {
        let n2 = self.cells.len();
        // Regions: components of non-white points.
        let mut region_of = vec![usize::MAX; n2];
        let mut regions: Vec<Vec<usize>> = Vec::new();
        for i in 0..n2 {
            if self.cells[i] == WHITE || region_of[i] != usize::MAX {
                continue;
            }
            let id = regions.len();
            let mut pts = vec![i];
            region_of[i] = id;
            let mut k = 0;
            while k < pts.len() {
                let p = pts[k];
                k += 1;
                for nb in neighbours(self.n, p) {
                    if self.cells[nb] != WHITE && region_of[nb] == usize::MAX {
                        region_of[nb] = id;
                        pts.push(nb);
                    }
                }
            }
            regions.push(pts);
        }
        let mut block_of = vec![usize::MAX; n2];
        let mut blocks: Vec<(Vec<usize>, HashSet<usize>)> = Vec::new();
        for i in 0..n2 {
            if self.cells[i] == WHITE && block_of[i] == usize::MAX {
                let g = self.group(i);
                for &s in &g.0 {
                    block_of[s] = blocks.len();
                }
                blocks.push(g);
            }
        }
        if blocks.is_empty() {
            return false;
        }
        let borders = |r: &Vec<usize>| -> HashSet<usize> {
            let mut out = HashSet::new();
            for &p in r {
                for nb in neighbours(self.n, p) {
                    if self.cells[nb] == WHITE {
                        out.insert(block_of[nb]);
                    }
                }
            }
            out
        };
        let vital = |r: &Vec<usize>, b: usize| -> bool {
            let empties: Vec<usize> = r.iter().copied().filter(|&p| self.cells[p] == EMPTY).collect();
            !empties.is_empty()
                && borders(r).contains(&b)
                && empties.iter().all(|p| blocks[b].1.contains(p))
        };
        let mut live_b: Vec<bool> = vec![true; blocks.len()];
        let mut live_r: Vec<bool> = vec![true; regions.len()];
        loop {
            let mut changed = false;
            for b in 0..blocks.len() {
                if !live_b[b] {
                    continue;
                }
                let count = (0..regions.len())
                    .filter(|&r| live_r[r] && vital(&regions[r], b))
                    .count();
                if count < 2 {
                    live_b[b] = false;
                    changed = true;
                }
            }
            for r in 0..regions.len() {
                if live_r[r] && borders(&regions[r]).iter().any(|&b| !live_b[b]) {
                    live_r[r] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        live_b.iter().any(|&x| x)
    }
}

const MAX_DEPTH: usize = 120;
const ID_DEPTH: u32 = 12;

/// Exhaustive minimax under path superko. Some(true) when White wins;
/// None when `limit` nodes were not enough.
pub fn white_wins(board: &RefBoard, path: &mut Vec<Key>, limit: &mut u64) -> Option<bool> {
    if *limit == 0 || path.len() > MAX_DEPTH {
        return None;
    }
    *limit -= 1;
    if board.white_alive() {
        return Some(true);
    }
    let white = board.to_move == WHITE;
    // Black can always end the game by passing back.
    if board.passes >= 2 || (!white && board.passes == 1) {
        return Some(false);
    }
    let mut unknown = false;
    for (_, child) in board.successors(path) {
        path.push(child.key());
        let r = white_wins(&child, path, limit);
        path.pop();
        match r {
            Some(w) if w == white => return Some(white),
            Some(_) => {}
            None => unknown = true,
        }
        if *limit == 0 {
            return None;
        }
    }
    if unknown {
        None
    } else {
        Some(!white)
    }
}

/// Whether White can force Benson life within `depth` plies. Some(false)
/// only means "not within the horizon".
pub fn white_lives_within(board: &RefBoard, path: &mut Vec<Key>, depth: u32, limit: &mut u64) -> Option<bool> {
    if *limit == 0 {
        return None;
    }
    *limit -= 1;
    if board.white_alive() {
        return Some(true);
    }
    let white = board.to_move == WHITE;
    if board.passes >= 2 || depth == 0 || (!white && board.passes == 1) {
        return Some(false);
    }
    for (_, child) in board.successors(path) {
        path.push(child.key());
        let r = white_lives_within(&child, path, depth - 1, limit);
        path.pop();
        match r {
            None => return None,
            Some(w) if w == white => return Some(white),
            Some(_) => {}
        }
    }
    Some(!white)
}

/// Decides `pos` exactly: iterative deepening finds White wins, then an
/// exhaustive search settles the rest. None when `limit` nodes per phase
/// were not enough.
pub fn oracle(pos: &BoardPosition, limit: u64) -> Option<bool> {
    let b = RefBoard::from_position(pos);
    let mut path = vec![b.key()];
    let mut budget = limit;
    for depth in 1..=ID_DEPTH {
        match white_lives_within(&b, &mut path, depth, &mut budget) {
            Some(true) => return Some(true),
            Some(false) => {}
            None => break,
        }
    }
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(256 << 20)
            .spawn_scoped(s, move || {
                let mut budget = limit;
                white_wins(&b, &mut path, &mut budget)
            })
            .unwrap()
            .join()
            .unwrap()
    })
}

pub fn from_rows(rows: &[&str], to_move: Color) -> BoardPosition {
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

pub fn pt(r: u8, c: u8, n: u8) -> Point {
    Point::from_rc(r, c, n)
}

pub fn mv_index(m: Move) -> Option<usize> {
    m.point().map(|p| p.index())
}

/// Small deterministic generator so fixtures do not depend on crate RNGs.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    pub fn chance(&mut self, pct: u64) -> bool {
        self.next() % 100 < pct
    }
}

pub fn random_position(rng: &mut Lcg, n: u8, white_pct: u64, black_pct: u64) -> BoardPosition {
    loop {
        let cells: Vec<Cell> = (0..n as usize * n as usize)
            .map(|_| {
                let x = rng.next() % 100;
                if x < white_pct {
                    Cell::White
                } else if x < white_pct + black_pct {
                    Cell::Black
                } else {
                    Cell::Empty
                }
            })
            .collect();
        let to_move = if rng.chance(50) { Color::White } else { Color::Black };
        if let Ok(p) = BoardPosition::from_cells(n, &cells, to_move) {
            return p;
        }
    }
}

/// `pos` with cells outside `keep` redrawn at random; None if invalid.
pub fn redraw_outside(rng: &mut Lcg, pos: &BoardPosition, keep: PointSet) -> Option<BoardPosition> {
    let cells: Vec<Cell> = pos
        .cells()
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            if keep.contains(Point::new(i as u8)) {
                c
            } else {
                [Cell::Empty, Cell::Black, Cell::White][rng.below(3)]
            }
        })
        .collect();
    BoardPosition::from_cells(pos.size(), &cells, pos.to_move()).ok()
}

/// Plain scan: same side to move, no ko ban, no pending Black pass, and
/// every zone cell equal.
pub fn scan_matches(pattern: &RZPattern, pos: &BoardPosition) -> bool {
    if pattern.to_move() != pos.to_move()
        || pos.ko_ban().is_some()
        || (pos.to_move() == Color::Black && pos.pass_streak() > 0)
    {
        return false;
    }
    pattern
        .zone()
        .iter()
        .zip(pattern.contents())
        .all(|(p, c)| pos.cell(p) == c)
}

/// Replays a reduction report and checks the loop's contract: strict
/// shrinkage inside the previous zone minus the banned point, constraint
/// disjointness, no retried points, and a stop after exactly `k`
/// consecutive failures unless no eligible point was left.
pub fn check_report(pos: &BoardPosition, r: &ReductionReport) -> Result<(), String> {
    use rzr::reduce::{IterationStatus, ReductionStatus, Strategy};
    let n = pos.size();
    let Some(initial) = r.initial else {
        return if r.status == ReductionStatus::Unsolved && r.iterations.is_empty() {
            Ok(())
        } else {
            Err("unsolved report with iterations".into())
        };
    };
    let mut best = initial;
    let mut failed = PointSet::EMPTY;
    let mut fails = 0;
    for it in &r.iterations {
        if fails >= r.k {
            return Err(format!("round {} ran after {} consecutive failures", it.round, fails));
        }
        let p = it.chosen_point;
        if !best.contains(p) || failed.contains(p) {
            return Err(format!("round {}: bad choice {}", it.round, p.label(n)));
        }
        let mut want = best.complement(n);
        want.insert(p);
        if it.constraint != want {
            return Err(format!("round {}: constraint is not outside + chosen", it.round));
        }
        match it.status {
            IterationStatus::Success => {
                let z = it.zone_after.ok_or("success without zone")?;
                let mut allowed = best;
                allowed.remove(p);
                if !z.is_subset(allowed) || z.len() >= best.len() {
                    return Err(format!("round {}: zone not a strict subset of best minus banned", it.round));
                }
                if z.intersects(it.constraint) {
                    return Err(format!("round {}: zone meets its constraint", it.round));
                }
                best = z;
                fails = 0;
            }
            IterationStatus::Fail => {
                failed.insert(p);
                fails += 1;
            }
        }
    }
    if r.final_zone_set != Some(best) || r.final_size != Some(best.len()) {
        return Err("final zone does not match the last accepted zone".into());
    }
    if fails < r.k {
        let eligible = match r.strategy {
            Strategy::Erosion => PointSet::from_bits(best.bits() & pos.empty_points().bits()),
            _ => best,
        };
        if !eligible.is_subset(failed) {
            return Err(format!("stopped after {fails} < k failures with eligible points left"));
        }
    }
    Ok(())
}

/// Random closed-zone patterns with the positions they came from.
pub fn random_table(seed: u64, count: usize) -> (RZTable, Vec<BoardPosition>) {
    let mut rng = Lcg(seed);
    let mut table = RZTable::new(5);
    let mut sources = Vec::new();
    while table.len() < count {
        let pos = random_position(&mut rng, 5, 35, 30);
        let seeds = PointSet::from_bits((rng.next() as u128) & (rng.next() as u128) & ((1 << 25) - 1));
        let zone = closure(&pos, seeds);
        if zone.is_empty() {
            continue;
        }
        let p = pattern_of(&pos, zone, true).unwrap();
        if table.insert(p).unwrap() as usize == sources.len() {
            sources.push(pos);
        }
    }
    (table, sources)
}

pub fn probes(seed: u64, table: &RZTable, sources: &[BoardPosition], count: usize) -> Vec<BoardPosition> {
    let mut rng = Lcg(seed);
    let mut out = Vec::new();
    while out.len() < count {
        if rng.chance(70) {
            let i = rng.below(sources.len());
            let zone = table.get(i as u32).map_or(PointSet::EMPTY, |p| p.zone());
            if let Some(p) = redraw_outside(&mut rng, &sources[i], zone) {
                out.push(p);
            }
        } else {
            out.push(random_position(&mut rng, 5, 35, 30));
        }
    }
    out
}

