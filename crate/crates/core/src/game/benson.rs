//! Benson's unconditional life.
//!
//! Regions are the connected components of points not holding `color`'s
//! stones. A region is vital to a block when every empty point of the region
//! is a liberty of that block. Blocks with fewer than two vital regions are
//! dropped, regions bordering a dropped block are dropped, and the two steps
//! repeat until nothing changes.

use super::bitboard::PointSet;
use super::position::{Block, BoardPosition};
use super::{Color, GameStatus};

/// Blocks that are unconditionally alive, with the points that keep them so.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Life {
    pub alive: Vec<Block>,
    /// Alive stones plus every point of their vital regions.
    pub life_zone: PointSet,
}

impl Life {
    pub fn is_alive(&self) -> bool {
        !self.alive.is_empty()
    }
}

struct Analysis {
    blocks: Vec<u128>,
    libs: Vec<u128>,
    regions: Vec<u128>,
    /// Per region: bitmask over block indices it is vital to.
    vital: Vec<u64>,
    /// Per region: bitmask over block indices it borders.
    borders: Vec<u64>,
    block_alive: u64,
    region_alive: Vec<bool>,
}

impl Analysis {
    /// Surviving regions vital to at least one surviving block.
    fn kept(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.regions.len())
            .filter(|&ri| self.region_alive[ri] && self.vital[ri] & self.block_alive != 0)
    }

    fn alive_blocks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.blocks.len()).filter(|&bi| self.block_alive >> bi & 1 == 1)
    }
}

impl BoardPosition {
    fn benson_analysis(&self, color: Color) -> Option<Analysis> {
        let g = self.geom();
        let own = self.stone_bits(color);
        if own == 0 {
            return None;
        }
        let empty = self.empty_bits();
        let blocks = g.components(own);
        let regions = g.components(g.board & !own);
        if regions.len() < 2 {
            return None;
        }
        let libs: Vec<u128> = blocks.iter().map(|&b| g.adjacent(b) & empty).collect();
        let nb = blocks.len();
        debug_assert!(nb <= 64);
        let mut vital = vec![0u64; regions.len()];
        let mut borders = vec![0u64; regions.len()];
        for (ri, &r) in regions.iter().enumerate() {
            let r_nbrs = g.adjacent(r);
            let r_empty = r & empty;
            for (bi, &b) in blocks.iter().enumerate() {
                if r_nbrs & b != 0 {
                    borders[ri] |= 1 << bi;
                    if r_empty != 0 && r_empty & !libs[bi] == 0 {
                        vital[ri] |= 1 << bi;
                    }
                }
            }
        }
        let mut block_alive: u64 = if nb == 64 { u64::MAX } else { (1u64 << nb) - 1 };
        let mut region_alive = vec![true; regions.len()];
        loop {
            let mut changed = false;
            for bi in 0..nb {
                if block_alive >> bi & 1 == 0 {
                    continue;
                }
                let count = (0..regions.len())
                    .filter(|&ri| region_alive[ri] && vital[ri] >> bi & 1 == 1)
                    .count();
                if count < 2 {
                    block_alive &= !(1 << bi);
                    changed = true;
                }
            }
            for ri in 0..regions.len() {
                if region_alive[ri] && borders[ri] & !block_alive != 0 {
                    region_alive[ri] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if block_alive == 0 {
            return None;
        }
        Some(Analysis {
            blocks,
            libs,
            regions,
            vital,
            borders,
            block_alive,
            region_alive,
        })
    }

    pub fn benson_alive(&self, color: Color) -> Life {
        let Some(a) = self.benson_analysis(color) else {
            return Life::default();
        };
        let mut life_zone = 0u128;
        let alive = a
            .alive_blocks()
            .map(|bi| {
                life_zone |= a.blocks[bi];
                Block {
                    color,
                    stones: PointSet::from_bits(a.blocks[bi]),
                    liberties: PointSet::from_bits(a.libs[bi]),
                }
            })
            .collect();
        for ri in a.kept() {
            life_zone |= a.regions[ri];
        }
        Life {
            alive,
            life_zone: PointSet::from_bits(life_zone),
        }
    }

    /// Point sets that are each enough on their own to keep some of
    /// `color`'s stones unconditionally alive: single blocks with their two
    /// smallest private vital regions, and connected groups of alive blocks
    /// with the vital regions they share. Ascending by size.
    pub(crate) fn life_candidates(&self, color: Color) -> Vec<PointSet> {
        let Some(a) = self.benson_analysis(color) else {
            return Vec::new();
        };
        let mut out: Vec<u128> = Vec::new();
        let kept: Vec<usize> = a.kept().collect();
        for bi in a.alive_blocks() {
            let mut private: Vec<u128> = kept
                .iter()
                .filter(|&&ri| a.borders[ri] == 1 << bi && a.vital[ri] >> bi & 1 == 1)
                .map(|&ri| a.regions[ri])
                .collect();
            if private.len() >= 2 {
                private.sort_by_key(|r| (r.count_ones(), r.trailing_zeros()));
                out.push(a.blocks[bi] | private[0] | private[1]);
            }
        }
        // Union-find over alive blocks linked by shared kept regions.
        let nb = a.blocks.len();
        let mut parent: Vec<usize> = (0..nb).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for &ri in &kept {
            let mut members = a.borders[ri];
            let first = members.trailing_zeros() as usize;
            members &= members - 1;
            while members != 0 {
                let other = members.trailing_zeros() as usize;
                members &= members - 1;
                let (x, y) = (find(&mut parent, first), find(&mut parent, other));
                if x != y {
                    parent[y] = x;
                }
            }
        }
        let mut groups: Vec<(usize, u128)> = Vec::new();
        for bi in a.alive_blocks() {
            let root = find(&mut parent, bi);
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, bits)) => *bits |= a.blocks[bi],
                None => groups.push((root, a.blocks[bi])),
            }
        }
        for &ri in &kept {
            let root = find(&mut parent, a.borders[ri].trailing_zeros() as usize);
            if let Some((_, bits)) = groups.iter_mut().find(|(r, _)| *r == root) {
                *bits |= a.regions[ri];
            }
        }
        out.extend(groups.into_iter().map(|(_, b)| b));
        out.sort_by_key(|b| (b.count_ones(), *b));
        out.dedup();
        out.into_iter().map(PointSet::from_bits).collect()
    }

    pub fn adjudicate(&self) -> GameStatus {
        if self.benson_alive(Color::White).is_alive() {
            GameStatus::WhiteWin
        } else if self.pass_streak() >= 2 {
            GameStatus::BlackWin
        } else {
            GameStatus::Ongoing
        }
    }
}
