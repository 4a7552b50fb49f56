//! The relevance-zone pattern table: deduplicated storage of proven White
//! wins, exact all-match queries, smallest-valid selection, a checksummed
//! file format and merging.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use thiserror::Error;

use crate::game::{BoardPosition, Cell, Color, GameStatus};
use crate::search::Constraint;
use crate::zone::{matches, RZPattern, Zone};

const MAGIC: &[u8; 4] = b"RZT1";
const VERSION: u8 = 1;

pub type EntryId = u32;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("VersionMismatch: file version {found}, expected {VERSION}")]
    VersionMismatch { found: u8 },
    #[error("BoardSizeMismatch: expected {expected}, found {found}")]
    BoardSizeMismatch { expected: u8, found: u8 },
    #[error("CorruptFile: {0}")]
    CorruptFile(String),
    #[error("only ko-free White wins can be stored")]
    Rejected,
}

/// Advisory counters, excluded from equality.
#[derive(Debug, Default)]
struct Counters {
    hits: AtomicU64,
    misses: AtomicU64,
    inserts: AtomicU64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableStats {
    pub entries: usize,
    pub distinct_zones: usize,
    pub hits: u64,
    pub misses: u64,
    pub inserts: u64,
    /// (zone size, entry count), ascending by size.
    pub size_histogram: Vec<(usize, usize)>,
}

/// Zone bucket key: ordering by size first lets `lookup_best` stop at the
/// first size with a valid hit.
type ZoneKey = (u32, u128);

#[derive(Debug)]
pub struct RZTable {
    size: u8,
    entries: Vec<RZPattern>,
    zone_index: BTreeMap<ZoneKey, HashMap<u64, Vec<EntryId>>>,
    counters: Counters,
}

fn mix(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^ (x >> 33)
}

fn content_hash(black: u128, white: u128, to_move: Color) -> u64 {
    let mut h = mix(black as u64 ^ 0x9e37_79b9_7f4a_7c15);
    h = mix(h ^ (black >> 64) as u64);
    h = mix(h ^ white as u64);
    h = mix(h ^ (white >> 64) as u64);
    h ^ to_move as u64
}

fn zone_key(zone: Zone) -> ZoneKey {
    (zone.len() as u32, zone.bits())
}

impl Clone for RZTable {
    fn clone(&self) -> Self {
        let counters = Counters::default();
        counters.hits.store(self.counters.hits.load(Ordering::Relaxed), Ordering::Relaxed);
        counters.misses.store(self.counters.misses.load(Ordering::Relaxed), Ordering::Relaxed);
        counters.inserts.store(self.counters.inserts.load(Ordering::Relaxed), Ordering::Relaxed);
        RZTable {
            size: self.size,
            entries: self.entries.clone(),
            zone_index: self.zone_index.clone(),
            counters,
        }
    }
}

impl PartialEq for RZTable {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size && self.entries == other.entries
    }
}

impl RZTable {
    pub fn new(size: u8) -> Self {
        RZTable {
            size,
            entries: Vec::new(),
            zone_index: BTreeMap::new(),
            counters: Counters::default(),
        }
    }

    pub fn size(&self) -> u8 {
        self.size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: EntryId) -> Option<&RZPattern> {
        self.entries.get(id as usize)
    }

    /// Entries in id order.
    pub fn entries(&self) -> impl Iterator<Item = (EntryId, &RZPattern)> {
        self.entries.iter().enumerate().map(|(i, p)| (i as EntryId, p))
    }

    pub fn insert(&mut self, pattern: RZPattern) -> Result<EntryId, TableError> {
        if pattern.size() != self.size {
            return Err(TableError::BoardSizeMismatch {
                expected: self.size,
                found: pattern.size(),
            });
        }
        if pattern.outcome() != GameStatus::WhiteWin || !pattern.ko_free() {
            return Err(TableError::Rejected);
        }
        let (black, white) = pattern.stone_masks();
        let h = content_hash(black, white, pattern.to_move());
        let bucket = self
            .zone_index
            .entry(zone_key(pattern.zone()))
            .or_default()
            .entry(h)
            .or_default();
        if let Some(&id) = bucket.iter().find(|&&id| self.entries[id as usize] == pattern) {
            return Ok(id);
        }
        let id = self.entries.len() as EntryId;
        bucket.push(id);
        self.entries.push(pattern);
        self.counters.inserts.fetch_add(1, Ordering::Relaxed);
        Ok(id)
    }

    /// Candidates stored under `key` whose masked contents hash like `pos`.
    fn probe<'a>(
        &'a self,
        key: &ZoneKey,
        ids: &'a HashMap<u64, Vec<EntryId>>,
        pos: &'a BoardPosition,
    ) -> impl Iterator<Item = EntryId> + 'a {
        let z = key.1;
        let h = content_hash(
            pos.stone_bits(Color::Black) & z,
            pos.stone_bits(Color::White) & z,
            pos.to_move(),
        );
        ids.get(&h)
            .into_iter()
            .flatten()
            .copied()
            .filter(move |&id| matches(&self.entries[id as usize], pos))
    }

    fn gated(&self, pos: &BoardPosition) -> bool {
        pos.size() != self.size
            || pos.ko_ban().is_some()
            || (pos.to_move() == Color::Black && pos.pass_streak() > 0)
    }

    /// Every entry matching `pos`, ascending by id.
    pub fn lookup_all(&self, pos: &BoardPosition) -> Vec<(EntryId, &RZPattern)> {
        if self.gated(pos) {
            return Vec::new();
        }
        let mut ids: Vec<EntryId> = self
            .zone_index
            .iter()
            .flat_map(|(key, map)| self.probe(key, map, pos))
            .collect();
        ids.sort_unstable();
        self.record(!ids.is_empty());
        ids.into_iter()
            .map(|id| (id, &self.entries[id as usize]))
            .collect()
    }

    /// The smallest matching entry whose zone avoids the forbidden region;
    /// ties go to the lowest id.
    pub fn lookup_best(
        &self,
        pos: &BoardPosition,
        constraint: &Constraint,
    ) -> Option<(EntryId, &RZPattern)> {
        if self.gated(pos) {
            return None;
        }
        let forbidden = constraint.forbidden.bits();
        let mut best: Option<(u32, EntryId)> = None;
        for (key, map) in &self.zone_index {
            if let Some((size, _)) = best {
                if key.0 > size {
                    break;
                }
            }
            if key.1 & forbidden != 0 {
                continue;
            }
            if let Some(id) = self.probe(key, map, pos).min() {
                best = Some(match best {
                    Some((s, old)) if old < id => (s, old),
                    _ => (key.0, id),
                });
            }
        }
        self.record(best.is_some());
        best.map(|(_, id)| (id, &self.entries[id as usize]))
    }

    fn record(&self, hit: bool) {
        let c = if hit {
            &self.counters.hits
        } else {
            &self.counters.misses
        };
        c.fetch_add(1, Ordering::Relaxed);
    }

    pub fn stats(&self) -> TableStats {
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        for p in &self.entries {
            *hist.entry(p.zone().len()).or_default() += 1;
        }
        TableStats {
            entries: self.entries.len(),
            distinct_zones: self.zone_index.len(),
            hits: self.counters.hits.load(Ordering::Relaxed),
            misses: self.counters.misses.load(Ordering::Relaxed),
            inserts: self.counters.inserts.load(Ordering::Relaxed),
            size_histogram: hist.into_iter().collect(),
        }
    }

    /// Union of two tables with duplicates removed; counters are summed.
    pub fn merge(a: &RZTable, b: &RZTable) -> Result<RZTable, TableError> {
        if a.size != b.size {
            return Err(TableError::BoardSizeMismatch {
                expected: a.size,
                found: b.size,
            });
        }
        let mut out = a.clone();
        for p in &b.entries {
            out.insert(p.clone())?;
        }
        for (dst, src) in [
            (&out.counters.hits, &b.counters.hits),
            (&out.counters.misses, &b.counters.misses),
        ] {
            dst.fetch_add(src.load(Ordering::Relaxed), Ordering::Relaxed);
        }
        out.counters.inserts.store(
            a.counters.inserts.load(Ordering::Relaxed) + b.counters.inserts.load(Ordering::Relaxed),
            Ordering::Relaxed,
        );
        Ok(out)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.size as usize;
        let zone_bytes = (n * n).div_ceil(8);
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.push(VERSION);
        buf.push(self.size);
        buf.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for p in &self.entries {
            buf.extend_from_slice(&p.zone().bits().to_le_bytes()[..zone_bytes]);
            buf.push(match p.to_move() {
                Color::Black => 0,
                Color::White => 1,
            });
            buf.push(1);
            let cells = p.contents();
            buf.extend_from_slice(&(cells.len() as u16).to_le_bytes());
            for chunk in cells.chunks(4) {
                let mut byte = 0u8;
                for (j, c) in chunk.iter().enumerate() {
                    let code = match c {
                        Cell::Empty => 0,
                        Cell::Black => 1,
                        Cell::White => 2,
                    };
                    byte |= code << (2 * j);
                }
                buf.push(byte);
            }
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    /// Parses a table file. With `expected_size` set, a file for another
    /// board size is rejected.
    pub fn from_bytes(bytes: &[u8], expected_size: Option<u8>) -> Result<RZTable, TableError> {
        let corrupt = |m: &str| TableError::CorruptFile(m.to_string());
        if bytes.len() < 14 || &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        if bytes[4] != VERSION {
            return Err(TableError::VersionMismatch { found: bytes[4] });
        }
        let size = bytes[5];
        if let Some(expected) = expected_size {
            if expected != size {
                return Err(TableError::BoardSizeMismatch {
                    expected,
                    found: size,
                });
            }
        }
        if !(crate::game::MIN_SIZE..=crate::game::MAX_SIZE).contains(&size) {
            return Err(corrupt("board size out of range"));
        }
        let (payload, trailer) = bytes.split_at(bytes.len() - 4);
        let crc = u32::from_le_bytes(trailer.try_into().unwrap());
        if crc32fast::hash(payload) != crc {
            return Err(corrupt("checksum mismatch"));
        }
        let count = u32::from_le_bytes(payload[6..10].try_into().unwrap());
        let n = size as usize;
        let zone_bytes = (n * n).div_ceil(8);
        let mut at = 10;
        let mut take = |len: usize| -> Result<&[u8], TableError> {
            let s = payload.get(at..at + len).ok_or_else(|| corrupt("truncated entry"))?;
            at += len;
            Ok(s)
        };
        let mut table = RZTable::new(size);
        for _ in 0..count {
            let mut raw = [0u8; 16];
            raw[..zone_bytes].copy_from_slice(take(zone_bytes)?);
            let zone = Zone::from_bits(u128::from_le_bytes(raw));
            if !zone.is_subset(Zone::full(size)) {
                return Err(corrupt("zone outside board"));
            }
            let to_move = match take(1)?[0] {
                0 => Color::Black,
                1 => Color::White,
                _ => return Err(corrupt("bad side to move")),
            };
            if take(1)?[0] != 1 {
                return Err(corrupt("bad outcome"));
            }
            let k = u16::from_le_bytes(take(2)?.try_into().unwrap()) as usize;
            if k != zone.len() {
                return Err(corrupt("zone size mismatch"));
            }
            let packed = take(k.div_ceil(4))?;
            let mut cells = Vec::with_capacity(k);
            for i in 0..k {
                cells.push(match packed[i / 4] >> (2 * (i % 4)) & 3 {
                    0 => Cell::Empty,
                    1 => Cell::Black,
                    2 => Cell::White,
                    _ => return Err(corrupt("bad cell code")),
                });
            }
            let pattern = RZPattern::new(size, zone, &cells, to_move, GameStatus::WhiteWin, true)
                .map_err(|e| TableError::CorruptFile(e.to_string()))?;
            table.insert(pattern)?;
        }
        if at != payload.len() {
            return Err(corrupt("trailing bytes"));
        }
        Ok(table)
    }

    pub fn save(&self, mut w: impl Write) -> Result<(), TableError> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(mut r: impl Read, expected_size: Option<u8>) -> Result<RZTable, TableError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes, expected_size)
    }

    pub fn save_file(&self, path: impl AsRef<Path>) -> Result<(), TableError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load_file(path: impl AsRef<Path>, expected_size: Option<u8>) -> Result<RZTable, TableError> {
        Self::from_bytes(&fs::read(path)?, expected_size)
    }
}

/// Read access used by the search. Implementations return owned patterns,
/// so later inserts never disturb a result already handed out.
pub trait PatternSource: Sync {
    fn best_match(&self, pos: &BoardPosition, constraint: &Constraint) -> Option<RZPattern>;
}

impl PatternSource for RZTable {
    fn best_match(&self, pos: &BoardPosition, constraint: &Constraint) -> Option<RZPattern> {
        self.lookup_best(pos, constraint).map(|(_, p)| p.clone())
    }
}

/// A table shared between threads: many readers, one writer at a time.
#[derive(Debug)]
pub struct SharedTable(RwLock<RZTable>);

impl SharedTable {
    pub fn new(table: RZTable) -> Self {
        SharedTable(RwLock::new(table))
    }

    pub fn read(&self) -> RwLockReadGuard<'_, RZTable> {
        self.0.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, RZTable> {
        self.0.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn into_inner(self) -> RZTable {
        self.0.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

impl PatternSource for SharedTable {
    fn best_match(&self, pos: &BoardPosition, constraint: &Constraint) -> Option<RZPattern> {
        self.read().best_match(pos, constraint)
    }
}
