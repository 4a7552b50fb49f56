//! Fixed Zobrist keys, generated at compile time from a splitmix64 stream.

use super::bitboard::MAX_SIZE;
use super::{Color, Point};

const AREA: usize = MAX_SIZE as usize * MAX_SIZE as usize;

pub(crate) struct Keys {
    stones: [[u64; AREA]; 2],
    ko: [u64; AREA],
    white_to_move: u64,
}

const fn splitmix(state: u64) -> (u64, u64) {
    let next = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = next;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (next, z ^ (z >> 31))
}

const fn build() -> Keys {
    let mut keys = Keys {
        stones: [[0; AREA]; 2],
        ko: [0; AREA],
        white_to_move: 0,
    };
    let mut state = 0x5EED_0F_2A11_60u64;
    let mut c = 0;
    while c < 2 {
        let mut i = 0;
        while i < AREA {
            let (s, k) = splitmix(state);
            state = s;
            keys.stones[c][i] = k;
            i += 1;
        }
        c += 1;
    }
    let mut i = 0;
    while i < AREA {
        let (s, k) = splitmix(state);
        state = s;
        keys.ko[i] = k;
        i += 1;
    }
    let (_, k) = splitmix(state);
    keys.white_to_move = k;
    keys
}

pub(crate) static KEYS: Keys = build();

impl Keys {
    #[inline]
    pub fn stone(&self, color: Color, p: Point) -> u64 {
        self.stones[color as usize][p.index()]
    }

    #[inline]
    pub fn ko(&self, p: Point) -> u64 {
        self.ko[p.index()]
    }

    #[inline]
    pub fn to_move(&self, color: Color) -> u64 {
        match color {
            Color::Black => 0,
            Color::White => self.white_to_move,
        }
    }

    /// XOR of the stone keys of every point in `stones`.
    pub fn stones_hash(&self, color: Color, mut stones: u128) -> u64 {
        let table = &self.stones[color as usize];
        let mut h = 0;
        while stones != 0 {
            let i = stones.trailing_zeros() as usize;
            stones &= stones - 1;
            h ^= table[i];
        }
        h
    }
}
