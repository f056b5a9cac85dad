//! Hitag2 keystream generator: a 48-bit LFSR with a two-level nonlinear
//! filter over 20 of its cells.
//!
//! State cell `i` is bit `i` of the [`BitBlock`] (index 0 is the first bit of
//! the hex form). A step shifts every cell down by one position and feeds the
//! new cell 47 from the feedback taps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CipherOracle, InputSampling};
use crate::{BitBlock, Error};

pub const HITAG2_STATE_BITS: usize = 48;

/// The five groups of filter taps. Within a group the first tap is the
/// least significant bit of the 4-bit table index.
pub const FILTER_TAPS: [[usize; 4]; 5] = [
    [1, 2, 4, 5],
    [7, 11, 13, 14],
    [16, 20, 22, 25],
    [27, 28, 30, 32],
    [33, 42, 43, 45],
];

/// Cells XORed into the new cell 47.
pub const FEEDBACK_TAPS: [usize; 16] = [0, 2, 3, 6, 7, 8, 16, 22, 23, 26, 30, 41, 42, 43, 46, 47];

// 4-input tables used by groups 0 and 4 (FA) and by groups 1..=3 (FB), and
// the 5-input output table (FC). Bit `i` of the constant is f(i).
const FA: u32 = 0x2C79;
const FB: u32 = 0x6671;
const FC: u32 = 0x7907_287B;

fn state_word(state: &BitBlock) -> u64 {
    assert_eq!(state.len(), HITAG2_STATE_BITS, "Hitag2 state width");
    (0..HITAG2_STATE_BITS).fold(0u64, |acc, i| acc | ((state.bit(i) as u64) << i))
}

fn state_block(word: u64) -> BitBlock {
    let mut b = BitBlock::zeros(HITAG2_STATE_BITS);
    for i in 0..HITAG2_STATE_BITS {
        if (word >> i) & 1 == 1 {
            b.set(i, true);
        }
    }
    b
}

#[inline]
fn nibble(x: u64, taps: &[usize; 4]) -> u32 {
    taps.iter()
        .enumerate()
        .fold(0, |acc, (k, &t)| acc | ((((x >> t) & 1) as u32) << k))
}

/// Filter output for a packed state (cell `i` in bit `i`).
#[inline]
pub fn filter_word(x: u64) -> u8 {
    let tables = [FA, FB, FB, FB, FA];
    let idx = FILTER_TAPS
        .iter()
        .zip(tables)
        .enumerate()
        .fold(0u32, |acc, (g, (taps, table))| {
            acc | (((table >> nibble(x, taps)) & 1) << g)
        });
    ((FC >> idx) & 1) as u8
}

/// One LFSR clock on a packed state.
#[inline]
pub fn step_word(x: u64) -> u64 {
    let fb = FEEDBACK_TAPS.iter().fold(0u64, |acc, &t| acc ^ (x >> t)) & 1;
    (x >> 1) | (fb << 47)
}

/// Keystream bit produced from `state`.
pub fn hitag2_filter(state: &BitBlock) -> u8 {
    filter_word(state_word(state))
}

/// Returns the successor state and the bit output from `state`.
pub fn hitag2_step(state: &BitBlock) -> (BitBlock, u8) {
    let x = state_word(state);
    (state_block(step_word(x)), filter_word(x))
}

/// How Hitag2 training inputs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hitag2Mode {
    /// Independent uniformly random states.
    #[default]
    Filter,
    /// Consecutive states along the LFSR walk.
    Keystream,
}

impl fmt::Display for Hitag2Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hitag2Mode::Filter => "filter",
            Hitag2Mode::Keystream => "keystream",
        })
    }
}

impl FromStr for Hitag2Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "filter" => Ok(Hitag2Mode::Filter),
            "keystream" | "keystream-step" | "keystream_step" => Ok(Hitag2Mode::Keystream),
            other => Err(Error::Config(format!("unknown hitag2 mode {other:?}"))),
        }
    }
}

/// Hitag2 as a 48-bit -> 1-bit oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hitag2Oracle {
    mode: Hitag2Mode,
}

impl Hitag2Oracle {
    pub fn new(mode: Hitag2Mode) -> Self {
        Hitag2Oracle { mode }
    }

    pub fn mode(&self) -> Hitag2Mode {
        self.mode
    }
}

impl CipherOracle for Hitag2Oracle {
    fn name(&self) -> String {
        match self.mode {
            Hitag2Mode::Filter => "hitag2".into(),
            Hitag2Mode::Keystream => "hitag2-keystream".into(),
        }
    }

    fn input_bits(&self) -> usize {
        HITAG2_STATE_BITS
    }

    fn output_bits(&self) -> usize {
        1
    }

    fn evaluate(&self, input: &BitBlock) -> BitBlock {
        BitBlock::from_u64(hitag2_filter(input) as u64, 1)
    }

    fn sampling(&self) -> InputSampling {
        match self.mode {
            Hitag2Mode::Filter => InputSampling::Uniform,
            Hitag2Mode::Keystream => InputSampling::Walk,
        }
    }

    fn successor(&self, input: &BitBlock) -> Option<BitBlock> {
        match self.mode {
            Hitag2Mode::Filter => None,
            Hitag2Mode::Keystream => Some(hitag2_step(input).0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::RngCore;

    fn random_state(r: &mut rng::Rng) -> BitBlock {
        state_block(r.next_u64() & ((1 << 48) - 1))
    }

    #[test]
    fn tap_sets_are_disjoint_and_twenty() {
        let mut all: Vec<usize> = FILTER_TAPS.iter().flatten().copied().collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 20);
        assert!(all.iter().all(|&t| t < 48));
    }

    #[test]
    fn tables_are_balanced() {
        assert_eq!(FA.count_ones(), 8);
        assert_eq!(FB.count_ones(), 8);
        assert_eq!(FC.count_ones(), 16);
    }

    #[test]
    fn extreme_states() {
        // All-zero: every 4-bit table sees index 0 -> FA(0)=1, FB(0)=1, so the
        // output table is read at 0b11111 = 31 -> bit 31 of FC = 0.
        assert_eq!(hitag2_filter(&BitBlock::zeros(48)), 0);
        // All-one: index 15 -> FA(15)=0, FB(15)=0, FC(0)=1.
        let ones = BitBlock::from_hex("FFFFFFFFFFFF", 48).unwrap();
        assert_eq!(hitag2_filter(&ones), 1);
    }

    #[test]
    fn non_tap_bits_are_ignored() {
        let taps: Vec<usize> = FILTER_TAPS.iter().flatten().copied().collect();
        let mut r = rng::rng(5);
        for _ in 0..200 {
            let s = random_state(&mut r);
            for i in (0..48).filter(|i| !taps.contains(i)) {
                let mut t = s.clone();
                t.set(i, s.bit(i) == 0);
                assert_eq!(hitag2_filter(&s), hitag2_filter(&t));
            }
        }
    }

    #[test]
    fn step_shape() {
        let (next, out) = hitag2_step(&BitBlock::zeros(48));
        assert_eq!(next, BitBlock::zeros(48));
        assert_eq!(out, hitag2_filter(&BitBlock::zeros(48)));

        let mut r = rng::rng(6);
        for _ in 0..100 {
            let s = random_state(&mut r);
            let (next, out) = hitag2_step(&s);
            for i in 0..47 {
                assert_eq!(next.bit(i), s.bit(i + 1));
            }
            assert_eq!(out, hitag2_filter(&s));
        }
    }

    #[test]
    fn step_matches_polynomial_oracle() {
        // Feedback written independently as the polynomial's tap mask.
        const MASK: u64 = (1 << 0) | (1 << 2) | (1 << 3) | (1 << 6) | (1 << 7) | (1 << 8)
            | (1 << 16) | (1 << 22) | (1 << 23) | (1 << 26) | (1 << 30) | (1 << 41)
            | (1 << 42) | (1 << 43) | (1 << 46) | (1 << 47);
        let mut r = rng::rng(7);
        for _ in 0..1000 {
            let x = r.next_u64() & ((1 << 48) - 1);
            let fb = ((x & MASK).count_ones() & 1) as u64;
            assert_eq!(step_word(x), (x >> 1) | (fb << 47));
            let (next, _) = hitag2_step(&state_block(x));
            assert_eq!(state_word(&next), step_word(x));
        }
    }

    #[test]
    fn oracle_modes() {
        let o = Hitag2Oracle::new(Hitag2Mode::Filter);
        assert_eq!((o.input_bits(), o.output_bits()), (48, 1));
        assert!(o.successor(&BitBlock::zeros(48)).is_none());
        let k = Hitag2Oracle::new(Hitag2Mode::Keystream);
        assert_eq!(k.sampling(), InputSampling::Walk);
        assert!(k.successor(&BitBlock::zeros(48)).is_some());
    }
}
