//! DES with a configurable number of Feistel rounds.
//!
//! The initial permutation, final half swap and final permutation are kept
//! for every round count, so `rounds = 16` is standard DES.

use std::fmt;

use super::CipherOracle;
use crate::{BitBlock, Error, Result};

/// Key used by experiments that do not set one.
pub const DEFAULT_DES_KEY: &str = "133457799BBCDFF1";

// Tables are 1-based, MSB-first, as published.

const IP: [u8; 64] = [
    58, 50, 42, 34, 26, 18, 10, 2, 60, 52, 44, 36, 28, 20, 12, 4, 62, 54, 46, 38, 30, 22, 14, 6,
    64, 56, 48, 40, 32, 24, 16, 8, 57, 49, 41, 33, 25, 17, 9, 1, 59, 51, 43, 35, 27, 19, 11, 3,
    61, 53, 45, 37, 29, 21, 13, 5, 63, 55, 47, 39, 31, 23, 15, 7,
];

const FP: [u8; 64] = [
    40, 8, 48, 16, 56, 24, 64, 32, 39, 7, 47, 15, 55, 23, 63, 31, 38, 6, 46, 14, 54, 22, 62, 30,
    37, 5, 45, 13, 53, 21, 61, 29, 36, 4, 44, 12, 52, 20, 60, 28, 35, 3, 43, 11, 51, 19, 59, 27,
    34, 2, 42, 10, 50, 18, 58, 26, 33, 1, 41, 9, 49, 17, 57, 25,
];

const E: [u8; 48] = [
    32, 1, 2, 3, 4, 5, 4, 5, 6, 7, 8, 9, 8, 9, 10, 11, 12, 13, 12, 13, 14, 15, 16, 17, 16, 17, 18,
    19, 20, 21, 20, 21, 22, 23, 24, 25, 24, 25, 26, 27, 28, 29, 28, 29, 30, 31, 32, 1,
];

const P: [u8; 32] = [
    16, 7, 20, 21, 29, 12, 28, 17, 1, 15, 23, 26, 5, 18, 31, 10, 2, 8, 24, 14, 32, 27, 3, 9, 19,
    13, 30, 6, 22, 11, 4, 25,
];

const PC1: [u8; 56] = [
    57, 49, 41, 33, 25, 17, 9, 1, 58, 50, 42, 34, 26, 18, 10, 2, 59, 51, 43, 35, 27, 19, 11, 3, 60,
    52, 44, 36, 63, 55, 47, 39, 31, 23, 15, 7, 62, 54, 46, 38, 30, 22, 14, 6, 61, 53, 45, 37, 29,
    21, 13, 5, 28, 20, 12, 4,
];

const PC2: [u8; 48] = [
    14, 17, 11, 24, 1, 5, 3, 28, 15, 6, 21, 10, 23, 19, 12, 4, 26, 8, 16, 7, 27, 20, 13, 2, 41, 52,
    31, 37, 47, 55, 30, 40, 51, 45, 33, 48, 44, 49, 39, 56, 34, 53, 46, 42, 50, 36, 29, 32,
];

const SHIFTS: [u32; 16] = [1, 1, 2, 2, 2, 2, 2, 2, 1, 2, 2, 2, 2, 2, 2, 1];

#[rustfmt::skip]
const SBOXES: [[u8; 64]; 8] = [
    [
        14, 4, 13, 1, 2, 15, 11, 8, 3, 10, 6, 12, 5, 9, 0, 7,
        0, 15, 7, 4, 14, 2, 13, 1, 10, 6, 12, 11, 9, 5, 3, 8,
        4, 1, 14, 8, 13, 6, 2, 11, 15, 12, 9, 7, 3, 10, 5, 0,
        15, 12, 8, 2, 4, 9, 1, 7, 5, 11, 3, 14, 10, 0, 6, 13,
    ],
    [
        15, 1, 8, 14, 6, 11, 3, 4, 9, 7, 2, 13, 12, 0, 5, 10,
        3, 13, 4, 7, 15, 2, 8, 14, 12, 0, 1, 10, 6, 9, 11, 5,
        0, 14, 7, 11, 10, 4, 13, 1, 5, 8, 12, 6, 9, 3, 2, 15,
        13, 8, 10, 1, 3, 15, 4, 2, 11, 6, 7, 12, 0, 5, 14, 9,
    ],
    [
        10, 0, 9, 14, 6, 3, 15, 5, 1, 13, 12, 7, 11, 4, 2, 8,
        13, 7, 0, 9, 3, 4, 6, 10, 2, 8, 5, 14, 12, 11, 15, 1,
        13, 6, 4, 9, 8, 15, 3, 0, 11, 1, 2, 12, 5, 10, 14, 7,
        1, 10, 13, 0, 6, 9, 8, 7, 4, 15, 14, 3, 11, 5, 2, 12,
    ],
    [
        7, 13, 14, 3, 0, 6, 9, 10, 1, 2, 8, 5, 11, 12, 4, 15,
        13, 8, 11, 5, 6, 15, 0, 3, 4, 7, 2, 12, 1, 10, 14, 9,
        10, 6, 9, 0, 12, 11, 7, 13, 15, 1, 3, 14, 5, 2, 8, 4,
        3, 15, 0, 6, 10, 1, 13, 8, 9, 4, 5, 11, 12, 7, 2, 14,
    ],
    [
        2, 12, 4, 1, 7, 10, 11, 6, 8, 5, 3, 15, 13, 0, 14, 9,
        14, 11, 2, 12, 4, 7, 13, 1, 5, 0, 15, 10, 3, 9, 8, 6,
        4, 2, 1, 11, 10, 13, 7, 8, 15, 9, 12, 5, 6, 3, 0, 14,
        11, 8, 12, 7, 1, 14, 2, 13, 6, 15, 0, 9, 10, 4, 5, 3,
    ],
    [
        12, 1, 10, 15, 9, 2, 6, 8, 0, 13, 3, 4, 14, 7, 5, 11,
        10, 15, 4, 2, 7, 12, 9, 5, 6, 1, 13, 14, 0, 11, 3, 8,
        9, 14, 15, 5, 2, 8, 12, 3, 7, 0, 4, 10, 1, 13, 11, 6,
        4, 3, 2, 12, 9, 5, 15, 10, 11, 14, 1, 7, 6, 0, 8, 13,
    ],
    [
        4, 11, 2, 14, 15, 0, 8, 13, 3, 12, 9, 7, 5, 10, 6, 1,
        13, 0, 11, 7, 4, 9, 1, 10, 14, 3, 5, 12, 2, 15, 8, 6,
        1, 4, 11, 13, 12, 3, 7, 14, 10, 15, 6, 8, 0, 5, 9, 2,
        6, 11, 13, 8, 1, 4, 10, 7, 9, 5, 0, 15, 14, 2, 3, 12,
    ],
    [
        13, 2, 8, 4, 6, 15, 11, 1, 10, 9, 3, 14, 5, 0, 12, 7,
        1, 15, 13, 8, 10, 3, 7, 4, 12, 5, 6, 11, 0, 14, 9, 2,
        7, 11, 4, 1, 9, 12, 14, 2, 0, 6, 10, 13, 15, 3, 5, 8,
        2, 1, 14, 7, 4, 10, 8, 13, 15, 12, 9, 0, 3, 5, 6, 11,
    ],
];

/// Output bit `j` (MSB-first) takes input bit `table[j]` (1-based, MSB-first)
/// of a `width`-bit input.
fn permute(input: u64, width: u32, table: &[u8]) -> u64 {
    table.iter().fold(0u64, |acc, &pos| {
        (acc << 1) | ((input >> (width - pos as u32)) & 1)
    })
}

fn round_function(right: u32, subkey: u64) -> u32 {
    let x = permute(right as u64, 32, &E) ^ subkey;
    let mut s = 0u32;
    for (i, sbox) in SBOXES.iter().enumerate() {
        let six = ((x >> (42 - 6 * i)) & 0x3f) as usize;
        // outer bits pick the row, inner four the column
        let row = ((six >> 4) & 2) | (six & 1);
        let col = (six >> 1) & 0xf;
        s = (s << 4) | sbox[row * 16 + col] as u32;
    }
    permute(s as u64, 32, &P) as u32
}

fn key_schedule(key: u64) -> [u64; 16] {
    let cd = permute(key, 64, &PC1);
    let mut c = ((cd >> 28) & 0x0fff_ffff) as u32;
    let mut d = (cd & 0x0fff_ffff) as u32;
    let rot = |v: u32, n: u32| ((v << n) | (v >> (28 - n))) & 0x0fff_ffff;
    let mut keys = [0u64; 16];
    for (k, &n) in keys.iter_mut().zip(SHIFTS.iter()) {
        c = rot(c, n);
        d = rot(d, n);
        *k = permute(((c as u64) << 28) | d as u64, 56, &PC2);
    }
    keys
}

fn feistel(block: u64, subkeys: impl Iterator<Item = u64>) -> u64 {
    let ip = permute(block, 64, &IP);
    let (mut l, mut r) = ((ip >> 32) as u32, ip as u32);
    for k in subkeys {
        let next = l ^ round_function(r, k);
        l = r;
        r = next;
    }
    permute(((r as u64) << 32) | l as u64, 64, &FP)
}

/// DES reduced to the first `rounds` rounds of the standard key schedule.
#[derive(Clone)]
pub struct DesReducedOracle {
    rounds: u32,
    subkeys: [u64; 16],
}

impl DesReducedOracle {
    /// `key` is 64 bits; the 8 parity bits are ignored.
    pub fn new(key: &BitBlock, rounds: u32) -> Result<Self> {
        if key.len() != 64 {
            return Err(Error::Length(format!("DES key must be 64 bits, got {}", key.len())));
        }
        if !(1..=16).contains(&rounds) {
            return Err(Error::Config(format!("DES rounds must be in 1..=16, got {rounds}")));
        }
        Ok(DesReducedOracle {
            rounds,
            subkeys: key_schedule(key.to_u64()),
        })
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn encrypt_u64(&self, plaintext: u64) -> u64 {
        feistel(plaintext, self.subkeys[..self.rounds as usize].iter().copied())
    }

    #[cfg(test)]
    fn decrypt_u64(&self, ciphertext: u64) -> u64 {
        feistel(
            ciphertext,
            self.subkeys[..self.rounds as usize].iter().rev().copied(),
        )
    }

    /// Encrypts a 64-bit block.
    pub fn des_encrypt(&self, plaintext: &BitBlock) -> Result<BitBlock> {
        if plaintext.len() != 64 {
            return Err(Error::Length(format!(
                "DES plaintext must be 64 bits, got {}",
                plaintext.len()
            )));
        }
        Ok(BitBlock::from_u64(self.encrypt_u64(plaintext.to_u64()), 64))
    }
}

impl fmt::Debug for DesReducedOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DesReducedOracle")
            .field("rounds", &self.rounds)
            .finish_non_exhaustive()
    }
}

impl CipherOracle for DesReducedOracle {
    fn name(&self) -> String {
        format!("des-r{}", self.rounds)
    }

    fn input_bits(&self) -> usize {
        64
    }

    fn output_bits(&self) -> usize {
        64
    }

    fn evaluate(&self, input: &BitBlock) -> BitBlock {
        self.des_encrypt(input).expect("DES input width")
    }

    /// One round leaves half of the block as a keyless copy of the input.
    fn base_match_rate(&self) -> f64 {
        if self.rounds == 1 {
            0.75
        } else {
            0.5
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::RngCore;

    fn oracle(key: u64, rounds: u32) -> DesReducedOracle {
        DesReducedOracle::new(&BitBlock::from_u64(key, 64), rounds).unwrap()
    }

    #[test]
    fn classic_worked_example() {
        let des = oracle(0x133457799BBCDFF1, 16);
        let pt = BitBlock::from_hex("0123456789ABCDEF", 64).unwrap();
        assert_eq!(des.des_encrypt(&pt).unwrap().to_hex(), "85E813540F0AB405");
    }

    #[test]
    fn worked_example_subkeys() {
        // First and last subkeys of the same worked example.
        let ks = key_schedule(0x133457799BBCDFF1);
        assert_eq!(ks[0], 0b000110_110000_001011_101111_111111_000111_000001_110010);
        assert_eq!(ks[15], 0b110010_110011_110110_001011_000011_100001_011111_110101);
    }

    #[test]
    fn decryption_inverts_every_round_count() {
        let mut r = rng::rng(11);
        for rounds in 1..=16 {
            for _ in 0..50 {
                let des = oracle(r.next_u64(), rounds);
                let p = r.next_u64();
                assert_eq!(des.decrypt_u64(des.encrypt_u64(p)), p);
            }
        }
    }

    #[test]
    fn parity_bits_ignored() {
        let a = oracle(0x133457799BBCDFF1, 16);
        let b = oracle(0x133457799BBCDFF1 ^ 0x0101010101010101, 16);
        assert_eq!(a.encrypt_u64(42), b.encrypt_u64(42));
    }

    #[test]
    fn construction_errors() {
        assert!(DesReducedOracle::new(&BitBlock::zeros(56), 1).is_err());
        assert!(DesReducedOracle::new(&BitBlock::zeros(64), 0).is_err());
        assert!(DesReducedOracle::new(&BitBlock::zeros(64), 17).is_err());
        let des = oracle(1, 1);
        assert!(des.des_encrypt(&BitBlock::zeros(63)).is_err());
    }

    #[test]
    fn debug_hides_key() {
        let s = format!("{:?}", oracle(0x133457799BBCDFF1, 3));
        assert!(!s.contains("subkeys"), "{s}");
    }
}
