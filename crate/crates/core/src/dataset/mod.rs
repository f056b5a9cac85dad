//! Plaintext/ciphertext pair sets: generation, disjoint splitting and files.

use std::collections::HashSet;

use ndarray::Array2;
use num_traits::Float;
use rand::RngCore;
use rayon::prelude::*;

use crate::cipher::{CipherOracle, InputSampling};
use crate::rng::{self, Rng};
use crate::{BitBlock, Error, FeatureEncoding, Result};

mod io;

pub use self::io::{read_pairs, read_pairs_from, write_pairs, write_pairs_to, Format};

/// An ordered set of `(input, output)` pairs with unique inputs.
#[derive(Debug, Clone)]
pub struct PairSet {
    input_bits: usize,
    output_bits: usize,
    pairs: Vec<(BitBlock, BitBlock)>,
    /// Provenance, e.g. `des-r1 seed=7 count=65536`. Not part of equality.
    pub origin: Option<String>,
}

impl PartialEq for PairSet {
    fn eq(&self, other: &Self) -> bool {
        self.input_bits == other.input_bits
            && self.output_bits == other.output_bits
            && self.pairs == other.pairs
    }
}

impl Eq for PairSet {}

impl PairSet {
    pub fn empty(input_bits: usize, output_bits: usize) -> Self {
        PairSet {
            input_bits,
            output_bits,
            pairs: Vec::new(),
            origin: None,
        }
    }

    /// Validates widths and input uniqueness.
    pub fn from_pairs(
        input_bits: usize,
        output_bits: usize,
        pairs: Vec<(BitBlock, BitBlock)>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for (i, (x, y)) in pairs.iter().enumerate() {
            if x.len() != input_bits || y.len() != output_bits {
                return Err(Error::Length(format!(
                    "pair {i} is {}->{} bits, set is {input_bits}->{output_bits}",
                    x.len(),
                    y.len()
                )));
            }
            if !seen.insert(x) {
                return Err(Error::Format(format!("duplicate input {x} at pair {i}")));
            }
        }
        Ok(PairSet {
            input_bits,
            output_bits,
            pairs,
            origin: None,
        })
    }

    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    pub fn output_bits(&self) -> usize {
        self.output_bits
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(BitBlock, BitBlock)] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = &(BitBlock, BitBlock)> {
        self.pairs.iter()
    }

    pub fn inputs(&self) -> HashSet<&BitBlock> {
        self.pairs.iter().map(|(x, _)| x).collect()
    }

    /// True when no input appears in both sets.
    pub fn is_disjoint(&self, other: &PairSet) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let set = large.inputs();
        small.pairs.iter().all(|(x, _)| !set.contains(x))
    }

    /// Checks every pair against `oracle`.
    pub fn verify(&self, oracle: &dyn CipherOracle) -> bool {
        self.input_bits == oracle.input_bits()
            && self.output_bits == oracle.output_bits()
            && self.pairs.par_iter().all(|(x, y)| oracle.evaluate(x) == *y)
    }

    /// `len × input_bits` network input matrix.
    pub fn features<F: Float>(&self, encoding: FeatureEncoding) -> Array2<F> {
        let mut m = Array2::zeros((self.len(), self.input_bits));
        for (mut row, (x, _)) in m.rows_mut().into_iter().zip(&self.pairs) {
            x.write_features(encoding, row.as_slice_mut().expect("row-major"));
        }
        m
    }

    /// `len × output_bits` matrix of 0/1 target bits.
    pub fn target_bits(&self) -> Array2<u8> {
        let mut m = Array2::zeros((self.len(), self.output_bits));
        for (mut row, (_, y)) in m.rows_mut().into_iter().zip(&self.pairs) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = y.bit(j);
            }
        }
        m
    }

    /// Appends pairs from `other` whose inputs are not already present.
    pub fn extend_unique(&mut self, other: &PairSet) -> Result<()> {
        if other.input_bits != self.input_bits || other.output_bits != self.output_bits {
            return Err(Error::Length("cannot merge sets of different widths".into()));
        }
        let have: HashSet<BitBlock> = self.pairs.iter().map(|(x, _)| x.clone()).collect();
        self.pairs.extend(
            other
                .pairs
                .iter()
                .filter(|(x, _)| !have.contains(x))
                .cloned(),
        );
        Ok(())
    }
}

fn random_block(rng: &mut Rng, bits: usize) -> BitBlock {
    if bits <= 64 {
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        return BitBlock::from_u64(rng.next_u64() & mask, bits);
    }
    let mut bytes = vec![0u8; bits.div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    let spare = bytes.len() * 8 - bits;
    if let Some(last) = bytes.last_mut() {
        *last &= !((1u16 << spare) - 1) as u8;
    }
    BitBlock::unpack(&bytes, bits).expect("padding cleared")
}

/// Draws `count` pairs with distinct uniformly random inputs, none of them in
/// `exclude`. Deterministic in `(oracle, count, seed, exclude)`.
///
/// Oracles that ask for [`InputSampling::Walk`] get runs of consecutive
/// successor states instead; a run restarts from a fresh random input when
/// it hits an input already taken or excluded.
pub fn generate_pairs(
    oracle: &dyn CipherOracle,
    count: usize,
    seed: u64,
    exclude: Option<&PairSet>,
) -> Result<PairSet> {
    let m = oracle.input_bits();
    if let Some(ex) = exclude {
        if ex.input_bits != m {
            return Err(Error::Length(format!(
                "exclude set has {}-bit inputs, oracle takes {m}",
                ex.input_bits
            )));
        }
    }
    let excluded = exclude.map(|e| e.inputs()).unwrap_or_default();
    let space: u128 = if m >= 127 { u128::MAX } else { 1u128 << m };
    if count as u128 + excluded.len() as u128 > space {
        return Err(Error::Capacity(format!(
            "{count} new inputs plus {} excluded exceed the 2^{m} input space",
            excluded.len()
        )));
    }

    let mut rng = rng::rng(rng::derive_seed(seed, rng::tag::DATASET));
    let mut chosen: Vec<BitBlock> = Vec::with_capacity(count);

    if count > 0 && m <= 24 && (count as u128) * 2 > space {
        // Dense request on a small space: enumerate and shuffle.
        let mut all: Vec<BitBlock> = (0..space as u64)
            .map(|v| BitBlock::from_u64(v, m))
            .filter(|x| !excluded.contains(x))
            .collect();
        rng::shuffle(&mut rng, &mut all);
        all.truncate(count);
        chosen = all;
    } else {
        let mut taken: HashSet<BitBlock> = HashSet::with_capacity(count);
        match oracle.sampling() {
            InputSampling::Uniform => {
                while chosen.len() < count {
                    let x = random_block(&mut rng, m);
                    if !excluded.contains(&x) && taken.insert(x.clone()) {
                        chosen.push(x);
                    }
                }
            }
            InputSampling::Walk => {
                let mut cur: Option<BitBlock> = None;
                while chosen.len() < count {
                    let x = match cur.take() {
                        Some(x) => x,
                        None => random_block(&mut rng, m),
                    };
                    if excluded.contains(&x) || !taken.insert(x.clone()) {
                        continue;
                    }
                    cur = oracle.successor(&x);
                    chosen.push(x);
                }
            }
        }
    }

    let pairs: Vec<(BitBlock, BitBlock)> = chosen
        .into_par_iter()
        .map(|x| {
            let y = oracle.evaluate(&x);
            (x, y)
        })
        .collect();
    Ok(PairSet {
        input_bits: m,
        output_bits: oracle.output_bits(),
        pairs,
        origin: Some(format!("{} seed={seed} count={count}", oracle.name())),
    })
}
