//! Trivial oracles with known answers, used to exercise the evaluator.

use sha2::{Digest, Sha256};

use super::CipherOracle;
use crate::bits::MAX_BITS;
use crate::{BitBlock, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReferenceKind {
    Identity { width: usize },
    Constant { input_bits: usize, value: BitBlock },
    /// Output bit `j` copies input bit `perm[j]`.
    Permutation { perm: Vec<usize> },
    /// SHA-256 of `seed (8 bytes LE) || packed input || block counter`,
    /// truncated to `output_bits`.
    RandomFunction { input_bits: usize, output_bits: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct ReferenceOracle {
    kind: ReferenceKind,
}

fn width_ok(w: usize, what: &str) -> Result<()> {
    if w == 0 || w > MAX_BITS {
        return Err(Error::Config(format!("{what} must be in 1..={MAX_BITS}, got {w}")));
    }
    Ok(())
}

impl ReferenceOracle {
    pub fn new(kind: ReferenceKind) -> Result<Self> {
        match &kind {
            ReferenceKind::Identity { width } => width_ok(*width, "width")?,
            ReferenceKind::Constant { input_bits, .. } => width_ok(*input_bits, "width")?,
            ReferenceKind::Permutation { perm } => {
                width_ok(perm.len(), "permutation length")?;
                let mut seen = vec![false; perm.len()];
                for &p in perm {
                    if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                        return Err(Error::Config(format!("{perm:?} is not a permutation")));
                    }
                }
            }
            ReferenceKind::RandomFunction {
                input_bits,
                output_bits,
                ..
            } => {
                width_ok(*input_bits, "input_bits")?;
                width_ok(*output_bits, "output_bits")?;
            }
        }
        Ok(ReferenceOracle { kind })
    }

    pub fn kind(&self) -> &ReferenceKind {
        &self.kind
    }
}

/// Builds a fixture oracle by kind name.
///
/// `identity` and `constant` (all-zero output) use `width` for both sides;
/// `fixed-permutation` reverses `width` bits; `random-function` maps `width`
/// bits to `output_bits` bits under `seed`.
pub fn make_reference_oracle(
    kind: &str,
    width: usize,
    output_bits: usize,
    seed: u64,
) -> Result<ReferenceOracle> {
    let kind = match kind {
        "identity" => ReferenceKind::Identity { width },
        "constant" | "constant-zero" => {
            width_ok(width, "width")?;
            ReferenceKind::Constant {
                input_bits: width,
                value: BitBlock::zeros(width),
            }
        }
        "fixed-permutation" | "permutation" => ReferenceKind::Permutation {
            perm: (0..width).rev().collect(),
        },
        "random-function" | "random" => ReferenceKind::RandomFunction {
            input_bits: width,
            output_bits,
            seed,
        },
        other => return Err(Error::Config(format!("unknown reference oracle {other:?}"))),
    };
    ReferenceOracle::new(kind)
}

impl CipherOracle for ReferenceOracle {
    fn name(&self) -> String {
        match &self.kind {
            ReferenceKind::Identity { width } => format!("identity{width}"),
            ReferenceKind::Constant { input_bits, .. } => format!("constant{input_bits}"),
            ReferenceKind::Permutation { perm } => format!("permutation{}", perm.len()),
            ReferenceKind::RandomFunction {
                input_bits,
                output_bits,
                seed,
            } => format!("random{input_bits}x{output_bits}s{seed}"),
        }
    }

    fn input_bits(&self) -> usize {
        match &self.kind {
            ReferenceKind::Identity { width } => *width,
            ReferenceKind::Constant { input_bits, .. } => *input_bits,
            ReferenceKind::Permutation { perm } => perm.len(),
            ReferenceKind::RandomFunction { input_bits, .. } => *input_bits,
        }
    }

    fn output_bits(&self) -> usize {
        match &self.kind {
            ReferenceKind::Identity { width } => *width,
            ReferenceKind::Constant { value, .. } => value.len(),
            ReferenceKind::Permutation { perm } => perm.len(),
            ReferenceKind::RandomFunction { output_bits, .. } => *output_bits,
        }
    }

    fn evaluate(&self, input: &BitBlock) -> BitBlock {
        assert_eq!(input.len(), self.input_bits(), "{} input width", self.name());
        match &self.kind {
            ReferenceKind::Identity { .. } => input.clone(),
            ReferenceKind::Constant { value, .. } => value.clone(),
            ReferenceKind::Permutation { perm } => {
                let mut out = BitBlock::zeros(perm.len());
                for (j, &p) in perm.iter().enumerate() {
                    out.set(j, input.bit(p) == 1);
                }
                out
            }
            ReferenceKind::RandomFunction {
                output_bits, seed, ..
            } => {
                let mut out = BitBlock::zeros(*output_bits);
                let mut counter = 0u32;
                let mut j = 0;
                while j < *output_bits {
                    let digest = Sha256::new()
                        .chain_update(seed.to_le_bytes())
                        .chain_update(input.as_bytes())
                        .chain_update(counter.to_le_bytes())
                        .finalize();
                    for byte in digest.iter() {
                        for k in 0..8 {
                            if j < *output_bits && (byte >> (7 - k)) & 1 == 1 {
                                out.set(j, true);
                            }
                            j += 1;
                        }
                    }
                    counter += 1;
                }
                out
            }
        }
    }
}
