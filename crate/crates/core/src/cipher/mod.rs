//! Black-box cipher oracles.
//!
//! The attack side only ever sees the [`CipherOracle`] trait: widths, a name,
//! and an `evaluate` function. Key material stays inside the concrete types.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{BitBlock, Error, Result};

mod des;
mod hitag2;
mod reference;

pub use self::des::{DesReducedOracle, DEFAULT_DES_KEY};
pub use self::hitag2::{
    filter_word, hitag2_filter, hitag2_step, step_word, Hitag2Mode, Hitag2Oracle, FEEDBACK_TAPS, FILTER_TAPS,
    HITAG2_STATE_BITS,
};
pub use self::reference::{make_reference_oracle, ReferenceKind, ReferenceOracle};

/// How a dataset generator should choose oracle inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSampling {
    /// Independent uniformly random inputs.
    Uniform,
    /// A walk `x, succ(x), succ(succ(x)), ...` from random starting points,
    /// using [`CipherOracle::successor`].
    Walk,
}

/// A deterministic mapping from `input_bits` to `output_bits`.
pub trait CipherOracle: Send + Sync {
    /// Short identifier such as `des-r2` or `hitag2`.
    fn name(&self) -> String;

    fn input_bits(&self) -> usize;

    fn output_bits(&self) -> usize;

    /// Panics if `input` does not have `input_bits()` bits.
    fn evaluate(&self, input: &BitBlock) -> BitBlock;

    /// Match rate reachable without learning anything from the pairs.
    fn base_match_rate(&self) -> f64 {
        0.5
    }

    fn sampling(&self) -> InputSampling {
        InputSampling::Uniform
    }

    /// Next input in [`InputSampling::Walk`] mode.
    fn successor(&self, _input: &BitBlock) -> Option<BitBlock> {
        None
    }

    fn try_evaluate(&self, input: &BitBlock) -> Result<BitBlock> {
        if input.len() != self.input_bits() {
            return Err(Error::Length(format!(
                "{} takes {} input bits, got {}",
                self.name(),
                self.input_bits(),
                input.len()
            )));
        }
        Ok(self.evaluate(input))
    }
}

impl fmt::Debug for dyn CipherOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CipherOracle({}, {}->{})",
            self.name(),
            self.input_bits(),
            self.output_bits()
        )
    }
}

/// Serializable oracle selection, as used in configs and manifests.
///
/// The compact text form is `name[:key=value,...]`, e.g.
/// `des:rounds=1,key=133457799BBCDFF1` or `random:input_bits=16,output_bits=1,seed=5`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum OracleSpec {
    Des {
        rounds: u32,
        #[serde(default = "default_des_key")]
        key: String,
    },
    Hitag2 {
        #[serde(default)]
        mode: Hitag2Mode,
    },
    Identity {
        width: usize,
    },
    Constant {
        width: usize,
        /// Hex output value; all zeros when absent.
        #[serde(default)]
        value: Option<String>,
    },
    Permutation {
        /// Output bit `j` copies input bit `perm[j]`.
        perm: Vec<usize>,
    },
    Random {
        input_bits: usize,
        output_bits: usize,
        seed: u64,
    },
}

fn default_des_key() -> String {
    DEFAULT_DES_KEY.to_string()
}

impl OracleSpec {
    pub fn build(&self) -> Result<Arc<dyn CipherOracle>> {
        Ok(match self {
            OracleSpec::Des { rounds, key } => {
                let key = BitBlock::from_hex(key, 64)?;
                Arc::new(DesReducedOracle::new(&key, *rounds)?)
            }
            OracleSpec::Hitag2 { mode } => Arc::new(Hitag2Oracle::new(*mode)),
            OracleSpec::Identity { width } => {
                Arc::new(ReferenceOracle::new(ReferenceKind::Identity { width: *width })?)
            }
            OracleSpec::Constant { width, value } => {
                let value = match value {
                    Some(hex) => BitBlock::from_hex_value(hex, *width)?,
                    None => BitBlock::zeros((*width).max(1)),
                };
                Arc::new(ReferenceOracle::new(ReferenceKind::Constant {
                    input_bits: *width,
                    value,
                })?)
            }
            OracleSpec::Permutation { perm } => Arc::new(ReferenceOracle::new(
                ReferenceKind::Permutation { perm: perm.clone() },
            )?),
            OracleSpec::Random {
                input_bits,
                output_bits,
                seed,
            } => Arc::new(ReferenceOracle::new(ReferenceKind::RandomFunction {
                input_bits: *input_bits,
                output_bits: *output_bits,
                seed: *seed,
            })?),
        })
    }
}

fn param<T: FromStr>(params: &BTreeMap<&str, &str>, key: &str) -> Result<Option<T>> {
    params
        .get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
        })
        .transpose()
}

fn required<T: FromStr>(params: &BTreeMap<&str, &str>, key: &str, name: &str) -> Result<T> {
    param(params, key)?.ok_or_else(|| Error::Config(format!("{name} needs {key}=")))
}

impl FromStr for OracleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for kv in rest.split(',').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {kv:?}")))?;
            params.insert(k.trim(), v.trim());
        }
        let name = name.trim().to_ascii_lowercase();
        let spec = match name.as_str() {
            "des" => OracleSpec::Des {
                rounds: required(&params, "rounds", "des")?,
                key: param(&params, "key")?.unwrap_or_else(default_des_key),
            },
            "hitag2" => OracleSpec::Hitag2 {
                mode: param(&params, "mode")?.unwrap_or_default(),
            },
            "identity" => OracleSpec::Identity {
                width: required(&params, "width", "identity")?,
            },
            "constant" => OracleSpec::Constant {
                width: required(&params, "width", "constant")?,
                value: param(&params, "value")?,
            },
            "permutation" => {
                let raw: String = required(&params, "perm", "permutation")?;
                let perm = raw
                    .split(['-', ' '])
                    .filter(|p| !p.is_empty())
                    .map(|p| {
                        p.parse()
                            .map_err(|_| Error::Config(format!("bad permutation entry {p:?}")))
                    })
                    .collect::<Result<Vec<usize>>>()?;
                OracleSpec::Permutation { perm }
            }
            "random" | "random_function" | "random-function" => OracleSpec::Random {
                input_bits: required(&params, "input_bits", "random")?,
                output_bits: required(&params, "output_bits", "random")?,
                seed: param(&params, "seed")?.unwrap_or(0),
            },
            other => return Err(Error::Config(format!("unknown cipher {other:?}"))),
        };
        Ok(spec)
    }
}

impl fmt::Display for OracleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleSpec::Des { rounds, key } => write!(f, "des:rounds={rounds},key={key}"),
            OracleSpec::Hitag2 { mode } => write!(f, "hitag2:mode={mode}"),
            OracleSpec::Identity { width } => write!(f, "identity:width={width}"),
            OracleSpec::Constant { width, value } => match value {
                Some(v) => write!(f, "constant:width={width},value={v}"),
                None => write!(f, "constant:width={width}"),
            },
            OracleSpec::Permutation { perm } => {
                let p: Vec<String> = perm.iter().map(|p| p.to_string()).collect();
                write!(f, "permutation:perm={}", p.join("-"))
            }
            OracleSpec::Random {
                input_bits,
                output_bits,
                seed,
            } => write!(
                f,
                "random:input_bits={input_bits},output_bits={output_bits},seed={seed}"
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_form_round_trips() {
        for s in [
            "des:rounds=1,key=133457799BBCDFF1",
            "hitag2:mode=filter",
            "hitag2:mode=keystream",
            "identity:width=8",
            "constant:width=4",
            "permutation:perm=3-2-1-0",
            "random:input_bits=16,output_bits=1,seed=5",
        ] {
            let spec: OracleSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            spec.build().unwrap();
        }
    }

    #[test]
    fn bad_specs() {
        assert!(matches!("rot13".parse::<OracleSpec>(), Err(Error::Config(_))));
        assert!(matches!("des".parse::<OracleSpec>(), Err(Error::Config(_))));
        assert!(matches!(
            "des:rounds=x".parse::<OracleSpec>(),
            Err(Error::Config(_))
        ));
        assert!("des:rounds=17".parse::<OracleSpec>().unwrap().build().is_err());
    }

    #[test]
    fn json_form() {
        let spec = OracleSpec::Des {
            rounds: 2,
            key: DEFAULT_DES_KEY.into(),
        };
        let j = serde_json::to_string(&spec).unwrap();
        assert_eq!(j, r#"{"name":"des","rounds":2,"key":"133457799BBCDFF1"}"#);
        assert_eq!(serde_json::from_str::<OracleSpec>(&j).unwrap(), spec);
        let default_key: OracleSpec = serde_json::from_str(r#"{"name":"des","rounds":3}"#).unwrap();
        assert_eq!(default_key.to_string(), "des:rounds=3,key=133457799BBCDFF1");
    }

    #[test]
    fn base_rates() {
        let rate = |s: &str| s.parse::<OracleSpec>().unwrap().build().unwrap().base_match_rate();
        assert_eq!(rate("des:rounds=1"), 0.75);
        assert_eq!(rate("des:rounds=2"), 0.5);
        assert_eq!(rate("hitag2"), 0.5);
        assert_eq!(rate("identity:width=4"), 0.5);
    }
}
