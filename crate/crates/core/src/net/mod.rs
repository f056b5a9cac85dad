//! Dense mimic networks trained from scratch.
//!
//! A network maps `m` input features through a stack of dense hidden layers
//! to `n` independent two-logit softmax heads, one per output bit. Three
//! shapes are built in:
//!
//! | kind          | hidden sizes          | connectivity                      |
//! |---------------|-----------------------|-----------------------------------|
//! | `fat_shallow` | `[1000]`              | plain                             |
//! | `deep_thin`   | `[128, 128, 128, 128]`| plain                             |
//! | `cascade`     | `[128, 256, 256, 128]`| each layer also sees layer `l-2`  |
//!
//! In the cascade net, hidden layer `l` (1-based, layer 0 being the input)
//! reads the concatenation `[h(l-1), h(l-2)]`, and the heads read the last two
//! hidden layers. The first hidden layer has no `l-2` and reads the input
//! alone.

use std::fmt;
use std::str::FromStr;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

mod checkpoint;
mod network;
mod optim;

pub use self::checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use self::network::{Dense, MimicNetwork, Parameters, PredictionBatch};
pub use self::optim::{Optimizer, OptimizerConfig};

/// Floating-point types the engine runs in (`f32` for training, `f64` for
/// gradient checks).
pub trait Scalar:
    Float + FromPrimitive + LinalgScalar + ScalarOperand + Send + Sync + fmt::Debug + 'static
{
    /// Applies `act` to every element of `xs`.
    fn activate(act: Activation, xs: &mut [Self]) {
        xs.iter_mut().for_each(|v| *v = act.apply(*v));
    }
}

impl Scalar for f32 {
    fn activate(act: Activation, xs: &mut [f32]) {
        match act {
            Activation::Sigmoid => xs.iter_mut().for_each(|v| *v = fast::sigmoid(*v)),
            Activation::Tanh => xs.iter_mut().for_each(|v| *v = 2.0 * fast::sigmoid(2.0 * *v) - 1.0),
            Activation::Relu => xs.iter_mut().for_each(|v| *v = v.max(0.0)),
        }
    }
}

impl Scalar for f64 {}

/// Branch-free `f32` kernels that the compiler can vectorise.
mod fast {
    /// `e^x` for `x` clamped to `[-87, 88]`; about 2 ulp.
    #[inline(always)]
    pub fn exp(x: f32) -> f32 {
        const ROUND: f32 = 12_582_912.0; // 1.5 * 2^23
        let x = x.clamp(-87.0, 88.0);
        let n = (x * std::f32::consts::LOG2_E + ROUND) - ROUND;
        let r = x - n * 0.693_359_4 + n * 2.121_944_4e-4;
        let mut p = 1.987_569_1e-4f32;
        p = p * r + 1.398_199_9e-3;
        p = p * r + 8.333_452e-3;
        p = p * r + 4.166_579_6e-2;
        p = p * r + 1.666_666_5e-1;
        p = p * r + 0.5;
        let e = p * r * r + r + 1.0;
        e * f32::from_bits(((n as i32 + 127) as u32) << 23)
    }

    #[inline(always)]
    pub fn sigmoid(x: f32) -> f32 {
        1.0 / (1.0 + exp(-x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Sigmoid, Activation::Tanh, Activation::Relu];

    #[inline]
    pub fn apply<F: Float>(self, x: F) -> F {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(F::zero()),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    pub fn derivative_from_output<F: Float>(self, y: F) -> F {
        match self {
            Activation::Sigmoid => y * (F::one() - y),
            Activation::Tanh => F::one() - y * y,
            Activation::Relu => {
                if y > F::zero() {
                    F::one()
                } else {
                    F::zero()
                }
            }
        }
    }

    fn code(self) -> u8 {
        match self {
            Activation::Sigmoid => 0,
            Activation::Tanh => 1,
            Activation::Relu => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }
}

#[inline]
pub(crate) fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::Config(format!("unknown activation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchKind {
    FatShallow,
    DeepThin,
    Cascade,
    /// Free-form sizes and connectivity, for scaled-down experiments.
    Custom,
}

impl ArchKind {
    /// The three fixed-size shapes.
    pub const STANDARD: [ArchKind; 3] = [ArchKind::FatShallow, ArchKind::DeepThin, ArchKind::Cascade];

    pub fn default_hidden(self) -> &'static [usize] {
        match self {
            ArchKind::FatShallow => &[1000],
            ArchKind::DeepThin => &[128, 128, 128, 128],
            ArchKind::Cascade => &[128, 256, 256, 128],
            ArchKind::Custom => &[],
        }
    }

    fn code(self) -> u8 {
        match self {
            ArchKind::FatShallow => 0,
            ArchKind::DeepThin => 1,
            ArchKind::Cascade => 2,
            ArchKind::Custom => 3,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        [
            ArchKind::FatShallow,
            ArchKind::DeepThin,
            ArchKind::Cascade,
            ArchKind::Custom,
        ]
        .get(c as usize)
        .copied()
    }
}

impl fmt::Display for ArchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchKind::FatShallow => "fat_shallow",
            ArchKind::DeepThin => "deep_thin",
            ArchKind::Cascade => "cascade",
            ArchKind::Custom => "custom",
        })
    }
}

impl FromStr for ArchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "fat_shallow" | "fat" => Ok(ArchKind::FatShallow),
            "deep_thin" | "deep" => Ok(ArchKind::DeepThin),
            "cascade" => Ok(ArchKind::Cascade),
            "custom" => Ok(ArchKind::Custom),
            other => Err(Error::Config(format!("unknown architecture {other:?}"))),
        }
    }
}

/// Shape of a mimic network.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub kind: ArchKind,
    pub input_width: usize,
    pub output_bit_count: usize,
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub cascade_skip: bool,
}

impl ArchitectureSpec {
    /// One of the three built-in shapes.
    pub fn new(kind: ArchKind, input_width: usize, output_bits: usize, activation: Activation) -> Self {
        ArchitectureSpec {
            kind,
            input_width,
            output_bit_count: output_bits,
            hidden_sizes: kind.default_hidden().to_vec(),
            activation,
            cascade_skip: kind == ArchKind::Cascade,
        }
    }

    pub fn custom(
        input_width: usize,
        output_bits: usize,
        hidden_sizes: Vec<usize>,
        activation: Activation,
        cascade_skip: bool,
    ) -> Self {
        ArchitectureSpec {
            kind: ArchKind::Custom,
            input_width,
            output_bit_count: output_bits,
            hidden_sizes,
            activation,
            cascade_skip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_width == 0 || self.output_bit_count == 0 {
            return Err(Error::Config(format!(
                "network widths must be positive, got {}->{}",
                self.input_width, self.output_bit_count
            )));
        }
        if self.hidden_sizes.contains(&0) {
            return Err(Error::Config("hidden layer of width 0".into()));
        }
        if self.kind != ArchKind::Custom {
            let want = self.kind.default_hidden();
            if self.hidden_sizes != want {
                return Err(Error::Config(format!(
                    "{} requires hidden sizes {want:?}, got {:?}",
                    self.kind, self.hidden_sizes
                )));
            }
            if self.cascade_skip != (self.kind == ArchKind::Cascade) {
                return Err(Error::Config(format!(
                    "{} requires cascade_skip = {}",
                    self.kind,
                    self.kind == ArchKind::Cascade
                )));
            }
        }
        Ok(())
    }

    /// Short label such as `fat_shallow/sigmoid`.
    pub fn id(&self) -> String {
        match self.kind {
            ArchKind::Custom => {
                let sizes: Vec<String> = self.hidden_sizes.iter().map(|s| s.to_string()).collect();
                format!(
                    "custom{}[{}]/{}",
                    if self.cascade_skip { "-cascade" } else { "" },
                    sizes.join("x"),
                    self.activation
                )
            }
            k => format!("{k}/{}", self.activation),
        }
    }

    /// Which earlier representations feed layer `layer` (0-based hidden
    /// index; `hidden_sizes.len()` means the heads). `None` is the input.
    pub fn sources(&self, layer: usize) -> Vec<Option<usize>> {
        let prev = layer.checked_sub(1);
        let mut s = vec![prev];
        if self.cascade_skip && layer >= 1 {
            s.push(layer.checked_sub(2));
        }
        s
    }

    fn width_of(&self, source: Option<usize>) -> usize {
        source.map_or(self.input_width, |k| self.hidden_sizes[k])
    }

    /// Width of the concatenated input of layer `layer`.
    pub fn fan_in(&self, layer: usize) -> usize {
        self.sources(layer).into_iter().map(|s| self.width_of(s)).sum()
    }

    pub fn parameter_count(&self) -> usize {
        let hidden: usize = (0..self.hidden_sizes.len())
            .map(|l| (self.fan_in(l) + 1) * self.hidden_sizes[l])
            .sum();
        hidden + (self.fan_in(self.hidden_sizes.len()) + 1) * 2 * self.output_bit_count
    }
}
