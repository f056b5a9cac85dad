//! Cipher-strength evaluation by neural mimicry.
//!
//! A cipher is treated as a black box mapping `m` input bits to `n` output
//! bits. Small dense networks with one two-class softmax head per output bit
//! are trained on known input/output pairs, and the cipher's strength is
//! summarised by a [`SecurityIndicator`]: the best bitwise match rate reached
//! on held-out pairs, together with the data and training effort needed to
//! reach it.
//!
//! The crate is organised bottom-up:
//!
//! * [`bits`]: fixed-length bit strings and their hex/byte/feature encodings.
//! * [`cipher`]: black-box oracles (round-reduced DES, Hitag2 and fixtures).
//! * [`dataset`]: disjoint train/test pair sets and their file formats.
//! * [`net`]: the dense network engine with backpropagation.
//! * [`train`]: the mini-batch training loop.
//! * [`eval`]: match-rate metrics, the data-doubling evaluation loop and
//!   indicator comparison.

pub mod bits;
pub mod cipher;
pub mod dataset;
mod error;
pub mod eval;
pub mod net;
pub mod rng;
pub mod train;

pub use bits::{BitBlock, FeatureEncoding};
pub use cipher::{CipherOracle, DesReducedOracle, Hitag2Mode, Hitag2Oracle, OracleSpec};
pub use dataset::{Format, PairSet};
pub use error::{Error, Result};
pub use eval::{EvalConfig, SecurityIndicator};
pub use net::{Activation, ArchKind, ArchitectureSpec, MimicNetwork, OptimizerConfig};
pub use train::{TrainConfig, TrainReport};
