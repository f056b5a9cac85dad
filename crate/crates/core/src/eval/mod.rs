//! Match-rate metrics, the data-doubling evaluation loop, and strength
//! comparison between ciphers.

use ndarray::ArrayView2;

use crate::cipher::CipherOracle;
use crate::{Error, Result};

mod compare;
mod indicator;

pub use self::compare::{compare, ranking_csv, ranking_table, Ranked, DEFAULT_CMR_TOLERANCE};
pub use self::indicator::{
    run_evaluation, run_evaluation_with, EvalConfig, HistoryEntry, RunOutcome, SecurityIndicator,
};

/// Fraction of bit positions where `predicted` equals `truth`.
pub fn cipher_match_rate(predicted: ArrayView2<u8>, truth: ArrayView2<u8>) -> Result<f64> {
    if predicted.dim() != truth.dim() {
        return Err(Error::Shape(format!(
            "predicted {:?} vs truth {:?}",
            predicted.dim(),
            truth.dim()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Shape("empty prediction".into()));
    }
    let hits = predicted
        .iter()
        .zip(truth.iter())
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Match rate reachable without learning: 0.75 for one-round DES, where half
/// the output is a keyless copy of input bits, 0.5 otherwise.
pub fn base_match_rate(oracle: &dyn CipherOracle) -> f64 {
    oracle.base_match_rate()
}
