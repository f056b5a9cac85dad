use std::cmp::Ordering;
use std::fmt::Write as _;

use super::SecurityIndicator;

/// Match rates closer than this are treated as equal when ranking.
pub const DEFAULT_CMR_TOLERANCE: f64 = 0.01;

/// One row of a strength ranking; `rank` 1 is the strongest cipher.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranked<'a> {
    pub rank: usize,
    pub index: usize,
    pub indicator: &'a SecurityIndicator,
}

/// Ranks ciphers strongest first.
///
/// Unsuccessful attacks (match rate at or below base) come first. Within
/// each group a lower match rate is stronger; match rates are compared after
/// rounding to multiples of `tolerance`, so the order is a total preorder.
/// Remaining ties go to the larger data complexity, then the larger time
/// complexity, then input order.
pub fn compare(indicators: &[SecurityIndicator], tolerance: f64) -> Vec<Ranked<'_>> {
    let mut idx: Vec<usize> = (0..indicators.len()).collect();
    idx.sort_by(|&a, &b| strength_order(&indicators[a], &indicators[b], tolerance));
    idx.into_iter()
        .enumerate()
        .map(|(r, i)| Ranked {
            rank: r + 1,
            index: i,
            indicator: &indicators[i],
        })
        .collect()
}

fn bucket(cmr: f64, tolerance: f64) -> i64 {
    if tolerance > 0.0 {
        (cmr / tolerance).round() as i64
    } else {
        // exact comparison via the bit pattern of a non-negative float
        cmr.max(0.0).to_bits() as i64
    }
}

/// `Less` means `a` is the stronger cipher.
fn strength_order(a: &SecurityIndicator, b: &SecurityIndicator, tolerance: f64) -> Ordering {
    a.successful()
        .cmp(&b.successful())
        .then_with(|| bucket(a.cmr, tolerance).cmp(&bucket(b.cmr, tolerance)))
        .then_with(|| b.comp_data.cmp(&a.comp_data))
        .then_with(|| b.comp_time.cmp(&a.comp_time))
}

fn log2(v: u64) -> f64 {
    if v == 0 {
        0.0
    } else {
        (v as f64).log2()
    }
}

/// `rank,cipher,cmr,base_match_rate,successful,comp_data,comp_time,log2_comp_time,best_architecture`
pub fn ranking_csv(ranked: &[Ranked<'_>]) -> String {
    let mut s = String::from(
        "rank,cipher,cmr,base_match_rate,successful,comp_data,comp_time,log2_comp_time,best_architecture\n",
    );
    for r in ranked {
        let i = r.indicator;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:.2},{}",
            r.rank,
            i.cipher,
            i.cmr,
            i.base_match_rate,
            i.successful(),
            i.comp_data,
            i.comp_time,
            log2(i.comp_time),
            i.best_architecture
        );
    }
    s
}

/// Human-readable version of [`ranking_csv`].
pub fn ranking_table(ranked: &[Ranked<'_>]) -> String {
    let mut s = format!(
        "{:<5} {:<20} {:>8} {:>6} {:<6} {:>9} {:>9}  {}\n",
        "rank", "cipher", "cmr", "base", "broken", "data", "time", "best network"
    );
    for r in ranked {
        let i = r.indicator;
        let _ = writeln!(
            s,
            "{:<5} {:<20} {:>7.2}% {:>5.0}% {:<6} {:>9} {:>9}  {}",
            r.rank,
            i.cipher,
            100.0 * i.cmr,
            100.0 * i.base_match_rate,
            if i.successful() { "yes" } else { "no" },
            format!("2^{}", i.comp_data),
            format!("2^{:.1}", log2(i.comp_time)),
            i.best_architecture
        );
    }
    s
}
