use std::sync::atomic::{AtomicBool, Ordering};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cipher::CipherOracle;
use crate::dataset::generate_pairs;
use crate::net::{ArchitectureSpec, MimicNetwork};
use crate::rng::{self, tag};
use crate::train::{train, TrainConfig};
use crate::{Error, PairSet, Result};

/// Settings for the data-doubling evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// log2 of the first training-set size.
    pub m1_start: u32,
    /// log2 of the test-set size.
    pub m2: u32,
    /// Success threshold; the oracle's base match rate when `None`.
    #[serde(default)]
    pub cmr_base: Option<f64>,
    /// Largest log2 training-set size to try.
    pub max_comp_data: u32,
    pub suite: Vec<ArchitectureSpec>,
    /// Root seed for datasets and network initialisation.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub train: TrainConfig,
    /// Extend the previous training set instead of drawing a fresh one.
    #[serde(default)]
    pub grow: bool,
    /// Match-rate gains below this do not count as improvement.
    #[serde(default = "default_tolerance")]
    pub improvement_tol: f64,
    /// Suite members trained concurrently.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn default_tolerance() -> f64 {
    1e-4
}

fn default_jobs() -> usize {
    1
}

impl EvalConfig {
    pub fn new(m1_start: u32, m2: u32, max_comp_data: u32, suite: Vec<ArchitectureSpec>) -> Self {
        EvalConfig {
            m1_start,
            m2,
            cmr_base: None,
            max_comp_data,
            suite,
            seed: 0,
            train: TrainConfig::default(),
            grow: false,
            improvement_tol: default_tolerance(),
            jobs: 1,
        }
    }

    fn validate(&self, oracle: &dyn CipherOracle) -> Result<()> {
        if self.m1_start < 1 {
            return Err(Error::Config("m1_start must be >= 1".into()));
        }
        if self.suite.is_empty() {
            return Err(Error::Config("network suite is empty".into()));
        }
        if let Some(b) = self.cmr_base {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("cmr_base {b} outside [0, 1)")));
            }
        }
        for spec in &self.suite {
            spec.validate()?;
            if spec.input_width != oracle.input_bits() || spec.output_bit_count != oracle.output_bits() {
                return Err(Error::Config(format!(
                    "{} is {}->{}, oracle {} is {}->{}",
                    spec.id(),
                    spec.input_width,
                    spec.output_bit_count,
                    oracle.name(),
                    oracle.input_bits(),
                    oracle.output_bits()
                )));
            }
        }
        self.train.validate()?;
        let m = oracle.input_bits() as u32;
        if self.m2 >= m || self.max_comp_data >= m {
            return Err(Error::Capacity(format!(
                "2^{} + 2^{} pairs do not fit in 2^{m} inputs",
                self.max_comp_data, self.m2
            )));
        }
        // 2^a + 2^b <= 2^m with a, b < m fails only when a = b = m - 1... and
        // that case is exactly full use, so it fits.
        let cap = (m - self.m2).min(self.max_comp_data);
        if self.m1_start > cap {
            return Err(Error::Config(format!(
                "m1_start {} exceeds the data cap {cap}",
                self.m1_start
            )));
        }
        Ok(())
    }
}

/// Result of one suite member at one data size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub comp_data: u32,
    pub architecture: String,
    pub cmr: f64,
    pub iterations: u64,
    pub epochs: usize,
    pub wall_time: f64,
}

/// What a suite runner reports back.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub cmr: f64,
    pub iterations: u64,
    pub epochs: usize,
    pub wall_time: f64,
}

/// Strength of one cipher against one network suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityIndicator {
    pub cipher: String,
    /// Best test match rate reached.
    pub cmr: f64,
    /// log2 of the smallest training set that reached `cmr`.
    pub comp_data: u32,
    /// Training iterations of the winning network at that size.
    pub comp_time: u64,
    pub best_architecture: String,
    pub base_match_rate: f64,
    /// Iterations summed over every network trained at the winning size.
    #[serde(default)]
    pub comp_time_cumulative: u64,
    pub history: Vec<HistoryEntry>,
}

impl SecurityIndicator {
    /// The attack beat the base match rate.
    pub fn successful(&self) -> bool {
        self.cmr > self.base_match_rate
    }

    /// Builds the indicator from a non-empty history: the maximal match rate,
    /// the smallest data exponent reaching it, and that run's iterations.
    pub fn from_history(cipher: String, base_match_rate: f64, history: Vec<HistoryEntry>) -> Result<Self> {
        let best = history
            .iter()
            .map(|h| h.cmr)
            .fold(f64::NEG_INFINITY, f64::max);
        let win = history
            .iter()
            .filter(|h| h.cmr == best)
            .min_by_key(|h| h.comp_data)
            .ok_or_else(|| Error::Config("empty evaluation history".into()))?
            .clone();
        let cumulative = history
            .iter()
            .filter(|h| h.comp_data == win.comp_data)
            .map(|h| h.iterations)
            .sum();
        Ok(SecurityIndicator {
            cipher,
            cmr: best,
            comp_data: win.comp_data,
            comp_time: win.iterations,
            best_architecture: win.architecture,
            base_match_rate,
            comp_time_cumulative: cumulative,
            history,
        })
    }
}

/// Runs the evaluation with the built-in trainer: a fresh network per suite
/// member and data size, seeded from `cfg.seed` and the member's index.
pub fn run_evaluation(oracle: &dyn CipherOracle, cfg: &EvalConfig) -> Result<SecurityIndicator> {
    run_evaluation_with(oracle, cfg, |spec, index, train_set, test_set| {
        let net = MimicNetwork::<f32>::build(spec, cfg.seed.wrapping_add(index as u64))?;
        let (_, report) = train(net, train_set, test_set, &cfg.train)?;
        Ok(RunOutcome {
            cmr: report.final_cmr.unwrap_or(0.0),
            iterations: report.iterations,
            epochs: report.epochs_run,
            wall_time: report.wall_time,
        })
    })
}

/// The data-doubling loop with a caller-supplied suite runner.
///
/// ```text
/// cmr = 0; improve = 0; d = m1_start - 1
/// draw M2 (2^m2 pairs)
/// while (cmr <= base or improve > 0) and d < m - m2 and d < max_comp_data:
///     d += 1; improve = 0
///     draw M1 (2^d pairs, disjoint from M2)
///     for each network: train on M1, score on M2
///         if score > cmr: improve += score - cmr; cmr = score
/// ```
///
/// Gains smaller than `improvement_tol` are not added to `improve`.
pub fn run_evaluation_with<R>(
    oracle: &dyn CipherOracle,
    cfg: &EvalConfig,
    runner: R,
) -> Result<SecurityIndicator>
where
    R: Fn(&ArchitectureSpec, usize, &PairSet, &PairSet) -> Result<RunOutcome> + Sync,
{
    cfg.validate(oracle)?;
    let base = cfg.cmr_base.unwrap_or_else(|| oracle.base_match_rate());
    let m = oracle.input_bits() as u32;

    let test_set = generate_pairs(oracle, 1usize << cfg.m2, rng::derive_seed(cfg.seed, tag::TEST_SET), None)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut cmr = 0.0f64;
    let mut improve = 0.0f64;
    let mut comp_data = cfg.m1_start - 1;
    let mut history = Vec::new();
    let mut train_set: Option<PairSet> = None;

    while (cmr <= base || improve > 0.0) && comp_data < m - cfg.m2 && comp_data < cfg.max_comp_data {
        comp_data += 1;
        improve = 0.0;
        let size = 1usize << comp_data;
        let data_seed = cfg.seed.wrapping_add(comp_data as u64);
        let m1 = match train_set.take() {
            Some(mut prev) if cfg.grow => {
                // Keep the old pairs; draw only the missing ones.
                let mut exclude = test_set.clone();
                exclude.extend_unique(&prev)?;
                let extra = generate_pairs(oracle, size - prev.len(), data_seed, Some(&exclude))?;
                prev.extend_unique(&extra)?;
                prev
            }
            _ => generate_pairs(oracle, size, data_seed, Some(&test_set))?,
        };
        if !m1.is_disjoint(&test_set) {
            return Err(Error::Leakage(format!("training set 2^{comp_data} overlaps the test set")));
        }

        let failed = AtomicBool::new(false);
        let outcomes: Vec<Result<RunOutcome>> = pool.install(|| {
            cfg.suite
                .par_iter()
                .enumerate()
                .map(|(i, spec)| {
                    if failed.load(Ordering::Relaxed) {
                        return Err(Error::Config("aborted after an earlier failure".into()));
                    }
                    let r = runner(spec, i, &m1, &test_set);
                    if r.is_err() {
                        failed.store(true, Ordering::Relaxed);
                    }
                    r
                })
                .collect()
        });

        for (spec, outcome) in cfg.suite.iter().zip(outcomes) {
            let outcome = outcome.map_err(|e| {
                Error::Numeric(format!("training {} on 2^{comp_data} pairs failed: {e}", spec.id()))
            })?;
            info!(
                "{} 2^{comp_data} {}: cmr {:.4} after {} iterations",
                oracle.name(),
                spec.id(),
                outcome.cmr,
                outcome.iterations
            );
            if outcome.cmr > cmr {
                if outcome.cmr - cmr >= cfg.improvement_tol {
                    improve += outcome.cmr - cmr;
                }
                cmr = outcome.cmr;
            }
            history.push(HistoryEntry {
                comp_data,
                architecture: spec.id(),
                cmr: outcome.cmr,
                iterations: outcome.iterations,
                epochs: outcome.epochs,
                wall_time: outcome.wall_time,
            });
        }
        train_set = Some(m1);
    }

    SecurityIndicator::from_history(oracle.name(), base, history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::make_reference_oracle;
    use crate::net::{Activation, ArchKind};
    use std::sync::Mutex;

    fn spec(width: usize) -> ArchitectureSpec {
        ArchitectureSpec::new(ArchKind::FatShallow, width, width, Activation::Sigmoid)
    }

    fn fixed(scores: Vec<f64>) -> impl Fn(&ArchitectureSpec, usize, &PairSet, &PairSet) -> Result<RunOutcome> + Sync {
        let calls = Mutex::new(0usize);
        move |_, _, m1, _| {
            let mut c = calls.lock().unwrap();
            let cmr = scores[(*c).min(scores.len() - 1)];
            *c += 1;
            Ok(RunOutcome { cmr, iterations: m1.len() as u64, epochs: 1, wall_time: 0.0 })
        }
    }

    #[test]
    fn stops_after_first_non_improving_doubling() {
        // Above base on the first pass, flat afterwards: sizes m1_start and
        // m1_start + 1 are tried, nothing more.
        let o = make_reference_oracle("identity", 12, 0, 0).unwrap();
        let cfg = EvalConfig::new(3, 4, 7, vec![spec(12)]);
        let ind = run_evaluation_with(&o, &cfg, fixed(vec![0.8, 0.8, 0.8])).unwrap();
        let sizes: Vec<u32> = ind.history.iter().map(|h| h.comp_data).collect();
        assert_eq!(sizes, vec![3, 4]);
        assert_eq!((ind.cmr, ind.comp_data, ind.comp_time), (0.8, 3, 8));
    }

    #[test]
    fn never_above_base_runs_to_the_cap() {
        let o = make_reference_oracle("identity", 12, 0, 0).unwrap();
        let cfg = EvalConfig::new(3, 4, 6, vec![spec(12)]);
        let ind = run_evaluation_with(&o, &cfg, fixed(vec![0.5])).unwrap();
        let sizes: Vec<u32> = ind.history.iter().map(|h| h.comp_data).collect();
        assert_eq!(sizes, vec![3, 4, 5, 6]);
        assert!(!ind.successful());
        assert_eq!(ind.comp_data, 3);
    }

    #[test]
    fn literal_bound_m_minus_m2() {
        let o = make_reference_oracle("identity", 8, 0, 0).unwrap();
        let cfg = EvalConfig::new(2, 4, 7, vec![spec(8)]);
        let ind = run_evaluation_with(&o, &cfg, fixed(vec![0.5])).unwrap();
        assert_eq!(ind.history.last().unwrap().comp_data, 4);
    }

    #[test]
    fn improvements_keep_doubling_and_tiny_gains_do_not() {
        let o = make_reference_oracle("identity", 14, 0, 0).unwrap();
        let cfg = EvalConfig::new(2, 4, 9, vec![spec(14)]);
        let ind = run_evaluation_with(&o, &cfg, fixed(vec![0.6, 0.7, 0.9, 0.90005, 0.8])).unwrap();
        let sizes: Vec<u32> = ind.history.iter().map(|h| h.comp_data).collect();
        assert_eq!(sizes, vec![2, 3, 4, 5]);
        // the tiny gain still counts towards the best value
        assert_eq!(ind.cmr, 0.90005);
        assert_eq!(ind.comp_data, 5);
    }

    #[test]
    fn indicator_takes_minimal_data_for_best() {
        let h = |d, a: &str, cmr, it| HistoryEntry {
            comp_data: d,
            architecture: a.into(),
            cmr,
            iterations: it,
            epochs: 1,
            wall_time: 0.0,
        };
        let ind = SecurityIndicator::from_history(
            "x".into(),
            0.5,
            vec![h(4, "a", 0.7, 10), h(4, "b", 0.9, 20), h(5, "a", 0.9, 30), h(5, "b", 0.8, 40)],
        )
        .unwrap();
        assert_eq!((ind.cmr, ind.comp_data, ind.comp_time), (0.9, 4, 20));
        assert_eq!(ind.best_architecture, "b");
        assert_eq!(ind.comp_time_cumulative, 30);
        assert!(ind.history.iter().any(|e| e.cmr == ind.cmr && e.comp_data == ind.comp_data));
        assert!(SecurityIndicator::from_history("x".into(), 0.5, vec![]).is_err());
    }

    #[test]
    fn training_sets_never_touch_the_test_set() {
        let o = make_reference_oracle("identity", 10, 0, 0).unwrap();
        for grow in [false, true] {
            let mut cfg = EvalConfig::new(3, 5, 7, vec![spec(10)]);
            cfg.grow = grow;
            let seen = Mutex::new(Vec::new());
            run_evaluation_with(&o, &cfg, |_, _, m1, m2| {
                assert!(m1.is_disjoint(m2));
                seen.lock().unwrap().push((m1.len(), m2.len()));
                Ok(RunOutcome { cmr: 0.5, iterations: 1, epochs: 1, wall_time: 0.0 })
            })
            .unwrap();
            assert_eq!(*seen.lock().unwrap(), vec![(8, 32), (16, 32), (32, 32)]);
        }
    }

    #[test]
    fn config_errors() {
        let o = make_reference_oracle("identity", 8, 0, 0).unwrap();
        let ok = EvalConfig::new(2, 4, 4, vec![spec(8)]);
        let run = |c: &EvalConfig| run_evaluation_with(&o, c, fixed(vec![0.5]));
        assert!(matches!(run(&EvalConfig { suite: vec![], ..ok.clone() }), Err(Error::Config(_))));
        assert!(matches!(run(&EvalConfig { m1_start: 0, ..ok.clone() }), Err(Error::Config(_))));
        assert!(matches!(run(&EvalConfig { cmr_base: Some(1.0), ..ok.clone() }), Err(Error::Config(_))));
        assert!(matches!(run(&EvalConfig { m2: 8, ..ok.clone() }), Err(Error::Capacity(_))));
        assert!(matches!(run(&EvalConfig { suite: vec![spec(9)], ..ok.clone() }), Err(Error::Config(_))));
        let failing = run_evaluation_with(&o, &ok, |_, _, _, _| Err(Error::Numeric("boom".into())));
        assert!(failing.is_err());
    }

    #[test]
    fn json_shape() {
        let ind = SecurityIndicator::from_history(
            "des-r1".into(),
            0.75,
            vec![HistoryEntry {
                comp_data: 16,
                architecture: "fat_shallow/sigmoid".into(),
                cmr: 0.99,
                iterations: 100,
                epochs: 2,
                wall_time: 1.0,
            }],
        )
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&ind).unwrap();
        for key in ["cipher", "cmr", "comp_data", "comp_time", "best_architecture", "base_match_rate", "history"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: SecurityIndicator = serde_json::from_value(v).unwrap();
        assert_eq!(back, ind);
    }
}
