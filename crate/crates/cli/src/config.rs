//! Experiment configuration: one TOML file of record plus flag overrides.

use std::path::{Path, PathBuf};

use ciphermimic::rng::{self, tag};
use ciphermimic::{Activation, ArchKind, ArchitectureSpec, Error, EvalConfig, Format, OracleSpec, Result, TrainConfig};
use serde::{Deserialize, Deserializer, Serialize};

/// Everything a run needs. Serialized back out, resolved, into each manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cipher: Option<OracleSpec>,
    /// Root seed: training data, network initialisation and the evaluation loop.
    #[serde(default)]
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub suite: SuiteConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    #[serde(deserialize_with = "de_count")]
    pub train_count: usize,
    #[serde(deserialize_with = "de_count")]
    pub test_count: usize,
    pub format: Format,
    /// Seed of the test set; derived from the root seed when absent.
    pub test_seed: Option<u64>,
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    /// Pairs whose inputs must not appear in generated sets.
    pub exclude: Option<PathBuf>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            train_count: 1 << 10,
            test_count: 1 << 10,
            format: Format::Binary,
            test_seed: None,
            train_path: None,
            test_path: None,
            exclude: None,
        }
    }
}

impl DataConfig {
    pub fn test_seed(&self, root: u64) -> u64 {
        self.test_seed.unwrap_or_else(|| rng::derive_seed(root, tag::TEST_SET))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub architectures: Vec<ArchKind>,
    pub activations: Vec<Activation>,
    /// Hidden sizes for `custom` entries.
    pub hidden: Vec<usize>,
    pub cascade_skip: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            architectures: vec![ArchKind::FatShallow],
            activations: vec![Activation::Sigmoid],
            hidden: Vec::new(),
            cascade_skip: false,
        }
    }
}

impl SuiteConfig {
    /// Every architecture crossed with every activation.
    pub fn specs(&self, input_bits: usize, output_bits: usize) -> Vec<ArchitectureSpec> {
        let mut out = Vec::new();
        for &kind in &self.architectures {
            for &act in &self.activations {
                out.push(match kind {
                    ArchKind::Custom => {
                        ArchitectureSpec::custom(input_bits, output_bits, self.hidden.clone(), act, self.cascade_skip)
                    }
                    k => ArchitectureSpec::new(k, input_bits, output_bits, act),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub m1_start: u32,
    pub m2: u32,
    pub max_comp_data: u32,
    pub cmr_base: Option<f64>,
    pub grow: bool,
    pub improvement_tol: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            m1_start: 10,
            m2: 10,
            max_comp_data: 16,
            cmr_base: None,
            grow: false,
            improvement_tol: 1e-4,
        }
    }
}

impl ExperimentConfig {
    pub fn empty() -> Self {
        toml::from_str("").expect("all sections default")
    }

    /// Reads a TOML config, or the `config` object of a JSON manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let mut v: serde_json::Value = serde_json::from_str(&text)?;
            let inner = v
                .get_mut("config")
                .map(serde_json::Value::take)
                .ok_or_else(|| Error::Config(format!("{} has no config object", path.display())))?;
            return serde_json::from_value(inner).map_err(|e| Error::Config(format!("{}: {e}", path.display())));
        }
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Parses TOML. A `preset = "fast"` key in `[train]` starts that section
    /// from [`TrainConfig::fast`] instead of the defaults.
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        if let Some(toml::Value::Table(train)) = doc.get_mut("train") {
            if let Some(preset) = train.remove("preset") {
                let base = preset_table(preset.as_str().unwrap_or_default())?;
                let mut merged = base;
                merged.extend(std::mem::take(train));
                *train = merged;
            }
        }
        doc.try_into().map_err(|e: toml::de::Error| e.to_string())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("runs"))
    }

    pub fn cipher(&self) -> Result<&OracleSpec> {
        self.cipher
            .as_ref()
            .ok_or_else(|| Error::Config("no cipher given (config [cipher] table or --cipher)".into()))
    }

    pub fn train_path(&self) -> PathBuf {
        self.data
            .train_path
            .clone()
            .unwrap_or_else(|| self.out_dir().join(format!("train.{}", self.data.format.extension())))
    }

    pub fn test_path(&self) -> PathBuf {
        self.data
            .test_path
            .clone()
            .unwrap_or_else(|| self.out_dir().join(format!("test.{}", self.data.format.extension())))
    }

    pub fn eval_config(&self, input_bits: usize, output_bits: usize, jobs: usize) -> EvalConfig {
        let e = &self.eval;
        let mut cfg = EvalConfig::new(e.m1_start, e.m2, e.max_comp_data, self.suite.specs(input_bits, output_bits));
        cfg.cmr_base = e.cmr_base;
        cfg.seed = self.seed;
        cfg.train = self.train.clone();
        cfg.grow = e.grow;
        cfg.improvement_tol = e.improvement_tol;
        cfg.jobs = jobs;
        cfg
    }
}

pub fn preset(name: &str) -> std::result::Result<TrainConfig, String> {
    match name {
        "default" => Ok(TrainConfig::default()),
        "fast" => Ok(TrainConfig::fast()),
        other => Err(format!("unknown training preset {other:?} (expected default or fast)")),
    }
}

fn preset_table(name: &str) -> std::result::Result<toml::Table, String> {
    let cfg = preset(name)?;
    toml::Table::try_from(&cfg).map_err(|e| e.to_string())
}

/// Accepts `1024`, `"1024"` or `"2^10"`.
pub fn parse_count(s: &str) -> std::result::Result<usize, String> {
    let s = s.trim();
    let n = if let Some(exp) = s.strip_prefix("2^") {
        let e: u32 = exp.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
        1usize.checked_shl(e).filter(|_| e < usize::BITS).ok_or_else(|| format!("{s} is too large"))?
    } else {
        s.parse().map_err(|_| format!("expected a count like 1024 or 2^10, got {s:?}"))?
    };
    Ok(n)
}

fn de_count<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<usize, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Count {
        N(usize),
        S(String),
    }
    match Count::deserialize(d)? {
        Count::N(n) => Ok(n),
        Count::S(s) => parse_count(&s).map_err(serde::de::Error::custom),
    }
}
