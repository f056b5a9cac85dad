use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ciphermimic::dataset::{generate_pairs, read_pairs, write_pairs};
use ciphermimic::eval::{compare as rank, ranking_csv, ranking_table, run_evaluation};
use ciphermimic::net::save_checkpoint;
use ciphermimic::train::train as train_network;
use ciphermimic::{Error, Format, MimicNetwork, PairSet, Result, SecurityIndicator, TrainReport};
use log::info;
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::manifest;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))
}

fn load_set(path: &Path, what: &str) -> Result<PairSet> {
    if !path.is_file() {
        return Err(Error::Config(format!("{what} file {} does not exist", path.display())));
    }
    read_pairs(path, Format::from_path(path))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

pub fn gen(cfg: &ExperimentConfig, argv: &[String]) -> Result<()> {
    let spec = cfg.cipher()?;
    let oracle = spec.build()?;
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;

    let mut exclude = match &cfg.data.exclude {
        Some(p) => load_set(p, "exclude")?,
        None => PairSet::empty(oracle.input_bits(), oracle.output_bits()),
    };
    let mut outputs = Vec::new();
    let test_seed = cfg.data.test_seed(cfg.seed);
    if cfg.data.test_count > 0 {
        let test = generate_pairs(oracle.as_ref(), cfg.data.test_count, test_seed, Some(&exclude))?;
        let path = cfg.test_path();
        write_pairs(&test, &path, Format::from_path(&path))?;
        exclude.extend_unique(&test)?;
        outputs.push(path);
    }
    let train = generate_pairs(oracle.as_ref(), cfg.data.train_count, cfg.seed, Some(&exclude))?;
    let path = cfg.train_path();
    write_pairs(&train, &path, Format::from_path(&path))?;
    outputs.push(path);

    let summary = json!({
        "cipher": oracle.name(),
        "input_bits": oracle.input_bits(),
        "output_bits": oracle.output_bits(),
        "train_count": cfg.data.train_count,
        "test_count": cfg.data.test_count,
        "train_seed": cfg.seed,
        "test_seed": test_seed,
    });
    let m = manifest::write(&dir, "gen", argv, cfg, &outputs, summary)?;
    println!(
        "{}: {} train / {} test pairs, {} -> {} bits, in {} (manifest {})",
        oracle.name(),
        cfg.data.train_count,
        cfg.data.test_count,
        oracle.input_bits(),
        oracle.output_bits(),
        dir.display(),
        m.display()
    );
    Ok(())
}

/// Run id used for file names: `fat_shallow-sigmoid`.
fn run_id(spec: &ciphermimic::ArchitectureSpec) -> String {
    spec.id().replace('/', "-")
}

pub fn train(cfg: &ExperimentConfig, jobs: usize, argv: &[String]) -> Result<()> {
    let train_set = load_set(&cfg.train_path(), "training")?;
    let test_set = load_set(&cfg.test_path(), "test")?;
    let (m, n) = (train_set.input_bits(), train_set.output_bits());
    if (test_set.input_bits(), test_set.output_bits()) != (m, n) {
        return Err(Error::Config(format!(
            "training pairs are {m}->{n} bits but test pairs are {}->{}",
            test_set.input_bits(),
            test_set.output_bits()
        )));
    }
    if let Some(spec) = &cfg.cipher {
        let o = spec.build()?;
        if (o.input_bits(), o.output_bits()) != (m, n) {
            return Err(Error::Config(format!(
                "{} is {}->{} bits but the pairs are {m}->{n}",
                o.name(),
                o.input_bits(),
                o.output_bits()
            )));
        }
    }
    if !train_set.is_disjoint(&test_set) {
        return Err(Error::Leakage("training and test files share inputs".into()));
    }
    cfg.train.validate()?;
    let specs = cfg.suite.specs(m, n);
    for s in &specs {
        s.validate()?;
    }
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;

    let results: Vec<Result<(String, TrainReport, Vec<PathBuf>)>> = pool(jobs)?.install(|| {
        specs
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let id = run_id(spec);
                let net = MimicNetwork::<f32>::build(spec, cfg.seed.wrapping_add(i as u64))?;
                info!("training {id} on {} pairs", train_set.len());
                let (net, report) = train_network(net, &train_set, &test_set, &cfg.train)?;
                let ckpt = dir.join(format!("{id}.ncmn"));
                save_checkpoint(&net, &ckpt)?;
                let report_path = dir.join(format!("{id}.report.json"));
                std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
                let curve = dir.join(format!("{id}.curve.csv"));
                let mut buf = Vec::new();
                report.write_curve_csv(&mut buf)?;
                std::fs::write(&curve, buf)?;
                Ok((id, report, vec![ckpt, report_path, curve]))
            })
            .collect()
    });

    let mut outputs = Vec::new();
    let mut runs = Vec::new();
    for r in results {
        let (id, report, files) = r?;
        println!(
            "{id}: {} epochs, {} iterations, final cmr {}",
            report.epochs_run,
            report.iterations,
            report.final_cmr.map_or("n/a".into(), |c| format!("{c:.4}"))
        );
        runs.push(json!({"run": id, "epochs": report.epochs_run, "iterations": report.iterations, "final_cmr": report.final_cmr}));
        outputs.extend(files);
    }
    manifest::write(&dir, "train", argv, cfg, &outputs, json!({ "runs": runs }))?;
    Ok(())
}

pub fn eval(cfg: &ExperimentConfig, jobs: usize, argv: &[String]) -> Result<()> {
    let oracle = cfg.cipher()?.build()?;
    let ecfg = cfg.eval_config(oracle.input_bits(), oracle.output_bits(), jobs);
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let ind = run_evaluation(oracle.as_ref(), &ecfg)?;

    let ind_path = dir.join("indicator.json");
    std::fs::write(&ind_path, serde_json::to_string_pretty(&ind)?)?;
    let hist_path = dir.join("history.csv");
    let mut csv = String::from("cipher,comp_data,architecture,cmr,iterations,epochs,wall_time\n");
    for h in &ind.history {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{:.3}",
            ind.cipher, h.comp_data, h.architecture, h.cmr, h.iterations, h.epochs, h.wall_time
        );
    }
    std::fs::write(&hist_path, csv)?;
    manifest::write(
        &dir,
        "eval",
        argv,
        cfg,
        &[ind_path.clone(), hist_path],
        json!({"cmr": ind.cmr, "comp_data": ind.comp_data, "comp_time": ind.comp_time}),
    )?;
    println!(
        "{}: cmr {:.4} (base {}), comp_data 2^{}, comp_time {} iterations, best {}; {}",
        ind.cipher,
        ind.cmr,
        ind.base_match_rate,
        ind.comp_data,
        ind.comp_time,
        ind.best_architecture,
        if ind.successful() { "attack successful" } else { "attack unsuccessful" }
    );
    println!("wrote {}", ind_path.display());
    Ok(())
}

fn load_indicator(path: &Path) -> Result<SecurityIndicator> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read indicator {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn compare(paths: &[PathBuf], tolerance: f64, out: Option<&Path>) -> Result<()> {
    if paths.is_empty() {
        return Err(Error::Config("compare needs at least one indicator file".into()));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::Config(format!("tolerance must be >= 0, got {tolerance}")));
    }
    let inds = paths.iter().map(|p| load_indicator(p)).collect::<Result<Vec<_>>>()?;
    let ranked = rank(&inds, tolerance);
    print!("{}", ranking_table(&ranked));
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let path = dir.join("ranking.csv");
        std::fs::write(&path, ranking_csv(&ranked))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Files named `*.<suffix>` directly under `dir`, sorted.
fn files_with_suffix(dir: &Path, suffix: &str) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(suffix)))
        .collect();
    v.sort();
    Ok(v)
}

pub fn report(dirs: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut curves = String::from("run_dir,run,epoch,loss,cmr\n");
    let mut sweep = String::from("run_dir,cipher,comp_data,architecture,cmr,iterations,epochs\n");
    let mut text = String::new();
    let mut indicators = Vec::new();
    for dir in dirs {
        if !dir.is_dir() {
            return Err(Error::Config(format!("{} is not a directory", dir.display())));
        }
        let label = dir.display().to_string();
        for path in files_with_suffix(dir, ".curve.csv")? {
            let run = path.file_name().unwrap().to_string_lossy().trim_end_matches(".curve.csv").to_string();
            let body = std::fs::read_to_string(&path)?;
            for line in body.lines().skip(1) {
                let _ = writeln!(curves, "{label},{run},{line}");
            }
        }
        for path in files_with_suffix(dir, ".report.json")? {
            let r: TrainReport = serde_json::from_str(&std::fs::read_to_string(&path)?)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            let _ = writeln!(
                text,
                "{label}: {} trained {} epochs on {} pairs, final cmr {}",
                r.architecture,
                r.epochs_run,
                r.train_size,
                r.final_cmr.map_or("n/a".into(), |c| format!("{c:.4}"))
            );
        }
        let ind_path = dir.join("indicator.json");
        if ind_path.is_file() {
            let ind = load_indicator(&ind_path)?;
            for h in &ind.history {
                let _ = writeln!(
                    sweep,
                    "{label},{},{},{},{},{},{}",
                    ind.cipher, h.comp_data, h.architecture, h.cmr, h.iterations, h.epochs
                );
            }
            indicators.push(ind);
        }
    }
    if !indicators.is_empty() {
        text.push('\n');
        text.push_str(&ranking_table(&rank(&indicators, ciphermimic::eval::DEFAULT_CMR_TOLERANCE)));
    }
    print!("{text}");
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    ensure_dir(&out)?;
    std::fs::write(out.join("curves.csv"), curves)?;
    std::fs::write(out.join("sweep.csv"), sweep)?;
    std::fs::write(out.join("report.txt"), text)?;
    println!("wrote curves.csv, sweep.csv and report.txt to {}", out.display());
    Ok(())
}
