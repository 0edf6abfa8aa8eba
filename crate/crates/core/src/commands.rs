//! The `simulate`, `evaluate`, `verify` and `bench` pipelines.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::foa::Scanpath;
use crate::grid::{Grid, ScalarField};
use crate::io::{self, ScanpathRecord, StimulusRecord};
use crate::mass::Frame;
use crate::metrics::{self, MetricReport};
use crate::par::{self, Execution};
use crate::pde::{self, PdeParams, PotentialState, Scheme};
use crate::simulate;
use crate::verify::{self, VerifyOptions, VerifyReport};

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// A single `.pgm` image or a directory of frames.
pub fn stimulus_from_path(path: &Path) -> Result<StimulusRecord> {
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "stimulus".into());
    let frames = if path.is_dir() {
        let mut frames: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
            .collect();
        frames.sort();
        frames
    } else {
        vec![path.to_path_buf()]
    };
    if frames.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no PGM frames in {}",
            path.display()
        )));
    }
    Ok(StimulusRecord {
        id,
        frames,
        fixation_files: Vec::new(),
        category: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub pde_steps: usize,
    pub fixations: usize,
    pub path: PathBuf,
}

fn run_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => par::with_threads(n, f),
        None => f(),
    }
}

/// Simulates `n_scanpaths` observers (seeds `seed..seed+n`) of one stimulus
/// and writes their scanpaths, the resolved config and optional snapshots.
pub fn simulate(cfg: &RunConfig, stimulus: &Path) -> Result<Vec<RunSummary>> {
    let record = stimulus_from_path(stimulus)?;
    let frames = record.load_frames(cfg.tau)?;
    let grid = frames[0].grid();
    create_dir(&cfg.out)?;
    write_text(&cfg.out.join("config.json"), &cfg.for_grid(grid).to_json()?)?;
    let seeds: Vec<u64> = (0..cfg.n_scanpaths as u64).map(|i| cfg.seed + i).collect();
    let runs = run_threads(cfg.threads, || {
        par::map_collect(&seeds, |&seed| {
            simulate_one(cfg, &record.id, &frames, grid, seed)
        })
    });
    runs.into_iter().collect()
}

fn simulate_one(
    cfg: &RunConfig,
    id: &str,
    frames: &[Frame],
    grid: Grid,
    seed: u64,
) -> Result<RunSummary> {
    let params = cfg.model_params(grid, seed)?;
    let snap_dir = cfg.out.join("snapshots").join(format!("{id}_seed{seed}"));
    if cfg.snapshots.is_some() {
        create_dir(&snap_dir)?;
    }
    let out = simulate::simulate_observed(frames, &params, cfg.duration, |step, state| match cfg
        .snapshots
    {
        Some(stride) if step % stride == 0 => {
            io::write_saliency_pgm(snap_dir.join(format!("phi_{step:05}.pgm")), state.phi())
        }
        _ => Ok(()),
    })?;
    let mut scanpath = out.scanpath;
    scanpath.stimulus = id.to_string();
    let path = cfg.out.join(format!("{id}_seed{seed}.json"));
    io::write_scanpath_json(
        &path,
        &ScanpathRecord::new(&scanpath, seed, cfg.model.to_string()),
    )?;
    Ok(RunSummary {
        seed,
        pde_steps: out.pde_steps,
        fixations: scanpath.len(),
        path,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationRow {
    pub stimulus: String,
    pub n_model: usize,
    pub n_human: usize,
    pub clamped: usize,
    pub report: MetricReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationSummary {
    pub rows: Vec<EvaluationRow>,
    /// Stimuli without ground truth.
    pub skipped: Vec<String>,
    /// Per-column mean over rows, ignoring undefined entries.
    pub mean: MetricReport,
}

fn nan_mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs
        .filter(|v| v.is_finite())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn load_model_scanpaths(dir: &Path) -> Result<BTreeMap<String, Vec<Scanpath>>> {
    let mut out: BTreeMap<String, Vec<Scanpath>> = BTreeMap::new();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name().is_some_and(|n| n != "config.json")
        })
        .collect();
    files.sort();
    for f in files {
        let rec = io::read_scanpath_json(&f)?;
        out.entry(rec.stimulus.clone())
            .or_default()
            .push(rec.scanpath());
    }
    Ok(out)
}

/// Scores model scanpaths against human fixations for every stimulus that
/// has a fixation file. Model paths are simulated unless `precomputed`
/// points at a directory of scanpath JSON files.
pub fn evaluate(
    cfg: &RunConfig,
    stimuli: &Path,
    fixations: &Path,
    precomputed: Option<&Path>,
) -> Result<EvaluationSummary> {
    let records = io::scan_stimuli(stimuli)?;
    if records.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no stimuli in {}",
            stimuli.display()
        )));
    }
    let truth = io::scan_fixation_files(fixations)?;
    if truth.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no fixation files in {}",
            fixations.display()
        )));
    }
    let given = precomputed.map(load_model_scanpaths).transpose()?;

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for rec in &records {
        let Some(csv) = truth.get(&rec.id) else {
            skipped.push(rec.id.clone());
            continue;
        };
        let frames = rec.load_frames(cfg.tau)?;
        let grid = frames[0].grid();
        let human = io::load_fixations_csv(csv, grid)?;
        let model: Vec<Scanpath> = match &given {
            Some(map) => map
                .get(&rec.id)
                .cloned()
                .ok_or_else(|| Error::EmptyInput(format!("no model scanpaths for `{}`", rec.id)))?,
            None => {
                let seeds: Vec<u64> = (0..cfg.n_scanpaths as u64).map(|i| cfg.seed + i).collect();
                let runs = run_threads(cfg.threads, || {
                    par::map_collect(&seeds, |&seed| {
                        let params = cfg.model_params(grid, seed)?;
                        simulate::simulate(&frames, &params, cfg.duration).map(|o| o.scanpath)
                    })
                });
                runs.into_iter().collect::<Result<_>>()?
            }
        };
        let humans = human.scanpaths();
        let report = metrics::aggregate(&model, &humans, grid, &cfg.metric_config(grid))?;
        rows.push(EvaluationRow {
            stimulus: rec.id.clone(),
            n_model: model.len(),
            n_human: humans.len(),
            clamped: human.clamped,
            report,
        });
    }
    if rows.is_empty() {
        return Err(Error::MissingGroundTruth(skipped.join(", ")));
    }
    let col = |f: fn(&MetricReport) -> f64| nan_mean(rows.iter().map(|r| f(&r.report)));
    let mean = MetricReport {
        auc: col(|r| r.auc),
        nss: col(|r| r.nss),
        sed_mean: col(|r| r.sed_mean),
        sed_best: col(|r| r.sed_best),
        stde_mean: col(|r| r.stde_mean),
        stde_best: col(|r| r.stde_best),
    };
    let summary = EvaluationSummary {
        rows,
        skipped,
        mean,
    };
    write_evaluation(cfg, &summary)?;
    Ok(summary)
}

fn write_evaluation(cfg: &RunConfig, summary: &EvaluationSummary) -> Result<()> {
    create_dir(&cfg.out)?;
    write_text(&cfg.out.join("config.json"), &cfg.to_json()?)?;
    let csv_path = cfg.out.join("metrics.csv");
    let csv_err = |e: csv::Error| Error::Config(format!("{}: {e}", csv_path.display()));
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record([
        "stimulus",
        "auc",
        "nss",
        "sed_mean",
        "sed_best",
        "stde_mean",
        "stde_best",
        "n_model",
        "n_human",
    ])
    .map_err(csv_err)?;
    let fields = |r: &MetricReport| {
        [
            r.auc,
            r.nss,
            r.sed_mean,
            r.sed_best,
            r.stde_mean,
            r.stde_best,
        ]
        .map(|v| v.to_string())
    };
    for row in &summary.rows {
        let mut rec = vec![row.stimulus.clone()];
        rec.extend(fields(&row.report));
        rec.extend([row.n_model.to_string(), row.n_human.to_string()]);
        w.write_record(&rec).map_err(csv_err)?;
    }
    let mut rec = vec!["mean".to_string()];
    rec.extend(fields(&summary.mean));
    rec.extend([String::new(), String::new()]);
    w.write_record(&rec).map_err(csv_err)?;
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    write_text(
        &cfg.out.join("metrics.json"),
        &serde_json::to_string_pretty(summary)?,
    )
}

/// Runs the oracle suite; the configured model and scheme are stepped as a
/// final guard.
pub fn verify(cfg: &RunConfig, grid: Option<usize>) -> VerifyReport {
    let opts = VerifyOptions {
        grid,
        scheme: cfg.scheme,
        model: cfg.pde(),
        model_scheme: cfg.scheme,
    };
    run_threads(cfg.threads, || verify::run(&opts))
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub scheme: Scheme,
    pub size: usize,
    pub threads: usize,
    pub steps: usize,
    pub steps_per_sec: f64,
    pub checksum: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Whether every (scheme, size) gave the same field for all thread counts.
    pub consistent: bool,
}

/// FNV-1a over the bit patterns.
pub fn checksum(f: &ScalarField) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for v in f.values() {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    format!("{h:016x}")
}

fn bench_source(g: Grid) -> ScalarField {
    let (w, h) = (g.width() as f64, g.height() as f64);
    crate::grid::apply_dirichlet(&ScalarField::from_fn(g, |x, y| {
        let (u, v) = (x as f64 / w, y as f64 / h);
        1000.0 * ((7.0 * u).sin() * (5.0 * v).cos()).powi(2)
    }))
}

/// Times `steps` PDE steps of the configured model on square grids.
/// The explicit run uses half the stability bound as its step.
pub fn bench(
    cfg: &RunConfig,
    sizes: &[usize],
    threads: &[usize],
    steps: usize,
) -> Result<BenchReport> {
    let base = cfg.pde();
    let explicit_tau = pde::stability_bound(&base)? / 2.0;
    let mut rows = Vec::new();
    for &size in sizes {
        let g = Grid::new(size, size)?;
        let src = bench_source(g);
        for (scheme, tau) in [
            (Scheme::Explicit, explicit_tau),
            (Scheme::Implicit, base.tau),
        ] {
            let params = PdeParams { tau, ..base };
            for &t in threads {
                let (secs, field) = par::with_threads(t, || -> Result<(f64, ScalarField)> {
                    let mut state = PotentialState::new(g, params)?;
                    let start = Instant::now();
                    for _ in 0..steps {
                        state.advance_with(&src, scheme, Execution::Parallel)?;
                    }
                    Ok((start.elapsed().as_secs_f64(), state.phi().clone()))
                })?;
                rows.push(BenchRow {
                    scheme,
                    size,
                    threads: t,
                    steps,
                    steps_per_sec: steps as f64 / secs.max(1e-12),
                    checksum: checksum(&field),
                });
            }
        }
    }
    let consistent = rows.iter().all(|r| {
        rows.iter()
            .filter(|o| o.scheme == r.scheme && o.size == r.size)
            .all(|o| o.checksum == r.checksum)
    });
    Ok(BenchReport { rows, consistent })
}

pub fn write_bench_csv(path: &Path, report: &BenchReport) -> Result<()> {
    let mut text = String::from("scheme,size,threads,steps,steps_per_sec,checksum\n");
    for r in &report.rows {
        text.push_str(&format!(
            "{},{},{},{},{:.3},{}\n",
            r.scheme, r.size, r.threads, r.steps, r.steps_per_sec, r.checksum
        ));
    }
    write_text(path, &text)
}
