use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavefoa::commands;
use wavefoa::config::{ConfigFile, Overrides, Preset, RunConfig};
use wavefoa::pde::Scheme;

#[derive(Parser)]
#[command(
    name = "wavefoa",
    version,
    about = "Wave-propagated focus-of-attention scanpath simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Model preset: H, DW or custom.
    #[arg(long)]
    model: Option<Preset>,
    /// JSON config file with flat keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated exposure, seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Number of scanpaths per stimulus.
    #[arg(long)]
    n: Option<usize>,
    /// explicit or implicit.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate scanpaths on one stimulus (a PGM file or a directory of frames).
    Simulate {
        stimulus: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Write the potential every N steps.
        #[arg(long, value_name = "STRIDE")]
        snapshots: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Score simulated (or precomputed) scanpaths against human fixations.
    Evaluate {
        /// Directory of stimuli (`<id>.pgm` or `<id>/` frame directories).
        #[arg(long)]
        stimuli: PathBuf,
        /// Directory of `<id>.csv` fixation files.
        #[arg(long)]
        fixations: PathBuf,
        /// Use scanpath JSON files from this directory instead of simulating.
        #[arg(long)]
        scanpaths: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the numerical oracle suite.
    Verify {
        /// Use this grid side for every check instead of the reference sizes.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Measure stepping throughput across grid sizes and thread counts.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        threads: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn resolve(
    common: &Common,
    snapshots: Option<usize>,
    threads: Option<usize>,
) -> wavefoa::Result<RunConfig> {
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let flags = Overrides {
        model: common.model,
        seed: common.seed,
        duration: common.duration,
        n_scanpaths: common.n,
        scheme: common.scheme,
        out: common.out.clone(),
        snapshots,
        threads,
    };
    RunConfig::resolve(&file, &flags)
}

fn run(cli: Cli) -> wavefoa::Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            stimulus,
            common,
            snapshots,
            threads,
        } => {
            let cfg = resolve(&common, snapshots, threads)?;
            for r in commands::simulate(&cfg, &stimulus)? {
                println!(
                    "seed {}: pde steps: {}, fixations: {} -> {}",
                    r.seed,
                    r.pde_steps,
                    r.fixations,
                    r.path.display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate {
            stimuli,
            fixations,
            scanpaths,
            common,
            threads,
        } => {
            let cfg = resolve(&common, None, threads)?;
            let s = commands::evaluate(&cfg, &stimuli, &fixations, scanpaths.as_deref())?;
            for id in &s.skipped {
                eprintln!(
                    "warning: {}",
                    wavefoa::Error::MissingGroundTruth(id.clone())
                );
            }
            println!("stimulus,auc,nss,sed_mean,sed_best,stde_mean,stde_best");
            for r in &s.rows {
                let m = &r.report;
                println!(
                    "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
                    r.stimulus, m.auc, m.nss, m.sed_mean, m.sed_best, m.stde_mean, m.stde_best
                );
            }
            let m = &s.mean;
            println!(
                "mean,{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
                m.auc, m.nss, m.sed_mean, m.sed_best, m.stde_mean, m.stde_best
            );
            println!("evaluated: {}, skipped: {}", s.rows.len(), s.skipped.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            grid,
            common,
            threads,
        } => {
            let cfg = resolve(&common, None, threads)?;
            let report = commands::verify(&cfg, grid);
            for c in &report.checks {
                println!(
                    "{} {:<20} measured {:.3e} (tol {:.1e}, {:.1}s) {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.tolerance,
                    c.seconds,
                    c.detail
                );
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Bench {
            sizes,
            threads,
            steps,
            common,
        } => {
            let cfg = resolve(&common, None, None)?;
            let report = commands::bench(&cfg, &sizes, &threads, steps)?;
            std::fs::create_dir_all(&cfg.out).map_err(|e| wavefoa::Error::Io {
                path: cfg.out.clone(),
                source: e,
            })?;
            let csv = cfg.out.join("bench.csv");
            commands::write_bench_csv(&csv, &report)?;
            for r in &report.rows {
                println!(
                    "{:<8} {:>5}x{:<5} threads={} {:>10.1} steps/s  checksum {}",
                    r.scheme, r.size, r.size, r.threads, r.steps_per_sec, r.checksum
                );
            }
            println!("wrote {}", csv.display());
            if report.consistent {
                println!("checksums identical across thread counts");
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: checksums differ across thread counts");
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
