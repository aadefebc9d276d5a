//! Command-line front end for the hybrid-beamforming simulator.
//!
//! Subcommands map one-to-one onto experiment kinds: `sweep` runs a
//! Monte-Carlo sweep and writes CSV/JSON artifacts, `single` evaluates one
//! operating point, `complexity` emits the FLOP-model scan, and
//! `dump-channel` writes raw channel realizations as text. Every result
//! file is written atomically after all computation succeeds, so a failed
//! run never leaves a partial CSV behind. Exit status is zero on success
//! and nonzero on any error, with the error chain printed to stderr.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use hbfkit::channel::{generate_channel, substream_rng, write_channel_dump_file};
use hbfkit::complexity;
use hbfkit::config::{parse_config, Experiment, ExperimentConfig, Mode};
use hbfkit::error::{Error, Result};
use hbfkit::evaluate::{records_csv, run_sweep, summary_csv, SweepResult};
use hbfkit::output::{atomic_write, fmt_sig, Metadata, ToolInfo};

#[derive(Parser)]
#[command(
    name = "hbfkit",
    version,
    about = "Closed-form hybrid beamforming simulator for wideband mmWave MIMO-OFDM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SNR or stream-count sweep and write records/summary CSVs.
    Sweep(RunArgs),
    /// Evaluate a single operating point and print both algorithms' SE.
    Single(RunArgs),
    /// Emit the FLOP-count scan over the array scale L.
    Complexity(ComplexityArgs),
    /// Write channel realizations to text dumps, one file per realization.
    DumpChannel(DumpArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a key=value experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Realization-count override.
    #[arg(long)]
    realizations: Option<usize>,
    #[command(flatten)]
    threads: ThreadArgs,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Optional config with `mode = complexity_scan`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Largest array scale L; overrides the config.
    #[arg(long = "Lmax")]
    l_max: Option<usize>,
    /// Iteration count for the fast reference algorithm; overrides the config.
    #[arg(long)]
    n_iter: Option<usize>,
    /// Output directory; CSV goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    /// Path to a key=value experiment config (any link mode).
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving one `channel_NNNN.txt` per realization.
    #[arg(long)]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Realization-count override.
    #[arg(long)]
    realizations: Option<usize>,
}

#[derive(Args)]
struct ThreadArgs {
    /// Worker threads; 0 means one per core. Falls back to HBFKIT_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        let mut source = std::error::Error::source(&err);
        while let Some(cause) = source {
            eprintln!("  caused by: {cause}");
            source = cause.source();
        }
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => {
            configure_threads(args.threads.threads)?;
            run_sweep_command(args)
        }
        Command::Single(args) => {
            configure_threads(args.threads.threads)?;
            run_single_command(args)
        }
        Command::Complexity(args) => run_complexity_command(args),
        Command::DumpChannel(args) => run_dump_command(args),
    }
}

/// Builds the global worker pool: `--threads` wins, then `HBFKIT_THREADS`,
/// and 0 (or neither) leaves the one-thread-per-core default.
fn configure_threads(flag: Option<usize>) -> Result<()> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var("HBFKIT_THREADS") {
            Ok(text) => Some(text.parse::<usize>().map_err(|_| {
                Error::Config(format!(
                    "HBFKIT_THREADS must be a nonnegative integer, got `{text}`"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = requested {
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("failed to build thread pool: {e}")))?;
        }
    }
    Ok(())
}

fn load_config(path: &Path, args_seed: Option<u64>, args_realizations: Option<usize>, args_out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut config = parse_config(&text)?;
    config.apply_overrides(args_seed, args_realizations, args_out)?;
    Ok(config)
}

fn require_mode(config: &ExperimentConfig, allowed: &[Mode], command: &str) -> Result<()> {
    let mode = config.mode();
    if !allowed.contains(&mode) {
        let names: Vec<&str> = allowed
            .iter()
            .map(|m| match m {
                Mode::SingleShot => "single_shot",
                Mode::SweepSnr => "sweep_snr",
                Mode::SweepStreams => "sweep_streams",
                Mode::ComplexityScan => "complexity_scan",
            })
            .collect();
        return Err(Error::Config(format!(
            "`{command}` requires mode {} but the config selects a different one",
            names.join(" or ")
        )));
    }
    Ok(())
}

/// Writes the standard result triple — records.csv, summary.csv,
/// metadata.json — into `dir`, each file atomically.
fn write_sweep_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    result: &SweepResult,
    wall_clock_secs: f64,
) -> Result<()> {
    let metadata = Metadata {
        tool: ToolInfo::default(),
        experiment: config.clone(),
        wall_clock_secs,
        notes: vec![
            "power normalization: power_budget = n_streams, noise_var = n_streams / snr".into(),
        ],
    };
    atomic_write(&dir.join("records.csv"), records_csv(result).as_bytes())?;
    atomic_write(&dir.join("summary.csv"), summary_csv(result).as_bytes())?;
    atomic_write(&dir.join("metadata.json"), metadata.to_json()?.as_bytes())?;
    Ok(())
}

fn run_sweep_command(args: RunArgs) -> Result<()> {
    let config = load_config(&args.config, args.seed, args.realizations, args.out)?;
    require_mode(&config, &[Mode::SweepSnr, Mode::SweepStreams], "sweep")?;
    let out_dir = config.out_dir.clone().ok_or_else(|| {
        Error::Config("sweep needs an output directory (--out or out_dir)".into())
    })?;
    let spec = config
        .to_sweep_spec()?
        .expect("sweep modes always carry a spec");

    let start = Instant::now();
    let result = run_sweep(&spec)?;
    write_sweep_outputs(&out_dir, &config, &result, start.elapsed().as_secs_f64())?;
    println!(
        "wrote records.csv, summary.csv, metadata.json to {}",
        out_dir.display()
    );
    Ok(())
}

fn run_single_command(args: RunArgs) -> Result<()> {
    let config = load_config(&args.config, args.seed, args.realizations, args.out)?;
    require_mode(&config, &[Mode::SingleShot], "single")?;
    let spec = config
        .to_sweep_spec()?
        .expect("single_shot always carries a spec");

    let start = Instant::now();
    let result = run_sweep(&spec)?;
    let point = &result.points[0];
    println!("snr_db = {}", point.axis_value);
    println!("hybrid mean SE: {} bits/s/Hz", fmt_sig(point.mean_hybrid_se));
    println!("dbf    mean SE: {} bits/s/Hz", fmt_sig(point.mean_digital_se));
    if let Some(dir) = config.out_dir.clone() {
        write_sweep_outputs(&dir, &config, &result, start.elapsed().as_secs_f64())?;
        println!(
            "wrote records.csv, summary.csv, metadata.json to {}",
            dir.display()
        );
    }
    Ok(())
}

fn run_complexity_command(args: ComplexityArgs) -> Result<()> {
    let (mut l_max, mut n_iter) = (31, complexity::DEFAULT_N_ITER);
    let config = match &args.config {
        Some(path) => {
            let config = load_config(path, None, None, args.out.clone())?;
            require_mode(&config, &[Mode::ComplexityScan], "complexity")?;
            if let Experiment::ComplexityScan {
                l_max: cfg_l,
                n_iter: cfg_iter,
            } = &config.experiment
            {
                l_max = *cfg_l;
                n_iter = *cfg_iter;
            }
            Some(config)
        }
        None => None,
    };
    if let Some(l) = args.l_max {
        l_max = l;
    }
    if let Some(it) = args.n_iter {
        n_iter = it;
    }

    let start = Instant::now();
    let csv = complexity::scan_csv(l_max, n_iter)?;
    let out_dir = args.out.or_else(|| config.as_ref().and_then(|c| c.out_dir.clone()));
    match out_dir {
        Some(dir) => {
            let echo = config.unwrap_or(ExperimentConfig {
                experiment: Experiment::ComplexityScan { l_max, n_iter },
                out_dir: Some(dir.clone()),
            });
            let metadata = Metadata {
                tool: ToolInfo::default(),
                experiment: echo,
                wall_clock_secs: start.elapsed().as_secs_f64(),
                notes: vec![
                    "FLOP polynomials use unit leading constants; reductions are \
                     ratios at matched scale"
                        .into(),
                ],
            };
            atomic_write(&dir.join("complexity.csv"), csv.as_bytes())?;
            atomic_write(&dir.join("metadata.json"), metadata.to_json()?.as_bytes())?;
            println!("wrote complexity.csv, metadata.json to {}", dir.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_dump_command(args: DumpArgs) -> Result<()> {
    let config = load_config(&args.config, args.seed, args.realizations, Some(args.out.clone()))?;
    require_mode(
        &config,
        &[Mode::SingleShot, Mode::SweepSnr, Mode::SweepStreams],
        "dump-channel",
    )?;
    let link = config.link().expect("link modes carry a link setup");

    for realization in 0..link.n_realizations {
        let mut rng = substream_rng(link.seed, realization as u64);
        let channel = generate_channel(
            &link.channel,
            link.system.n_rx,
            link.system.n_tx,
            &mut rng,
        )
        .map_err(|e| Error::Realization {
            master_seed: link.seed,
            realization,
            source: Box::new(e),
        })?;
        let path = args.out.join(format!("channel_{realization:04}.txt"));
        write_channel_dump_file(&path, &channel)?;
    }
    println!(
        "wrote {} channel dump(s) to {}",
        link.n_realizations,
        args.out.display()
    );
    Ok(())
}
