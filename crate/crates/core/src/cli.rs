//! Command-line front end: `estimate`, `bench` and `sweep`.
//!
//! Exit status: 0 on success, 2 for usage or input errors, 3 when the
//! spectrum is numerically degenerate. Standard output only ever carries CSV.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use thiserror::Error;

use crate::bench::{emit_csv, run_experiment, streamed_spectrum, ExperimentSpec};
use crate::error::{ConfigError, EstimateError, SdftError};
use crate::estimators::{estimate, EstimateResult, EstimatorId, EstimatorParams};
use crate::sdft::SdftConfig;
use crate::ComplexSample;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

/// Damping factors used by `sweep` when none are given.
pub const SWEEP_DAMPINGS: [f64; 4] = [0.8, 0.9, 0.95, 0.99];

#[derive(Debug, Parser)]
#[command(
    name = "slidefreq",
    version,
    about = "Sliding-DFT frequency estimation and benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the frequency of the tone in a sample file.
    Estimate(EstimateArgs),
    /// Run the Monte-Carlo benchmark and write CSV.
    Bench(BenchArgs),
    /// Benchmark with a damping sweep (defaults to 0.8,0.9,0.95,0.99).
    Sweep(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleFormat {
    /// Text rows `index,re,im`.
    CsvIq,
    /// Interleaved little-endian f64 `re,im,re,im,...`.
    RawF64leIq,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Sample file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv-iq")]
    pub format: SampleFormat,
    #[arg(long)]
    pub sample_rate_hz: f64,
    #[arg(long, default_value_t = 128)]
    pub n_bins: usize,
    #[arg(long, default_value_t = 0.9)]
    pub damping: f64,
    #[arg(long, default_value = "proposed")]
    pub estimator: EstimatorId,
}

#[derive(Debug, Default, Args)]
pub struct BenchArgs {
    /// key=value experiment file.
    #[arg(long, conflicts_with = "defaults")]
    pub config: Option<PathBuf>,
    /// Start from the built-in default experiment.
    #[arg(long)]
    pub defaults: bool,
    #[arg(long)]
    pub n_bins: Option<String>,
    #[arg(long)]
    pub sample_rate_hz: Option<String>,
    /// Comma-separated tone frequencies.
    #[arg(long)]
    pub freq_list_hz: Option<String>,
    /// Comma-separated damping factors.
    #[arg(long)]
    pub damping: Option<String>,
    /// Comma-separated SNRs in dB; `none` for the noiseless case.
    #[arg(long)]
    pub snr_db: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Comma-separated subset of proposed,candan,jacobsen.
    #[arg(long)]
    pub estimators: Option<String>,
    #[arg(long)]
    pub randomize_phase: bool,
    /// Write CSV here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{path}: {reason}")]
    Decode { path: PathBuf, reason: String },
    #[error("need at least {required} samples for a {required}-bin transform, input has {available}")]
    TooShort { required: usize, available: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sdft(#[from] SdftError),
    #[error(transparent)]
    Estimate(EstimateError),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Estimate(EstimateError::DegenerateDenominator { .. }) => EXIT_DEGENERATE,
            _ => EXIT_INPUT,
        }
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        CliError::Estimate(e)
    }
}

/// Decode a sample file.
pub fn read_samples(path: &Path, format: SampleFormat) -> Result<Vec<ComplexSample>, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let decode = |reason: String| CliError::Decode {
        path: path.to_path_buf(),
        reason,
    };
    match format {
        SampleFormat::RawF64leIq => {
            if bytes.len() % 16 != 0 {
                return Err(decode(format!(
                    "{} bytes is not a whole number of f64 I/Q pairs",
                    bytes.len()
                )));
            }
            Ok(bytes
                .chunks_exact(16)
                .map(|pair| {
                    let re = f64::from_le_bytes(pair[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(pair[8..].try_into().expect("8 bytes"));
                    Complex64::new(re, im)
                })
                .collect())
        }
        SampleFormat::CsvIq => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_reader(bytes.as_slice());
            let mut out = Vec::new();
            for (row, record) in reader.records().enumerate() {
                let record = record.map_err(|e| decode(e.to_string()))?;
                // Tolerate a single header row.
                if row == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
                    continue;
                }
                if record.len() != 3 {
                    return Err(decode(format!("row {}: expected index,re,im", row + 1)));
                }
                let num = |i: usize| {
                    record[i]
                        .parse::<f64>()
                        .map_err(|e| decode(format!("row {}: `{}`: {e}", row + 1, &record[i])))
                };
                out.push(Complex64::new(num(1)?, num(2)?));
            }
            Ok(out)
        }
    }
}

pub fn format_estimate(res: &EstimateResult) -> String {
    format!(
        "{},{},{},{},{},{}",
        res.estimator,
        res.peak_index,
        res.delta,
        res.omega,
        res.freq_hz.map(|f| f.to_string()).unwrap_or_default(),
        res.clamped
    )
}

/// Estimate from the last `n_bins` samples of a file, streamed through the
/// sliding DFT.
pub fn cmd_estimate(args: &EstimateArgs, stdout: &mut dyn Write) -> Result<EstimateResult, CliError> {
    let config = SdftConfig::new(args.n_bins, args.damping)?;
    if !(args.sample_rate_hz > 0.0 && args.sample_rate_hz.is_finite()) {
        return Err(ConfigError::BadValue {
            key: "sample_rate_hz".into(),
            value: args.sample_rate_hz.to_string(),
            reason: "must be positive".into(),
        }
        .into());
    }
    let samples = read_samples(&args.input, args.format)?;
    let start = samples.len().checked_sub(config.n_bins()).ok_or(CliError::TooShort {
        required: config.n_bins(),
        available: samples.len(),
    })?;
    let spectrum = streamed_spectrum(&samples[start..], config.n_bins(), config.damping());
    let params = EstimatorParams::new(config.n_bins(), config.damping());
    let res = estimate(&spectrum, &params, args.estimator, Some(args.sample_rate_hz))?;
    writeln!(stdout, "{}", format_estimate(&res))?;
    Ok(res)
}

/// Build the experiment from config file / defaults plus flag overrides.
pub fn bench_spec(args: &BenchArgs, sweep: bool) -> Result<ExperimentSpec, CliError> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::from_config_file(path)?,
        None => ExperimentSpec::default(),
    };
    if sweep && args.damping.is_none() {
        spec.damping_list = SWEEP_DAMPINGS.to_vec();
    }
    let overrides = [
        ("n_bins", &args.n_bins),
        ("sample_rate_hz", &args.sample_rate_hz),
        ("freq_list_hz", &args.freq_list_hz),
        ("damping_list", &args.damping),
        ("snr_db_list", &args.snr_db),
        ("trials", &args.trials),
        ("base_seed", &args.seed),
        ("estimators", &args.estimators),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            spec.set(key, v)?;
        }
    }
    if args.randomize_phase {
        spec.randomize_phase = true;
    }
    Ok(spec)
}

pub fn cmd_bench(
    args: &BenchArgs,
    sweep: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<usize, CliError> {
    let spec = bench_spec(args, sweep)?;
    for warning in spec.validate()? {
        writeln!(stderr, "warning: {warning}")?;
    }
    let started = Instant::now();
    let stats = run_experiment(&spec)?;
    match &args.output {
        Some(path) => crate::bench::emit_csv_file(&stats, path)?,
        None => emit_csv(&stats, &mut *stdout)?,
    }
    writeln!(
        stderr,
        "{} cells, {} trials each, {:.3} s",
        stats.len(),
        spec.trials,
        started.elapsed().as_secs_f64()
    )?;
    Ok(stats.len())
}

/// Dispatch a parsed command line; returns the process exit status.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Estimate(args) => cmd_estimate(args, stdout).map(|_| ()),
        Command::Bench(args) => cmd_bench(args, false, stdout, stderr).map(|_| ()),
        Command::Sweep(args) => cmd_bench(args, true, stdout, stderr).map(|_| ()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
