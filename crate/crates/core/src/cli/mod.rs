//! The `editdist` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or parameter error,
//! 3 input pair outside the channel model (band cannot reach the corner),
//! 4 a verification suite exceeded its failure budget.

mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use manifest::{sha256_hex, RunManifest};
use manifest::ManifestBuilder;

use crate::approx::approx_align;
use crate::bitstring::BitString;
use crate::channel::{apply_channel, EditTrace};
use crate::dp::edit_distance_full;
use crate::error::{Error, Result};
use crate::params::{ChannelParams, ParamBounds};
use crate::pipeline::{edit_distance_fast, scaling_benchmark, BenchOptions, Mode, PipelineConfig};
use crate::verify::{self, Suite, SuiteConfig, TrialReport, MACHINERY_MAX_N};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MODEL_VIOLATION: i32 = 3;
pub const EXIT_SUITE_FAILURE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "editdist", version, about = "Near-linear edit distance for indel-channel string pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a uniformly random bitstring.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pass a bitstring through the indel channel.
    Mutate {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        rates: Rates,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the edit trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Re-apply a recorded edit trace to its source.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Edit distance between two bitstring files.
    Dist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = DistMode::Fast)]
        mode: DistMode,
        /// Block constant.
        #[arg(long)]
        k: Option<f64>,
        /// Band-radius constant for fast mode.
        #[arg(long)]
        k2: Option<f64>,
        /// Explicit band radius (banded, fast and sub-only modes).
        #[arg(long)]
        radius: Option<usize>,
        /// Write the optimal alignment as JSON.
        #[arg(long)]
        emit_alignment: Option<PathBuf>,
        /// Emit the JSON report, to PATH or to stdout instead of the cost.
        #[arg(long, num_args = 0..=1)]
        json: Option<Option<PathBuf>>,
        /// Double the band radius until a path fits instead of failing.
        #[arg(long)]
        auto_widen: bool,
    },
    /// Anchor samples of the approximate alignment, as JSON.
    Approx {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Time the fast pipeline across input lengths.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096,8192")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        k2: Option<f64>,
        /// Run trials one at a time for cleaner timings.
        #[arg(long)]
        sequential: bool,
        /// Skip the full-DP cross-check above this length.
        #[arg(long, default_value_t = verify::ORACLE_MAX_N)]
        n_oracle_max: usize,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Rates {
    #[arg(long, default_value_t = 0.0)]
    ps: f64,
    #[arg(long, default_value_t = 0.0)]
    pd: f64,
    /// Defaults to `pd`.
    #[arg(long)]
    qd: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pi: f64,
    #[arg(long, default_value_t = 0.0)]
    qi: f64,
}

impl Rates {
    fn params(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.ps, self.pd, self.qd.unwrap_or(self.pd), self.pi, self.qi)
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Source length; defaults to 4096 for oracle and tails, 6 for machinery.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<f64>,
    /// Channel rates; all five must be given together. Defaults to the
    /// harshest rates the bounds admit.
    #[arg(long, num_args = 5, value_names = ["PS", "PD", "QD", "PI", "QI"])]
    rates: Option<Vec<f64>>,
    /// Use the substitution-only pipeline in the oracle suite.
    #[arg(long)]
    sub_only: bool,
    /// Write the JSON report.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write a JUnit XML summary.
    #[arg(long)]
    junit: Option<PathBuf>,
    /// Replay one trial of the named check instead of running suites.
    #[arg(long, requires = "trial_seed")]
    check: Option<String>,
    #[arg(long, requires = "check")]
    trial_seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DistMode {
    Full,
    Banded,
    Fast,
    SubOnly,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SuiteArg {
    Oracle,
    Tails,
    Machinery,
    All,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let recorded: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, recorded) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_model_violation() => EXIT_MODEL_VIOLATION,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn seed_or_fresh(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s: u64 = rand::random();
        eprintln!("seed: {s}");
        s
    })
}

fn read_input(path: &Path, m: &mut ManifestBuilder) -> Result<Vec<u8>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    m.input(path, &bytes);
    Ok(bytes)
}

fn read_bits(path: &Path, m: &mut ManifestBuilder) -> Result<BitString> {
    let bytes = read_input(path, m)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{}: not UTF-8", path.display())))?;
    text.parse()
        .map_err(|e: Error| Error::Parse(format!("{}: {e}", path.display())))
}

/// Write `text` to `out` (plus its manifest) or to stdout.
fn emit(out: Option<&Path>, text: &str, m: &ManifestBuilder) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
            m.write_for(path)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bounds_with_k(k: Option<f64>) -> Result<ParamBounds> {
    let b = k.map_or_else(ParamBounds::default, |k| ParamBounds::default().with_k(k));
    b.validate()?;
    Ok(b)
}

fn dispatch(command: Command, args: Vec<String>) -> Result<i32> {
    match command {
        Command::Gen { n, seed, out } => {
            let mut m = ManifestBuilder::new("gen", args);
            let seed = seed_or_fresh(seed);
            m.seed(seed);
            let s = crate::channel::sample_source(n, seed);
            emit(out.as_deref(), &format!("{s}\n"), &m)?;
        }
        Command::Mutate {
            input,
            rates,
            seed,
            out,
            trace,
        } => {
            let mut m = ManifestBuilder::new("mutate", args);
            let params = rates.params()?;
            for v in ParamBounds::default().violations(&params) {
                eprintln!("warning: outside default bounds: {v}");
            }
            let s1 = read_bits(&input, &mut m)?;
            let seed = seed_or_fresh(seed);
            m.seed(seed);
            let (s2, t) = apply_channel(&s1, &params, seed)?;
            if let Some(path) = &trace {
                emit(Some(path), &(t.to_json()? + "\n"), &m)?;
            }
            emit(out.as_deref(), &format!("{s2}\n"), &m)?;
        }
        Command::Replay { input, trace, out } => {
            let mut m = ManifestBuilder::new("replay", args);
            let s1 = read_bits(&input, &mut m)?;
            let bytes = read_input(&trace, &mut m)?;
            let text = String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{}: not UTF-8", trace.display())))?;
            let t = EditTrace::from_json(&text)?;
            emit(out.as_deref(), &format!("{}\n", t.replay(&s1)?), &m)?;
        }
        Command::Dist {
            a,
            b,
            mode,
            k,
            k2,
            radius,
            emit_alignment,
            json,
            auto_widen,
        } => return cmd_dist(args, &a, &b, mode, k, k2, radius, emit_alignment, json, auto_widen),
        Command::Approx { a, b, k, out } => {
            let mut m = ManifestBuilder::new("approx", args);
            let bounds = bounds_with_k(k)?;
            let s1 = read_bits(&a, &mut m)?.to_symbols();
            let s2 = read_bits(&b, &mut m)?.to_symbols();
            let f = approx_align(&s1, &s2, &bounds)?;
            emit(out.as_deref(), &(serde_json::to_string_pretty(&f)? + "\n"), &m)?;
        }
        Command::Verify(v) => return cmd_verify(args, v),
        Command::Bench {
            n_list,
            trials,
            seed,
            csv,
            k,
            k2,
            sequential,
            n_oracle_max,
        } => {
            let mut m = ManifestBuilder::new("bench", args);
            let seed = seed_or_fresh(seed);
            m.seed(seed);
            let cfg = PipelineConfig {
                bounds: bounds_with_k(k)?,
                k2,
                ..Default::default()
            };
            cfg.validate()?;
            let params = cfg.bounds.extremal_params();
            let opts = BenchOptions {
                n_oracle_max,
                parallel: !sequential,
            };
            let rows = scaling_benchmark(&n_list, trials, &cfg, &params, seed, &opts)?;
            match csv {
                Some(path) => {
                    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
                    for row in &rows {
                        w.serialize(row).map_err(|e| csv_error(&path, e))?;
                    }
                    if rows.is_empty() {
                        w.write_record(BENCH_COLUMNS).map_err(|e| csv_error(&path, e))?;
                    }
                    w.flush().map_err(|e| Error::io(&path, e))?;
                    m.write_for(&path)?;
                }
                None => {
                    println!("{}", BENCH_COLUMNS.join("\t"));
                    for r in &rows {
                        println!(
                            "{}\t{}\t{:.3}\t{:.3}\t{:.0}\t{:.0}\t{:.0}\t{}\t{}",
                            r.n,
                            r.trials,
                            r.mean_time_ms,
                            r.median_time_ms,
                            r.mean_band_cells,
                            r.mean_approx_cells,
                            r.mean_total_cells,
                            r.oracle_checked,
                            r.mismatches
                        );
                    }
                }
            }
        }
    }
    Ok(EXIT_OK)
}

const BENCH_COLUMNS: [&str; 9] = [
    "n",
    "trials",
    "mean_time_ms",
    "median_time_ms",
    "mean_band_cells",
    "mean_approx_cells",
    "mean_total_cells",
    "oracle_checked",
    "mismatches",
];

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_dist(
    args: Vec<String>,
    a: &Path,
    b: &Path,
    mode: DistMode,
    k: Option<f64>,
    k2: Option<f64>,
    radius: Option<usize>,
    emit_alignment: Option<PathBuf>,
    json: Option<Option<PathBuf>>,
    auto_widen: bool,
) -> Result<i32> {
    let mut m = ManifestBuilder::new("dist", args);
    let s1 = read_bits(a, &mut m)?.to_symbols();
    let s2 = read_bits(b, &mut m)?.to_symbols();
    let bounds = bounds_with_k(k)?;
    let (cost, alignment, report) = if mode == DistMode::Full {
        let start = Instant::now();
        let r = edit_distance_full(&s1, &s2);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let report = json!({
            "cost": r.cost,
            "band_cells": r.cells,
            "anchor_samples": 0,
            "mode": "full",
            "timings_ms": {"approx": 0.0, "band": 0.0, "dp": ms, "total": ms},
        });
        (r.cost, r.alignment, report)
    } else {
        let cfg = PipelineConfig {
            bounds,
            k2,
            mode: if mode == DistMode::Fast {
                Mode::General
            } else {
                Mode::SubstitutionOnly
            },
            radius,
            auto_widen,
        };
        let r = edit_distance_fast(&s1, &s2, &cfg)?;
        let mut report = serde_json::to_value(&r.report)?;
        if mode == DistMode::Banded {
            report["mode"] = json!("banded");
        }
        (r.cost, r.alignment, report)
    };
    if let Some(path) = &emit_alignment {
        emit(Some(path), &(serde_json::to_string(&alignment)? + "\n"), &m)?;
    }
    match json {
        Some(Some(path)) => {
            emit(Some(&path), &(serde_json::to_string_pretty(&report)? + "\n"), &m)?;
            println!("{cost}");
        }
        Some(None) => println!("{}", serde_json::to_string_pretty(&report)?),
        None => println!("{cost}"),
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: Vec<String>, v: VerifyArgs) -> Result<i32> {
    let mut m = ManifestBuilder::new("verify", args);
    let seed = seed_or_fresh(v.seed);
    m.seed(seed);
    let bounds = bounds_with_k(v.k)?;
    let params = match &v.rates {
        Some(r) => ChannelParams::new(r[0], r[1], r[2], r[3], r[4])?,
        None => bounds.extremal_params(),
    };
    let pipeline = PipelineConfig {
        bounds,
        mode: if v.sub_only {
            Mode::SubstitutionOnly
        } else {
            Mode::General
        },
        ..Default::default()
    };
    let suites: Vec<Suite> = match v.suite {
        SuiteArg::Oracle => vec![Suite::Oracle],
        SuiteArg::Tails => vec![Suite::Tails],
        SuiteArg::Machinery => vec![Suite::Machinery],
        SuiteArg::All => vec![Suite::Oracle, Suite::Tails, Suite::Machinery],
    };
    let config_for = |suite: Suite| {
        let n = match (suite, v.n) {
            (Suite::Machinery, Some(n)) if v.suite == SuiteArg::All => n.min(MACHINERY_MAX_N),
            (_, Some(n)) => n,
            (Suite::Machinery, None) => verify::EXHAUSTIVE_MAX_N,
            (_, None) => 4096,
        };
        SuiteConfig {
            n,
            trials: v.trials,
            seed,
            params,
            pipeline,
            separation_ratio: verify::DEFAULT_SEPARATION_RATIO,
        }
    };

    if let (Some(name), Some(trial_seed)) = (&v.check, v.trial_seed) {
        for &suite in &suites {
            let cfg = SuiteConfig { trials: 1, ..config_for(suite) };
            let report = verify::run_suite(suite, &cfg)?;
            if let Some(check) = report.check(name) {
                let o = verify::replay(check, &cfg, trial_seed)?;
                println!(
                    "{name} seed {trial_seed}: statistic {} threshold {} -> {}",
                    o.statistic,
                    o.threshold.map_or("none".into(), |t| t.to_string()),
                    if o.failed { "FAIL" } else { "pass" }
                );
                return Ok(if o.failed { EXIT_SUITE_FAILURE } else { EXIT_OK });
            }
        }
        return Err(Error::InvalidArgument(format!("no check named {name} in the selected suites")));
    }

    let mut reports = Vec::new();
    for &suite in &suites {
        let r = verify::run_suite(suite, &config_for(suite))?;
        for c in &r.checks {
            println!("{}", c.summary_line());
        }
        reports.push(r);
    }
    let report: TrialReport = TrialReport::combine(v.suite_name(), reports).expect("at least one suite runs");
    println!(
        "{}: {} trials, {} failures, {}",
        report.suite,
        report.trials,
        report.failures,
        if report.passed() { "passed" } else { "FAILED" }
    );
    if let Some(path) = &v.json {
        emit(Some(path), &(serde_json::to_string_pretty(&report)? + "\n"), &m)?;
    }
    if let Some(path) = &v.junit {
        emit(Some(path), &report.to_junit(), &m)?;
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_SUITE_FAILURE })
}

impl VerifyArgs {
    fn suite_name(&self) -> &'static str {
        match self.suite {
            SuiteArg::Oracle => "oracle",
            SuiteArg::Tails => "tails",
            SuiteArg::Machinery => "machinery",
            SuiteArg::All => "all",
        }
    }
}

/// Size the global rayon pool from `EDITDIST_THREADS`, if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("EDITDIST_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}
