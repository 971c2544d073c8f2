//! Monte Carlo and exhaustive verification harness.
//!
//! A suite is a list of [`Probe`]s. Each probe runs `trials` independent
//! trials, trial `t` seeded with `derive_seed(derive_seed(master, family), t)`
//! where `family` is shared by probes that should see the same instances.
//! A trial either observes its event (a failure) or not, and a check passes
//! when the failure count stays within its budget. Statistical budgets are
//! `floor(T * (target + 3 sqrt(target (1 - target) / T)))`.

mod machinery;
mod oracle;
pub mod stats;
mod tails;

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ChannelParams, ParamBounds};
use crate::pipeline::{Mode, PipelineConfig};
use crate::rng::derive_seed;

pub use machinery::{machinery_block_len, machinery_params, random_detour_path};
pub use oracle::ORACLE_MAX_N;

/// Largest source length the sampled proof-machinery suite accepts.
pub const MACHINERY_MAX_N: usize = 64;

/// Largest source length at which the exhaustive good-alignment check runs.
pub const EXHAUSTIVE_MAX_N: usize = 6;

/// Window-score ratio: near windows should score below `k r ln n`, far
/// windows above it.
pub const DEFAULT_SEPARATION_RATIO: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Oracle,
    Tails,
    Machinery,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Tails => "tails",
            Suite::Machinery => "machinery",
        }
    }
}

/// Everything a trial depends on besides its seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub params: ChannelParams,
    pub pipeline: PipelineConfig,
    pub separation_ratio: f64,
}

impl SuiteConfig {
    /// Defaults: extremal in-bounds channel, default pipeline.
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        let pipeline = PipelineConfig::default();
        SuiteConfig {
            n,
            trials,
            seed,
            params: pipeline.bounds.extremal_params(),
            pipeline,
            separation_ratio: DEFAULT_SEPARATION_RATIO,
        }
    }

    pub fn bounds(&self) -> &ParamBounds {
        &self.pipeline.bounds
    }
}

/// Channel counts checked against their exact moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    Substitutions,
    Deletions,
    InsertionEvents,
    InsertedBits,
}

/// One kind of trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "probe", rename_all = "snake_case")]
pub enum Probe {
    /// Pipeline cost differs from full DP on a channel pair.
    FastVsFull,
    /// Full DP differs from the minimum over every alignment of a random pair
    /// with both lengths at most `n`.
    FullVsEnumeration,
    /// A channel count lands more than three standard deviations from its
    /// mean; the sample mean is also z-tested.
    ChannelCount { kind: CountKind },
    /// `X >= k mu / q` for `X` a negative binomial with a binomial number
    /// `m ~ Bin(t, p)` of required successes and success probability `q`.
    ChainedNegativeBinomial { t: usize, p: f64, q: f64, k: f64 },
    /// Edit distance between a source block and its canonical image reaches
    /// `(3/2)(rho_s + kappa_n) k ln n`.
    BlockDistance,
    /// Two independent uniform blocks are within edit distance `d`.
    RandomWindowDistance { d: usize },
    /// `|f(i + L) - f(i) - L|` exceeds `(3/2) kappa_n k ln n`.
    LocalShift,
    /// A window within `ln n` of the canonical position scores above
    /// `k r ln n`.
    NearWindow,
    /// A window farther than the anchor tolerance scores at most `k r ln n`.
    FarWindow,
    /// `lbr(sbr(A)) != A*` for a random perturbation `A` of `A*`.
    SbrLbrRoundTrip,
    /// Two alignments with equal long breaks have different long-break
    /// replacement deltas.
    SharedLongBreakDelta,
    /// The cheapest good alignment is not globally cheapest although every
    /// short-break-replaced alignment costs at least `cost(A*)`.
    GoodMinimumIsGlobal,
}

impl Probe {
    pub fn name(&self) -> String {
        match self {
            Probe::FastVsFull => "fast_matches_full".into(),
            Probe::FullVsEnumeration => "full_matches_enumeration".into(),
            Probe::ChannelCount { kind } => match kind {
                CountKind::Substitutions => "substitution_count_moments".into(),
                CountKind::Deletions => "deletion_count_moments".into(),
                CountKind::InsertionEvents => "insertion_event_count_moments".into(),
                CountKind::InsertedBits => "inserted_bit_count_moments".into(),
            },
            Probe::ChainedNegativeBinomial { t, p, .. } => {
                format!("chained_negative_binomial_tail_mu{}", (*t as f64 * p).round())
            }
            Probe::BlockDistance => "block_distance_upper_tail".into(),
            Probe::RandomWindowDistance { d } => format!("random_window_distance_at_most_{d}"),
            Probe::LocalShift => "local_shift_tail".into(),
            Probe::NearWindow => "near_window_scores_below_threshold".into(),
            Probe::FarWindow => "far_window_scores_above_threshold".into(),
            Probe::SbrLbrRoundTrip => "lbr_after_sbr_restores_canonical".into(),
            Probe::SharedLongBreakDelta => "shared_long_breaks_share_replacement_delta".into(),
            Probe::GoodMinimumIsGlobal => "cheapest_good_alignment_is_optimal".into(),
        }
    }

    /// Probes in one family see the same instance for the same trial index.
    fn family(&self) -> u64 {
        match self {
            Probe::FastVsFull => 1,
            Probe::FullVsEnumeration => 2,
            Probe::ChannelCount { .. } => 3,
            Probe::ChainedNegativeBinomial { .. } => 4,
            Probe::BlockDistance | Probe::LocalShift => 5,
            Probe::RandomWindowDistance { .. } => 6,
            Probe::NearWindow | Probe::FarWindow => 7,
            Probe::SbrLbrRoundTrip | Probe::SharedLongBreakDelta | Probe::GoodMinimumIsGlobal => 8,
        }
    }

    /// Trial seed for trial `t` under master seed `master`.
    pub fn trial_seed(&self, master: u64, t: usize) -> u64 {
        derive_seed(derive_seed(master, self.family()), t as u64)
    }

    /// Run a single trial. Deterministic in `(cfg, seed)`.
    pub fn run_trial(&self, cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
        match self {
            Probe::FastVsFull => oracle::fast_vs_full(cfg, seed),
            Probe::FullVsEnumeration => oracle::full_vs_enumeration(cfg, seed),
            Probe::ChannelCount { kind } => tails::channel_count(cfg, *kind, seed),
            Probe::ChainedNegativeBinomial { t, p, q, k } => tails::chained_nbinom(*t, *p, *q, *k, seed),
            Probe::BlockDistance => tails::block_distance(cfg, seed),
            Probe::RandomWindowDistance { d } => tails::random_window(cfg, *d, seed),
            Probe::LocalShift => tails::local_shift(cfg, seed),
            Probe::NearWindow => tails::near_window(cfg, seed),
            Probe::FarWindow => tails::far_window(cfg, seed),
            Probe::SbrLbrRoundTrip => machinery::sbr_lbr_round_trip(cfg, seed),
            Probe::SharedLongBreakDelta => machinery::shared_long_break_delta(cfg, seed),
            Probe::GoodMinimumIsGlobal => machinery::good_minimum_is_global(cfg, seed),
        }
    }

    /// Failure budget policy for this probe.
    fn policy(&self, cfg: &SuiteConfig) -> Policy {
        match self {
            Probe::FastVsFull | Probe::NearWindow | Probe::FarWindow => Policy::fixed(0.01),
            Probe::FullVsEnumeration
            | Probe::SbrLbrRoundTrip
            | Probe::SharedLongBreakDelta
            | Probe::GoodMinimumIsGlobal => Policy::fixed(0.0),
            // Chebyshev: at most 1/9 of trials lie beyond three deviations.
            Probe::ChannelCount { .. } => Policy::statistical(1.0 / 9.0, None),
            Probe::ChainedNegativeBinomial { t, p, k, .. } => {
                let b = stats::chained_nbinom_bound(*k, *t as f64 * p);
                Policy::statistical(b.min(1.0), Some(b))
            }
            Probe::BlockDistance => {
                let b = stats::block_distance_bound(cfg.n, cfg.bounds());
                Policy::statistical(b.min(VACUOUS_BOUND_CAP), Some(b))
            }
            Probe::LocalShift => {
                let b = stats::local_shift_bound(cfg.n, cfg.bounds());
                Policy::statistical(b.min(VACUOUS_BOUND_CAP), Some(b))
            }
            Probe::RandomWindowDistance { d } => {
                let len = cfg.bounds().block_len(cfg.n);
                let b = stats::random_window_bound(len, *d);
                Policy::statistical(b.min(1.0), Some(b))
            }
        }
    }
}

/// Target frequency used when a tail bound is loose at the tested `n`.
pub const VACUOUS_BOUND_CAP: f64 = 0.05;

struct Policy {
    target: f64,
    with_slack: bool,
    bound: Option<f64>,
}

impl Policy {
    fn fixed(target: f64) -> Self {
        Policy {
            target,
            with_slack: false,
            bound: None,
        }
    }

    fn statistical(target: f64, bound: Option<f64>) -> Self {
        Policy {
            target,
            with_slack: true,
            bound,
        }
    }

    fn budget(&self, trials: usize) -> usize {
        let t = trials as f64;
        let allowed = if self.with_slack {
            t * (self.target + 3.0 * (self.target * (1.0 - self.target) / t.max(1.0)).sqrt())
        } else {
            t * self.target
        };
        (allowed + 1e-9).floor() as usize
    }
}

/// Result of a single trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub statistic: f64,
    pub threshold: Option<f64>,
    pub failed: bool,
    /// Items examined in this trial (alignments, pairs, ...).
    pub cases: usize,
    /// Trial had nothing to examine at this configuration.
    pub skipped: bool,
}

impl Outcome {
    pub(crate) fn new(statistic: f64, threshold: Option<f64>, failed: bool) -> Self {
        Outcome {
            statistic,
            threshold,
            failed,
            cases: 1,
            skipped: false,
        }
    }

    pub(crate) fn skipped() -> Self {
        Outcome {
            statistic: 0.0,
            threshold: None,
            failed: false,
            cases: 0,
            skipped: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Reproduction seed: `probe.run_trial(cfg, seed)` replays the trial.
    pub seed: u64,
    pub statistic: f64,
    pub threshold: Option<f64>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub probe: Probe,
    pub trials: usize,
    pub cases: usize,
    pub failures: usize,
    pub budget: usize,
    pub target_rate: f64,
    pub observed_rate: f64,
    /// Tail bound evaluated at the trial parameters, when the probe has one.
    pub bound: Option<f64>,
    /// z-score of the mean statistic against its exact expectation.
    pub mean_z: Option<f64>,
    pub passed: bool,
    pub notes: Vec<String>,
    pub records: Vec<TrialRecord>,
}

impl Check {
    pub fn failed_records(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn summary_line(&self) -> String {
        format!(
            "[{}] {}: {}/{} failures (budget {}), {} cases",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.failures,
            self.trials,
            self.budget,
            self.cases
        )
    }
}

/// Outcome of a suite run. Identical `(suite, config)` yields an identical
/// report apart from `wall_time_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub suite: String,
    pub seed: u64,
    pub config: SuiteConfig,
    /// Trials summed over checks.
    pub trials: usize,
    /// Failing trials summed over checks.
    pub failures: usize,
    pub wall_time_ms: f64,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn from_checks(suite: &str, cfg: &SuiteConfig, warnings: Vec<String>, checks: Vec<Check>, start: Instant) -> Self {
        TrialReport {
            suite: suite.into(),
            seed: cfg.seed,
            config: *cfg,
            trials: checks.iter().map(|c| c.trials).sum(),
            failures: checks.iter().map(|c| c.failures).sum(),
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            warnings,
            checks,
        }
    }

    /// Merge several reports into one named `suite`.
    pub fn combine(suite: &str, reports: Vec<TrialReport>) -> Option<TrialReport> {
        let first = reports.first()?.clone();
        let mut out = TrialReport {
            suite: suite.into(),
            trials: 0,
            failures: 0,
            wall_time_ms: 0.0,
            warnings: Vec::new(),
            checks: Vec::new(),
            ..first
        };
        for r in reports {
            out.trials += r.trials;
            out.failures += r.failures;
            out.wall_time_ms += r.wall_time_ms;
            out.warnings.extend(r.warnings);
            out.checks.extend(r.checks);
        }
        Some(out)
    }

    /// JUnit-style XML: one testcase per check.
    pub fn to_junit(&self) -> String {
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let mut xml = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            xml,
            "<testsuite name=\"{}\" tests=\"{}\" failures=\"{}\" time=\"{:.3}\">",
            xml_escape(&self.suite),
            self.checks.len(),
            failed,
            self.wall_time_ms / 1e3
        );
        for c in &self.checks {
            let _ = write!(
                xml,
                "  <testcase classname=\"editdist.verify.{}\" name=\"{}\"",
                xml_escape(&self.suite),
                xml_escape(&c.name)
            );
            if c.passed {
                xml.push_str("/>\n");
                continue;
            }
            let seeds: Vec<String> = c.failed_records().take(10).map(|r| r.seed.to_string()).collect();
            let _ = writeln!(
                xml,
                ">\n    <failure message=\"{} failures exceed budget {}\">reproduction seeds: {}</failure>\n  </testcase>",
                c.failures,
                c.budget,
                seeds.join(", ")
            );
        }
        xml.push_str("</testsuite>\n");
        xml
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Run `cfg.trials` trials of `probe` in parallel and aggregate.
pub fn run_check(probe: Probe, cfg: &SuiteConfig) -> Result<Check> {
    let policy = probe.policy(cfg);
    let outcomes: Vec<(u64, Outcome)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = probe.trial_seed(cfg.seed, t);
            probe.run_trial(cfg, seed).map(|o| (seed, o))
        })
        .collect::<Result<_>>()?;

    let records: Vec<TrialRecord> = outcomes
        .iter()
        .enumerate()
        .map(|(t, (seed, o))| TrialRecord {
            trial: t,
            seed: *seed,
            statistic: o.statistic,
            threshold: o.threshold,
            passed: !o.failed,
            skipped: o.skipped,
        })
        .collect();
    let trials = records.len();
    let failures = records.iter().filter(|r| !r.passed).count();
    let budget = policy.budget(trials);
    let mut notes = Vec::new();
    let mut mean_z = None;
    if let Probe::ChannelCount { kind } = probe {
        let (mean, var) = stats::count_moments(kind, cfg.n, &cfg.params);
        if trials > 0 {
            let sample_mean = records.iter().map(|r| r.statistic).sum::<f64>() / trials as f64;
            let se = (var / trials as f64).sqrt();
            let z = if se > 0.0 {
                (sample_mean - mean) / se
            } else if sample_mean == mean {
                0.0
            } else {
                f64::INFINITY
            };
            mean_z = Some(z);
            notes.push(format!("sample mean {sample_mean:.4}, exact mean {mean:.4}, variance {var:.4}"));
        }
    }
    if probe == Probe::GoodMinimumIsGlobal {
        let tested = records.iter().filter(|r| !r.skipped).count();
        let premise = records.iter().filter(|r| !r.skipped && r.statistic > 0.0).count();
        notes.push(format!("premise held on {premise} of {tested} enumerated instances"));
    }
    let passed = failures <= budget && mean_z.is_none_or(|z| z.abs() <= 3.0);
    Ok(Check {
        name: probe.name(),
        probe,
        trials,
        cases: outcomes.iter().map(|(_, o)| o.cases).sum(),
        failures,
        budget,
        target_rate: policy.target,
        observed_rate: if trials > 0 { failures as f64 / trials as f64 } else { 0.0 },
        bound: policy.bound,
        mean_z,
        passed,
        notes,
        records,
    })
}

/// Replay one recorded trial.
pub fn replay(check: &Check, cfg: &SuiteConfig, seed: u64) -> Result<Outcome> {
    check.probe.run_trial(cfg, seed)
}

fn run_probes(suite: Suite, cfg: &SuiteConfig, probes: &[Probe], warnings: Vec<String>) -> Result<TrialReport> {
    let start = Instant::now();
    for w in &warnings {
        log::warn!("{w}");
    }
    let checks = if cfg.trials == 0 {
        Vec::new()
    } else {
        probes.iter().map(|&p| run_check(p, cfg)).collect::<Result<_>>()?
    };
    Ok(TrialReport::from_checks(suite.name(), cfg, warnings, checks, start))
}

fn param_warnings(cfg: &SuiteConfig) -> Vec<String> {
    let mut w = match cfg.pipeline.mode {
        Mode::General => cfg.bounds().warnings(cfg.n),
        Mode::SubstitutionOnly => cfg.bounds().substitution_warnings(),
    };
    w.extend(
        cfg.bounds()
            .violations(&cfg.params)
            .into_iter()
            .map(|v| format!("channel parameters outside bounds: {v}")),
    );
    w
}

/// Fast pipeline against full DP on channel pairs; for `n <= 8` also full
/// DP against exhaustive enumeration.
pub fn suite_oracle(cfg: &SuiteConfig) -> Result<TrialReport> {
    if cfg.n > ORACLE_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "oracle suite needs n <= {ORACLE_MAX_N}, got {}",
            cfg.n
        )));
    }
    cfg.params.validate()?;
    cfg.pipeline.validate()?;
    let mut probes = vec![Probe::FastVsFull];
    if cfg.n <= oracle::ENUMERATION_MAX_N {
        probes.push(Probe::FullVsEnumeration);
    }
    run_probes(Suite::Oracle, cfg, &probes, param_warnings(cfg))
}

/// The negative-binomial tail probes run by the tails suite.
pub fn chained_nbinom_probes() -> [Probe; 2] {
    [
        Probe::ChainedNegativeBinomial { t: 200, p: 0.1, q: 0.5, k: 1.5 },
        Probe::ChainedNegativeBinomial { t: 2000, p: 0.1, q: 0.5, k: 1.5 },
    ]
}

/// Channel moments and the window-level tail events at length `cfg.n`.
pub fn suite_lemma_tails(cfg: &SuiteConfig) -> Result<TrialReport> {
    cfg.params.validate()?;
    cfg.pipeline.validate()?;
    let ratio = cfg.separation_ratio;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("separation ratio {ratio} not in (0, 1)")));
    }
    let mut warnings = param_warnings(cfg);
    let bounds = cfg.bounds();
    let k_ln_n = bounds.k_ln_n(cfg.n);
    let near_cap = (1.0 + 1.5 * (bounds.rho_s + 2.0 * bounds.kappa(cfg.n))) * k_ln_n;
    if near_cap >= ratio * k_ln_n {
        warnings.push(format!(
            "near-window bound {near_cap:.2} is not below the separation threshold {:.2}",
            ratio * k_ln_n
        ));
    }
    let len = bounds.block_len(cfg.n);
    let mut probes = vec![
        Probe::ChannelCount { kind: CountKind::Substitutions },
        Probe::ChannelCount { kind: CountKind::Deletions },
        Probe::ChannelCount { kind: CountKind::InsertionEvents },
        Probe::ChannelCount { kind: CountKind::InsertedBits },
    ];
    probes.extend(chained_nbinom_probes());
    probes.extend([
        Probe::BlockDistance,
        Probe::LocalShift,
        Probe::RandomWindowDistance { d: 0 },
        Probe::RandomWindowDistance { d: (ratio * len as f64).floor() as usize },
        Probe::NearWindow,
        Probe::FarWindow,
    ]);
    run_probes(Suite::Tails, cfg, &probes, warnings)
}

/// Short/long break replacement identities on perturbed canonical
/// alignments; the exhaustive good-alignment check runs when
/// `n <= EXHAUSTIVE_MAX_N`.
pub fn suite_proof_machinery(cfg: &SuiteConfig) -> Result<TrialReport> {
    if cfg.n > MACHINERY_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "proof-machinery suite needs n <= {MACHINERY_MAX_N}, got {}",
            cfg.n
        )));
    }
    let mut probes = vec![Probe::SbrLbrRoundTrip, Probe::SharedLongBreakDelta];
    if cfg.n <= EXHAUSTIVE_MAX_N {
        probes.push(Probe::GoodMinimumIsGlobal);
    }
    run_probes(Suite::Machinery, cfg, &probes, Vec::new())
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<TrialReport> {
    match suite {
        Suite::Oracle => suite_oracle(cfg),
        Suite::Tails => suite_lemma_tails(cfg),
        Suite::Machinery => suite_proof_machinery(cfg),
    }
}
