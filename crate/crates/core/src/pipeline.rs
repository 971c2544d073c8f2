//! End-to-end near-linear edit distance.
//!
//! General mode anchors the source with [`approx_align`], builds a band of
//! radius `ceil(k2 ln n)` around the anchors and runs the banded DP.
//! Substitution-only mode skips anchoring and uses a diagonal band of radius
//! `ceil(k ln n)`. Either way the answer is the cost of a real path, so it
//! never undercuts the true edit distance.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::Alignment;
use crate::approx::{approx_align_stats, ApproxStats};
use crate::channel::ChannelSample;
use crate::dp::{band_from_anchor_function, diagonal_band, edit_distance_banded, edit_distance_cost, Band};
use crate::error::{Error, Result};
use crate::params::{ln_n, ChannelParams, ParamBounds};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    General,
    SubstitutionOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub bounds: ParamBounds,
    /// Band-radius constant; `None` selects [`PipelineConfig::default_k2`].
    pub k2: Option<f64>,
    pub mode: Mode,
    /// Explicit band radius, overriding the one derived from `k` or `k2`.
    pub radius: Option<usize>,
    /// On a band that cannot reach the corner, retry with doubled radius
    /// instead of failing.
    pub auto_widen: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bounds: ParamBounds::default(),
            k2: None,
            mode: Mode::General,
            radius: None,
            auto_widen: false,
        }
    }
}

impl PipelineConfig {
    pub fn substitution_only(bounds: ParamBounds) -> Self {
        PipelineConfig {
            bounds,
            mode: Mode::SubstitutionOnly,
            ..Default::default()
        }
    }

    /// `ceil((3/2 kappa_n + 1) k) + k`: the anchor error allowance plus one
    /// block of drift, both in units of `ln n`.
    pub fn default_k2(&self, n: usize) -> f64 {
        let b = &self.bounds;
        ((1.5 * b.kappa(n) + 1.0) * b.k).ceil() + b.k
    }

    pub fn k2_at(&self, n: usize) -> f64 {
        self.k2.unwrap_or_else(|| self.default_k2(n))
    }

    /// Band radius used at source length `n`.
    pub fn radius(&self, n: usize) -> usize {
        if let Some(r) = self.radius {
            return r;
        }
        match self.mode {
            Mode::General => (self.k2_at(n) * ln_n(n)).ceil() as usize,
            Mode::SubstitutionOnly => self.bounds.block_len(n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if let Some(k2) = self.k2 {
            if !(k2.is_finite() && k2 > 0.0) {
                return Err(Error::InvalidArgument(format!("k2 = {k2} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub approx: f64,
    pub band: f64,
    pub dp: f64,
    pub total: f64,
}

/// Run summary; serialized as the pipeline report JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub cost: usize,
    pub band_cells: usize,
    pub anchor_samples: usize,
    pub mode: Mode,
    pub timings_ms: Timings,
    pub approx_cells: usize,
    pub radius: usize,
    pub max_band_width: usize,
    pub widenings: usize,
    pub warnings: Vec<String>,
}

impl PipelineReport {
    /// Window-DP plus banded-DP cells.
    pub fn total_cells(&self) -> usize {
        self.approx_cells + self.band_cells
    }
}

#[derive(Debug, Clone)]
pub struct FastResult {
    pub cost: usize,
    pub alignment: Alignment,
    pub report: PipelineReport,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

pub fn edit_distance_fast(s1: &[u8], s2: &[u8], cfg: &PipelineConfig) -> Result<FastResult> {
    cfg.validate()?;
    let t0 = Instant::now();
    let (n1, n2) = (s1.len(), s2.len());
    let mut timings = Timings::default();
    let mut warnings = match cfg.mode {
        Mode::General => cfg.bounds.warnings(n1),
        Mode::SubstitutionOnly => cfg.bounds.substitution_warnings(),
    };
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut radius = cfg.radius(n1);
    let mut widenings = 0;
    let mut approx = ApproxStats::default();
    let mut anchor_samples = 0;
    let full_radius = n1.max(n2);

    let anchors = match cfg.mode {
        Mode::General => {
            let t = Instant::now();
            let (f, stats) = approx_align_stats(s1, s2, &cfg.bounds)?;
            timings.approx = ms(t);
            approx = stats;
            anchor_samples = f.len();
            Some(f)
        }
        Mode::SubstitutionOnly => None,
    };

    let result = loop {
        let t = Instant::now();
        let band: Result<Band> = match &anchors {
            Some(f) => band_from_anchor_function(f, n1, n2, radius),
            None => diagonal_band(n1, n2, radius),
        };
        let outcome = band.and_then(|band| {
            timings.band += ms(t);
            let t = Instant::now();
            let r = edit_distance_banded(s1, s2, &band).map(|r| (r, band.stats().max_width));
            timings.dp += ms(t);
            r
        });
        match outcome {
            Err(e) if e.is_model_violation() && cfg.auto_widen && radius < full_radius => {
                radius = (radius.max(1) * 2).min(full_radius);
                widenings += 1;
                let w = format!("band could not reach the corner; widened radius to {radius}");
                log::warn!("{w}");
                warnings.push(w);
            }
            other => break other?,
        }
    };
    let (dp, max_band_width) = result;
    timings.total = ms(t0);
    let report = PipelineReport {
        cost: dp.cost,
        band_cells: dp.cells,
        anchor_samples,
        mode: cfg.mode,
        timings_ms: timings,
        approx_cells: approx.cells,
        radius,
        max_band_width,
        widenings,
        warnings,
    };
    Ok(FastResult {
        cost: dp.cost,
        alignment: dp.alignment,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Skip the full-DP cross-check above this length.
    pub n_oracle_max: usize,
    /// Run trials concurrently. Sequential runs give cleaner timings.
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            n_oracle_max: 1 << 14,
            parallel: true,
        }
    }
}

/// One row per input length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub trials: usize,
    pub mean_time_ms: f64,
    pub median_time_ms: f64,
    pub mean_band_cells: f64,
    pub mean_approx_cells: f64,
    pub mean_total_cells: f64,
    pub oracle_checked: usize,
    pub mismatches: usize,
}

struct BenchTrial {
    time_ms: f64,
    band_cells: usize,
    approx_cells: usize,
    oracle: Option<bool>,
}

/// Instance for trial `t` at length `n`; identical for every caller.
pub fn bench_instance(n: usize, t: usize, params: &ChannelParams, seed: u64) -> Result<ChannelSample> {
    ChannelSample::draw(n, params, derive_seed(derive_seed(seed, n as u64), t as u64))
}

pub fn scaling_benchmark(
    n_list: &[usize],
    trials: usize,
    cfg: &PipelineConfig,
    params: &ChannelParams,
    seed: u64,
    opts: &BenchOptions,
) -> Result<Vec<BenchRow>> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    let mut rows = Vec::with_capacity(ns.len());
    for n in ns {
        let run = |t: usize| -> Result<BenchTrial> {
            let sample = bench_instance(n, t, params, seed)?;
            let (a, b) = (sample.s1.to_symbols(), sample.s2.to_symbols());
            let start = Instant::now();
            let fast = edit_distance_fast(&a, &b, cfg)?;
            let time_ms = ms(start);
            let oracle = (n <= opts.n_oracle_max).then(|| edit_distance_cost(&a, &b) == fast.cost);
            Ok(BenchTrial {
                time_ms,
                band_cells: fast.report.band_cells,
                approx_cells: fast.report.approx_cells,
                oracle,
            })
        };
        let results: Vec<BenchTrial> = if opts.parallel {
            (0..trials).into_par_iter().map(run).collect::<Result<_>>()?
        } else {
            (0..trials).map(run).collect::<Result<_>>()?
        };
        let tf = trials as f64;
        let mut times: Vec<f64> = results.iter().map(|r| r.time_ms).collect();
        times.sort_by(f64::total_cmp);
        let median = if trials % 2 == 1 {
            times[trials / 2]
        } else {
            0.5 * (times[trials / 2 - 1] + times[trials / 2])
        };
        let mean_band = results.iter().map(|r| r.band_cells as f64).sum::<f64>() / tf;
        let mean_approx = results.iter().map(|r| r.approx_cells as f64).sum::<f64>() / tf;
        rows.push(BenchRow {
            n,
            trials,
            mean_time_ms: times.iter().sum::<f64>() / tf,
            median_time_ms: median,
            mean_band_cells: mean_band,
            mean_approx_cells: mean_approx,
            mean_total_cells: mean_band + mean_approx,
            oracle_checked: results.iter().filter(|r| r.oracle.is_some()).count(),
            mismatches: results.iter().filter(|r| r.oracle == Some(false)).count(),
        });
    }
    Ok(rows)
}
