//! Randomized search for instances where no Monge plan is optimal.
//!
//! Every trial draws an instance from its own RNG stream, solves the LP and
//! enumerates all Monge plans in `f64`, and flags the instance when the
//! minimal Monge cost exceeds the LP optimum by more than the classification
//! threshold. Flagged instances can be re-certified in exact arithmetic.

mod generator;
mod histogram;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use generator::{generate_instance, parse_digest, reconstruct, Distribution, GeneratorConfig};
pub use histogram::{
    export_histogram, histogram, to_csv, to_svg, ExportOutcome, HistogramBin, HistogramFormat, DEFAULT_BINS,
};

use crate::cost::{build_tensor, Convention};
use crate::error::{MmotError, Result};
use crate::measures::Instance;
use crate::monge::enumerate_mmc;
use crate::scalar::Rational;
use crate::simplex::{solve_lp, SimplexConfig};

/// MMC can undercut the LP value by at most this much before a record counts
/// as a solver inconsistency.
pub const MONOTONE_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Re-check every NonMonge verdict in rational arithmetic.
    pub exact_audit: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs_tol: 1e-7,
            rel_tol: 1e-9,
            exact_audit: false,
        }
    }
}

impl Tolerances {
    pub fn threshold(&self, lp_value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * lp_value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Monge,
    NonMonge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub lp_value: f64,
    pub mmc: f64,
    pub relative_gap_percent: f64,
    pub classification: Classification,
    /// `Some(true)` when an exact re-solve confirmed a strict gap.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact_certified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub instance_digest: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// Exact LP optimum and minimal Monge cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactGap {
    pub lp_value: Rational,
    pub mmc: Rational,
}

impl ExactGap {
    pub fn gap(&self) -> Rational {
        self.mmc.clone() - self.lp_value.clone()
    }

    pub fn is_strict(&self) -> bool {
        self.mmc > self.lp_value
    }
}

/// `100·gap/|lp|`; a zero gap over a zero LP value counts as 0 %.
pub fn relative_gap_percent(gap: f64, lp_value: f64) -> f64 {
    if gap == 0.0 {
        0.0
    } else {
        100.0 * gap / lp_value.abs()
    }
}

pub fn exact_gap(instance: &Instance, config: &SimplexConfig) -> Result<ExactGap> {
    let tensor = build_tensor::<Rational>(instance, Convention::PairwiseUnordered)?;
    let lp = solve_lp(instance, &tensor, config)?;
    let monge = enumerate_mmc(instance, &tensor)?;
    Ok(ExactGap {
        lp_value: lp.value,
        mmc: monge.mmc,
    })
}

pub fn classify_with(instance: &Instance, tolerances: &Tolerances, config: &SimplexConfig) -> Result<Verdict> {
    let tensor = build_tensor::<f64>(instance, Convention::PairwiseUnordered)?;
    let lp_value = solve_lp(instance, &tensor, config)?.value;
    let mmc = enumerate_mmc(instance, &tensor)?.mmc;
    let gap = mmc - lp_value;
    let classification = if gap > tolerances.threshold(lp_value) {
        Classification::NonMonge
    } else {
        Classification::Monge
    };
    let exact_certified = if tolerances.exact_audit && classification == Classification::NonMonge {
        Some(exact_gap(instance, config)?.is_strict())
    } else {
        None
    };
    Ok(Verdict {
        lp_value,
        mmc,
        relative_gap_percent: relative_gap_percent(gap, lp_value),
        classification,
        exact_certified,
    })
}

/// Classifies an instance with the default simplex settings.
pub fn classify(instance: &Instance, tolerances: &Tolerances) -> Result<Verdict> {
    classify_with(instance, tolerances, &SimplexConfig::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialError {
    pub trial_index: u64,
    pub instance_digest: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub audited: usize,
    pub confirmed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub config: GeneratorConfig,
    pub tolerances: Tolerances,
    pub trials: u64,
    pub failures: usize,
    pub solver_errors: usize,
    pub failure_rate: f64,
    pub max_gap_percent: f64,
    /// Most negative gap seen over all trials (roundoff only).
    pub min_gap_percent: f64,
    /// Records with `mmc < lp_value − 1e−7`.
    pub monotonicity_violations: usize,
    pub histogram: Vec<HistogramBin>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact_audit: Option<AuditSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Worker threads; `None` uses rayon's default pool.
    pub threads: Option<usize>,
    pub bins: usize,
    pub simplex: SimplexConfig,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            threads: None,
            bins: DEFAULT_BINS,
            simplex: SimplexConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub summary: SearchSummary,
    /// NonMonge records in trial order.
    pub failures: Vec<TrialRecord>,
    pub errors: Vec<TrialError>,
}

fn run_trial(
    config: &GeneratorConfig,
    trial_index: u64,
    tolerances: &Tolerances,
    simplex: &SimplexConfig,
) -> std::result::Result<TrialRecord, TrialError> {
    let digest = config.digest(trial_index);
    generate_instance(config, trial_index)
        .and_then(|instance| classify_with(&instance, tolerances, simplex))
        .map(|verdict| TrialRecord {
            trial_index,
            instance_digest: digest.clone(),
            verdict,
        })
        .map_err(|e| TrialError {
            trial_index,
            instance_digest: digest,
            message: e.to_string(),
        })
}

/// Runs `trials` independent trials. The result depends only on the
/// arguments, never on the worker count.
pub fn run_search(
    config: &GeneratorConfig,
    trials: u64,
    tolerances: &Tolerances,
    options: &SearchOptions,
) -> Result<SearchOutcome> {
    config.validate()?;
    if trials == 0 {
        return Err(MmotError::InvalidConfig("trials must be at least 1".into()));
    }
    let work = || -> Vec<_> {
        (0..trials)
            .into_par_iter()
            .map(|t| run_trial(config, t, tolerances, &options.simplex))
            .collect()
    };
    let results = match options.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| MmotError::InvalidConfig(e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut failures = Vec::new();
    let mut errors = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut violations = 0;
    for result in results {
        match result {
            Ok(record) => {
                let v = &record.verdict;
                min_gap = min_gap.min(v.relative_gap_percent);
                if v.mmc < v.lp_value - MONOTONE_SLACK {
                    violations += 1;
                }
                if v.classification == Classification::NonMonge {
                    failures.push(record);
                }
            }
            Err(e) => errors.push(e),
        }
    }
    let gaps: Vec<f64> = failures.iter().map(|r| r.verdict.relative_gap_percent).collect();
    let exact_audit = tolerances.exact_audit.then(|| AuditSummary {
        audited: failures.len(),
        confirmed: failures
            .iter()
            .filter(|r| r.verdict.exact_certified == Some(true))
            .count(),
    });
    let summary = SearchSummary {
        config: *config,
        tolerances: *tolerances,
        trials,
        failures: failures.len(),
        solver_errors: errors.len(),
        failure_rate: failures.len() as f64 / trials as f64,
        max_gap_percent: gaps.iter().copied().fold(0.0, f64::max),
        min_gap_percent: if min_gap.is_finite() { min_gap } else { 0.0 },
        monotonicity_violations: violations,
        histogram: histogram(&gaps, options.bins),
        exact_audit,
    };
    Ok(SearchOutcome {
        summary,
        failures,
        errors,
    })
}

/// Writes one JSON object per line.
pub fn write_failure_log(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_failure_log(path: &Path) -> Result<Vec<TrialRecord>> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(MmotError::from))
        .collect()
}
