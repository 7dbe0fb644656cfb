//! JSON reports for the instance-level subcommands.

use mmot::barycenter::{extract_barycenter, BarycenterFile};
use mmot::monge::{enumerate_mmc, two_point_monge, MongeAssignment};
use mmot::scalar::rational_string;
use mmot::search::{relative_gap_percent, Classification, Tolerances};
use mmot::simplex::{check_certificate, TransportLp};
use mmot::{build_tensor, Convention, IndexTuple, Instance, MmotError, Rational, Result, Scalar, SimplexConfig, SolveMode};
use serde::Serialize;

/// Exact rendering for rational scalars; floats have none.
pub trait Render: Scalar {
    fn exact(&self) -> Option<String>;
}

impl Render for f64 {
    fn exact(&self) -> Option<String> {
        None
    }
}

impl Render for Rational {
    fn exact(&self) -> Option<String> {
        Some(rational_string(self))
    }
}

#[derive(Debug, Serialize)]
pub struct CouplingEntry {
    pub tuple: IndexTuple,
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_exact: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct CertificateSummary {
    pub status: &'static str,
    pub tuples_scanned: usize,
    pub max_infeasibility: f64,
    pub max_slackness: f64,
    pub duality_gap: f64,
}

#[derive(Debug, Serialize)]
pub enum ReportClassification {
    Monge,
    NonMonge,
    /// Enumeration cap exceeded.
    Unknown,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub mode: SolveMode,
    pub convention: Convention,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub lp_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_value_exact: Option<String>,
    pub mmc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mmc_exact: Option<String>,
    pub relative_gap_percent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_exact: Option<String>,
    pub classification: ReportClassification,
    pub optimal_coupling: Vec<CouplingEntry>,
    pub best_assignment: Option<MongeAssignment>,
    pub best_monge_support: Option<Vec<IndexTuple>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barycenter: Option<BarycenterFile>,
    pub certificate: CertificateSummary,
    pub iterations: usize,
}

pub fn solve_report<T: Render>(
    instance: &Instance,
    convention: Convention,
    with_barycenter: bool,
    config: &SimplexConfig,
) -> Result<SolveReport> {
    let tensor = build_tensor::<T>(instance, convention)?;
    let lp = mmot::solve_lp(instance, &tensor, config)?;
    let check = check_certificate(&TransportLp::uniform(&tensor), &lp.coupling, &lp.certificate);
    let monge = match enumerate_mmc(instance, &tensor) {
        Ok(r) => Some(r),
        Err(MmotError::EnumerationOverflow { .. }) => None,
        Err(e) => return Err(e),
    };

    let (mut classification, mut gap_pct, mut gap_exact) = (ReportClassification::Unknown, None, None);
    if let Some(report) = &monge {
        let gap = report.mmc.clone() - lp.value.clone();
        let lp_f = lp.value.to_f64();
        let non_monge = if T::is_exact() {
            gap.is_positive()
        } else {
            gap.to_f64() > Tolerances::default().threshold(lp_f)
        };
        classification = if non_monge {
            ReportClassification::NonMonge
        } else {
            ReportClassification::Monge
        };
        gap_pct = Some(relative_gap_percent(gap.to_f64(), lp_f));
        gap_exact = gap.exact();
    }

    let barycenter = if with_barycenter {
        if convention != Convention::PairwiseUnordered {
            return Err(MmotError::InvalidConfig(
                "barycenter extraction needs the pairwise_unordered convention".into(),
            ));
        }
        Some(extract_barycenter(instance, &lp.coupling, config)?.to_file())
    } else {
        None
    };

    Ok(SolveReport {
        mode: T::MODE,
        convention,
        n: instance.n_marginals(),
        m: instance.support_size(),
        d: instance.dim(),
        lp_value: lp.value.to_f64(),
        lp_value_exact: lp.value.exact(),
        mmc: monge.as_ref().map(|r| r.mmc.to_f64()),
        mmc_exact: monge.as_ref().and_then(|r| r.mmc.exact()),
        relative_gap_percent: gap_pct,
        gap_exact,
        classification,
        optimal_coupling: lp
            .coupling
            .entries()
            .iter()
            .map(|(tuple, w)| CouplingEntry {
                tuple: tuple.clone(),
                weight: w.to_f64(),
                weight_exact: w.exact(),
            })
            .collect(),
        best_assignment: monge.as_ref().map(|r| r.best.clone()),
        best_monge_support: monge.as_ref().map(|r| r.best.tuples()),
        barycenter,
        certificate: CertificateSummary {
            status: "verified",
            tuples_scanned: check.tuples_scanned,
            max_infeasibility: check.max_infeasibility.to_f64(),
            max_slackness: check.max_slackness.to_f64(),
            duality_gap: check.duality_gap.to_f64(),
        },
        iterations: lp.iterations,
    })
}

#[derive(Debug, Serialize)]
pub struct MongeOutput {
    pub mode: SolveMode,
    pub convention: Convention,
    pub mmc: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mmc_exact: Option<String>,
    pub best_assignment: MongeAssignment,
    pub best_monge_support: Vec<IndexTuple>,
    pub enumerated: u64,
}

pub fn monge_report<T: Render>(instance: &Instance, convention: Convention) -> Result<MongeOutput> {
    let tensor = build_tensor::<T>(instance, convention)?;
    let r = enumerate_mmc(instance, &tensor)?;
    Ok(MongeOutput {
        mode: T::MODE,
        convention,
        mmc: r.mmc.to_f64(),
        mmc_exact: r.mmc.exact(),
        best_monge_support: r.best.tuples(),
        best_assignment: r.best,
        enumerated: r.enumerated,
    })
}

#[derive(Debug, Serialize)]
pub struct BarycenterOutput {
    #[serde(flatten)]
    pub barycenter: BarycenterFile,
    pub lp_value: f64,
    pub lp_value_over_n: f64,
    /// `|functional − lp_value/N| / (lp_value/N)`.
    pub equivalence_residual: f64,
}

pub fn barycenter_report<T: Render>(instance: &Instance, config: &SimplexConfig) -> Result<BarycenterOutput> {
    let tensor = build_tensor::<T>(instance, Convention::PairwiseUnordered)?;
    let lp = mmot::solve_lp(instance, &tensor, config)?;
    let bary = extract_barycenter(instance, &lp.coupling, config)?;
    let over_n = lp.value.to_f64() / instance.n_marginals() as f64;
    let f = bary.functional_value.to_f64();
    Ok(BarycenterOutput {
        barycenter: bary.to_file(),
        lp_value: lp.value.to_f64(),
        lp_value_over_n: over_n,
        equivalence_residual: if over_n == 0.0 { f.abs() } else { (f - over_n).abs() / over_n.abs() },
    })
}

#[derive(Debug, Serialize)]
pub struct TwoPointOutput {
    pub mode: SolveMode,
    pub assignment: MongeAssignment,
    pub support: Vec<IndexTuple>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_exact: Option<String>,
    pub lp_value: f64,
    pub barycenter: BarycenterFile,
    pub classification: Classification,
}

pub fn two_point_report<T: Render>(instance: &Instance, config: &SimplexConfig) -> Result<TwoPointOutput> {
    let (assignment, value) = two_point_monge::<T>(instance)?;
    let tensor = build_tensor::<T>(instance, Convention::PairwiseUnordered)?;
    let lp = mmot::solve_lp(instance, &tensor, config)?;
    let bary = extract_barycenter(instance, &assignment.coupling::<T>(), config)?;
    let gap = value.clone() - lp.value.clone();
    let non_monge = if T::is_exact() {
        gap.is_positive()
    } else {
        gap.to_f64() > Tolerances::default().threshold(lp.value.to_f64())
    };
    Ok(TwoPointOutput {
        mode: T::MODE,
        support: assignment.tuples(),
        assignment,
        value: value.to_f64(),
        value_exact: value.exact(),
        lp_value: lp.value.to_f64(),
        barycenter: bary.to_file(),
        classification: if non_monge {
            Classification::NonMonge
        } else {
            Classification::Monge
        },
    })
}
