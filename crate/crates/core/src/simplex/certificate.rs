use serde::Serialize;

use super::coupling::Coupling;
use super::TransportLp;
use crate::error::{MmotError, Result};
use crate::scalar::Scalar;

/// Dual potentials `u_i(k)` proving optimality of a transport plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCertificate<T> {
    pub potentials: Vec<Vec<T>>,
    /// Dual objective `Σ_i Σ_k w_i(k) u_i(k)`.
    pub objective_match: T,
}

/// Measured slack of a certificate against a plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck<T> {
    /// `max_α (Σ_i u_i(α_i) − c_α)`, clamped below at zero.
    pub max_infeasibility: T,
    /// `max_{α ∈ supp γ} |Σ_i u_i(α_i) − c_α|`.
    pub max_slackness: T,
    /// `|primal − dual|`.
    pub duality_gap: T,
    pub tuples_scanned: usize,
}

impl<T: Scalar> DualCertificate<T> {
    pub fn potential_sum(&self, alpha: &[usize]) -> T {
        alpha
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &a)| acc + self.potentials[i][a].clone())
    }
}

/// Dual objective of a set of potentials.
pub fn dual_value<T: Scalar>(weights: &[Vec<T>], potentials: &[Vec<T>]) -> T {
    weights
        .iter()
        .zip(potentials)
        .flat_map(|(w, u)| w.iter().zip(u))
        .fold(T::zero(), |acc, (w, u)| acc + w.clone() * u.clone())
}

/// Scans every tuple of the LP and measures feasibility, complementary
/// slackness on the plan's support, and the duality gap.
pub fn check_certificate<T: Scalar>(
    lp: &TransportLp<T>,
    coupling: &Coupling<T>,
    certificate: &DualCertificate<T>,
) -> CertificateCheck<T> {
    let mut max_infeasibility = T::zero();
    for col in 0..lp.n_columns() {
        let alpha = lp.tuple_of(col);
        let excess = certificate.potential_sum(&alpha.0) - lp.costs()[col].clone();
        if excess > max_infeasibility {
            max_infeasibility = excess;
        }
    }
    let mut max_slackness = T::zero();
    let mut primal = T::zero();
    for (alpha, w) in coupling.entries() {
        let c = lp.cost_at(alpha);
        let slack = (certificate.potential_sum(&alpha.0) - c.clone()).abs();
        if slack > max_slackness {
            max_slackness = slack;
        }
        primal = primal + c * w.clone();
    }
    let dual = dual_value(lp.weights(), &certificate.potentials);
    CertificateCheck {
        max_infeasibility,
        max_slackness,
        duality_gap: (primal - dual).abs(),
        tuples_scanned: lp.n_columns(),
    }
}

/// Fails with [`MmotError::CertificateInvalid`] unless the certificate is
/// feasible, complementary to the plan, and closes the duality gap, all
/// within the scalar's feasibility tolerance (exactly for rationals).
pub fn verify_certificate<T: Scalar>(
    lp: &TransportLp<T>,
    coupling: &Coupling<T>,
    certificate: &DualCertificate<T>,
) -> Result<CertificateCheck<T>> {
    if certificate.potentials.len() != lp.sizes().len()
        || certificate
            .potentials
            .iter()
            .zip(lp.sizes())
            .any(|(u, &n)| u.len() != n)
    {
        return Err(MmotError::CertificateInvalid(
            "potential table has the wrong shape".into(),
        ));
    }
    let check = check_certificate(lp, coupling, certificate);
    let tol = T::feas_tol();
    if check.max_infeasibility > tol {
        return Err(MmotError::CertificateInvalid(format!(
            "dual constraint violated by {}",
            check.max_infeasibility
        )));
    }
    if check.max_slackness > tol {
        return Err(MmotError::CertificateInvalid(format!(
            "complementary slackness violated by {}",
            check.max_slackness
        )));
    }
    if check.duality_gap > tol {
        return Err(MmotError::CertificateInvalid(format!(
            "duality gap {}",
            check.duality_gap
        )));
    }
    Ok(check)
}
