use serde::Serialize;

use crate::cost::{CostTensor, IndexTuple};
use crate::measures::Instance;
use crate::scalar::Scalar;

/// Sparse transport plan: positive weights on index tuples, sorted by tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling<T> {
    entries: Vec<(IndexTuple, T)>,
}

impl<T: Scalar> Coupling<T> {
    /// Builds a coupling from raw entries. Repeated tuples are summed and
    /// zero weights dropped; negative weights are kept so that
    /// [`verify_coupling`] can flag them.
    pub fn new(mut entries: Vec<(IndexTuple, T)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(IndexTuple, T)> = Vec::with_capacity(entries.len());
        for (alpha, w) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == alpha => *acc = acc.clone() + w,
                _ => merged.push((alpha, w)),
            }
        }
        merged.retain(|(_, w)| !w.is_zero());
        Self { entries: merged }
    }

    pub fn entries(&self) -> &[(IndexTuple, T)] {
        &self.entries
    }

    pub fn support(&self) -> Vec<IndexTuple> {
        self.entries.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn weight(&self, alpha: &IndexTuple) -> T {
        self.entries
            .binary_search_by(|(a, _)| a.cmp(alpha))
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_else(|_| T::zero())
    }

    pub fn total_mass(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, (_, w)| acc + w.clone())
    }

    /// `⟨C, γ⟩`.
    pub fn cost(&self, tensor: &CostTensor<T>) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, (a, w)| acc + tensor.at(a).clone() * w.clone())
    }

    pub fn map_weights<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Coupling<U> {
        Coupling::new(self.entries.iter().map(|(a, w)| (a.clone(), f(w))).collect())
    }
}

/// Result of checking a coupling against prescribed marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport<T> {
    /// Largest violation over nonnegativity, total mass and every marginal row.
    pub max_violation: T,
    pub mass_error: T,
    pub max_marginal_error: T,
    pub negative_weights: Vec<IndexTuple>,
    /// Tuples whose length or entries do not fit the instance.
    pub out_of_range: Vec<IndexTuple>,
}

impl<T: Scalar> CouplingReport<T> {
    pub fn is_feasible(&self, tol: &T) -> bool {
        self.out_of_range.is_empty() && self.max_violation <= *tol
    }
}

/// Checks a coupling against arbitrary axis weights `weights[i][k]`.
pub fn verify_against<T: Scalar>(weights: &[Vec<T>], coupling: &Coupling<T>) -> CouplingReport<T> {
    let mut sums: Vec<Vec<T>> = weights.iter().map(|w| vec![T::zero(); w.len()]).collect();
    let mut negative_weights = Vec::new();
    let mut out_of_range = Vec::new();
    let mut worst_negative = T::zero();
    for (alpha, w) in coupling.entries() {
        let fits = alpha.len() == weights.len()
            && alpha.0.iter().zip(weights).all(|(&a, ax)| a < ax.len());
        if !fits {
            out_of_range.push(alpha.clone());
            continue;
        }
        if w.is_negative() {
            negative_weights.push(alpha.clone());
            if -w.clone() > worst_negative {
                worst_negative = -w.clone();
            }
        }
        for (i, &a) in alpha.0.iter().enumerate() {
            sums[i][a] = sums[i][a].clone() + w.clone();
        }
    }
    let mass_error = (coupling.total_mass() - T::one()).abs();
    let mut max_marginal_error = T::zero();
    for (got, want) in sums.iter().zip(weights) {
        for (g, w) in got.iter().zip(want) {
            let e = (g.clone() - w.clone()).abs();
            if e > max_marginal_error {
                max_marginal_error = e;
            }
        }
    }
    let mut max_violation = worst_negative;
    for e in [&mass_error, &max_marginal_error] {
        if *e > max_violation {
            max_violation = e.clone();
        }
    }
    CouplingReport {
        max_violation,
        mass_error,
        max_marginal_error,
        negative_weights,
        out_of_range,
    }
}

/// Checks nonnegativity, unit mass and all N·m uniform marginal constraints.
pub fn verify_coupling<T: Scalar>(instance: &Instance, coupling: &Coupling<T>) -> CouplingReport<T> {
    let m = instance.support_size();
    let weights = vec![vec![T::recip_count(m); m]; instance.n_marginals()];
    verify_against(&weights, coupling)
}
