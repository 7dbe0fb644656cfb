//! Deterministic (Monge) plans: exhaustive minimal Monge cost, the two-point
//! construction, and the one-dimensional monotone assignment.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::cost::{flat_index, scalar_points, CostTensor, IndexTuple};
use crate::error::{MmotError, Result};
use crate::measures::Instance;
use crate::scalar::Scalar;
use crate::simplex::Coupling;

/// Default cap on `(m!)^(N−1)`.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

/// One permutation per marginal after the first; atom `k` of the first
/// marginal is sent to atom `sigmas[i-1][k]` of marginal `i`.
///
/// Permutations are stored 0-based and serialized 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MongeAssignment {
    sigmas: Vec<Vec<usize>>,
}

impl MongeAssignment {
    pub fn new(sigmas: Vec<Vec<usize>>) -> Result<Self> {
        let m = sigmas.first().map_or(0, Vec::len);
        for (i, s) in sigmas.iter().enumerate() {
            let mut seen = vec![false; m];
            if s.len() != m {
                return Err(MmotError::InvalidAssignment(format!(
                    "permutation {} has length {}, expected {m}",
                    i + 2,
                    s.len()
                )));
            }
            for &k in s {
                if k >= m || std::mem::replace(&mut seen[k], true) {
                    return Err(MmotError::InvalidAssignment(format!(
                        "permutation {} is not a bijection",
                        i + 2
                    )));
                }
            }
        }
        Ok(Self { sigmas })
    }

    pub fn identity(n_marginals: usize, m: usize) -> Self {
        Self {
            sigmas: vec![(0..m).collect(); n_marginals - 1],
        }
    }

    pub fn sigmas(&self) -> &[Vec<usize>] {
        &self.sigmas
    }

    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.sigmas
            .iter()
            .map(|s| s.iter().map(|k| k + 1).collect())
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.sigmas.first().map_or(0, Vec::len)
    }

    pub fn n_marginals(&self) -> usize {
        self.sigmas.len() + 1
    }

    /// Tuples `(k, σ₂(k), …, σ_N(k))` for `k = 1..m`.
    pub fn tuples(&self) -> Vec<IndexTuple> {
        (0..self.support_size())
            .map(|k| {
                let mut alpha = Vec::with_capacity(self.n_marginals());
                alpha.push(k);
                alpha.extend(self.sigmas.iter().map(|s| s[k]));
                IndexTuple(alpha)
            })
            .collect()
    }

    /// The induced plan `(1/m) Σ_k δ_(k, σ₂(k), …)`.
    pub fn coupling<T: Scalar>(&self) -> Coupling<T> {
        let w = T::recip_count(self.support_size());
        Coupling::new(self.tuples().into_iter().map(|a| (a, w.clone())).collect())
    }

    fn check_shape(&self, instance: &Instance) -> Result<()> {
        if self.n_marginals() != instance.n_marginals() || self.support_size() != instance.support_size() {
            return Err(MmotError::InvalidAssignment(format!(
                "assignment for N={}, m={} does not fit instance with N={}, m={}",
                self.n_marginals(),
                self.support_size(),
                instance.n_marginals(),
                instance.support_size()
            )));
        }
        Ok(())
    }
}

impl Serialize for MongeAssignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MongeAssignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Vec<usize>>::deserialize(d)?;
        let sigmas = raw
            .into_iter()
            .map(|s| s.into_iter().map(|k| k.checked_sub(1)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| serde::de::Error::custom("permutations are 1-based"))?;
        MongeAssignment::new(sigmas).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MongeReport<T> {
    pub best: MongeAssignment,
    /// Minimal Monge cost.
    pub mmc: T,
    pub enumerated: u64,
}

fn tuple_sum<T: Scalar>(tensor: &CostTensor<T>, sigmas: &[&Vec<usize>]) -> T {
    let m = tensor.support_size();
    let mut total = T::zero();
    let mut alpha = vec![0; sigmas.len() + 1];
    for k in 0..m {
        alpha[0] = k;
        for (slot, s) in alpha[1..].iter_mut().zip(sigmas) {
            *slot = s[k];
        }
        total = total + tensor.values()[flat_index(&alpha, m)].clone();
    }
    total
}

/// `(1/m) Σ_k C(k, σ₂(k), …, σ_N(k))`.
pub fn assignment_cost<T: Scalar>(
    instance: &Instance,
    tensor: &CostTensor<T>,
    assignment: &MongeAssignment,
) -> Result<T> {
    assignment.check_shape(instance)?;
    let sigmas: Vec<&Vec<usize>> = assignment.sigmas.iter().collect();
    Ok(tuple_sum(tensor, &sigmas) / T::from_count(tensor.support_size()))
}

/// Number of Monge assignments, `(m!)^(N−1)`, saturating.
pub fn assignment_count(n_marginals: usize, m: usize) -> u128 {
    let fact = (1..=m as u128).try_fold(1u128, |acc, k| acc.checked_mul(k));
    fact.and_then(|f| f.checked_pow(n_marginals as u32 - 1))
        .unwrap_or(u128::MAX)
}

/// Exhaustive minimum over all Monge assignments, ties broken towards the
/// lexicographically smallest `(σ₂, …, σ_N)`.
pub fn enumerate_mmc_capped<T: Scalar>(
    instance: &Instance,
    tensor: &CostTensor<T>,
    cap: usize,
) -> Result<MongeReport<T>> {
    let n = instance.n_marginals();
    let m = instance.support_size();
    if tensor.n_marginals() != n || tensor.support_size() != m {
        return Err(MmotError::SupportSizeMismatch {
            expected: m,
            found: tensor.support_size(),
        });
    }
    let count = assignment_count(n, m);
    if count > cap as u128 {
        return Err(MmotError::EnumerationOverflow { count, cap });
    }
    let perms: Vec<Vec<usize>> = (0..m).permutations(m).collect();
    let mut best: Option<(T, Vec<usize>)> = None;
    let mut enumerated = 0u64;
    // Odometer over permutation indices; the first digit (σ₂) varies slowest.
    for choice in (0..n - 1).map(|_| 0..perms.len()).multi_cartesian_product() {
        let sigmas: Vec<&Vec<usize>> = choice.iter().map(|&p| &perms[p]).collect();
        let total = tuple_sum(tensor, &sigmas);
        enumerated += 1;
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, choice));
        }
    }
    let (total, choice) = best.expect("at least one assignment");
    Ok(MongeReport {
        best: MongeAssignment {
            sigmas: choice.into_iter().map(|p| perms[p].clone()).collect(),
        },
        mmc: total / T::from_count(m),
        enumerated,
    })
}

pub fn enumerate_mmc<T: Scalar>(instance: &Instance, tensor: &CostTensor<T>) -> Result<MongeReport<T>> {
    enumerate_mmc_capped(instance, tensor, DEFAULT_ENUMERATION_CAP)
}

/// Optimal Monge plan for two-point marginals.
///
/// After centering, the atoms of marginal `i` are `±c_i`. The sign pattern
/// maximizing `‖Σ_i s_i c_i‖²` (with `s_1 = +1`) pairs the chosen atoms with
/// each other and the complementary atoms with each other. The returned value
/// is the pairwise cost of that plan on the original coordinates.
pub fn two_point_monge<T: Scalar>(instance: &Instance) -> Result<(MongeAssignment, T)> {
    let m = instance.support_size();
    if m != 2 {
        return Err(MmotError::NotTwoPoint(m));
    }
    let n = instance.n_marginals();
    let points = scalar_points::<T>(instance);
    let half = T::recip_count(2);
    let centered: Vec<Vec<T>> = points
        .iter()
        .map(|atoms| {
            atoms[0]
                .iter()
                .zip(&atoms[1])
                .map(|(a, b)| (a.clone() - b.clone()) * half.clone())
                .collect()
        })
        .collect();

    let mut best: Option<(T, u64)> = None;
    for mask in 0..(1u64 << (n - 1)) {
        let mut sum = centered[0].clone();
        for (i, c) in centered.iter().enumerate().skip(1) {
            let flip = (mask >> (n - 1 - i)) & 1 == 1;
            for (acc, x) in sum.iter_mut().zip(c) {
                *acc = if flip { acc.clone() - x.clone() } else { acc.clone() + x.clone() };
            }
        }
        let norm2 = sum.into_iter().fold(T::zero(), |acc, s| acc + s.clone() * s);
        if best.as_ref().is_none_or(|(b, _)| norm2 > *b) {
            best = Some((norm2, mask));
        }
    }
    let (_, mask) = best.expect("at least one sign pattern");
    let sigmas = (1..n)
        .map(|i| {
            if (mask >> (n - 1 - i)) & 1 == 1 {
                vec![1, 0]
            } else {
                vec![0, 1]
            }
        })
        .collect();
    let assignment = MongeAssignment { sigmas };

    // Σ_{i<j} ‖x_i − x_j‖² = N Σ_i ‖x_i‖² − ‖Σ_i x_i‖², averaged over the two tuples.
    let second: T = points
        .iter()
        .flatten()
        .flatten()
        .fold(T::zero(), |acc, x| acc + x.clone() * x.clone())
        * half.clone();
    let d = instance.dim();
    let mut sum_norms = T::zero();
    for alpha in assignment.tuples() {
        let mut s = vec![T::zero(); d];
        for (i, &a) in alpha.0.iter().enumerate() {
            for (acc, x) in s.iter_mut().zip(&points[i][a]) {
                *acc = acc.clone() + x.clone();
            }
        }
        sum_norms = sum_norms + s.into_iter().fold(T::zero(), |acc, v| acc + v.clone() * v);
    }
    let value = T::from_count(n) * second - sum_norms * half;
    Ok((assignment, value))
}

/// Pairs the k-th smallest atom of every marginal (ties by original index).
pub fn monotone_1d(instance: &Instance) -> Result<MongeAssignment> {
    let d = instance.dim();
    if d != 1 {
        return Err(MmotError::NotOneDimensional(d));
    }
    let order = |mu: &crate::measures::EmpiricalMeasure| -> Vec<usize> {
        (0..mu.len())
            .sorted_by(|&a, &b| mu.point(a)[0].total_cmp(&mu.point(b)[0]).then(a.cmp(&b)))
            .collect()
    };
    let first = order(instance.marginal(0));
    let sigmas = instance.marginals()[1..]
        .iter()
        .map(|mu| {
            let ranked = order(mu);
            let mut sigma = vec![0; mu.len()];
            for (rank, &k) in first.iter().enumerate() {
                sigma[k] = ranked[rank];
            }
            sigma
        })
        .collect();
    Ok(MongeAssignment { sigmas })
}
