//! Primal simplex over transport polytopes.
//!
//! The multi-marginal problem is the LP
//!
//! ```text
//! minimize   Σ_α c_α x_α
//! subject to Σ_{α : α_i = k} x_α = w_i(k)   for every axis i and atom k
//!            x ≥ 0
//! ```
//!
//! with one variable per index tuple. The N·m equality rows have rank
//! `Σ_i (n_i − 1) + 1`; the last row of every axis but the first is dropped,
//! so bases have exactly that many columns and vertex plans never have more
//! positive entries. The starting vertex is the north-west corner plan, which
//! for uniform marginals of equal size is the identity Monge coupling.

mod certificate;
mod coupling;
mod tableau;

pub use certificate::{check_certificate, dual_value, verify_certificate, CertificateCheck, DualCertificate};
pub use coupling::{verify_against, verify_coupling, Coupling, CouplingReport};

use serde::{Deserialize, Serialize};

use crate::cost::{CostTensor, IndexTuple};
use crate::error::{MmotError, Result};
use crate::measures::Instance;
use crate::scalar::{Scalar, SolveMode};
use tableau::Tableau;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexConfig {
    /// Pivots chosen by most-negative reduced cost before switching to
    /// Bland's rule.
    pub dantzig_pivots: usize,
    pub iteration_limit: usize,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            dantzig_pivots: 500,
            iteration_limit: 100_000,
        }
    }
}

/// Transport LP over a product of finite axes with prescribed axis weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportLp<T> {
    sizes: Vec<usize>,
    weights: Vec<Vec<T>>,
    costs: Vec<T>,
    row_offsets: Vec<usize>,
}

impl<T: Scalar> TransportLp<T> {
    /// `costs` is dense and row-major over `sizes` (first axis slowest).
    pub fn new(weights: Vec<Vec<T>>, costs: Vec<T>) -> Result<Self> {
        let sizes: Vec<usize> = weights.iter().map(Vec::len).collect();
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(MmotError::EmptyMeasure);
        }
        let columns: usize = sizes.iter().product();
        if costs.len() != columns {
            return Err(MmotError::SupportSizeMismatch {
                expected: columns,
                found: costs.len(),
            });
        }
        let mut row_offsets = Vec::with_capacity(sizes.len());
        let mut next = 0;
        for (i, &n) in sizes.iter().enumerate() {
            row_offsets.push(next);
            next += if i == 0 { n } else { n - 1 };
        }
        Ok(Self {
            sizes,
            weights,
            costs,
            row_offsets,
        })
    }

    /// N uniform axes of size m with the given cost tensor.
    pub fn uniform(tensor: &CostTensor<T>) -> Self {
        let m = tensor.support_size();
        let weights = vec![vec![T::recip_count(m); m]; tensor.n_marginals()];
        Self::new(weights, tensor.values().to_vec()).expect("tensor shape is consistent")
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn costs(&self) -> &[T] {
        &self.costs
    }

    pub fn n_columns(&self) -> usize {
        self.costs.len()
    }

    /// Rank of the constraint system, `Σ_i (n_i − 1) + 1`.
    pub fn n_rows(&self) -> usize {
        self.sizes.iter().map(|n| n - 1).sum::<usize>() + 1
    }

    pub fn tuple_of(&self, mut col: usize) -> IndexTuple {
        let mut alpha = vec![0; self.sizes.len()];
        for (slot, &n) in alpha.iter_mut().zip(&self.sizes).rev() {
            *slot = col % n;
            col /= n;
        }
        IndexTuple(alpha)
    }

    pub fn column_of(&self, alpha: &IndexTuple) -> usize {
        alpha
            .0
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&a, &n)| acc * n + a)
    }

    pub fn cost_at(&self, alpha: &IndexTuple) -> T {
        self.costs[self.column_of(alpha)].clone()
    }

    fn row_of(&self, axis: usize, atom: usize) -> Option<usize> {
        if axis > 0 && atom == self.sizes[axis] - 1 {
            None
        } else {
            Some(self.row_offsets[axis] + atom)
        }
    }

    fn column_rows(&self, col: usize) -> Vec<usize> {
        self.tuple_of(col)
            .0
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| self.row_of(i, a))
            .collect()
    }

    fn rhs(&self) -> Vec<T> {
        let mut b = Vec::with_capacity(self.n_rows());
        for (i, w) in self.weights.iter().enumerate() {
            let kept = if i == 0 { w.len() } else { w.len() - 1 };
            b.extend(w[..kept].iter().cloned());
        }
        b
    }

    /// North-west corner plan: a vertex of the polytope, returned as
    /// `(column, weight)` pairs with positive weight.
    pub fn northwest_corner(&self) -> Vec<(usize, T)> {
        let tol = T::feas_tol();
        let n = self.sizes.len();
        let mut idx = vec![0; n];
        let mut remaining: Vec<T> = self.weights.iter().map(|w| w[0].clone()).collect();
        let mut plan = Vec::new();
        loop {
            let (argmin, q) = remaining
                .iter()
                .enumerate()
                .fold(None::<(usize, &T)>, |best, (i, r)| match best {
                    Some((_, b)) if *b <= *r => best,
                    _ => Some((i, r)),
                })
                .map(|(i, r)| (i, r.clone()))
                .expect("at least one axis");
            if q > tol {
                plan.push((self.column_of(&IndexTuple(idx.clone())), q.clone()));
            }
            let mut finished = false;
            for i in 0..n {
                remaining[i] = remaining[i].clone() - q.clone();
                if i == argmin || remaining[i] <= tol {
                    idx[i] += 1;
                    if idx[i] == self.sizes[i] {
                        finished = true;
                    } else {
                        remaining[i] = self.weights[i][idx[i]].clone();
                    }
                }
            }
            if finished {
                return plan;
            }
        }
    }

    /// Solves the LP from the north-west corner vertex.
    pub fn solve(&self, config: &SimplexConfig) -> Result<LpSolution<T>> {
        let start: Vec<usize> = self.northwest_corner().into_iter().map(|(c, _)| c).collect();
        self.solve_from(&start, config)
    }

    /// Solves the LP from a vertex whose positive columns are `start`.
    pub fn solve_from(&self, start: &[usize], config: &SimplexConfig) -> Result<LpSolution<T>> {
        let mut tab = Tableau::with_basis(self, start)?;
        let mut iterations = 0;
        // Float runs re-factor the final basis from the original data and
        // continue if roundoff hid an improving column.
        let refactor_rounds = if T::is_exact() { 0 } else { 3 };
        let mut round = 0;
        loop {
            while let Some(col) = tab.entering(iterations >= config.dantzig_pivots) {
                if iterations >= config.iteration_limit {
                    return Err(MmotError::IterationLimit(iterations));
                }
                let row = tab
                    .leaving(col)
                    .ok_or_else(|| MmotError::Infeasible("unbounded improving direction".into()))?;
                tab.step(row, col)?;
                iterations += 1;
            }
            if round == refactor_rounds {
                break;
            }
            round += 1;
            let basis = tab.basis().to_vec();
            tab = Tableau::with_basis(self, &basis)?;
            if tab.entering(true).is_none() {
                break;
            }
        }
        self.finish(&tab, iterations)
    }

    fn finish(&self, tab: &Tableau<T>, iterations: usize) -> Result<LpSolution<T>> {
        let tol = T::feas_tol();
        let entries = tab
            .basis()
            .iter()
            .enumerate()
            .filter(|(row, _)| *tab.rhs(*row) > tol)
            .map(|(row, &col)| (self.tuple_of(col), tab.rhs(row).clone()))
            .collect();
        let coupling = Coupling::new(entries);
        let value = coupling
            .entries()
            .iter()
            .fold(T::zero(), |acc, (a, w)| acc + self.cost_at(a) * w.clone());

        let certificate = self.extract_dual(tab);
        verify_certificate(self, &coupling, &certificate)?;
        debug_assert!(tab.basis().iter().all(|&c| tab.reduced_cost(c).is_negligible(&T::opt_tol())));

        Ok(LpSolution {
            coupling,
            value,
            certificate,
            iterations,
            mode: T::MODE,
            basis: tab.basis().to_vec(),
        })
    }

    fn extract_dual(&self, tab: &Tableau<T>) -> DualCertificate<T> {
        let y = tab.duals();
        let potentials: Vec<Vec<T>> = self
            .sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                (0..n)
                    .map(|k| self.row_of(i, k).map_or_else(T::zero, |r| y[r].clone()))
                    .collect()
            })
            .collect();
        let objective_match = dual_value(&self.weights, &potentials);
        DualCertificate {
            potentials,
            objective_match,
        }
    }
}

/// Optimal vertex of a transport LP with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub coupling: Coupling<T>,
    /// `⟨C, coupling⟩`, recomputed from the returned plan.
    pub value: T,
    pub certificate: DualCertificate<T>,
    pub iterations: usize,
    pub mode: SolveMode,
    /// Final basic columns, including degenerate ones.
    pub basis: Vec<usize>,
}

/// Solves the multi-marginal problem for `instance` with the given tensor.
pub fn solve_lp<T: Scalar>(
    instance: &Instance,
    tensor: &CostTensor<T>,
    config: &SimplexConfig,
) -> Result<LpSolution<T>> {
    if tensor.n_marginals() != instance.n_marginals() || tensor.support_size() != instance.support_size() {
        return Err(MmotError::SupportSizeMismatch {
            expected: instance.support_size().pow(instance.n_marginals() as u32),
            found: tensor.len(),
        });
    }
    TransportLp::uniform(tensor).solve(config)
}
