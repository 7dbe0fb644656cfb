//! Dense Gauss-Jordan tableau for the equality-form transport LP.
//!
//! Layout per constraint row: `[A (n columns) | B⁻¹ (r columns) | rhs]`.
//! The objective row holds reduced costs over the same columns, `−y` over
//! the `B⁻¹` block, and minus the objective value in the rhs slot.

use super::TransportLp;
use crate::error::{MmotError, Result};
use crate::scalar::Scalar;

pub(crate) struct Tableau<T> {
    rows: usize,
    vars: usize,
    width: usize,
    cells: Vec<T>,
    objective: Vec<T>,
    /// Basic column per row.
    basis: Vec<usize>,
}

impl<T: Scalar> Tableau<T> {
    /// Builds the tableau for a basis containing `initial` (independent
    /// columns carrying the starting point), completed with further columns
    /// until every row has a basic variable.
    pub(crate) fn with_basis(lp: &TransportLp<T>, initial: &[usize]) -> Result<Self> {
        let rows = lp.n_rows();
        let vars = lp.n_columns();
        let width = vars + rows + 1;
        let mut cells = vec![T::zero(); rows * width];
        for col in 0..vars {
            for row in lp.column_rows(col) {
                cells[row * width + col] = T::one();
            }
        }
        for (row, b) in lp.rhs().into_iter().enumerate() {
            cells[row * width + vars + row] = T::one();
            cells[row * width + width - 1] = b;
        }
        let mut tab = Self {
            rows,
            vars,
            width,
            cells,
            objective: vec![T::zero(); width],
            basis: vec![usize::MAX; rows],
        };

        let mut assigned = vec![false; rows];
        for &col in initial {
            if let Some(row) = tab.best_free_row(col, &assigned) {
                tab.pivot(row, col);
                assigned[row] = true;
            }
        }
        for row in 0..rows {
            if assigned[row] {
                continue;
            }
            let tol = T::pivot_tol();
            let col = (0..vars)
                .find(|&c| tab.cell(row, c).abs() > tol && !tab.basis.contains(&c))
                .ok_or_else(|| {
                    MmotError::Infeasible(format!("constraint row {row} is linearly dependent"))
                })?;
            tab.pivot(row, col);
            assigned[row] = true;
        }
        tab.clean_rhs()?;

        let costs = lp.costs();
        let mut objective: Vec<T> = (0..width)
            .map(|c| if c < vars { costs[c].clone() } else { T::zero() })
            .collect();
        for row in 0..rows {
            let cb = costs[tab.basis[row]].clone();
            if cb.is_zero() {
                continue;
            }
            for c in 0..width {
                let a = tab.cell(row, c);
                if !a.is_zero() {
                    objective[c] = objective[c].clone() - cb.clone() * a.clone();
                }
            }
        }
        tab.objective = objective;
        Ok(tab)
    }

    fn best_free_row(&self, col: usize, assigned: &[bool]) -> Option<usize> {
        let tol = T::pivot_tol();
        let mut best: Option<(usize, T)> = None;
        for row in (0..self.rows).filter(|&r| !assigned[r]) {
            let a = self.cell(row, col).abs();
            if a > tol && best.as_ref().is_none_or(|(_, b)| a > *b) {
                best = Some((row, a));
            }
        }
        best.map(|(r, _)| r)
    }

    fn cell(&self, row: usize, col: usize) -> &T {
        &self.cells[row * self.width + col]
    }

    pub(crate) fn rhs(&self, row: usize) -> &T {
        self.cell(row, self.width - 1)
    }

    pub(crate) fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub(crate) fn reduced_cost(&self, col: usize) -> &T {
        &self.objective[col]
    }

    /// Simplex multipliers `y = c_B B⁻¹`, one per kept constraint row.
    pub(crate) fn duals(&self) -> Vec<T> {
        (0..self.rows)
            .map(|r| -self.objective[self.vars + r].clone())
            .collect()
    }

    /// Clamps roundoff in the basic values and rejects genuinely negative ones.
    fn clean_rhs(&mut self) -> Result<()> {
        let tol = T::feas_tol();
        for row in 0..self.rows {
            let idx = row * self.width + self.width - 1;
            let v = &self.cells[idx];
            if v.is_negative() {
                if -v.clone() > tol {
                    return Err(MmotError::Infeasible(format!(
                        "basic value {v} in row {row} is negative"
                    )));
                }
                self.cells[idx] = T::zero();
            }
        }
        Ok(())
    }

    pub(crate) fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.cells[row * w + col].clone();
        let pivot_row: Vec<T> = self.cells[row * w..(row + 1) * w]
            .iter()
            .map(|x| if x.is_zero() { T::zero() } else { x.clone() / p.clone() })
            .collect();
        let nonzero: Vec<usize> = (0..w).filter(|&c| !pivot_row[c].is_zero()).collect();

        let eliminate = |target: &mut [T]| {
            let f = target[col].clone();
            if f.is_zero() {
                return;
            }
            for &c in &nonzero {
                target[c] = target[c].clone() - f.clone() * pivot_row[c].clone();
            }
            target[col] = T::zero();
        };
        for r in 0..self.rows {
            if r != row {
                eliminate(&mut self.cells[r * w..(r + 1) * w]);
            }
        }
        eliminate(&mut self.objective);
        self.cells[row * w..(row + 1) * w].clone_from_slice(&pivot_row);
        self.cells[row * w + col] = T::one();
        self.basis[row] = col;
    }

    /// Entering column: most negative reduced cost (Dantzig) or the lowest
    /// index with negative reduced cost (Bland).
    pub(crate) fn entering(&self, bland: bool) -> Option<usize> {
        let threshold = -T::opt_tol();
        let mut best: Option<usize> = None;
        for c in 0..self.vars {
            let d = &self.objective[c];
            if *d < threshold {
                if bland {
                    return Some(c);
                }
                if best.is_none_or(|b| *d < self.objective[b]) {
                    best = Some(c);
                }
            }
        }
        best
    }

    /// Minimum-ratio row for `col`; ties go to the smallest basic column.
    pub(crate) fn leaving(&self, col: usize) -> Option<usize> {
        let ptol = T::pivot_tol();
        let tie = T::feas_tol();
        let mut best: Option<(usize, T)> = None;
        for row in 0..self.rows {
            let a = self.cell(row, col);
            if *a <= ptol {
                continue;
            }
            let ratio = self.rhs(row).clone() / a.clone();
            best = match best {
                None => Some((row, ratio)),
                Some((b, r)) => {
                    let diff = ratio.clone() - r.clone();
                    if diff < -tie.clone() || (diff.abs() <= tie && self.basis[row] < self.basis[b]) {
                        Some((row, ratio))
                    } else {
                        Some((b, r))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    pub(crate) fn step(&mut self, row: usize, col: usize) -> Result<()> {
        self.pivot(row, col);
        self.clean_rhs()
    }
}
