//! Wasserstein barycenters from optimal multi-marginal plans.
//!
//! An optimal plan for the pairwise quadratic cost pushed forward under the
//! mean map `B(x) = (1/N) Σ_i x_i` is a barycenter of the marginals with equal
//! weights, and `Σ_{i<j} ‖x_i − x_j‖² = N Σ_i ‖x_i − B(x)‖²` gives
//! `Σ_i W₂²(ν, μ_i) = value / N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::scalar_points;
use crate::error::{MmotError, Result};
use crate::measures::{EmpiricalMeasure, Instance};
use crate::scalar::Scalar;
use crate::simplex::{verify_coupling, Coupling, SimplexConfig, TransportLp};

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterAtom<T> {
    pub point: Vec<T>,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBarycenter<T> {
    pub atoms: Vec<BarycenterAtom<T>>,
    /// `Σ_i W₂²(ν, μ_i)`.
    pub functional_value: T,
}

impl<T: Scalar> DiscreteBarycenter<T> {
    pub fn total_weight(&self) -> T {
        self.atoms.iter().fold(T::zero(), |acc, a| acc + a.weight.clone())
    }

    pub fn to_file(&self) -> BarycenterFile {
        BarycenterFile {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomFile {
                    point: a.point.iter().map(Scalar::to_f64).collect(),
                    weight: a.weight.to_f64(),
                })
                .collect(),
            functional_value: self.functional_value.to_f64(),
        }
    }
}

/// Serialized barycenter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarycenterFile {
    pub atoms: Vec<AtomFile>,
    pub functional_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomFile {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// Anything that can act as the second argument of [`w2_squared`].
pub trait WeightedSupport<T> {
    fn weighted_atoms(&self) -> (Vec<Vec<T>>, Vec<T>);
}

impl<T: Scalar> WeightedSupport<T> for EmpiricalMeasure {
    fn weighted_atoms(&self) -> (Vec<Vec<T>>, Vec<T>) {
        let points = self
            .points()
            .iter()
            .map(|p| p.iter().map(|&x| T::from_coordinate(x)).collect())
            .collect();
        (points, vec![T::recip_count(self.len()); self.len()])
    }
}

impl<T: Scalar> WeightedSupport<T> for [BarycenterAtom<T>] {
    fn weighted_atoms(&self) -> (Vec<Vec<T>>, Vec<T>) {
        (
            self.iter().map(|a| a.point.clone()).collect(),
            self.iter().map(|a| a.weight.clone()).collect(),
        )
    }
}

impl<T: Scalar> WeightedSupport<T> for DiscreteBarycenter<T> {
    fn weighted_atoms(&self) -> (Vec<Vec<T>>, Vec<T>) {
        self.atoms.as_slice().weighted_atoms()
    }
}

/// Pushes the plan forward under the mean map, merging atoms that coincide
/// within [`Scalar::merge_tol`] in every coordinate.
pub fn mean_map_atoms<T: Scalar>(instance: &Instance, coupling: &Coupling<T>) -> Vec<BarycenterAtom<T>> {
    let points = scalar_points::<T>(instance);
    let n = T::from_count(instance.n_marginals());
    let tol = T::merge_tol();
    let mut atoms: Vec<BarycenterAtom<T>> = Vec::new();
    for (alpha, w) in coupling.entries() {
        let mut mean = vec![T::zero(); instance.dim()];
        for (i, &a) in alpha.0.iter().enumerate() {
            for (acc, x) in mean.iter_mut().zip(&points[i][a]) {
                *acc = acc.clone() + x.clone();
            }
        }
        let mean: Vec<T> = mean.into_iter().map(|s| s / n.clone()).collect();
        match atoms
            .iter_mut()
            .find(|atom| atom.point.iter().zip(&mean).all(|(p, q)| p.near(q, &tol)))
        {
            Some(atom) => atom.weight = atom.weight.clone() + w.clone(),
            None => atoms.push(BarycenterAtom {
                point: mean,
                weight: w.clone(),
            }),
        }
    }
    atoms
}

/// Barycenter induced by a feasible plan, with its functional value.
pub fn extract_barycenter<T: Scalar>(
    instance: &Instance,
    coupling: &Coupling<T>,
    config: &SimplexConfig,
) -> Result<DiscreteBarycenter<T>> {
    let report = verify_coupling(instance, coupling);
    if !report.is_feasible(&T::feas_tol()) {
        return Err(MmotError::InfeasibleCoupling(report.max_violation.to_f64()));
    }
    let atoms = mean_map_atoms(instance, coupling);
    let functional_value = barycenter_functional(instance.marginals(), atoms.as_slice(), config)?;
    Ok(DiscreteBarycenter {
        atoms,
        functional_value,
    })
}

/// Squared 2-Wasserstein distance between a uniform empirical measure and a
/// weighted discrete measure, by solving the two-marginal transport LP.
pub fn w2_squared<T: Scalar, N: WeightedSupport<T> + ?Sized>(
    mu: &EmpiricalMeasure,
    nu: &N,
    config: &SimplexConfig,
) -> Result<T> {
    let (mu_points, mu_weights) = WeightedSupport::<T>::weighted_atoms(mu);
    let (nu_points, nu_weights) = nu.weighted_atoms();
    if nu_points.is_empty() {
        return Err(MmotError::EmptyMeasure);
    }
    if let Some(p) = nu_points.iter().find(|p| p.len() != mu.dim()) {
        return Err(MmotError::DimensionMismatch {
            expected: mu.dim(),
            found: p.len(),
        });
    }
    let costs = mu_points
        .iter()
        .flat_map(|x| {
            nu_points.iter().map(move |y| {
                x.iter().zip(y).fold(T::zero(), |acc, (a, b)| {
                    let d = a.clone() - b.clone();
                    acc + d.clone() * d
                })
            })
        })
        .collect();
    let lp = TransportLp::new(vec![mu_weights, nu_weights], costs)?;
    Ok(lp.solve(config)?.value)
}

/// `ν ↦ Σ_i W₂²(ν, μ_i)`.
pub fn barycenter_functional<T: Scalar, N: WeightedSupport<T> + Sync + ?Sized>(
    marginals: &[EmpiricalMeasure],
    nu: &N,
    config: &SimplexConfig,
) -> Result<T> {
    let parts = marginals
        .par_iter()
        .map(|mu| w2_squared::<T, N>(mu, nu, config))
        .collect::<Result<Vec<T>>>()?;
    Ok(parts.into_iter().fold(T::zero(), |acc, v| acc + v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{build_tensor, Convention};
    use crate::fixtures::example_one;
    use crate::monge::two_point_monge;
    use crate::scalar::Rational;
    use crate::simplex::solve_lp;

    fn cfg() -> SimplexConfig {
        SimplexConfig::default()
    }

    fn measure(points: &[&[f64]]) -> EmpiricalMeasure {
        EmpiricalMeasure::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn w2_basics() {
        let mu = measure(&[&[0.0, 1.0], &[2.0, -1.0], &[0.5, 0.5]]);
        assert!(w2_squared::<f64, _>(&mu, &mu, &cfg()).unwrap().abs() < 1e-12);
        let d0 = measure(&[&[0.0, 0.0]]);
        let d1 = measure(&[&[3.0, 4.0]]);
        assert_eq!(w2_squared::<f64, _>(&d0, &d1, &cfg()).unwrap(), 25.0);
        let a = measure(&[&[0.0], &[1.0]]);
        let b = measure(&[&[2.0], &[3.0]]);
        assert!((w2_squared::<f64, _>(&a, &b, &cfg()).unwrap() - 4.0).abs() < 1e-12);
        assert!(matches!(
            w2_squared::<f64, _>(&a, &d1, &cfg()),
            Err(MmotError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_marginal_grand_mean_is_variance() {
        let mu = measure(&[&[1.0, 2.0], &[3.0, -2.0], &[-1.0, 0.0], &[5.0, 4.0]]);
        let mean = mu.mean();
        let variance = mu.translated(&mean).second_moment();
        let nu = [BarycenterAtom {
            point: mean,
            weight: 1.0,
        }];
        let f = barycenter_functional::<f64, _>(std::slice::from_ref(&mu), &nu[..], &cfg()).unwrap();
        assert!((f - variance).abs() < 1e-12);
    }

    #[test]
    fn example_one_barycenter() {
        let ex = example_one();
        let t = build_tensor::<f64>(&ex, Convention::PairwiseUnordered).unwrap();
        let sol = solve_lp(&ex, &t, &cfg()).unwrap();
        let bary = extract_barycenter(&ex, &sol.coupling, &cfg()).unwrap();
        assert_eq!(bary.atoms.len(), 6);
        assert!(bary.atoms.len() <= 3 * 2 + 1);
        for ((alpha, _), atom) in sol.coupling.entries().iter().zip(&bary.atoms) {
            assert!((atom.weight - 1.0 / 6.0).abs() < 1e-12);
            for c in 0..2 {
                let mean = (0..3).map(|i| ex.point(i, alpha.0[i])[c]).sum::<f64>() / 3.0;
                assert!((atom.point[c] - mean).abs() < 1e-12);
            }
        }
        assert!((bary.functional_value - sol.value / 3.0).abs() <= 1e-8 * sol.value);
        assert!((bary.functional_value - 68.027 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn example_one_barycenter_exact() {
        let ex = example_one();
        let t = build_tensor::<Rational>(&ex, Convention::PairwiseUnordered).unwrap();
        let sol = solve_lp(&ex, &t, &cfg()).unwrap();
        let bary = extract_barycenter(&ex, &sol.coupling, &cfg()).unwrap();
        assert_eq!(bary.total_weight(), Rational::from_count(1));
        assert_eq!(bary.functional_value, sol.value / Rational::from_count(3));
    }

    #[test]
    fn identical_marginals_recover_marginal() {
        let pts = vec![vec![1.0, 1.0], vec![-2.0, 0.0], vec![0.0, 3.0]];
        let ex = Instance::from_points(vec![pts.clone(), pts.clone(), pts.clone()]).unwrap();
        let diag = crate::monge::MongeAssignment::identity(3, 3).coupling::<f64>();
        let bary = extract_barycenter(&ex, &diag, &cfg()).unwrap();
        let got: Vec<Vec<f64>> = bary.atoms.iter().map(|a| a.point.clone()).collect();
        assert_eq!(got, pts);
        assert_eq!(bary.functional_value, 0.0);
    }

    #[test]
    fn two_point_barycenter_atoms() {
        let ex = Instance::from_points(vec![
            vec![vec![0.0, 1.0], vec![2.0, 3.0]],
            vec![vec![-1.0, 4.0], vec![1.0, 0.0]],
            vec![vec![5.0, 5.0], vec![3.0, 2.0]],
        ])
        .unwrap();
        let (assignment, value) = two_point_monge::<f64>(&ex).unwrap();
        let bary = extract_barycenter(&ex, &assignment.coupling::<f64>(), &cfg()).unwrap();
        assert_eq!(bary.atoms.len(), 2);
        let (centered, means) = crate::measures::center(&ex);
        let shift: Vec<f64> = (0..2).map(|c| means.iter().map(|mu| mu[c]).sum::<f64>() / 3.0).collect();
        for (k, atom) in bary.atoms.iter().enumerate() {
            let alpha = &assignment.tuples()[k];
            for c in 0..2 {
                let x = (0..3).map(|i| centered.point(i, alpha.0[i])[c]).sum::<f64>() / 3.0 + shift[c];
                assert!((atom.point[c] - x).abs() < 1e-12);
            }
        }
        // The two atoms are symmetric about the mean of the marginal means.
        for c in 0..2 {
            let mid = (bary.atoms[0].point[c] + bary.atoms[1].point[c]) / 2.0;
            assert!((mid - shift[c]).abs() < 1e-12);
        }
        assert!((bary.functional_value - value / 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_coupling_rejected() {
        let ex = example_one();
        let bad = Coupling::new(vec![(crate::cost::IndexTuple(vec![0, 0, 0]), 1.0)]);
        assert!(matches!(
            extract_barycenter(&ex, &bad, &cfg()),
            Err(MmotError::InfeasibleCoupling(_))
        ));
    }

    #[test]
    fn coincident_means_merge() {
        // (0,2) and (2,0) on a line share the mean 1.
        let ex = Instance::from_points(vec![vec![vec![0.0], vec![2.0]], vec![vec![2.0], vec![0.0]]]).unwrap();
        let c = crate::monge::MongeAssignment::identity(2, 2).coupling::<f64>();
        let atoms = mean_map_atoms(&ex, &c);
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].weight, 1.0);
    }
}
