//! Pairwise quadratic cost on index tuples and the dense cost tensor.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MmotError, Result};
use crate::measures::Instance;
use crate::scalar::Scalar;

/// Default cap on the number of tensor entries.
pub const DEFAULT_TENSOR_CAP: usize = 10_000_000;

const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Multi-index α selecting atom `α_i` of marginal `i`. Stored 0-based,
/// displayed and serialized 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexTuple(pub Vec<usize>);

impl IndexTuple {
    pub fn from_one_based(alpha: &[usize]) -> Self {
        Self(alpha.iter().map(|a| a - 1).collect())
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|a| a + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a + 1)?;
        }
        write!(f, ")")
    }
}

impl Serialize for IndexTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexTuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        if raw.contains(&0) {
            return Err(serde::de::Error::custom("index tuples are 1-based"));
        }
        Ok(Self::from_one_based(&raw))
    }
}

/// Which cost the tensor holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `Σ_{i<j} ‖x_i − x_j‖²`.
    #[default]
    PairwiseUnordered,
    /// `Σ_{i,j} ‖x_i − x_j‖²`, i.e. twice the unordered sum.
    PairwiseOrdered,
    /// `−‖Σ_i x_i‖²`.
    NegSquaredSum,
}

impl Convention {
    pub fn eval<T: Scalar>(self, points: &[Vec<T>]) -> Result<T> {
        match self {
            Convention::PairwiseUnordered => pairwise_cost(points),
            Convention::PairwiseOrdered => Ok(pairwise_cost(points)? * T::from_count(2)),
            Convention::NegSquaredSum => negsum_cost(points),
        }
    }
}

fn check_dims<T>(points: &[Vec<T>]) -> Result<usize> {
    let d = points.first().map_or(0, Vec::len);
    match points.iter().find(|p| p.len() != d) {
        Some(p) => Err(MmotError::DimensionMismatch {
            expected: d,
            found: p.len(),
        }),
        None => Ok(d),
    }
}

fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        let diff = x.clone() - y.clone();
        acc + diff.clone() * diff
    })
}

/// `Σ_{i<j} ‖x_i − x_j‖²`.
pub fn pairwise_cost<T: Scalar>(points: &[Vec<T>]) -> Result<T> {
    check_dims(points)?;
    let mut total = T::zero();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            total = total + squared_distance(a, b);
        }
    }
    Ok(total)
}

/// `−‖Σ_i x_i‖²`.
pub fn negsum_cost<T: Scalar>(points: &[Vec<T>]) -> Result<T> {
    let d = check_dims(points)?;
    let mut sum = vec![T::zero(); d];
    for p in points {
        for (acc, x) in sum.iter_mut().zip(p) {
            *acc = acc.clone() + x.clone();
        }
    }
    let norm2 = sum.into_iter().fold(T::zero(), |acc, s| acc + s.clone() * s);
    Ok(-norm2)
}

/// Dense cost tensor over `{0..m}^N`, row-major with `α_1` slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTensor<T> {
    values: Vec<T>,
    n_marginals: usize,
    support_size: usize,
    convention: Convention,
}

impl<T: Scalar> CostTensor<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn n_marginals(&self) -> usize {
        self.n_marginals
    }

    pub fn support_size(&self) -> usize {
        self.support_size
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, alpha: &IndexTuple) -> &T {
        &self.values[self.index_of(alpha)]
    }

    pub fn index_of(&self, alpha: &IndexTuple) -> usize {
        flat_index(&alpha.0, self.support_size)
    }

    pub fn tuple_at(&self, index: usize) -> IndexTuple {
        tuple_at(index, self.n_marginals, self.support_size)
    }
}

pub(crate) fn flat_index(alpha: &[usize], m: usize) -> usize {
    alpha.iter().fold(0, |acc, &a| acc * m + a)
}

pub(crate) fn tuple_at(mut index: usize, n: usize, m: usize) -> IndexTuple {
    let mut alpha = vec![0; n];
    for slot in alpha.iter_mut().rev() {
        *slot = index % m;
        index /= m;
    }
    IndexTuple(alpha)
}

/// Converts every coordinate of the instance into the scalar field.
pub fn scalar_points<T: Scalar>(instance: &Instance) -> Vec<Vec<Vec<T>>> {
    instance
        .marginals()
        .iter()
        .map(|mu| {
            mu.points()
                .iter()
                .map(|p| p.iter().map(|&x| T::from_coordinate(x)).collect())
                .collect()
        })
        .collect()
}

/// Materializes the cost of every index tuple, refusing tensors above `cap`.
pub fn build_tensor_capped<T: Scalar>(
    instance: &Instance,
    convention: Convention,
    cap: usize,
) -> Result<CostTensor<T>> {
    let n = instance.n_marginals();
    let m = instance.support_size();
    let entries = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if entries > cap as u128 {
        return Err(MmotError::SizeOverflow { entries, cap });
    }
    let entries = entries as usize;
    let points = scalar_points::<T>(instance);
    let eval = |index: usize| {
        let alpha = tuple_at(index, n, m);
        let selected: Vec<Vec<T>> = alpha
            .0
            .iter()
            .enumerate()
            .map(|(i, &a)| points[i][a].clone())
            .collect();
        convention.eval(&selected)
    };
    let values = if entries >= PARALLEL_THRESHOLD {
        (0..entries).into_par_iter().map(eval).collect::<Result<Vec<_>>>()?
    } else {
        (0..entries).map(eval).collect::<Result<Vec<_>>>()?
    };
    Ok(CostTensor {
        values,
        n_marginals: n,
        support_size: m,
        convention,
    })
}

pub fn build_tensor<T: Scalar>(instance: &Instance, convention: Convention) -> Result<CostTensor<T>> {
    build_tensor_capped(instance, convention, DEFAULT_TENSOR_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_one;
    use crate::scalar::Rational;

    fn v(x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    #[test]
    fn pairwise_single_pair_and_zero() {
        assert_eq!(pairwise_cost(&[v(&[0.0, 0.0]), v(&[3.0, 4.0])]).unwrap(), 25.0);
        let p = v(&[1.5, -2.0]);
        assert_eq!(pairwise_cost(&[p.clone(), p.clone(), p]).unwrap(), 0.0);
    }

    #[test]
    fn pairwise_fixture_triple() {
        let a = [0.4417, -4.7665];
        let b = [-2.1054, -3.9784];
        let c = [-1.1644, -2.386];
        let d2 = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        let oracle = d2(a, b) + d2(a, c) + d2(b, c);
        assert!((oracle - 18.776376).abs() < 1e-6);
        let got = pairwise_cost(&[v(&a), v(&b), v(&c)]).unwrap();
        assert!((got - oracle).abs() < 1e-12);
    }

    #[test]
    fn negsum_examples() {
        assert_eq!(negsum_cost(&[v(&[1.0, 0.0]), v(&[-1.0, 0.0])]).unwrap(), 0.0);
        assert_eq!(negsum_cost(&[v(&[3.0, 4.0])]).unwrap(), -25.0);
        let e1 = v(&[1.0, 0.0]);
        assert_eq!(negsum_cost(&[e1.clone(), e1.clone(), e1]).unwrap(), -9.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            pairwise_cost(&[v(&[1.0]), v(&[1.0, 2.0])]),
            Err(MmotError::DimensionMismatch { .. })
        ));
        assert!(negsum_cost(&[v(&[1.0]), v(&[1.0, 2.0])]).is_err());
    }

    #[test]
    fn small_tensor_exhaustive() {
        let inst = Instance::from_points(vec![
            vec![vec![0.0, 1.0], vec![2.0, -1.0]],
            vec![vec![0.5, 0.5], vec![-3.0, 2.0]],
        ])
        .unwrap();
        let t = build_tensor::<f64>(&inst, Convention::PairwiseUnordered).unwrap();
        assert_eq!(t.len(), 4);
        for idx in 0..4 {
            let alpha = t.tuple_at(idx);
            assert_eq!(t.index_of(&alpha), idx);
            let pts = vec![
                inst.point(0, alpha.0[0]).to_vec(),
                inst.point(1, alpha.0[1]).to_vec(),
            ];
            assert_eq!(t.values()[idx], pairwise_cost(&pts).unwrap());
        }
        // α_1 slowest.
        assert_eq!(t.tuple_at(1), IndexTuple(vec![0, 1]));
    }

    #[test]
    fn example_one_tensor() {
        let t = build_tensor::<f64>(&example_one(), Convention::PairwiseUnordered).unwrap();
        assert_eq!(t.len(), 27);
        let c113 = *t.at(&IndexTuple::from_one_based(&[1, 1, 3]));
        assert!((c113 - 18.776376).abs() < 1e-6);
        assert!(t.values().iter().all(|c| *c >= 0.0 && c.is_finite()));
        let ordered = build_tensor::<f64>(&example_one(), Convention::PairwiseOrdered).unwrap();
        assert_eq!(ordered.values()[5], 2.0 * t.values()[5]);
    }

    #[test]
    fn exact_tensor_matches_float() {
        let f = build_tensor::<f64>(&example_one(), Convention::PairwiseUnordered).unwrap();
        let r = build_tensor::<Rational>(&example_one(), Convention::PairwiseUnordered).unwrap();
        for (a, b) in f.values().iter().zip(r.values()) {
            assert!((a - b.to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn overflow_guard() {
        let inst = Instance::from_points(vec![vec![vec![0.0]; 10]; 8]).unwrap();
        assert!(matches!(
            build_tensor::<f64>(&inst, Convention::PairwiseUnordered),
            Err(MmotError::SizeOverflow { .. })
        ));
        let ex = example_one();
        assert!(build_tensor_capped::<f64>(&ex, Convention::PairwiseUnordered, 26).is_err());
        assert!(build_tensor_capped::<f64>(&ex, Convention::PairwiseUnordered, 27).is_ok());
    }

    #[test]
    fn tuple_serde_is_one_based() {
        let t = IndexTuple::from_one_based(&[1, 1, 3]);
        assert_eq!(t.0, vec![0, 0, 2]);
        assert_eq!(serde_json::to_string(&t).unwrap(), "[1,1,3]");
        assert_eq!(t.to_string(), "(1,1,3)");
        assert!(serde_json::from_str::<IndexTuple>("[0,1]").is_err());
    }
}
