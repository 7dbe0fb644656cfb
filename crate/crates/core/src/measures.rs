//! Uniform empirical measures and multi-marginal problem instances.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MmotError, Result};

/// Uniform probability measure on `m` points of R^d.
///
/// Atom order is the identity of the atoms and is never changed. Duplicate
/// points are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or(MmotError::EmptyMeasure)?;
        let dim = first.len();
        if dim == 0 {
            return Err(MmotError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for p in &points {
            if p.len() != dim {
                return Err(MmotError::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
        }
        Ok(Self { points, dim })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean(&self) -> Vec<f64> {
        let m = self.len() as f64;
        let mut mean = vec![0.0; self.dim];
        for p in &self.points {
            for (acc, x) in mean.iter_mut().zip(p) {
                *acc += x;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m);
        mean
    }

    /// `(1/m) Σ_k ‖x^k‖²`.
    pub fn second_moment(&self) -> f64 {
        let total: f64 = self
            .points
            .iter()
            .map(|p| p.iter().map(|x| x * x).sum::<f64>())
            .sum();
        total / self.len() as f64
    }

    /// Shifts every atom by `-shift`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| p.iter().zip(shift).map(|(x, s)| x - s).collect())
            .collect();
        Self {
            points,
            dim: self.dim,
        }
    }
}

/// N uniform empirical marginals sharing the support size `m` and dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    marginals: Vec<EmpiricalMeasure>,
}

impl Instance {
    /// Builds and validates an instance.
    pub fn new(marginals: Vec<EmpiricalMeasure>) -> Result<Self> {
        validate(Self { marginals })
    }

    /// Builds an instance from raw coordinates `[marginal][atom][coord]`.
    pub fn from_points(points: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let marginals = points
            .into_iter()
            .map(EmpiricalMeasure::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(marginals)
    }

    pub fn marginals(&self) -> &[EmpiricalMeasure] {
        &self.marginals
    }

    pub fn marginal(&self, i: usize) -> &EmpiricalMeasure {
        &self.marginals[i]
    }

    /// Number of marginals N.
    pub fn n_marginals(&self) -> usize {
        self.marginals.len()
    }

    /// Atoms per marginal m.
    pub fn support_size(&self) -> usize {
        self.marginals[0].len()
    }

    pub fn dim(&self) -> usize {
        self.marginals[0].dim()
    }

    /// Coordinates of atom `k` of marginal `i`.
    pub fn point(&self, i: usize, k: usize) -> &[f64] {
        self.marginals[i].point(k)
    }

    /// Raw coordinates `[marginal][atom][coord]`.
    pub fn to_points(&self) -> Vec<Vec<Vec<f64>>> {
        self.marginals.iter().map(|mu| mu.points.clone()).collect()
    }
}

/// Checks every instance invariant and returns the instance unchanged.
pub fn validate(instance: Instance) -> Result<Instance> {
    let n = instance.marginals.len();
    if n < 2 {
        return Err(MmotError::TooFewMarginals(n));
    }
    let first = &instance.marginals[0];
    if first.is_empty() {
        return Err(MmotError::EmptyMeasure);
    }
    let (m, d) = (first.len(), first.dim());
    for (i, mu) in instance.marginals.iter().enumerate() {
        if mu.is_empty() {
            return Err(MmotError::EmptyMeasure);
        }
        if mu.dim() != d {
            return Err(MmotError::DimensionMismatch {
                expected: d,
                found: mu.dim(),
            });
        }
        if mu.len() != m {
            return Err(MmotError::SupportSizeMismatch {
                expected: m,
                found: mu.len(),
            });
        }
        for (k, p) in mu.points.iter().enumerate() {
            if p.len() != d {
                return Err(MmotError::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(MmotError::NonFiniteCoordinate { marginal: i, atom: k });
            }
        }
    }
    Ok(instance)
}

/// Shifts every marginal to mean zero. Returns the centered instance and the
/// removed means, so that `centered.point(i, k) + means[i] == point(i, k)`.
pub fn center(instance: &Instance) -> (Instance, Vec<Vec<f64>>) {
    let means: Vec<Vec<f64>> = instance.marginals.iter().map(|mu| mu.mean()).collect();
    let marginals = instance
        .marginals
        .iter()
        .zip(&means)
        .map(|(mu, mean)| mu.translated(mean))
        .collect();
    (Instance { marginals }, means)
}

/// Per-marginal second moments `S_i = (1/m) Σ_k ‖x_i^k‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub per_marginal: Vec<f64>,
    pub total: f64,
}

pub fn moments(instance: &Instance) -> Moments {
    let per_marginal: Vec<f64> = instance
        .marginals
        .iter()
        .map(EmpiricalMeasure::second_moment)
        .collect();
    let total = per_marginal.iter().sum();
    Moments {
        per_marginal,
        total,
    }
}

/// On-disk instance format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub marginals: Vec<Vec<Vec<f64>>>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        let check = |field, declared, actual| {
            if declared == actual {
                Ok(())
            } else {
                Err(MmotError::HeaderMismatch {
                    field,
                    declared,
                    actual,
                })
            }
        };
        check("N", self.n, self.marginals.len())?;
        let instance = Instance::from_points(self.marginals)?;
        check("m", self.m, instance.support_size())?;
        check("d", self.d, instance.dim())?;
        Ok(instance)
    }
}

impl From<&Instance> for InstanceFile {
    fn from(instance: &Instance) -> Self {
        Self {
            d: instance.dim(),
            n: instance.n_marginals(),
            m: instance.support_size(),
            marginals: instance.to_points(),
        }
    }
}

pub fn parse_instance(json: &str) -> Result<Instance> {
    serde_json::from_str::<InstanceFile>(json)?.into_instance()
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from(instance)).expect("instance serializes")
}
