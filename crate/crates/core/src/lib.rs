//! Multi-marginal optimal transport between uniform empirical measures.
//!
//! Solves the transport problem with pairwise quadratic cost as a linear
//! program (in `f64` or exact rationals), decides whether a deterministic
//! (Monge) plan attains the optimum, extracts Wasserstein barycenters, and
//! runs seeded randomized searches for instances where no Monge plan is
//! optimal.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix the two
//! regimes used in practice.

pub mod barycenter;
pub mod cost;
pub mod error;
pub mod fixtures;
pub mod measures;
pub mod monge;
pub mod scalar;
pub mod search;
pub mod simplex;

pub use cost::{build_tensor, negsum_cost, pairwise_cost, Convention, CostTensor, IndexTuple};
pub use error::{MmotError, Result};
pub use measures::{center, moments, validate, EmpiricalMeasure, Instance, Moments};
pub use scalar::{Rational, Scalar, SolveMode};
pub use simplex::{solve_lp, verify_coupling, Coupling, DualCertificate, LpSolution, SimplexConfig};

pub type FloatTensor = CostTensor<f64>;
pub type ExactTensor = CostTensor<Rational>;
pub type FloatCoupling = Coupling<f64>;
pub type ExactCoupling = Coupling<Rational>;
pub type FloatSolution = LpSolution<f64>;
pub type ExactSolution = LpSolution<Rational>;
pub type FloatMongeReport = monge::MongeReport<f64>;
pub type ExactMongeReport = monge::MongeReport<Rational>;
pub type FloatBarycenter = barycenter::DiscreteBarycenter<f64>;
pub type ExactBarycenter = barycenter::DiscreteBarycenter<Rational>;
