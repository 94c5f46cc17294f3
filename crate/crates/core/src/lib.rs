//! Exact laboratory for product sets of shifted rationals.
//!
//! Sets of nonzero rationals are held in factored form, so k-fold product
//! sets, multiplicative energies and valuation lattices are computed without
//! rounding. Weighted energies, the sphere optimizer for Λ_k and the
//! Dirichlet mean-value quadrature are generic over [`Scalar`], with the
//! aliases below fixing the usual choices.

pub mod budget;
pub mod convolve;
pub mod dirichlet;
pub mod energy;
pub mod error;
pub mod generate;
pub mod lambda;
pub mod lattice;
pub mod rational;
pub mod scalar;
pub mod set;
pub mod structure;
pub mod sunit;

pub use budget::Budget;
pub use error::{Error, Result};
pub use rational::{BigFraction, FactoredRational};
pub use scalar::Scalar;
pub use set::{DoublingReport, RationalSet, SumsetResult};

/// Real weights, the default for energies and Λ estimation.
pub type Weights = energy::WeightVector<f64>;
/// Exact rational weights, used for oracle parity checks.
pub type ExactWeights = energy::WeightVector<num_rational::BigRational>;
pub type LambdaEstimate64 = lambda::LambdaEstimate<f64>;
pub type DirichletPolynomial64 = dirichlet::DirichletPolynomial<f64>;
