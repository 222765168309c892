//! Feasibility of population posterior-belief laws.
//!
//! A population of `n` Bayesian agents shares a prior over finitely many
//! states; an information structure gives each agent a private signal. The
//! induced law over anonymous empirical distributions of posteriors is
//! feasible exactly when it is a mean-preserving spread of the mixture of
//! its state-conditional expected measures. This crate decides that
//! condition exactly, builds information structures realizing feasible
//! laws, and evaluates polarization, symmetric product laws, and private
//! persuasion values on top of it.
//!
//! The core is generic over an exact [`Scalar`]; the aliases below fix it
//! to arbitrary-precision rationals.

pub mod error;
pub mod feasibility;
pub mod json;
pub mod measures;
pub mod mps;
pub mod persuasion;
pub mod polarization;
pub mod product;
pub mod scalar;
pub mod structures;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Arbitrary-precision rational, the default scalar.
pub type Rational = num_rational::BigRational;

pub type Belief = measures::Belief<Rational>;
pub type Prior = measures::Prior<Rational>;
pub type DiscreteMeasure = measures::DiscreteMeasure<Rational>;
pub type ScalarMeasure = measures::ScalarMeasure<Rational>;
pub type EmpiricalDistribution = measures::EmpiricalDistribution<Rational>;
pub type PopulationLaw = measures::PopulationLaw<Rational>;
pub type BinaryBase = mps::BinaryBase<Rational>;
pub type SpreadTarget = mps::SpreadTarget<Rational>;
pub type SpreadDecomposition = mps::SpreadDecomposition<Rational>;
pub type InfeasibilityCertificate = mps::InfeasibilityCertificate<Rational>;
pub type FeasibilityVerdict = feasibility::FeasibilityVerdict<Rational>;
pub type InformationStructure = structures::InformationStructure<Rational>;
pub type SymmetricScheme = structures::SymmetricScheme<Rational>;
pub type PolarizationReport = polarization::PolarizationReport<Rational>;
pub type SymmetricProduct = product::SymmetricProduct<Rational>;
pub type SenderUtility = persuasion::SenderUtility<Rational>;
pub type PersuasionInstance = persuasion::PersuasionInstance<Rational>;
pub type PersuasionSolution = persuasion::PersuasionSolution<Rational>;
