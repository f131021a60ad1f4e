//! Optimal two-barrier impulse dividend strategies for a diffusion whose
//! drift and volatility switch at a surplus threshold.
//!
//! The analytic core ([`model`], [`scale`], [`solver`], [`verify`], [`oracle`])
//! is generic over the scalar type; the Monte-Carlo engine in [`sim`] runs in
//! `f64`. Concrete `f64` aliases are exported at the crate root.

pub mod error;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod real;
pub mod scale;
pub mod sim;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use model::{classify_case, convexity_profile, CaseLabel, Curvature, SignRegime, SubCase};
pub use real::Real;
pub use scale::{value_upper_bound, Side};
pub use solver::{psi, solve_barriers, zeta, Direction, FamilyFn};
pub use verify::Verdict;

pub type Params = model::ModelParams<f64>;
pub type Constants = model::DerivedConstants<f64>;
pub type Levels = model::AuxLevels<f64>;
pub type Profile = model::ConvexityProfile<f64>;
pub type Scale = scale::ScaleContext<f64>;
pub type Landscape = solver::Landscape<f64>;
pub type Pair = solver::BarrierPair<f64>;
pub type Solution = solver::BarrierSolutionSet<f64>;
pub type ValueFunction = verify::ValueFunction<f64>;
pub type Report = verify::VerificationReport<f64>;
pub type GridSpec = oracle::GridSpec<f64>;
pub type OracleResult = oracle::OracleResult<f64>;
pub type Comparison = oracle::Comparison<f64>;
