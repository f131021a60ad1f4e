//! Numerical building blocks: adaptive quadrature, bracketed root finding,
//! compensated summation.

pub mod quad;
pub mod roots;
pub mod sum;

pub use quad::{integrate, QuadOptions};
pub use roots::{brent, first_true, Bracket};
pub use sum::NeumaierSum;
