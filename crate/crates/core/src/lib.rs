//! Finite-dimensional modular theory for bipartite states: Schmidt data,
//! matrix *-algebras, Tomita–Takesaki objects, and doubles of observables.

pub mod algebra;
pub mod doubles;
pub mod error;
pub mod modular;
pub mod numerics;
pub mod random;
pub mod states;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, ComplexVector, Tolerance, C64};
