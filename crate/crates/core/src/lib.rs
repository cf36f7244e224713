//! Discrete two-body Dirac-Coulomb operators on periodic grids.

pub mod assembly;
pub mod clifford;
pub mod coupling;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod quadrature;
pub mod schur;
pub mod singular;
pub mod snapshot;
pub mod suites;
pub mod symbols;
pub mod verification;

pub use clifford::{CMatrix16, CMatrix2, CMatrix4, CVector16, CVector4, C64};
pub use coupling::{admissible, herbst_constant, riesz_constant, CouplingReport};
pub use error::{Error, Result};
pub use grid::{GridSpec, Multiplier, ScalarField, SpinorField};
pub use symbols::{MomentumVec, SymbolSet};
pub use assembly::{assemble_extension, assemble_hrel, Extension};
pub use schur::{BlockOperator, FactoredOperator};
pub use singular::CZKernel;
pub use suites::{Check, Suite, SuiteReport};
