//! Completion, factorization, lifting and extension of finite-dimensional
//! symmetric operators with a prescribed number of negative eigenvalues.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] eigendecompositions, inertia, signatures and fractional powers
//! * [`completion`] minimal-index completion of a 2×2 symmetric block
//! * [`factor`] J-contractive factorizations
//! * [`lifting`] defect and link operators, column/row extensions and liftings
//! * [`quasicontraction`] extremal selfadjoint extensions of a symmetric column
//! * [`relations`] linear relations, Cayley transforms, Friedrichs and Kreĭn extensions
//! * [`io`] JSON matrix and relation files
//! * [`verify`] randomized property suites used by the CLI

pub mod completion;
pub mod error;
pub mod factor;
pub mod io;
pub mod lifting;
pub mod quasicontraction;
pub mod relations;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use spectral::{
    DenseMatrix, Inertia, SpectralDecomposition, SymmetricMatrix, ToleranceProfile,
};
