//! Exact and floating scalar arithmetic, polynomials, linear algebra,
//! resultants and root finding.

pub mod matrix;
pub mod multipoly;
pub mod roots;
pub mod scalar;
pub mod unipoly;

pub use matrix::{DenseMatrix, RankKernel};
pub use multipoly::{reduce_mod_quadrics, Exponents, MultiPoly, QuadricMode};
pub use roots::{poly_roots, RootCluster, DEFAULT_ROOT_TOL};
pub use scalar::{GaussRat, Scalar};
pub use unipoly::UniPoly;
