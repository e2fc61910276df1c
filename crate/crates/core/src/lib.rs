//! Exact and floating-point toolkit for the Gaudin-type integrable system on
//! `T*X`, where `X` is a smooth intersection of two quadrics in `P^{N-1}`.

pub mod algebra;
pub mod diffops;
pub mod error;
pub mod par;
pub mod higgs;
pub mod orthomodel;
pub mod phase;
pub mod sov;
pub mod verify;
pub mod verystable;

pub use error::{Error, Result};
