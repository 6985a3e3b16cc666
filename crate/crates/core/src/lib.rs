//! Mixed finite-volume / finite-element schemes for the compressible viscous,
//! resistive MHD system, together with a diagnostics harness that measures the
//! discrete stability, conservation and consistency properties of the schemes.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fespace;
pub mod linalg;
pub mod mesh;
pub mod numerics;
pub mod quadrature;
pub mod scheme;

pub use error::{Error, Result};
