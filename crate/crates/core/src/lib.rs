//! Spectral workbench for curved noncommutative tori.

pub mod algebra;
pub mod curvature;
pub mod error;
pub mod gns;
pub mod laplace;
pub mod metric;
pub mod psido;
pub mod quadrature;
pub mod spectral;

pub use algebra::{CoeffRecord, Element, MultiIndex, Theta, C64};
pub use error::{Error, Result};

/// Library version recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
