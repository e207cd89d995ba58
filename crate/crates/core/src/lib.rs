//! Vectorial bundles, twisted K-theory cocycles and finite-dimensional
//! Fredholm families over simplicial complexes.

pub mod cech;
pub mod error;
pub mod fredholm;
pub mod io;
pub mod ledger;
pub mod linalg;
pub mod simplicial;
pub mod tolerance;
pub mod vectorial;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
