//! Computer algebra for finitely presented associative algebras: normal
//! forms, point varieties over finite fields, local rings at simple modules,
//! phase spaces, Euclidean metrics and numeric geodesics on affine charts.

pub mod error;
pub mod exec;
pub mod field;
pub mod freealg;
pub mod linalg;
pub mod rewrite;
pub mod algebra;
pub mod points;
pub mod localrep;
pub mod phase;
pub mod metric;
pub mod geodesic;

pub use error::{Error, Result};
pub use field::{Field, Scalar};
pub use freealg::{parse_presentation, NcPoly, Presentation, Word};
