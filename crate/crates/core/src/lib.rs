//! Numerical toolkit for incomplete Muntz systems on a sector: exponent
//! sequences, Fuchs-type Blaschke products, sequence surgery and the
//! biorthogonal functionals built from them.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// quadrature and Gamma coefficient tables are quoted at their published precision
#![allow(clippy::excessive_precision)]

pub mod biortho;
pub mod error;
pub mod fuchs;
pub mod parallel;
pub mod quadrature;
pub mod sequences;
pub mod special;
pub mod surgery;

pub use error::{MuntzError, Result};
pub use parallel::Execution;
