//! Exact dense linear algebra and univariate polynomials over the rationals.

mod poly;
mod qmat;

pub use poly::{CoprimeFactor, QPoly};
pub use qmat::QMatrix;
pub(crate) use qmat::{sylvester_operator, unvectorize, vectorize};
