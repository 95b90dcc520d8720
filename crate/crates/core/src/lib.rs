//! Formal solutions of completely integrable bivariate Pfaffian systems
//! with normal crossings.
//!
//! The crate works over exact rationals with explicitly truncated power
//! series. Its main entry points are [`check_integrability`],
//! [`rank_reduce`], [`exponential_parts`] and [`formal_fundamental`].

pub mod echelon;
pub mod error;
pub mod io;
pub mod linalg;
pub mod moser;
pub mod ods;
pub mod rational;
pub mod series;
pub mod solve;
pub mod system;

pub use error::{Axis, Error, Result};
pub use io::SystemDocument;
pub use linalg::{QMatrix, QPoly};
pub use moser::{moser_rank, rank_reduce, theta_poly, Reduction, ReductionReport};
pub use ods::{associated_ods, exponential_parts_ods, ExponentialPart, OdsSystem};
pub use rational::Rational;
pub use series::{BiSeries, LaurentMatrix, SeriesMatrix, Window, EXACT};
pub use solve::{
    exponential_parts, formal_fundamental, katz_pair, true_poincare_rank, KatzPair, SolutionData,
};
pub use system::{apply_gauge, check_integrability, GaugeTransform, PfaffianSystem};
