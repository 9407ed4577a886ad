//! Numerical tensor calculus on almost contact metric structures.
//!
//! The crate evaluates tensor fields given as coordinate expressions over a
//! single chart, differentiates them exactly with forward-mode dual numbers,
//! builds the Levi-Civita connection of the metric and the semi-symmetric
//! non-metric connection obtained by adding the fundamental 2-form times the
//! structure vector, and measures the residual of every identity in the
//! check registry at seeded sample points.
//!
//! All numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! concrete aliases at the crate root fix `f64` as the default precision
//! used by reports and the CLI.

// Tensor contractions are written with explicit index arithmetic.
#![allow(clippy::needless_range_loop)]

use std::fmt;

use num_traits::{Float, FromPrimitive};

pub mod analytic;
pub mod connections;
pub mod expr;
pub mod fields;
pub mod identities;
pub mod report;
pub mod sample;
pub mod structure;

/// Floating-point scalar the engine is generic over.
pub trait Scalar: Float + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// Convert an `f64` literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal must be representable")
    }

    /// Extract the value as `f64` (lossless for f32/f64).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Default scalar used by the CLI and by reports.
pub type Real = f64;

/// Dual number over the default scalar.
pub type Dual64 = expr::Dual<f64>;

/// Single-precision dual number.
pub type Dual32 = expr::Dual<f32>;

pub use expr::Expr;
pub use fields::{Chart, TensorField, Valence};
pub use report::{CheckReport, Verdict};
pub use sample::{PointFrame, SplitMix64};
pub use structure::AlmostContactStructure;
