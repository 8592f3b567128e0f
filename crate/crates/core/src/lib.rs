//! Gauge-scaled Bregman divergences.
//!
//! For a generator `φ` and a nonvanishing scaler `g`, the transformed
//! generator `φ†(x) = g(x)·φ(x/g(x))` satisfies
//!
//! ```text
//! g(x)·D_φ(x/g(x) ‖ y/g(y)) = D_φ†(x ‖ y)
//! ```
//!
//! whenever `g` is affine or `φ` is restricted 1-homogeneous on the scaled
//! image. The crate implements the identity, a catalog of eight families
//! satisfying it, and three applications:
//!
//! * [`dre`]: multiclass density-ratio estimation from class-probability
//!   estimates;
//! * [`lms`]: the dual-norm p-LMS online learner and its regret bound;
//! * [`manifold`]: k-means++ seeding on the sphere and the hyperboloid.
//!
//! [`geometry`] checks the induced ball and bisector equivalences, and
//! [`cli`] drives everything from the `sbreg` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod csv;
pub mod divergence;
pub mod dre;
pub mod error;
pub mod geometry;
pub mod lms;
pub mod manifold;
pub mod rng;

pub use error::{Error, Result};
