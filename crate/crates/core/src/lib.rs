//! Quadrature on compact manifolds (flat tori and the 2-sphere): point set
//! generation, worst-case errors in Bessel potential spaces, exact rules,
//! discrepancy and scaling studies.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod analysis;
pub mod error;
pub mod kernels;
pub mod manifold;
pub mod pointsets;
pub mod quadrature;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use manifold::{ManifoldKind, ManifoldSpec, Point};
pub use scalar::{pairwise_sum, Real};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Point64 = Point<f64>;
pub type PointSet64 = pointsets::PointSet<f64>;
pub type SpectrumSlice64 = manifold::SpectrumSlice<f64>;
pub type BesselKernel64 = kernels::BesselKernel<f64>;
pub type WceReport64 = analysis::WceReport<f64>;
pub type QnormReport64 = analysis::QnormReport<f64>;
pub type DiscrepancyReport64 = analysis::DiscrepancyReport<f64>;
pub type AdversarialReport64 = analysis::AdversarialReport<f64>;
pub type TransferReport64 = analysis::TransferReport<f64>;
pub type PerturbationReport64 = analysis::PerturbationReport<f64>;
pub type ScalingResult64 = analysis::ScalingResult<f64>;
