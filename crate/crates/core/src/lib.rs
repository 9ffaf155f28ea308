//! Lipschitz analysis of phase retrieval from magnitude measurements.
//!
//! The crate works with finite frames `{f_k}` of a real or complex Hilbert
//! space `H = K^n` and the map `α(x) = (|⟨x, f_k⟩|²)_k`, which factors
//! through the lift `x ↦ [x,x] = xx*` and the linear map `𝒜` on
//! self-adjoint operators. It provides
//!
//! * metrics on the ray space `H/∼` ([`metrics`]),
//! * the rank-one retraction `π(A) = (λ₁ − λ₂)P₁` ([`retraction`]),
//! * a constructive Lipschitz left inverse of `α` ([`reconstruct`]),
//! * estimators for the frame constants `a₀`, `b₀` and Lipschitz probes ([`probes`]).

pub mod error;
pub mod frames;
pub mod linalg;
pub mod metrics;
pub mod probes;
pub mod report;
pub mod reconstruct;
pub mod retraction;
pub mod sampling;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use frames::{alpha, sqrt_alpha, Frame, MeasurementOperator, MeasurementVec};
pub use linalg::{Complex64, Field, RankOnePSD, SymOp, VectorH};
pub use metrics::{kappa, kappa_inv, lifted_dist, quotient_dist, ray, RayPoint};
