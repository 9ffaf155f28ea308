//! Numerical substrate: field-tagged vectors, self-adjoint operators, spectral
//! decompositions and Schatten norms.
//!
//! Scalars are stored as [`Complex64`] pairs for both fields. Real-field
//! values always carry an exactly zero imaginary part, and real-field
//! operators are handed to a pure-real eigensolver.

mod spectral;
mod symop;
mod vector;

pub use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use spectral::{
    eigenvalues, schatten_norm, schatten_norm_of_values, spectral_decompose, weyl_gap,
    RankOnePSD, SpectralDecomp,
};
pub use symop::{sym_outer, SymOp};
pub(crate) use spectral::check_rank_one_psd;
pub use vector::VectorH;

use crate::error::{arg, Result};

/// The scalar field of the Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// The smallest field containing both operands.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Complex || other == Field::Complex {
            Field::Complex
        } else {
            Field::Real
        }
    }

    pub(crate) fn ensure_same(self, other: Field, what: &str) -> Result<()> {
        if self != other {
            return arg(format!("{what}: field mismatch ({self:?} vs {other:?})"));
        }
        Ok(())
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(format!("unknown field `{other}` (expected real|complex)")),
        }
    }
}

/// Validates a norm exponent: `p >= 1`, with `f64::INFINITY` standing for `p = ∞`.
pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return arg(format!("norm exponent must satisfy p >= 1 (got {p})"));
    }
    Ok(())
}

/// `1/p`, with `1/∞ = 0`.
pub(crate) fn reciprocal(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// The ℓ^p norm of a sequence of magnitudes, scaled to avoid overflow.
pub(crate) fn lp_of_magnitudes(mags: impl Iterator<Item = f64> + Clone, p: f64) -> f64 {
    let max = mags.clone().fold(0.0_f64, f64::max);
    if max == 0.0 || p.is_infinite() {
        return max;
    }
    if p == 1.0 {
        return mags.sum();
    }
    if p == 2.0 {
        return max * mags.map(|m| (m / max).powi(2)).sum::<f64>().sqrt();
    }
    max * mags.map(|m| (m / max).powf(p)).sum::<f64>().powf(1.0 / p)
}
