//! Frames, the phaseless analysis maps `α` and `√α`, and the induced linear
//! map `𝒜: Sym(H) → R^m`, `𝒜(T) = (⟨T f_k, f_k⟩)_k`, which satisfies
//! `α(x) = 𝒜([x,x])`.

mod generate;
pub mod io;
mod operator;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use generate::{gen_frame, named_frame, FrameKind, NAMED_FRAMES};
pub use operator::{sym_coords, sym_dim, sym_from_coords, MeasurementOperator, DEFAULT_PINV_REL_TOL};

use crate::error::{arg, Error, Result};
use crate::linalg::{Field, VectorH};

/// Relative cutoff for the spanning test on the synthesis matrix.
const SPANNING_REL_TOL: f64 = 1e-10;

/// An ordered spanning set `{f_1, …, f_m}` of `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    field: Field,
    dim: usize,
    vectors: Vec<VectorH>,
    label: String,
}

impl Frame {
    /// Validates `m ≥ n`, shared dimension and field, and that the smallest
    /// singular value of the `n×m` synthesis matrix exceeds `1e-10` times the
    /// largest.
    pub fn new(vectors: Vec<VectorH>, label: impl Into<String>) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::Validation("frame has no vectors".into()))?;
        let (dim, field) = (first.dim(), first.field());
        for (k, v) in vectors.iter().enumerate() {
            if v.dim() != dim || v.field() != field {
                return Err(Error::Validation(format!(
                    "frame vector {k} is ({}, {}) but vector 0 is ({dim}, {field})",
                    v.dim(),
                    v.field()
                )));
            }
        }
        if vectors.len() < dim {
            return Err(Error::Validation(format!(
                "a frame needs at least as many vectors as the dimension (m = {} < n = {dim})",
                vectors.len()
            )));
        }
        let frame = Self {
            field,
            dim,
            vectors,
            label: label.into(),
        };
        let sv = frame.synthesis_singular_values();
        let (max, min) = (sv[0], *sv.last().unwrap());
        if !(max > 0.0 && min > SPANNING_REL_TOL * max) {
            return Err(Error::Validation(format!(
                "vectors do not span H (σ_min = {min:e}, σ_max = {max:e})"
            )));
        }
        Ok(frame)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vectors(&self) -> &[VectorH] {
        &self.vectors
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Singular values of the `n×m` synthesis matrix, descending.
    pub fn synthesis_singular_values(&self) -> Vec<f64> {
        let synth = DMatrix::<Complex64>::from_fn(self.dim, self.count(), |i, k| self.vectors[k].get(i));
        let mut sv: Vec<f64> = synth.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// The frame `{t·f_k}`.
    pub fn scaled(&self, t: f64) -> Result<Frame> {
        Frame::new(self.vectors.iter().map(|v| v.scaled(t)).collect(), self.label.clone())
    }

    /// The frame `{U f_k}` for a square matrix `U`.
    pub fn transformed(&self, u: &DMatrix<Complex64>) -> Result<Frame> {
        let field = if u.iter().any(|z| z.im != 0.0) { Field::Complex } else { self.field };
        let vectors = self
            .vectors
            .iter()
            .map(|v| VectorH::new(field, u * v.entries()))
            .collect::<Result<Vec<_>>>()?;
        Frame::new(vectors, self.label.clone())
    }

    fn check_vector(&self, x: &VectorH, what: &str) -> Result<()> {
        if x.dim() != self.dim {
            return arg(format!("{what}: vector has dim {} but frame has dim {}", x.dim(), self.dim));
        }
        self.field.ensure_same(x.field(), what)
    }
}

/// A measurement vector `c ∈ R^m`. Entries must be finite; noisy inputs may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "io::MeasurementRepr", into = "io::MeasurementRepr")]
pub struct MeasurementVec(Vec<f64>);

impl MeasurementVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return arg(format!("measurement {i} is not finite"));
        }
        Ok(Self(values))
    }

    pub fn zeros(count: usize) -> Self {
        Self(vec![0.0; count])
    }

    pub fn count(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `‖self − other‖_p`.
    pub fn dist(&self, other: &MeasurementVec, p: f64) -> f64 {
        crate::linalg::lp_of_magnitudes(self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()), p)
    }

    pub fn add(&self, other: &MeasurementVec) -> MeasurementVec {
        assert_eq!(self.count(), other.count(), "count mismatch");
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// `α(x) = (|⟨x, f_k⟩|²)_k`.
pub fn alpha(frame: &Frame, x: &VectorH) -> Result<MeasurementVec> {
    frame.check_vector(x, "alpha")?;
    Ok(MeasurementVec(frame.vectors.iter().map(|f| x.inner(f).norm_sqr()).collect()))
}

/// `√α(x) = (|⟨x, f_k⟩|)_k`.
pub fn sqrt_alpha(frame: &Frame, x: &VectorH) -> Result<MeasurementVec> {
    Ok(MeasurementVec(alpha(frame, x)?.0.into_iter().map(f64::sqrt).collect()))
}
