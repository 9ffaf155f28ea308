use nalgebra::DVector;
use num_complex::Complex64;

use super::{lp_of_magnitudes, Field};
use crate::error::{arg, Result};

/// A vector in the real or complex Hilbert space `H = F^n`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(into = "crate::frames::io::VectorRepr", try_from = "crate::frames::io::VectorRepr")]
pub struct VectorH {
    field: Field,
    data: DVector<Complex64>,
}

impl VectorH {
    /// Builds a vector, rejecting non-finite entries and real-field entries
    /// with a nonzero imaginary part.
    pub fn new(field: Field, data: DVector<Complex64>) -> Result<Self> {
        if data.is_empty() {
            return arg("vector must have positive dimension");
        }
        for (i, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return arg(format!("entry {i} is not finite"));
            }
            if field == Field::Real && z.im != 0.0 {
                return arg(format!("entry {i} has nonzero imaginary part in a real vector"));
            }
        }
        Ok(Self { field, data })
    }

    pub fn real(values: &[f64]) -> Result<Self> {
        Self::new(
            Field::Real,
            DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0))),
        )
    }

    pub fn complex(values: &[Complex64]) -> Result<Self> {
        Self::new(Field::Complex, DVector::from_column_slice(values))
    }

    pub fn zeros(dim: usize, field: Field) -> Self {
        Self {
            field,
            data: DVector::zeros(dim),
        }
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize, field: Field) -> Self {
        let mut v = Self::zeros(dim, field);
        v.data[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub(crate) fn from_parts_unchecked(field: Field, data: DVector<Complex64>) -> Self {
        Self { field, data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn entries(&self) -> &DVector<Complex64> {
        &self.data
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.data[i]
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    /// `(Σ |x_i|^p)^{1/p}`; `p = f64::INFINITY` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_of_magnitudes(self.data.iter().map(|z| z.norm()), p)
    }

    /// `⟨self, other⟩ = Σ self_i · conj(other_i)`, linear in the first slot.
    pub fn inner(&self, other: &VectorH) -> Complex64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scaled(&self, t: f64) -> VectorH {
        Self {
            field: self.field,
            data: self.data.map(|z| z * t),
        }
    }

    /// Multiplies by a scalar, which must be real for a real-field vector.
    pub fn mul_scalar(&self, a: Complex64) -> Result<VectorH> {
        if self.field == Field::Real && a.im != 0.0 {
            return arg("cannot scale a real vector by a non-real scalar");
        }
        Ok(Self {
            field: self.field,
            data: self.data.map(|z| z * a),
        })
    }

    pub fn add(&self, other: &VectorH) -> VectorH {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self {
            field: self.field.join(other.field),
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &VectorH) -> VectorH {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self {
            field: self.field.join(other.field),
            data: &self.data - &other.data,
        }
    }

    pub(crate) fn ensure_compatible(&self, other: &VectorH, what: &str) -> Result<()> {
        if self.dim() != other.dim() {
            return arg(format!(
                "{what}: dimension mismatch ({} vs {})",
                self.dim(),
                other.dim()
            ));
        }
        self.field.ensure_same(other.field, what)
    }
}
