use std::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Field, VectorH};
use crate::error::{arg, Error, Result};

/// A self-adjoint operator on `H`, an element of `Sym(H)`.
///
/// Construction symmetrizes the input, so `entry(i, j) == conj(entry(j, i))`
/// holds exactly as stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SymOp {
    field: Field,
    mat: DMatrix<Complex64>,
}

impl SymOp {
    /// Symmetrizes `m` as `(m + m*) / 2`. Real-field matrices must have an
    /// exactly zero imaginary part.
    pub fn from_matrix(field: Field, m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return arg(format!("operator must be square and nonempty, got {}x{}", m.nrows(), m.ncols()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return arg("operator has non-finite entries");
        }
        if field == Field::Real && m.iter().any(|z| z.im != 0.0) {
            return arg("real operator has entries with nonzero imaginary part");
        }
        Ok(Self::symmetrized(field, m))
    }

    /// Like [`SymOp::from_matrix`] but rejects inputs whose anti-Hermitian part
    /// exceeds `tol · max(1, max|m_ij|)` instead of silently symmetrizing.
    pub fn try_hermitian(field: Field, m: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        if m.is_square() {
            let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
            let skew = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
            if skew > tol * scale {
                return Err(Error::Domain(format!(
                    "matrix is not self-adjoint: max |m - m*| = {skew:e}"
                )));
            }
        }
        Self::from_matrix(field, m)
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(Field::Real, m.map(|v| Complex64::new(v, 0.0)))
    }

    /// Real operator from row-major rows.
    pub fn real_from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return arg("rows must form a square matrix");
        }
        Self::from_real(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diag(field: Field, values: &[f64]) -> Self {
        let n = values.len();
        let mut mat = DMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            mat[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { field, mat }
    }

    pub fn zeros(dim: usize, field: Field) -> Self {
        Self {
            field,
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize, field: Field) -> Self {
        Self {
            field,
            mat: DMatrix::identity(dim, dim),
        }
    }

    fn symmetrized(field: Field, m: DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let mut mat = DMatrix::zeros(n, n);
        for i in 0..n {
            let d = m[(i, i)].re;
            mat[(i, i)] = Complex64::new(d, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                let z = if field == Field::Real { Complex64::new(z.re, 0.0) } else { z };
                mat[(i, j)] = z;
                mat[(j, i)] = z.conj();
            }
        }
        Self { field, mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub(crate) fn real_matrix(&self) -> DMatrix<f64> {
        self.mat.map(|z| z.re)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// `sqrt(trace(T T*))`, computed from the entries.
    pub fn frobenius(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, t: f64) -> SymOp {
        Self {
            field: self.field,
            mat: self.mat.map(|z| z * t),
        }
    }

    pub fn apply(&self, x: &VectorH) -> VectorH {
        assert_eq!(self.dim(), x.dim(), "dimension mismatch");
        VectorH::from_parts_unchecked(self.field.join(x.field()), &self.mat * x.entries())
    }

    /// `⟨T x, x⟩`, which is real for self-adjoint `T`.
    pub fn quadratic_form(&self, x: &VectorH) -> f64 {
        self.apply(x).inner(x).re
    }

    /// `U T U*` for a square matrix `U` (unitary in the intended use).
    pub fn conjugate_by(&self, u: &DMatrix<Complex64>) -> Result<SymOp> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return arg("conjugating matrix has the wrong shape");
        }
        let field = if u.iter().any(|z| z.im != 0.0) { Field::Complex } else { self.field };
        Self::from_matrix(field, u * &self.mat * u.adjoint())
    }

    pub(crate) fn from_parts_unchecked(field: Field, mat: DMatrix<Complex64>) -> Self {
        Self { field, mat }
    }

    pub(crate) fn ensure_compatible(&self, other: &SymOp, what: &str) -> Result<()> {
        if self.dim() != other.dim() {
            return arg(format!("{what}: dimension mismatch ({} vs {})", self.dim(), other.dim()));
        }
        self.field.ensure_same(other.field, what)
    }
}

impl Add for &SymOp {
    type Output = SymOp;

    fn add(self, rhs: &SymOp) -> SymOp {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        SymOp {
            field: self.field.join(rhs.field),
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &SymOp {
    type Output = SymOp;

    fn sub(self, rhs: &SymOp) -> SymOp {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        SymOp {
            field: self.field.join(rhs.field),
            mat: &self.mat - &rhs.mat,
        }
    }
}

/// The symmetric outer product `[x, y] = ½(⟨·,x⟩y + ⟨·,y⟩x) = ½(y x* + x y*)`.
pub fn sym_outer(x: &VectorH, y: &VectorH) -> Result<SymOp> {
    x.ensure_compatible(y, "sym_outer")?;
    let (xv, yv): (&DVector<Complex64>, &DVector<Complex64>) = (x.entries(), y.entries());
    let n = x.dim();
    let mut mat = DMatrix::zeros(n, n);
    for i in 0..n {
        mat[(i, i)] = Complex64::new((xv[i] * yv[i].conj()).re, 0.0);
        for j in (i + 1)..n {
            let z = (yv[i] * xv[j].conj() + xv[i] * yv[j].conj()) * 0.5;
            mat[(i, j)] = z;
            mat[(j, i)] = z.conj();
        }
    }
    Ok(SymOp::from_parts_unchecked(x.field(), mat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_vector, rng};

    #[test]
    fn outer_of_basis_vectors() {
        let e1 = VectorH::real(&[1.0, 0.0]).unwrap();
        let e2 = VectorH::real(&[0.0, 1.0]).unwrap();
        let t = sym_outer(&e1, &e1).unwrap();
        assert_eq!(t, SymOp::diag(Field::Real, &[1.0, 0.0]));
        let t = sym_outer(&e1, &e2).unwrap();
        assert_eq!(t, SymOp::real_from_rows(&[&[0.0, 0.5], &[0.5, 0.0]]).unwrap());
    }

    #[test]
    fn outer_matches_direct_loop() {
        let mut r = rng(11);
        let x = random_vector(&mut r, 4, Field::Complex);
        let y = random_vector(&mut r, 4, Field::Complex);
        let t = sym_outer(&x, &y).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = (x.get(i) * y.get(j).conj() + y.get(i) * x.get(j).conj()) * 0.5;
                assert!((t.entry(i, j) - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn outer_rejects_mismatch() {
        let a = VectorH::real(&[1.0, 0.0]).unwrap();
        let b = VectorH::real(&[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(sym_outer(&a, &b), Err(Error::Argument(_))));
        let c = VectorH::zeros(2, Field::Complex);
        assert!(matches!(sym_outer(&a, &c), Err(Error::Argument(_))));
    }

    #[test]
    fn construction_symmetrizes() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        let s = SymOp::from_real(m).unwrap();
        assert_eq!(s.entry(0, 1), s.entry(1, 0));
        assert_eq!(s.entry(0, 1).re, 1.0);
    }

    #[test]
    fn try_hermitian_rejects_skew_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]).map(|v| Complex64::new(v, 0.0));
        assert!(matches!(SymOp::try_hermitian(Field::Real, m, 1e-12), Err(Error::Domain(_))));
    }
}
