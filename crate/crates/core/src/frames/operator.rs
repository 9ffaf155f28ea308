use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Frame, MeasurementVec};
use crate::error::{arg, Result};
use crate::linalg::{sym_outer, Field, SymOp};

/// Default singular-value cutoff of the pseudoinverse, relative to the largest.
pub const DEFAULT_PINV_REL_TOL: f64 = 1e-10;

/// Real dimension of `Sym(H)`: `n(n+1)/2` for real `H`, `n²` for complex `H`.
pub fn sym_dim(n: usize, field: Field) -> usize {
    match field {
        Field::Real => n * (n + 1) / 2,
        Field::Complex => n * n,
    }
}

/// Coordinates of `T` in the orthonormal basis of `Sym(H)` (Frobenius inner
/// product) ordered as: `E_ii` for each `i`; `(E_ij + E_ji)/√2` for `i < j`
/// in row-major order; then, complex case only, `i(E_ij − E_ji)/√2` for
/// `i < j`. The coordinates are `T_ii`, `√2·Re T_ij` and `√2·Im T_ij`.
pub fn sym_coords(t: &SymOp) -> DVector<f64> {
    let n = t.dim();
    let mut out = Vec::with_capacity(sym_dim(n, t.field()));
    out.extend((0..n).map(|i| t.entry(i, i).re));
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    out.extend(pairs.iter().map(|&(i, j)| SQRT_2 * t.entry(i, j).re));
    if t.field() == Field::Complex {
        out.extend(pairs.iter().map(|&(i, j)| SQRT_2 * t.entry(i, j).im));
    }
    DVector::from_vec(out)
}

/// Inverse of [`sym_coords`].
pub fn sym_from_coords(field: Field, n: usize, coords: &[f64]) -> Result<SymOp> {
    if coords.len() != sym_dim(n, field) {
        return arg(format!(
            "expected {} coordinates for Sym of dim {n} ({field}), got {}",
            sym_dim(n, field),
            coords.len()
        ));
    }
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        mat[(i, i)] = Complex64::new(coords[i], 0.0);
    }
    let npairs = n * (n - 1) / 2;
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let re = coords[n + k] / SQRT_2;
            let im = if field == Field::Complex { coords[n + npairs + k] / SQRT_2 } else { 0.0 };
            mat[(i, j)] = Complex64::new(re, im);
            mat[(j, i)] = Complex64::new(re, -im);
            k += 1;
        }
    }
    SymOp::from_matrix(field, mat)
}

/// Matrix realization of `𝒜` in the coordinates of [`sym_coords`], with its
/// thresholded pseudoinverse.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    field: Field,
    dim: usize,
    matrix: DMatrix<f64>,
    pinv: DMatrix<f64>,
    singular_values: Vec<f64>,
    rank: usize,
    pinv_tol: f64,
}

impl MeasurementOperator {
    pub fn new(frame: &Frame) -> Self {
        Self::with_tolerance(frame, DEFAULT_PINV_REL_TOL).expect("default tolerance is valid")
    }

    /// Builds `𝒜` with singular values below `rel_tol · σ_max` treated as zero.
    pub fn with_tolerance(frame: &Frame, rel_tol: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rel_tol) {
            return arg(format!("pseudoinverse tolerance must lie in [0, 1), got {rel_tol}"));
        }
        let rows: Vec<DVector<f64>> = frame
            .vectors()
            .iter()
            .map(|f| sym_coords(&sym_outer(f, f).expect("frame vectors share dim and field")))
            .collect();
        let cols = sym_dim(frame.dim(), frame.field());
        let matrix = DMatrix::from_fn(rows.len(), cols, |k, b| rows[k][b]);

        let svd = matrix.clone().svd(true, true);
        let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
        let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
        let pinv_tol = rel_tol * sigma_max;
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut pinv = DMatrix::zeros(cols, rows.len());
        let mut rank = 0;
        for (i, &s) in sigma.iter().enumerate() {
            if s > pinv_tol && s > 0.0 {
                rank += 1;
                pinv += vt.row(i).transpose() * u.column(i).transpose() / s;
            }
        }
        let mut singular_values = sigma;
        singular_values.sort_by(|a, b| b.total_cmp(a));

        Ok(Self {
            field: frame.field(),
            dim: frame.dim(),
            matrix,
            pinv,
            singular_values,
            rank,
            pinv_tol,
        })
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Real dimension of `Sym(H)`.
    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `rank = dim Sym(H)`, i.e. `𝒜` is injective on all of `Sym(H)`.
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.cols()
    }

    pub fn pinv_tol(&self) -> f64 {
        self.pinv_tol
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// All singular values, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Smallest singular value kept by the pseudoinverse; its reciprocal is
    /// the Lipschitz constant of [`MeasurementOperator::min_norm_inverse`]
    /// from `(R^m, ℓ²)` to `(Sym(H), Frobenius)`.
    pub fn sigma_min(&self) -> f64 {
        if self.rank == 0 {
            0.0
        } else {
            self.singular_values[self.rank - 1]
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `𝒜(T)`.
    pub fn apply(&self, t: &SymOp) -> Result<MeasurementVec> {
        if t.dim() != self.dim {
            return arg(format!("operator has dim {} but frame has dim {}", t.dim(), self.dim));
        }
        self.field.ensure_same(t.field(), "MeasurementOperator::apply")?;
        let v = &self.matrix * sym_coords(t);
        MeasurementVec::new(v.iter().copied().collect())
    }

    /// The minimum-Frobenius-norm least-squares solution of `𝒜(T) = c`.
    pub fn min_norm_inverse(&self, c: &MeasurementVec) -> Result<SymOp> {
        if c.count() != self.rows() {
            return arg(format!(
                "measurement count {} does not match frame size {}",
                c.count(),
                self.rows()
            ));
        }
        let coords = &self.pinv * DVector::from_column_slice(c.values());
        sym_from_coords(self.field, self.dim, coords.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{alpha, gen_frame, named_frame, FrameKind};
    use crate::linalg::schatten_norm;
    use crate::testutil::{random_symop, random_vector, rng};

    #[test]
    fn coords_round_trip_and_isometry() {
        let mut g = rng(41);
        for field in [Field::Real, Field::Complex] {
            let t = random_symop(&mut g, 4, field);
            let c = sym_coords(&t);
            assert_eq!(c.len(), sym_dim(4, field));
            assert!((c.norm() - t.frobenius()).abs() < 1e-12);
            let back = sym_from_coords(field, 4, c.as_slice()).unwrap();
            assert!((&back - &t).frobenius() < 1e-14);
        }
    }

    #[test]
    fn orthonormal_basis_observes_diagonal() {
        let op = MeasurementOperator::new(&named_frame("r2_onb").unwrap());
        let t = SymOp::real_from_rows(&[&[2.0, 5.0], &[5.0, -3.0]]).unwrap();
        assert_eq!(op.apply(&t).unwrap().values(), &[2.0, -3.0]);
        assert_eq!(op.rank(), 2);
        assert!(!op.is_full_rank());
    }

    #[test]
    fn generic_real_frame_is_full_rank() {
        for (n, m) in [(2, 3), (3, 6), (4, 12)] {
            let f = gen_frame(FrameKind::RandomGaussian, n, m, Field::Real, 13, None).unwrap();
            let op = MeasurementOperator::new(&f);
            // Oracle: count eigenvalues of AᵀA above the cutoff squared.
            let gram = op.matrix().transpose() * op.matrix();
            let ev = gram.symmetric_eigenvalues();
            let max = ev.iter().copied().fold(0.0, f64::max);
            let oracle = ev.iter().filter(|&&v| v > 1e-20 * max).count();
            assert_eq!(op.rank(), n * (n + 1) / 2);
            assert_eq!(oracle, op.rank());
        }
    }

    #[test]
    fn pinv_of_zero_is_zero() {
        let f = gen_frame(FrameKind::RandomGaussian, 3, 9, Field::Complex, 1, None).unwrap();
        let op = MeasurementOperator::new(&f);
        let t = op.min_norm_inverse(&MeasurementVec::zeros(9)).unwrap();
        assert_eq!(t.frobenius(), 0.0);
        assert!(op.min_norm_inverse(&MeasurementVec::zeros(8)).is_err());
    }

    #[test]
    fn pinv_is_exact_on_full_rank_range() {
        let mut g = rng(42);
        for field in [Field::Real, Field::Complex] {
            let n = 3;
            let f = gen_frame(FrameKind::RandomGaussian, n, n * n + n, field, 4, None).unwrap();
            let op = MeasurementOperator::new(&f);
            assert!(op.is_full_rank());
            for _ in 0..20 {
                let x = random_vector(&mut g, n, field);
                let lifted = sym_outer(&x, &x).unwrap();
                let t = op.min_norm_inverse(&alpha(&f, &x).unwrap()).unwrap();
                // Residual check: 𝒜(T) reproduces the data and T = [x,x].
                assert!(op.apply(&t).unwrap().dist(&alpha(&f, &x).unwrap(), 2.0) < 1e-9 * x.norm_sq());
                assert!(schatten_norm(&(&t - &lifted), 2.0).unwrap() <= 1e-8 * x.norm_sq());
            }
        }
    }

    #[test]
    fn rank_deficient_min_norm_solution() {
        let op = MeasurementOperator::new(&named_frame("r2_onb").unwrap());
        let t = op.min_norm_inverse(&MeasurementVec::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert!((&t - &SymOp::identity(2, Field::Real)).frobenius() < 1e-15);
    }

    #[test]
    fn pinv_is_linear() {
        let mut g = rng(43);
        let f = gen_frame(FrameKind::RandomGaussian, 3, 7, Field::Complex, 8, None).unwrap();
        let op = MeasurementOperator::new(&f);
        for _ in 0..20 {
            let c1 = alpha(&f, &random_vector(&mut g, 3, Field::Complex)).unwrap();
            let c2 = alpha(&f, &random_vector(&mut g, 3, Field::Complex)).unwrap();
            let lhs = op.min_norm_inverse(&c1.add(&c2)).unwrap();
            let rhs = &op.min_norm_inverse(&c1).unwrap() + &op.min_norm_inverse(&c2).unwrap();
            assert!((&lhs - &rhs).frobenius() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let f = named_frame("r2_pr3").unwrap();
        assert!(MeasurementOperator::with_tolerance(&f, -1.0).is_err());
        assert!(MeasurementOperator::with_tolerance(&f, f64::NAN).is_err());
    }
}
