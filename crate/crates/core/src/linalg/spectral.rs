use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{check_exponent, lp_of_magnitudes, Field, SymOp, VectorH};
use crate::error::{arg, Error, Result};

/// Relative default for merging nearly equal eigenvalues.
pub const DEFAULT_GROUP_REL_TOL: f64 = 1e-8;

/// Relative tolerance of the rank-one PSD membership test.
pub const RANK_ONE_REL_TOL: f64 = 1e-10;

const EIGEN_MAX_SWEEPS: usize = 10_000;

/// Spectral decomposition `A = Σ_k λ_{m(k)} P_k` over the distinct eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    /// All eigenvalues with multiplicity, sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors aligned with `eigenvalues`; each has its
    /// largest-magnitude entry real and positive.
    pub eigenvectors: Vec<VectorH>,
    /// Multiplicities `r(k)` of the distinct eigenvalues after grouping.
    pub multiplicities: Vec<usize>,
    /// Orthogonal projectors onto the grouped eigenspaces.
    pub projectors: Vec<SymOp>,
    pub group_tolerance: f64,
}

impl SpectralDecomp {
    pub fn distinct_count(&self) -> usize {
        self.multiplicities.len()
    }

    /// Index `m(k)` of the first eigenvalue of group `k` (0-based).
    pub fn group_start(&self, k: usize) -> usize {
        self.multiplicities[..k].iter().sum()
    }

    /// The representative eigenvalue `λ_{m(k)}` of group `k`.
    pub fn distinct_value(&self, k: usize) -> f64 {
        self.eigenvalues[self.group_start(k)]
    }

    /// `Σ_k λ_{m(k)} P_k`.
    pub fn reconstruct(&self) -> SymOp {
        let n = self.eigenvalues.len();
        let field = self.projectors[0].field();
        let mut mat = DMatrix::zeros(n, n);
        for (k, p) in self.projectors.iter().enumerate() {
            mat += p.matrix() * Complex64::new(self.distinct_value(k), 0.0);
        }
        SymOp::from_matrix(field, mat).expect("projector combination is Hermitian")
    }
}

/// Eigenpairs of `a`, eigenvalues descending, eigenvectors phase-normalized.
fn eigh(a: &SymOp) -> Result<(Vec<f64>, Vec<VectorH>)> {
    let n = a.dim();
    let mut pairs: Vec<(f64, DVector<Complex64>)> = match a.field() {
        Field::Real => {
            let eig = SymmetricEigen::try_new(a.real_matrix(), f64::EPSILON, EIGEN_MAX_SWEEPS)
                .ok_or_else(|| non_convergence(a))?;
            (0..n)
                .map(|i| {
                    let v = eig.eigenvectors.column(i).map(|r| Complex64::new(r, 0.0));
                    (eig.eigenvalues[i], v)
                })
                .collect()
        }
        Field::Complex => {
            let eig = SymmetricEigen::try_new(a.matrix().clone(), f64::EPSILON, EIGEN_MAX_SWEEPS)
                .ok_or_else(|| non_convergence(a))?;
            (0..n)
                .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
                .collect()
        }
    };
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for (lambda, v) in pairs {
        values.push(lambda);
        vectors.push(VectorH::from_parts_unchecked(a.field(), normalize_phase(v)));
    }
    Ok((values, vectors))
}

fn non_convergence(a: &SymOp) -> Error {
    Error::Numerical(format!(
        "Hermitian eigensolver did not converge (dim {}, field {}, max|a_ij| = {:e})",
        a.dim(),
        a.field(),
        a.max_abs_entry()
    ))
}

/// Rescales a unit vector so its largest-magnitude entry is real and positive.
fn normalize_phase(v: DVector<Complex64>) -> DVector<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best })
        .0;
    let z = v[pivot];
    let phase = if z.norm() > 0.0 { z.conj() / z.norm() } else { Complex64::new(1.0, 0.0) };
    let mut out = v.map(|e| e * phase / norm);
    out[pivot] = Complex64::new(out[pivot].norm(), 0.0);
    out
}

/// Sorted (descending) eigenvalues of `a`.
pub fn eigenvalues(a: &SymOp) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut values: Vec<f64> = match a.field() {
        Field::Real => SymmetricEigen::try_new(a.real_matrix(), f64::EPSILON, EIGEN_MAX_SWEEPS)
            .ok_or_else(|| non_convergence(a))?
            .eigenvalues
            .iter()
            .copied()
            .collect(),
        Field::Complex => SymmetricEigen::try_new(a.matrix().clone(), f64::EPSILON, EIGEN_MAX_SWEEPS)
            .ok_or_else(|| non_convergence(a))?
            .eigenvalues
            .iter()
            .copied()
            .collect(),
    };
    debug_assert_eq!(values.len(), n);
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Spectral decomposition with eigenvalue grouping.
///
/// Consecutive sorted eigenvalues closer than `group_tol` are merged into one
/// distinct eigenvalue whose projector sums their eigenprojections. The default
/// tolerance is `1e-8 · ‖A‖_∞`.
pub fn spectral_decompose(a: &SymOp, group_tol: Option<f64>) -> Result<SpectralDecomp> {
    let (values, vectors) = eigh(a)?;
    let op_norm = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = match group_tol {
        Some(t) if t.is_nan() || t < 0.0 => return arg(format!("group tolerance must be >= 0 (got {t})")),
        Some(t) => t,
        None => DEFAULT_GROUP_REL_TOL * op_norm,
    };

    let mut multiplicities = vec![1usize];
    for i in 1..values.len() {
        if values[i - 1] - values[i] <= tol {
            *multiplicities.last_mut().unwrap() += 1;
        } else {
            multiplicities.push(1);
        }
    }

    let n = a.dim();
    let mut projectors = Vec::with_capacity(multiplicities.len());
    let mut start = 0;
    for &r in &multiplicities {
        let mut p = DMatrix::<Complex64>::zeros(n, n);
        for v in &vectors[start..start + r] {
            let e = v.entries();
            p += e * e.adjoint();
        }
        projectors.push(SymOp::from_matrix(a.field(), p)?);
        start += r;
    }

    Ok(SpectralDecomp {
        eigenvalues: values,
        eigenvectors: vectors,
        multiplicities,
        projectors,
        group_tolerance: tol,
    })
}

/// Schatten norm of a list of eigenvalues of a self-adjoint operator.
pub fn schatten_norm_of_values(values: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(lp_of_magnitudes(values.iter().map(|v| v.abs()), p))
}

/// Schatten p-norm `(Σ σ_k^p)^{1/p}` (max σ_k for `p = ∞`). For self-adjoint
/// operators the singular values are the absolute eigenvalues.
pub fn schatten_norm(a: &SymOp, p: f64) -> Result<f64> {
    check_exponent(p)?;
    schatten_norm_of_values(&eigenvalues(a)?, p)
}

/// `max_i |λ_i(A) − λ_i(B)|` over eigenvalues sorted descending.
pub fn weyl_gap(a: &SymOp, b: &SymOp) -> Result<f64> {
    if a.dim() != b.dim() {
        return arg(format!("weyl_gap: dimension mismatch ({} vs {})", a.dim(), b.dim()));
    }
    a.field().ensure_same(b.field(), "weyl_gap")?;
    let (la, lb) = (eigenvalues(a)?, eigenvalues(b)?);
    Ok(la.iter().zip(&lb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// A positive semidefinite operator of rank at most one, `T = [x, x]`.
#[derive(Debug, Clone)]
pub struct RankOnePSD {
    carrier: SymOp,
    generator: Option<VectorH>,
}

impl RankOnePSD {
    pub fn from_generator(x: VectorH) -> Self {
        let carrier = super::sym_outer(&x, &x).expect("a vector is compatible with itself");
        Self {
            carrier,
            generator: Some(x),
        }
    }

    /// Validates `carrier` against the rank-one PSD test: with eigenvalues
    /// `λ_1 ≥ … ≥ λ_n`, requires `λ_2 ≤ 1e-10·max(1, λ_1)` and
    /// `λ_n ≥ −1e-10·max(1, λ_1)`.
    pub fn try_from_operator(carrier: SymOp) -> Result<Self> {
        check_rank_one_psd(&eigenvalues(&carrier)?)?;
        Ok(Self {
            carrier,
            generator: None,
        })
    }

    /// `carrier` must equal `[g, g]` up to rounding.
    pub(crate) fn from_parts_unchecked(carrier: SymOp, generator: VectorH) -> Self {
        Self {
            carrier,
            generator: Some(generator),
        }
    }

    pub fn carrier(&self) -> &SymOp {
        &self.carrier
    }

    pub fn generator(&self) -> Option<&VectorH> {
        self.generator.as_ref()
    }

    pub fn into_carrier(self) -> SymOp {
        self.carrier
    }

    /// Forgets the generator, leaving only the operator.
    pub fn without_generator(&self) -> Self {
        Self {
            carrier: self.carrier.clone(),
            generator: None,
        }
    }
}

pub(crate) fn check_rank_one_psd(values: &[f64]) -> Result<()> {
    let top = values[0];
    let slack = RANK_ONE_REL_TOL * top.max(1.0);
    let second = values.get(1).copied().unwrap_or(0.0);
    let last = *values.last().unwrap();
    if second > slack || last < -slack {
        return Err(Error::Domain(format!(
            "operator is not rank-one PSD: λ1 = {top:e}, λ2 = {second:e}, λn = {last:e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_outer;
    use crate::testutil::{jacobi_eigenvalues, random_symop, random_vector, rng};

    fn op_norm_diff(a: &SymOp, b: &SymOp) -> f64 {
        schatten_norm(&(a - b), f64::INFINITY).unwrap()
    }

    #[test]
    fn identity_is_one_group() {
        let d = spectral_decompose(&SymOp::identity(3, Field::Real), None).unwrap();
        assert_eq!(d.distinct_count(), 1);
        assert_eq!(d.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert!(op_norm_diff(&d.projectors[0], &SymOp::identity(3, Field::Real)) < 1e-14);
    }

    #[test]
    fn diagonal_two_by_two() {
        let d = spectral_decompose(&SymOp::diag(Field::Real, &[2.0, 0.0]), None).unwrap();
        assert_eq!(d.distinct_count(), 2);
        assert_eq!(d.eigenvalues, vec![2.0, 0.0]);
        assert_eq!(d.projectors[0], SymOp::diag(Field::Real, &[1.0, 0.0]));
        assert_eq!(d.projectors[1], SymOp::diag(Field::Real, &[0.0, 1.0]));
    }

    #[test]
    fn random_hermitian_matches_jacobi_oracle() {
        let mut r = rng(3);
        for field in [Field::Real, Field::Complex] {
            for _ in 0..20 {
                let a = random_symop(&mut r, 6, field);
                let d = spectral_decompose(&a, None).unwrap();
                let scale = d.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
                assert!(op_norm_diff(&d.reconstruct(), &a) <= 1e-10 * scale);
                let oracle = jacobi_eigenvalues(&a);
                for (x, y) in d.eigenvalues.iter().zip(&oracle) {
                    assert!((x - y).abs() < 1e-8, "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn projectors_are_orthogonal_idempotents() {
        let mut r = rng(4);
        let a = random_symop(&mut r, 5, Field::Complex);
        let d = spectral_decompose(&a, None).unwrap();
        assert_eq!(d.multiplicities.iter().sum::<usize>(), 5);
        for (j, pj) in d.projectors.iter().enumerate() {
            let sq = pj.matrix() * pj.matrix();
            assert!((sq - pj.matrix()).iter().all(|z| z.norm() <= 1e-10));
            assert!((pj.trace() - d.multiplicities[j] as f64).abs() <= 1e-8);
            for pk in &d.projectors[j + 1..] {
                assert!((pj.matrix() * pk.matrix()).iter().all(|z| z.norm() <= 1e-10));
            }
        }
    }

    #[test]
    fn grouping_merges_near_ties() {
        let a = SymOp::diag(Field::Real, &[1.0, 1.0 + 1e-12, -2.0]);
        let d = spectral_decompose(&a, None).unwrap();
        assert_eq!(d.multiplicities, vec![2, 1]);
        let d = spectral_decompose(&a, Some(0.0)).unwrap();
        assert_eq!(d.multiplicities, vec![1, 1, 1]);
        assert!(spectral_decompose(&a, Some(-1.0)).is_err());
    }

    #[test]
    fn eigenvector_phase_convention() {
        let mut r = rng(5);
        let a = random_symop(&mut r, 4, Field::Complex);
        for v in spectral_decompose(&a, None).unwrap().eigenvectors {
            let (idx, _) = v
                .entries()
                .iter()
                .enumerate()
                .fold((0, 0.0), |b, (i, z)| if z.norm() > b.1 { (i, z.norm()) } else { b });
            assert_eq!(v.get(idx).im, 0.0);
            assert!(v.get(idx).re > 0.0);
        }
    }

    #[test]
    fn schatten_examples() {
        assert_eq!(schatten_norm(&SymOp::diag(Field::Real, &[1.0, -1.0]), 1.0).unwrap(), 2.0);
        assert_eq!(schatten_norm(&SymOp::diag(Field::Real, &[2.0, 0.0]), f64::INFINITY).unwrap(), 2.0);
        assert!(matches!(schatten_norm(&SymOp::identity(2, Field::Real), 0.5), Err(Error::Argument(_))));
        let mut r = rng(6);
        for field in [Field::Real, Field::Complex] {
            let a = random_symop(&mut r, 5, field);
            let tr = (a.matrix() * a.matrix().adjoint()).trace().re.sqrt();
            assert!((schatten_norm(&a, 2.0).unwrap() - tr).abs() < 1e-12);
        }
    }

    #[test]
    fn weyl_examples() {
        let a = SymOp::identity(2, Field::Real);
        assert_eq!(weyl_gap(&a, &a).unwrap(), 0.0);
        let b = SymOp::diag(Field::Real, &[2.0, 0.0]);
        assert_eq!(weyl_gap(&a, &b).unwrap(), 1.0);
        assert_eq!(schatten_norm(&(&a - &b), f64::INFINITY).unwrap(), 1.0);
        assert!(weyl_gap(&a, &SymOp::identity(3, Field::Real)).is_err());
    }

    #[test]
    fn rank_one_membership() {
        let mut r = rng(8);
        let x = random_vector(&mut r, 4, Field::Complex);
        let t = sym_outer(&x, &x).unwrap();
        assert!(RankOnePSD::try_from_operator(t).is_ok());
        assert!(RankOnePSD::try_from_operator(SymOp::identity(2, Field::Real)).is_err());
        assert!(RankOnePSD::try_from_operator(SymOp::diag(Field::Real, &[0.0, -1.0])).is_err());
        assert!(RankOnePSD::try_from_operator(SymOp::zeros(3, Field::Real)).is_ok());
    }
}
