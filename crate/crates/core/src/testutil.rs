//! Test-only helpers, including an independent eigenvalue oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::linalg::SymOp;
pub use crate::sampling::{random_phase, random_symop, random_vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    crate::sampling::stream_rng(seed, 0xfeed)
}

/// Eigenvalues (descending) by cyclic complex Jacobi rotations.
///
/// Independent of the tridiagonal QR path used by the library.
pub fn jacobi_eigenvalues(a: &SymOp) -> Vec<f64> {
    let n = a.dim();
    let mut m: DMatrix<Complex64> = a.matrix().clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let (app, aqq) = (m[(p, p)].re, m[(q, q)].re);
                // Rotate so the (p, q) entry vanishes: first strip the phase of
                // a_pq, then apply a real Jacobi rotation.
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                let mut j = DMatrix::<Complex64>::identity(n, n);
                j[(p, p)] = Complex64::new(c, 0.0);
                j[(q, q)] = Complex64::new(c, 0.0);
                j[(p, q)] = phase * s;
                j[(q, p)] = -phase.conj() * s;
                m = j.adjoint() * &m * &j;
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}
