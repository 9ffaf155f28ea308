//! Seeded random generators for vectors, operators and unitaries.
//!
//! Every randomized routine derives its generator from a `(seed, stream)`
//! pair, so results do not depend on scheduling or thread count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Field, SymOp, VectorH};

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_scalar<R: Rng + ?Sized>(rng: &mut R, field: Field) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    match field {
        Field::Real => Complex64::new(re, 0.0),
        Field::Complex => Complex64::new(re, rng.sample(StandardNormal)),
    }
}

/// A vector with i.i.d. standard normal entries (real and imaginary parts
/// drawn separately in the complex case).
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize, field: Field) -> VectorH {
    let data = nalgebra::DVector::from_fn(dim, |_, _| gaussian_scalar(rng, field));
    VectorH::new(field, data).expect("gaussian entries are finite")
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize, field: Field) -> VectorH {
    loop {
        let v = random_vector(rng, dim, field);
        let n = v.norm();
        if n > 1e-8 {
            return v.scaled(1.0 / n);
        }
    }
}

/// `(G + G*)/2` for a Gaussian matrix `G`.
pub fn random_symop<R: Rng + ?Sized>(rng: &mut R, dim: usize, field: Field) -> SymOp {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_scalar(rng, field));
    SymOp::from_matrix(field, g).expect("gaussian entries are finite")
}

/// A unitary (orthogonal in the real case) drawn by QR of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize, field: Field) -> DMatrix<Complex64> {
    match field {
        Field::Real => {
            let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
            g.qr().q().map(|r| Complex64::new(r, 0.0))
        }
        Field::Complex => DMatrix::from_fn(dim, dim, |_, _| gaussian_scalar(rng, field)).qr().q(),
    }
}

/// A unimodular scalar: `±1` for the real field, `e^{iθ}` for the complex one.
pub fn random_phase<R: Rng + ?Sized>(rng: &mut R, field: Field) -> Complex64 {
    match field {
        Field::Real => {
            if rng.random::<bool>() {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(-1.0, 0.0)
            }
        }
        Field::Complex => Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)),
    }
}
