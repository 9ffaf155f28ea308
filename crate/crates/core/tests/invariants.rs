use nalgebra::DMatrix;
use phaselip::linalg::{eigenvalues, schatten_norm, sym_outer, weyl_gap};
use phaselip::retraction::{pi_lipschitz_bound, pi_lipschitz_ratio, pi_retract, random_rank_one};
use phaselip::sampling::{random_phase, random_symop, random_unitary, random_vector, stream_rng};
use phaselip::{kappa, kappa_inv, lifted_dist, quotient_dist, ray, Complex64, Field, SymOp};
use proptest::prelude::*;

const EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, f64::INFINITY];

fn field_of(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

fn conj(a: &SymOp, u: &DMatrix<Complex64>) -> SymOp {
    a.conjugate_by(u).unwrap()
}

fn max_abs_diff(a: &SymOp, b: &SymOp) -> f64 {
    (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schatten_norms_decrease_in_p(seed in any::<u64>(), n in 1usize..=6, complex in any::<bool>()) {
        let mut rng = stream_rng(seed, 0);
        let a = random_symop(&mut rng, n, field_of(complex));
        let norms: Vec<f64> = EXPONENTS.iter().map(|&p| schatten_norm(&a, p).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
        prop_assert!((norms[2] - a.frobenius()).abs() <= 1e-10 * (1.0 + norms[2]));
    }

    #[test]
    fn weyl_inequality(seed in any::<u64>(), n in 1usize..=6, complex in any::<bool>()) {
        let mut rng = stream_rng(seed, 1);
        let f = field_of(complex);
        let (a, b) = (random_symop(&mut rng, n, f), random_symop(&mut rng, n, f));
        let diff = SymOp::from_matrix(f, a.matrix() - b.matrix()).unwrap();
        let gap = weyl_gap(&a, &b).unwrap();
        prop_assert!(gap <= schatten_norm(&diff, f64::INFINITY).unwrap() + 1e-10);
    }

    #[test]
    fn spectrum_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..=5, complex in any::<bool>()) {
        let mut rng = stream_rng(seed, 2);
        let f = field_of(complex);
        let a = random_symop(&mut rng, n, f);
        let u = random_unitary(&mut rng, n, f);
        let (ea, eb) = (eigenvalues(&a).unwrap(), eigenvalues(&conj(&a, &u)).unwrap());
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn ray_metrics_are_metrics(seed in any::<u64>(), n in 1usize..=5, complex in any::<bool>(), pi in 0usize..4) {
        let p = EXPONENTS[pi];
        let mut rng = stream_rng(seed, 3);
        let f = field_of(complex);
        let xs: Vec<_> = (0..3).map(|_| random_vector(&mut rng, n, f)).collect();
        let rs: Vec<_> = xs.iter().map(ray).collect();
        let shifted = ray(&xs[0].mul_scalar(random_phase(&mut rng, f)).unwrap());
        for dist in [quotient_dist, lifted_dist] {
            let d01 = dist(&rs[0], &rs[1], p).unwrap();
            let d12 = dist(&rs[1], &rs[2], p).unwrap();
            let d02 = dist(&rs[0], &rs[2], p).unwrap();
            prop_assert!(dist(&rs[0], &rs[0], p).unwrap() <= 1e-9);
            prop_assert!((d01 - dist(&rs[1], &rs[0], p).unwrap()).abs() <= 1e-9 * (1.0 + d01));
            prop_assert!(d02 <= d01 + d12 + 1e-9 * (1.0 + d02));
            prop_assert!((dist(&shifted, &rs[1], p).unwrap() - d01).abs() <= 1e-9 * (1.0 + d01));
        }
    }

    #[test]
    fn metric_equivalence_constants(seed in any::<u64>(), n in 2usize..=6, complex in any::<bool>(), pair in 0usize..3) {
        let (p, q) = [(1.0, 2.0), (1.0, f64::INFINITY), (2.0, f64::INFINITY)][pair];
        let mut rng = stream_rng(seed, 4);
        let f = field_of(complex);
        let x = ray(&random_vector(&mut rng, n, f));
        let y = ray(&random_vector(&mut rng, n, f));
        let e = 1.0 / p - if q.is_infinite() { 0.0 } else { 1.0 / q };
        let (dq, dp) = (quotient_dist(&x, &y, q).unwrap(), quotient_dist(&x, &y, p).unwrap());
        prop_assert!(dq <= dp + 1e-12 && dp <= (n as f64).powf(e) * dq + 1e-12);
        let (lq, lp) = (lifted_dist(&x, &y, q).unwrap(), lifted_dist(&x, &y, p).unwrap());
        prop_assert!(lq <= lp + 1e-12 && lp <= 2f64.powf(e) * lq + 1e-12);
    }

    #[test]
    fn kappa_round_trip(seed in any::<u64>(), n in 1usize..=6, complex in any::<bool>()) {
        let mut rng = stream_rng(seed, 5);
        let x = ray(&random_vector(&mut rng, n, field_of(complex)));
        let back = kappa_inv(&kappa(&x).without_generator()).unwrap();
        prop_assert!(lifted_dist(&x, &back, 2.0).unwrap() <= 1e-10 * (1.0 + x.norm().powi(2)));
    }

    #[test]
    fn retraction_fixes_rank_one(seed in any::<u64>(), n in 1usize..=6, complex in any::<bool>()) {
        let mut rng = stream_rng(seed, 6);
        let (_, t) = random_rank_one(&mut rng, n, field_of(complex));
        let r = pi_retract(&t, None).unwrap();
        prop_assert!(max_abs_diff(r.carrier(), &t) <= 1e-10 * (1.0 + t.max_abs_entry()));
    }

    #[test]
    fn retraction_is_equivariant_and_homogeneous(seed in any::<u64>(), n in 1usize..=5, complex in any::<bool>(), t in 0.1f64..10.0) {
        let mut rng = stream_rng(seed, 7);
        let f = field_of(complex);
        let a = random_symop(&mut rng, n, f);
        let u = random_unitary(&mut rng, n, f);
        let lhs = pi_retract(&conj(&a, &u), None).unwrap();
        let rhs = conj(pi_retract(&a, None).unwrap().carrier(), &u);
        prop_assert!(max_abs_diff(lhs.carrier(), &rhs) <= 1e-9 * (1.0 + a.max_abs_entry()));
        let scaled = pi_retract(&a.scaled(t), None).unwrap();
        let expect = pi_retract(&a, None).unwrap().carrier().scaled(t);
        prop_assert!(max_abs_diff(scaled.carrier(), &expect) <= 1e-9 * t * (1.0 + a.max_abs_entry()));
    }

    #[test]
    fn retraction_respects_lipschitz_bound(seed in any::<u64>(), n in 1usize..=6, complex in any::<bool>(), pi in 0usize..4) {
        let p = EXPONENTS[pi];
        let mut rng = stream_rng(seed, 8);
        let f = field_of(complex);
        let (a, b) = (random_symop(&mut rng, n, f), random_symop(&mut rng, n, f));
        prop_assert!(pi_lipschitz_ratio(&a, &b, p).unwrap() <= pi_lipschitz_bound(p).unwrap() + 1e-8);
    }

    #[test]
    fn outer_product_is_psd_rank_one(seed in any::<u64>(), n in 1usize..=6, complex in any::<bool>()) {
        let mut rng = stream_rng(seed, 9);
        let x = random_vector(&mut rng, n, field_of(complex));
        let ev = eigenvalues(&sym_outer(&x, &x).unwrap()).unwrap();
        prop_assert!((ev[0] - x.norm_sq()).abs() <= 1e-10 * (1.0 + x.norm_sq()));
        for v in &ev[1..] {
            prop_assert!(v.abs() <= 1e-10 * (1.0 + x.norm_sq()));
        }
    }
}
