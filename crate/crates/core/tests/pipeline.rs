use phaselip::frames::io::{frame_from_json, frame_to_json, measurements_from_json, measurements_to_json};
use phaselip::frames::{gen_frame, named_frame, FrameKind};
use phaselip::probes::{estimate_a0, pr_verdict, probe_bilipschitz, verify_property_k, PropertyKExample, Verdict};
use phaselip::reconstruct::{omega, omega_lip_bound, Reconstructor, StepRule};
use phaselip::sampling::{random_vector, stream_rng};
use phaselip::{alpha, lifted_dist, ray, Field, MeasurementVec, VectorH};

#[test]
fn generated_frame_survives_json_and_reconstructs() {
    let frame = gen_frame(FrameKind::RandomGaussian, 3, 12, Field::Complex, 11, None).unwrap();
    let again = frame_from_json(&frame_to_json(&frame).unwrap()).unwrap();
    assert_eq!(frame, again);

    let mut rng = stream_rng(5, 0);
    let xs: Vec<VectorH> = (0..4).map(|_| random_vector(&mut rng, 3, Field::Complex)).collect();
    let rows: Vec<MeasurementVec> = xs.iter().map(|x| alpha(&again, x).unwrap()).collect();
    let rows = measurements_from_json(&measurements_to_json(&rows).unwrap()).unwrap();

    let rec = Reconstructor::new(again, None).unwrap();
    for (x, c) in xs.iter().zip(&rows) {
        let out = rec.omega(c).unwrap();
        let err = lifted_dist(&out.estimate, &ray(x), 1.0).unwrap();
        assert!(err <= 1e-7 * x.norm_sq().max(1.0), "error {err}");
    }
}

#[test]
fn noisy_reconstruction_within_lipschitz_bound() {
    let frame = gen_frame(FrameKind::RandomGaussian, 2, 6, Field::Real, 3, None).unwrap();
    let bound = omega_lip_bound(&frame, 2.0, 1.0, None).unwrap().pipeline.unwrap();
    let x = VectorH::real(&[3.0, 1.0]).unwrap();
    let clean = alpha(&frame, &x).unwrap();
    let noise = MeasurementVec::new(vec![1e-3, -2e-3, 0.0, 1e-3, 5e-4, -1e-3]).unwrap();
    let noisy = clean.add(&noise);
    let out = omega(&frame, &noisy, None).unwrap();
    let err = lifted_dist(&out.estimate, &ray(&x), 1.0).unwrap();
    assert!(err <= bound * noise.dist(&MeasurementVec::zeros(6), 2.0) + 1e-7);

    let rec = Reconstructor::new(frame, None).unwrap();
    let polished = rec.omega_polished(&noisy, 50, StepRule::Armijo { initial_step: 1e-2 }).unwrap();
    assert!(polished.residual <= out.residual + 1e-12);
}

#[test]
fn named_frames_get_expected_verdicts() {
    let pr3 = named_frame("r2_pr3").unwrap();
    assert_eq!(pr_verdict(&pr3, 1e-8).unwrap().verdict, Verdict::Retrievable);
    let onb = named_frame("r2_onb").unwrap();
    let v = pr_verdict(&onb, 1e-8).unwrap();
    assert_eq!(v.verdict, Verdict::NotRetrievable);
    assert!(v.witness.is_some());

    let a0 = estimate_a0(&pr3, 16, 1).unwrap().value;
    let report = probe_bilipschitz(&pr3, 2000, 9).unwrap();
    assert!(report.min_ratio.powi(2) >= a0 - 1e-6);
}

#[test]
fn property_k_records_are_consistent() {
    for which in [PropertyKExample::VectorMetric, PropertyKExample::OperatorMetric] {
        let r = verify_property_k(which).unwrap();
        assert!(r.y_intersection_empty);
        assert_eq!(r.all_true(), r.distances_ok && r.x_intersection_nonempty);
    }
}
