//! A Lipschitz left inverse of `α`,
//!
//! ```text
//! ω = κ⁻¹ ∘ π ∘ 𝒜⁺
//! ```
//!
//! where `𝒜⁺` is the minimum-norm pseudoinverse of the measurement map on
//! `Sym(H)`. When `𝒜` is injective on all of `Sym(H)` the pipeline is exact
//! on the range of `α`, and its Lipschitz constant is bounded by the product
//! of the constants of its stages. An optional gradient polish refines the
//! estimate against `h(x) = ‖α(x) − c‖₂²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::frames::{alpha, Frame, MeasurementOperator, MeasurementVec};
use crate::linalg::{check_exponent, reciprocal, Complex64, VectorH};
use crate::metrics::{kappa_inv, ray, RayPoint};
use crate::retraction::{pi_lipschitz_bound, pi_retract};

/// Norms observed along the pipeline for one measurement vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageNorms {
    /// `‖c‖₂`.
    pub measurement: f64,
    /// Frobenius norm of `𝒜⁺(c)`.
    pub pseudoinverse: f64,
    /// Frobenius norm of `π(𝒜⁺(c))`, i.e. `λ₁ − λ₂` of the pseudoinverse output.
    pub retracted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub estimate: RayPoint,
    /// `‖α(estimate) − c‖₂`.
    pub residual: f64,
    pub pipeline_stage_norms: StageNorms,
    pub polished: bool,
    /// Accepted polish steps, if the polish ran.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub polish_steps: Option<usize>,
}

/// Line-search policy of [`polish`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum StepRule {
    /// Backtracking from `initial_step` with Armijo constant `1e-4` and
    /// shrink factor `1/2`.
    Armijo { initial_step: f64 },
    /// A constant step; a step that fails to decrease `h` ends the descent.
    Fixed { step: f64 },
}

impl StepRule {
    /// Armijo backtracking from `1/(2·b₀)` for an upper frame bound estimate `b₀`.
    pub fn from_b0(b0: f64) -> Result<StepRule> {
        if !(b0 > 0.0 && b0.is_finite()) {
            return arg(format!("b0 must be positive and finite (got {b0})"));
        }
        Ok(StepRule::Armijo {
            initial_step: 1.0 / (2.0 * b0),
        })
    }
}

const ARMIJO_C: f64 = 1e-4;
const ARMIJO_SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// Result of [`polish`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolishOutcome {
    pub estimate: RayPoint,
    /// `h` at the start and after every accepted step.
    pub objective: Vec<f64>,
    pub accepted_steps: usize,
}

impl PolishOutcome {
    pub fn residual(&self) -> f64 {
        self.objective.last().copied().unwrap_or(0.0).sqrt()
    }
}

fn objective(frame: &Frame, c: &MeasurementVec, x: &VectorH) -> Result<f64> {
    let a = alpha(frame, x)?;
    Ok(a.values().iter().zip(c.values()).map(|(u, v)| (u - v).powi(2)).sum())
}

/// `∇h(x) = Σ_k 4 r_k ⟨x, f_k⟩ f_k` with `r_k = |⟨x, f_k⟩|² − c_k`, taken as
/// the real gradient `∂/∂Re + i·∂/∂Im` in the complex case.
fn gradient(frame: &Frame, c: &MeasurementVec, x: &VectorH) -> VectorH {
    let mut g = nalgebra::DVector::<Complex64>::zeros(x.dim());
    for (f, &ck) in frame.vectors().iter().zip(c.values()) {
        let ip = x.inner(f);
        let r = ip.norm_sqr() - ck;
        g.axpy(ip * (4.0 * r), f.entries(), Complex64::new(1.0, 0.0));
    }
    VectorH::new(x.field(), g).expect("gradient of finite data is finite")
}

/// Gradient descent on `h(x) = ‖α(x) − c‖₂²` from `x0`.
///
/// Only steps that decrease `h` (by the Armijo rule when backtracking) are
/// accepted, so the residual never increases. Stops after `iters` accepted
/// steps, when no decreasing step is found, or when `h` reaches zero.
pub fn polish(frame: &Frame, c: &MeasurementVec, x0: &RayPoint, iters: usize, rule: StepRule) -> Result<PolishOutcome> {
    if c.count() != frame.count() {
        return arg(format!("measurement count {} does not match frame size {}", c.count(), frame.count()));
    }
    let step0 = match rule {
        StepRule::Armijo { initial_step } | StepRule::Fixed { step: initial_step } => initial_step,
    };
    if !(step0 > 0.0 && step0.is_finite()) {
        return arg(format!("step must be positive and finite (got {step0})"));
    }
    let mut x = x0.rep().clone();
    let mut h = objective(frame, c, &x)?;
    let mut history = vec![h];
    let mut accepted = 0;
    while accepted < iters && h > 0.0 {
        let g = gradient(frame, c, &x);
        let gg = g.norm_sq();
        if gg == 0.0 {
            break;
        }
        let mut step = step0;
        let mut next = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = x.sub(&g.scaled(step));
            let ht = objective(frame, c, &trial)?;
            let ok = match rule {
                StepRule::Armijo { .. } => ht <= h - ARMIJO_C * step * gg,
                StepRule::Fixed { .. } => ht < h,
            };
            if ok && ht < h {
                next = Some((trial, ht));
                break;
            }
            if matches!(rule, StepRule::Fixed { .. }) {
                break;
            }
            step *= ARMIJO_SHRINK;
        }
        match next {
            Some((trial, ht)) => {
                x = trial;
                h = ht;
                history.push(h);
                accepted += 1;
            }
            None => break,
        }
    }
    Ok(PolishOutcome {
        estimate: ray(&x),
        objective: history,
        accepted_steps: accepted,
    })
}

/// The pipeline for one frame, with the measurement operator factored once.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    frame: Frame,
    op: MeasurementOperator,
    group_tol: Option<f64>,
}

impl Reconstructor {
    pub fn new(frame: Frame, group_tol: Option<f64>) -> Result<Self> {
        if let Some(t) = group_tol {
            if !(t >= 0.0) {
                return arg(format!("group tolerance must be >= 0 (got {t})"));
            }
        }
        let op = MeasurementOperator::new(&frame);
        Ok(Self { frame, op, group_tol })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn operator(&self) -> &MeasurementOperator {
        &self.op
    }

    /// `ω(c)` with residual and stage norms.
    pub fn omega(&self, c: &MeasurementVec) -> Result<ReconstructReport> {
        let t = self.op.min_norm_inverse(c)?;
        let retracted = pi_retract(&t, self.group_tol)?;
        let estimate = kappa_inv(&retracted)?;
        let pipeline_stage_norms = StageNorms {
            measurement: c.dist(&MeasurementVec::zeros(c.count()), 2.0),
            pseudoinverse: t.frobenius(),
            retracted: retracted.carrier().frobenius(),
        };
        let residual = alpha(&self.frame, estimate.rep())?.dist(c, 2.0);
        Ok(ReconstructReport {
            estimate,
            residual,
            pipeline_stage_norms,
            polished: false,
            polish_steps: None,
        })
    }

    /// `ω(c)` followed by [`polish`].
    pub fn omega_polished(&self, c: &MeasurementVec, iters: usize, rule: StepRule) -> Result<ReconstructReport> {
        let mut report = self.omega(c)?;
        let out = polish(&self.frame, c, &report.estimate, iters, rule)?;
        report.residual = alpha(&self.frame, out.estimate.rep())?.dist(c, 2.0);
        report.estimate = out.estimate;
        report.polished = true;
        report.polish_steps = Some(out.accepted_steps);
        Ok(report)
    }

    /// [`Reconstructor::omega`] over many rows, in parallel, in input order.
    pub fn omega_batch(&self, rows: &[MeasurementVec]) -> Result<Vec<ReconstructReport>> {
        rows.par_iter().map(|c| self.omega(c)).collect()
    }
}

/// `ω(c)` for a single measurement vector.
pub fn omega(frame: &Frame, c: &MeasurementVec, group_tol: Option<f64>) -> Result<ReconstructReport> {
    Reconstructor::new(frame.clone(), group_tol)?.omega(c)
}

/// Upper bounds on `Lip(ω)` from `(R^m, ℓ^p)` to `(Ĥ, d_q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaLipBound {
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
    #[serde(with = "crate::report::exponent")]
    pub q: f64,
    /// `max(1, m^{1/2 − 1/p})`: from `ℓ^p` to `ℓ²` on `R^m`.
    pub input_factor: f64,
    /// `3 + 2^{1+1/q'}` with `q' = 2` for `q ≤ 2` and `q' = q` otherwise.
    pub retraction_factor: f64,
    /// `2^{max(0, 1/q − 1/2)}`: from `d_2` to `d_q` on rank-two differences.
    pub output_factor: f64,
    /// Smallest kept singular value of `𝒜`.
    pub sigma_min: f64,
    /// The certified constant of the implemented pipeline,
    /// `input · retraction · output / σ_min`; `None` if `𝒜 = 0`.
    pub pipeline: Option<f64>,
    /// The same product with `1/√a₀` in place of `1/σ_min`, when `a₀ > 0` is given.
    pub a0_form: Option<f64>,
}

/// Evaluates the composed Lipschitz bound of `ω` for exponents `p`, `q`.
pub fn omega_lip_bound(frame: &Frame, p: f64, q: f64, a0: Option<f64>) -> Result<OmegaLipBound> {
    check_exponent(p)?;
    check_exponent(q)?;
    let sigma_min = MeasurementOperator::new(frame).sigma_min();
    Ok(lip_bound_from_parts(frame.count(), sigma_min, p, q, a0))
}

pub(crate) fn lip_bound_from_parts(m: usize, sigma_min: f64, p: f64, q: f64, a0: Option<f64>) -> OmegaLipBound {
    let input_factor = (m as f64).powf(0.5 - reciprocal(p)).max(1.0);
    let q_prime = if q <= 2.0 { 2.0 } else { q };
    let retraction_factor = pi_lipschitz_bound(q_prime).expect("q' >= 2");
    let output_factor = 2f64.powf((reciprocal(q) - 0.5).max(0.0));
    let chain = input_factor * retraction_factor * output_factor;
    OmegaLipBound {
        p,
        q,
        input_factor,
        retraction_factor,
        output_factor,
        sigma_min,
        pipeline: (sigma_min > 0.0).then(|| chain / sigma_min),
        a0_form: a0.filter(|&a| a > 0.0).map(|a| chain / a.sqrt()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{gen_frame, named_frame, FrameKind};
    use crate::linalg::Field;
    use crate::metrics::lifted_dist;
    use crate::testutil::{random_vector, rng};
    use std::f64::consts::SQRT_2;

    fn augmented_pr3() -> Frame {
        let mut v = named_frame("r2_pr3").unwrap().vectors().to_vec();
        for row in [[1.0, -2.0], [0.3, 0.7], [-1.5, 0.4]] {
            v.push(VectorH::real(&row).unwrap());
        }
        Frame::new(v, "r2_pr3_plus").unwrap()
    }

    #[test]
    fn zero_measurement_gives_zero_ray() {
        let f = gen_frame(FrameKind::RandomGaussian, 3, 12, Field::Complex, 2, None).unwrap();
        let r = omega(&f, &MeasurementVec::zeros(12), None).unwrap();
        assert!(r.estimate.is_zero());
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn exact_on_augmented_fixture() {
        let f = augmented_pr3();
        let x = VectorH::real(&[3.0, 1.0]).unwrap();
        let r = omega(&f, &alpha(&f, &x).unwrap(), None).unwrap();
        assert!(lifted_dist(&r.estimate, &ray(&x), 1.0).unwrap() <= 1e-7);
        assert!(r.residual < 1e-9);
    }

    #[test]
    fn count_mismatch() {
        let f = augmented_pr3();
        assert!(matches!(omega(&f, &MeasurementVec::zeros(5), None), Err(crate::Error::Argument(_))));
    }

    #[test]
    fn left_inverse_on_range() {
        let mut g = rng(61);
        for field in [Field::Real, Field::Complex] {
            for n in 2..=4 {
                let f = gen_frame(FrameKind::RandomGaussian, n, n * n + n, field, 17, None).unwrap();
                let rec = Reconstructor::new(f.clone(), None).unwrap();
                for _ in 0..50 {
                    let x = random_vector(&mut g, n, field);
                    let est = rec.omega(&alpha(&f, &x).unwrap()).unwrap().estimate;
                    let err = lifted_dist(&est, &ray(&x), 1.0).unwrap();
                    assert!(err <= 1e-7 * x.norm_sq().max(1.0), "{err}");
                }
            }
        }
    }

    #[test]
    fn bound_shapes() {
        let f = gen_frame(FrameKind::RandomGaussian, 2, 4, Field::Real, 3, None).unwrap();
        let a0 = 0.25;
        let b = omega_lip_bound(&f, 2.0, 1.0, Some(a0)).unwrap();
        assert!((b.a0_form.unwrap() - (4.0 + 3.0 * SQRT_2) / a0.sqrt()).abs() < 1e-12);
        let b = omega_lip_bound(&f, 2.0, 2.0, Some(a0)).unwrap();
        assert!((b.a0_form.unwrap() - (3.0 + 2.0 * SQRT_2) / a0.sqrt()).abs() < 1e-12);
        let b = omega_lip_bound(&f, f64::INFINITY, 1.0, Some(a0)).unwrap();
        assert!((b.a0_form.unwrap() - 2.0 * (4.0 + 3.0 * SQRT_2) / a0.sqrt()).abs() < 1e-12);
        let b = omega_lip_bound(&f, 1.0, f64::INFINITY, None).unwrap();
        assert_eq!((b.input_factor, b.retraction_factor, b.output_factor), (1.0, 5.0, 1.0));
        assert!(b.a0_form.is_none());
        assert!(omega_lip_bound(&f, 0.5, 1.0, None).is_err());
    }

    #[test]
    fn pipeline_bound_holds_on_random_pairs() {
        let mut g = rng(62);
        let f = gen_frame(FrameKind::RandomGaussian, 3, 12, Field::Complex, 5, None).unwrap();
        let rec = Reconstructor::new(f.clone(), None).unwrap();
        for (p, q) in [(2.0, 1.0), (2.0, 2.0), (f64::INFINITY, 1.0)] {
            let bound = omega_lip_bound(&f, p, q, None).unwrap().pipeline.unwrap();
            for _ in 0..200 {
                let c1 = alpha(&f, &random_vector(&mut g, 3, Field::Complex)).unwrap();
                let noise = MeasurementVec::new((0..12).map(|_| rand::Rng::random_range(&mut g, -0.5..0.5)).collect()).unwrap();
                let c2 = c1.add(&noise);
                let (e1, e2) = (rec.omega(&c1).unwrap().estimate, rec.omega(&c2).unwrap().estimate);
                let lhs = lifted_dist(&e1, &e2, q).unwrap();
                assert!(lhs <= bound * c1.dist(&c2, p) + 1e-8);
            }
        }
    }

    #[test]
    fn polish_fixed_point_and_monotone() {
        let f = gen_frame(FrameKind::RandomGaussian, 3, 8, Field::Complex, 6, None).unwrap();
        let x = VectorH::complex(&[Complex64::new(1.0, 0.5), Complex64::new(-0.3, 0.0), Complex64::new(0.2, 1.0)]).unwrap();
        let c = alpha(&f, &x).unwrap();
        let exact = polish(&f, &c, &ray(&x), 50, StepRule::Armijo { initial_step: 0.01 }).unwrap();
        assert!(exact.residual() < 1e-12);

        let start = ray(&VectorH::complex(&[Complex64::new(1.0, 0.0); 3]).unwrap());
        let out = polish(&f, &c, &start, 200, StepRule::Armijo { initial_step: 0.05 }).unwrap();
        assert!(out.objective.windows(2).all(|w| w[1] <= w[0]));
        assert!(out.residual() < out.objective[0].sqrt());
        let none = polish(&f, &c, &start, 0, StepRule::Fixed { step: 1.0 }).unwrap();
        assert_eq!(none.estimate, start);
        assert_eq!(none.accepted_steps, 0);
    }

    #[test]
    fn polish_converges_from_pipeline_start_under_noise() {
        let mut g = rng(63);
        let f = gen_frame(FrameKind::RandomGaussian, 2, 6, Field::Real, 8, None).unwrap();
        let x = random_vector(&mut g, 2, Field::Real);
        let noise = MeasurementVec::new(vec![1e-3, -2e-3, 5e-4, 0.0, 1e-3, -1e-3]).unwrap();
        let c = alpha(&f, &x).unwrap().add(&noise);
        let rec = Reconstructor::new(f, None).unwrap();
        let plain = rec.omega(&c).unwrap();
        let polished = rec.omega_polished(&c, 100, StepRule::Armijo { initial_step: 0.05 }).unwrap();
        assert!(polished.polished);
        assert!(polished.residual <= plain.residual + 1e-14);
    }

    #[test]
    fn step_rule_from_b0() {
        assert_eq!(StepRule::from_b0(4.0).unwrap(), StepRule::Armijo { initial_step: 0.125 });
        assert!(StepRule::from_b0(0.0).is_err());
    }
}
