use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::frames::{alpha, gen_frame, FrameKind, MeasurementVec};
use crate::linalg::{check_exponent, schatten_norm, Field};
use crate::metrics::{kappa_inv, lifted_dist};
use crate::reconstruct::{omega_lip_bound, OmegaLipBound};
use crate::retraction::pi_retract;
use crate::sampling::{random_vector, stream_rng};

/// Settings of [`probe_omega`]. Each `(dim, field)` gets one Gaussian frame
/// with `dim² + dim` vectors, so the measurement map is generically injective.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaProbeConfig {
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
    #[serde(with = "crate::report::exponent")]
    pub q: f64,
    pub dims: Vec<usize>,
    pub fields: Vec<Field>,
    /// Measurement pairs per frame.
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaProbeRow {
    pub dim: usize,
    pub field: Field,
    pub frame_label: String,
    pub bound: OmegaLipBound,
    pub pairs: usize,
    /// Largest `d_q(ω(c), ω(c')) / ‖c − c'‖_p`.
    pub max_ratio: f64,
    /// Pairs exceeding `bound · ‖c − c'‖_p + 1e-8`.
    pub violations: usize,
    /// Pairs where a single stage exceeded its own constant.
    pub stage_violations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaProbeReport {
    pub config: OmegaProbeConfig,
    pub rows: Vec<OmegaProbeRow>,
}

impl OmegaProbeReport {
    pub fn bounds_held(&self) -> bool {
        self.rows.iter().all(|r| r.violations == 0 && r.stage_violations == 0)
    }
}

const SLACK: f64 = 1e-8;

/// Checks the composed Lipschitz bound of the reconstruction pipeline on
/// random measurement pairs, stage by stage. Half of the pairs are
/// independent images `α(x), α(x')`; the other half perturb `α(x)` by
/// noise of relative size `1e-3`.
pub fn probe_omega(cfg: &OmegaProbeConfig) -> Result<OmegaProbeReport> {
    check_exponent(cfg.p)?;
    check_exponent(cfg.q)?;
    if cfg.dims.is_empty() || cfg.fields.is_empty() || cfg.dims.contains(&0) {
        return arg("probe_omega needs positive dimensions and at least one field");
    }
    let combos: Vec<(usize, Field)> =
        cfg.dims.iter().flat_map(|&d| cfg.fields.iter().map(move |&f| (d, f))).collect();
    let rows = combos
        .par_iter()
        .enumerate()
        .map(|(idx, &(dim, field))| probe_frame(cfg, idx as u64, dim, field))
        .collect::<Result<Vec<_>>>()?;
    Ok(OmegaProbeReport {
        config: cfg.clone(),
        rows,
    })
}

fn probe_frame(cfg: &OmegaProbeConfig, stream: u64, dim: usize, field: Field) -> Result<OmegaProbeRow> {
    let frame = gen_frame(FrameKind::RandomGaussian, dim, dim * dim + dim, field, cfg.seed, None)?;
    let bound = omega_lip_bound(&frame, cfg.p, cfg.q, None)?;
    let op = crate::frames::MeasurementOperator::new(&frame);
    let lip = bound.pipeline.unwrap_or(f64::INFINITY);
    let sigma = bound.sigma_min;
    let q2 = if cfg.q <= 2.0 { 2.0 } else { cfg.q };
    let m = frame.count();
    let mut rng = stream_rng(cfg.seed, stream);
    let (mut max_ratio, mut violations, mut stage_violations, mut pairs) = (0.0_f64, 0, 0, 0);
    for k in 0..cfg.samples {
        let c1 = alpha(&frame, &random_vector(&mut rng, dim, field))?;
        let c2 = if k % 2 == 0 {
            alpha(&frame, &random_vector(&mut rng, dim, field))?
        } else {
            let scale = 1e-3 * c1.dist(&MeasurementVec::zeros(m), 2.0) / (m as f64).sqrt();
            let e: Vec<f64> = (0..m).map(|_| scale * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            c1.add(&MeasurementVec::new(e)?)
        };
        let den = c1.dist(&c2, cfg.p);
        if den == 0.0 {
            continue;
        }
        pairs += 1;
        let (t1, t2) = (op.min_norm_inverse(&c1)?, op.min_norm_inverse(&c2)?);
        let (r1, r2) = (pi_retract(&t1, None)?, pi_retract(&t2, None)?);
        let (e1, e2) = (kappa_inv(&r1)?, kappa_inv(&r2)?);
        let out = lifted_dist(&e1, &e2, cfg.q)?;
        max_ratio = max_ratio.max(out / den);
        if out > lip * den + SLACK {
            violations += 1;
        }

        // Stage by stage: ℓ^p → ℓ², pseudoinverse, retraction, d_{q'} → d_q.
        let l2 = c1.dist(&c2, 2.0);
        let frob = (&t1 - &t2).frobenius();
        let pi_in = schatten_norm(&(&t1 - &t2), q2)?;
        let pi_out = schatten_norm(&(r1.carrier() - r2.carrier()), q2)?;
        let stages_ok = l2 <= bound.input_factor * den * (1.0 + 1e-12) + SLACK
            && frob * sigma <= l2 * (1.0 + 1e-9) + SLACK
            && pi_in <= frob * (1.0 + 1e-12) + SLACK
            && pi_out <= bound.retraction_factor * pi_in + SLACK
            && out <= bound.output_factor * lifted_dist(&e1, &e2, q2)? * (1.0 + 1e-9) + SLACK;
        if !stages_ok {
            stage_violations += 1;
        }
    }
    Ok(OmegaProbeRow {
        dim,
        field,
        frame_label: frame.label().to_owned(),
        bound,
        pairs,
        max_ratio,
        violations,
        stage_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_hold_for_small_config() {
        for (p, q) in [(2.0, 1.0), (2.0, 2.0), (f64::INFINITY, 1.0), (1.0, f64::INFINITY)] {
            let cfg = OmegaProbeConfig {
                p,
                q,
                dims: vec![2, 3],
                fields: vec![Field::Real, Field::Complex],
                samples: 200,
                seed: 1,
            };
            let r = probe_omega(&cfg).unwrap();
            assert!(r.bounds_held(), "{:?}", r.rows);
            assert!(r.rows.iter().all(|row| row.pairs == 200 && row.max_ratio > 0.0));
        }
    }
}
