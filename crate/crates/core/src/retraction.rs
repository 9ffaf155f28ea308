//! The retraction `π: Sym(H) → S^{1,0}(H)`,
//!
//! ```text
//! π(A) = (λ₁ − λ₂) P₁,
//! ```
//!
//! where `λ₁ ≥ λ₂` are the two largest eigenvalues (with multiplicity) and
//! `P₁` projects onto the top eigenspace. `π` fixes every rank-one PSD
//! operator and is Lipschitz in every Schatten norm with constant at most
//! `3 + 2^{1+1/p}`.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::linalg::{check_exponent, schatten_norm, spectral_decompose, Field, RankOnePSD, SymOp, VectorH};
use crate::sampling::{random_phase, random_symop, random_unitary, random_vector, stream_rng};

/// `π(A)`.
///
/// `group_tol` is passed to [`spectral_decompose`]. When the top group is
/// merged (multiplicity ≥ 2) the coefficient `λ₁ − λ₂` is at most the
/// tolerance and the result is `(λ₁ − λ₂)·u₁u₁*` for the first eigenvector
/// `u₁` of the group, which stays within `λ₁ − λ₂` of `(λ₁ − λ₂)P₁` and is
/// rank one. For `n = 1` the missing `λ₂` is taken as `0`, so `π(a) = max(a, 0)`.
pub fn pi_retract(a: &SymOp, group_tol: Option<f64>) -> Result<RankOnePSD> {
    let d = spectral_decompose(a, group_tol)?;
    let top = d.eigenvalues[0];
    let second = d.eigenvalues.get(1).copied().unwrap_or(0.0);
    let gap = (top - second).max(0.0);
    let u1 = &d.eigenvectors[0];
    let carrier = crate::linalg::sym_outer(u1, u1)?.scaled(gap);
    Ok(RankOnePSD::from_parts_unchecked(carrier, u1.scaled(gap.sqrt())))
}

/// The Lipschitz bound `3 + 2^{1+1/p}` of `π` in the Schatten p-norm.
pub fn pi_lipschitz_bound(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(3.0 + 2f64.powf(1.0 + crate::linalg::reciprocal(p)))
}

/// `‖π(A) − π(B)‖_p / ‖A − B‖_p`.
pub fn pi_lipschitz_ratio(a: &SymOp, b: &SymOp, p: f64) -> Result<f64> {
    check_exponent(p)?;
    a.ensure_compatible(b, "pi_lipschitz_ratio")?;
    let den = schatten_norm(&(a - b), p)?;
    if den == 0.0 {
        return arg("pi_lipschitz_ratio needs A != B");
    }
    let pa = pi_retract(a, None)?;
    let pb = pi_retract(b, None)?;
    Ok(schatten_norm(&(pa.carrier() - pb.carrier()), p)? / den)
}

/// Pair generators for the ratio probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSampler {
    /// Independent `(G + G*)/2` with Gaussian `G`.
    Gaussian,
    /// `A` with top gap near `1e-6`; `B = A + E`, `E` of comparable size and
    /// mostly rotating the top eigenvector into the second.
    SmallGap,
    /// `A = xx*` and `B = xx* + εG`, or `xx* ± εG`.
    RankOnePerturbed,
}

impl PairSampler {
    pub const ALL: [PairSampler; 3] = [PairSampler::Gaussian, PairSampler::SmallGap, PairSampler::RankOnePerturbed];

    pub fn name(self) -> &'static str {
        match self {
            PairSampler::Gaussian => "gaussian",
            PairSampler::SmallGap => "small_gap",
            PairSampler::RankOnePerturbed => "rank_one_perturbed",
        }
    }
}

fn unit_frobenius<R: Rng + ?Sized>(rng: &mut R, dim: usize, field: Field) -> SymOp {
    loop {
        let g = random_symop(rng, dim, field);
        let f = g.frobenius();
        if f > 1e-8 {
            return g.scaled(1.0 / f);
        }
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, center: f64, decades: f64) -> f64 {
    center * 10f64.powf(rng.random_range(-decades..=decades))
}

/// Draws one pair from `sampler`.
pub fn sample_pair<R: Rng + ?Sized>(rng: &mut R, sampler: PairSampler, dim: usize, field: Field) -> (SymOp, SymOp) {
    match sampler {
        PairSampler::Gaussian => (random_symop(rng, dim, field), random_symop(rng, dim, field)),
        PairSampler::SmallGap if dim < 2 => sample_pair(rng, PairSampler::Gaussian, dim, field),
        PairSampler::SmallGap => {
            let gap = log_uniform(rng, 1e-6, 1.0);
            let mut lambda = Vec::with_capacity(dim);
            let l1: f64 = rng.sample(rand_distr::StandardNormal);
            lambda.push(l1);
            lambda.push(l1 - gap);
            for k in 2..dim {
                let step: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal).abs();
                lambda.push(lambda[k - 1] - step);
            }
            let u = random_unitary(rng, dim, field);
            let a = SymOp::diag(field, &lambda).conjugate_by(&u).expect("square unitary");

            let (u1, u2) = (u.column(0), u.column(1) * random_phase(rng, field));
            let rot = u1 * u2.adjoint() + u2 * u1.adjoint();
            let rot = SymOp::from_matrix(field, rot.scale(1.0 / SQRT_2)).expect("Hermitian by construction");
            let noise = unit_frobenius(rng, dim, field);
            let t = rng.random_range(0.0..0.5 * FRAC_PI_2);
            let eps = log_uniform(rng, gap, 1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let e = &rot.scaled(eps * t.cos()) + &noise.scaled(eps * t.sin());
            let b = &a + &e;
            (a, b)
        }
        PairSampler::RankOnePerturbed => {
            let x = random_vector(rng, dim, field);
            let t = crate::linalg::sym_outer(&x, &x).expect("same vector");
            let g = unit_frobenius(rng, dim, field).scaled(log_uniform(rng, 1e-4, 3.0) * x.norm_sq());
            if rng.random::<bool>() {
                let b = &t + &g;
                (t, b)
            } else {
                (&t + &g, &t - &g)
            }
        }
    }
}

/// Settings of [`probe_pi`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiProbeConfig {
    #[serde(with = "exponents")]
    pub exponents: Vec<f64>,
    pub dims: Vec<usize>,
    pub fields: Vec<Field>,
    /// Gaussian pairs per `(dim, field)`.
    pub random_pairs: usize,
    /// Structured pairs in total, split evenly over `(dim, field)` and the
    /// two structured samplers.
    pub adversarial_pairs: usize,
    pub seed: u64,
    pub histogram_bins: usize,
}

impl Default for PiProbeConfig {
    fn default() -> Self {
        Self {
            exponents: vec![1.0, 2.0, f64::INFINITY],
            dims: vec![2, 3, 4, 8],
            fields: vec![Field::Real, Field::Complex],
            random_pairs: 10_000,
            adversarial_pairs: 100_000,
            seed: 0,
            histogram_bins: 20,
        }
    }
}

mod exponents {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ps: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(ps.len()))?;
        for p in ps {
            seq.serialize_element(&crate::report::exponent::label(*p))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| crate::report::exponent::parse_exponent(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Location of the largest ratio seen for one exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstPair {
    pub sampler: PairSampler,
    pub dim: usize,
    pub field: Field,
    /// Index of the pair within its `(sampler, dim, field)` batch.
    pub index: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerMax {
    pub sampler: PairSampler,
    pub pairs: usize,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiExponentSummary {
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
    pub bound: f64,
    pub pairs: usize,
    pub max_ratio: f64,
    pub violations: usize,
    pub per_sampler: Vec<SamplerMax>,
    pub worst: Option<WorstPair>,
}

/// One bin of a ratio histogram over `[0, bound]`; the last bin also
/// collects anything above the bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramRow {
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
    pub sampler: PairSampler,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// The 2×2 pair `(I₂, diag(2, 0))`, whose ratio is 2 for `p = ∞`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferencePair {
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiProbeReport {
    pub config: PiProbeConfig,
    pub summaries: Vec<PiExponentSummary>,
    pub reference_pair: Vec<ReferencePair>,
    pub histogram: Vec<HistogramRow>,
    /// Pairs skipped because `A = B` numerically.
    pub skipped: usize,
}

impl PiProbeReport {
    /// True if no ratio exceeded `bound + 1e-8`.
    pub fn bounds_held(&self) -> bool {
        self.summaries.iter().all(|s| s.violations == 0)
    }

    pub fn summary(&self, p: f64) -> Option<&PiExponentSummary> {
        self.summaries.iter().find(|s| s.p == p)
    }
}

/// Slack added to the Lipschitz bound before counting a violation.
pub const BOUND_SLACK: f64 = 1e-8;

struct Batch {
    sampler: PairSampler,
    dim: usize,
    field: Field,
    count: usize,
    stream: u64,
}

struct BatchResult {
    // per exponent: (max, argmax, violations, histogram)
    max: Vec<f64>,
    argmax: Vec<usize>,
    violations: Vec<usize>,
    hist: Vec<Vec<usize>>,
    skipped: usize,
}

fn run_batch(cfg: &PiProbeConfig, bounds: &[f64], batch: &Batch) -> Result<BatchResult> {
    let np = cfg.exponents.len();
    let bins = cfg.histogram_bins.max(1);
    let mut out = BatchResult {
        max: vec![f64::NEG_INFINITY; np],
        argmax: vec![0; np],
        violations: vec![0; np],
        hist: vec![vec![0; bins]; np],
        skipped: 0,
    };
    let mut rng = stream_rng(cfg.seed, batch.stream);
    for idx in 0..batch.count {
        let (a, b) = sample_pair(&mut rng, batch.sampler, batch.dim, batch.field);
        let diff = &a - &b;
        let num = &pi_retract(&a, None)?.into_carrier() - &pi_retract(&b, None)?.into_carrier();
        let dvals = crate::linalg::eigenvalues(&diff)?;
        let nvals = crate::linalg::eigenvalues(&num)?;
        for (j, &p) in cfg.exponents.iter().enumerate() {
            let den = crate::linalg::schatten_norm_of_values(&dvals, p)?;
            if den == 0.0 {
                if j == 0 {
                    out.skipped += 1;
                }
                continue;
            }
            let r = crate::linalg::schatten_norm_of_values(&nvals, p)? / den;
            if r > out.max[j] {
                out.max[j] = r;
                out.argmax[j] = idx;
            }
            if r > bounds[j] + BOUND_SLACK {
                out.violations[j] += 1;
            }
            let bin = ((r / bounds[j]) * bins as f64).floor().clamp(0.0, (bins - 1) as f64) as usize;
            out.hist[j][bin] += 1;
        }
    }
    Ok(out)
}

/// Monte-Carlo estimate of the Lipschitz ratio of `π` over the configured
/// samplers, dimensions and fields. Every pair is evaluated for every exponent.
///
/// Batches run in parallel, each with its own generator stream, and are
/// merged in a fixed order, so the report depends only on the config.
pub fn probe_pi(cfg: &PiProbeConfig) -> Result<PiProbeReport> {
    for &p in &cfg.exponents {
        check_exponent(p)?;
    }
    if cfg.exponents.is_empty() || cfg.dims.is_empty() || cfg.fields.is_empty() {
        return arg("probe_pi needs at least one exponent, dimension and field");
    }
    if cfg.dims.contains(&0) {
        return arg("dimensions must be positive");
    }
    let bounds: Vec<f64> = cfg.exponents.iter().map(|&p| pi_lipschitz_bound(p)).collect::<Result<_>>()?;

    let combos: Vec<(usize, Field)> =
        cfg.dims.iter().flat_map(|&d| cfg.fields.iter().map(move |&f| (d, f))).collect();
    let structured = [PairSampler::SmallGap, PairSampler::RankOnePerturbed];
    let slots = combos.len() * structured.len();
    let mut batches = Vec::new();
    for (c, &(dim, field)) in combos.iter().enumerate() {
        batches.push(Batch {
            sampler: PairSampler::Gaussian,
            dim,
            field,
            count: cfg.random_pairs,
            stream: batches.len() as u64,
        });
        for (s, &sampler) in structured.iter().enumerate() {
            let slot = c * structured.len() + s;
            let count = cfg.adversarial_pairs / slots + usize::from(slot < cfg.adversarial_pairs % slots);
            batches.push(Batch {
                sampler,
                dim,
                field,
                count,
                stream: batches.len() as u64,
            });
        }
    }

    let results: Vec<BatchResult> =
        batches.par_iter().map(|b| run_batch(cfg, &bounds, b)).collect::<Result<_>>()?;

    let bins = cfg.histogram_bins.max(1);
    let mut summaries = Vec::new();
    let mut histogram = Vec::new();
    for (j, &p) in cfg.exponents.iter().enumerate() {
        let mut max_ratio = f64::NEG_INFINITY;
        let mut worst = None;
        let mut violations = 0;
        let mut pairs = 0;
        let mut per_sampler: Vec<SamplerMax> = PairSampler::ALL
            .iter()
            .map(|&sampler| SamplerMax {
                sampler,
                pairs: 0,
                max_ratio: 0.0,
            })
            .collect();
        let mut hist = vec![vec![0usize; bins]; PairSampler::ALL.len()];
        for (b, r) in batches.iter().zip(&results) {
            let si = PairSampler::ALL.iter().position(|&s| s == b.sampler).unwrap();
            let evaluated = b.count - r.skipped;
            pairs += evaluated;
            violations += r.violations[j];
            per_sampler[si].pairs += evaluated;
            if evaluated > 0 {
                per_sampler[si].max_ratio = per_sampler[si].max_ratio.max(r.max[j]);
                if r.max[j] > max_ratio {
                    max_ratio = r.max[j];
                    worst = Some(WorstPair {
                        sampler: b.sampler,
                        dim: b.dim,
                        field: b.field,
                        index: r.argmax[j],
                    });
                }
            }
            for (h, c) in hist[si].iter_mut().zip(&r.hist[j]) {
                *h += c;
            }
        }
        for (si, &sampler) in PairSampler::ALL.iter().enumerate() {
            for (k, &count) in hist[si].iter().enumerate() {
                histogram.push(HistogramRow {
                    p,
                    sampler,
                    lo: bounds[j] * k as f64 / bins as f64,
                    hi: bounds[j] * (k + 1) as f64 / bins as f64,
                    count,
                });
            }
        }
        summaries.push(PiExponentSummary {
            p,
            bound: bounds[j],
            pairs,
            max_ratio: if pairs > 0 { max_ratio } else { 0.0 },
            violations,
            per_sampler,
            worst,
        });
    }

    let (ia, ib) = reference_pair();
    let mut ref_ps = cfg.exponents.clone();
    if !ref_ps.contains(&f64::INFINITY) {
        ref_ps.push(f64::INFINITY);
    }
    let reference_pair = ref_ps
        .into_iter()
        .map(|p| Ok(ReferencePair { p, ratio: pi_lipschitz_ratio(&ia, &ib, p)? }))
        .collect::<Result<_>>()?;

    Ok(PiProbeReport {
        config: cfg.clone(),
        summaries,
        reference_pair,
        histogram,
        skipped: results.iter().map(|r| r.skipped).sum(),
    })
}

/// `(I₂, diag(2, 0))`.
pub fn reference_pair() -> (SymOp, SymOp) {
    (SymOp::identity(2, Field::Real), SymOp::diag(Field::Real, &[2.0, 0.0]))
}

/// `π(U A U*)` and `U π(A) U*`, for checking unitary equivariance.
pub fn conjugated_pair(a: &SymOp, u: &DMatrix<Complex64>) -> Result<(SymOp, SymOp)> {
    let lhs = pi_retract(&a.conjugate_by(u)?, None)?.into_carrier();
    let rhs = pi_retract(a, None)?.into_carrier().conjugate_by(u)?;
    Ok((lhs, rhs))
}

/// Rank-one PSD operators `[x,x]` with `x` Gaussian.
pub fn random_rank_one<R: Rng + ?Sized>(rng: &mut R, dim: usize, field: Field) -> (VectorH, SymOp) {
    let x = random_vector(rng, dim, field);
    let t = crate::linalg::sym_outer(&x, &x).expect("same vector");
    (x, t)
}
