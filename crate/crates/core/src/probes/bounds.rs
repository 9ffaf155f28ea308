use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::frames::{alpha, Frame};
use crate::linalg::{Field, VectorH};
use crate::metrics::{lifted_dist, ray};
use crate::sampling::{random_unit_vector, random_vector, stream_rng};

/// Pairs with `ρ(u, v)` at or below this value are excluded (unit vectors).
pub const RHO_FLOOR: f64 = 1e-9;
/// Angle-grid resolution of the two-dimensional real oracle.
pub const GRID_RESOLUTION: usize = 2048;
pub const DEFAULT_A0_STARTS: usize = 64;
pub const DEFAULT_VERDICT_THRESHOLD: f64 = 1e-8;

/// `Q ≤ 1e-12 · Σ‖f_k‖⁴` counts as an exact zero.
const WITNESS_REL_TOL: f64 = 1e-12;
const MAX_ITERS: usize = 5000;
const ARMIJO_C: f64 = 1e-4;
const GRID_REFINE_SEEDS: usize = 8;
/// Stream offset separating `b₀` sampling from the `a₀` multistart streams.
const B0_STREAM: u64 = 1 << 40;
const BILIPSCHITZ_STREAM: u64 = 1 << 41;

type CVec = DVector<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub q: f64,
    pub rho: f64,
}

impl PairValue {
    pub fn ratio(&self) -> f64 {
        self.q / self.rho
    }
}

/// `Q(u, v)` and `ρ(u, v)`.
pub fn pair_objective(frame: &Frame, u: &VectorH, v: &VectorH) -> Result<PairValue> {
    for w in [u, v] {
        if w.dim() != frame.dim() {
            return arg(format!("vector has dim {} but frame has dim {}", w.dim(), frame.dim()));
        }
        frame.field().ensure_same(w.field(), "pair_objective")?;
    }
    Ok(eval(frame, u.entries(), v.entries()))
}

fn eval(frame: &Frame, u: &CVec, v: &CVec) -> PairValue {
    let mut q = 0.0;
    for f in frame.vectors() {
        let f = f.entries();
        // ⟨u, f⟩ = f*u
        let (a, b) = (f.dotc(u), f.dotc(v));
        let w = (a * b.conj()).re;
        q += w * w;
    }
    let s = v.dotc(u).im;
    let rho = u.norm_squared() * v.norm_squared() - s * s;
    PairValue { q, rho }
}

/// Value and real gradients `(∂/∂Re + i∂/∂Im)` of `Q/ρ` in `u` and `v`.
fn eval_grad(frame: &Frame, u: &CVec, v: &CVec) -> (PairValue, CVec, CVec) {
    let n = u.len();
    let one = Complex64::new(1.0, 0.0);
    let (mut gq_u, mut gq_v) = (CVec::zeros(n), CVec::zeros(n));
    let mut q = 0.0;
    for f in frame.vectors() {
        let f = f.entries();
        let (a, b) = (f.dotc(u), f.dotc(v));
        let w = (a * b.conj()).re;
        q += w * w;
        gq_u.axpy(b * (2.0 * w), f, one);
        gq_v.axpy(a * (2.0 * w), f, one);
    }
    let (nu, nv) = (u.norm_squared(), v.norm_squared());
    let s = v.dotc(u).im;
    let rho = nu * nv - s * s;
    let i = Complex64::new(0.0, 1.0);
    // ∇_u ρ = 2‖v‖²u − 2s·iv,  ∇_v ρ = 2‖u‖²v + 2s·iu
    let grho_u = u * Complex64::from(2.0 * nv) - v * (i * (2.0 * s));
    let grho_v = v * Complex64::from(2.0 * nu) + u * (i * (2.0 * s));
    let gu = (gq_u * Complex64::from(rho) - grho_u * Complex64::from(q)) / Complex64::from(rho * rho);
    let gv = (gq_v * Complex64::from(rho) - grho_v * Complex64::from(q)) / Complex64::from(rho * rho);
    (PairValue { q, rho }, gu, gv)
}

fn normalized(u: CVec) -> CVec {
    let n = u.norm();
    u / Complex64::from(n)
}

fn tangent(g: &CVec, u: &CVec) -> CVec {
    g - u * Complex64::from(u.dotc(g).re)
}

fn frame_scale(frame: &Frame) -> f64 {
    frame.vectors().iter().map(|f| f.norm_sq().powi(2)).sum()
}

/// Projected gradient descent (or ascent) of `Q/ρ` on the product of unit
/// spheres with Armijo backtracking. `None` if the start has `ρ ≤ RHO_FLOOR`.
fn descend(frame: &Frame, u: CVec, v: CVec, maximize: bool) -> Option<(CVec, CVec, PairValue)> {
    let scale = frame_scale(frame);
    let sign = if maximize { -1.0 } else { 1.0 };
    let (mut u, mut v) = (normalized(u), normalized(v));
    let (mut val, mut gu, mut gv) = eval_grad(frame, &u, &v);
    if !(val.rho > RHO_FLOOR) {
        return None;
    }
    let mut step = 1.0 / scale;
    for _ in 0..MAX_ITERS {
        let (tu, tv) = (tangent(&gu, &u), tangent(&gv, &v));
        let g2 = tu.norm_squared() + tv.norm_squared();
        if g2.sqrt() <= 1e-14 * scale {
            break;
        }
        let f0 = sign * val.ratio();
        step *= 2.0;
        let mut accepted = false;
        for _ in 0..60 {
            let nu = normalized(&u - &tu * Complex64::from(sign * step));
            let nv = normalized(&v - &tv * Complex64::from(sign * step));
            let (nval, ngu, ngv) = eval_grad(frame, &nu, &nv);
            if nval.rho > RHO_FLOOR && sign * nval.ratio() <= f0 - ARMIJO_C * step * g2 {
                (u, v, val, gu, gv) = (nu, nv, nval, ngu, ngv);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some((u, v, val))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A0Method {
    /// Exhaustive angle grid plus local refinement (two-dimensional real frames).
    Grid,
    /// Best of the projected-gradient multistarts.
    Multistart,
}

/// Estimate of `a₀ = inf Q/ρ`. Being a minimum over explored points it is an
/// upper bound on the true constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A0Estimate {
    pub value: f64,
    pub argmin_u: VectorH,
    pub argmin_v: VectorH,
    pub q: f64,
    pub rho: f64,
    pub method: A0Method,
    pub starts: usize,
    pub seed: u64,
    pub grid_resolution: Option<usize>,
    pub multistart_value: f64,
    pub grid_value: Option<f64>,
}

struct Candidate {
    u: CVec,
    v: CVec,
    value: PairValue,
}

fn multistart(frame: &Frame, starts: usize, seed: u64) -> Result<Candidate> {
    let (n, field) = (frame.dim(), frame.field());
    let results: Vec<Option<Candidate>> = (0..starts)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(seed, idx as u64);
            for _ in 0..100 {
                let u = random_unit_vector(&mut rng, n, field).entries().clone();
                let v = random_unit_vector(&mut rng, n, field).entries().clone();
                if let Some((u, v, value)) = descend(frame, u, v, false) {
                    return Some(Candidate { u, v, value });
                }
            }
            None
        })
        .collect();
    results
        .into_iter()
        .flatten()
        .reduce(|best, c| if c.value.ratio() < best.value.ratio() { c } else { best })
        .ok_or_else(|| Error::Numerical("no multistart reached the admissible region ρ > 1e-9".into()))
}

fn angle_table(resolution: usize) -> Vec<(f64, f64)> {
    (0..resolution)
        .map(|i| {
            if i == 0 {
                (1.0, 0.0)
            } else if 2 * i == resolution {
                (0.0, 1.0)
            } else {
                let t = PI * i as f64 / resolution as f64;
                (t.cos(), t.sin())
            }
        })
        .collect()
}

fn angle_ratio(frame: &Frame, u: (f64, f64), v: (f64, f64)) -> f64 {
    frame
        .vectors()
        .iter()
        .map(|f| {
            let (f0, f1) = (f.get(0).re, f.get(1).re);
            let w = (f0 * u.0 + f1 * u.1) * (f0 * v.0 + f1 * v.1);
            w * w
        })
        .sum()
}

/// Exhaustive search over `u = (cos θ, sin θ)`, `v = (cos φ, sin φ)` with
/// `θ, φ ∈ {πi/N}`, followed by a compass-search refinement of the best
/// grid points. Only for two-dimensional real frames.
pub fn a0_grid_oracle(frame: &Frame, resolution: usize) -> Result<A0Estimate> {
    if frame.dim() != 2 || frame.field() != Field::Real {
        return arg("the angle-grid oracle needs a two-dimensional real frame");
    }
    if resolution < 4 {
        return arg("grid resolution must be at least 4");
    }
    let table = angle_table(resolution);
    let coords: Vec<(f64, f64)> = frame.vectors().iter().map(|f| (f.get(0).re, f.get(1).re)).collect();
    let proj: Vec<Vec<f64>> = coords
        .iter()
        .map(|&(f0, f1)| table.iter().map(|&(c, s)| f0 * c + f1 * s).collect())
        .collect();

    // Best grid points, ascending by value.
    let mut best: Vec<(f64, usize, usize)> = Vec::with_capacity(GRID_REFINE_SEEDS + 1);
    for i in 0..resolution {
        for j in 0..resolution {
            let q: f64 = proj.iter().map(|p| (p[i] * p[j]).powi(2)).sum();
            if best.len() < GRID_REFINE_SEEDS || q < best.last().unwrap().0 {
                let pos = best.partition_point(|b| b.0 <= q);
                best.insert(pos, (q, i, j));
                best.truncate(GRID_REFINE_SEEDS);
            }
        }
    }

    let h0 = PI / resolution as f64;
    let mut winner: Option<((f64, f64), (f64, f64), f64)> = None;
    for &(q, i, j) in &best {
        let (mut th, mut ph) = (PI * i as f64 / resolution as f64, PI * j as f64 / resolution as f64);
        let (mut u, mut v, mut val) = (table[i], table[j], q);
        let mut h = h0;
        while h > 1e-13 && val > 0.0 {
            let mut improved = false;
            for (dt, dp) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let (t2, p2) = (th + dt * h, ph + dp * h);
                let (u2, v2) = ((t2.cos(), t2.sin()), (p2.cos(), p2.sin()));
                let r = angle_ratio(frame, u2, v2);
                if r < val {
                    (th, ph, u, v, val) = (t2, p2, u2, v2, r);
                    improved = true;
                    break;
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        if winner.as_ref().is_none_or(|w| val < w.2) {
            winner = Some((u, v, val));
        }
    }
    let (u, v, _) = winner.expect("grid is nonempty");
    let uu = VectorH::real(&[u.0, u.1])?;
    let vv = VectorH::real(&[v.0, v.1])?;
    let pv = pair_objective(frame, &uu, &vv)?;
    Ok(A0Estimate {
        value: pv.ratio(),
        argmin_u: uu,
        argmin_v: vv,
        q: pv.q,
        rho: pv.rho,
        method: A0Method::Grid,
        starts: 0,
        seed: 0,
        grid_resolution: Some(resolution),
        multistart_value: f64::NAN,
        grid_value: Some(pv.ratio()),
    })
}

/// Minimizes `Q/ρ` over unit `u, v` by projected gradient descent from
/// `starts` random starts; start `i` draws from stream `(seed, i)`. For
/// two-dimensional real frames the angle grid also runs and the smaller
/// value wins (ties go to the grid, whose points are exact).
pub fn estimate_a0(frame: &Frame, starts: usize, seed: u64) -> Result<A0Estimate> {
    if starts < 1 {
        return arg("estimate_a0 needs at least one start");
    }
    let best = multistart(frame, starts, seed)?;
    let ms_u = VectorH::new(frame.field(), best.u)?;
    let ms_v = VectorH::new(frame.field(), best.v)?;
    let ms = pair_objective(frame, &ms_u, &ms_v)?;
    let mut est = A0Estimate {
        value: ms.ratio(),
        argmin_u: ms_u,
        argmin_v: ms_v,
        q: ms.q,
        rho: ms.rho,
        method: A0Method::Multistart,
        starts,
        seed,
        grid_resolution: None,
        multistart_value: ms.ratio(),
        grid_value: None,
    };
    if frame.dim() == 2 && frame.field() == Field::Real {
        let grid = a0_grid_oracle(frame, GRID_RESOLUTION)?;
        est.grid_value = Some(grid.value);
        est.grid_resolution = Some(GRID_RESOLUTION);
        est.method = A0Method::Grid;
        if grid.value <= est.value {
            est.value = grid.value;
            est.argmin_u = grid.argmin_u;
            est.argmin_v = grid.argmin_v;
            est.q = grid.q;
            est.rho = grid.rho;
        }
    }
    Ok(est)
}

/// Estimate of `b₀ = sup Q/ρ`, a lower bound on the true constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct B0Estimate {
    pub value: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest ratio among the raw samples.
    pub sample_max: f64,
    /// Number of local ascents (one per new running maximum).
    pub ascents: usize,
    pub argmax_u: VectorH,
    pub argmax_v: VectorH,
}

/// Samples pairs `(x, y)`, evaluates `‖α(x) − α(y)‖²/d₁²` through
/// `u = (x + y)/2`, `v = (x − y)/2`, and runs a local ascent from every
/// sample that sets a new running maximum. The result never decreases as
/// `samples` grows for a fixed seed.
pub fn estimate_b0(frame: &Frame, samples: usize, seed: u64) -> Result<B0Estimate> {
    if samples < 1 {
        return arg("estimate_b0 needs at least one sample");
    }
    let (n, field) = (frame.dim(), frame.field());
    let mut rng = stream_rng(seed, B0_STREAM);
    let mut sample_max = f64::NEG_INFINITY;
    let mut records: Vec<(CVec, CVec)> = Vec::new();
    for _ in 0..samples {
        let x = random_vector(&mut rng, n, field);
        let y = random_vector(&mut rng, n, field);
        let u = x.add(&y).scaled(0.5);
        let v = x.sub(&y).scaled(0.5);
        if u.norm() == 0.0 || v.norm() == 0.0 {
            continue;
        }
        let (u, v) = (normalized(u.entries().clone()), normalized(v.entries().clone()));
        let val = eval(frame, &u, &v);
        if val.rho > RHO_FLOOR && val.ratio() > sample_max {
            sample_max = val.ratio();
            records.push((u, v));
        }
    }
    let ascended: Vec<Option<(CVec, CVec, PairValue)>> =
        records.par_iter().map(|(u, v)| descend(frame, u.clone(), v.clone(), true)).collect();
    let mut best: Option<(CVec, CVec, f64)> = None;
    for (u, v, val) in ascended.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| val.ratio() > b.2) {
            best = Some((u, v, val.ratio()));
        }
    }
    let (u, v, _) = best.ok_or_else(|| Error::Numerical("no admissible b0 sample".into()))?;
    let (u, v) = (VectorH::new(field, u)?, VectorH::new(field, v)?);
    let value = pair_objective(frame, &u, &v)?.ratio().max(sample_max);
    Ok(B0Estimate {
        value,
        samples,
        seed,
        sample_max,
        ascents: records.len(),
        argmax_u: u,
        argmax_v: v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Retrievable,
    NotRetrievable,
    Indeterminate,
}

/// A pair with `Q(u, v) = 0` and `ρ(u, v) > 0`: then `x = u + v` and
/// `y = u − v` are distinct rays with `α(x) = α(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub u: VectorH,
    pub v: VectorH,
    pub x: VectorH,
    pub y: VectorH,
    pub q: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrVerdict {
    pub verdict: Verdict,
    pub threshold: f64,
    pub a0: A0Estimate,
    pub witness: Option<Witness>,
}

/// Retrievable if `a₀ ≥ threshold`; not retrievable only with an explicit
/// witness (`Q` zero to `1e-12` relative, `ρ > threshold`); indeterminate otherwise.
pub fn verdict_from_estimate(frame: &Frame, a0: A0Estimate, threshold: f64) -> Result<PrVerdict> {
    if !(threshold > 0.0) {
        return arg(format!("threshold must be positive (got {threshold})"));
    }
    let exact_zero = a0.q <= WITNESS_REL_TOL * frame_scale(frame);
    let witness = (exact_zero && a0.rho > threshold).then(|| Witness {
        x: a0.argmin_u.add(&a0.argmin_v),
        y: a0.argmin_u.sub(&a0.argmin_v),
        u: a0.argmin_u.clone(),
        v: a0.argmin_v.clone(),
        q: a0.q,
        rho: a0.rho,
    });
    let verdict = if a0.value >= threshold {
        Verdict::Retrievable
    } else if witness.is_some() {
        Verdict::NotRetrievable
    } else {
        Verdict::Indeterminate
    };
    Ok(PrVerdict {
        verdict,
        threshold,
        a0,
        witness,
    })
}

/// [`verdict_from_estimate`] with the default 64 multistarts and seed 0.
pub fn pr_verdict(frame: &Frame, threshold: f64) -> Result<PrVerdict> {
    verdict_from_estimate(frame, estimate_a0(frame, DEFAULT_A0_STARTS, 0)?, threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilipschitzReport {
    pub frame_label: String,
    pub samples: usize,
    pub seed: u64,
    /// Smallest sampled `‖α(x) − α(y)‖₂ / d₁(x̂, ŷ)`.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub min_pair: (VectorH, VectorH),
    pub max_pair: (VectorH, VectorH),
    /// All sampled ratios in sampling order.
    #[serde(skip)]
    pub ratios: Vec<f64>,
}

/// Samples Gaussian pairs with distinct rays and records the extreme values
/// of `‖α(x) − α(y)‖₂ / d₁(x̂, ŷ)`, computed directly from `α` and `d₁`.
pub fn probe_bilipschitz(frame: &Frame, samples: usize, seed: u64) -> Result<BilipschitzReport> {
    if samples < 1 {
        return arg("probe_bilipschitz needs at least one sample");
    }
    let (n, field) = (frame.dim(), frame.field());
    let mut rng = stream_rng(seed, BILIPSCHITZ_STREAM);
    let mut ratios = Vec::with_capacity(samples);
    let (mut lo, mut hi) = (None::<(f64, VectorH, VectorH)>, None::<(f64, VectorH, VectorH)>);
    while ratios.len() < samples {
        let x = random_vector(&mut rng, n, field);
        let y = random_vector(&mut rng, n, field);
        let d1 = lifted_dist(&ray(&x), &ray(&y), 1.0)?;
        if d1 <= 1e-12 * (x.norm_sq() + y.norm_sq()) {
            continue;
        }
        let r = alpha(frame, &x)?.dist(&alpha(frame, &y)?, 2.0) / d1;
        ratios.push(r);
        if lo.as_ref().is_none_or(|l| r < l.0) {
            lo = Some((r, x.clone(), y.clone()));
        }
        if hi.as_ref().is_none_or(|h| r > h.0) {
            hi = Some((r, x, y));
        }
    }
    let (lo, hi) = (lo.unwrap(), hi.unwrap());
    Ok(BilipschitzReport {
        frame_label: frame.label().to_owned(),
        samples,
        seed,
        min_ratio: lo.0,
        max_ratio: hi.0,
        min_pair: (lo.1, lo.2),
        max_pair: (hi.1, hi.2),
        ratios,
    })
}
