//! Metrics on the ray space `Ĥ = H/∼`, where `x ∼ y` iff `y = a·x` for a
//! unimodular scalar `a`.
//!
//! Two families are provided:
//!
//! ```text
//! D_p(x̂, ŷ) = min_{|a|=1} ‖x − a·y‖_p          (vector-norm induced)
//! d_p(x̂, ŷ) = ‖[x,x] − [y,y]‖_p  (Schatten)     (operator-norm induced)
//! ```
//!
//! `κ: x̂ ↦ [x,x]` is an isometry from `(Ĥ, d_p)` onto the rank-one PSD
//! operators with the Schatten p-norm.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_exponent, spectral_decompose, Field, RankOnePSD, VectorH};

/// Entries below this fraction of the norm are skipped when choosing the
/// canonical phase.
const CANONICAL_REL_TOL: f64 = 1e-12;

const PHASE_GRID: usize = 4096;
/// Final bracket width of the phase refinement.
const PHASE_RESOLUTION: f64 = 1e-13;

/// A point of `Ĥ`, stored through its canonical representative: the first
/// entry with magnitude above `1e-12·‖rep‖` is real and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "crate::frames::io::VectorRepr", try_from = "crate::frames::io::VectorRepr")]
pub struct RayPoint {
    rep: VectorH,
}

impl RayPoint {
    pub fn rep(&self) -> &VectorH {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn field(&self) -> Field {
        self.rep.field()
    }

    pub fn norm(&self) -> f64 {
        self.rep.norm()
    }

    pub fn is_zero(&self) -> bool {
        self.rep.entries().iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

impl From<RayPoint> for VectorH {
    fn from(r: RayPoint) -> VectorH {
        r.rep
    }
}

/// The quotient map `x ↦ x̂`.
pub fn ray(x: &VectorH) -> RayPoint {
    let cutoff = CANONICAL_REL_TOL * x.norm();
    let pivot = x.entries().iter().position(|z| z.norm() > cutoff && z.norm() > 0.0);
    let rep = match pivot {
        None => x.clone(),
        Some(idx) => {
            let z = x.get(idx);
            let phase = z.conj() / z.norm();
            let mut data = x.entries().map(|e| e * phase);
            data[idx] = Complex64::new(z.norm(), 0.0);
            if x.field() == Field::Real {
                data.iter_mut().for_each(|e| e.im = 0.0);
            }
            VectorH::new(x.field(), data).expect("rotation preserves finiteness")
        }
    };
    RayPoint { rep }
}

fn check_pair(x: &RayPoint, y: &RayPoint, p: f64, what: &str) -> Result<()> {
    check_exponent(p)?;
    x.rep.ensure_compatible(&y.rep, what)
}

/// `D_p(x̂, ŷ) = min_{|a|=1} ‖x − a·y‖_p`.
///
/// Real field: the minimum over `a = ±1`. Complex field with `p = 2`:
/// `sqrt(‖x‖² + ‖y‖² − 2|⟨x,y⟩|)`. Other complex cases minimize over the
/// phase circle with a 4096-point grid followed by golden-section
/// refinement of the best local minima.
pub fn quotient_dist(x: &RayPoint, y: &RayPoint, p: f64) -> Result<f64> {
    check_pair(x, y, p, "quotient_dist")?;
    let (xv, yv) = (x.rep.entries(), y.rep.entries());
    match x.field() {
        Field::Real => {
            let minus = x.rep.sub(&y.rep).lp_norm(p);
            let plus = x.rep.add(&y.rep).lp_norm(p);
            Ok(minus.min(plus))
        }
        Field::Complex if p == 2.0 => {
            let (nx, ny) = (x.rep.norm(), y.rep.norm());
            let ip = x.rep.inner(&y.rep).norm();
            // ‖x‖² + ‖y‖² − 2|⟨x,y⟩| = (‖x‖ − ‖y‖)² + 2(‖x‖‖y‖ − |⟨x,y⟩|)
            let prod = nx * ny;
            let excess = if prod + ip > 0.0 {
                lagrange_cross(&x.rep, &y.rep) / (prod + ip)
            } else {
                0.0
            };
            Ok(((nx - ny).powi(2) + 2.0 * excess).max(0.0).sqrt())
        }
        Field::Complex => {
            let eval = |theta: f64| -> f64 {
                let a = Complex64::from_polar(1.0, theta);
                crate::linalg::lp_of_magnitudes(
                    xv.iter().zip(yv.iter()).map(move |(u, v)| (u - a * v).norm()),
                    p,
                )
            };
            Ok(minimize_on_circle(eval))
        }
    }
}

fn phase_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (0..PHASE_GRID).map(|k| TAU * k as f64 / PHASE_GRID as f64).collect())
}

/// Global minimum of a periodic function of the phase.
fn minimize_on_circle(f: impl Fn(f64) -> f64) -> f64 {
    let grid = phase_table();
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let n = values.len();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&k| values[k] <= values[(k + n - 1) % n] && values[k] <= values[(k + 1) % n])
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let h = TAU / n as f64;
    let mut best = values.iter().copied().fold(f64::INFINITY, f64::min);
    for &k in minima.iter().take(3) {
        best = best.min(golden_section(&f, grid[k] - h, grid[k] + h));
    }
    best
}

fn golden_section(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > PHASE_RESOLUTION {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    fa.min(fb).min(f(0.5 * (lo + hi)))
}

/// `‖x‖²‖y‖² − |⟨x,y⟩|² = Σ_{i<j} |x_i y_j − x_j y_i|²`, which stays accurate
/// when `x̂` and `ŷ` nearly coincide.
fn lagrange_cross(x: &VectorH, y: &VectorH) -> f64 {
    let (xv, yv) = (x.entries(), y.entries());
    let n = x.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += (xv[i] * yv[j] - xv[j] * yv[i]).norm_sqr();
        }
    }
    acc
}

/// The two nonzero eigenvalues of `[x,x] − [y,y]` (descending), from the
/// invariants `a = ‖x‖²`, `b = ‖y‖²` and the Lagrange cross term.
fn lifted_difference_eigenvalues(x: &VectorH, y: &VectorH) -> (f64, f64) {
    let (a, b) = (x.norm_sq(), y.norm_sq());
    let cross = lagrange_cross(x, y);
    let root = ((a - b).powi(2) + 4.0 * cross).sqrt();
    // λ+ · λ− = −cross; take the larger-magnitude root directly.
    if a >= b {
        let big = 0.5 * ((a - b) + root);
        let small = if big > 0.0 { -cross / big } else { 0.0 };
        (big, small)
    } else {
        let big = 0.5 * ((a - b) - root);
        let small = if big < 0.0 { -cross / big } else { 0.0 };
        (small, big)
    }
}

/// `d_p(x̂, ŷ) = ‖[x,x] − [y,y]‖_p`.
///
/// With `a = ‖x‖²`, `b = ‖y‖²`, `c = |⟨x,y⟩|²`:
///
/// ```text
/// d_∞ = ½|a − b| + ½·sqrt((a + b)² − 4c)
/// d_2 = sqrt(a² + b² − 2c)
/// d_1 = sqrt((a + b)² − 4c)
/// ```
///
/// Other exponents use the two nonzero singular values of the rank-two
/// difference.
pub fn lifted_dist(x: &RayPoint, y: &RayPoint, p: f64) -> Result<f64> {
    check_pair(x, y, p, "lifted_dist")?;
    let (xr, yr) = (&x.rep, &y.rep);
    let (a, b) = (xr.norm_sq(), yr.norm_sq());
    let cross = lagrange_cross(xr, yr);
    // (a + b)² − 4c = (a − b)² + 4(ab − c)
    let disc = (a - b).powi(2) + 4.0 * cross;
    if p == 1.0 {
        Ok(disc.sqrt())
    } else if p == 2.0 {
        Ok(((a - b).powi(2) + 2.0 * cross).sqrt())
    } else if p.is_infinite() {
        Ok(0.5 * (a - b).abs() + 0.5 * disc.sqrt())
    } else {
        let (l1, l2) = lifted_difference_eigenvalues(xr, yr);
        Ok(crate::linalg::lp_of_magnitudes([l1.abs(), l2.abs()].into_iter(), p))
    }
}

/// The isometry `κ: x̂ ↦ [x,x]`.
pub fn kappa(x: &RayPoint) -> RankOnePSD {
    RankOnePSD::from_generator(x.rep.clone())
}

/// Inverse of [`kappa`]: `ray(sqrt(λ_1)·u_1)` for the top eigenpair of the
/// carrier. When the operator still carries its generator, that vector is used.
pub fn kappa_inv(t: &RankOnePSD) -> Result<RayPoint> {
    if let Some(g) = t.generator() {
        return Ok(ray(g));
    }
    let carrier = t.carrier();
    let d = spectral_decompose(carrier, Some(0.0))?;
    crate::linalg::check_rank_one_psd(&d.eigenvalues)?;
    let top = d.eigenvalues[0];
    if top <= 0.0 {
        return Ok(ray(&VectorH::zeros(carrier.dim(), carrier.field())));
    }
    let v = d.eigenvectors[0].scaled(top.sqrt());
    if carrier.field() == Field::Real {
        // Eigenvectors of a real operator are real; drop rounding residue.
        let re: Vec<f64> = v.entries().iter().map(|z| z.re).collect();
        return Ok(ray(&VectorH::real(&re).map_err(|e| Error::Numerical(e.to_string()))?));
    }
    Ok(ray(&v))
}
