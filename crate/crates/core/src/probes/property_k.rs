//! Finite checks of two configurations of balls for which the ball
//! intersection property fails between `R^m` and the ray space.
//!
//! Each configuration consists of centers `x_i ∈ R^m` and rays `y_i` with
//! matching pairwise distances, and radii `r_i`. The `x`-balls share a point
//! while the `y`-balls have empty common intersection. Emptiness is
//! certified by a branch-and-bound lower bound on
//!
//! ```text
//! G(z) = max_i (dist(z, y_i) − r_i)
//! ```
//!
//! over a box that contains every candidate point: a cell with center `c`
//! and half-diagonal `h` satisfies `G ≥ G(c) − L·h` on the whole cell, where
//! `L` bounds the Lipschitz constant of `G` on the cell.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::linalg::VectorH;
use crate::metrics::{lifted_dist, quotient_dist, ray, RayPoint};

/// Required lower bound of `G` for an emptiness certificate.
pub const CERTIFY_MARGIN: f64 = 1e-6;
const DIST_TOL: f64 = 1e-12;
const MIN_CELL_WIDTH: f64 = 1e-10;
const MAX_CELLS: usize = 5_000_000;
const BOX_RADIUS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropertyKExample {
    /// Three rays in `R²/∼` with the vector metric `D₂`, centers in `R²`.
    #[serde(rename = "Dp_example")]
    VectorMetric,
    /// Two rays in `C²/∼` with the operator metric `d₂`, centers in `R⁴`.
    #[serde(rename = "dp_example")]
    OperatorMetric,
}

impl PropertyKExample {
    pub fn name(self) -> &'static str {
        match self {
            PropertyKExample::VectorMetric => "Dp_example",
            PropertyKExample::OperatorMetric => "dp_example",
        }
    }

    /// The radii of the configuration.
    pub fn radii(self) -> Vec<f64> {
        let (s2, s3, s6) = (SQRT_2, 3f64.sqrt(), 6f64.sqrt());
        match self {
            PropertyKExample::VectorMetric => vec![s6, 2.0 - s2, s6 - s3],
            PropertyKExample::OperatorMetric => vec![1.0 / s2, 1.0 / s2],
        }
    }
}

impl std::str::FromStr for PropertyKExample {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Dp_example" | "Dp" => Ok(PropertyKExample::VectorMetric),
            "dp_example" | "dp" => Ok(PropertyKExample::OperatorMetric),
            other => Err(format!("unknown configuration `{other}`")),
        }
    }
}

/// A stated distance against the computed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCheck {
    pub label: String,
    pub stated: f64,
    pub computed: f64,
    pub ok: bool,
}

/// Distances from a candidate point to every `x`-center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipCheck {
    pub label: String,
    pub point: Vec<f64>,
    pub distances: Vec<f64>,
    pub inside: bool,
    /// Whether this check decides `x_intersection_nonempty`.
    pub decisive: bool,
}

/// Outcome of the branch-and-bound minimization of `G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// A value no larger than `min G` over the box (valid when `complete`).
    pub lower_bound: f64,
    /// Smallest value of `G` evaluated, after local descent.
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub cells: usize,
    /// The search ran until its lower bound cleared the margin or a point
    /// with `G ≤ 0` was found; false if it hit the cell or width limits.
    pub complete: bool,
    /// `lower_bound > CERTIFY_MARGIN`.
    pub certified_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyKRecord {
    pub example: PropertyKExample,
    pub radii: Vec<f64>,
    pub distances_ok: bool,
    pub x_intersection_nonempty: bool,
    pub y_intersection_empty: bool,
    pub distances: Vec<DistanceCheck>,
    pub memberships: Vec<MembershipCheck>,
    pub certificate: Certificate,
}

impl PropertyKRecord {
    pub fn all_true(&self) -> bool {
        self.distances_ok && self.x_intersection_nonempty && self.y_intersection_empty
    }
}

struct Cell {
    lower: f64,
    center: Vec<f64>,
    half: Vec<f64>,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    // Reversed so the heap pops the smallest lower bound first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower.total_cmp(&self.lower)
    }
}

/// Best-first branch and bound for `min G` over the box `[lo, hi]`.
///
/// `lipschitz(lo, hi)` must bound the Lipschitz constant of `g` (Euclidean
/// norm) on the cell `[lo, hi]`. The box starts as a grid with `initial`
/// cells per axis. The best point is then polished by compass search.
pub fn certify_min_max(
    g: &dyn Fn(&[f64]) -> f64,
    lipschitz: &dyn Fn(&[f64], &[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    initial: usize,
) -> Result<Certificate> {
    let d = lo.len();
    if d == 0 || hi.len() != d || lo.iter().zip(hi).any(|(a, b)| !(a < b)) || initial == 0 {
        return arg("certify_min_max needs a nonempty box and at least one initial cell");
    }
    let mut best_value = f64::INFINITY;
    let mut best_point = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut cells = 0usize;

    let make_cell = |center: Vec<f64>, half: Vec<f64>, best_value: &mut f64, best_point: &mut Vec<f64>| {
        let val = g(&center);
        let (clo, chi): (Vec<f64>, Vec<f64>) = center.iter().zip(&half).map(|(c, h)| (c - h, c + h)).unzip();
        let diag = half.iter().map(|h| h * h).sum::<f64>().sqrt();
        let lower = val - lipschitz(&clo, &chi) * diag;
        if val < *best_value {
            *best_value = val;
            *best_point = center.clone();
        }
        Cell { lower, center, half }
    };

    let half0: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (b - a) / (2.0 * initial as f64)).collect();
    let total = initial.pow(d as u32);
    for flat in 0..total {
        let mut rem = flat;
        let center: Vec<f64> = (0..d)
            .map(|k| {
                let idx = rem % initial;
                rem /= initial;
                lo[k] + (2 * idx + 1) as f64 * half0[k]
            })
            .collect();
        heap.push(make_cell(center, half0.clone(), &mut best_value, &mut best_point));
        cells += 1;
    }

    let mut lower_bound = f64::NEG_INFINITY;
    let mut complete = false;
    while let Some(cell) = heap.pop() {
        lower_bound = cell.lower;
        if cell.lower > CERTIFY_MARGIN || best_value <= 0.0 {
            complete = true;
            break;
        }
        if cell.half.iter().any(|&h| 2.0 * h < MIN_CELL_WIDTH) || cells >= MAX_CELLS {
            break;
        }
        let child_half: Vec<f64> = cell.half.iter().map(|h| h / 2.0).collect();
        for mask in 0..(1usize << d) {
            let center: Vec<f64> = (0..d)
                .map(|k| cell.center[k] + if mask >> k & 1 == 1 { child_half[k] } else { -child_half[k] })
                .collect();
            heap.push(make_cell(center, child_half.clone(), &mut best_value, &mut best_point));
            cells += 1;
        }
    }

    // Compass-search polish of the best point.
    let mut h = half0.iter().cloned().fold(f64::INFINITY, f64::min);
    while h > 1e-13 {
        let mut improved = false;
        for k in 0..d {
            for s in [1.0, -1.0] {
                let mut z = best_point.clone();
                z[k] += s * h;
                let val = g(&z);
                if val < best_value {
                    best_value = val;
                    best_point = z;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }

    Ok(Certificate {
        lower_bound,
        best_value,
        best_point,
        cells,
        complete,
        certified_empty: complete && lower_bound > CERTIFY_MARGIN && best_value > CERTIFY_MARGIN,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn check(label: &str, stated: f64, computed: f64) -> DistanceCheck {
    DistanceCheck {
        label: label.to_owned(),
        stated,
        computed,
        ok: (stated - computed).abs() <= DIST_TOL,
    }
}

fn membership(label: &str, point: &[f64], centers: &[Vec<f64>], radii: &[f64], decisive: bool) -> MembershipCheck {
    let distances: Vec<f64> = centers.iter().map(|c| euclid(point, c)).collect();
    MembershipCheck {
        label: label.to_owned(),
        point: point.to_vec(),
        inside: distances.iter().zip(radii).all(|(d, r)| *d <= r + DIST_TOL),
        distances,
        decisive,
    }
}

/// Runs every check of `which` with its own radii.
pub fn verify_property_k(which: PropertyKExample) -> Result<PropertyKRecord> {
    verify_property_k_with_radii(which, &which.radii())
}

/// Runs the checks of `which` with the given radii in place of the
/// configuration's own (for sanity checks of the certifier).
pub fn verify_property_k_with_radii(which: PropertyKExample, radii: &[f64]) -> Result<PropertyKRecord> {
    if radii.len() != which.radii().len() || radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return arg(format!("{} needs {} finite nonnegative radii", which.name(), which.radii().len()));
    }
    match which {
        PropertyKExample::VectorMetric => vector_metric(radii),
        PropertyKExample::OperatorMetric => operator_metric(radii),
    }
}

fn vector_metric(radii: &[f64]) -> Result<PropertyKRecord> {
    let s2 = SQRT_2;
    let ys: Vec<RayPoint> = [[3.0, 1.0], [-1.0, 1.0], [0.0, 1.0]]
        .iter()
        .map(|y| VectorH::real(y).map(|v| ray(&v)))
        .collect::<Result<_>>()?;
    let xs: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![0.0, -2.0 * s2], vec![-1.0, -2.0 * s2]];

    let distances = vec![
        check("D2(y1,y2)", 2.0 * s2, quotient_dist(&ys[0], &ys[1], 2.0)?),
        check("D2(y2,y3)", 1.0, quotient_dist(&ys[1], &ys[2], 2.0)?),
        check("D2(y1,y3)", 3.0, quotient_dist(&ys[0], &ys[2], 2.0)?),
        check("|x1-x2|", 2.0 * s2, euclid(&xs[0], &xs[1])),
        check("|x2-x3|", 1.0, euclid(&xs[1], &xs[2])),
        check("|x1-x3|", 3.0, euclid(&xs[0], &xs[2])),
    ];
    let memberships = vec![
        membership("stated common point", &[1.0 - s2, 1.0 + s2], &xs, radii, true),
        membership("reflected common point", &[1.0 - s2, -1.0 - s2], &xs, radii, false),
    ];

    // D₂(·, y) is 1-Lipschitz, hence so is G.
    let g = |z: &[f64]| -> f64 {
        ys.iter()
            .zip(radii)
            .map(|(y, r)| {
                let (a, b) = (y.rep().get(0).re, y.rep().get(1).re);
                let minus = ((z[0] - a).powi(2) + (z[1] - b).powi(2)).sqrt();
                let plus = ((z[0] + a).powi(2) + (z[1] + b).powi(2)).sqrt();
                minus.min(plus) - r
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let certificate = certify_min_max(
        &g,
        &|_, _| 1.0,
        &[-BOX_RADIUS, -BOX_RADIUS],
        &[BOX_RADIUS, BOX_RADIUS],
        128,
    )?;
    Ok(record(PropertyKExample::VectorMetric, radii, distances, memberships, certificate))
}

fn operator_metric(radii: &[f64]) -> Result<PropertyKRecord> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let ys: Vec<RayPoint> = vec![
        ray(&VectorH::complex(&[c(1.0, 0.0), c(1.0, -1.0)])?),
        ray(&VectorH::complex(&[c(2.0, 0.0), c(1.0, -1.0)])?),
    ];
    let xs: Vec<Vec<f64>> = vec![vec![1.0, 1.0, 1.0, 2.0], vec![2.0, 1.0, 1.0, 1.0]];

    let mut distances = vec![
        check("d2(y1,y2)", SQRT_2, lifted_dist(&ys[0], &ys[1], 2.0)?),
        check("|x1-x2|", SQRT_2, euclid(&xs[0], &xs[1])),
    ];
    // The x-balls touch in a single point iff the radii add up to the distance.
    distances.push(check("r1+r2", euclid(&xs[0], &xs[1]), radii[0] + radii[1]));
    let mid = [1.5, 1.0, 1.0, 1.5];
    let mut m = membership("midpoint", &mid, &xs, radii, true);
    m.inside = m.distances.iter().zip(radii).all(|(d, r)| (d - r).abs() <= DIST_TOL);
    let memberships = vec![m];

    // Rays of C² as (a, b + ic) with a ≥ 0. On a cell where every point has
    // norm at most M, z ↦ [z,z] is 2M-Lipschitz into the Frobenius norm.
    let g = |z: &[f64]| -> f64 {
        let p = ray(&VectorH::complex(&[c(z[0], 0.0), c(z[1], z[2])]).expect("finite"));
        ys.iter()
            .zip(radii)
            .map(|(y, r)| lifted_dist(&p, y, 2.0).expect("same field") - r)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let lip = |lo: &[f64], hi: &[f64]| -> f64 {
        2.0 * lo.iter().zip(hi).map(|(a, b)| a.abs().max(b.abs()).powi(2)).sum::<f64>().sqrt()
    };
    let certificate = certify_min_max(
        &g,
        &lip,
        &[0.0, -BOX_RADIUS, -BOX_RADIUS],
        &[BOX_RADIUS, BOX_RADIUS, BOX_RADIUS],
        24,
    )?;
    Ok(record(PropertyKExample::OperatorMetric, radii, distances, memberships, certificate))
}

fn record(
    example: PropertyKExample,
    radii: &[f64],
    distances: Vec<DistanceCheck>,
    memberships: Vec<MembershipCheck>,
    certificate: Certificate,
) -> PropertyKRecord {
    PropertyKRecord {
        example,
        radii: radii.to_vec(),
        distances_ok: distances.iter().all(|d| d.ok),
        x_intersection_nonempty: memberships.iter().filter(|m| m.decisive).all(|m| m.inside),
        y_intersection_empty: certificate.certified_empty,
        distances,
        memberships,
        certificate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_metric_distances_and_emptiness() {
        let r = verify_property_k(PropertyKExample::VectorMetric).unwrap();
        assert!(r.distances_ok, "{:?}", r.distances);
        assert!(r.y_intersection_empty, "{:?}", r.certificate);
        // The stated point lies outside the second ball; its reflection in
        // the horizontal axis lies on all three boundaries.
        assert!(!r.memberships[0].inside);
        assert!(r.memberships[1].inside);
        let radii = PropertyKExample::VectorMetric.radii();
        for (d, r) in r.memberships[1].distances.iter().zip(&radii) {
            assert!((d - r).abs() < 1e-12);
        }
    }

    #[test]
    fn vector_metric_enlarged_first_radius_is_detected() {
        let mut radii = PropertyKExample::VectorMetric.radii();
        radii[0] += 0.5;
        let r = verify_property_k_with_radii(PropertyKExample::VectorMetric, &radii).unwrap();
        assert!(!r.y_intersection_empty);
        assert!(r.certificate.best_value <= 0.0);
    }

    #[test]
    fn vector_metric_enlarged_second_radius_stays_empty() {
        // Enlarging r₂ alone is not enough: min G stays near 0.22.
        let mut radii = PropertyKExample::VectorMetric.radii();
        radii[1] += 0.5;
        let r = verify_property_k_with_radii(PropertyKExample::VectorMetric, &radii).unwrap();
        assert!(r.y_intersection_empty, "{:?}", r.certificate);
        assert!(r.certificate.best_value > 0.2);
    }

    #[test]
    fn names_round_trip() {
        for which in [PropertyKExample::VectorMetric, PropertyKExample::OperatorMetric] {
            assert_eq!(which.name().parse::<PropertyKExample>().unwrap(), which);
            let json = serde_json::to_string(&which).unwrap();
            assert_eq!(json, format!("\"{}\"", which.name()));
        }
    }

    #[test]
    fn operator_metric_checks() {
        let r = verify_property_k(PropertyKExample::OperatorMetric).unwrap();
        assert!(r.x_intersection_nonempty);
        assert!(r.y_intersection_empty);
        // d₂ between (1, 1 − i) and (2, 1 − i) is √13: with a = 3, b = 6 and
        // |⟨y₁,y₂⟩|² = 16, a² + b² − 2·16 = 13.
        let d = &r.distances[0];
        assert!((d.computed - 13f64.sqrt()).abs() < 1e-12);
        assert!(!d.ok);
        assert!(r.distances[1].ok && r.distances[2].ok);
    }

    #[test]
    fn certifier_finds_known_minimum() {
        // max(|z| − 1, |z − (3,0)| − 1) has minimum 0.5 at (1.5, 0).
        let g = |z: &[f64]| -> f64 {
            let a = (z[0].powi(2) + z[1].powi(2)).sqrt() - 1.0;
            let b = ((z[0] - 3.0).powi(2) + z[1].powi(2)).sqrt() - 1.0;
            a.max(b)
        };
        let c = certify_min_max(&g, &|_, _| 1.0, &[-4.0, -4.0], &[4.0, 4.0], 16).unwrap();
        assert!(c.certified_empty);
        assert!(c.lower_bound <= 0.5 && c.lower_bound > 0.0);
        assert!((c.best_value - 0.5).abs() < 1e-9);
        let g2 = |z: &[f64]| -> f64 { g(z) - 0.6 };
        let c2 = certify_min_max(&g2, &|_, _| 1.0, &[-4.0, -4.0], &[4.0, 4.0], 16).unwrap();
        assert!(!c2.certified_empty);
        assert!(c2.best_value <= 0.0);
    }

    #[test]
    fn radii_validation() {
        assert!(verify_property_k_with_radii(PropertyKExample::OperatorMetric, &[1.0]).is_err());
        assert!(verify_property_k_with_radii(PropertyKExample::VectorMetric, &[1.0, -1.0, 1.0]).is_err());
    }
}
