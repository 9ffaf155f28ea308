use std::f64::consts::FRAC_1_SQRT_2;

use super::Frame;
use crate::error::{arg, Result};
use crate::linalg::{Field, VectorH};
use crate::sampling::{random_vector, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    RandomGaussian,
    Named,
}

/// Fixture frames available through [`named_frame`].
pub const NAMED_FRAMES: &[&str] = &["r2_pr3", "r2_onb"];

/// Fixed test frames.
///
/// * `r2_pr3`: `{(1,0), (0,1), (1/√2, 1/√2)}` in R², phase retrievable.
/// * `r2_onb`: `{(1,0), (0,1)}` in R², not phase retrievable.
pub fn named_frame(name: &str) -> Result<Frame> {
    let rows: &[&[f64]] = match name {
        "r2_pr3" => &[&[1.0, 0.0], &[0.0, 1.0], &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]],
        "r2_onb" => &[&[1.0, 0.0], &[0.0, 1.0]],
        other => {
            return arg(format!(
                "unknown frame name `{other}` (known: {})",
                NAMED_FRAMES.join(", ")
            ))
        }
    };
    let vectors = rows.iter().map(|r| VectorH::real(r)).collect::<Result<Vec<_>>>()?;
    Frame::new(vectors, name)
}

/// Generates a frame.
///
/// `RandomGaussian` draws i.i.d. standard normal entries from a generator
/// seeded by `seed`. `Named` looks up `name` and checks it against `dim`,
/// `count` and `field`.
pub fn gen_frame(
    kind: FrameKind,
    dim: usize,
    count: usize,
    field: Field,
    seed: u64,
    name: Option<&str>,
) -> Result<Frame> {
    if dim == 0 {
        return arg("dimension must be positive");
    }
    if count < dim {
        return arg(format!("frame needs count >= dim (got count {count} < dim {dim})"));
    }
    match kind {
        FrameKind::RandomGaussian => {
            let mut rng = stream_rng(seed, 0);
            // A Gaussian draw fails to span only with probability zero; redraw
            // from the same stream if it happens.
            loop {
                let vectors = (0..count).map(|_| random_vector(&mut rng, dim, field)).collect();
                let label = format!("gaussian-{field}-n{dim}-m{count}-seed{seed}");
                match Frame::new(vectors, label) {
                    Ok(f) => return Ok(f),
                    Err(crate::Error::Validation(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
        }
        FrameKind::Named => {
            let name = name.ok_or_else(|| crate::Error::Argument("named frame requires a name".into()))?;
            let frame = named_frame(name)?;
            if frame.dim() != dim || frame.count() != count || frame.field() != field {
                return arg(format!(
                    "frame `{name}` is (dim {}, count {}, {}), not (dim {dim}, count {count}, {field})",
                    frame.dim(),
                    frame.count(),
                    frame.field()
                ));
            }
            Ok(frame)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pr3_fixture() {
        let f = gen_frame(FrameKind::Named, 2, 3, Field::Real, 0, Some("r2_pr3")).unwrap();
        let v: Vec<Vec<f64>> = f.vectors().iter().map(|v| v.entries().iter().map(|z| z.re).collect()).collect();
        assert_eq!(v, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]]);
        assert_eq!(f.label(), "r2_pr3");
    }

    #[test]
    fn gaussian_is_deterministic() {
        let a = gen_frame(FrameKind::RandomGaussian, 4, 12, Field::Real, 7, None).unwrap();
        let b = gen_frame(FrameKind::RandomGaussian, 4, 12, Field::Real, 7, None).unwrap();
        assert_eq!(a, b);
        let c = gen_frame(FrameKind::RandomGaussian, 4, 12, Field::Real, 8, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn complex_gaussian_spans() {
        let f = gen_frame(FrameKind::RandomGaussian, 3, 9, Field::Complex, 1, None).unwrap();
        let sv = f.synthesis_singular_values();
        assert!(sv[2] > 1e-10 * sv[0]);
        assert!(f.vectors().iter().any(|v| v.entries().iter().any(|z| z.im != 0.0)));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            gen_frame(FrameKind::RandomGaussian, 4, 2, Field::Real, 0, None),
            Err(crate::Error::Argument(_))
        ));
        assert!(gen_frame(FrameKind::Named, 2, 3, Field::Real, 0, Some("nope")).is_err());
        assert!(gen_frame(FrameKind::Named, 2, 3, Field::Real, 0, None).is_err());
        assert!(gen_frame(FrameKind::Named, 2, 4, Field::Real, 0, Some("r2_pr3")).is_err());
    }
}
