//! JSON files for frames and measurement vectors.
//!
//! Frames are stored as
//!
//! ```json
//! {"field": "complex", "dim": 2, "count": 3, "label": "demo",
//!  "vectors": [[[1.0, 0.0], [0.0, 0.0]], ...]}
//! ```
//!
//! with real entries written as plain numbers and complex entries as
//! `[re, im]` pairs. Measurement files hold `{"count": m, "values": [...]}`
//! or an array of such objects. Floats are written with 17 significant
//! digits, so writing and reading back reproduces every bit.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Frame, MeasurementVec};
use crate::error::{Error, Result};
use crate::linalg::{Field, VectorH};
use crate::metrics::{ray, RayPoint};
use crate::report::to_json_string;

/// One vector entry: a number, or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    Real(f64),
    Complex(f64, f64),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex(re, im) => Complex64::new(re, im),
        }
    }

    fn of(z: Complex64, field: Field) -> Entry {
        match field {
            Field::Real => Entry::Real(z.re),
            Field::Complex => Entry::Complex(z.re, z.im),
        }
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Entry::Real(re) => s.serialize_f64(re),
            Entry::Complex(re, im) => [re, im].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct EntryVisitor;

        impl<'de> Visitor<'de> for EntryVisitor {
            type Value = Entry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a [re, im] pair")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Entry, E> {
                Ok(Entry::Real(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Entry, E> {
                Ok(Entry::Real(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Entry, E> {
                Ok(Entry::Real(v as f64))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Entry, A::Error> {
                let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(Entry::Complex(re, im))
            }
        }

        d.deserialize_any(EntryVisitor)
    }
}

/// Serialized form of a vector. The field is complex iff some entry is a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorRepr(pub Vec<Entry>);

impl From<&VectorH> for VectorRepr {
    fn from(v: &VectorH) -> Self {
        VectorRepr(v.entries().iter().map(|&z| Entry::of(z, v.field())).collect())
    }
}

impl From<VectorH> for VectorRepr {
    fn from(v: VectorH) -> Self {
        VectorRepr::from(&v)
    }
}

impl TryFrom<VectorRepr> for VectorH {
    type Error = Error;

    fn try_from(r: VectorRepr) -> Result<VectorH> {
        let field = if r.0.iter().any(|e| matches!(e, Entry::Complex(..))) {
            Field::Complex
        } else {
            Field::Real
        };
        VectorH::new(field, r.0.iter().map(|e| e.value()).collect::<Vec<_>>().into())
    }
}

impl From<RayPoint> for VectorRepr {
    fn from(r: RayPoint) -> Self {
        VectorRepr::from(r.rep())
    }
}

impl TryFrom<VectorRepr> for RayPoint {
    type Error = Error;

    fn try_from(r: VectorRepr) -> Result<RayPoint> {
        Ok(ray(&VectorH::try_from(r)?))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameFile {
    field: Field,
    dim: usize,
    count: usize,
    vectors: Vec<Vec<Entry>>,
    label: String,
}

impl From<&Frame> for FrameFile {
    fn from(f: &Frame) -> Self {
        FrameFile {
            field: f.field(),
            dim: f.dim(),
            count: f.count(),
            vectors: f.vectors().iter().map(|v| VectorRepr::from(v).0).collect(),
            label: f.label().to_owned(),
        }
    }
}

impl TryFrom<FrameFile> for Frame {
    type Error = Error;

    fn try_from(file: FrameFile) -> Result<Frame> {
        if file.vectors.len() != file.count {
            return Err(Error::Validation(format!(
                "`count` is {} but `vectors` has {} entries",
                file.count,
                file.vectors.len()
            )));
        }
        let mut vectors = Vec::with_capacity(file.count);
        for (k, v) in file.vectors.iter().enumerate() {
            if v.len() != file.dim {
                return Err(Error::Validation(format!(
                    "vectors[{k}] has {} entries but `dim` is {}",
                    v.len(),
                    file.dim
                )));
            }
            if file.field == Field::Real {
                if let Some(i) = v.iter().position(|e| matches!(e, Entry::Complex(_, im) if *im != 0.0)) {
                    return Err(Error::Validation(format!(
                        "vectors[{k}][{i}] is complex but `field` is real"
                    )));
                }
            }
            let data = v.iter().map(|e| e.value()).collect::<Vec<_>>();
            let vec = VectorH::new(file.field, data.into())
                .map_err(|e| Error::Validation(format!("vectors[{k}]: {e}")))?;
            vectors.push(vec);
        }
        Frame::new(vectors, file.label)
    }
}

/// Serialized form of a measurement vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementRepr {
    pub count: usize,
    pub values: Vec<f64>,
}

impl From<MeasurementVec> for MeasurementRepr {
    fn from(m: MeasurementVec) -> Self {
        MeasurementRepr {
            count: m.count(),
            values: m.0,
        }
    }
}

impl TryFrom<MeasurementRepr> for MeasurementVec {
    type Error = Error;

    fn try_from(r: MeasurementRepr) -> Result<MeasurementVec> {
        if r.count != r.values.len() {
            return Err(Error::Validation(format!(
                "`count` is {} but `values` has {} entries",
                r.count,
                r.values.len()
            )));
        }
        MeasurementVec::new(r.values)
    }
}

fn parse<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        parse_error(&inner, path)
    })?;
    de.end().map_err(|e| parse_error(&e, String::from(".")))?;
    Ok(value)
}

fn parse_error(e: &serde_json::Error, path: String) -> Error {
    let full = e.to_string();
    let message = match full.rsplit_once(" at line ") {
        Some((msg, _)) => msg.to_owned(),
        None => full,
    };
    Error::Parse {
        line: e.line(),
        column: e.column(),
        path,
        message,
    }
}

pub fn frame_to_json(frame: &Frame) -> Result<String> {
    to_json_string(&FrameFile::from(frame))
}

pub fn frame_from_json(text: &str) -> Result<Frame> {
    Frame::try_from(parse::<FrameFile>(text)?)
}

pub fn read_frame(path: impl AsRef<Path>) -> Result<Frame> {
    frame_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_frame(path: impl AsRef<Path>, frame: &Frame) -> Result<()> {
    std::fs::write(path, frame_to_json(frame)?)?;
    Ok(())
}

/// Writes a single object for one row and an array otherwise.
pub fn measurements_to_json(rows: &[MeasurementVec]) -> Result<String> {
    match rows {
        [one] => to_json_string(one),
        many => to_json_string(&many),
    }
}

/// Accepts a single `{"count", "values"}` object or an array of them.
pub fn measurements_from_json(text: &str) -> Result<Vec<MeasurementVec>> {
    let reprs = if text.trim_start().starts_with('[') {
        parse::<Vec<MeasurementRepr>>(text)?
    } else {
        vec![parse::<MeasurementRepr>(text)?]
    };
    reprs.into_iter().map(MeasurementVec::try_from).collect()
}

pub fn read_measurements(path: impl AsRef<Path>) -> Result<Vec<MeasurementVec>> {
    measurements_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_measurements(path: impl AsRef<Path>, rows: &[MeasurementVec]) -> Result<()> {
    std::fs::write(path, measurements_to_json(rows)?)?;
    Ok(())
}
