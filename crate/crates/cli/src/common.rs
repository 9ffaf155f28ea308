use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use phaselip::frames::io::{frame_to_json, read_frame};
use phaselip::{Error, Field, Frame};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_INDETERMINATE: u8 = 4;
pub const EXIT_VIOLATION: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Argument(_) | Error::Domain(_) => EXIT_USAGE,
            Error::Io(_) | Error::Parse { .. } | Error::Validation(_) => EXIT_IO,
            Error::Numerical(_) => EXIT_INDETERMINATE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub type Outcome = Result<u8, Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

/// Run metadata attached to every report.
#[derive(Debug, Serialize)]
pub struct Provenance<'a, F: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub flags: &'a F,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_hash: Option<String>,
}

impl<'a, F: Serialize> Provenance<'a, F> {
    pub fn new(command: &'static str, flags: &'a F, frame: Option<&Frame>) -> Result<Self, Failure> {
        Ok(Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            flags,
            frame_hash: frame.map(frame_hash).transpose()?,
        })
    }
}

/// SHA-256 of the canonical JSON form of the frame.
pub fn frame_hash(frame: &Frame) -> Result<String, Failure> {
    Ok(hex::encode(Sha256::digest(frame_to_json(frame)?.as_bytes())))
}

pub fn load_frame(path: &Path) -> Result<Frame, Failure> {
    read_frame(path).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot load frame {}: {e}", path.display()),
    })
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `report.json` → `report.csv`.
pub fn csv_sibling(path: &Path) -> PathBuf {
    path.with_extension("csv")
}
