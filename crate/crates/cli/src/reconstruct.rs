use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use phaselip::frames::io::read_measurements;
use phaselip::probes::estimate_b0;
use phaselip::reconstruct::{Reconstructor, StepRule};
use phaselip::report::to_json_string;
use serde::Serialize;

use crate::common::{emit, load_frame, Failure, Outcome, Provenance, EXIT_IO, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args, Serialize)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub frame: PathBuf,
    /// JSON measurement file: one `{count, values}` object or an array of them.
    #[arg(long)]
    pub measurements: PathBuf,
    /// Refine each estimate by gradient descent on the measurement residual.
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    pub polish: Switch,
    /// Eigenvalue grouping tolerance of the retraction (relative).
    #[arg(long)]
    pub group_tol: Option<f64>,
    /// Maximum polish iterations.
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    /// Seed and sample count of the b0 estimate that sets the polish step.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2_000)]
    pub b0_samples: usize,
    /// Output path; stdout if omitted. Provenance goes to `<out>.provenance.json`.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &ReconstructArgs) -> Outcome {
    let frame = load_frame(&args.frame)?;
    let rows = read_measurements(&args.measurements).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot load measurements {}: {e}", args.measurements.display()),
    })?;
    if let Some(bad) = rows.iter().position(|r| r.count() != frame.count()) {
        return Err(Failure::usage(format!(
            "measurement row {bad} has {} values but the frame has {} vectors",
            rows[bad].count(),
            frame.count()
        )));
    }

    let provenance = Provenance::new("reconstruct", args, Some(&frame))?;
    let rec = Reconstructor::new(frame, args.group_tol)?;
    let reports = match args.polish {
        Switch::Off => rec.omega_batch(&rows)?,
        Switch::On => {
            let rule = StepRule::from_b0(estimate_b0(rec.frame(), args.b0_samples, args.seed)?.value)?;
            rows.iter()
                .map(|c| rec.omega_polished(c, args.iters, rule))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    emit(args.out.as_deref(), &to_json_string(&reports)?)?;
    if let Some(out) = &args.out {
        emit(Some(&provenance_path(out)), &to_json_string(&provenance)?)?;
    }
    Ok(EXIT_OK)
}

fn provenance_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".provenance.json");
    out.with_file_name(name)
}
