use std::path::PathBuf;

use clap::Args;
use phaselip::probes::{
    estimate_a0, estimate_b0, verdict_from_estimate, A0Estimate, B0Estimate, Verdict, Witness, DEFAULT_A0_STARTS,
    DEFAULT_VERDICT_THRESHOLD,
};
use phaselip::report::to_json_string;
use serde::Serialize;

use crate::common::{emit, load_frame, Outcome, Provenance, EXIT_INDETERMINATE, EXIT_NEGATIVE, EXIT_OK};

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long)]
    pub frame: PathBuf,
    /// Multistart count for the a0 descent.
    #[arg(long, default_value_t = DEFAULT_A0_STARTS)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampled pairs for the b0 estimate.
    #[arg(long, default_value_t = 10_000)]
    pub b0_samples: usize,
    #[arg(long, default_value_t = DEFAULT_VERDICT_THRESHOLD)]
    pub threshold: f64,
    /// Report path; stdout if omitted.
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(Serialize)]
struct Ratios {
    /// Sampled extremes of `‖α(x) − α(y)‖² / d₁(x̂, ŷ)²`.
    min_squared: f64,
    max_squared: f64,
}

#[derive(Serialize)]
struct SampleCounts {
    a0_starts: usize,
    a0_grid_resolution: Option<usize>,
    b0_samples: usize,
    b0_ascents: usize,
}

#[derive(Serialize)]
struct Seeds {
    a0: u64,
    b0: u64,
}

#[derive(Serialize)]
struct CheckReport<'a> {
    provenance: Provenance<'a, CheckArgs>,
    frame_label: &'a str,
    verdict: Verdict,
    threshold: f64,
    a0: &'a A0Estimate,
    b0: &'a B0Estimate,
    witnesses: Vec<&'a Witness>,
    ratios: Ratios,
    sample_counts: SampleCounts,
    seeds: Seeds,
}

pub fn run(args: &CheckArgs) -> Outcome {
    let frame = load_frame(&args.frame)?;
    let a0 = estimate_a0(&frame, args.starts, args.seed)?;
    let b0 = estimate_b0(&frame, args.b0_samples, args.seed)?;
    let verdict = verdict_from_estimate(&frame, a0, args.threshold)?;

    let report = CheckReport {
        provenance: Provenance::new("check", args, Some(&frame))?,
        frame_label: frame.label(),
        verdict: verdict.verdict,
        threshold: verdict.threshold,
        a0: &verdict.a0,
        b0: &b0,
        witnesses: verdict.witness.iter().collect(),
        ratios: Ratios {
            min_squared: verdict.a0.value,
            max_squared: b0.value,
        },
        sample_counts: SampleCounts {
            a0_starts: verdict.a0.starts,
            a0_grid_resolution: verdict.a0.grid_resolution,
            b0_samples: b0.samples,
            b0_ascents: b0.ascents,
        },
        seeds: Seeds {
            a0: args.seed,
            b0: args.seed,
        },
    };
    emit(args.report.as_deref(), &to_json_string(&report)?)?;
    eprintln!("{}: {:?} (a0 = {:e}, b0 = {:e})", frame.label(), verdict.verdict, verdict.a0.value, b0.value);
    Ok(match verdict.verdict {
        Verdict::Retrievable => EXIT_OK,
        Verdict::NotRetrievable => EXIT_NEGATIVE,
        Verdict::Indeterminate => EXIT_INDETERMINATE,
    })
}
