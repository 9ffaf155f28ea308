use std::path::PathBuf;

use clap::{Args, ValueEnum};
use phaselip::frames::io::frame_to_json;
use phaselip::frames::{gen_frame, named_frame, FrameKind};
use phaselip::report::fmt_f64;
use serde::Serialize;

use crate::common::{emit, Failure, FieldArg, Outcome, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Gaussian,
    Named,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// Dimension n of the Hilbert space.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number m of frame vectors.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    pub field: FieldArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = KindArg::Gaussian)]
    pub kind: KindArg,
    /// Name of a fixture frame (with `--kind named`).
    #[arg(long)]
    pub name: Option<String>,
    /// Output path; the frame goes to stdout if omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &GenArgs) -> Outcome {
    let frame = match args.kind {
        KindArg::Gaussian => {
            let (Some(dim), Some(count)) = (args.dim, args.count) else {
                return Err(Failure::usage("gaussian frames need --dim and --count"));
            };
            gen_frame(FrameKind::RandomGaussian, dim, count, args.field.into(), args.seed, None)?
        }
        KindArg::Named => {
            let name = args.name.as_deref().ok_or_else(|| Failure::usage("--kind named needs --name"))?;
            let base = named_frame(name)?;
            gen_frame(
                FrameKind::Named,
                args.dim.unwrap_or(base.dim()),
                args.count.unwrap_or(base.count()),
                args.field.into(),
                args.seed,
                Some(name),
            )?
        }
    };
    emit(args.out.as_deref(), &frame_to_json(&frame)?)?;

    let sv: Vec<String> = frame.synthesis_singular_values().into_iter().map(fmt_f64).collect();
    let summary = format!("{}\nsingular values: {}", frame.label(), sv.join(" "));
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(EXIT_OK)
}
