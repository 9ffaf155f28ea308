use std::fs::File;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use phaselip::frames::named_frame;
use phaselip::probes::{
    estimate_a0, probe_bilipschitz, probe_omega, verify_property_k, A0Estimate, BilipschitzReport, OmegaProbeConfig,
    PropertyKExample, PropertyKRecord, DEFAULT_A0_STARTS,
};
use phaselip::report::exponent::{label, parse_exponent};
use phaselip::report::{fmt_f64, to_json_string, write_csv};
use phaselip::retraction::{probe_pi, PiProbeConfig};
use phaselip::Field;
use serde::{Serialize, Serializer};

use crate::common::{csv_sibling, emit, load_frame, Failure, FieldArg, Outcome, Provenance, EXIT_OK, EXIT_VIOLATION};

/// Slack of the sampled bilipschitz check against the a0 estimate.
const A0_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum What {
    Pi,
    Omega,
    Bilipschitz,
    PropertyK,
}

fn exponent_label<S: Serializer>(p: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(p) => s.serialize_some(&label(*p)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    #[arg(long, value_enum)]
    pub what: What,
    /// Input exponent (`inf` allowed). For `pi`, restricts the run to this exponent.
    #[arg(long, value_parser = parse_exponent)]
    #[serde(serialize_with = "exponent_label")]
    pub p: Option<f64>,
    /// Output exponent of the `omega` probe.
    #[arg(long, value_parser = parse_exponent)]
    #[serde(serialize_with = "exponent_label")]
    pub q: Option<f64>,
    /// Random pairs per (dim, field) for `pi`, per frame for `omega`, in total for `bilipschitz`.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Comma-separated fields.
    #[arg(long, value_delimiter = ',', value_enum)]
    pub fields: Vec<FieldArg>,
    /// Frame file for `bilipschitz`.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    /// Fixture frame for `bilipschitz` when no file is given.
    #[arg(long, default_value = "r2_pr3")]
    pub name: String,
    /// JSON report path; a CSV table is written next to it. Stdout if omitted.
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(Serialize)]
struct ProbeReport<'a, T: Serialize> {
    provenance: Provenance<'a, ProbeArgs>,
    bounds_held: bool,
    result: T,
}

#[derive(Serialize)]
struct BilipschitzResult {
    sampled: BilipschitzReport,
    a0: A0Estimate,
    /// `min_ratio² − a0`.
    margin: f64,
}

struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl ProbeArgs {
    fn fields(&self) -> Option<Vec<Field>> {
        (!self.fields.is_empty()).then(|| self.fields.iter().map(|&f| f.into()).collect())
    }

    fn dims(&self) -> Option<Vec<usize>> {
        (!self.dims.is_empty()).then(|| self.dims.clone())
    }
}

pub fn run(args: &ProbeArgs) -> Outcome {
    let (json, table, held) = match args.what {
        What::Pi => run_pi(args)?,
        What::Omega => run_omega(args)?,
        What::Bilipschitz => run_bilipschitz(args)?,
        What::PropertyK => run_property_k(args)?,
    };
    emit(args.report.as_deref(), &json)?;
    if let Some(path) = &args.report {
        let csv_path = csv_sibling(path);
        let file = File::create(&csv_path).map_err(|e| Failure {
            code: crate::common::EXIT_IO,
            message: format!("cannot write {}: {e}", csv_path.display()),
        })?;
        write_csv(file, table.header, &table.rows)?;
    }
    Ok(if held { EXIT_OK } else { EXIT_VIOLATION })
}

type ProbeOutput = (String, Table, bool);

fn finish<T: Serialize>(args: &ProbeArgs, frame: Option<&phaselip::Frame>, held: bool, result: T) -> Result<String, Failure> {
    let report = ProbeReport {
        provenance: Provenance::new("probe", args, frame)?,
        bounds_held: held,
        result,
    };
    Ok(to_json_string(&report)?)
}

fn run_pi(args: &ProbeArgs) -> Result<ProbeOutput, Failure> {
    let mut cfg = PiProbeConfig {
        seed: args.seed,
        ..PiProbeConfig::default()
    };
    if let Some(p) = args.p {
        cfg.exponents = vec![p];
    }
    if let Some(n) = args.samples {
        cfg.random_pairs = n;
        cfg.adversarial_pairs = 10 * n;
    }
    cfg.dims = args.dims().unwrap_or(cfg.dims);
    cfg.fields = args.fields().unwrap_or(cfg.fields);
    let report = probe_pi(&cfg)?;
    for s in &report.summaries {
        eprintln!(
            "p = {}: max ratio {} (bound {}), {} pairs, {} violations",
            label(s.p),
            fmt_f64(s.max_ratio),
            fmt_f64(s.bound),
            s.pairs,
            s.violations
        );
    }
    let rows = report
        .histogram
        .iter()
        .map(|h| vec![label(h.p), h.sampler.name().to_owned(), fmt_f64(h.lo), fmt_f64(h.hi), h.count.to_string()])
        .collect();
    let held = report.bounds_held();
    let table = Table {
        header: &["p", "sampler", "lo", "hi", "count"],
        rows,
    };
    Ok((finish(args, None, held, report)?, table, held))
}

fn run_omega(args: &ProbeArgs) -> Result<ProbeOutput, Failure> {
    let cfg = OmegaProbeConfig {
        p: args.p.unwrap_or(2.0),
        q: args.q.unwrap_or(1.0),
        dims: args.dims().unwrap_or_else(|| vec![2, 3, 4]),
        fields: args.fields().unwrap_or_else(|| vec![Field::Real, Field::Complex]),
        samples: args.samples.unwrap_or(1_000),
        seed: args.seed,
    };
    let report = probe_omega(&cfg)?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.dim.to_string(),
                r.field.to_string(),
                r.bound.pipeline.map(fmt_f64).unwrap_or_default(),
                r.pairs.to_string(),
                fmt_f64(r.max_ratio),
                r.violations.to_string(),
                r.stage_violations.to_string(),
            ]
        })
        .collect();
    let held = report.bounds_held();
    let table = Table {
        header: &["dim", "field", "bound", "pairs", "max_ratio", "violations", "stage_violations"],
        rows,
    };
    Ok((finish(args, None, held, report)?, table, held))
}

fn run_bilipschitz(args: &ProbeArgs) -> Result<ProbeOutput, Failure> {
    let frame = match &args.frame {
        Some(path) => load_frame(path)?,
        None => named_frame(&args.name)?,
    };
    let sampled = probe_bilipschitz(&frame, args.samples.unwrap_or(10_000), args.seed)?;
    let a0 = estimate_a0(&frame, DEFAULT_A0_STARTS, args.seed)?;
    let margin = sampled.min_ratio.powi(2) - a0.value;
    let held = margin >= -A0_SLACK;
    let rows = sampled
        .ratios
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), fmt_f64(*r)])
        .collect();
    let table = Table {
        header: &["index", "ratio"],
        rows,
    };
    let result = BilipschitzResult { sampled, a0, margin };
    Ok((finish(args, Some(&frame), held, result)?, table, held))
}

fn run_property_k(args: &ProbeArgs) -> Result<ProbeOutput, Failure> {
    let records: Vec<PropertyKRecord> = [PropertyKExample::VectorMetric, PropertyKExample::OperatorMetric]
        .into_iter()
        .map(verify_property_k)
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for r in &records {
        eprintln!(
            "{}: distances_ok {}, x_intersection_nonempty {}, y_intersection_empty {}",
            r.example.name(),
            r.distances_ok,
            r.x_intersection_nonempty,
            r.y_intersection_empty
        );
        for d in &r.distances {
            rows.push(vec![
                r.example.name().to_owned(),
                d.label.clone(),
                fmt_f64(d.stated),
                fmt_f64(d.computed),
                d.ok.to_string(),
            ]);
        }
    }
    let held = records.iter().all(PropertyKRecord::all_true);
    let table = Table {
        header: &["example", "check", "stated", "computed", "ok"],
        rows,
    };
    Ok((finish(args, None, held, records)?, table, held))
}
