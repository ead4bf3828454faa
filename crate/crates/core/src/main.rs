use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use gatemp::atemporality::{classify, Classification};
use gatemp::channels::{temporal_mechanism, ChannelDescriptor};
use gatemp::entanglement::{example1_thresholds, max_temporal_log_negativity};
use gatemp::experiments::{family_state, run_scan, Family, Range, ScanSpec};
use gatemp::measurement::{classify_with_confidence, estimate_cm, sample_all_settings, write_samples_csv};
use gatemp::states::{symmetric_from_rows, SpaceTimeCM, StateDescriptor};
use gatemp::{Error, Result};

const EXIT_ATEMPORAL: u8 = 10;
const EXIT_INVALID: u8 = 2;
const EXIT_UNSAMPLABLE: u8 = 3;

#[derive(Parser)]
#[command(name = "gatemp", version, about = "Classify two-mode Gaussian space-time correlations by causal structure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one space-time CM given as JSON (`-` reads stdin).
    ///
    /// Accepts either {"V_A", "V_B", "C", "mean"?} or a temporal form
    /// {"V_A", "T", "N"}. Exits 10 when the correlations are atemporal.
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Scan a state family and write one CSV row per point.
    Scan {
        #[arg(long)]
        family: String,
        /// Parameter override, `key=value` or `key=min:max:steps`.
        #[arg(long = "param", value_name = "KEY=RANGE")]
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random states (random families).
        #[arg(long)]
        n: Option<usize>,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "GATEMP_WORKERS")]
        workers: Option<usize>,
        /// Also emit points outside the family's physical domain.
        #[arg(long)]
        include_unphysical: bool,
    },
    /// Simulate homodyne data for a state, estimate its CM and classify it.
    Sample {
        #[arg(long, conflicts_with = "family", required_unless_present = "family")]
        input: Option<PathBuf>,
        #[arg(long)]
        family: Option<String>,
        /// Family parameter, `key=value`.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Rounds per setting pair.
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the raw samples as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "GATEMP_WORKERS")]
        workers: Option<usize>,
    },
    /// Entanglement and atemporality squeezing thresholds of the two-mode
    /// squeezed thermal family.
    Thresholds {
        #[arg(long)]
        v: f64,
    },
    Version,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TemporalDescriptor {
    #[serde(rename = "V_A")]
    va: [[f64; 2]; 2],
    #[serde(rename = "T")]
    t: [[f64; 2]; 2],
    #[serde(rename = "N")]
    n: [[f64; 2]; 2],
}

fn read_input(path: &Path) -> Result<String> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        File::open(path)?.read_to_string(&mut text)?;
    }
    Ok(text)
}

fn load_state(path: &Path) -> Result<SpaceTimeCM> {
    let value: Value = serde_json::from_str(&read_input(path)?)?;
    if value.get("T").is_some() {
        let d: TemporalDescriptor = serde_json::from_value(value)?;
        let va = symmetric_from_rows("V_A", &d.va)?;
        let channel = ChannelDescriptor { t: d.t, n: d.n }.to_channel()?;
        temporal_mechanism(&va, &channel)
    } else {
        serde_json::from_value::<StateDescriptor>(value)?.to_state()
    }
}

fn split_param(p: &str) -> Result<(&str, &str)> {
    p.split_once('=')
        .ok_or_else(|| Error::InvalidDescriptor(format!("parameter {p:?} is not KEY=VALUE")))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn set_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn state_json(s: &SpaceTimeCM) -> Value {
    json!({
        "V_A": s.va().to_mat2().0,
        "V_B": s.vb().to_mat2().0,
        "C": s.cross().0,
    })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Classify { input } => {
            let report = classify(&load_state(&input)?)?;
            print_json(&report)?;
            Ok(if report.classification == Classification::Atemporal {
                EXIT_ATEMPORAL
            } else {
                0
            })
        }
        Command::Scan {
            family,
            params,
            seed,
            n,
            out,
            workers,
            include_unphysical,
        } => {
            let mut spec = ScanSpec::new(family.parse()?);
            for p in &params {
                let (k, r) = split_param(p)?;
                spec.set_range(k, r.parse::<Range>()?)?;
            }
            spec.seed = seed;
            if let Some(n) = n {
                spec.samples = n;
            }
            spec.workers = workers;
            spec.include_unphysical = include_unphysical;
            let table = run_scan(&spec)?;
            let mut w = output(out.as_deref())?;
            table.write_csv(&mut w)?;
            w.flush()?;
            Ok(0)
        }
        Command::Sample {
            input,
            family,
            params,
            n,
            seed,
            out,
            workers,
        } => {
            set_workers(workers);
            let state = match (input, family) {
                (Some(path), _) => load_state(&path)?,
                (None, Some(f)) => {
                    let family: Family = f.parse()?;
                    let overrides = params
                        .iter()
                        .map(|p| {
                            let (k, v) = split_param(p)?;
                            let v: f64 = v
                                .parse()
                                .map_err(|_| Error::InvalidDescriptor(format!("parameter {p:?} is not numeric")))?;
                            Ok((k.to_string(), v))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    family_state(family, &overrides, seed)?
                }
                (None, None) => unreachable!("clap requires --input or --family"),
            };
            let batches = sample_all_settings(&state, n, seed)?;
            if let Some(path) = out.as_deref() {
                let mut w = output(Some(path))?;
                write_samples_csv(&batches, &mut w)?;
                w.flush()?;
            }
            let est = estimate_cm(&batches)?;
            let confidence = classify_with_confidence(&est, seed)?;
            print_json(&json!({
                "truth": state_json(&state),
                "estimate": state_json(&est.estimate),
                "standard_errors": est.standard_errors.0,
                "n_per_setting": est.n_per_setting,
                "confidence": confidence,
            }))?;
            Ok(0)
        }
        Command::Thresholds { v } => {
            let t = example1_thresholds(v)?;
            let (r_max, e_max) = max_temporal_log_negativity();
            print_json(&json!({
                "v": v,
                "r_ent": t.r_ent,
                "r_atemp": t.r_atemp,
                "e_max": e_max,
                "r_at_e_max": r_max,
            }))?;
            Ok(0)
        }
        Command::Version => {
            println!("gatemp {}", env!("CARGO_PKG_VERSION"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = match e {
                Error::UnsamplableMarginal { .. } => EXIT_UNSAMPLABLE,
                _ => EXIT_INVALID,
            };
            let _ = print_json(&json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(code)
        }
    }
}
