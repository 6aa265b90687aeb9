//! The `cutoff` command line.
//!
//! Element streams are read one token per line; each token is hashed to a
//! 64-bit id with FNV-1a. Set streams are read one `range LO HI` or
//! `cuboid A1 B1 A2 B2 ...` per line. Reports are printed as `key=value`
//! lines or as a single JSON object, both in a fixed field order.
//!
//! Exit codes: 0 success, 1 usage, 2 input, 3 abort.

use std::ffi::OsString;
use std::fs;
use std::hash::Hasher;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fnv::FnvHasher;
use serde_json::Value;

use crate::delphic::{run_set_stream, DelphicSet, GeometricMode, Point, SetDescriptor};
use crate::harness::montecarlo::{monte_carlo, Experiment};
use crate::rng::GENERATOR;
use crate::sizing::{bucket_limit, p0, p0_exponent, SizingParams, SizingVariant};
use crate::sketch::{run, Sketch, Status, Transcript, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "cutoff",
    version,
    about = "Distinct-elements estimation with cutoff sketches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the number of distinct tokens in a stream, one per line.
    Estimate(EstimateArgs),
    /// Print the bucket limit for an accuracy target.
    Size(SizeArgs),
    /// Run a Monte Carlo experiment described by a TOML file.
    Simulate(SimulateArgs),
    /// Estimate the size of a union of ranges and cuboids, one per line.
    Sets(SetsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Walk {
    Fast,
    Debug,
}

impl From<Walk> for GeometricMode {
    fn from(w: Walk) -> Self {
        match w {
            Walk::Fast => GeometricMode::Fast,
            Walk::Debug => GeometricMode::Debug,
        }
    }
}

/// Either an explicit bucket limit or an accuracy target to size it from.
#[derive(Args, Debug)]
struct Bucket {
    /// Bucket limit.
    #[arg(long, conflicts_with_all = ["epsilon", "delta", "tracking"])]
    s: Option<usize>,
    /// Relative error for sizing the bucket limit.
    #[arg(long, requires = "delta")]
    epsilon: Option<f64>,
    /// Failure probability for sizing the bucket limit.
    #[arg(long, requires = "epsilon")]
    delta: Option<f64>,
    /// Size for tracking the estimate at every step instead of at the end.
    #[arg(long)]
    tracking: bool,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// dond, dond-disc[:bits], dond-prime, dond-prime-disc[:N], cvm1, cvm2,
    /// cvm2-refuse-adjoined or cvm2-refuse.
    #[arg(long, default_value = "cvm2")]
    variant: Variant,
    #[command(flatten)]
    bucket: Bucket,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Universe size bound (default: m).
    #[arg(long)]
    n: Option<u64>,
    /// Stream length bound (default: number of input lines).
    #[arg(long)]
    m: Option<u64>,
    /// Also print the per-step cutoffs and lists.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Input file (default: standard input).
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SizeArgs {
    /// A sketch variant or `tracking`.
    #[arg(long, default_value = "cvm2", value_parser = parse_sizing_variant)]
    variant: SizingVariant,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    m: u64,
    /// Universe size bound (default: m).
    #[arg(long)]
    n: Option<u64>,
    /// Use the tracking formula regardless of --variant.
    #[arg(long)]
    tracking: bool,
    /// Also report the diagnostic threshold p_0 for this many distinct elements.
    #[arg(long)]
    f0: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Experiment description (TOML).
    config: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct SetsArgs {
    #[command(flatten)]
    bucket: Bucket,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Universe size bound (default: m).
    #[arg(long)]
    n: Option<u64>,
    /// Stream length bound (default: total size of the input sets).
    #[arg(long)]
    m: Option<u64>,
    /// How the walk over each set draws its jumps.
    #[arg(long, value_enum, default_value = "fast")]
    walk: Walk,
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    input: Option<PathBuf>,
}

fn parse_sizing_variant(s: &str) -> Result<SizingVariant, String> {
    match s.parse::<Variant>() {
        Ok(v) => Ok(v.sizing_variant()),
        Err(_) => s.parse::<SizingVariant>().map_err(|e| e.to_string()),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) => m,
        }
    }
}

type Fields = Vec<(&'static str, Value)>;

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn execute<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a, stdin, stdout),
        Command::Size(a) => cmd_size(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Sets(a) => cmd_sets(a, stdin, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<Vec<u8>, Failure> {
    let mut bytes = Vec::new();
    match path {
        Some(p) => {
            bytes = fs::read(p)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display())))?;
        }
        None => {
            stdin
                .read_to_end(&mut bytes)
                .map_err(|e| Failure::Input(format!("cannot read standard input: {e}")))?;
        }
    }
    Ok(bytes)
}

/// Splits input into numbered, non-empty UTF-8 lines.
fn lines(bytes: &[u8]) -> Result<Vec<(usize, &str)>, Failure> {
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, raw)| {
            let number = i + 1;
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            let line = std::str::from_utf8(raw)
                .map_err(|_| Failure::Input(format!("line {number}: not valid UTF-8")))?;
            if line.trim().is_empty() {
                return Err(Failure::Input(format!("line {number}: empty line")));
            }
            Ok((number, line))
        })
        .collect()
}

/// The 64-bit id of a stream token.
pub fn token_id(token: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(token.as_bytes());
    h.finish()
}

fn resolve_bucket(
    bucket: &Bucket,
    sizing: SizingVariant,
    m: u64,
    n: u64,
) -> Result<usize, Failure> {
    match (bucket.s, bucket.epsilon, bucket.delta) {
        (Some(0), _, _) => Err(Failure::Usage("--s must be at least 1".into())),
        (Some(s), _, _) => Ok(s),
        (None, Some(epsilon), Some(delta)) => {
            let variant = if bucket.tracking {
                SizingVariant::Tracking
            } else {
                sizing
            };
            let params = SizingParams::new(variant, epsilon, delta, m.max(1), n.max(1))
                .map_err(|e| Failure::Usage(e.to_string()))?;
            bucket_limit(&params)
                .map(|r| r.s)
                .map_err(|e| Failure::Usage(e.to_string()))
        }
        _ => Err(Failure::Usage(
            "give either --s or both --epsilon and --delta".into(),
        )),
    }
}

fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn text_value(v: &Value) -> String {
    match v {
        Value::Null => "none".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn emit(
    out: &mut dyn Write,
    format: Format,
    fields: &Fields,
    trace: Option<(Vec<String>, String)>,
) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Input(format!("cannot write output: {e}"));
    match format {
        Format::Text => {
            for (k, v) in fields {
                writeln!(out, "{k}={}", text_value(v)).map_err(io)?;
            }
            if let Some((text, _)) = trace {
                for line in text {
                    writeln!(out, "{line}").map_err(io)?;
                }
            }
        }
        Format::Json => {
            let mut parts: Vec<String> = fields
                .iter()
                .map(|(k, v)| format!("{}:{}", Value::from(*k), v))
                .collect();
            if let Some((_, json)) = trace {
                parts.push(format!("\"transcript\":{json}"));
            }
            writeln!(out, "{{{}}}", parts.join(",")).map_err(io)?;
        }
    }
    Ok(())
}

fn trace_output<K: serde::Serialize>(
    transcript: &Transcript<K>,
) -> Result<(Vec<String>, String), Failure> {
    let text = transcript
        .records
        .iter()
        .map(|r| {
            format!(
                "step t={} cutoff={} size={} refused={}",
                r.t,
                text_value(&float(r.cutoff.value())),
                r.entries.len(),
                r.refused
            )
        })
        .collect();
    let json = serde_json::to_string(transcript)
        .map_err(|e| Failure::Input(format!("cannot encode transcript: {e}")))?;
    Ok((text, json))
}

fn report_fields(
    fields: &mut Fields,
    estimate: Option<f64>,
    cutoff: f64,
    size: usize,
    status: Status,
    steps: u64,
) {
    fields.extend([
        ("estimate", estimate.map_or(Value::Null, float)),
        ("final_cutoff", float(cutoff)),
        ("final_list_size", Value::from(size)),
        ("status", Value::from(status.to_string())),
        ("steps_processed", Value::from(steps)),
    ]);
}

fn cmd_estimate(
    args: EstimateArgs,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let bytes = read_input(args.input.as_deref(), stdin)?;
    let stream: Vec<u64> = lines(&bytes)?
        .into_iter()
        .map(|(_, t)| token_id(t))
        .collect();
    let m = args.m.unwrap_or(stream.len() as u64);
    let n = args.n.unwrap_or(m);
    let s = resolve_bucket(&args.bucket, args.variant.sizing_variant(), m, n)?;
    let config = args
        .variant
        .config(s)
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let outcome = run(config, args.seed, args.trace, stream, n.max(1), m.max(1));
    let report = outcome.report;
    let mut fields: Fields = vec![
        ("command", Value::from("estimate")),
        ("variant", Value::from(args.variant.to_string())),
        ("s", Value::from(s)),
        ("seed", Value::from(args.seed)),
        ("n", Value::from(n)),
        ("m", Value::from(m)),
    ];
    report_fields(
        &mut fields,
        report.estimate,
        report.final_cutoff.value(),
        report.final_list_size,
        report.status,
        report.steps_processed,
    );
    let trace = outcome.transcript.as_ref().map(trace_output).transpose()?;
    emit(stdout, args.format, &fields, trace)?;
    Ok(match report.status {
        Status::Running => EXIT_OK,
        Status::Aborted => EXIT_ABORT,
    })
}

fn cmd_size(args: SizeArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let variant = if args.tracking {
        SizingVariant::Tracking
    } else {
        args.variant
    };
    let n = args.n.unwrap_or(args.m);
    let params = SizingParams::new(variant, args.epsilon, args.delta, args.m, n)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let result = bucket_limit(&params).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut fields: Fields = vec![
        ("command", Value::from("size")),
        ("variant", Value::from(variant.to_string())),
        ("epsilon", float(args.epsilon)),
        ("delta", float(args.delta)),
        ("m", Value::from(args.m)),
        ("n", Value::from(n)),
        ("s", Value::from(result.s)),
        ("formula", Value::from(result.formula)),
    ];
    if let Some(f0) = args.f0 {
        fields.extend([
            ("f0", Value::from(f0)),
            ("p0_exponent", Value::from(p0_exponent(result.s, f0))),
            ("p0", float(p0(result.s, f0))),
        ]);
    }
    emit(stdout, args.format, &fields, None)?;
    Ok(EXIT_OK)
}

fn cmd_simulate(args: SimulateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", args.config.display())))?;
    let experiment: Experiment = toml::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.config.display())))?;
    let report = monte_carlo(&experiment)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.config.display())))?;
    let fields: Fields = vec![
        ("command", Value::from("simulate")),
        ("variant", Value::from(experiment.variant.to_string())),
        ("generator", Value::from(GENERATOR)),
        ("base_seed", Value::from(experiment.base_seed)),
        ("stream_seed", Value::from(experiment.stream_seed)),
        ("trials", Value::from(report.trials)),
        ("completed", Value::from(report.completed)),
        ("s", Value::from(report.s)),
        ("f0", Value::from(report.f0)),
        ("epsilon", float(report.epsilon)),
        ("mean_estimate", float(report.mean_estimate)),
        ("standard_error", float(report.standard_error)),
        ("empirical_bias", float(report.empirical_bias)),
        ("failure_rate", float(report.failure_rate)),
        ("abort_rate", float(report.abort_rate)),
        ("p_small_rate", float(report.p_small_rate)),
        ("p0", float(report.p0)),
    ];
    emit(stdout, args.format, &fields, None)?;
    Ok(EXIT_OK)
}

fn cmd_sets(args: SetsArgs, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let bytes = read_input(args.input.as_deref(), stdin)?;
    let sets: Vec<SetDescriptor> = lines(&bytes)?
        .into_iter()
        .map(|(number, line)| {
            line.parse::<SetDescriptor>()
                .map_err(|e| Failure::Input(format!("line {number}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let total = sets
        .iter()
        .fold(0u64, |acc, s| acc.saturating_add(s.cardinality()));
    let m = args.m.unwrap_or(total);
    let n = args.n.unwrap_or(m);
    let s = resolve_bucket(&args.bucket, SizingVariant::Cvm2Refuse, m, n)?;
    let config = Variant::Cvm2Refuse
        .config(s)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let mode = GeometricMode::from(args.walk);

    let (report, transcript) = if args.trace {
        let mut sketch: Sketch<Point> = Sketch::new(config, args.seed, 0).with_trace();
        for set in &sets {
            sketch
                .process_set(set, mode)
                .map_err(|e| Failure::Input(e.to_string()))?;
        }
        (sketch.report(n.max(1), m.max(1)), sketch.take_transcript())
    } else {
        let report = run_set_stream(config, args.seed, 0, mode, &sets, n.max(1), m.max(1))
            .map_err(|e| Failure::Input(e.to_string()))?;
        (report, None)
    };

    let mut fields: Fields = vec![
        ("command", Value::from("sets")),
        ("variant", Value::from(Variant::Cvm2Refuse.to_string())),
        ("s", Value::from(s)),
        ("seed", Value::from(args.seed)),
        (
            "walk",
            Value::from(match args.walk {
                Walk::Fast => "fast",
                Walk::Debug => "debug",
            }),
        ),
        ("sets", Value::from(sets.len())),
    ];
    report_fields(
        &mut fields,
        report.estimate,
        report.final_cutoff.value(),
        report.final_list_size,
        report.status,
        report.steps_processed,
    );
    let trace = transcript.as_ref().map(trace_output).transpose()?;
    emit(stdout, args.format, &fields, trace)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str], input: &str) -> (i32, String, String) {
        let mut stdin = input.as_bytes();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("cutoff").chain(args.iter().copied());
        let code = execute(argv, &mut stdin, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    fn field<'a>(out: &'a str, key: &str) -> &'a str {
        out.lines()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .unwrap_or_else(|| panic!("no {key} in {out}"))
    }

    #[test]
    fn estimate_counts_small_streams_exactly() {
        let (code, out, _) = call(&["estimate", "--s", "10"], "a\nb\na\nc\n");
        assert_eq!(code, 0);
        assert_eq!(field(&out, "estimate"), "3.0");
        assert_eq!(field(&out, "final_cutoff"), "1.0");
        assert_eq!(field(&out, "status"), "running");
    }

    #[test]
    fn empty_input_estimates_zero() {
        let (code, out, _) = call(&["estimate", "--s", "10"], "");
        assert_eq!(code, 0);
        assert_eq!(field(&out, "estimate"), "0.0");
    }

    #[test]
    fn aborts_exit_with_code_three() {
        let input: String = (0..4000).map(|i| format!("t{i}\n")).collect();
        let (code, out, _) = call(
            &["estimate", "--variant", "cvm1", "--s", "2", "--seed", "2"],
            &input,
        );
        assert_eq!(code, EXIT_ABORT);
        assert_eq!(field(&out, "status"), "aborted");
        assert_eq!(field(&out, "estimate"), "none");
    }

    #[test]
    fn bad_lines_name_their_number() {
        let (code, _, err) = call(&["estimate", "--s", "4"], "a\n\nb\n");
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("line 2"), "{err}");
        let (code, _, err) = call(&["sets", "--s", "4"], "range 1 3\nrange 5 3\n");
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn bucket_flags_are_checked() {
        assert_eq!(call(&["estimate"], "a\n").0, EXIT_USAGE);
        assert_eq!(
            call(
                &["estimate", "--s", "3", "--epsilon", "0.5", "--delta", "0.1"],
                "a\n"
            )
            .0,
            EXIT_USAGE
        );
        assert_eq!(call(&["estimate", "--epsilon", "0.5"], "a\n").0, EXIT_USAGE);
        assert_eq!(call(&["estimate", "--s", "0"], "a\n").0, EXIT_USAGE);
        assert_eq!(
            call(&["estimate", "--variant", "cvm9", "--s", "3"], "a\n").0,
            EXIT_USAGE
        );
        assert_eq!(call(&["frobnicate"], "").0, EXIT_USAGE);
        assert_eq!(call(&["--help"], "").0, EXIT_OK);
    }

    #[test]
    fn sized_estimate_reports_the_formula_value() {
        let (code, out, _) = call(
            &[
                "estimate",
                "--variant",
                "dond",
                "--epsilon",
                "0.5",
                "--delta",
                "0.1",
                "--m",
                "1000",
            ],
            "x\n",
        );
        assert_eq!(code, 0);
        assert_eq!(field(&out, "s"), "793");
    }

    #[test]
    fn size_examples() {
        let delta = format!("{}", 8.0 * 1000.0 / std::f64::consts::E);
        let (code, out, _) = call(
            &[
                "size",
                "--tracking",
                "--epsilon",
                "1",
                "--delta",
                &delta,
                "--m",
                "1000",
            ],
            "",
        );
        assert_eq!(code, 0);
        assert_eq!(field(&out, "s"), "12");
        let (code, _, _) = call(
            &["size", "--epsilon", "0", "--delta", "0.1", "--m", "10"],
            "",
        );
        assert_eq!(code, EXIT_USAGE);
        let (_, a, _) = call(
            &[
                "size",
                "--variant",
                "dond",
                "--epsilon",
                "0.2",
                "--delta",
                "0.05",
                "--m",
                "5000",
            ],
            "",
        );
        let (_, b, _) = call(
            &[
                "size",
                "--variant",
                "dond-prime",
                "--epsilon",
                "0.2",
                "--delta",
                "0.05",
                "--m",
                "5000",
            ],
            "",
        );
        let sa: u64 = field(&a, "s").parse().unwrap();
        let sb: u64 = field(&b, "s").parse().unwrap();
        assert!(sa >= sb);
        let (_, out, _) = call(
            &[
                "size",
                "--epsilon",
                "0.5",
                "--delta",
                "0.1",
                "--m",
                "1000",
                "--f0",
                "5000",
            ],
            "",
        );
        assert!(field(&out, "p0_exponent").parse::<u32>().is_ok());
    }

    #[test]
    fn sets_examples() {
        let (code, out, _) = call(&["sets", "--s", "100"], "range 1 5\nrange 3 8\n");
        assert_eq!(code, 0);
        assert_eq!(field(&out, "estimate"), "8.0");
        let (_, out, _) = call(&["sets", "--s", "100"], "cuboid 1 2 1 3\n");
        assert_eq!(field(&out, "estimate"), "6.0");
        assert_eq!(call(&["sets", "--s", "100"], "range 5 3\n").0, EXIT_INPUT);
    }

    #[test]
    fn json_output_keeps_field_order() {
        let (_, out, _) = call(
            &["estimate", "--s", "10", "--format", "json", "--trace"],
            "a\nb\n",
        );
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["estimate"], Value::from(2.0));
        assert_eq!(v["transcript"]["records"].as_array().unwrap().len(), 2);
        let keys: Vec<&str> = [
            "\"command\":",
            "\"variant\":",
            "\"s\":",
            "\"estimate\":",
            "\"transcript\":",
        ]
        .into_iter()
        .collect();
        let positions: Vec<usize> = keys.iter().map(|k| out.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn text_trace_has_one_line_per_step() {
        let (_, out, _) = call(
            &[
                "estimate",
                "--s",
                "2",
                "--trace",
                "--variant",
                "cvm2-refuse",
            ],
            "a\nb\nc\nd\n",
        );
        assert_eq!(out.lines().filter(|l| l.starts_with("step ")).count(), 4);
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let input: String = (0..2000).map(|i| format!("{}\n", i % 700)).collect();
        for variant in ["dond", "cvm2", "cvm2-refuse"] {
            let args = [
                "estimate",
                "--variant",
                variant,
                "--s",
                "40",
                "--seed",
                "9",
                "--format",
                "json",
            ];
            assert_eq!(call(&args, &input), call(&args, &input));
        }
    }
}
