//! The `uafkit` command line.
//!
//! Exit status is 0 on success, 2 on a usage error (bad flag, unreadable
//! file, malformed JSON) and 1 when the library call itself fails.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{error_report, rmse_table, Interval, DEFAULT_SAMPLES};
use crate::error::UafError;
use crate::fitter::{fit, FitSpec, BUILTIN_SPECS};
use crate::network::{make_blobs, make_gas_analogue, make_linear, train, Dataset, NetworkConfig};
use crate::targets::TargetActivation;
use crate::uaf::{preset, PresetKind, UafParams};

/// Environment variable that replaces every seed taken from flags or config.
pub const SEED_ENV: &str = "UAFKIT_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "uafkit",
    version,
    about = "Universal activation function toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a UAF on an evenly spaced grid (CSV `x,f_uaf`).
    Eval {
        #[command(flatten)]
        source: ParamSource,
        #[command(flatten)]
        range: Range,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// List presets or show one preset's parameters.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
    /// Fit UAF parameters to a target (FitResult JSON).
    Fit {
        /// One of sigmoid-family, tanh-family, gaussian-family, relu-family.
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        builtin: Option<String>,
        /// FitSpec JSON file.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Error analysis of a preset, or of given parameters against a target
    /// (ErrorReport JSON).
    Report {
        #[command(flatten)]
        source: ParamSource,
        /// Target activation; defaults to the preset's own.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// RMSE and maximum error of every preset on [-10, 10].
    Table {
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Train a small network (TrainReport JSON, optional CSV trace).
    Train {
        /// NetworkConfig JSON file.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// CSV of epoch,loss,metric,A,B,C,D,E.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// UAF, target and error on a grid (CSV `x,f_uaf,f_target,error`).
    Sweep {
        #[command(flatten)]
        source: ParamSource,
        /// Target activation; defaults to the preset's own.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        range: Range,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetsAction {
    List,
    Show {
        /// Preset name, e.g. `tanh` or `leaky_relu(0.05)`.
        kind: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetKind {
    Gas,
    Blobs,
    Linear,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ParamSource {
    /// Preset name, e.g. `sigmoid` or `leaky_relu(0.05)`.
    #[arg(long)]
    preset: Option<String>,
    /// Inline UafParams JSON, e.g. '{"A":1,"B":0,"C":0,"D":-1,"E":0}'.
    #[arg(long)]
    params: Option<String>,
    /// File holding UafParams JSON, or any JSON object with a `params` field
    /// (such as a FitResult).
    #[arg(long)]
    params_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Range {
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    n: usize,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long, value_enum)]
    dataset: DatasetKind,
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Gas analogue: spectral channels.
    #[arg(long, default_value_t = 64)]
    channels: usize,
    /// Gas analogue: number of species.
    #[arg(long, default_value_t = 9)]
    species: usize,
    /// Gas analogue: signal-to-noise ratio; `inf` disables noise.
    #[arg(long, default_value_t = 30.0)]
    snr_db: f64,
    /// Blobs: number of classes.
    #[arg(long, default_value_t = 4)]
    classes: usize,
    /// Blobs and linear: input features.
    #[arg(long, default_value_t = 16)]
    features: usize,
    /// Blobs: cluster standard deviation.
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    /// Linear: output width.
    #[arg(long, default_value_t = 1)]
    outputs: usize,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<UafError> for CliError {
    fn from(e: UafError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(flag: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {e}"))
}

fn read_file(flag: &str, path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| usage(flag, format!("cannot read {}: {e}", path.display())))
}

fn parse_kind(flag: &str, s: &str) -> CliResult<PresetKind> {
    s.parse().map_err(|e| usage(flag, e))
}

fn parse_params_json(flag: &str, text: &str) -> CliResult<UafParams> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| usage(flag, e))?;
    let inner = match value.get("params") {
        Some(p) => p.clone(),
        None => value,
    };
    serde_json::from_value(inner).map_err(|e| usage(flag, e))
}

/// The parameters and, for a preset, its own target.
fn resolve(source: &ParamSource) -> CliResult<(UafParams, Option<PresetKind>)> {
    if let Some(name) = &source.preset {
        let kind = parse_kind("--preset", name)?;
        return Ok((preset(kind)?, Some(kind)));
    }
    if let Some(text) = &source.params {
        return Ok((parse_params_json("--params", text)?, None));
    }
    let path = source
        .params_file
        .as_ref()
        .expect("clap requires one source");
    let text = read_file("--params-file", path)?;
    Ok((parse_params_json("--params-file", &text)?, None))
}

fn resolve_target(
    flag_value: Option<&str>,
    own: Option<PresetKind>,
) -> CliResult<TargetActivation> {
    let kind = match (flag_value, own) {
        (Some(s), _) => parse_kind("--target", s)?,
        (None, Some(k)) => k,
        (None, None) => {
            return Err(CliError::Usage(
                "--target is required with --params or --params-file".into(),
            ))
        }
    };
    Ok(TargetActivation::new(kind)?)
}

fn grid(range: &Range) -> CliResult<Vec<f64>> {
    if range.n == 0 {
        return Err(usage("--n", "must be at least 1"));
    }
    if range.n == 1 {
        return Ok(vec![range.from]);
    }
    let interval = Interval::new(range.from, range.to).map_err(|e| usage("--from/--to", e))?;
    Ok(interval.grid(range.n).collect())
}

fn seed_override() -> CliResult<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| usage(SEED_ENV, format!("`{v}` is not an unsigned integer: {e}"))),
        Err(_) => Ok(None),
    }
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(output: Option<&Path>, contents: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match output {
        Some(path) => write_atomic(path, contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::Runtime(e.to_string())),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn dataset(args: &DataArgs, seed: u64) -> CliResult<Dataset> {
    let d = match args.dataset {
        DatasetKind::Gas => {
            make_gas_analogue(seed, args.samples, args.channels, args.species, args.snr_db)
        }
        DatasetKind::Blobs => {
            make_blobs(seed, args.samples, args.classes, args.features, args.spread)
        }
        DatasetKind::Linear => make_linear(seed, args.samples, args.features, args.outputs),
    };
    d.map_err(|e| usage("--dataset", e))
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Eval {
            source,
            range,
            output,
        } => {
            let (p, _) = resolve(&source)?;
            let mut csv = String::from("x,f_uaf\n");
            for x in grid(&range)? {
                csv.push_str(&format!("{x},{}\n", p.eval(x)));
            }
            emit(output.as_deref(), &csv, stdout)
        }
        Command::Presets { action } => match action {
            PresetsAction::List => {
                let mut out = String::new();
                for kind in PresetKind::all() {
                    let p = preset(kind)?;
                    out.push_str(&format!("{:<16} {}\n", kind.to_string(), p));
                }
                emit(None, &out, stdout)
            }
            PresetsAction::Show { kind } => {
                let kind = parse_kind("kind", &kind)?;
                emit(None, &to_json(&preset(kind)?), stdout)
            }
        },
        Command::Fit {
            builtin,
            spec,
            output,
        } => {
            let spec = match (builtin, spec) {
                (Some(name), _) => FitSpec::builtin(&name).ok_or_else(|| {
                    usage(
                        "--builtin",
                        format!(
                            "unknown spec `{name}`, expected one of {}",
                            BUILTIN_SPECS.join(", ")
                        ),
                    )
                })?,
                (None, Some(path)) => {
                    let text = read_file("--spec", &path)?;
                    let spec: FitSpec =
                        serde_json::from_str(&text).map_err(|e| usage("--spec", e))?;
                    spec.validate().map_err(|e| usage("--spec", e))?;
                    spec
                }
                (None, None) => unreachable!("clap requires --builtin or --spec"),
            };
            let result = fit(&spec)?;
            emit(output.as_deref(), &to_json(&result), stdout)
        }
        Command::Report {
            source,
            target,
            lo,
            hi,
            samples,
            output,
        } => {
            let (p, own) = resolve(&source)?;
            let t = resolve_target(target.as_deref(), own)?;
            let interval = Interval::new(lo, hi).map_err(|e| usage("--lo/--hi", e))?;
            if samples < 2 {
                return Err(usage("--samples", "must be at least 2"));
            }
            let report = error_report(&p, &t, interval, samples)?;
            emit(output.as_deref(), &to_json(&report), stdout)
        }
        Command::Table {
            samples,
            format,
            output,
        } => {
            if samples < 2 {
                return Err(usage("--samples", "must be at least 2"));
            }
            let table = rmse_table(samples)?;
            let text = match format {
                TableFormat::Text => table.to_text(),
                TableFormat::Csv => table.to_csv(),
                TableFormat::Json => to_json(&table),
            };
            emit(output.as_deref(), &text, stdout)
        }
        Command::Train {
            config,
            data,
            output,
            trace,
        } => {
            let text = read_file("--config", &config)?;
            let mut cfg: NetworkConfig =
                serde_json::from_str(&text).map_err(|e| usage("--config", e))?;
            cfg.validate().map_err(|e| usage("--config", e))?;
            let seed = seed_override()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let data = dataset(&data, seed.unwrap_or(data.data_seed))?;
            let report = train(&cfg, &data)?;
            if let Some(path) = trace {
                emit(Some(&path), &report.to_csv(), stdout)?;
            }
            emit(output.as_deref(), &to_json(&report), stdout)
        }
        Command::Sweep {
            source,
            target,
            range,
            output,
        } => {
            let (p, own) = resolve(&source)?;
            let t = resolve_target(target.as_deref(), own)?;
            let mut csv = String::from("x,f_uaf,f_target,error\n");
            for x in grid(&range)? {
                let (u, v) = (p.eval(x), t.eval(x));
                csv.push_str(&format!("{x},{u},{v},{}\n", u - v));
            }
            emit(output.as_deref(), &csv, stdout)
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
