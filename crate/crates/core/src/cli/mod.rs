//! Command-line front end.
//!
//! Every emitted row carries a `manifest_id`: the SHA-256 of the operation,
//! its parameters, the cell seed, the sample count (when used) and the tool
//! version. With `--out FILE`, the full manifests are written next to the
//! output as `FILE.manifest.json` and can be re-run with [`replay`].
//!
//! Seeds: grid cell `k` of operation `op` runs with
//! `derive_seed(seed, op, k)` (see [`crate::rng::derive_seed`]).

mod ops;
mod table;
pub mod validate;

pub use ops::{cell_manifest, cell_seed, evaluate, outcome_json, replay, verify, Operation, Outcome, Point};
pub use table::{round12, Cell, Format, Table};
pub use validate::{Check, Suite, ValidateParams};

use crate::covariance::{self, pairs};
use crate::error::{Error, Result};
use crate::rng::{self, DEFAULT_SAMPLES};
use crate::simulator::{self, RunManifest};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable overriding the default Monte Carlo sample count.
pub const SAMPLES_ENV: &str = "ONEBIT_SAMPLES";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_BAD_ARGS: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Domain { .. } | Error::Config(_) => EXIT_BAD_ARGS,
        Error::Unsupported(_) => EXIT_UNSUPPORTED,
        Error::NonConvergence { .. } | Error::Factorization(_) | Error::Io(_) => EXIT_INTERNAL,
    }
}

/// Parses counts written as integers or in scientific notation (`1e6`).
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("'{s}' is not a count"))?;
    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("'{s}' is not a non-negative integer"))
    }
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    parse_count(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

#[derive(Debug, Parser)]
#[command(name = "onebit", version, about = "Capacity of 1-bit quantized MIMO channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Channel {
    Coherent,
    Noncoherent,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Large-nr capacity, one row per parameter point.
    Capacity {
        #[arg(value_enum)]
        channel: Channel,
        #[command(flatten)]
        args: Common,
    },
    /// Every non-coherent bound and approximation at each point.
    Bounds {
        #[command(flatten)]
        args: Common,
    },
    /// log2 Vol(Q_gamma): exact, Monte Carlo and large-T expansions.
    Volume {
        #[command(flatten)]
        args: Common,
    },
    /// Draws q uniformly in Q_gamma, simulates one block and reports q_hat.
    Simulate {
        #[command(flatten)]
        args: Common,
    },
    /// Runs a validation suite; exits 4 if any check fails.
    Validate {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        args: Common,
    },
    /// Evaluates the cross product of the axes in a TOML config.
    Sweep {
        config: PathBuf,
        #[arg(long, value_parser = parse_count)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Signal-to-noise ratio, comma-separated list
    #[arg(long, value_delimiter = ',')]
    snr: Vec<f64>,
    /// snr/(1+snr); an alternative to --snr for the non-coherent channel
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    /// Coherence length
    #[arg(long = "T", value_delimiter = ',', value_parser = parse_usize)]
    t: Vec<usize>,
    /// Transmit antennas
    #[arg(long, value_delimiter = ',', value_parser = parse_usize)]
    nt: Vec<usize>,
    /// Receive antennas, e.g. 4096 or 1e6
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    nr: Vec<u64>,
    #[arg(long)]
    method: Option<String>,
    /// Monte Carlo budget [env: ONEBIT_SAMPLES]
    #[arg(long, value_parser = parse_count)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here and the manifests to <OUT>.manifest.json
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Sample budget: flag, then [`SAMPLES_ENV`], then the library default.
fn resolve_samples(flag: Option<u64>, env: Option<&str>) -> Result<u64> {
    match (flag, env) {
        (Some(v), _) => Ok(v),
        (None, Some(s)) => parse_count(s.trim()).map_err(|e| Error::Config(format!("{SAMPLES_ENV}: {e}"))),
        (None, None) => Ok(DEFAULT_SAMPLES as u64),
    }
}

/// Runs the CLI and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = std::env::var(SAMPLES_ENV).ok();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_ARGS } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, env.as_deref(), stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, env: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Capacity { channel, args } => {
            let op = match channel {
                Channel::Coherent => Operation::CapacityCoherent,
                Channel::Noncoherent => Operation::CapacityNoncoherent,
            };
            let method = args.method.clone().unwrap_or_else(|| op.default_method().to_string());
            let samples = resolve_samples(args.samples, env)?;
            let cells = grid_from_args(&args, &[method]);
            let out = run_cells(op, &cells, samples, args.seed);
            if let Some(e) = out.iter().find_map(|c| c.result.as_ref().err()) {
                return Err(e.clone());
            }
            emit_cells(&cells, &out, &args, stdout, stderr)
        }
        Command::Bounds { args } => {
            let op = Operation::CapacityNoncoherent;
            let samples = resolve_samples(args.samples, env)?;
            let all: Vec<String> = op.methods().iter().map(|s| s.to_string()).collect();
            let methods = args.method.clone().map_or(all, |m| vec![m]);
            let mut cells = grid_from_args(&args, &methods);
            cells.retain(|(p, m)| !(m == "exact" && p.t.is_some_and(|t| t > 3) && args.method.is_none()));
            let out = run_cells(op, &cells, samples, args.seed);
            emit_cells(&cells, &out, &args, stdout, stderr)
        }
        Command::Volume { args } => {
            let op = Operation::Volume;
            let samples = resolve_samples(args.samples, env)?;
            let all: Vec<String> = op.methods().iter().map(|s| s.to_string()).collect();
            let methods = args.method.clone().map_or(all, |m| vec![m]);
            let cells = grid_from_args(&args, &methods);
            let out = run_cells(op, &cells, samples, args.seed);
            if let Some(e) = out.iter().find_map(|c| c.result.as_ref().err()) {
                return Err(e.clone());
            }
            emit_cells(&cells, &out, &args, stdout, stderr)
        }
        Command::Simulate { args } => cmd_simulate(&args, stdout, stderr),
        Command::Validate { suite, args } => cmd_validate(suite, &args, env, stdout, stderr),
        Command::Sweep { config, samples, seed, format, out } => {
            let mut cfg = SweepConfig::load(&config)?;
            if samples.is_some() {
                cfg.samples = samples;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if format.is_some() {
                cfg.format = format;
            }
            if out.is_some() {
                cfg.out = out;
            }
            let samples = resolve_samples(cfg.samples, env)?;
            let sweep = run_sweep(&cfg, samples)?;
            let bytes = sweep.table.render(cfg.format.unwrap_or_default())?;
            write_output(cfg.out.as_deref(), &bytes, &sweep.manifests, stdout)?;
            let failures = sweep.table.rows.iter().filter(|r| !matches!(r.last(), Some(Cell::Empty))).count();
            if failures > 0 {
                let _ = writeln!(stderr, "{failures} cell(s) failed; see the error column");
            }
            Ok(EXIT_OK)
        }
    }
}

type Cells = Vec<(Point, String)>;

/// Cross product in the order snr, gamma, T, nt, nr, method (last fastest).
/// Absent axes contribute a single `None`.
fn grid(snr: &[f64], gamma: &[f64], t: &[usize], nt: &[usize], nr: &[u64], methods: &[String]) -> Cells {
    fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
        if v.is_empty() {
            vec![None]
        } else {
            v.iter().copied().map(Some).collect()
        }
    }
    let mut cells = Vec::new();
    for &snr in &axis(snr) {
        for &gamma in &axis(gamma) {
            for &t in &axis(t) {
                for &nt in &axis(nt) {
                    for &nr in &axis(nr) {
                        for m in methods {
                            cells.push((Point { snr, gamma, t, nt, nr }, m.clone()));
                        }
                    }
                }
            }
        }
    }
    cells
}

fn grid_from_args(a: &Common, methods: &[String]) -> Cells {
    grid(&a.snr, &a.gamma, &a.t, &a.nt, &a.nr, methods)
}

struct CellResult {
    result: Result<Outcome>,
    manifest: RunManifest,
}

fn run_cells(op: Operation, cells: &Cells, samples: u64, seed: u64) -> Vec<CellResult> {
    cells
        .par_iter()
        .enumerate()
        .map(|(k, (p, m))| {
            let s = cell_seed(seed, op.name(), k);
            let mut manifest = cell_manifest(op, p, m, samples, s);
            let start = Instant::now();
            let result = evaluate(op, p, m, samples, s);
            manifest.record_outputs(outcome_json(&result).to_string().as_bytes(), start.elapsed().as_secs_f64());
            CellResult { result, manifest }
        })
        .collect()
}

const AXES: [&str; 5] = ["snr", "gamma", "T", "nt", "nr"];
const RESULT_COLUMNS: [&str; 9] =
    ["method", "value_bits", "std_err", "term_dimension", "term_volume", "term_alpha", "seed", "manifest_id", "error"];

fn axis_cells(p: &Point, used: &[bool; 5]) -> Vec<Cell> {
    let all = [
        Cell::from(p.snr),
        Cell::from(p.gamma),
        p.t.map_or(Cell::Empty, Cell::from),
        p.nt.map_or(Cell::Empty, Cell::from),
        p.nr.map_or(Cell::Empty, Cell::from),
    ];
    all.into_iter().zip(used).filter(|(_, u)| **u).map(|(c, _)| c).collect()
}

fn result_table(cells: &Cells, out: &[CellResult], used: [bool; 5]) -> Table {
    let cols = AXES.iter().zip(&used).filter(|(_, u)| **u).map(|(a, _)| *a).chain(RESULT_COLUMNS);
    let mut table = Table::new(cols);
    for ((p, m), c) in cells.iter().zip(out) {
        let mut row = axis_cells(p, &used);
        row.push(m.as_str().into());
        match &c.result {
            Ok(o) => {
                row.push(o.value_bits.into());
                row.push(o.std_err.into());
                row.push(o.terms.map(|t| t.dimension).into());
                row.push(o.terms.map(|t| t.volume).into());
                row.push(o.terms.map(|t| t.alpha).into());
            }
            Err(_) => row.extend((0..5).map(|_| Cell::Empty)),
        }
        row.push(c.manifest.seed.into());
        row.push(c.manifest.id().into());
        row.push(c.result.as_ref().err().map(|e| e.to_string()).into());
        table.push(row);
    }
    table
}

fn emit_cells(
    cells: &Cells,
    out: &[CellResult],
    args: &Common,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let used = [
        !args.snr.is_empty(),
        !args.gamma.is_empty(),
        !args.t.is_empty(),
        !args.nt.is_empty(),
        !args.nr.is_empty(),
    ];
    for c in out {
        if let Ok(Outcome { warning: Some(w), .. }) = &c.result {
            let _ = writeln!(stderr, "warning: {w}");
        }
    }
    let bytes = result_table(cells, out, used).render(args.format)?;
    let manifests: Vec<RunManifest> = out.iter().map(|c| c.manifest.clone()).collect();
    write_output(args.out.as_deref(), &bytes, &manifests, stdout)?;
    Ok(EXIT_OK)
}

/// Path of the manifest file written next to `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_output(out: Option<&Path>, bytes: &[u8], manifests: &[RunManifest], stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes)?;
            let m = serde_json::to_string_pretty(manifests).map_err(|e| Error::Io(e.to_string()))?;
            std::fs::write(manifest_path(path), m + "\n")?;
        }
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

/// Reads a manifest file written by `--out`.
pub fn load_manifests(path: &Path) -> Result<Vec<RunManifest>> {
    let s = std::fs::read_to_string(path)?;
    serde_json::from_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateParams {
    #[serde(rename = "T")]
    pub t: usize,
    pub gamma: f64,
    pub nt: usize,
    pub nr: u64,
}

/// Draws `q` uniform in `Q_γ`, builds `X`, simulates a block and returns
/// one row per pair with the JSON outputs digested into the manifest.
pub fn simulate_outputs(p: &SimulateParams, seed: u64) -> Result<(Table, Value)> {
    if p.nt < p.t {
        return Err(Error::invalid(format!("nt must be at least T (nt = {}, T = {})", p.nt, p.t)));
    }
    let q = covariance::sample_uniform_q(p.t, p.gamma, rng::derive_seed(seed, "simulate-q", 0))?;
    let x = covariance::input_from_q(&q, p.gamma / (1.0 - p.gamma))?;
    let x = if p.nt > p.t {
        let mut m = nalgebra::DMatrix::zeros(p.nt, p.t);
        m.view_mut((0, 0), (p.t, p.t)).copy_from(x.matrix());
        covariance::InputMatrix::new(m)?
    } else {
        x
    };
    let nr = usize::try_from(p.nr).map_err(|_| Error::invalid("nr too large"))?;
    let block = simulator::simulate_block(&x, nr, rng::derive_seed(seed, "simulate-block", 0))?;
    let q_hat = simulator::estimate_q_hat(&block);
    let expected = simulator::expected_disagreement(&x)?;
    let mut table = Table::new(["i", "j", "q", "q_hat", "disagreement", "expected_disagreement"]);
    let mut dis = Vec::new();
    for (k, (i, j)) in pairs(p.t).into_iter().enumerate() {
        let d = block.disagreement(i, j);
        dis.push(d);
        table.push(vec![
            i.into(),
            j.into(),
            q.entries()[k].into(),
            q_hat.entries()[k].into(),
            d.into(),
            expected[&(i, j)].into(),
        ]);
    }
    let v = serde_json::json!({ "q": q.entries(), "q_hat": q_hat.entries(), "disagreement": dis });
    Ok((table, v))
}

fn single<T: Copy>(v: &[T], flag: &str) -> Result<Option<T>> {
    match v {
        [] => Ok(None),
        [x] => Ok(Some(*x)),
        _ => Err(Error::invalid(format!("--{flag} takes a single value here"))),
    }
}

fn cmd_simulate(args: &Common, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> Result<i32> {
    let t = single(&args.t, "T")?.ok_or_else(|| Error::invalid("missing --T"))?;
    let gamma = match (single(&args.gamma, "gamma")?, single(&args.snr, "snr")?) {
        (Some(_), Some(_)) => return Err(Error::invalid("give only one of --snr and --gamma")),
        (Some(g), None) => g,
        (None, Some(s)) if s > 0.0 && s.is_finite() => s / (1.0 + s),
        (None, Some(s)) => return Err(Error::invalid(format!("snr must be positive and finite (snr = {s})"))),
        (None, None) => return Err(Error::invalid("missing --snr or --gamma")),
    };
    let p = SimulateParams {
        t,
        gamma,
        nt: single(&args.nt, "nt")?.unwrap_or(t),
        nr: single(&args.nr, "nr")?.ok_or_else(|| Error::invalid("missing --nr"))?,
    };
    let seed = cell_seed(args.seed, "simulate", 0);
    let start = Instant::now();
    let (mut table, outputs) = simulate_outputs(&p, seed)?;
    let mut manifest = RunManifest::new("simulate", ops::to_params(&p), seed, None);
    manifest.record_outputs(outputs.to_string().as_bytes(), start.elapsed().as_secs_f64());
    append_manifest_columns(&mut table, &manifest);
    let bytes = table.render(args.format)?;
    write_output(args.out.as_deref(), &bytes, &[manifest], stdout)?;
    Ok(EXIT_OK)
}

fn append_manifest_columns(table: &mut Table, m: &RunManifest) {
    table.columns.push("seed".into());
    table.columns.push("manifest_id".into());
    let id = m.id();
    for r in &mut table.rows {
        r.push(m.seed.into());
        r.push(id.clone().into());
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(
    suite: Suite,
    args: &Common,
    env: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let samples = resolve_samples(args.samples, env)?;
    let p = ValidateParams {
        suite,
        t: args.t.clone(),
        gamma: args.gamma.clone(),
        snr: args.snr.clone(),
        nt: args.nt.clone(),
        nr: args.nr.clone(),
    };
    let seed = cell_seed(args.seed, "validate", 0);
    let start = Instant::now();
    let checks = validate::run_suite(&p, samples, seed);
    let mut manifest = RunManifest::new("validate", ops::to_params(&p), seed, Some(samples));
    manifest.record_outputs(validate::report_json(&checks).to_string().as_bytes(), start.elapsed().as_secs_f64());
    let mut table = Table::new(["suite", "check", "measured", "expected", "tolerance", "result"]);
    for c in &checks {
        table.push(vec![
            c.suite.into(),
            c.check.clone().into(),
            c.measured.into(),
            c.expected.into(),
            c.tolerance.into(),
            (if c.pass { "PASS" } else { "FAIL" }).into(),
        ]);
    }
    append_manifest_columns(&mut table, &manifest);
    let bytes = table.render(args.format)?;
    write_output(args.out.as_deref(), &bytes, &[manifest], stdout)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        let _ = writeln!(stderr, "{failed} of {} checks failed", checks.len());
        Ok(EXIT_VALIDATION)
    } else {
        Ok(EXIT_OK)
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

/// Sweep configuration, a flat TOML table:
///
/// ```toml
/// operation = "capacity-noncoherent"
/// method = ["lb-uniform", "ub-genie"]
/// seed = 7
/// snr = [0.1, 1.0]
/// T = [2, 3]
/// nr = [4096]
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub operation: String,
    #[serde(default)]
    method: Option<OneOrMany>,
    pub snr: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    #[serde(rename = "T")]
    pub t: Option<Vec<f64>>,
    pub nt: Option<Vec<f64>>,
    pub nr: Option<Vec<f64>>,
    pub samples: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Largest admissible grid; defaults to 100000 cells.
    pub max_cells: Option<usize>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn methods(&self) -> Vec<String> {
        match &self.method {
            None => Operation::parse(&self.operation).map(|o| vec![o.default_method().to_string()]).unwrap_or_default(),
            Some(OneOrMany::One(m)) => vec![m.clone()],
            Some(OneOrMany::Many(v)) => v.clone(),
        }
    }
}

fn int_axis<T: TryFrom<u64>>(v: &Option<Vec<f64>>, name: &str) -> Result<Vec<T>> {
    v.iter()
        .flatten()
        .map(|&x| {
            if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 {
                T::try_from(x as u64).map_err(|_| Error::Config(format!("{name} value {x} out of range")))
            } else {
                Err(Error::Config(format!("{name} values must be non-negative integers (got {x})")))
            }
        })
        .collect()
}

pub struct SweepOutput {
    pub table: Table,
    pub manifests: Vec<RunManifest>,
}

/// Evaluates the grid; failing cells fill the error column instead of
/// aborting. Rows come out in grid order whatever the completion order.
pub fn run_sweep(cfg: &SweepConfig, samples: u64) -> Result<SweepOutput> {
    let op = Operation::parse(&cfg.operation).ok_or_else(|| {
        Error::Config(format!(
            "unknown operation '{}'; expected capacity-coherent, capacity-noncoherent, volume or mi-t2",
            cfg.operation
        ))
    })?;
    let methods = cfg.methods();
    for m in &methods {
        if !op.methods().contains(&m.as_str()) {
            return Err(Error::Config(format!(
                "unknown method '{m}' for {}; expected one of {}",
                op.name(),
                op.methods().join(", ")
            )));
        }
    }
    let t: Vec<usize> = int_axis(&cfg.t, "T")?;
    let nt: Vec<usize> = int_axis(&cfg.nt, "nt")?;
    let nr: Vec<u64> = int_axis(&cfg.nr, "nr")?;
    let snr = cfg.snr.clone().unwrap_or_default();
    let gamma = cfg.gamma.clone().unwrap_or_default();
    let used = [cfg.snr.is_some(), cfg.gamma.is_some(), cfg.t.is_some(), cfg.nt.is_some(), cfg.nr.is_some()];
    let lens = [snr.len(), gamma.len(), t.len(), nt.len(), nr.len()];
    let empty = !used.iter().any(|u| *u) || used.iter().zip(lens).any(|(u, l)| *u && l == 0) || methods.is_empty();
    let cells = if empty { Vec::new() } else { grid(&snr, &gamma, &t, &nt, &nr, &methods) };
    let budget = cfg.max_cells.unwrap_or(100_000);
    if cells.len() > budget {
        return Err(Error::Config(format!("grid has {} cells, above max_cells = {budget}", cells.len())));
    }
    let out = run_cells(op, &cells, samples, cfg.seed);
    let table = result_table(&cells, &out, used);
    Ok(SweepOutput { table, manifests: out.into_iter().map(|c| c.manifest).collect() })
}
