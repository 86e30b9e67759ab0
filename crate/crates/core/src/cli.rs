//! The `graphstab` command line. Every command returns its exit code:
//! 0 on success, 1 when the answer is negative (not chordal, not exact,
//! correction failed), 2 on unreadable or invalid input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::chordal::{is_chordal, Chordality, Graph};
use crate::reps::{exact_rep_diagonal, exact_rep_mixed, perturb, sub_seed, Rep, VertexGroup};
use crate::stabilize::{stabilize, verify_exact, OffsetPolicy, StabilizeError, StabilizeParams, StabilizeReport};
use crate::words::{normal_form, parse_word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Header of the experiment CSV.
pub const CSV_HEADER: [&str; 10] = [
    "trial",
    "graph",
    "dim",
    "delta",
    "arcs_m",
    "seed",
    "input_defect",
    "output_defect",
    "max_distance",
    "runtime_ms",
];

#[derive(Debug, Parser)]
#[command(name = "graphstab", version, about = "Stabilize approximate representations of graph products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide chordality and print a construction sequence or chordless cycle.
    CheckGraph {
        graph: PathBuf,
        #[command(flatten)]
        preset: Preset,
    },
    /// Print the normal form of a word, e.g. "a b^-1 a".
    NormalForm {
        graph: PathBuf,
        word: String,
        #[command(flatten)]
        preset: Preset,
    },
    /// Correct an approximate representation into an exact one.
    Stabilize {
        rep: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Corrected representation (JSON); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report (JSON); stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check the defining relations of a representation.
    Verify {
        rep: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Perturbation sweep over dims × deltas × arcs_m × trials, written as CSV.
    Experiment {
        graph: PathBuf,
        #[command(flatten)]
        preset: Preset,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        #[arg(long = "arcs-m", value_delimiter = ',', default_value = "32")]
        arcs_m: Vec<u32>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, env = "GRAPHSTAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        sweeps: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = OffsetArg::MaxMargin)]
        offset: OffsetArg,
        /// Fill the runtime_ms column (makes the output machine dependent).
        #[arg(long)]
        timing: bool,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an exact representation, optionally perturbed.
    Generate {
        graph: PathBuf,
        #[command(flatten)]
        preset: Preset,
        #[arg(long)]
        dim: usize,
        #[arg(long, env = "GRAPHSTAB_SEED", default_value_t = 0)]
        seed: u64,
        /// Perturbation size; exact when omitted.
        #[arg(long)]
        delta: Option<f64>,
        /// Use the non-commuting generator instead of the diagonal one.
        #[arg(long)]
        mixed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct Preset {
    /// Every vertex group is ℤ.
    #[arg(long)]
    pub raag: bool,
    /// Every vertex group is ℤ/2.
    #[arg(long)]
    pub racg: bool,
}

impl Preset {
    fn group(&self) -> Option<VertexGroup> {
        if self.raag {
            Some(VertexGroup::FreeAbelian)
        } else if self.racg {
            Some(VertexGroup::Cyclic(2))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OffsetArg {
    Fixed,
    MaxMargin,
}

impl From<OffsetArg> for OffsetPolicy {
    fn from(o: OffsetArg) -> Self {
        match o {
            OffsetArg::Fixed => OffsetPolicy::Fixed,
            OffsetArg::MaxMargin => OffsetPolicy::MaxMargin,
        }
    }
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long = "arcs-m", default_value_t = 32)]
    pub arcs_m: u32,
    #[arg(long, default_value_t = 3)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, env = "GRAPHSTAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OffsetArg::MaxMargin)]
    pub offset: OffsetArg,
}

impl ParamArgs {
    fn params(&self) -> StabilizeParams {
        StabilizeParams {
            arcs_m: self.arcs_m,
            offset_policy: self.offset.into(),
            jacobi_sweeps: self.sweeps,
            exact_tol: self.tol,
            seed: self.seed,
        }
    }
}

/// Input failures, all reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(String);

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path, preset: &Preset) -> Result<Graph, InputError> {
    Graph::from_json_with_preset(&read(path)?, preset.group())
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_rep(path: &Path) -> Result<Rep, InputError> {
    Rep::from_json_str(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), InputError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| InputError(format!("{}: {e}", p.display()))),
        None => writeln!(out, "{text}").map_err(|e| InputError(e.to_string())),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match &cli.command {
        Command::CheckGraph { graph, preset } => cmd_check_graph(graph, preset, out),
        Command::NormalForm { graph, word, preset } => cmd_normal_form(graph, word, preset, out),
        Command::Stabilize { rep, params, out: rep_out, report } => {
            cmd_stabilize(rep, &params.params(), rep_out.as_deref(), report.as_deref(), out, err)
        }
        Command::Verify { rep, tol } => cmd_verify(rep, *tol, out),
        Command::Experiment {
            graph,
            preset,
            dims,
            deltas,
            arcs_m,
            trials,
            seed,
            sweeps,
            tol,
            offset,
            timing,
            out: csv_out,
        } => {
            let config = ExperimentConfig {
                graph: graph.clone(),
                preset: preset.group(),
                dims: dims.clone(),
                deltas: deltas.clone(),
                arcs_m: arcs_m.clone(),
                trials: *trials,
                seed: *seed,
                sweeps: *sweeps,
                tol: *tol,
                offset: (*offset).into(),
                timing: *timing,
                out: csv_out.clone(),
            };
            cmd_experiment(&config, out, err)
        }
        Command::Generate { graph, preset, dim, seed, delta, mixed, out: rep_out } => {
            cmd_generate(graph, preset, *dim, *seed, *delta, *mixed, rep_out.as_deref(), out)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn cmd_check_graph(path: &Path, preset: &Preset, out: &mut dyn Write) -> Result<i32, InputError> {
    let g = load_graph(path, preset)?;
    let io = |e: std::io::Error| InputError(e.to_string());
    match is_chordal(&g) {
        Chordality::Chordal { .. } => {
            let seq = crate::chordal::construction_sequence(&g).expect("chordal");
            writeln!(out, "chordal").map_err(io)?;
            writeln!(out, "construction sequence:").map_err(io)?;
            for (v, attach) in seq.describe(&g) {
                writeln!(out, "  {v} <- {{{}}}", attach.join(", ")).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Chordality::NotChordal { cycle } => {
            let names: Vec<&str> = cycle.iter().map(|&v| g.name(v)).collect();
            writeln!(out, "not chordal").map_err(io)?;
            writeln!(out, "chordless cycle ({}): {}", names.len(), names.join(" - ")).map_err(io)?;
            Ok(EXIT_NEGATIVE)
        }
    }
}

pub fn cmd_normal_form(
    path: &Path,
    word: &str,
    preset: &Preset,
    out: &mut dyn Write,
) -> Result<i32, InputError> {
    let g = load_graph(path, preset)?;
    let w = parse_word(word, &g).map_err(|e| InputError(e.to_string()))?;
    writeln!(out, "{}", normal_form(&w)).map_err(|e| InputError(e.to_string()))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Combined<'a> {
    rep: crate::reps::RepFile,
    report: &'a StabilizeReport,
}

pub fn cmd_stabilize(
    path: &Path,
    params: &StabilizeParams,
    rep_out: Option<&Path>,
    report_out: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, InputError> {
    let rep = load_rep(path)?;
    let (fixed, report) = match stabilize(&rep, params) {
        Ok(r) => r,
        Err(e @ StabilizeError::InvalidParams(_)) => return Err(InputError(e.to_string())),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return Ok(EXIT_NEGATIVE);
        }
    };
    let report_text = serde_json::to_string_pretty(&report).expect("report serializes");
    match (rep_out, report_out) {
        (None, None) => {
            let combined = Combined { rep: fixed.to_file(), report: &report };
            emit(None, &serde_json::to_string_pretty(&combined).expect("serializes"), out)?;
        }
        _ => {
            emit(rep_out, &fixed.to_json_string(), out)?;
            emit(report_out, &report_text, out)?;
        }
    }
    if report.success {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(
            err,
            "output defect {:.3e} exceeds tolerance {:.1e}",
            report.output_defect.max_defect, params.exact_tol
        );
        Ok(EXIT_NEGATIVE)
    }
}

pub fn cmd_verify(path: &Path, tol: f64, out: &mut dyn Write) -> Result<i32, InputError> {
    let rep = load_rep(path)?;
    let (ok, report) = verify_exact(&rep, tol).map_err(|e| InputError(e.to_string()))?;
    let io = |e: std::io::Error| InputError(e.to_string());
    writeln!(out, "{}", if ok { "exact" } else { "not exact" }).map_err(io)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializes")).map_err(io)?;
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_generate(
    path: &Path,
    preset: &Preset,
    dim: usize,
    seed: u64,
    delta: Option<f64>,
    mixed: bool,
    rep_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, InputError> {
    let g = load_graph(path, preset)?;
    let exact = if mixed {
        exact_rep_mixed(&g, dim, seed).map_err(|e| InputError(e.to_string()))?
    } else {
        exact_rep_diagonal(&g, dim, seed)
    };
    let rep = match delta {
        Some(d) => perturb(&exact, d, sub_seed(seed, 1)),
        None => exact,
    };
    emit(rep_out, &rep.to_json_string(), out)?;
    Ok(EXIT_OK)
}

/// Settings of one perturbation sweep.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub preset: Option<VertexGroup>,
    pub dims: Vec<usize>,
    pub deltas: Vec<f64>,
    pub arcs_m: Vec<u32>,
    pub trials: usize,
    pub seed: u64,
    pub sweeps: usize,
    pub tol: f64,
    pub offset: OffsetPolicy,
    pub timing: bool,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), InputError> {
        if self.dims.is_empty() || self.deltas.is_empty() || self.arcs_m.is_empty() {
            return Err(InputError("dims, deltas and arcs_m must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(InputError("trials must be at least 1".into()));
        }
        if self.dims.contains(&0) {
            return Err(InputError("dims must be positive".into()));
        }
        if self.deltas.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(InputError("deltas must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub trial: usize,
    pub graph: String,
    pub dim: usize,
    pub delta: f64,
    pub arcs_m: u32,
    pub seed: u64,
    pub input_defect: f64,
    pub output_defect: f64,
    pub max_distance: f64,
    pub runtime_ms: Option<f64>,
    pub success: bool,
}

impl ExperimentRow {
    fn record(&self) -> [String; 10] {
        [
            self.trial.to_string(),
            self.graph.clone(),
            self.dim.to_string(),
            self.delta.to_string(),
            self.arcs_m.to_string(),
            self.seed.to_string(),
            self.input_defect.to_string(),
            self.output_defect.to_string(),
            self.max_distance.to_string(),
            self.runtime_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ]
    }
}

/// Trial seed; shared across deltas and arcs_m so cells differ only in
/// the swept parameter.
pub fn trial_seed(base: u64, dim: usize, trial: usize) -> u64 {
    sub_seed(sub_seed(base, dim as u64), trial as u64)
}

/// Runs every cell of the sweep (in parallel) and returns rows sorted by
/// (dim, delta, arcs_m, trial).
pub fn run_experiment(g: &Graph, label: &str, config: &ExperimentConfig) -> Result<Vec<ExperimentRow>, StabilizeError> {
    let mut cells = Vec::new();
    for &dim in &config.dims {
        for &delta in &config.deltas {
            for &arcs_m in &config.arcs_m {
                for trial in 0..config.trials {
                    cells.push((dim, delta, arcs_m, trial));
                }
            }
        }
    }
    let mut rows = cells
        .par_iter()
        .map(|&(dim, delta, arcs_m, trial)| {
            let seed = trial_seed(config.seed, dim, trial);
            let start = Instant::now();
            let exact = exact_rep_diagonal(g, dim, seed);
            let rep = perturb(&exact, delta, sub_seed(seed, 1));
            let params = StabilizeParams {
                arcs_m,
                offset_policy: config.offset,
                jacobi_sweeps: config.sweeps,
                exact_tol: config.tol,
                seed,
            };
            let (_, report) = stabilize(&rep, &params)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            Ok(ExperimentRow {
                trial,
                graph: label.to_string(),
                dim,
                delta,
                arcs_m,
                seed,
                input_defect: report.input_defect.max_defect,
                output_defect: report.output_defect.max_defect,
                max_distance: report.distances.max,
                runtime_ms: config.timing.then_some(elapsed),
                success: report.success,
            })
        })
        .collect::<Result<Vec<_>, StabilizeError>>()?;
    rows.sort_by(|a, b| {
        (a.dim, a.delta, a.arcs_m, a.trial)
            .partial_cmp(&(b.dim, b.delta, b.arcs_m, b.trial))
            .expect("finite deltas")
    });
    Ok(rows)
}

pub fn write_csv(rows: &[ExperimentRow], sink: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_experiment(config: &ExperimentConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, InputError> {
    config.validate()?;
    let preset = Preset {
        raag: config.preset == Some(VertexGroup::FreeAbelian),
        racg: config.preset == Some(VertexGroup::Cyclic(2)),
    };
    let g = load_graph(&config.graph, &preset)?;
    let g = match config.preset {
        Some(group) => g.with_uniform_group(group),
        None => g,
    };
    let label = config
        .graph
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into());
    let rows = match run_experiment(&g, &label, config) {
        Ok(rows) => rows,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return Ok(EXIT_NEGATIVE);
        }
    };
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| InputError(e.to_string()))?;
    match &config.out {
        Some(p) => fs::write(p, &buf).map_err(|e| InputError(format!("{}: {e}", p.display())))?,
        None => out.write_all(&buf).map_err(|e| InputError(e.to_string()))?,
    }
    let failures = rows.iter().filter(|r| !r.success).count();
    if failures > 0 {
        let _ = writeln!(err, "{failures} of {} runs did not reach the tolerance", rows.len());
        return Ok(EXIT_NEGATIVE);
    }
    Ok(EXIT_OK)
}
