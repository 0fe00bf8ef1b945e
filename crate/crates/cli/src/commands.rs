use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use darkstate_core::classify::{dark_subspaces, Tolerances};
use darkstate_core::dynamics::{
    parameter_scan, propagate, uniform_times, InitialState, Observable, ParameterPath, ScanAxis,
};
use darkstate_core::export::{format_number, scan_csv, trajectory_columns, trajectory_csv, Metadata};
use darkstate_core::linalg::hermitian_eigen;
use darkstate_core::liouville::build_lindblad;
use darkstate_core::model::{load_system, save_system, validate_system, LevelSystem};
use darkstate_core::parallel::Execution;
use darkstate_core::presets::{catalog, preset};
use darkstate_core::report::{
    classification_report, frame_report, rb87_row, rb87_table, render_classification, render_rb87_table,
    ClassificationReport, FrameReport, Rb87Row,
};
use darkstate_core::rwa::{build_hamiltonian, solve_frame};

use crate::cli::{
    ClassifyArgs, Command, EvolveArgs, ExportArgs, Format, ObservableArg, Output, Rb87Args, ReportArgs, ScanArgs,
    Source, SystemArgs, Tolerance,
};

/// Run one command; the value is the process exit status.
pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Presets => presets(),
        Command::Validate(args) => validate(args),
        Command::Rwa(args) => rwa(args),
        Command::Classify(args) => classify(args),
        Command::Evolve(args) => evolve(args),
        Command::Scan(args) => scan(args),
        Command::Rb87Table(args) => rb87(args),
        Command::Export(args) => export(args),
    }
}

fn load(source: &Source) -> Result<LevelSystem> {
    match (&source.preset, &source.system) {
        (Some(name), None) => Ok(preset(name)?),
        (None, Some(path)) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            load_system(&bytes).with_context(|| format!("loading {}", path.display()))
        }
        _ => bail!("exactly one of --preset and --system is required"),
    }
}

fn tolerances(t: &Tolerance) -> Tolerances {
    Tolerances { degeneracy: t.tol_degeneracy, rank: t.tol_rank }
}

fn format_of(output: &Output, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = output.format.unwrap_or(default);
    if !allowed.contains(&f) {
        bail!("format {f:?} is not supported by this command");
    }
    Ok(f)
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn presets() -> Result<u8> {
    for p in catalog() {
        println!("{:<10} {}", p.name, p.description);
    }
    Ok(0)
}

fn validate(args: SystemArgs) -> Result<u8> {
    let system = load(&args.source)?;
    let report = validate_system(&system);
    for f in &report.errors {
        println!("error: {}", f.message);
    }
    for f in &report.warnings {
        println!("warning: {}", f.message);
    }
    if report.is_empty() {
        println!("ok");
    }
    Ok(if report.is_ok() { 0 } else { 1 })
}

fn render_frame(r: &FrameReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "feasible: {}", if r.feasible { "yes" } else { "no" });
    let _ = writeln!(out, "independent cycles: {}", r.independent_cycles);
    let _ = writeln!(out, "frame energies:");
    for e in &r.epsilons {
        let _ = writeln!(out, "  {:<12} {}", e.label, format_number(e.value));
    }
    for (k, c) in r.cycles.iter().enumerate() {
        let path: Vec<String> =
            c.edges.iter().map(|e| format!("{}{}->{}", if e.sign > 0 { "+" } else { "-" }, e.from, e.to)).collect();
        let _ = writeln!(out, "cycle {}: {}  residual {}", k + 1, path.join(" "), format_number(c.residual));
    }
    let _ = writeln!(out, "cycle-space residual: {}", format_number(r.cycle_space_residual));
    out
}

fn rwa(args: ReportArgs) -> Result<u8> {
    let system = load(&args.source)?;
    let frame = solve_frame(&system);
    let report = frame_report(&system, &frame);
    let text = match format_of(&args.output, Format::Table, &[Format::Table, Format::Json])? {
        Format::Json => json(&report),
        _ => render_frame(&report),
    };
    emit(&args.output, &text)?;
    Ok(if frame.feasible { 0 } else { 2 })
}

fn classify(args: ClassifyArgs) -> Result<u8> {
    let system = load(&args.source)?;
    let h = build_hamiltonian(&system, &solve_frame(&system))?;
    let cls = dark_subspaces(&h, tolerances(&args.tolerance));
    let report = classification_report(&system, &cls);
    // hyperfine presets also get their per-component manifold row
    let scheme = args.source.preset.as_deref().and_then(|n| n.strip_prefix("rb87-")).and_then(|id| id.parse().ok());
    let row = scheme.map(|id| rb87_row(id, tolerances(&args.tolerance))).transpose()?;
    let text = match format_of(&args.output, Format::Table, &[Format::Table, Format::Json])? {
        Format::Json => json(&ClassifyJson { classification: report, rb87: row }),
        _ => {
            let mut text = render_classification(&report);
            if let Some(row) = &row {
                text.push('\n');
                text.push_str(&render_rb87_table(std::slice::from_ref(row)));
            }
            text
        }
    };
    emit(&args.output, &text)?;
    Ok(if cls.has_dark_state() { 0 } else { 2 })
}

#[derive(Serialize)]
struct ClassifyJson {
    #[serde(flatten)]
    classification: ClassificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    rb87: Option<Rb87Row>,
}

fn initial_state(spec: &str) -> Result<InitialState> {
    let path = Path::new(spec);
    if path.is_file() {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(InitialState::from_json(&bytes)?);
    }
    Ok(spec.parse()?)
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    labels: Vec<String>,
    times: &'a [f64],
    populations: &'a [Vec<f64>],
    purity: &'a [f64],
    excited_population: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    eigen_populations: Option<&'a [Vec<f64>]>,
}

fn evolve(args: EvolveArgs) -> Result<u8> {
    if !(args.t_end >= 0.0 && args.t_end.is_finite()) {
        bail!("--t-end must be a non-negative number");
    }
    let system = load(&args.source)?;
    let h = build_hamiltonian(&system, &solve_frame(&system))?;
    let l = build_lindblad(&system, &h)?;
    let rho0 = initial_state(&args.rho0)?.density(&system)?;
    let times = if args.t_end == 0.0 { vec![0.0] } else { uniform_times(args.t_end, args.steps) };
    let traj = propagate(&l, &rho0, &times)?;
    let eigen = args.eigenbasis.then(|| traj.populations_in_basis(&hermitian_eigen(&h.matrix).1));

    let format = format_of(&args.output, Format::Csv, &[Format::Csv, Format::Json])?;
    let text = match format {
        Format::Json => json(&TrajectoryJson {
            labels: system.labels(),
            times: &traj.times,
            populations: &traj.populations,
            purity: &traj.purity,
            excited_population: &traj.excited_population,
            eigen_populations: eigen.as_deref(),
        }),
        _ => trajectory_csv(&system, &traj, eigen.as_deref()),
    };
    emit(&args.output, &text)?;
    if let Some(out) = &args.output.out {
        let columns = trajectory_columns(&system, eigen.as_ref().map(|_| system.n_levels()));
        let meta = Metadata::trajectory(&system, tolerances(&args.tolerance), columns, &args.rho0);
        fs::write(sidecar(out), meta.to_json())?;
    }
    Ok(0)
}

/// `PATH:MIN:MAX:N`, split from the right since paths may contain `:`.
pub fn parse_axis(spec: &str) -> Result<ScanAxis> {
    let mut parts = spec.rsplitn(4, ':');
    let (n, max, min, path) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(n), Some(max), Some(min), Some(path)) => (n, max, min, path),
        _ => bail!("axis `{spec}` is not of the form PATH:MIN:MAX:N"),
    };
    let path: ParameterPath = path.parse()?;
    let min: f64 = min.parse().with_context(|| format!("axis minimum `{min}`"))?;
    let max: f64 = max.parse().with_context(|| format!("axis maximum `{max}`"))?;
    let n: usize = n.parse().with_context(|| format!("axis point count `{n}`"))?;
    if n == 0 {
        bail!("axis `{spec}` needs at least one point");
    }
    Ok(ScanAxis::linspace(path, min, max, n))
}

fn scan(args: ScanArgs) -> Result<u8> {
    let system = load(&args.source)?;
    let a = parse_axis(&args.axis_a)?;
    let b = parse_axis(&args.axis_b)?;
    let observable = match args.observable {
        ObservableArg::ExcitedPopulation => Observable::ExcitedPopulation,
        ObservableArg::Purity => Observable::Purity,
    };
    let execution = if args.sequential { Execution::Sequential } else { Execution::default() };
    let initial = initial_state(&args.rho0)?;
    format_of(&args.output, Format::Csv, &[Format::Csv])?;
    let grid = parameter_scan(&system, &a, &b, observable, &initial, execution)?;
    emit(&args.output, &scan_csv(&grid))?;
    if let Some(out) = &args.output.out {
        let meta = Metadata::scan(&system, tolerances(&args.tolerance), &grid, &args.rho0);
        fs::write(sidecar(out), meta.to_json())?;
    }
    Ok(0)
}

fn rb87(args: Rb87Args) -> Result<u8> {
    let rows = rb87_table(tolerances(&args.tolerance), Execution::default())?;
    let text = match format_of(&args.output, Format::Table, &[Format::Table, Format::Json])? {
        Format::Json => json(&rows),
        _ => render_rb87_table(&rows),
    };
    emit(&args.output, &text)?;
    Ok(0)
}

fn export(args: ExportArgs) -> Result<u8> {
    let system = load(&args.source)?;
    let bytes = save_system(&system);
    match &args.out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", String::from_utf8(bytes).expect("JSON is UTF-8")),
    }
    Ok(0)
}
