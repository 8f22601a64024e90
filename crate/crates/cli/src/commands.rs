use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use weakvalue::config::load_config;
use weakvalue::io::{
    format_phase_grid, format_pointer_csv, format_singularities, format_sweep_csv,
    ingest_pointer_curve, read_sweep_csv, CurveAxis, PointerCurve, PointerRow, SweepTable,
};
use weakvalue::singularity::{
    find_singularities, lattice_report, phase_grid, GridSpec, RefineSettings, ScanSettings,
};
use weakvalue::validate::{self, Status};
use weakvalue::waveplate::ghz_to_omega;
use weakvalue::weak::{
    directional_pointer, pointer_from_response, weak_value_operator_form, DIRECTIONAL_ROUTE_TOL,
};
use weakvalue::weak::{group_delay_analytic, helicity_pointer_analytic};
use weakvalue::{
    Axis, Complex, DiffSettings, DispersionModel, Error, ParamPoint, Scenario, Stencil,
};

use crate::range::Range;
use crate::{Cli, Command, OmegaLine, OmegaPoint, PointerAxisArg, Preset};

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Compute(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Compute(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Config(_) | Error::InvalidArgument(_) => CliError::Config(msg),
            Error::Io { .. } | Error::Parse { .. } | Error::Format(_) => CliError::Io(msg),
            _ => CliError::Compute(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let scenario = load_scenario(cli)?;
    let settings = diff_settings(cli)?;
    match &cli.command {
        Command::Sweep { beta, omega } => sweep(cli, &scenario, *beta, omega),
        Command::Pointer {
            axis,
            dir,
            beta,
            omega,
            beta_range,
            at,
            analytic,
            verify,
        } => {
            let line = pointer_line(&scenario, *beta, omega, beta_range.as_ref(), at)?;
            let axis = pointer_axis(*axis, dir.as_deref())?;
            pointer(cli, &scenario, &settings, line, axis, *analytic, *verify)
        }
        Command::Map { omega, beta_range } => {
            let spec = grid(omega, beta_range)?;
            emit(cli, &format_phase_grid(&phase_grid(&scenario, spec)))
        }
        Command::Singularities {
            omega,
            beta_range,
            no_subdivide,
            tol,
            max_iter,
        } => singularities(
            cli,
            &scenario,
            grid(omega, beta_range)?,
            !no_subdivide,
            *tol,
            *max_iter,
        ),
        Command::Ingest { paths } => ingest(cli, paths),
        Command::Validate => validate_cmd(cli, &scenario, &settings),
    }
}

fn load_scenario(cli: &Cli) -> CliResult<Scenario> {
    match (&cli.config, cli.preset) {
        (Some(path), _) => match load_config(path) {
            Ok(s) => Ok(s),
            // an unreadable config file is a configuration problem, not a data I/O one
            Err(e @ Error::Io { .. }) => Err(config_err(e.to_string())),
            Err(e) => Err(e.into()),
        },
        (None, Some(Preset::Paper)) => Ok(Scenario::default_for(DispersionModel::paper_preset())),
        (None, Some(Preset::Reference) | None) => {
            Ok(Scenario::default_for(DispersionModel::reference()))
        }
    }
}

fn diff_settings(cli: &Cli) -> CliResult<DiffSettings> {
    let stencil = match cli.stencil.as_str() {
        "2" => Stencil::Central2,
        _ => Stencil::Central4,
    };
    DiffSettings::relative(cli.step, stencil).map_err(|e| config_err(e.to_string()))
}

fn omega_range(line: &OmegaLine) -> CliResult<Option<Range>> {
    Ok(match (&line.f_ghz, &line.omega_range) {
        (Some(f), _) => Some(f.scaled(ghz_to_omega(1.0))),
        (None, Some(w)) => Some(*w),
        (None, None) => None,
    })
}

fn require_omega_range(line: &OmegaLine) -> CliResult<Range> {
    omega_range(line)?
        .ok_or_else(|| config_err("a frequency range is required (--f-ghz or --omega-range)"))
}

fn grid(omega: &OmegaLine, beta: &Range) -> CliResult<GridSpec> {
    let w = require_omega_range(omega)?;
    GridSpec::new(w.lo, w.hi, w.n, beta.lo, beta.hi, beta.n).map_err(|e| config_err(e.to_string()))
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("writing to standard output: {e}")))
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn sweep(cli: &Cli, scenario: &Scenario, beta: f64, line: &OmegaLine) -> CliResult<()> {
    if !beta.is_finite() {
        return Err(config_err("--beta must be finite"));
    }
    let range = require_omega_range(line)?;
    let table = SweepTable::sample(beta, &range.points(), |w| scenario.transfer(w, beta))
        .map_err(|e| config_err(e.to_string()))?;
    emit(cli, &format_sweep_csv(&table))
}

/// Sampling line of a pointer curve.
struct Line {
    axis: CurveAxis,
    coords: Vec<f64>,
}

impl Line {
    fn point(&self, coord: f64) -> ParamPoint {
        match self.axis {
            CurveAxis::Omega { beta } => ParamPoint::new(coord, beta),
            CurveAxis::Beta { omega } => ParamPoint::new(omega, coord),
        }
    }
}

fn fixed_omega(scenario: &Scenario, at: &OmegaPoint) -> CliResult<f64> {
    match (at.at_omega, at.at_f_ghz, at.at_ws) {
        (Some(w), _, _) => Ok(w),
        (None, Some(f), _) => Ok(ghz_to_omega(f)),
        (None, None, true) => Ok(scenario.model.half_waveplate_frequency(0)?),
        (None, None, false) => Err(config_err(
            "a rotation line needs a fixed frequency (--at-omega, --at-f-ghz or --at-ws)",
        )),
    }
}

fn pointer_line(
    scenario: &Scenario,
    beta: Option<f64>,
    omega: &OmegaLine,
    beta_range: Option<&Range>,
    at: &OmegaPoint,
) -> CliResult<Line> {
    match (omega_range(omega)?, beta_range) {
        (Some(w), None) => {
            let beta = beta.ok_or_else(|| config_err("a frequency line needs --beta"))?;
            if at.at_omega.is_some() || at.at_f_ghz.is_some() || at.at_ws {
                return Err(config_err("a frequency line takes no fixed frequency"));
            }
            Ok(Line {
                axis: CurveAxis::Omega { beta },
                coords: w.points(),
            })
        }
        (None, Some(b)) => {
            if beta.is_some() {
                return Err(config_err("a rotation line takes no --beta"));
            }
            let omega = fixed_omega(scenario, at)?;
            if !omega.is_finite() {
                return Err(config_err("fixed frequency must be finite"));
            }
            Ok(Line {
                axis: CurveAxis::Beta { omega },
                coords: b.points(),
            })
        }
        (Some(_), Some(_)) => Err(config_err(
            "give either a frequency range or --beta-range, not both",
        )),
        (None, None) => Err(config_err("a frequency range or --beta-range is required")),
    }
}

#[derive(Debug, Clone, Copy)]
enum Derivative {
    Along(Axis),
    Direction([f64; 2]),
}

fn pointer_axis(axis: PointerAxisArg, dir: Option<&str>) -> CliResult<Derivative> {
    match (axis, dir) {
        (PointerAxisArg::Omega, None) => Ok(Derivative::Along(Axis::Rho)),
        (PointerAxisArg::Beta, None) => Ok(Derivative::Along(Axis::Eta)),
        (PointerAxisArg::Direction, Some(d)) => {
            let parts: Vec<f64> = d
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| config_err(format!("--dir {d:?} must be two numbers `a,b`")))?;
            let [a, b] = parts[..] else {
                return Err(config_err(format!("--dir {d:?} must be two numbers `a,b`")));
            };
            let n = a.hypot(b);
            if !(n.is_finite() && n > 0.0) {
                return Err(config_err("--dir must be a finite nonzero vector"));
            }
            Ok(Derivative::Direction([a / n, b / n]))
        }
        (PointerAxisArg::Direction, None) => Err(config_err("--axis direction needs --dir a,b")),
        (_, Some(_)) => Err(config_err("--dir only applies to --axis direction")),
    }
}

/// Closed form for this line and axis, if there is one.
fn analytic_for<'a>(
    scenario: &'a Scenario,
    line: &Line,
    d: Derivative,
) -> CliResult<Box<dyn Fn(f64) -> Option<f64> + 'a>> {
    if !scenario.is_default() {
        return Err(config_err(
            "closed forms exist only for the default |1> -> |1> scenario",
        ));
    }
    match (line.axis, d) {
        (CurveAxis::Beta { omega }, Derivative::Along(Axis::Rho)) => {
            let ws = scenario.model.half_waveplate_frequency(0)?;
            if (omega - ws).abs() > 1e-9 * ws.abs().max(1.0) {
                return Err(config_err(format!(
                    "the group-delay closed form holds at the half-waveplate frequency {ws} (use --at-ws)"
                )));
            }
            Ok(Box::new(move |beta| group_delay_analytic(scenario, beta).ok()))
        }
        (CurveAxis::Omega { beta }, Derivative::Along(Axis::Eta)) => {
            if (beta - FRAC_PI_4).abs() > 1e-12 {
                return Err(config_err("the helicity closed form holds on beta = pi/4"));
            }
            Ok(Box::new(move |omega| helicity_pointer_analytic(scenario, omega).ok()))
        }
        _ => Err(config_err(
            "no closed form for this line: use --axis omega on a rotation line at --at-ws, or --axis beta on a frequency line at beta = pi/4",
        )),
    }
}

fn pointer(
    cli: &Cli,
    scenario: &Scenario,
    settings: &DiffSettings,
    line: Line,
    d: Derivative,
    analytic: bool,
    verify: bool,
) -> CliResult<()> {
    let closed = if analytic {
        Some(analytic_for(scenario, &line, d)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(line.coords.len());
    let mut worst: f64 = 0.0;
    for &c in &line.coords {
        let p = line.point(c);
        let value = match d {
            Derivative::Along(axis) => pointer_from_response(scenario, p, axis, settings),
            Derivative::Direction(dir) => directional_pointer(scenario, p, dir, settings),
        };
        let value = match value {
            Ok(v) => Some(v.value),
            Err(e) if e.is_singularity() => None,
            Err(e) => return Err(e.into()),
        };
        if let (true, Some(v)) = (verify, value) {
            let op = operator_form(scenario, p, d, settings)?;
            worst = worst.max((op - v).norm() / v.norm().max(1.0));
        }
        rows.push(PointerRow {
            coord: c,
            value,
            analytic: closed.as_ref().and_then(|f| f(c)),
        });
    }
    if verify {
        eprintln!("verify: max relative difference to operator form {worst:.3e}");
        if worst > DIRECTIONAL_ROUTE_TOL {
            return Err(CliError::Compute(format!(
                "pointer and operator-form weak value differ by {worst:.3e}"
            )));
        }
    }
    let label = match d {
        Derivative::Along(Axis::Rho) => "axis=omega".to_string(),
        Derivative::Along(Axis::Eta) => "axis=beta".to_string(),
        Derivative::Direction([a, b]) => format!("axis=direction d_omega={a:.16e} d_beta={b:.16e}"),
    };
    let gaps = rows.iter().filter(|r| r.value.is_none()).count();
    if gaps > 0 {
        eprintln!("note: {gaps} singular point(s) left as gaps");
    }
    let curve = PointerCurve {
        axis: line.axis,
        label: Some(label),
        rows,
    };
    emit(cli, &format_pointer_csv(&curve))
}

fn operator_form(
    scenario: &Scenario,
    p: ParamPoint,
    d: Derivative,
    settings: &DiffSettings,
) -> CliResult<Complex> {
    let along = |axis| {
        weak_value_operator_form(
            &scenario.model,
            &scenario.psi_in,
            &scenario.psi_f,
            p,
            axis,
            settings,
        )
    };
    Ok(match d {
        Derivative::Along(axis) => along(axis)?,
        Derivative::Direction([a, b]) => along(Axis::Rho)? * a + along(Axis::Eta)? * b,
    })
}

fn singularities(
    cli: &Cli,
    scenario: &Scenario,
    spec: GridSpec,
    subdivide: bool,
    tol: f64,
    max_iter: usize,
) -> CliResult<()> {
    if !(tol.is_finite() && tol > 0.0) || max_iter == 0 {
        return Err(config_err(
            "--tol must be positive and --max-iter at least 1",
        ));
    }
    let settings = ScanSettings {
        subdivide,
        refine: RefineSettings {
            tol,
            max_iter,
            ..RefineSettings::default()
        },
    };
    let report = find_singularities(scenario, spec, &settings);
    if !report.coarse_cells.is_empty() {
        eprintln!(
            "warning: {} cell(s) have unresolved phase steps; refine the grid{}",
            report.coarse_cells.len(),
            if subdivide {
                ""
            } else {
                " or drop --no-subdivide"
            }
        );
    }
    for f in &report.failures {
        eprintln!(
            "warning: seed ({}, {}) failed: {}",
            f.seed.rho, f.seed.eta, f.error
        );
    }
    if report.seeds > 0 && report.records.is_empty() {
        return Err(CliError::Compute(format!(
            "all {} refinement seed(s) failed",
            report.seeds
        )));
    }
    let summary = lattice_report(&report.records);
    let verdict = if summary.alternates() {
        "ok"
    } else {
        "violated"
    };
    let line = format!(
        "# count={} positive={} negative={} net_charge={} alternation={verdict}\n",
        summary.count, summary.positive, summary.negative, summary.net_charge
    );
    let table = format_singularities(&report.records);
    match &cli.out {
        Some(path) => {
            write_file(path, &table)?;
            print!("{line}");
            Ok(())
        }
        None => emit(cli, &format!("{table}{line}")),
    }
}

fn ingest(cli: &Cli, paths: &[std::path::PathBuf]) -> CliResult<()> {
    let mut curves = Vec::with_capacity(paths.len());
    for path in paths {
        let table = read_sweep_csv(path)?;
        let curve = ingest_pointer_curve(&table)
            .map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))?;
        curves.push((path, curve));
    }
    match (&cli.out, curves.len()) {
        (Some(out), 1) if !out.is_dir() => write_file(out, &format_pointer_csv(&curves[0].1)),
        (Some(dir), _) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for (path, curve) in &curves {
                let stem = path
                    .file_stem()
                    .map_or("sweep".into(), |s| s.to_string_lossy());
                write_file(
                    &dir.join(format!("{stem}.pointer.csv")),
                    &format_pointer_csv(curve),
                )?;
            }
            Ok(())
        }
        (None, _) => {
            let text: Vec<String> = curves
                .iter()
                .map(|(path, c)| format!("# source={}\n{}", path.display(), format_pointer_csv(c)))
                .collect();
            emit(cli, &text.join("\n"))
        }
    }
}

fn validate_cmd(cli: &Cli, scenario: &Scenario, settings: &DiffSettings) -> CliResult<()> {
    let report = validate::run(scenario, settings);
    let mut text = String::new();
    for c in &report.checks {
        text.push_str(&c.to_string());
        text.push('\n');
    }
    let failed = report
        .checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .count();
    text.push_str(&format!(
        "summary status={} failed={failed}\n",
        if failed == 0 { "pass" } else { "fail" }
    ));
    emit(cli, &text)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Compute(format!("{failed} check(s) failed")))
    }
}
