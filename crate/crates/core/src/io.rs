//! CSV formats for frequency sweeps, phase grids, pointer curves and
//! singularity lists, plus ingestion of sweeps into pointer curves.
//!
//! All numbers are written with 17 significant digits so that reading a file
//! back reproduces the original `f64` values exactly. Lines starting with `#`
//! are comments; some carry `key=value` metadata.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::algebra::Complex;
use crate::error::{Error, Result};
use crate::singularity::{GridSpec, PhaseGrid, SingularityRecord};
use crate::waveplate::omega_to_ghz;
use crate::weak::EPS_SING;

pub const SWEEP_HEADER: &str = "omega,re_t,im_t";
/// Alternative sweep layout, converted to complex `T` on load.
pub const SWEEP_POLAR_HEADER: &str = "omega,phase_rad,abs_t";
pub const GRID_HEADER: &str = "i,j,arg_t,abs_t";
pub const SINGULARITY_HEADER: &str = "omega,f_ghz,beta,charge,residual,iterations";

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_num(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {:?}", field.trim()),
    })
}

fn parse_finite(field: &str, line: usize) -> Result<f64> {
    let x = parse_num(field, line)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Parse {
            line,
            message: format!("non-finite value {x}"),
        })
    }
}

fn split_fields(text: &str, expected: usize, line: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!("expected {expected} fields, found {}", fields.len()),
        });
    }
    Ok(fields)
}

/// Pulls `key=value` pairs out of a comment line.
fn comment_pairs(comment: &str) -> impl Iterator<Item = (&str, &str)> {
    comment
        .split_whitespace()
        .filter_map(|tok| tok.split_once('='))
}

/// Non-comment, non-blank lines with 1-based line numbers; comment bodies go
/// to `on_comment`.
fn content_lines<'a>(
    text: &'a str,
    mut on_comment: impl FnMut(usize, &'a str),
) -> Vec<(usize, &'a str)> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if let Some(body) = line.strip_prefix('#') {
            on_comment(k + 1, body);
        } else {
            out.push((k + 1, line));
        }
    }
    out
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub t: Complex,
}

/// Complex transfer sampled along `omega` at a fixed rotation angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub beta: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(beta: f64, rows: Vec<SweepRow>) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::Format(format!("beta must be finite (got {beta})")));
        }
        if rows.len() < 3 {
            return Err(Error::Format(format!(
                "a sweep needs at least 3 rows, found {}",
                rows.len()
            )));
        }
        for r in &rows {
            if !(r.omega.is_finite() && r.t.re.is_finite() && r.t.im.is_finite()) {
                return Err(Error::Format(format!(
                    "non-finite sweep row at omega = {}",
                    r.omega
                )));
            }
        }
        if let Some(w) = rows.windows(2).find(|w| w[1].omega <= w[0].omega) {
            return Err(Error::Format(format!(
                "omega must increase strictly ({} is followed by {})",
                w[0].omega, w[1].omega
            )));
        }
        Ok(SweepTable { beta, rows })
    }

    /// Samples `transfer` at the given frequencies.
    pub fn sample(beta: f64, omegas: &[f64], transfer: impl Fn(f64) -> Complex) -> Result<Self> {
        let rows = omegas
            .iter()
            .map(|&omega| SweepRow {
                omega,
                t: transfer(omega),
            })
            .collect();
        SweepTable::new(beta, rows)
    }
}

pub fn format_sweep_csv(table: &SweepTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# beta_rad={}", num(table.beta));
    let _ = writeln!(s, "{SWEEP_HEADER}");
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{}", num(r.omega), num(r.t.re), num(r.t.im));
    }
    s
}

pub fn parse_sweep_csv(text: &str) -> Result<SweepTable> {
    let mut beta = None;
    let mut bad_beta = None;
    let lines = content_lines(text, |line, body| {
        for (k, v) in comment_pairs(body) {
            if k == "beta_rad" {
                match v.parse::<f64>() {
                    Ok(b) => beta = Some(b),
                    Err(_) => bad_beta = Some(line),
                }
            }
        }
    });
    if let Some(line) = bad_beta {
        return Err(Error::Parse {
            line,
            message: "beta_rad is not a number".into(),
        });
    }
    let Some(&(header_line, header)) = lines.first() else {
        return Err(Error::Parse {
            line: 1,
            message: format!("missing header `{SWEEP_HEADER}`"),
        });
    };
    let polar =
        match header.replace(' ', "").as_str() {
            SWEEP_HEADER => false,
            SWEEP_POLAR_HEADER => true,
            _ => return Err(Error::Parse {
                line: header_line,
                message: format!(
                    "expected header `{SWEEP_HEADER}` or `{SWEEP_POLAR_HEADER}`, found `{header}`"
                ),
            }),
        };
    let mut rows = Vec::with_capacity(lines.len() - 1);
    for &(line, text) in &lines[1..] {
        let f = split_fields(text, 3, line)?;
        let omega = parse_finite(f[0], line)?;
        let (a, b) = (parse_finite(f[1], line)?, parse_finite(f[2], line)?);
        let t = if polar {
            if b < 0.0 {
                return Err(Error::Parse {
                    line,
                    message: format!("negative magnitude {b}"),
                });
            }
            Complex::from_polar(b, a)
        } else {
            Complex::new(a, b)
        };
        rows.push(SweepRow { omega, t });
    }
    let beta = beta.ok_or_else(|| Error::Format("missing `# beta_rad=<value>` comment".into()))?;
    SweepTable::new(beta, rows)
}

pub fn write_sweep_csv(table: &SweepTable, path: &Path) -> Result<()> {
    write_text(path, &format_sweep_csv(table))
}

pub fn read_sweep_csv(path: &Path) -> Result<SweepTable> {
    parse_sweep_csv(&read_text(path)?)
}

/// Which coordinate a pointer curve runs along.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveAxis {
    /// Rows indexed by `omega`, taken at the fixed `beta`.
    Omega { beta: f64 },
    /// Rows indexed by `beta`, taken at the fixed `omega`.
    Beta { omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerRow {
    pub coord: f64,
    /// `None` marks a gap at a singular point.
    pub value: Option<Complex>,
    pub analytic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointerCurve {
    pub axis: CurveAxis,
    /// Free-form label written as a comment, e.g. the differentiation axis.
    pub label: Option<String>,
    pub rows: Vec<PointerRow>,
}

impl PointerCurve {
    pub fn has_analytic(&self) -> bool {
        self.rows.iter().any(|r| r.analytic.is_some())
    }

    pub fn gaps(&self) -> usize {
        self.rows.iter().filter(|r| r.value.is_none()).count()
    }
}

/// Three-point derivative weights at node `at` of `x`.
fn three_point(x: [f64; 3], at: usize) -> [f64; 3] {
    let (h0, h1) = (x[1] - x[0], x[2] - x[1]);
    let s = h0 + h1;
    match at {
        0 => [-(2.0 * h0 + h1) / (h0 * s), s / (h0 * h1), -h0 / (h1 * s)],
        1 => [-h1 / (h0 * s), (h1 - h0) / (h0 * h1), h0 / (h1 * s)],
        _ => [h1 / (h0 * s), -s / (h0 * h1), (2.0 * h1 + h0) / (h1 * s)],
    }
}

/// Pointer `d arg T - i d ln|T|` along `omega`, by 1D phase unwrapping and
/// three-point differences.
///
/// Rows with `|T| < EPS_SING` become gaps and are skipped by the unwrapping
/// and the differences. Interior rows use central differences; the first and
/// last usable rows use one-sided second-order formulas.
pub fn ingest_pointer_curve(table: &SweepTable) -> Result<PointerCurve> {
    let usable: Vec<usize> = (0..table.rows.len())
        .filter(|&k| table.rows[k].t.norm() >= EPS_SING)
        .collect();
    if usable.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 3 rows with |T| >= {EPS_SING:e}, found {}",
            usable.len()
        )));
    }
    let x: Vec<f64> = usable.iter().map(|&k| table.rows[k].omega).collect();
    let log_abs: Vec<f64> = usable
        .iter()
        .map(|&k| table.rows[k].t.norm().ln())
        .collect();
    let mut phase = Vec::with_capacity(usable.len());
    phase.push(table.rows[usable[0]].t.arg());
    for w in usable.windows(2) {
        let (a, b) = (table.rows[w[0]].t, table.rows[w[1]].t);
        let last = *phase.last().expect("non-empty");
        phase.push(last + (b * a.conj()).arg());
    }
    let n = usable.len();
    let mut derived = vec![None; table.rows.len()];
    for u in 0..n {
        let (start, at) = match u {
            0 => (0, 0),
            _ if u == n - 1 => (n - 3, 2),
            _ => (u - 1, 1),
        };
        let w = three_point([x[start], x[start + 1], x[start + 2]], at);
        let d = |f: &[f64]| w[0] * f[start] + w[1] * f[start + 1] + w[2] * f[start + 2];
        derived[usable[u]] = Some(Complex::new(d(&phase), -d(&log_abs)));
    }
    let rows = table
        .rows
        .iter()
        .zip(derived)
        .map(|(r, value)| PointerRow {
            coord: r.omega,
            value,
            analytic: None,
        })
        .collect();
    Ok(PointerCurve {
        axis: CurveAxis::Omega { beta: table.beta },
        label: None,
        rows,
    })
}

pub fn format_pointer_csv(curve: &PointerCurve) -> String {
    let mut s = String::new();
    if let Some(label) = &curve.label {
        let _ = writeln!(s, "# {label}");
    }
    let analytic = curve.has_analytic();
    let tail = if analytic { ",analytic" } else { "" };
    match curve.axis {
        CurveAxis::Omega { beta } => {
            let _ = writeln!(s, "# beta_rad={}", num(beta));
            let _ = writeln!(s, "omega,f_ghz,re_pointer,im_pointer{tail}");
        }
        CurveAxis::Beta { omega } => {
            let _ = writeln!(
                s,
                "# omega_rad_per_ns={} f_ghz={}",
                num(omega),
                num(omega_to_ghz(omega))
            );
            let _ = writeln!(s, "beta,re_pointer,im_pointer{tail}");
        }
    }
    for r in &curve.rows {
        let (re, im) = r.value.map_or((f64::NAN, f64::NAN), |v| (v.re, v.im));
        match curve.axis {
            CurveAxis::Omega { .. } => {
                let _ = write!(
                    s,
                    "{},{},{},{}",
                    num(r.coord),
                    num(omega_to_ghz(r.coord)),
                    num(re),
                    num(im)
                );
            }
            CurveAxis::Beta { .. } => {
                let _ = write!(s, "{},{},{}", num(r.coord), num(re), num(im));
            }
        }
        if analytic {
            let _ = write!(s, ",{}", num(r.analytic.unwrap_or(f64::NAN)));
        }
        s.push('\n');
    }
    s
}

pub fn parse_pointer_csv(text: &str) -> Result<PointerCurve> {
    let mut beta = None;
    let mut omega = None;
    let mut label = None;
    let lines = content_lines(text, |_, body| {
        let mut meta = false;
        for (k, v) in comment_pairs(body) {
            match k {
                "beta_rad" => {
                    beta = v.parse::<f64>().ok();
                    meta = true;
                }
                "omega_rad_per_ns" => {
                    omega = v.parse::<f64>().ok();
                    meta = true;
                }
                "f_ghz" => meta = true,
                _ => {}
            }
        }
        if !meta && label.is_none() {
            label = Some(body.trim().to_string());
        }
    });
    let Some(&(header_line, header)) = lines.first() else {
        return Err(Error::Parse {
            line: 1,
            message: "missing pointer curve header".into(),
        });
    };
    let (axis, coord_cols, analytic) = match header {
        "omega,f_ghz,re_pointer,im_pointer" => {
            (beta.map(|beta| CurveAxis::Omega { beta }), 2, false)
        }
        "omega,f_ghz,re_pointer,im_pointer,analytic" => {
            (beta.map(|beta| CurveAxis::Omega { beta }), 2, true)
        }
        "beta,re_pointer,im_pointer" => (omega.map(|omega| CurveAxis::Beta { omega }), 1, false),
        "beta,re_pointer,im_pointer,analytic" => {
            (omega.map(|omega| CurveAxis::Beta { omega }), 1, true)
        }
        _ => {
            return Err(Error::Parse {
                line: header_line,
                message: format!("unrecognized pointer curve header `{header}`"),
            })
        }
    };
    let axis = axis.ok_or_else(|| Error::Format("missing fixed-coordinate comment".into()))?;
    let width = coord_cols + 2 + analytic as usize;
    let mut rows = Vec::new();
    for &(line, text) in &lines[1..] {
        let f = split_fields(text, width, line)?;
        let coord = parse_finite(f[0], line)?;
        let (re, im) = (
            parse_num(f[coord_cols], line)?,
            parse_num(f[coord_cols + 1], line)?,
        );
        let value = match (re.is_nan(), im.is_nan()) {
            (true, true) => None,
            (false, false) => Some(Complex::new(re, im)),
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "gap rows need both pointer parts set to nan".into(),
                })
            }
        };
        let analytic = if analytic {
            Some(parse_num(f[width - 1], line)?).filter(|a| !a.is_nan())
        } else {
            None
        };
        rows.push(PointerRow {
            coord,
            value,
            analytic,
        });
    }
    Ok(PointerCurve { axis, label, rows })
}

pub fn write_pointer_csv(curve: &PointerCurve, path: &Path) -> Result<()> {
    write_text(path, &format_pointer_csv(curve))
}

pub fn read_pointer_csv(path: &Path) -> Result<PointerCurve> {
    parse_pointer_csv(&read_text(path)?)
}

pub fn format_phase_grid(pg: &PhaseGrid) -> String {
    let g = &pg.spec;
    let mut s = String::with_capacity(64 * g.len() + 200);
    let _ = writeln!(
        s,
        "# rho_min={} rho_max={} n_rho={}",
        num(g.rho_min),
        num(g.rho_max),
        g.n_rho
    );
    let _ = writeln!(
        s,
        "# eta_min={} eta_max={} n_eta={}",
        num(g.eta_min),
        num(g.eta_max),
        g.n_eta
    );
    let _ = writeln!(s, "{GRID_HEADER}");
    for i in 0..g.n_rho {
        for j in 0..g.n_eta {
            let _ = writeln!(
                s,
                "{i},{j},{},{}",
                num(pg.arg_at(i, j)),
                num(pg.abs_at(i, j))
            );
        }
    }
    s
}

pub fn parse_phase_grid(text: &str) -> Result<PhaseGrid> {
    let mut meta: Vec<(usize, String, String)> = Vec::new();
    let lines = content_lines(text, |line, body| {
        for (k, v) in comment_pairs(body) {
            meta.push((line, k.to_string(), v.to_string()));
        }
    });
    let float = |key: &str| -> Result<f64> {
        let (line, _, v) = meta
            .iter()
            .rev()
            .find(|(_, k, _)| k == key)
            .ok_or_else(|| Error::Format(format!("missing `{key}` in grid header comments")))?;
        parse_finite(v, *line)
    };
    let count = |key: &str| -> Result<usize> {
        let (line, _, v) = meta
            .iter()
            .rev()
            .find(|(_, k, _)| k == key)
            .ok_or_else(|| Error::Format(format!("missing `{key}` in grid header comments")))?;
        v.parse::<usize>().map_err(|_| Error::Parse {
            line: *line,
            message: format!("`{key}` must be a non-negative integer"),
        })
    };
    let spec = GridSpec::new(
        float("rho_min")?,
        float("rho_max")?,
        count("n_rho")?,
        float("eta_min")?,
        float("eta_max")?,
        count("n_eta")?,
    )
    .map_err(|e| Error::Format(e.to_string()))?;
    let Some(&(header_line, header)) = lines.first() else {
        return Err(Error::Parse {
            line: 1,
            message: format!("missing header `{GRID_HEADER}`"),
        });
    };
    if header.replace(' ', "") != GRID_HEADER {
        return Err(Error::Parse {
            line: header_line,
            message: format!("expected header `{GRID_HEADER}`, found `{header}`"),
        });
    }
    let data = &lines[1..];
    if data.len() != spec.len() {
        return Err(Error::Format(format!(
            "grid header promises {} rows, found {}",
            spec.len(),
            data.len()
        )));
    }
    let mut arg = Vec::with_capacity(spec.len());
    let mut abs = Vec::with_capacity(spec.len());
    for (k, &(line, text)) in data.iter().enumerate() {
        let f = split_fields(text, 4, line)?;
        let idx = |field: &str| {
            field.trim().parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("bad index {:?}", field.trim()),
            })
        };
        let (i, j) = (idx(f[0])?, idx(f[1])?);
        if (i, j) != (k / spec.n_eta, k % spec.n_eta) {
            return Err(Error::Format(format!(
                "line {line}: expected node ({}, {}), found ({i}, {j})",
                k / spec.n_eta,
                k % spec.n_eta
            )));
        }
        arg.push(parse_finite(f[2], line)?);
        abs.push(parse_finite(f[3], line)?);
    }
    PhaseGrid::new(spec, arg, abs)
}

pub fn write_phase_grid(pg: &PhaseGrid, path: &Path) -> Result<()> {
    write_text(path, &format_phase_grid(pg))
}

pub fn read_phase_grid(path: &Path) -> Result<PhaseGrid> {
    parse_phase_grid(&read_text(path)?)
}

pub fn format_singularities(records: &[SingularityRecord]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{SINGULARITY_HEADER}");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(r.rho),
            num(omega_to_ghz(r.rho)),
            num(r.eta),
            r.charge,
            num(r.residual),
            r.iterations
        );
    }
    s
}
