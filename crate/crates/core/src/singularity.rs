//! Phase singularities of a complex response over a 2D parameter window.
//!
//! Charges are winding numbers of `arg T` around counterclockwise loops in the
//! `(rho, eta)` plane with `rho` horizontal. They are computed from wrapped
//! (principal-value) phase differences, so the sum over a closed loop is an
//! exact multiple of `2 pi` whenever every step stays below `pi`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use crate::algebra::Complex;
use crate::error::{Error, Result};
use crate::response::{ParamPoint, Response};
use crate::waveplate::{DispersionModel, ModelDelta, Scenario};
use crate::weak::EPS_SING;

/// Cell edges whose wrapped phase step reaches this size are treated as
/// unresolved and subdivided.
pub const COARSE_EDGE_STEP: f64 = PI - 0.1;

/// Subdivision levels tried on a coarse cell: 4, 16 and 64 segments per edge.
const SUBDIVISION_LEVELS: u32 = 3;

const MAX_LOOP_BISECTIONS: u32 = 40;

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x - TAU * (x / TAU).round();
    if y <= -PI {
        y + TAU
    } else if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Principal-value phase step from `a` to `b`.
fn phase_step(a: Complex, b: Complex) -> f64 {
    (b * a.conj()).arg()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub rho_min: f64,
    pub rho_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
}

impl Rect {
    pub fn new(rho_min: f64, rho_max: f64, eta_min: f64, eta_max: f64) -> Result<Self> {
        let r = Rect {
            rho_min,
            rho_max,
            eta_min,
            eta_max,
        };
        let finite = [rho_min, rho_max, eta_min, eta_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite || rho_max <= rho_min || eta_max <= eta_min {
            return Err(Error::InvalidArgument(format!(
                "rectangle needs finite bounds with max > min (got rho [{rho_min}, {rho_max}], eta [{eta_min}, {eta_max}])"
            )));
        }
        Ok(r)
    }

    pub fn contains(&self, p: &ParamPoint) -> bool {
        (self.rho_min..=self.rho_max).contains(&p.rho)
            && (self.eta_min..=self.eta_max).contains(&p.eta)
    }

    /// Counterclockwise corners starting at `(rho_min, eta_min)`.
    pub fn corners(&self) -> [ParamPoint; 4] {
        [
            ParamPoint::new(self.rho_min, self.eta_min),
            ParamPoint::new(self.rho_max, self.eta_min),
            ParamPoint::new(self.rho_max, self.eta_max),
            ParamPoint::new(self.rho_min, self.eta_max),
        ]
    }
}

/// Uniform sampling grid, nodes inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_rho: usize,
    pub eta_min: f64,
    pub eta_max: f64,
    pub n_eta: usize,
}

impl GridSpec {
    pub fn new(
        rho_min: f64,
        rho_max: f64,
        n_rho: usize,
        eta_min: f64,
        eta_max: f64,
        n_eta: usize,
    ) -> Result<Self> {
        Rect::new(rho_min, rho_max, eta_min, eta_max)?;
        if n_rho < 2 || n_eta < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 nodes per axis (got {n_rho} x {n_eta})"
            )));
        }
        Ok(GridSpec {
            rho_min,
            rho_max,
            n_rho,
            eta_min,
            eta_max,
            n_eta,
        })
    }

    pub fn d_rho(&self) -> f64 {
        (self.rho_max - self.rho_min) / (self.n_rho - 1) as f64
    }

    pub fn d_eta(&self) -> f64 {
        (self.eta_max - self.eta_min) / (self.n_eta - 1) as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        if i + 1 == self.n_rho {
            self.rho_max
        } else {
            self.rho_min + i as f64 * self.d_rho()
        }
    }

    pub fn eta(&self, j: usize) -> f64 {
        if j + 1 == self.n_eta {
            self.eta_max
        } else {
            self.eta_min + j as f64 * self.d_eta()
        }
    }

    pub fn node(&self, i: usize, j: usize) -> ParamPoint {
        ParamPoint::new(self.rho(i), self.eta(j))
    }

    /// Row-major index, `i` (rho) outer.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_eta + j
    }

    pub fn len(&self) -> usize {
        self.n_rho * self.n_eta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self) -> Rect {
        Rect {
            rho_min: self.rho_min,
            rho_max: self.rho_max,
            eta_min: self.eta_min,
            eta_max: self.eta_max,
        }
    }
}

/// Sampled `arg T` (principal value) and `|T|` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub spec: GridSpec,
    pub arg: Vec<f64>,
    pub abs: Vec<f64>,
}

impl PhaseGrid {
    pub fn new(spec: GridSpec, arg: Vec<f64>, abs: Vec<f64>) -> Result<Self> {
        if arg.len() != spec.len() || abs.len() != spec.len() {
            return Err(Error::Format(format!(
                "phase grid expects {} samples, got {} phases and {} magnitudes",
                spec.len(),
                arg.len(),
                abs.len()
            )));
        }
        Ok(PhaseGrid { spec, arg, abs })
    }

    pub fn arg_at(&self, i: usize, j: usize) -> f64 {
        self.arg[self.spec.index(i, j)]
    }

    pub fn abs_at(&self, i: usize, j: usize) -> f64 {
        self.abs[self.spec.index(i, j)]
    }
}

pub fn phase_grid<R: Response + ?Sized>(response: &R, spec: GridSpec) -> PhaseGrid {
    let mut arg = Vec::with_capacity(spec.len());
    let mut abs = Vec::with_capacity(spec.len());
    for i in 0..spec.n_rho {
        for j in 0..spec.n_eta {
            let t = response.response(spec.node(i, j));
            arg.push(t.arg());
            abs.push(t.norm());
        }
    }
    PhaseGrid { spec, arg, abs }
}

/// Nonzero winding of the cell with lower-left node `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellWinding {
    pub i: usize,
    pub j: usize,
    pub winding: i32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindingScan {
    pub cells: Vec<CellWinding>,
    /// Cells with an unresolved edge (or a corner sitting on a zero) after
    /// whatever subdivision was applied.
    pub coarse: Vec<(usize, usize)>,
}

fn cell_corners(i: usize, j: usize) -> [(usize, usize); 4] {
    [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
}

/// Winding from the four corner phases. Returns `(winding, resolved)`.
fn corner_winding(pg: &PhaseGrid, i: usize, j: usize) -> (i32, bool) {
    let c = cell_corners(i, j);
    let mut total = 0.0;
    let mut resolved = true;
    for k in 0..4 {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        if pg.abs_at(a.0, a.1) <= EPS_SING {
            resolved = false;
        }
        let step = wrap_phase(pg.arg_at(b.0, b.1) - pg.arg_at(a.0, a.1));
        if step.abs() >= COARSE_EDGE_STEP {
            resolved = false;
        }
        total += step;
    }
    ((total / TAU).round() as i32, resolved)
}

/// Plaquette windings from the stored phases alone. Coarse cells are flagged
/// but still classified from their corners.
pub fn plaquette_windings(pg: &PhaseGrid) -> WindingScan {
    let mut scan = WindingScan::default();
    let g = &pg.spec;
    for i in 0..g.n_rho - 1 {
        for j in 0..g.n_eta - 1 {
            let (w, resolved) = corner_winding(pg, i, j);
            if !resolved {
                scan.coarse.push((i, j));
            }
            if w != 0 {
                scan.cells.push(CellWinding { i, j, winding: w });
            }
        }
    }
    scan
}

/// Perimeter winding of a cell sampled with `per_edge` segments per edge.
/// `None` if some step is still unresolved or lands on a zero.
fn subdivided_cell_winding<R: Response + ?Sized>(
    response: &R,
    lo: ParamPoint,
    hi: ParamPoint,
    per_edge: usize,
) -> Option<i32> {
    let corners = [
        lo,
        ParamPoint::new(hi.rho, lo.eta),
        hi,
        ParamPoint::new(lo.rho, hi.eta),
    ];
    let mut total = 0.0;
    let mut prev = response.response(lo);
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        for s in 1..=per_edge {
            let f = s as f64 / per_edge as f64;
            let p = ParamPoint::new(a.rho + f * (b.rho - a.rho), a.eta + f * (b.eta - a.eta));
            let t = response.response(p);
            if t.norm() <= EPS_SING {
                return None;
            }
            let step = phase_step(prev, t);
            if step.abs() >= COARSE_EDGE_STEP {
                return None;
            }
            total += step;
            prev = t;
        }
    }
    Some((total / TAU).round() as i32)
}

/// Plaquette windings with local subdivision of coarse cells.
pub fn plaquette_windings_refined<R: Response + ?Sized>(
    response: &R,
    pg: &PhaseGrid,
) -> WindingScan {
    let coarse = plaquette_windings(pg);
    let mut cells: Vec<CellWinding> = coarse.cells.clone();
    let mut still_coarse = Vec::new();
    let g = &pg.spec;
    for &(i, j) in &coarse.coarse {
        let lo = g.node(i, j);
        let hi = g.node(i + 1, j + 1);
        let resolved = (1..=SUBDIVISION_LEVELS)
            .find_map(|level| subdivided_cell_winding(response, lo, hi, 4usize.pow(level)));
        cells.retain(|c| !(c.i == i && c.j == j));
        match resolved {
            Some(w) => {
                if w != 0 {
                    cells.push(CellWinding { i, j, winding: w });
                }
            }
            None => {
                still_coarse.push((i, j));
                let (w, _) = corner_winding(pg, i, j);
                if w != 0 {
                    cells.push(CellWinding { i, j, winding: w });
                }
            }
        }
    }
    cells.sort_by_key(|c| (c.i, c.j));
    WindingScan {
        cells,
        coarse: still_coarse,
    }
}

/// Total winding of `arg T` counterclockwise around `rect`.
///
/// Each side starts with `samples` segments; segments whose phase step exceeds
/// `pi/2` are bisected until resolved. A loop that hits or grazes a zero is
/// rejected.
pub fn boundary_winding<R: Response + ?Sized>(
    response: &R,
    rect: &Rect,
    samples: usize,
) -> Result<i32> {
    let samples = samples.max(1);
    let corners = rect.corners();
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let point =
            |f: f64| ParamPoint::new(a.rho + f * (b.rho - a.rho), a.eta + f * (b.eta - a.eta));
        let mut prev_f = 0.0;
        let mut prev_t = checked(response, point(0.0))?;
        for s in 1..=samples {
            let f = s as f64 / samples as f64;
            let t = checked(response, point(f))?;
            total += resolve_segment(response, &point, (prev_f, prev_t), (f, t), 0)?;
            prev_f = f;
            prev_t = t;
        }
    }
    let w = total / TAU;
    let rounded = w.round();
    debug_assert!(
        (w - rounded).abs() < 1e-6,
        "loop phase {total} is not a multiple of 2pi"
    );
    Ok(rounded as i32)
}

fn checked<R: Response + ?Sized>(response: &R, p: ParamPoint) -> Result<Complex> {
    let t = response.response(p);
    if t.norm() > EPS_SING {
        Ok(t)
    } else {
        Err(Error::LoopNearZero {
            rho: p.rho,
            eta: p.eta,
        })
    }
}

fn resolve_segment<R, P>(
    response: &R,
    point: &P,
    (fa, ta): (f64, Complex),
    (fb, tb): (f64, Complex),
    depth: u32,
) -> Result<f64>
where
    R: Response + ?Sized,
    P: Fn(f64) -> ParamPoint,
{
    let step = phase_step(ta, tb);
    if step.abs() <= FRAC_PI_2 {
        return Ok(step);
    }
    if depth >= MAX_LOOP_BISECTIONS {
        let p = point(0.5 * (fa + fb));
        return Err(Error::LoopNearZero {
            rho: p.rho,
            eta: p.eta,
        });
    }
    let fm = 0.5 * (fa + fb);
    let tm = checked(response, point(fm))?;
    Ok(
        resolve_segment(response, point, (fa, ta), (fm, tm), depth + 1)?
            + resolve_segment(response, point, (fm, tm), (fb, tb), depth + 1)?,
    )
}

/// Winding around a small circle centred on `center`.
fn circle_winding<R: Response + ?Sized>(
    response: &R,
    center: ParamPoint,
    radius: f64,
) -> Result<i32> {
    let mut n = 64usize;
    'refine: loop {
        let at = |k: usize| {
            let a = TAU * k as f64 / n as f64;
            center.offset(radius * a.cos(), radius * a.sin())
        };
        let mut prev = checked(response, at(0))?;
        let mut total = 0.0;
        let samples = n;
        for k in 1..=samples {
            let t = checked(response, at(k % n))?;
            let step = phase_step(prev, t);
            if step.abs() > FRAC_PI_2 {
                if n >= 1 << 14 {
                    return Err(Error::LoopNearZero {
                        rho: center.rho,
                        eta: center.eta,
                    });
                }
                n *= 2;
                continue 'refine;
            }
            total += step;
            prev = t;
        }
        return Ok((total / TAU).round() as i32);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineSettings {
    /// Stop once `|T| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Jacobian step, relative to `max(1, |coordinate|)`.
    pub jacobian_step: f64,
    /// Largest allowed distance from the seed.
    pub max_travel: f64,
}

impl Default for RefineSettings {
    fn default() -> Self {
        RefineSettings {
            tol: 1e-10,
            max_iter: 50,
            jacobian_step: 1e-6,
            max_travel: 1.0,
        }
    }
}

/// A refined zero of the response with its topological charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityRecord {
    pub rho: f64,
    pub eta: f64,
    pub charge: i32,
    /// `|T|` at the refined point.
    pub residual: f64,
    pub iterations: usize,
}

impl SingularityRecord {
    pub fn point(&self) -> ParamPoint {
        ParamPoint::new(self.rho, self.eta)
    }
}

/// Newton iteration on `(rho, eta) -> (Re T, Im T)` with a central-difference
/// Jacobian, followed by a charge measurement on a small circle.
pub fn refine_zero<R: Response + ?Sized>(
    response: &R,
    seed: ParamPoint,
    settings: &RefineSettings,
) -> Result<SingularityRecord> {
    if !seed.is_finite() {
        return Err(Error::InvalidArgument("seed must be finite".into()));
    }
    let mut x = seed;
    let mut t = response.response(x);
    let mut last_step = 0.0;
    let mut iterations = 0;
    while t.norm() > settings.tol {
        if iterations >= settings.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: t.norm(),
            });
        }
        iterations += 1;
        let h_rho = settings.jacobian_step * x.rho.abs().max(1.0);
        let h_eta = settings.jacobian_step * x.eta.abs().max(1.0);
        let d_rho = (response.response(x.offset(h_rho, 0.0))
            - response.response(x.offset(-h_rho, 0.0)))
            / (2.0 * h_rho);
        let d_eta = (response.response(x.offset(0.0, h_eta))
            - response.response(x.offset(0.0, -h_eta)))
            / (2.0 * h_eta);
        // J = [[Re d_rho, Re d_eta], [Im d_rho, Im d_eta]]
        let det = d_rho.re * d_eta.im - d_eta.re * d_rho.im;
        if !det.is_finite() || det == 0.0 {
            return Err(Error::DegenerateZero(format!(
                "singular Jacobian at ({}, {})",
                x.rho, x.eta
            )));
        }
        let s_rho = -(d_eta.im * t.re - d_eta.re * t.im) / det;
        let s_eta = -(-d_rho.im * t.re + d_rho.re * t.im) / det;
        // backtrack until |T| decreases
        let mut lambda = 1.0;
        let mut next = x.offset(s_rho, s_eta);
        let mut t_next = response.response(next);
        for _ in 0..12 {
            if t_next.norm() < t.norm() {
                break;
            }
            lambda *= 0.5;
            next = x.offset(lambda * s_rho, lambda * s_eta);
            t_next = response.response(next);
        }
        last_step = lambda * s_rho.hypot(s_eta);
        x = next;
        t = t_next;
        let travelled = x.distance(&seed);
        if travelled.is_nan() || travelled > settings.max_travel {
            return Err(Error::Diverged {
                distance: travelled,
            });
        }
    }
    let scale = x.rho.abs().max(x.eta.abs()).max(1.0);
    let mut radius = (2.0 * last_step).max(1e-5 * scale);
    let mut charge = circle_winding(response, x, radius);
    for _ in 0..3 {
        if !matches!(charge, Err(Error::LoopNearZero { .. })) {
            break;
        }
        radius *= 4.0;
        charge = circle_winding(response, x, radius);
    }
    let charge = charge?;
    if charge.abs() != 1 {
        return Err(Error::DegenerateZero(format!(
            "zero at ({}, {}) has winding {charge}",
            x.rho, x.eta
        )));
    }
    Ok(SingularityRecord {
        rho: x.rho,
        eta: x.eta,
        charge,
        residual: t.norm(),
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    /// Subdivide cells with unresolved edges before classifying them.
    pub subdivide: bool,
    pub refine: RefineSettings,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            subdivide: true,
            refine: RefineSettings::default(),
        }
    }
}

#[derive(Debug)]
pub struct SeedFailure {
    pub seed: ParamPoint,
    pub error: Error,
}

#[derive(Debug)]
pub struct ScanReport {
    /// Refined, de-duplicated records in row-major order.
    pub records: Vec<SingularityRecord>,
    pub failures: Vec<SeedFailure>,
    pub coarse_cells: Vec<(usize, usize)>,
    pub seeds: usize,
}

/// Grid scan, one Newton seed per nonzero-winding cell (at its smallest-|T|
/// corner), refinement, de-duplication.
pub fn find_singularities<R: Response + ?Sized>(
    response: &R,
    spec: GridSpec,
    settings: &ScanSettings,
) -> ScanReport {
    let pg = phase_grid(response, spec);
    let scan = if settings.subdivide {
        plaquette_windings_refined(response, &pg)
    } else {
        plaquette_windings(&pg)
    };
    let mut candidate_cells: Vec<(usize, usize)> = scan.cells.iter().map(|c| (c.i, c.j)).collect();
    // cells touching a node that sits on a zero cannot be classified; seed them too
    for &(i, j) in &scan.coarse {
        if cell_corners(i, j)
            .iter()
            .any(|&(a, b)| pg.abs_at(a, b) <= EPS_SING)
        {
            candidate_cells.push((i, j));
        }
    }
    candidate_cells.sort_unstable();
    candidate_cells.dedup();

    let mut refine = settings.refine;
    refine.max_travel = refine
        .max_travel
        .min(4.0 * spec.d_rho().hypot(spec.d_eta()));

    let mut records: Vec<SingularityRecord> = Vec::new();
    let mut failures = Vec::new();
    for &(i, j) in &candidate_cells {
        let seed = cell_corners(i, j)
            .iter()
            .min_by(|a, b| pg.abs_at(a.0, a.1).total_cmp(&pg.abs_at(b.0, b.1)))
            .map(|&(a, b)| spec.node(a, b))
            .expect("cell has four corners");
        match refine_zero(response, seed, &refine) {
            Ok(rec) => {
                let tol = 1e-6 * rec.rho.abs().max(rec.eta.abs()).max(1.0);
                if !records
                    .iter()
                    .any(|r| r.point().distance(&rec.point()) <= tol)
                {
                    records.push(rec);
                }
            }
            Err(error) => failures.push(SeedFailure { seed, error }),
        }
    }
    // records follow their seed cells, which are already in row-major order
    ScanReport {
        records,
        failures,
        coarse_cells: scan.coarse,
        seeds: candidate_cells.len(),
    }
}

/// Points `(omega^n, beta^m)` with `phi_minus(omega^n) = (2n+1) pi/2` and
/// `beta^m = (2m+1) pi/4` inside `rect` (inclusive), in row-major order.
pub fn predicted_lattice(model: &DispersionModel, rect: &Rect) -> Result<Vec<ParamPoint>> {
    if model.is_degenerate() {
        return Err(Error::DegenerateModel);
    }
    let s = model.slope_minus();
    let c = model.intercept_minus();
    let phase_lo = (s * rect.rho_min + c).min(s * rect.rho_max + c);
    let phase_hi = (s * rect.rho_min + c).max(s * rect.rho_max + c);
    let n_lo = ((phase_lo / FRAC_PI_2 - 1.0) / 2.0).ceil() as i64 - 1;
    let n_hi = ((phase_hi / FRAC_PI_2 - 1.0) / 2.0).floor() as i64 + 1;
    let m_lo = ((rect.eta_min / FRAC_PI_4 - 1.0) / 2.0).ceil() as i64 - 1;
    let m_hi = ((rect.eta_max / FRAC_PI_4 - 1.0) / 2.0).floor() as i64 + 1;
    let mut points = Vec::new();
    for n in n_lo..=n_hi {
        let omega = ((2 * n + 1) as f64 * FRAC_PI_2 - c) / s;
        for m in m_lo..=m_hi {
            let beta = (2 * m + 1) as f64 * FRAC_PI_4;
            let p = ParamPoint::new(omega, beta);
            if rect.contains(&p) {
                points.push(p);
            }
        }
    }
    points.sort_by(|a, b| a.rho.total_cmp(&b.rho).then(a.eta.total_cmp(&b.eta)));
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LatticeReport {
    pub count: usize,
    pub positive: usize,
    pub negative: usize,
    pub net_charge: i32,
    /// `(a, b, charge_a * charge_b)` for every record `a` and each of its
    /// nearest neighbours `b`.
    pub neighbor_products: Vec<(usize, usize, i32)>,
}

impl LatticeReport {
    /// Every nearest-neighbour pair carries opposite charges.
    pub fn alternates(&self) -> bool {
        self.neighbor_products.iter().all(|&(_, _, p)| p == -1)
    }

    pub fn violations(&self) -> Vec<(usize, usize)> {
        self.neighbor_products
            .iter()
            .filter(|&&(_, _, p)| p != -1)
            .map(|&(a, b, _)| (a, b))
            .collect()
    }
}

/// Charge census plus nearest-neighbour charge products.
///
/// Neighbours are the records at the smallest Euclidean distance in the
/// `(rho, eta)` plane (ties within a relative 1e-6 all count).
pub fn lattice_report(records: &[SingularityRecord]) -> LatticeReport {
    let mut report = LatticeReport {
        count: records.len(),
        ..Default::default()
    };
    for r in records {
        match r.charge.signum() {
            1 => report.positive += 1,
            -1 => report.negative += 1,
            _ => {}
        }
        report.net_charge += r.charge;
    }
    for (a, ra) in records.iter().enumerate() {
        let nearest = records
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != a)
            .map(|(_, rb)| ra.point().distance(&rb.point()))
            .fold(f64::INFINITY, f64::min);
        if !nearest.is_finite() {
            continue;
        }
        for (b, rb) in records.iter().enumerate() {
            if b != a && ra.point().distance(&rb.point()) <= nearest * (1.0 + 1e-6) {
                report.neighbor_products.push((a, b, ra.charge * rb.charge));
            }
        }
    }
    report
}

/// Boundary winding of `rect` before and after perturbing the model.
///
/// The loop is also checked along the straight homotopy between the two
/// models (`steps` intermediate models) so that a zero crossing the boundary
/// on the way is reported instead of silently changing the count.
pub fn perturb_and_conserve(
    scenario: &Scenario,
    delta: &ModelDelta,
    rect: &Rect,
    samples: usize,
    steps: usize,
) -> Result<(i32, i32)> {
    let at = |f: f64| {
        let scaled = ModelDelta {
            slope_te: f * delta.slope_te,
            intercept_te: f * delta.intercept_te,
            slope_tm: f * delta.slope_tm,
            intercept_tm: f * delta.intercept_tm,
        };
        Scenario {
            model: scenario.model.perturbed(&scaled),
            ..*scenario
        }
    };
    let before = boundary_winding(&at(0.0), rect, samples)?;
    let steps = steps.max(1);
    let mut after = before;
    for k in 1..=steps {
        after = boundary_winding(&at(k as f64 / steps as f64), rect, samples)?;
    }
    Ok((before, after))
}
