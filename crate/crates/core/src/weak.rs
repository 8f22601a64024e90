//! Generalized weak values.
//!
//! Two independent routes lead to the same complex number:
//!
//! * operator form: `[A_j]_W = <psi_f| A_j |psi~> / <psi_f|psi~>` with
//!   `A_j = -i (d_j U_S) U_S^dagger` and `|psi~> = U_S |psi_in>`;
//! * response gradients: `[A_j]_W = d_j arg T - i d_j ln|T|`.
//!
//! The second route only needs the scalar response, which is what a
//! measurement actually provides.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::algebra::{inner, Complex, Operator2, Vec2C, CONSTRUCTION_TOL};
use crate::diff::{derivative, DiffSettings, Stencil};
use crate::error::{Error, Result};
use crate::response::{Axis, ParamPoint, Response, UnitaryFamily};
use crate::waveplate::Scenario;

/// Guard on `|T|` (or `|<psi_f|psi~>|`) below which weak values are reported
/// as unbounded.
pub const EPS_SING: f64 = 1e-10;

/// Guard on `|cos 2 beta|` for the group-delay closed form.
pub const EPS_SEC: f64 = 1e-9;

/// Largest phase step tolerated between neighbouring stencil samples.
pub const MAX_STENCIL_PHASE_STEP: f64 = FRAC_PI_2;

/// Tolerance between the two directional-derivative routes.
pub const DIRECTIONAL_ROUTE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointerAxis {
    Rho,
    Eta,
    /// Unit vector `(d_rho, d_eta)`.
    Direction {
        d_rho: f64,
        d_eta: f64,
    },
}

impl From<Axis> for PointerAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::Rho => PointerAxis::Rho,
            Axis::Eta => PointerAxis::Eta,
        }
    }
}

/// Complex pointer: real part is the phase gradient, imaginary part minus the
/// log-magnitude gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerValue {
    pub value: Complex,
    pub axis: PointerAxis,
}

fn step_for(settings: &DiffSettings, p: ParamPoint, axis: Axis) -> f64 {
    match axis {
        Axis::Rho => settings.step_rho.at(p.rho),
        Axis::Eta => settings.step_eta.at(p.eta),
    }
}

fn singular(p: ParamPoint, magnitude: f64) -> Error {
    Error::Singularity {
        rho: p.rho,
        eta: p.eta,
        magnitude,
    }
}

/// `d/dt [arg f - i ln|f|]` at `t = 0` from wrapped phase differences.
///
/// `at` maps the line parameter back to the plane for error reporting.
fn line_pointer<F, P>(f: F, at: P, h: f64, stencil: Stencil) -> Result<Complex>
where
    F: Fn(f64) -> Complex,
    P: Fn(f64) -> ParamPoint,
{
    let reach = stencil.reach();
    let samples: Vec<Complex> = (-reach..=reach).map(|k| f(k as f64 * h)).collect();
    for (idx, z) in samples.iter().enumerate() {
        let m = z.norm();
        if m.is_nan() || m <= EPS_SING {
            let k = idx as i32 - reach;
            return Err(singular(at(k as f64 * h), m));
        }
    }
    let center = reach as usize;
    let t0 = samples[center];
    // phases relative to the centre, accumulated outward one step at a time
    let mut phase = vec![0.0; samples.len()];
    for idx in (center + 1)..samples.len() {
        let step = (samples[idx] * samples[idx - 1].conj()).arg();
        if step.abs() > MAX_STENCIL_PHASE_STEP {
            return Err(Error::StepTooCoarse {
                phase_step: step.abs(),
            });
        }
        phase[idx] = phase[idx - 1] + step;
    }
    for idx in (0..center).rev() {
        let step = (samples[idx] * samples[idx + 1].conj()).arg();
        if step.abs() > MAX_STENCIL_PHASE_STEP {
            return Err(Error::StepTooCoarse {
                phase_step: step.abs(),
            });
        }
        phase[idx] = phase[idx + 1] + step;
    }
    let m0 = t0.norm();
    let mut d_phase = 0.0;
    let mut d_log = 0.0;
    for &(k, w) in stencil.taps() {
        let idx = (k + reach) as usize;
        d_phase += w * phase[idx];
        d_log += w * (samples[idx].norm() / m0).ln();
    }
    Ok(Complex::new(d_phase / h, -d_log / h))
}

/// Pointer `d_j arg T - i d_j ln|T|` along one parameter axis.
pub fn pointer_from_response<R: Response + ?Sized>(
    response: &R,
    p: ParamPoint,
    axis: Axis,
    settings: &DiffSettings,
) -> Result<PointerValue> {
    let h = step_for(settings, p, axis);
    let value = line_pointer(
        |t| response.response(p.shifted(axis, t)),
        |t| p.shifted(axis, t),
        h,
        settings.stencil,
    )?;
    Ok(PointerValue {
        value,
        axis: axis.into(),
    })
}

/// Pointer along a unit direction `(d_rho, d_eta)`.
///
/// Returned value is the linear combination of the two axis pointers; a
/// second estimate from differencing straight along the direction must agree
/// within [`DIRECTIONAL_ROUTE_TOL`].
pub fn directional_pointer<R: Response + ?Sized>(
    response: &R,
    p: ParamPoint,
    direction: [f64; 2],
    settings: &DiffSettings,
) -> Result<PointerValue> {
    let [d_rho, d_eta] = direction;
    let norm = d_rho.hypot(d_eta);
    if norm.is_nan() || (norm - 1.0).abs() > CONSTRUCTION_TOL {
        return Err(Error::InvalidArgument(format!(
            "direction must be a unit vector (norm {norm})"
        )));
    }
    let mut combined = Complex::new(0.0, 0.0);
    let mut h = f64::INFINITY;
    for (axis, weight) in [(Axis::Rho, d_rho), (Axis::Eta, d_eta)] {
        if weight != 0.0 {
            combined += pointer_from_response(response, p, axis, settings)?.value * weight;
            h = h.min(step_for(settings, p, axis));
        }
    }
    let along = |t: f64| p.offset(t * d_rho, t * d_eta);
    let direct = line_pointer(|t| response.response(along(t)), along, h, settings.stencil)?;
    let difference = (direct - combined).norm();
    if difference > DIRECTIONAL_ROUTE_TOL * combined.norm().max(1.0) {
        return Err(Error::DirectionalMismatch { difference });
    }
    Ok(PointerValue {
        value: combined,
        axis: PointerAxis::Direction { d_rho, d_eta },
    })
}

/// Weak operator `A_j = -i (d_j U) U^dagger` at `p`.
pub fn generator_operator<U: UnitaryFamily + ?Sized>(
    family: &U,
    p: ParamPoint,
    axis: Axis,
    settings: &DiffSettings,
) -> Result<Operator2> {
    let u = family.unitary(p);
    if !u.is_unitary() {
        return Err(Error::NotUnitary {
            deviation: u.unitarity_deviation(),
        });
    }
    let h = step_for(settings, p, axis);
    let du: Operator2 = derivative(
        |t| family.unitary(p.shifted(axis, t)),
        0.0,
        h,
        settings.stencil,
    );
    Ok((du * u.adjoint()).scale(Complex::new(0.0, -1.0)))
}

/// `<psi_f| U_S |psi_in>` and the preselected state `U_S |psi_in>`.
fn preselect<U: UnitaryFamily + ?Sized>(
    family: &U,
    psi_in: &Vec2C,
    psi_f: &Vec2C,
    p: ParamPoint,
) -> Result<(Complex, Vec2C)> {
    let u = family.unitary(p);
    let tilde = u.apply(psi_in);
    let overlap = inner(psi_f, &tilde);
    if overlap.norm().is_nan() || overlap.norm() <= EPS_SING {
        return Err(singular(p, overlap.norm()));
    }
    Ok((overlap, tilde))
}

/// Operator-form weak value of `A_j` between `U_S|psi_in>` and `<psi_f|`.
pub fn weak_value_operator_form<U: UnitaryFamily + ?Sized>(
    family: &U,
    psi_in: &Vec2C,
    psi_f: &Vec2C,
    p: ParamPoint,
    axis: Axis,
    settings: &DiffSettings,
) -> Result<Complex> {
    let (overlap, tilde) = preselect(family, psi_in, psi_f, p)?;
    let a = generator_operator(family, p, axis, settings)?;
    Ok(inner(psi_f, &a.apply(&tilde)) / overlap)
}

/// First-order expansion
/// `T(p0 + delta) ~ <psi_f|psi~> (1 + i [A_rho]_W d_rho + i [A_eta]_W d_eta)`.
pub fn first_order_transfer<U: UnitaryFamily + ?Sized>(
    family: &U,
    psi_in: &Vec2C,
    psi_f: &Vec2C,
    p0: ParamPoint,
    delta: (f64, f64),
    settings: &DiffSettings,
) -> Result<Complex> {
    let (overlap, _) = preselect(family, psi_in, psi_f, p0)?;
    let w_rho = weak_value_operator_form(family, psi_in, psi_f, p0, Axis::Rho, settings)?;
    let w_eta = weak_value_operator_form(family, psi_in, psi_f, p0, Axis::Eta, settings)?;
    let i = Complex::new(0.0, 1.0);
    Ok(overlap * (1.0 + i * w_rho * delta.0 + i * w_eta * delta.1))
}

/// Group-delay weak value on the line `(omega_s, beta0)`:
/// `sec(2 beta0) [cos^2 beta0 phi_TM' - sin^2 beta0 phi_TE']`.
pub fn group_delay_analytic(scenario: &Scenario, beta0: f64) -> Result<f64> {
    if !scenario.is_default() {
        return Err(Error::NonDefaultScenario);
    }
    let m = &scenario.model;
    let omega_s = m.half_waveplate_frequency(0)?;
    let cos2 = (2.0 * beta0).cos();
    if cos2.is_nan() || cos2.abs() <= EPS_SEC {
        return Err(singular(ParamPoint::new(omega_s, beta0), cos2.abs()));
    }
    let (s, c) = beta0.sin_cos();
    Ok((c * c * m.slope_tm - s * s * m.slope_te) / cos2)
}

/// Helicity pointer on the line `(omega0, pi/4)`: `2 tan phi_minus(omega0)`.
pub fn helicity_pointer_analytic(scenario: &Scenario, omega0: f64) -> Result<f64> {
    if !scenario.is_default() {
        return Err(Error::NonDefaultScenario);
    }
    let minus = scenario.model.phases(omega0).minus;
    let (s, c) = minus.sin_cos();
    if c.is_nan() || c.abs() <= EPS_SING {
        return Err(singular(ParamPoint::new(omega0, FRAC_PI_4), c.abs()));
    }
    Ok(2.0 * s / c)
}
