//! Parameter points and the two evaluation contracts the analysis runs on: a
//! scalar complex response `T(rho, eta)` and a unitary family `U(rho, eta)`.

use crate::algebra::{Complex, Operator2};

/// A point in the two-parameter plane. For the waveplate `rho` is the angular
/// frequency (rad/ns) and `eta` the rotation angle (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPoint {
    pub rho: f64,
    pub eta: f64,
}

impl ParamPoint {
    pub const fn new(rho: f64, eta: f64) -> Self {
        ParamPoint { rho, eta }
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.eta.is_finite()
    }

    pub fn coord(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Rho => self.rho,
            Axis::Eta => self.eta,
        }
    }

    pub fn shifted(&self, axis: Axis, by: f64) -> Self {
        match axis {
            Axis::Rho => ParamPoint::new(self.rho + by, self.eta),
            Axis::Eta => ParamPoint::new(self.rho, self.eta + by),
        }
    }

    pub fn offset(&self, d_rho: f64, d_eta: f64) -> Self {
        ParamPoint::new(self.rho + d_rho, self.eta + d_eta)
    }

    pub fn distance(&self, other: &ParamPoint) -> f64 {
        (self.rho - other.rho).hypot(self.eta - other.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Rho,
    Eta,
}

/// Deterministic, side-effect free complex response.
pub trait Response {
    fn response(&self, p: ParamPoint) -> Complex;
}

impl<F> Response for F
where
    F: Fn(ParamPoint) -> Complex,
{
    fn response(&self, p: ParamPoint) -> Complex {
        self(p)
    }
}

/// A family of 2x2 unitaries.
pub trait UnitaryFamily {
    fn unitary(&self, p: ParamPoint) -> Operator2;
}

/// Wraps a closure as a [`UnitaryFamily`]. Closures get [`Response`] through
/// the blanket impl, so the unitary side needs a named wrapper.
pub struct FnFamily<F>(pub F);

impl<F> UnitaryFamily for FnFamily<F>
where
    F: Fn(ParamPoint) -> Operator2,
{
    fn unitary(&self, p: ParamPoint) -> Operator2 {
        (self.0)(p)
    }
}
