//! Central finite-difference stencils.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// `(f(x+h) - f(x-h)) / 2h`
    Central2,
    /// Five-point rule, O(h^4).
    #[default]
    Central4,
}

impl Stencil {
    /// `(offset, weight)` pairs; the derivative is `sum(w * f(x + k h)) / h`.
    pub fn taps(self) -> &'static [(i32, f64)] {
        match self {
            Stencil::Central2 => &[(-1, -0.5), (1, 0.5)],
            Stencil::Central4 => &[
                (-2, 1.0 / 12.0),
                (-1, -8.0 / 12.0),
                (1, 8.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
        }
    }

    pub fn reach(self) -> i32 {
        match self {
            Stencil::Central2 => 1,
            Stencil::Central4 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `h = r * max(1, |x|)`
    Relative(f64),
    Absolute(f64),
}

impl StepSize {
    pub fn at(self, x: f64) -> f64 {
        match self {
            StepSize::Relative(r) => r * x.abs().max(1.0),
            StepSize::Absolute(h) => h,
        }
    }

    fn raw(self) -> f64 {
        match self {
            StepSize::Relative(r) | StepSize::Absolute(r) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffSettings {
    pub step_rho: StepSize,
    pub step_eta: StepSize,
    pub stencil: Stencil,
}

impl Default for DiffSettings {
    fn default() -> Self {
        DiffSettings {
            step_rho: StepSize::Relative(1e-5),
            step_eta: StepSize::Relative(1e-5),
            stencil: Stencil::Central4,
        }
    }
}

impl DiffSettings {
    pub fn relative(step: f64, stencil: Stencil) -> Result<Self> {
        DiffSettings {
            step_rho: StepSize::Relative(step),
            step_eta: StepSize::Relative(step),
            stencil,
        }
        .validated()
    }

    pub fn absolute(step_rho: f64, step_eta: f64, stencil: Stencil) -> Result<Self> {
        DiffSettings {
            step_rho: StepSize::Absolute(step_rho),
            step_eta: StepSize::Absolute(step_eta),
            stencil,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        for s in [self.step_rho, self.step_eta] {
            let h = s.raw();
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "finite-difference step must be positive (got {h})"
                )));
            }
        }
        Ok(self)
    }
}

/// Derivative of `f` at `x` for any value type closed under `+`, `-` and
/// real scaling.
pub fn derivative<T, F>(f: F, x: f64, h: f64, stencil: Stencil) -> T
where
    F: Fn(f64) -> T,
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let taps = stencil.taps();
    let (k0, w0) = taps[0];
    let mut acc = f(x + k0 as f64 * h) * w0;
    for &(k, w) in &taps[1..] {
        acc = acc + f(x + k as f64 * h) * w;
    }
    acc * (1.0 / h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Complex;

    #[test]
    fn exact_on_low_order_polynomials() {
        let cubic = |x: f64| 2.0 * x * x * x - x + 3.0;
        let d = derivative(cubic, 0.5, 1e-2, Stencil::Central2);
        // central-2 error on a cubic is h^2 f'''/6 = 1e-4 * 12 / 6
        assert!((d - (6.0 * 0.25 - 1.0) - 2e-4).abs() < 1e-12);
        let quartic = |x: f64| x.powi(4);
        let d4 = derivative(quartic, 0.3, 1e-2, Stencil::Central4);
        assert!((d4 - 4.0 * 0.3f64.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn fourth_order_convergence_on_sine() {
        let err = |h: f64| (derivative(f64::sin, 1.0, h, Stencil::Central4) - 1.0f64.cos()).abs();
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn works_on_complex_values() {
        let f = |x: f64| Complex::from_polar(1.0, 3.0 * x);
        let d: Complex = derivative(f, 0.2, 1e-4, Stencil::Central4);
        let expect = Complex::new(0.0, 3.0) * f(0.2);
        assert!((d - expect).norm() < 1e-10);
    }

    #[test]
    fn step_scaling() {
        assert_eq!(StepSize::Relative(1e-5).at(0.3), 1e-5);
        assert_eq!(StepSize::Relative(1e-5).at(-40.0), 4e-4);
        assert_eq!(StepSize::Absolute(0.1).at(100.0), 0.1);
        assert!(DiffSettings::relative(0.0, Stencil::Central2).is_err());
        assert!(DiffSettings::absolute(1e-3, f64::NAN, Stencil::Central2).is_err());
    }
}
