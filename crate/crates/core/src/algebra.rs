//! Two-dimensional polarization Hilbert space.
//!
//! Basis order is `(|1>, |2>)` with `|1>` the vertical (z) polarization and
//! `|2>` the horizontal (x) polarization. `sigma_3` has eigenvalue -1 on `|1>`
//! and +1 on `|2>`, so in this ordering it reads `diag(-1, +1)`. The other two
//! Pauli matrices are the images of the textbook ones under the basis swap,
//! which keeps `sigma_j sigma_k = delta_jk + i eps_jkl sigma_l` intact.

use std::ops::{Add, Mul, Neg, Sub};

pub use num_complex::Complex64 as Complex;

use crate::error::{Error, Result};

/// Tolerance for "is a state" / "is unitary" construction checks.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

/// Two complex amplitudes on `(|1>, |2>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2C {
    pub c1: Complex,
    pub c2: Complex,
}

impl Vec2C {
    pub const fn new(c1: Complex, c2: Complex) -> Self {
        Vec2C { c1, c2 }
    }

    /// `|1>`, the z-polarized state.
    pub const fn basis1() -> Self {
        Vec2C { c1: ONE, c2: ZERO }
    }

    /// `|2>`, the x-polarized state.
    pub const fn basis2() -> Self {
        Vec2C { c1: ZERO, c2: ONE }
    }

    pub fn from_real(a: f64, b: f64) -> Self {
        Vec2C::new(Complex::new(a, 0.0), Complex::new(b, 0.0))
    }

    pub fn norm(&self) -> f64 {
        (self.c1.norm_sqr() + self.c2.norm_sqr()).sqrt()
    }

    pub fn is_state(&self) -> bool {
        self.is_finite() && (self.norm() - 1.0).abs() <= CONSTRUCTION_TOL
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(*self * (1.0 / n))
    }

    pub fn scale(&self, s: Complex) -> Self {
        Vec2C::new(self.c1 * s, self.c2 * s)
    }
}

impl Mul<f64> for Vec2C {
    type Output = Vec2C;
    fn mul(self, s: f64) -> Vec2C {
        Vec2C::new(self.c1 * s, self.c2 * s)
    }
}

impl Add for Vec2C {
    type Output = Vec2C;
    fn add(self, o: Vec2C) -> Vec2C {
        Vec2C::new(self.c1 + o.c1, self.c2 + o.c2)
    }
}

impl Sub for Vec2C {
    type Output = Vec2C;
    fn sub(self, o: Vec2C) -> Vec2C {
        Vec2C::new(self.c1 - o.c1, self.c2 - o.c2)
    }
}

/// `<bra|ket>`, conjugate-linear in `bra`.
pub fn inner(bra: &Vec2C, ket: &Vec2C) -> Complex {
    bra.c1.conj() * ket.c1 + bra.c2.conj() * ket.c2
}

/// A 2x2 complex operator in basis order `(|1>, |2>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2 {
    pub m11: Complex,
    pub m12: Complex,
    pub m21: Complex,
    pub m22: Complex,
}

impl Operator2 {
    pub const fn new(m11: Complex, m12: Complex, m21: Complex, m22: Complex) -> Self {
        Operator2 { m11, m12, m21, m22 }
    }

    pub fn from_real(rows: [[f64; 2]; 2]) -> Self {
        let c = |x: f64| Complex::new(x, 0.0);
        Operator2::new(c(rows[0][0]), c(rows[0][1]), c(rows[1][0]), c(rows[1][1]))
    }

    pub const fn identity() -> Self {
        Operator2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Operator2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn diag(a: Complex, b: Complex) -> Self {
        Operator2::new(a, ZERO, ZERO, b)
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    pub fn adjoint(&self) -> Self {
        Operator2::new(
            self.m11.conj(),
            self.m21.conj(),
            self.m12.conj(),
            self.m22.conj(),
        )
    }

    pub fn apply(&self, v: &Vec2C) -> Vec2C {
        Vec2C::new(
            self.m11 * v.c1 + self.m12 * v.c2,
            self.m21 * v.c1 + self.m22 * v.c2,
        )
    }

    pub fn scale(&self, s: Complex) -> Self {
        Operator2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn trace(&self) -> Complex {
        self.m11 + self.m22
    }

    pub fn det(&self) -> Complex {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }

    /// Max-entry norm of `U U^dagger - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        (*self * self.adjoint() - Operator2::identity()).max_abs()
    }

    /// Max-entry norm of `A - A^dagger`.
    pub fn hermiticity_deviation(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    pub fn is_unitary(&self) -> bool {
        self.is_finite() && self.unitarity_deviation() <= CONSTRUCTION_TOL
    }

    /// Eigen-decomposition of the Hermitian part `(A + A^dagger)/2`.
    ///
    /// Eigenvalues come back ascending with unit eigenvectors.
    pub fn hermitian_eigen(&self) -> [(f64, Vec2C); 2] {
        let a = self.m11.re;
        let d = self.m22.re;
        let b = 0.5 * (self.m12 + self.m21.conj());
        let mean = 0.5 * (a + d);
        let half_gap = 0.5 * (a - d);
        let r = half_gap.hypot(b.norm());
        let lo = mean - r;
        let hi = mean + r;
        if b.norm() <= f64::EPSILON * r.max(1.0) {
            // already diagonal
            return if a <= d {
                [(a, Vec2C::basis1()), (d, Vec2C::basis2())]
            } else {
                [(d, Vec2C::basis2()), (a, Vec2C::basis1())]
            };
        }
        // (A - lambda) v = 0 with v = (b, lambda - a)
        let vec_for = |lambda: f64| {
            let v = Vec2C::new(b, Complex::new(lambda - a, 0.0));
            v * (1.0 / v.norm())
        };
        [(lo, vec_for(lo)), (hi, vec_for(hi))]
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, o: Operator2) -> Operator2 {
        Operator2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Mul<Vec2C> for Operator2 {
    type Output = Vec2C;
    fn mul(self, v: Vec2C) -> Vec2C {
        self.apply(&v)
    }
}

impl Mul<f64> for Operator2 {
    type Output = Operator2;
    fn mul(self, s: f64) -> Operator2 {
        Operator2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, o: Operator2) -> Operator2 {
        Operator2::new(
            self.m11 + o.m11,
            self.m12 + o.m12,
            self.m21 + o.m21,
            self.m22 + o.m22,
        )
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, o: Operator2) -> Operator2 {
        Operator2::new(
            self.m11 - o.m11,
            self.m12 - o.m12,
            self.m21 - o.m21,
            self.m22 - o.m22,
        )
    }
}

impl Neg for Operator2 {
    type Output = Operator2;
    fn neg(self) -> Operator2 {
        self * -1.0
    }
}

/// Pauli matrix `sigma_k`, `k` in `1..=3`.
pub fn pauli(k: usize) -> Result<Operator2> {
    match k {
        1 => Ok(Operator2::new(ZERO, ONE, ONE, ZERO)),
        2 => Ok(Operator2::new(ZERO, I, -I, ZERO)),
        3 => Ok(Operator2::diag(-ONE, ONE)),
        _ => Err(Error::InvalidArgument(format!(
            "Pauli index must be 1, 2 or 3 (got {k})"
        ))),
    }
}

/// Real rotation `[[cos b, -sin b], [sin b, cos b]]`.
pub fn rotation(beta: f64) -> Operator2 {
    let (s, c) = beta.sin_cos();
    Operator2::from_real([[c, -s], [s, c]])
}
