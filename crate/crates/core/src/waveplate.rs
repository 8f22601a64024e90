//! Rotatable birefringent waveplate with linear dispersion.
//!
//! At `beta = 0` the plate is diagonal in `(|1>, |2>)`: the z-polarized state
//! picks up `phi_TM`, the x-polarized state `phi_TE`. Rotating the plate by
//! `beta` conjugates with [`rotation`].

use std::f64::consts::{FRAC_PI_2, PI};

use crate::algebra::{inner, rotation, Complex, Operator2, Vec2C, CONSTRUCTION_TOL};
use crate::error::{Error, Result};
use crate::response::{ParamPoint, Response, UnitaryFamily};

/// Frequency in GHz to angular frequency in rad/ns.
pub fn ghz_to_omega(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz
}

pub fn omega_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Linear birefringent phases `phi(omega) = slope * omega + intercept`.
///
/// Slopes are in rad per (rad/ns), i.e. ns; intercepts in rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionModel {
    pub slope_te: f64,
    pub intercept_te: f64,
    pub slope_tm: f64,
    pub intercept_tm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phases {
    pub te: f64,
    pub tm: f64,
    /// `(phi_TE + phi_TM) / 2`
    pub plus: f64,
    /// `(phi_TE - phi_TM) / 2`
    pub minus: f64,
}

/// Additive change to every model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModelDelta {
    pub slope_te: f64,
    pub intercept_te: f64,
    pub slope_tm: f64,
    pub intercept_tm: f64,
}

impl DispersionModel {
    pub fn new(slope_te: f64, intercept_te: f64, slope_tm: f64, intercept_tm: f64) -> Result<Self> {
        let m = DispersionModel {
            slope_te,
            intercept_te,
            slope_tm,
            intercept_tm,
        };
        if [slope_te, intercept_te, slope_tm, intercept_tm]
            .iter()
            .all(|x| x.is_finite())
        {
            Ok(m)
        } else {
            Err(Error::InvalidArgument(
                "dispersion model parameters must be finite".into(),
            ))
        }
    }

    /// The small reference model used throughout the tests:
    /// `slope_te = 1.2`, `slope_tm = 0.8`, zero intercepts.
    pub fn reference() -> Self {
        DispersionModel {
            slope_te: 1.2,
            intercept_te: 0.0,
            slope_tm: 0.8,
            intercept_tm: 0.0,
        }
    }

    /// Illustrative model tuned so the first half-waveplate frequency sits at
    /// 16.7 GHz (`omega = 2 pi 16.7` rad/ns), with `slope_plus = 10 * slope_minus`.
    /// The real crystal's dispersion curves are not known; only `omega_s` is.
    pub fn paper_preset() -> Self {
        let omega_s = 2.0 * PI * 16.7;
        let slope_minus = FRAC_PI_2 / omega_s;
        let slope_plus = 10.0 * slope_minus;
        DispersionModel {
            slope_te: slope_plus + slope_minus,
            intercept_te: 0.0,
            slope_tm: slope_plus - slope_minus,
            intercept_tm: 0.0,
        }
    }

    pub fn slope_plus(&self) -> f64 {
        0.5 * (self.slope_te + self.slope_tm)
    }

    pub fn slope_minus(&self) -> f64 {
        0.5 * (self.slope_te - self.slope_tm)
    }

    pub fn intercept_minus(&self) -> f64 {
        0.5 * (self.intercept_te - self.intercept_tm)
    }

    pub fn is_degenerate(&self) -> bool {
        self.slope_te == self.slope_tm
    }

    pub fn perturbed(&self, d: &ModelDelta) -> Self {
        DispersionModel {
            slope_te: self.slope_te + d.slope_te,
            intercept_te: self.intercept_te + d.intercept_te,
            slope_tm: self.slope_tm + d.slope_tm,
            intercept_tm: self.intercept_tm + d.intercept_tm,
        }
    }

    pub fn phases(&self, omega: f64) -> Phases {
        let te = self.slope_te * omega + self.intercept_te;
        let tm = self.slope_tm * omega + self.intercept_tm;
        Phases {
            te,
            tm,
            plus: 0.5 * (te + tm),
            minus: 0.5 * (te - tm),
        }
    }

    /// `U(omega, 0) = diag(e^{i phi_TM}, e^{i phi_TE})`.
    pub fn build_u0(&self, omega: f64) -> Operator2 {
        let ph = self.phases(omega);
        Operator2::diag(
            Complex::from_polar(1.0, ph.tm),
            Complex::from_polar(1.0, ph.te),
        )
    }

    /// `U(omega, beta) = R(beta) U(omega, 0) R(-beta)`.
    pub fn build_u(&self, omega: f64, beta: f64) -> Operator2 {
        rotation(beta) * self.build_u0(omega) * rotation(-beta)
    }

    /// Frequency where `phi_minus = (2n + 1) pi / 2`.
    pub fn half_waveplate_frequency(&self, n: u32) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateModel);
        }
        let target = (2.0 * n as f64 + 1.0) * FRAC_PI_2;
        let omega = (target - self.intercept_minus()) / self.slope_minus();
        if omega.is_finite() && omega > 0.0 {
            Ok(omega)
        } else {
            Err(Error::Domain(format!(
                "no positive frequency with phi_minus = {}pi/2 (solution {omega})",
                2 * n + 1
            )))
        }
    }

    /// Closed form of `<1|U(omega, beta)|1>`:
    /// `e^{i phi_+} (cos phi_- - i sin phi_- cos 2 beta)`.
    pub fn transfer_closed_form(&self, omega: f64, beta: f64) -> Complex {
        let ph = self.phases(omega);
        let (s, c) = ph.minus.sin_cos();
        Complex::from_polar(1.0, ph.plus) * Complex::new(c, -s * (2.0 * beta).cos())
    }
}

impl UnitaryFamily for DispersionModel {
    fn unitary(&self, p: ParamPoint) -> Operator2 {
        self.build_u(p.rho, p.eta)
    }
}

/// A waveplate together with its pre- and post-selected polarization states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub model: DispersionModel,
    pub psi_in: Vec2C,
    pub psi_f: Vec2C,
}

impl Scenario {
    pub fn new(model: DispersionModel, psi_in: Vec2C, psi_f: Vec2C) -> Result<Self> {
        for (name, v) in [("psi_in", &psi_in), ("psi_f", &psi_f)] {
            if !v.is_state() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be normalized (norm {})",
                    v.norm()
                )));
            }
        }
        Ok(Scenario {
            model,
            psi_in,
            psi_f,
        })
    }

    /// z-polarized in, z-polarized detection.
    pub fn default_for(model: DispersionModel) -> Self {
        Scenario {
            model,
            psi_in: Vec2C::basis1(),
            psi_f: Vec2C::basis1(),
        }
    }

    /// True when both states are `|1>` up to a global phase.
    pub fn is_default(&self) -> bool {
        let e1 = Vec2C::basis1();
        [self.psi_in, self.psi_f]
            .iter()
            .all(|v| (inner(&e1, v).norm() - 1.0).abs() <= CONSTRUCTION_TOL)
    }

    /// `<psi_f| U(omega, beta) |psi_in>` through the matrix product.
    pub fn transfer(&self, omega: f64, beta: f64) -> Complex {
        let u = self.model.build_u(omega, beta);
        inner(&self.psi_f, &u.apply(&self.psi_in))
    }
}

impl Response for Scenario {
    fn response(&self, p: ParamPoint) -> Complex {
        self.transfer(p.rho, p.eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli;
    use std::f64::consts::FRAC_PI_4;

    fn omega_s() -> f64 {
        FRAC_PI_2 / 0.2
    }

    #[test]
    fn phases_of_reference_model() {
        let m = DispersionModel::reference();
        let p0 = m.phases(0.0);
        assert_eq!((p0.te, p0.tm, p0.plus, p0.minus), (0.0, 0.0, 0.0, 0.0));
        let p = m.phases(10.0);
        assert!((p.te - 12.0).abs() < 1e-14);
        assert!((p.tm - 8.0).abs() < 1e-14);
        assert!((p.plus - 10.0).abs() < 1e-14);
        assert!((p.minus - 2.0).abs() < 1e-14);
        assert!((m.phases(7.8539816).minus - FRAC_PI_2).abs() < 1e-7);
    }

    #[test]
    fn u0_examples() {
        let m = DispersionModel::reference();
        assert!((m.build_u0(0.0) - Operator2::identity()).max_abs() < 1e-15);
        // phi_TM = 2 pi, phi_TE = 3 pi
        let u = m.build_u0(omega_s());
        let expect = Operator2::from_real([[1.0, 0.0], [0.0, -1.0]]);
        assert!((u - expect).max_abs() < 1e-12);
    }

    #[test]
    fn u0_is_unitary_at_random_frequencies() {
        let m = DispersionModel::reference();
        for k in 0..100 {
            let omega = -50.0 + 1.013 * k as f64;
            assert!(m.build_u0(omega).unitarity_deviation() <= 1e-12);
        }
    }

    #[test]
    fn rotation_by_pi_leaves_u_unchanged() {
        let m = DispersionModel::reference();
        for &(omega, beta) in &[(3.3, 0.2), (17.0, -1.4), (42.5, 2.9)] {
            let a = m.build_u(omega, beta);
            let b = m.build_u(omega, beta + PI);
            assert!((a - b).max_abs() < 1e-12);
        }
        assert_eq!(m.build_u(5.0, 0.0), m.build_u0(5.0));
    }

    #[test]
    fn half_wave_at_quarter_turn_is_minus_i_sigma1() {
        let m = DispersionModel::reference();
        let omega = omega_s();
        let u = m.build_u(omega, FRAC_PI_4);
        let plus = m.phases(omega).plus;
        let expect = pauli(1)
            .unwrap()
            .scale(Complex::new(0.0, -1.0) * Complex::from_polar(1.0, plus));
        assert!((u - expect).max_abs() < 1e-12);
        // independent product with explicit quarter-turn matrices
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = Operator2::from_real([[h, -h], [h, h]]);
        let rt = Operator2::from_real([[h, h], [-h, h]]);
        let d = Operator2::diag(Complex::new(0.0, -1.0), Complex::new(0.0, 1.0))
            .scale(Complex::from_polar(1.0, plus));
        assert!((r * d * rt - u).max_abs() < 1e-12);
    }

    #[test]
    fn transfer_examples() {
        let sc = Scenario::default_for(DispersionModel::reference());
        let w = omega_s();
        assert!(sc.transfer(w, FRAC_PI_4).norm() <= 1e-12);
        assert!((sc.transfer(w, 0.0) - Complex::new(1.0, 0.0)).norm() <= 1e-12);
        assert!((sc.transfer(w, PI / 3.0) - Complex::new(-0.5, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn matrix_path_matches_closed_form_on_grid() {
        let m = DispersionModel::reference();
        let sc = Scenario::default_for(m);
        for i in 0..100 {
            for j in 0..100 {
                let omega = 63.0 * i as f64 / 99.0;
                let beta = PI * j as f64 / 99.0;
                let a = sc.transfer(omega, beta);
                let b = m.transfer_closed_form(omega, beta);
                assert!((a - b).norm() <= 1e-12, "({omega}, {beta})");
                assert!(a.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn zero_set_is_the_predicted_lattice() {
        let m = DispersionModel::reference();
        let sc = Scenario::default_for(m);
        for n in 0..4 {
            let w = m.half_waveplate_frequency(n).unwrap();
            for k in 0..4 {
                let b = FRAC_PI_4 + k as f64 * FRAC_PI_2;
                assert!(sc.transfer(w, b).norm() <= 1e-12);
                assert!(sc.transfer(w + 0.1, b + 0.1).norm() > 0.01);
            }
        }
    }

    #[test]
    fn half_waveplate_frequencies() {
        let m = DispersionModel::reference();
        assert!((m.half_waveplate_frequency(0).unwrap() - 7.853_981_633_974_483).abs() < 1e-12);
        assert!((m.half_waveplate_frequency(1).unwrap() - 23.561_944_901_923_45).abs() < 1e-12);
        let flat = DispersionModel::new(1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            flat.half_waveplate_frequency(0),
            Err(Error::DegenerateModel)
        ));
        let backwards = DispersionModel::new(0.8, 0.0, 1.2, 0.0).unwrap();
        assert!(matches!(
            backwards.half_waveplate_frequency(0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn paper_preset_hits_16_7_ghz() {
        let m = DispersionModel::paper_preset();
        let f = m.half_waveplate_frequency(0).unwrap() / (2.0 * PI);
        assert!((f - 16.7).abs() < 1e-9);
        assert!((m.slope_plus() / m.slope_minus() - 10.0).abs() < 1e-12);
        assert!((m.slope_minus() - 0.014_970_059_880_239_52).abs() < 1e-12);
    }

    #[test]
    fn scenario_rejects_unnormalized_states() {
        let m = DispersionModel::reference();
        let bad = Vec2C::from_real(1.0, 1.0);
        assert!(Scenario::new(m, bad, Vec2C::basis1()).is_err());
        let diag = bad.normalized().unwrap();
        let sc = Scenario::new(m, diag, Vec2C::basis1()).unwrap();
        assert!(!sc.is_default());
        let phased = Vec2C::basis1().scale(Complex::from_polar(1.0, 0.4));
        assert!(Scenario::new(m, phased, Vec2C::basis1())
            .unwrap()
            .is_default());
    }
}
