//! Self-checks of a scenario: operator algebra, unitarity, agreement of the
//! two weak-value routes, closed forms and lattice topology.
//!
//! Random sampling uses a fixed seed, so a report is reproducible.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::algebra::{pauli, Complex, Operator2};
use crate::diff::DiffSettings;
use crate::response::{Axis, ParamPoint};
use crate::singularity::{
    boundary_winding, find_singularities, lattice_report, predicted_lattice, GridSpec, Rect,
    ScanSettings,
};
use crate::waveplate::{omega_to_ghz, Scenario};
use crate::weak::{
    first_order_transfer, group_delay_analytic, helicity_pointer_analytic, pointer_from_response,
    weak_value_operator_form,
};

const SEED: u64 = 0x5eed_0001;
const MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn judge(name: &'static str, ok: bool, detail: String) -> Self {
        Check {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    fn skip(name: &'static str, why: impl Into<String>) -> Self {
        Check {
            name,
            status: Status::Skip,
            detail: why.into(),
        }
    }

    fn fail(name: &'static str, why: impl fmt::Display) -> Self {
        Check {
            name,
            status: Status::Fail,
            detail: why.to_string(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "check={} status={} detail={}",
            self.name, self.status, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    /// First half-waveplate frequency in rad/ns, when the model has one.
    pub half_waveplate_omega: Option<f64>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

pub fn run(scenario: &Scenario, settings: &DiffSettings) -> Report {
    let mut rng = StdRng::seed_from_u64(SEED);
    let half_wave = scenario.model.half_waveplate_frequency(0);
    // sample a few lattice periods when the model has a lattice
    let omega_hi = half_wave.as_ref().map_or(60.0, |ws| (4.0 * ws).max(60.0));
    let mut checks = vec![
        pauli_algebra(),
        unitarity(scenario, omega_hi, &mut rng),
        route_equivalence(scenario, omega_hi, settings, &mut rng),
        first_order(scenario, omega_hi, settings, &mut rng),
    ];
    if scenario.is_default() {
        checks.push(closed_form_transfer(scenario, omega_hi));
        checks.push(helicity(scenario, omega_hi, settings));
    } else {
        checks.push(Check::skip("transfer_closed_form", "non-default states"));
        checks.push(Check::skip("helicity_closed_form", "non-default states"));
    }
    match (&half_wave, scenario.is_default()) {
        (Ok(ws), true) => {
            checks.push(group_delay(scenario, *ws, settings));
            checks.push(lattice(scenario, *ws));
        }
        (Ok(_), false) => {
            checks.push(Check::skip("group_delay_closed_form", "non-default states"));
            checks.push(Check::skip("lattice_topology", "non-default states"));
        }
        (Err(e), _) => {
            checks.push(Check::skip(
                "group_delay_closed_form",
                format!("no half-waveplate frequency: {e}"),
            ));
            checks.push(Check::skip(
                "lattice_topology",
                format!("no half-waveplate frequency: {e}"),
            ));
        }
    }
    checks.push(match &half_wave {
        Ok(ws) => Check::judge(
            "half_waveplate_frequency",
            true,
            format!("omega_rad_per_ns={ws:.12} f_ghz={:.12}", omega_to_ghz(*ws)),
        ),
        Err(e) => Check::skip("half_waveplate_frequency", e.to_string()),
    });
    Report {
        checks,
        half_waveplate_omega: half_wave.ok(),
    }
}

fn pauli_algebra() -> Check {
    let s: Vec<Operator2> = (1..=3).map(|k| pauli(k).expect("valid index")).collect();
    let i = Complex::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let expected = if a == b {
                Operator2::identity()
            } else {
                // sigma_a sigma_b = i eps_abc sigma_c
                let c = 3 - a - b;
                let sign = if (a + 1) % 3 == b { 1.0 } else { -1.0 };
                s[c].scale(i * sign)
            };
            worst = worst.max((s[a] * s[b] - expected).max_abs());
        }
    }
    Check::judge(
        "pauli_algebra",
        worst <= 1e-15,
        format!("max_error={worst:.3e}"),
    )
}

fn unitarity(scenario: &Scenario, omega_hi: f64, rng: &mut StdRng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (omega, beta) = (rng.gen_range(0.0..omega_hi), rng.gen_range(0.0..TAU));
        worst = worst.max(scenario.model.build_u(omega, beta).unitarity_deviation());
    }
    Check::judge(
        "unitarity",
        worst <= 1e-12,
        format!("samples=10000 max_deviation={worst:.3e}"),
    )
}

fn route_equivalence(
    scenario: &Scenario,
    omega_hi: f64,
    settings: &DiffSettings,
    rng: &mut StdRng,
) -> Check {
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    let mut attempts = 0;
    while tested < 100 {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Check::skip("weak_value_equivalence", "too few points with |T| > 0.05");
        }
        let p = ParamPoint::new(
            rng.gen_range(0.01 * omega_hi..omega_hi),
            rng.gen_range(0.0..PI),
        );
        if scenario.transfer(p.rho, p.eta).norm() <= 0.05 {
            continue;
        }
        for axis in [Axis::Rho, Axis::Eta] {
            let op = weak_value_operator_form(
                &scenario.model,
                &scenario.psi_in,
                &scenario.psi_f,
                p,
                axis,
                settings,
            );
            let grad = pointer_from_response(scenario, p, axis, settings);
            match (op, grad) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b.value).norm()),
                (Err(e), _) | (_, Err(e)) => return Check::fail("weak_value_equivalence", e),
            }
        }
        tested += 1;
    }
    Check::judge(
        "weak_value_equivalence",
        worst <= 1e-6,
        format!("points=100 max_difference={worst:.3e}"),
    )
}

fn first_order(
    scenario: &Scenario,
    omega_hi: f64,
    settings: &DiffSettings,
    rng: &mut StdRng,
) -> Check {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut tested = 0;
    let mut attempts = 0;
    while tested < 10 {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Check::skip("first_order_expansion", "too few points with |T| > 0.05");
        }
        let p0 = ParamPoint::new(
            rng.gen_range(0.01 * omega_hi..omega_hi),
            rng.gen_range(0.0..PI),
        );
        if scenario.transfer(p0.rho, p0.eta).norm() <= 0.05 {
            continue;
        }
        let angle = rng.gen_range(0.0..TAU);
        let err = |scale: f64| {
            let d = (scale * angle.cos(), scale * angle.sin());
            first_order_transfer(
                &scenario.model,
                &scenario.psi_in,
                &scenario.psi_f,
                p0,
                d,
                settings,
            )
            .map(|lin| (scenario.transfer(p0.rho + d.0, p0.eta + d.1) - lin).norm())
        };
        match (err(1e-3), err(5e-4)) {
            (Ok(full), Ok(half)) => {
                let ratio = full / half;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            (Err(e), _) | (_, Err(e)) => return Check::fail("first_order_expansion", e),
        }
        tested += 1;
    }
    Check::judge(
        "first_order_expansion",
        lo >= 3.5 && hi <= 4.5,
        format!("points=10 halving_ratio_min={lo:.4} halving_ratio_max={hi:.4}"),
    )
}

fn closed_form_transfer(scenario: &Scenario, omega_hi: f64) -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        for j in 0..100 {
            let (omega, beta) = (omega_hi * i as f64 / 100.0, TAU * j as f64 / 100.0);
            let exact = scenario.model.transfer_closed_form(omega, beta);
            worst = worst.max((scenario.transfer(omega, beta) - exact).norm());
        }
    }
    Check::judge(
        "transfer_closed_form",
        worst <= 1e-12,
        format!("grid=100x100 max_error={worst:.3e}"),
    )
}

fn group_delay(scenario: &Scenario, omega_s: f64, settings: &DiffSettings) -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..=100 {
        let beta = FRAC_PI_2 * k as f64 / 100.0;
        if (beta - FRAC_PI_4).abs() <= 0.02 {
            continue;
        }
        let numeric = pointer_from_response(
            scenario,
            ParamPoint::new(omega_s, beta),
            Axis::Rho,
            settings,
        );
        match (numeric, group_delay_analytic(scenario, beta)) {
            (Ok(n), Ok(a)) => worst = worst.max((n.value.re - a).abs() / a.abs().max(1e-300)),
            (Err(e), _) | (_, Err(e)) => return Check::fail("group_delay_closed_form", e),
        }
    }
    Check::judge(
        "group_delay_closed_form",
        worst <= 1e-5,
        format!("samples=96 max_relative_error={worst:.3e}"),
    )
}

fn helicity(scenario: &Scenario, omega_hi: f64, settings: &DiffSettings) -> Check {
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    for k in 0..=400 {
        let omega = omega_hi * k as f64 / 400.0;
        if scenario.model.phases(omega).minus.cos().abs() < 0.05 {
            continue;
        }
        let p = ParamPoint::new(omega, FRAC_PI_4);
        match (
            pointer_from_response(scenario, p, Axis::Eta, settings),
            helicity_pointer_analytic(scenario, omega),
        ) {
            (Ok(n), Ok(a)) => worst = worst.max((n.value.re - a).abs() / a.abs().max(1.0)),
            (Err(e), _) | (_, Err(e)) => return Check::fail("helicity_closed_form", e),
        }
        tested += 1;
    }
    Check::judge(
        "helicity_closed_form",
        worst <= 1e-6,
        format!("samples={tested} max_error={worst:.3e}"),
    )
}

fn lattice(scenario: &Scenario, omega_s: f64) -> Check {
    let name = "lattice_topology";
    let spacing = match scenario.model.half_waveplate_frequency(1) {
        Ok(w1) => w1 - omega_s,
        Err(e) => return Check::skip(name, e.to_string()),
    };
    let rect = Rect {
        rho_min: (omega_s - 0.5 * spacing).max(0.5 * omega_s),
        rho_max: omega_s + 3.5 * spacing,
        eta_min: 0.0,
        eta_max: PI,
    };
    let predicted = match predicted_lattice(&scenario.model, &rect) {
        Ok(p) => p,
        Err(e) => return Check::fail(name, e),
    };
    let spec = match GridSpec::new(rect.rho_min, rect.rho_max, 600, 1e-3, PI - 1e-3, 300) {
        Ok(s) => s,
        Err(e) => return Check::fail(name, e),
    };
    let scan = find_singularities(scenario, spec, &ScanSettings::default());
    let summary = lattice_report(&scan.records);
    let matched = scan.records.len() == predicted.len()
        && predicted
            .iter()
            .all(|p| scan.records.iter().any(|r| r.point().distance(p) <= 1e-6));
    let loop_ = Rect {
        eta_min: 0.05,
        eta_max: PI - 0.05,
        ..rect
    };
    let boundary = boundary_winding(scenario, &loop_, 512);
    let ok = matched
        && summary.net_charge == 0
        && summary.alternates()
        && scan.records.iter().all(|r| r.charge.abs() == 1)
        && boundary.as_ref().is_ok_and(|&w| w == summary.net_charge);
    Check::judge(
        name,
        ok,
        format!(
            "found={} predicted={} net_charge={} alternating={} boundary_winding={}",
            scan.records.len(),
            predicted.len(),
            summary.net_charge,
            summary.alternates(),
            boundary.map_or_else(|e| e.to_string().replace(' ', "_"), |w| w.to_string())
        ),
    )
}
