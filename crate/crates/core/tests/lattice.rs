use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_4, PI};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use weakvalue::singularity::{
    boundary_winding, find_singularities, lattice_report, perturb_and_conserve, phase_grid,
    plaquette_windings, predicted_lattice, GridSpec, Rect, ScanSettings,
};
use weakvalue::weak::pointer_from_response;
use weakvalue::{Axis, DiffSettings, DispersionModel, ModelDelta, ParamPoint, Scenario};

fn reference() -> Scenario {
    Scenario::default_for(DispersionModel::reference())
}

fn lattice_grid() -> GridSpec {
    GridSpec::new(1e-3, 63.0 - 1e-3, 600, 1e-3, PI - 1e-3, 300).unwrap()
}

/// 8-connected components of nodes with |T| below `threshold`.
fn low_components(abs: &[f64], n_rho: usize, n_eta: usize, threshold: f64) -> usize {
    let mut seen = vec![false; abs.len()];
    let mut count = 0;
    for start in 0..abs.len() {
        if seen[start] || abs[start] >= threshold {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let (i, j) = ((k / n_eta) as i64, (k % n_eta) as i64);
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= n_rho as i64 || b >= n_eta as i64 {
                        continue;
                    }
                    let idx = a as usize * n_eta + b as usize;
                    if !seen[idx] && abs[idx] < threshold {
                        seen[idx] = true;
                        queue.push_back(idx);
                    }
                }
            }
        }
    }
    count
}

#[test]
fn low_magnitude_regions_match_the_lattice() {
    let spec = GridSpec::new(1.0, 62.0, 600, 0.1, 3.0, 300).unwrap();
    let pg = phase_grid(&reference(), spec);
    assert_eq!(low_components(&pg.abs, 600, 300, 0.02), 8);
}

#[test]
fn scan_recovers_the_predicted_lattice() {
    let sc = reference();
    let report = find_singularities(&sc, lattice_grid(), &ScanSettings::default());
    let predicted = predicted_lattice(&sc.model, &Rect::new(0.0, 63.0, 0.0, PI).unwrap()).unwrap();
    assert_eq!(report.records.len(), 8, "{:?}", report.failures);
    for (r, p) in report.records.iter().zip(&predicted) {
        assert!(r.point().distance(p) <= 1e-6, "{r:?} vs {p:?}");
        assert!(r.residual <= 1e-10);
        assert_eq!(r.charge.abs(), 1);
    }
    let summary = lattice_report(&report.records);
    assert_eq!(summary.net_charge, 0);
    assert_eq!((summary.positive, summary.negative), (4, 4));
    assert!(summary.alternates(), "{:?}", summary.violations());
}

#[test]
fn plaquette_charges_are_quantized() {
    let sc = reference();
    // spacing 0.02 on both axes around the first two lattice columns
    let spec = GridSpec::new(6.0, 26.0, 1001, 0.1, 3.0, 146).unwrap();
    assert!(spec.d_rho() <= 0.02 && spec.d_eta() <= 0.02);
    let scan = plaquette_windings(&phase_grid(&sc, spec));
    assert_eq!(scan.cells.len(), 4);
    assert!(scan.cells.iter().all(|c| c.winding.abs() == 1));
}

fn distance_to_boundary(r: &Rect, p: ParamPoint) -> f64 {
    let clamp = |x: f64, lo: f64, hi: f64| x.clamp(lo, hi);
    if r.contains(&p) {
        (p.rho - r.rho_min)
            .min(r.rho_max - p.rho)
            .min(p.eta - r.eta_min)
            .min(r.eta_max - p.eta)
    } else {
        let q = ParamPoint::new(
            clamp(p.rho, r.rho_min, r.rho_max),
            clamp(p.eta, r.eta_min, r.eta_max),
        );
        p.distance(&q)
    }
}

#[test]
fn boundary_winding_matches_enclosed_charges() {
    let sc = reference();
    let records = find_singularities(&sc, lattice_grid(), &ScanSettings::default()).records;
    let mut rng = StdRng::seed_from_u64(7);
    let mut tested = 0;
    while tested < 20 {
        let (a, b): (f64, f64) = (rng.gen_range(0.5..62.5), rng.gen_range(0.5..62.5));
        let (c, d): (f64, f64) = (rng.gen_range(0.05..3.1), rng.gen_range(0.05..3.1));
        let Ok(rect) = Rect::new(a.min(b), a.max(b), c.min(d), c.max(d)) else {
            continue;
        };
        // keep the boundary well away from every zero
        let clear = records
            .iter()
            .all(|r| distance_to_boundary(&rect, r.point()) > 0.05);
        if !clear {
            continue;
        }
        let enclosed: i32 = records
            .iter()
            .filter(|r| rect.contains(&r.point()))
            .map(|r| r.charge)
            .sum();
        let w = boundary_winding(&sc, &rect, 256).unwrap();
        assert_eq!(w, enclosed, "{rect:?}");
        tested += 1;
    }
}

#[test]
fn perturbed_models_keep_the_winding() {
    let sc = reference();
    let all = Rect::new(1.0, 62.0, 0.1, 3.0).unwrap();
    let ws = sc.model.half_waveplate_frequency(0).unwrap();
    let one = Rect::new(ws - 2.0, ws + 2.0, FRAC_PI_4 - 0.4, FRAC_PI_4 + 0.4).unwrap();
    let deltas = [
        ModelDelta {
            intercept_te: 0.05,
            ..Default::default()
        },
        ModelDelta {
            slope_te: 0.01,
            ..Default::default()
        },
        ModelDelta {
            slope_tm: -0.02,
            intercept_tm: 0.03,
            ..Default::default()
        },
    ];
    for d in &deltas {
        assert_eq!(perturb_and_conserve(&sc, d, &all, 256, 8).unwrap(), (0, 0));
        let (before, after) = perturb_and_conserve(&sc, d, &one, 128, 8).unwrap();
        assert_eq!(before, after);
        assert_eq!(before.abs(), 1);
    }
}

#[test]
fn saddle_between_same_beta_singularities() {
    let sc = reference();
    let w0 = sc.model.half_waveplate_frequency(0).unwrap();
    let w1 = sc.model.half_waveplate_frequency(1).unwrap();
    let settings = DiffSettings::default();
    let grad = |omega: f64| {
        let p = ParamPoint::new(omega, FRAC_PI_4 + 0.05);
        let a = pointer_from_response(&sc, p, Axis::Rho, &settings)
            .unwrap()
            .value
            .re;
        let b = pointer_from_response(&sc, p, Axis::Eta, &settings)
            .unwrap()
            .value
            .re;
        a.hypot(b)
    };
    let n = 200;
    let samples: Vec<f64> = (0..=n)
        .map(|k| grad(w0 + (w1 - w0) * k as f64 / n as f64))
        .collect();
    let (kmin, min) = samples
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!(kmin > 0 && kmin < n);
    assert!(min < samples[0] && min < samples[n]);
}

#[test]
fn no_zeros_gives_no_records() {
    let sc = reference();
    let spec = GridSpec::new(1.0, 6.0, 50, 0.1, 3.0, 30).unwrap();
    let report = find_singularities(&sc, spec, &ScanSettings::default());
    assert!(report.records.is_empty() && report.failures.is_empty());
}
