use weakvalue::io::{format_sweep_csv, ingest_pointer_curve, parse_sweep_csv, SweepTable};
use weakvalue::weak::pointer_from_response;
use weakvalue::{Axis, DiffSettings, DispersionModel, ParamPoint, Scenario, Stencil};

const BETA: f64 = 0.6;

fn scenario() -> Scenario {
    Scenario::default_for(DispersionModel::reference())
}

/// Simulate, write, read back and ingest a sweep of `2 n + 1` points centred on `center`.
fn ingest_round_trip(center: f64, h: f64, n: i32) -> (Vec<f64>, Vec<f64>) {
    let sc = scenario();
    let omegas: Vec<f64> = (-n..=n).map(|k| center + k as f64 * h).collect();
    let table = SweepTable::sample(BETA, &omegas, |w| sc.transfer(w, BETA)).unwrap();
    let back = parse_sweep_csv(&format_sweep_csv(&table)).unwrap();
    assert_eq!(back, table);
    let curve = ingest_pointer_curve(&back).unwrap();
    let re = curve.rows.iter().map(|r| r.value.unwrap().re).collect();
    (omegas, re)
}

#[test]
fn ingested_pointers_converge_quadratically() {
    let sc = scenario();
    let ws = sc.model.half_waveplate_frequency(0).unwrap();
    let lib = pointer_from_response(
        &sc,
        ParamPoint::new(ws, BETA),
        Axis::Rho,
        &DiffSettings::default(),
    )
    .unwrap()
    .value
    .re;
    let err = |h: f64| {
        let (_, re) = ingest_round_trip(ws, h, 10);
        (re[10] - lib).abs()
    };
    let (e1, e2, e3) = (err(0.04), err(0.02), err(0.01));
    for ratio in [e1 / e2, e2 / e3] {
        assert!(
            (3.3..=4.7).contains(&ratio),
            "ratio {ratio} ({e1:e}, {e2:e}, {e3:e})"
        );
    }
}

#[test]
fn identical_differencing_agrees_to_roundoff() {
    let sc = scenario();
    let h = 1e-3;
    let settings = DiffSettings::absolute(h, h, Stencil::Central2).unwrap();
    let (omegas, re) = ingest_round_trip(12.0, h, 20);
    let ingested =
        ingest_pointer_curve(&SweepTable::sample(BETA, &omegas, |w| sc.transfer(w, BETA)).unwrap())
            .unwrap();
    for k in 1..omegas.len() - 1 {
        let lib =
            pointer_from_response(&sc, ParamPoint::new(omegas[k], BETA), Axis::Rho, &settings)
                .unwrap()
                .value;
        let got = ingested.rows[k].value.unwrap();
        assert!((got - lib).norm() <= 1e-9, "{got} vs {lib}");
        assert_eq!(got.re, re[k]);
    }
}
