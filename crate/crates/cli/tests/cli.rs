use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use weakvalue::io::{parse_phase_grid, parse_pointer_csv, parse_sweep_csv};
use weakvalue::singularity::plaquette_windings;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakvalue"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sweep.csv");
    let out = run(&[
        "--preset",
        "paper",
        "sweep",
        "--beta",
        "0.6",
        "--f-ghz",
        "10:25:2000",
        "--out",
        path_str(&file),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = parse_sweep_csv(&fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 2000);
    assert_eq!(table.beta, 0.6);
    assert!((table.rows[0].omega - 2.0 * PI * 10.0).abs() < 1e-12);
}

#[test]
fn bad_ranges_are_config_errors() {
    assert_eq!(
        code(&run(&["sweep", "--beta", "0.6", "--f-ghz", "10:10:5"])),
        2
    );
    assert_eq!(
        code(&run(&["sweep", "--beta", "0.6", "--f-ghz", "10:25:0"])),
        2
    );
    assert_eq!(code(&run(&["sweep", "--beta", "0.6"])), 2);
    assert_eq!(
        code(&run(&[
            "map",
            "--omega-range",
            "5:1:10",
            "--beta-range",
            "0:1:10"
        ])),
        2
    );
    assert_eq!(code(&run(&["--step", "-1", "validate"])), 2);
    assert_eq!(code(&run(&["--stencil", "3", "validate"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

fn ingest_near_ws(beta: &str) -> f64 {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("s.csv");
    // reference model: omega_s = 5 pi / 2 rad/ns, i.e. 1.25 GHz
    let out = run(&[
        "sweep",
        "--beta",
        beta,
        "--f-ghz",
        "1.2:1.3:101",
        "--out",
        path_str(&sweep),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&["ingest", path_str(&sweep)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let curve = parse_pointer_csv(&stdout(&out)).unwrap();
    curve.rows[50].value.unwrap().re
}

#[test]
fn group_delay_changes_sign_across_quarter_turn() {
    let below = ingest_near_ws("0.7");
    let above = ingest_near_ws("0.8");
    assert!(below < 0.0 && above > 0.0, "{below} {above}");
}

#[test]
fn rotation_scan_matches_group_delay_closed_form() {
    let range = format!("0:{FRAC_PI_2}:41");
    let out = run(&[
        "pointer",
        "--axis",
        "omega",
        "--beta-range",
        &range,
        "--at-ws",
        "--analytic",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let curve = parse_pointer_csv(&stdout(&out)).unwrap();
    assert_eq!(curve.gaps(), 1);
    for r in &curve.rows {
        match (r.value, r.analytic) {
            (Some(v), Some(a)) => assert!((v.re - a).abs() <= 1e-5 * a.abs().max(1.0), "{r:?}"),
            (None, _) => assert!((r.coord - FRAC_PI_4).abs() < 1e-12),
            (Some(_), None) => panic!("missing closed form at {}", r.coord),
        }
    }
}

#[test]
fn frequency_scan_matches_helicity_closed_form() {
    let range = format!("0:{}:201", 2.0 * PI / 0.2);
    let beta = FRAC_PI_4.to_string();
    let out = run(&[
        "pointer",
        "--axis",
        "beta",
        "--omega-range",
        &range,
        "--beta",
        &beta,
        "--analytic",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let curve = parse_pointer_csv(&stdout(&out)).unwrap();
    assert!(curve.gaps() >= 1);
    for r in &curve.rows {
        let phi = 0.2 * r.coord;
        if phi.cos().abs() < 0.05 {
            continue;
        }
        let v = r.value.expect("finite away from the zeros");
        assert!((v.re - 2.0 * phi.tan()).abs() < 1e-6 * phi.tan().abs().max(1.0));
    }
}

#[test]
fn directional_pointer_verifies() {
    let out = run(&[
        "pointer",
        "--axis",
        "direction",
        "--dir",
        "1,1",
        "--omega-range",
        "2:12:20",
        "--beta",
        "0.3",
        "--verify",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("axis=direction"));
    assert_eq!(
        code(&run(&[
            "pointer",
            "--axis",
            "direction",
            "--omega-range",
            "2:12:20",
            "--beta",
            "0.3"
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "pointer",
            "--axis",
            "direction",
            "--dir",
            "0,0",
            "--omega-range",
            "2:12:20",
            "--beta",
            "0.3"
        ])),
        2
    );
}

#[test]
fn analytic_needs_a_matching_line() {
    let out = run(&[
        "pointer",
        "--axis",
        "omega",
        "--beta-range",
        "0:1:5",
        "--at-omega",
        "3.0",
        "--analytic",
    ]);
    assert_eq!(code(&out), 2);
    let out = run(&["pointer", "--beta-range", "0:1:5", "--omega-range", "1:2:3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn map_grids() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.csv");
    let out = run(&[
        "map",
        "--omega-range",
        "1:2:2",
        "--beta-range",
        "0:1:2",
        "--out",
        path_str(&small),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        parse_phase_grid(&fs::read_to_string(&small).unwrap())
            .unwrap()
            .arg
            .len(),
        4
    );

    let full = dir.path().join("full.csv");
    let out = run(&[
        "map",
        "--omega-range",
        "1:62:600",
        "--beta-range",
        "0.1:3.0:300",
        "--out",
        path_str(&full),
    ]);
    assert_eq!(code(&out), 0);
    let pg = parse_phase_grid(&fs::read_to_string(&full).unwrap()).unwrap();
    assert_eq!(pg.arg.len(), 180_000);
    let scan = plaquette_windings(&pg);
    assert_eq!(scan.cells.len(), 8);
}

#[test]
fn singularity_scans() {
    let beta = format!("0:{PI}:300");
    let out = run(&[
        "singularities",
        "--omega-range",
        "0:63:600",
        "--beta-range",
        &beta,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 8);
    assert!(
        text.contains("count=8")
            && text.contains("net_charge=0")
            && text.contains("alternation=ok")
    );

    let out = run(&[
        "singularities",
        "--omega-range",
        "1:6:50",
        "--beta-range",
        "0.1:3:30",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("count=0"));

    let out = run(&[
        "singularities",
        "--omega-range",
        "1:62:10",
        "--beta-range",
        "0.1:3:5",
        "--no-subdivide",
    ]);
    assert!(stderr(&out).contains("unresolved phase steps"));
}

#[test]
fn all_seeds_failing_is_a_computation_error() {
    let beta = format!("0:{PI}:300");
    let out = run(&[
        "singularities",
        "--omega-range",
        "0:63:600",
        "--beta-range",
        &beta,
        "--max-iter",
        "1",
        "--tol",
        "1e-300",
    ]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn validate_presets_and_configs() {
    let out = run(&["validate", "--preset", "paper"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("f_ghz=16.700000000000"));

    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.cfg");
    fs::write(
        &flat,
        "slope_te = 1.0\nslope_tm = 1.0\nintercept_te = 0.4\n",
    )
    .unwrap();
    let out = run(&["--config", path_str(&flat), "validate"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("check=group_delay_closed_form status=skip"));
    assert!(text.contains("check=lattice_topology status=skip"));
    assert!(!text.contains("status=fail"));

    let broken = dir.path().join("broken.cfg");
    fs::write(&broken, "slope_te = 1.2\nslope_tm =\n").unwrap();
    assert_eq!(code(&run(&["--config", path_str(&broken), "validate"])), 2);
    assert_eq!(
        code(&run(&["--config", "/nonexistent/model.cfg", "validate"])),
        2
    );
    assert_eq!(
        code(&run(&[
            "--config",
            path_str(&flat),
            "--preset",
            "paper",
            "validate"
        ])),
        2
    );
}

#[test]
fn ingest_errors_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["ingest", "/nonexistent/sweep.csv"])), 3);

    let malformed = dir.path().join("bad.csv");
    fs::write(&malformed, "# beta_rad=0.1\nomega,re_t\n1,2\n").unwrap();
    assert_eq!(code(&run(&["ingest", path_str(&malformed)])), 3);

    let dark = dir.path().join("dark.csv");
    fs::write(
        &dark,
        "# beta_rad=0\nomega,re_t,im_t\n1,0,0\n2,0,0\n3,0,0\n4,1,0\n",
    )
    .unwrap();
    assert_eq!(code(&run(&["ingest", path_str(&dark)])), 4);

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (p, beta) in [(&a, "0.2"), (&b, "1.2")] {
        assert_eq!(
            code(&run(&[
                "sweep",
                "--beta",
                beta,
                "--omega-range",
                "1:5:40",
                "--out",
                path_str(p)
            ])),
            0
        );
    }
    let outdir = dir.path().join("curves");
    let out = run(&[
        "ingest",
        path_str(&a),
        path_str(&b),
        "--out",
        path_str(&outdir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for name in ["a.pointer.csv", "b.pointer.csv"] {
        let curve = parse_pointer_csv(&fs::read_to_string(outdir.join(name)).unwrap()).unwrap();
        assert_eq!(curve.rows.len(), 40);
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = run(&[
        "map",
        "--omega-range",
        "1:2:2",
        "--beta-range",
        "0:1:2",
        "--out",
        "/nonexistent/dir/grid.csv",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "pointer",
        "--axis",
        "omega",
        "--omega-range",
        "1:30:300",
        "--beta",
        "0.6",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["validate", "--preset", "paper"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
