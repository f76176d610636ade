use std::path::Path;
use std::process::{Command, Output};

fn adjchar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adjchar"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn demo(dir: &Path, nodes: &str) -> String {
    let o = adjchar(&[
        "stripe-demo",
        "--nodes",
        nodes,
        "--step",
        "0.01",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    dir.join("stripe_field.txt").to_str().unwrap().to_owned()
}

#[test]
fn identities_pass_and_are_deterministic() {
    let a = adjchar(&["identities", "--seed", "7", "--samples", "50"]);
    let b = adjchar(&["identities", "--seed", "7", "--samples", "50"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("xy_proportional_row1"));
}

#[test]
fn injected_fault_is_named() {
    let o = adjchar(&["identities", "--samples", "50", "--inject-fault"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("xy_proportional_row1"));
}

#[test]
fn usage_errors_exit_four() {
    assert_eq!(code(&adjchar(&["identities", "--samples", "0"])), 4);
    assert_eq!(
        code(&adjchar(&["verify", "--field", "x.txt", "--start", "1;2"])),
        4
    );
    assert_eq!(code(&adjchar(&["no-such-command"])), 4);
    assert_eq!(
        code(&adjchar(&[
            "verify",
            "--field",
            "/nonexistent/field.txt",
            "--start",
            "0,0"
        ])),
        4
    );
    assert_eq!(code(&adjchar(&["--help"])), 0);
}

#[test]
fn subsonic_demo_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = adjchar(&[
        "stripe-demo",
        "--mach",
        "0.8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_exit_codes_on_demo_field() {
    let dir = tempfile::tempdir().unwrap();
    let field = demo(dir.path(), "97");
    let ok = adjchar(&[
        "verify", "--field", &field, "--start", "1.0,0.1", "--family", "s", "--step", "0.01",
    ]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let out = String::from_utf8_lossy(&ok.stdout);
    assert!(out.contains("kind s1: PASS") && out.contains("kind s2: PASS"));

    let outside = adjchar(&[
        "verify", "--field", &field, "--start", "5,5", "--family", "s",
    ]);
    assert_eq!(code(&outside), 2);
    let mismatch = adjchar(&[
        "verify", "--field", &field, "--start", "1,0.1", "--family", "s", "--kind", "cplus",
    ]);
    assert_eq!(code(&mismatch), 4);
    let strict = adjchar(&[
        "verify", "--field", &field, "--start", "0.35,0", "--family", "cplus", "--tol", "0",
    ]);
    assert_eq!(code(&strict), 1);
    let negative = adjchar(&[
        "verify", "--field", &field, "--start", "0.35,0", "--family", "cplus", "--tol=-1",
    ]);
    assert_eq!(code(&negative), 4);
}

#[test]
fn verify_writes_one_report_per_kind() {
    let dir = tempfile::tempdir().unwrap();
    let field = demo(dir.path(), "65");
    let report = dir.path().join("rep.csv");
    let o = adjchar(&[
        "verify",
        "--field",
        &field,
        "--start",
        "1,0.1",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    for kind in ["s1", "s2"] {
        let r = adjchar::CompatReport::load(dir.path().join(format!("rep_{kind}.csv"))).unwrap();
        assert!(r.ratio < 1e-10);
    }
}

#[test]
fn demo_outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    demo(a.path(), "65");
    demo(b.path(), "65");
    for name in [
        "stripe_field.txt",
        "gamma_s.csv",
        "gamma_cplus.csv",
        "gamma_cminus.csv",
    ] {
        let (x, y) = (
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
        );
        assert!(!x.is_empty() && x == y, "{name}");
    }
}

#[test]
fn trace_writes_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let field = demo(dir.path(), "65");
    let o = adjchar(&[
        "trace",
        "--field",
        &field,
        "--start",
        "0.5,-0.2",
        "--family",
        "cminus",
        "--sense",
        "with",
        "--max-length",
        "0.5",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s,x,y,rho,rho_u,rho_v,rho_E,M,psi1,psi2,psi3,psi4,shock_flag"
    );
    assert!(lines.count() > 40);
}

#[test]
fn convert_builds_a_traceable_field() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("grid.csv");
    let mut text = String::from("i,j,x,y,rho,rho_u,rho_v,rho_E\n");
    for j in 0..11 {
        for i in 0..11 {
            // M = 2 along x with unit density and sound speed.
            text.push_str(&format!(
                "{i},{j},{},{},1,2,0,{}\n",
                0.1 * i as f64,
                0.1 * j as f64,
                1.0 / (1.4 * 0.4) + 2.0
            ));
        }
    }
    std::fs::write(&csv, text).unwrap();
    let out = dir.path().join("grid.txt");
    let o = adjchar(&[
        "convert",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = adjchar::FieldGrid::load(&out).unwrap();
    assert_eq!((g.ni(), g.nj()), (11, 11));
    let t = adjchar(&[
        "trace",
        "--field",
        out.to_str().unwrap(),
        "--start",
        "0.9,0.5",
        "--family",
        "cplus",
    ]);
    assert_eq!(code(&t), 0);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y,rho,rho_u,rho_v,rho_E\n0,0,1,0,0,1\n").unwrap();
    let o = adjchar(&[
        "convert",
        "--csv",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
}
