use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use spinfield::io;
use spinfield::ladder::distortion_fields;
use spinfield::radial::{build_frame, RadialCovariance, RadialGrid};
use spinfield::randomfield::{sample_coefficients, PowerSpectrumSet};
use spinfield::transform::{make_grid, synthesize_real, HarmonicCoefficients, SphereMap};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinfield"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    run(dir, args).status.code().unwrap()
}

fn flat_spectrum(dir: &Path, lmax: usize) {
    let mut s = String::from("ell,comp_i,comp_j,value\n");
    for l in 0..=lmax {
        s += &format!("{l},T,T,1.0\n");
    }
    fs::write(dir.join("flat.csv"), s).unwrap();
}

#[test]
fn version_prints_schema() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(ok(d.path(), &["--version"]).trim(), io::SCHEMA_VERSION);
}

#[test]
fn restriction_query() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(ok(d.path(), &["mult", "--group", "O3", "--restrict", "V(2,+)"]), "E0+ + E1 + E2\n");
    assert_eq!(
        ok(d.path(), &["mult", "--restrict", "V(l=3,parity=-)", "--full"]),
        "V(l=3,parity=-) |_O2 = E0+ + E1 + E2 + E3\n"
    );
    assert_eq!(ok(d.path(), &["mult", "--tensor", "E1", "E1"]), "E0+ + E0- + E2\n");
    assert_eq!(ok(d.path(), &["mult", "--induced", "V(l=4)", "--from", "e(2)"]), "1\n");
    assert_eq!(ok(d.path(), &["mult", "--induced", "V(l=1)", "--from", "e(2)"]), "0\n");
    assert_eq!(ok(d.path(), &["mult", "--type", "E2", "--field", "real"]), "R\n");
    assert_eq!(code(d.path(), &["mult", "--group", "SO3", "--restrict", "V(2,+)"]), 2);
    assert_eq!(code(d.path(), &["mult", "--restrict", "W7"]), 2);
    assert_eq!(code(d.path(), &["mult"]), 2);
}

#[test]
fn lensing_single_mode() {
    let d = tempfile::tempdir().unwrap();
    let mut phi = HarmonicCoefficients::zeros(0, 4);
    phi.set(2, 0, Complex64::new(1.0, 0.0)).unwrap();
    fs::write(d.path().join("phi.csv"), io::coefficients_to_csv(&phi)).unwrap();
    ok(d.path(), &["lensing", "--in", "phi.csv"]);
    let kappa = fs::read_to_string(d.path().join("kappa.csv")).unwrap();
    assert!(kappa.lines().any(|l| l == "2,0,3.0000000000000000e0,0.0000000000000000e0"));
    let f = distortion_fields(&phi).unwrap();
    for (name, c) in [("kappa", &f.kappa), ("flexion1", &f.flexion1), ("shear", &f.shear), ("flexion3", &f.flexion3)] {
        let text = fs::read_to_string(d.path().join(format!("{name}.csv"))).unwrap();
        assert_eq!(text, io::coefficients_to_csv(c), "{name}");
    }
}

#[test]
fn real_synthesis_then_analysis() {
    let d = tempfile::tempdir().unwrap();
    flat_spectrum(d.path(), 8);
    ok(
        d.path(),
        &["synth", "--spin", "0", "--lmax", "8", "--spectrum", "flat.csv", "--seed", "1", "--real", "--out", "m.json"],
    );
    ok(d.path(), &["analyze", "--in", "m.json", "--out", "a.csv"]);
    let a = io::coefficients_from_csv(&fs::read_to_string(d.path().join("a.csv")).unwrap()).unwrap();
    assert!(a.is_real_field());

    // The command is a thin adapter over the library.
    let spec = PowerSpectrumSet::scalar("T", &[1.0; 9]).unwrap();
    let grid = make_grid(8).unwrap();
    let c = sample_coefficients(&spec, 1, true).unwrap();
    let values = synthesize_real(&c.components[0], &grid).unwrap();
    let want = io::real_map_to_json(&values, &SphereMap::zeros(grid, 0)).unwrap();
    assert_eq!(fs::read_to_string(d.path().join("m.json")).unwrap(), want);
}

#[test]
fn spin_synthesis_and_truncation() {
    let d = tempfile::tempdir().unwrap();
    let mut s = String::from("ell,comp_i,comp_j,value\n");
    for l in 2..=12 {
        s += &format!("{l},T,T,{}\n", 1.0 / (l * l) as f64);
    }
    fs::write(d.path().join("s.csv"), s).unwrap();
    ok(
        d.path(),
        &["synth", "--spin", "-2", "--lmax", "6", "--spectrum", "s.csv", "--seed", "3", "--out", "m.json", "--coeffs-out", "c.csv"],
    );
    let map = io::map_from_json(&fs::read_to_string(d.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(map.spin(), -2);
    ok(d.path(), &["analyze", "--in", "m.json", "--out", "a.csv"]);
    let a = io::coefficients_from_csv(&fs::read_to_string(d.path().join("a.csv")).unwrap()).unwrap();
    let c = io::coefficients_from_csv(&fs::read_to_string(d.path().join("c.csv")).unwrap()).unwrap();
    assert_eq!(c.lmax(), 6);
    assert!(a.max_abs_diff(&c) < 1e-12);
    // A spin-2 field cannot carry power at l < 2.
    fs::write(d.path().join("bad.csv"), "ell,comp_i,comp_j,value\n1,T,T,1.0\n").unwrap();
    assert_eq!(
        code(d.path(), &["synth", "--spin", "2", "--lmax", "4", "--spectrum", "bad.csv", "--seed", "1", "--out", "x.json"]),
        4
    );
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    flat_spectrum(d.path(), 4);
    let p = d.path();
    assert_eq!(code(p, &["synth", "--lmax", "4", "--spectrum", "flat.csv", "--out", "m.json"]), 2);
    assert_eq!(code(p, &["synth", "--lmax", "4", "--spectrum", "missing.csv", "--seed", "1", "--out", "m.json"]), 2);
    assert_eq!(code(p, &["synth", "--lmax", "x", "--spectrum", "flat.csv", "--seed", "1", "--out", "m.json"]), 2);
    assert_eq!(
        code(p, &["synth", "--lmax", "4", "--spectrum", "flat.csv", "--seed", "1", "--out", "no/such/dir/m.json"]),
        2
    );
    fs::write(p.join("neg.csv"), "ell,comp_i,comp_j,value\n0,T,T,1.0\n1,T,T,-0.5\n").unwrap();
    assert_eq!(code(p, &["synth", "--lmax", "4", "--spectrum", "neg.csv", "--seed", "1", "--out", "m.json"]), 4);
    fs::write(p.join("junk.csv"), "ell,comp_i,comp_j,value\n0,T,T,abc\n").unwrap();
    assert_eq!(code(p, &["synth", "--lmax", "4", "--spectrum", "junk.csv", "--seed", "1", "--out", "m.json"]), 3);
    fs::write(p.join("junk.json"), "{").unwrap();
    assert_eq!(code(p, &["analyze", "--in", "junk.json", "--out", "a.csv"]), 3);
    ok(p, &["synth", "--lmax", "4", "--spectrum", "flat.csv", "--seed", "1", "--out", "m.json"]);
    assert_eq!(code(p, &["analyze", "--in", "m.json", "--lmax", "9", "--out", "a.csv"]), 4);
    let err = String::from_utf8(run(p, &["analyze", "--in", "m.json", "--lmax", "9", "--out", "a.csv"]).stderr).unwrap();
    assert!(err.contains("band limit"), "{err}");
}

#[test]
fn eb_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let lmax = 10;
    let e = HarmonicCoefficients::from_fn(0, lmax, |l, m| {
        if l < 2 {
            return Complex64::new(0.0, 0.0);
        }
        let z = Complex64::new((l as f64 + 0.3 * m as f64).sin(), (0.7 * l as f64 - m as f64).cos());
        if m == 0 {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    });
    let mut e_real = e.clone();
    for l in 2..=lmax {
        for m in 1..=l as i32 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            e_real.set(l, -m, e.get(l, m).conj() * sign).unwrap();
        }
    }
    let b = HarmonicCoefficients::zeros(0, lmax);
    fs::write(p.join("e.csv"), io::coefficients_to_csv(&e_real)).unwrap();
    fs::write(p.join("b.csv"), io::coefficients_to_csv(&b)).unwrap();
    ok(p, &["eb", "--e", "e.csv", "--b", "b.csv", "--out", "qu.json"]);
    ok(p, &["eb", "--qu", "qu.json", "--out", "e2.csv", "b2.csv"]);
    let e2 = io::coefficients_from_csv(&fs::read_to_string(p.join("e2.csv")).unwrap()).unwrap();
    let b2 = io::coefficients_from_csv(&fs::read_to_string(p.join("b2.csv")).unwrap()).unwrap();
    assert!(e2.max_abs_diff(&e_real) < 1e-10);
    assert!(b2.max_abs() < 1e-10);
    assert_eq!(code(p, &["eb", "--qu", "qu.json", "--out", "e2.csv"]), 2);
}

#[test]
fn spectrum_command() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let c = HarmonicCoefficients::from_fn(0, 2, |l, _| Complex64::new(l as f64, 0.0));
    fs::write(p.join("c.csv"), io::coefficients_to_csv(&c)).unwrap();
    let out = ok(p, &["spectrum", "--in", "c.csv"]);
    assert_eq!(
        out,
        "ell,comp_i,comp_j,value\n0,T,T,0.0000000000000000e0\n1,T,T,1.0000000000000000e0\n2,T,T,4.0000000000000000e0\n"
    );
}

fn radial_inputs(p: &Path) {
    let grid = RadialGrid::gauss_legendre(1.0, 6).unwrap();
    fs::write(p.join("grid.json"), io::radial_grid_to_json(&grid).unwrap()).unwrap();
    let cov = RadialCovariance::from_fn(0, grid, 3, |l, a, b| (-(a - b).powi(2) * (1 + l) as f64).exp());
    fs::write(p.join("cov.csv"), io::radial_covariance_to_csv(&cov)).unwrap();
}

#[test]
fn frame_and_ball() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    radial_inputs(p);
    ok(p, &["frame", "--cov", "cov.csv", "--grid", "grid.json", "--out", "frame.csv", "--meta", "meta.json"]);
    let grid = io::radial_grid_from_json(&fs::read_to_string(p.join("grid.json")).unwrap()).unwrap();
    let cov = io::radial_covariance_from_csv(&fs::read_to_string(p.join("cov.csv")).unwrap(), 0, grid.clone()).unwrap();
    assert_eq!(fs::read_to_string(p.join("frame.csv")).unwrap(), io::frame_to_csv(&build_frame(&cov).unwrap()));
    ok(p, &["ball-synth", "--frame", "frame.csv", "--grid", "grid.json", "--seed", "9", "--real", "--out", "ball"]);
    let index = fs::read_to_string(p.join("ball/shells.json")).unwrap();
    assert!(index.contains("shell_005.json"));
    let shell = io::map_from_json(&fs::read_to_string(p.join("ball/shell_000.json")).unwrap()).unwrap();
    assert_eq!(shell.max_abs_imag(), 0.0);
    assert_eq!(code(p, &["ball-synth", "--frame", "frame.csv", "--grid", "grid.json", "--out", "b2"]), 2);

    let mut bad = String::from("ell,i,j,value\n");
    bad += "0,0,0,1.0\n0,1,1,1.0\n0,0,1,2.0\n";
    fs::write(p.join("bad.csv"), bad).unwrap();
    assert_eq!(code(p, &["frame", "--cov", "bad.csv", "--grid", "grid.json", "--out", "f.csv"]), 4);
}

#[test]
fn radial_grid_command() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["radial-grid", "--radius", "2.0", "--n", "5", "--out", "g.json"]);
    let g = io::radial_grid_from_json(&fs::read_to_string(d.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(g, RadialGrid::gauss_legendre(2.0, 5).unwrap());
}

#[test]
fn stokes_bundle_files() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let mut s = String::from("ell,comp_i,comp_j,value\n");
    for l in 0..=6 {
        s += &format!("{l},I,I,1.0\n");
        if l >= 2 {
            s += &format!("{l},E,E,0.5\n{l},I,E,0.3\n{l},B,B,0.1\n");
        }
    }
    fs::write(p.join("s.csv"), s).unwrap();
    ok(p, &["synth", "--stokes", "--lmax", "6", "--spectrum", "s.csv", "--seed", "2", "--out", "st"]);
    for f in ["I.json", "V.json", "Q.json", "U.json", "I.csv", "E.csv", "B.csv"] {
        assert!(p.join("st").join(f).exists(), "{f}");
    }
    assert_eq!(code(p, &["synth", "--lmax", "6", "--spectrum", "s.csv", "--seed", "2", "--out", "x.json"]), 2);
    ok(p, &["synth", "--lmax", "6", "--spectrum", "s.csv", "--component", "E", "--seed", "2", "--out", "e.json"]);
}
