use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bcsgl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcsgl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run bcsgl")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: &Path, col: usize) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

const GAUSSIAN: &str = "pipeline = tc\npotential = gaussian:1:1\nmu = 1\n";

#[test]
fn tc_run_matches_snapshot_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), GAUSSIAN).unwrap();
    for out in ["a", "b"] {
        let o = bcsgl(dir.path(), &["--config", "run.cfg", "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["results.json", "eigenvalue_trace.csv", "gap_profile.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    let r = json(&dir.path().join("a/results.json"));
    let beta_c = r["beta_c"].as_f64().unwrap();
    assert!((beta_c - 13.599910222200501).abs() < 1e-9 * beta_c, "beta_c = {beta_c}");
    assert_eq!(r["T_c"].as_f64().unwrap(), 1.0 / beta_c);
    assert!(r["spectral_gap"].as_f64().unwrap() > 0.0);
    assert_eq!(r["pipeline"], "tc");
    assert_eq!(r["potential"], "gaussian");
}

#[test]
fn csv_and_json_agree_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let o = bcsgl(dir.path(), &["tc", "--potential", "gaussian:1:1", "--mu", "1", "--out", "o"]);
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("o/results.json"));
    let n = r["grid_size"].as_f64().unwrap() as usize;
    let p = csv_column(&dir.path().join("o/gap_profile.csv"), 0);
    let t = csv_column(&dir.path().join("o/gap_profile.csv"), 1);
    assert_eq!(p.len(), n);
    let jp: Vec<f64> = r["p"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let jt: Vec<f64> = r["t"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(p, jp);
    assert_eq!(t, jt);
    // re-serializing the parsed document reproduces the file
    let text = fs::read_to_string(dir.path().join("o/results.json")).unwrap();
    assert_eq!(format!("{}\n", serde_json::to_string_pretty(&r).unwrap()), text);
}

#[test]
fn svg_only_when_requested() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["tc", "--potential", "gaussian:1:1", "--mu", "1"];
    let o = bcsgl(dir.path(), &[&base[..], &["--out", "plain"]].concat());
    assert_eq!(code(&o), 0);
    let o = bcsgl(dir.path(), &[&base[..], &["--out", "plots", "--format", "json,svg"]].concat());
    assert_eq!(code(&o), 0);
    let svgs = |d: &str| {
        fs::read_dir(dir.path().join(d))
            .unwrap()
            .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
            .count()
    };
    assert_eq!(svgs("plain"), 0);
    assert_eq!(svgs("plots"), 2);
    assert!(!dir.path().join("plots/gap_profile.csv").exists());
    assert!(dir.path().join("plots/results.json").exists());
}

#[test]
fn gl_field_line_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let o = bcsgl(dir.path(), &["gl", "--potential", "gaussian:1:1", "--mu", "1", "--B", "0,0.001,0.01", "--out", "o"]);
    assert_eq!(code(&o), 0);
    let tc = csv_column(&dir.path().join("o/tc_field.csv"), 1);
    assert_eq!(tc.len(), 3);
    assert!(tc.windows(2).all(|w| w[1] < w[0]), "{tc:?}");
    let r = json(&dir.path().join("o/results.json"));
    let rel = (r["slope"].as_f64().unwrap() / r["slope_appendix"].as_f64().unwrap() - 1.0).abs();
    assert!(rel < 1e-12);
}

#[test]
fn whh_report_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = bcsgl(dir.path(), &["whh", "--potential", "gaussian:0.6:1", "--mu", "1", "--out", "o"]);
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("o/results.json"));
    for k in ["gamma1", "gamma2", "beta_c_mu", "Gp0", "Gpp0", "slope_exact", "slope_whh_leading", "slope_whh_corrected", "relative_gap"] {
        assert!(r[k].is_f64(), "{k}");
    }
    let recomputed = r["slope_exact"].as_f64().unwrap() / r["slope_whh_corrected"].as_f64().unwrap() - 1.0;
    assert_eq!(recomputed, r["relative_gap"].as_f64().unwrap());
}

#[test]
fn landau_spectrum_rows_cover_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("l.cfg"), "pipeline = landau\ndensity = gaussian:1\nk_max = 40\nn_p3 = 6\nlandau_B = 0.01,0.1\n").unwrap();
    let o = bcsgl(dir.path(), &["--config", "l.cfg", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = csv_column(&dir.path().join("o/landau_spectrum.csv"), 4);
    assert_eq!(r.len(), 2 * 41 * 6);
    assert!(r.iter().all(|v| v.abs() < 1.0));
    let res = json(&dir.path().join("o/results.json"));
    assert!(res["fitted_c"].as_array().unwrap().iter().all(|c| c.as_f64().unwrap() > 0.0));
}

#[test]
fn tabulated_potential_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("# r  V(r)\n");
    for i in 0..=900 {
        let r = 0.01 * i as f64;
        table.push_str(&format!("{r} {:e}\n", (-0.5 * r * r).exp()));
    }
    fs::write(dir.path().join("v.dat"), table).unwrap();
    let o = bcsgl(dir.path(), &["tc", "--table", "v.dat", "--mu", "1", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("o/results.json"));
    assert_eq!(r["potential"], "tabulated");
    let beta_c = r["beta_c"].as_f64().unwrap();
    assert!((beta_c / 13.599910222200501 - 1.0).abs() < 1e-3, "{beta_c}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("both.cfg"), "tc = true\nwhh = true\npotential = gaussian:1:1\nmu = 1\n").unwrap();
    fs::write(d.join("unknown.cfg"), format!("{GAUSSIAN}colour = red\n")).unwrap();
    fs::write(d.join("a_file"), "").unwrap();
    let cases: [(&[&str], i32); 9] = [
        (&["--config", "both.cfg"], 2),
        (&["whh", "--potential", "gaussian:1:1", "--mu", "1", "--config", "both.cfg"], 2),
        (&["tc", "--table", "nowhere.dat", "--mu", "1"], 3),
        (&["tc", "--potential", "gaussian:1:1"], 3),
        (&["--config", "missing.cfg"], 3),
        (&["tc", "--potential", "gaussian:1:1", "--mu", "1", "--out", "a_file/sub"], 4),
        (&["tc", "--potential", "gaussian:0.001:1", "--mu", "1", "--out", "o"], 5),
        (&["--config", "unknown.cfg"], 6),
        (&["tc", "--potential", "gaussian:1", "--mu", "1"], 6),
    ];
    for (args, expected) in cases {
        let o = bcsgl(d, args);
        assert_eq!(code(&o), expected, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = bcsgl(d, &["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("landau_B"));
}

#[test]
fn verify_passes_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = bcsgl(dir.path(), &["verify", "--out", "v"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert_eq!(stdout.matches(" PASS ").count(), 11, "{stdout}");
    let r = json(&dir.path().join("v/results.json"));
    assert_eq!(r["checks_passed"].as_f64(), Some(11.0));
    assert_eq!(csv_column(&dir.path().join("v/verify.csv"), 3), vec![1.0; 11]);
}
