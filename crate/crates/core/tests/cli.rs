use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn abridge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abridge"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let out = abridge(d.path(), &["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
    let out = abridge(d.path(), &["verify", "--suite", "tails", "--set", "novalue"]);
    assert_eq!(out.status.code(), Some(2));
    let out = abridge(d.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_writes_curves_and_manifest_deterministically() {
    let args = [
        "sample", "--kind", "bridge", "--a", "0", "--b", "1", "--x", "0", "--y", "0", "--grid", "512", "--n-samples", "100",
        "--seed", "7", "--out", "out",
    ];
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(abridge(d1.path(), &args).status.code(), Some(0));
    assert_eq!(abridge(d2.path(), &args).status.code(), Some(0));
    let s1 = fs::read_to_string(d1.path().join("out/samples.txt")).unwrap();
    let s2 = fs::read_to_string(d2.path().join("out/samples.txt")).unwrap();
    assert_eq!(s1, s2);
    assert_eq!(s1.lines().filter(|l| l.starts_with('#')).count(), 100);
    assert_eq!(s1.lines().count(), 100 * 514);
    let m = fs::read_to_string(d1.path().join("out/manifest.txt")).unwrap();
    assert!(m.contains("seed = 7\n") && m.contains("result.ensembles = 100\n"));
}

#[test]
fn avoid_sample_reports_acceptance() {
    let d = tempfile::tempdir().unwrap();
    let out = abridge(d.path(), &["sample", "--kind", "avoid", "--k", "2", "--grid", "64", "--n-samples", "5", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = fs::read_to_string(d.path().join("o/manifest.txt")).unwrap();
    assert!(m.lines().any(|l| l.starts_with("result.acceptance_rate = ")));
}

#[test]
fn bad_sample_parameters_exit_nonzero() {
    let d = tempfile::tempdir().unwrap();
    let out = abridge(d.path(), &["sample", "--kind", "avoid", "--x", "0,1", "--y", "1,0", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn enumeration_matches_golden_columns() {
    let d = tempfile::tempdir().unwrap();
    let out = abridge(d.path(), &["enumerate", "--steps", "2", "--x-heights", "0", "--y-heights", "0", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let got = fs::read_to_string(d.path().join("o/enumeration.txt")).unwrap();
    let golden = "\
# k=1 M=2 a=0 b=1
0,0
0.5,-0.8660254037844386
1,0
# k=1 M=2 a=0 b=1
0,0
0.5,0
1,0
# k=1 M=2 a=0 b=1
0,0
0.5,0.8660254037844386
1,0
";
    assert_eq!(got, golden);
    let m = fs::read_to_string(d.path().join("o/manifest.txt")).unwrap();
    assert!(m.contains("result.configurations = 3\n"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("run.cfg"), "# walk-exact smoke run\nsuite = walk-exact\nmax_steps = 2\nsamples_per_endpoint = 300\nseed = 4\n").unwrap();
    let out = abridge(d.path(), &["verify", "--config", "run.cfg", "--seed", "5", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let m = fs::read_to_string(d.path().join("o/walk-exact.manifest")).unwrap();
    assert!(m.contains("seed = 5\n") && m.contains("result.verdict = PASS\n"));
    assert!(d.path().join("o/walk-exact.csv").exists());
}

#[test]
fn planted_hidden_curve_is_reported() {
    let d = tempfile::tempdir().unwrap();
    let out = abridge(d.path(), &["verify", "--suite", "detect", "--planted", "hidden", "--seed", "3", "--set", "seeds=2", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("HIDDEN_CURVE"), "{text}");
    assert!(text.contains("SUITE detect: PASS"));
}
