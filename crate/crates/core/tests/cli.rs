use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use commroles::pipeline::{pipeline_outputs, Manifest, MANIFEST_FILE};
use commroles::report::check_bundle_consistency;

fn commroles(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commroles"))
        .args(args)
        .env("COMMROLES_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = commroles(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Four blocks of 50 plus two low in-degree capitalists.
fn fixture(dir: &Path) -> std::path::PathBuf {
    let spec = dir.join("spec.txt");
    fs::write(
        &spec,
        "blocks=50*4\np_in=0.3\np_out=0.01\nseed=5\ncapitalist=0,120,1.5,1.0\ncapitalist=2,150,0.5,1.0\n",
    )
    .unwrap();
    let synth = dir.join("synth");
    ok(&["synth", "--spec", s(&spec), "--out-dir", s(&synth)]);
    synth.join("graph.txt")
}

#[test]
fn pipeline_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = fixture(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        ok(&["pipeline", "--input", s(&graph), "--out-dir", s(dir), "--seed", "3", "--k-max", "6"]);
    }
    for file in pipeline_outputs() {
        let (x, y) = (fs::read(a.join(&file)).unwrap(), fs::read(b.join(&file)).unwrap());
        assert!(x == y, "{file} differs");
    }
    let read = |d: &Path| Manifest::parse(fs::read(d.join(MANIFEST_FILE)).unwrap().as_slice()).unwrap();
    let (ma, mb) = (read(&a), read(&b));
    assert_eq!(ma.entries, mb.entries);
    assert_eq!(ma.digests, mb.digests);
    assert_eq!(ma.get("param.seed"), Some("3"));
    assert_eq!(ma.get("param.k_max"), Some("6"));
    assert_eq!(ma.get("param.family"), Some("generalized"));
    assert!(ma.timings.iter().any(|(stage, _)| stage == "communities"));
    assert_eq!(ma.digests.len(), pipeline_outputs().len());
    check_bundle_consistency(&a.join("report"), 200).unwrap();
    let summary = fs::read_to_string(a.join("report/summary.txt")).unwrap();
    assert!(summary.contains("nodes 200"));
    assert!(summary.contains("capitalists low 0 high 0"));
}

#[test]
fn stages_run_standalone() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = fixture(tmp.path());
    let work = tmp.path().join("work");
    let w = s(&work);
    ok(&["communities", "--input", s(&graph), "--out-dir", w, "--seed", "1"]);
    ok(&["measures", "--input", s(&graph), "--out-dir", w, "--family", "generalized"]);
    let header = fs::read_to_string(work.join("measures.csv")).unwrap();
    let header = header.lines().next().unwrap();
    assert_eq!(header, "node_label,I_int_in,I_int_out,I_ext_in,I_ext_out,D_in,D_out,H_in,H_out");
    ok(&["capitalists", "--input", s(&graph), "--out-dir", w]);
    ok(&["roles-threshold", "--input", s(&graph), "--out-dir", w]);
    ok(&["roles-cluster", "--out-dir", w, "--k-max", "5", "--restarts", "2"]);
    let names = tmp.path().join("names.txt");
    fs::write(&names, "0 first role\n").unwrap();
    ok(&["report", "--input", s(&graph), "--out-dir", w, "--cluster-names", s(&names)]);
    check_bundle_consistency(&work.join("report"), 200).unwrap();
    let roles = fs::read_to_string(work.join("report/roles.csv")).unwrap();
    assert!(roles.contains(",first role,"));
    let caps = fs::read_to_string(work.join("capitalists.csv")).unwrap();
    assert_eq!(caps.lines().filter(|l| l.contains(",low_in_degree,")).count(), 0);

    ok(&["measures", "--input", s(&graph), "--out-dir", w, "--family", "directed"]);
    let header = fs::read_to_string(work.join("measures.csv")).unwrap();
    assert!(header.starts_with("node_label,z_in,z_out,P_in,P_out\n"));
}

#[test]
fn report_without_roles_names_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = fixture(tmp.path());
    let work = tmp.path().join("work");
    ok(&["communities", "--input", s(&graph), "--out-dir", s(&work)]);
    ok(&["measures", "--input", s(&graph), "--out-dir", s(&work)]);
    let out = commroles(&["report", "--input", s(&graph), "--out-dir", s(&work)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error[missing-input]:"), "{err}");
    assert!(err.contains("roles.txt"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn errors_are_categorized() {
    let tmp = tempfile::tempdir().unwrap();
    let out = commroles(&["communities", "--input", "/nonexistent/graph.txt", "--out-dir", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/graph.txt"));

    let bad = tmp.path().join("bad.txt");
    fs::write(&bad, "1 2\nthree 4\n").unwrap();
    let out = commroles(&["communities", "--input", s(&bad), "--out-dir", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[format]:"));

    let out = commroles(&["communities", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let out = commroles(&["pipeline", "--input", s(&bad), "--out-dir", s(tmp.path()), "--k-min", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[usage]:"));

    let spec = tmp.path().join("spec.txt");
    fs::write(&spec, "blocks=5\np_in=0.5\np_out=0\ncapitalist=0,9,1,1\n").unwrap();
    let out = commroles(&["synth", "--spec", s(&spec), "--out-dir", s(tmp.path())]);
    assert!(!out.status.success());
}
