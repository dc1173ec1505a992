use std::path::PathBuf;
use std::process::{Command, Output};

use fermiqit_cli::artifact::{parse_str, to_json, Artifact};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermiqit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fx(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn validate_exit_codes() {
    let o = run(&["validate", &fx("vacuum.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = run(&["validate", &fx("parity_superposition.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parity SSR violated"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"modes":2,"kind":"state","basis":"canonical","entries":[{"row":"101","re":1,"im":0}]}"#)
        .unwrap();
    let o = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("parse error"));
}

#[test]
fn validate_operator_roles() {
    // f + f† is a fine unitary but flips parity
    let o = run(&["validate", "--as", "unitary", &fx("ua_odd.json")]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["validate", "--as", "unitary", &fx("ub_even.json")]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["validate", "--as", "observable", &fx("ub_even.json")]);
    assert_eq!(o.status.code(), Some(3), "not Hermitian");
    let o = run(&["validate", &fx("ssr_invisible_correlation.json")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_are_parse_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["validate", "/nonexistent/file.json"]).status.code(), Some(1));
}

#[test]
fn jw_check_reports_both_entropies() {
    let o = run(&["jw-check", &fx("outer_pair_coherent.json"), "--trace", "2,3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("entropy = 2.0000"));
    assert!(s.contains("entropy = 1.0000"));
}

#[test]
fn nosignal_cases() {
    let o = run(&["nosignal", "--ua", &fx("ua_odd.json"), "--ub", &fx("ub_odd.json")]);
    assert!(stdout(&o).contains("signal_strength = 1.000000"));
    let o = run(&["nosignal", "--ua", &fx("ua_odd.json"), "--ub", "none"]);
    assert!(stdout(&o).contains("signal_strength = 0.000000"));
    let o = run(&["nosignal", "--ua", &fx("ua_odd.json"), "--ub", &fx("ub_even.json")]);
    assert!(stdout(&o).contains("signal_strength = 0.000000"));
}

#[test]
fn empty_trace_echoes_canonical_input() {
    let path = fx("ssr_invisible_correlation.json");
    let o = run(&["ptrace", &path, "--modes", ""]);
    assert!(o.status.success());
    let original = std::fs::read_to_string(&path).unwrap();
    assert_eq!(stdout(&o), to_json(&parse_str(&original).unwrap()));
}

#[test]
fn ptrace_writes_marginal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = run(&["ptrace", &fx("ssr_invisible_correlation.json"), "--modes", "2", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = parse_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let Artifact::Operator(m) = doc.artifact else { panic!("operator expected") };
    assert!((m.matrix()[(0, 0)].re - 0.75).abs() < 1e-12);
    assert!((m.matrix()[(1, 1)].re - 0.25).abs() < 1e-12);
}

#[test]
fn schmidt_and_entropy() {
    let o = run(&["schmidt", &fx("pair_entangled.json"), "--partition", "1,2"]);
    let s = stdout(&o);
    assert!(s.contains("schmidt_number = 2"));
    assert!(s.contains("entropy = 1.000000"));
    let o = run(&["entropy", &fx("vacuum.json")]);
    assert_eq!(stdout(&o).trim(), "entropy = 0.000000");
}

#[test]
fn purify_then_trace_recovers_state() {
    let dir = tempfile::tempdir().unwrap();
    let pure = dir.path().join("p.json");
    let o = run(&["purify", &fx("ssr_invisible_correlation.json"), "-o", pure.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(run(&["validate", pure.to_str().unwrap()]).status.code(), Some(0));
    let o = run(&["ptrace", pure.to_str().unwrap(), "--modes", "3,4"]);
    let Artifact::Operator(back) = parse_str(&stdout(&o)).unwrap().artifact else { panic!() };
    let orig = std::fs::read_to_string(fixture("ssr_invisible_correlation.json")).unwrap();
    let Artifact::Operator(rho) = parse_str(&orig).unwrap().artifact else { panic!() };
    assert!(back.max_deviation(&rho).unwrap() < 1e-10);
}

#[test]
fn channel_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    let ch = fx("damping.json");
    assert!(run(&["channel", "choi", &ch, "-o", &p("choi.json")]).status.success());
    assert!(run(&["channel", "kraus", &p("choi.json"), "-o", &p("k1.json")]).status.success());
    assert!(run(&["channel", "dilate", &ch, "-o", &p("dil.json")]).status.success());
    assert!(run(&["channel", "kraus", &p("dil.json"), "-o", &p("k2.json")]).status.success());
    for f in ["k1.json", "k2.json", "dil.json"] {
        let o = run(&["channel", "verify", &p(f)]);
        assert!(o.status.success(), "{f}: {}", stderr(&o));
    }
    // all three forms send |1⟩⟨1| to the same output
    let one = dir.path().join("one.json");
    std::fs::write(&one, r#"{"modes":1,"kind":"state","basis":"canonical","entries":[{"row":"1","re":1,"im":0}]}"#)
        .unwrap();
    let outs: Vec<String> = [ch.clone(), p("k1.json"), p("dil.json")]
        .iter()
        .map(|c| stdout(&run(&["channel", "apply", c, "--input", one.to_str().unwrap()])))
        .collect();
    let mats: Vec<_> = outs
        .iter()
        .map(|s| match parse_str(s).unwrap().artifact {
            Artifact::Operator(o) => o,
            _ => panic!(),
        })
        .collect();
    assert!((mats[0].matrix()[(0, 0)].re - 0.3).abs() < 1e-12);
    assert!(mats[1].max_deviation(&mats[0]).unwrap() < 1e-9);
    assert!(mats[2].max_deviation(&mats[0]).unwrap() < 1e-9);
}

#[test]
fn dilation_env_size_is_checked() {
    let o = run(&["channel", "dilate", &fx("damping.json"), "--env-modes", "0"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn mixed_block_channel_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.json");
    std::fs::write(
        &f,
        r#"{"modes":1,"kind":"channel","basis":"canonical","operators":[{"entries":[
            {"row":"0","col":"0","re":0.6,"im":0},{"row":"1","col":"0","re":0.6,"im":0}]}]}"#,
    )
    .unwrap();
    assert_eq!(run(&["validate", f.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_is_reproducible_under_seed() {
    let a = stdout(&run(&["--seed", "7", "channel", "verify", &fx("damping.json")]));
    let b = stdout(&run(&["--seed", "7", "channel", "verify", &fx("damping.json")]));
    assert_eq!(a, b);
}
