use std::io::Write;
use std::process::{Command, Output};

fn wfoms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wfoms")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(suffix: &str, body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

#[test]
fn counts_presets() {
    for (args, want) in [
        (vec!["count", "--preset", "graphs-no-isolated", "--size", "5"], "768"),
        (vec!["count", "--preset", "kregular", "--k", "2", "--size", "5"], "12"),
        (vec!["count", "--preset", "derangements", "--size", "5"], "44"),
        (vec!["count", "--preset", "functions", "--size", "3", "--counter", "brute"], "27"),
    ] {
        let o = wfoms(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout(&o).trim(), want, "{args:?}");
    }
}

#[test]
fn counts_files_with_exact_rationals() {
    let f = file(".wfoms", "domain: 2\nsentence: forall x: (P(x) | Q(x))\nweight: P 1/3 1\n");
    let o = wfoms(&["count", f.path().to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "25/9");
    let o = wfoms(&["count", f.path().to_str().unwrap(), "--size", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["wfomc"], "5/3");
}

#[test]
fn reads_mln_files() {
    let f = file(".mln", "domain: 3\ninf fr(x,y) -> fr(y,x)\ninf exists y: fr(x,y)\n2 sm(x)\n");
    let o = wfoms(&["sample", f.path().to_str().unwrap(), "-n", "5", "--validate", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5);
    assert!(!out.contains("__"), "auxiliaries leak: {out}");
}

#[test]
fn sampling_is_reproducible_and_job_independent() {
    let args = ["sample", "--preset", "permutations", "--size", "4", "-n", "3", "--seed", "7"];
    let a = stdout(&wfoms(&args));
    let b = stdout(&wfoms(&args));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 3);
    for line in a.lines() {
        assert_eq!(line.split_whitespace().count(), 4, "{line}");
    }
    let mut jobs = args.to_vec();
    jobs.extend(["--jobs", "3"]);
    assert_eq!(stdout(&wfoms(&jobs)), a);
}

#[test]
fn json_samples_parse() {
    let o = wfoms(&["sample", "--preset", "friends-smokers", "--size", "5", "-n", "2", "--format", "json", "--validate"]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let atoms = v["model"].as_array().unwrap();
        for person in 1..=5 {
            let has_friend = atoms.iter().any(|a| a.as_str().unwrap().starts_with(&format!("fr({person},")));
            assert!(has_friend, "{line}");
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(wfoms(&["sample", "--preset", "kregular", "--k", "3", "--size", "5"]).status.code(), Some(2));
    let o = wfoms(&["count", "--preset", "kregular", "--k", "3", "--size", "5"]);
    assert_eq!(stdout(&o).trim(), "0");
    assert_eq!(wfoms(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(wfoms(&["count"]).status.code(), Some(1));
    assert_eq!(wfoms(&["count", "--preset", "nope"]).status.code(), Some(1));
    let bad = file(".wfoms", "domain: 2\nsentence: forall x: P(x\n");
    let o = wfoms(&["count", bad.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(wfoms(&["--help"]).status.code(), Some(0));
    let big = wfoms(&["test", "uniformity", "--preset", "graphs-no-isolated", "--size", "7"]);
    assert_eq!(big.status.code(), Some(1));
}

#[test]
fn self_tests_pass() {
    let o = wfoms(&["test", "uniformity", "--preset", "functions", "--size", "3", "--samples", "2700", "--alpha", "0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS"));

    let o = wfoms(&["test", "oracle", "--preset", "graphs-no-isolated", "--size", "4", "-n", "30", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["count"], "41");

    let o = wfoms(&["test", "countdist", "--preset", "employment", "--size", "4", "-n", "3000", "--opt-exists-projection"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn preset_catalog() {
    let o = wfoms(&["preset", "list"]);
    let names: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    assert!(names.contains(&"friends-smokers".to_string()));
    assert_eq!(names.len(), 8);
    let o = wfoms(&["preset", "describe", "friends-smokers"]);
    assert!(stdout(&o).contains("6107/5000"));
    let o = wfoms(&["preset", "describe", "kregular", "--k", "3"]);
    assert!(stdout(&o).contains("exists_{=3}"));
}

#[test]
fn unknown_sampler_is_a_usage_error() {
    let o = wfoms(&["sample", "--preset", "functions", "--size", "3", "--sampler", "gibbs"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("wms"));
    let o = wfoms(&["sample", "--preset", "functions", "--size", "3", "--sampler", "ideal", "-n", "2"]);
    assert_eq!(o.status.code(), Some(0));
}
