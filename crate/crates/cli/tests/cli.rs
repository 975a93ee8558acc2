use std::path::Path;
use std::process::Command;

use pipedream_cli::run;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn pipedream(cache: &Path, args: &[&str]) -> Output {
    let mut argv = vec!["pipedream", "--cache", cache.to_str().unwrap()];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn cache_file() -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nu.jsonl");
    (dir, path)
}

#[test]
fn nu_and_coeff() {
    let (_dir, cache) = cache_file();
    let o = pipedream(&cache, &["nu", "--perm", "1243"]);
    assert_eq!((o.code, o.stdout.as_str()), (0, "b^2+3b+3\n"));
    assert_eq!(pipedream(&cache, &["nu", "--perm", "1243", "--at", "1"]).stdout, "7\n");
    assert_eq!(pipedream(&cache, &["coeff", "--perm", "1243"]).stdout, "b^2+b\n");
    assert_eq!(pipedream(&cache, &["coeff", "--perm", "1243", "--mode", "ie"]).stdout, "b^2+b\n");
    assert_eq!(pipedream(&cache, &["coeff", "--perm", "1432", "--at", "0"]).stdout, "1\n");
    let text = std::fs::read_to_string(&cache).unwrap();
    assert!(text.contains(r#"{"word":"1243","nu_coeffs":[3,3,1],"schema_version":1}"#));
}

#[test]
fn grothendieck_polynomial() {
    let (_dir, cache) = cache_file();
    assert_eq!(pipedream(&cache, &["poly", "--perm", "132"]).stdout, "x1+x2+b*x1*x2\n");
    assert_eq!(pipedream(&cache, &["poly", "--perm", "21"]).stdout, "x1\n");
    assert_eq!(pipedream(&cache, &["poly", "--perm", "123"]).stdout, "1\n");
}

#[test]
fn enumerate_and_render() {
    let (_dir, cache) = cache_file();
    let o = pipedream(&cache, &["enumerate", "--perm", "1243", "--kind", "bpd"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout.split("\n\n").count(), 3);
    let o = pipedream(&cache, &["enumerate", "--perm", "1243", "--format", "json"]);
    assert_eq!(o.stdout.lines().count(), 4);
    let o = pipedream(&cache, &["enumerate", "--perm", "2164753", "--subword", "1,2,5,6,7", "--kind", "bpd"]);
    assert_eq!(o.code, 0);
    assert!(!o.stdout.is_empty());

    let o = pipedream(&cache, &["render", "--perm", "1243", "--index", "4", "--resolved"]);
    assert_eq!(o.stdout, "..r-\n.rb-\nr+jr\n||r+\n");
    let o = pipedream(&cache, &["render", "--perm", "21", "--index", "1", "--format", "svg"]);
    assert!(o.stdout.starts_with("<svg"));
    let o = pipedream(&cache, &["render", "--perm", "21", "--index", "2"]);
    assert_eq!(o.code, 2);
}

#[test]
fn verify_and_maxima() {
    let (_dir, cache) = cache_file();
    let o = pipedream(&cache, &["verify", "thm-1243", "--n", "5"]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    assert!(o.stdout.ends_with("result     PASS\n"));
    let o = pipedream(&cache, &["verify", "upper-bound", "--n", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["failure_count"], 0);

    let o = pipedream(&cache, &["maxima", "--n", "5", "--beta", "1", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["max_nu"], 71);
    assert_eq!(v["max_c"], 44);
    assert_eq!(v["argmax_nu"], serde_json::json!(["12543", "21543"]));
}

#[test]
fn usage_errors_exit_2() {
    let (_dir, cache) = cache_file();
    for args in [
        &["nu", "--perm", "122"][..],
        &["verify", "no-such-check", "--n", "3"],
        &["verify", "bk-order", "--n", "12"],
        &["enumerate", "--perm", "123", "--kind", "mBPD", "--subword", "1"],
        &["frobnicate"],
    ] {
        let o = pipedream(&cache, args);
        assert_eq!(o.code, 2, "{args:?}: {}", o.stderr);
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(pipedream(&cache, &["--help"]).code, 0);
}

#[test]
fn output_is_deterministic() {
    let (_dir, cache) = cache_file();
    for args in [
        &["enumerate", "--perm", "13254", "--format", "json"][..],
        &["verify", "skew", "--n", "4"],
        &["maxima", "--n", "6"],
        &["poly", "--perm", "1432"],
    ] {
        assert_eq!(pipedream(&cache, args).stdout, pipedream(&cache, args).stdout);
    }
}

#[test]
fn cache_subcommands() {
    let (_dir, cache) = cache_file();
    let o = pipedream(&cache, &["cache", "path"]);
    assert_eq!(o.stdout.trim(), cache.to_str().unwrap());
    pipedream(&cache, &["nu", "--perm", "21"]);
    assert!(cache.exists());
    pipedream(&cache, &["cache", "clear"]);
    assert!(!cache.exists());
    pipedream(&cache, &["--no-cache", "nu", "--perm", "21"]);
    assert!(!cache.exists());
}

#[test]
fn binary_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_pipedream");
    let out = Command::new(bin)
        .args(["verify", "thm-1243", "--n", "5"])
        .env("PIPEDREAM_CACHE", dir.path().join("nu.jsonl"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(bin).args(["nu"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(bin)
        .args(["cache", "path"])
        .env("PIPEDREAM_CACHE", "/some/where.jsonl")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "/some/where.jsonl\n");
}
