//! End-to-end runs of the `cei` binary.

use std::process::Command;

use cei_cli::read_samples;

fn cei() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cei"))
}

#[test]
fn list_prints_registry() {
    let out = cei().args(["list", "--json"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"discrete-exact-theorem22"));
    assert!(names.contains(&"range-equals-excursion-max"));
}

#[test]
fn sample_then_transform() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("b.csv");
    let st = cei()
        .args([
            "sample",
            "--process",
            "bridge",
            "--n",
            "64",
            "--paths",
            "20",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&raw)
        .status()
        .unwrap();
    assert!(st.success());
    let (meta, paths) = read_samples(&raw).unwrap();
    assert_eq!((meta.n, meta.master_seed, paths.len()), (64, 3, 20));

    let ver = dir.path().join("v.json");
    let st = cei()
        .args(["transform", "--op", "vervaat", "--format", "json", "--input"])
        .arg(&raw)
        .arg("--out")
        .arg(&ver)
        .status()
        .unwrap();
    assert!(st.success());
    let (_, out) = read_samples(&ver).unwrap();
    assert_eq!(out.len(), 20);
    assert!(out.iter().all(|p| p.values().iter().all(|v| *v >= 0.0)));

    let cond = dir.path().join("c.csv");
    let st = cei()
        .args([
            "transform",
            "--op",
            "condition-min",
            "--interval",
            "-0.4,-0.1",
            "--seed",
            "1",
            "--input",
        ])
        .arg(&raw)
        .arg("--out")
        .arg(&cond)
        .status()
        .unwrap();
    assert!(st.success());
    let (_, out) = read_samples(&cond).unwrap();
    assert!(out.iter().all(|p| p.minimum() > -0.4 && p.minimum() <= -0.1));
}

#[test]
fn sample_each_process() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["--process", "bm"],
        &["--process", "ei", "--sigma", "1", "--betas", "0.6,-0.4,0.3"],
        &["--process", "bessel3"],
        &["--process", "bessel3-bridge", "--x", "1"],
        &["--process", "signed-bm"],
        &["--process", "walk", "--increments", "1,1,-1,-1"],
    ];
    for args in cases {
        let f = dir.path().join("s.csv");
        let st = cei()
            .arg("sample")
            .args(*args)
            .args(["--n", "64", "--paths", "5", "--out"])
            .arg(&f)
            .status()
            .unwrap();
        assert!(st.success(), "{args:?}");
    }
}

#[test]
fn verify_exit_code_follows_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = cei()
        .args(["verify", "reflected-identity", "--n", "128", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], true);
    assert!(dir.path().join("reflected-identity.report.json").exists());

    // the literal first-passage shift keeps the 0 endpoint, so it cannot match a bridge to x = 1
    let out = cei()
        .args(["verify", "bessel3-first-passage", "--paths", "1000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = cei().args(["verify", "no-such-experiment"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "n = 128\npaths = 300\nseed = 11\n").unwrap();
    let run = |extra: &[&str]| {
        let out = cei()
            .args(["verify", "nu-uniformity", "--config"])
            .arg(&cfg)
            .args(extra)
            .output()
            .unwrap();
        serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()
    };
    let a = run(&[]);
    assert_eq!((a["seed"].as_u64(), a["n_samples"][0].as_u64()), (Some(11), Some(300)));
    let b = run(&["--seed", "12", "--interval", "(-0.5,-0.2]"]);
    assert_eq!(b["seed"].as_u64(), Some(12));

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let out = cei()
        .args(["verify", "nu-uniformity", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
