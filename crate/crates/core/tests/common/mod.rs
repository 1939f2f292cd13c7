#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn update_golden() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some_and(|v| v == "1")
}

/// Runs the binary; returns `(exit code, stdout, stderr)`.
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_schottky-lab"))
        .args(args)
        .env_remove("SCHOTTKY_THREADS")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Non-rigid fixture parameters as CLI flags.
pub fn nonrigid_flags() -> Vec<String> {
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture_dir().join("nonrigid.json")).unwrap()).unwrap();
    let p = &v["params"];
    vec![
        "--cantor-depth".into(),
        p["cantor_depth"].to_string(),
        "--window-width".into(),
        p["window"].as_f64().unwrap().to_string(),
        "--margin".into(),
        p["margin"].as_f64().unwrap().to_string(),
    ]
}

/// `(golden name, argv after the global flags)` for every subcommand.
pub fn golden_commands() -> Vec<(String, Vec<String>)> {
    let mut out = Vec::new();
    let mut push = |name: &str, args: &[&str]| {
        out.push((name.to_string(), args.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
    };
    for stem in ["tangent_three", "symmetric_three"] {
        let f = fixture_dir().join(format!("{stem}.json"));
        let f = f.to_str().unwrap();
        let g = |cmd: &str| format!("{stem}/{cmd}");
        push(&g("validate"), &["validate", f]);
        push(&g("measure"), &["measure", f, "--monte-carlo", "20000"]);
        push(&g("orbit"), &["orbit", f, "--min-diam", "0.1", "--list"]);
        push(&g("code-point"), &["code-point", f, "--point", "0.3,-0.2"]);
        push(&g("discreteness-gap"), &["discreteness-gap", f, "--words", "200", "--points", "200"]);
        push(&g("double"), &["double", f, "--index", "0"]);
        push(&g("doubling-seq"), &["doubling-seq", f, "--steps", "3"]);
        push(&g("extend"), &["extend", f, "--map", "mobius", "--samples", "200"]);
        push(&g("beltrami-locate"), &["beltrami", "locate", f, "--point", "0.3,-0.2"]);
        push(&g("beltrami-mu"), &["beltrami", "mu", f, "--window", "-2,-2,2,2", "--resolution", "6"]);
        push(
            &g("beltrami-residual"),
            &["beltrami", "residual", f, "--window", "-2,-2,2,2", "--samples", "200"],
        );
        push(&g("hull-build"), &["hull", "build", f]);
        push(&g("hull-contains"), &["hull", "contains", f, "--point", "0.1,0,0"]);
        push(
            &g("render-svg"),
            &["render-svg", f, "--window", "-3,-3,3,3", "--scale", "60", "--min-diam", "0.1"],
        );
    }
    push("maps/qs-envelope", &["qs-envelope", "--map", "mobius", "--samples", "2000"]);
    push("maps/qm-envelope", &["qm-envelope", "--map", "mobius", "--samples", "2000"]);
    push(
        "maps/dilatation",
        &["dilatation", "--map", "linear", "--matrix", "2,0,0,1", "--point", "0.1,0.2"],
    );
    push("maps/mobius-fit", &["mobius-fit", "--map", "mobius"]);
    push(
        "maps/conformality",
        &["conformality", "--map", "linear", "--matrix", "2,0,0,1", "--point", "0.1,0.2"],
    );
    push("constructions/fat-cantor", &["construct", "fat-cantor", "--depth", "5"]);
    push(
        "constructions/porous",
        &["construct", "porous", "--steps", "3", "--check-points", "40"],
    );
    push("maps/hull-distance", &["hull", "distance", "--from", "0,0", "--to", "0.5,0"]);
    let nr = nonrigid_flags();
    let nr: Vec<&str> = nr.iter().map(String::as_str).collect();
    let with = |head: &[&str]| -> Vec<String> { head.iter().chain(&nr).map(|s| s.to_string()).collect() };
    out.push(("nonrigid/construct".into(), with(&["construct", "nonrigid"])));
    out.push(("nonrigid/extend".into(), with(&["extend", "--map", "nonrigid", "--samples", "200"])));
    out.push((
        "nonrigid/qs-envelope".into(),
        with(&["qs-envelope", "--map", "nonrigid", "--samples", "2000", "--linear-bound", "4"]),
    ));
    out.push(("nonrigid/mobius-fit".into(), with(&["mobius-fit", "--map", "nonrigid"])));
    out
}
