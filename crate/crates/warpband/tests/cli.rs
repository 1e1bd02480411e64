use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use warpband::tables::{read_csv, CheckRow, CurveRow, EigenRow, NodeRow, PlotRow, ProfileRow, RiccatiRow};
use warpband_core::sweep::SweepRow;

fn warpband(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpband"))
        .args(args)
        .current_dir(dir)
        .env_remove("WARPBAND_OUT_DIR")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn payload(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["payload"].clone()
}

fn write_band(dir: &Path, length: f64, n: usize) {
    let (du, dv) = (length / n as f64, std::f64::consts::TAU / n as f64);
    let mut text = format!("# flat cylinder\nband {n} {n} cylinder\n");
    for _ in 0..n * n {
        text.push_str(&format!("{} 0 {}\n", du * du, dv * dv));
    }
    std::fs::write(dir.join("band.txt"), text).unwrap();
}

#[test]
fn model_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = warpband(
        d,
        &[
            "model",
            "--family",
            "cos",
            "--n",
            "7",
            "--l-minus",
            "-0.2",
            "--l-plus",
            "0.2",
            "--out",
            "m.csv",
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let rows: Vec<ProfileRow> = read_csv(&d.join("m.csv")).unwrap();
    assert_eq!(rows.len(), 201);
    assert!(rows.iter().all(|r| (r.scalar - 42.0).abs() < 1e-9));

    let out = warpband(
        d,
        &[
            "model", "--family", "const", "--n", "5", "--out", "c.csv", "--format", "csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let rows: Vec<ProfileRow> = read_csv(&d.join("c.csv")).unwrap();
    assert!(rows.iter().all(|r| r.h == 0.0 && r.scalar == 0.0));

    let out = warpband(d, &["model", "--family", "cos", "--n", "7", "--l-plus", "0.5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cos model"));
}

#[test]
fn width_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p = payload(&warpband(
        d,
        &[
            "width",
            "--n",
            "7",
            "--sigma",
            "42",
            "--h-minus",
            "-1e6",
            "--h-plus",
            "-1e6",
        ],
    ));
    let w = p["verdict"]["kind"]["width"].as_f64().unwrap();
    assert!((w - 0.8976).abs() < 1e-4, "{w}");

    let p = payload(&warpband(
        d,
        &["width", "--n", "4", "--sigma", "12", "--h-minus", "0", "--h-plus", "0"],
    ));
    assert_eq!(p["verdict"]["kind"]["width"].as_f64(), Some(0.0));

    let p = payload(&warpband(
        d,
        &[
            "width",
            "--n",
            "4",
            "--sigma",
            "-12",
            "--h-minus",
            "-4",
            "--h-plus",
            "2",
        ],
    ));
    assert_eq!(p["verdict"]["kind"]["kind"], "infinite");
    assert!(p["closed_form"].is_null());

    let out = warpband(
        d,
        &[
            "width",
            "--n",
            "3",
            "--sigma",
            "6",
            "--h-minus",
            "-inf",
            "--h-plus",
            "-1",
            "--emit-profile",
            "--out",
            "w.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let rows: Vec<RiccatiRow> = read_csv(&d.join("w_profile.csv")).unwrap();
    assert_eq!(rows.len(), 201);
    assert!(rows.windows(2).all(|w| w[1].h <= w[0].h));

    let out = warpband(
        d,
        &["width", "--n", "1", "--sigma", "1", "--h-minus", "0", "--h-plus", "0"],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn bubble_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p = payload(&warpband(
        d,
        &["bubble", "--band", "cylinder:2,1,128,128", "--h", "tan:1.6"],
    ));
    let rows: Vec<i64> = p["chains"][0]["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v[0].as_i64().unwrap())
        .collect();
    assert!(rows.iter().all(|&i| (i - 64).abs() <= 2));

    let p = payload(&warpband(
        d,
        &[
            "bubble",
            "--band",
            "cylinder:2,1,16,16",
            "--h",
            "const:0",
            "--oracle",
            "exhaustive-monotone",
        ],
    ));
    assert!((p["value"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-10);
    assert_eq!(p["oracle"]["exact"], true);

    write_band(d, 3.0, 24);
    let out = warpband(
        d,
        &[
            "bubble",
            "--band",
            "file:band.txt",
            "--h",
            "model:cos,n=2",
            "--map",
            "lipschitz:0.25",
            "--plot",
            "--out",
            "f.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(d.join("f.json")).unwrap()).unwrap();
    let p = &v["payload"];
    assert!(p["structural"]["segments_checked"].as_u64().unwrap() > 0);
    assert!(p["stability"]["lambda1"].is_f64());
    let plot: Vec<PlotRow> = read_csv(&d.join("f_plot.csv")).unwrap();
    assert!(plot.iter().any(|r| r.tag.starts_with("bubble:")));

    let out = warpband(
        d,
        &[
            "bubble",
            "--band",
            "warped:cos,2,-0.5,0.5,32,32",
            "--h",
            "model:cos,n=2",
            "--format",
            "csv",
            "--out",
            "nodes.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let nodes: Vec<NodeRow> = read_csv(&d.join("nodes.csv")).unwrap();
    assert_eq!(nodes.len(), 32);

    let out = warpband(
        d,
        &[
            "bubble",
            "--band",
            "cylinder:2,1,8,8",
            "--h",
            "const:0",
            "--u-field",
            "ramp:1,2",
            "--anchor",
            "rows:2",
            "--oracle",
            "exhaustive-monotone",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn spectrum_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p = payload(&warpband(d, &["spectrum", "--uniform", "256"]));
    assert!(p["lambda1"].as_f64().unwrap().abs() < 1e-8);
    assert_eq!(p["verdict"], "zero");

    let out = warpband(
        d,
        &[
            "spectrum",
            "--uniform",
            "64",
            "--potential",
            "const:-1",
            "--format",
            "csv",
            "--out",
            "e.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let rows: Vec<EigenRow> = read_csv(&d.join("e.csv")).unwrap();
    assert_eq!(rows.len(), 64);
    let curve: Vec<CurveRow> = rows
        .iter()
        .map(|r| CurveRow {
            length: r.length,
            potential: r.potential,
        })
        .collect();
    std::fs::write(d.join("curve.csv"), warpband::tables::to_csv(&curve).unwrap()).unwrap();
    let p = payload(&warpband(d, &["spectrum", "--curve", "curve.csv"]));
    assert!((p["lambda1"].as_f64().unwrap() + 1.0).abs() < 1e-8);
    assert_eq!(p["verdict"], "obstructed");

    std::fs::write(d.join("bad.csv"), "length,potential\n0.1,zero\n").unwrap();
    assert_eq!(code(&warpband(d, &["spectrum", "--curve", "bad.csv"])), 2);
    assert_eq!(code(&warpband(d, &["spectrum"])), 2);
}

#[test]
fn sweep_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "sweep",
        "--n",
        "3,5",
        "--sigma",
        "-4:4:5",
        "--h-minus",
        "-inf",
        "--h-plus",
        "-2:2:3",
        "--format",
        "csv",
    ];
    let one = warpband(d, &args);
    let four = warpband(d, &[&args[..], &["--jobs", "4"]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    std::fs::write(d.join("s.csv"), &one.stdout).unwrap();
    let rows: Vec<SweepRow> = read_csv(&d.join("s.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 5 * 3);

    std::fs::write(d.join("grid.toml"), "[sweep]\nn = [4]\nsigma = { start = 1.0, end = 2.0, count = 2 }\nh_minus = { start = -inf, end = -inf, count = 1 }\nh_plus = { start = -inf, end = -inf, count = 1 }\n").unwrap();
    let p = payload(&warpband(d, &["sweep", "--config", "grid.toml"]));
    assert_eq!(p["points"], 2);
    assert_eq!(code(&warpband(d, &["sweep", "--n", "3"])), 2);

    let p = payload(&warpband(
        d,
        &["compare", "--first", "power,n=3", "--second", "power,n=3"],
    ));
    assert_eq!(p["verdict"]["verdict"], "equality_forced");
    assert_eq!(
        code(&warpband(
            d,
            &["compare", "--first", "cos,n=3", "--second", "bogus,n=3"]
        )),
        2
    );
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for suite in ["identities", "widths", "spectral"] {
        let out = warpband(d, &["verify", "--suite", suite, "--format", "csv", "--out", "v.csv"]);
        assert_eq!(code(&out), 0, "{suite}: {}", String::from_utf8_lossy(&out.stderr));
        let rows: Vec<CheckRow> = read_csv(&d.join("v.csv")).unwrap();
        assert!(!rows.is_empty() && rows.iter().all(|r| r.passed && r.suite == suite));
    }
    let p = payload(&warpband(d, &["verify", "--suite", "bubbles", "--max-cells", "16"]));
    assert_eq!(p["failed"], 0);
    assert_eq!(
        code(&warpband(d, &["verify", "--suite", "bubbles", "--max-cells", "4"])),
        2
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&warpband(d, &["model", "--family", "exp", "--n", "3"])), 0);
    assert_eq!(code(&warpband(d, &["model", "--family", "nope", "--n", "3"])), 2);
    assert_eq!(code(&warpband(d, &["frobnicate"])), 2);

    std::fs::write(
        d.join("strict.toml"),
        "[tolerances]\nidentity = 1e-300\nfirst_variation = 1e-300\n",
    )
    .unwrap();
    let out = warpband(d, &["model", "--family", "cos", "--n", "4", "--config", "strict.toml"]);
    assert_eq!(code(&out), 3);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tolerances"]["identity"], 1e-300);
    let out = warpband(
        d,
        &[
            "bubble",
            "--band",
            "warped:cos,2,-0.5,0.5,16,16",
            "--h",
            "model:cos,n=2",
            "--config",
            "strict.toml",
        ],
    );
    assert_eq!(code(&out), 3);

    std::fs::write(d.join("zero.toml"), "[tolerances]\nwidth = 0\n").unwrap();
    assert_eq!(
        code(&warpband(
            d,
            &["model", "--family", "exp", "--n", "3", "--config", "zero.toml"]
        )),
        2
    );
    std::fs::write(d.join("typo.toml"), "[tolerances]\nwidht = 1e-6\n").unwrap();
    assert_eq!(
        code(&warpband(
            d,
            &["model", "--family", "exp", "--n", "3", "--config", "typo.toml"]
        )),
        2
    );
    assert_eq!(
        code(&warpband(
            d,
            &["model", "--family", "exp", "--n", "3", "--config", "missing.toml"]
        )),
        1
    );

    std::fs::write(d.join("file"), "").unwrap();
    assert_eq!(
        code(&warpband(
            d,
            &["model", "--family", "exp", "--n", "3", "--out", "file/x.json"]
        )),
        2
    );
    assert_eq!(
        code(&warpband(
            d,
            &["model", "--family", "exp", "--n", "3", "--out-dir", "file"]
        )),
        2
    );
}

#[test]
fn output_routing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = Command::new(env!("CARGO_BIN_EXE_warpband"))
        .args(["model", "--family", "sinh", "--n", "3", "--emit-profile"])
        .current_dir(d)
        .env("WARPBAND_OUT_DIR", "results")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(d.join("results/model.json")).unwrap()).unwrap();
    assert_eq!(v["tool"], "warpband");
    assert_eq!(v["command"][0], "model");
    let rows: Vec<ProfileRow> = read_csv(&d.join("results/model_profile.csv")).unwrap();
    assert_eq!(rows.len(), 201);

    let args = [
        "model",
        "--family",
        "sinh",
        "--n",
        "3",
        "--emit-profile",
        "p/profile.csv",
        "--out",
        "m.json",
    ];
    assert_eq!(code(&warpband(d, &args)), 2);
    std::fs::create_dir(d.join("p")).unwrap();
    assert_eq!(code(&warpband(d, &args)), 0);
    assert!(d.join("p/profile.csv").exists());
    let leftovers: Vec<_> = std::fs::read_dir(d)
        .unwrap()
        .chain(std::fs::read_dir(d.join("results")).unwrap())
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

fn validator(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn payloads_match_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_band(d, 3.0, 16);
    let envelope = validator("envelope");
    let runs: &[(&str, &[&str])] = &[
        ("model", &["model", "--family", "const", "--n", "5"]),
        ("model", &["model", "--family", "hyperbolic-annulus", "--n", "3"]),
        (
            "width",
            &[
                "width",
                "--n",
                "3",
                "--sigma",
                "6",
                "--h-minus",
                "-inf",
                "--h-plus",
                "-inf",
            ],
        ),
        (
            "width",
            &[
                "width",
                "--n",
                "4",
                "--sigma",
                "-12",
                "--h-minus",
                "-4",
                "--h-plus",
                "2",
            ],
        ),
        (
            "width",
            &["width", "--n", "4", "--sigma", "0", "--h-minus", "1", "--h-plus", "2"],
        ),
        (
            "sweep",
            &[
                "sweep",
                "--n",
                "2,3",
                "--sigma",
                "-1:1:3",
                "--h-minus",
                "-inf",
                "--h-plus",
                "-1:1:2",
            ],
        ),
        ("compare", &["compare", "--first", "cos,n=3", "--second", "cos,n=3"]),
        ("compare", &["compare", "--first", "const,n=3", "--second", "exp,n=3"]),
        ("spectrum", &["spectrum", "--uniform", "32", "--potential", "cos:2"]),
        (
            "bubble",
            &[
                "bubble",
                "--band",
                "cylinder:2,1,8,8",
                "--h",
                "const:0.5",
                "--oracle",
                "exhaustive-monotone",
            ],
        ),
        (
            "bubble",
            &[
                "bubble",
                "--band",
                "cylinder:2,1,4,4",
                "--h",
                "const:0.5",
                "--stencil",
                "axis",
                "--oracle",
                "exhaustive",
            ],
        ),
        (
            "bubble",
            &[
                "bubble",
                "--band",
                "file:band.txt",
                "--h",
                "model:cos,n=2",
                "--map",
                "lipschitz:0.25",
            ],
        ),
        (
            "bubble",
            &[
                "bubble",
                "--band",
                "warped:cos,2,-0.5,0.5,16,16",
                "--h",
                "model:cos,n=2",
                "--u-field",
                "ramp:1,2",
            ],
        ),
        ("verify", &["verify", "--suite", "spectral"]),
    ];
    for (schema, args) in runs {
        let out = warpband(d, args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let errors: Vec<String> = envelope.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?} envelope: {errors:?}");
        let errors: Vec<String> = validator(schema)
            .iter_errors(&v["payload"])
            .map(|e| e.to_string())
            .collect();
        assert!(errors.is_empty(), "{args:?} payload: {errors:?}");
    }
}

#[test]
fn row_oracle_is_a_bound_on_rectangles() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut text = String::from("band 12 6 rectangle\n");
    for i in 0..12 {
        for _ in 0..6 {
            text.push_str(&format!("{} 0.3 {}\n", 1.0 + 0.1 * i as f64, 1.5 - 0.05 * i as f64));
        }
    }
    std::fs::write(d.join("rect.txt"), text).unwrap();
    let out = warpband(
        d,
        &[
            "bubble",
            "--band",
            "file:rect.txt",
            "--h",
            "const:0.8",
            "--oracle",
            "exhaustive-monotone",
        ],
    );
    let p = payload(&out);
    assert_eq!(p["oracle"]["exact"], false);
    assert!(p["value"].as_f64().unwrap() <= p["oracle"]["value"].as_f64().unwrap() + 1e-9);
}
