use std::process::{Command, Output};

fn entbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entbound"))
        .args(args)
        .env("ENTBOUND_LOG", "off")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn estimate_ghz_prints_a_tight_bracket() {
    let out = entbound(&["estimate", "ghz(3)"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let (lo, hi) = (v["lower"].as_f64().unwrap(), v["upper"].as_f64().unwrap());
    assert!((lo - 0.5).abs() < 1e-6 && (hi - 0.5).abs() < 1e-6, "{v}");
    assert_eq!(v["lower_method"], "pure");
}

#[test]
fn estimate_mixed_state_as_csv() {
    let out = entbound(&[
        "estimate",
        "horodecki(0.5)",
        "--lb",
        "lb1",
        "--format",
        "csv",
        "--restarts",
        "2",
    ]);
    let text = stdout(&out);
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let headers = rows.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "lower") && headers.iter().any(|h| h == "upper"));
    assert_eq!(rows.records().count(), 1);
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.txt");
    std::fs::write(&path, "1 2\n3\n").unwrap();
    for args in [
        vec!["estimate", path.to_str().unwrap()],
        vec!["estimate", "nonsense"],
        vec!["estimate", "ghz(3)", "--lb", "lb9"],
        vec!["sweep"],
        vec!["sweep", "--experiment", "xx-thermal", "--param", "q=1"],
    ] {
        let out = entbound(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("error"),
            "{args:?}"
        );
    }
}

#[test]
fn sweeps_without_timings_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = entbound(&[
            "sweep",
            "--experiment",
            "ghz-w-mix",
            "--grid",
            "0,0.5,1",
            "--lb",
            "lb1",
            "--restarts",
            "2",
            "--workers",
            "2",
            "--no-timings",
            "--out",
            path.to_str().unwrap(),
        ]);
        stdout(&o);
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("parameter,method,lower,upper,gap"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn sweep_config_file_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("spec.json");
    std::fs::write(
        &config,
        r#"{"experiment": "xx-thermal", "grid": {"values": [0.2, 1.5]}, "params": {"j": -1},
            "lb_method": "lb1", "lower_only": true}"#,
    )
    .unwrap();
    let out = entbound(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["experiment"], "xx-thermal");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["lower"].as_f64().unwrap() < 1e-6);
    assert!(rows[1]["lower"].as_f64().unwrap() > 1e-3);
    assert!(rows[1]["upper"].is_null());
}

#[test]
fn exported_states_estimate_like_their_constructor() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["w.json", "w.txt"] {
        let path = dir.path().join(name);
        stdout(&entbound(&[
            "export-state",
            "w(3)",
            "--out",
            path.to_str().unwrap(),
        ]));
        let v: serde_json::Value =
            serde_json::from_str(&stdout(&entbound(&["estimate", path.to_str().unwrap()])))
                .unwrap();
        assert!(
            (v["upper"].as_f64().unwrap() - 5.0 / 9.0).abs() < 1e-6,
            "{name}: {v}"
        );
    }
    let text = stdout(&entbound(&["export-state", "xx(0.7, -1)"]));
    assert!(!text.trim().is_empty());
}

#[test]
fn compare_bounds_summarizes_each_method() {
    let out = entbound(&[
        "compare-bounds",
        "--samples",
        "2",
        "--dims",
        "2x2",
        "--methods",
        "lb1,lb3",
        "--seed",
        "4",
    ]);
    let text = stdout(&out);
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let methods: Vec<String> = rows.records().map(|r| r.unwrap()[0].to_string()).collect();
    assert_eq!(methods, vec!["lb1", "lb3"]);
}
