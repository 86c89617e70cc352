use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lensreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lensreg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn shipped_runs_are_byte_identical() {
    for name in ["paper_815nm", "loading_histogram", "checkerboard_addressing", "rydberg_feasibility", "shift_transport"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for d in [&a, &b] {
            let out = lensreg(&["run", name, "--out", d.path().to_str().unwrap()]);
            assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        }
        let (ta, tb) = (tree(a.path()), tree(b.path()));
        assert!(ta.contains_key("summary.json"));
        assert_eq!(ta, tb, "{name}");
    }
}

#[test]
fn seed_override_changes_monte_carlo_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    lensreg(&["run", "shift_transport", "--out", a.path().to_str().unwrap()]);
    lensreg(&["run", "shift_transport", "--out", b.path().to_str().unwrap(), "--seed", "99"]);
    let log = |d: &Path| fs::read(d.join("transport_log.csv")).unwrap();
    assert_ne!(log(a.path()), log(b.path()));
}

#[test]
fn failed_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.toml");
    fs::write(
        &file,
        "kind = \"trap_characterization\"\n\
         [laser]\nwavelength = 815e-9\npower_per_site = 2e-3\nwaist = 3.7e-6\n\
         [[expect]]\nmetric = \"depth_mk\"\nvalue = 1.0\nrel_tol = 0.01\n\
         [[expect]]\nmetric = \"no_such_metric\"\nmin = 0.0\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = lensreg(&["run", file.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    let checks = summary["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|c| c["passed"] == false));
    assert_eq!(summary["name"], "bad");
    // expectations are reported once, in `checks`, not in the scenario echo
    assert!(summary["scenario"].get("expect").is_none());
}

#[test]
fn invalid_scenarios_report_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.toml");
    fs::write(
        &file,
        "kind = \"coherence\"\n[dephasing]\nt2_star = -1.0\nt2_prime = 0.04\nensemble_size = 0\n",
    )
    .unwrap();
    let out = lensreg(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for field in ["seed", "dephasing.t2_star", "dephasing.ensemble_size", "ramsey"] {
        assert!(err.contains(field), "{field}: {err}");
    }
}

#[test]
fn list_and_describe() {
    let out = lensreg(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "paper_815nm",
        "paper_1064nm",
        "loading_histogram",
        "coherence_echo",
        "shift_echo_default",
        "rydberg_feasibility",
    ] {
        assert!(text.contains(name), "{name}");
    }
    let out = lensreg(&["describe", "trap_characterization"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("wavelength"));
    let out = lensreg(&["describe", "warp_drive"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("allowed"));
}
