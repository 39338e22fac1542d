use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vessel::linalg::re;
use vessel::serial::matrix_from_json;
use vessel::{random_realization, Preset, RealizationDocument};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vessel"));
    c.env_remove("NO_COLOR");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn vessel")
}

fn text(b: &[u8]) -> String {
    String::from_utf8(b.to_vec()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

/// Columns `name_re` of a frame CSV, rows in file order.
fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn presets_lists_the_three_rows() {
    let out = run_in(Path::new("."), &["presets"]);
    assert_eq!(out.status.code(), Some(0));
    let s = text(&out.stdout);
    for label in ["SL", "NLS", "Can. Sys."] {
        assert!(s.lines().any(|l| l.starts_with(label)), "{s}");
    }
    assert!(s.contains("[[0, i], [-i, 0]]"));
}

#[test]
fn preset_json_matches_the_library_exactly() {
    let out = run_in(Path::new("."), &["presets", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for (row, kind) in rows.as_array().unwrap().iter().zip(Preset::ALL) {
        let p = kind.params();
        assert_eq!(row["name"], kind.name());
        for (key, m) in [("sigma1", &p.sigma1), ("sigma2", &p.sigma2), ("gamma", &p.gamma)] {
            let parsed = matrix_from_json(&serde_json::from_value(row[key].clone()).unwrap()).unwrap();
            assert_eq!(&parsed, m, "{key}");
        }
    }
}

#[test]
fn hierarchy_rendering_and_guard() {
    let out = run_in(Path::new("."), &["hierarchy", "--n", "0", "--print"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout), "b0 = (−1/4)·βxxx + (+3/2)·βx²\n");

    let out = run_in(Path::new("."), &["hierarchy", "--n", "1", "--print"]);
    let s = text(&out.stdout);
    let b1 = s.lines().nth(1).unwrap();
    for term in ["(+i/16)·βxxxxx", "(−3i/4)·βxx²", "(−i)·βx·βxxx", "(+3i/2)·βx³"] {
        assert!(b1.contains(term), "{b1}");
    }
    assert_eq!(b1.matches('·').count(), 5);

    let out = run_in(Path::new("."), &["hierarchy", "--n", "2"]);
    assert_eq!(text(&out.stdout).lines().count(), 3);

    let out = run_in(Path::new("."), &["hierarchy", "--n", "9", "--print"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("guard"));
}

#[test]
fn zero_input_frame_has_zero_q() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "zero.json",
        r#"{"preset": "SL", "source": {"random": {"n": 3, "seed": 1, "zero_input": true}},
            "grid": {"x_min": -2, "x_max": 2, "nx": 9, "t_min": 0, "t_max": 0.5, "nt": 3}}"#,
    );
    let out = run_in(dir.path(), &["synthesize", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = text(&out.stdout);
    assert_eq!(csv.lines().count(), 1 + 27);
    assert!(column(&csv, "q_re").iter().chain(&column(&csv, "q_im")).all(|&q| q == 0.0));
}

#[test]
fn single_soliton_peaks_once_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("soliton.json");
    let cfg = cfg.to_str().unwrap();
    let out = run_in(dir.path(), &["synthesize", "--config", cfg, "--out", "a.csv", "--report", "a.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let out = run_in(dir.path(), &["synthesize", "--config", cfg, "--out", "b.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());

    let csv = text(&a);
    assert!(csv.starts_with("x,t,"));
    assert!(csv.lines().next().unwrap().ends_with(",lyap_res,mask"));
    let q = column(&csv, "q_re");
    let nx = 161;
    for row in q.chunks(nx) {
        let mag: Vec<f64> = row.iter().map(|v| v.abs()).collect();
        let peak = mag.iter().cloned().fold(0.0, f64::max);
        let maxima = (1..nx - 1).filter(|&i| mag[i] > mag[i - 1] && mag[i] >= mag[i + 1]).count();
        assert_eq!(maxima, 1);
        assert!(mag[0] < 1e-3 * peak && mag[nx - 1] < 1e-3 * peak);
    }

    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(rep["masked_nodes"], 0);
    assert_eq!(rep["nodes"], 161 * 11);
    assert!(rep["lyapunov_max"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn default_verify_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("verify_default.json");
    let out = run_in(dir.path(), &["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    let s = text(&out.stdout);
    assert!(!s.contains('\x1b'));
    assert!(s.contains("PASS kdv"));
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(rep["pass"], true);
    for key in ["realization", "checks", "convergence"] {
        assert!(rep.get(key).is_some());
    }
    let chk = &rep["checks"][0];
    for key in ["name", "residual", "tolerance", "pass", "grid", "seed"] {
        assert!(chk.get(key).is_some(), "{key}");
    }
}

#[test]
fn corrupted_realization_fails_verification_and_synthesis() {
    let dir = tempfile::tempdir().unwrap();
    let p = Preset::SL.params();
    let mut r = random_realization(3, &p, 2).unwrap();
    r.x0[(1, 1)] += re(1.0);
    RealizationDocument::from_parts(&p, &r).write(&dir.path().join("bad.json")).unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"source": {"file": "bad.json"}, "suite": {"convergence": false}}"#,
    );
    let out = run_in(dir.path(), &["verify", "--config", cfg.to_str().unwrap(), "--report", "r.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("lyapunov"));
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    let checks = rep["checks"].as_array().unwrap();
    let lyap = checks.iter().find(|c| c["name"] == "lyapunov").unwrap();
    assert_eq!(lyap["pass"], false);
    assert!(checks.iter().skip(2).all(|c| c["status"] == "skipped: precondition"));

    let out = run_in(dir.path(), &["synthesize", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stderr).contains("lyapunov"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "--config", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write(dir.path(), "nofile.json", r#"{"source": {"file": "nowhere.json"}}"#);
    let out = run_in(dir.path(), &["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    for (name, body) in [
        ("two.json", r#"{"preset": "SL", "source": {"random": {"n": 2, "seed": 1}, "random_solitons": {"n": 2, "seed": 1}}}"#),
        ("none.json", r#"{"preset": "SL", "source": {}}"#),
        ("preset.json", r#"{"preset": "KP", "source": {"random": {"n": 2, "seed": 1}}}"#),
        ("grid.json", r#"{"preset": "SL", "source": {"random": {"n": 2, "seed": 1}}, "grid": {"x_min": 0, "x_max": 1, "nx": 1, "t_min": 0, "t_max": 1, "nt": 3}}"#),
        ("unknown.json", r#"{"preset": "SL", "source": {"random": {"n": 2, "seed": 1}}, "colour": true}"#),
        ("syntax.json", r#"{"preset": "SL""#),
    ] {
        let cfg = write(dir.path(), name, body);
        let out = run_in(dir.path(), &["synthesize", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", text(&out.stderr));
    }
    let out = run_in(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"preset": "NLS", "source": {"random": {"n": 2, "seed": 4}}, "seed": 1,
            "outputs": {"report": "from_config.json"}, "suite": {"convergence": false}}"#,
    );
    let cfg = cfg.to_str().unwrap();
    let out = run_in(dir.path(), &["verify", "--config", cfg, "--seed", "5", "--report", "flag.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    assert!(!dir.path().join("from_config.json").exists());
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("flag.json")).unwrap()).unwrap();
    assert_eq!(rep["checks"][0]["seed"], 5);

    let again = run_in(dir.path(), &["verify", "--config", cfg, "--seed", "5", "--report", "flag2.json"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("flag.json")).unwrap(),
        std::fs::read(dir.path().join("flag2.json")).unwrap()
    );
}

#[test]
fn no_color_output_is_plain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"preset": "SL", "source": {"random": {"n": 2, "seed": 1}}, "suite": {"convergence": false}}"#,
    );
    let out = bin()
        .current_dir(dir.path())
        .env("NO_COLOR", "1")
        .args(["verify", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    let s = text(&out.stdout);
    assert!(!s.contains('\x1b') && s.contains("PASS commutation"), "{s}");
}
