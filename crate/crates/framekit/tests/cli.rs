use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use framekit::report::{AnalysisReport, CertifyReport, VerdictName};
use framekit::parse_frame;
use framekit_core::gallery;
use tempfile::TempDir;

fn framekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framekit")).args(args).output().expect("runs framekit")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_gallery(dir: &TempDir, key: &str) -> PathBuf {
    let path = dir.path().join(format!("{key}.txt"));
    let out = framekit(&["gallery", key, "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

fn write_text(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn header(text: &str) -> String {
    text.lines().find(|l| !l.starts_with('#')).unwrap().to_string()
}

fn analyze_json(path: &Path, extra: &[&str]) -> (AnalysisReport, String) {
    let mut args = vec!["analyze", p(path), "--json"];
    args.extend_from_slice(extra);
    let out = framekit(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    (serde_json::from_str(&stdout(&out)).unwrap(), stderr(&out))
}

fn sets_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn gallery_headers() {
    for (key, want, rows) in [("e8-120", "8 120", 120), ("pentakis16", "3 16", 16), ("simplex-2", "2 3", 3), ("mub-r4", "4 12", 12)] {
        let out = framekit(&["gallery", key]);
        assert_eq!(code(&out), 0);
        let text = stdout(&out);
        assert_eq!(header(&text), want);
        assert_eq!(parse_frame(&text, false).unwrap().n(), rows);
    }
}

#[test]
fn gallery_file_reproduces_the_construction_exactly() {
    let dir = TempDir::new().unwrap();
    for key in ["e8-120", "pentakis16", "random-4-9-3"] {
        let text = std::fs::read_to_string(write_gallery(&dir, key)).unwrap();
        assert_eq!(parse_frame(&text, false).unwrap(), gallery::by_key(key).unwrap().frame, "{key}");
    }
}

#[test]
fn gallery_then_analyze_reproduces_expected_records() {
    let dir = TempDir::new().unwrap();
    for key in ["mub-r4", "pentakis16", "e8-120", "simplex-3", "simplex-6"] {
        let expected = gallery::by_key(key).unwrap().expected.unwrap();
        let (report, _) = analyze_json(&write_gallery(&dir, key), &[]);
        assert!(sets_close(&report.profile.cosine_set, &expected.cosine_set, 1e-9), "{key}");
        assert!((report.profile.coherence - expected.coherence).abs() <= 1e-12, "{key}");
        match (report.profile.tightness, expected.tightness) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9, "{key}"),
            (a, b) => assert_eq!(a.is_some(), b.is_some(), "{key}"),
        }
        if let Some(signed) = &expected.level2_signed_cosines {
            assert!(sets_close(&report.embeddings[1].signed_cosine_set, signed, 1e-9), "{key}");
        }
        if let Some(v) = expected.level1_verdict {
            assert_eq!(report.certificates[0].verdict, v.into(), "{key}");
        }
        if let Some(v) = expected.level2_verdict {
            assert_eq!(report.certificates[1].verdict, v.into(), "{key}");
        }
    }
}

#[test]
fn analyze_e8_is_certified() {
    let dir = TempDir::new().unwrap();
    let (r, _) = analyze_json(&write_gallery(&dir, "e8-120"), &[]);
    assert_eq!(r.format_version, 1);
    assert_eq!(r.verdict, VerdictName::CertifiedGrassmannian);
    assert!((r.profile.coherence - 0.5).abs() <= 1e-15);
    assert_eq!((r.frame.m, r.frame.n), (8, 120));
}

#[test]
fn analyze_random_frame_is_undetermined_above_welch() {
    let dir = TempDir::new().unwrap();
    let (r, _) = analyze_json(&write_gallery(&dir, "random-3-10-1"), &[]);
    assert_eq!(r.verdict, VerdictName::Undetermined);
    assert!(r.profile.coherence >= (7.0f64 / 27.0).sqrt());
}

#[test]
fn analyze_text_output() {
    let dir = TempDir::new().unwrap();
    let out = framekit(&["analyze", p(&write_gallery(&dir, "mub-r4"))]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("verdict      CertifiedGrassmannian"));
    assert!(text.contains("coherence    0.5000000000"));
}

#[test]
fn memory_guard_falls_back_with_notice() {
    let dir = TempDir::new().unwrap();
    let path = write_gallery(&dir, "e8-120");
    let (r, err) = analyze_json(&path, &["--mem-guard", "2M"]);
    assert!(err.contains("notice:"), "{err}");
    assert_eq!(r.notices.len(), 1);
    assert_eq!(r.embeddings[1].method, framekit::report::MethodName::ClosedForm);
    assert_eq!(r.verdict, VerdictName::CertifiedGrassmannian);
    let (full, _) = analyze_json(&path, &[]);
    assert!(sets_close(&r.embeddings[1].signed_cosine_set, &full.embeddings[1].signed_cosine_set, 1e-12));
}

#[test]
fn json_floats_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = framekit(&["analyze", p(&write_gallery(&dir, "pentakis16")), "--json"]);
    let text = stdout(&out);
    let report: AnalysisReport = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&report).unwrap();
    assert_eq!(serde_json::from_str::<AnalysisReport>(&again).unwrap(), report);
    assert_eq!(again.trim_end(), text.trim_end());
}

#[test]
fn certify_levels() {
    let dir = TempDir::new().unwrap();
    let path = write_gallery(&dir, "mub-r4");
    let out = framekit(&["certify", p(&path), "--level", "1", "--json"]);
    assert_eq!(code(&out), 0);
    let r: CertifyReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r.certificates.len(), 1);
    assert_eq!(r.certificates[0].certified_constant, Some(0.5));
    let out = framekit(&["certify", p(&path)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("level 2      Undetermined"));
}

#[test]
fn certify_tolerance_flag() {
    let dir = TempDir::new().unwrap();
    let path = write_gallery(&dir, "random-3-4-2");
    let strict: CertifyReport = serde_json::from_str(&stdout(&framekit(&["certify", p(&path), "--json"]))).unwrap();
    let loose: CertifyReport =
        serde_json::from_str(&stdout(&framekit(&["certify", p(&path), "--json", "--tol", "10"]))).unwrap();
    assert_eq!(strict.verdict, VerdictName::Undetermined);
    assert_ne!(loose.verdict, VerdictName::Undetermined);
}

#[test]
fn embed_headers_and_inner_products() {
    let dir = TempDir::new().unwrap();
    let out = framekit(&["embed", p(&write_gallery(&dir, "pentakis16")), "--level", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(header(&stdout(&out)), "14 16");

    let out = framekit(&["embed", p(&write_gallery(&dir, "e8-120"))]);
    let text = stdout(&out);
    assert_eq!(header(&text), "629 120");
    let rows = parse_frame(&text, false).unwrap();
    let g = rows.gram();
    for j in 0..120 {
        for l in j + 1..120 {
            assert!((g[(j, l)] + 1.0 / 119.0).abs() <= 1e-8);
        }
    }

    let basis = write_text(&dir, "basis.txt", "3 3\n1 0 0\n0 1 0\n0 0 1\n");
    let out_path = dir.path().join("basis-l1.txt");
    let out = framekit(&["embed", p(&basis), "--level", "1", "-o", p(&out_path)]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.lines().next().unwrap().starts_with("# level 1"));
    assert_eq!(header(&text), "5 3");
    let g = parse_frame(&text, false).unwrap().gram();
    for (j, l) in [(0, 1), (0, 2), (1, 2)] {
        assert!((g[(j, l)] + 0.5).abs() <= 1e-12);
    }
}

#[test]
fn oracle_reports_deviations() {
    let out = framekit(&["oracle", "--m", "2", "--samples", "20000", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["monte_carlo"]["samples"], 20000);
    let core = framekit_core::oracle::mc_k2(2, 20_000, 3, u128::MAX).unwrap();
    assert_eq!(v["monte_carlo"]["k2_max_abs_error"].as_f64().unwrap(), core.max_abs_error);
    assert_eq!(v["pass"], true);
    let sweep = v["orthant_sweep"].as_array().unwrap();
    assert_eq!(sweep.len(), 49);
    assert_eq!(sweep[2]["m"], 4);
    assert_eq!(sweep[2]["orthant_route_live"], true);
    assert_eq!(sweep[1]["orthant_route_live"], false);
}

#[test]
fn oracle_with_frame_file() {
    let dir = TempDir::new().unwrap();
    let path = write_gallery(&dir, "random-3-10-5");
    let out = framekit(&["oracle", "--samples", "10000", "--frame", p(&path)]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let bf = v["brute_force"].as_array().unwrap();
    assert_eq!(bf.len(), 1);
    assert!(bf[0]["max_abs_diff_closed_form"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let path = write_gallery(&dir, "simplex-3");
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["frobnicate"],
        vec!["analyze"],
        vec!["analyze", p(&path), "--tol", "0"],
        vec!["analyze", p(&path), "--cluster-tol", "-1"],
        vec!["certify", p(&path), "--level", "3"],
        vec!["embed", p(&path), "--level", "0"],
        vec!["gallery", "no-such-key"],
        vec!["gallery", "simplex-1"],
        vec!["oracle", "--m", "9"],
        vec!["oracle", "--samples", "10"],
        vec!["analyze", p(&path), "--mem-guard", "lots"],
    ];
    for args in cases {
        assert_eq!(code(&framekit(&args)), 1, "{args:?}");
    }
    let out = framekit(&["gallery", "nope"]);
    assert!(stderr(&out).contains("e8-120"));
    assert_eq!(code(&framekit(&["--help"])), 0);
}

#[test]
fn parse_errors_exit_2_with_line_numbers() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("header.txt", "# c\nthree 2\n1 0 0\n", "line 2"),
        ("row.txt", "3 2\n1 0 0\n0 1\n", "line 3"),
        ("number.txt", "2 1\n1 zero\n", "line 2"),
        ("zero.txt", "2 2\n1 0\n0 0\n", "line 3"),
        ("short.txt", "2 3\n1 0\n0 1\n", "expected 3 rows"),
        ("unit.txt", "2 1\n3 4\n", "line 2"),
    ];
    for (name, text, needle) in cases {
        let path = write_text(&dir, name, text);
        for cmd in ["analyze", "certify", "embed"] {
            let out = framekit(&[cmd, p(&path)]);
            assert_eq!(code(&out), 2, "{cmd} {name}");
            assert!(stderr(&out).contains(needle), "{cmd} {name}: {}", stderr(&out));
        }
    }
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&framekit(&["analyze", p(&missing)])), 2);
    let unit = write_text(&dir, "unit2.txt", "2 1\n3 4\n");
    assert_eq!(code(&framekit(&["analyze", p(&unit), "--renormalize"])), 0);
}

#[test]
fn guard_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let path = write_gallery(&dir, "e8-120");
    assert_eq!(code(&framekit(&["analyze", p(&path), "--mem-guard", "1K"])), 3);
    assert_eq!(code(&framekit(&["certify", p(&path), "--mem-guard", "1K"])), 3);
    assert_eq!(code(&framekit(&["embed", p(&path), "--mem-guard", "100K"])), 3);
    assert_eq!(code(&framekit(&["gallery", "random-8-100000-1", "--mem-guard", "1M"])), 3);
    assert_eq!(code(&framekit(&["oracle", "--m", "5", "--samples", "10000", "--mem-guard", "1K"])), 3);
}
