use std::path::Path;
use std::process::{Command, Output};

fn gsectors(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsectors")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

#[test]
fn invalid_rho_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = gsectors(&["sectors", "--x", "1e4", "--rho", "1.5"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho"));
    assert!(!out.with_extension("csv").exists() && !out.with_extension("json").exists());
}

#[test]
fn invalid_eps_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = gsectors(&["variance", "--x-list", "1e4", "--tau", "0.4", "--eps", "0.6"], &dir.path().join("v"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = gsectors(&["forbidden", "--norm-max", "1000"], &blocker.join("sub").join("out"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sectors_csv_has_one_row_per_offset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = gsectors(&["sectors", "--x", "1e4", "--rho", "0.3"], &out);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("beta,count,expected,deviation"));
    assert_eq!(lines.count(), 512);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["summary"]["norm_min"], 10_000);
    assert_eq!(json["summary"]["norm_max"], 20_000);
}

#[test]
fn variance_writes_ratio_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = gsectors(&["variance", "--x-list", "1e3,1e4", "--tau", "0.2,0.4,0.5"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').count() == 4));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    let reports = json["summary"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 6);
    assert_eq!(reports[0]["method_direct"], "uniform-grid");
    assert_eq!(reports[0]["phi"]["kind"], "plateau_plus");
}

#[test]
fn json_format_writes_a_single_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = gsectors(&["realquad", "--limit", "1000", "--kmax", "3", "--format", "json"], &out);
    assert!(o.status.success());
    assert!(!out.with_extension("csv").exists());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["rows"][0]["p"], 7);
    assert_eq!(json["rows"][1]["sign"], -1);
}
