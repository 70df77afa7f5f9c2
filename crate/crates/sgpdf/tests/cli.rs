//! End-to-end runs of the `sgpdf` binary on small meshes.

use std::path::Path;
use std::process::{Command, Output};

use sgpdf::io::{read_qoi_polynomial, read_samples, read_table, write_qoi_polynomial, write_samples, Header};

fn sgpdf(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgpdf"))
        .args(args)
        .arg("--output")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}\n{}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: [&str; 4] = ["--refinement", "1", "--samples", "200"];

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        vec!["moments", "--degree", "nine"],
        vec!["moments", "--set", "unknown_key=1"],
        vec!["moments", "--sigma-gamma", "-1"],
    ] {
        let o = sgpdf(&bad, dir.path());
        assert_eq!(o.status.code(), Some(2), "{bad:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    // an unreadable config file is an I/O failure
    assert_eq!(sgpdf(&["moments", "--config", "/nonexistent/file.conf"], dir.path()).status.code(), Some(4));
    let conf = dir.path().join("dup.conf");
    std::fs::write(&conf, "degree = 3\ndegree = 4\n").unwrap();
    assert_eq!(sgpdf(&["kl", "--config", conf.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn monte_carlo_is_refused_at_large_variance_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["moments", "--method", "mc", "--sigma-gamma", "1.6"];
    args.extend(SMALL);
    assert_eq!(sgpdf(&args, dir.path()).status.code(), Some(2));
    args.push("--force");
    let o = sgpdf(&args, dir.path());
    ok(&o);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn eigenpair_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let first = ok(&sgpdf(&["kl", "--refinement", "2"], dir.path()));
    assert!(first.contains("stored in"), "{first}");
    let cached = std::fs::read_dir(dir.path().join("cache")).unwrap().next().unwrap().unwrap().path();
    let mtime = std::fs::metadata(&cached).unwrap().modified().unwrap();
    let second = ok(&sgpdf(&["kl", "--refinement", "2"], dir.path()));
    assert!(second.contains("loaded from"), "{second}");
    assert_eq!(std::fs::metadata(&cached).unwrap().modified().unwrap(), mtime);
    // a different key is a miss
    assert!(ok(&sgpdf(&["kl", "--refinement", "2", "--kl-terms", "3"], dir.path())).contains("stored in"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["estimate", "--refinement", "1", "--sigma-gamma", "1.6", "--crude-samples", "2000", "--kde"];
    let snapshot = || {
        let mut files: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.is_file())
            .map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    ok(&sgpdf(&args, dir.path()));
    let first = snapshot();
    ok(&sgpdf(&args, dir.path()));
    assert!(first.iter().any(|(n, _)| n == "kde.csv"));
    assert!(first.iter().any(|(n, _)| n == "order_selection_ed.csv"));
    assert!(first == snapshot());
    let gc3 = read_table(&dir.path().join("series_gc3.csv")).unwrap();
    assert_eq!(gc3.header.get("curve"), Some("GC3"));
    assert_eq!(gc3.header.get("sigma_gamma"), Some("1.6"));
    assert_eq!(gc3.columns, ["x", "f"]);
}

#[test]
fn worker_count_does_not_change_samples() {
    let one = tempfile::tempdir().unwrap();
    let many = tempfile::tempdir().unwrap();
    let mut args = vec!["moments", "--method", "mc", "--seed", "7"];
    args.extend(SMALL);
    let mut a = args.clone();
    a.extend(["--workers", "1"]);
    let mut b = args;
    b.extend(["--workers", "4"]);
    ok(&sgpdf(&a, one.path()));
    ok(&sgpdf(&b, many.path()));
    let s1 = read_samples(&one.path().join("samples_mc.csv")).unwrap();
    let s4 = read_samples(&many.path().join("samples_mc.csv")).unwrap();
    assert_eq!(s1.values, s4.values);
    assert_eq!(s1.values.len(), 200);
    assert_eq!(s1.seed, 7);
}

#[test]
fn data_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ok(&sgpdf(&["moments", "--refinement", "1", "--sigma-gamma", "0.5"], dir.path()));
    let path = dir.path().join("qoi_polynomial.csv");
    let q = read_qoi_polynomial(&path).unwrap();
    let copy = dir.path().join("copy.csv");
    write_qoi_polynomial(&copy, &q, Header::new("qoi_polynomial")).unwrap();
    assert_eq!(read_qoi_polynomial(&copy).unwrap(), q);

    let set = sgpdf_core::sg::sample_qoi_polynomial(&q, 50, 3).unwrap();
    let samples = dir.path().join("samples.csv");
    write_samples(&samples, &set, Header::new("samples")).unwrap();
    assert_eq!(read_samples(&samples).unwrap(), set);

    // a truncated polynomial file is rejected with a format error
    let text = std::fs::read_to_string(&path).unwrap();
    let cut: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
    std::fs::write(&copy, cut).unwrap();
    assert!(read_qoi_polynomial(&copy).is_err());
}

#[test]
fn moments_table_has_metadata_and_six_digits() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&sgpdf(&["moments", "--refinement", "1"], dir.path()));
    assert!(stdout.contains("m_l"));
    let t = read_table(&dir.path().join("moments_sg.csv")).unwrap();
    assert_eq!(t.header.get("artifact"), Some("moments"));
    assert_eq!(t.rows.len(), 6);
    let m1 = &t.rows[0][1];
    assert_eq!(m1.split('e').next().unwrap().trim_start_matches('-').len(), 7, "{m1}");
}

#[test]
fn compare_writes_z_scores() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["compare", "--sigma-gamma", "0.02", "--seed", "3"];
    args.extend(SMALL);
    let stdout = ok(&sgpdf(&args, dir.path()));
    assert!(stdout.contains("MC se"));
    let t = read_table(&dir.path().join("compare.csv")).unwrap();
    for row in &t.rows {
        let z: f64 = row[4].parse().unwrap();
        assert!(z.abs() < 4.0, "{row:?}");
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = sgpdf::ExperimentConfig::from_file(&path).unwrap();
        cfg.validate().unwrap();
        seen += 1;
    }
    assert!(seen >= 3);
    // the reference config spells out the built-in defaults
    let mut reference = sgpdf::ExperimentConfig::from_file(&dir.join("paper-defaults.conf")).unwrap();
    reference.output = sgpdf::ExperimentConfig::default().output;
    assert_eq!(reference.entries(), sgpdf::ExperimentConfig::default().entries());
}
