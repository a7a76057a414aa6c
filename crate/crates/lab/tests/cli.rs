use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use relacc::formats::{read_frequency_csv, read_mesh_dump};

fn relacc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relacc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn small_campaign(dir: &Path, threads: &str) -> Output {
    relacc(&[
        "campaign",
        "--case",
        "runge",
        "--alpha",
        "500",
        "--k",
        "2",
        "--m",
        "3",
        "--h-list",
        "0.1,0.15",
        "--trials",
        "3",
        "--seed",
        "42",
        "--threads",
        threads,
        "--emit-samples",
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn laws_rows_by_hand() {
    let out = relacc(&["laws", "--h-star", "1", "--k", "2", "--m", "4", "--h-list", "1,0.5,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), "h,two_steps,sigmoid\n1,0.5,0.5\n0.5,1,0.875\n2,0,0.125\n");
}

#[test]
fn laws_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = relacc(&[
        "laws", "--h-star", "1", "--k", "2", "--m", "4", "--h-list", "1", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("laws.csv")).unwrap();
    assert_eq!(text, "h,two_steps,sigmoid\n1,0.5,0.5\n");
}

#[test]
fn invalid_numerics_are_usage_errors() {
    for args in [
        &["laws", "--h-star", "-1", "--k", "2", "--m", "4", "--h-list", "1"][..],
        &["laws", "--h-star", "1", "--k", "3", "--m", "2", "--h-list", "1"],
        &["laws", "--h-star", "1", "--k", "2", "--m", "3", "--h-list", "0"],
        &["laws", "--h-star", "x", "--k", "2", "--m", "3", "--h-list", "1"],
    ] {
        let out = relacc(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn degree_out_of_range_names_the_valid_range() {
    let cases: [&[&str]; 3] = [
        &["campaign", "--case", "smooth", "--k", "5", "--m", "3"],
        &["campaign", "--case", "smooth", "--k", "2", "--m", "5"],
        &["convergence", "--case", "smooth", "--k", "5"],
    ];
    for args in cases {
        let out = relacc(args);
        assert_eq!(out.status.code(), Some(2));
        assert!(stderr(&out).contains("1..=4"), "{}", stderr(&out));
    }
}

#[test]
fn flag_errors_exit_with_two() {
    let cases: [&[&str]; 5] = [
        &["campaign", "--case", "runge", "--k", "2", "--m", "3"],
        &["campaign", "--case", "smooth", "--k", "2", "--m", "3", "--bogus"],
        &["campaign", "--case", "smooth", "--k", "3", "--m", "2"],
        &["campaign", "--case", "smooth", "--k", "2", "--m", "3", "--h-min", "0.1"],
        &["campaign", "--case", "smooth", "--k", "2", "--m", "3", "--jitter", "0.7"],
    ];
    for args in cases {
        let out = relacc(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
    assert_eq!(relacc(&[]).status.code(), Some(2));
    assert_eq!(relacc(&["--help"]).status.code(), Some(0));
}

#[test]
fn campaign_outputs_are_byte_identical_across_reruns_and_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out_a = small_campaign(a.path(), "1");
    let out_b = small_campaign(b.path(), "2");
    assert_eq!(out_a.status.code(), Some(0), "{}", stderr(&out_a));
    assert_eq!(out_b.status.code(), Some(0));
    assert!(stdout(&out_a).starts_with("h_star_estimate="));
    assert_eq!(stdout(&out_a), stdout(&out_b));
    for name in ["frequencies.csv", "samples.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    assert!(!a.path().join("comparison.svg").exists());
    let rows = read_frequency_csv(fs::File::open(a.path().join("frequencies.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].n_effective + rows[0].n_failed, 3);
}

#[test]
fn campaign_writes_svg_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = relacc(&[
        "campaign", "--case", "smooth", "--k", "1", "--m", "2", "--h-list", "0.2,0.3",
        "--trials", "2", "--law", "sigmoid", "--emit-svg", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("comparison.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains("stroke-dasharray"));
    assert!(!dir.path().join("samples.csv").exists());
}

#[test]
fn aborted_campaign_leaves_a_marker_and_no_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = relacc(&[
        "campaign", "--case", "smooth", "--k", "1", "--m", "2", "--h-list", "0.2",
        "--trials", "2", "--min-angle", "55", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(dir.path().join(".failed").exists());
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, vec![".failed".to_string()]);
}

#[test]
fn convergence_reports_slope_or_na() {
    let dir = tempfile::tempdir().unwrap();
    let out = relacc(&[
        "convergence", "--case", "smooth", "--k", "2", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let slope: f64 = stdout(&out).trim().strip_prefix("slope=").unwrap().parse().unwrap();
    assert!((1.7..=2.3).contains(&slope), "{slope}");
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("h,h_actual,error,slope\n"));
    assert_eq!(csv.lines().count(), 4);

    let out = relacc(&[
        "convergence", "--case", "patch", "--k", "1", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "slope=n/a\n");
}

#[test]
fn mesh_dump_is_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = relacc(&[
        "mesh-dump", "--h", "0.3", "--seed", "4", "--k", "2", "--case", "smooth", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mesh = read_mesh_dump(std::io::BufReader::new(
        fs::File::open(dir.path().join("mesh.txt")).unwrap(),
    ))
    .unwrap();
    assert_eq!(mesh.seed(), 4);
    assert!(mesh.h_actual() <= 0.3);
    let solution = fs::read_to_string(dir.path().join("solution.txt")).unwrap();
    assert!(solution.starts_with("dof 0 "));
}
