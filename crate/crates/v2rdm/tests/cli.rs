use std::process::Command;

use v2rdm::records::{read_csv, Condition, CSV_HEADER};

fn v2rdm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_v2rdm"))
}

const H2_LIKE: &str = "&FCI NORB=2,NELEC=2,MS2=0,
 ORBSYM=1,1,
 ISYM=1,
&END
 0.67 1 1 1 1
 0.70 2 2 2 2
 0.66 1 1 2 2
 0.18 1 2 1 2
-2.6 1 1 0 0
-2.1 2 2 0 0
 0.08 1 2 0 0
 0.7 0 0 0 0
";

#[test]
fn ring_fci_sweep_streams_rows_in_grid_order() {
    let out = v2rdm()
        .args(["fci", "--r", "4", "--kappa-grid", "0:0.5:0.25"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = read_csv(&text).unwrap();
    let coords: Vec<f64> = rows.iter().map(|r| r.coordinate.parse().unwrap()).collect();
    assert_eq!(coords, vec![0.0, 0.25, 0.5]);
    assert!(rows.iter().all(|r| r.condition == Condition::Fci && r.error == Some(0.0)));
}

#[test]
fn empty_grid_prints_only_the_header() {
    let out = v2rdm()
        .args(["ring", "--kappa-grid", "1:0:0.25", "--threads", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), CSV_HEADER.join(",") + "\n");
}

#[test]
fn threaded_ring_sweep_matches_serial() {
    let run = |threads: &str| {
        let out = v2rdm()
            .args(["ring", "--r", "3", "--kappa-grid", "0:2:0.5", "--condition", "2_2"])
            .args(["--condition", "fci", "--threads", threads])
            .output()
            .unwrap();
        assert!(out.status.success());
        read_csv(&String::from_utf8(out.stdout).unwrap()).unwrap()
    };
    let (serial, threaded) = (run("1"), run("4"));
    assert_eq!(serial.len(), 10);
    for (a, b) in serial.iter().zip(&threaded) {
        assert_eq!((&a.coordinate, a.condition), (&b.coordinate, b.condition));
        assert_eq!(a.energy, b.energy);
    }
}

#[test]
fn fcidump_job_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("h2like.fcidump");
    std::fs::write(&input, H2_LIKE).unwrap();
    let csv = dir.path().join("out.csv");
    let status = v2rdm()
        .arg("fcidump")
        .arg(&input)
        .args(["--condition", "fci", "--condition", "2_3_full", "--number-constraint", "2"])
        .arg("--out")
        .arg(&csv)
        .arg("--plot")
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.system == "fcidump" && r.coordinate == "h2like"));
    let bound = &rows[1];
    assert!(bound.converged);
    assert!(bound.error.unwrap() <= 1e-6);
    let script = std::fs::read_to_string(dir.path().join("out.csv.gp")).unwrap();
    assert!(script.contains("out.csv"));
}

#[test]
fn malformed_fcidump_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.fcidump");
    std::fs::write(&input, "&FCI NORB=2,NELEC=2\n&END\n0.5 1 1 1 1\n0.5 1 1 x 1\n").unwrap();
    let out = v2rdm().arg("fcidump").arg(&input).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 4"));
}

#[test]
fn plot_requires_an_output_file() {
    let out = v2rdm().args(["fci", "--plot"]).output().unwrap();
    assert!(!out.status.success());
}
