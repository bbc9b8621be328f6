// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn invsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

const NETLIST: &str = "\
input I
output O
gate buf g1 M I
gate inv g2 O M
";

#[test]
fn sim_builtin_writes_csv_and_vcd() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let vcd = dir.path().join("t.vcd");
    let o = invsim(&[
        "sim",
        "--circuit",
        "buffer",
        "--stim",
        "pulse:I:width=20ps",
        "--csv",
        path(&csv),
        "--vcd",
        path(&vcd),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("status=COMPLETED committed=2"), "{}", stdout(&o));
    let csv = fs::read_to_string(csv).unwrap();
    assert!(csv.starts_with("signal,time_as,level\n"));
    assert!(csv.contains("O,14000000,1"), "{csv}");
    let vcd = fs::read_to_string(vcd).unwrap();
    assert!(vcd.contains("$timescale 1fs $end") || vcd.contains("$timescale\n"), "{vcd}");
    assert!(vcd.contains("#14000"), "{vcd}");
}

#[test]
fn sim_from_files_matches_builtin_semantics() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("c.net");
    let del = dir.path().join("c.dly");
    let stim = dir.path().join("c.stim");
    fs::write(&net, NETLIST).unwrap();
    fs::write(&del, "default 4000000 4000000\n").unwrap();
    fs::write(&stim, "init I 0\n10000000 I 1\n40000000 I 0\n").unwrap();
    let csv = dir.path().join("out.csv");
    let o = invsim(&[
        "sim",
        "--netlist",
        path(&net),
        "--delays",
        path(&del),
        "--stim-file",
        path(&stim),
        "--model",
        "pure",
        "--csv",
        path(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.contains("O,18000000,0"), "{text}");
    assert!(text.contains("O,48000000,1"), "{text}");
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("c.net");
    fs::write(&net, NETLIST).unwrap();

    // netlist without delays
    let o = invsim(&["sim", "--netlist", path(&net), "--stim", "pulse:I:width=5ps"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--delays"));

    // delay table missing a gate
    let del = dir.path().join("c.dly");
    fs::write(&del, "g1 4000000 4000000\n").unwrap();
    let o = invsim(&[
        "sim",
        "--netlist",
        path(&net),
        "--delays",
        path(&del),
        "--stim",
        "pulse:I:width=5ps",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("g2"), "{}", stderr(&o));

    // syntax error reports the line
    fs::write(&del, "default 4000000 4000000\ng1 fast 3\n").unwrap();
    let o = invsim(&[
        "sim",
        "--netlist",
        path(&net),
        "--delays",
        path(&del),
        "--stim",
        "pulse:I:width=5ps",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = invsim(&["sim", "--circuit", "nosuch", "--stim", "pulse:I:width=5ps"]);
    assert_eq!(o.status.code(), Some(1));
    let o = invsim(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    let o = invsim(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn sweep_reports_cancelled_pulses() {
    let o = invsim(&[
        "sweep", "--circuit", "buffer", "--from", "1ps", "--to", "5ps", "--step", "1ps",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta_i_as,delta_o_as");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].ends_with("CANCELLED"));
    assert!(!lines[5].ends_with("CANCELLED"));
}

#[test]
fn bisect_or_loop_brackets_to_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let o = invsim(&[
        "bisect",
        "--circuit",
        "orloop:30",
        "--resolution",
        "1ps",
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let bracket: Vec<i64> = text
        .lines()
        .find_map(|l| l.strip_prefix("bracket "))
        .unwrap()
        .split(' ')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(bracket[1] - bracket[0] <= 1_000_000);
    assert!(bracket[0] < 155_927_332 && 155_927_332 <= bracket[1], "{bracket:?}");
    for f in [
        "bracket.csv",
        "verdicts.csv",
        "train_below.csv",
        "train_above.csv",
        "trace_below.csv",
        "trace_above.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn adder_sweep_shows_the_inertial_jump() {
    let o = invsim(&[
        "adder", "--model", "inertial", "--from", "4999fs", "--to", "5000fs", "--step", "1fs",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("4999000,S0,"), "{text}");
    assert!(rows[1].starts_with("5000000,S0 S1 S2 S3 S4,"), "{text}");
}

#[test]
fn small_bench_writes_csv() {
    let o = invsim(&[
        "bench",
        "--circuit",
        "adder:2",
        "--multipliers",
        "1,2",
        "--transitions",
        "200",
        "--repetitions",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with(
        "circuit,multiplier,model,transitions,repetitions,committed,mean_s,stddev_s,overhead_pct\n"
    ));
    assert_eq!(text.lines().count(), 5);
    let o = invsim(&["bench", "--repetitions", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..3 {
        let csv = dir.path().join(format!("{k}.csv"));
        let vcd = dir.path().join(format!("{k}.vcd"));
        let o = invsim(&[
            "sim",
            "--circuit",
            "adder:4",
            "--stim",
            "random:count=200:min=1ps:max=30ps",
            "--seed",
            "3",
            "--csv",
            path(&csv),
            "--vcd",
            path(&vcd),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push((fs::read(csv).unwrap(), fs::read(vcd).unwrap(), o.stdout));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}
