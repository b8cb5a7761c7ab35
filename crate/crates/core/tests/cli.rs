use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hcr::image::GrayImage;
use hcr::pgm::{write_pgm, PgmEncoding};
use hcr::synth::{render_clean, render_string, template};

fn hcr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hcr(args);
    assert!(
        out.status.success(),
        "hcr {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code 1 and a single diagnostic line.
fn fails(args: &[&str]) -> String {
    let out = hcr(args);
    assert_eq!(out.status.code(), Some(1), "hcr {args:?} should fail");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "diagnostic: {err}");
    err
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, classes: &str, per_class: &str) -> PathBuf {
    let data = dir.join("data");
    ok(&[
        "synth",
        s(&data),
        "--classes",
        classes,
        "--per-class",
        per_class,
        "--seed",
        "4",
    ]);
    data
}

#[test]
fn synth_writes_requested_counts() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "tee,ell", "7");
    for class in ["tee", "ell"] {
        assert_eq!(fs::read_dir(data.join(class)).unwrap().count(), 7);
    }
    let again = dir.path().join("again");
    ok(&[
        "synth",
        s(&again),
        "--classes",
        "tee,ell",
        "--per-class",
        "7",
        "--seed",
        "4",
    ]);
    let a = fs::read(data.join("ell/ell_0003.pgm")).unwrap();
    assert_eq!(a, fs::read(again.join("ell/ell_0003.pgm")).unwrap());
}

#[test]
fn train_then_test_on_held_out_split() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "tee,ell,ex", "30");
    let w1 = dir.path().join("w1.txt");
    let w2 = dir.path().join("w2.txt");
    let split = ["--n-train", "20", "--n-test", "10"];
    for w in [&w1, &w2] {
        let mut args = vec![
            "train",
            s(&data),
            "--weights",
            s(w),
            "--hidden",
            "12",
            "--seed",
            "4",
        ];
        args.extend(split);
        assert!(ok(&args).contains("converged: yes"));
    }
    assert_eq!(
        fs::read(&w1).unwrap(),
        fs::read(&w2).unwrap(),
        "training is deterministic"
    );

    let mut args = vec!["test", s(&w1), s(&data), "--seed", "4"];
    args.extend(split);
    let report = ok(&args);
    assert_eq!(report.lines().count(), 31);
    let last = report.lines().last().unwrap();
    assert!(
        last.starts_with("accuracy: ") && last.contains("/30 = "),
        "{last}"
    );
}

#[test]
fn huge_target_error_stops_after_one_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "tee,ell", "5");
    let w = dir.path().join("w.txt");
    let out = ok(&["train", s(&data), "-w", s(&w), "--target-error", "1e9"]);
    assert!(out.contains("epochs: 1 "), "{out}");
    assert!(fs::read_to_string(&w).unwrap().starts_with("HCRNN 1\n"));
}

#[test]
fn extract_then_train_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "tee,ex", "6");
    let csv = dir.path().join("f.csv");
    ok(&["extract", s(&data), "--out", s(&csv)]);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("label,f0,f1,") && header.ends_with(",f80"));
    assert_eq!(lines.count(), 12);

    let w = dir.path().join("w.txt");
    ok(&[
        "train",
        s(&csv),
        "-w",
        s(&w),
        "--pca-k",
        "3",
        "--hidden",
        "4,3",
    ]);
    let weights = fs::read_to_string(&w).unwrap();
    assert!(weights.contains("SIZES 3 4 3 2"));
    assert!(weights.contains("ACTIVATIONS logsig logsig tansig"));
}

#[test]
fn recognize_reads_a_string_in_order_and_dumps_stages() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "tee,ell,ex", "40");
    let w = dir.path().join("w.txt");
    ok(&["train", s(&data), "-w", s(&w)]);

    let glyphs = ["ex", "tee", "ell"].map(|n| template(n).unwrap());
    let page = dir.path().join("page.pgm");
    write_pgm(&page, &render_string(&glyphs, 5, 0), PgmEncoding::Plain).unwrap();
    let stages = dir.path().join("stages");
    let out = ok(&["recognize", s(&w), s(&page), "--dump-stages", s(&stages)]);
    assert_eq!(out.lines().last().unwrap(), "recognized: ex tee ell");
    for line in out.lines().take(3) {
        let acts = line.split('[').nth(1).unwrap().trim_end_matches(']');
        assert!(
            acts.split(' ')
                .all(|a| a.split('.').nth(1).map(str::len) == Some(4)),
            "{line}"
        );
    }
    assert!(stages.join("05_boxes.pgm").exists());
    assert!(stages.join("06_cell_02.pgm").exists());

    let single = dir.path().join("one.pgm");
    write_pgm(
        &single,
        &render_clean(template("ell").unwrap()),
        PgmEncoding::Raw,
    )
    .unwrap();
    assert!(ok(&["recognize", s(&w), s(&single)]).ends_with("recognized: ell\n"));
}

#[test]
fn listed_errors_exit_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "tee,ell", "5");
    let w = dir.path().join("w.txt");
    ok(&["train", s(&data), "-w", s(&w), "--max-epochs", "5"]);

    let blank = dir.path().join("blank.pgm");
    write_pgm(
        &blank,
        &GrayImage::filled(20, 10, 255).unwrap(),
        PgmEncoding::Plain,
    )
    .unwrap();
    assert!(fails(&["recognize", s(&w), s(&blank)]).contains("no ink"));

    let other = dir.path().join("other");
    ok(&["synth", s(&other), "--classes", "zed", "--per-class", "2"]);
    assert!(fails(&["test", s(&w), s(&other)]).contains("dimension"));

    let bad = dir.path().join("bad.txt");
    fs::write(
        &bad,
        fs::read_to_string(&w)
            .unwrap()
            .replacen("HCRNN 1", "HCRNN 7", 1),
    )
    .unwrap();
    assert!(fails(&["recognize", s(&bad), s(&blank)]).contains("version"));

    let two = dir.path().join("two");
    fs::create_dir_all(two.join("pair")).unwrap();
    let glyphs = ["tee", "ell"].map(|n| template(n).unwrap());
    write_pgm(
        two.join("pair/p.pgm"),
        &render_string(&glyphs, 4, 0),
        PgmEncoding::Raw,
    )
    .unwrap();
    assert!(fails(&["extract", s(&two)]).contains("found 2 characters"));

    let broken = dir.path().join("broken.pgm");
    fs::write(&broken, "P2\n4 4\n255\n0 0 0\n").unwrap();
    assert!(fails(&["extract", s(&broken)]).contains("broken.pgm"));

    let out = hcr(&["train", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}
