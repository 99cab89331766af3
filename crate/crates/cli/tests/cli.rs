//! Black-box tests over the installed binary: exit codes, byte determinism,
//! units, and config-file precedence.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finblock"))
        .args(args)
        .output()
        .expect("spawn finblock")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn tmp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("finblock-cli-{}-{name}", std::process::id()))
}

#[test]
fn sweep_is_byte_deterministic() {
    let args = ["sweep", "--n-min", "20", "--n-max", "40"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout_str(&a);
    assert!(text.starts_with("n,shannon,normal,edgeworth,qbound,exact\n"));
    assert_eq!(text.lines().count(), 22);
    assert!(!text.contains('\r'));
}

#[test]
fn eps_half_collapses_normal_onto_shannon() {
    let out = run(&["sweep", "--eps", "0.5", "--n-max", "30"]);
    assert_eq!(code(&out), 0);
    for line in stdout_str(&out).lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1], fields[2], "row {line}");
    }
}

#[test]
fn bits_columns_are_nats_over_ln2() {
    let nats = run(&["sweep", "--n-min", "20", "--n-max", "30"]);
    let bits = run(&["sweep", "--n-min", "20", "--n-max", "30", "--units", "bits"]);
    assert_eq!(code(&nats), 0);
    assert_eq!(code(&bits), 0);
    let ln2 = std::f64::consts::LN_2;
    for (ln_nats, ln_bits) in stdout_str(&nats).lines().skip(1).zip(stdout_str(&bits).lines().skip(1)) {
        let fa: Vec<&str> = ln_nats.split(',').collect();
        let fb: Vec<&str> = ln_bits.split(',').collect();
        assert_eq!(fa[0], fb[0]);
        for j in 1..6 {
            let va: f64 = fa[j].parse().unwrap();
            let vb: f64 = fb[j].parse().unwrap();
            // each cell is independently rounded to 12 significant digits
            assert!(
                (vb * ln2 - va).abs() <= 2e-11 * va.abs(),
                "column {j}: {va} nats vs {vb} bits"
            );
        }
    }
}

#[test]
fn config_file_fills_gaps_but_flags_win() {
    let cfg = tmp_path("precedence.conf");
    std::fs::write(
        &cfg,
        "# sweep profile\nnmax = 22   # stop early\neps = 0.5\nunits = bits\n",
    )
    .unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--eps", "0.01"]);
    std::fs::remove_file(&cfg).ok();
    assert_eq!(code(&out), 0);
    let text = stdout_str(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    // nmax=22 honored from the file, default nmin=20
    assert_eq!(rows.len(), 3);
    assert!(rows.last().unwrap().starts_with("22,"));
    // eps flag beat the file: the normal column must not collapse onto shannon
    let fields: Vec<&str> = rows[0].split(',').collect();
    assert_ne!(fields[1], fields[2]);
    // units came from the file: shannon(n=20) is 20 H1 / ln 2, close to 10 bits
    let shannon: f64 = fields[1].parse().unwrap();
    assert!((shannon - 9.998).abs() < 0.01, "shannon {shannon}");
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&run(&["sweep", "--bogus"])), 2);
}

#[test]
fn invalid_pmf_is_usage_error() {
    let out = run(&["stats", "--pmf", "0.5,0.6"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_config_key_is_usage_error() {
    let cfg = tmp_path("badkey.conf");
    std::fs::write(&cfg, "frobnicate = 1\n").unwrap();
    let out = run(&["stats", "--config", cfg.to_str().unwrap()]);
    std::fs::remove_file(&cfg).ok();
    assert_eq!(code(&out), 2);
}

#[test]
fn spectrum_cap_exits_three() {
    let out = run(&["exact", "--n-min", "2000000", "--n-max", "2000000"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn verify_with_off_scale_alpha_fails_identity_only() {
    let out = run(&["verify", "--alpha", "5.0", "--samples", "10000"]);
    assert_eq!(code(&out), 1);
    let text = stdout_str(&out);
    assert!(text.contains("centralization: PASS"), "{text}");
    assert!(text.contains("identity: FAIL"), "{text}");
    assert!(text.contains("slopes: PASS"), "{text}");
}

#[test]
fn exact_frozen_small_blocklengths() {
    let one = stdout_str(&run(&["exact", "--n-min", "1", "--n-max", "1"]));
    assert!(one.contains("l_star 2.20727491319"), "{one}");
    assert!(one.contains("cumulative 1\n"), "{one}");
    let two = stdout_str(&run(&["exact", "--n-min", "2", "--n-max", "2"]));
    assert!(two.contains("l_star 4.41454982638"), "{two}");
    assert!(two.contains("atom_index 2"), "{two}");
}

#[test]
fn exact_requires_single_blocklength() {
    assert_eq!(code(&run(&["exact", "--n-min", "2", "--n-max", "3"])), 2);
}

#[test]
fn stats_degenerate_source_reports_and_exits_zero() {
    let out = run(&["stats", "--pmf", "0.5,0.5"]);
    assert_eq!(code(&out), 0);
    let text = stdout_str(&out);
    assert!(text.contains("varentropy 0\n"), "{text}");
    assert!(text.contains("alpha undefined"), "{text}");
}

#[test]
fn stats_uniform_four_in_bits() {
    let out = run(&["stats", "--pmf", "0.25,0.25,0.25,0.25", "--units", "bits"]);
    assert_eq!(code(&out), 0);
    let text = stdout_str(&out);
    assert!(text.contains("h1 2\n"), "{text}");
}

#[test]
fn sweep_out_writes_the_same_bytes_as_stdout() {
    let path = tmp_path("sweep.csv");
    let piped = run(&["sweep", "--n-max", "25"]);
    let to_file = run(&["sweep", "--n-max", "25", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&to_file), 0);
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(written, piped.stdout);
}
