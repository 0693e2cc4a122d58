use std::path::Path;
use std::process::Command;

use clap::Parser;
use pairspec_cli::{exit_code, run, run_bench, sig9, BenchArgs, Cli, Command as Sub, EXIT_DATA, EXIT_USAGE};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pairspec"))
}

fn run_args(args: &[&str]) -> anyhow::Result<String> {
    let cli = Cli::try_parse_from(std::iter::once("pairspec").chain(args.iter().copied()))?;
    let mut out = Vec::new();
    run(cli, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, fingers: &str, impressions: &str) {
    run_args(&["synth", p(dir), "--fingers", fingers, "--impressions", impressions]).unwrap();
}

#[test]
fn sig9_keeps_nine_digits() {
    assert_eq!(sig9(0.123456789123), "0.123456789");
    assert_eq!(sig9(1.99999999999), "2");
    assert_eq!(sig9(-0.0523598776), "-0.0523598776");
    assert_eq!(sig9(0.0), "0");
}

#[test]
fn match_line_is_machine_parsable_and_matches_template_path() {
    let tmp = tempfile::tempdir().unwrap();
    let db = tmp.path().join("db");
    synth(&db, "2", "2");
    let (a, b) = (db.join("1_1_1.xyt"), db.join("1_1_2.xyt"));
    let line = run_args(&["match", p(&a), p(&b), "--profile", "synthetic"]).unwrap();
    let fields: Vec<f64> = line.split_whitespace().map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields.len(), 4);
    assert!((fields[0] + fields[1] - fields[2]).abs() < 1e-8);
    assert_eq!(fields[3], 0.0);

    let (ta, tb) = (tmp.path().join("a.tpl"), tmp.path().join("b.tpl"));
    run_args(&["template", p(&a), "-o", p(&ta), "--profile", "synthetic"]).unwrap();
    run_args(&["template", p(&b), "-o", p(&tb), "--profile", "synthetic"]).unwrap();
    assert_eq!(run_args(&["match", p(&ta), p(&tb), "--profile", "synthetic"]).unwrap(), line);
    assert_eq!(run_args(&["match", p(&ta), p(&b), "--profile", "synthetic"]).unwrap(), line);
}

#[test]
fn self_match_scores_two() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "1", "1");
    let a = tmp.path().join("1_1_1.xyt");
    for family in ["l", "m"] {
        let line = run_args(&["match", p(&a), p(&a), "--family", family, "--rotation", "wide"]).unwrap();
        assert_eq!(line.trim(), "1 1 2 0");
    }
    let line = run_args(&["match", p(&a), p(&a), "--baseline"]).unwrap();
    assert_eq!(line.trim(), "1 1 2 0");
}

#[test]
fn eval_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let db = tmp.path().join("db");
    let out = tmp.path().join("out");
    synth(&db, "12", "3");
    let line = run_args(&[
        "eval", p(&db), "--out", p(&out), "--seed", "4", "--persons", "1", "--rotation", "narrow",
    ])
    .unwrap();
    assert!(line.starts_with("EER="), "{line}");
    let comparisons = std::fs::read_to_string(out.join("comparisons.csv")).unwrap();
    let rows: Vec<&str> = comparisons.lines().collect();
    assert_eq!(rows[0], "kind,finger_a,image_a,finger_b,image_b,score_x,score_xtheta,fused,phi_opt");
    // person 1 holds 10 fingers: 10·C(3,2) genuine and C(10,2) impostor rows
    assert_eq!(rows.len() - 1, 30 + 45);
    assert!(out.join("roc.csv").exists());
    assert!(out.join("histogram.csv").exists());

    let again = run_args(&["eval", p(&db), "--out", p(&out), "--seed", "4", "--persons", "1", "--rotation", "narrow"]).unwrap();
    assert_eq!(again, line);
    assert_eq!(std::fs::read_to_string(out.join("comparisons.csv")).unwrap(), comparisons);
}

fn bench_args(db: Option<&Path>) -> BenchArgs {
    let mut args = vec!["pairspec", "bench", "--reps", "1", "--warmup", "0", "--profile", "verifinger"];
    if let Some(d) = db {
        args.extend(["--db", p(d)]);
    }
    match Cli::try_parse_from(args).unwrap().command {
        Sub::Bench(b) => b,
        _ => unreachable!(),
    }
}

#[test]
fn bench_reports_reference_counts() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "3", "2");
    let a = run_bench(&bench_args(Some(tmp.path()))).unwrap();
    let b = run_bench(&bench_args(Some(tmp.path()))).unwrap();
    assert_eq!(a.pair_cost, b.pair_cost);
    assert_eq!(a.baseline_cost, b.baseline_cost);
    assert_eq!(a.impressions, 6);
    assert_eq!(a.pair_cost.terms_per_minutia, 6800.0);
    assert_eq!(a.baseline_cost.summation_terms, 32768 * 35);
    let text = a.to_string();
    assert!(text.contains("6800 per minutia"), "{text}");
    assert!(text.contains(&format!("{} summation terms", 32768 * 35)), "{text}");
}

#[test]
fn bench_on_empty_database_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let err = run_bench(&bench_args(Some(tmp.path()))).unwrap_err();
    assert_eq!(exit_code(&err), EXIT_USAGE);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "1", "1");
    let good = tmp.path().join("1_1_1.xyt");
    let bad = tmp.path().join("bad.xyt");
    std::fs::write(&bad, "326 357\n10 20 360 80\n").unwrap();

    let ok = bin().args(["match", p(&good), p(&good)]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "1 1 2 0");

    let data = bin().args(["match", p(&bad), p(&good)]).output().unwrap();
    assert_eq!(data.status.code(), Some(EXIT_DATA));
    assert!(String::from_utf8_lossy(&data.stderr).contains("line 2"));

    for args in [
        vec!["match", p(&good)],
        vec!["match", p(&good), p(&good), "--family", "q"],
        vec!["match", p(&good), p(&good), "--angles", "6"],
        vec!["bogus"],
        vec!["bench", "--db", p(&bad)],
    ] {
        let o = bin().args(&args).output().unwrap();
        assert_eq!(o.status.code(), Some(EXIT_USAGE), "{args:?}");
    }
}

#[test]
fn baseline_templates_need_baseline_flag() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "1", "2");
    let a = tmp.path().join("1_1_1.xyt");
    let g = tmp.path().join("g.tpl");
    run_args(&["template", p(&a), "-o", p(&g), "--baseline"]).unwrap();
    let err = run_args(&["match", p(&g), p(&g)]).unwrap_err();
    assert_eq!(exit_code(&err), EXIT_DATA);
    let line = run_args(&["match", p(&g), p(&g), "--baseline"]).unwrap();
    assert_eq!(line.trim(), "1 1 2 0");
}
