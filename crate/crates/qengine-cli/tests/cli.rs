//! End-to-end tests of the `qengine` binary: flag handling, exit codes,
//! output formats, determinism, and the figure headline values.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qengine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn tmp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qengine-cli-{}-{name}", std::process::id()))
}

/// Raw token following `"key": ` in the JSON report (up to `,` or newline).
fn json_token(report: &str, key: &str) -> String {
    let pat = format!("\"{key}\": ");
    let start = report.find(&pat).unwrap_or_else(|| panic!("key {key} present")) + pat.len();
    report[start..]
        .split(|c| c == ',' || c == '\n')
        .next()
        .expect("token after key")
        .to_string()
}

fn json_number(report: &str, key: &str) -> f64 {
    json_token(report, key).parse().expect("numeric JSON value")
}

/// Number in a headline line that starts with `prefix`, written as
/// `<prefix> = VALUE [at ...]`.
fn headline_number(stdout: &str, prefix: &str) -> f64 {
    let line = stdout
        .lines()
        .find(|l| l.starts_with(prefix))
        .unwrap_or_else(|| panic!("headline starting with `{prefix}` in:\n{stdout}"));
    let after = line.split(" = ").nth(1).expect("value after =");
    after.split(" at ").next().expect("value token").trim().parse().expect("headline number")
}

// ---------------------------------------------------------------------------
// point
// ---------------------------------------------------------------------------

#[test]
fn point_reports_half_efficiency_at_reference_parameters() {
    let out = run(&[
        "point", "--kind", "coherent", "--gamma0", "0.01", "--wh", "10", "--wc", "5", "--bh",
        "0.01", "--bc", "0.8", "--alpha", "0.8",
    ]);
    assert!(out.status.success());
    let report = stdout_of(&out);
    assert_eq!(json_number(&report, "efficiency"), 0.5);
    assert!(json_number(&report, "power") < 0.0, "engine extracts work");
    // The report leads with occupations and ends with the uncertainty block.
    let order = ["occupations", "rates", "steady_state", "observables", "cumulants", "fano", "tur"];
    let positions: Vec<usize> =
        order.iter().map(|k| report.find(&format!("\"{k}\"")).expect("section present")).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "sections in declared order");
}

#[test]
fn point_output_is_byte_deterministic() {
    let args =
        ["point", "--kind", "incoherent", "--bh", "0.02", "--bc", "1.1", "--alpha", "0.37"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let path = tmp_path("point.json");
    let path_str = path.to_str().unwrap();
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path_str]);
    assert!(run(&with_out).status.success());
    let written = fs::read(&path).expect("file written");
    let _ = fs::remove_file(&path);
    assert_eq!(written, first.stdout, "--out file matches stdout bytes");
}

#[test]
fn point_zero_drive_marks_zero_mean_ratios() {
    let out = run(&["point", "--alpha", "0"]);
    assert!(out.status.success(), "zero drive is a valid point");
    let report = stdout_of(&out);
    assert_eq!(json_token(&report, "nsr"), "null");
    assert_eq!(json_token(&report, "slack"), "null");
    assert!(report.contains("\"zero_mean\": true"));
    assert_eq!(json_number(&report, "power"), 0.0);
}

#[test]
fn point_rejects_kind_both() {
    let out = run(&["point", "--kind", "both"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn point_refuses_non_engine_with_exit_3() {
    let out = run(&["point", "--bh", "0.2", "--bc", "0.3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_parameters_exit_2() {
    assert_eq!(run(&["point", "--wh", "5", "--wc", "10"]).status.code(), Some(2));
    assert_eq!(run(&["point", "--gamma0", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["point", "--kind", "quantum"]).status.code(), Some(2));
}

#[test]
fn config_file_fills_unset_flags_and_flags_win() {
    let path = tmp_path("config.txt");
    fs::write(&path, "# sample configuration\nkind = incoherent\nalpha = 0.3\nbc = 1.2\n")
        .unwrap();
    let path_str = path.to_str().unwrap();

    let from_config = run(&["point", "--config", path_str]);
    let explicit = run(&["point", "--kind", "incoherent", "--alpha", "0.3", "--bc", "1.2"]);
    assert!(from_config.status.success());
    assert_eq!(from_config.stdout, explicit.stdout, "config supplies unset flags");

    let overridden = run(&["point", "--config", path_str, "--alpha", "0.5"]);
    let explicit_override =
        run(&["point", "--kind", "incoherent", "--alpha", "0.5", "--bc", "1.2"]);
    assert_eq!(overridden.stdout, explicit_override.stdout, "flags override config");

    fs::write(&path, "alpha = fast\n").unwrap();
    assert_eq!(run(&["point", "--config", path_str]).status.code(), Some(2));
    let _ = fs::remove_file(&path);
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[test]
fn sweep_emits_row_major_grid_with_kinds_adjacent() {
    let path = tmp_path("sweep.csv");
    let path_str = path.to_str().unwrap();
    let args = [
        "sweep", "--kind", "both", "--vary", "alpha=log:1e-3:1:100", "--out", path_str,
    ];
    assert!(run(&args).status.success());
    let text = fs::read_to_string(&path).unwrap();

    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 201, "header + 100 points x 2 kinds");
    assert!(lines[0].starts_with("kind,gamma0,omega_h"));
    assert_eq!(lines[0].split(',').count(), 25);

    let mut alphas = Vec::new();
    for (i, row) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 25);
        let expected_kind = if i % 2 == 0 { "coherent" } else { "incoherent" };
        assert_eq!(fields[0], expected_kind, "kinds alternate within a grid point");
        if i % 2 == 0 {
            alphas.push(fields[6].parse::<f64>().unwrap());
        }
    }
    assert!(alphas.windows(2).all(|w| w[0] < w[1]), "grid axis increases");
    assert!((alphas[0] - 1e-3).abs() < 1e-15 && (alphas[99] - 1.0).abs() < 1e-12);

    let rerun_path = tmp_path("sweep-rerun.csv");
    let rerun_str = rerun_path.to_str().unwrap();
    assert!(run(&["sweep", "--kind", "both", "--vary", "alpha=log:1e-3:1:100", "--out", rerun_str])
        .status
        .success());
    assert_eq!(fs::read(&path).unwrap(), fs::read(&rerun_path).unwrap(), "byte-identical rerun");
    let _ = fs::remove_file(&path);
    let _ = fs::remove_file(&rerun_path);
}

#[test]
fn sweep_marks_non_engine_rows_instead_of_skipping() {
    let path = tmp_path("sweep-invalid.csv");
    let path_str = path.to_str().unwrap();
    // beta_c from below to above beta_h * wh / wc = 0.02: the first rows are
    // not engines and must appear as valid=false with nan physics columns.
    let out = run(&[
        "sweep", "--bh", "0.01", "--vary", "beta_c=log:0.011:1:30", "--out", path_str,
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let _ = fs::remove_file(&path);
    let invalid: Vec<&str> = text.lines().filter(|l| l.contains(",false,")).collect();
    assert!(!invalid.is_empty(), "grid crosses the engine boundary");
    assert!(invalid.iter().all(|l| l.contains("nan")));
    assert!(text.lines().filter(|l| l.contains(",true,")).count() > 0);
}

#[test]
fn sweep_rejects_bad_grids() {
    let out = tmp_path("never.csv");
    let out_str = out.to_str().unwrap();
    for args in [
        vec!["sweep", "--out", out_str],
        vec!["sweep", "--vary", "alpha=log:1e-3:1:1", "--out", out_str],
        vec!["sweep", "--vary", "gamma0=log:1e-3:1:10", "--out", out_str],
        vec![
            "sweep", "--vary", "alpha=log:1e-3:1:10", "--vary", "alpha=log:1e-2:1:10", "--out",
            out_str,
        ],
        vec![
            "sweep", "--vary", "alpha=log:1e-3:1:10", "--vary", "beta_c=log:0.1:1:10", "--vary",
            "beta_h=log:0.001:0.01:10", "--out", out_str,
        ],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

// ---------------------------------------------------------------------------
// figure
// ---------------------------------------------------------------------------

#[test]
fn figure_fig4a_headline_matches_model_minima() {
    let path = tmp_path("fig4a.csv");
    let out = run(&["figure", "Fig4a", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = stdout_of(&out);
    let _ = fs::remove_file(&path);
    let q_c = headline_number(&stdout, "min q coherent");
    let q_i = headline_number(&stdout, "min q incoherent");
    assert!((q_c - 1.967386958).abs() < 1e-6, "q_C = {q_c}");
    assert!((q_i - 1.997517436).abs() < 1e-6, "q_I = {q_i}");
}

#[test]
fn figure_fig4b_headline_matches_model_minima() {
    let path = tmp_path("fig4b.csv");
    let out = run(&["figure", "Fig4b", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = stdout_of(&out);
    let q_c = headline_number(&stdout, "min q coherent");
    let q_i = headline_number(&stdout, "min q incoherent");
    assert!((q_c - 1.247482928).abs() < 1e-6, "q_C = {q_c}");
    assert!((q_i - 2.602573459).abs() < 1e-6, "q_I = {q_i}");

    // File shape: metadata comments, pinned header, 400 points x 2 kinds.
    let text = fs::read_to_string(&path).unwrap();
    let _ = fs::remove_file(&path);
    assert!(text.starts_with("# preset: Fig4b\n"));
    let data_rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data_rows, 801, "header + 800 rows");
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "kind,gamma0,omega_h,omega_c,beta_h,beta_c,alpha,n_h,n_c,valid,coherence,power,\
         j_hot,j_cold,efficiency,entropy_rate,var_power,nsr,F_p,fano,q_ctur,upsilon,psi,\
         f_qtur,slack"
    );
}

#[test]
fn figure_fig3c_reports_near_saturation_of_the_bound() {
    let path = tmp_path("fig3c.csv");
    let out = run(&["figure", "Fig3c", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let _ = fs::remove_file(&path);
    let slack = headline_number(&stdout_of(&out), "min relative slack coherent");
    assert!(slack > 0.0 && slack < 0.05, "relative slack = {slack}");
}

#[test]
fn figure_fig3a_reports_noise_ratio_peak() {
    let path = tmp_path("fig3a.csv");
    let out = run(&["figure", "Fig3a", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let _ = fs::remove_file(&path);
    let ratio = headline_number(&stdout_of(&out), "max noise ratio incoherent/coherent");
    assert!((ratio - 323.961287).abs() < 1e-4, "ratio = {ratio}");
}

#[test]
fn figure_alphacrit_crosses_the_kinds() {
    let path = tmp_path("alphacrit.csv");
    let out = run(&["figure", "AlphaCrit", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let _ = fs::remove_file(&path);
    let mismatch = headline_number(&stdout_of(&out), "max coherence mismatch");
    assert!(mismatch < 1e-12, "coherences match at the critical drive, got {mismatch}");
}

#[test]
fn figure_unknown_preset_exit_2() {
    let path = tmp_path("never-fig.csv");
    assert_eq!(run(&["figure", "Fig9z", "--out", path.to_str().unwrap()]).status.code(), Some(2));
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

#[test]
fn validate_battery_passes() {
    let out = run(&["validate", "--seed", "42", "--samples", "25"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_of(&out).contains("all checks passed"));
}

#[test]
fn validate_zero_samples_exit_2() {
    assert_eq!(run(&["validate", "--samples", "0"]).status.code(), Some(2));
}
