use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn hepp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hepp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Header plus data rows (comment lines dropped).
fn csv(o: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = stdout(o);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("hepp-cli-test-{}-{name}", std::process::id()))
}

/// Both-steps-succeeded Bell weights by direct label bookkeeping on Werner
/// inputs: step 1 keeps x_s = x_p, the Hadamards give (z_p^z_s, x_p), step 2
/// keeps x' = x_t and leaves (x', z'^z_t).
fn both_success_oracle(pp: f64, ps: f64, pt: f64) -> (f64, [f64; 4]) {
    let werner = |p: f64| [p, (1.0 - p) / 3.0, (1.0 - p) / 3.0, (1.0 - p) / 3.0];
    let (wp, ws, wt) = (werner(pp), werner(ps), werner(pt));
    let bits = |k: usize| ((k >> 1) as u8, (k & 1) as u8);
    let mut out = [0.0; 4];
    for p in 0..4 {
        for s in 0..4 {
            for t in 0..4 {
                let ((xp, zp), (xs, zs), (xt, zt)) = (bits(p), bits(s), bits(t));
                if xs != xp {
                    continue;
                }
                let (x1, z1) = (zp ^ zs, xp);
                if x1 != xt {
                    continue;
                }
                out[(x1 as usize) * 2 + (z1 ^ zt) as usize] += wp[p] * ws[s] * wt[t];
            }
        }
    }
    let total: f64 = out.iter().sum();
    (total, out.map(|x| x / total))
}

#[test]
fn purify_noiseless_point_succeeds_with_certainty() {
    let o = hepp(&["purify", "--pp", "1", "--ps", "1", "--pt", "1", "--noise", "bitflip"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv(&o);
    assert_eq!(h[0], "class");
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][0], "BothSuccess");
    assert_eq!(num(&rows[0][1]), 1.0);
    assert_eq!(num(&rows[0][3]), 1.0);
    for r in &rows[1..] {
        assert_eq!(num(&r[1]), 0.0);
    }
}

#[test]
fn purify_general_matches_label_oracle() {
    let o = hepp(&["purify", "--pp", "0.6", "--ps", "0.8", "--pt", "0.9", "--noise", "general"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv(&o);
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let (p, w) = both_success_oracle(0.6, 0.8, 0.9);
    let row = &rows[0];
    assert_eq!(row[0], "BothSuccess");
    assert!((num(&row[col("probability_engine")]) - p).abs() < 1e-11);
    for (k, name) in ["f_phi_plus", "f_phi_minus", "f_psi_plus", "f_psi_minus"].iter().enumerate() {
        assert!((num(&row[col(&format!("{name}_engine"))]) - w[k]).abs() < 1e-11);
        assert!((num(&row[col(&format!("{name}_analytic"))]) - w[k]).abs() < 1e-11);
    }
    assert_eq!(row[col("analytic_source")], "closed_form");
    for r in &rows {
        assert!(num(&r[col("max_abs_diff")]) < 1e-10);
    }
    assert_eq!(rows[3][col("analytic_source")], "label_map");
}

#[test]
fn purify_rejects_out_of_range_input() {
    let o = hepp(&["purify", "--pp", "1.2", "--ps", "0.8", "--pt", "0.9"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert_eq!(String::from_utf8_lossy(&o.stderr).trim().lines().count(), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&hepp(&["purify", "--pp", "0.5"])), 2);
    assert_eq!(code(&hepp(&["frobnicate"])), 2);
    assert_eq!(code(&hepp(&["purify", "--pp", "0.5", "--ps", "0.5", "--pt", "0.5", "--noise", "x"])), 2);
    assert_eq!(code(&hepp(&["--help"])), 0);
}

#[test]
fn sweep_row_count_and_normalization() {
    let o = hepp(&[
        "sweep", "--vary", "ps", "--from", "0.505", "--to", "1", "--steps", "200", "--pp", "0.6",
        "--noise", "general", "--target", "step1",
    ]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv(&o);
    assert_eq!(h, ["param", "f_phi_plus", "f_phi_minus", "f_psi_plus", "f_psi_minus", "probability"]);
    assert_eq!(rows.len(), 200);
    assert_eq!(num(&rows[0][0]), 0.505);
    assert_eq!(num(&rows[199][0]), 1.0);
    for r in &rows {
        let s: f64 = r[1..5].iter().map(|x| num(x)).sum();
        assert!((s - 1.0).abs() < 1e-10);
    }
    // Quoted value at p_s = 0.8.
    let o = hepp(&["sweep", "--vary", "ps", "--from", "0.7", "--to", "0.9", "--steps", "3", "--pp", "0.6"]);
    let (_, rows) = csv(&o);
    assert!((num(&rows[1][1]) - 0.7285).abs() < 5e-5);
}

#[test]
fn sweep_fail3_crosses_half_at_quoted_threshold() {
    let o = hepp(&[
        "sweep", "--vary", "pt", "--from", "0.51", "--to", "1", "--steps", "4901", "--pp", "0.65",
        "--ps", "0.62", "--noise", "bitflip", "--target", "fail3",
    ]);
    assert_eq!(code(&o), 0);
    let (_, rows) = csv(&o);
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (num(&r[0]), num(&r[1]))).collect();
    let w = pts.windows(2).find(|w| w[0].1 > 0.5 && w[1].1 <= 0.5).unwrap();
    let x = w[0].0 + (w[0].1 - 0.5) / (w[0].1 - w[1].1) * (w[1].0 - w[0].0);
    assert!((x - 0.599).abs() <= 1e-3, "{x}");
}

#[test]
fn sweep_every_target_and_model_normalized() {
    for target in ["step1", "step2", "fail1", "fail2", "fail3"] {
        for noise in ["bitflip", "general"] {
            let o = hepp(&[
                "sweep", "--vary", "pt", "--from", "0.5", "--to", "0.95", "--steps", "10", "--pp",
                "0.7", "--ps", "0.75", "--pt", "0.8", "--target", target, "--noise", noise,
            ]);
            assert_eq!(code(&o), 0, "{target} {noise}");
            let (_, rows) = csv(&o);
            assert_eq!(rows.len(), 10);
            for r in &rows {
                let s: f64 = r[1..5].iter().map(|x| num(x)).sum();
                assert!((s - 1.0).abs() < 1e-10, "{target} {noise}");
                assert!((0.0..=1.0).contains(&num(&r[5])));
            }
        }
    }
}

#[test]
fn sweep_rejects_bad_ranges() {
    let base = ["sweep", "--vary", "ps", "--pp", "0.6"];
    for extra in [
        &["--from", "0.9", "--to", "0.5"][..],
        &["--from", "0.5", "--to", "1.5"][..],
        &["--from", "0.5", "--to", "0.9", "--steps", "1"][..],
        &["--from", "0.5"][..],
    ] {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        assert_eq!(code(&hepp(&args)), 2, "{extra:?}");
    }
    assert_eq!(code(&hepp(&["sweep", "--vary", "pt", "--from", "0.5", "--to", "0.9", "--pp", "0.6", "--target", "step2"])), 2);
    assert_eq!(code(&hepp(&["sweep", "--figure", "3"])), 2);
}

#[test]
fn sweep_figure_tables() {
    for (fig, cols) in [(2, 4), (4, 4), (7, 4), (8, 5), (9, 4)] {
        let o = hepp(&["sweep", "--figure", &fig.to_string()]);
        assert_eq!(code(&o), 0);
        let (h, rows) = csv(&o);
        assert_eq!(h.len(), cols, "figure {fig}");
        assert!(rows.len() > 400);
    }
}

#[test]
fn thresholds_figure3_contains_quoted_band() {
    let o = hepp(&["thresholds", "--figure", "3"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv(&o);
    assert_eq!(h, ["param", "min_threshold", "max_threshold"]);
    let row = rows.iter().find(|r| (num(&r[0]) - 0.65).abs() < 1e-9).unwrap();
    assert!((num(&row[1]) - 0.601).abs() <= 1e-3);
    assert!((num(&row[2]) - 0.715).abs() <= 1e-3);
}

#[test]
fn thresholds_rows_ordered_or_marked_empty() {
    for args in [
        &["thresholds", "--figure", "3", "--from", "0.3", "--to", "0.95", "--steps", "14"][..],
        &["thresholds", "--figure", "5"][..],
    ] {
        let o = hepp(args);
        assert_eq!(code(&o), 0);
        let (_, rows) = csv(&o);
        let mut empty = 0;
        for r in &rows {
            if r[1] == "empty" {
                assert_eq!(r[2], "empty");
                empty += 1;
            } else {
                assert!(num(&r[1]) <= num(&r[2]));
            }
        }
        if args.len() > 3 {
            assert!(empty > 0);
        }
    }
    let (_, rows) = csv(&hepp(&["thresholds", "--figure", "5"]));
    assert_eq!(rows.len(), 101);
    assert_eq!(num(&rows[0][0]), 0.61);
    assert_eq!(num(&rows[100][0]), 0.71);
    assert_eq!(code(&hepp(&["thresholds", "--figure", "4"])), 2);
}

#[test]
fn efficiency_defaults_give_both_cases_and_slope() {
    let o = hepp(&["efficiency"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("d_km,E_o,E_n,R,log10R\n"));
    assert_eq!(text.matches("# case ").count(), 2);
    let slopes: Vec<f64> = text
        .lines()
        .filter_map(|l| l.strip_prefix("# slope_log10R_per_km="))
        .map(num)
        .collect();
    assert_eq!(slopes.len(), 2);
    for s in slopes {
        assert!((s - 0.10424).abs() <= 1e-5);
        assert!((s - 6.0 / (25.0 * std::f64::consts::LN_10)).abs() < 1e-11);
    }
    let (_, rows) = csv(&o);
    assert_eq!(rows.len(), 202);
    for r in [&rows[0], &rows[101]] {
        assert_eq!(num(&r[0]), 0.0);
        let (eo, en, ratio) = (num(&r[1]), num(&r[2]), num(&r[3]));
        assert!((en / eo - ratio).abs() / ratio < 1e-10);
        assert!(ratio > 1.0);
    }
}

#[test]
fn efficiency_single_case_and_validation() {
    let o = hepp(&["efficiency", "--pp", "0.6", "--ps", "0.8", "--pt", "0.9", "--d-to", "50", "--steps", "6"]);
    assert_eq!(code(&o), 0);
    let (_, rows) = csv(&o);
    assert_eq!(rows.len(), 6);
    assert_eq!(num(&rows[5][0]), 50.0);
    assert_eq!(code(&hepp(&["efficiency", "--pp", "0.6"])), 2);
    assert_eq!(code(&hepp(&["efficiency", "--eta-d", "1.5"])), 2);
    assert_eq!(code(&hepp(&["efficiency", "--d0", "0"])), 2);
    assert_eq!(code(&hepp(&["efficiency", "--d-from", "10", "--d-to", "5"])), 2);
    assert_eq!(code(&hepp(&["efficiency", "--figure", "7"])), 2);
    assert_eq!(code(&hepp(&["efficiency", "--figure", "6"])), 0);
}

#[test]
fn verify_exit_codes() {
    let o = hepp(&["verify"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv(&o);
    assert_eq!(h, ["check", "status", "value", "tolerance", "detail"]);
    assert_eq!(rows[0][0], "grid_equivalence");
    assert_eq!(rows[0][1], "pass");
    assert!(num(&rows[0][2]) < 1e-10);
    assert!(rows[0][4].contains("points=250"));
    assert!(rows.iter().any(|r| r[0] == "step2_linearity" && r[1] == "pass"));
    assert!(rows.iter().any(|r| r[0].starts_with("p2t") && r[1] == "info"));

    let o = hepp(&["verify", "--tol", "1e-30"]);
    assert_eq!(code(&o), 1);
    assert_eq!(csv(&o).1[0][1], "fail");

    let o = hepp(&["verify", "--steps", "2"]);
    assert_eq!(code(&o), 0);
    assert!(csv(&o).1[0][4].contains("points=16"));

    assert_eq!(code(&hepp(&["verify", "--tol", "0"])), 2);
}

#[test]
fn iterate_success_only_is_monotone_at_example() {
    let o = hepp(&["iterate", "--pp", "0.7", "--ps", "0.8", "--pt", "0.85", "--noise", "bitflip", "--rounds", "3"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv(&o);
    assert_eq!(h[0], "round");
    assert_eq!(rows.len(), 12);
    let inputs: Vec<f64> = rows.iter().step_by(4).map(|r| num(&r[1])).collect();
    assert_eq!(inputs[0], 0.7);
    assert!(inputs.windows(2).all(|w| w[1] >= w[0]));
    let selected: Vec<&Vec<String>> = rows.iter().filter(|r| r[8] == "true").collect();
    assert_eq!(selected.len(), 3);
    assert!(selected.iter().all(|r| r[2] == "BothSuccess"));
    assert!(stdout(&o).contains("# final_fidelity="));
    assert_eq!(code(&hepp(&["iterate", "--pp", "0.7", "--ps", "0.8", "--pt", "0.85", "--rounds", "0"])), 2);
    assert_eq!(code(&hepp(&["iterate", "--pp", "0.7", "--ps", "0.8", "--pt", "0.85", "--reuse", "best"])), 0);
}

#[test]
fn output_is_deterministic_and_json_mirrors_csv() {
    let args = ["purify", "--pp", "0.7", "--ps", "0.8", "--pt", "0.85"];
    let a = hepp(&args);
    let b = hepp(&args);
    assert_eq!(a.stdout, b.stdout);
    let (h, rows) = csv(&a);
    let mut jargs = args.to_vec();
    jargs.extend(["--format", "json"]);
    let j: Value = serde_json::from_slice(&hepp(&jargs).stdout).unwrap();
    let arr = j.as_array().unwrap();
    assert_eq!(arr.len(), rows.len());
    for (obj, row) in arr.iter().zip(&rows) {
        let keys: Vec<&String> = obj.as_object().unwrap().keys().collect();
        assert_eq!(keys, h.iter().collect::<Vec<_>>());
        assert_eq!(obj["class"], row[0].as_str());
        assert_eq!(obj["probability_engine"].as_f64().unwrap(), num(&row[1]));
    }
}

#[test]
fn numbers_never_use_exponent_notation() {
    for args in [
        &["purify", "--pp", "0.7", "--ps", "0.8", "--pt", "0.85"][..],
        &["efficiency", "--d-to", "400"][..],
        &["verify", "--steps", "2"][..],
    ] {
        let text = stdout(&hepp(args));
        for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
            for cell in line.split(',') {
                if cell.parse::<f64>().is_ok() {
                    assert!(!cell.contains(['e', 'E']), "{cell}");
                }
            }
        }
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let path = temp_path("config");
    std::fs::write(&path, "# point\npp=0.6\nps = 0.8\npt=0.9 # time-bin\nnoise=bitflip\n").unwrap();
    let p = path.to_str().unwrap();
    let from_config = hepp(&["--config", p, "purify"]);
    let explicit = hepp(&["purify", "--pp", "0.6", "--ps", "0.8", "--pt", "0.9", "--noise", "bitflip"]);
    assert_eq!(code(&from_config), 0);
    assert_eq!(from_config.stdout, explicit.stdout);
    let overridden = hepp(&["purify", "--config", p, "--pp", "0.7"]);
    let direct = hepp(&["purify", "--pp", "0.7", "--ps", "0.8", "--pt", "0.9", "--noise", "bitflip"]);
    assert_eq!(overridden.stdout, direct.stdout);
    std::fs::write(&path, "pp 0.6\n").unwrap();
    assert_eq!(code(&hepp(&["purify", "--config", p])), 2);
    std::fs::write(&path, "bogus=1\n").unwrap();
    assert_eq!(code(&hepp(&["verify", "--config", p])), 2);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code(&hepp(&["verify", "--config", p])), 2);
}

#[test]
fn out_flag_writes_file() {
    let path = temp_path("out.csv");
    let o = hepp(&["thresholds", "--figure", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&hepp(&["thresholds", "--figure", "5"])));
    std::fs::remove_file(&path).unwrap();
}
