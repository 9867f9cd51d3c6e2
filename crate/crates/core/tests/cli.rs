use std::f64::consts::PI;
use std::fs;
use std::process::Command;

use legendre_ep::cli::{run, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, OUT_DIR_ENV};
use legendre_ep::records::{parse_grid_csv, parse_json_array, parse_jsonl, Record};

const BIN: &str = env!("CARGO_BIN_EXE_legendre-ep");

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("legendre-ep").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn single(text: &str) -> Record {
    Record::parse(text.trim()).unwrap()
}

#[test]
fn p_at_degree_zero_is_one() {
    let (code, out, _) = call(&["eval", "P", "--mu", "0", "--nu", "0", "--cosh-rho", "5"]);
    assert_eq!(code, EXIT_OK);
    let r = single(&out);
    assert_eq!(r.num("re"), Some(1.0));
    assert_eq!(r.num("im"), Some(0.0));
}

#[test]
fn conical_q_at_k0_has_closed_modulus() {
    let (code, out, _) = call(&["eval", "Q", "--K", "0", "--tau", "1"]);
    assert_eq!(code, EXIT_OK);
    let r = single(&out);
    let m2 = r.num("re").unwrap().powi(2) + r.num("im").unwrap().powi(2);
    let want = PI / (2.0 * 3f64.sqrt());
    assert!((m2 - want).abs() < 1e-12 * want, "{m2} vs {want}");
}

#[test]
fn eval_kinds_agree() {
    let args = ["--K", "0.3", "--nu", "0.2", "--nu-im", "1.3", "--cosh-rho", "3"];
    let value = |kind: &str| {
        let mut v = vec!["eval", kind];
        v.extend(args);
        let (code, out, err) = call(&v);
        assert_eq!(code, EXIT_OK, "{err}");
        let r = single(&out);
        (r.num("re").unwrap(), r.num("im").unwrap())
    };
    let (a, b) = (value("Q"), value("Q_whipple"));
    assert!((a.0 - b.0).abs() + (a.1 - b.1).abs() < 1e-12 * (a.0.abs() + a.1.abs()));
}

#[test]
fn eval_csv_has_header_and_row() {
    let (code, out, _) = call(&["eval", "Q", "--K", "0", "--tau", "1", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    assert!(lines[0].contains("re"));
}

#[test]
fn pole_evaluation_is_domain_error() {
    let (code, _, err) = call(&["eval", "Q", "--K", "0", "--tau", "0"]);
    assert_eq!(code, EXIT_DOMAIN);
    let r = single(&err);
    assert_eq!(r.str("error"), Some("pole"));
    assert!((r.num("location_re").unwrap() + 0.5).abs() < 1e-12);
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(call(&["eval", "R"]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["eval", "Q", "--rho", "1", "--cosh-rho", "2"]).0, EXIT_USAGE);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn rho_domain_is_checked() {
    assert_eq!(call(&["eval", "Q", "--K", "0", "--tau", "1", "--cosh-rho", "0.5"]).0, EXIT_DOMAIN);
}

#[test]
fn polescan_writes_three_files() {
    for (k, expected) in [("0", 1usize), ("-2", 0), ("0.5", 6)] {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().to_str().unwrap();
        let (code, out, err) = call(&["polescan", "--K", k, "--nx", "36", "--ny", "11", "--out", path]);
        assert_eq!(code, EXIT_OK, "{err}");
        let summary = single(&out);
        assert_eq!(summary.num("pole_count"), Some(expected as f64));

        let stem = format!("polescan_K{k}");
        let poles = parse_jsonl(&fs::read_to_string(dir.path().join(format!("{stem}.jsonl"))).unwrap()).unwrap();
        assert_eq!(poles.len(), expected);
        for p in &poles {
            assert!(p.num("nu_re").unwrap() > -6.0 && p.num("nu_re").unwrap() <= 1.0);
        }

        let (xs, ys, vals) = parse_grid_csv(&fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap()).unwrap();
        assert_eq!((xs.len(), ys.len(), vals.len()), (36, 11, 36 * 11));

        let meta = single(&fs::read_to_string(dir.path().join(format!("{stem}.meta.json"))).unwrap());
        assert_eq!(meta.num("nx"), Some(36.0));
        assert_eq!(meta.num("ny"), Some(11.0));
        let failed = vals.iter().filter(|v| v.is_nan()).count();
        assert_eq!(meta.num("failed_cells"), Some(failed as f64));
    }
}

#[test]
fn polescan_honours_output_dir_variable() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(BIN)
        .args(["polescan", "--K", "-1", "--nx", "8", "--ny", "3"])
        .env(OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(dir.path().join("polescan_K-1.meta.json").exists());
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("not_a_dir");
    fs::write(&file, "x").unwrap();
    let (code, _, err) = call(&["polescan", "--K", "0", "--nx", "4", "--ny", "3", "--out", file.to_str().unwrap()]);
    assert_eq!(code, legendre_ep::cli::EXIT_IO, "{err}");
}

#[test]
fn eptable_json_round_trips() {
    let (code, out, _) = call(&["eptable"]);
    assert_eq!(code, EXIT_OK);
    let rows = parse_json_array(&out).unwrap();
    assert_eq!(rows.len(), 9);
    let kinds: Vec<_> = rows.iter().map(|r| r.str("kind").unwrap().to_string()).collect();
    assert_eq!(kinds, ["none", "infinite", "none", "infinite", "finite", "infinite", "finite", "infinite", "finite"]);
    let again = parse_json_array(&legendre_ep::records::to_json_array(&rows)).unwrap();
    assert_eq!(rows, again);

    let (code, table, _) = call(&["eptable", "--format", "table"]);
    assert_eq!(code, EXIT_OK);
    assert!(table.lines().count() >= 10);
}

#[test]
fn norm_methods_agree() {
    let (code, out, _) = call(&["norm", "--K", "-0.25", "--method", "quadrature", "--method", "series"]);
    assert_eq!(code, EXIT_OK);
    let rows = parse_jsonl(&out).unwrap();
    assert_eq!(rows.len(), 2);
    let (a, b) = (rows[0].num("value").unwrap(), rows[1].num("value").unwrap());
    assert!((a - 5.850116389092).abs() < 1e-9);
    assert!((a - b).abs() < 1e-8 * a);
}

#[test]
fn norm_at_k0_diverges_unless_regularized() {
    let (code, _, err) = call(&["norm", "--K", "0"]);
    assert_eq!(code, EXIT_DOMAIN);
    assert_eq!(single(&err).str("error"), Some("divergent"));

    let (code, out, _) = call(&["norm", "--K", "0", "--method", "regularized"]);
    assert_eq!(code, EXIT_OK);
    let r = single(&out);
    let want = PI * PI / (4.0 * 3f64.sqrt()) / 0.1;
    assert!((r.num("value").unwrap() - want).abs() < 1e-8 * want);
}

#[test]
fn verify_single_check() {
    let (code, out, _) = call(&["verify", "--filter", "whipple", "--json"]);
    assert_eq!(code, EXIT_OK);
    let rows = parse_json_array(&out).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].str("name"), Some("whipple"));
}

#[test]
fn verify_unknown_filter_lists_checks() {
    let (code, _, err) = call(&["verify", "--filter", "nope"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("gamma_kernel") && err.contains("collapse"));
}

#[test]
fn verify_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = call(&["verify", "--filter", "closed_form", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(dir.path().join("verify_report.json")).unwrap();
    assert!(text.contains("closed_form"));
}
