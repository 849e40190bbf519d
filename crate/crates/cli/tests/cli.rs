//! Command-line contract tests: exit codes, output shapes, round trips.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corrcount"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("corrcount-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

const EDGE_26: &str = "p lcol 2 26\ne 1 2\n";

#[test]
fn check_passes_in_regime_and_exits_zero() {
    let file = temp_file("edge26.lcol", EDGE_26);
    let out = run(&["check", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("verdict: pass"));
}

#[test]
fn check_fails_beta_condition_with_exit_one() {
    let file = temp_file("edge26b.lcol", EDGE_26);
    let out = run(&["check", file.to_str().unwrap(), "--beta", "15"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("beta condition: FAIL"));
}

#[test]
fn check_rejects_triangles() {
    let file = temp_file("tri.lcol", "p lcol 3 26\ne 1 2\ne 2 3\ne 1 3\n");
    let out = run(&["check", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("triangle"));
}

#[test]
fn parse_error_exits_two_with_line_number() {
    let file = temp_file("bad.lcol", "p lcol 2 3\nz 1 2\n");
    let out = run(&["check", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_exits_two() {
    let out = run(&["exact", "/nonexistent/nowhere.lcol"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_reports_integer_count() {
    let file = temp_file("k2.lcol", "p lcol 2 3\ne 1 2\n");
    let out = run(&["exact", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Z = 6"), "{}", stdout(&out));
}

#[test]
fn exact_budget_violation_exits_three() {
    let file = temp_file("cycle.lcol", "p lcol 4 26\ne 1 2\ne 2 3\ne 3 4\ne 1 4\n");
    let out = run(&["exact", file.to_str().unwrap(), "--budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("induced width"), "{err}");
}

#[test]
fn count_out_of_regime_needs_force() {
    let file = temp_file("small.lcol", "p lcol 2 3\ne 1 2\n");
    let out = run(&["count", file.to_str().unwrap(), "--depth", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let forced = run(&["count", file.to_str().unwrap(), "--depth", "2", "--force"]);
    assert_eq!(forced.status.code(), Some(0), "{}", stdout(&forced));
}

#[test]
fn count_edge_depth_two_matches_exact_product() {
    let file = temp_file("edge26c.lcol", EDGE_26);
    let out = run(&["count", file.to_str().unwrap(), "--depth", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("log Z_hat = "))
        .unwrap();
    let log_z: f64 = line.trim().parse().unwrap();
    assert!(
        ((log_z - 650.0_f64.ln()).exp() - 1.0).abs() < 1e-9,
        "{log_z}"
    );
    assert!(text.contains("Z_hat = 6.5000000000"), "{text}");
}

#[test]
fn converge_emits_fixed_csv_header_and_rows() {
    let file = temp_file("path4.lcol", "p lcol 4 26\ne 1 2\ne 2 3\ne 3 4\n");
    let out = run(&["converge", file.to_str().unwrap(), "--max-depth", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,max_abs_log_marginal_err,log_z_hat,rel_err_vs_exact,bound"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for (d, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 5, "{row}");
        assert_eq!(fields[0], d.to_string());
        for f in &fields[1..] {
            // every populated field parses as a float, locale-independent
            if !f.is_empty() {
                f.parse::<f64>().unwrap_or_else(|_| panic!("bad field {f}"));
            }
        }
    }
}

#[test]
fn converge_error_shrinks_by_final_depth() {
    let file = temp_file("cycle5.lcol", "p lcol 5 26\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 1 5\n");
    let out = run(&["converge", file.to_str().unwrap(), "--max-depth", "3"]);
    let text = stdout(&out);
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    let rel_first: f64 = rows.first().unwrap()[3].parse().unwrap();
    let rel_last: f64 = rows.last().unwrap()[3].parse().unwrap();
    assert!(rel_last <= rel_first, "{rel_last} vs {rel_first}");
}

#[test]
fn gen_output_is_deterministic_and_round_trips() {
    let args = [
        "gen",
        "--kind",
        "random-triangle-free",
        "--nodes",
        "8",
        "--max-degree",
        "2",
        "--q",
        "26",
        "--seed",
        "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "same seed must give identical bytes");
    let text = stdout(&a);
    let inst = corrcount::formats::parse_lcol(&text).unwrap();
    assert_eq!(corrcount::formats::emit_lcol(&inst), text);
    assert_eq!(inst.graph().validate(), Ok(()));
}

#[test]
fn gen_rejects_infeasible_universe() {
    let out = run(&["gen", "--kind", "cycle", "--nodes", "4", "--q", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_unknown_kind_exits_two() {
    let out = run(&["gen", "--kind", "clique", "--nodes", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn potts_emits_json_and_verdict_on_stderr() {
    let graph = temp_file("p3.lcol", "p lcol 3 26\ne 1 2\ne 2 3\n");
    let out = run(&["potts", graph.to_str().unwrap(), "--q", "2", "--b", "0.03"]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("passes (gamma = 0.960576)"), "{err}");
    let m = corrcount::formats::parse_mrf_json(&stdout(&out)).unwrap();
    assert_eq!(m.alphabet(), 2);
    assert_eq!(m.node_count(), 3);

    let hot = run(&["potts", graph.to_str().unwrap(), "--q", "2", "--b", "0.05"]);
    let err = String::from_utf8(hot.stderr).unwrap();
    assert!(err.contains("fails"), "{err}");
}

#[test]
fn potts_rejects_nonfinite_temperature() {
    let graph = temp_file("p2.lcol", "p lcol 2 26\ne 1 2\n");
    let out = run(&["potts", graph.to_str().unwrap(), "--q", "2", "--b", "inf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mrf_count_and_exact_agree_through_files() {
    let graph = temp_file("c4.lcol", "p lcol 4 26\ne 1 2\ne 2 3\ne 3 4\ne 1 4\n");
    let potts_out = run(&["potts", graph.to_str().unwrap(), "--q", "2", "--b", "0.03"]);
    let mrf = temp_file("c4.mrf.json", &stdout(&potts_out));
    let exact = run(&["exact", mrf.to_str().unwrap()]);
    let count = run(&["count", mrf.to_str().unwrap(), "--depth", "8"]);
    let get = |out: &Output| -> f64 {
        stdout(out)
            .lines()
            .find_map(|l| {
                l.strip_prefix("log Z = ")
                    .or_else(|| l.strip_prefix("log Z_hat = "))
                    .map(str::to_string)
            })
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    let diff = (get(&exact) - get(&count)).abs();
    assert!(diff < 1e-6, "log gap {diff}");
}

#[test]
fn format_override_beats_extension() {
    let file = temp_file("odd-extension.txt", EDGE_26);
    let fails = run(&["check", file.to_str().unwrap()]);
    assert_eq!(fails.status.code(), Some(2), "format must be ambiguous");
    let ok = run(&["check", file.to_str().unwrap(), "--format", "lcol"]);
    assert_eq!(ok.status.code(), Some(0));
}
