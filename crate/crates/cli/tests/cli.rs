use std::process::{Command, Output};

use oxy_fbp_core::{integrate, IntegratorOptions, Method, ProblemSpec};

fn oxy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oxy-fbp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn close12(a: f64, b: f64) -> bool {
    (a - b).abs() <= 5e-12 * a.abs().max(b.abs()) || a == b
}

#[test]
fn solve_deg6_csv_round_trips_library_trajectory() {
    let out = oxy(&["solve", "--method", "deg6"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    assert!(text.starts_with("t,s,a\n0.05,1,0.2265625\n"));
    assert!(stderr(&out).contains("concentration_floor"));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["t", "s", "a"]);
    let spec = ProblemSpec::new(Method::Deg6);
    let traj = integrate(&spec, &IntegratorOptions::from_spec(&spec)).unwrap();
    assert_eq!(rows.len(), traj.samples.len());
    for (row, st) in rows.iter().zip(&traj.samples) {
        assert!(
            close12(row[0], st.t) && close12(row[1], st.s) && close12(row[2], st.a),
            "{row:?} vs {st:?}"
        );
    }
}

#[test]
fn deg3_printed_start_warns_with_slack() {
    let out = oxy(&["solve", "--method", "deg3", "--a0", "0.2265625"]);
    assert_eq!(code(&out), 0);
    assert!(
        stderr(&out).contains("5a − s² = +0.1328125"),
        "{}",
        stderr(&out)
    );
    let quiet = oxy(&["solve", "--method", "deg3", "--constraint-start"]);
    assert_eq!(code(&quiet), 0);
    assert!(!stderr(&quiet).contains("warning"));
    assert!(stdout(&quiet).starts_with("t,s,a\n0.05,1,0.2\n"));
}

#[test]
fn oracle_first_row_is_initial_surface() {
    let out = oxy(&[
        "solve", "--method", "oracle", "--nx", "1001", "--t-end", "0.02",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("t,s,a\n0,1,0.5\n"), "{text}");
    let (_, rows) = parse_csv(&text);
    assert_eq!(rows.last().unwrap()[0], 0.02);
    assert_eq!(rows.len(), 21);
}

#[test]
fn solve_json_document() {
    let out = oxy(&[
        "solve",
        "--method",
        "deg3",
        "--constraint-start",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["method"], "deg3");
    assert_eq!(doc["termination"], "extinction");
    let samples = doc["samples"].as_array().unwrap();
    assert_eq!(samples[0]["t"], 0.05);
    assert_eq!(samples[0]["s"], 1.0);
    assert_eq!(samples[0]["a"], 0.2);
    let mut keys: Vec<&String> = doc.as_object().unwrap().keys().collect();
    keys.sort();
    assert_eq!(keys, ["method", "samples", "termination"]);
}

#[test]
fn compare_tables_pass() {
    for (args, rows) in [
        (vec!["compare", "--method", "deg6", "--table", "2"], 9),
        (vec!["compare", "--method", "deg6", "--table", "1"], 3),
        (
            vec![
                "compare", "--method", "oracle", "--table", "2", "--column", "ref10",
            ],
            9,
        ),
    ] {
        let out = oxy(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
        let text = stdout(&out);
        assert!(text.starts_with("t,reference,computed,abs_error,tolerance,pass\n"));
        assert_eq!(text.lines().count(), rows + 1);
        assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    }
}

#[test]
fn compare_reports_misses_and_short_runs() {
    let shifted = oxy(&[
        "compare", "--method", "deg6", "--table", "2", "--t0", "0.051",
    ]);
    assert_eq!(code(&shifted), 1);
    assert_eq!(stdout(&shifted).matches(",false").count(), 3);
    let short = oxy(&[
        "compare", "--method", "deg6", "--table", "2", "--t-end", "0.1",
    ]);
    assert_eq!(code(&short), 3);
    assert!(stdout(&short).is_empty());
}

#[test]
fn profile_endpoints_and_two_point_grid() {
    let out = oxy(&[
        "profile", "--method", "deg6", "--times", "0.05", "--nx", "2",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "t,x,u\n0.05,0,0.2265625\n0.05,1,0\n");
}

#[test]
fn profile_curves_decrease_in_x() {
    let out = oxy(&[
        "profile",
        "--method",
        "deg6",
        "--times",
        "0.05,0.1,0.15",
        "--nx",
        "51",
    ]);
    assert_eq!(code(&out), 0);
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["t", "x", "u"]);
    assert_eq!(rows.len(), 153);
    for block in rows.chunks(51) {
        assert!(block.windows(2).all(|w| w[1][2] <= w[0][2] + 1e-15));
    }
    let late = oxy(&["profile", "--method", "deg6", "--times", "0.3"]);
    assert_eq!(code(&late), 3);
}

#[test]
fn oracle_profile_matches_initial_data() {
    let out = oxy(&["profile", "--method", "oracle", "--times", "0", "--nx", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "t,x,u\n0,0,0.5\n0,0.5,0.125\n0,1,0\n");
}

#[test]
fn steady_examples() {
    let out = oxy(&["steady", "--c0", "0.5", "--m", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "c0,m,x0,coefficient\n0.5,1,1,0.5\n");
    let zero = oxy(&["steady", "--c0", "0", "--m", "1", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&zero)).unwrap();
    assert_eq!(doc["x0"], 0.0);
    assert_eq!(code(&oxy(&["steady", "--c0", "0.5", "--m", "0"])), 2);
    assert_eq!(code(&oxy(&["steady", "--c0", "-1", "--m", "1"])), 2);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["solve", "--method", "deg5"],
        vec!["solve", "--method", "deg6", "--nx", "501"],
        vec!["solve", "--method", "deg6", "--a0", "-0.1"],
        vec!["solve", "--method", "deg6", "--dt", "0"],
        vec!["solve", "--method", "deg6", "--t-end", "0.01"],
        vec!["solve", "--method", "oracle", "--nx", "11"],
        vec!["solve", "--method", "oracle", "--a0", "0.2"],
        vec!["compare", "--method", "deg6", "--table", "3"],
        vec!["compare", "--method", "deg6"],
        vec!["profile", "--method", "deg6", "--times", "0.1", "--nx", "1"],
        vec!["frobnicate"],
        vec![],
    ] {
        let out = oxy(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(stdout(&out).is_empty());
    }
}

#[test]
fn identical_invocations_are_bit_identical() {
    for args in [
        vec!["solve", "--method", "deg6", "--format", "json"],
        vec!["solve", "--method", "oracle", "--nx", "201"],
        vec!["compare", "--method", "deg6", "--table", "2"],
    ] {
        assert_eq!(oxy(&args).stdout, oxy(&args).stdout, "{args:?}");
    }
}

#[test]
fn sweep_output_is_independent_of_threads() {
    let base = [
        "solve",
        "--method",
        "deg3",
        "--sweep-a0",
        "0.2,0.2265625,0.18",
    ];
    let serial = oxy(&base);
    let mut par_args = base.to_vec();
    par_args.push("--parallel");
    let parallel = oxy(&par_args);
    assert_eq!(code(&serial), 0);
    assert_eq!(serial.stdout, parallel.stdout);
    let text = stdout(&serial);
    assert!(text.starts_with("a0,t,s,a\n0.2,0.05,1,0.2\n"));
    let (_, rows) = parse_csv(&text);
    let firsts: Vec<f64> = rows.iter().filter(|r| r[1] == 0.05).map(|r| r[0]).collect();
    assert_eq!(firsts, [0.2, 0.2265625, 0.18]);
}

#[test]
fn writes_to_out_path() {
    let dir = std::env::temp_dir().join(format!("oxy-fbp-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("steady.csv");
    let out = oxy(&[
        "steady",
        "--c0",
        "2",
        "--m",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).is_empty());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "c0,m,x0,coefficient\n2,1,2,0.5\n"
    );
    let bad = oxy(&[
        "steady",
        "--c0",
        "2",
        "--m",
        "1",
        "--out",
        dir.join("no/such/file").to_str().unwrap(),
    ]);
    assert_eq!(code(&bad), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}
