//! End-to-end behaviour of the `suscept` binary: output shapes, exit codes,
//! and reproducibility.

use std::process::{Command, Output};

fn suscept(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_suscept"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

#[test]
fn polys_p_table_is_verbatim() {
    let out = suscept(&["polys", "--family", "p", "--k", "8", "--format", "text"]);
    assert!(out.status.success());
    let expected = "\
p_2(x) = x
p_3(x) = x^3
p_4(x) = 3x^5 - 2x^4
p_5(x) = 15x^7 - 20x^6 + 6x^5
p_6(x) = 105x^9 - 210x^8 + 130x^7 - 24x^6
p_7(x) = 945x^11 - 2520x^10 + 2380x^9 - 924x^8 + 120x^7
p_8(x) = 10395x^13 - 34650x^12 + 44100x^11 - 26432x^10 + 7308x^9 - 720x^8
";
    assert_eq!(stdout(&out), expected);
}

#[test]
fn polys_json_gives_ascending_coefficient_strings() {
    let out = suscept(&["polys", "--family", "p", "--k", "4", "--format", "json"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = value.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let p4 = &rows[2];
    assert_eq!(p4["k"], 4);
    assert_eq!(p4["degree"], 5);
    let coeffs: Vec<&str> = p4["coeffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(coeffs, vec!["0", "0", "0", "0", "-2", "3"]);
}

#[test]
fn polys_r_family_starts_at_zero() {
    let out = suscept(&["polys", "--family", "r", "--k", "1", "--format", "text"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "r_0(x) = 1\nr_1(x) = x\n");
}

#[test]
fn polys_out_of_range_is_a_usage_error() {
    let out = suscept(&["polys", "--family", "p", "--k", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn rho_prints_twelve_decimals() {
    let out = suscept(&["rho", "--lambda", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.796812130020\n");

    let out = suscept(&["rho", "--lambda", "1.5"]);
    assert_eq!(stdout(&out), "0.582811643866\n");
}

#[test]
fn rho_rejects_subcritical_lambda() {
    let out = suscept(&["rho", "--lambda", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flags_exit_one() {
    let out = suscept(&["polys", "--family", "p", "--k", "4", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero_and_names_content() {
    let out = suscept(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("polys"));
    assert!(text.contains("verify"));

    let out = suscept(&["verify", "--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("suite"));
}

#[test]
fn simulate_emits_csv_with_header() {
    let out = suscept(&[
        "simulate",
        "--n",
        "200",
        "--nt",
        "0.4",
        "--kmax",
        "3",
        "--replicates",
        "2",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,m,p,t,nt,kmax,S_1,S_2,S_3,chi,largest1,largest2,seed,replicate"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn simulate_single_replicate_works() {
    let out = suscept(&["simulate", "--n", "50", "--p", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("50,0,0,0,0,4,50,50,50,50,1,"));
}

#[test]
fn simulate_requires_exactly_one_density() {
    let out = suscept(&["simulate", "--n", "50", "--p", "0.1", "--nt", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = suscept(&["simulate", "--n", "50"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn trajectory_reports_each_checkpoint() {
    let out = suscept(&[
        "trajectory",
        "--n",
        "40",
        "--checkpoints",
        "0,10,20",
        "--kmax",
        "2",
        "--seed",
        "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("40,0,0,0,0,2,40,40,"));
}

#[test]
fn borel_json_shape() {
    let out = suscept(&["borel", "--lambda", "0.5", "--jmax", "5", "--mmax", "3"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["lambda"], 0.5);
    assert_eq!(value["pmf"].as_array().unwrap().len(), 5);
    assert_eq!(value["moments"].as_array().unwrap().len(), 4);
    assert_eq!(value["moments"][1], 2.0);
    assert_eq!(value["cumulants"].as_array().unwrap().len(), 3);
    assert_eq!(value["size_biased_moments"][1], 4.0);
}

#[test]
fn borel_rejects_bad_lambda() {
    let out = suscept(&["borel", "--lambda", "1.2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn borel_sampling_is_seeded_and_reproducible() {
    let args = ["borel", "--lambda", "0.5", "--sample", "12", "--seed", "4"];
    let a = suscept(&args);
    let b = suscept(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    assert_eq!(text.lines().next().unwrap(), "index,total_progeny");
    assert_eq!(text.lines().count(), 13);
    for line in text.lines().skip(1) {
        let total: u64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(total >= 1);
    }
}

#[test]
fn conjecture_reports_the_discrepancy_without_judgment() {
    let out = suscept(&["conjecture"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("qm_2,2 (stated)  : 2x^5"));
    assert!(text.contains("hp_2,2 (computed): 2x^5 - 2x^4"));
    assert!(text.contains("x^4: stated 0, computed -2"));
    assert!(text.contains("coefficients identical"));
    assert!(!text.to_lowercase().contains("fail"));
}

#[test]
fn verify_statistical_failure_exits_two() {
    // two replicates at tiny n cannot hit the 1% mean window
    let out = suscept(&[
        "verify",
        "--suite",
        "lln",
        "--n",
        "64",
        "--nt",
        "0.5",
        "--replicates",
        "2",
        "--kmax",
        "4",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // the report is still emitted
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["passed"], false);
}

#[test]
fn verify_domain_errors_exit_one() {
    // supercritical suite needs lambda > 1
    let out = suscept(&["verify", "--suite", "supercritical", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    // subcritical theory needs nt < 1
    let out = suscept(&[
        "verify", "--suite", "lln", "--n", "1000", "--nt", "1.5", "--replicates", "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // critical scaling needs n >= 1000
    let out = suscept(&[
        "verify", "--suite", "critical-scaling", "--n-list", "500", "--replicates", "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passing_suite_exits_zero() {
    let out = suscept(&[
        "verify",
        "--suite",
        "lln",
        "--n",
        "20000",
        "--nt",
        "0.5",
        "--replicates",
        "60",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["passed"], true);
    assert!(value["wall_time"].is_null());
    for stat in value["per_statistic"].as_array().unwrap() {
        assert_eq!(stat["verdict"], "pass");
    }
}

#[test]
fn out_flag_writes_the_file_instead_of_stdout() {
    let dir = std::env::temp_dir().join("suscept-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.txt");
    let out = suscept(&[
        "polys",
        "--family",
        "p",
        "--k",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, "p_2(x) = x\np_3(x) = x^3\n");
    std::fs::remove_file(&path).ok();
}

#[test]
fn threads_flag_never_changes_results() {
    let run = |threads: &str| {
        let out = suscept(&[
            "simulate",
            "--n",
            "500",
            "--nt",
            "0.6",
            "--replicates",
            "8",
            "--seed",
            "9",
            "--threads",
            threads,
        ]);
        assert!(out.status.success());
        stdout(&out)
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn verify_csv_and_text_formats_render() {
    let base = [
        "verify",
        "--suite",
        "lln",
        "--n",
        "2000",
        "--nt",
        "0.3",
        "--replicates",
        "30",
        "--seed",
        "3",
    ];
    let mut args = base.to_vec();
    args.extend(["--format", "csv"]);
    let out = suscept(&args);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("name,empirical,theory,se,z,verdict,source"));

    let mut args = base.to_vec();
    args.extend(["--format", "text"]);
    let out = suscept(&args);
    assert!(out.status.success());
    assert!(stdout(&out).contains("overall: pass"));
}
