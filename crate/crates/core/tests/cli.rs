use std::path::PathBuf;
use std::process::{Command, Output};

fn skirent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skirent")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rent_or_buy_file() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("skirent-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rb.txt");
    std::fs::write(&path, "# rent for 1, buy for 4\n2\n1 1\ninf 4\n").unwrap();
    path
}

#[test]
fn opt_prints_offline_cost() {
    let rb = rent_or_buy_file();
    let o = skirent(&["opt", "--instance", rb.to_str().unwrap(), "--days", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "opt(5) = 4");
}

#[test]
fn simulate_reports_ratio() {
    let rb = rent_or_buy_file();
    let o = skirent(&["simulate", "--instance", rb.to_str().unwrap(), "--strategy", "det", "--days", "5", "--csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "T,alg_cost,opt_cost,ratio\n5,8,4,2\n");
}

#[test]
fn randomized_simulation_needs_a_seed() {
    let rb = rent_or_buy_file();
    let rb = rb.to_str().unwrap();
    let o = skirent(&["simulate", "--instance", rb, "--strategy", "rand", "--days", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let a = skirent(&["simulate", "--instance", rb, "--strategy", "rand", "--days", "5", "--seed", "4"]);
    let b = skirent(&["simulate", "--instance", rb, "--strategy", "rand", "--days", "5", "--seed", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn expect_matches_hand_value() {
    let rb = rent_or_buy_file();
    let o = skirent(&["expect", "--instance", rb.to_str().unwrap(), "--strategy", "rand", "--days", "2", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().find(|l| l.starts_with("E[cost]")).unwrap().to_string();
    let value: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((value - 2.920559).abs() < 1e-6);
}

#[test]
fn lower_bound_commands() {
    let o = skirent(&["lb-tradeoff", "--lambda", "0.5"]);
    assert_eq!(stdout(&o).trim(), "4.5");
    assert_eq!(skirent(&["lb-tradeoff", "--lambda", "1.5"]).status.code(), Some(1));

    let o = skirent(&["lb-detseq", "--gamma", "3", "--count", "10"]);
    assert!(stdout(&o).contains("first nonpositive at i = 4"));

    let o = skirent(&["lb-lp", "--prices", "1,2"]);
    assert!(stdout(&o).starts_with("\\"));
    assert!(stdout(&o).contains(" ratio2: + 1 x1 + 2 x2 + 2 y1_2 - 2 g <= 0\n"));

    let o = skirent(&["lb-dual", "--eps", "1", "--delta", "10", "--c-over-delta", "0.25", "--m", "100", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("D2 pair-rows"));
    // Below the threshold on c/delta the parameters are rejected...
    let args = ["lb-dual", "--eps", "1", "--delta", "100", "--c-over-delta", "0.038", "--m", "800", "--check"];
    assert_eq!(skirent(&args).status.code(), Some(1));
    // ...and forcing the construction exposes a violated row.
    let mut forced = args.to_vec();
    forced.push("--no-preconditions");
    assert_eq!(skirent(&forced).status.code(), Some(2));

    let o = skirent(&["claims", "--grid", "500"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn button_reduce_reports_bound() {
    let o = skirent(&["button-reduce", "--prices", "1,2,2,3", "--target", "3", "--eps", "0.5", "--strategy", "rand", "--seeds", "500"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("mean total price"));
}

#[test]
fn experiment_output_independent_of_jobs() {
    let base = ["experiment", "--trials", "20", "--lambdas", "0.1,0.5", "--sigmas", "0,10", "--seed", "3"];
    let one = skirent(&[&base[..], &["--jobs", "1"]].concat());
    let four = skirent(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let text = stdout(&one);
    assert!(text.lines().next().unwrap().starts_with('#'));
    assert_eq!(text.lines().nth(1), Some("lambda,sigma,strategy,trial,T,That,alg_cost,opt_cost,ratio"));
    assert_eq!(text.lines().count(), 2 + 2 * 2 * 20 * 3);
    assert_eq!(skirent(&base[..8]).status.code(), Some(1));
}

#[test]
fn bad_instance_file_is_a_usage_error() {
    let o = skirent(&["opt", "--instance", "/nonexistent/rb.txt", "--days", "3"]);
    assert_eq!(o.status.code(), Some(1));
}
