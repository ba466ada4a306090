use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cfdim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

fn cfdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfdim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(args: &[&str]) -> (Output, Value) {
    let mut a = args.to_vec();
    a.extend(["--report-json", "-"]);
    let o = cfdim(&a);
    let text = stdout(&o);
    let start = text.find("\n{").map(|i| i + 1).unwrap_or(0);
    let v = serde_json::from_str(&text[start..]).unwrap_or(Value::Null);
    (o, v)
}

#[test]
fn matrix_stats_empty_set() {
    let (o, v) = report(&["matrix-stats", "--set", "E2", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(v["allowed_words"], 1024);
    assert_eq!(v["k"], 1);
}

#[test]
fn matrix_stats_b1() {
    let (o, v) = report(&["matrix-stats", "--set", "B1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(v["allowed_words"], 41186);
    assert_eq!(v["k"], 138);
}

#[test]
fn dim_e2_lower_certificate() {
    let (o, v) = report(&["dim", "--set", "E2", "--t", "0.53128"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(v["runs"][0]["certificate"]["direction"], "LOWER");
    assert_eq!(v["runs"][0]["certificate"]["t"], "0.53128");
    assert_eq!(v["lower"], "0.53128");
    let lo: f64 = v["runs"][0]["certificate"]["ratio_lo"].as_str().unwrap().parse().unwrap();
    assert!(lo > 1.0);
}

#[test]
fn dim_bracket_bisects() {
    let (o, v) = report(&["dim", "--set", "E2", "--t-lo", "0.5", "--t-hi", "0.6", "--width", "0.001"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lo: f64 = v["lower"].as_str().unwrap().parse().unwrap();
    let hi: f64 = v["upper"].as_str().unwrap().parse().unwrap();
    assert!(lo < hi && hi - lo <= 0.001 + 1e-12);
}

#[test]
fn undecided_exits_2() {
    let o = cfdim(&["dim", "--set", "E2", "--t", "0.5312805063", "--partition", "16", "--no-escalate"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("UNDECIDED"));
}

#[test]
fn deterministic_reports() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("elapsed_secs");
        v.as_object_mut().unwrap().remove("timings");
        for r in v["runs"].as_array_mut().unwrap() {
            r.as_object_mut().unwrap().remove("timings");
            r["certificate"].as_object_mut().unwrap().remove("elapsed_secs");
        }
        v
    };
    let args = ["dim", "--set", "E2", "--t", "0.52", "--threads", "2"];
    let (_, a) = report(&args);
    let (_, b) = report(&args);
    assert_eq!(strip(a), strip(b));
}

#[test]
fn config_file_and_overrides() {
    let words = tmp("words.txt");
    std::fs::write(&words, "# two words\n121 2222\n").unwrap();
    let cfg = tmp("job.toml");
    std::fs::write(
        &cfg,
        "set = \"OMEGA\"\nforbidden_file = \"words.txt\"\nm = 6\nt = [\"0.3\"]\n",
    )
    .unwrap();
    let (o, v) = report(&["dim", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(v["forbidden_words"], 2);
    assert_eq!(v["runs"][0]["eigen"]["m"], 6);
    let (_, v) = report(&["dim", "--config", cfg.to_str().unwrap(), "--degree", "5", "--t", "0.2"]);
    assert_eq!(v["runs"][0]["eigen"]["m"], 5);
    assert_eq!(v["runs"][0]["certificate"]["t"], "0.2");
}

#[test]
fn config_errors_name_the_field() {
    let cfg = tmp("bad.toml");
    std::fs::write(&cfg, "set = \"B1\"\nm = \"eight\"\n").unwrap();
    let o = cfdim(&["matrix-stats", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("line 2") && e.contains('m'), "{e}");
    std::fs::write(&cfg, "sett = \"B1\"\n").unwrap();
    let e = stderr(&cfdim(&["matrix-stats", "--config", cfg.to_str().unwrap()]));
    assert!(e.contains("sett"), "{e}");
}

#[test]
fn omega_needs_a_word_list() {
    let o = cfdim(&["matrix-stats", "--set", "OMEGA"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("externally supplied"));
}

#[test]
fn long_runs_need_a_flag() {
    let o = cfdim(&["dim", "--set", "X", "--t", "0.5", "--partition", "1024"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--allow-long"));
}

#[test]
fn search_script_first_exclusion() {
    let script = tmp("search.toml");
    std::fs::write(&script, "seed = \"2*\"\nthreshold = \"3.334369\"\nmax_nodes = 2000\n").unwrap();
    let out = tmp("found.txt");
    let o = cfdim(&["search", script.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let words = cfdim_core::sets::parse_word_list(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(words[0].to_string(), "21212");
    assert!(words.iter().all(|w| w.len() >= 5));
}

#[test]
fn search_above_sup_abandons_root() {
    let script = tmp("high.toml");
    std::fs::write(&script, "seed = \"2*\"\nthreshold = \"3.5\"\n").unwrap();
    let (o, v) = report(&["search", script.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(v["tree"].as_array().unwrap().len(), 1);
    assert_eq!(v["tree"][0]["status"], "A");
    assert!(v["forbidden"].as_array().unwrap().is_empty());
}

#[test]
fn corrupted_table_row_fails_with_line_number() {
    let fx = tmp("tables.txt");
    std::fs::write(&fx, "# two rows\n1 | 3 | 2112*12 | 3.2802 | 3.3193 | S\n1 | 3x | 2112*12 | 3.29 | 3.31 | S\n").unwrap();
    let o = cfdim(&["verify-tables", "--fixture", fx.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.lines().any(|l| l.starts_with("line   2") && l.ends_with("pass")), "{s}");
    assert!(s.lines().any(|l| l.starts_with("line   3") && l.contains("FAIL")), "{s}");
}

#[test]
fn gap_fixture_passes() {
    let o = cfdim(&["gap-check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(", 0 failed"));
}

#[test]
fn missing_fixture_is_an_error() {
    let o = cfdim(&["gap-check", "--fixture", "/nonexistent/fixture.txt"]);
    assert_eq!(o.status.code(), Some(1));
}
