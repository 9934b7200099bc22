use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_faultfuse");

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("FAULTFUSE_SEED")
        .env_remove("FAULTFUSE_TRIALS")
        .output()
        .unwrap()
}

const SMALL_FIGURE: &str = r#"
n = 10
m = 2
x_max = 5
seed = 11
taus = [1, 2, 3, 4, 5, 6, 7]
lambdas = [0.1, 0.5, 0.9]
algorithms = ["linear", "bi", "marzullo", "gbi_oneopt"]
trials = 200
moment_samples = 10000
"#;

#[test]
fn sweep_writes_one_row_per_algorithm_and_tau() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fig.toml", SMALL_FIGURE);
    let out = dir.path().join("a.csv");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.first().map(String::as_str), Some("algorithm"));
    assert_eq!(header.last().map(String::as_str), Some("flags"));
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 42);
    let labels: Vec<&str> = rows[..6].iter().map(|r| r.get(0).unwrap()).collect();
    assert_eq!(labels, ["linear@0.1", "linear@0.5", "linear@0.9", "bi", "marzullo", "gbi_oneopt"]);
    // at least 12 significant digits in every float column
    let mse = rows[0].get(3).unwrap();
    let digits = mse.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
    assert!(digits >= 12, "{mse}");

    let again = dir.path().join("b.csv");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn fault_free_sweep_has_zero_consensus_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "clean.toml",
        "n = 5\nm = 3\nx_max = 5\ntaus = [0]\nlambdas = [0.5]\n\
         algorithms = [\"linear\", \"bi\", \"marzullo\", \"gbi_oneopt\", \"constant:1\"]\n\
         trials = 300\nmoment_samples = 10000\n",
    );
    let out = dir.path().join("clean.csv");
    assert!(run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header = reader.headers().unwrap().clone();
    let cns: Vec<usize> = header.iter().enumerate().filter(|(_, h)| h.starts_with("cns_")).map(|(i, _)| i).collect();
    assert_eq!(cns.len(), 6);
    let mut rows = 0;
    for r in reader.records() {
        let r = r.unwrap();
        rows += 1;
        for &i in &cns {
            assert_eq!(r.get(i).unwrap().parse::<f64>().unwrap(), 0.0);
        }
    }
    assert_eq!(rows, 5);
}

#[test]
fn empty_algorithm_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "empty.toml", "n = 4\nm = 2\nx_max = 5\ntaus = [1]\ntrials = 100\n");
    let out = dir.path().join("empty.csv");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("algorithm,tau,lambda,"));
}

#[test]
fn json_output_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "json.toml",
        "n = 4\nm = 2\nx_max = 5\nseed = 1\ntaus = [1]\nalgorithms = [\"bi\"]\ntrials = 100\nformat = \"json\"\n",
    );
    let out = dir.path().join("r.json");
    let o = Command::new(BIN)
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--trials", "150"])
        .env("FAULTFUSE_SEED", "77")
        .env("FAULTFUSE_TRIALS", "400")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    let rec = &v.as_array().unwrap()[0];
    assert_eq!(rec["seed"], 77);
    assert_eq!(rec["trials"], 150);
    assert_eq!(rec["algorithm"], "bi");
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("n = 4\nm = 2\nx_max = 5\ntaus = [3]\ntrials = 100\n", "taus"),
        ("n = 4\nm = 2\nx_max = 5\ntaus = [1]\ntrials = 10\n", "trials"),
        ("n = 4\nm = 2\nx_max = 5\ntaus = [1]\ntrials = 100\nalgorithms = [\"magic\"]\n", "algorithms"),
        ("n = 4\nm = 2\nx_max = 5\ntaus = [1]\ntrials = 100\nlambdas = [1.5]\n", "lambdas"),
        ("n = 4\nm = 2\ntaus = [1]\ntrials = 100\n", "x_max"),
        ("n = 4\nm = 2\nx_max = 5\ntaus = [1]\ntrials = 100\nbogus = 1\n", "bogus"),
    ];
    for (i, (body, field)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.toml"), body);
        let out = dir.path().join("never.csv");
        let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(!o.status.success());
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "expected `{field}` in: {err}");
    }
    let cfg = write_config(dir.path(), "ok.toml", "n = 4\nm = 2\nx_max = 5\ntaus = [1]\ntrials = 100\n");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", "/nonexistent/dir/out.csv"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/dir/out.csv"));
}

#[test]
fn oracle_check_passes_and_catches_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "o.toml", "n = 3\nm = 2\nx_max = 5\nseed = 5\ntaus = [1]\ntrials = 500\n");
    let o = run(&["oracle-check", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("pass"));

    let clean = write_config(dir.path(), "c.toml", "n = 2\nm = 2\nx_max = 5\ntaus = [0]\ntrials = 100\n");
    assert!(run(&["oracle-check", "--config", clean.to_str().unwrap()]).status.success());

    let o = run(&["oracle-check", "--config", cfg.to_str().unwrap(), "--corrupt-weights"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("seed 5") && err.contains("trial"), "{err}");

    let big = write_config(dir.path(), "big.toml", "n = 9\nm = 2\nx_max = 5\ntaus = [1]\ntrials = 100\n");
    let o = run(&["oracle-check", "--config", big.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("`n`"));
}

#[test]
fn fit_linear_prints_both_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.toml",
        "n = 6\nm = 2\nx_max = 5\ntaus = [2]\ntrials = 100\nmoment_samples = 20000\n",
    );
    let o = run(&["fit-linear", "--config", cfg.to_str().unwrap(), "--lambda", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rep = &v.as_array().unwrap()[0];
    assert_eq!(rep["tau"], 2);
    assert!(rep["unit_variance"]["fit"]["evaluation"]["objective"].is_number());
    assert!(rep["literal"].is_object() || rep["literal_error"].is_string());
}
