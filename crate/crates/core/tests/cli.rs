use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qillum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qillum")).args(args).output().expect("run qillum")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn value(text: &str, key: &str) -> String {
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in:\n{text}"))
        .to_string()
}

/// Splits `x +- sd` into its parts.
fn with_sd(s: &str) -> (f64, f64) {
    let (a, b) = s.split_once(" +- ").unwrap();
    (a.parse().unwrap(), b.parse().unwrap())
}

#[test]
fn analytic_defaults() {
    let out = qillum(&["analytic"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(value(&text, "mu"), "0.075");
    assert!(value(&text, "epsilon_ideal").starts_with("14.333"));
    assert!(value(&text, "R").starts_with("14.333"));
    let mean1: f64 = value(&text, "mean1").parse().unwrap();
    assert!((mean1 - 4185.0).abs() < 1e-6);
}

#[test]
fn analytic_mu_one_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let out = qillum(&["analytic", "--mu", "1", "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(value(&stdout(&out), "R"), "2");
    let table = fs::read_to_string(csv).unwrap();
    assert!(table.starts_with("quantity,value\n"));
    assert!(table.contains("\nR,2\n"));
}

#[test]
fn invalid_efficiency_names_the_field() {
    let out = qillum(&["analytic", "--eta1", "1.5"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("channel.eta1"), "{err}");
}

#[test]
fn bad_inputs_exit_nonzero() {
    assert!(!qillum(&["reproduce", "fig9"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[channel]\neta3 = 0.5\n").unwrap();
    let out = qillum(&["analytic", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta3"));
}

#[test]
fn help_lists_keys_with_units() {
    let text = stdout(&qillum(&["simulate", "--help"]));
    for key in [
        "--source.kind",
        "--source.mu",
        "--source.modes",
        "--source.split_ratio",
        "--channel.eta1",
        "--channel.eta2",
        "--channel.reflectivity",
        "--channel.target",
        "--channel.mode_match",
        "--background.modes",
        "--background.mean",
        "--scenario.pixel_pairs",
        "--scenario.images",
        "--scenario.images_per_decision",
        "--scenario.read_noise",
        "--run.seed",
        "--run.threads",
        "--run.out",
    ] {
        assert!(text.contains(key), "missing {key}");
    }
    assert!(text.contains("photons per pixel"));
}

fn simulate_into(dir: &Path, extra: &[&str]) -> String {
    let mut args = vec!["simulate", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = qillum(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

#[test]
fn simulate_is_deterministic_under_a_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--seed", "7", "--frames", "50", "--background", "300", "--threads", "2"];
    simulate_into(a.path(), &args);
    simulate_into(b.path(), &args);
    for file in ["frames.csv", "records.csv", "summary.txt", "config.toml"] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs");
    }
    let frames = fs::read_to_string(a.path().join("frames.csv")).unwrap();
    assert!(frames.starts_with("frame,pixel,n1,n2,hypothesis\n"));
    assert_eq!(frames.lines().count(), 1 + 2 * 50 * 80);
}

#[test]
fn written_config_reproduces_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    simulate_into(a.path(), &["--seed", "99", "--frames", "30", "--mu", "0.1", "--no-frames"]);
    let cfg = a.path().join("config.toml");
    simulate_into(b.path(), &["--config", cfg.to_str().unwrap(), "--no-frames"]);
    assert_eq!(
        fs::read(a.path().join("summary.txt")).unwrap(),
        fs::read(b.path().join("summary.txt")).unwrap()
    );
}

#[test]
fn missing_seed_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let text = simulate_into(dir.path(), &["--frames", "20", "--no-frames"]);
    let seed: u64 = value(&text, "seed").parse().unwrap();
    let again = tempfile::tempdir().unwrap();
    let text2 = simulate_into(again.path(), &["--frames", "20", "--no-frames", "--seed", &seed.to_string()]);
    assert_eq!(value(&text, "covariance_in"), value(&text2, "covariance_in"));
}

#[test]
fn dark_probe_gives_zero_covariance() {
    let dir = tempfile::tempdir().unwrap();
    let text = simulate_into(dir.path(), &["--seed", "3", "--frames", "40", "--target", "absent", "--background", "0", "--no-frames"]);
    let (cov, _) = with_sd(&value(&text, "covariance_in"));
    assert_eq!(cov, 0.0);
}

#[test]
fn default_simulation_recovers_ideal_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let text = simulate_into(dir.path(), &["--seed", "2024", "--no-frames"]);
    let (eps, sd) = with_sd(&value(&text, "epsilon"));
    assert!((eps - 14.333_333).abs() <= 3.0 * sd, "{eps} +- {sd}");
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn reduced_budget_keeps_analytic_curves() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, frames) in [(a.path(), "200"), (b.path(), "800")] {
        let out = qillum(&["reproduce", "fig3", "--frames", frames, "--seed", "5", "--bootstrap", "50", "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (mut wider, mut total) = (0, 0);
    for name in ["fig3_tw_mb1300", "fig3_tw_mb57", "fig3_th_mb1300"] {
        let small = read_rows(&a.path().join(format!("{name}.csv")));
        let large = read_rows(&b.path().join(format!("{name}.csv")));
        assert_eq!(small.len(), large.len());
        for (x, y) in small.iter().zip(&large) {
            assert_eq!(x[6], y[6], "analytic column changed");
            let (ux, uy): (f64, f64) = (x[5].parse().unwrap(), y[5].parse().unwrap());
            total += 1;
            if ux > uy {
                wider += 1;
            }
        }
        let meta = fs::read_to_string(a.path().join(format!("{name}.meta.toml"))).unwrap();
        assert!(meta.contains("frames_per_hypothesis = 200"));
        assert!(meta.contains("seed = "));
    }
    assert!(wider * 10 >= total * 9, "{wider} of {total} uncertainties wider at 200 frames");
}
