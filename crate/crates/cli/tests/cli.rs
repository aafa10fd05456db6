use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nnlif"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("nnlif-cli-tests")
        .join(format!("{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn stationary_two_roots() {
    let out = bin().args(["stationary", "--b", "1.5"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("count,2"), "{text}");
    let roots: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("root"))
        .map(|l| l.split(',').nth(1).unwrap().split(' ').next().unwrap())
        .map(|s| s.parse().unwrap())
        .collect();
    assert!((roots[0] - 0.194).abs() < 2e-3);
    assert!((roots[1] - 2.289).abs() < 1e-2);
}

#[test]
fn stationary_none_above_threshold_coupling() {
    let out = bin().args(["stationary", "--b", "2.5"]).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("count,0"));
}

#[test]
fn stationary_unique_for_uncoupled() {
    let out = bin().args(["stationary", "--b", "0"]).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("count,1"));
}

#[test]
fn bifurcation_value() {
    let out = bin().args(["bifurcation"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let b: f64 = text
        .lines()
        .find(|l| l.starts_with("b_star,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((-9.5..=-9.3).contains(&b), "{b}");
}

fn last_rates(csv: &str, k: usize) -> Vec<f64> {
    let vals: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    vals[vals.len().saturating_sub(k)..].to_vec()
}

#[test]
fn discrete_inhibitory_two_cycle_csv() {
    let root = scratch("disc-cycle");
    let out = bin()
        .env("NNLIF_OUT", &root)
        .args(["discrete", "--b", "-14", "--n0", "0.004"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(root.join("discrete/trajectory.csv")).unwrap();
    let tail = last_rates(&csv, 4);
    let (mut lo, mut hi): (Vec<f64>, Vec<f64>) = (vec![], vec![]);
    for v in tail {
        if v < 0.05 {
            lo.push(v)
        } else {
            hi.push(v)
        }
    }
    assert_eq!(lo.len(), 2);
    assert!(lo.iter().all(|v| (v - 0.0022).abs() < 2e-3));
    assert!(hi.iter().all(|v| (v - 0.1136).abs() < 2e-3));
    assert!(root.join("discrete/cobweb.svg").exists());
}

#[test]
fn discrete_excitatory_monotone_csv() {
    let root = scratch("disc-mono");
    let out = bin()
        .env("NNLIF_OUT", &root)
        .args(["discrete", "--b", "1.5", "--n0", "0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(root.join("discrete/trajectory.csv")).unwrap();
    let vals: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(vals.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn discrete_uncoupled_constant_after_first_step() {
    let root = scratch("disc-const");
    let out = bin()
        .env("NNLIF_OUT", &root)
        .args(["discrete", "--b", "0", "--n0", "0.3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(root.join("discrete/trajectory.csv")).unwrap();
    let vals: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(vals.len() >= 2);
    assert!(vals[1..].windows(2).all(|w| (w[1] - w[0]).abs() < 1e-12));
}

#[test]
fn discrete_runs_are_byte_identical() {
    let r1 = scratch("det-1");
    let r2 = scratch("det-2");
    for root in [&r1, &r2] {
        let out = bin()
            .env("NNLIF_OUT", root)
            .args(["discrete", "--b", "-14", "--n0", "0.004"])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    for name in ["discrete/trajectory.csv", "discrete/cobweb.svg"] {
        assert_eq!(
            fs::read(r1.join(name)).unwrap(),
            fs::read(r2.join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
}

const SMALL_CONFIG: &str = r#"
[model]
b = 0.0

[grid]
v_min = -6.0
dv = 0.04

[ic]
family = "double-maxwellian"
mu = -1.0
sigma = 0.5

[run]
t_end = 1.0
snapshot_times = [0.5]

[output]
dir = "small"
"#;

#[test]
fn simulate_small_config_bundle() {
    let root = scratch("sim-small");
    let cfg = root.join("small.toml");
    fs::write(&cfg, SMALL_CONFIG).unwrap();
    let run = || {
        let out = bin()
            .env("NNLIF_OUT", &root)
            .args(["simulate", "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(root.join("small/timeseries.csv")).unwrap()
    };
    let first = run();
    for name in [
        "timeseries.csv",
        "profile_initial.csv",
        "profile_t0.5.csv",
        "profile_final.csv",
        "report.csv",
        "rates.svg",
        "profiles.svg",
    ] {
        assert!(root.join("small").join(name).exists(), "{name} missing");
    }
    let header = String::from_utf8_lossy(&first);
    assert!(header.starts_with("t,N,mass\n"));
    // byte-identical on rerun
    assert_eq!(first, run());
}

#[test]
fn simulate_rejects_zero_t_end() {
    let root = scratch("sim-bad");
    let cfg = root.join("bad.toml");
    fs::write(&cfg, SMALL_CONFIG.replace("t_end = 1.0", "t_end = 0.0")).unwrap();
    let out = bin()
        .env("NNLIF_OUT", &root)
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_unknown_ic_family() {
    let root = scratch("sim-fam");
    let cfg = root.join("bad.toml");
    fs::write(
        &cfg,
        SMALL_CONFIG.replace("double-maxwellian", "mystery-family"),
    )
    .unwrap();
    let out = bin()
        .env("NNLIF_OUT", &root)
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_experiment_is_usage_error() {
    let out = bin()
        .args(["experiment", "no-such-study"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
