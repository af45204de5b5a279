use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mixfbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixfbm")).args(args).output().expect("spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn simulate_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "simulate", "--hurst", "0.5", "--subjects", "4", "--n-obs", "16", "--horizon", "5", "--mu", "-2",
        "--sigma2", "1", "--seed", "11", "--out",
    ];
    let p = path.to_str().unwrap();
    args.push(p);
    args.extend_from_slice(extra);
    mixfbm(&args)
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    let out = simulate_to(&panel, &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let log = String::from_utf8(out.stderr).unwrap();
    assert!(log.contains("seed 11") && log.contains("j * 5 / 16"), "{log}");

    let text = fs::read_to_string(&panel).unwrap();
    assert!(text.starts_with("subject,t,y\n1,0.3125,"));
    assert_eq!(text.lines().count(), 1 + 4 * 16);

    let out = mixfbm(&["hurst", "--input", panel.to_str().unwrap(), "--subject", "3", "--filter", "diff3"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["subject"], 3);
    assert_eq!(doc["filter_order"], 3);
    let h = doc["h_hat"].as_f64().unwrap();
    assert!((0.01..=0.99).contains(&h));

    let out = mixfbm(&["effects", "--input", panel.to_str().unwrap(), "--hurst", "0.5", "--level", "0.9"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["q"].as_f64().unwrap(), 5.0);
    assert_eq!(doc["exact_std_basis"], "plug-in");
    let mu = doc["mu_hat"].as_f64().unwrap();
    assert!(doc["ci_mu"]["lo"].as_f64().unwrap() < mu && mu < doc["ci_mu"]["hi"].as_f64().unwrap());
    assert!(doc["sigma2_hat_clamped"].as_f64().unwrap() >= 0.0);
}

#[test]
fn simulate_to_stdout_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    simulate_to(&panel, &[]);
    let out = mixfbm(&[
        "simulate", "--hurst", "0.5", "--subjects", "4", "--n-obs", "16", "--horizon", "5", "--mu", "-2",
        "--sigma2", "1", "--seed", "11",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(out.stdout, fs::read(&panel).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &[],
        &["simulate", "--hurst", "0.5"],
        &["simulate", "--hurst", "0", "--subjects", "2", "--n-obs", "4", "--mu", "0", "--sigma2", "1"],
        &["simulate", "--hurst", "0.5", "--subjects", "2", "--n-obs", "4", "--mu", "0", "--sigma2", "-1"],
        &["simulate", "--hurst", "0.5", "--subjects", "2", "--n-obs", "4", "--mu", "0", "--sigma2", "1", "--sampler", "fast"],
        &["hurst", "--input", "p.csv", "--filter", "sobel"],
        &["hurst", "--input", "p.csv", "--filter", "1,-1"],
        &["hurst", "--input", "p.csv", "--k", "0"],
        &["effects", "--input", "p.csv"],
        &["effects", "--input", "p.csv", "--hurst", "0.5", "--level", "1"],
        &["experiment", "--out", "x"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = mixfbm(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    let out = mixfbm(&["hurst", "--input", "p.csv", "--filter", "1,-1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--filter"));
}

#[test]
fn subject_out_of_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    simulate_to(&panel, &[]);
    let out = mixfbm(&["hurst", "--input", panel.to_str().unwrap(), "--subject", "5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--subject"));
}

#[test]
fn bad_panels_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let ragged = write("ragged.csv", "subject,t,y\n1,1,0\n1,2,1\n2,1,0\n2,3,1\n");
    let nonuniform = write("nonuniform.csv", "subject,t,y\n1,1,0\n1,1.5,1\n1,4,2\n1,4.5,3\n");
    let constant = write("constant.csv", "subject,t,y\n1,1,0\n1,2,0\n1,3,0\n1,4,0\n");
    let single = write("single.csv", "subject,t,y\n1,1,0.5\n1,2,1\n");
    let missing = dir.path().join("absent.csv");

    let cases: Vec<Vec<&str>> = vec![
        vec!["hurst", "--input", &ragged],
        vec!["effects", "--input", &ragged, "--hurst", "0.5"],
        vec!["hurst", "--input", &nonuniform],
        vec!["hurst", "--input", &constant],
        vec!["effects", "--input", &single, "--hurst", "0.5"],
        vec!["hurst", "--input", missing.to_str().unwrap()],
    ];
    for args in cases {
        let out = mixfbm(&args);
        assert_eq!(code(&out), 4, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn unwritable_output_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate_to(&dir.path().join("missing").join("p.csv"), &[]);
    assert_eq!(code(&out), 5);

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(
        &cfg,
        "h_list = 0.5\nn_subjects_list = 2\nn_obs_list = 4\nhorizon = 1\nmu0 = 0\nsigma20 = 1\nreplications = 2\n",
    )
    .unwrap();
    let out = mixfbm(&[
        "experiment", "--config", cfg.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 5);
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, "h_list = 0.5\nn_subjects_list = 2\nn_obs_list = 4\nhorizon = 1\nmu0 = 0\nreplications = 2\n").unwrap();
    let out = mixfbm(&["experiment", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma20"));

    let out = mixfbm(&[
        "experiment", "--config", dir.path().join("none.txt").to_str().unwrap(), "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn circulant_sampler_runs() {
    let dir = tempfile::tempdir().unwrap();
    let panel = dir.path().join("panel.csv");
    let out = simulate_to(&panel, &["--sampler", "circulant"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("circulant"));
    let exact = dir.path().join("exact.csv");
    simulate_to(&exact, &[]);
    assert_ne!(fs::read(&panel).unwrap(), fs::read(&exact).unwrap());
}
