use std::path::Path;
use std::process::{Command, Output};

fn nearcrit(args: &[&str], out: &Path, env_seed: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nearcrit"));
    c.args(args).arg("--out").arg(out).env_remove("NEARCRIT_SEED");
    if let Some(s) = env_seed {
        c.env("NEARCRIT_SEED", s);
    }
    c.output().unwrap()
}

fn report(out: &Path, cmd: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(cmd).join("report.json")).unwrap()).unwrap()
}

#[test]
fn help_exits_zero() {
    let o = Command::new(env!("CARGO_BIN_EXE_nearcrit")).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["simulate", "resolvent", "couple-diagnostics", "limit", "rates", "converge", "report"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn unknown_config_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "reps = 3\nreplications = 5\n").unwrap();
    let o = nearcrit(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path(), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("replications"));
}

#[test]
fn seed_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--T", "20", "--grid", "32"];
    let o = nearcrit(&args, &tmp.path().join("env"), Some("99"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&tmp.path().join("env"), "simulate")["seed"], 99);
    let cfg = tmp.path().join("seed.toml");
    std::fs::write(&cfg, "seed = 5\n").unwrap();
    let mut with_file = args.to_vec();
    with_file.extend(["--config", cfg.to_str().unwrap()]);
    nearcrit(&with_file, &tmp.path().join("file"), Some("99"));
    assert_eq!(report(&tmp.path().join("file"), "simulate")["seed"], 5);
    with_file.extend(["--seed", "6"]);
    nearcrit(&with_file, &tmp.path().join("flag"), Some("99"));
    assert_eq!(report(&tmp.path().join("flag"), "simulate")["seed"], 6);
    nearcrit(&args, &tmp.path().join("default"), None);
    assert_eq!(report(&tmp.path().join("default"), "simulate")["seed"], 1);
}

#[test]
fn subcommands_write_reports_and_summarize() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 5] = [
        &["resolvent", "--T", "64,128,256", "--kernel", "gamma"],
        &["couple-diagnostics", "--T", "25,50,100", "--reps", "1000"],
        &["limit", "--T", "50", "--k", "16", "--reps", "20", "--driver", "reference"],
        &["simulate", "--T", "30", "--regime", "super"],
        &["rates", "--T", "25,50,100", "--reps", "1000", "--integral-T", "30", "--ks", "3,9,30", "--integral-reps", "10"],
    ];
    for args in runs {
        let o = nearcrit(args, tmp.path(), None);
        assert!(matches!(o.status.code(), Some(0 | 2)), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let r = report(tmp.path(), args[0]);
        assert_eq!(r["command"], args[0]);
        assert!(tmp.path().join(args[0]).join("run_meta.json").exists());
    }
    let o = Command::new(env!("CARGO_BIN_EXE_nearcrit")).args(["report", "--dir"]).arg(tmp.path()).output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    for c in ["resolvent", "couple-diagnostics", "limit", "simulate", "rates"] {
        assert!(text.contains(c), "{c} missing from summary:\n{text}");
    }
}
