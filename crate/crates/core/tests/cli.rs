use std::process::Command;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_verb-transfer"))
}

fn stdout(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn synth_run_compare_eval() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let config = stdout(
        cli()
            .args([
                "synth",
                "--dimension",
                "60",
                "--num-classes",
                "3",
                "--verbs-per-class",
                "6",
            ])
            .arg("--out")
            .arg(&data),
    );
    let config = config.trim();
    assert!(config.ends_with("config.toml"));

    let out = tmp.path().join("run");
    let report = stdout(
        cli()
            .args(["run", "--config", config, "--seed", "2", "--set", "epochs=3"])
            .arg("--out")
            .arg(&out),
    );
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(report["f1"].as_f64().unwrap() >= 0.0);

    let table = stdout(cli().args(["compare", "--config", config, "--variants", "distributional,xling"]));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3, "{table}");
    assert!(lines[1].starts_with("distributional"));
    assert!(lines[2].starts_with("xling"));

    let eval = stdout(
        cli()
            .arg("eval")
            .arg("--clusters")
            .arg(out.join("clusters.tsv"))
            .arg("--gold")
            .arg(data.join("gold.tsv")),
    );
    let eval: serde_json::Value = serde_json::from_str(&eval).unwrap();
    assert_eq!(eval["f1"], report["f1"]);
}

#[test]
fn failures_report_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.toml");
    let out = cli().arg("run").arg("--config").arg(&missing).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("stage `config`"), "{err}");
}
