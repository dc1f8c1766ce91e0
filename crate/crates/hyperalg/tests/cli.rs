use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hyperalg");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn verify_passes_and_poison_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = run(&["verify", "--seed", "7"], tmp.path());
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(tmp.path().join("verify.json").exists());
    let bad = run(&["verify", "--poison", "pb"], tmp.path());
    assert_eq!(code(&bad), 1);
}

#[test]
fn verify_verdicts_do_not_depend_on_the_seed() {
    let verdicts = |seed: &str| {
        let tmp = tempfile::tempdir().unwrap();
        assert_eq!(code(&run(&["verify", "--seed", seed], tmp.path())), 0);
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("verify.json")).unwrap()).unwrap();
        v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (c["name"].as_str().unwrap().to_owned(), c["passed"].as_bool().unwrap()))
            .collect::<Vec<_>>()
    };
    assert_eq!(verdicts("7"), verdicts("8"));
}

#[test]
fn usage_and_config_errors_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["demo", "--bogus"], tmp.path())), 4);
    assert_eq!(code(&run(&["demo"], tmp.path())), 4);
    let missing = tmp.path().join("nope.json").display().to_string();
    assert_eq!(code(&run(&["demo", "--config", &missing], tmp.path())), 4);
    let bad = write_config(tmp.path(), "bad.json", r#"{"version": 2, "command": "demo"}"#);
    assert_eq!(code(&run(&["demo", "--config", &bad], tmp.path())), 4);
    let unknown = write_config(tmp.path(), "unknown.json", r#"{"version": 1, "command": "verify", "colour": "red"}"#);
    assert_eq!(code(&run(&["verify", "--config", &unknown], tmp.path())), 4);
    // a search config handed to the demo command
    let search = configs().join("search-schedule.json").display().to_string();
    assert_eq!(code(&run(&["demo", "--config", &search], tmp.path())), 4);
}

#[test]
fn every_shipped_config_parses() {
    let mut seen = 0;
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = hyperalg::config::RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.check().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 10);
}

#[test]
fn schema_covers_the_config_fields() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/run-config.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let mut props: Vec<_> = schema["properties"].as_object().unwrap().keys().cloned().collect();
    props.sort();
    assert_eq!(props, ["asymptotics", "command", "demo", "name", "operator", "search", "seed", "version"]);
    let commands: Vec<_> = schema["properties"]["command"]["enum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for c in &commands {
        let body = format!(r#"{{"version": 1, "command": "{c}"}}"#);
        // the command name must be accepted; missing sections are a later, structural error
        let parsed = hyperalg::config::RunConfig::from_json(&body, "inline");
        assert!(!matches!(parsed, Err(hyperalg::config::ConfigError::Json { .. })), "{c}: {parsed:?}");
    }
}

#[test]
fn demo_certifies_and_is_byte_identical_across_runs() {
    let cfg = configs().join("demo-cos-small-eigen.json").display().to_string();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["demo", "--config", &cfg], a.path())), 0);
    assert_eq!(code(&run(&["demo", "--config", &cfg], b.path())), 0);
    for f in ["transcript.json", "distances.csv"] {
        let x = fs::read(a.path().join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn several_demos_run_in_parallel_subdirectories() {
    let tmp = tempfile::tempdir().unwrap();
    let a = configs().join("demo-cos-powers.json").display().to_string();
    let b = configs().join("demo-dilation.json").display().to_string();
    let o = run(&["demo", "--config", &a, "--config", &b, "--jobs", "2"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("demo-cos-powers/transcript.json").exists());
    assert!(tmp.path().join("demo-dilation/distances.csv").exists());
}

#[test]
fn exhausted_n_search_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("demo-cos-small-eigen.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["demo"]["n_max"] = 50.into();
    let cfg = write_config(tmp.path(), "short.json", &v.to_string());
    let o = run(&["demo", "--config", &cfg], tmp.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("transcript.json")).unwrap()).unwrap();
    assert_eq!(t["transcript"]["outcome"]["status"], "n_search_exhausted");
}

#[test]
fn searches_report_their_failure_reasons() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = configs().join("search-exponential.json").display().to_string();
    let o = run(&["search", "--config", &exp], tmp.path());
    assert_eq!(code(&o), 2);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("certificate.json")).unwrap()).unwrap();
    assert_eq!(r["found"], false);
    assert!(r["reason"].as_str().unwrap().contains("ExponentialLike"), "{r}");

    let quarter = write_config(
        tmp.path(),
        "quarter.json",
        r#"{"version": 1, "command": "search", "operator": {"polynomial": [0.0, 0.25]},
            "search": {"kind": "level-sets", "n1": 4, "n2": 4}}"#,
    );
    let o = run(&["search", "--config", &quarter], tmp.path());
    assert_eq!(code(&o), 2);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("certificate.json")).unwrap()).unwrap();
    assert!(r["reason"].as_str().unwrap().contains("NoCrossing"), "{r}");
}

#[test]
fn successful_searches_exit_0_with_positive_margins() {
    for name in ["search-schedule.json", "search-level-sets.json", "search-multi-index.json"] {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = configs().join(name).display().to_string();
        let o = run(&["search", "--config", &cfg], tmp.path());
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stdout));
        let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("certificate.json")).unwrap()).unwrap();
        assert_eq!(r["all_margins_positive"], true, "{name}");
    }
}

#[test]
fn asymptotics_writes_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("asymptotics.json").display().to_string();
    assert_eq!(code(&run(&["asymptotics", "--config", &cfg], tmp.path())), 0);
    let text = fs::read_to_string(tmp.path().join("asymptotics.csv")).unwrap();
    assert!(text.starts_with("n,s,a_re,a_im,ratio_re,ratio_im"));
    assert!(text.lines().count() > 100);
}
