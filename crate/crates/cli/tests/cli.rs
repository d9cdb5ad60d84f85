use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quadstab"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_on(args: &[&str], path: &Path) -> Output {
    bin().args(args).arg(path).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(out: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key}: ");
    out.lines().find_map(|l| l.strip_prefix(prefix.as_str())).unwrap_or_else(|| panic!("no {key} in\n{out}"))
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn example_text() -> String {
    std::fs::read_to_string(fixture("rank5_example.json")).unwrap()
}

#[test]
fn validate_accepts_the_rank_five_example() {
    let o = run_on(&["validate"], &fixture("rank5_example.json"));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "status"), "valid");
}

#[test]
fn validate_flags_asymmetric_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let text = example_text().replacen("[0, 0, 0, 0, 1]", "[0, 1, 0, 0, 1]", 1);
    let o = run_on(&["validate"], &write_temp(&dir, "asym.json", &text));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("symmetry"), "{}", stdout(&o));
}

#[test]
fn syntax_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let zero_den = example_text().replacen("\"2\"", "\"1/0\"", 1);
    let unknown_key = example_text().replacen("\"kind\"", "\"colour\": \"red\", \"kind\"", 1);
    for (name, text) in [("den.json", zero_den), ("key.json", unknown_key)] {
        let o = run_on(&["validate"], &write_temp(&dir, name, &text));
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stdout(&o));
    }
    assert_eq!(run(&["validate", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn orthogonal_line_pair_is_unstable() {
    for delta in ["1/4", "1", "7/2"] {
        let o = run_on(&["check", "--delta", delta], &fixture("orthogonal_r2.json"));
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        assert_eq!(field(&out, "class"), "unstable");
        assert_eq!(field(&out, "witness"), "L");
        assert_eq!(field(&out, "margin"), "-2");
        assert_eq!(field(&out, "agree"), "true");
    }
}

#[test]
fn zero_delta_is_a_usage_error() {
    let o = run_on(&["check", "--delta", "0"], &fixture("walls.json"));
    assert_eq!(o.status.code(), Some(2));
    let o = run_on(&["check", "--delta", "-1/2"], &fixture("walls.json"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_report_matches_text() {
    let o = run_on(&["--json", "check", "--delta", "1", "--mode", "reduced"], &fixture("walls.json"));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class"], "unstable");
    assert_eq!(v["margin"], "-2");
    assert_eq!(v["witness"], "F");
}

#[test]
fn split_case_b_example() {
    let o = run_on(&["split", "--delta", "1/3"], &fixture("rank5_example.json"));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "trace"), "C2");
    assert_eq!(field(&out, "pieces"), "{1,4} (1,2); {2,3} (2,1)");
    assert_eq!(field(&out, "mu"), "3");
    assert_eq!(field(&out, "mu_pieces"), "3");
    assert_eq!(field(&out, "stab"), field(&out, "stab_pieces"));
    assert_eq!(field(&out, "conservation"), "exact");
}

#[test]
fn split_case_a_example() {
    let o = run_on(&["split"], &fixture("rank5_case_a.json"));
    let out = stdout(&o);
    assert_eq!(field(&out, "trace"), "C3; C3-pair");
    assert_eq!(field(&out, "pieces"), "{1,3} (1,1); {1,4} (1,1); {2} (1)");
    assert_eq!(field(&out, "conservation"), "exact");
}

#[test]
fn split_of_length_two_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"kind":"filtration","ambient":{"rank":5,"degree":1},"ranks":[1,3],"degrees":[0,1],
        "weights":["1/2","3"],"pattern":[[0,0,1],[0,1,1],[1,1,1]]}"#;
    let o = run_on(&["split"], &write_temp(&dir, "two.json", text));
    let out = stdout(&o);
    assert_eq!(field(&out, "pieces"), "{1,2} (1/2,3)");
    assert_eq!(field(&out, "trace"), "");
}

#[test]
fn split_rejects_catalogs() {
    let o = run_on(&["split"], &fixture("walls.json"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn walls_of_the_fixture() {
    let o = run_on(&["walls", "--lo", "1/10", "--hi", "10"], &fixture("walls.json"));
    assert_eq!(field(&stdout(&o), "walls"), "2");
    let o = run_on(&["walls", "--lo", "3", "--hi", "10"], &fixture("walls.json"));
    assert_eq!(field(&stdout(&o), "count"), "0");
    let o = run_on(&["walls", "--lo", "2", "--hi", "1"], &fixture("walls.json"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generation_is_deterministic() {
    let args = ["gen", "--seed", "42", "--family", "generic", "--count", "10"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a).lines().count(), 10);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, run(&["gen", "--seed", "43", "--count", "10"]).stdout);
}

#[test]
fn rank_bound_one_is_unsatisfiable() {
    let o = run(&["gen", "--max-rank", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("no proper subbundles possible"));
}

#[test]
fn generated_instances_validate() {
    let dir = tempfile::tempdir().unwrap();
    let streams = [
        vec!["--family", "orthogonal"],
        vec!["--family", "orthogonal", "--generalized"],
        vec!["--family", "parabolic"],
        vec!["--kind", "filtration"],
    ];
    for extra in streams {
        let mut args = vec!["gen", "--seed", "5", "--count", "15"];
        args.extend(&extra);
        for (i, line) in stdout(&run(&args)).lines().enumerate() {
            let path = write_temp(&dir, &format!("{i}.json"), line);
            let o = run_on(&["validate"], &path);
            assert_eq!(o.status.code(), Some(0), "{extra:?} #{i}: {}", stdout(&o));
        }
    }
}

#[test]
fn both_modes_agree_on_generated_catalogs() {
    let dir = tempfile::tempdir().unwrap();
    let stream = stdout(&run(&["gen", "--seed", "11", "--count", "1000"]));
    assert_eq!(stream.lines().count(), 1000);
    for (i, line) in stream.lines().enumerate() {
        let path = write_temp(&dir, "cat.json", line);
        let delta = ["1/4", "1/2", "1", "3"][i % 4];
        let o = run_on(&["check", "--mode", "both", "--delta", delta], &path);
        assert_eq!(o.status.code(), Some(0), "#{i}: {}", stdout(&o));
        assert_eq!(field(&stdout(&o), "agree"), "true");
    }
}

#[test]
fn oracle_small_run_passes() {
    let o = run(&["oracle", "--trials", "25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 10);
    assert_eq!(field(&out, "status"), "pass");
}

#[test]
fn oracle_zero_trials_is_vacuous() {
    let o = run(&["oracle", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("vacuous"));
}

#[test]
fn oracle_catches_injected_faults() {
    let o = run(&["oracle", "--trials", "25", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("FAIL")).count(), 10, "{out}");
    assert!(out.contains("witness: "));
}

#[test]
fn oracle_output_independent_of_jobs() {
    let one = run(&["oracle", "--trials", "30", "--criteria", "1,3,7", "--jobs", "1"]);
    let four = run(&["oracle", "--trials", "30", "--criteria", "1,3,7", "--jobs", "4"]);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run(&["oracle", "--criteria", "11"]).status.code(), Some(2));
}
