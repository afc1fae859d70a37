use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use approxlab::approx::Filtration;
use approxlab::io::save_filtration;
use approxlab::rational::int;
use approxlab::zoo::{make_group, GroupSpec};
use approxlab::ElementSet;

fn schema_doc() -> &'static Value {
    static DOC: OnceLock<Value> = OnceLock::new();
    DOC.get_or_init(|| {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/approxlab.schema.json");
        serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
    })
}

/// Errors of `doc` against `#/$defs/<def>` of the shipped schema.
fn schema_errors(def: &str, doc: &Value) -> Vec<String> {
    let mut root = schema_doc().clone();
    assert!(root["$defs"].get(def).is_some(), "no definition {def}");
    root["$ref"] = json!(format!("#/$defs/{def}"));
    let validator = jsonschema::validator_for(&root).expect("schema compiles");
    validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect()
}

fn assert_schema(def: &str, doc: &Value) {
    let errors = schema_errors(def, doc);
    assert!(errors.is_empty(), "{def}: {errors:#?}");
}

#[test]
fn schema_rejects_malformed_documents() {
    assert!(!schema_errors("rational", &json!({"num": 1.5, "den": 2})).is_empty());
    assert_schema("rational", &json!({"num": "12345678901234567890123", "den": 1}));
    let mut report = json!({
        "claim": "c",
        "hypothesis_gate": {"checked": true, "passed": false, "values": {}},
        "conclusion": {"passed": null, "witnesses": []},
        "numbers": {}
    });
    assert_schema("report", &report);
    report["conclusion"]["passed"] = json!("yes");
    assert!(!schema_errors("report", &report).is_empty());
    assert!(!schema_errors("error", &json!({"error": {}})).is_empty());
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_approxlab"))
        .args(args)
        .env_remove("APPROXLAB_NODE_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_spec(dir: &Path, name: &str, spec: Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, spec.to_string()).unwrap();
    p
}

/// Generates one instance file from `spec` and checks the artifacts.
fn gen(dir: &Path, name: &str, spec: Value) -> PathBuf {
    let spec_path = write_spec(dir, &format!("{name}.spec.json"), spec);
    let out = dir.join(format!("{name}.json"));
    let res = run(&["gen", "--spec", s(&spec_path), "--seed", "1", "--out", s(&out)]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert_schema("gen", &stdout_json(&res));
    let file: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_schema("instance_file", &file);
    out
}

fn z12_subgroup(dir: &Path) -> PathBuf {
    gen(dir, "z12", json!({"group": {"kind": "cyclic_lee", "n": 12}, "set": {"kind": "subgroup", "generators": [[4]]}}))
}

/// 60 random elements of Z16 x Z16: large enough that a one-node budget leaves intervals.
fn big(dir: &Path) -> PathBuf {
    gen(
        dir,
        "big",
        json!({
            "group": {"kind": "product", "factors": [{"kind": "cyclic_lee", "n": 16}, {"kind": "cyclic_lee", "n": 16}], "combine": "sum"},
            "set": {"kind": "random_symmetric", "size": 60}
        }),
    )
}

#[test]
fn detect_subgroup_with_one_translate() {
    let dir = tempfile::tempdir().unwrap();
    let inst = z12_subgroup(dir.path());
    let out = run(&["detect", "--instance", s(&inst), "--k", "1", "--r", "0", "--find-subgroup"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("detect", &v);
    assert_eq!(v["approximate_subgroup"], true);
    assert_eq!(v["certificate"]["certificate"]["translates"].as_array().unwrap().len(), 1);
    assert_eq!(v["certificate"]["certificate"]["count"], 1);
    assert_eq!(v["subgroup_search"]["best"]["constant"], 1);
}

#[test]
fn detect_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "ball", json!({"group": {"kind": "cyclic_lee", "n": 20}, "set": {"kind": "ball", "radius": {"num": 2, "den": 1}}}));
    let out = run(&["detect", "--instance", s(&inst), "--k", "1", "--r", "0"]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_schema("detect", &v);
    assert_eq!(v["report"]["conclusion"]["passed"], false);
}

#[test]
fn profile_of_z8() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "z8", json!({"group": {"kind": "cyclic_lee", "n": 8}, "set": {"kind": "subgroup", "generators": [[1]]}}));
    let out = run(&["profile", "--instance", s(&inst), "--ladder", "1,1/2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["radius_num", "radius_den", "packing", "covering", "mb_approx"]);
    // Pairwise distance > 1 on the 8-cycle leaves every other point.
    assert_eq!(&rows[1][..4], ["1", "1", "4", "3"]);
    assert_eq!(&rows[2][..4], ["1", "2", "8", "8"]);
}

#[test]
fn group_and_set_flags_match_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "g.spec.json", json!({"group": {"kind": "dihedral", "n": 5}, "set": {"kind": "indices", "elements": [0, 1, 4]}}));
    let inst = dir.path().join("i.json");
    let group = dir.path().join("g.json");
    let res = run(&["gen", "--spec", s(&spec), "--seed", "0", "--out", s(&inst), "--group-out", s(&group)]);
    assert_eq!(code(&res), 0);
    assert_schema("group_file", &serde_json::from_slice(&std::fs::read(&group).unwrap()).unwrap());
    let file: Value = serde_json::from_slice(&std::fs::read(&inst).unwrap()).unwrap();
    assert_schema("instance_file", &file);
    assert_eq!(file["group"]["path"], "g.json");

    let a = run(&["profile", "--instance", s(&inst), "--ladder", "2,1"]);
    let b = run(&["profile", "--group", s(&group), "--set", "0,1,4", "--ladder", "2,1"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let v = run(&["validate", "--group", s(&group)]);
    assert_eq!(code(&v), 0);
    assert_schema("validation", &stdout_json(&v));
}

#[test]
fn corrupt_group_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let inst = z12_subgroup(dir.path());
    let mut file: Value = serde_json::from_slice(&std::fs::read(&inst).unwrap()).unwrap();
    let mut g = file["group"].take();
    g["mult"][13] = json!(5);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, g.to_string()).unwrap();
    let out = run(&["validate", "--group", s(&path)]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_schema("validation", &v);
    assert!(!v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn scales_select_and_growth() {
    let dir = tempfile::tempdir().unwrap();
    let inst = z12_subgroup(dir.path());
    let out = run(&["scales", "--instance", s(&inst), "--m", "20", "--n", "1", "--k", "2", "--C", "2"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("scales", &v);
    assert_eq!(v["scales"].as_array().unwrap().len(), 1);

    let out = run(&["scales", "--instance", s(&inst), "--ladder", "1,1/2", "--k", "3,1"]);
    let v = stdout_json(&out);
    assert_schema("scales", &v);
    assert_eq!(v["growth"]["passed"], json!([true, false]));
    assert_eq!(code(&out), 1);
}

#[test]
fn lemma_suite_example() {
    let out = run(&["lemmas", "--suite", "1.8", "--count", "50", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("lemmas", &v);
    let summary = &v["suites"][0]["summary"];
    assert_eq!(summary["instances"], 50);
    assert_eq!(summary["violated"], 0);
    assert_eq!(summary["errors"], 0);
}

#[test]
fn lemma_output_is_byte_identical_across_runs_and_threads() {
    let args = ["lemmas", "--suite", "all", "--count", "6", "--seed", "11"];
    let a = run(&args);
    let b = run(&[&["--threads", "1"][..], &args[..]].concat());
    let c = run(&[&["--threads", "4"][..], &args[..]].concat());
    assert_eq!(code(&a), 0);
    assert_schema("lemmas", &stdout_json(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn filtration_command() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_group(&GroupSpec::cyclic_lee(12)).unwrap();
    let h = ElementSet::from_indices(&g, [0, 3, 6, 9]);
    let path = dir.path().join("chain.json");
    save_filtration(&path, &Filtration::new(h.clone(), vec![h; 3], int(0), 1).unwrap()).unwrap();
    assert_schema("filtration_file", &serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap());
    let out = run(&["filtration", "--chain-file", s(&path)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("filtration_report", &v);
    assert_eq!(v["passed"], true);
}

#[test]
fn lie_run_and_bad_chart() {
    let out = run(&["lie", "--chart", "so3", "--nmax", "3", "--samples", "300"]);
    assert_eq!(code(&out), 0);
    assert_schema("lie_run", &stdout_json(&out));

    let dir = tempfile::tempdir().unwrap();
    let chart = write_spec(
        dir.path(),
        "chart.json",
        json!({"name": "u1", "size": 2, "basis": [[0.0, -1.0, 1.0, 0.0]], "seed": 3, "sampling": {"pairs": 500, "grid": 64}}),
    );
    assert_schema("chart_file", &serde_json::from_slice(&std::fs::read(&chart).unwrap()).unwrap());
    let out = run(&["lie", "--chart", s(&chart), "--nmax", "2", "--samples", "200"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["dim"], 1);

    let out = run(&["lie", "--chart", "so3", "--safety", "0.5"]);
    assert_eq!(code(&out), 2);
    assert_schema("error", &stdout_json(&out));
}

#[test]
fn budget_intervals_and_require_exact() {
    let dir = tempfile::tempdir().unwrap();
    let inst = big(dir.path());
    let args = ["--node-budget", "1", "profile", "--instance", s(&inst), "--ladder", "3"];
    let out = run(&args);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().contains(".."));
    assert_eq!(code(&run(&[&["--require-exact"][..], &args[..]].concat())), 3);

    let detect = ["--node-budget", "1", "detect", "--instance", s(&inst), "--k", "2", "--r", "1"];
    let out = run(&detect);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_schema("error", &v);
    assert_eq!(v["error"]["budget"], 1);
    assert_eq!(code(&run(&[&["--require-exact"][..], &detect[..]].concat())), 3);

    // The environment variable sets the same budget.
    let env = Command::new(env!("CARGO_BIN_EXE_approxlab"))
        .args(&detect[2..])
        .env("APPROXLAB_NODE_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(env.stdout, out.stdout);
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(code(&run(&["detect", "--k", "1"])), 2);
    assert_eq!(code(&run(&["lemmas", "--suite", "1.1"])), 2);
    assert_eq!(code(&run(&["--threads", "0", "lemmas", "--seed", "1"])), 2);
    let out = run(&["lemmas", "--suite", "2.1", "--seed", "1"]);
    assert_eq!(code(&out), 2);
    assert_schema("error", &stdout_json(&out));
    let out = run(&["validate", "--group", "/nonexistent/group.json"]);
    assert_eq!(code(&out), 2);
    assert_schema("error", &stdout_json(&out));

    let dir = tempfile::tempdir().unwrap();
    let inst = z12_subgroup(dir.path());
    assert_eq!(code(&run(&["detect", "--instance", s(&inst), "--k", "1", "--r", "one"])), 2);
    assert_eq!(code(&run(&["profile", "--instance", s(&inst), "--ladder", "1,3/4"])), 2);
}

#[test]
fn gen_writes_numbered_files_sharing_one_group() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", json!({"group": {"kind": "symmetric_hamming", "m": 4}, "set": {"kind": "random_symmetric", "size": 5}}));
    let out_dir = dir.path().join("out");
    let group = out_dir.join("group.json");
    let res = run(&["gen", "--spec", s(&spec), "--seed", "9", "--out", s(&out_dir), "--count", "3", "--group-out", s(&group)]);
    assert_eq!(code(&res), 0);
    let v = stdout_json(&res);
    assert_schema("gen", &v);
    assert_eq!(v["written"].as_array().unwrap().len(), 3);
    let sets: Vec<Value> = (0..3)
        .map(|i| {
            let f: Value = serde_json::from_slice(&std::fs::read(out_dir.join(format!("instance_{i:04}.json"))).unwrap()).unwrap();
            assert_schema("instance_file", &f);
            assert_eq!(f["spec"]["seed"], 9 + i);
            f["set"].clone()
        })
        .collect();
    assert_ne!(sets[0], sets[1]);

    // Same seed, same bytes.
    let again = dir.path().join("again");
    run(&["gen", "--spec", s(&spec), "--seed", "9", "--out", s(&again), "--count", "3"]);
    let a: Value = serde_json::from_slice(&std::fs::read(again.join("instance_0002.json")).unwrap()).unwrap();
    assert_eq!(a["set"], sets[2]);
}
