use std::path::{Path, PathBuf};

use hisyn_cli::{run_args, EXIT_BUDGET, EXIT_OK, EXIT_PROPERTY_FAILS, EXIT_SYNTHESIS, EXIT_VALIDATION};
use hisyn_core::fixtures;
use hisyn_core::io;

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["hisyn"];
    argv.extend_from_slice(args);
    let code = run_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn synth_small_factory_writes_one_supervisor() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let (code, out, err) = cli(&[
        "synth",
        &data("small_factory/factory.proj"),
        "--out",
        out_dir.to_str().unwrap(),
        "--verify",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("supervisors 1"));
    assert!(out.contains("coordinators 0"));
    assert!(out.contains("verify: nonblocking"));
    assert!(err.contains("time "), "timings go to stderr");
    assert!(!out.contains("time "));
    assert!(out_dir.join("SUP_B.des").exists());
    let report = std::fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert!(report.contains("level 1 clusters=1 coordinators=0"));
    // The emitted supervisor parses back.
    let mut reg = hisyn_core::EventRegistry::new();
    let sup = io::load_automaton(&out_dir.join("SUP_B.des"), &mut reg).unwrap();
    assert_eq!(sup.num_states(), 6);
}

#[test]
fn synth_beta_flag_overrides_the_project() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let (code, _, err) = cli(&[
        "synth",
        &data("small_factory/factory.proj"),
        "--beta",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("beta"), "{err}");
}

#[test]
fn synth_without_beta_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for f in ["M1.des", "M2.des", "B.des", "events.des"] {
        std::fs::copy(data(&format!("small_factory/{f}")), d.join(f)).unwrap();
    }
    let proj = write(
        d,
        "p.proj",
        "events events.des\ncomponent M1.des\ncomponent M2.des\nspec B.des\n",
    );
    let (code, _, err) = cli(&["synth", proj.to_str().unwrap(), "--out", d.join("o").to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("beta"), "{err}");
    let (code, _, err) = cli(&[
        "synth",
        proj.to_str().unwrap(),
        "--beta",
        "3",
        "--out",
        d.join("o").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
}

#[test]
fn synth_rejects_a_project_without_automata() {
    let tmp = tempfile::tempdir().unwrap();
    let proj = write(tmp.path(), "empty.proj", "param beta 4\n");
    let (code, _, err) = cli(&["synth", proj.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("missing automata"), "{err}");
}

#[test]
fn synth_reports_parse_errors_with_positions() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(
        d,
        "G.des",
        "automaton G\nevent a controllable\nstate s initial marked\ntrans s a\n",
    );
    write(
        d,
        "E.des",
        "automaton E\nevent a controllable\nstate s initial marked\n",
    );
    let proj = write(d, "p.proj", "component G.des\nspec E.des\nparam beta 4\n");
    let (code, _, err) = cli(&["synth", proj.to_str().unwrap(), "--out", d.join("o").to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("G.des:4:"), "{err}");
}

#[test]
fn synth_unresolvable_conflict_exits_with_synthesis_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let p = fixtures::conflicting_project(false);
    let mut proj = String::from("param beta 4\n");
    for (kind, list) in [("component", &p.components), ("spec", &p.specs)] {
        for a in list {
            io::save_automaton(&d.join(format!("{}.des", a.name())), a, &p.registry).unwrap();
            proj.push_str(&format!("{kind} {}.des\n", a.name()));
        }
    }
    let proj = write(d, "p.proj", &proj);
    let (code, _, err) = cli(&["synth", proj.to_str().unwrap(), "--out", d.join("o").to_str().unwrap()]);
    assert_eq!(code, EXIT_SYNTHESIS, "{err}");
    assert!(err.contains("cannot be resolved"), "{err}");
}

#[test]
fn verify_finds_the_conflict_and_the_coordinator_removes_it() {
    let (code, out, _) = cli(&["verify", &data("conflict/T1.des"), &data("conflict/T2.des")]);
    assert_eq!(code, EXIT_PROPERTY_FAILS);
    assert!(out.contains("BLOCKING"));
    assert!(out.contains("trace: b"), "{out}");
    let (code, out, _) = cli(&[
        "verify",
        &data("conflict/T1.des"),
        &data("conflict/T2.des"),
        &data("conflict/CO.des"),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.starts_with("nonblocking"));
}

#[test]
fn verify_budget_is_reported() {
    let (code, _, err) = cli(&[
        "verify",
        &data("conflict/T1.des"),
        &data("conflict/T2.des"),
        "--budget",
        "1",
    ]);
    assert_eq!(code, EXIT_BUDGET);
    assert!(err.contains("state budget"), "{err}");
}

#[test]
fn verify_detects_controllability_clashes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write(
        tmp.path(),
        "A.des",
        "automaton A\nevent x controllable\nstate s initial marked\n",
    );
    let b = write(
        tmp.path(),
        "B.des",
        "automaton B\nevent x uncontrollable\nstate s initial marked\n",
    );
    let (code, _, err) = cli(&["verify", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("A.des:2"), "{err}");
}

#[test]
fn observer_reports_a_witness_and_an_extension() {
    let (code, out, _) = cli(&[
        "observer",
        &data("small_factory/M1.des"),
        "--events",
        &data("small_factory/events.des"),
        "--observable",
        "b1",
        "--extend",
    ]);
    assert_eq!(code, EXIT_PROPERTY_FAILS);
    assert!(out.contains("observer: no"));
    assert!(out.contains("prefix: a1"), "{out}");
    assert!(out.contains("extension: {a1, b1}"), "{out}");
    let (code, out, _) = cli(&[
        "observer",
        &data("small_factory/M1.des"),
        "--events",
        &data("small_factory/events.des"),
        "--observable",
        "a1,b1",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("observer: yes"));
}

#[test]
fn observer_rejects_unknown_events() {
    let (code, _, err) = cli(&[
        "observer",
        &data("small_factory/M1.des"),
        "--events",
        &data("small_factory/events.des"),
        "--observable",
        "a2",
    ]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("a2"), "{err}");
}

#[test]
fn cluster_prints_named_blocks() {
    let names = std::fs::read_to_string(data("agv/names.txt")).unwrap();
    let (code, out, err) = cli(&[
        "cluster",
        &data("agv/agv_m.txt"),
        "--beta",
        "4",
        "--names",
        names.trim(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("clusters 4"));
    assert!(out.contains("{Z1, Z2, WS2, IPS}"), "{out}");
    assert!(out.contains("{WS13}"));
}

#[test]
fn cluster_rejects_small_beta_and_name_mismatch() {
    let (code, _, err) = cli(&["cluster", &data("agv/agv_m.txt"), "--beta", "1"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("beta"));
    let (code, _, _) = cli(&["cluster", &data("agv/agv_m.txt"), "--beta", "2", "--names", "a,b"]);
    assert_eq!(code, EXIT_VALIDATION);
    let (code, _, _) = cli(&["cluster", &data("agv/agv_m.txt")]);
    assert_eq!(code, EXIT_VALIDATION);
}

#[test]
fn cluster_accepts_raw_dependency_matrices() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write(tmp.path(), "dsm.txt", "2 1 0 0\n1 2 0 0\n0 0 1 1\n0 0 1 1\n");
    let (code, out, err) = cli(&["cluster", m.to_str().unwrap(), "--beta", "2"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("clusters 2"), "{out}");
}

#[test]
fn cluster_sweep_prints_a_table() {
    let (code, out, _) = cli(&["cluster", &data("agv/agv_m.txt"), "--sweep", "2.5,4,10"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines, ["beta clusters", "2.5 2", "4 4", "10 6"]);
}

#[test]
fn bundled_agv_matrix_matches_the_fixture() {
    let text = std::fs::read_to_string(data("agv/agv_m.txt")).unwrap();
    assert_eq!(text, fixtures::agv_matrix_text());
}

#[test]
fn usage_errors_exit_with_validation_code() {
    assert_eq!(cli(&["frobnicate"]).0, EXIT_VALIDATION);
    assert_eq!(cli(&["--help"]).0, EXIT_OK);
}

#[test]
fn matrix_only_project_is_missing_automata() {
    let (code, _, err) = cli(&["synth", &data("agv/agv.proj")]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("missing automata"), "{err}");
}

#[test]
fn identity_matrix_clusters_into_singletons() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write(tmp.path(), "id.txt", "1 0 0\n0 1 0\n0 0 1\n");
    let (code, out, _) = cli(&["cluster", m.to_str().unwrap(), "--beta", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("clusters 3"), "{out}");
}
