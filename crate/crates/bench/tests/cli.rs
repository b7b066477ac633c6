use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(args)
        .env_remove("LLM_ENDPOINT")
        .env_remove("LLM_MODEL")
        .env_remove("LLM_API_KEY")
        .output()
        .expect("bench runs")
}

fn ok(args: &[&str]) -> Output {
    let out = bench(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn run_nudge(dir: &Path) {
    ok(&["run", "--planner", "idm", "--suite-seed", "3", "--types", "nudge", "--jobs", "2", "--out", dir.to_str().unwrap()]);
}

#[test]
fn run_writes_one_row_per_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    run_nudge(tmp.path());
    let csv = fs::read_to_string(tmp.path().join("scores.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 11);
    assert!(rows[0].starts_with("scenario,type,planner,"));
    assert!(rows[1..].iter().all(|r| r.contains(",nudge,idm,")));
    assert_eq!(fs::read_dir(tmp.path().join("traces")).unwrap().count(), 10);
    assert_eq!(fs::read_dir(tmp.path().join("scenarios")).unwrap().count(), 10);
    assert!(!tmp.path().join("prompts").exists());
    let md = fs::read_to_string(tmp.path().join("report.md")).unwrap();
    assert!(md.contains("Overall"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_nudge(a.path());
    run_nudge(b.path());
    for f in ["scores.csv", "report.json", "traces/nudge_04.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn render_draws_cones_and_ego() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    ok(&["run", "--planner", "idm", "--types", "construction", "--indices", "0", "--out", dir]);
    let svg_path = tmp.path().join("c.svg");
    ok(&[
        "render",
        "--scenario",
        &format!("{dir}/scenarios/construction_00.json"),
        "--trace",
        &format!("{dir}/traces/construction_00.json"),
        "--tick",
        "40",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&svg_path).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
    let with_class = |c: &'static str| doc.descendants().filter(move |n| n.attribute("class") == Some(c));
    let cones: Vec<_> = with_class("cone").collect();
    assert!(cones.len() >= 4, "{} cones", cones.len());
    assert!(cones.iter().all(|n| n.attribute("fill") == Some("#d62728")));
    let ego: Vec<_> = with_class("ego").collect();
    assert_eq!(ego.len(), 1);
    assert_eq!(ego[0].attribute("fill"), Some("orange"));
    assert_eq!(with_class("past-path").count(), 1);
}

#[test]
fn compare_lists_each_report() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_nudge(a.path());
    ok(&["run", "--planner", "idm_mobil", "--suite-seed", "3", "--types", "nudge", "--out", b.path().to_str().unwrap()]);
    let md_path = a.path().join("cmp.md");
    let out = ok(&["compare", a.path().to_str().unwrap(), b.path().to_str().unwrap(), "--out", md_path.to_str().unwrap()]);
    let md = fs::read_to_string(&md_path).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), md);
    let lines: Vec<&str> = md.lines().collect();
    assert_eq!(lines.len(), 4, "{md}");
    assert!(lines[0].starts_with("| Planner | Overall |"));
    assert!(lines[2].starts_with("| idm |") && lines[3].starts_with("| idm_mobil |"));

    let empty = a.path().join("empty.md");
    ok(&["compare", "--out", empty.to_str().unwrap()]);
    assert_eq!(fs::read_to_string(&empty).unwrap().lines().count(), 2);
}

#[test]
fn bad_arguments_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = bench(&["run", "--planner", "teleport", "--out", dir]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("teleport"));
    // LLM planner without an endpoint configured
    let out = bench(&["run", "--planner", "waypoints_llm", "--types", "nudge", "--out", dir]);
    assert!(!out.status.success());
    let out = bench(&["run", "--planner", "idm", "--types", "roundabout", "--out", dir]);
    assert!(!out.status.success());
    let out = bench(&["render", "--scenario", &format!("{dir}/missing.json"), "--out", &format!("{dir}/x.svg")]);
    assert!(!out.status.success());
}
