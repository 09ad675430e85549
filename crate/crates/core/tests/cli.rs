use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

use tribegames::equilibria::{Deviation, EquilibriumReport};
use tribegames::io::{load_game, load_partition, load_profile};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tribegames"));
    c.env_remove("TRIBEGAMES_PROFILE_BUDGET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn tribal_cycle_pot_over_all_partitions() {
    let dir = tempdir().unwrap();
    let game = dir.path().join("g.json");
    assert!(run(&["gen", "--family", "fig1-tribal", "-o", s(&game)]).status.success());
    let out = run(&["pot", "--game", s(&game), "--partitions", "all", "--concept", "unilateral"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["ratio"], "3/1");
    assert_eq!(v["partitions_checked"], 15);

    let parts = dir.path().join("parts.json");
    fs::write(&parts, r#"[{"tribe_of":[0,1,2,3]},{"tribe_of":[0,0,0,0]}]"#).unwrap();
    let v = json(&run(&["pot", "--game", s(&game), "--partitions", s(&parts)]));
    assert_eq!(v["partitions_checked"], 2);
    let v = json(&run(&["pot", "--game", s(&game), "--partitions", "k=2"]));
    assert_eq!(v["partitions_checked"], 7);
}

#[test]
fn solve_reports_a_recheckable_witness() {
    let dir = tempdir().unwrap();
    let (game, part, prof) = (dir.path().join("g.json"), dir.path().join("p.json"), dir.path().join("s.json"));
    let st = run(&["gen", "--family", "fig1-tribal", "-o", s(&game), "--partition-out", s(&part), "--profile-out", s(&prof)]);
    assert!(st.status.success());

    let ok = run(&["solve", "--game", s(&game), "--partition", s(&part), "--concept", "unilateral", "--profile", s(&prof)]);
    assert_eq!(ok.status.code(), Some(0));

    let blocked = run(&["solve", "--game", s(&game), "--partition", "singleton", "--concept", "unilateral", "--profile", s(&prof)]);
    assert_eq!(blocked.status.code(), Some(1));
    let report: EquilibriumReport = serde_json::from_slice(&blocked.stdout).unwrap();
    let witness: Deviation = report.blocking_witness.expect("witness present");
    let loaded = load_game(&game).unwrap();
    let profile = load_profile(&prof).unwrap();
    let singleton = tribegames::Partition::singleton(4);
    assert!(witness.recheck(&loaded.game, &singleton, &profile).unwrap());
    let _ = load_partition(&part).unwrap();

    let listed = json(&run(&["solve", "--game", s(&game), "--partition", s(&part)]));
    assert!(listed.as_array().unwrap().iter().any(|r| r["profile"]["choice"] == serde_json::json!([0, 1, 1, 0])));
}

#[test]
fn contribution_witness_via_cli() {
    let dir = tempdir().unwrap();
    let (game, part, prof) = (dir.path().join("g.json"), dir.path().join("p.json"), dir.path().join("s.json"));
    let st = run(&[
        "gen", "--family", "convex-path", "--epsilon", "1/100", "--grid", "2", "-o", s(&game),
        "--partition-out", s(&part), "--profile-out", s(&prof),
    ]);
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let out = run(&[
        "solve", "--game", s(&game), "--partition", s(&part), "--concept", "unilateral,pairwise,coordinated",
        "--profile", s(&prof),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["welfare"], "53/50");
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempdir().unwrap();
    let game = dir.path().join("bad.json");
    fs::write(&game, "{\n  \"orientation\": \"cost\",\n  \"players\": ,\n}").unwrap();
    let out = run(&["pot", "--game", s(&game)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json") && err.contains("line 3"), "{err}");
}

#[test]
fn budget_refusal_exits_3() {
    let dir = tempdir().unwrap();
    let game = dir.path().join("g.json");
    assert!(run(&["gen", "--family", "fig1-selfish", "-o", s(&game)]).status.success());
    let out = bin()
        .env("TRIBEGAMES_PROFILE_BUDGET", "10")
        .args(["pot", "--game", s(&game), "--partitions", "singleton"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn smoothness_pass_and_fail() {
    let dir = tempdir().unwrap();
    let (game, part) = (dir.path().join("g.json"), dir.path().join("p.json"));
    assert!(run(&["gen", "--family", "gk-tree", "--k", "2", "-o", s(&game), "--partition-out", s(&part)]).status.success());
    let out = run(&["smoothness", "--game", s(&game), "--partition", s(&part), "--lambda", "8/3", "--mu", "1/3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["ok"], true);
    assert_eq!(v["pairs_checked"], 4096);

    let sampled = json(&run(&[
        "smoothness", "--game", s(&game), "--partition", s(&part), "--lambda", "8/3", "--mu", "1/3", "--sample", "500",
        "--seed", "9",
    ]));
    assert_eq!(sampled["seed"], 9);
    assert_eq!(sampled["pairs_checked"], 500);

    // shared resource or a private one twice as slow
    let opt = dir.path().join("opt.json");
    fs::write(
        &opt,
        r#"{"orientation":"cost","players":2,"strategy_counts":[2,2],
            "family":{"family":"congestion","alpha":["1","2","2"],"strategies":[[[0],[1]],[[0],[2]]]}}"#,
    )
    .unwrap();
    let out = run(&["smoothness", "--game", s(&opt), "--lambda", "1", "--mu", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["ok"], false);
    assert_eq!(v["min_slack"], "-1");

    let grouping = dir.path().join("grp.json");
    assert!(run(&["gen", "--family", "fig1-selfish", "-o", s(&grouping)]).status.success());
    let out = run(&["smoothness", "--game", s(&grouping), "--lambda", "1", "--mu", "0"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn routing_family_loads() {
    let dir = tempdir().unwrap();
    let game = dir.path().join("r.json");
    fs::write(
        &game,
        r#"{"orientation":"cost","players":2,"strategy_counts":[2,2],
            "family":{"family":"routing","vertices":3,
                      "arcs":[{"from":0,"to":1,"alpha":"1"},{"from":1,"to":2,"alpha":"0"},{"from":0,"to":2,"alpha":"2"}],
                      "terminals":[[0,2],[0,2]]}}"#,
    )
    .unwrap();
    let out = run(&["pot", "--game", s(&game), "--partitions", "singleton"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["optimum_welfare"], "3");
}

#[test]
fn fast_reproduction_is_deterministic_and_recertifiable() {
    let dir = tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = run(&["--workers", "1", "reproduce", "--fast", "--out", s(&a)]);
    let rb = run(&["--workers", "4", "reproduce", "--fast", "--out", s(&b)]);
    assert_eq!(ra.status.code(), Some(0), "{}", String::from_utf8_lossy(&ra.stdout));
    assert_eq!(rb.status.code(), Some(0));
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
    assert_eq!(ra.stdout, rb.stdout);
    let text = String::from_utf8_lossy(&ra.stdout);
    assert!(text.lines().any(|l| l.starts_with("atomic linear routing") && l.contains("32/11") && l.ends_with("PASS")));

    let mut count = 0;
    for entry in fs::read_dir(a.join("witnesses")).unwrap() {
        let w = entry.unwrap().path();
        let concepts = fs::read_to_string(w.join("concepts.txt")).unwrap();
        let out = run(&[
            "solve", "--game", s(&w.join("game.json")), "--partition", s(&w.join("partition.json")),
            "--profile", s(&w.join("profile.json")), "--concept", concepts.trim(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", w.display());
        count += 1;
    }
    assert!(count >= 20);
}
