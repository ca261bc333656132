use std::io::Write;
use std::process::{Command, Output, Stdio};

fn pebble(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pebble"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp(name: &str, text: &str) -> String {
    let p = std::env::temp_dir().join(format!("pebble_cli_{}_{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gen_schedule_verify_pipeline() {
    let g = pebble(&["gen", "pyramid:height=3"], None);
    assert!(g.status.success());
    let graph = temp("pyr.txt", &stdout(&g));
    for strategy in ["topo", "general", "depth", "separator"] {
        let s = pebble(&["schedule", &graph, "--strategy", strategy], None);
        assert!(s.status.success(), "{strategy}");
        let sched = temp(&format!("{strategy}.sched"), &stdout(&s));
        let v = pebble(&["verify", &graph, &sched], None);
        assert_eq!(v.status.code(), Some(0), "{strategy}");
        assert!(stdout(&v).starts_with("legal-and-full"));
    }
}

#[test]
fn schedule_metrics_json() {
    let out = pebble(
        &["schedule", "-", "--strategy", "budget", "--budget", "3/2", "--metrics"],
        Some("a b\na c\nb d\nc d\n"),
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["strategy"], "budget=3/2");
    assert!(v["peak"].as_u64().unwrap() <= v["S_bound"].as_u64().unwrap());
    assert_eq!(v["full"], true);
}

#[test]
fn exit_codes() {
    // Illegal schedule: verdict failure.
    let graph = temp("ab.txt", "a b\n");
    let sched = temp("bad.sched", "P b\n");
    let v = pebble(&["verify", &graph, &sched, "--json"], None);
    assert_eq!(v.status.code(), Some(1));
    let j: serde_json::Value = serde_json::from_str(&stdout(&v)).unwrap();
    assert_eq!(j["reason"], "missing-predecessor");
    assert_eq!(j["index"], 0);

    // Usage errors.
    assert_eq!(pebble(&["schedule", &graph, "--strategy", "nope"], None).status.code(), Some(2));
    assert_eq!(pebble(&["frobnicate"], None).status.code(), Some(2));
    let cyclic = temp("cyc.txt", "a b\nb a\n");
    let c = pebble(&["stats", &cyclic], None);
    assert_eq!(c.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&c.stderr).contains("cycle"));
    let selfloop = pebble(&["stats", "-"], Some("a a\n"));
    assert_eq!(selfloop.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&selfloop.stderr).contains("line 1"));
}

#[test]
fn decompose_prints_parts() {
    let out = pebble(&["decompose", "-", "--budget", "1"], Some("a b\nb c\nc d\n"));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("B = 1"));
    assert!(text.contains("parts = "));
    let j = pebble(&["decompose", "-", "--budget", "1", "--json"], Some("a b\nb c\nc d\n"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&j)).unwrap();
    let names: Vec<String> = v["parts"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|p| p["vertices"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()))
        .collect();
    assert_eq!(names, ["a", "b", "c", "d"]);
}

#[test]
fn oracle_and_stats() {
    let o = pebble(&["oracle", "-"], Some("a c\nb c\n"));
    assert!(o.status.success());
    assert_eq!(stdout(&o), "S = 2\n");
    let s = pebble(&["stats", "-", "--json"], Some("digraph { a -> b -> c; }"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&s)).unwrap();
    assert_eq!((v["n"].as_u64(), v["m"].as_u64(), v["depth"].as_u64()), (Some(3), Some(2), Some(2)));
}

#[test]
fn bench_table() {
    let empty = pebble(&["bench", "--instances", ""], None);
    assert!(empty.status.success());
    assert_eq!(stdout(&empty), "strategy,family,n,m,d,S_bound,peak,T_bound,moves,ms\n");

    let out = pebble(
        &[
            "bench",
            "--strategies",
            "general,bounded-halflog",
            "--instances",
            "heavy-tail-random:n=150,seed=1;chain:n=6",
        ],
        None,
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!((rows[0][0], rows[0][1]), ("general", "heavy-tail-random"));
    let peak: usize = rows[0][6].parse().unwrap();
    let bound: usize = rows[0][5].parse().unwrap();
    assert!(peak <= bound);
    assert!(rows[1][5].starts_with("\"skipped:") || rows[1][5].starts_with("skipped:"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("3dn/log2n+4"));
}
