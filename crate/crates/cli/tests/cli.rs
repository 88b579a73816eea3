use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn tagevo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tagevo")).args(args).output().unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_kind(out: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).expect("machine-readable error record");
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--alpha", "0.1", "--steps", "1000", "--set-size", "3", "--seed", "7"];
    let a = ok(tagevo(&args)).stdout;
    let b = ok(tagevo(&args)).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_ne!(a, ok(tagevo(&["simulate", "--seed", "8"])).stdout);
}

#[test]
fn pure_innovation_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_tagevo");
    let sim = Command::new(bin)
        .args(["simulate", "--alpha", "1", "--steps", "2000"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let ingest = Command::new(bin).arg("ingest").stdin(sim.stdout.unwrap()).stdout(Stdio::piped()).spawn().unwrap();
    let novelty = Command::new(bin)
        .args(["novelty", "--width", "100", "--out-dir", path(dir.path())])
        .stdin(ingest.stdout.unwrap())
        .output()
        .unwrap();
    ok(novelty);
    let csv = fs::read_to_string(dir.path().join("novelty.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bucket,start,posts,novel_posts,new_tags,proportion"));
    let props: Vec<&str> = lines.map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(props.len(), 20);
    assert!(props.iter().all(|p| *p == "1.0"));
}

#[test]
fn simulated_logs_ingest_without_skips() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("sim.tsv");
    let cache = dir.path().join("sim.cache");
    ok(tagevo(&["simulate", "--steps", "3000", "--set-size", "1:2,3:5,6:1", "--users", "9", "-o", path(&tsv)]));
    ok(tagevo(&["ingest", "-i", path(&tsv), "-o", path(&cache)]));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sim.cache.manifest.json")).unwrap()).unwrap();
    let report = &manifest["parse_report"];
    assert_eq!(report["rows_read"], report["rows_kept"]);
    assert_eq!(manifest["inputs"][0]["format"], "tsv");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);

    // The cache and the log it came from give the same analysis.
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(tagevo(&["pairs", "-i", path(&tsv), "--out-dir", path(&a), "--width", "300"]));
    ok(tagevo(&["pairs", "-i", path(&cache), "--out-dir", path(&b), "--width", "300"]));
    assert_eq!(fs::read(a.join("pairs.csv")).unwrap(), fs::read(b.join("pairs.csv")).unwrap());
}

/// Users mixing two disjoint vocabularies in different proportions.
fn user_log(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("users.tsv");
    let mut f = fs::File::create(&p).unwrap();
    let mut t = 0;
    for u in 0..12 {
        for i in 0..120 {
            let side = if (i * 12 + u * 7) % 120 < u * 10 { "b" } else { "a" };
            for k in 0..2 {
                writeln!(f, "{t}\tu{u}i{i}\tuser{u}\t{side}{}", (i + k * 3 + u) % 6).unwrap();
            }
            t += 1;
        }
    }
    p
}

#[test]
fn threshold_sweep_shrinks_edge_lists() {
    let dir = tempfile::tempdir().unwrap();
    let log = user_log(dir.path());
    let out = dir.path().join("net");
    ok(tagevo(&["usernet", "-i", path(&log), "--out-dir", path(&out), "--thresholds", "0.4,0.35,0.3,0.25"]));
    let counts: Vec<usize> = ["0.4", "0.35", "0.3", "0.25"]
        .iter()
        .map(|t| fs::read_to_string(out.join(format!("usernet-{t}.edges.csv"))).unwrap().lines().count())
        .collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    assert!(counts[0] > counts[3], "{counts:?}");

    ok(tagevo(&["communities", "-i", path(&log), "--out-dir", path(&out), "--thresholds", "0.3"]));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("communities.summary.json")).unwrap()).unwrap();
    assert!(summary[0]["modularity"].as_f64().unwrap() >= 0.0);
    let nodes = fs::read_to_string(out.join("communities-0.3.nodes.csv")).unwrap();
    assert_eq!(nodes.lines().next(), Some("user,posts,degree,core,community,novelty_rate"));
    assert_eq!(nodes.lines().count(), 13);
}

#[test]
fn manifest_reruns_reproduce_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let log = user_log(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(tagevo(&["drift", "-i", path(&log), "--out-dir", path(&a), "--width", "day", "--top", "3", "--min-share", "0.05"]));
    let manifest = a.join("drift.manifest.json");
    ok(tagevo(&["--config", path(&manifest), "drift", "--out-dir", path(&b)]));
    for f in ["drift.csv", "drift-series.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# simulation defaults\nalpha = 1\nsteps = 5\nset_size = 2\n").unwrap();
    let from_file = ok(tagevo(&["--config", path(&conf), "simulate"])).stdout;
    assert_eq!(String::from_utf8(from_file).unwrap().lines().count(), 10);
    let overridden = ok(tagevo(&["--config", path(&conf), "simulate", "--steps", "7"])).stdout;
    assert_eq!(String::from_utf8(overridden).unwrap().lines().count(), 14);
}

#[test]
fn exit_codes_and_error_records() {
    let dir = tempfile::tempdir().unwrap();
    let bad = tagevo(&["simulate", "--alpha", "1.5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(error_kind(&bad), "config");

    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "no equals sign\n").unwrap();
    let bad = tagevo(&["--config", path(&conf), "simulate"]);
    assert_eq!(bad.status.code(), Some(2));

    let missing = tagevo(&["novelty", "-i", path(&dir.path().join("absent.tsv")), "--out-dir", path(dir.path())]);
    assert_eq!(missing.status.code(), Some(3));
    assert_eq!(error_kind(&missing), "input");

    let garbage = dir.path().join("garbage.tsv");
    fs::write(&garbage, "only\tthree\tcolumns\n").unwrap();
    let empty = tagevo(&["posts", "-i", path(&garbage), "--out-dir", path(dir.path())]);
    assert_eq!(empty.status.code(), Some(3));
}

#[test]
fn failed_runs_leave_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let log = user_log(dir.path());
    let out = dir.path().join("out");
    // A directory where the summary should go makes the last write fail.
    fs::create_dir_all(out.join("novelty.summary.json")).unwrap();
    let r = tagevo(&["novelty", "-i", path(&log), "--out-dir", path(&out)]);
    assert_eq!(r.status.code(), Some(3));
    assert_eq!(error_kind(&r), "output");
    let left: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, vec![std::ffi::OsString::from("novelty.summary.json")]);
}
