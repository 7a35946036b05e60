use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn biblio(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biblio"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

const LOG: &str = r#"{"timestamp":"2016-10-03T14:00:00Z","module":"wayfinder","uri":"/api/wayfinder/map_data/uiu_undergrad/syn_100001","params":{},"status":200,"bib_ids":["syn_100001"]}
{"timestamp":"2016-11-05T09:30:00Z","module":"recommend","uri":"/api/recommend/popularnear?x=100&y=300","params":{"x":"100","y":"300"},"status":200,"bib_ids":["syn_100001","syn_100002"]}
{"timestamp":"2016-11-07T09:30:00Z","module":"catalog","uri":"/api/catalog/search?q=American+literature","params":{"q":"American literature"},"status":200,"bib_ids":[]}
not json
"#;

#[test]
fn gen_walk_and_telemetry_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let config = ok(biblio(dir, &["harness", "gen", "--seed", "9", "--records", "120", "--out", "world"]));
    assert_eq!(config.trim(), Path::new("world").join("config.toml").display().to_string());

    ok(biblio(dir, &["harness", "walk", "--world", "world", "--requests", "30", "--out", "walk.json"]));
    let walk: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("walk.json")).unwrap()).unwrap();
    let steps = walk["steps"].as_array().unwrap();
    let count = |kind: &str| steps.iter().filter(|s| s["action"]["kind"] == kind).count();
    assert_eq!((count("recommend"), count("wayfind")), (20, 10));

    fs::write(dir.join("log.jsonl"), LOG).unwrap();
    let listed = ok(biblio(
        dir,
        &["telemetry", "annotate", "--logs", "log.jsonl", "--config", "world/config.toml", "--out", "t.csv"],
    ));
    assert_eq!(listed.lines().count(), 3);
    let wayfinder = fs::read_to_string(dir.join("t-wayfinder.csv")).unwrap();
    assert!(wayfinder.starts_with("uri,sum-records,X,Y,shelf-number,call-number\n"));
    assert_eq!(wayfinder.lines().count(), 2);
    let recommend = fs::read_to_string(dir.join("t-recommend.csv")).unwrap();
    assert!(recommend.contains("syn_100001,syn_100002"));

    let summary = ok(biblio(
        dir,
        &[
            "telemetry", "heatmap", "--logs", "log.jsonl", "--config", "world/config.toml", "--cell-size", "100",
            "--out", "g.csv,g.pgm",
        ],
    ));
    assert!(summary.starts_with("2 points, mass 2,"), "{summary}");
    let grid = fs::read_to_string(dir.join("g.csv")).unwrap();
    let mass: f64 = grid.split([',', '\n']).filter(|v| !v.is_empty()).map(|v| v.parse::<f64>().unwrap()).sum();
    assert_eq!(mass, 2.0);
    assert!(fs::read_to_string(dir.join("g.pgm")).unwrap().starts_with("P2"));
}

#[test]
fn log_only_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("log.jsonl"), LOG).unwrap();

    let trace = ok(biblio(dir, &["telemetry", "trace", "--logs", "log.jsonl", "--bib-id", "syn_100001"]));
    assert!(trace.contains("wayfinder,1\n") && trace.contains("recommend,1\n") && trace.contains("catalog,0\n"));

    let mine = ok(biblio(dir, &["telemetry", "mine", "--logs", "log.jsonl", "--module", "catalog"]));
    assert!(mine.starts_with("total words: 2\nunique forms: 2\n"), "{mine}");

    let monthly = ok(biblio(
        dir,
        &["telemetry", "monthly", "--logs", "log.jsonl", "--module", "recommend", "--from", "2016-09", "--to", "2016-12"],
    ));
    assert_eq!(monthly, "month,count\n2016-09,0\n2016-10,0\n2016-11,1\n2016-12,0\n");
}

#[test]
fn subjects_with_explicit_files_and_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let catalog = "bib_id,title,call_number,format\n\
        uiu_1,One,PS3545 .I345 1990,print\n\
        uiu_2,Two,PS3511 .A86 1951,print\n\
        uiu_3,Three,PR2894 .B7 2001,print\n\
        uiu_4,Four,QA76.73 .R87 2018,print\n";
    fs::write(dir.join("catalog.csv"), catalog).unwrap();
    let mut log = String::new();
    for (i, ids) in [["uiu_1", "uiu_2", "uiu_3"], ["uiu_1", "uiu_2", "uiu_4"], ["uiu_1", "uiu_3", "uiu_1"]].iter().enumerate() {
        log.push_str(&format!(
            r#"{{"timestamp":"2016-10-0{}T10:00:00Z","module":"recommend","uri":"/api/recommend/popularnear?x=1&y=1","params":{{"x":"1","y":"1"}},"status":200,"bib_ids":{}}}"#,
            i + 1,
            serde_json::to_string(ids).unwrap()
        ));
        log.push('\n');
    }
    fs::write(dir.join("log.jsonl"), log).unwrap();

    let out = biblio(
        dir,
        &["telemetry", "subjects", "--logs", "log.jsonl", "--catalog", "catalog.csv", "--out", "d.csv", "--fit"],
    );
    let stdout = ok(out);
    assert!(stdout.starts_with("fit: exponent "), "{stdout}");
    let dist = fs::read_to_string(dir.join("d.csv")).unwrap();
    let rows: Vec<&str> = dist.lines().collect();
    assert_eq!(rows[0], "subject,count");
    assert_eq!(rows[1], "American literature,6");
    assert_eq!(rows.len(), 4);
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = biblio(dir, &["telemetry", "trace", "--logs", "missing.jsonl", "--bib-id", "x"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.jsonl"));

    fs::write(dir.join("log.jsonl"), LOG).unwrap();
    let out = biblio(dir, &["telemetry", "heatmap", "--logs", "log.jsonl", "--out", "g.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--stackmap"));

    let out = biblio(dir, &["telemetry", "heatmap", "--logs", "log.jsonl", "--mode", "gaussian:-1", "--out", "g.csv"]);
    assert_eq!(out.status.code(), Some(2));

    let out = biblio(
        dir,
        &["telemetry", "annotate", "--logs", "log.jsonl", "--config", "c.toml", "--catalog", "x.csv", "--out", "t.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_exits_nonzero_when_a_check_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // Uniform circulation cannot give the expected skew.
    fs::write(
        dir.join("report.toml"),
        "seed = 5\nout = \"rep\"\n[corpus]\nrecords = 200\nalpha = 0.0\n[walk]\nrecommend = 40\nwayfind = 20\n[modules]\ncatalog = 5\njournal = 0\ndisplay = 0\nhoot = 0\naccount = 0\ntopicspace = 0\ncitation = 0\n",
    )
    .unwrap();
    let out = biblio(dir, &["harness", "report", "--config", "report.toml"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("PASS request-count"));
    assert!(stdout.contains("FAIL"));
    assert!(dir.join("rep/report.json").exists());
}
