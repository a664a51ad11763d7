use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn evsearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evsearch")).args(args).output().unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn extract_prints_result_json() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("merkel.txt");
    std::fs::write(&file, "Angela Merkel a fait des déclarations sur l'Ukraine.").unwrap();
    let out = stdout(&evsearch(&["extract", file.to_str().unwrap(), "--language", "fr"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["document"]["id"], "merkel");
    assert_eq!(v["sentences"][0]["events"][0]["event_type"], "Communicate");
    assert_eq!(v["translation_status"], "done");

    let out = stdout(&evsearch(&["extract", file.to_str().unwrap(), "--language", "fr", "--no-translate"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["translation_status"], "pending");
}

#[test]
fn eval_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let doc = |anchors: &[(usize, usize, &str)]| {
        let events: Vec<_> = anchors
            .iter()
            .enumerate()
            .map(|(j, (s, e, t))| {
                serde_json::json!({
                    "id": format!("s0.e{j}"), "event_type": "Protest", "anchor_confidence": 1.0,
                    "anchors": [{"start": s, "end": e, "text": t}], "arguments": []
                })
            })
            .collect();
        serde_json::json!({
            "format": "evsearch-extraction", "version": 1,
            "document": {"id": "d", "language": "en", "text": "aa bb cc dd"},
            "sentences": [{"index": 0, "char_base": 0, "text": "aa bb cc dd", "events": events}],
            "translation_status": "done"
        })
    };
    let pred = dir.path().join("pred.jsonl");
    let gold = dir.path().join("gold.jsonl");
    std::fs::write(&pred, doc(&[(0, 2, "aa"), (3, 5, "bb"), (6, 8, "cc")]).to_string()).unwrap();
    std::fs::write(&gold, doc(&[(0, 2, "aa"), (3, 5, "bb"), (9, 11, "dd")]).to_string()).unwrap();
    let out = evsearch(&["eval", pred.to_str().unwrap(), gold.to_str().unwrap(), "--task", "anchors"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[0].starts_with("task"));
    let cols: Vec<&str> = lines[1].split_whitespace().collect();
    assert_eq!(cols, ["anchors", "0.6667", "0.6667", "0.6667"]);
}

#[test]
fn index_and_search_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("idx.jsonl");
    let corpus = fixtures().join("corpus.jsonl");
    let report: serde_json::Value =
        serde_json::from_str(&stdout(&evsearch(&["index", corpus.to_str().unwrap(), "-o", index.to_str().unwrap()]))).unwrap();
    assert_eq!(report["docs"], 3);
    assert_eq!(report["failures"], 0);

    let out = stdout(&evsearch(&["search", index.to_str().unwrap(), "--type", "Arrest", "--k", "1"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["hits"][0]["event"]["event_id"], "en-tehran/s1.e0");
}

#[test]
fn errors_exit_nonzero() {
    let o = evsearch(&["search", "/nonexistent/index.jsonl", "--type", "Protest"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));

    let o = evsearch(&["--config", "/nonexistent/cfg.toml", "extract", "x.txt"]);
    assert!(!o.status.success());
}

#[test]
fn demo_config_loads() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo.toml");
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("doc.txt");
    std::fs::write(&file, "UE wycofuje się z kupowania rosyjskiej ropy.").unwrap();
    let out = stdout(&evsearch(&["--config", cfg.to_str().unwrap(), "extract", file.to_str().unwrap(), "--language", "pl"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["sentences"][0]["events"].as_array().unwrap().len(), 2);
}
