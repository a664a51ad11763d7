use evsearch::index::EventIndex;
use evsearch::service::{ingest_jsonl, Engine};

fn engine(index: EventIndex) -> Engine {
    Engine::builtin(index).unwrap()
}

const DOC_A: &str = r#"{"id":"a","language":"en","text":"Students protested in Tehran."}"#;
const DOC_B: &str = r#"{"id":"b","language":"en","text":"Police arrested students in Hanoi yesterday."}"#;

#[test]
fn reopen_restores_documents_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("idx.jsonl");
    let before = {
        let e = engine(EventIndex::open(&path).unwrap());
        ingest_jsonl(&e, &format!("{DOC_A}\n{DOC_B}\n")).unwrap();
        e.index.snapshot()
    };
    let e = engine(EventIndex::open(&path).unwrap());
    let after = e.index.snapshot();
    assert_eq!(after.doc_count(), 2);
    assert_eq!(after.event_count(), before.event_count());
    assert_eq!(after.document("a"), before.document("a"));
    assert_eq!(after.document("b"), before.document("b"));
}

#[test]
fn last_record_for_a_document_wins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("idx.jsonl");
    {
        let e = engine(EventIndex::open(&path).unwrap());
        ingest_jsonl(&e, DOC_A).unwrap();
        ingest_jsonl(&e, r#"{"id":"a","language":"en","text":"Police arrested students."}"#).unwrap();
        let snap = e.index.snapshot();
        assert_eq!(snap.doc_count(), 1);
        assert_eq!(snap.document("a").unwrap().events[0].event_type, "Arrest");
    }
    let snap = engine(EventIndex::open(&path).unwrap()).index.snapshot();
    assert_eq!(snap.doc_count(), 1);
    assert_eq!(snap.document("a").unwrap().events[0].event_type, "Arrest");
    assert!(snap.events().all(|e| e.doc_id == "a" && e.event_type == "Arrest"));
}

#[test]
fn reingesting_the_same_corpus_is_idempotent() {
    let e = engine(EventIndex::in_memory());
    let corpus = format!("{DOC_A}\n{DOC_B}\n");
    ingest_jsonl(&e, &corpus).unwrap();
    let first = e.index.snapshot();
    ingest_jsonl(&e, &corpus).unwrap();
    let second = e.index.snapshot();
    assert_eq!(first.doc_count(), second.doc_count());
    assert_eq!(first.event_count(), second.event_count());
    assert_eq!(first.document("a"), second.document("a"));
}

#[test]
fn empty_corpus_reports_zero() {
    let e = engine(EventIndex::in_memory());
    let r = ingest_jsonl(&e, "").unwrap();
    assert_eq!((r.docs, r.events, r.failures), (0, 0, 0));
    let r = ingest_jsonl(&e, "\n  \n").unwrap();
    assert_eq!((r.docs, r.events, r.failures), (0, 0, 0));
}

#[test]
fn one_bad_document_does_not_stop_the_corpus() {
    let e = engine(EventIndex::in_memory());
    let corpus = format!("{DOC_A}\n{{\"id\":\"bad\",\"language\":\"en\"\n{DOC_B}\n");
    let r = ingest_jsonl(&e, &corpus).unwrap();
    assert_eq!(r.docs, 2);
    assert_eq!(r.failures, 1);
    assert_eq!(r.errors[0].line, 2);
    assert_eq!(e.index.snapshot().doc_count(), 2);

    let r = ingest_jsonl(&e, r#"{"id":"x","language":"zz-??","text":"hello"}"#).unwrap();
    assert_eq!((r.docs, r.failures), (0, 1));
    assert_eq!(r.errors[0].id.as_deref(), Some("x"));
}
