//! Out-of-process providers over a line-delimited JSON pipe.
//!
//! Each request is one UTF-8 JSON object followed by `\n`:
//!
//! ```text
//! {"id":7,"kind":"translate","payload":{"text":"...","source_language":"pl"}}
//! ```
//!
//! and is answered by exactly one line carrying the same `id`:
//!
//! ```text
//! {"id":7,"ok":true,"result":"..."}
//! {"id":7,"ok":false,"error":"message"}
//! ```
//!
//! | kind              | payload                                                          | result                     |
//! |-------------------|------------------------------------------------------------------|----------------------------|
//! | `describe`        | `{}`                                                             | `{"id","dimension"}`       |
//! | `tokenize`        | `{"text","class"}`                                               | `[Subword]`                |
//! | `anchor_scores`   | `{"sentence","tokens"}`                                          | `{"tags","rows"}`          |
//! | `argument_scores` | `{"sentence","tokens","anchor","event_type","role","role_id","input"}` | `{"tags","rows"}`    |
//! | `pair_scores`     | `{"sentence","tokens","anchors"}`                                | `[[[none,related,coref]]]` |
//! | `qa_scores`       | `{"sentence","tokens","question"}`                               | `{"start_scores","end_scores","null_score"}` |
//! | `embed`           | `{"tokens","language"}`                                          | `[[f64]]`                  |
//! | `translate`       | `{"text","source_language"}`                                     | `string`                   |
//! | `cac`             | `{"english","foreign"}`                                          | `f64`                      |
//!
//! Offsets inside payloads are Unicode scalar-value indices.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    AnchorScorer, ArgumentQuery, ArgumentScorer, CacProvider, EmbeddingProvider, PairScorer, Provider,
    ProviderRegistry, QaScorer, SubwordTokenizer, TranslationProvider,
};
use crate::document::{LanguageClass, Sentence};
use crate::error::{Error, Result};
use crate::extract::{ArgumentInput, LabelScoreMatrix, LabelScoreMatrixWire, QASpanScores, QaQuestion};
use crate::relations::{AnchorRef, PairScores};
use crate::span::Span;
use crate::tokenize::Subword;

#[derive(Debug, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub kind: String,
    #[serde(default)]
    pub payload: Value,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SentenceTokens {
    sentence: Sentence,
    tokens: Vec<Subword>,
}

#[derive(Serialize, Deserialize)]
struct ArgumentRequest {
    sentence: Sentence,
    tokens: Vec<Subword>,
    anchor: Span,
    event_type: String,
    role: String,
    role_id: u32,
    input: ArgumentInput,
}

#[derive(Serialize, Deserialize)]
struct PairRequest {
    sentence: Sentence,
    tokens: Vec<Subword>,
    anchors: Vec<AnchorRef>,
}

#[derive(Serialize, Deserialize)]
struct QaRequest {
    sentence: Sentence,
    tokens: Vec<Subword>,
    question: QaQuestion,
}

#[derive(Serialize, Deserialize)]
struct Describe {
    id: String,
    dimension: Option<usize>,
}

struct Pipe {
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

/// A provider backed by a child process speaking the protocol above. One
/// handle can fill any provider slot.
pub struct RemoteProvider {
    id: String,
    dimension: usize,
    next_id: AtomicU64,
    pipe: Mutex<Pipe>,
    child: Mutex<Child>,
}

impl RemoteProvider {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::io(program, e))?;
        let pipe = Pipe {
            stdin: child.stdin.take(),
            stdout: BufReader::new(child.stdout.take().expect("piped stdout")),
        };
        let mut remote = RemoteProvider {
            id: format!("remote/{program}"),
            dimension: 0,
            next_id: AtomicU64::new(1),
            pipe: Mutex::new(pipe),
            child: Mutex::new(child),
        };
        let d: Describe = remote.call("describe", json!({}))?;
        remote.id = format!("remote/{}", d.id);
        remote.dimension = d.dimension.unwrap_or(0);
        Ok(remote)
    }

    fn call<T: DeserializeOwned>(&self, kind: &str, payload: Value) -> Result<T> {
        let fail = |m: String| Error::provider(&self.id, m);
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let mut line = serde_json::to_string(&Request {
            id,
            kind: kind.to_string(),
            payload,
        })?;
        line.push('\n');
        let mut pipe = self.pipe.lock().unwrap_or_else(|p| p.into_inner());
        let stdin = pipe.stdin.as_mut().ok_or_else(|| fail("pipe closed".into()))?;
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| fail(e.to_string()))?;
        let mut reply = String::new();
        let n = pipe.stdout.read_line(&mut reply).map_err(|e| fail(e.to_string()))?;
        if n == 0 {
            return Err(fail("provider closed its output".into()));
        }
        let resp: Response = serde_json::from_str(&reply).map_err(|e| fail(format!("bad response: {e}")))?;
        if resp.id != id {
            return Err(fail(format!("response id {} for request {id}", resp.id)));
        }
        if !resp.ok {
            return Err(fail(resp.error.unwrap_or_else(|| "unspecified error".into())));
        }
        serde_json::from_value(resp.result.unwrap_or(Value::Null)).map_err(|e| fail(format!("bad result: {e}")))
    }
}

impl Drop for RemoteProvider {
    fn drop(&mut self) {
        // Closing stdin ends the peer's read loop.
        if let Ok(mut p) = self.pipe.lock() {
            p.stdin.take();
        }
        if let Ok(mut c) = self.child.lock() {
            let _ = c.wait();
        }
    }
}

impl Provider for RemoteProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn concurrent(&self) -> bool {
        false
    }
}

impl SubwordTokenizer for RemoteProvider {
    fn tokenize(&self, text: &str, class: LanguageClass) -> Result<Vec<Subword>> {
        self.call("tokenize", json!({ "text": text, "class": class }))
    }
}

impl AnchorScorer for RemoteProvider {
    fn score(&self, sentence: &Sentence, tokens: &[Subword]) -> Result<LabelScoreMatrix> {
        let wire: LabelScoreMatrixWire =
            self.call("anchor_scores", json!({ "sentence": sentence, "tokens": tokens }))?;
        LabelScoreMatrix::from_wire(wire)
    }
}

impl ArgumentScorer for RemoteProvider {
    fn score(&self, q: &ArgumentQuery<'_>) -> Result<LabelScoreMatrix> {
        let wire: LabelScoreMatrixWire = self.call(
            "argument_scores",
            json!({
                "sentence": q.sentence,
                "tokens": q.tokens,
                "anchor": q.anchor,
                "event_type": q.event_type,
                "role": q.role,
                "role_id": q.role_id,
                "input": q.input,
            }),
        )?;
        LabelScoreMatrix::from_wire(wire)
    }
}

impl PairScorer for RemoteProvider {
    fn score(&self, sentence: &Sentence, tokens: &[Subword], anchors: &[AnchorRef]) -> Result<PairScores> {
        self.call(
            "pair_scores",
            json!({ "sentence": sentence, "tokens": tokens, "anchors": anchors }),
        )
    }
}

impl QaScorer for RemoteProvider {
    fn score(&self, sentence: &Sentence, tokens: &[Subword], question: &QaQuestion) -> Result<QASpanScores> {
        self.call(
            "qa_scores",
            json!({ "sentence": sentence, "tokens": tokens, "question": question }),
        )
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, tokens: &[Subword], language: &str) -> Result<Vec<Vec<f64>>> {
        self.call("embed", json!({ "tokens": tokens, "language": language }))
    }
}

impl TranslationProvider for RemoteProvider {
    fn translate(&self, text: &str, source_language: &str) -> Result<String> {
        self.call(
            "translate",
            json!({ "text": text, "source_language": source_language }),
        )
    }
}

impl CacProvider for RemoteProvider {
    fn cac(&self, english: &str, foreign: &str) -> Result<f64> {
        self.call("cac", json!({ "english": english, "foreign": foreign }))
    }
}

fn dispatch(registry: &ProviderRegistry, name: &str, kind: &str, payload: Value) -> Result<Value> {
    fn arg<T: DeserializeOwned>(v: Value) -> Result<T> {
        Ok(serde_json::from_value(v)?)
    }
    Ok(match kind {
        "describe" => serde_json::to_value(Describe {
            id: name.to_string(),
            dimension: Some(registry.embeddings.get().dimension()),
        })?,
        "tokenize" => {
            #[derive(Deserialize)]
            struct P {
                text: String,
                class: LanguageClass,
            }
            let p: P = arg(payload)?;
            serde_json::to_value(registry.tokenizer.get().tokenize(&p.text, p.class)?)?
        }
        "anchor_scores" => {
            let p: SentenceTokens = arg(payload)?;
            serde_json::to_value(registry.anchor_scorer.get().score(&p.sentence, &p.tokens)?.to_wire())?
        }
        "argument_scores" => {
            let p: ArgumentRequest = arg(payload)?;
            let q = ArgumentQuery {
                sentence: &p.sentence,
                tokens: &p.tokens,
                anchor: p.anchor,
                event_type: &p.event_type,
                role: &p.role,
                role_id: p.role_id,
                input: &p.input,
            };
            serde_json::to_value(registry.argument_scorer.get().score(&q)?.to_wire())?
        }
        "pair_scores" => {
            let p: PairRequest = arg(payload)?;
            serde_json::to_value(registry.pair_scorer.get().score(&p.sentence, &p.tokens, &p.anchors)?)?
        }
        "qa_scores" => {
            let p: QaRequest = arg(payload)?;
            serde_json::to_value(registry.qa_scorer.get().score(&p.sentence, &p.tokens, &p.question)?)?
        }
        "embed" => {
            #[derive(Deserialize)]
            struct P {
                tokens: Vec<Subword>,
                language: String,
            }
            let p: P = arg(payload)?;
            serde_json::to_value(registry.embeddings.get().embed(&p.tokens, &p.language)?)?
        }
        "translate" => {
            #[derive(Deserialize)]
            struct P {
                text: String,
                source_language: String,
            }
            let p: P = arg(payload)?;
            serde_json::to_value(registry.translation.get().translate(&p.text, &p.source_language)?)?
        }
        "cac" => {
            #[derive(Deserialize)]
            struct P {
                english: String,
                foreign: String,
            }
            let p: P = arg(payload)?;
            serde_json::to_value(registry.cac.get().cac(&p.english, &p.foreign)?)?
        }
        other => return Err(Error::InvalidQuery(format!("unknown request kind `{other}`"))),
    })
}

/// Answer requests from `input` with `registry` until end of input.
/// Malformed requests get an error response; only I/O failures stop the loop.
pub fn serve<R: BufRead, W: Write>(input: R, mut output: W, registry: &ProviderRegistry, name: &str) -> Result<()> {
    for line in input.lines() {
        let line = line.map_err(|e| Error::io("<stdin>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<Request>(&line) {
            Ok(req) => match dispatch(registry, name, &req.kind, req.payload) {
                Ok(v) => Response {
                    id: req.id,
                    ok: true,
                    result: Some(v),
                    error: None,
                },
                Err(e) => Response {
                    id: req.id,
                    ok: false,
                    result: None,
                    error: Some(e.to_string()),
                },
            },
            Err(e) => Response {
                id: 0,
                ok: false,
                result: None,
                error: Some(format!("malformed request: {e}")),
            },
        };
        let mut out = serde_json::to_string(&response)?;
        out.push('\n');
        output
            .write_all(out.as_bytes())
            .and_then(|_| output.flush())
            .map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorers::{RuleScorers, RuleSet};
    use std::sync::Arc;

    fn registry() -> ProviderRegistry {
        let rules = RuleSet::parse("[triggers]\nprotests\tProtest\n", "mem").unwrap();
        ProviderRegistry::from_rules(Arc::new(RuleScorers::new(rules, ["Protest"])))
    }

    fn roundtrip(lines: &str) -> Vec<Response> {
        let mut out = Vec::new();
        serve(lines.as_bytes(), &mut out, &registry(), "test").unwrap();
        String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }

    #[test]
    fn answers_each_request_in_order() {
        let r = roundtrip(
            "{\"id\":1,\"kind\":\"describe\",\"payload\":{}}\n\
             {\"id\":2,\"kind\":\"translate\",\"payload\":{\"text\":\"abc\",\"source_language\":\"pl\"}}\n\
             {\"id\":3,\"kind\":\"tokenize\",\"payload\":{\"text\":\"Floods\",\"class\":\"whitespace-delimited\"}}\n",
        );
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].result.as_ref().unwrap()["id"], "test");
        assert_eq!(r[1].result.as_ref().unwrap(), "abc");
        let toks: Vec<Subword> = serde_json::from_value(r[2].result.clone().unwrap()).unwrap();
        assert_eq!(toks.len(), 2);
    }

    #[test]
    fn errors_are_reported_not_fatal() {
        let r = roundtrip("not json\n{\"id\":9,\"kind\":\"bogus\"}\n{\"id\":10,\"kind\":\"cac\",\"payload\":{\"english\":\"oil\",\"foreign\":\"oil\"}}\n");
        assert!(!r[0].ok);
        assert_eq!(r[1].id, 9);
        assert!(!r[1].ok);
        assert!(r[2].ok);
    }
}
