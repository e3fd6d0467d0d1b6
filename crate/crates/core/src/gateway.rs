//! Prompt construction, chat-model access, answer extraction and the
//! solver-backed predictors.
//!
//! User message layout (stable):
//!
//! ```text
//! المقاطع المسترجعة:
//! [1] <passage>
//!
//! [2] <passage>
//!
//! السؤال:
//! <question>
//!
//! الخيارات:
//! A) <option>
//! B) <option>
//!
//! الإجابة:
//! ```
//!
//! The passage section is omitted when no passages are supplied.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::http::{post_json, HttpError, RetryPolicy};
use crate::label::ShareLabel;
use crate::mcq::{parse_option, parse_question, McqItem, ParsedOption, Target, LETTERS};
use crate::retrieval::{query_top_k, EmbeddingProvider, Index, RetrievalError, SearchHit};
use crate::solver::{solve, verdict_for, VerdictKind};

/// System instruction shipped with this tool (not taken from any external source).
pub const SYSTEM_PROMPT: &str = "أنت خبير في علم المواريث (الفرائض). اقرأ المقاطع والسؤال والخيارات، ثم أجب بحرف واحد فقط من الحروف A إلى F يدل على الخيار الصحيح، دون أي شرح.";

const PASSAGES_HEAD: &str = "المقاطع المسترجعة:";
const QUESTION_HEAD: &str = "السؤال:";
const OPTIONS_HEAD: &str = "الخيارات:";
const ANSWER_HEAD: &str = "الإجابة:";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("model unavailable: {0}")]
    ModelUnavailable(String),
    #[error("model request timed out: {0}")]
    Timeout(String),
    #[error("question and options need {needed} tokens, budget is {budget}")]
    BudgetTooSmall { needed: usize, budget: usize },
    #[error("item {0} has no gold option")]
    MissingGold(String),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GatewayError {
    fn from(e: std::io::Error) -> Self {
        GatewayError::Io(e.to_string())
    }
}

impl From<HttpError> for GatewayError {
    fn from(e: HttpError) -> Self {
        match e {
            HttpError::Timeout(m) => GatewayError::Timeout(m),
            other => GatewayError::ModelUnavailable(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        ChatMessage {
            role,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub temperature: f64,
    pub max_new_tokens: u32,
    pub greedy: bool,
    pub max_input_tokens: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            temperature: 0.05,
            max_new_tokens: 15,
            greedy: true,
            max_input_tokens: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionPolicy {
    #[default]
    First,
    Last,
    Majority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub item_id: String,
    pub letter: Option<char>,
    pub raw_output: String,
    pub used_passage_ids: Vec<String>,
    pub latency_ms: u64,
    /// Set when a hybrid override replaced the LLM letter.
    #[serde(default)]
    pub overridden: bool,
}

impl Prediction {
    fn abstain(item_id: &str, raw: impl Into<String>) -> Self {
        Prediction {
            item_id: item_id.to_string(),
            letter: None,
            raw_output: raw.into(),
            used_passage_ids: Vec::new(),
            latency_ms: 0,
            overridden: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedPassage {
    pub id: String,
    pub score: f32,
    pub text: String,
}

impl RetrievedPassage {
    pub fn resolve(index: &Index, hits: &[SearchHit]) -> Vec<RetrievedPassage> {
        hits.iter()
            .filter_map(|h| {
                index.passage(&h.id).map(|p| RetrievedPassage {
                    id: h.id.clone(),
                    score: h.score,
                    text: p.text.clone(),
                })
            })
            .collect()
    }
}

/// Prompt before rendering; passages are kept in retrieval order.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptParts {
    pub system: String,
    pub passages: Vec<RetrievedPassage>,
    pub question: String,
    pub options: BTreeMap<char, String>,
}

impl PromptParts {
    pub fn user_content(&self) -> String {
        let mut s = String::new();
        if !self.passages.is_empty() {
            s.push_str(PASSAGES_HEAD);
            s.push('\n');
            for (i, p) in self.passages.iter().enumerate() {
                s.push_str(&format!("[{}] {}\n\n", i + 1, p.text.trim()));
            }
        }
        s.push_str(QUESTION_HEAD);
        s.push('\n');
        s.push_str(self.question.trim());
        s.push_str("\n\n");
        s.push_str(OPTIONS_HEAD);
        s.push('\n');
        // explicit letter order, independent of map iteration
        for l in LETTERS {
            if let Some(t) = self.options.get(&l) {
                s.push_str(&format!("{l}) {}\n", t.trim()));
            }
        }
        s.push('\n');
        s.push_str(ANSWER_HEAD);
        s
    }

    pub fn messages(&self) -> Vec<ChatMessage> {
        vec![
            ChatMessage::new(Role::System, self.system.clone()),
            ChatMessage::new(Role::User, self.user_content()),
        ]
    }
}

pub fn build_prompt(item: &McqItem, passages: &[RetrievedPassage]) -> PromptParts {
    PromptParts {
        system: SYSTEM_PROMPT.to_string(),
        passages: passages.to_vec(),
        question: item.question.clone(),
        options: item.options.clone(),
    }
}

/// Recover question and options from a user message rendered without passages.
pub fn parse_user_content(content: &str) -> Option<(String, BTreeMap<char, String>)> {
    let body = content.split_once(&format!("{QUESTION_HEAD}\n"))?.1;
    let (question, rest) = body.split_once(&format!("\n\n{OPTIONS_HEAD}\n"))?;
    let (opts, _) = rest.rsplit_once(&format!("\n\n{ANSWER_HEAD}"))?;
    let mut options = BTreeMap::new();
    for line in opts.lines() {
        let mut chars = line.chars();
        let letter = chars.next()?;
        let text = chars.as_str().strip_prefix(") ")?;
        options.insert(letter, text.to_string());
    }
    Some((question.to_string(), options))
}

pub trait Tokenizer: Sync {
    fn count(&self, text: &str) -> usize;
}

/// ceil(chars / 4); an approximation, not a model tokenizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharApproxTokenizer;

impl Tokenizer for CharApproxTokenizer {
    fn count(&self, text: &str) -> usize {
        text.chars().count().div_ceil(4)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub parts: PromptParts,
    pub dropped: Vec<String>,
}

fn prompt_tokens(parts: &PromptParts, tok: &dyn Tokenizer) -> usize {
    parts.messages().iter().map(|m| tok.count(&m.content)).sum()
}

/// Drop the lowest-scoring passages until the prompt fits `budget`.
pub fn truncate_to_budget(
    parts: &PromptParts,
    tok: &dyn Tokenizer,
    budget: usize,
) -> Result<Truncation, GatewayError> {
    let bare = PromptParts {
        passages: Vec::new(),
        ..parts.clone()
    };
    let needed = prompt_tokens(&bare, tok);
    if needed > budget {
        return Err(GatewayError::BudgetTooSmall { needed, budget });
    }
    let mut current = parts.clone();
    let mut dropped = Vec::new();
    while prompt_tokens(&current, tok) > budget {
        // lowest score, ties resolved against the later passage
        let (at, _) = current
            .passages
            .iter()
            .enumerate()
            .min_by(|(ia, a), (ib, b)| a.score.total_cmp(&b.score).then(ib.cmp(ia)))
            .expect("passages remain while over budget");
        let p = current.passages.remove(at);
        log::debug!(
            "dropping passage {} (score {:.4}) to meet budget {budget}",
            p.id,
            p.score
        );
        dropped.push(p.id);
    }
    Ok(Truncation {
        parts: current,
        dropped,
    })
}

/// Standalone A–F letters in order of appearance (uppercased).
fn letter_candidates(raw: &str) -> Vec<char> {
    let chars: Vec<char> = raw.chars().collect();
    let word = |c: Option<&char>| c.is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_');
    chars
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let up = c.to_ascii_uppercase();
            let standalone =
                !word(i.checked_sub(1).and_then(|j| chars.get(j))) && !word(chars.get(i + 1));
            (LETTERS.contains(&up) && standalone).then_some(up)
        })
        .collect()
}

pub fn extract_answer_letter(raw: &str, valid: &[char], policy: ExtractionPolicy) -> Option<char> {
    let cands = letter_candidates(raw);
    let pick = match policy {
        ExtractionPolicy::First => cands.first().copied(),
        ExtractionPolicy::Last => cands.last().copied(),
        ExtractionPolicy::Majority => {
            let mut counts: Vec<(char, usize, usize)> = Vec::new();
            for (pos, c) in cands.iter().enumerate() {
                match counts.iter_mut().find(|e| e.0 == *c) {
                    Some(e) => e.1 += 1,
                    None => counts.push((*c, 1, pos)),
                }
            }
            counts
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
                .map(|e| e.0)
        }
    };
    pick.filter(|c| valid.contains(c))
}

pub trait ChatClient: Sync {
    fn complete(
        &self,
        item_id: &str,
        messages: &[ChatMessage],
        decode: &DecodeConfig,
    ) -> Result<String, GatewayError>;
}

/// HTTP chat endpoint. Request: {"model","messages","temperature","max_tokens","greedy"};
/// the item id travels in the `X-Item-Id` header.
#[derive(Debug, Clone)]
pub struct HttpChatClient {
    pub url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub retry: RetryPolicy,
}

impl HttpChatClient {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        HttpChatClient {
            url: url.into(),
            model: model.into(),
            api_key: None,
            retry: RetryPolicy::default(),
        }
    }

    /// Read the API key from the named environment variable, if set.
    pub fn with_api_key_env(mut self, var: &str) -> Self {
        self.api_key = std::env::var(var).ok().filter(|k| !k.is_empty());
        self
    }
}

fn response_text(v: &Value) -> Option<String> {
    v.get("text")
        .or_else(|| v.pointer("/choices/0/message/content"))
        .or_else(|| v.pointer("/choices/0/text"))
        .and_then(Value::as_str)
        .map(str::to_string)
}

impl ChatClient for HttpChatClient {
    fn complete(
        &self,
        item_id: &str,
        messages: &[ChatMessage],
        decode: &DecodeConfig,
    ) -> Result<String, GatewayError> {
        let body = json!({
            "model": self.model,
            "messages": messages,
            "temperature": decode.temperature,
            "max_tokens": decode.max_new_tokens,
            "greedy": decode.greedy,
        });
        let mut headers = vec![("X-Item-Id", item_id.to_string())];
        if let Some(k) = &self.api_key {
            headers.push(("Authorization", format!("Bearer {k}")));
        }
        let v: Value = post_json(&self.url, &headers, &body, &self.retry)?;
        response_text(&v)
            .ok_or_else(|| GatewayError::ModelUnavailable("response has no text field".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    pub decode: DecodeConfig,
    pub k: usize,
    pub policy: ExtractionPolicy,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            decode: DecodeConfig::default(),
            k: crate::retrieval::DEFAULT_K,
            policy: ExtractionPolicy::First,
        }
    }
}

pub struct Retriever<'a> {
    pub index: &'a Index,
    pub provider: &'a dyn EmbeddingProvider,
}

pub fn predict_llm(
    item: &McqItem,
    retriever: Option<&Retriever<'_>>,
    client: &dyn ChatClient,
    config: &LlmConfig,
) -> Result<Prediction, GatewayError> {
    let start = Instant::now();
    let passages = match retriever {
        Some(r) if config.k > 0 => {
            let hits = query_top_k(r.index, r.provider, &item.question, config.k)?;
            RetrievedPassage::resolve(r.index, &hits)
        }
        _ => Vec::new(),
    };
    let parts = build_prompt(item, &passages);
    let t = truncate_to_budget(&parts, &CharApproxTokenizer, config.decode.max_input_tokens)?;
    log::debug!(
        "item {}: k={} temperature={} max_new_tokens={} greedy={} policy={:?} dropped={:?}",
        item.id,
        config.k,
        config.decode.temperature,
        config.decode.max_new_tokens,
        config.decode.greedy,
        config.policy,
        t.dropped
    );
    let raw = client.complete(&item.id, &t.parts.messages(), &config.decode)?;
    let letter = extract_answer_letter(&raw, &item.letters(), config.policy);
    Ok(Prediction {
        item_id: item.id.clone(),
        letter,
        raw_output: raw,
        used_passage_ids: t.parts.passages.iter().map(|p| p.id.clone()).collect(),
        latency_ms: start.elapsed().as_millis() as u64,
        overridden: false,
    })
}

/// Run `predict_llm` over many items with at most `jobs` requests in flight.
/// Results come back sorted by item id.
pub fn predict_llm_many(
    items: &[McqItem],
    retriever: Option<&Retriever<'_>>,
    client: &dyn ChatClient,
    config: &LlmConfig,
    jobs: usize,
) -> Result<Vec<Prediction>, GatewayError> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Result<Prediction, GatewayError>>> =
        Mutex::new(Vec::with_capacity(items.len()));
    thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { break };
                let r = predict_llm(item, retriever, client, config);
                results.lock().expect("results lock").push(r);
            });
        }
    });
    let mut out = results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    Ok(out)
}

/// The option letter the solver supports for an item, with its verdict kind
/// for single-target questions.
pub fn solver_choice(item: &McqItem) -> Option<(char, Option<VerdictKind>)> {
    let q = parse_question(&item.question).ok()?;
    let result = solve(&q.case).ok()?;
    match q.target {
        Target::Single(t) => {
            let v = verdict_for(&result, t).ok()?;
            let letter = item
                .options
                .iter()
                .find(|(_, text)| parse_option(text).ok().and_then(|o| o.label()) == Some(v.label))
                .map(|(l, _)| *l)?;
            Some((letter, Some(v.kind)))
        }
        Target::AllParties => {
            let expected: BTreeMap<_, ShareLabel> = result
                .allocations
                .iter()
                .map(|a| (a.party.class, a.label))
                .collect();
            let letter = item
                .options
                .iter()
                .find(|(_, text)| match parse_option(text) {
                    Ok(ParsedOption::PerHeir(list)) => {
                        let got: BTreeMap<_, _> = list.iter().map(|(p, l)| (p.class, *l)).collect();
                        got == expected
                    }
                    _ => false,
                })
                .map(|(l, _)| *l)?;
            Some((letter, None))
        }
    }
}

pub fn predict_solver(item: &McqItem) -> Prediction {
    let start = Instant::now();
    let mut p = match solver_choice(item) {
        Some((letter, _)) => Prediction {
            letter: Some(letter),
            ..Prediction::abstain(&item.id, letter.to_string())
        },
        None => Prediction::abstain(&item.id, ""),
    };
    p.latency_ms = start.elapsed().as_millis() as u64;
    p
}

/// Override the LLM letter with the blocked option when the solver finds the target blocked.
pub fn predict_hybrid(item: &McqItem, llm: &Prediction) -> Prediction {
    let mut out = llm.clone();
    if let Some((letter, Some(VerdictKind::Blocked))) = solver_choice(item) {
        if llm.letter != Some(letter) {
            log::info!(
                "hybrid override on {}: {:?} -> {letter}",
                item.id,
                llm.letter
            );
            out.overridden = true;
            out.letter = Some(letter);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraConfig {
    pub r: u32,
    pub alpha: u32,
    pub dropout: f64,
    pub target_modules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: u32,
    pub per_device_train_batch_size: u32,
    pub per_device_eval_batch_size: u32,
    pub gradient_accumulation_steps: u32,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub warmup_ratio: f64,
    pub max_grad_norm: f64,
    pub optimizer: String,
    pub lr_scheduler: String,
    pub fp16: bool,
    pub load_in_4bit: bool,
    pub quant_type: String,
    pub gradient_checkpointing: bool,
    pub attn_implementation: String,
    pub use_cache: bool,
    pub lora: LoraConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 4,
            per_device_train_batch_size: 2,
            per_device_eval_batch_size: 2,
            gradient_accumulation_steps: 32,
            learning_rate: 3e-4,
            weight_decay: 0.01,
            warmup_ratio: 0.1,
            max_grad_norm: 1.0,
            optimizer: "adamw_torch".into(),
            lr_scheduler: "cosine".into(),
            fp16: true,
            load_in_4bit: true,
            quant_type: "nf4".into(),
            gradient_checkpointing: true,
            attn_implementation: "eager".into(),
            use_cache: false,
            lora: LoraConfig {
                r: 32,
                alpha: 64,
                dropout: 0.1,
                target_modules: [
                    "q_proj",
                    "k_proj",
                    "v_proj",
                    "o_proj",
                    "gate_proj",
                    "up_proj",
                    "down_proj",
                ]
                .map(String::from)
                .to_vec(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub id: String,
    pub level: crate::mcq::Level,
    pub messages: Vec<ChatMessage>,
}

pub fn sft_record(item: &McqItem) -> Result<SftRecord, GatewayError> {
    if !item.options.contains_key(&item.gold) {
        return Err(GatewayError::MissingGold(item.id.clone()));
    }
    let mut messages = build_prompt(item, &[]).messages();
    messages.push(ChatMessage::new(Role::Assistant, item.gold.to_string()));
    Ok(SftRecord {
        id: item.id.clone(),
        level: item.level,
        messages,
    })
}

/// Sidecar path holding the training configuration next to an SFT file.
pub fn sft_config_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or_else(|| "sft".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.config.json"))
}

/// Write one JSON record per item plus the sidecar training configuration.
pub fn export_sft_records(
    items: &[McqItem],
    path: &Path,
    config: &TrainingConfig,
) -> Result<PathBuf, GatewayError> {
    let records = items
        .iter()
        .map(sft_record)
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = BufWriter::new(File::create(path)?);
    for r in &records {
        writeln!(
            w,
            "{}",
            serde_json::to_string(r).map_err(|e| GatewayError::Io(e.to_string()))?
        )?;
    }
    w.flush()?;
    let sidecar = sft_config_path(path);
    let cfg =
        json!({ "records": records.len(), "system_prompt": SYSTEM_PROMPT, "training": config });
    std::fs::write(
        &sidecar,
        serde_json::to_string_pretty(&cfg).map_err(|e| GatewayError::Io(e.to_string()))?,
    )?;
    Ok(sidecar)
}

/// Scripted chat server for tests: answers each request with the canned
/// output for its `X-Item-Id` (404 when the id is unknown).
pub struct MockChatServer {
    addr: String,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
    requests: Arc<AtomicUsize>,
}

impl MockChatServer {
    pub fn start(transcript: HashMap<String, String>) -> std::io::Result<MockChatServer> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?.to_string();
        let stop = Arc::new(AtomicBool::new(false));
        let requests = Arc::new(AtomicUsize::new(0));
        let transcript = Arc::new(transcript);
        let (stop2, req2) = (stop.clone(), requests.clone());
        let handle = thread::spawn(move || {
            for stream in listener.incoming() {
                if stop2.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let t = transcript.clone();
                let r = req2.clone();
                thread::spawn(move || {
                    if serve_one(stream, &t).is_ok() {
                        r.fetch_add(1, Ordering::SeqCst);
                    }
                });
            }
        });
        Ok(MockChatServer {
            addr,
            stop,
            handle: Some(handle),
            requests,
        })
    }

    pub fn load(path: &Path) -> std::io::Result<MockChatServer> {
        let text = std::fs::read_to_string(path)?;
        let map: HashMap<String, String> = serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        MockChatServer::start(map)
    }

    pub fn url(&self) -> String {
        format!("http://{}/v1/chat", self.addr)
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockChatServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(&self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve_one(stream: TcpStream, transcript: &HashMap<String, String>) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.is_empty() {
        return Err(std::io::ErrorKind::UnexpectedEof.into());
    }
    let mut item_id = None;
    let mut length = 0usize;
    loop {
        line.clear();
        reader.read_line(&mut line)?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            match k.trim().to_ascii_lowercase().as_str() {
                "x-item-id" => item_id = Some(v.trim().to_string()),
                "content-length" => length = v.trim().parse().unwrap_or(0),
                _ => {}
            }
        }
    }
    let mut body = vec![0u8; length];
    reader.read_exact(&mut body)?;
    let (status, payload) = match item_id.as_ref().and_then(|id| transcript.get(id)) {
        Some(text) => ("200 OK", json!({ "text": text }).to_string()),
        None => (
            "404 Not Found",
            json!({ "error": "unknown item" }).to_string(),
        ),
    };
    let mut w = stream;
    write!(
        w,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extraction_forms() {
        let v = LETTERS;
        assert_eq!(
            extract_answer_letter("B", &v, ExtractionPolicy::First),
            Some('B')
        );
        assert_eq!(
            extract_answer_letter("الإجابة الصحيحة هي (D) لأن", &v, ExtractionPolicy::First),
            Some('D')
        );
        assert_eq!(
            extract_answer_letter("الإجابة: c.", &v, ExtractionPolicy::First),
            Some('C')
        );
        assert_eq!(
            extract_answer_letter("لا أعرف", &v, ExtractionPolicy::First),
            None
        );
        assert_eq!(
            extract_answer_letter("ABC", &v, ExtractionPolicy::First),
            None
        );
        assert_eq!(
            extract_answer_letter("A then B", &v, ExtractionPolicy::Last),
            Some('B')
        );
        assert_eq!(
            extract_answer_letter("A B B", &v, ExtractionPolicy::Majority),
            Some('B')
        );
        assert_eq!(
            extract_answer_letter("F", &['A', 'B'], ExtractionPolicy::First),
            None
        );
    }

    #[test]
    fn char_approx() {
        assert_eq!(CharApproxTokenizer.count(""), 0);
        assert_eq!(CharApproxTokenizer.count("abcde"), 2);
    }
}
