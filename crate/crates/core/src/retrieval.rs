//! Passage store with exact (flat) cosine search.
//!
//! Index file layout (JSON, stable):
//! `{"format": "qias-flat-index", "version": 1, "dim": n, "passages": [{"id", "text", "source"}], "vectors": [[f32; n]]}`.
//! Vectors are stored already L2-normalized, in passage order.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::arabic::{normalize_orthography, tokens, NormMode};
use crate::http::{post_json, HttpError, RetryPolicy};

pub const DEFAULT_DIM: usize = 384;
pub const DEFAULT_K: usize = 5;
pub const CHUNK_CAP: usize = 1500;
const INDEX_FORMAT: &str = "qias-flat-index";
const INDEX_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    EmbeddingDimMismatch { expected: usize, got: usize },
    #[error("no passages to index")]
    EmptyCorpus,
    #[error("empty embedding input")]
    EmptyInput,
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("non-finite embedding value")]
    NonFinite,
    #[error("index file: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for RetrievalError {
    fn from(e: std::io::Error) -> Self {
        RetrievalError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub id: String,
    pub score: f32,
}

pub trait EmbeddingProvider: Sync {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError>;
}

/// Validate inputs and outputs around a provider call.
pub fn embed(
    provider: &dyn EmbeddingProvider,
    texts: &[String],
) -> Result<Vec<Vec<f32>>, RetrievalError> {
    if texts.is_empty() || texts.iter().any(|t| t.trim().is_empty()) {
        return Err(RetrievalError::EmptyInput);
    }
    let vectors = provider.embed_batch(texts)?;
    if vectors.len() != texts.len() {
        return Err(RetrievalError::ProviderUnavailable(format!(
            "{} vectors for {} texts",
            vectors.len(),
            texts.len()
        )));
    }
    if vectors.iter().flatten().any(|v| !v.is_finite()) {
        return Err(RetrievalError::NonFinite);
    }
    Ok(vectors)
}

/// Deterministic hashed bag-of-words embedder (FNV-1a over dedup-normalized tokens).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedBowEmbedder {
    pub dim: usize,
}

impl Default for HashedBowEmbedder {
    fn default() -> Self {
        HashedBowEmbedder { dim: DEFAULT_DIM }
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl HashedBowEmbedder {
    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a64(token.as_bytes()) % self.dim as u64) as usize
    }

    pub fn embed_one(&self, text: &str) -> Vec<f32> {
        let norm = normalize_orthography(&text.to_lowercase(), NormMode::Dedup).text;
        let mut v = vec![0f32; self.dim];
        for (_, tok) in tokens(&norm) {
            v[self.bucket(tok)] += 1.0;
        }
        v
    }
}

impl EmbeddingProvider for HashedBowEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// Remote embedding service: POST {"texts": [...]} → {"vectors": [[...]]}.
#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    pub url: String,
    pub retry: RetryPolicy,
    pub batch_size: usize,
    pub max_in_flight: usize,
    pub api_key: Option<String>,
}

impl HttpEmbedder {
    pub fn new(url: impl Into<String>) -> Self {
        HttpEmbedder {
            url: url.into(),
            retry: RetryPolicy::default(),
            batch_size: 32,
            max_in_flight: 4,
            api_key: None,
        }
    }

    fn call(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
        #[derive(Serialize)]
        struct Req<'a> {
            texts: &'a [String],
        }
        #[derive(Deserialize)]
        struct Resp {
            vectors: Vec<Vec<f32>>,
        }
        let mut headers = Vec::new();
        if let Some(k) = &self.api_key {
            headers.push(("Authorization", format!("Bearer {k}")));
        }
        let resp: Resp =
            post_json(&self.url, &headers, &Req { texts }, &self.retry).map_err(|e| match e {
                HttpError::Malformed(m) => {
                    RetrievalError::ProviderUnavailable(format!("malformed response: {m}"))
                }
                other => RetrievalError::ProviderUnavailable(other.to_string()),
            })?;
        Ok(resp.vectors)
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
        let batches: Vec<&[String]> = texts.chunks(self.batch_size.max(1)).collect();
        let mut out = Vec::with_capacity(texts.len());
        // at most `max_in_flight` requests at once; results kept in input order
        for wave in batches.chunks(self.max_in_flight.max(1)) {
            let results: Vec<Result<Vec<Vec<f32>>, RetrievalError>> = thread::scope(|s| {
                let handles: Vec<_> = wave.iter().map(|b| s.spawn(move || self.call(b))).collect();
                handles
                    .into_iter()
                    .map(|h| {
                        h.join().unwrap_or_else(|_| {
                            Err(RetrievalError::ProviderUnavailable(
                                "worker panicked".into(),
                            ))
                        })
                    })
                    .collect()
            });
            for r in results {
                out.extend(r?);
            }
        }
        Ok(out)
    }
}

fn l2_normalize(mut v: Vec<f32>) -> Vec<f32> {
    let n = v
        .iter()
        .map(|x| f64::from(*x) * f64::from(*x))
        .sum::<f64>()
        .sqrt();
    if n > 0.0 {
        for x in &mut v {
            *x = (f64::from(*x) / n) as f32;
        }
    }
    v
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter()
        .zip(b)
        .map(|(x, y)| f64::from(*x) * f64::from(*y))
        .sum::<f64>() as f32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    format: String,
    version: u32,
    dim: usize,
    passages: Vec<Passage>,
    vectors: Vec<Vec<f32>>,
}

impl Index {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    pub fn passage(&self, id: &str) -> Option<&Passage> {
        self.passages.iter().find(|p| p.id == id)
    }

    /// Build from precomputed vectors (normalized on the way in).
    pub fn from_vectors(
        passages: Vec<Passage>,
        vectors: Vec<Vec<f32>>,
    ) -> Result<Index, RetrievalError> {
        let first = vectors.first().ok_or(RetrievalError::EmptyCorpus)?;
        let dim = first.len();
        if dim == 0 {
            return Err(RetrievalError::EmbeddingDimMismatch {
                expected: 1,
                got: 0,
            });
        }
        if passages.len() != vectors.len() {
            return Err(RetrievalError::Format(
                "passage and vector counts differ".into(),
            ));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(RetrievalError::EmbeddingDimMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(RetrievalError::NonFinite);
            }
        }
        Ok(Index {
            format: INDEX_FORMAT.into(),
            version: INDEX_VERSION,
            dim,
            passages,
            vectors: vectors.into_iter().map(l2_normalize).collect(),
        })
    }

    pub fn query_vector(&self, query: &[f32], k: usize) -> Result<Vec<SearchHit>, RetrievalError> {
        if query.len() != self.dim {
            return Err(RetrievalError::EmbeddingDimMismatch {
                expected: self.dim,
                got: query.len(),
            });
        }
        let q = l2_normalize(query.to_vec());
        let mut hits: Vec<SearchHit> = self
            .passages
            .iter()
            .zip(&self.vectors)
            .map(|(p, v)| SearchHit {
                id: p.id.clone(),
                score: dot(&q, v),
            })
            .collect();
        hits.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.id.cmp(&b.id))
        });
        hits.truncate(k);
        Ok(hits)
    }

    pub fn save(&self, path: &Path) -> Result<(), RetrievalError> {
        let json =
            serde_json::to_string(self).map_err(|e| RetrievalError::Format(e.to_string()))?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Index, RetrievalError> {
        let text = fs::read_to_string(path)?;
        let index: Index =
            serde_json::from_str(&text).map_err(|e| RetrievalError::Format(e.to_string()))?;
        if index.format != INDEX_FORMAT || index.version != INDEX_VERSION {
            return Err(RetrievalError::Format(format!(
                "unsupported index {} v{}",
                index.format, index.version
            )));
        }
        if index.passages.len() != index.vectors.len()
            || index.vectors.iter().any(|v| v.len() != index.dim)
        {
            return Err(RetrievalError::Format("inconsistent index contents".into()));
        }
        Ok(index)
    }
}

pub fn build_index(
    passages: Vec<Passage>,
    provider: &dyn EmbeddingProvider,
) -> Result<Index, RetrievalError> {
    if passages.is_empty() {
        return Err(RetrievalError::EmptyCorpus);
    }
    let mut vectors = Vec::with_capacity(passages.len());
    for chunk in passages.chunks(64) {
        let texts: Vec<String> = chunk.iter().map(|p| p.text.clone()).collect();
        vectors.extend(embed(provider, &texts)?);
    }
    Index::from_vectors(passages, vectors)
}

pub fn query_top_k(
    index: &Index,
    provider: &dyn EmbeddingProvider,
    query: &str,
    k: usize,
) -> Result<Vec<SearchHit>, RetrievalError> {
    let v = embed(provider, &[query.to_string()])?;
    index.query_vector(&v[0], k)
}

/// Split a document at blank lines; paragraphs longer than the cap are cut
/// at the last whitespace before it.
pub fn chunk_text(text: &str, cap: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut para = String::new();
    let flush = |para: &mut String, out: &mut Vec<String>| {
        let mut rest = para.trim();
        while rest.chars().count() > cap {
            let cut_byte = rest.char_indices().nth(cap).map_or(rest.len(), |(i, _)| i);
            let cut = rest[..cut_byte]
                .rfind(char::is_whitespace)
                .filter(|c| *c > 0)
                .unwrap_or(cut_byte);
            out.push(rest[..cut].trim().to_string());
            rest = rest[cut..].trim_start();
        }
        if !rest.is_empty() {
            out.push(rest.to_string());
        }
        para.clear();
    };
    for line in text.lines() {
        if line.trim().is_empty() {
            flush(&mut para, &mut out);
        } else {
            if !para.is_empty() {
                para.push('\n');
            }
            para.push_str(line);
        }
    }
    flush(&mut para, &mut out);
    out
}

/// Collect `.txt` and `.md` files under `dir` (sorted) into passages with ids `<relpath>#<n>`.
pub fn ingest_dir(dir: &Path) -> Result<Vec<Passage>, RetrievalError> {
    let mut files: Vec<_> = WalkDir::new(dir)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .filter(|e| {
            matches!(
                e.path().extension().and_then(|x| x.to_str()),
                Some("txt" | "md")
            )
        })
        .map(|e| e.into_path())
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let rel = f
            .strip_prefix(dir)
            .unwrap_or(&f)
            .to_string_lossy()
            .replace('\\', "/");
        let text = fs::read_to_string(&f)?;
        for (i, chunk) in chunk_text(&text, CHUNK_CAP).into_iter().enumerate() {
            out.push(Passage {
                id: format!("{rel}#{}", i + 1),
                text: chunk,
                source: Some(rel.clone()),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunking_respects_blank_lines_and_cap() {
        let chunks = chunk_text("a b\nc\n\n\nd", 1500);
        assert_eq!(chunks, vec!["a b\nc".to_string(), "d".to_string()]);
        let long = "كلمة ".repeat(400);
        let chunks = chunk_text(&long, 1500);
        assert!(chunks.len() >= 2);
        assert!(chunks.iter().all(|c| c.chars().count() <= 1500));
    }

    #[test]
    fn hashed_embedder_is_deterministic() {
        let e = HashedBowEmbedder::default();
        assert_eq!(e.embed_one("الأخ الشقيق"), e.embed_one("الأخ الشقيق"));
        assert_eq!(e.embed_one("x").len(), DEFAULT_DIM);
    }
}
