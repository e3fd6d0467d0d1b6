//! Config file layout and layering. Each setting resolves as
//! command-line flag, then `QIAS_*` environment variable (both handled by
//! clap), then the TOML file given with `--config`, then the built-in default.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qias_core::arabic::{CueMatch, NormMode};
use qias_core::eval::{AbstainPolicy, ErrorCategory, ScoringMode, TextPolicy};
use qias_core::forge::LevelMix;
use qias_core::gateway::{DecodeConfig, ExtractionPolicy};
use qias_core::http::RetryPolicy;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub eval: EvalSection,
    pub model: ModelSection,
    pub embedding: EmbeddingSection,
    pub generate: GenerateSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub predictor: Option<Predictor>,
    pub index: Option<PathBuf>,
    pub k: Option<usize>,
    pub temperature: Option<f64>,
    pub max_new_tokens: Option<u32>,
    pub max_input_tokens: Option<usize>,
    pub greedy: Option<bool>,
    pub policy: Option<ExtractionPolicy>,
    pub scoring: Option<ScoringMode>,
    pub abstain: Option<AbstainPolicy>,
    pub precedence: Option<Vec<ErrorCategory>>,
    pub group_mode: Option<NormMode>,
    pub negation: Option<CueMatch>,
    pub jobs: Option<usize>,
    pub baselines: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub url: Option<String>,
    pub name: Option<String>,
    pub api_key_env: Option<String>,
    pub timeout_ms: Option<u64>,
    pub attempts: Option<u32>,
    pub backoff_ms: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub provider: Option<EmbedderKind>,
    pub url: Option<String>,
    pub dim: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub n_items: Option<usize>,
    pub blocked_ratio: Option<f64>,
    pub negation_ratio: Option<f64>,
    pub near_dup_inject_ratio: Option<f64>,
    pub level_mix: Option<LevelMix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    Llm,
    Solver,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    Hashed,
    Http,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Effective settings of an evaluation run. Everything here except paths and
/// concurrency feeds the config hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub predictor: Predictor,
    pub k: usize,
    pub decode: DecodeConfig,
    pub policy: ExtractionPolicy,
    pub scoring: ScoringMode,
    pub abstain: AbstainPolicy,
    pub precedence: Vec<ErrorCategory>,
    pub text: TextPolicy,
    pub model: Option<String>,
    pub embedder: Option<EmbedderKind>,
    #[serde(skip)]
    pub model_url: Option<String>,
    #[serde(skip)]
    pub api_key_env: String,
    #[serde(skip)]
    pub retry: RetryPolicy,
    #[serde(skip)]
    pub index: Option<PathBuf>,
    #[serde(skip)]
    pub embed_url: Option<String>,
    #[serde(skip)]
    pub jobs: usize,
}

/// First 16 hex digits of SHA-256 over the canonical JSON of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(&json))[..16].to_string()
}

pub fn parse_precedence(s: &str) -> Result<Vec<ErrorCategory>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let c = match part.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "neardup" | "nearduplicate" => ErrorCategory::NearDuplicate,
            "blocked" => ErrorCategory::Blocked,
            "negation" => ErrorCategory::Negation,
            "other" => ErrorCategory::Other,
            _ => bail!("unknown error category `{part}`"),
        };
        if out.contains(&c) {
            bail!("category `{part}` listed twice");
        }
        out.push(c);
    }
    if !out.contains(&ErrorCategory::Other) {
        out.push(ErrorCategory::Other);
    }
    Ok(out)
}

/// Accepts `first|last|majority`, `strict|equivalence`, and the like by
/// going through the serde names of the core enums.
pub fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
        .map_err(|_| format!("unrecognized value `{s}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_lists() {
        assert_eq!(
            parse_precedence("blocked, near-dup").unwrap(),
            vec![
                ErrorCategory::Blocked,
                ErrorCategory::NearDuplicate,
                ErrorCategory::Other
            ]
        );
        assert!(parse_precedence("blocked,blocked").is_err());
        assert!(parse_precedence("typo").is_err());
    }

    #[test]
    fn enum_names() {
        assert_eq!(
            parse_enum::<ScoringMode>("Equivalence"),
            Ok(ScoringMode::Equivalence)
        );
        assert_eq!(
            parse_enum::<ExtractionPolicy>("majority"),
            Ok(ExtractionPolicy::Majority)
        );
        assert_eq!(parse_enum::<NormMode>("standard"), Ok(NormMode::Standard));
        assert!(parse_enum::<AbstainPolicy>("maybe").is_err());
    }

    #[test]
    fn file_sections_parse() {
        let cfg: FileConfig = toml::from_str(
            r#"
            seed = 7
            [eval]
            predictor = "hybrid"
            k = 3
            scoring = "equivalence"
            precedence = ["Blocked", "NearDuplicate", "Negation", "Other"]
            [generate]
            level_mix = "beginner-only"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.eval.predictor, Some(Predictor::Hybrid));
        assert_eq!(cfg.generate.level_mix, Some(LevelMix::BeginnerOnly));
        assert!(toml::from_str::<FileConfig>("[eval]\nbogus = 1").is_err());
    }
}
