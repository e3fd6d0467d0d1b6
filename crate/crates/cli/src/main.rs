mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use qias_core::arabic::{CueMatch, NormMode};
use qias_core::eval::{
    audit_distribution, build_report, format_percent, read_baselines, read_predictions,
    render_report, score_with, write_predictions, AbstainPolicy, AuditRow, ErrorCategory,
    EvalReport, ReportFormat, RunMeta, ScoringMode, TextPolicy,
};
use qias_core::forge::{generate_corpus, GenSpec, LevelMix};
use qias_core::gateway::{
    export_sft_records, predict_hybrid, predict_llm_many, predict_solver, DecodeConfig,
    ExtractionPolicy, HttpChatClient, LlmConfig, Prediction, Retriever, TrainingConfig,
};
use qias_core::http::RetryPolicy;
use qias_core::mcq::{
    parse_heir_token, parse_option, parse_question, read_dataset, write_dataset, DatasetFormat,
    McqItem, Target,
};
use qias_core::retrieval::{
    build_index, ingest_dir, query_top_k, EmbeddingProvider, HashedBowEmbedder, HttpEmbedder,
    Index, DEFAULT_DIM,
};
use qias_core::rules::rule_table_markdown;
use qias_core::{normalize_case, solve, CaseInput, HeirClass, HeirParty, SolveResult, VerdictKind};

use config::{
    config_hash, parse_enum, parse_precedence, EmbedderKind, FileConfig, Predictor, RunConfig,
};

/// Inheritance MCQ toolkit: exact faraid solver, dataset tools, retrieval and evaluation.
///
/// Settings resolve in this order: command-line flag, QIAS_* environment
/// variable, the TOML file passed with --config, built-in default.
#[derive(Parser)]
#[command(name = "qias", version)]
struct Cli {
    /// Random seed for commands that sample [default: 42]
    #[arg(long, global = true, env = "QIAS_SEED")]
    seed: Option<u64>,
    /// TOML config file with [eval], [model], [embedding] and [generate] sections
    #[arg(long, global = true, env = "QIAS_CONFIG")]
    config: Option<PathBuf>,
    /// Log filter (error, warn, info, debug) [default: warn]
    #[arg(long, global = true, env = "QIAS_LOG")]
    log: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case and print the share table with the rule trace
    Solve(SolveArgs),
    /// Parse a question, an option, or check every item of a dataset
    Parse(ParseArgs),
    /// Build a flat vector index from a directory of text files
    Index(IndexArgs),
    /// Query an index
    Query(QueryArgs),
    /// Predict answers for a dataset and write predictions plus reports
    Eval(EvalArgs),
    /// Generate a synthetic dataset with solver-computed gold answers
    Generate(GenerateArgs),
    /// Score an existing predictions file and render a report
    Report(ReportArgs),
    /// Blocked-gold share per dataset split
    Audit(AuditArgs),
    /// Export supervised fine-tuning records (system, user, assistant turns)
    ExportSft(ExportSftArgs),
    /// Print the rule table
    Rules(RulesArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// JSON file holding a list of {"class": id, "count": n}
    #[arg(long, conflicts_with_all = ["heirs", "arabic"])]
    case: Option<PathBuf>,
    /// Heirs as id[:count], e.g. --heirs husband --heirs full_sister:2
    #[arg(long, value_delimiter = ',')]
    heirs: Vec<String>,
    /// Arabic scenario or full question text
    #[arg(long, conflicts_with = "heirs")]
    arabic: Option<String>,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ParseArgs {
    /// Question text
    #[arg(long, conflicts_with_all = ["option", "dataset"])]
    question: Option<String>,
    /// Option text
    #[arg(long, conflicts_with = "dataset")]
    option: Option<String>,
    /// Dataset file (.jsonl or .csv); reports parse and solver agreement
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct EmbedderArgs {
    /// Embedding provider [default: hashed]
    #[arg(long, value_enum, env = "QIAS_EMBEDDER")]
    embedder: Option<EmbedderKind>,
    /// Embedding service URL for --embedder http
    #[arg(long, env = "QIAS_EMBED_URL")]
    embed_url: Option<String>,
    /// Dimension of the hashed embedder [default: 384]
    #[arg(long, env = "QIAS_EMBED_DIM")]
    dim: Option<usize>,
}

#[derive(Args)]
struct IndexArgs {
    /// Directory of .txt/.md files
    #[arg(long)]
    corpus: PathBuf,
    /// Output index file
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    embed: EmbedderArgs,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    /// Query text
    #[arg(long)]
    text: String,
    /// Number of passages [default: 5]
    #[arg(short, long, env = "QIAS_K")]
    k: Option<usize>,
    #[command(flatten)]
    embed: EmbedderArgs,
}

#[derive(Args)]
struct ScoringArgs {
    /// strict or equivalence (near-duplicate options count as the same answer) [default: strict]
    #[arg(long, env = "QIAS_SCORING", value_parser = parse_enum::<ScoringMode>)]
    scoring: Option<ScoringMode>,
    /// incorrect or exclude [default: incorrect]
    #[arg(long, env = "QIAS_ABSTAIN", value_parser = parse_enum::<AbstainPolicy>)]
    abstain: Option<AbstainPolicy>,
    /// Error category precedence, comma separated [default: near-dup,blocked,negation,other]
    #[arg(long, env = "QIAS_PRECEDENCE")]
    precedence: Option<String>,
    /// Normalization for near-duplicate grouping: standard or dedup [default: dedup]
    #[arg(long, env = "QIAS_GROUP_MODE", value_parser = parse_enum::<NormMode>)]
    group_mode: Option<NormMode>,
    /// Negation cue matching: token or substring [default: token]
    #[arg(long, env = "QIAS_NEGATION", value_parser = parse_enum::<CueMatch>)]
    negation: Option<CueMatch>,
    /// Baseline accuracies CSV (model,overall,beginner,advanced)
    #[arg(long, env = "QIAS_BASELINES")]
    baselines: Option<PathBuf>,
    /// Extra split for the blocked-gold audit, as name=path (repeatable)
    #[arg(long = "audit-split")]
    audit_split: Vec<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset file (.jsonl or .csv)
    #[arg(long)]
    dataset: PathBuf,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Answer source [default: llm]
    #[arg(long, value_enum, env = "QIAS_PREDICTOR")]
    predictor: Option<Predictor>,
    /// Index file for retrieval; without it prompts carry no passages
    #[arg(long, env = "QIAS_INDEX")]
    index: Option<PathBuf>,
    /// Passages retrieved per question [default: 5]
    #[arg(short, long, env = "QIAS_K")]
    k: Option<usize>,
    /// Sampling temperature [default: 0.05]
    #[arg(long, env = "QIAS_TEMPERATURE")]
    temperature: Option<f64>,
    /// Maximum generated tokens [default: 15]
    #[arg(long, env = "QIAS_MAX_NEW_TOKENS")]
    max_new_tokens: Option<u32>,
    /// Prompt token budget; lowest-scoring passages are dropped to fit [default: 10000]
    #[arg(long, env = "QIAS_MAX_INPUT_TOKENS")]
    max_input_tokens: Option<usize>,
    /// Greedy decoding [default: true]
    #[arg(long, env = "QIAS_GREEDY")]
    greedy: Option<bool>,
    /// Answer letter extraction: first, last or majority [default: first]
    #[arg(long, env = "QIAS_POLICY", value_parser = parse_enum::<ExtractionPolicy>)]
    policy: Option<ExtractionPolicy>,
    /// Chat endpoint URL (llm and hybrid predictors)
    #[arg(long, env = "QIAS_MODEL_URL")]
    model_url: Option<String>,
    /// Model name sent with each request [default: default]
    #[arg(long, env = "QIAS_MODEL")]
    model: Option<String>,
    /// Environment variable holding the API key [default: QIAS_API_KEY]
    #[arg(long)]
    api_key_env: Option<String>,
    /// Maximum concurrent model requests [default: 4]
    #[arg(long, env = "QIAS_JOBS")]
    jobs: Option<usize>,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    embed: EmbedderArgs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Output dataset (.jsonl or .csv)
    #[arg(long)]
    out: PathBuf,
    /// Number of items [default: 1000]
    #[arg(long, env = "QIAS_N_ITEMS")]
    n: Option<usize>,
    /// Share of items whose gold answer is a blocked heir [default: 0.299]
    #[arg(long, env = "QIAS_BLOCKED_RATIO")]
    blocked_ratio: Option<f64>,
    /// Share of items carrying a negation cue [default: 0]
    #[arg(long, env = "QIAS_NEGATION_RATIO")]
    negation_ratio: Option<f64>,
    /// Share of items with a misspelled copy of the gold option [default: 0]
    #[arg(long, env = "QIAS_NEAR_DUP_RATIO")]
    near_dup_ratio: Option<f64>,
    /// beginner-only, advanced-only or mixed [default: mixed]
    #[arg(long, env = "QIAS_LEVEL_MIX", value_parser = parse_enum::<LevelMix>)]
    level_mix: Option<LevelMix>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Predictions CSV (id,prediction)
    #[arg(long)]
    predictions: PathBuf,
    /// Name shown for this run [default: predictions]
    #[arg(long)]
    name: Option<String>,
    /// md, csv or json [default: md]
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Args)]
struct AuditArgs {
    /// Split as name=path (repeatable)
    #[arg(long = "split", required = true)]
    splits: Vec<String>,
}

#[derive(Args)]
struct ExportSftArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Output .jsonl; the training configuration goes to <stem>.config.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RulesArgs {
    /// Write to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = cli.log.clone().unwrap_or_else(|| "warn".into());
    env_logger::Builder::new()
        .parse_filters(&filter)
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let causes: Vec<String> = e.chain().skip(1).map(|c| c.to_string()).collect();
            let msg = json!({ "error": e.to_string(), "causes": causes });
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = cli.seed.or(file.seed).unwrap_or(42);
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Parse(a) => cmd_parse(a),
        Command::Index(a) => cmd_index(a, &file),
        Command::Query(a) => cmd_query(a, &file),
        Command::Eval(a) => cmd_eval(a, &file),
        Command::Generate(a) => cmd_generate(a, &file, seed),
        Command::Report(a) => cmd_report(a, &file),
        Command::Audit(a) => cmd_audit(a),
        Command::ExportSft(a) => cmd_export_sft(a),
        Command::Rules(a) => write_or_print(a.out.as_deref(), &rule_table_markdown()),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_items(path: &Path) -> Result<Vec<McqItem>> {
    read_dataset(path, DatasetFormat::from_path(path))
        .with_context(|| format!("reading dataset {}", path.display()))
}

fn parse_heir_arg(s: &str) -> Result<HeirParty> {
    let (id, count) = match s.split_once(':') {
        Some((id, n)) => (
            id,
            n.trim()
                .parse::<u32>()
                .with_context(|| format!("bad count in `{s}`"))?,
        ),
        None => (s, 1),
    };
    let class: HeirClass = id.trim().parse().map_err(|e| anyhow!("{e}"))?;
    Ok(HeirParty::new(class, count))
}

fn case_from_arabic(text: &str) -> Result<(CaseInput, Option<HeirClass>)> {
    if let Ok(q) = parse_question(text) {
        let target = match q.target {
            Target::Single(t) => Some(t),
            Target::AllParties => None,
        };
        return Ok((q.case, target));
    }
    let body = text
        .trim()
        .trim_start_matches(qias_core::mcq::QUESTION_HEAD)
        .trim();
    let parties = body
        .split(" و ")
        .map(|t| parse_heir_token(t.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((normalize_case(parties)?, None))
}

fn verdict_text(v: &VerdictKind) -> String {
    match v {
        VerdictKind::FixedShare(f) => format!("fixed {f}"),
        VerdictKind::Residuary => "residuary".into(),
        VerdictKind::FixedPlusResiduary(f) => format!("fixed {f} + residue"),
        VerdictKind::Blocked => "blocked".into(),
        VerdictKind::Nothing => "nothing left".into(),
    }
}

fn render_solution(r: &SolveResult, target: Option<HeirClass>) -> String {
    let mut rows = vec![[
        "heir".to_string(),
        "count".into(),
        "verdict".into(),
        "label".into(),
        "share".into(),
        "per head".into(),
        "note".into(),
    ]];
    for a in &r.allocations {
        let mut heir = format!("{} ({})", a.party.class, a.party.class.arabic());
        if Some(a.party.class) == target {
            heir.push_str(" *");
        }
        rows.push([
            heir,
            a.party.count.to_string(),
            verdict_text(&a.verdict),
            a.label.arabic().to_string(),
            a.group_share.to_string(),
            a.per_head_share.to_string(),
            a.blocking_reason
                .map(|r| format!("blocked by rule {r}"))
                .unwrap_or_default(),
        ]);
    }
    let widths: Vec<usize> = (0..7)
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    s.push_str(&format!(
        "\nbase denominator: {}\nawl applied: {}\nradd applied: {}\ntrace: {}\n",
        r.base_denominator,
        if r.awl_applied { "yes" } else { "no" },
        if r.radd_applied { "yes" } else { "no" },
        r.trace
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    ));
    s
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let (case, target) = if let Some(path) = &a.case {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let case: CaseInput = serde_json::from_str(&text)
            .with_context(|| format!("parsing case {}", path.display()))?;
        (case, None)
    } else if let Some(text) = &a.arabic {
        case_from_arabic(text)?
    } else if !a.heirs.is_empty() {
        let parties = a
            .heirs
            .iter()
            .map(|h| parse_heir_arg(h))
            .collect::<Result<Vec<_>>>()?;
        (normalize_case(parties)?, None)
    } else {
        bail!("give one of --case, --heirs or --arabic");
    };
    let result = solve(&case)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        print!("{}", render_solution(&result, target));
    }
    Ok(())
}

fn cmd_parse(a: ParseArgs) -> Result<()> {
    if let Some(q) = &a.question {
        let p = parse_question(q)?;
        let target = match p.target {
            Target::Single(t) => json!(t),
            Target::AllParties => json!("all"),
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "case": p.case, "target": target }))?
        );
    } else if let Some(o) = &a.option {
        let parsed = parse_option(o)?;
        println!("{parsed:?}");
    } else if let Some(path) = &a.dataset {
        let items = load_items(path)?;
        let mut parsed = 0;
        let mut agree = 0;
        for it in &items {
            match parse_question(&it.question) {
                Ok(_) => parsed += 1,
                Err(e) => log::info!("{}: {e}", it.id),
            }
            if predict_solver(it).letter == Some(it.gold) {
                agree += 1;
            }
        }
        println!(
            "items: {}\nquestions parsed: {parsed}\nsolver matches gold: {agree}",
            items.len()
        );
    } else {
        bail!("give one of --question, --option or --dataset");
    }
    Ok(())
}

fn embedder(
    args: &EmbedderArgs,
    file: &FileConfig,
    index_dim: Option<usize>,
) -> Result<Box<dyn EmbeddingProvider>> {
    let kind = args
        .embedder
        .or(file.embedding.provider)
        .unwrap_or(EmbedderKind::Hashed);
    Ok(match kind {
        EmbedderKind::Hashed => {
            let dim = index_dim
                .or(args.dim)
                .or(file.embedding.dim)
                .unwrap_or(DEFAULT_DIM);
            Box::new(HashedBowEmbedder { dim })
        }
        EmbedderKind::Http => {
            let url = args
                .embed_url
                .clone()
                .or_else(|| file.embedding.url.clone())
                .ok_or_else(|| anyhow!("--embed-url is required with --embedder http"))?;
            Box::new(HttpEmbedder::new(url))
        }
    })
}

fn cmd_index(a: IndexArgs, file: &FileConfig) -> Result<()> {
    let passages = ingest_dir(&a.corpus)?;
    let provider = embedder(&a.embed, file, None)?;
    let index = build_index(passages, provider.as_ref())?;
    index.save(&a.out)?;
    println!(
        "indexed {} passages (dim {}) into {}",
        index.len(),
        index.dim(),
        a.out.display()
    );
    Ok(())
}

fn cmd_query(a: QueryArgs, file: &FileConfig) -> Result<()> {
    let index = Index::load(&a.index)?;
    let provider = embedder(&a.embed, file, Some(index.dim()))?;
    let k =
        a.k.or(file.eval.k)
            .unwrap_or(qias_core::retrieval::DEFAULT_K);
    for (rank, hit) in query_top_k(&index, provider.as_ref(), &a.text, k)?
        .iter()
        .enumerate()
    {
        let text = index
            .passage(&hit.id)
            .map(|p| p.text.as_str())
            .unwrap_or("");
        let snippet: String = text.chars().take(80).collect::<String>().replace('\n', " ");
        println!("{}\t{}\t{:.4}\t{snippet}", rank + 1, hit.id, hit.score);
    }
    Ok(())
}

fn text_policy(s: &ScoringArgs, file: &FileConfig) -> TextPolicy {
    let d = TextPolicy::default();
    TextPolicy {
        group_mode: s
            .group_mode
            .or(file.eval.group_mode)
            .unwrap_or(d.group_mode),
        negation: s.negation.or(file.eval.negation).unwrap_or(d.negation),
    }
}

fn precedence(s: &ScoringArgs, file: &FileConfig) -> Result<Vec<ErrorCategory>> {
    match (&s.precedence, &file.eval.precedence) {
        (Some(p), _) => parse_precedence(p),
        (None, Some(p)) => parse_precedence(
            &p.iter()
                .map(|c| format!("{c:?}"))
                .collect::<Vec<_>>()
                .join(","),
        ),
        (None, None) => Ok(ErrorCategory::DEFAULT_PRECEDENCE.to_vec()),
    }
}

fn audit_splits(extra: &[String], base: Option<(&str, &[McqItem])>) -> Result<Vec<AuditRow>> {
    let mut splits: Vec<(String, Vec<McqItem>)> = Vec::new();
    if let Some((name, items)) = base {
        splits.push((name.to_string(), items.to_vec()));
    }
    for s in extra {
        let (name, path) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("split `{s}` is not name=path"))?;
        splits.push((name.to_string(), load_items(Path::new(path))?));
    }
    Ok(audit_distribution(&splits))
}

fn resolve_run_config(a: &EvalArgs, file: &FileConfig) -> Result<RunConfig> {
    let e = &file.eval;
    let m = &file.model;
    let dd = DecodeConfig::default();
    let dr = RetryPolicy::default();
    let predictor = a.predictor.or(e.predictor).unwrap_or(Predictor::Llm);
    let uses_model = predictor != Predictor::Solver;
    let index = a.index.clone().or_else(|| e.index.clone());
    Ok(RunConfig {
        predictor,
        k: a.k.or(e.k).unwrap_or(qias_core::retrieval::DEFAULT_K),
        decode: DecodeConfig {
            temperature: a.temperature.or(e.temperature).unwrap_or(dd.temperature),
            max_new_tokens: a
                .max_new_tokens
                .or(e.max_new_tokens)
                .unwrap_or(dd.max_new_tokens),
            greedy: a.greedy.or(e.greedy).unwrap_or(dd.greedy),
            max_input_tokens: a
                .max_input_tokens
                .or(e.max_input_tokens)
                .unwrap_or(dd.max_input_tokens),
        },
        policy: a.policy.or(e.policy).unwrap_or_default(),
        scoring: a.scoring.scoring.or(e.scoring).unwrap_or_default(),
        abstain: a.scoring.abstain.or(e.abstain).unwrap_or_default(),
        precedence: precedence(&a.scoring, file)?,
        text: text_policy(&a.scoring, file),
        model: uses_model.then(|| {
            a.model
                .clone()
                .or_else(|| m.name.clone())
                .unwrap_or_else(|| "default".into())
        }),
        embedder: (uses_model && index.is_some()).then(|| {
            a.embed
                .embedder
                .or(file.embedding.provider)
                .unwrap_or(EmbedderKind::Hashed)
        }),
        model_url: a.model_url.clone().or_else(|| m.url.clone()),
        api_key_env: a
            .api_key_env
            .clone()
            .or_else(|| m.api_key_env.clone())
            .unwrap_or_else(|| "QIAS_API_KEY".into()),
        retry: RetryPolicy {
            attempts: m.attempts.unwrap_or(dr.attempts),
            backoff_ms: m.backoff_ms.unwrap_or(dr.backoff_ms),
            timeout_ms: m.timeout_ms.unwrap_or(dr.timeout_ms),
        },
        index,
        embed_url: a
            .embed
            .embed_url
            .clone()
            .or_else(|| file.embedding.url.clone()),
        jobs: a.jobs.or(e.jobs).unwrap_or(4).max(1),
    })
}

#[derive(Serialize)]
struct OutputLine<'a> {
    id: &'a str,
    letter: Option<char>,
    raw_output: &'a str,
    used_passage_ids: &'a [String],
    overridden: bool,
}

fn write_reports(report: &EvalReport, out: &Path) -> Result<()> {
    for f in [
        ReportFormat::Markdown,
        ReportFormat::Json,
        ReportFormat::Csv,
    ] {
        let path = out.join(format!("report.{}", f.extension()));
        fs::write(&path, render_report(report, f))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs, file: &FileConfig) -> Result<()> {
    let cfg = resolve_run_config(&a, file)?;
    let hash = config_hash(&cfg);
    let items = load_items(&a.dataset)?;
    log::info!(
        "evaluating {} items with {:?} (config {hash})",
        items.len(),
        cfg.predictor
    );

    let predictions: Vec<Prediction> = match cfg.predictor {
        Predictor::Solver => items.iter().map(predict_solver).collect(),
        Predictor::Llm | Predictor::Hybrid => {
            let url = cfg.model_url.clone().ok_or_else(|| {
                anyhow!(
                    "--model-url is required for the {} predictor",
                    format!("{:?}", cfg.predictor).to_lowercase()
                )
            })?;
            let client = HttpChatClient {
                retry: cfg.retry,
                ..HttpChatClient::new(url, cfg.model.clone().unwrap_or_default())
                    .with_api_key_env(&cfg.api_key_env)
            };
            let llm = LlmConfig {
                decode: cfg.decode,
                k: cfg.k,
                policy: cfg.policy,
            };
            let index = cfg.index.as_deref().map(Index::load).transpose()?;
            let provider = match &index {
                Some(ix) => Some(embedder(
                    &EmbedderArgs {
                        embedder: cfg.embedder,
                        embed_url: cfg.embed_url.clone(),
                        dim: None,
                    },
                    file,
                    Some(ix.dim()),
                )?),
                None => None,
            };
            let retriever = match (&index, &provider) {
                (Some(index), Some(p)) => Some(Retriever {
                    index,
                    provider: p.as_ref(),
                }),
                _ => None,
            };
            let preds = predict_llm_many(&items, retriever.as_ref(), &client, &llm, cfg.jobs)?;
            if cfg.predictor == Predictor::Hybrid {
                let by_id: BTreeMap<&str, &McqItem> =
                    items.iter().map(|i| (i.id.as_str(), i)).collect();
                preds
                    .iter()
                    .map(|p| predict_hybrid(by_id[p.item_id.as_str()], p))
                    .collect()
            } else {
                preds
            }
        }
    };

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let letters: BTreeMap<String, Option<char>> = predictions
        .iter()
        .map(|p| (p.item_id.clone(), p.letter))
        .collect();
    write_predictions(&a.out.join("predictions.csv"), &letters)?;

    let mut sorted: Vec<&Prediction> = predictions.iter().collect();
    sorted.sort_by(|x, y| x.item_id.cmp(&y.item_id));
    let mut outputs = fs::File::create(a.out.join("outputs.jsonl"))?;
    for p in sorted {
        let line = OutputLine {
            id: &p.item_id,
            letter: p.letter,
            raw_output: &p.raw_output,
            used_passage_ids: &p.used_passage_ids,
            overridden: p.overridden,
        };
        writeln!(outputs, "{}", serde_json::to_string(&line)?)?;
    }

    let records = score_with(&items, &letters, cfg.scoring, cfg.abstain, &cfg.text)?;
    let audit = audit_splits(&a.scoring.audit_split, Some(("eval", &items)))?;
    let baselines = match a
        .scoring
        .baselines
        .as_ref()
        .or(file.eval.baselines.as_ref())
    {
        Some(p) => read_baselines(p)?,
        None => Vec::new(),
    };
    let meta = RunMeta {
        predictor: format!("{:?}", cfg.predictor).to_lowercase(),
        config_hash: hash.clone(),
        scoring: cfg.scoring,
        abstain: cfg.abstain,
        precedence: cfg.precedence.clone(),
        text: cfg.text,
    };
    let report = build_report(meta, &records, &items, audit, baselines);
    write_reports(&report, &a.out)?;
    let run =
        json!({ "config_hash": hash, "config": cfg, "dataset": a.dataset, "items": items.len() });
    fs::write(
        a.out.join("run_config.json"),
        serde_json::to_string_pretty(&run)?,
    )?;

    let overrides = predictions.iter().filter(|p| p.overridden).count();
    println!(
        "accuracy {}% ({}/{}), config {hash}{}; results in {}",
        format_percent(report.overall.correct, report.overall.total, 1),
        report.overall.correct,
        report.overall.total,
        if overrides > 0 {
            format!(", {overrides} hybrid overrides")
        } else {
            String::new()
        },
        a.out.display()
    );
    Ok(())
}

fn cmd_generate(a: GenerateArgs, file: &FileConfig, seed: u64) -> Result<()> {
    let g = &file.generate;
    let d = GenSpec::default();
    let spec = GenSpec {
        n_items: a.n.or(g.n_items).unwrap_or(d.n_items),
        blocked_ratio: a
            .blocked_ratio
            .or(g.blocked_ratio)
            .unwrap_or(d.blocked_ratio),
        negation_ratio: a
            .negation_ratio
            .or(g.negation_ratio)
            .unwrap_or(d.negation_ratio),
        near_dup_inject_ratio: a
            .near_dup_ratio
            .or(g.near_dup_inject_ratio)
            .unwrap_or(d.near_dup_inject_ratio),
        seed,
        level_mix: a.level_mix.or(g.level_mix).unwrap_or(d.level_mix),
    };
    let items = generate_corpus(&spec)?;
    write_dataset(&items, &a.out, DatasetFormat::from_path(&a.out))?;
    println!(
        "wrote {} items to {} (seed {seed})",
        items.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_report(a: ReportArgs, file: &FileConfig) -> Result<()> {
    let items = load_items(&a.dataset)?;
    let letters = read_predictions(&a.predictions)?;
    let scoring = a.scoring.scoring.or(file.eval.scoring).unwrap_or_default();
    let abstain = a.scoring.abstain.or(file.eval.abstain).unwrap_or_default();
    let text = text_policy(&a.scoring, file);
    let precedence = precedence(&a.scoring, file)?;
    let hash = config_hash(
        &json!({ "scoring": scoring, "abstain": abstain, "precedence": precedence, "text": text }),
    );
    let records = score_with(&items, &letters, scoring, abstain, &text)?;
    let audit = audit_splits(&a.scoring.audit_split, Some(("eval", &items)))?;
    let baselines = match a
        .scoring
        .baselines
        .as_ref()
        .or(file.eval.baselines.as_ref())
    {
        Some(p) => read_baselines(p)?,
        None => Vec::new(),
    };
    let meta = RunMeta {
        predictor: a.name.unwrap_or_else(|| "predictions".into()),
        config_hash: hash,
        scoring,
        abstain,
        precedence,
        text,
    };
    let report = build_report(meta, &records, &items, audit, baselines);
    let format = match a.format.as_deref().unwrap_or("md") {
        "md" | "markdown" => ReportFormat::Markdown,
        "csv" => ReportFormat::Csv,
        "json" => ReportFormat::Json,
        other => bail!("unknown report format `{other}`"),
    };
    write_or_print(a.out.as_deref(), &render_report(&report, format))
}

fn cmd_audit(a: AuditArgs) -> Result<()> {
    println!("| Split | Blocked | Total | Share (%) |\n|---|---|---|---|");
    for r in audit_splits(&a.splits, None)? {
        println!(
            "| {} | {} | {} | {} |",
            r.split,
            r.blocked,
            r.total,
            format_percent(r.blocked, r.total, 2)
        );
    }
    Ok(())
}

fn cmd_export_sft(a: ExportSftArgs) -> Result<()> {
    let items = load_items(&a.dataset)?;
    let sidecar = export_sft_records(&items, &a.out, &TrainingConfig::default())?;
    println!(
        "wrote {} records to {} and {}",
        items.len(),
        a.out.display(),
        sidecar.display()
    );
    Ok(())
}
