//! Scoring, error taxonomy, subset accuracies, split audits and report rendering.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arabic::{
    detect_negation_with, is_blocked_answer, near_duplicate_groups_with, CueMatch, NormMode,
};
use crate::mcq::{Level, McqItem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("prediction for unknown item `{0}`")]
    UnknownItemId(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<csv::Error> for EvalError {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line() as usize);
        EvalError::Format {
            line,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoringMode {
    #[default]
    Strict,
    Equivalence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstainPolicy {
    /// Abstentions count as wrong answers.
    #[default]
    Incorrect,
    /// Abstentions are left out of every denominator.
    Exclude,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub item_id: String,
    pub gold: char,
    pub predicted: Option<char>,
    pub level: Level,
    pub correct: bool,
    pub equivalence_used: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCategory {
    NearDuplicate,
    Blocked,
    Negation,
    Other,
}

impl ErrorCategory {
    pub const DEFAULT_PRECEDENCE: [ErrorCategory; 4] = [
        ErrorCategory::NearDuplicate,
        ErrorCategory::Blocked,
        ErrorCategory::Negation,
        ErrorCategory::Other,
    ];

    /// Row order of the category table.
    pub const TABLE_ORDER: [ErrorCategory; 4] = [
        ErrorCategory::Blocked,
        ErrorCategory::Negation,
        ErrorCategory::NearDuplicate,
        ErrorCategory::Other,
    ];

    pub fn title(self) -> &'static str {
        match self {
            ErrorCategory::NearDuplicate => "Near-duplicate options",
            ErrorCategory::Blocked => "Blocked (محجوب)",
            ErrorCategory::Negation => "Negation-Exception",
            ErrorCategory::Other => "Other",
        }
    }
}

/// Gold option text announces a blocked heir.
pub fn blocked_gold(item: &McqItem) -> bool {
    is_blocked_answer(item.gold_text())
}

/// Text matching used by scoring and the error taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextPolicy {
    /// Normalization under which options count as near-duplicates.
    pub group_mode: NormMode,
    pub negation: CueMatch,
}

impl Default for TextPolicy {
    fn default() -> Self {
        TextPolicy {
            group_mode: NormMode::Dedup,
            negation: CueMatch::Token,
        }
    }
}

/// Question or gold option text carries a negation cue.
pub fn negation_cued(item: &McqItem) -> bool {
    negation_cued_with(item, &TextPolicy::default())
}

pub fn negation_cued_with(item: &McqItem, policy: &TextPolicy) -> bool {
    detect_negation_with(&item.question, policy.negation).found
        || detect_negation_with(item.gold_text(), policy.negation).found
}

fn same_group(item: &McqItem, a: char, b: char, policy: &TextPolicy) -> bool {
    near_duplicate_groups_with(&item.options, policy.group_mode)
        .iter()
        .any(|g| g.contains(&a) && g.contains(&b))
}

/// Score predictions (by item id) against gold. Items with no prediction count as abstentions.
pub fn score(
    items: &[McqItem],
    predictions: &BTreeMap<String, Option<char>>,
    mode: ScoringMode,
    abstain: AbstainPolicy,
) -> Result<Vec<EvalRecord>, EvalError> {
    score_with(items, predictions, mode, abstain, &TextPolicy::default())
}

pub fn score_with(
    items: &[McqItem],
    predictions: &BTreeMap<String, Option<char>>,
    mode: ScoringMode,
    abstain: AbstainPolicy,
    policy: &TextPolicy,
) -> Result<Vec<EvalRecord>, EvalError> {
    let known: HashMap<&str, ()> = items.iter().map(|i| (i.id.as_str(), ())).collect();
    if let Some(id) = predictions
        .keys()
        .find(|id| !known.contains_key(id.as_str()))
    {
        return Err(EvalError::UnknownItemId(id.clone()));
    }
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let predicted = predictions.get(&item.id).copied().flatten();
        if predicted.is_none() && abstain == AbstainPolicy::Exclude {
            continue;
        }
        let exact = predicted == Some(item.gold);
        let equivalent = !exact
            && mode == ScoringMode::Equivalence
            && predicted.is_some_and(|p| same_group(item, p, item.gold, policy));
        out.push(EvalRecord {
            item_id: item.id.clone(),
            gold: item.gold,
            predicted,
            level: item.level,
            correct: exact || equivalent,
            equivalence_used: equivalent,
        });
    }
    out.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    Ok(out)
}

pub type CategoryCounts = BTreeMap<ErrorCategory, BTreeMap<Level, usize>>;

pub fn categorize_error(
    record: &EvalRecord,
    item: &McqItem,
    precedence: &[ErrorCategory],
    policy: &TextPolicy,
) -> ErrorCategory {
    precedence
        .iter()
        .copied()
        .find(|c| match c {
            ErrorCategory::NearDuplicate => record
                .predicted
                .is_some_and(|p| same_group(item, p, item.gold, policy)),
            ErrorCategory::Blocked => blocked_gold(item),
            ErrorCategory::Negation => negation_cued_with(item, policy),
            ErrorCategory::Other => true,
        })
        .unwrap_or(ErrorCategory::Other)
}

pub fn categorize_errors(
    records: &[EvalRecord],
    items: &[McqItem],
    precedence: &[ErrorCategory],
) -> CategoryCounts {
    categorize_errors_with(records, items, precedence, &TextPolicy::default())
}

pub fn categorize_errors_with(
    records: &[EvalRecord],
    items: &[McqItem],
    precedence: &[ErrorCategory],
    policy: &TextPolicy,
) -> CategoryCounts {
    let by_id: HashMap<&str, &McqItem> = items.iter().map(|i| (i.id.as_str(), i)).collect();
    let mut counts: CategoryCounts = ErrorCategory::TABLE_ORDER
        .iter()
        .map(|c| (*c, Level::ALL.iter().map(|l| (*l, 0)).collect()))
        .collect();
    for r in records.iter().filter(|r| !r.correct) {
        let Some(item) = by_id.get(r.item_id.as_str()) else {
            continue;
        };
        let cat = categorize_error(r, item, precedence, policy);
        *counts.entry(cat).or_default().entry(r.level).or_default() += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conditional {
    /// `None` when the subset is empty.
    pub pct: Option<f64>,
    pub correct: usize,
    pub n: usize,
}

pub fn percent(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

/// `100 * num / den` rounded half-up to `places` decimals using integer
/// arithmetic, so 3491/20000 renders as 17.46. "n/a" when `den` is 0.
pub fn format_percent(num: usize, den: usize, places: usize) -> String {
    if den == 0 {
        return "n/a".to_string();
    }
    let scale = 10u128.pow(places as u32);
    let (num, den) = (num as u128, den as u128);
    let scaled = (200 * scale * num + den) / (2 * den);
    let (int, frac) = (scaled / scale, scaled % scale);
    if places == 0 {
        int.to_string()
    } else {
        format!("{int}.{frac:0places$}")
    }
}

pub fn conditional_accuracy<F: Fn(&McqItem) -> bool>(
    records: &[EvalRecord],
    items: &[McqItem],
    predicate: F,
) -> Conditional {
    let by_id: HashMap<&str, &McqItem> = items.iter().map(|i| (i.id.as_str(), i)).collect();
    let subset: Vec<&EvalRecord> = records
        .iter()
        .filter(|r| by_id.get(r.item_id.as_str()).is_some_and(|i| predicate(i)))
        .collect();
    let correct = subset.iter().filter(|r| r.correct).count();
    Conditional {
        pct: percent(correct, subset.len()),
        correct,
        n: subset.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub split: String,
    pub total: usize,
    pub blocked: usize,
    pub pct: Option<f64>,
}

pub fn audit_distribution(splits: &[(String, Vec<McqItem>)]) -> Vec<AuditRow> {
    splits
        .iter()
        .map(|(name, items)| {
            let blocked = items.iter().filter(|i| blocked_gold(i)).count();
            AuditRow {
                split: name.clone(),
                total: items.len(),
                blocked,
                pct: percent(blocked, items.len()),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub model: String,
    pub overall: Option<f64>,
    pub beginner: Option<f64>,
    pub advanced: Option<f64>,
    pub external: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub total: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: ErrorCategory,
    pub advanced: usize,
    pub beginner: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    pub subset: String,
    pub pct: Option<f64>,
    pub correct: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub predictor: String,
    pub config_hash: String,
    pub scoring: ScoringMode,
    pub abstain: AbstainPolicy,
    pub precedence: Vec<ErrorCategory>,
    #[serde(default)]
    pub text: TextPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub meta: RunMeta,
    pub overall: LevelCount,
    pub by_level: BTreeMap<Level, LevelCount>,
    pub accuracy: AccuracyRow,
    pub categories: Vec<CategoryRow>,
    pub conditional: Vec<ConditionalRow>,
    pub audit: Vec<AuditRow>,
    pub baselines: Vec<AccuracyRow>,
}

impl EvalReport {
    pub fn total_errors(&self) -> usize {
        self.overall.total - self.overall.correct
    }
}

type Predicate = Box<dyn Fn(&McqItem) -> bool>;

pub fn build_report(
    meta: RunMeta,
    records: &[EvalRecord],
    items: &[McqItem],
    audit: Vec<AuditRow>,
    baselines: Vec<AccuracyRow>,
) -> EvalReport {
    let count = |f: &dyn Fn(&EvalRecord) -> bool| {
        let sel: Vec<_> = records.iter().filter(|r| f(r)).collect();
        LevelCount {
            total: sel.len(),
            correct: sel.iter().filter(|r| r.correct).count(),
        }
    };
    let overall = count(&|_| true);
    let by_level: BTreeMap<Level, LevelCount> = Level::ALL
        .iter()
        .map(|l| (*l, count(&|r| r.level == *l)))
        .collect();
    let pct = |c: &LevelCount| percent(c.correct, c.total);
    let accuracy = AccuracyRow {
        model: meta.predictor.clone(),
        overall: pct(&overall),
        beginner: pct(&by_level[&Level::Beginner]),
        advanced: pct(&by_level[&Level::Advanced]),
        external: false,
    };
    let counts = categorize_errors_with(records, items, &meta.precedence, &meta.text);
    let categories = ErrorCategory::TABLE_ORDER
        .iter()
        .map(|c| {
            let row = &counts[c];
            let (a, b) = (row[&Level::Advanced], row[&Level::Beginner]);
            CategoryRow {
                category: *c,
                advanced: a,
                beginner: b,
                total: a + b,
            }
        })
        .collect();
    let mut conditional = Vec::new();
    let text = meta.text;
    let subsets: [(&str, Predicate); 4] = [
        ("blocked-gold", Box::new(blocked_gold)),
        ("not blocked-gold", Box::new(|i: &McqItem| !blocked_gold(i))),
        (
            "negation",
            Box::new(move |i: &McqItem| negation_cued_with(i, &text)),
        ),
        (
            "no negation",
            Box::new(move |i: &McqItem| !negation_cued_with(i, &text)),
        ),
    ];
    for (name, f) in subsets {
        let c = conditional_accuracy(records, items, f);
        conditional.push(ConditionalRow {
            subset: name.to_string(),
            pct: c.pct,
            correct: c.correct,
            n: c.n,
        });
    }
    EvalReport {
        meta,
        overall,
        by_level,
        accuracy,
        categories,
        conditional,
        audit,
        baselines,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

fn fmt_pct(p: Option<f64>, places: usize) -> String {
    p.map_or_else(|| "n/a".to_string(), |v| format!("{v:.places$}"))
}

/// Overall/Beginner/Advanced cells; the run's own row is rendered from counts.
fn accuracy_cells(report: &EvalReport, r: &AccuracyRow) -> [String; 3] {
    if r.external {
        return [
            fmt_pct(r.overall, 1),
            fmt_pct(r.beginner, 1),
            fmt_pct(r.advanced, 1),
        ];
    }
    let c = |lc: Option<&LevelCount>| {
        lc.map_or("n/a".to_string(), |lc| {
            format_percent(lc.correct, lc.total, 1)
        })
    };
    [
        c(Some(&report.overall)),
        c(report.by_level.get(&Level::Beginner)),
        c(report.by_level.get(&Level::Advanced)),
    ]
}

fn accuracy_rows(report: &EvalReport) -> Vec<&AccuracyRow> {
    let mut rows: Vec<&AccuracyRow> = report.baselines.iter().collect();
    if report.overall.total > 0 {
        rows.push(&report.accuracy);
    }
    // stable: ties keep baseline-file order, own run after them
    rows.sort_by(|a, b| {
        b.overall
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&a.overall.unwrap_or(f64::NEG_INFINITY))
    });
    rows
}

pub fn render_markdown(report: &EvalReport) -> String {
    let mut s = String::new();
    s.push_str("## Accuracy (%)\n\n| Model | Overall | Beginner | Advanced |\n|---|---|---|---|\n");
    for r in accuracy_rows(report) {
        let name = if r.external {
            format!("{} (external)", r.model)
        } else {
            format!("**{}**", r.model)
        };
        let [o, b, a] = accuracy_cells(report, r);
        let _ = writeln!(s, "| {name} | {o} | {b} | {a} |");
    }
    s.push_str("\n## Misclassifications by category\n\n| Category | Advanced | Beginner | Total |\n|---|---|---|---|\n");
    if report.overall.total > 0 {
        for r in &report.categories {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} |",
                r.category.title(),
                r.advanced,
                r.beginner,
                r.total
            );
        }
        let (a, b): (usize, usize) = report
            .categories
            .iter()
            .fold((0, 0), |acc, r| (acc.0 + r.advanced, acc.1 + r.beginner));
        let _ = writeln!(s, "| **All errors** | {a} | {b} | {} |", a + b);
    }
    s.push_str("\n## Subset accuracy\n\n| Subset | Accuracy (%) | n |\n|---|---|---|\n");
    if report.overall.total > 0 {
        for r in &report.conditional {
            let _ = writeln!(
                s,
                "| {} | {} | {} |",
                r.subset,
                format_percent(r.correct, r.n, 1),
                r.n
            );
        }
    }
    s.push_str("\n## Blocked-gold distribution\n\n| Split | Blocked | Total | Share (%) |\n|---|---|---|---|\n");
    for r in &report.audit {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} |",
            r.split,
            r.blocked,
            r.total,
            format_percent(r.blocked, r.total, 2)
        );
    }
    let m = &report.meta;
    let _ = write!(
        s,
        "\n## Run\n\n- predictor: {}\n- config hash: {}\n- scoring: {:?}\n- abstentions: {:?}\n- category precedence: {}\n- option grouping: {:?}\n- negation matching: {:?}\n",
        m.predictor,
        m.config_hash,
        m.scoring,
        m.abstain,
        m.precedence.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(" > "),
        m.text.group_mode,
        m.text.negation
    );
    s
}

/// Long format: `metric,group,level,value`.
pub fn render_csv(report: &EvalReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |a: &str, b: &str, c: &str, d: String| {
        w.write_record([a, b, c, d.as_str()])
            .expect("writing to memory");
    };
    row("metric", "group", "level", "value".into());
    for r in accuracy_rows(report) {
        let group = if r.external {
            format!("{} (external)", r.model)
        } else {
            r.model.clone()
        };
        let [o, b, a] = accuracy_cells(report, r);
        row("accuracy", &group, "Overall", o);
        row("accuracy", &group, "Beginner", b);
        row("accuracy", &group, "Advanced", a);
    }
    if report.overall.total > 0 {
        for r in &report.categories {
            let name = format!("{:?}", r.category);
            row("errors", &name, "Advanced", r.advanced.to_string());
            row("errors", &name, "Beginner", r.beginner.to_string());
            row("errors", &name, "Total", r.total.to_string());
        }
        for r in &report.conditional {
            row(
                "subset_accuracy",
                &r.subset,
                "All",
                format_percent(r.correct, r.n, 1),
            );
            row("subset_n", &r.subset, "All", r.n.to_string());
        }
    }
    for r in &report.audit {
        row(
            "blocked_share",
            &r.split,
            "All",
            format_percent(r.blocked, r.total, 2),
        );
        row("blocked_count", &r.split, "All", r.blocked.to_string());
        row("split_size", &r.split, "All", r.total.to_string());
    }
    row("meta", "config_hash", "", report.meta.config_hash.clone());
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

pub fn render_json(report: &EvalReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => render_markdown(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => render_json(report),
    }
}

pub fn parse_report_json(text: &str) -> Result<EvalReport, EvalError> {
    serde_json::from_str(text).map_err(|e| EvalError::Format {
        line: e.line(),
        message: e.to_string(),
    })
}

/// Predictions file: `id,prediction`, empty prediction = abstain. Rows sorted by id.
pub fn write_predictions(
    path: &Path,
    predictions: &BTreeMap<String, Option<char>>,
) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "prediction"])?;
    for (id, p) in predictions {
        w.write_record([id.as_str(), &p.map(String::from).unwrap_or_default()])?;
    }
    w.flush().map_err(|e| EvalError::Io(e.to_string()))?;
    Ok(())
}

pub fn read_predictions(path: &Path) -> Result<BTreeMap<String, Option<char>>, EvalError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let id = rec.get(0).unwrap_or("").trim().to_string();
        let p = rec.get(1).unwrap_or("").trim();
        let letter = match p.chars().collect::<Vec<_>>().as_slice() {
            [] => None,
            [c] if crate::mcq::LETTERS.contains(&c.to_ascii_uppercase()) => {
                Some(c.to_ascii_uppercase())
            }
            _ => {
                return Err(EvalError::Format {
                    line,
                    message: format!("bad prediction `{p}`"),
                })
            }
        };
        if id.is_empty() {
            return Err(EvalError::Format {
                line,
                message: "empty id".into(),
            });
        }
        out.insert(id, letter);
    }
    Ok(out)
}

/// Baselines file: `model,overall,beginner,advanced`.
pub fn read_baselines(path: &Path) -> Result<Vec<AccuracyRow>, EvalError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> Result<Option<f64>, EvalError> {
            let v = rec.get(i).unwrap_or("").trim();
            if v.is_empty() {
                return Ok(None);
            }
            v.parse().map(Some).map_err(|_| EvalError::Format {
                line,
                message: format!("bad number `{v}`"),
            })
        };
        out.push(AccuracyRow {
            model: rec.get(0).unwrap_or("").trim().to_string(),
            overall: num(1)?,
            beginner: num(2)?,
            advanced: num(3)?,
            external: true,
        });
    }
    Ok(out)
}
