//! Parsing of the templated Arabic MCQ format and the dataset files that
//! carry it.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arabic::norm;
use crate::heirs::{normalize_case, Blood, CaseError, CaseInput, DistantKin, HeirClass, HeirParty};
use crate::label::ShareLabel;

pub const LETTERS: [char; 6] = ['A', 'B', 'C', 'D', 'E', 'F'];

pub const QUESTION_HEAD: &str = "مات وترك:";
pub const TARGET_MARKER: &str = "كم النصيب الأصلي";
pub const SINGLE_TAIL: &str = "من التركة، وما الدليل على ذلك؟";
pub const ALL_PARTIES: &str = "لكل صنف من الورثة";
pub const OPTION_HEAD: &str = "نصيبه هو";
pub const EVIDENCE_HEAD: &str = "والدليل:";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McqError {
    #[error("question does not follow the template: {0}")]
    TemplateMismatch(String),
    #[error("unknown heir phrase `{0}`")]
    UnknownHeirPhrase(String),
    #[error("target `{0}` is not among the listed heirs")]
    TargetNotInScenario(String),
    #[error("unknown share label `{0}`")]
    UnknownShareLabel(String),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("line {line}: {message}")]
    SchemaError { line: usize, message: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for McqError {
    fn from(e: std::io::Error) -> Self {
        McqError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    Beginner,
    Advanced,
}

impl Level {
    pub const ALL: [Level; 2] = [Level::Beginner, Level::Advanced];

    pub fn parse(s: &str) -> Option<Level> {
        match s.trim().to_ascii_lowercase().as_str() {
            "beginner" => Some(Level::Beginner),
            "advanced" => Some(Level::Advanced),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Beginner => "Beginner",
            Level::Advanced => "Advanced",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqItem {
    pub id: String,
    pub question: String,
    pub options: BTreeMap<char, String>,
    #[serde(rename = "label")]
    pub gold: char,
    pub level: Level,
}

impl McqItem {
    pub fn letters(&self) -> Vec<char> {
        self.options.keys().copied().collect()
    }

    pub fn gold_text(&self) -> &str {
        self.options.get(&self.gold).map_or("", String::as_str)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.question.trim().is_empty() {
            return Err("empty question".into());
        }
        let n = self.options.len();
        if !(2..=6).contains(&n) {
            return Err(format!("{n} options (expected 2 to 6)"));
        }
        if self.letters() != LETTERS[..n] {
            return Err("option letters must run contiguously from A".into());
        }
        if let Some((l, _)) = self.options.iter().find(|(_, t)| t.trim().is_empty()) {
            return Err(format!("option {l} is empty"));
        }
        if !self.options.contains_key(&self.gold) {
            return Err(format!("gold letter {} is not an option", self.gold));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Single(HeirClass),
    AllParties,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQuestion {
    pub case: CaseInput,
    pub target: Target,
    /// Scenario span of the normalized question text.
    pub scenario: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedOption {
    Single { label: ShareLabel, evidence: String },
    PerHeir(Vec<(HeirParty, ShareLabel)>),
}

impl ParsedOption {
    pub fn label(&self) -> Option<ShareLabel> {
        match self {
            ParsedOption::Single { label, .. } => Some(*label),
            ParsedOption::PerHeir(_) => None,
        }
    }
}

struct Lexicon {
    phrases: HashMap<String, HeirClass>,
}

static LEXICON: LazyLock<Lexicon> = LazyLock::new(|| {
    let mut phrases = HashMap::new();
    for line in include_str!("../data/heir_lexicon.tsv").lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (phrase, id) = line
            .split_once('\t')
            .expect("lexicon rows are tab separated");
        let class: HeirClass = id.trim().parse().expect("lexicon ids are valid");
        phrases.insert(collapse(&norm(phrase)), class);
    }
    for k in DistantKin::all() {
        let class = HeirClass::Distant(k);
        phrases.insert(norm(&class.arabic()), class);
    }
    Lexicon { phrases }
});

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn small(n: usize) -> Option<u8> {
    u8::try_from(n).ok()
}

/// Compositional reading of a normalized heir phrase.
fn parse_phrase(phrase: &str) -> Option<HeirClass> {
    use HeirClass::*;
    let words: Vec<&str> = phrase.split_whitespace().collect();
    let ibn = words.iter().take_while(|w| **w == "ابن").count();
    let rest = &words[ibn..];
    let class = match rest {
        [] if ibn >= 1 => Son {
            depth: small(ibn - 1)?,
        },
        ["بنت", sons @ ..] if ibn == 0 && sons.iter().all(|w| *w == "ابن") => Daughter {
            depth: small(sons.len())?,
        },
        ["اخ", q] => {
            let blood = match *q {
                "شقيق" => Blood::Full,
                "لاب" => Blood::Paternal,
                "لام" => Blood::Maternal,
                _ => return None,
            };
            match (ibn, blood) {
                (0, b) => Brother(b),
                (_, Blood::Maternal) => return None,
                (d, b) => Nephew {
                    blood: b,
                    depth: small(d)?,
                },
            }
        }
        ["اخت", q] if ibn == 0 => match *q {
            "شقيقة" => Sister(Blood::Full),
            "لاب" => Sister(Blood::Paternal),
            "لام" => Sister(Blood::Maternal),
            _ => return None,
        },
        ["عم", tail @ ..] => {
            let fathers = tail.iter().take_while(|w| **w == "اب").count();
            let mut tail = &tail[fathers..];
            let mut generation = 1 + fathers;
            if let ["الاب", t @ ..] = tail {
                generation += 1;
                tail = t;
            } else if fathers > 0 {
                return None;
            }
            let blood = match tail {
                [] | ["شقيق"] => Blood::Full,
                ["لاب"] => Blood::Paternal,
                _ => return None,
            };
            let generation = small(generation)?;
            if ibn == 0 {
                Uncle { blood, generation }
            } else {
                Cousin {
                    blood,
                    generation,
                    depth: small(ibn)?,
                }
            }
        }
        ["زوج"] if ibn == 0 => Husband,
        ["زوجة"] if ibn == 0 => Wife,
        chain if ibn == 0 && !chain.is_empty() => parse_ascendant(chain)?,
        _ => return None,
    };
    class.validate().ok()?;
    Some(class)
}

/// "أم أم الأب" style chains, read from the heir back to the deceased.
fn parse_ascendant(words: &[&str]) -> Option<HeirClass> {
    let last = words.len() - 1;
    let mut path = Vec::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        let step = match (*w, i == last, words.len() == 1) {
            ("اب", _, true) | ("الاب", true, false) | ("اب", false, false) => 'F',
            ("ام", _, true) | ("الام", true, false) | ("ام", false, false) => 'M',
            _ => return None,
        };
        path.push(step);
    }
    // path from the deceased outward
    path.reverse();
    let fathers = path.iter().take_while(|s| **s == 'F').count();
    let mothers = path.len() - fathers;
    if path[fathers..].contains(&'F') {
        return (path == ['M', 'F']).then_some(HeirClass::Distant(DistantKin::MaternalGrandfather));
    }
    Some(match (fathers, mothers) {
        (1, 0) => HeirClass::Father,
        (f, 0) => HeirClass::Grandfather {
            height: small(f - 1)?,
        },
        (0, 1) => HeirClass::Mother,
        (f, m) => HeirClass::Grandmother {
            via_fathers: small(f)?,
            via_mothers: small(m)?,
        },
    })
}

fn resolve_class(phrase: &str) -> Result<HeirClass, McqError> {
    let key = collapse(&norm(phrase));
    LEXICON
        .phrases
        .get(&key)
        .copied()
        .or_else(|| parse_phrase(&key))
        .ok_or_else(|| McqError::UnknownHeirPhrase(phrase.trim().to_string()))
}

fn parse_count(digits: &str) -> Option<u32> {
    let ascii: String = digits
        .trim()
        .chars()
        .map(|c| match c {
            '٠'..='٩' => char::from_digit(c as u32 - '٠' as u32, 10).unwrap_or(c),
            '۰'..='۹' => char::from_digit(c as u32 - '۰' as u32, 10).unwrap_or(c),
            c => c,
        })
        .collect();
    ascii.parse().ok()
}

/// Split an optional trailing "(n)" count off a heir phrase.
fn split_count(token: &str) -> Result<(&str, u32), McqError> {
    let t = token.trim();
    if let Some(body) = t.strip_suffix(')') {
        if let Some(open) = body.rfind('(') {
            let count = parse_count(&body[open + 1..])
                .ok_or_else(|| McqError::UnknownHeirPhrase(t.to_string()))?;
            return Ok((body[..open].trim(), count));
        }
    }
    Ok((t, 1))
}

pub fn parse_heir_token(token: &str) -> Result<HeirParty, McqError> {
    let (phrase, count) = split_count(token)?;
    if phrase.is_empty() {
        return Err(McqError::UnknownHeirPhrase(token.trim().to_string()));
    }
    Ok(HeirParty::new(resolve_class(phrase)?, count))
}

pub fn parse_question(text: &str) -> Result<ParsedQuestion, McqError> {
    let n = collapse(&norm(text));
    let head = norm(QUESTION_HEAD);
    let head_loose = head.trim_end_matches(':');
    let after_head = n
        .strip_prefix(head.as_str())
        .or_else(|| n.strip_prefix(head_loose))
        .ok_or_else(|| McqError::TemplateMismatch("missing scenario head".into()))?;
    let marker = norm(TARGET_MARKER);
    let at = after_head
        .find(&marker)
        .ok_or_else(|| McqError::TemplateMismatch("missing target marker".into()))?;
    let scenario = after_head[..at].trim().to_string();
    let tail = after_head[at + marker.len()..].trim_start();

    let mut parties = Vec::new();
    for tok in scenario.split(" و ") {
        if tok.trim().is_empty() {
            return Err(McqError::TemplateMismatch("empty heir token".into()));
        }
        parties.push(parse_heir_token(tok)?);
    }
    let case = normalize_case(parties)?;

    let target = if tail.starts_with(&norm(ALL_PARTIES)) {
        Target::AllParties
    } else {
        let t = tail
            .strip_prefix('ل')
            .ok_or_else(|| McqError::TemplateMismatch("missing target".into()))?;
        let end = [" من التركة", "؟", "،"]
            .iter()
            .filter_map(|m| t.find(m))
            .min()
            .unwrap_or(t.len());
        let phrase = t[..end].trim();
        let party = parse_heir_token(phrase)?;
        if !case.has(party.class) {
            return Err(McqError::TargetNotInScenario(phrase.to_string()));
        }
        Target::Single(party.class)
    };
    Ok(ParsedQuestion {
        case,
        target,
        scenario,
    })
}

const OPTION_HEADS: [&str; 5] = [
    "نصيبه هو",
    "نصيبها هو",
    "نصيبهم هو",
    "نصيبهن هو",
    "نصيبهما هو",
];

pub fn parse_option(text: &str) -> Result<ParsedOption, McqError> {
    let n = collapse(&norm(text));
    if let Some((pos, head)) = OPTION_HEADS.iter().find_map(|h| n.find(h).map(|p| (p, *h))) {
        let rest = &n[pos + head.len()..];
        let end = ["،", ",", " والدليل"]
            .iter()
            .filter_map(|m| rest.find(m))
            .min()
            .unwrap_or(rest.len());
        let seg = rest[..end].trim();
        let label = ShareLabel::parse_arabic(seg)
            .ok_or_else(|| McqError::UnknownShareLabel(seg.to_string()))?;
        let evidence = text
            .find("الدليل")
            .map(|p| {
                let e = &text[p + "الدليل".len()..];
                e.strip_prefix(':').unwrap_or(e).trim().to_string()
            })
            .unwrap_or_default();
        return Ok(ParsedOption::Single { label, evidence });
    }
    if n.contains(':') {
        let mut out = Vec::new();
        for seg in n.split(['،', ',']).map(str::trim).filter(|s| !s.is_empty()) {
            let (heir, label) = seg
                .rsplit_once(':')
                .ok_or_else(|| McqError::UnknownShareLabel(seg.to_string()))?;
            let label = ShareLabel::parse_arabic(label)
                .ok_or_else(|| McqError::UnknownShareLabel(label.trim().to_string()))?;
            out.push((parse_heir_token(heir)?, label));
        }
        return Ok(ParsedOption::PerHeir(out));
    }
    ShareLabel::parse_arabic(&n)
        .map(|label| ParsedOption::Single {
            label,
            evidence: String::new(),
        })
        .ok_or(McqError::UnknownShareLabel(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    #[default]
    JsonLines,
    Csv,
}

impl DatasetFormat {
    pub fn from_path(path: &Path) -> DatasetFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::JsonLines,
        }
    }
}

#[derive(Deserialize)]
struct RawItem {
    id: String,
    question: String,
    options: BTreeMap<String, String>,
    label: String,
    level: String,
}

fn single_letter(s: &str) -> Option<char> {
    let mut it = s.trim().chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Some(c.to_ascii_uppercase()),
        _ => None,
    }
}

fn build_item(raw: RawItem, line: usize) -> Result<McqItem, McqError> {
    let schema = |message: String| McqError::SchemaError { line, message };
    let mut options = BTreeMap::new();
    for (k, v) in raw.options {
        let letter = single_letter(&k)
            .filter(|c| LETTERS.contains(c))
            .ok_or_else(|| schema(format!("bad option letter `{k}`")))?;
        options.insert(letter, v);
    }
    let gold = single_letter(&raw.label)
        .filter(|c| LETTERS.contains(c))
        .ok_or_else(|| schema(format!("bad gold label `{}`", raw.label)))?;
    let level =
        Level::parse(&raw.level).ok_or_else(|| schema(format!("bad level `{}`", raw.level)))?;
    let item = McqItem {
        id: raw.id.trim().to_string(),
        question: raw.question,
        options,
        gold,
        level,
    };
    item.validate().map_err(schema)?;
    Ok(item)
}

pub fn read_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<McqItem>, McqError> {
    let items = match format {
        DatasetFormat::JsonLines => read_jsonl(path)?,
        DatasetFormat::Csv => read_csv(path)?,
    };
    let mut seen = HashSet::new();
    for (item, line) in &items {
        if !seen.insert(item.id.clone()) {
            return Err(McqError::DuplicateId {
                line: *line,
                id: item.id.clone(),
            });
        }
    }
    Ok(items.into_iter().map(|(i, _)| i).collect())
}

fn read_jsonl(path: &Path) -> Result<Vec<(McqItem, usize)>, McqError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_start_matches('\u{feff}');
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawItem = serde_json::from_str(line).map_err(|e| McqError::SchemaError {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((build_item(raw, line_no)?, line_no));
    }
    Ok(out)
}

const CSV_OPTION_COLUMNS: [&str; 6] = [
    "option_a", "option_b", "option_c", "option_d", "option_e", "option_f",
];

fn read_csv(path: &Path) -> Result<Vec<(McqItem, usize)>, McqError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| McqError::Io(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| McqError::SchemaError {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
            .ok_or_else(|| McqError::SchemaError {
                line: 1,
                message: format!("missing column `{name}`"),
            })
    };
    let (id_c, q_c, label_c, level_c) =
        (col("id")?, col("question")?, col("label")?, col("level")?);
    let option_cols: Vec<usize> = CSV_OPTION_COLUMNS
        .iter()
        .map(|c| col(c))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| McqError::SchemaError {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let get = |i: usize| record.get(i).unwrap_or("").to_string();
        let options = option_cols
            .iter()
            .zip(LETTERS)
            .filter(|(c, _)| !get(**c).is_empty())
            .map(|(c, l)| (l.to_string(), get(*c)))
            .collect();
        let raw = RawItem {
            id: get(id_c),
            question: get(q_c),
            options,
            label: get(label_c),
            level: get(level_c),
        };
        out.push((build_item(raw, line)?, line));
    }
    Ok(out)
}

pub fn write_dataset(
    items: &[McqItem],
    path: &Path,
    format: DatasetFormat,
) -> Result<(), McqError> {
    match format {
        DatasetFormat::JsonLines => {
            let mut w = BufWriter::new(File::create(path)?);
            for item in items {
                let line = serde_json::to_string(item).map_err(|e| McqError::Io(e.to_string()))?;
                writeln!(w, "{line}")?;
            }
            w.flush()?;
        }
        DatasetFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| McqError::Io(e.to_string()))?;
            let mut header = vec!["id", "question"];
            header.extend(CSV_OPTION_COLUMNS);
            header.extend(["label", "level"]);
            w.write_record(&header)
                .map_err(|e| McqError::Io(e.to_string()))?;
            for item in items {
                let mut row = vec![item.id.clone(), item.question.clone()];
                row.extend(
                    LETTERS
                        .iter()
                        .map(|l| item.options.get(l).cloned().unwrap_or_default()),
                );
                row.push(item.gold.to_string());
                row.push(item.level.to_string());
                w.write_record(&row)
                    .map_err(|e| McqError::Io(e.to_string()))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
