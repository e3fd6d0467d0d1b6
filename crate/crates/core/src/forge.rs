//! Synthetic MCQ corpora labelled by the solver.
//!
//! Prevalences are realized by quota: for `n` items and ratio `r`, exactly
//! `round(n * r)` items carry the property, on indices drawn by the seeded RNG.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arabic::TATWEEL;
use crate::heirs::{normalize_case, Blood, CaseInput, HeirClass, HeirParty};
use crate::label::ShareLabel;
use crate::mcq::{
    Level, McqItem, ALL_PARTIES, EVIDENCE_HEAD, LETTERS, OPTION_HEAD, QUESTION_HEAD, SINGLE_TAIL,
    TARGET_MARKER,
};
use crate::solver::{solve, verdict_for, Verdict};

pub const MAX_ATTEMPTS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForgeError {
    #[error("no acceptable case after {0} attempts")]
    GenerationExhausted(usize),
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelMix {
    BeginnerOnly,
    AdvancedOnly,
    #[default]
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n_items: usize,
    pub blocked_ratio: f64,
    pub negation_ratio: f64,
    pub near_dup_inject_ratio: f64,
    pub seed: u64,
    pub level_mix: LevelMix,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            n_items: 1000,
            blocked_ratio: 0.299,
            negation_ratio: 0.0,
            near_dup_inject_ratio: 0.0,
            seed: 42,
            level_mix: LevelMix::Mixed,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), ForgeError> {
        if self.n_items == 0 {
            return Err(ForgeError::InvalidSpec("n_items must be positive".into()));
        }
        for (name, r) in [
            ("blocked_ratio", self.blocked_ratio),
            ("negation_ratio", self.negation_ratio),
            ("near_dup_inject_ratio", self.near_dup_inject_ratio),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(ForgeError::InvalidSpec(format!(
                    "{name} {r} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Number of items that carry a property at `ratio`.
    pub fn quota(&self, ratio: f64) -> usize {
        ((self.n_items as f64) * ratio).round() as usize
    }
}

fn sampling_pool() -> Vec<HeirClass> {
    use HeirClass::*;
    let mut v = vec![
        Son { depth: 0 },
        Son { depth: 1 },
        Daughter { depth: 0 },
        Daughter { depth: 1 },
        Daughter { depth: 2 },
        Father,
        Mother,
        Grandfather { height: 1 },
        Grandfather { height: 2 },
        Grandmother {
            via_fathers: 1,
            via_mothers: 1,
        },
        Grandmother {
            via_fathers: 0,
            via_mothers: 2,
        },
        Grandmother {
            via_fathers: 1,
            via_mothers: 2,
        },
        Grandmother {
            via_fathers: 2,
            via_mothers: 1,
        },
        Grandmother {
            via_fathers: 0,
            via_mothers: 3,
        },
        Husband,
        Wife,
    ];
    for b in [Blood::Full, Blood::Paternal, Blood::Maternal] {
        v.push(Brother(b));
        v.push(Sister(b));
    }
    for b in [Blood::Full, Blood::Paternal] {
        v.push(Nephew { blood: b, depth: 1 });
        v.push(Nephew { blood: b, depth: 2 });
        v.push(Uncle {
            blood: b,
            generation: 1,
        });
        v.push(Uncle {
            blood: b,
            generation: 2,
        });
        v.push(Cousin {
            blood: b,
            generation: 1,
            depth: 1,
        });
        v.push(Cousin {
            blood: b,
            generation: 1,
            depth: 2,
        });
        v.push(Cousin {
            blood: b,
            generation: 2,
            depth: 1,
        });
    }
    v
}

fn sample_count(rng: &mut ChaCha8Rng, class: HeirClass) -> u32 {
    if class.is_unique_person() {
        1
    } else if class == HeirClass::Wife {
        rng.random_range(1..=4)
    } else if rng.random_bool(0.5) {
        1
    } else {
        rng.random_range(2..=5)
    }
}

fn party_range(level: Level) -> (usize, usize) {
    match level {
        Level::Beginner => (2, 4),
        Level::Advanced => (4, 6),
    }
}

/// Sample parties (in presentation order) and a target whose verdict passes `accept`.
pub fn generate_case_where<F: Fn(&Verdict) -> bool>(
    rng: &mut ChaCha8Rng,
    level: Level,
    accept: F,
) -> Result<(Vec<HeirParty>, CaseInput, HeirClass, Verdict), ForgeError> {
    let pool = sampling_pool();
    let (lo, hi) = party_range(level);
    for _ in 0..MAX_ATTEMPTS {
        let k = rng.random_range(lo..=hi);
        let mut classes: Vec<HeirClass> = pool.choose_multiple(rng, k).copied().collect();
        if classes.contains(&HeirClass::Husband) && classes.contains(&HeirClass::Wife) {
            continue;
        }
        classes.shuffle(rng);
        let parties: Vec<HeirParty> = classes
            .iter()
            .map(|c| HeirParty::new(*c, sample_count(rng, *c)))
            .collect();
        let Ok(case) = normalize_case(parties.clone()) else {
            continue;
        };
        let Ok(result) = solve(&case) else { continue };
        let mut targets: Vec<(HeirClass, Verdict)> = classes
            .iter()
            .filter_map(|c| verdict_for(&result, *c).ok().map(|v| (*c, v)))
            .filter(|(_, v)| accept(v))
            .collect();
        if targets.is_empty() {
            continue;
        }
        targets.shuffle(rng);
        let (target, verdict) = targets[0];
        return Ok((parties, case, target, verdict));
    }
    Err(ForgeError::GenerationExhausted(MAX_ATTEMPTS))
}

pub fn generate_case(
    rng: &mut ChaCha8Rng,
    want_blocked: bool,
    level: Level,
) -> Result<(CaseInput, HeirClass), ForgeError> {
    generate_case_where(rng, level, |v| {
        (v.label == ShareLabel::Blocked) == want_blocked
    })
    .map(|(_, case, target, _)| (case, target))
}

/// Scenario tokens in the given order, joined by the spaced conjunction.
pub fn render_scenario(parties: &[HeirParty]) -> String {
    parties
        .iter()
        .map(HeirParty::arabic)
        .collect::<Vec<_>>()
        .join(" و ")
}

pub fn render_question_ordered(parties: &[HeirParty], target: Option<&HeirParty>) -> String {
    let scenario = render_scenario(parties);
    match target {
        Some(t) => format!(
            "{QUESTION_HEAD} {scenario} {TARGET_MARKER} لـ {} {SINGLE_TAIL}",
            t.arabic()
        ),
        None => format!("{QUESTION_HEAD} {scenario} {TARGET_MARKER} {ALL_PARTIES} من التركة؟"),
    }
}

/// Question for `target` over the canonical party order.
pub fn render_question(case: &CaseInput, target: HeirClass) -> String {
    let t = case.get(target).copied().unwrap_or(HeirParty::one(target));
    render_question_ordered(case.parties(), Some(&t))
}

/// Synthetic evidence phrase per label. Only the "nothing" phrase carries a negation cue.
pub fn evidence_for(label: ShareLabel) -> &'static str {
    match label {
        ShareLabel::Half => "فرضه النصف في هذه المسألة",
        ShareLabel::Quarter => "فرضه الربع في هذه المسألة",
        ShareLabel::Eighth => "فرضه الثمن في هذه المسألة",
        ShareLabel::TwoThirds => "فرضهم الثلثان لتعددهم",
        ShareLabel::Third => "فرضه الثلث في هذه المسألة",
        ShareLabel::Sixth => "فرضه السدس في هذه المسألة",
        ShareLabel::Residue | ShareLabel::Whole => "لأنه عصبة",
        ShareLabel::Blocked => "لأنه محجوب بمن هو أقرب منه إلى الميت",
        ShareLabel::Nothing => "لا يبقى له شيء بعد أصحاب الفروض",
        ShareLabel::SixthPlusResidue => "يأخذ السدس فرضا والباقي تعصيبا",
        ShareLabel::ThirdOfRemainder => "يأخذ ثلث ما يبقى بعد أصحاب الفروض",
    }
}

pub fn render_option(label: ShareLabel) -> String {
    format!(
        "{OPTION_HEAD} {}، {EVIDENCE_HEAD} {}",
        label.arabic(),
        evidence_for(label)
    )
}

/// A spelling variant that collapses to the same text under dedup normalization.
pub fn orthographic_variant(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let is_letter = |c: Option<&char>| c.is_some_and(|c| c.is_alphabetic());
    if let Some(i) = (0..chars.len()).find(|&i| chars[i] == 'ي' && !is_letter(chars.get(i + 1))) {
        let mut v = chars.clone();
        v[i] = 'ى';
        return v.into_iter().collect();
    }
    // no word-final ya: stretch the first joinable letter with a tatweel
    let joinable = |c: char| ('\u{0626}'..='\u{064A}').contains(&c) && !"اأإآدذرزوؤة".contains(c);
    match (0..chars.len()).find(|&i| joinable(chars[i]) && is_letter(chars.get(i + 1))) {
        Some(i) => {
            let mut v = chars;
            v.insert(i + 1, TATWEEL);
            v.into_iter().collect()
        }
        None => format!("{text}\u{064E}"),
    }
}

/// Options with the gold label plus 3–5 distractors of distinct labels. With
/// `inject_near_dup`, a spelling variant of the gold option is added as well.
pub fn make_options(
    gold_label: ShareLabel,
    rng: &mut ChaCha8Rng,
    inject_near_dup: bool,
) -> (BTreeMap<char, String>, char) {
    let max_distractors = if inject_near_dup { 4 } else { 5 };
    let n_distractors = rng.random_range(3..=max_distractors);
    let mut pool: Vec<ShareLabel> = ShareLabel::ALL
        .into_iter()
        .filter(|l| *l != gold_label)
        .collect();
    pool.shuffle(rng);
    let mut distractors: Vec<ShareLabel> = Vec::with_capacity(n_distractors);
    if gold_label == ShareLabel::Blocked {
        distractors.push(ShareLabel::Nothing);
        pool.retain(|l| *l != ShareLabel::Nothing);
    }
    let room = n_distractors - distractors.len();
    distractors.extend(pool.into_iter().take(room));

    let gold_text = render_option(gold_label);
    let mut texts: Vec<(String, bool)> = vec![(gold_text.clone(), true)];
    texts.extend(distractors.iter().map(|l| (render_option(*l), false)));
    if inject_near_dup {
        texts.push((orthographic_variant(&gold_text), false));
    }
    texts.shuffle(rng);
    let mut options = BTreeMap::new();
    let mut gold = 'A';
    for ((text, is_gold), letter) in texts.into_iter().zip(LETTERS) {
        if is_gold {
            gold = letter;
        }
        options.insert(letter, text);
    }
    (options, gold)
}

/// Clauses that hold for every generated scenario and each carry a negation cue.
pub const NEGATION_BANK: [&str; 6] = [
    "علما بأن المتوفى لم يترك وصية.",
    "ولا يوجد وارث غير من ذكر.",
    "وليس على التركة دين.",
    "ولم يقم بأحد الورثة مانع من موانع الإرث.",
    "والتركة بدون وصية ولا دين.",
    "ولن يشارك الورثة أحد غير من ذكر.",
];

pub fn negation_rewrite(text: &str, rng: &mut ChaCha8Rng) -> String {
    let clause = NEGATION_BANK.choose(rng).expect("non-empty bank");
    format!("{} {clause}", text.trim_end())
}

fn pick_indices(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut mark = vec![false; n];
    for i in idx.into_iter().take(k) {
        mark[i] = true;
    }
    mark
}

pub fn generate_corpus(spec: &GenSpec) -> Result<Vec<McqItem>, ForgeError> {
    spec.validate()?;
    let n = spec.n_items;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let blocked = pick_indices(&mut rng, n, spec.quota(spec.blocked_ratio));
    let negated = pick_indices(&mut rng, n, spec.quota(spec.negation_ratio));
    let injected = pick_indices(&mut rng, n, spec.quota(spec.near_dup_inject_ratio));
    let advanced = match spec.level_mix {
        LevelMix::BeginnerOnly => vec![false; n],
        LevelMix::AdvancedOnly => vec![true; n],
        LevelMix::Mixed => pick_indices(&mut rng, n, n / 2),
    };

    let mut items = Vec::with_capacity(n);
    for i in 0..n {
        let level = if advanced[i] {
            Level::Advanced
        } else {
            Level::Beginner
        };
        let want_blocked = blocked[i];
        let neg = negated[i];
        // the "nothing" option text carries a cue, so it is gold only on negated items
        let (parties, case, target, verdict) = generate_case_where(&mut rng, level, |v| {
            (v.label == ShareLabel::Blocked) == want_blocked
                && (neg || v.label != ShareLabel::Nothing)
        })?;
        let target_party = *case.get(target).expect("target in case");
        let mut question = render_question_ordered(&parties, Some(&target_party));
        if neg && !crate::arabic::detect_negation(&question).found {
            question = negation_rewrite(&question, &mut rng);
        }
        let (options, gold) = make_options(verdict.label, &mut rng, injected[i]);
        items.push(McqItem {
            id: format!("gen_{:05}", i + 1),
            question,
            options,
            gold,
            level,
        });
    }
    Ok(items)
}
