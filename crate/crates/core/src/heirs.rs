//! Heir taxonomy, heir parties and validated case input.
//!
//! Every class is addressable by a stable snake_case id (used in case
//! files) and renders to one canonical Arabic phrase (used in question
//! templates). Lineage depth is unbounded in the type but capped by
//! [`MAX_DEPTH`] on validation.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MAX_DEPTH: u8 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Blood {
    Full,
    Paternal,
    Maternal,
}

impl Blood {
    fn id(self) -> &'static str {
        match self {
            Blood::Full => "full",
            Blood::Paternal => "paternal",
            Blood::Maternal => "maternal",
        }
    }

    fn from_id(s: &str) -> Option<Blood> {
        match s {
            "full" => Some(Blood::Full),
            "paternal" => Some(Blood::Paternal),
            "maternal" => Some(Blood::Maternal),
            _ => None,
        }
    }

    fn rank(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sex {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassGroup {
    Descendant,
    Ascendant,
    Spouse,
    SiblingLine,
    UncleLine,
    DistantKindred,
}

/// Relatives outside the sharer/agnate system (dhawu al-arham).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistantKin {
    DaughterSon,
    DaughterDaughter,
    SisterSon,
    SisterDaughter,
    BrotherDaughter,
    UncleDaughter,
    MaternalUncle,
    MaternalAunt,
    PaternalAunt,
    MaternalGrandfather,
    MaternalBrotherSon,
}

const DISTANT_TABLE: &[(DistantKin, &str, &str, Sex)] = &[
    (
        DistantKin::DaughterSon,
        "daughter_son",
        "ابن بنت",
        Sex::Male,
    ),
    (
        DistantKin::DaughterDaughter,
        "daughter_daughter",
        "بنت بنت",
        Sex::Female,
    ),
    (DistantKin::SisterSon, "sister_son", "ابن أخت", Sex::Male),
    (
        DistantKin::SisterDaughter,
        "sister_daughter",
        "بنت أخت",
        Sex::Female,
    ),
    (
        DistantKin::BrotherDaughter,
        "brother_daughter",
        "بنت أخ",
        Sex::Female,
    ),
    (
        DistantKin::UncleDaughter,
        "uncle_daughter",
        "بنت عم",
        Sex::Female,
    ),
    (
        DistantKin::MaternalUncle,
        "mother_brother",
        "خال",
        Sex::Male,
    ),
    (
        DistantKin::MaternalAunt,
        "mother_sister",
        "خالة",
        Sex::Female,
    ),
    (
        DistantKin::PaternalAunt,
        "father_sister",
        "عمة",
        Sex::Female,
    ),
    (
        DistantKin::MaternalGrandfather,
        "mother_father",
        "أب الأم",
        Sex::Male,
    ),
    (
        DistantKin::MaternalBrotherSon,
        "maternal_brother_son",
        "ابن أخ لأم",
        Sex::Male,
    ),
];

impl DistantKin {
    fn entry(self) -> &'static (DistantKin, &'static str, &'static str, Sex) {
        DISTANT_TABLE
            .iter()
            .find(|e| e.0 == self)
            .expect("every distant kin has a table row")
    }

    pub fn all() -> impl Iterator<Item = DistantKin> {
        DISTANT_TABLE.iter().map(|e| e.0)
    }
}

/// A heir class. Depth and height fields count generations away from the
/// deceased along the named line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeirClass {
    /// `depth` 0 is the son, 1 the son's son, and so on down the male line.
    Son {
        depth: u8,
    },
    /// `depth` 0 is the daughter, 1 the son's daughter, 2 the son's son's daughter.
    Daughter {
        depth: u8,
    },
    Father,
    /// `height` 1 is the father's father.
    Grandfather {
        height: u8,
    },
    Mother,
    /// Path from the deceased: `via_fathers` father steps followed by
    /// `via_mothers` mother steps. Father's mother is (1, 1).
    Grandmother {
        via_fathers: u8,
        via_mothers: u8,
    },
    Husband,
    Wife,
    Brother(Blood),
    Sister(Blood),
    /// Brother's son at `depth` (1 = brother's son). Full or paternal only.
    Nephew {
        blood: Blood,
        depth: u8,
    },
    /// `generation` 1 is the deceased's uncle, 2 the father's uncle.
    Uncle {
        blood: Blood,
        generation: u8,
    },
    /// Uncle's male-line descendant at `depth` (1 = cousin).
    Cousin {
        blood: Blood,
        generation: u8,
        depth: u8,
    },
    Distant(DistantKin),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("unknown heir class id `{0}`")]
    UnknownId(String),
    #[error("heir class {0} is outside the supported taxonomy")]
    Invalid(String),
}

impl HeirClass {
    pub fn sex(&self) -> Sex {
        use HeirClass::*;
        match self {
            Daughter { .. } | Mother | Grandmother { .. } | Wife | Sister(_) => Sex::Female,
            Distant(k) => k.entry().3,
            _ => Sex::Male,
        }
    }

    pub fn group(&self) -> ClassGroup {
        use HeirClass::*;
        match self {
            Son { .. } | Daughter { .. } => ClassGroup::Descendant,
            Father | Grandfather { .. } | Mother | Grandmother { .. } => ClassGroup::Ascendant,
            Husband | Wife => ClassGroup::Spouse,
            Brother(_) | Sister(_) | Nephew { .. } => ClassGroup::SiblingLine,
            Uncle { .. } | Cousin { .. } => ClassGroup::UncleLine,
            Distant(_) => ClassGroup::DistantKindred,
        }
    }

    /// Generations between the deceased and this relative.
    pub fn degree(&self) -> u8 {
        use HeirClass::*;
        match *self {
            Son { depth } | Daughter { depth } => depth + 1,
            Father | Mother => 1,
            Grandfather { height } => height + 1,
            Grandmother {
                via_fathers,
                via_mothers,
            } => via_fathers + via_mothers,
            Husband | Wife => 0,
            Brother(_) | Sister(_) => 1,
            Nephew { depth, .. } => depth + 1,
            Uncle { generation, .. } => generation + 1,
            Cousin {
                generation, depth, ..
            } => generation + depth + 1,
            Distant(_) => 2,
        }
    }

    pub fn blood(&self) -> Option<Blood> {
        use HeirClass::*;
        match *self {
            Brother(b) | Sister(b) => Some(b),
            Nephew { blood, .. } | Uncle { blood, .. } | Cousin { blood, .. } => Some(blood),
            _ => None,
        }
    }

    /// Lineage path from the deceased, e.g. `["father", "mother"]`.
    pub fn lineage(&self) -> Vec<&'static str> {
        self.id_tokens()
    }

    /// Male relative connected to the deceased through males only.
    pub fn is_agnate(&self) -> bool {
        use HeirClass::*;
        match self {
            Son { .. }
            | Father
            | Grandfather { .. }
            | Nephew { .. }
            | Uncle { .. }
            | Cousin { .. } => true,
            Brother(b) => *b != Blood::Maternal,
            _ => false,
        }
    }

    pub fn is_spouse(&self) -> bool {
        matches!(self, HeirClass::Husband | HeirClass::Wife)
    }

    /// A single person: at most one party of count 1 may carry this class.
    pub fn is_unique_person(&self) -> bool {
        matches!(
            self,
            HeirClass::Father
                | HeirClass::Mother
                | HeirClass::Husband
                | HeirClass::Grandfather { .. }
                | HeirClass::Grandmother { .. }
                | HeirClass::Distant(DistantKin::MaternalGrandfather)
        )
    }

    pub fn validate(&self) -> Result<(), TaxonomyError> {
        use HeirClass::*;
        let ok = match *self {
            Son { depth } | Daughter { depth } => depth <= MAX_DEPTH,
            Grandfather { height } => (1..=MAX_DEPTH).contains(&height),
            Grandmother {
                via_fathers,
                via_mothers,
            } => {
                via_mothers >= 1
                    && via_fathers + via_mothers >= 2
                    && via_fathers + via_mothers <= MAX_DEPTH
            }
            Nephew { blood, depth } => blood != Blood::Maternal && (1..=MAX_DEPTH).contains(&depth),
            Uncle { blood, generation } => {
                blood != Blood::Maternal && (1..=MAX_DEPTH).contains(&generation)
            }
            Cousin {
                blood,
                generation,
                depth,
            } => {
                blood != Blood::Maternal
                    && (1..=MAX_DEPTH).contains(&generation)
                    && (1..=MAX_DEPTH).contains(&depth)
            }
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(TaxonomyError::Invalid(format!("{self:?}")))
        }
    }

    /// Canonical ordering key: class group, degree, then blood strength.
    fn sort_key(&self) -> (ClassGroup, u8, u8, u8, u8, Sex) {
        use HeirClass::*;
        let blood = self.blood().map_or(0, Blood::rank);
        // secondary discriminators keep the order total
        let (a, b) = match *self {
            Grandfather { .. } | Father => (0, 0),
            Mother => (1, 0),
            Grandmother { via_fathers, .. } => (1, via_fathers),
            Uncle { generation, .. } => (generation, 0),
            Cousin {
                generation, depth, ..
            } => (generation, depth),
            Nephew { depth, .. } => (depth, 0),
            Distant(k) => (k as u8, 0),
            _ => (0, 0),
        };
        (self.group(), self.degree(), a, b, blood, self.sex())
    }

    fn id_tokens(&self) -> Vec<&'static str> {
        use HeirClass::*;
        let rep = |word: &'static str, n: u8| std::iter::repeat_n(word, n as usize);
        match *self {
            Son { depth } => rep("son", depth + 1).collect(),
            Daughter { depth } => rep("son", depth).chain(["daughter"]).collect(),
            Father => vec!["father"],
            Grandfather { height } => rep("father", height + 1).collect(),
            Mother => vec!["mother"],
            Grandmother {
                via_fathers,
                via_mothers,
            } => rep("father", via_fathers)
                .chain(rep("mother", via_mothers))
                .collect(),
            Husband => vec!["husband"],
            Wife => vec!["wife"],
            Brother(b) => vec![b.id(), "brother"],
            Sister(b) => vec![b.id(), "sister"],
            Nephew { blood, depth } => [blood.id(), "brother"]
                .into_iter()
                .chain(rep("son", depth))
                .collect(),
            Uncle { blood, generation } => rep("father", generation - 1)
                .chain([blood.id(), "uncle"])
                .collect(),
            Cousin {
                blood,
                generation,
                depth,
            } => rep("father", generation - 1)
                .chain([blood.id(), "uncle"])
                .chain(rep("son", depth))
                .collect(),
            Distant(k) => vec![k.entry().1],
        }
    }

    pub fn id(&self) -> String {
        self.id_tokens().join("_")
    }

    /// Canonical Arabic phrase as it appears in question templates.
    pub fn arabic(&self) -> String {
        use HeirClass::*;
        let sons = |n: u8| "ابن ".repeat(n as usize);
        match *self {
            Son { depth } => format!("{}ابن", sons(depth)),
            Daughter { depth } => {
                if depth == 0 {
                    "بنت".to_string()
                } else {
                    format!("بنت {}", sons(depth).trim_end())
                }
            }
            Father => "أب".into(),
            Grandfather { height } => format!("{}الأب", "أب ".repeat(height as usize)),
            Mother => "أم".into(),
            Grandmother {
                via_fathers,
                via_mothers,
            } => {
                // words read from the heir back to the deceased
                let mut words: Vec<&str> = std::iter::repeat_n("أم", via_mothers as usize)
                    .chain(std::iter::repeat_n("أب", via_fathers as usize))
                    .collect();
                let last = words.pop().unwrap_or("أم");
                let last = if last == "أم" {
                    "الأم"
                } else {
                    "الأب"
                };
                words.push(last);
                words.join(" ")
            }
            Husband => "زوج".into(),
            Wife => "زوجة".into(),
            Brother(b) => format!("أخ {}", sibling_qualifier(b, Sex::Male)),
            Sister(b) => format!("أخت {}", sibling_qualifier(b, Sex::Female)),
            Nephew { blood, depth } => {
                format!("{}أخ {}", sons(depth), sibling_qualifier(blood, Sex::Male))
            }
            Uncle { blood, generation } => uncle_phrase(blood, generation),
            Cousin {
                blood,
                generation,
                depth,
            } => format!("{}{}", sons(depth), uncle_phrase(blood, generation)),
            Distant(k) => k.entry().2.to_string(),
        }
    }

    /// Agnatic priority used for residuary selection and ladder blocking.
    /// Lower is stronger. `None` for non-agnates.
    pub(crate) fn agnatic_rank(&self) -> Option<AgnaticRank> {
        use HeirClass::*;
        let r = match *self {
            Son { depth } => AgnaticRank(0, depth, 0, 0),
            Father => AgnaticRank(1, 0, 0, 0),
            Grandfather { height } => AgnaticRank(2, height, 0, 0),
            Brother(b) if b != Blood::Maternal => AgnaticRank(3, 0, 0, b.rank()),
            Nephew { blood, depth } => AgnaticRank(3, 0, depth, blood.rank()),
            Uncle { blood, generation } => AgnaticRank(3, generation, 0, blood.rank()),
            Cousin {
                blood,
                generation,
                depth,
            } => AgnaticRank(3, generation, depth, blood.rank()),
            _ => return None,
        };
        Some(r)
    }
}

/// (tier, generation-or-depth, depth, blood)
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct AgnaticRank(pub u8, pub u8, pub u8, pub u8);

fn sibling_qualifier(b: Blood, sex: Sex) -> &'static str {
    match (b, sex) {
        (Blood::Full, Sex::Male) => "شقيق",
        (Blood::Full, Sex::Female) => "شقيقة",
        (Blood::Paternal, _) => "لأب",
        (Blood::Maternal, _) => "لأم",
    }
}

fn uncle_phrase(blood: Blood, generation: u8) -> String {
    let mut s = String::from("عم");
    if generation >= 2 {
        s.push(' ');
        s.push_str(&"أب ".repeat(generation as usize - 2));
        s.push_str("الأب");
    }
    match (blood, generation) {
        (Blood::Paternal, _) => s.push_str(" لأب"),
        (Blood::Full, 1) => s.push_str(" شقيق"),
        _ => {}
    }
    s
}

impl Ord for HeirClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key()
            .cmp(&other.sort_key())
            .then_with(|| self.id().cmp(&other.id()))
    }
}

impl PartialOrd for HeirClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HeirClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for HeirClass {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || TaxonomyError::UnknownId(s.to_string());
        if let Some(e) = DISTANT_TABLE.iter().find(|e| e.1 == s) {
            return Ok(HeirClass::Distant(e.0));
        }
        let toks: Vec<&str> = s.split('_').collect();
        let count = |w: &str| toks.iter().take_while(|t| **t == w).count();
        let n = toks.len();
        let small = |k: usize| u8::try_from(k).map_err(|_| unknown());

        let class = match toks.as_slice() {
            ["husband"] => HeirClass::Husband,
            ["wife"] => HeirClass::Wife,
            [b, "brother"] => HeirClass::Brother(Blood::from_id(b).ok_or_else(unknown)?),
            [b, "sister"] => HeirClass::Sister(Blood::from_id(b).ok_or_else(unknown)?),
            [b, "brother", rest @ ..] if rest.iter().all(|t| *t == "son") => HeirClass::Nephew {
                blood: Blood::from_id(b).ok_or_else(unknown)?,
                depth: small(rest.len())?,
            },
            _ if count("son") == n => HeirClass::Son {
                depth: small(n - 1)?,
            },
            _ if count("son") == n - 1 && toks[n - 1] == "daughter" => HeirClass::Daughter {
                depth: small(n - 1)?,
            },
            _ if count("father") == n => match n {
                1 => HeirClass::Father,
                _ => HeirClass::Grandfather {
                    height: small(n - 1)?,
                },
            },
            _ if toks[count("father")..].iter().all(|t| *t == "mother") => {
                let f = count("father");
                match (f, n - f) {
                    (0, 1) => HeirClass::Mother,
                    (f, m) => HeirClass::Grandmother {
                        via_fathers: small(f)?,
                        via_mothers: small(m)?,
                    },
                }
            }
            _ => {
                let f = count("father");
                let rest = &toks[f..];
                match rest {
                    [b, "uncle", sons @ ..] if sons.iter().all(|t| *t == "son") => {
                        let blood = Blood::from_id(b).ok_or_else(unknown)?;
                        let generation = small(f + 1)?;
                        if sons.is_empty() {
                            HeirClass::Uncle { blood, generation }
                        } else {
                            HeirClass::Cousin {
                                blood,
                                generation,
                                depth: small(sons.len())?,
                            }
                        }
                    }
                    _ => return Err(unknown()),
                }
            }
        };
        class.validate()?;
        Ok(class)
    }
}

impl Serialize for HeirClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.id())
    }
}

impl<'de> Deserialize<'de> for HeirClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeirParty {
    pub class: HeirClass,
    pub count: u32,
}

impl HeirParty {
    pub fn new(class: HeirClass, count: u32) -> Self {
        HeirParty { class, count }
    }

    pub fn one(class: HeirClass) -> Self {
        HeirParty { class, count: 1 }
    }

    /// Arabic token as used in scenarios: `أخ شقيق (2)` or `أم الأب`.
    pub fn arabic(&self) -> String {
        if self.count == 1 {
            self.class.arabic()
        } else {
            format!("{} ({})", self.class.arabic(), self.count)
        }
    }
}

impl fmt::Display for HeirParty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count == 1 {
            write!(f, "{}", self.class)
        } else {
            write!(f, "{} x{}", self.class, self.count)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("case has no heirs")]
    Empty,
    #[error("heir party {0} has count zero")]
    ZeroCount(HeirClass),
    #[error("conflicting parties: {0}")]
    ConflictingParties(String),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
}

/// A validated, canonically ordered set of heir parties.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CaseInput {
    parties: Vec<HeirParty>,
}

impl CaseInput {
    pub fn parties(&self) -> &[HeirParty] {
        &self.parties
    }

    pub fn get(&self, class: HeirClass) -> Option<&HeirParty> {
        self.parties.iter().find(|p| p.class == class)
    }

    pub fn count(&self, class: HeirClass) -> u32 {
        self.get(class).map_or(0, |p| p.count)
    }

    pub fn has(&self, class: HeirClass) -> bool {
        self.get(class).is_some()
    }

    pub fn classes(&self) -> impl Iterator<Item = HeirClass> + '_ {
        self.parties.iter().map(|p| p.class)
    }

    /// Arabic scenario: tokens joined by the spaced conjunction.
    pub fn arabic(&self) -> String {
        self.parties
            .iter()
            .map(HeirParty::arabic)
            .collect::<Vec<_>>()
            .join(" و ")
    }
}

impl Serialize for CaseInput {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.parties.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CaseInput {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let parties = Vec::<HeirParty>::deserialize(deserializer)?;
        normalize_case(parties).map_err(serde::de::Error::custom)
    }
}

/// Merge duplicate classes, validate party invariants and sort canonically.
pub fn normalize_case<I: IntoIterator<Item = HeirParty>>(
    parties: I,
) -> Result<CaseInput, CaseError> {
    let mut merged: BTreeMap<HeirClass, u32> = BTreeMap::new();
    for p in parties {
        p.class.validate()?;
        if p.count == 0 {
            return Err(CaseError::ZeroCount(p.class));
        }
        let slot = merged.entry(p.class).or_insert(0);
        *slot = slot.checked_add(p.count).ok_or_else(|| {
            CaseError::ConflictingParties(format!("count overflow for {}", p.class))
        })?;
    }
    if merged.is_empty() {
        return Err(CaseError::Empty);
    }
    if merged.contains_key(&HeirClass::Husband) && merged.contains_key(&HeirClass::Wife) {
        return Err(CaseError::ConflictingParties(
            "husband and wife together".into(),
        ));
    }
    for (class, count) in &merged {
        if class.is_unique_person() && *count > 1 {
            return Err(CaseError::ConflictingParties(format!(
                "more than one {class}"
            )));
        }
        if *class == HeirClass::Wife && *count > 4 {
            return Err(CaseError::ConflictingParties(format!(
                "{count} wives (at most 4)"
            )));
        }
    }
    Ok(CaseInput {
        parties: merged
            .into_iter()
            .map(|(class, count)| HeirParty { class, count })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use HeirClass::*;

    fn sample_classes() -> Vec<HeirClass> {
        let mut v = vec![
            Son { depth: 0 },
            Son { depth: 2 },
            Daughter { depth: 0 },
            Daughter { depth: 2 },
            Father,
            Grandfather { height: 1 },
            Grandfather { height: 2 },
            Mother,
            Grandmother {
                via_fathers: 1,
                via_mothers: 1,
            },
            Grandmother {
                via_fathers: 0,
                via_mothers: 3,
            },
            Grandmother {
                via_fathers: 1,
                via_mothers: 2,
            },
            Husband,
            Wife,
            Nephew {
                blood: Blood::Paternal,
                depth: 2,
            },
            Uncle {
                blood: Blood::Full,
                generation: 1,
            },
            Uncle {
                blood: Blood::Paternal,
                generation: 2,
            },
            Cousin {
                blood: Blood::Full,
                generation: 2,
                depth: 1,
            },
        ];
        for b in [Blood::Full, Blood::Paternal, Blood::Maternal] {
            v.push(Brother(b));
            v.push(Sister(b));
        }
        v.extend(DistantKin::all().map(Distant));
        v
    }

    #[test]
    fn ids_round_trip() {
        for c in sample_classes() {
            assert_eq!(c.id().parse::<HeirClass>().unwrap(), c, "{}", c.id());
        }
        assert_eq!(Daughter { depth: 2 }.id(), "son_son_daughter");
        assert_eq!(
            Grandmother {
                via_fathers: 1,
                via_mothers: 1
            }
            .id(),
            "father_mother"
        );
        assert_eq!(
            Uncle {
                blood: Blood::Paternal,
                generation: 2
            }
            .id(),
            "father_paternal_uncle"
        );
        assert!("maternal_uncle".parse::<HeirClass>().is_err());
        assert!("mother_father_mother".parse::<HeirClass>().is_err());
    }

    #[test]
    fn arabic_phrases() {
        assert_eq!(Daughter { depth: 2 }.arabic(), "بنت ابن ابن");
        assert_eq!(
            Grandmother {
                via_fathers: 1,
                via_mothers: 2
            }
            .arabic(),
            "أم أم الأب"
        );
        assert_eq!(
            Grandmother {
                via_fathers: 0,
                via_mothers: 3
            }
            .arabic(),
            "أم أم الأم"
        );
        assert_eq!(Grandfather { height: 2 }.arabic(), "أب أب الأب");
        assert_eq!(
            Uncle {
                blood: Blood::Paternal,
                generation: 2
            }
            .arabic(),
            "عم الأب لأب"
        );
        assert_eq!(
            Uncle {
                blood: Blood::Full,
                generation: 2
            }
            .arabic(),
            "عم الأب"
        );
        assert_eq!(
            Cousin {
                blood: Blood::Full,
                generation: 1,
                depth: 1
            }
            .arabic(),
            "ابن عم شقيق"
        );
        assert_eq!(
            Nephew {
                blood: Blood::Paternal,
                depth: 2
            }
            .arabic(),
            "ابن ابن أخ لأب"
        );
        assert_eq!(
            HeirParty::new(Brother(Blood::Full), 2).arabic(),
            "أخ شقيق (2)"
        );
    }

    #[test]
    fn class_attributes() {
        assert_eq!(Daughter { depth: 1 }.sex(), Sex::Female);
        assert_eq!(
            Cousin {
                blood: Blood::Full,
                generation: 1,
                depth: 1
            }
            .group(),
            ClassGroup::UncleLine
        );
        assert!(Brother(Blood::Paternal).is_agnate());
        assert!(!Brother(Blood::Maternal).is_agnate());
        assert_eq!(
            Grandmother {
                via_fathers: 1,
                via_mothers: 2
            }
            .lineage(),
            ["father", "mother", "mother"]
        );
    }

    #[test]
    fn merge_duplicates() {
        let fb = Brother(Blood::Full);
        let case = normalize_case([HeirParty::one(fb), HeirParty::one(fb)]).unwrap();
        assert_eq!(case.parties(), &[HeirParty::new(fb, 2)]);
    }

    #[test]
    fn invariant_violations() {
        assert!(matches!(
            normalize_case([HeirParty::new(Wife, 5)]),
            Err(CaseError::ConflictingParties(_))
        ));
        assert!(matches!(
            normalize_case([HeirParty::one(Husband), HeirParty::one(Wife)]),
            Err(CaseError::ConflictingParties(_))
        ));
        assert!(matches!(
            normalize_case([HeirParty::one(Father), HeirParty::one(Father)]),
            Err(CaseError::ConflictingParties(_))
        ));
        assert_eq!(
            normalize_case([HeirParty::new(Son { depth: 0 }, 0)]),
            Err(CaseError::ZeroCount(Son { depth: 0 }))
        );
        assert_eq!(normalize_case(Vec::new()), Err(CaseError::Empty));
    }

    #[test]
    fn canonical_order_is_group_then_degree() {
        let case = normalize_case([
            HeirParty::one(Cousin {
                blood: Blood::Full,
                generation: 1,
                depth: 1,
            }),
            HeirParty::one(Wife),
            HeirParty::one(Son { depth: 1 }),
            HeirParty::one(Brother(Blood::Paternal)),
            HeirParty::one(Brother(Blood::Full)),
            HeirParty::one(Mother),
        ])
        .unwrap();
        let ids: Vec<String> = case.classes().map(|c| c.id()).collect();
        assert_eq!(
            ids,
            [
                "son_son",
                "mother",
                "wife",
                "full_brother",
                "paternal_brother",
                "full_uncle_son"
            ]
        );
    }

    #[test]
    fn case_json_round_trip() {
        let json = r#"[{"class":"full_brother","count":2},{"class":"father_mother","count":1}]"#;
        let case: CaseInput = serde_json::from_str(json).unwrap();
        assert_eq!(case.count(Brother(Blood::Full)), 2);
        let back: CaseInput = serde_json::from_str(&serde_json::to_string(&case).unwrap()).unwrap();
        assert_eq!(back, case);
    }
}
