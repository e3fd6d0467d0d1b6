//! Deterministic faraid solver.
//!
//! Pipeline: [`normalize_case`] → [`apply_blocking`] → [`assign_fixed_shares`]
//! → [`assign_residuary`] → [`apply_awl`] or [`apply_radd`] as needed.
//! All arithmetic is exact; the final group shares of a solvable case sum
//! to exactly one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fraction::{lcm, Fraction, FractionError};
use crate::heirs::{
    normalize_case, AgnaticRank, Blood, CaseError, CaseInput, ClassGroup, HeirClass, HeirParty,
};
use crate::label::ShareLabel;
use crate::rules::Rule;

use HeirClass::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error(transparent)]
    Arithmetic(#[from] FractionError),
    #[error("target {0} does not appear in the case")]
    TargetAbsent(HeirClass),
    #[error("adjustment not applicable: {0}")]
    NotApplicable(&'static str),
}

pub type SolveResultOf<T> = Result<T, SolveError>;

/// Blocking status for every class in a case.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Blocking {
    entries: BTreeMap<HeirClass, Option<Rule>>,
}

impl Blocking {
    pub fn is_blocked(&self, class: HeirClass) -> bool {
        matches!(self.entries.get(&class), Some(Some(_)))
    }

    pub fn reason(&self, class: HeirClass) -> Option<Rule> {
        self.entries.get(&class).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (HeirClass, Option<Rule>)> + '_ {
        self.entries.iter().map(|(c, r)| (*c, *r))
    }
}

/// A share of the estate assigned to one party (group share, not per head).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareEntry {
    pub class: HeirClass,
    pub count: u32,
    pub share: Fraction,
    pub label: ShareLabel,
    pub rule: Rule,
}

impl ShareEntry {
    pub fn is_spouse(&self) -> bool {
        self.class.is_spouse()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResiduaryOutcome {
    /// Shares the grandfather rules turn into fixed entitlements.
    pub extra_fixed: Vec<ShareEntry>,
    /// Residue shares of the selected agnatic group (possibly zero).
    pub shares: Vec<ShareEntry>,
    /// Set when the husband/mother/grandfather/sister configuration applies.
    pub pooled: Option<(HeirClass, HeirClass)>,
    pub trace: Vec<Rule>,
}

impl ResiduaryOutcome {
    pub fn has_group(&self) -> bool {
        !self.shares.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "nominal", rename_all = "snake_case")]
pub enum VerdictKind {
    FixedShare(Fraction),
    Residuary,
    FixedPlusResiduary(Fraction),
    Blocked,
    Nothing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub party: HeirParty,
    pub verdict: VerdictKind,
    pub label: ShareLabel,
    pub group_share: Fraction,
    pub per_head_share: Fraction,
    pub blocking_reason: Option<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub allocations: Vec<Allocation>,
    pub base_denominator: i128,
    pub awl_applied: bool,
    pub radd_applied: bool,
    pub trace: Vec<Rule>,
}

impl SolveResult {
    pub fn allocation(&self, class: HeirClass) -> Option<&Allocation> {
        self.allocations.iter().find(|a| a.party.class == class)
    }

    pub fn total(&self) -> Result<Fraction, FractionError> {
        Fraction::checked_sum(self.allocations.iter().map(|a| a.group_share))
    }
}

/// The nominal answer an MCQ asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub nominal: Fraction,
    pub label: ShareLabel,
}

/// Facts derived from the case that several stages consult.
struct View<'a> {
    case: &'a CaseInput,
    blocked: &'a BTreeMap<HeirClass, Option<Rule>>,
}

impl View<'_> {
    fn active(&self, c: HeirClass) -> bool {
        self.case.has(c) && !matches!(self.blocked.get(&c), Some(Some(_)))
    }

    fn count(&self, c: HeirClass) -> u32 {
        self.case.count(c)
    }

    fn active_count(&self, c: HeirClass) -> u32 {
        if self.active(c) {
            self.count(c)
        } else {
            0
        }
    }

    fn min_son(&self) -> Option<u8> {
        self.case
            .classes()
            .filter_map(|c| match c {
                Son { depth } => Some(depth),
                _ => None,
            })
            .min()
    }

    fn has_descendant(&self) -> bool {
        self.case
            .classes()
            .any(|c| c.group() == ClassGroup::Descendant)
    }

    fn female_descendant_active(&self) -> bool {
        self.case
            .classes()
            .any(|c| matches!(c, Daughter { .. }) && self.active(c))
    }

    fn active_grandfather(&self) -> Option<HeirClass> {
        if self.case.has(Father) {
            return None;
        }
        self.case
            .classes()
            .filter(|c| matches!(c, Grandfather { .. }))
            .min_by_key(|c| c.degree())
    }

    fn siblings_total(&self) -> u32 {
        self.case
            .parties()
            .iter()
            .filter(|p| matches!(p.class, Brother(_) | Sister(_)))
            .map(|p| p.count)
            .sum()
    }

    /// Grandfather present alongside full or paternal siblings (shares with them).
    fn grandfather_shares(&self) -> bool {
        self.active_grandfather().is_some()
            && self.min_son().is_none()
            && [
                Brother(Blood::Full),
                Sister(Blood::Full),
                Brother(Blood::Paternal),
                Sister(Blood::Paternal),
            ]
            .into_iter()
            .any(|c| self.case.has(c))
    }

    /// Female descendant levels that sit above the nearest son, ascending.
    fn female_levels(&self) -> Vec<(HeirClass, u32)> {
        let min_son = self.min_son();
        let mut levels: Vec<(HeirClass, u32)> = self
            .case
            .parties()
            .iter()
            .filter_map(|p| match p.class {
                Daughter { depth } if min_son.is_none_or(|m| depth < m) => Some((p.class, p.count)),
                _ => None,
            })
            .collect();
        levels.sort_by_key(|(c, _)| c.degree());
        levels
    }

    fn spouse_share(&self) -> Option<Fraction> {
        let desc = self.has_descendant();
        if self.case.has(Husband) {
            Some(if desc {
                Fraction::of(1, 4)
            } else {
                Fraction::of(1, 2)
            })
        } else if self.case.has(Wife) {
            Some(if desc {
                Fraction::of(1, 8)
            } else {
                Fraction::of(1, 4)
            })
        } else {
            None
        }
    }
}

/// Label every party blocked or not, with the excluding rule.
pub fn apply_blocking(case: &CaseInput) -> Blocking {
    let mut blocked: BTreeMap<HeirClass, Option<Rule>> =
        case.classes().map(|c| (c, None)).collect();
    let block = |map: &mut BTreeMap<HeirClass, Option<Rule>>, c: HeirClass, r: Rule| {
        if let Some(slot) = map.get_mut(&c) {
            if slot.is_none() {
                *slot = Some(r);
            }
        }
    };

    // descendants
    let min_son = View {
        case,
        blocked: &blocked,
    }
    .min_son();
    for c in case.classes() {
        match c {
            Son { depth } | Daughter { depth } if min_son.is_some_and(|m| depth > m) => {
                block(&mut blocked, c, Rule::B1)
            }
            _ => {}
        }
    }
    let levels = View {
        case,
        blocked: &blocked,
    }
    .female_levels();
    let mut completed = 0u8; // 0 nothing taken, 1 a half, 2 two thirds
    for (class, count) in levels {
        completed = match completed {
            0 if count == 1 => 1,
            0 | 1 => 2,
            _ => {
                if min_son.is_none() {
                    block(&mut blocked, class, Rule::B2);
                }
                2
            }
        };
    }

    // ascendants
    let has_father = case.has(Father);
    let active_gf = View {
        case,
        blocked: &blocked,
    }
    .active_grandfather();
    for c in case.classes() {
        if let Grandfather { .. } = c {
            if has_father || active_gf.is_some_and(|g| g != c) {
                block(&mut blocked, c, Rule::B3);
            }
        }
    }
    for c in case.classes() {
        if let Grandmother { via_fathers, .. } = c {
            if case.has(Mother) {
                block(&mut blocked, c, Rule::B4);
            } else if has_father && via_fathers >= 1 {
                block(&mut blocked, c, Rule::B5);
            } else if let Some(Grandfather { height }) = active_gf {
                if via_fathers > height {
                    block(&mut blocked, c, Rule::B5);
                }
            }
        }
    }
    let nearest_gm = case
        .classes()
        .filter(|c| matches!(c, Grandmother { .. }) && blocked[c].is_none())
        .map(|c| c.degree())
        .min();
    for c in case.classes() {
        if matches!(c, Grandmother { .. }) && nearest_gm.is_some_and(|d| c.degree() > d) {
            block(&mut blocked, c, Rule::B6);
        }
    }

    // siblings
    let view = View {
        case,
        blocked: &blocked,
    };
    let has_desc = view.has_descendant();
    let male_desc = min_son.is_some();
    let fem_desc = view.female_descendant_active();
    let gf_shares = view.grandfather_shares();
    for b in [Blood::Maternal] {
        for c in [Brother(b), Sister(b)] {
            if has_desc || has_father || active_gf.is_some() {
                block(&mut blocked, c, Rule::B7);
            }
        }
    }
    for b in [Blood::Full, Blood::Paternal] {
        for c in [Brother(b), Sister(b)] {
            if male_desc || has_father {
                block(&mut blocked, c, Rule::B8);
            }
        }
    }
    let full_brother = case.has(Brother(Blood::Full)) && blocked[&Brother(Blood::Full)].is_none();
    let full_sister_with_daughters = case.has(Sister(Blood::Full))
        && blocked[&Sister(Blood::Full)].is_none()
        && !full_brother
        && fem_desc
        && !gf_shares;
    for c in [Brother(Blood::Paternal), Sister(Blood::Paternal)] {
        if full_brother || full_sister_with_daughters {
            block(&mut blocked, c, Rule::B9);
        }
    }
    if !gf_shares && !case.has(Brother(Blood::Paternal)) && case.count(Sister(Blood::Full)) >= 2 {
        block(&mut blocked, Sister(Blood::Paternal), Rule::B10);
    }

    // agnatic ladder: nephews, uncles, cousins
    let view = View {
        case,
        blocked: &blocked,
    };
    let mut ranks: Vec<AgnaticRank> = Vec::new();
    for c in case.classes() {
        let counts = match c {
            Son { .. } | Father | Nephew { .. } | Uncle { .. } | Cousin { .. } => true,
            Grandfather { .. } => Some(c) == active_gf,
            Brother(b) => b != Blood::Maternal && view.active(c),
            _ => false,
        };
        if counts {
            ranks.extend(c.agnatic_rank());
        }
    }
    let paternal_sister_with_daughters = view.active(Sister(Blood::Paternal))
        && fem_desc
        && !view.active(Brother(Blood::Paternal))
        && !gf_shares;
    if full_sister_with_daughters {
        ranks.push(AgnaticRank(3, 0, 0, 0));
    }
    if paternal_sister_with_daughters {
        ranks.push(AgnaticRank(3, 0, 0, 1));
    }
    let best = ranks.iter().min().copied();
    for c in case.classes() {
        let rule = match c {
            Nephew { .. } => Rule::B11,
            Uncle { .. } | Cousin { .. } => Rule::B12,
            _ => continue,
        };
        if let (Some(best), Some(own)) = (best, c.agnatic_rank()) {
            if best < own {
                block(&mut blocked, c, rule);
            }
        }
    }

    // distant kindred
    let has_primary = case
        .classes()
        .any(|c| c.group() != ClassGroup::DistantKindred && !c.is_spouse());
    if has_primary {
        for c in case.classes() {
            if c.group() == ClassGroup::DistantKindred {
                block(&mut blocked, c, Rule::B13);
            }
        }
    }

    Blocking { entries: blocked }
}

fn entry(
    case: &CaseInput,
    class: HeirClass,
    share: Fraction,
    label: ShareLabel,
    rule: Rule,
) -> ShareEntry {
    ShareEntry {
        class,
        count: case.count(class),
        share,
        label,
        rule,
    }
}

fn half_or_two_thirds(count: u32) -> (Fraction, ShareLabel) {
    if count == 1 {
        (Fraction::of(1, 2), ShareLabel::Half)
    } else {
        (Fraction::of(2, 3), ShareLabel::TwoThirds)
    }
}

/// Fixed (Quranic) shares for every unblocked sharer.
pub fn assign_fixed_shares(
    case: &CaseInput,
    blocking: &Blocking,
) -> SolveResultOf<Vec<ShareEntry>> {
    let view = View {
        case,
        blocked: &blocking.entries,
    };
    let mut out = Vec::new();
    let has_desc = view.has_descendant();
    let male_desc = view.min_son().is_some();
    let fem_desc = view.female_descendant_active();
    let gf_shares = view.grandfather_shares();
    let sixth = Fraction::of(1, 6);

    if let Some(share) = view.spouse_share() {
        let (class, rule) = if case.has(Husband) {
            (Husband, Rule::F1)
        } else {
            (Wife, Rule::F2)
        };
        out.push(entry(
            case,
            class,
            share,
            ShareLabel::from_fraction(share).expect("spouse share"),
            rule,
        ));
    }

    if case.has(Father) {
        if male_desc {
            out.push(entry(case, Father, sixth, ShareLabel::Sixth, Rule::F3));
        } else if fem_desc {
            out.push(entry(
                case,
                Father,
                sixth,
                ShareLabel::SixthPlusResidue,
                Rule::F3,
            ));
        }
    } else if let Some(gf) = view.active_grandfather() {
        if male_desc {
            out.push(entry(case, gf, sixth, ShareLabel::Sixth, Rule::F14));
        } else if fem_desc && !gf_shares {
            out.push(entry(
                case,
                gf,
                sixth,
                ShareLabel::SixthPlusResidue,
                Rule::F14,
            ));
        }
    }

    if case.has(Mother) {
        if has_desc || view.siblings_total() >= 2 {
            out.push(entry(case, Mother, sixth, ShareLabel::Sixth, Rule::F4));
        } else if let (true, Some(spouse)) = (case.has(Father), view.spouse_share()) {
            let share = Fraction::ONE.checked_sub(spouse)?.checked_div_int(3)?;
            out.push(entry(
                case,
                Mother,
                share,
                ShareLabel::ThirdOfRemainder,
                Rule::F15,
            ));
        } else {
            out.push(entry(
                case,
                Mother,
                Fraction::of(1, 3),
                ShareLabel::Third,
                Rule::F4,
            ));
        }
    }

    let grandmothers: Vec<HeirClass> = case
        .classes()
        .filter(|c| matches!(c, Grandmother { .. }) && view.active(*c))
        .collect();
    for gm in &grandmothers {
        let share = sixth.checked_div_int(grandmothers.len() as i128)?;
        out.push(entry(case, *gm, share, ShareLabel::Sixth, Rule::F5));
    }

    let mut completed = 0u8;
    for (class, count) in view.female_levels() {
        let rule = if class == (Daughter { depth: 0 }) {
            Rule::F6
        } else {
            Rule::F7
        };
        completed = match completed {
            0 => {
                let (share, label) = half_or_two_thirds(count);
                out.push(entry(case, class, share, label, rule));
                if count == 1 {
                    1
                } else {
                    2
                }
            }
            1 => {
                out.push(entry(case, class, sixth, ShareLabel::Sixth, Rule::F7));
                2
            }
            _ => 2,
        };
    }

    let full_sister = Sister(Blood::Full);
    let full_sister_fixed =
        view.active(full_sister) && !view.active(Brother(Blood::Full)) && !fem_desc && !gf_shares;
    if full_sister_fixed {
        let (share, label) = half_or_two_thirds(view.count(full_sister));
        out.push(entry(case, full_sister, share, label, Rule::F9));
    }
    let pat_sister = Sister(Blood::Paternal);
    if view.active(pat_sister) && !view.active(Brother(Blood::Paternal)) && !fem_desc && !gf_shares
    {
        if full_sister_fixed && view.count(full_sister) == 1 {
            out.push(entry(case, pat_sister, sixth, ShareLabel::Sixth, Rule::F10));
        } else if !view.active(full_sister) {
            let (share, label) = half_or_two_thirds(view.count(pat_sister));
            out.push(entry(case, pat_sister, share, label, Rule::F10));
        }
    }

    let maternal = [Brother(Blood::Maternal), Sister(Blood::Maternal)];
    let maternal_heads: u32 = maternal.iter().map(|c| view.active_count(*c)).sum();
    if maternal_heads > 0 {
        let (pool, label) = if maternal_heads == 1 {
            (sixth, ShareLabel::Sixth)
        } else {
            (Fraction::of(1, 3), ShareLabel::Third)
        };
        for c in maternal {
            let n = view.active_count(c);
            if n > 0 {
                let share = pool.checked_mul(Fraction::new(n as i128, maternal_heads as i128)?)?;
                out.push(entry(case, c, share, label, Rule::F13));
            }
        }
    }

    Ok(out)
}

/// Split `amount` among members weighted 2 per male head and 1 per female head.
fn split_by_units(
    case: &CaseInput,
    members: &[HeirClass],
    amount: Fraction,
    label: ShareLabel,
    rule: Rule,
) -> SolveResultOf<Vec<ShareEntry>> {
    let units = |c: &HeirClass| -> i128 {
        let per = if c.sex() == crate::heirs::Sex::Male {
            2
        } else {
            1
        };
        per * case.count(*c) as i128
    };
    let total: i128 = members.iter().map(units).sum();
    members
        .iter()
        .map(|c| {
            let share = if total == 0 || !amount.is_positive() {
                Fraction::ZERO
            } else {
                amount.checked_mul(Fraction::new(units(c), total)?)?
            };
            Ok(entry(case, *c, share, label, rule))
        })
        .collect()
}

/// Residue assignment to the highest-priority agnatic group, including the
/// grandfather-with-siblings computation.
pub fn assign_residuary(
    case: &CaseInput,
    blocking: &Blocking,
    fixed: &[ShareEntry],
) -> SolveResultOf<ResiduaryOutcome> {
    let view = View {
        case,
        blocked: &blocking.entries,
    };
    let fixed_total = Fraction::checked_sum(fixed.iter().map(|e| e.share))?;
    let residue = Fraction::ONE.checked_sub(fixed_total)?;
    let residue_pos = if residue.is_positive() {
        residue
    } else {
        Fraction::ZERO
    };

    if view.grandfather_shares() {
        return grandfather_with_siblings(&view, fixed_total, residue);
    }

    let mut out = ResiduaryOutcome::default();
    let fem_desc = view.female_descendant_active();
    let fixed_classes: Vec<HeirClass> = fixed.iter().map(|e| e.class).collect();
    let fb = Brother(Blood::Full);
    let fs = Sister(Blood::Full);
    let pb = Brother(Blood::Paternal);
    let ps = Sister(Blood::Paternal);

    let (members, rule): (Vec<HeirClass>, Rule) = if let Some(m) = view.min_son() {
        let mut members = vec![Son { depth: m }];
        let mut rule = Rule::T1;
        for c in case.classes() {
            if let Daughter { depth } = c {
                if depth <= m && view.active(c) && !fixed_classes.contains(&c) {
                    members.push(c);
                    rule = Rule::F8;
                }
            }
        }
        (members, rule)
    } else if case.has(Father) {
        (vec![Father], Rule::T1)
    } else if let Some(gf) = view.active_grandfather() {
        (vec![gf], Rule::T1)
    } else if view.active(fb) {
        let mut m = vec![fb];
        if view.active(fs) {
            m.push(fs);
            (m, Rule::F11)
        } else {
            (m, Rule::T1)
        }
    } else if view.active(fs) && fem_desc {
        (vec![fs], Rule::F12)
    } else if view.active(pb) {
        let mut m = vec![pb];
        if view.active(ps) {
            m.push(ps);
            (m, Rule::F11)
        } else {
            (m, Rule::T1)
        }
    } else if view.active(ps) && fem_desc {
        (vec![ps], Rule::F12)
    } else {
        let best = case
            .classes()
            .filter(|c| {
                matches!(c, Nephew { .. } | Uncle { .. } | Cousin { .. }) && view.active(*c)
            })
            .min_by_key(|c| c.agnatic_rank());
        match best {
            Some(c) => (vec![c], Rule::T1),
            None => (Vec::new(), Rule::T1),
        }
    };

    if members.is_empty() {
        return Ok(out);
    }
    out.trace.push(rule);
    if rule != Rule::T1 {
        out.trace.push(Rule::T1);
    }
    if !residue_pos.is_positive() {
        out.trace.push(Rule::T2);
    }
    out.shares = split_by_units(case, &members, residue_pos, ShareLabel::Residue, rule)?;
    Ok(out)
}

fn grandfather_with_siblings(
    view: &View<'_>,
    fixed_total: Fraction,
    residue: Fraction,
) -> SolveResultOf<ResiduaryOutcome> {
    let case = view.case;
    let gf = view.active_grandfather().expect("grandfather present");
    let mut out = ResiduaryOutcome::default();
    let sixth = Fraction::of(1, 6);
    let fb = Brother(Blood::Full);
    let fs = Sister(Blood::Full);
    let pb = Brother(Blood::Paternal);
    let ps = Sister(Blood::Paternal);

    let active: Vec<HeirClass> = case.classes().filter(|c| view.active(*c)).collect();
    let lone_sister = [fs, ps]
        .into_iter()
        .find(|s| active.contains(s) && case.count(*s) == 1);
    if let Some(sister) = lone_sister {
        let mut expected = vec![Husband, Mother, gf, sister];
        expected.sort();
        let mut got = active.clone();
        got.sort();
        if got == expected {
            out.trace.extend([Rule::G2]);
            out.extra_fixed
                .push(entry(case, gf, sixth, ShareLabel::Sixth, Rule::G2));
            out.extra_fixed.push(entry(
                case,
                sister,
                Fraction::of(1, 2),
                ShareLabel::Half,
                Rule::G2,
            ));
            out.pooled = Some((gf, sister));
            return Ok(out);
        }
    }

    out.trace.push(Rule::G1);
    let siblings_active: Vec<HeirClass> = [fb, fs, pb, ps]
        .into_iter()
        .filter(|c| view.active(*c))
        .collect();

    if residue <= sixth {
        out.extra_fixed
            .push(entry(case, gf, sixth, ShareLabel::Sixth, Rule::G1));
        out.shares = split_by_units(
            case,
            &siblings_active,
            Fraction::ZERO,
            ShareLabel::Residue,
            Rule::G1,
        )?;
        out.trace.push(Rule::T2);
        return Ok(out);
    }

    // paternal siblings count against the grandfather even when a full brother excludes them
    let units: i128 = 2
        + [fb, pb]
            .iter()
            .map(|c| 2 * case.count(*c) as i128)
            .sum::<i128>()
        + [fs, ps]
            .iter()
            .map(|c| case.count(*c) as i128)
            .sum::<i128>();
    let sharing = residue.checked_mul(Fraction::new(2, units)?)?;
    let mut options = vec![(sharing, ShareLabel::Residue)];
    if fixed_total.is_zero() {
        options.push((Fraction::of(1, 3), ShareLabel::Third));
    } else {
        options.push((residue.checked_div_int(3)?, ShareLabel::ThirdOfRemainder));
        options.push((sixth, ShareLabel::Sixth));
    }
    let (gf_share, gf_label) =
        options
            .iter()
            .copied()
            .fold(options[0], |best, o| if o.0 > best.0 { o } else { best });
    if gf_label == ShareLabel::Residue {
        out.shares
            .push(entry(case, gf, gf_share, ShareLabel::Residue, Rule::G1));
    } else {
        out.extra_fixed
            .push(entry(case, gf, gf_share, gf_label, Rule::G1));
    }

    let for_siblings = residue.checked_sub(gf_share)?;
    let full_present = case.has(fb) || case.has(fs);
    let pat_present = case.has(pb) || case.has(ps);
    if full_present && pat_present && !case.has(fb) {
        // full sisters take up to their fixed portion, paternal siblings the rest
        let (fard, label) = half_or_two_thirds(case.count(fs));
        let take = fard.min(for_siblings);
        out.shares.push(entry(case, fs, take, label, Rule::G1));
        let rest = for_siblings.checked_sub(take)?;
        let pats: Vec<HeirClass> = [pb, ps].into_iter().filter(|c| view.active(*c)).collect();
        out.shares.extend(split_by_units(
            case,
            &pats,
            rest,
            ShareLabel::Residue,
            Rule::G1,
        )?);
        if !rest.is_positive() {
            out.trace.push(Rule::T2);
        }
    } else {
        out.shares.extend(split_by_units(
            case,
            &siblings_active,
            for_siblings,
            ShareLabel::Residue,
            Rule::G1,
        )?);
    }
    Ok(out)
}

/// Proportional reduction when fixed shares over-subscribe the estate.
pub fn apply_awl(fixed: &[ShareEntry]) -> SolveResultOf<Vec<ShareEntry>> {
    let total = Fraction::checked_sum(fixed.iter().map(|e| e.share))?;
    if total <= Fraction::ONE {
        return Err(SolveError::NotApplicable("shares do not exceed the estate"));
    }
    fixed
        .iter()
        .map(|e| {
            Ok(ShareEntry {
                share: e.share.checked_div(total)?,
                ..e.clone()
            })
        })
        .collect()
}

/// Return of surplus to non-spouse sharers when no residuary heir exists.
/// Spouse shares are untouched unless the spouse is the only sharer.
pub fn apply_radd(fixed: &[ShareEntry], residuary_present: bool) -> SolveResultOf<Vec<ShareEntry>> {
    if residuary_present {
        return Err(SolveError::NotApplicable(
            "a residuary heir takes the surplus",
        ));
    }
    let total = Fraction::checked_sum(fixed.iter().map(|e| e.share))?;
    if total >= Fraction::ONE {
        return Err(SolveError::NotApplicable("no surplus to return"));
    }
    let spouse_total =
        Fraction::checked_sum(fixed.iter().filter(|e| e.is_spouse()).map(|e| e.share))?;
    let others_total = total.checked_sub(spouse_total)?;
    let scale_spouse = others_total.is_zero();
    let factor = if scale_spouse {
        Fraction::ONE.checked_div(spouse_total)?
    } else {
        Fraction::ONE
            .checked_sub(spouse_total)?
            .checked_div(others_total)?
    };
    fixed
        .iter()
        .map(|e| {
            let share = if e.is_spouse() == scale_spouse {
                e.share.checked_mul(factor)?
            } else {
                e.share
            };
            Ok(ShareEntry { share, ..e.clone() })
        })
        .collect()
}

fn push_unique(trace: &mut Vec<Rule>, r: Rule) {
    if !trace.contains(&r) {
        trace.push(r);
    }
}

/// Solve a validated case.
pub fn solve(case: &CaseInput) -> SolveResultOf<SolveResult> {
    let has_non_spouse_primary = case
        .classes()
        .any(|c| c.group() != ClassGroup::DistantKindred && !c.is_spouse());
    if !has_non_spouse_primary
        && case
            .classes()
            .any(|c| c.group() == ClassGroup::DistantKindred)
    {
        return Err(SolveError::UnsupportedCase(
            "distant kindred without a sharer or residuary".into(),
        ));
    }

    let blocking = apply_blocking(case);
    let mut trace = Vec::new();
    for p in case.parties() {
        if let Some(r) = blocking.reason(p.class) {
            push_unique(&mut trace, r);
        }
    }

    let fixed = assign_fixed_shares(case, &blocking)?;
    for e in &fixed {
        push_unique(&mut trace, e.rule);
    }
    let mut residuary = assign_residuary(case, &blocking, &fixed)?;
    for r in &residuary.trace {
        push_unique(&mut trace, *r);
    }

    let mut all_fixed: Vec<ShareEntry> = fixed
        .iter()
        .cloned()
        .chain(residuary.extra_fixed.iter().cloned())
        .collect();
    let total = Fraction::checked_sum(all_fixed.iter().map(|e| e.share))?;
    let mut awl_applied = false;
    let mut radd_applied = false;

    if total > Fraction::ONE {
        all_fixed = apply_awl(&all_fixed)?;
        awl_applied = true;
        push_unique(&mut trace, Rule::A1);
        for s in &mut residuary.shares {
            if s.share.is_positive() {
                push_unique(&mut trace, Rule::T2);
            }
            s.share = Fraction::ZERO;
        }
        if let Some((gf, sister)) = residuary.pooled {
            let pooled = Fraction::checked_sum(
                all_fixed
                    .iter()
                    .filter(|e| e.class == gf || e.class == sister)
                    .map(|e| e.share),
            )?;
            for e in &mut all_fixed {
                if e.class == gf {
                    e.share = pooled.checked_mul(Fraction::of(2, 3))?;
                } else if e.class == sister {
                    e.share = pooled.checked_mul(Fraction::of(1, 3))?;
                }
            }
        }
    } else if total < Fraction::ONE && !residuary.has_group() {
        if all_fixed.is_empty() {
            return Err(SolveError::UnsupportedCase(
                "no sharer or residuary heir".into(),
            ));
        }
        let spouse_only = all_fixed.iter().all(ShareEntry::is_spouse);
        all_fixed = apply_radd(&all_fixed, false)?;
        radd_applied = true;
        push_unique(&mut trace, if spouse_only { Rule::A3 } else { Rule::A2 });
    }

    let mut allocations = Vec::with_capacity(case.parties().len());
    let mut base = 1i128;
    for party in case.parties() {
        let class = party.class;
        if let Some(reason) = blocking.reason(class) {
            allocations.push(Allocation {
                party: *party,
                verdict: VerdictKind::Blocked,
                label: ShareLabel::Blocked,
                group_share: Fraction::ZERO,
                per_head_share: Fraction::ZERO,
                blocking_reason: Some(reason),
            });
            continue;
        }
        let fixed_entry = all_fixed.iter().find(|e| e.class == class);
        let nominal = fixed
            .iter()
            .chain(residuary.extra_fixed.iter())
            .find(|e| e.class == class)
            .map(|e| e.share);
        let resid_entry = residuary.shares.iter().find(|e| e.class == class);
        let resid_share = resid_entry.map_or(Fraction::ZERO, |e| e.share);
        let fixed_share = fixed_entry.map_or(Fraction::ZERO, |e| e.share);
        let group_share = fixed_share.checked_add(resid_share)?;

        let (verdict, label) = match (fixed_entry, resid_entry) {
            (Some(f), Some(_)) if resid_share.is_positive() => (
                VerdictKind::FixedPlusResiduary(nominal.unwrap_or(f.share)),
                ShareLabel::SixthPlusResidue,
            ),
            (Some(f), _) => {
                let label = if f.label == ShareLabel::SixthPlusResidue {
                    ShareLabel::Sixth
                } else {
                    f.label
                };
                (VerdictKind::FixedShare(nominal.unwrap_or(f.share)), label)
            }
            (None, Some(r)) if resid_share.is_positive() => {
                let label = if r.label == ShareLabel::Residue && group_share == Fraction::ONE {
                    ShareLabel::Whole
                } else {
                    r.label
                };
                (VerdictKind::Residuary, label)
            }
            _ => (VerdictKind::Nothing, ShareLabel::Nothing),
        };
        if group_share.is_positive() {
            base = lcm(base, group_share.denom()).ok_or(FractionError::Overflow("lcm"))?;
        }
        allocations.push(Allocation {
            party: *party,
            verdict,
            label,
            group_share,
            per_head_share: group_share.checked_div_int(party.count as i128)?,
            blocking_reason: None,
        });
    }

    Ok(SolveResult {
        allocations,
        base_denominator: base,
        awl_applied,
        radd_applied,
        trace,
    })
}

/// Normalize then solve an unordered party list.
pub fn solve_parties<I: IntoIterator<Item = HeirParty>>(parties: I) -> SolveResultOf<SolveResult> {
    solve(&normalize_case(parties)?)
}

/// The nominal verdict for `target` that MCQ options are phrased against.
pub fn verdict_for(result: &SolveResult, target: HeirClass) -> SolveResultOf<Verdict> {
    let a = result
        .allocation(target)
        .ok_or(SolveError::TargetAbsent(target))?;
    let nominal = match a.verdict {
        VerdictKind::FixedShare(f) | VerdictKind::FixedPlusResiduary(f) => f,
        VerdictKind::Residuary => a.group_share,
        VerdictKind::Blocked | VerdictKind::Nothing => Fraction::ZERO,
    };
    Ok(Verdict {
        kind: a.verdict,
        nominal,
        label: a.label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(class: HeirClass, count: u32) -> HeirParty {
        HeirParty::new(class, count)
    }

    fn share(r: &SolveResult, c: HeirClass) -> Fraction {
        r.allocation(c).unwrap().group_share
    }

    const FB: HeirClass = Brother(Blood::Full);
    const FS: HeirClass = Sister(Blood::Full);
    const PB: HeirClass = Brother(Blood::Paternal);
    const PS: HeirClass = Sister(Blood::Paternal);
    const MB: HeirClass = Brother(Blood::Maternal);
    const MS: HeirClass = Sister(Blood::Maternal);
    const SON: HeirClass = Son { depth: 0 };
    const DAU: HeirClass = Daughter { depth: 0 };

    #[test]
    fn sole_son_takes_whole() {
        let r = solve_parties([p(SON, 1)]).unwrap();
        let a = r.allocation(SON).unwrap();
        assert_eq!(a.verdict, VerdictKind::Residuary);
        assert_eq!(a.label, ShareLabel::Whole);
        assert_eq!(a.group_share, Fraction::ONE);
        assert!(!r.awl_applied && !r.radd_applied);
    }

    #[test]
    fn nearer_son_blocks_grandson() {
        let case = normalize_case([p(SON, 1), p(Son { depth: 1 }, 1)]).unwrap();
        let b = apply_blocking(&case);
        assert_eq!(b.reason(Son { depth: 1 }), Some(Rule::B1));
        assert!(!b.is_blocked(SON));
    }

    #[test]
    fn husband_alone_gets_radd_to_spouse() {
        let case = normalize_case([p(Husband, 1)]).unwrap();
        let fixed = assign_fixed_shares(&case, &apply_blocking(&case)).unwrap();
        assert_eq!(fixed[0].share, Fraction::of(1, 2));
        let r = solve(&case).unwrap();
        assert_eq!(share(&r, Husband), Fraction::ONE);
        assert!(r.radd_applied);
        assert_eq!(verdict_for(&r, Husband).unwrap().label, ShareLabel::Half);
        assert!(r.trace.contains(&Rule::A3));
    }

    #[test]
    fn awl_husband_two_sisters() {
        let r = solve_parties([p(Husband, 1), p(FS, 2)]).unwrap();
        assert!(r.awl_applied);
        assert_eq!(share(&r, Husband), Fraction::of(3, 7));
        assert_eq!(share(&r, FS), Fraction::of(4, 7));
        assert_eq!(r.base_denominator, 7);
    }

    #[test]
    fn awl_not_applicable_at_one() {
        let entries = vec![ShareEntry {
            class: SON,
            count: 1,
            share: Fraction::ONE,
            label: ShareLabel::Whole,
            rule: Rule::T1,
        }];
        assert!(matches!(
            apply_awl(&entries),
            Err(SolveError::NotApplicable(_))
        ));
        assert!(matches!(
            apply_radd(&entries, false),
            Err(SolveError::NotApplicable(_))
        ));
        assert!(matches!(
            apply_radd(&entries, true),
            Err(SolveError::NotApplicable(_))
        ));
    }

    #[test]
    fn radd_examples() {
        let r = solve_parties([p(DAU, 1), p(Mother, 1)]).unwrap();
        assert!(r.radd_applied);
        assert_eq!(share(&r, DAU), Fraction::of(3, 4));
        assert_eq!(share(&r, Mother), Fraction::of(1, 4));

        let r = solve_parties([p(Mother, 1)]).unwrap();
        assert_eq!(share(&r, Mother), Fraction::ONE);
        assert_eq!(verdict_for(&r, Mother).unwrap().label, ShareLabel::Third);

        let r = solve_parties([p(Wife, 1), p(MB, 1)]).unwrap();
        assert_eq!(share(&r, Wife), Fraction::of(1, 4));
        assert_eq!(share(&r, MB), Fraction::of(3, 4));
    }

    #[test]
    fn mixed_children_split_two_to_one() {
        let r = solve_parties([p(SON, 1), p(DAU, 2), p(Wife, 1)]).unwrap();
        assert_eq!(share(&r, Wife), Fraction::of(1, 8));
        assert_eq!(share(&r, SON), Fraction::of(7, 16));
        assert_eq!(share(&r, DAU), Fraction::of(7, 16));
        assert_eq!(
            r.allocation(DAU).unwrap().per_head_share,
            Fraction::of(7, 32)
        );
    }

    #[test]
    fn umariyya_mother_takes_third_of_remainder() {
        let r = solve_parties([p(Wife, 1), p(Father, 1), p(Mother, 1)]).unwrap();
        assert_eq!(share(&r, Mother), Fraction::of(1, 4));
        assert_eq!(share(&r, Father), Fraction::of(1, 2));
        assert_eq!(
            verdict_for(&r, Mother).unwrap().label,
            ShareLabel::ThirdOfRemainder
        );
        assert!(r.trace.contains(&Rule::F15));
    }

    #[test]
    fn father_with_daughter_takes_sixth_plus_residue() {
        let r = solve_parties([p(DAU, 1), p(Father, 1)]).unwrap();
        assert_eq!(share(&r, Father), Fraction::of(1, 2));
        let v = verdict_for(&r, Father).unwrap();
        assert_eq!(v.kind, VerdictKind::FixedPlusResiduary(Fraction::of(1, 6)));
        assert_eq!(v.label, ShareLabel::SixthPlusResidue);
    }

    #[test]
    fn sons_daughter_completion_and_blocking() {
        let sd = Daughter { depth: 1 };
        let r = solve_parties([p(DAU, 1), p(sd, 2), p(FB, 1)]).unwrap();
        assert_eq!(share(&r, sd), Fraction::of(1, 6));
        assert_eq!(verdict_for(&r, sd).unwrap().label, ShareLabel::Sixth);
        assert_eq!(share(&r, FB), Fraction::of(1, 3));

        let r = solve_parties([p(DAU, 2), p(sd, 1), p(FB, 1)]).unwrap();
        assert_eq!(r.allocation(sd).unwrap().blocking_reason, Some(Rule::B2));

        // a lower grandson rescues her
        let r = solve_parties([p(DAU, 2), p(sd, 1), p(Son { depth: 2 }, 1)]).unwrap();
        assert_eq!(share(&r, sd), Fraction::of(1, 9));
        assert_eq!(share(&r, Son { depth: 2 }), Fraction::of(2, 9));
    }

    #[test]
    fn sisters_with_daughters_become_residuary() {
        let r = solve_parties([p(DAU, 1), p(FS, 1), p(PB, 1)]).unwrap();
        assert_eq!(share(&r, FS), Fraction::of(1, 2));
        assert_eq!(r.allocation(FS).unwrap().verdict, VerdictKind::Residuary);
        assert_eq!(r.allocation(PB).unwrap().blocking_reason, Some(Rule::B9));
    }

    #[test]
    fn paternal_sister_completion() {
        let r = solve_parties([
            p(FS, 1),
            p(PS, 3),
            p(
                Uncle {
                    blood: Blood::Full,
                    generation: 1,
                },
                1,
            ),
        ])
        .unwrap();
        assert_eq!(share(&r, PS), Fraction::of(1, 6));
        assert_eq!(
            share(
                &r,
                Uncle {
                    blood: Blood::Full,
                    generation: 1
                }
            ),
            Fraction::of(1, 3)
        );
        let r = solve_parties([p(FS, 2), p(PS, 1), p(Mother, 1)]).unwrap();
        assert_eq!(r.allocation(PS).unwrap().blocking_reason, Some(Rule::B10));
    }

    #[test]
    fn maternal_siblings_share_equally() {
        let r = solve_parties([p(MB, 1), p(MS, 2), p(FB, 1)]).unwrap();
        assert_eq!(share(&r, MB), Fraction::of(1, 9));
        assert_eq!(share(&r, MS), Fraction::of(2, 9));
        assert_eq!(verdict_for(&r, MS).unwrap().label, ShareLabel::Third);
    }

    #[test]
    fn mushtaraka_full_brothers_get_nothing() {
        let r = solve_parties([p(Husband, 1), p(Mother, 1), p(MB, 2), p(FB, 1)]).unwrap();
        assert_eq!(r.allocation(FB).unwrap().verdict, VerdictKind::Nothing);
        assert_eq!(r.total().unwrap(), Fraction::ONE);
    }

    #[test]
    fn grandfather_best_of_three() {
        let gf = Grandfather { height: 1 };
        // no sharers: 1/3 beats sharing with five brothers
        let r = solve_parties([p(gf, 1), p(FB, 5)]).unwrap();
        assert_eq!(share(&r, gf), Fraction::of(1, 3));
        assert_eq!(verdict_for(&r, gf).unwrap().label, ShareLabel::Third);
        // one brother: sharing gives 1/2
        let r = solve_parties([p(gf, 1), p(FB, 1)]).unwrap();
        assert_eq!(share(&r, gf), Fraction::of(1, 2));
        assert_eq!(verdict_for(&r, gf).unwrap().label, ShareLabel::Residue);
    }

    #[test]
    fn grandfather_counts_paternal_brother_against_himself() {
        let gf = Grandfather { height: 1 };
        let r = solve_parties([p(gf, 1), p(FB, 1), p(PB, 1)]).unwrap();
        assert_eq!(share(&r, gf), Fraction::of(1, 3));
        assert_eq!(share(&r, FB), Fraction::of(2, 3));
        assert_eq!(r.allocation(PB).unwrap().verdict, VerdictKind::Blocked);
    }

    #[test]
    fn akdariyya() {
        let gf = Grandfather { height: 1 };
        let r = solve_parties([p(Husband, 1), p(Mother, 1), p(gf, 1), p(FS, 1)]).unwrap();
        assert!(r.awl_applied);
        assert_eq!(share(&r, Husband), Fraction::of(1, 3));
        assert_eq!(share(&r, Mother), Fraction::of(2, 9));
        assert_eq!(share(&r, gf), Fraction::of(8, 27));
        assert_eq!(share(&r, FS), Fraction::of(4, 27));
        assert_eq!(r.base_denominator, 27);
    }

    #[test]
    fn distant_kindred() {
        let dk = Distant(crate::heirs::DistantKin::MaternalUncle);
        assert!(matches!(
            solve_parties([p(dk, 1)]),
            Err(SolveError::UnsupportedCase(_))
        ));
        assert!(matches!(
            solve_parties([p(Wife, 1), p(dk, 1)]),
            Err(SolveError::UnsupportedCase(_))
        ));
        let r = solve_parties([p(dk, 1), p(DAU, 1)]).unwrap();
        assert_eq!(r.allocation(dk).unwrap().blocking_reason, Some(Rule::B13));
    }

    #[test]
    fn verdict_for_absent_target() {
        let r = solve_parties([p(SON, 1)]).unwrap();
        assert_eq!(verdict_for(&r, DAU), Err(SolveError::TargetAbsent(DAU)));
    }
}
