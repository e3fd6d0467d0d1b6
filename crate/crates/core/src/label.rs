use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arabic::{normalize_orthography, NormMode};
use crate::fraction::Fraction;

/// Nominal (pre-adjustment) verdict label, as MCQ options state it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareLabel {
    Half,
    Quarter,
    Eighth,
    TwoThirds,
    Third,
    Sixth,
    Residue,
    Blocked,
    Nothing,
    Whole,
    /// 1/6 plus the residue (father or grandfather beside female descendants).
    SixthPlusResidue,
    /// One third of what remains (mother beside spouse and father; grandfather with siblings).
    ThirdOfRemainder,
}

impl ShareLabel {
    pub const ALL: [ShareLabel; 12] = [
        ShareLabel::Half,
        ShareLabel::Quarter,
        ShareLabel::Eighth,
        ShareLabel::TwoThirds,
        ShareLabel::Third,
        ShareLabel::Sixth,
        ShareLabel::Residue,
        ShareLabel::Blocked,
        ShareLabel::Nothing,
        ShareLabel::Whole,
        ShareLabel::SixthPlusResidue,
        ShareLabel::ThirdOfRemainder,
    ];

    /// Canonical Arabic rendering used in option texts.
    pub fn arabic(self) -> &'static str {
        match self {
            ShareLabel::Half => "النصف",
            ShareLabel::Quarter => "الربع",
            ShareLabel::Eighth => "الثمن",
            ShareLabel::TwoThirds => "الثلثان",
            ShareLabel::Third => "الثلث",
            ShareLabel::Sixth => "السدس",
            ShareLabel::Residue => "باقي التركة",
            ShareLabel::Blocked => "محجوب",
            ShareLabel::Nothing => "لا شيء",
            ShareLabel::Whole => "كل التركة",
            ShareLabel::SixthPlusResidue => "السدس والباقي",
            ShareLabel::ThirdOfRemainder => "ثلث الباقي",
        }
    }

    /// The fixed fraction a label names, if it names one.
    pub fn fraction(self) -> Option<Fraction> {
        let f = match self {
            ShareLabel::Half => Fraction::of(1, 2),
            ShareLabel::Quarter => Fraction::of(1, 4),
            ShareLabel::Eighth => Fraction::of(1, 8),
            ShareLabel::TwoThirds => Fraction::of(2, 3),
            ShareLabel::Third => Fraction::of(1, 3),
            ShareLabel::Sixth => Fraction::of(1, 6),
            _ => return None,
        };
        Some(f)
    }

    pub fn from_fraction(f: Fraction) -> Option<ShareLabel> {
        ShareLabel::ALL
            .into_iter()
            .find(|l| l.fraction() == Some(f))
    }

    /// Recognize a label phrase. Canonical renderings and a few common
    /// variants (accusative dual, bare indefinite forms) are accepted.
    pub fn parse_arabic(text: &str) -> Option<ShareLabel> {
        let key = normalize_orthography(text.trim(), NormMode::Dedup).text;
        let key = key.trim_end_matches(['.', '،', ',', ';', '؛']).trim();
        if key.is_empty() {
            return None;
        }
        if let Some(l) = ShareLabel::ALL
            .into_iter()
            .find(|l| normalize_orthography(l.arabic(), NormMode::Dedup).text == key)
        {
            return Some(l);
        }
        let l = match key {
            "نصف" => ShareLabel::Half,
            "ربع" => ShareLabel::Quarter,
            "ثمن" => ShareLabel::Eighth,
            "الثلثين" | "ثلثان" | "ثلثين" => ShareLabel::TwoThirds,
            "ثلث" => ShareLabel::Third,
            "سدس" => ShareLabel::Sixth,
            "الباقي" | "عصبه" | "باقي" => ShareLabel::Residue,
            "لا شئ" => ShareLabel::Nothing,
            "جميع التركه" | "التركه كلها" => ShareLabel::Whole,
            "السدس والباقي" | "السدس وباقي التركه" | "السدس مع الباقي" => {
                ShareLabel::SixthPlusResidue
            }
            "ثلث ما بقي" => ShareLabel::ThirdOfRemainder,
            _ => return None,
        };
        Some(l)
    }
}

impl fmt::Display for ShareLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.arabic())
    }
}
