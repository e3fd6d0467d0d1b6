//! Normative rule table. Every id here can appear in a solver trace; the
//! same table is rendered to `docs/rule-table.md` by `qias rules`.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! rule_table {
    ($( $variant:ident => $id:literal, $text:literal; )*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum Rule {
            $(
                #[serde(rename = $id)]
                $variant,
            )*
        }

        impl Rule {
            pub const ALL: &'static [Rule] = &[$(Rule::$variant),*];

            pub fn id(self) -> &'static str {
                match self { $(Rule::$variant => $id,)* }
            }

            pub fn description(self) -> &'static str {
                match self { $(Rule::$variant => $text,)* }
            }
        }
    };
}

rule_table! {
    F1 => "R-F1", "Husband takes 1/2, or 1/4 when a descendant heir exists.";
    F2 => "R-F2", "Wives share 1/4, or 1/8 when a descendant heir exists.";
    F3 => "R-F3", "Father takes 1/6 with a male descendant, 1/6 plus residue with female descendants only, residue otherwise.";
    F4 => "R-F4", "Mother takes 1/3, or 1/6 with a descendant heir or two or more siblings of any blood.";
    F5 => "R-F5", "Unblocked grandmothers share one 1/6 equally.";
    F6 => "R-F6", "Daughters take 1/2 alone or share 2/3 when two or more.";
    F7 => "R-F7", "Lower female descendants take 1/2 or 2/3 when highest; 1/6 completing 2/3 beside a single higher female.";
    F8 => "R-F8", "Female descendants become residuary with a male descendant of equal or lower level, 2:1 per male.";
    F9 => "R-F9", "Full sisters take 1/2 alone or share 2/3.";
    F10 => "R-F10", "Paternal sisters take 1/2 or 2/3, or 1/6 completing 2/3 beside a single full sister.";
    F11 => "R-F11", "Sisters become residuary with a brother of the same blood, 2:1 per male.";
    F12 => "R-F12", "Sisters become residuary alongside female descendants and rank with the brother of their blood.";
    F13 => "R-F13", "Maternal siblings take 1/6 alone or share 1/3 equally regardless of sex.";
    F14 => "R-F14", "Grandfather without father takes the father's position.";
    F15 => "R-F15", "Spouse with both parents: mother takes 1/3 of what remains after the spouse.";
    B1 => "R-B1", "A nearer male descendant excludes farther descendants.";
    B2 => "R-B2", "Lower female descendants are excluded once higher ones complete 2/3, absent a male descendant at or below their level.";
    B3 => "R-B3", "Father excludes grandfathers; a nearer grandfather excludes a farther one.";
    B4 => "R-B4", "Mother excludes all grandmothers.";
    B5 => "R-B5", "A male ascendant excludes grandmothers related through him.";
    B6 => "R-B6", "A nearer grandmother excludes a farther one.";
    B7 => "R-B7", "Descendant heirs and male ascendants exclude maternal siblings.";
    B8 => "R-B8", "Male descendants and the father exclude full and paternal siblings.";
    B9 => "R-B9", "A full brother, or a full sister residuary beside female descendants, excludes paternal siblings.";
    B10 => "R-B10", "Two or more full sisters exclude paternal sisters absent a paternal brother.";
    B11 => "R-B11", "The nephew line is excluded by any higher-ranked agnate.";
    B12 => "R-B12", "The uncle and cousin ladder is excluded by any higher-ranked agnate.";
    B13 => "R-B13", "Distant kindred are excluded by any sharer or residuary.";
    G1 => "R-G1", "Grandfather with siblings takes the best of sharing as a brother, 1/3 of the remainder, or 1/6; paternal siblings are counted against him beside full siblings.";
    G2 => "R-G2", "Husband, mother, grandfather and one sister: shares raised to 9, then grandfather and sister pool 4/9 split 2:1.";
    T1 => "R-T1", "Residue goes to the highest-priority agnatic group: descendants, father, grandfather, siblings, nephews, uncles, cousins; nearer degree first, full blood before paternal.";
    T2 => "R-T2", "An unblocked residuary heir receives nothing when no residue remains.";
    A1 => "R-A1", "Fixed shares exceeding the estate are reduced proportionally.";
    A2 => "R-A2", "Surplus with no residuary returns to non-spouse sharers in proportion.";
    A3 => "R-A3", "A spouse who is the only heir receives the surplus.";
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Markdown rendering of the full table.
pub fn rule_table_markdown() -> String {
    let mut out = String::from("| Rule | Statement |\n|---|---|\n");
    for r in Rule::ALL {
        out.push_str(&format!("| {} | {} |\n", r.id(), r.description()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_serialize() {
        let mut ids: Vec<&str> = Rule::ALL.iter().map(|r| r.id()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), Rule::ALL.len());
        assert_eq!(serde_json::to_string(&Rule::B11).unwrap(), "\"R-B11\"");
        assert!(rule_table_markdown().contains("| R-G1 |"));
    }
}
