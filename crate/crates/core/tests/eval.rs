use std::collections::BTreeMap;

use qias_core::eval::{
    audit_distribution, blocked_gold, build_report, categorize_errors, conditional_accuracy,
    format_percent, negation_cued, parse_report_json, read_baselines, read_predictions,
    render_report, score, write_predictions, AbstainPolicy, ErrorCategory, ReportFormat, RunMeta,
    ScoringMode,
};
use qias_core::mcq::{Level, McqItem};

const PLAIN_Q: &str = "مات وترك: ابن و بنت";
const NEG_Q: &str = "مات وترك: ابن و بنت وليس على التركة دين";

fn item(id: usize, level: Level, blocked: bool, negated: bool) -> McqItem {
    let gold = if blocked {
        "نصيبه هو محجوب"
    } else {
        "نصيبه هو النصف"
    };
    McqItem {
        id: format!("i{id:04}"),
        question: if negated { NEG_Q } else { PLAIN_Q }.into(),
        options: [
            ('A', gold.to_string()),
            ('B', "نصيبه هو الربع".to_string()),
            ('C', "نصيبه هو باقي التركة".to_string()),
        ]
        .into(),
        gold: 'A',
        level,
    }
}

fn meta() -> RunMeta {
    RunMeta {
        predictor: "solver".into(),
        config_hash: "0123456789abcdef".into(),
        scoring: ScoringMode::Strict,
        abstain: AbstainPolicy::Incorrect,
        precedence: ErrorCategory::DEFAULT_PRECEDENCE.to_vec(),
        text: Default::default(),
    }
}

/// 500 items per level with the requested number answered correctly.
fn level_split(
    beginner_ok: usize,
    advanced_ok: usize,
) -> (Vec<McqItem>, BTreeMap<String, Option<char>>) {
    let mut items = Vec::new();
    let mut preds = BTreeMap::new();
    for (level, ok) in [
        (Level::Beginner, beginner_ok),
        (Level::Advanced, advanced_ok),
    ] {
        for j in 0..500 {
            let it = item(items.len(), level, false, false);
            preds.insert(it.id.clone(), Some(if j < ok { 'A' } else { 'B' }));
            items.push(it);
        }
    }
    (items, preds)
}

#[test]
fn level_accuracies() {
    let (items, preds) = level_split(370, 488);
    let records = score(
        &items,
        &preds,
        ScoringMode::Strict,
        AbstainPolicy::Incorrect,
    )
    .unwrap();
    let r = build_report(meta(), &records, &items, vec![], vec![]);
    assert_eq!(format!("{:.1}", r.accuracy.overall.unwrap()), "85.8");
    assert_eq!(format!("{:.1}", r.accuracy.beginner.unwrap()), "74.0");
    assert_eq!(format!("{:.1}", r.accuracy.advanced.unwrap()), "97.6");

    let (items, _) = level_split(0, 0);
    let all: BTreeMap<_, _> = items.iter().map(|i| (i.id.clone(), Some(i.gold))).collect();
    let records = score(&items, &all, ScoringMode::Strict, AbstainPolicy::Incorrect).unwrap();
    let r = build_report(meta(), &records, &items, vec![], vec![]);
    assert_eq!(r.accuracy.overall, Some(100.0));
    assert!(r.categories.iter().all(|c| c.total == 0));
}

#[test]
fn abstain_policies() {
    let items: Vec<McqItem> = (0..4)
        .map(|i| item(i, Level::Beginner, false, false))
        .collect();
    let preds: BTreeMap<_, _> = [
        (items[0].id.clone(), Some('A')),
        (items[1].id.clone(), None),
        (items[2].id.clone(), Some('B')),
    ]
    .into();
    let inc = score(
        &items,
        &preds,
        ScoringMode::Strict,
        AbstainPolicy::Incorrect,
    )
    .unwrap();
    assert_eq!(inc.len(), 4);
    assert_eq!(inc.iter().filter(|r| r.correct).count(), 1);
    let exc = score(&items, &preds, ScoringMode::Strict, AbstainPolicy::Exclude).unwrap();
    assert_eq!(exc.len(), 2);
}

#[test]
fn precedence_blocked_over_negation() {
    let it = item(1, Level::Beginner, true, true);
    assert!(blocked_gold(&it) && negation_cued(&it));
    let preds = [(it.id.clone(), Some('B'))].into();
    let items = vec![it];
    let records = score(
        &items,
        &preds,
        ScoringMode::Strict,
        AbstainPolicy::Incorrect,
    )
    .unwrap();
    let c = categorize_errors(&records, &items, &ErrorCategory::DEFAULT_PRECEDENCE);
    assert_eq!(c[&ErrorCategory::Blocked][&Level::Beginner], 1);
    assert_eq!(c[&ErrorCategory::Negation][&Level::Beginner], 0);
}

#[test]
fn conditional_and_audit() {
    let items: Vec<McqItem> = (0..10)
        .map(|i| item(i, Level::Advanced, i < 4, false))
        .collect();
    let preds: BTreeMap<_, _> = items
        .iter()
        .enumerate()
        .map(|(i, it)| {
            (
                it.id.clone(),
                Some(if i < 1 {
                    'A'
                } else if i < 4 {
                    'B'
                } else {
                    'A'
                }),
            )
        })
        .collect();
    let records = score(
        &items,
        &preds,
        ScoringMode::Strict,
        AbstainPolicy::Incorrect,
    )
    .unwrap();
    let c = conditional_accuracy(&records, &items, blocked_gold);
    assert_eq!(
        (c.n, c.pct.map(|p| format!("{p:.1}"))),
        (4, Some("25.0".to_string()))
    );
    let none = conditional_accuracy(&records, &items, negation_cued);
    assert_eq!((none.n, none.pct), (0, None));

    let split = |n: usize, blocked: usize| -> Vec<McqItem> {
        (0..n)
            .map(|i| item(i, Level::Beginner, i < blocked, false))
            .collect()
    };
    let rows = audit_distribution(&[
        ("dev".into(), split(1000, 17)),
        ("train".into(), split(20_000, 3491)),
        ("test".into(), split(1000, 299)),
        ("empty".into(), vec![]),
    ]);
    let shown: Vec<String> = rows
        .iter()
        .map(|r| format_percent(r.blocked, r.total, 2))
        .collect();
    assert_eq!(shown, ["1.70", "17.46", "29.90", "n/a"]);
}

#[test]
fn percent_rounds_half_up() {
    assert_eq!(format_percent(3491, 20_000, 2), "17.46");
    assert_eq!(format_percent(1, 8, 1), "12.5");
    assert_eq!(format_percent(1, 16, 1), "6.3");
    assert_eq!(format_percent(2, 3, 1), "66.7");
    assert_eq!(format_percent(1, 1, 0), "100");
    assert_eq!(format_percent(0, 0, 1), "n/a");
}

#[test]
fn report_rendering() {
    let (items, preds) = level_split(370, 488);
    let records = score(
        &items,
        &preds,
        ScoringMode::Strict,
        AbstainPolicy::Incorrect,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("baselines.csv");
    std::fs::write(
        &base,
        "model,overall,beginner,advanced\nother-model,50.0,40.0,60.0\n",
    )
    .unwrap();
    let baselines = read_baselines(&base).unwrap();
    let r = build_report(meta(), &records, &items, vec![], baselines);

    let md = render_report(&r, ReportFormat::Markdown);
    assert!(md.contains("| **solver** | 85.8 | 74.0 | 97.6 |"));
    assert!(md.contains("| other-model (external) | 50.0 | 40.0 | 60.0 |"));
    assert!(md.find("**solver**").unwrap() < md.find("other-model").unwrap());
    assert!(md.contains("| **All errors** | 12 | 130 | 142 |"));

    let back = parse_report_json(&render_report(&r, ReportFormat::Json)).unwrap();
    assert_eq!(back, r);
    assert!(render_report(&r, ReportFormat::Csv).starts_with("metric,group,level,value\n"));

    let empty = build_report(meta(), &[], &[], vec![], vec![]);
    let md = render_report(&empty, ReportFormat::Markdown);
    for header in ["| Model |", "| Category |", "| Subset |"] {
        let at = md.find(header).unwrap();
        let body = &md[at..].lines().nth(2).unwrap_or("");
        assert!(
            !body.starts_with("| ") || body.contains("---"),
            "{header} has rows"
        );
    }
}

#[test]
fn predictions_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let preds: BTreeMap<_, _> = [("b".to_string(), None), ("a".to_string(), Some('C'))].into();
    write_predictions(&path, &preds).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "id,prediction\na,C\nb,\n"
    );
    assert_eq!(read_predictions(&path).unwrap(), preds);
}
