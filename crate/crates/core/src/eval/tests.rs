use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;

use super::*;
use crate::corpus::{Direction, LabelInventory, RelationInstance, TokenSpanSet};

fn cid(s: &str) -> CorpusId {
    s.parse().unwrap()
}

fn gold(labels: &[&str]) -> Vec<RelationInstance> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| RelationInstance {
            instance_id: i,
            doc_id: "d".into(),
            unit1_text: "a".into(),
            unit2_text: "b".into(),
            unit1_spans: TokenSpanSet::contiguous(1, 1).unwrap(),
            unit2_spans: TokenSpanSet::contiguous(2, 2).unwrap(),
            sent1_text: String::new(),
            sent2_text: String::new(),
            sent1_spans: None,
            sent2_spans: None,
            direction: Direction::Forward,
            label: l.to_string(),
            orig_label: None,
            label_known: true,
            extra: BTreeMap::new(),
        })
        .collect()
}

fn result(correct: usize, total: usize) -> CorpusResult {
    CorpusResult {
        accuracy: 100.0 * correct as f64 / total as f64,
        correct: Some(correct),
        total: Some(total),
    }
}

#[test]
fn repair_passes_valid_and_canonicalizes() {
    let inv = LabelInventory::default_inventory();
    let r = repair_labels(&["causal", "CAUSAL "], &inv, 0).unwrap();
    assert_eq!(r.labels, vec!["causal", "causal"]);
    assert_eq!(r.repairs, 0);
}

#[test]
fn repair_is_seeded() {
    let inv = LabelInventory::default_inventory();
    let a = repair_labels(&["banana"], &inv, 7).unwrap();
    assert_eq!(a.repairs, 1);
    assert!(inv.contains(&a.labels[0]));
    assert_eq!(a, repair_labels(&["banana"], &inv, 7).unwrap());
    let again = repair_labels(&a.labels, &inv, 99).unwrap();
    assert_eq!(again.labels, a.labels);
    assert_eq!(again.repairs, 0);
}

#[test]
fn score_counts_and_confusion() {
    let c = cid("eng.rst.rstdt");
    let s = score_corpus(&c, &gold(&["a", "b", "a"]), &["a", "b", "b"]).unwrap();
    assert_eq!((s.correct, s.total), (2, 3));
    assert_eq!(pct(s.accuracy), "66.67");
    assert_eq!(s.confusion["a"]["a"], 1);
    assert_eq!(s.confusion["a"]["b"], 1);
    assert_eq!(s.confusion["b"]["b"], 1);

    let ident = score_corpus(&c, &gold(&["a", "b"]), &["a", "b"]).unwrap();
    assert_eq!(ident.accuracy, 100.0);

    assert!(matches!(
        score_corpus(&c, &gold(&["a", "b"]), &["a"]),
        Err(EvalError::LengthMismatch { gold: 2, pred: 1, .. })
    ));
    assert!(matches!(
        score_corpus::<&str>(&c, &[], &[]),
        Err(EvalError::EmptyCorpus(_))
    ));
}

#[test]
fn aggregate_by_hand() {
    let agg = aggregate(&[result(1, 2), result(3, 4)]).unwrap();
    assert_eq!(pct(agg.macro_avg), "62.50");
    assert_eq!(pct(agg.micro_avg.unwrap()), "66.67");
    let one = aggregate(&[result(3, 4)]).unwrap();
    assert_eq!(one.macro_avg, 75.0);
    assert_eq!(one.micro_avg, Some(75.0));
    assert!(matches!(aggregate(&[]), Err(EvalError::NoCorpora)));
    let no_counts = CorpusResult {
        accuracy: 50.0,
        correct: None,
        total: None,
    };
    assert_eq!(aggregate(&[no_counts]).unwrap().micro_avg, None);
}

#[test]
fn prediction_file_formats() {
    let p = Path::new("pred.txt");
    let c = cid("eng.rst.rstdt");
    let g = gold(&["a", "b", "c"]);
    let pos = PredictionFile::parse("a\nb\nc\n", p).unwrap();
    assert_eq!(pos.align(&c, &g).unwrap(), vec!["a", "b", "c"]);
    let ids = PredictionFile::parse("id\tlabel\n2\tc\n0\ta\n1\tb\n", p).unwrap();
    assert!(ids.has_ids());
    assert_eq!(ids.align(&c, &g).unwrap(), vec!["a", "b", "c"]);
    let wrong = PredictionFile::parse("0\ta\n1\tb\n5\tc\n", p).unwrap();
    assert!(matches!(wrong.align(&c, &g), Err(EvalError::IdMismatch { id: 2, .. })));
    let short = PredictionFile::parse("a\nb\n", p).unwrap();
    assert!(matches!(short.align(&c, &g), Err(EvalError::LengthMismatch { .. })));
    assert!(PredictionFile::parse("0\ta\nb\n", p).is_err());
}

#[test]
fn ablation_gains_and_mismatch() {
    let mk = |pairs: &[(&str, f64)]| {
        EvalReport::from_results(
            pairs
                .iter()
                .map(|(c, a)| {
                    (
                        cid(c),
                        CorpusResult {
                            accuracy: *a,
                            correct: None,
                            total: None,
                        },
                    )
                })
                .collect(),
        )
        .unwrap()
    };
    let base = mk(&[("ces.rst.crdt", 52.70), ("deu.rst.pcc", 67.03)]);
    let abl = mk(&[("ces.rst.crdt", 46.62), ("deu.rst.pcc", 51.28)]);
    let t = ablation_report(&base, &abl).unwrap();
    assert_eq!(pct(t.rows[0].gain), "6.08");
    assert_eq!(pct(t.rows[1].gain), "15.75");
    assert!(t.micro_row.is_none());
    assert!(t.to_tsv().starts_with("corpus\tbaseline\tabs\tgain\nces.rst.crdt\t52.70\t46.62\t6.08\n"));

    let same = ablation_report(&base, &base).unwrap();
    assert!(same.rows.iter().all(|r| r.gain == 0.0));
    assert_eq!(same.macro_row.gain, 0.0);

    let other = mk(&[("ces.rst.crdt", 46.62)]);
    assert!(matches!(ablation_report(&base, &other), Err(EvalError::CorpusSetMismatch { .. })));
}

#[test]
fn confusion_matrix_layout() {
    let inv = LabelInventory::new(["a", "b", "c"]).unwrap();
    let mut conf = Confusion::new();
    conf.entry("a".into()).or_default().insert("a".into(), 3);
    conf.entry("b".into()).or_default().insert("b".into(), 2);
    let m = confusion_to_matrix(&conf, &inv);
    let n = m.normalized();
    assert_eq!(n[0], vec![1.0, 0.0, 0.0]);
    assert_eq!(n[1], vec![0.0, 1.0, 0.0]);
    assert_eq!(n[2], vec![0.0, 0.0, 0.0]);
    assert_eq!(m.to_tsv(), "gold\\pred\ta\tb\tc\na\t3\t0\t0\nb\t0\t2\t0\nc\t0\t0\t0\n");

    conf.entry("a".into()).or_default().insert("zzz".into(), 1);
    let m = confusion_to_matrix(&conf, &inv);
    assert_eq!(m.labels, vec!["a", "b", "c", "zzz"]);
    assert_eq!(m.counts[0], vec![3, 0, 0, 1]);
}

#[test]
fn normalization_matches_hand_division() {
    let inv = LabelInventory::new(["x", "y", "z"]).unwrap();
    let table = [[5usize, 2, 1], [0, 7, 3], [4, 4, 4]];
    let mut conf = Confusion::new();
    for (g, row) in ["x", "y", "z"].iter().zip(table) {
        for (p, n) in ["x", "y", "z"].iter().zip(row) {
            if n > 0 {
                conf.entry(g.to_string()).or_default().insert(p.to_string(), n);
            }
        }
    }
    let got = confusion_to_matrix(&conf, &inv).normalized();
    for (i, row) in table.iter().enumerate() {
        let s = row[0] + row[1] + row[2];
        for j in 0..3 {
            assert!((got[i][j] - row[j] as f64 / s as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn report_json_and_score_table_round_trip() {
    let c = cid("eng.rst.rstdt");
    let s = score_corpus(&c, &gold(&["a", "b", "a"]), &["a", "b", "b"]).unwrap();
    let r = EvalReport::from_scores(&[s], Some(7), 1).unwrap();
    let back: EvalReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
    let table = r.score_table();
    assert_eq!(table, "corpus\taccuracy\tcorrect\ttotal\neng.rst.rstdt\t66.67\t2\t3\n");
    let parsed = EvalReport::parse_score_table(&table, Path::new("t.tsv")).unwrap();
    assert_eq!(parsed.per_corpus[&c].correct, Some(2));

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.json"), r.to_json()).unwrap();
    std::fs::write(dir.path().join("b.tsv"), "corpus\taccuracy\ndeu.rst.pcc\t50.0\n").unwrap();
    std::fs::write(dir.path().join("confusion.tsv"), "gold\\pred\ta\n").unwrap();
    let merged = load_report_dir(dir.path()).unwrap();
    assert_eq!(merged.per_corpus.len(), 2);
    assert!(merged.micro_avg.is_none());
    assert_eq!(merged.repair_seed, Some(7));
}

proptest! {
    #[test]
    fn averages_between_min_and_max(counts in prop::collection::vec((0usize..50, 1usize..50), 1..10)) {
        let rs: Vec<CorpusResult> = counts.iter().map(|&(c, t)| result(c.min(t), t)).collect();
        let agg = aggregate(&rs).unwrap();
        let lo = rs.iter().map(|r| r.accuracy).fold(f64::INFINITY, f64::min);
        let hi = rs.iter().map(|r| r.accuracy).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(agg.macro_avg >= lo - 1e-9 && agg.macro_avg <= hi + 1e-9);
        let micro = agg.micro_avg.unwrap();
        prop_assert!(micro >= lo - 1e-9 && micro <= hi + 1e-9);
    }

    #[test]
    fn joint_permutation_preserves_score(labels in prop::collection::vec((0u8..3, 0u8..3), 1..30), rot in 0usize..30) {
        let names = ["a", "b", "c"];
        let g: Vec<&str> = labels.iter().map(|(x, _)| names[*x as usize]).collect();
        let p: Vec<&str> = labels.iter().map(|(_, y)| names[*y as usize]).collect();
        let c = cid("eng.rst.rstdt");
        let base = score_corpus(&c, &gold(&g), &p).unwrap();
        let (mut g2, mut p2) = (g.clone(), p.clone());
        g2.rotate_left(rot % g.len());
        p2.rotate_left(rot % p.len());
        let moved = score_corpus(&c, &gold(&g2), &p2).unwrap();
        prop_assert_eq!(base.correct, moved.correct);
        prop_assert_eq!(base.confusion, moved.confusion);
    }

    #[test]
    fn repair_never_loses_valid_labels(raw in prop::collection::vec("[a-z ]{0,12}", 0..20), seed in any::<u64>()) {
        let inv = LabelInventory::default_inventory();
        let before = raw.iter().filter(|r| inv.contains(r)).count();
        let r = repair_labels(&raw, &inv, seed).unwrap();
        prop_assert_eq!(r.labels.len(), raw.len());
        prop_assert!(r.labels.iter().all(|l| inv.contains(l)));
        prop_assert_eq!(r.repairs, raw.len() - before);
    }
}
