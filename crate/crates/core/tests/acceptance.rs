//! Acceptance checks. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use discoforge::augment::{default_mappings, plan_augmentation, GenreFilter, SourceInstance};
use discoforge::builder::{build_encoder_input, build_structured_prompt, BuildOptions, FeatureSubset};
use discoforge::corpus::{
    parse_rels, parse_rels_str, serialize_rels, CorpusId, Direction, DocumentModel, GenreOverrides,
    LabelInventory, RelationInstance, Sentence, TokenSpanSet,
};
use discoforge::dataset::CorpusData;
use discoforge::eval::{ablation_report, aggregate, repair_labels, CorpusResult, EvalReport};
use discoforge::features::{
    compute_features, extract_context, features_tsv, ContextWindow, FeatureVector, SameSpeaker, Stoplist,
};
use discoforge::pruning::{block_influence, select_prune_layers, ActivationDump, LayerScore, Matrix};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);
type MappingRow<'a> = (&'a str, &'a [&'a str], Option<&'a [&'a str]>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn cid(s: &str) -> CorpusId {
    s.parse().unwrap()
}

/// Rows of a reference table keyed by first column; aggregate rows included.
fn table(name: &str) -> (Vec<String>, BTreeMap<String, Vec<f64>>) {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split('\t').map(String::from).collect();
    let rows = lines
        .map(|l| {
            let mut cells = l.split('\t');
            let key = cells.next().unwrap().to_string();
            (key, cells.map(|c| c.parse().unwrap()).collect())
        })
        .collect();
    (header, rows)
}

fn report_from(rows: &BTreeMap<String, Vec<f64>>, col: usize) -> EvalReport {
    EvalReport::from_results(
        rows.iter()
            .filter(|(k, _)| !k.ends_with("_avg"))
            .map(|(k, v)| {
                (
                    cid(k),
                    CorpusResult {
                        accuracy: v[col],
                        correct: None,
                        total: None,
                    },
                )
            })
            .collect(),
    )
    .unwrap()
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol + 1e-9
}

fn instance(u1: &str, u2: &str, s1: &str, s2: &str, dir: Direction) -> RelationInstance {
    RelationInstance {
        instance_id: 0,
        doc_id: "doc".into(),
        unit1_text: u1.into(),
        unit2_text: u2.into(),
        unit1_spans: s1.parse().unwrap(),
        unit2_spans: s2.parse().unwrap(),
        sent1_text: String::new(),
        sent2_text: String::new(),
        sent1_spans: None,
        sent2_spans: None,
        direction: dir,
        label: "elaboration".into(),
        orig_label: None,
        label_known: true,
        extra: BTreeMap::new(),
    }
}

fn doc(sentences: &[&str]) -> DocumentModel {
    DocumentModel::new(
        "doc",
        sentences
            .iter()
            .map(|s| Sentence::new(s.split_whitespace().map(String::from).collect(), None))
            .collect(),
        "news",
    )
}

fn macro_replay() -> Check {
    let start = Instant::now();
    let (_, rows) = table("reference/accuracy.tsv");
    let corpora: Vec<&Vec<f64>> = rows.iter().filter(|(k, _)| !k.ends_with("_avg")).map(|(_, v)| v).collect();
    ensure!(corpora.len() == 38, "expected 38 corpora, found {}", corpora.len());
    for (col, name) in [(0, "decoder"), (1, "encoder")] {
        let results: Vec<CorpusResult> = corpora
            .iter()
            .map(|v| CorpusResult {
                accuracy: v[col],
                correct: None,
                total: None,
            })
            .collect();
        let got = aggregate(&results).map_err(|e| e.to_string())?.macro_avg;
        let want = rows["macro_avg"][col];
        ensure!(within(got, want, 0.01), "{name} macro {got:.4} vs {want}");
    }
    ensure!(start.elapsed() < Duration::from_secs(1), "took {:?}", start.elapsed());
    Ok(())
}

fn ablation_replay() -> Check {
    let start = Instant::now();
    let (header, rows) = table("reference/ablation.tsv");
    let baseline = report_from(&rows, 0);
    let mut checked = 0;
    for col in (1..header.len() - 1).step_by(2) {
        let ablated = report_from(&rows, col);
        let t = ablation_report(&baseline, &ablated).map_err(|e| e.to_string())?;
        for r in &t.rows {
            let printed = rows[&r.name][col + 1];
            ensure!(within(r.gain, printed, 0.01), "{} {}: gain {:.4} vs {printed}", r.name, header[col + 1], r.gain);
            checked += 1;
        }
        let printed_macro = rows["macro_avg"][col + 1];
        ensure!(
            within(t.macro_row.gain, printed_macro, 0.01),
            "{} macro gain {:.4} vs {printed_macro}",
            header[col + 1],
            t.macro_row.gain
        );
        for agg in ["macro_avg", "micro_avg"] {
            let v = &rows[agg];
            ensure!(within(v[0] - v[col], v[col + 1], 0.01), "{agg} {} printed gain", header[col + 1]);
        }
    }
    ensure!(checked == 38 * 5, "checked {checked} rows");
    let spot = |corpus: &str, col: usize, want: f64| -> Check {
        let v = &rows[corpus];
        ensure!(within(v[0] - v[col], want, 0.01), "{corpus} spot check");
        Ok(())
    };
    spot("ces.rst.crdt", 5, 6.08)?;
    spot("pol.iso.pdc", 7, 20.05)?;
    ensure!(start.elapsed() < Duration::from_secs(1), "took {:?}", start.elapsed());
    Ok(())
}

fn reference_features() -> FeatureVector {
    FeatureVector {
        lcf: cid("eng.erst.gum"),
        genre: "academic".into(),
        children_u1: Some(0),
        children_u2: Some(0),
        discontinuous_u1: false,
        discontinuous_u2: false,
        is_sentence_u1: true,
        is_sentence_u2: false,
        length_ratio: 0.6,
        same_speaker: SameSpeaker::True,
        doc_length: 100,
        position: 0.0,
        distance: 0,
        lexical_overlap: 0,
    }
}

fn encoder_golden() -> Check {
    let want = "LANG_eng FW_erst CORP_gum [SEP] IS_SENTENCE_1 DISCONTINUOUS_0 SAME_SPEAKER_1 GENRE_academic [SEP] } Aesthetic Appreciation and Spanish Art: > Arg2: In this study we used eye-tracking in the first stage";
    let inst = instance(
        "Aesthetic Appreciation and Spanish Art:",
        "In this study we used eye-tracking in the first stage",
        "1-6",
        "7-16",
        Direction::Forward,
    );
    let (rec, _) = build_encoder_input(&inst, &reference_features(), &FeatureSubset::encoder_default())
        .map_err(|e| e.to_string())?;
    ensure!(rec.input == want, "got {:?}", rec.input);
    Ok(())
}

fn structured_delimiters() -> Check {
    let inst = instance("The plant opened", "because demand grew", "1-3", "4-6", Direction::Forward);
    let rec = build_structured_prompt(
        &inst,
        &reference_features(),
        &ContextWindow::default(),
        &LabelInventory::default_inventory(),
        &BuildOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        rec.prompt.contains("$$ The plant opened $$ > ## because demand grew ##"),
        "prompt was {:?}",
        rec.prompt
    );
    Ok(())
}

fn augmentation_quota() -> Check {
    let mapping = default_mappings().into_iter().find(|m| m.target == cid("fra.rst.prstc")).unwrap();
    let sources: Vec<SourceInstance> = ["a", "b", "c"]
        .iter()
        .flat_map(|l| std::iter::repeat_n(*l, 600))
        .enumerate()
        .map(|(i, l)| {
            let mut inst = instance("x y", "z w", "1-2", "3-4", Direction::Forward);
            inst.instance_id = i;
            inst.label = l.into();
            SourceInstance {
                corpus: cid("eng.erst.gum"),
                genre: "news".into(),
                instance: inst,
            }
        })
        .collect();
    let hist: BTreeMap<String, usize> = [("a", 500), ("b", 300), ("c", 200)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let plan = plan_augmentation(&mapping, &sources, &hist, 1000, &[], 2025).map_err(|e| e.to_string())?;
    ensure!(plan.selected.len() == 750, "selected {}", plan.selected.len());
    let want: BTreeMap<String, usize> = [("a", 375), ("b", 225), ("c", 150)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    ensure!(plan.quota == want, "quota {:?}", plan.quota);
    ensure!(plan.selected_histogram() == want, "selection {:?}", plan.selected_histogram());
    let again = plan_augmentation(&mapping, &sources, &hist, 1000, &[], 2025).map_err(|e| e.to_string())?;
    ensure!(again == plan, "rerun differs");
    Ok(())
}

fn mapping_rows() -> Check {
    let expected: [MappingRow; 7] = [
        ("ces.rst.crdt", &["eng.erst.gum"], Some(&["essay", "news"])),
        ("deu.pdtb.pcc", &["eng.pdtb.gum"], Some(&["essay", "news", "speech"])),
        ("deu.rst.pcc", &["eng.erst.gum"], Some(&["essay", "news", "speech"])),
        ("eus.rst.ert", &["eng.erst.gum"], Some(&["textbook", "academic"])),
        ("fra.rst.prstc", &["eng.erst.gum"], Some(&["news", "academic"])),
        ("nld.rst.nldt", &["eng.rst.oll", "eng.rst.sts"], Some(&["bio", "news", "letter"])),
        ("fas.rst.prstc", &["eng.rst.rstdt"], None),
    ];
    let maps = default_mappings();
    ensure!(maps.len() == 7, "{} rows", maps.len());
    for (m, (target, sources, genres)) in maps.iter().zip(expected) {
        ensure!(m.target == cid(target), "target {} vs {target}", m.target);
        let srcs: Vec<CorpusId> = sources.iter().map(|s| cid(s)).collect();
        ensure!(m.sources == srcs, "{target} sources {:?}", m.sources);
        let g = match genres {
            Some(gs) => GenreFilter::Only(gs.iter().map(|s| s.to_string()).collect()),
            None => GenreFilter::All,
        };
        ensure!(m.genres == g, "{target} genres {:?}", m.genres);
        ensure!(m.ratio == 0.75, "{target} ratio {}", m.ratio);
    }
    Ok(())
}

fn oracle_influence(a: &[Vec<f32>], b: &[Vec<f32>]) -> f64 {
    let cos: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let dot: f64 = x.iter().zip(y).map(|(p, q)| *p as f64 * *q as f64).sum();
            let nx = x.iter().map(|p| (*p as f64).powi(2)).sum::<f64>().sqrt();
            let ny = y.iter().map(|q| (*q as f64).powi(2)).sum::<f64>().sqrt();
            dot / (nx * ny)
        })
        .collect();
    1.0 - cos.iter().sum::<f64>() / cos.len() as f64
}

fn block_influence_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut rows = |n: usize| -> Vec<Vec<f32>> {
        (0..n).map(|_| (0..8).map(|_| rng.random_range(-1.0f32..1.0)).collect()).collect()
    };
    let dump = |a: &[Vec<f32>], b: &[Vec<f32>]| {
        ActivationDump::new(0, Matrix::from_rows(a).unwrap(), Matrix::from_rows(b).unwrap()).unwrap()
    };
    let a = rows(4);
    let neg: Vec<Vec<f32>> = a.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    let id = block_influence(&dump(&a, &a)).map_err(|e| e.to_string())?.influence;
    ensure!(id == 0.0, "identical gave {id}");
    let ng = block_influence(&dump(&a, &neg)).map_err(|e| e.to_string())?.influence;
    ensure!(ng == 2.0, "negated gave {ng}");
    for _ in 0..100 {
        let (x, y) = (rows(4), rows(4));
        let got = block_influence(&dump(&x, &y)).map_err(|e| e.to_string())?.influence;
        let want = oracle_influence(&x, &y);
        ensure!((got - want).abs() < 1e-9, "{got} vs oracle {want}");
    }
    let s = |pairs: &[(usize, f64)]| -> Vec<LayerScore> {
        pairs.iter().map(|&(layer_index, influence)| LayerScore { layer_index, influence }).collect()
    };
    let none = BTreeSet::new();
    let pick = select_prune_layers(&s(&[(0, 0.5), (1, 0.1), (2, 0.4)]), 1, &none).map_err(|e| e.to_string())?;
    ensure!(pick == vec![1], "argmin gave {pick:?}");
    let tie = select_prune_layers(&s(&[(7, 0.2), (3, 0.2), (5, 0.6)]), 1, &none).map_err(|e| e.to_string())?;
    ensure!(tie == vec![3], "tie gave {tie:?}");
    Ok(())
}

fn context_rule() -> Check {
    let d = doc(&["S1 a .", "S2 b .", "S3 c .", "S4 d .", "S5 e ."]);
    let mid = instance("S2 b .", "S3 c .", "4-6", "7-9", Direction::Forward);
    let w = extract_context(&mid, &d).map_err(|e| e.to_string())?;
    ensure!(
        (w.pre.as_str(), w.focal.as_str(), w.post.as_str()) == ("S1 a .", "S2 b . S3 c .", "S4 d ."),
        "window {w:?}"
    );
    let first = instance("S1 a .", "S2 b .", "1-3", "4-6", Direction::Forward);
    let w = extract_context(&first, &d).map_err(|e| e.to_string())?;
    ensure!(w.pre.is_empty() && w.post == "S3 c .", "start window {w:?}");
    let last = instance("S4 d .", "S5 e .", "10-12", "13-15", Direction::Backward);
    let w = extract_context(&last, &d).map_err(|e| e.to_string())?;
    ensure!(w.post.is_empty() && w.pre == "S3 c .", "end window {w:?}");
    Ok(())
}

fn round_trip_and_repair() -> Check {
    let inv = LabelInventory::default_inventory();
    let mut n = 0;
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("rels") {
            continue;
        }
        let id = CorpusId::from_file_name(path.file_name().unwrap().to_str().unwrap()).unwrap();
        let first = parse_rels(&path, &id, &inv).map_err(|e| e.to_string())?;
        let bytes = serialize_rels(&first.instances, &first.header).bytes;
        let second = parse_rels_str(std::str::from_utf8(&bytes).unwrap(), &id, &inv).map_err(|e| e.to_string())?;
        ensure!(first.instances == second.instances, "{} instances differ", path.display());
        ensure!(first.header == second.header, "{} header differs", path.display());
        n += 1;
    }
    ensure!(n >= 2, "only {n} fixtures");
    let raw = ["causal", " Contrast", "banana", "", "ELABORATION", "frame?"];
    let a = repair_labels(&raw, &inv, 31).map_err(|e| e.to_string())?;
    let b = repair_labels(&raw, &inv, 31).map_err(|e| e.to_string())?;
    ensure!(a == b, "repair not deterministic");
    ensure!(a.repairs == 3, "{} repairs", a.repairs);
    let c = repair_labels(&a.labels, &inv, 5).map_err(|e| e.to_string())?;
    ensure!(c.labels == a.labels && c.repairs == 0, "repair not idempotent");
    Ok(())
}

fn feature_spot_checks() -> Check {
    let d = doc(&["one two three four five six seven eight nine ten eleven twelve thirteen"]);
    let inst = instance(
        "one two three",
        "four five six seven eight nine ten eleven twelve thirteen",
        "1-3",
        "4-13",
        Direction::Forward,
    );
    let fv = compute_features(&inst, &d, &cid("eng.rst.rstdt"), None, &Stoplist::default()).map_err(|e| e.to_string())?;
    ensure!(fv.length_ratio == 0.3, "length ratio {}", fv.length_ratio);
    let span: TokenSpanSet = "5-7,9".parse().map_err(|e| format!("{e:?}"))?;
    ensure!(span.discontinuous(), "5-7,9 not discontinuous");
    let disc = instance("five six seven nine", "ten", "5-7,9", "10", Direction::Forward);
    let fv = compute_features(&disc, &d, &cid("eng.rst.rstdt"), None, &Stoplist::default()).map_err(|e| e.to_string())?;
    ensure!(fv.discontinuous_u1 && !fv.discontinuous_u2, "discontinuity flags");

    let render = || -> Result<String, String> {
        let data = CorpusData::load(
            &cid("eng.erst.gum"),
            &fixture("eng.erst.gum_dev.rels"),
            Some(&fixture("eng.erst.gum_dev.conllu")),
            &LabelInventory::default_inventory(),
            &GenreOverrides::bundled(),
        )
        .map_err(|e| e.to_string())?;
        let f = data.featurize(&Stoplist::default()).map_err(|e| e.to_string())?;
        Ok(features_tsv(data.instances.iter().zip(f.iter().map(|x| &x.features))))
    };
    ensure!(render()? == render()?, "feature TSV differs between runs");
    Ok(())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("macro average replay", macro_replay),
        ("ablation gain replay", ablation_replay),
        ("encoder golden string", encoder_golden),
        ("structured prompt delimiters", structured_delimiters),
        ("augmentation size and distribution", augmentation_quota),
        ("augmentation mapping rows", mapping_rows),
        ("block influence properties", block_influence_properties),
        ("context window rule", context_rule),
        ("rels round trip and label repair", round_trip_and_repair),
        ("feature spot checks", feature_spot_checks),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(()) => println!("PASS {:>2} {name}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
