use std::path::{Path, PathBuf};

use discoforge::builder::{build_encoder_input, build_structured_prompt, build_verbose_prompt, BuildOptions, FeatureSubset, PromptTemplate};
use discoforge::corpus::{parse_conllu, parse_rels, serialize_rels, CorpusId, GenreOverrides, LabelInventory};
use discoforge::dataset::CorpusData;
use discoforge::eval::{repair_labels, score_corpus, PredictionFile};
use discoforge::features::{features_tsv, SameSpeaker, Stoplist};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn gum() -> CorpusData {
    CorpusData::load(
        &"eng.erst.gum".parse().unwrap(),
        &fixture("eng.erst.gum_dev.rels"),
        Some(&fixture("eng.erst.gum_dev.conllu")),
        &LabelInventory::default_inventory(),
        &GenreOverrides::bundled(),
    )
    .unwrap()
}

fn pcc() -> CorpusData {
    CorpusData::load(
        &"deu.rst.pcc".parse().unwrap(),
        &fixture("deu.rst.pcc_dev.rels"),
        None,
        &LabelInventory::default_inventory(),
        &GenreOverrides::bundled(),
    )
    .unwrap()
}

#[test]
fn every_rels_fixture_round_trips() {
    let inv = LabelInventory::default_inventory();
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("rels") {
            continue;
        }
        let id = CorpusId::from_file_name(path.file_name().unwrap().to_str().unwrap()).unwrap();
        let parsed = parse_rels(&path, &id, &inv).unwrap();
        assert!(parsed.warnings.is_empty(), "{}: {:?}", path.display(), parsed.warnings);
        let out = serialize_rels(&parsed.instances, &parsed.header);
        assert_eq!(out.bytes, std::fs::read(&path).unwrap(), "{}", path.display());
    }
}

#[test]
fn conllu_fixture_documents() {
    let docs = parse_conllu(&fixture("eng.erst.gum_dev.conllu")).unwrap();
    assert_eq!(docs.len(), 2);
    assert_eq!(docs[0].doc_id(), "GUM_academic_art");
    assert_eq!(docs[0].token_count(), 42);
    assert!(!docs[0].has_speakers());
    assert!(docs[1].has_speakers());
}

#[test]
fn gum_features() {
    let data = gum();
    assert!(data.synthesized.is_empty());
    let f = data.featurize(&Stoplist::default()).unwrap();
    assert_eq!(f.len(), 8);
    assert_eq!(f[0].features.genre, "academic");
    assert!(f[0].features.is_sentence_u1);
    assert_eq!(f[0].features.same_speaker, SameSpeaker::Unknown);
    // "Yes ," (Lee) and "because the weather was great ." (Lee)
    assert_eq!(f[6].features.same_speaker, SameSpeaker::True);
    // "Did you enjoy the trip ?" (Kim) and "Yes ," (Lee)
    assert_eq!(f[5].features.same_speaker, SameSpeaker::False);
    assert!(f.iter().all(|x| x.context_warning.is_none()));
    assert_eq!(f[1].context.pre, "Aesthetic Appreciation and Spanish Art :");
}

#[test]
fn feature_table_is_byte_stable() {
    let render = || {
        let data = gum();
        let f = data.featurize(&Stoplist::default()).unwrap();
        features_tsv(data.instances.iter().zip(f.iter().map(|x| &x.features)))
    };
    assert_eq!(render(), render());
}

#[test]
fn missing_conllu_falls_back_to_sentence_columns() {
    let data = pcc();
    assert_eq!(data.synthesized, vec!["maz-1423", "maz-2002"]);
    let f = data.featurize(&Stoplist::default()).unwrap();
    assert!(f[0].features.discontinuous_u2);
    assert_eq!(f[0].features.same_speaker, SameSpeaker::Unknown);
    assert!(!f[1].context.focal.is_empty());
}

#[test]
fn all_builders_accept_fixture_instances() {
    let inv = LabelInventory::default_inventory();
    let tpl = PromptTemplate::default_verbose();
    let opts = BuildOptions::default();
    for data in [gum(), pcc()] {
        let f = data.featurize(&Stoplist::default()).unwrap();
        for (inst, x) in data.instances.iter().zip(&f) {
            let v = build_verbose_prompt(inst, &x.features, &x.context, &tpl, &inv, &opts).unwrap();
            assert_eq!(v.target, inst.label);
            let s = build_structured_prompt(inst, &x.features, &x.context, &inv, &opts).unwrap();
            assert!(s.prompt.contains(" ## "));
            let (e, _) = build_encoder_input(inst, &x.features, &FeatureSubset::encoder_default()).unwrap();
            assert!(e.input.starts_with(&format!("LANG_{} ", data.id.language())));
        }
    }
}

#[test]
fn scoring_fixture_predictions() {
    let data = gum();
    let pred = PredictionFile::load(&fixture("eng.erst.gum_dev.pred")).unwrap();
    let raw = pred.align(&data.id, &data.instances).unwrap();
    let inv = LabelInventory::default_inventory();
    let repaired = repair_labels(&raw, &inv, 13).unwrap();
    assert_eq!(repaired.repairs, 1);
    assert_eq!(repaired, repair_labels(&raw, &inv, 13).unwrap());
    let score = score_corpus(&data.id, &data.instances, &repaired.labels).unwrap();
    assert_eq!(score.total, 8);
    // Index 4 is the repaired "banana" against gold "conjunction".
    let expected = 6 + usize::from(repaired.labels[4] == "conjunction");
    assert_eq!(score.correct, expected);
}
