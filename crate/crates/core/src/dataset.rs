//! A corpus split with its documents and unit inventories, ready to featurize.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::{
    infer_genre, parse_conllu, parse_rels, synthesize_document, CorpusError, CorpusId,
    DocumentModel, GenreOverrides, LabelInventory, ParsedRels, RelationInstance, RelsWarning,
};
use crate::features::{
    compute_features, extract_context_or_fallback, ContextWindow, FeatureError, FeatureVector,
    Stoplist, UnitInventory,
};

#[derive(Debug, Clone)]
pub struct CorpusData {
    pub id: CorpusId,
    pub header: Vec<String>,
    pub instances: Vec<RelationInstance>,
    pub documents: BTreeMap<String, DocumentModel>,
    pub units: BTreeMap<String, UnitInventory>,
    /// Document ids rebuilt from `.rels` sentence columns.
    pub synthesized: Vec<String>,
    pub rels_warnings: Vec<RelsWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Featurized {
    pub features: FeatureVector,
    pub context: ContextWindow,
    /// Set when the context fell back to the instance's own sentence columns.
    pub context_warning: Option<FeatureError>,
}

impl CorpusData {
    pub fn assemble(rels: ParsedRels, docs: Vec<DocumentModel>, overrides: &GenreOverrides) -> Self {
        let id = rels.corpus.clone();
        let mut documents: BTreeMap<String, DocumentModel> = BTreeMap::new();
        for mut d in docs {
            if d.genre().is_empty() {
                let g = infer_genre(d.doc_id(), &id, overrides);
                d.set_genre(g);
            }
            documents.insert(d.doc_id().to_string(), d);
        }
        let mut synthesized = Vec::new();
        let rows: Vec<&RelationInstance> = rels.instances.iter().collect();
        for inst in &rels.instances {
            if !documents.contains_key(&inst.doc_id) {
                let genre = infer_genre(&inst.doc_id, &id, overrides);
                let doc = synthesize_document(&inst.doc_id, &rows, &genre);
                log::warn!(
                    "{id}: document '{}' not in CoNLL-U input, rebuilt from sentence columns",
                    inst.doc_id
                );
                synthesized.push(inst.doc_id.clone());
                documents.insert(inst.doc_id.clone(), doc);
            }
        }
        let units = UnitInventory::per_document(&rels.instances, id.framework());
        CorpusData {
            id,
            header: rels.header,
            instances: rels.instances,
            documents,
            units,
            synthesized,
            rels_warnings: rels.warnings,
        }
    }

    pub fn load(
        id: &CorpusId,
        rels: &Path,
        conllu: Option<&Path>,
        inventory: &LabelInventory,
        overrides: &GenreOverrides,
    ) -> Result<Self, CorpusError> {
        let parsed = parse_rels(rels, id, inventory)?;
        let docs = match conllu {
            Some(p) => parse_conllu(p)?,
            None => Vec::new(),
        };
        Ok(Self::assemble(parsed, docs, overrides))
    }

    pub fn document(&self, doc_id: &str) -> &DocumentModel {
        &self.documents[doc_id]
    }

    pub fn featurize_one(
        &self,
        inst: &RelationInstance,
        stoplist: &Stoplist,
    ) -> Result<Featurized, FeatureError> {
        let doc = self.document(&inst.doc_id);
        let features = compute_features(inst, doc, &self.id, self.units.get(&inst.doc_id), stoplist)?;
        let (context, context_warning) = extract_context_or_fallback(inst, doc);
        Ok(Featurized {
            features,
            context,
            context_warning,
        })
    }

    /// Features and context for every instance, in file order.
    pub fn featurize(&self, stoplist: &Stoplist) -> Result<Vec<Featurized>, FeatureError> {
        self.instances
            .iter()
            .map(|inst| self.featurize_one(inst, stoplist))
            .collect()
    }

    pub fn label_histogram(&self) -> BTreeMap<String, usize> {
        let mut hist = BTreeMap::new();
        for inst in &self.instances {
            *hist.entry(inst.label.clone()).or_default() += 1;
        }
        hist
    }
}
