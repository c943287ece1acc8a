//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function takes and returns strings so the page needs no
//! glue beyond what `wasm-bindgen` generates. The plain Rust functions behind
//! them are public for native testing.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use discoforge::augment::{apportion, total_quota};
use discoforge::builder::{
    build_encoder_input, build_structured_prompt, build_verbose_prompt, BuildOptions, FeatureSubset,
    PromptTemplate,
};
use discoforge::corpus::{parse_rels_str, CorpusId, GenreOverrides, LabelInventory};
use discoforge::dataset::CorpusData;
use discoforge::features::Stoplist;
use discoforge::pruning::{block_influence, ActivationDump, Matrix};

/// Renders every instance of a pasted `.rels` split in one style
/// (`verbose`, `structured` or `encoder`). Documents are rebuilt from the
/// sentence columns, so no CoNLL-U input is needed.
pub fn render(rels: &str, corpus: &str, style: &str) -> Result<Vec<Value>, String> {
    let id: CorpusId = corpus.trim().parse().map_err(|e| format!("{e}"))?;
    let inventory = LabelInventory::default_inventory();
    let parsed = parse_rels_str(rels, &id, &inventory).map_err(|e| e.to_string())?;
    let data = CorpusData::assemble(parsed, Vec::new(), &GenreOverrides::bundled());
    let featurized = data.featurize(&Stoplist::default()).map_err(|e| e.to_string())?;
    let opts = BuildOptions::default();
    let template = PromptTemplate::default_verbose();
    data.instances
        .iter()
        .zip(&featurized)
        .map(|(inst, f)| {
            let (text, target) = match style {
                "verbose" => {
                    let r = build_verbose_prompt(inst, &f.features, &f.context, &template, &inventory, &opts)
                        .map_err(|e| e.to_string())?;
                    (r.prompt, r.target)
                }
                "structured" => {
                    let r = build_structured_prompt(inst, &f.features, &f.context, &inventory, &opts)
                        .map_err(|e| e.to_string())?;
                    (r.prompt, r.target)
                }
                "encoder" => {
                    let (r, _) = build_encoder_input(inst, &f.features, &FeatureSubset::encoder_default())
                        .map_err(|e| e.to_string())?;
                    (r.input, r.target)
                }
                other => return Err(format!("unknown style '{other}'")),
            };
            Ok(json!({ "id": inst.instance_id, "input": text, "target": target }))
        })
        .collect()
}

/// Per-label augmentation quota for a target histogram (`label<TAB>count`
/// lines) at the given ratio of the target's size.
pub fn quota(histogram: &str, ratio: f64) -> Result<BTreeMap<String, usize>, String> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(format!("ratio {ratio} outside (0, 1]"));
    }
    let mut hist = BTreeMap::new();
    for (i, line) in histogram.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (label, count) = line
            .rsplit_once(|c: char| c.is_whitespace())
            .ok_or_else(|| format!("line {}: expected 'label count'", i + 1))?;
        let count: usize = count
            .parse()
            .map_err(|_| format!("line {}: bad count '{count}'", i + 1))?;
        *hist.entry(label.trim().to_string()).or_default() += count;
    }
    let size: usize = hist.values().sum();
    Ok(apportion(&hist, total_quota(ratio, size)))
}

/// Block influence of one layer given its input and output hidden states as
/// JSON arrays of rows.
pub fn influence(input: &str, output: &str) -> Result<f64, String> {
    let matrix = |text: &str| -> Result<Matrix, String> {
        let rows: Vec<Vec<f32>> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Matrix::from_rows(&rows).ok_or_else(|| "rows must be non-empty and of equal length".to_string())
    };
    let dump = ActivationDump::new(0, matrix(input)?, matrix(output)?).map_err(|e| e.to_string())?;
    block_influence(&dump).map(|s| s.influence).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = renderInputs)]
pub fn render_inputs(rels: &str, corpus: &str, style: &str) -> Result<String, JsError> {
    let records = render(rels, corpus, style).map_err(|e| JsError::new(&e))?;
    Ok(Value::Array(records).to_string())
}

#[wasm_bindgen(js_name = augmentationQuota)]
pub fn augmentation_quota(histogram: &str, ratio: f64) -> Result<String, JsError> {
    let q = quota(histogram, ratio).map_err(|e| JsError::new(&e))?;
    Ok(json!(q).to_string())
}

#[wasm_bindgen(js_name = blockInfluence)]
pub fn block_influence_js(input: &str, output: &str) -> Result<f64, JsError> {
    influence(input, output).map_err(|e| JsError::new(&e))
}
