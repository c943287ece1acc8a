use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use discoforge::augment::{
    augmented_file_name, emit_translation_batch, merge_translations, plan_augmentation, predicates_for,
    AugmentationMapping, AugmentationPlan, SourceIndex, SourceInstance, SourceRecord, TranslationBatch,
};
use discoforge::builder::{
    build_encoder_input, build_structured_prompt, build_verbose_prompt, render_records, OutputFormat,
};
use discoforge::corpus::{CorpusId, RelsWarning};
use discoforge::dataset::{CorpusData, Featurized};
use discoforge::eval::{confusion_to_matrix, pct, repair_labels, score_corpus, EvalReport, PredictionFile};
use discoforge::features::features_tsv;

use crate::config::{RunConfig, Style};
use crate::error::{invalid, runtime, CliResult};
use crate::manifest::{digest_file, RunManifest, StageLog};

pub const WORKERS_ENV: &str = "DISCOFORGE_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AugmentStep {
    Plan,
    Emit,
    Merge,
}

/// Thread count: the configured value (or all cores), capped by the
/// environment variable when set.
pub fn resolve_workers(configured: Option<usize>, env: Option<&str>) -> CliResult<usize> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut n = configured.unwrap_or(available);
    if let Some(v) = env {
        let cap: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|c| *c > 0)
            .ok_or_else(|| invalid(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
        n = n.min(cap);
    }
    Ok(n.max(1))
}

struct Loaded {
    data: CorpusData,
    featurized: Option<Vec<Featurized>>,
}

pub struct Runner {
    cfg: RunConfig,
    pool: rayon::ThreadPool,
    manifest: RunManifest,
    loaded: Option<Vec<Loaded>>,
}

impl Runner {
    pub fn new(cfg: RunConfig) -> CliResult<Runner> {
        let env = std::env::var(WORKERS_ENV).ok();
        let workers = resolve_workers(cfg.workers, env.as_deref())?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(runtime)?;
        let config_digest = cfg.source.as_deref().map(digest_file).transpose()?;
        let seeds = BTreeMap::from([
            ("repair".to_string(), cfg.seeds.repair),
            ("sampling".to_string(), cfg.seeds.sampling),
        ]);
        let manifest = RunManifest::new(&cfg.root, &cfg.output, config_digest, seeds, workers);
        Ok(Runner {
            cfg,
            pool,
            manifest,
            loaded: None,
        })
    }

    fn write(&self, log: &mut StageLog, path: &Path, bytes: &[u8]) -> CliResult<()> {
        discoforge::io::write_atomic(path, bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        log.output(&self.manifest, path, bytes);
        Ok(())
    }

    fn out(&self, parts: &[&str]) -> PathBuf {
        parts.iter().fold(self.cfg.output.clone(), |p, s| p.join(s))
    }

    fn record_inputs(&self, log: &mut StageLog) -> CliResult<()> {
        for p in &self.cfg.resource_files {
            log.input(&self.manifest, p)?;
        }
        for c in &self.cfg.corpora {
            log.input(&self.manifest, &c.rels)?;
            if let Some(p) = &c.conllu {
                log.input(&self.manifest, p)?;
            }
        }
        Ok(())
    }

    fn load(&mut self) -> CliResult<()> {
        if self.loaded.is_some() {
            return Ok(());
        }
        if self.cfg.corpora.is_empty() {
            return Err(invalid("no corpora configured"));
        }
        let cfg = &self.cfg;
        let data: Vec<CorpusData> = self.pool.install(|| {
            cfg.corpora
                .par_iter()
                .map(|c| {
                    CorpusData::load(&c.id, &c.rels, c.conllu.as_deref(), &cfg.inventory, &cfg.genres)
                        .map_err(|e| invalid(format!("{} ({}): {e}", c.id, c.rels.display())))
                })
                .collect::<CliResult<Vec<_>>>()
        })?;
        self.loaded = Some(
            data.into_iter()
                .map(|data| Loaded {
                    data,
                    featurized: None,
                })
                .collect(),
        );
        Ok(())
    }

    fn ensure_featurized(&mut self) -> CliResult<()> {
        self.load()?;
        let stoplist = &self.cfg.stoplist;
        let loaded = self.loaded.as_mut().expect("loaded");
        self.pool.install(|| {
            loaded
                .par_iter_mut()
                .filter(|l| l.featurized.is_none())
                .map(|l| {
                    let f = l
                        .data
                        .featurize(stoplist)
                        .map_err(|e| runtime(format!("{}: {e}", l.data.id)))?;
                    let fallbacks = f.iter().filter(|x| x.context_warning.is_some()).count();
                    if fallbacks > 0 {
                        log::warn!(
                            "{}: context for {fallbacks} instance(s) taken from sentence columns",
                            l.data.id
                        );
                    }
                    l.featurized = Some(f);
                    Ok(())
                })
                .collect::<CliResult<()>>()
        })
    }

    fn loaded(&self) -> &[Loaded] {
        self.loaded.as_deref().expect("corpora loaded")
    }

    fn find(&self, id: &CorpusId) -> Option<&Loaded> {
        self.loaded().iter().find(|l| &l.data.id == id)
    }

    pub fn validate(&mut self) -> CliResult<()> {
        self.load()?;
        let mut log = StageLog::new("validate");
        self.record_inputs(&mut log)?;
        let mut problems = Vec::new();
        for (l, entry) in self.loaded().iter().zip(&self.cfg.corpora) {
            let d = &l.data;
            if entry.conllu.is_none() {
                log::warn!("{}: no CoNLL-U input; documents rebuilt from sentence columns", d.id);
            }
            for w in &d.rels_warnings {
                match w {
                    RelsWarning::UnknownLabel { line, label } => {
                        problems.push(format!("{} line {line}: label '{label}' not in inventory", d.id))
                    }
                    other => log::warn!("{}: {other:?}", d.id),
                }
            }
            if let Some(p) = &entry.predictions {
                log.input(&self.manifest, p)?;
                let pred = PredictionFile::load(p).map_err(invalid)?;
                if let Err(e) = pred.align(&d.id, &d.instances) {
                    problems.push(e.to_string());
                }
            }
            println!(
                "{}\t{} instances\t{} documents\t{} rebuilt",
                d.id,
                d.instances.len(),
                d.documents.len(),
                d.synthesized.len()
            );
        }
        self.manifest.push(log.finish());
        if problems.is_empty() {
            Ok(())
        } else {
            Err(invalid(problems.join("; ")))
        }
    }

    pub fn featurize(&mut self) -> CliResult<()> {
        self.ensure_featurized()?;
        let mut log = StageLog::new("featurize");
        self.record_inputs(&mut log)?;
        for l in self.loaded() {
            let f = l.featurized.as_ref().expect("featurized");
            let tsv = features_tsv(l.data.instances.iter().zip(f.iter().map(|x| &x.features)));
            let path = self.out(&["features", &format!("{}.tsv", l.data.id)]);
            self.write(&mut log, &path, tsv.as_bytes())?;
        }
        self.manifest.push(log.finish());
        Ok(())
    }

    fn render(&self, l: &Loaded, style: Style) -> CliResult<String> {
        let cfg = &self.cfg;
        let f = l.featurized.as_ref().expect("featurized");
        let ctx_of = |x: &Featurized| {
            if cfg.options.context {
                x.context.clone()
            } else {
                Default::default()
            }
        };
        let err = |e: discoforge::builder::BuildError| runtime(format!("{}: {e}", l.data.id));
        let rows = l.data.instances.iter().zip(f);
        Ok(match style {
            Style::Verbose => {
                let recs = rows
                    .map(|(i, x)| build_verbose_prompt(i, &x.features, &ctx_of(x), &cfg.template, &cfg.inventory, &cfg.options))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(err)?;
                render_records(&recs, cfg.format)
            }
            Style::Structured => {
                let recs = rows
                    .map(|(i, x)| build_structured_prompt(i, &x.features, &ctx_of(x), &cfg.inventory, &cfg.options))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(err)?;
                render_records(&recs, cfg.format)
            }
            Style::Encoder => {
                let mut recs = Vec::new();
                let mut unknown_speaker = 0;
                for (i, x) in rows {
                    if !cfg.inventory.contains(&i.label) {
                        return Err(runtime(format!(
                            "{}: instance {}: label '{}' is not in the inventory",
                            l.data.id, i.instance_id, i.label
                        )));
                    }
                    let (r, w) = build_encoder_input(i, &x.features, &cfg.options.encoder_features).map_err(err)?;
                    unknown_speaker += usize::from(w.is_some());
                    recs.push(r);
                }
                if unknown_speaker > 0 && cfg.options.encoder_features.contains(discoforge::builder::FeatureKind::SameSpeaker) {
                    log::info!(
                        "{}: {unknown_speaker} instance(s) without speaker information encoded as SAME_SPEAKER_0",
                        l.data.id
                    );
                }
                render_records(&recs, cfg.format)
            }
        })
    }

    pub fn build(&mut self) -> CliResult<()> {
        self.ensure_featurized()?;
        let mut log = StageLog::new("build");
        self.record_inputs(&mut log)?;
        let ext = match self.cfg.format {
            OutputFormat::Jsonl => "jsonl",
            OutputFormat::Tsv => "tsv",
        };
        let jobs: Vec<(usize, Style)> = (0..self.loaded().len())
            .flat_map(|i| self.cfg.styles.iter().map(move |s| (i, *s)))
            .collect();
        let rendered: Vec<String> = self.pool.install(|| {
            jobs.par_iter()
                .map(|(i, s)| self.render(&self.loaded()[*i], *s))
                .collect::<CliResult<Vec<_>>>()
        })?;
        for ((i, s), body) in jobs.iter().zip(rendered) {
            let id = &self.loaded()[*i].data.id;
            let path = self.out(&["build", &format!("{id}.{}.{ext}", s.as_str())]);
            self.write(&mut log, &path, body.as_bytes())?;
        }
        self.manifest.push(log.finish());
        Ok(())
    }

    fn applicable_mappings(&self) -> CliResult<Vec<AugmentationMapping>> {
        let configured = |id: &CorpusId| self.cfg.corpus(id).is_some();
        if let Some(targets) = &self.cfg.augment_targets {
            for t in targets {
                if !configured(t) {
                    return Err(invalid(format!("augmentation target {t} is not a configured corpus")));
                }
                if !self.cfg.mappings.iter().any(|m| &m.target == t) {
                    return Err(invalid(format!("no augmentation mapping for {t}")));
                }
            }
        }
        let mut out = Vec::new();
        for m in &self.cfg.mappings {
            let wanted = self
                .cfg
                .augment_targets
                .as_ref()
                .is_none_or(|ts| ts.contains(&m.target));
            if !wanted || !configured(&m.target) {
                continue;
            }
            if !m.sources.iter().any(configured) {
                let msg = format!("{}: none of its source corpora is configured", m.target);
                if self.cfg.augment_targets.is_some() {
                    return Err(invalid(msg));
                }
                log::warn!("{msg}; skipped");
                continue;
            }
            out.push(m.clone());
        }
        Ok(out)
    }

    fn plan_for(&self, m: &AugmentationMapping) -> CliResult<(AugmentationPlan, SourceIndex)> {
        let mut sources = Vec::new();
        let mut index = SourceIndex::new();
        for l in self.loaded().iter().filter(|l| m.sources.contains(&l.data.id)) {
            let f = l.featurized.as_ref().expect("featurized");
            for (inst, x) in l.data.instances.iter().zip(f) {
                sources.push(SourceInstance {
                    corpus: l.data.id.clone(),
                    genre: l.data.document(&inst.doc_id).genre().to_string(),
                    instance: inst.clone(),
                });
                index.insert(
                    (l.data.id.clone(), inst.instance_id),
                    SourceRecord {
                        instance: inst.clone(),
                        context: Some(x.context.clone()),
                    },
                );
            }
        }
        let target = &self.find(&m.target).expect("configured target").data;
        let predicates = predicates_for(m).map_err(invalid)?;
        let plan = plan_augmentation(
            m,
            &sources,
            &target.label_histogram(),
            target.instances.len(),
            &predicates,
            self.cfg.seeds.sampling,
        )
        .map_err(runtime)?;
        Ok((plan, index))
    }

    pub fn augment(&mut self, step: AugmentStep) -> CliResult<()> {
        self.ensure_featurized()?;
        let mut log = StageLog::new(match step {
            AugmentStep::Plan => "augment-plan",
            AugmentStep::Emit => "augment-emit",
            AugmentStep::Merge => "augment-merge",
        });
        self.record_inputs(&mut log)?;
        let mappings = self.applicable_mappings()?;
        if mappings.is_empty() {
            log::warn!("no augmentation mapping targets a configured corpus");
        }
        for m in &mappings {
            let (plan, index) = self.plan_for(m)?;
            let t = &m.target;
            let json = serde_json::to_string_pretty(&plan).map_err(runtime)? + "\n";
            self.write(&mut log, &self.out(&["augment", &format!("{t}.plan.json")]), json.as_bytes())?;
            println!(
                "{t}\tquota {}\tselected {}\tshortfall {}",
                plan.total_quota(),
                plan.selected.len(),
                plan.shortfall.values().sum::<usize>()
            );
            match step {
                AugmentStep::Plan => {}
                AugmentStep::Emit => {
                    let batch = emit_translation_batch(&plan, &index, &self.cfg.augment_fields).map_err(runtime)?;
                    let path = self.out(&["augment", &format!("{t}.batch.tsv")]);
                    self.write(&mut log, &path, batch.to_tsv().as_bytes())?;
                }
                AugmentStep::Merge => {
                    let dir = self
                        .cfg
                        .translations
                        .as_ref()
                        .ok_or_else(|| invalid("merging needs a translations directory"))?;
                    let path = dir.join(format!("{t}.batch.tsv"));
                    log.input(&self.manifest, &path).map_err(|e| invalid(e.to_string()))?;
                    let batch = TranslationBatch::load(&path).map_err(invalid)?;
                    let header = &self.find(t).expect("configured target").data.header;
                    let merged = merge_translations(&plan, &batch, &index, header).map_err(|e| match e {
                        discoforge::augment::AugmentError::IncompleteBatch(_) => invalid(e),
                        other => runtime(other),
                    })?;
                    let out = self.out(&["augment", &augmented_file_name(t)]);
                    self.write(&mut log, &out, &merged.rels.bytes)?;
                }
            }
        }
        self.manifest.push(log.finish());
        Ok(())
    }

    pub fn has_predictions(&self) -> bool {
        self.cfg.corpora.iter().any(|c| c.predictions.is_some())
    }

    pub fn score(&mut self) -> CliResult<()> {
        self.load()?;
        if !self.has_predictions() {
            return Err(invalid("no corpus has a prediction file"));
        }
        let mut log = StageLog::new("score");
        let seed = self.cfg.seeds.repair;
        let mut scores = Vec::new();
        let mut repairs = 0;
        for (l, entry) in self.loaded().iter().zip(&self.cfg.corpora) {
            let Some(p) = &entry.predictions else { continue };
            log.input(&self.manifest, &entry.rels)?;
            log.input(&self.manifest, p)?;
            let d = &l.data;
            let raw = PredictionFile::load(p)
                .and_then(|f| f.align(&d.id, &d.instances))
                .map_err(invalid)?;
            let fixed = repair_labels(&raw, &self.cfg.inventory, seed).map_err(invalid)?;
            if fixed.repairs > 0 {
                log::warn!("{}: replaced {} invalid predicted label(s)", d.id, fixed.repairs);
            }
            repairs += fixed.repairs;
            let s = score_corpus(&d.id, &d.instances, &fixed.labels).map_err(invalid)?;
            println!("{}\t{}\t{}/{}", s.corpus, pct(s.accuracy), s.correct, s.total);
            scores.push(s);
        }
        let report = EvalReport::from_scores(&scores, Some(seed), repairs).map_err(runtime)?;
        println!("macro_avg\t{}", pct(report.macro_avg));
        if let Some(m) = report.micro_avg {
            println!("micro_avg\t{}", pct(m));
        }
        let matrix = confusion_to_matrix(&report.confusion, &self.cfg.inventory);
        self.write(&mut log, &self.out(&["score", "report.json"]), report.to_json().as_bytes())?;
        self.write(&mut log, &self.out(&["score", "confusion.tsv"]), matrix.to_tsv().as_bytes())?;
        self.write(
            &mut log,
            &self.out(&["score", "confusion_normalized.tsv"]),
            matrix.to_normalized_tsv().as_bytes(),
        )?;
        self.manifest.push(log.finish());
        Ok(())
    }

    /// Every stage in dependency order. Merging runs only when translations
    /// are configured and scoring only when predictions are.
    pub fn all(&mut self) -> CliResult<()> {
        self.validate()?;
        self.featurize()?;
        self.build()?;
        let step = if self.cfg.translations.is_some() {
            AugmentStep::Merge
        } else {
            AugmentStep::Emit
        };
        self.augment(step)?;
        if self.has_predictions() {
            self.score()?;
        }
        Ok(())
    }

    pub fn write_manifest(&self) -> CliResult<()> {
        let path = self.out(&["manifest.json"]);
        discoforge::io::write_atomic(&path, self.manifest.to_json().as_bytes())
            .map_err(|e| runtime(format!("{}: {e}", path.display())))
    }
}
