//! Declarative run configuration.
//!
//! ```toml
//! output = "out"                 # output root
//! labels = "labels.txt"          # optional, bundled inventory otherwise
//! template = "prompt.txt"        # optional verbose prompt template
//! mappings = "augmentation.tsv"  # optional, bundled mappings otherwise
//! genres = "genres.tsv"          # optional per-corpus genre fallbacks
//! stoplist = "stop.txt"          # optional lexical-overlap stoplist
//! workers = 4                    # optional; DISCOFORGE_WORKERS caps it
//!
//! [seeds]
//! sampling = 13
//! repair = 7
//!
//! [features]
//! decoder = ["same_speaker", "position", "distance"]
//! encoder = ["genre", "discontinuous", "is_sentence", "same_speaker"]
//! context = true
//!
//! [build]
//! styles = ["verbose", "structured", "encoder"]
//! format = "jsonl"
//!
//! [augment]
//! targets = ["deu.rst.pcc"]      # optional, every configured target otherwise
//! fields = ["unit1", "unit2", "sent1", "sent2"]
//! translations = "translated"    # directory of completed batches
//!
//! [[corpus]]
//! id = "eng.erst.gum"            # optional, taken from the file name otherwise
//! rels = "data/eng.erst.gum_train.rels"
//! conllu = "data/eng.erst.gum_train.conllu"
//! predictions = "pred/eng.erst.gum.txt"
//! ```
//!
//! Relative paths resolve against the directory holding the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use discoforge::augment::{default_mappings, load_mappings, AugmentationMapping, BatchField};
use discoforge::builder::{BuildOptions, FeatureSubset, OutputFormat, PromptTemplate};
use discoforge::corpus::{CorpusId, GenreOverrides, LabelInventory};
use discoforge::features::Stoplist;

use crate::error::{invalid, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Verbose,
    Structured,
    Encoder,
}

impl Style {
    pub const ALL: [Style; 3] = [Style::Verbose, Style::Structured, Style::Encoder];

    pub fn as_str(self) -> &'static str {
        match self {
            Style::Verbose => "verbose",
            Style::Structured => "structured",
            Style::Encoder => "encoder",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeeds {
    #[serde(default)]
    sampling: u64,
    #[serde(default)]
    repair: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeatures {
    decoder: Option<Vec<String>>,
    encoder: Option<Vec<String>>,
    #[serde(default = "yes")]
    context: bool,
}

impl Default for RawFeatures {
    fn default() -> Self {
        RawFeatures {
            decoder: None,
            encoder: None,
            context: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBuild {
    styles: Option<Vec<Style>>,
    format: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAugment {
    targets: Option<Vec<String>>,
    fields: Option<Vec<String>>,
    translations: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    id: Option<String>,
    rels: PathBuf,
    conllu: Option<PathBuf>,
    predictions: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output: PathBuf,
    labels: Option<PathBuf>,
    template: Option<PathBuf>,
    mappings: Option<PathBuf>,
    genres: Option<PathBuf>,
    stoplist: Option<PathBuf>,
    workers: Option<usize>,
    #[serde(default)]
    seeds: RawSeeds,
    #[serde(default)]
    features: RawFeatures,
    #[serde(default)]
    build: RawBuild,
    #[serde(default)]
    augment: RawAugment,
    #[serde(default, rename = "corpus")]
    corpora: Vec<RawCorpus>,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: CorpusId,
    pub rels: PathBuf,
    pub conllu: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Seeds {
    pub sampling: u64,
    pub repair: u64,
}

/// A validated configuration with resources loaded.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Base for relative paths recorded in the run manifest.
    pub root: PathBuf,
    pub source: Option<PathBuf>,
    pub output: PathBuf,
    pub corpora: Vec<CorpusEntry>,
    pub inventory: LabelInventory,
    pub template: PromptTemplate,
    pub mappings: Vec<AugmentationMapping>,
    pub genres: GenreOverrides,
    pub stoplist: Stoplist,
    pub workers: Option<usize>,
    pub seeds: Seeds,
    pub options: BuildOptions,
    pub styles: Vec<Style>,
    pub format: OutputFormat,
    pub augment_targets: Option<Vec<CorpusId>>,
    pub augment_fields: Vec<BatchField>,
    pub translations: Option<PathBuf>,
    /// Files read while loading the configuration itself.
    pub resource_files: Vec<PathBuf>,
}

fn existing(base: &Path, p: &Path, what: &str) -> CliResult<PathBuf> {
    let full = base.join(p);
    if !full.exists() {
        return Err(invalid(format!("{what} '{}' does not exist", full.display())));
    }
    Ok(full)
}

fn corpus_id(explicit: Option<&str>, rels: &Path) -> CliResult<CorpusId> {
    match explicit {
        Some(id) => id.parse().map_err(invalid),
        None => {
            let name = rels.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            CorpusId::from_file_name(name).ok_or_else(|| {
                invalid(format!(
                    "cannot infer corpus id from '{}'; set it explicitly",
                    rels.display()
                ))
            })
        }
    }
}

/// Default batch fields: both units and sentences, plus context when enabled.
pub fn default_fields(context: bool) -> Vec<BatchField> {
    let mut f = vec![BatchField::Unit1, BatchField::Unit2, BatchField::Sent1, BatchField::Sent2];
    if context {
        f.extend([BatchField::ContextPre, BatchField::ContextPost]);
    }
    f
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        let mut cfg = Self::from_toml(&text, &base)?;
        cfg.source = Some(path.to_path_buf());
        Ok(cfg)
    }

    pub fn from_toml(text: &str, base: &Path) -> CliResult<RunConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(invalid)?;
        let mut resource_files = Vec::new();
        let mut resource = |p: &Option<PathBuf>, what: &str| -> CliResult<Option<PathBuf>> {
            p.as_ref()
                .map(|p| existing(base, p, what))
                .transpose()
                .inspect(|p| resource_files.extend(p.iter().cloned()))
        };
        let inventory = match resource(&raw.labels, "label inventory")? {
            Some(p) => LabelInventory::load(&p).map_err(invalid)?,
            None => LabelInventory::default_inventory(),
        };
        let template = match resource(&raw.template, "template")? {
            Some(p) => PromptTemplate::load(&p).map_err(invalid)?,
            None => PromptTemplate::default_verbose(),
        };
        let mappings = match resource(&raw.mappings, "mapping file")? {
            Some(p) => load_mappings(&p).map_err(invalid)?,
            None => default_mappings(),
        };
        let genres = match resource(&raw.genres, "genre file")? {
            Some(p) => GenreOverrides::load(&p).map_err(invalid)?,
            None => GenreOverrides::bundled(),
        };
        let stoplist = match resource(&raw.stoplist, "stoplist")? {
            Some(p) => Stoplist::load(&p).map_err(invalid)?,
            None => Stoplist::default(),
        };

        let mut corpora = Vec::new();
        for c in &raw.corpora {
            let rels = existing(base, &c.rels, "rels file")?;
            let id = corpus_id(c.id.as_deref(), &rels)?;
            if corpora.iter().any(|x: &CorpusEntry| x.id == id) {
                return Err(invalid(format!("corpus {id} configured twice")));
            }
            corpora.push(CorpusEntry {
                id,
                rels,
                conllu: c.conllu.as_ref().map(|p| existing(base, p, "CoNLL-U file")).transpose()?,
                predictions: c
                    .predictions
                    .as_ref()
                    .map(|p| existing(base, p, "prediction file"))
                    .transpose()?,
            });
        }

        let decoder = match &raw.features.decoder {
            Some(names) => FeatureSubset::parse_list(names).map_err(invalid)?,
            None => FeatureSubset::decoder_default(),
        };
        let encoder = match &raw.features.encoder {
            Some(names) => FeatureSubset::parse_list(names).map_err(invalid)?,
            None => FeatureSubset::encoder_default(),
        };
        let format = match &raw.build.format {
            Some(f) => OutputFormat::from_str(f).map_err(invalid)?,
            None => OutputFormat::Jsonl,
        };
        let mut styles = raw.build.styles.clone().unwrap_or_else(|| Style::ALL.to_vec());
        styles.sort();
        styles.dedup();

        let augment_targets = raw
            .augment
            .targets
            .as_ref()
            .map(|ts| ts.iter().map(|t| t.parse().map_err(invalid)).collect::<CliResult<Vec<_>>>())
            .transpose()?;
        let augment_fields = match &raw.augment.fields {
            Some(fs) => fs
                .iter()
                .map(|f| f.parse::<BatchField>().map_err(invalid))
                .collect::<CliResult<Vec<_>>>()?,
            None => default_fields(raw.features.context),
        };
        if raw.workers == Some(0) {
            return Err(invalid("workers must be at least 1"));
        }

        Ok(RunConfig {
            root: base.to_path_buf(),
            source: None,
            output: base.join(&raw.output),
            corpora,
            inventory,
            template,
            mappings,
            genres,
            stoplist,
            workers: raw.workers,
            seeds: Seeds {
                sampling: raw.seeds.sampling,
                repair: raw.seeds.repair,
            },
            options: BuildOptions {
                decoder_features: decoder,
                encoder_features: encoder,
                context: raw.features.context,
            },
            styles,
            format,
            augment_targets,
            augment_fields,
            translations: raw.augment.translations.map(|p| base.join(p)),
            resource_files,
        })
    }

    /// A one-corpus configuration assembled from command-line flags.
    pub fn single(
        rels: &Path,
        conllu: Option<&Path>,
        id: Option<&str>,
        labels: Option<&Path>,
        output: &Path,
    ) -> CliResult<RunConfig> {
        let here = Path::new("");
        let rels = existing(here, rels, "rels file")?;
        let entry = CorpusEntry {
            id: corpus_id(id, &rels)?,
            rels,
            conllu: conllu.map(|p| existing(here, p, "CoNLL-U file")).transpose()?,
            predictions: None,
        };
        let mut cfg = Self::from_toml("output = \".\"\n", here)?;
        cfg.output = output.to_path_buf();
        cfg.corpora.push(entry);
        if let Some(p) = labels {
            let p = existing(here, p, "label inventory")?;
            cfg.inventory = LabelInventory::load(&p).map_err(invalid)?;
            cfg.resource_files.push(p);
        }
        Ok(cfg)
    }

    pub fn corpus(&self, id: &CorpusId) -> Option<&CorpusEntry> {
        self.corpora.iter().find(|c| &c.id == id)
    }
}
