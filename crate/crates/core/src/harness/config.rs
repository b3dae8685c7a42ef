//! Plain-text `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique.
//! Generator keys carry a `gen.` prefix and relevancy keys a `rel.` prefix;
//! everything else configures the pipeline.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minigen::{DecodeConfig, GeneratorConfig, Strategy, TrainConfig};
use crate::relevancy::{RelevancyConfig, DEFAULT_TOP_K};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValueConfig {
    entries: BTreeMap<String, String>,
    lines: BTreeMap<String, usize>,
}

impl KeyValueConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = KeyValueConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected key=value, found {line:?}", i + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::InvalidArgument(format!("config line {}: empty key", i + 1)));
            }
            if let Some(prev) = cfg.lines.get(key) {
                return Err(Error::InvalidArgument(format!(
                    "config line {}: key {key:?} already set on line {prev}",
                    i + 1
                )));
            }
            cfg.entries.insert(key.to_string(), value.trim().to_string());
            cfg.lines.insert(key.to_string(), i + 1);
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn parsed<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| {
                let at = self.lines.get(key).map(|l| format!(" (line {l})")).unwrap_or_default();
                Error::InvalidArgument(format!("config key {key}{at}: cannot parse {v:?}: {e}"))
            }),
        }
    }

    fn load<T>(&self, key: &str, slot: &mut T) -> Result<()>
    where
        T: FromStr,
        T::Err: Display,
    {
        if let Some(v) = self.parsed(key)? {
            *slot = v;
        }
        Ok(())
    }

    /// Rejects keys that no section understands.
    pub fn check_known(&self) -> Result<()> {
        match self.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            Some(k) => Err(Error::InvalidArgument(format!("unknown config key {k:?}"))),
            None => Ok(()),
        }
    }
}

pub const KNOWN_KEYS: &[&str] = &[
    "top_k",
    "scorer",
    "variant",
    "ambiguity",
    "decode.strategy",
    "decode.beam_width",
    "decode.max_len",
    "decode.length_penalty",
    "max_context_len",
    "relevancy_artifact",
    "generator_artifact",
    "vocab",
    "lexicon",
    "negations",
    "seed",
    "threshold",
    "rel.d_model",
    "rel.n_heads",
    "rel.n_layers",
    "rel.ffn_dim",
    "rel.max_seq_len",
    "rel.dropout",
    "rel.variant",
    "rel.vocab_size",
    "rel.epochs",
    "rel.batch_size",
    "rel.learning_rate",
    "rel.clip_norm",
    "rel.shuffle",
    "gen.d_model",
    "gen.n_heads",
    "gen.n_encoder_layers",
    "gen.n_decoder_layers",
    "gen.ffn_dim",
    "gen.max_src_len",
    "gen.max_tgt_len",
    "gen.dropout",
    "gen.vocab_size",
    "gen.epochs",
    "gen.batch_size",
    "gen.learning_rate",
    "gen.clip_norm",
    "gen.shuffle",
];

/// Which stages of the pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Generator over all candidates in input order.
    GenOnly,
    /// Ranking and top-k, no sentiment filter.
    RelOnly,
    /// Ranking, top-k and the majority sentiment filter.
    #[default]
    Full,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::GenOnly => "gen",
            Variant::RelOnly => "rel",
            Variant::Full => "full",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gen" | "gen_only" => Ok(Variant::GenOnly),
            "rel" | "rel_only" => Ok(Variant::RelOnly),
            "full" => Ok(Variant::Full),
            other => Err(Error::InvalidArgument(format!(
                "unknown variant {other:?} (expected gen, rel or full)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    Lexical,
    #[default]
    Trained,
    /// Seeded random scores, for ablations.
    Random,
}

impl FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lexical" => Ok(ScorerKind::Lexical),
            "trained" => Ok(ScorerKind::Trained),
            "random" => Ok(ScorerKind::Random),
            other => Err(Error::InvalidArgument(format!(
                "unknown scorer {other:?} (expected lexical, trained or random)"
            ))),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" => Ok(Strategy::Greedy),
            "beam" => Ok(Strategy::Beam),
            other => Err(Error::InvalidArgument(format!("unknown decode strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub top_k: usize,
    pub scorer: ScorerKind,
    pub variant: Variant,
    /// Allows the sentiment filter in the full variant.
    pub ambiguity: bool,
    pub decode: DecodeConfig,
    /// Token budget of the generator input; also capped by the model.
    pub max_context_len: usize,
    pub relevancy_artifact: Option<PathBuf>,
    pub generator_artifact: Option<PathBuf>,
    /// Vocabulary both artifacts must have been trained with.
    pub vocab: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub negations: Option<PathBuf>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            top_k: DEFAULT_TOP_K,
            scorer: ScorerKind::Trained,
            variant: Variant::Full,
            ambiguity: true,
            decode: DecodeConfig::default(),
            max_context_len: 256,
            relevancy_artifact: None,
            generator_artifact: None,
            vocab: None,
            lexicon: None,
            negations: None,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k == 0 {
            return Err(Error::InvalidArgument("top_k must be at least 1".into()));
        }
        if self.max_context_len == 0 {
            return Err(Error::InvalidArgument("max_context_len must be at least 1".into()));
        }
        if self.lexicon.is_some() != self.negations.is_some() {
            return Err(Error::InvalidArgument(
                "lexicon and negations must be given together".into(),
            ));
        }
        self.decode.validate()
    }

    pub fn apply(&mut self, cfg: &KeyValueConfig) -> Result<()> {
        cfg.load("top_k", &mut self.top_k)?;
        cfg.load("scorer", &mut self.scorer)?;
        cfg.load("variant", &mut self.variant)?;
        cfg.load("ambiguity", &mut self.ambiguity)?;
        cfg.load("decode.strategy", &mut self.decode.strategy)?;
        cfg.load("decode.beam_width", &mut self.decode.beam_width)?;
        cfg.load("decode.max_len", &mut self.decode.max_len)?;
        cfg.load("decode.length_penalty", &mut self.decode.length_penalty)?;
        cfg.load("max_context_len", &mut self.max_context_len)?;
        cfg.load("seed", &mut self.seed)?;
        for (key, slot) in [
            ("relevancy_artifact", &mut self.relevancy_artifact),
            ("generator_artifact", &mut self.generator_artifact),
            ("vocab", &mut self.vocab),
            ("lexicon", &mut self.lexicon),
            ("negations", &mut self.negations),
        ] {
            if let Some(v) = cfg.get(key) {
                *slot = Some(PathBuf::from(v));
            }
        }
        Ok(())
    }
}

fn apply_train(cfg: &KeyValueConfig, prefix: &str, t: &mut TrainConfig) -> Result<()> {
    cfg.load(&format!("{prefix}.epochs"), &mut t.epochs)?;
    cfg.load(&format!("{prefix}.batch_size"), &mut t.batch_size)?;
    cfg.load(&format!("{prefix}.learning_rate"), &mut t.learning_rate)?;
    cfg.load(&format!("{prefix}.shuffle"), &mut t.shuffle)?;
    cfg.load("seed", &mut t.seed)?;
    if let Some(v) = cfg.get(&format!("{prefix}.clip_norm")) {
        t.clip_norm = match v {
            "none" | "off" => None,
            _ => Some(cfg.parsed(&format!("{prefix}.clip_norm"))?.expect("key present")),
        };
    }
    Ok(())
}

/// Relevancy model and optimizer settings from `rel.*` keys.
pub fn apply_relevancy(cfg: &KeyValueConfig, model: &mut RelevancyConfig, train: &mut TrainConfig) -> Result<()> {
    cfg.load("rel.d_model", &mut model.d_model)?;
    cfg.load("rel.n_heads", &mut model.n_heads)?;
    cfg.load("rel.n_layers", &mut model.n_layers)?;
    cfg.load("rel.ffn_dim", &mut model.ffn_dim)?;
    cfg.load("rel.max_seq_len", &mut model.max_seq_len)?;
    cfg.load("rel.dropout", &mut model.dropout)?;
    cfg.load("rel.variant", &mut model.variant)?;
    cfg.load("seed", &mut model.seed)?;
    apply_train(cfg, "rel", train)
}

/// Generator and optimizer settings from `gen.*` keys.
pub fn apply_generator(cfg: &KeyValueConfig, model: &mut GeneratorConfig, train: &mut TrainConfig) -> Result<()> {
    cfg.load("gen.d_model", &mut model.d_model)?;
    cfg.load("gen.n_heads", &mut model.n_heads)?;
    cfg.load("gen.n_encoder_layers", &mut model.n_encoder_layers)?;
    cfg.load("gen.n_decoder_layers", &mut model.n_decoder_layers)?;
    cfg.load("gen.ffn_dim", &mut model.ffn_dim)?;
    cfg.load("gen.max_src_len", &mut model.max_src_len)?;
    cfg.load("gen.max_tgt_len", &mut model.max_tgt_len)?;
    cfg.load("gen.dropout", &mut model.dropout)?;
    cfg.load("seed", &mut model.seed)?;
    apply_train(cfg, "gen", train)
}
