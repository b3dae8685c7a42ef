//! Versioned JSON container for trained weights.
//!
//! Parameters are stored as hex-encoded little-endian f64 bytes so a save
//! and load round trip is bit-exact. The container records the hash of the
//! vocabulary it was trained with and refuses to load when the embedded
//! vocabulary, or an expected one supplied by the caller, does not match.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::minigen::params::checksum;
use crate::minigen::{GeneratorConfig, GeneratorParams, TrainConfig};
use crate::relevancy::{RelevancyConfig, RelevancyModel};

pub const ARTIFACT_FORMAT: &str = "prodqa-artifact";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Relevancy,
    Generator,
}

impl ArtifactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::Relevancy => "relevancy",
            ArtifactKind::Generator => "generator",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact<H> {
    pub format: String,
    pub version: u32,
    pub kind: ArtifactKind,
    pub vocab_hash: String,
    pub vocabulary: Vocabulary,
    pub hyperparameters: H,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainConfig>,
    pub param_count: usize,
    pub params: String,
    /// SHA-256 of the parameter bytes.
    pub checksum: String,
}

/// Identity of a loaded artifact, as reported by the health route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactInfo {
    pub kind: ArtifactKind,
    pub version: u32,
    pub vocab_hash: String,
    pub checksum: String,
}

fn encode_params(data: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for x in data {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    hex::encode(bytes)
}

fn decode_params(s: &str, count: usize) -> Result<Vec<f64>> {
    let bytes = hex::decode(s).map_err(|e| Error::Artifact(format!("parameter block is not valid hex: {e}")))?;
    if bytes.len() != count * 8 {
        return Err(Error::Artifact(format!(
            "parameter block holds {} bytes, expected {} for {count} parameters",
            bytes.len(),
            count * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

impl<H: Serialize + DeserializeOwned> Artifact<H> {
    pub fn new(
        kind: ArtifactKind,
        vocabulary: Vocabulary,
        hyperparameters: H,
        training: Option<TrainConfig>,
        data: &[f64],
    ) -> Self {
        Artifact {
            format: ARTIFACT_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            kind,
            vocab_hash: vocabulary.hash(),
            vocabulary,
            hyperparameters,
            training,
            param_count: data.len(),
            params: encode_params(data),
            checksum: checksum(data),
        }
    }

    pub fn info(&self) -> ArtifactInfo {
        ArtifactInfo {
            kind: self.kind,
            version: self.version,
            vocab_hash: self.vocab_hash.clone(),
            checksum: self.checksum.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(&mut de)
            .map_err(|e| Error::Artifact(format!("{}: field {}: {}", path.display(), e.path(), e.inner())))
    }

    /// Checks format, version, kind, vocabulary hash and parameter checksum
    /// and returns the decoded parameters.
    pub fn verify(&self, kind: ArtifactKind, expected_vocab: Option<&Vocabulary>) -> Result<Vec<f64>> {
        if self.format != ARTIFACT_FORMAT {
            return Err(Error::Artifact(format!("unknown artifact format {:?}", self.format)));
        }
        if self.version != ARTIFACT_VERSION {
            return Err(Error::Artifact(format!(
                "artifact version {} is not supported (expected {ARTIFACT_VERSION})",
                self.version
            )));
        }
        if self.kind != kind {
            return Err(Error::Artifact(format!(
                "expected a {} artifact, found {}",
                kind.as_str(),
                self.kind.as_str()
            )));
        }
        let embedded = self.vocabulary.hash();
        if embedded != self.vocab_hash {
            return Err(Error::VocabMismatch {
                expected: self.vocab_hash.clone(),
                found: embedded,
            });
        }
        if let Some(v) = expected_vocab {
            let want = v.hash();
            if want != self.vocab_hash {
                return Err(Error::VocabMismatch {
                    expected: want,
                    found: self.vocab_hash.clone(),
                });
            }
        }
        let data = decode_params(&self.params, self.param_count)?;
        let sum = checksum(&data);
        if sum != self.checksum {
            return Err(Error::Artifact(format!(
                "parameter checksum {sum} does not match recorded {}",
                self.checksum
            )));
        }
        Ok(data)
    }
}

pub fn save_relevancy(path: &Path, model: &RelevancyModel) -> Result<ArtifactInfo> {
    let a = Artifact::new(
        ArtifactKind::Relevancy,
        model.vocab.clone(),
        model.config.clone(),
        model.trained_with.clone(),
        &model.data,
    );
    a.save(path)?;
    Ok(a.info())
}

pub fn load_relevancy(path: &Path, expected_vocab: Option<&Vocabulary>) -> Result<(RelevancyModel, ArtifactInfo)> {
    let a: Artifact<RelevancyConfig> = Artifact::read(path)?;
    let data = a.verify(ArtifactKind::Relevancy, expected_vocab)?;
    let info = a.info();
    let mut model = RelevancyModel::from_data(a.hyperparameters, a.vocabulary, data)?;
    model.trained_with = a.training;
    Ok((model, info))
}

pub fn save_generator(
    path: &Path,
    params: &GeneratorParams,
    vocab: &Vocabulary,
    training: Option<&TrainConfig>,
) -> Result<ArtifactInfo> {
    if params.vocab_size != vocab.len() {
        return Err(Error::VocabMismatch {
            expected: format!("{} tokens", params.vocab_size),
            found: format!("{} tokens", vocab.len()),
        });
    }
    let a = Artifact::new(
        ArtifactKind::Generator,
        vocab.clone(),
        params.config.clone(),
        training.cloned(),
        &params.data,
    );
    a.save(path)?;
    Ok(a.info())
}

pub fn load_generator(
    path: &Path,
    expected_vocab: Option<&Vocabulary>,
) -> Result<(GeneratorParams, Vocabulary, ArtifactInfo)> {
    let a: Artifact<GeneratorConfig> = Artifact::read(path)?;
    let data = a.verify(ArtifactKind::Generator, expected_vocab)?;
    let info = a.info();
    let params = GeneratorParams::from_data(a.hyperparameters, a.vocabulary.len(), data)?;
    Ok((params, a.vocabulary, info))
}

/// Reads a vocabulary file: one token per line, specials first.
pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Vocabulary::from_tokens(text.lines().map(str::to_string).collect())
}

pub fn write_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut s = vocab.tokens().join("\n");
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}
