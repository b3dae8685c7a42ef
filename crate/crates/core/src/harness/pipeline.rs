use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::artifact::{load_generator, load_relevancy, read_vocabulary, ArtifactInfo};
use super::config::{PipelineConfig, ScorerKind, Variant};
use super::context::{render_context, RenderedContext};
use crate::ambiguity::{filter_by_majority, FilterDecision, PolarityClassifier, QuestionType, SentimentClassifier};
use crate::corpus::{Candidate, QuestionRecord, Vocabulary};
use crate::error::{Error, Result};
use crate::minigen::{generate_detailed, GeneratorParams, Strategy};
use crate::relevancy::{rank_candidates, LexicalScorer, RandomScorer, RelevancyModel, ScoredCandidate, Scorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Applied,
    /// WH questions are never sentiment-filtered.
    SkippedWh,
    /// Turned off by the variant or the config.
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityTrace {
    pub status: StageStatus,
    pub decisions: Vec<FilterDecision>,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeTrace {
    pub strategy: Strategy,
    pub beam_width: usize,
    pub max_len: usize,
    pub source_tokens: usize,
    pub generated_tokens: usize,
    pub log_prob: f64,
    pub hit_eos: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerTrace {
    pub variant: Variant,
    pub qtype: QuestionType,
    pub scorer: String,
    /// Top-k after ranking; absent when ranking is skipped.
    pub ranking: Option<Vec<ScoredCandidate>>,
    pub ambiguity: AmbiguityTrace,
    /// Input positions of the candidates rendered into the context, in
    /// context order.
    pub context_candidates: Vec<usize>,
    pub context: RenderedContext,
    /// Set when no candidate reached the generator.
    pub low_confidence: bool,
    pub decode: DecodeTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerResult {
    pub question_id: String,
    pub answer: String,
    pub trace: AnswerTrace,
}

/// Loaded artifacts plus configuration. Immutable and shareable across
/// threads; every method is a pure function of its inputs.
#[derive(Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
    generator: Arc<GeneratorParams>,
    vocab: Arc<Vocabulary>,
    relevancy: Option<Arc<RelevancyModel>>,
    scorer: Arc<dyn Scorer>,
    classifier: Arc<dyn PolarityClassifier>,
    artifacts: Vec<ArtifactInfo>,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("config", &self.config)
            .field("scorer", &self.scorer.name())
            .field("artifacts", &self.artifacts)
            .finish()
    }
}

fn make_scorer(kind: ScorerKind, seed: u64, model: &Option<Arc<RelevancyModel>>) -> Result<Arc<dyn Scorer>> {
    Ok(match kind {
        ScorerKind::Lexical => Arc::new(LexicalScorer),
        ScorerKind::Random => Arc::new(RandomScorer { seed }),
        ScorerKind::Trained => match model {
            Some(m) => m.clone(),
            None => {
                return Err(Error::InvalidArgument(
                    "scorer=trained needs a relevancy artifact".into(),
                ))
            }
        },
    })
}

impl Pipeline {
    pub fn new(
        config: PipelineConfig,
        generator: GeneratorParams,
        vocab: Vocabulary,
        relevancy: Option<RelevancyModel>,
        classifier: Arc<dyn PolarityClassifier>,
    ) -> Result<Self> {
        config.validate()?;
        if generator.vocab_size != vocab.len() {
            return Err(Error::VocabMismatch {
                expected: format!("{} tokens", generator.vocab_size),
                found: format!("{} tokens", vocab.len()),
            });
        }
        let relevancy = relevancy.map(Arc::new);
        let scorer = make_scorer(config.scorer, config.seed, &relevancy)?;
        Ok(Pipeline {
            config,
            generator: Arc::new(generator),
            vocab: Arc::new(vocab),
            relevancy,
            scorer,
            classifier,
            artifacts: Vec::new(),
        })
    }

    /// Loads every artifact named in the config, checking vocabulary hashes.
    pub fn load(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let expected = config.vocab.as_deref().map(read_vocabulary).transpose()?;
        let gen_path = config
            .generator_artifact
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("generator_artifact is not set".into()))?;
        let (generator, vocab, gen_info) = load_generator(gen_path, expected.as_ref())?;
        let mut artifacts = vec![gen_info];
        let relevancy = match (&config.relevancy_artifact, config.scorer) {
            (Some(p), _) => {
                let (m, info) = load_relevancy(p, expected.as_ref())?;
                artifacts.push(info);
                Some(m)
            }
            (None, ScorerKind::Trained) => {
                return Err(Error::InvalidArgument("scorer=trained needs relevancy_artifact".into()))
            }
            (None, _) => None,
        };
        let classifier: Arc<dyn PolarityClassifier> = match (&config.lexicon, &config.negations) {
            (Some(l), Some(n)) => Arc::new(SentimentClassifier::from_files(l, n)?),
            _ => Arc::new(SentimentClassifier::default()),
        };
        let mut p = Pipeline::new(config, generator, vocab, relevancy, classifier)?;
        p.artifacts = artifacts;
        Ok(p)
    }

    pub fn artifacts(&self) -> &[ArtifactInfo] {
        &self.artifacts
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn generator(&self) -> &GeneratorParams {
        &self.generator
    }

    pub fn scorer(&self) -> &dyn Scorer {
        self.scorer.as_ref()
    }

    /// A copy of this pipeline with a different variant and scorer.
    pub fn with(&self, variant: Variant, scorer: ScorerKind) -> Result<Self> {
        let mut p = self.clone();
        p.config.variant = variant;
        p.config.scorer = scorer;
        p.scorer = make_scorer(scorer, p.config.seed, &p.relevancy)?;
        Ok(p)
    }

    fn context_budget(&self) -> usize {
        self.config.max_context_len.min(self.generator.config.max_src_len)
    }

    pub fn answer(&self, record: &QuestionRecord) -> Result<AnswerResult> {
        let variant = self.config.variant;
        let qtype = record.qtype();

        let (ranking, selected): (Option<Vec<ScoredCandidate>>, Vec<usize>) = match variant {
            Variant::GenOnly => (None, (0..record.candidates.len()).collect()),
            Variant::RelOnly | Variant::Full => {
                let ranked = rank_candidates(record, self.scorer.as_ref(), self.config.top_k)?;
                let idx = ranked.iter().map(|s| s.index).collect();
                (Some(ranked), idx)
            }
        };

        let filter_on = variant == Variant::Full && self.config.ambiguity;
        let (ambiguity, kept) = if !filter_on {
            (
                AmbiguityTrace {
                    status: StageStatus::Disabled,
                    decisions: Vec::new(),
                    ambiguous: false,
                },
                selected,
            )
        } else if qtype == QuestionType::WH {
            (
                AmbiguityTrace {
                    status: StageStatus::SkippedWh,
                    decisions: Vec::new(),
                    ambiguous: false,
                },
                selected,
            )
        } else {
            let pool: Vec<Candidate> = selected.iter().map(|&i| record.candidates[i].clone()).collect();
            let out = filter_by_majority(&pool, self.classifier.as_ref());
            let kept = selected
                .iter()
                .zip(&out.decisions)
                .filter(|(_, d)| d.kept)
                .map(|(&i, _)| i)
                .collect();
            (
                AmbiguityTrace {
                    status: StageStatus::Applied,
                    decisions: out.decisions,
                    ambiguous: out.ambiguous,
                },
                kept,
            )
        };

        let low_confidence = kept.is_empty();
        if low_confidence {
            log::info!(
                "question {}: no candidates survived; answering from the question alone",
                record.id
            );
        }
        let chosen: Vec<Candidate> = kept.iter().map(|&i| record.candidates[i].clone()).collect();
        let context = render_context(record, &chosen, self.context_budget());
        let src = self.vocab.tokenize(&context.text);
        let g = generate_detailed(&self.generator, &src, &self.config.decode)?;
        let answer = self.vocab.detokenize(&g.tokens);

        Ok(AnswerResult {
            question_id: record.id.clone(),
            answer,
            trace: AnswerTrace {
                variant,
                qtype,
                scorer: match variant {
                    Variant::GenOnly => "none".into(),
                    _ => self.scorer.name().to_string(),
                },
                ranking,
                ambiguity,
                context_candidates: kept,
                context,
                low_confidence,
                decode: DecodeTrace {
                    strategy: self.config.decode.strategy,
                    beam_width: self.config.decode.beam_width,
                    max_len: self.config.decode.max_len.min(self.generator.config.max_tgt_len),
                    source_tokens: src.len(),
                    generated_tokens: g.tokens.len(),
                    log_prob: g.log_prob,
                    hit_eos: g.hit_eos,
                },
            },
        })
    }

    /// Re-renders the context recorded in a trace from the input record.
    pub fn rerender(&self, record: &QuestionRecord, trace: &AnswerTrace) -> Result<String> {
        let mut chosen = Vec::with_capacity(trace.context_candidates.len());
        for &i in &trace.context_candidates {
            chosen.push(
                record
                    .candidates
                    .get(i)
                    .ok_or_else(|| Error::InvalidArgument(format!("trace names candidate {i} not in the input")))?
                    .clone(),
            );
        }
        Ok(render_context(record, &chosen, self.context_budget()).text)
    }
}
