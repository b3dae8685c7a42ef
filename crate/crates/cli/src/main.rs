use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use prodqa_cli::server;
use prodqa_core::ambiguity::{PolarityClassifier, SentimentClassifier};
use prodqa_core::corpus::{self, build_vocabulary, parse_corpus, write_corpus, CorpusTask, QuestionRecord, Vocabulary};
use prodqa_core::harness::{
    apply_generator, apply_relevancy, evaluate_records, generation_examples, load_relevancy, prepare_training_corpus,
    read_vocabulary, save_generator, save_relevancy, write_reports, write_vocabulary, KeyValueConfig, PipelineConfig,
    ScorerKind, Variant,
};
use prodqa_core::metrics::{render_table_with, Metric};
use prodqa_core::minigen::{
    continue_training, gradient_check, GeneratorConfig, GeneratorParams, Precision, Seq2SeqExample, TrainConfig,
};
use prodqa_core::relevancy::{
    evaluate_relevancy, rank_candidates, relevancy_train_defaults, train_relevancy, LexicalScorer, PairVariant,
    RandomScorer, RelevancyConfig, Scorer, DEFAULT_THRESHOLD,
};
use prodqa_core::{synth, Pipeline};

const DEFAULT_VOCAB_SIZE: usize = 8000;

#[derive(Parser)]
#[command(
    name = "prodqa",
    version,
    about = "Answer product questions from reviews, Q&A pairs and specifications"
)]
struct Cli {
    /// key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Candidates kept after ranking
    #[arg(long = "top-k", global = true)]
    top_k: Option<usize>,
    /// Pipeline variant: gen, rel or full
    #[arg(long, global = true, value_parser = parse_variant)]
    variant: Option<Variant>,
    #[command(subcommand)]
    command: Command,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: prodqa_core::Error| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Relevancy,
    Generation,
    Inference,
}

impl From<TaskArg> for CorpusTask {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Relevancy => CorpusTask::Relevancy,
            TaskArg::Generation => CorpusTask::Generation,
            TaskArg::Inference => CorpusTask::Inference,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Relevancy,
    Generation,
}

#[derive(clap::Args)]
struct ArtifactArgs {
    /// Generator artifact; overrides `generator_artifact`
    #[arg(long)]
    generator: Option<PathBuf>,
    /// Relevancy artifact; overrides `relevancy_artifact`
    #[arg(long)]
    relevancy: Option<PathBuf>,
    /// Ranking scorer; overrides `scorer`
    #[arg(long, value_parser = parse_scorer)]
    scorer: Option<ScorerKind>,
}

fn parse_scorer(s: &str) -> Result<ScorerKind, String> {
    s.parse().map_err(|e: prodqa_core::Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Validate a JSONL corpus and print its statistics
    Ingest {
        corpus: PathBuf,
        #[arg(long, value_enum, default_value = "relevancy")]
        task: TaskArg,
    },
    /// Train the relevancy scorer on a labeled corpus
    TrainRel {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use this vocabulary instead of building one
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Write the vocabulary used for training
        #[arg(long)]
        save_vocab: Option<PathBuf>,
        /// Pair format: qa or a
        #[arg(long)]
        pair: Option<PairVariant>,
        /// Labeled corpus to report held-out metrics on
        #[arg(long)]
        dev: Option<PathBuf>,
    },
    /// Train the answer generator on a prepared generation corpus
    TrainGen {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        save_vocab: Option<PathBuf>,
    },
    /// Rank and sentiment-filter a raw generation corpus for training
    PrepareGenCorpus {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        artifacts: ArtifactArgs,
    },
    /// Print the top-k candidates of every question as JSONL
    Rank {
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        artifacts: ArtifactArgs,
    },
    /// Answer every question of a corpus, printing answers and traces as JSONL
    Answer {
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        artifacts: ArtifactArgs,
    },
    /// Score generated answers against references
    Eval {
        corpus: PathBuf,
        /// Writes <out>.json and <out>.txt
        #[arg(long)]
        out: Option<PathBuf>,
        /// Table columns, e.g. r1,rl
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<Metric>,
        /// Evaluate gen, rel and full instead of one variant
        #[arg(long)]
        all_variants: bool,
        #[command(flatten)]
        artifacts: ArtifactArgs,
    },
    /// Pooled classification metrics of a relevancy scorer
    EvalRel {
        corpus: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        artifacts: ArtifactArgs,
    },
    /// Serve answers over HTTP
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        #[arg(long, default_value_t = server::DEFAULT_BODY_LIMIT)]
        body_limit: usize,
        #[command(flatten)]
        artifacts: ArtifactArgs,
    },
    /// Finite-difference check of the generator gradients
    Gradcheck {
        #[arg(long, default_value = "double")]
        precision: Precision,
        #[arg(long, default_value_t = 16)]
        d_model: usize,
        #[arg(long, default_value_t = 300)]
        samples: usize,
        #[arg(long, default_value_t = 1e-5)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Write a synthetic corpus
    Synth {
        #[arg(value_enum)]
        kind: SynthKind,
        #[arg(long, default_value_t = 200)]
        questions: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Settings {
    kv: KeyValueConfig,
    pipeline: PipelineConfig,
}

impl Settings {
    fn load(cli: &Cli) -> Result<Self> {
        let mut kv = match &cli.config {
            Some(p) => KeyValueConfig::from_file(p)?,
            None => KeyValueConfig::default(),
        };
        kv.check_known()?;
        if let Some(seed) = cli.seed {
            kv.set("seed", seed.to_string());
        }
        let mut pipeline = PipelineConfig::default();
        pipeline.apply(&kv)?;
        if let Some(k) = cli.top_k {
            pipeline.top_k = k;
        }
        if let Some(v) = cli.variant {
            pipeline.variant = v;
        }
        pipeline.validate()?;
        Ok(Settings { kv, pipeline })
    }

    fn vocab_size(&self, key: &str) -> Result<usize> {
        Ok(self.kv.parsed(key)?.unwrap_or(DEFAULT_VOCAB_SIZE))
    }

    fn pipeline_config(&self, a: &ArtifactArgs) -> PipelineConfig {
        let mut cfg = self.pipeline.clone();
        if let Some(p) = &a.generator {
            cfg.generator_artifact = Some(p.clone());
        }
        if let Some(p) = &a.relevancy {
            cfg.relevancy_artifact = Some(p.clone());
        }
        if let Some(s) = a.scorer {
            cfg.scorer = s;
        }
        cfg
    }

    fn classifier(&self) -> Result<Arc<dyn PolarityClassifier>> {
        Ok(match (&self.pipeline.lexicon, &self.pipeline.negations) {
            (Some(l), Some(n)) => Arc::new(SentimentClassifier::from_files(l, n)?),
            _ => Arc::new(SentimentClassifier::default()),
        })
    }

    fn scorer(&self, a: &ArtifactArgs) -> Result<Arc<dyn Scorer>> {
        let cfg = self.pipeline_config(a);
        let expected = cfg.vocab.as_deref().map(read_vocabulary).transpose()?;
        Ok(match cfg.scorer {
            ScorerKind::Lexical => Arc::new(LexicalScorer),
            ScorerKind::Random => Arc::new(RandomScorer { seed: cfg.seed }),
            ScorerKind::Trained => {
                let path = cfg
                    .relevancy_artifact
                    .context("scorer=trained needs --relevancy or relevancy_artifact")?;
                let (model, info) = load_relevancy(&path, expected.as_ref())?;
                log::info!("loaded relevancy artifact {} ({})", path.display(), info.checksum);
                Arc::new(model)
            }
        })
    }

    fn load_pipeline(&self, a: &ArtifactArgs) -> Result<Pipeline> {
        Ok(Pipeline::load(self.pipeline_config(a))?)
    }
}

fn vocabulary(
    records: &[QuestionRecord],
    given: Option<&Path>,
    size: usize,
    save: Option<&Path>,
) -> Result<Vocabulary> {
    let vocab = match given {
        Some(p) => read_vocabulary(p)?,
        None => build_vocabulary(records, size)?,
    };
    if let Some(p) = save {
        write_vocabulary(p, &vocab)?;
    }
    Ok(vocab)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    print_text(&format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn print_text(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RankLine<'a> {
    question_id: &'a str,
    ranking: Vec<RankedLine<'a>>,
}

#[derive(Serialize)]
struct RankedLine<'a> {
    rank: usize,
    id: &'a str,
    source: &'a str,
    score: f64,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let settings = Settings::load(&cli)?;
    match run(&cli.command, &settings) {
        Err(e) if is_broken_pipe(&e) => Ok(()),
        other => other,
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn run(command: &Command, settings: &Settings) -> Result<()> {
    match command {
        Command::Ingest { corpus, task } => {
            let c = parse_corpus(corpus, (*task).into())?;
            print_json(&c.stats)?;
        }

        Command::TrainRel {
            corpus,
            out,
            vocab,
            save_vocab,
            pair,
            dev,
        } => {
            let records = corpus::parse_relevancy_corpus(corpus)?.records;
            let vocab = vocabulary(
                &records,
                vocab.as_deref(),
                settings.vocab_size("rel.vocab_size")?,
                save_vocab.as_deref(),
            )?;
            let mut model_cfg = RelevancyConfig::default();
            let mut train = relevancy_train_defaults();
            apply_relevancy(&settings.kv, &mut model_cfg, &mut train)?;
            if let Some(p) = pair {
                model_cfg.variant = *p;
            }
            log::info!(
                "training relevancy scorer on {} questions, vocabulary {}",
                records.len(),
                vocab.len()
            );
            let (model, report) = train_relevancy(&records, vocab, model_cfg, &train)?;
            let info = save_relevancy(out, &model)?;
            log::info!("wrote {} ({} parameters)", out.display(), model.num_params());
            let dev_metrics = match dev {
                Some(p) => {
                    let dev = corpus::parse_relevancy_corpus(p)?.records;
                    Some(evaluate_relevancy(&model, &dev, DEFAULT_THRESHOLD)?)
                }
                None => None,
            };
            print_json(&serde_json::json!({ "artifact": info, "training": report, "dev": dev_metrics }))?;
        }

        Command::TrainGen {
            corpus,
            out,
            vocab,
            save_vocab,
        } => {
            let records = corpus::parse_generation_corpus(corpus)?.records;
            let vocab = vocabulary(
                &records,
                vocab.as_deref(),
                settings.vocab_size("gen.vocab_size")?,
                save_vocab.as_deref(),
            )?;
            let mut model_cfg = GeneratorConfig::default();
            let mut train = TrainConfig::default();
            apply_generator(&settings.kv, &mut model_cfg, &mut train)?;
            let examples = generation_examples(&records, &vocab, &model_cfg)?;
            log::info!(
                "training generator on {} examples, vocabulary {}",
                examples.len(),
                vocab.len()
            );
            let mut params = GeneratorParams::new(model_cfg, vocab.len())?;
            let report = continue_training(&mut params, &examples, &train, |epoch, loss| {
                log::info!("epoch {}: loss {loss:.4}", epoch + 1);
            })?;
            let accuracy = params.token_accuracy(&examples)?;
            let info = save_generator(out, &params, &vocab, Some(&train))?;
            log::info!("wrote {} ({} parameters)", out.display(), params.num_params());
            print_json(&serde_json::json!({ "artifact": info, "training": report, "token_accuracy": accuracy }))?;
        }

        Command::PrepareGenCorpus { corpus, out, artifacts } => {
            let records = corpus::parse_generation_corpus(corpus)?.records;
            let scorer = settings.scorer(artifacts)?;
            let classifier = settings.classifier()?;
            let prepared =
                prepare_training_corpus(&records, scorer.as_ref(), classifier.as_ref(), settings.pipeline.top_k)?;
            write_corpus(out, &prepared)?;
            let before: usize = records.iter().map(|r| r.candidates.len()).sum();
            let after: usize = prepared.iter().map(|r| r.candidates.len()).sum();
            log::info!(
                "kept {after} of {before} candidates over {} questions; wrote {}",
                prepared.len(),
                out.display()
            );
        }

        Command::Rank { corpus, out, artifacts } => {
            let records = parse_corpus(corpus, CorpusTask::Inference)?.records;
            let scorer = settings.scorer(artifacts)?;
            let mut w = output(out.as_deref())?;
            for r in &records {
                let ranked = rank_candidates(r, scorer.as_ref(), settings.pipeline.top_k)?;
                let line = RankLine {
                    question_id: &r.id,
                    ranking: ranked
                        .iter()
                        .map(|s| RankedLine {
                            rank: s.rank,
                            id: &s.candidate.id,
                            source: s.candidate.source.as_str(),
                            score: s.score,
                        })
                        .collect(),
                };
                serde_json::to_writer(&mut w, &line)?;
                writeln!(w)?;
            }
            w.flush()?;
        }

        Command::Answer { corpus, out, artifacts } => {
            let records = parse_corpus(corpus, CorpusTask::Inference)?.records;
            let pipeline = settings.load_pipeline(artifacts)?;
            let mut w = output(out.as_deref())?;
            for r in &records {
                serde_json::to_writer(&mut w, &pipeline.answer(r)?)?;
                writeln!(w)?;
            }
            w.flush()?;
        }

        Command::Eval {
            corpus,
            out,
            metrics,
            all_variants,
            artifacts,
        } => {
            let records = corpus::parse_generation_corpus(corpus)?.records;
            let pipeline = settings.load_pipeline(artifacts)?;
            let variants = if *all_variants {
                vec![Variant::GenOnly, Variant::RelOnly, Variant::Full]
            } else {
                vec![pipeline.config.variant]
            };
            let mut reports = Vec::new();
            for v in variants {
                let p = pipeline.with(v, pipeline.config.scorer)?;
                reports.push(evaluate_records(&p, &records, v.as_str())?);
            }
            let metrics = if metrics.is_empty() {
                Metric::ALL.to_vec()
            } else {
                metrics.clone()
            };
            print_text(&render_table_with(&reports, &metrics))?;
            if let Some(base) = out {
                write_reports(base, &reports, &metrics)?;
                log::info!("wrote {}.json and {}.txt", base.display(), base.display());
            }
        }

        Command::EvalRel {
            corpus,
            threshold,
            artifacts,
        } => {
            let records = corpus::parse_relevancy_corpus(corpus)?.records;
            let scorer = settings.scorer(artifacts)?;
            let m = evaluate_relevancy(scorer.as_ref(), &records, *threshold)?;
            print_json(&serde_json::json!({ "scorer": scorer.name(), "threshold": threshold, "metrics": m }))?;
        }

        Command::Serve {
            bind,
            body_limit,
            artifacts,
        } => {
            let pipeline = Arc::new(settings.load_pipeline(artifacts)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(pipeline, bind, *body_limit))
                .with_context(|| format!("serving on {bind}"))?;
        }

        Command::Gradcheck {
            precision,
            d_model,
            samples,
            epsilon,
            tolerance,
        } => {
            let seed = settings.pipeline.seed;
            let cfg = GeneratorConfig {
                d_model: *d_model,
                n_heads: 2,
                n_encoder_layers: 1,
                n_decoder_layers: 1,
                ffn_dim: 2 * d_model,
                max_src_len: 16,
                max_tgt_len: 8,
                dropout: 0.0,
                seed,
            };
            let vocab_size = 24;
            let params = GeneratorParams::new(cfg, vocab_size)?;
            let ex = Seq2SeqExample {
                src: vec![6, 7, 8, 9, 10],
                tgt: vec![corpus::BOS, 11, 12, 13, corpus::EOS],
            };
            let report = gradient_check(&params, &ex, *epsilon, *samples, seed, *precision)?;
            print_json(&report)?;
            if !report.passed(*tolerance) {
                bail!(
                    "max relative error {:.3e} at {} exceeds {tolerance:e}",
                    report.max_relative_error,
                    report.worst_tensor
                );
            }
        }

        Command::Synth { kind, questions, out } => {
            let seed = settings.pipeline.seed;
            let records = match kind {
                SynthKind::Relevancy => synth::relevancy_world(*questions, seed),
                SynthKind::Generation => synth::generation_world(*questions, seed).records,
            };
            write_corpus(out, &records)?;
            log::info!("wrote {} records to {}", records.len(), out.display());
        }
    }
    Ok(())
}
