//! Stage glue shared by the command-line tool and the end-to-end tests.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::aspects::AspectCatalog;
use crate::cascade::{score_corpus, CascadeContext, ParseSource, ScoreRecord, ScoredCorpus, Tier};
use crate::corpus::{build_docs, Label, Preprocessor, RawReview, ReviewDoc};
use crate::docvec::{build_vocab, train, DocvecConfig, DocvecModel};
use crate::elm::{Activation, ElmConfig, ElmModel};
use crate::error::{Error, Result};
use crate::lexicon::{merge, Lexicon, LexiconEntry, DEFAULT_THRESHOLD};
use crate::profile::{build_embeddings, fmt_real, CompanyEmbedding};
use crate::seed;
use crate::syntax::Tagger;

/// Per-stage seed labels; a stage seeds its RNGs with `derive(seed, label)`.
pub mod stage {
    pub const INGEST: &str = "ingest";
    pub const SYNTH: &str = "synth";
    pub const DOCVEC: &str = "docvec";
    pub const ELM: &str = "elm";
    pub const SCORE: &str = "score";
    pub const EVAL: &str = "eval";
}

pub fn stage_seed(seed_value: u64, label: &str) -> u64 {
    seed::derive(seed_value, label)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub threshold: f64,
    pub min_count: u64,
    pub dims: usize,
    pub docvec_epochs: usize,
    pub negatives: usize,
    pub hidden: usize,
    pub ridge: f64,
    pub activation: Activation,
    pub window: usize,
    pub infer_steps: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            threshold: DEFAULT_THRESHOLD,
            min_count: 1,
            dims: 50,
            docvec_epochs: 40,
            negatives: 5,
            hidden: 100,
            ridge: 1e-3,
            activation: Activation::Sigmoid,
            window: crate::cascade::DEFAULT_WINDOW,
            infer_steps: crate::cascade::DEFAULT_INFER_STEPS,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn docvec_config(&self) -> DocvecConfig {
        DocvecConfig {
            dims: self.dims,
            epochs: self.docvec_epochs,
            negatives: self.negatives,
            seed: stage_seed(self.seed, stage::DOCVEC),
            ..DocvecConfig::default()
        }
    }

    pub fn elm_config(&self) -> ElmConfig {
        ElmConfig {
            activation: self.activation,
            ridge: self.ridge,
            seed: stage_seed(self.seed, stage::ELM),
            ..ElmConfig::new(self.dims, self.hidden)
        }
    }
}

/// Trained paragraph vectors of the labeled documents, in document order.
pub fn labeled_vectors(docvec: &DocvecModel, docs: &[ReviewDoc]) -> Result<(Vec<Vec<f64>>, Vec<Label>)> {
    let mut x = Vec::with_capacity(docs.len());
    let mut y = Vec::with_capacity(docs.len());
    for d in docs {
        let Some(label) = d.label else { continue };
        let v = docvec
            .doc_vector(&d.id)
            .ok_or_else(|| Error::Schema(format!("document `{}` has no trained vector", d.id)))?;
        x.push(v.to_vec());
        y.push(label);
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("no labeled documents".into()));
    }
    Ok((x, y))
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), d, |r, c| rows[r][c])
}

pub fn fit_elm(docvec: &DocvecModel, docs: &[ReviewDoc], config: ElmConfig) -> Result<ElmModel> {
    let (x, y) = labeled_vectors(docvec, docs)?;
    let targets: Vec<f64> = y.iter().map(|l| l.as_f64()).collect();
    let mut model = ElmModel::init(config)?;
    model.fit(&rows_to_matrix(&x), &targets)?;
    Ok(model)
}

/// Document id to `(company, sector)`.
pub fn company_map(docs: &[ReviewDoc]) -> HashMap<String, (String, String)> {
    docs.iter()
        .map(|d| (d.id.clone(), (d.company.clone(), d.sector.clone())))
        .collect()
}

pub fn parse_tier(s: &str) -> Option<Tier> {
    Tier::ALL.into_iter().find(|t| t.as_str() == s)
}

const SCORES_HEADER: &str = "doc_id\tcompany\taspect\tsentence\ttoken\tterm\tscore\ttier";

/// One row per scored mention, in corpus order.
pub fn scores_tsv(scored: &ScoredCorpus) -> String {
    let mut out = format!("{SCORES_HEADER}\n");
    for (s, r) in scored.scores.iter().zip(&scored.records) {
        let m = &s.mention;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            m.doc_id,
            r.company,
            m.aspect,
            m.sentence_index,
            m.token_index,
            m.matched_term,
            fmt_real(s.score),
            s.tier.as_str()
        );
    }
    out
}

pub fn parse_scores_tsv(text: &str) -> Result<Vec<ScoreRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(SCORES_HEADER) {
        return Err(Error::Schema("scores table has an unexpected header".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let c: Vec<&str> = line.split('\t').collect();
            if c.len() != 8 {
                return Err(Error::parse("scores", i + 2, "expected 8 columns"));
            }
            let score: f64 = c[6].parse().map_err(|_| Error::parse("scores", i + 2, "bad score"))?;
            let tier = parse_tier(c[7]).ok_or_else(|| Error::parse("scores", i + 2, format!("unknown tier `{}`", c[7])))?;
            Ok(ScoreRecord { doc_id: c[0].into(), company: c[1].into(), aspect: c[2].into(), score, tier })
        })
        .collect()
}

/// Tier counts and rates, plus the coverage and fallback figures.
pub fn tier_report(scored: &ScoredCorpus) -> String {
    let mut out = String::from("tier\tcount\trate\n");
    for t in Tier::ALL {
        let _ = writeln!(out, "{}\t{}\t{}", t.as_str(), scored.tiers.get(t), fmt_real(scored.tiers.rate(t)));
    }
    let _ = writeln!(
        out,
        "# mentions={} aspect_word_coverage={} fallback_rate={}",
        scored.tiers.total(),
        fmt_real(scored.aspect_word_coverage()),
        fmt_real(scored.tiers.fallback_rate())
    );
    out
}

pub fn embeddings_from_records(
    records: &[ScoreRecord],
    docs: &[ReviewDoc],
    catalog: &AspectCatalog,
) -> Result<Vec<CompanyEmbedding>> {
    let company_of = company_map(docs);
    build_embeddings(
        records.iter().map(|r| (r.doc_id.as_str(), r.aspect.as_str(), r.score)),
        &company_of,
        catalog,
    )
}

/// Everything an end-to-end run produces.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub lexicon: Lexicon,
    pub docs: Vec<ReviewDoc>,
    pub docvec: DocvecModel,
    pub elm: ElmModel,
    pub scored: ScoredCorpus,
    pub embeddings: Vec<CompanyEmbedding>,
}

/// Lexicon merge, ingest, docvec, ELM, heuristic parsing, cascade, profiles.
pub fn run(
    reviews: &[RawReview],
    primary: &[LexiconEntry],
    secondary: &[LexiconEntry],
    catalog: &AspectCatalog,
    config: &PipelineConfig,
) -> Result<PipelineRun> {
    let lexicon = merge(primary, secondary, config.threshold);
    let docs = build_docs(reviews, &Preprocessor::default(), stage_seed(config.seed, stage::INGEST));
    let vocab = build_vocab(&docs, config.min_count);
    let docvec = train(&docs, &vocab, config.docvec_config())?;
    let elm = fit_elm(&docvec, &docs, config.elm_config())?;
    let tagger = Tagger::default().with_nouns(catalog.term_words());
    let mut ctx = CascadeContext::new(&lexicon, &elm, &docvec, stage_seed(config.seed, stage::SCORE));
    ctx.window = config.window;
    ctx.infer_steps = config.infer_steps;
    let scored = score_corpus(&docs, catalog, &ParseSource::Heuristic(&tagger), &ctx)?;
    let embeddings = embeddings_from_records(&scored.records, &docs, catalog)?;
    Ok(PipelineRun { lexicon, docs, docvec, elm, scored, embeddings })
}
