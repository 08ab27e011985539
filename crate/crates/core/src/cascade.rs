//! Four-tier aspect polarity cascade.
//!
//! Tiers are tried in order and the first one that yields a value wins:
//!
//! 1. **ModifierLookup**: mean lexicon polarity of the tokens attached to the
//!    aspect by amod/advmod/nsubj arcs.
//! 2. **ContextPattern**: mean polarity of the other words in a window around
//!    the aspect, negated once if the window contains a negation word.
//! 3. **ElmLookup**: the aspect word's own polarity, kept when the review
//!    classifier says positive and negated when it says negative.
//! 4. **ElmSemiRandom**: a uniform draw from (0, 1) or (-1, 0) following the
//!    classifier's verdict.
//!
//! The review-level classifier runs at most once per review, and only when a
//! mention reaches tier 3.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aspects::{extract, AspectCatalog, AspectMention};
use crate::corpus::{Label, ReviewDoc};
use crate::docvec::DocvecModel;
use crate::elm::ElmModel;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::seed;
use crate::syntax::{heuristic_parse, modifiers_of, ParsedSentence, Tagger};

pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_NEGATIONS: &[&str] = &["not", "no", "never", "n't", "without", "hardly", "lack", "lacking"];
pub const DEFAULT_INFER_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    ModifierLookup,
    ContextPattern,
    ElmLookup,
    ElmSemiRandom,
}

impl Tier {
    pub const ALL: [Tier; 4] = [Tier::ModifierLookup, Tier::ContextPattern, Tier::ElmLookup, Tier::ElmSemiRandom];

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::ModifierLookup => "modifier_lookup",
            Tier::ContextPattern => "context_pattern",
            Tier::ElmLookup => "elm_lookup",
            Tier::ElmSemiRandom => "elm_semi_random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectScore {
    pub mention: AspectMention,
    pub score: f64,
    pub tier: Tier,
}

/// Negation detection. A configured `n't` also matches contracted forms such
/// as `isn't`.
#[derive(Debug, Clone)]
pub struct Negations {
    terms: HashSet<String>,
}

impl Default for Negations {
    fn default() -> Self {
        Negations::new(DEFAULT_NEGATIONS.iter().map(|s| s.to_string()))
    }
}

impl Negations {
    pub fn new(terms: impl IntoIterator<Item = String>) -> Self {
        Negations { terms: terms.into_iter().map(|t| t.to_lowercase()).collect() }
    }

    pub fn contains(&self, token: &str) -> bool {
        let t = token.to_lowercase();
        self.terms.contains(&t) || (self.terms.contains("n't") && t.ends_with("n't"))
    }
}

/// Shared, read-only inputs to the cascade.
#[derive(Debug, Clone)]
pub struct CascadeContext<'a> {
    pub lexicon: &'a Lexicon,
    pub elm: &'a ElmModel,
    pub docvec: &'a DocvecModel,
    pub negations: Negations,
    pub window: usize,
    pub infer_steps: usize,
    pub seed: u64,
}

impl<'a> CascadeContext<'a> {
    pub fn new(lexicon: &'a Lexicon, elm: &'a ElmModel, docvec: &'a DocvecModel, seed: u64) -> Self {
        CascadeContext {
            lexicon,
            elm,
            docvec,
            negations: Negations::default(),
            window: DEFAULT_WINDOW,
            infer_steps: DEFAULT_INFER_STEPS,
            seed,
        }
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Tier 1: average polarity of the lexicon-known triggers of the mention.
pub fn score_by_modifiers(sentence: &ParsedSentence, mention: &AspectMention, lexicon: &Lexicon) -> Option<f64> {
    let span = mention.span();
    let mut triggers: Vec<usize> = span
        .clone()
        .flat_map(|i| modifiers_of(sentence, i))
        .filter(|i| !span.contains(i))
        .collect();
    triggers.sort_unstable();
    triggers.dedup();
    let polarities: Vec<f64> = triggers
        .into_iter()
        .filter_map(|i| lexicon.lookup(&sentence.tokens[i]))
        .collect();
    mean(&polarities)
}

/// Token range of the context window: `window` tokens (or the mention, if
/// longer) centred on the mention and shifted inwards at sentence bounds.
pub fn context_window(sentence_len: usize, mention: &AspectMention, window: usize) -> std::ops::Range<usize> {
    let span = mention.span();
    let width = window.max(span.len()).min(sentence_len);
    let left = window.saturating_sub(span.len()) / 2;
    let start = span.start.saturating_sub(left).min(sentence_len - width);
    start..start + width
}

/// Tier 2: polar words near the aspect. Negation words flip the mean once
/// and never contribute polarity themselves.
pub fn score_by_context(
    tokens: &[String],
    mention: &AspectMention,
    lexicon: &Lexicon,
    negations: &Negations,
    window: usize,
) -> Option<f64> {
    let span = mention.span();
    let range = context_window(tokens.len(), mention, window.max(1));
    let mut negated = false;
    let mut polarities = Vec::new();
    for i in range.filter(|i| !span.contains(i)) {
        let tok = &tokens[i];
        if negations.contains(tok) {
            negated = true;
        } else if let Some(p) = lexicon.lookup(tok) {
            polarities.push(p);
        }
    }
    mean(&polarities).map(|m| if negated { -m } else { m })
}

/// Tier 3: `e·lookup(w) + (1 − e)·(−lookup(w))`.
pub fn score_by_elm_lookup(aspect_word: &str, e_out: Label, lexicon: &Lexicon) -> Option<f64> {
    let p = lexicon.lookup(aspect_word)?;
    let e = e_out.as_f64();
    Some(e * p + (1.0 - e) * (-p))
}

/// Tier 4: uniform on the open interval (0, 1) for a positive review and
/// (-1, 0) for a negative one.
pub fn score_semi_random<R: Rng + ?Sized>(e_out: Label, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    match e_out {
        Label::Positive => u,
        Label::Negative => -u,
    }
}

/// Review-level classifier verdict on the inferred paragraph vector.
pub fn review_elm_output(review: &ReviewDoc, ctx: &CascadeContext<'_>) -> Result<Label> {
    let v = ctx
        .docvec
        .infer(review, ctx.infer_steps, seed::derive(ctx.seed, &format!("infer:{}", review.id)))?;
    ctx.elm.classify(&v)
}

/// Scores every mention of one review. `sentences` are the parses of the
/// review's sentences, indexed like `mention.sentence_index`.
pub fn assign(
    review: &ReviewDoc,
    sentences: &[ParsedSentence],
    mentions: &[AspectMention],
    ctx: &CascadeContext<'_>,
) -> Result<Vec<AspectScore>> {
    let mut e_out: Option<Label> = None;
    let mut out = Vec::with_capacity(mentions.len());
    for (idx, m) in mentions.iter().enumerate() {
        let sentence = sentences
            .get(m.sentence_index)
            .filter(|s| m.token_index + m.token_count <= s.tokens.len() && m.token_count > 0)
            .ok_or_else(|| Error::Shape(format!("mention {idx} of `{}` is out of range", review.id)))?;
        let (score, tier) = if let Some(s) = score_by_modifiers(sentence, m, ctx.lexicon) {
            (s, Tier::ModifierLookup)
        } else if let Some(s) = score_by_context(&sentence.tokens, m, ctx.lexicon, &ctx.negations, ctx.window) {
            (s, Tier::ContextPattern)
        } else {
            let e = match e_out {
                Some(e) => e,
                None => *e_out.insert(review_elm_output(review, ctx)?),
            };
            let head = &sentence.tokens[m.head_index()];
            match score_by_elm_lookup(head, e, ctx.lexicon) {
                Some(s) => (s, Tier::ElmLookup),
                None => {
                    let label = format!("semi:{}", review.id);
                    let mut rng = seed::rng(seed::derive_indexed(ctx.seed, &label, idx as u64));
                    (score_semi_random(e, &mut rng), Tier::ElmSemiRandom)
                }
            }
        };
        out.push(AspectScore { mention: m.clone(), score: score.clamp(-1.0, 1.0), tier });
    }
    Ok(out)
}

/// One line of the scored output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub doc_id: String,
    pub company: String,
    pub aspect: String,
    pub score: f64,
    pub tier: Tier,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TierCounts {
    pub counts: BTreeMap<Tier, usize>,
}

impl TierCounts {
    pub fn add(&mut self, tier: Tier) {
        *self.counts.entry(tier).or_default() += 1;
    }

    pub fn get(&self, tier: Tier) -> usize {
        self.counts.get(&tier).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn rate(&self, tier: Tier) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.get(tier) as f64 / n as f64,
        }
    }

    /// Share of mentions that needed a random score.
    pub fn fallback_rate(&self) -> f64 {
        self.rate(Tier::ElmSemiRandom)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScoredCorpus {
    pub scores: Vec<AspectScore>,
    pub records: Vec<ScoreRecord>,
    pub tiers: TierCounts,
    /// Mentions whose head word has a lexicon entry.
    pub lexicon_covered_mentions: usize,
}

impl ScoredCorpus {
    pub fn aspect_word_coverage(&self) -> f64 {
        match self.scores.len() {
            0 => 0.0,
            n => self.lexicon_covered_mentions as f64 / n as f64,
        }
    }
}

/// Where sentence parses come from.
pub enum ParseSource<'a> {
    Heuristic(&'a Tagger),
    /// Pre-parsed sentences per document id; their tokens replace the
    /// document's own tokenization.
    Conllu(&'a HashMap<String, Vec<ParsedSentence>>),
}

/// Extracts and scores the mentions of every document, in the given order.
pub fn score_corpus(
    docs: &[ReviewDoc],
    catalog: &AspectCatalog,
    parses: &ParseSource<'_>,
    ctx: &CascadeContext<'_>,
) -> Result<ScoredCorpus> {
    let mut out = ScoredCorpus::default();
    for doc in docs {
        let (doc, sentences): (std::borrow::Cow<'_, ReviewDoc>, Vec<ParsedSentence>) = match parses {
            ParseSource::Heuristic(tagger) => {
                let sents = doc
                    .tokens
                    .iter()
                    .map(|t| heuristic_parse(t, &tagger.tag(t)))
                    .collect::<Result<Vec<_>>>()?;
                (std::borrow::Cow::Borrowed(doc), sents)
            }
            ParseSource::Conllu(map) => {
                let sents = map
                    .get(&doc.id)
                    .ok_or_else(|| Error::Schema(format!("no parse for document `{}`", doc.id)))?
                    .clone();
                let mut d = doc.clone();
                d.tokens = sents.iter().map(|s| s.tokens.clone()).collect();
                (std::borrow::Cow::Owned(d), sents)
            }
        };
        let mentions = extract(&doc, catalog);
        for s in assign(&doc, &sentences, &mentions, ctx)? {
            let head = &sentences[s.mention.sentence_index].tokens[s.mention.head_index()];
            if ctx.lexicon.lookup(head).is_some() {
                out.lexicon_covered_mentions += 1;
            }
            out.tiers.add(s.tier);
            out.records.push(ScoreRecord {
                doc_id: doc.id.clone(),
                company: doc.company.clone(),
                aspect: s.mention.aspect.clone(),
                score: s.score,
                tier: s.tier,
            });
            out.scores.push(s);
        }
    }
    Ok(out)
}
