//! Review ingestion and text preparation.
//!
//! Raw reviews arrive as JSON lines. Each review is split into a positive
//! sub-review (its pros) and a negative one (its cons); the split doubles as
//! automatic labeling. Sub-reviews are then cleaned of URLs and hashtags,
//! tokenized into sentences and words, and shuffled with a seeded ChaCha8
//! Fisher-Yates permutation.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_EMOTICONS: &[&str] = &[":)", ":(", ":D", ":-)", ":-(", ";)", ":/", "<3"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReview {
    pub id: String,
    pub company: String,
    pub sector: String,
    #[serde(default)]
    pub pros: String,
    #[serde(default)]
    pub cons: String,
    #[serde(default)]
    pub body: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Negative => 0.0,
            Label::Positive => 1.0,
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        match l {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

/// One labeled sub-review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewDoc {
    pub id: String,
    pub company: String,
    pub sector: String,
    pub text: String,
    pub tokens: Vec<Vec<String>>,
    pub label: Option<Label>,
}

impl ReviewDoc {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().flatten().map(String::as_str)
    }
}

pub fn parse_reviews(text: &str, context: &str) -> Result<Vec<RawReview>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: RawReview = serde_json::from_str(line)
            .map_err(|e| Error::parse(context, i + 1, format!("schema violation: {e}")))?;
        if r.company.trim().is_empty() {
            return Err(Error::parse(context, i + 1, format!("record `{}` has empty company", r.id)));
        }
        if !seen.insert(r.id.clone()) {
            return Err(Error::Duplicate { kind: "review id", name: r.id });
        }
        out.push(r);
    }
    Ok(out)
}

/// Reads line-delimited review records.
pub fn ingest(path: &Path) -> Result<Vec<RawReview>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_reviews(&text, &path.display().to_string())
}

pub fn write_reviews(path: &Path, reviews: &[RawReview]) -> Result<()> {
    write_jsonl(path, reviews)
}

/// Splits a review into its pros (label 1) and cons (label 0) sub-reviews.
/// Text is carried verbatim; see [`Preprocessor::prepare`].
pub fn split_pros_cons(raw: &RawReview) -> Vec<ReviewDoc> {
    let mut out = Vec::with_capacity(2);
    for (text, suffix, label) in [
        (&raw.pros, "pos", Label::Positive),
        (&raw.cons, "neg", Label::Negative),
    ] {
        if text.trim().is_empty() {
            continue;
        }
        out.push(ReviewDoc {
            id: format!("{}-{}", raw.id, suffix),
            company: raw.company.clone(),
            sector: raw.sector.clone(),
            text: text.clone(),
            tokens: Vec::new(),
            label: Some(label),
        });
    }
    out
}

const LEADING_PUNCT: &[char] = &['(', '[', '{', '"'];
const TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', ')', ']', '}', '"'];
const SENTENCE_END: &[char] = &['.', '!', '?'];

/// URL/hashtag cleaner and tokenizer sharing one emoticon set.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    emoticons: HashSet<String>,
    url: Regex,
    hashtag: Regex,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self::new(DEFAULT_EMOTICONS.iter().map(|s| s.to_string()))
    }
}

impl Preprocessor {
    pub fn new(emoticons: impl IntoIterator<Item = String>) -> Self {
        Preprocessor {
            emoticons: emoticons.into_iter().collect(),
            url: Regex::new(r"(?i)\b[a-z][a-z0-9+.\-]*://\S*|\bwww\.\S*").expect("url regex"),
            hashtag: Regex::new(r"#\w+").expect("hashtag regex"),
        }
    }

    pub fn is_emoticon(&self, token: &str) -> bool {
        self.emoticons.contains(token)
    }

    /// Removes URLs and hashtags, keeps emoticons, collapses whitespace.
    pub fn preprocess(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        for chunk in text.split_whitespace() {
            if self.is_emoticon(chunk) {
                push_word(&mut out, chunk);
                continue;
            }
            let no_url = self.url.replace_all(chunk, " ");
            let cleaned = self.hashtag.replace_all(&no_url, " ");
            for w in cleaned.split_whitespace() {
                push_word(&mut out, w);
            }
        }
        out
    }

    /// Sentence and word segmentation. Sentences end at a token carrying
    /// terminal `.`, `!` or `?`; surrounding punctuation is detached into
    /// single-character tokens. Emoticons are never split.
    pub fn tokenize(&self, text: &str) -> Vec<Vec<String>> {
        let mut sentences = Vec::new();
        let mut current: Vec<String> = Vec::new();
        for chunk in text.split_whitespace() {
            if self.is_emoticon(chunk) {
                current.push(chunk.to_string());
                continue;
            }
            let body_start = chunk
                .char_indices()
                .find(|&(_, c)| !LEADING_PUNCT.contains(&c))
                .map_or(chunk.len(), |(i, _)| i);
            let (lead, rest) = chunk.split_at(body_start);
            let body_end = rest
                .char_indices()
                .rev()
                .find(|&(_, c)| !TRAILING_PUNCT.contains(&c))
                .map_or(0, |(i, c)| i + c.len_utf8());
            let (word, trail) = rest.split_at(body_end);
            current.extend(lead.chars().map(String::from));
            if !word.is_empty() {
                current.push(word.to_string());
            }
            current.extend(trail.chars().map(String::from));
            if trail.contains(SENTENCE_END) {
                sentences.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            sentences.push(current);
        }
        sentences
    }

    pub fn prepare(&self, mut doc: ReviewDoc) -> ReviewDoc {
        doc.text = self.preprocess(&doc.text);
        doc.tokens = self.tokenize(&doc.text);
        doc
    }
}

fn push_word(out: &mut String, w: &str) {
    if !out.is_empty() {
        out.push(' ');
    }
    out.push_str(w);
}

/// Seeded permutation; identical seeds give identical orders.
pub fn shuffle(mut docs: Vec<ReviewDoc>, seed: u64) -> Vec<ReviewDoc> {
    let mut rng = seed::rng(seed);
    docs.shuffle(&mut rng);
    docs
}

/// Split, clean, tokenize and shuffle a review set. Sub-reviews left empty by
/// cleaning are dropped.
pub fn build_docs(reviews: &[RawReview], pre: &Preprocessor, seed: u64) -> Vec<ReviewDoc> {
    let docs: Vec<ReviewDoc> = reviews
        .iter()
        .flat_map(split_pros_cons)
        .map(|d| pre.prepare(d))
        .filter(|d| !d.tokens.is_empty())
        .collect();
    shuffle(docs, seed)
}

pub fn companies(docs: &[ReviewDoc]) -> BTreeSet<&str> {
    docs.iter().map(|d| d.company.as_str()).collect()
}

pub fn write_docs(path: &Path, docs: &[ReviewDoc]) -> Result<()> {
    write_jsonl(path, docs)
}

pub fn read_docs(path: &Path) -> Result<Vec<ReviewDoc>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ctx = path.display().to_string();
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(&ctx, i + 1, e.to_string())))
        .collect()
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}
