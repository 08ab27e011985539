//! Paragraph vectors, distributed bag-of-words variant.
//!
//! Each document owns a vector that is trained to predict the words it
//! contains against `k` noise words drawn from the unigram^0.75 table:
//!
//! ```text
//! loss(d, w, N) = -ln σ(d·u_w) - Σ_{n∈N} ln σ(-d·u_n)
//! ```
//!
//! where `u` are the word output vectors. Training is single-threaded and
//! fully determined by the seed.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::ReviewDoc;
use crate::error::{Error, Result};
use crate::seed;

pub const FORMAT_VERSION: u32 = 1;
const NOISE_POWER: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    words: Vec<String>,
    counts: Vec<u64>,
    min_count: u64,
    index: HashMap<String, usize>,
}

impl Vocab {
    fn from_parts(words: Vec<String>, counts: Vec<u64>, min_count: u64) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocab { words, counts, min_count, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.index.get(&word.to_lowercase()).copied()
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn ids(&self, doc: &ReviewDoc) -> Vec<usize> {
        doc.words().filter_map(|w| self.index(w)).collect()
    }
}

/// Lowercased word counts over all tokens, emoticons included. Words are
/// ordered by descending count, then alphabetically.
pub fn build_vocab(docs: &[ReviewDoc], min_count: u64) -> Vocab {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for w in docs.iter().flat_map(|d| d.words()) {
        *counts.entry(w.to_lowercase()).or_default() += 1;
    }
    let mut kept: Vec<(String, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let (words, counts) = kept.into_iter().unzip();
    Vocab::from_parts(words, counts, min_count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DocvecConfig {
    pub dims: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub start_lr: f64,
    pub end_lr: f64,
    pub seed: u64,
}

impl Default for DocvecConfig {
    fn default() -> Self {
        DocvecConfig { dims: 50, epochs: 40, negatives: 5, start_lr: 0.025, end_lr: 0.0001, seed: 0 }
    }
}

impl DocvecConfig {
    fn validate(&self) -> Result<()> {
        if self.dims == 0 || self.epochs == 0 || self.negatives == 0 {
            return Err(Error::InvalidArgument("dims, epochs and negatives must be ≥ 1".into()));
        }
        if !(self.start_lr > 0.0 && self.end_lr >= 0.0 && self.start_lr.is_finite()) {
            return Err(Error::InvalidArgument("learning rates must be positive".into()));
        }
        Ok(())
    }

    fn lr(&self, progress: f64) -> f64 {
        self.start_lr - (self.start_lr - self.end_lr) * progress.clamp(0.0, 1.0)
    }
}

/// Cumulative unigram^0.75 distribution.
#[derive(Debug, Clone)]
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(vocab: &Vocab) -> Self {
        let mut acc = 0.0;
        let cumulative = vocab
            .counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(NOISE_POWER);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocab");
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Negative-sampling loss for one (doc, target, noise set) triple.
pub fn ns_loss(doc: &[f64], target: &[f64], noise: &[&[f64]]) -> f64 {
    softplus(-dot(doc, target)) + noise.iter().map(|n| softplus(dot(doc, n))).sum::<f64>()
}

/// Analytic gradient of [`ns_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct NsGradient {
    pub doc: Vec<f64>,
    pub target: Vec<f64>,
    pub noise: Vec<Vec<f64>>,
}

pub fn ns_gradient(doc: &[f64], target: &[f64], noise: &[&[f64]]) -> NsGradient {
    let g_t = sigmoid(dot(doc, target)) - 1.0;
    let mut g_doc: Vec<f64> = target.iter().map(|t| g_t * t).collect();
    let g_target = doc.iter().map(|d| g_t * d).collect();
    let mut g_noise = Vec::with_capacity(noise.len());
    for n in noise {
        let g_n = sigmoid(dot(doc, n));
        for (gd, x) in g_doc.iter_mut().zip(n.iter()) {
            *gd += g_n * x;
        }
        g_noise.push(doc.iter().map(|d| g_n * d).collect());
    }
    NsGradient { doc: g_doc, target: g_target, noise: g_noise }
}

fn uniform_init(rng: &mut ChaCha8Rng, n: usize, dims: usize) -> Vec<f64> {
    let half = 0.5 / dims as f64;
    (0..n).map(|_| rng.gen_range(-half..=half)).collect()
}

/// One gradient step on a document vector and the touched word vectors;
/// returns the pre-step loss. Noise words equal to the target are skipped.
fn sgd_step(doc: &mut [f64], words: &mut [f64], dims: usize, target: usize, negatives: &[usize], lr: f64) -> f64 {
    let negatives: Vec<usize> = negatives.iter().copied().filter(|&n| n != target).collect();
    let row = |i: usize| i * dims..(i + 1) * dims;
    let (loss, grad) = {
        let t = &words[row(target)];
        let ns: Vec<&[f64]> = negatives.iter().map(|&n| &words[row(n)]).collect();
        (ns_loss(doc, t, &ns), ns_gradient(doc, t, &ns))
    };
    for (d, g) in doc.iter_mut().zip(&grad.doc) {
        *d -= lr * g;
    }
    for (w, g) in words[row(target)].iter_mut().zip(&grad.target) {
        *w -= lr * g;
    }
    for (&n, gn) in negatives.iter().zip(&grad.noise) {
        for (w, g) in words[row(n)].iter_mut().zip(gn) {
            *w -= lr * g;
        }
    }
    loss
}

#[derive(Debug, Clone)]
pub struct DocvecModel {
    config: DocvecConfig,
    vocab: Vocab,
    doc_ids: Vec<String>,
    doc_index: HashMap<String, usize>,
    doc_vectors: Vec<f64>,
    word_vectors: Vec<f64>,
    epoch_losses: Vec<f64>,
    noise: NoiseTable,
}

impl DocvecModel {
    pub fn dims(&self) -> usize {
        self.config.dims
    }

    pub fn config(&self) -> &DocvecConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    /// Mean per-pair loss of each epoch.
    pub fn epoch_losses(&self) -> &[f64] {
        &self.epoch_losses
    }

    pub fn doc_vector(&self, id: &str) -> Option<&[f64]> {
        let d = self.config.dims;
        self.doc_index.get(id).map(|&i| &self.doc_vectors[i * d..(i + 1) * d])
    }

    pub fn word_vector(&self, word: &str) -> Option<&[f64]> {
        let d = self.config.dims;
        self.vocab.index(word).map(|i| &self.word_vectors[i * d..(i + 1) * d])
    }

    /// Embeds an unseen document with the word vectors frozen.
    pub fn infer(&self, doc: &ReviewDoc, steps: usize, seed: u64) -> Result<Vec<f64>> {
        let ids = self.vocab.ids(doc);
        if ids.is_empty() {
            return Err(Error::NoKnownWords(doc.id.clone()));
        }
        let dims = self.config.dims;
        let mut rng = seed::rng(seed);
        let mut v = uniform_init(&mut rng, dims, dims);
        let row = |i: usize| &self.word_vectors[i * dims..(i + 1) * dims];
        let total = (steps * ids.len()).max(1) as f64;
        let mut done = 0usize;
        let mut negatives = vec![0; self.config.negatives];
        for _ in 0..steps {
            for &w in &ids {
                for n in negatives.iter_mut() {
                    *n = self.noise.sample(&mut rng);
                }
                let lr = self.config.lr(done as f64 / total);
                let noise: Vec<&[f64]> = negatives.iter().filter(|&&n| n != w).map(|&n| row(n)).collect();
                let g = ns_gradient(&v, row(w), &noise);
                for (x, gx) in v.iter_mut().zip(&g.doc) {
                    *x -= lr * gx;
                }
                done += 1;
            }
        }
        Ok(v)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            dims: self.config.dims,
            docs: self.doc_ids.len(),
            words: self.vocab.len(),
            config: self.config,
            vocab: self.vocab.words.iter().cloned().zip(self.vocab.counts.iter().copied()).collect(),
            min_count: self.vocab.min_count,
            doc_ids: self.doc_ids.clone(),
            doc_vectors: self.doc_vectors.clone(),
            word_vectors: self.word_vectors.clone(),
            epoch_losses: self.epoch_losses.clone(),
        };
        let text = serde_json::to_string(&file)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let f: ModelFile = serde_json::from_str(&text)?;
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Schema(format!("unsupported docvec format {}", f.format_version)));
        }
        if f.doc_vectors.len() != f.docs * f.dims
            || f.word_vectors.len() != f.words * f.dims
            || f.vocab.len() != f.words
            || f.doc_ids.len() != f.docs
        {
            return Err(Error::Shape("docvec file header disagrees with its arrays".into()));
        }
        let (words, counts) = f.vocab.into_iter().unzip();
        let vocab = Vocab::from_parts(words, counts, f.min_count);
        let noise = NoiseTable::new(&vocab);
        let doc_index = f.doc_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(DocvecModel {
            config: f.config,
            vocab,
            doc_ids: f.doc_ids,
            doc_index,
            doc_vectors: f.doc_vectors,
            word_vectors: f.word_vectors,
            epoch_losses: f.epoch_losses,
            noise,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    dims: usize,
    docs: usize,
    words: usize,
    config: DocvecConfig,
    min_count: u64,
    vocab: Vec<(String, u64)>,
    doc_ids: Vec<String>,
    doc_vectors: Vec<f64>,
    word_vectors: Vec<f64>,
    epoch_losses: Vec<f64>,
}

/// Trains paragraph vectors for `docs`. Document order is reshuffled every
/// epoch; the learning rate decays linearly over all (doc, word) pairs.
pub fn train(docs: &[ReviewDoc], vocab: &Vocab, config: DocvecConfig) -> Result<DocvecModel> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::InvalidArgument("empty vocabulary".into()));
    }
    let dims = config.dims;
    let mut rng = seed::rng(config.seed);
    let mut doc_vectors = uniform_init(&mut rng, docs.len() * dims, dims);
    let mut word_vectors = uniform_init(&mut rng, vocab.len() * dims, dims);
    let noise = NoiseTable::new(vocab);
    let ids: Vec<Vec<usize>> = docs.iter().map(|d| vocab.ids(d)).collect();
    let pairs_per_epoch: usize = ids.iter().map(Vec::len).sum();
    let total = (pairs_per_epoch * config.epochs).max(1) as f64;
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut negatives = vec![0; config.negatives];
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut done = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &di in &order {
            let dv = &mut doc_vectors[di * dims..(di + 1) * dims];
            for &w in &ids[di] {
                for n in negatives.iter_mut() {
                    *n = noise.sample(&mut rng);
                }
                let lr = config.lr(done as f64 / total);
                loss_sum += sgd_step(dv, &mut word_vectors, dims, w, &negatives, lr);
                done += 1;
            }
        }
        epoch_losses.push(if pairs_per_epoch == 0 { 0.0 } else { loss_sum / pairs_per_epoch as f64 });
    }
    let doc_ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    let doc_index = doc_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
    Ok(DocvecModel {
        config,
        vocab: vocab.clone(),
        doc_ids,
        doc_index,
        doc_vectors,
        word_vectors,
        epoch_losses,
        noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Preprocessor;

    fn doc(id: &str, text: &str) -> ReviewDoc {
        Preprocessor::default().prepare(ReviewDoc {
            id: id.into(),
            company: "c".into(),
            sector: "s".into(),
            text: text.into(),
            tokens: Vec::new(),
            label: None,
        })
    }

    #[test]
    fn vocab_threshold_and_emoticons() {
        let docs = vec![doc("a", "rare :) :) :)"), doc("b", ":) :) pay pay")];
        let v = build_vocab(&docs, 2);
        assert!(v.index("rare").is_none());
        assert_eq!(v.index(":)"), Some(0));
        assert_eq!(v.count(0), 5);
        assert_eq!(v.index("PAY"), Some(1));
        assert!(build_vocab(&[], 1).is_empty());
    }

    #[test]
    fn noise_table_follows_counts() {
        let v = Vocab::from_parts(vec!["a".into(), "b".into()], vec![16, 1], 1);
        let t = NoiseTable::new(&v);
        let mut rng = seed::rng(3);
        let hits = (0..10_000).filter(|_| t.sample(&mut rng) == 0).count() as f64 / 10_000.0;
        // 16^0.75 / (16^0.75 + 1) = 8/9
        assert!((hits - 8.0 / 9.0).abs() < 0.02, "{hits}");
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0);
    }

    #[test]
    fn train_shapes_determinism_and_errors() {
        let docs = vec![doc("a", "good pay good team"), doc("b", "bad pay bad hours")];
        let v = build_vocab(&docs, 1);
        let cfg = DocvecConfig { dims: 8, epochs: 3, seed: 5, ..Default::default() };
        let m1 = train(&docs, &v, cfg).unwrap();
        let m2 = train(&docs, &v, cfg).unwrap();
        assert_eq!(m1.doc_vector("a").unwrap().len(), 8);
        assert_eq!(m1.doc_vectors, m2.doc_vectors);
        assert!(m1.doc_vectors.iter().all(|x| x.is_finite()));
        assert!(train(&docs, &build_vocab(&docs, 100), cfg).is_err());
        assert!(train(&docs, &v, DocvecConfig { dims: 0, ..cfg }).is_err());

        let inferred = m1.infer(&docs[0], 5, 1).unwrap();
        assert_eq!(inferred.len(), 8);
        assert!(matches!(m1.infer(&doc("z", "zzz qqq"), 5, 1), Err(Error::NoKnownWords(_))));
    }

    #[test]
    fn save_load_round_trip() {
        let docs = vec![doc("a", "good pay"), doc("b", "bad pay")];
        let v = build_vocab(&docs, 1);
        let m = train(&docs, &v, DocvecConfig { dims: 4, epochs: 2, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.save(&p).unwrap();
        let back = DocvecModel::load(&p).unwrap();
        assert_eq!(back.doc_vectors, m.doc_vectors);
        assert_eq!(back.word_vectors, m.word_vectors);
        assert_eq!(back.vocab.index("pay"), m.vocab.index("pay"));
        assert_eq!(back.infer(&docs[0], 3, 9).unwrap(), m.infer(&docs[0], 3, 9).unwrap());
    }
}
