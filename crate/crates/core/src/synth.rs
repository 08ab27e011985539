//! Seeded synthetic review corpora with planted aspect sentiment.
//!
//! Every company gets a hidden per-aspect sentiment profile. Each review
//! plants a few aspect mentions whose polarity is drawn from that profile;
//! favorable mentions land in the pros, unfavorable ones in the cons. Two
//! companies can share one profile ("twins") so similarity reports have a
//! known answer. Matching primary and secondary lexicons are emitted too.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aspects::AspectCatalog;
use crate::corpus::RawReview;
use crate::error::{Error, Result};
use crate::lexicon::{LexiconEntry, Source};
use crate::seed;

pub const POSITIVE_WORDS: &[&str] = &[
    "good", "great", "nice", "excellent", "amazing", "fantastic", "awesome", "wonderful", "solid",
    "rewarding", "generous", "supportive", "friendly", "decent", "helpful",
];

pub const NEGATIVE_WORDS: &[&str] = &[
    "bad", "poor", "awful", "terrible", "horrible", "lousy", "toxic", "unfair", "stagnant", "mediocre",
    "disappointing", "boring", "weak",
];

pub const INTENSIFIERS: &[&str] = &["very", "really", "extremely", "quite", "truly"];

/// Neutral words: never catalog terms, never lexicon entries after merging.
pub const FILLERS: &[&str] = &["stuff", "things", "honestly", "today", "folks", "everything", "somehow"];

/// Weak entries that the merge threshold must drop.
const WEAK_WORDS: &[(&str, f64)] = &[("stuff", 0.05), ("things", -0.1), ("today", 0.2), ("folks", -0.15)];

/// Entries only the secondary source knows; never used in review text.
const SECONDARY_ONLY: &[(&str, f64)] = &[("brilliant", 0.85), ("dreadful", -0.8), ("superb", 0.9), ("grim", -0.6)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub companies: usize,
    /// Reviews per company; each yields a pros and a cons sub-review.
    pub per_company: usize,
    pub sectors: Vec<String>,
    /// Give the first two companies the same profile.
    pub twins: bool,
    /// Fraction of single-word aspect terms that get a lexicon entry.
    pub aspect_coverage: f64,
    pub min_mentions: usize,
    pub max_mentions: usize,
    /// Chance that a mention is phrased through a negated opposite word.
    pub negation_rate: f64,
    /// Chance that a mention is phrased without any polar word.
    pub bare_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            companies: 4,
            per_company: 50,
            sectors: vec!["tech".into(), "finance".into()],
            twins: true,
            aspect_coverage: 1.0,
            min_mentions: 2,
            max_mentions: 4,
            negation_rate: 0.1,
            bare_rate: 0.2,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.companies == 0 || self.per_company == 0 {
            return bad("need at least one company and one review per company");
        }
        if self.twins && self.companies < 2 {
            return bad("twins need at least two companies");
        }
        if self.sectors.is_empty() {
            return bad("need at least one sector");
        }
        if self.min_mentions == 0 || self.min_mentions > self.max_mentions {
            return bad("mention bounds must satisfy 1 ≤ min ≤ max");
        }
        for (name, v) in [
            ("aspect_coverage", self.aspect_coverage),
            ("negation_rate", self.negation_rate),
            ("bare_rate", self.bare_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.negation_rate + self.bare_rate > 1.0 {
            return bad("negation_rate + bare_rate must not exceed 1");
        }
        Ok(())
    }
}

/// What the generator planted, for checking downstream output against.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Planted {
    /// Hidden per-aspect mean sentiment, catalog order.
    pub profiles: BTreeMap<String, Vec<f64>>,
    pub twins: Option<(String, String)>,
    pub mentions: BTreeMap<String, usize>,
    pub negated_mentions: usize,
    pub bare_mentions: usize,
    /// Single-word aspect terms with a lexicon entry, and all of them.
    pub covered_terms: usize,
    pub aspect_terms: usize,
}

impl Planted {
    pub fn total_mentions(&self) -> usize {
        self.mentions.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub reviews: Vec<RawReview>,
    pub primary: Vec<LexiconEntry>,
    pub secondary: Vec<LexiconEntry>,
    pub planted: Planted,
}

fn entry(term: &str, polarity: f64, source: Source) -> LexiconEntry {
    LexiconEntry { term: term.to_string(), polarity, source }
}

/// Renders lexicon entries in the two-column source format.
pub fn source_tsv(entries: &[LexiconEntry]) -> String {
    entries.iter().map(|e| format!("{}\t{}\n", e.term, e.polarity)).collect()
}

fn pick<'a, R: Rng>(rng: &mut R, words: &[&'a str]) -> &'a str {
    words.choose(rng).expect("non-empty word list")
}

pub fn company_name(i: usize) -> String {
    format!("company{i:03}")
}

pub fn synth_corpus(config: &SynthConfig, catalog: &AspectCatalog, seed_value: u64) -> Result<SynthCorpus> {
    config.validate()?;
    let vocab: BTreeSet<&str> = POSITIVE_WORDS
        .iter()
        .chain(NEGATIVE_WORDS)
        .chain(INTENSIFIERS)
        .chain(FILLERS)
        .copied()
        .collect();
    if let Some(w) = vocab.iter().find(|w| catalog.aspect_for_term(w).is_some()) {
        return Err(Error::InvalidArgument(format!("synthetic word `{w}` is an aspect term in this catalog")));
    }
    let mut rng = seed::rng(seed::derive(seed_value, "synth"));

    // Single-word terms per aspect, and which of them the lexicon covers.
    let terms: Vec<Vec<&str>> = catalog
        .aspects()
        .iter()
        .map(|a| a.terms.iter().map(String::as_str).filter(|t| !t.contains(' ')).collect())
        .collect();
    if let Some(a) = terms.iter().position(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!("aspect `{}` has no single-word term", catalog.aspects()[a].name)));
    }
    let mut all_terms: Vec<&str> = terms.iter().flatten().copied().collect();
    all_terms.sort_unstable();
    let covered_count = (config.aspect_coverage * all_terms.len() as f64).round() as usize;
    let mut shuffled = all_terms.clone();
    shuffled.shuffle(&mut rng);
    let mut covered: Vec<&str> = shuffled[..covered_count].to_vec();
    covered.sort_unstable();

    let mut primary = Vec::new();
    let mut secondary = Vec::new();
    for (i, w) in POSITIVE_WORDS.iter().enumerate() {
        let p = rng.gen_range(0.5..0.95);
        primary.push(entry(w, p, Source::Primary));
        if i % 2 == 0 {
            secondary.push(entry(w, rng.gen_range(0.3..1.0), Source::Secondary));
        }
    }
    for (i, w) in NEGATIVE_WORDS.iter().enumerate() {
        let p = -rng.gen_range(0.5..0.95);
        primary.push(entry(w, p, Source::Primary));
        if i % 2 == 1 {
            secondary.push(entry(w, -rng.gen_range(0.3..1.0), Source::Secondary));
        }
    }
    for t in &covered {
        // Aspect words lean positive so the ELM verdict sets the sign.
        let p = rng.gen_range(0.3..0.6);
        if rng.gen_bool(0.5) {
            primary.push(entry(t, p, Source::Primary));
        } else {
            secondary.push(entry(t, p, Source::Secondary));
        }
    }
    for &(w, p) in WEAK_WORDS {
        primary.push(entry(w, p, Source::Primary));
    }
    for &(w, p) in SECONDARY_ONLY {
        secondary.push(entry(w, p, Source::Secondary));
    }

    let dims = catalog.len();
    let mut profiles: Vec<Vec<f64>> = (0..config.companies)
        .map(|_| (0..dims).map(|_| rng.gen_range(-0.9..0.9)).collect())
        .collect();
    if config.twins {
        profiles[1] = profiles[0].clone();
    }

    let mut planted = Planted {
        twins: config.twins.then(|| (company_name(0), company_name(1))),
        mentions: catalog.names().map(|n| (n.to_string(), 0)).collect(),
        covered_terms: covered.len(),
        aspect_terms: all_terms.len(),
        ..Planted::default()
    };
    let mut reviews = Vec::with_capacity(config.companies * config.per_company);
    for (c, profile) in profiles.iter().enumerate() {
        let company = company_name(c);
        let sector = config.sectors[c % config.sectors.len()].clone();
        for r in 0..config.per_company {
            let mut pros = Vec::new();
            let mut cons = Vec::new();
            for _ in 0..rng.gen_range(config.min_mentions..=config.max_mentions) {
                let a = rng.gen_range(0..dims);
                let term = pick(&mut rng, &terms[a]);
                let favorable = rng.gen_bool((1.0 + profile[a]) / 2.0);
                let (same, opposite) = if favorable {
                    (POSITIVE_WORDS, NEGATIVE_WORDS)
                } else {
                    (NEGATIVE_WORDS, POSITIVE_WORDS)
                };
                let roll: f64 = rng.gen();
                let sentence = if roll < config.negation_rate {
                    planted.negated_mentions += 1;
                    format!("the {term} was not {}", pick(&mut rng, opposite))
                } else if roll < config.negation_rate + config.bare_rate {
                    planted.bare_mentions += 1;
                    format!("{term} {} {}", pick(&mut rng, FILLERS), pick(&mut rng, FILLERS))
                } else {
                    let adj = pick(&mut rng, same);
                    match rng.gen_range(0..3) {
                        0 => format!("{adj} {term}"),
                        1 => format!("the {term} is {adj}"),
                        _ => format!("{} {adj} {term}", pick(&mut rng, INTENSIFIERS)),
                    }
                };
                *planted.mentions.get_mut(&catalog.aspects()[a].name).expect("aspect") += 1;
                if favorable { &mut pros } else { &mut cons }.push(sentence);
            }
            // Keep both sides non-empty without planting extra mentions.
            if pros.is_empty() {
                pros.push(format!("{} {}", pick(&mut rng, POSITIVE_WORDS), pick(&mut rng, FILLERS)));
            }
            if cons.is_empty() {
                cons.push(format!("{} {}", pick(&mut rng, NEGATIVE_WORDS), pick(&mut rng, FILLERS)));
            }
            reviews.push(RawReview {
                id: format!("{company}-r{r:04}"),
                company: company.clone(),
                sector: sector.clone(),
                pros: pros.join(". ") + ".",
                cons: cons.join(". ") + ".",
                body: String::new(),
            });
        }
        planted.profiles.insert(company, profile.clone());
    }
    Ok(SynthCorpus { reviews, primary, secondary, planted })
}
