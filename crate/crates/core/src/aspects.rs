//! Aspect catalog and gazetteer-style mention extraction.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ReviewDoc;
use crate::error::{Error, Result};

pub const MAX_TERM_TOKENS: usize = 3;

const DEFAULT_CATALOG: &str = include_str!("../data/aspects30.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aspect {
    pub name: String,
    pub terms: Vec<String>,
    #[serde(default)]
    pub modifiers: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct CatalogFile {
    aspects: Vec<Aspect>,
}

/// Ordered aspects; position in the catalog is the embedding dimension.
#[derive(Debug, Clone)]
pub struct AspectCatalog {
    aspects: Vec<Aspect>,
    by_term: HashMap<String, usize>,
    by_name: HashMap<String, usize>,
}

impl AspectCatalog {
    pub fn new(aspects: Vec<Aspect>) -> Result<Self> {
        let mut by_term = HashMap::new();
        let mut by_name = HashMap::new();
        let mut normalized = Vec::with_capacity(aspects.len());
        for (idx, a) in aspects.into_iter().enumerate() {
            if a.name.trim().is_empty() {
                return Err(Error::Schema(format!("aspect #{} has an empty name", idx + 1)));
            }
            if by_name.insert(a.name.clone(), idx).is_some() {
                return Err(Error::Duplicate { kind: "aspect", name: a.name });
            }
            let mut terms = Vec::with_capacity(a.terms.len());
            let mut seen = HashSet::new();
            for t in &a.terms {
                let key = t.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
                let width = key.split(' ').count();
                if key.is_empty() || width > MAX_TERM_TOKENS {
                    return Err(Error::Schema(format!("aspect `{}`: bad term `{t}`", a.name)));
                }
                if !seen.insert(key.clone()) {
                    continue;
                }
                if let Some(&other) = by_term.get(&key) {
                    if other != idx {
                        return Err(Error::Schema(format!(
                            "term `{key}` listed under both `{}` and `{}`",
                            normalized.get(other).map_or("?", |x: &Aspect| x.name.as_str()),
                            a.name
                        )));
                    }
                }
                by_term.insert(key.clone(), idx);
                terms.push(key);
            }
            if terms.is_empty() {
                return Err(Error::Schema(format!("aspect `{}` has no terms", a.name)));
            }
            normalized.push(Aspect {
                name: a.name,
                terms,
                modifiers: a.modifiers.iter().map(|m| m.to_lowercase()).collect(),
            });
        }
        Ok(AspectCatalog { aspects: normalized, by_term, by_name })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Self::new(file.aspects)
    }

    /// The shipped 30-aspect catalog.
    pub fn default_catalog() -> Self {
        Self::from_toml_str(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }

    pub fn len(&self) -> usize {
        self.aspects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aspects.is_empty()
    }

    pub fn aspects(&self) -> &[Aspect] {
        &self.aspects
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.aspects.iter().map(|a| a.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn aspect_for_term(&self, term: &str) -> Option<usize> {
        self.by_term.get(term).copied()
    }

    /// Every single-word term, for registering nouns with a tagger.
    pub fn term_words(&self) -> impl Iterator<Item = &str> {
        self.aspects
            .iter()
            .flat_map(|a| a.terms.iter())
            .flat_map(|t| t.split(' '))
    }
}

pub fn load_catalog(path: &Path) -> Result<AspectCatalog> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    AspectCatalog::from_toml_str(&text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectMention {
    pub aspect: String,
    pub doc_id: String,
    pub sentence_index: usize,
    pub token_index: usize,
    /// Number of tokens covered by `matched_term`.
    pub token_count: usize,
    pub matched_term: String,
}

impl AspectMention {
    pub fn span(&self) -> std::ops::Range<usize> {
        self.token_index..self.token_index + self.token_count
    }

    /// Index of the mention's last token, used as its head word.
    pub fn head_index(&self) -> usize {
        self.token_index + self.token_count - 1
    }
}

/// Mentions in one token sequence, longest match first, left to right.
pub fn extract_sentence(tokens: &[String], catalog: &AspectCatalog) -> Vec<(usize, usize, usize, String)> {
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    'scan: while i < lower.len() {
        for width in (1..=MAX_TERM_TOKENS.min(lower.len() - i)).rev() {
            let key = lower[i..i + width].join(" ");
            if let Some(aspect) = catalog.aspect_for_term(&key) {
                out.push((aspect, i, width, key));
                i += width;
                continue 'scan;
            }
        }
        i += 1;
    }
    out
}

/// Catalog mentions of a tokenized document, in document order.
pub fn extract(doc: &ReviewDoc, catalog: &AspectCatalog) -> Vec<AspectMention> {
    doc.tokens
        .iter()
        .enumerate()
        .flat_map(|(si, sent)| {
            extract_sentence(sent, catalog)
                .into_iter()
                .map(move |(aspect, ti, width, term)| AspectMention {
                    aspect: catalog.aspects[aspect].name.clone(),
                    doc_id: doc.id.clone(),
                    sentence_index: si,
                    token_index: ti,
                    token_count: width,
                    matched_term: term,
                })
        })
        .collect()
}

/// Mention counts per aspect, zero-filled, keyed by aspect name.
pub fn corpus_frequency(docs: &[ReviewDoc], catalog: &AspectCatalog) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = catalog.names().map(|n| (n.to_string(), 0)).collect();
    for doc in docs {
        for m in extract(doc, catalog) {
            *counts.get_mut(&m.aspect).expect("catalog aspect") += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Preprocessor;

    fn doc(text: &str) -> ReviewDoc {
        let pre = Preprocessor::default();
        pre.prepare(ReviewDoc {
            id: "d".into(),
            company: "c".into(),
            sector: "s".into(),
            text: text.into(),
            tokens: Vec::new(),
            label: None,
        })
    }

    #[test]
    fn default_catalog_has_thirty_in_order() {
        let cat = AspectCatalog::default_catalog();
        assert_eq!(cat.len(), 30);
        assert_eq!(cat.aspects()[0].name, "Job");
        assert_eq!(cat.aspects()[7].name, "Salary");
        assert_eq!(cat.aspects()[29].name, "Stress");
    }

    #[test]
    fn duplicate_names_and_empty_terms_rejected() {
        let dup = "[[aspects]]\nname=\"Salary\"\nterms=[\"pay\"]\n[[aspects]]\nname=\"Salary\"\nterms=[\"wage\"]\n";
        assert!(matches!(AspectCatalog::from_toml_str(dup), Err(Error::Duplicate { .. })));
        let empty = "[[aspects]]\nname=\"Salary\"\nterms=[]\n";
        assert!(AspectCatalog::from_toml_str(empty).is_err());
        let overlap = "[[aspects]]\nname=\"A\"\nterms=[\"pay\"]\n[[aspects]]\nname=\"B\"\nterms=[\"Pay\"]\n";
        assert!(AspectCatalog::from_toml_str(overlap).is_err());
        let single = "[[aspects]]\nname=\"Salary\"\nterms=[\"Pay\"]\n";
        let cat = AspectCatalog::from_toml_str(single).unwrap();
        assert_eq!(cat.len(), 1);
        assert_eq!(cat.aspects()[0].terms, vec!["pay"]);
    }

    #[test]
    fn extracts_paper_example() {
        let cat = AspectCatalog::default_catalog();
        let got: Vec<String> = extract(&doc("Competitive salary, Nice location"), &cat)
            .into_iter()
            .map(|m| m.aspect)
            .collect();
        assert_eq!(got, vec!["Salary", "Location"]);
        assert!(extract(&doc("the weather is fine"), &cat).is_empty());
    }

    #[test]
    fn longest_match_wins() {
        let cat = AspectCatalog::default_catalog();
        let got = extract(&doc("work life balance is poor"), &cat);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].aspect, "Work life");
        assert_eq!(got[0].matched_term, "work life balance");
        assert_eq!(got[0].span(), 0..3);
        assert_eq!(got[0].head_index(), 2);
    }

    #[test]
    fn frequency_counts() {
        let cat = AspectCatalog::default_catalog();
        let docs = vec![doc("good salary"), doc("Salary is low.")];
        let freq = corpus_frequency(&docs, &cat);
        assert_eq!(freq["Salary"], 2);
        assert_eq!(freq.values().sum::<usize>(), 2);
        assert!(corpus_frequency(&[], &cat).values().all(|&c| c == 0));
    }
}
