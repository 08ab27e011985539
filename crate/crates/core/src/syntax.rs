//! Dependency arcs over tokenized sentences.
//!
//! Arcs come either from CoNLL-U files produced by an external parser or from
//! a small pattern-based fallback. Only `amod`, `advmod` and `nsubj` matter
//! for trigger extraction; everything else is kept as [`Relation::Other`].

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Amod,
    Advmod,
    Nsubj,
    Other,
}

impl Relation {
    /// Maps a UD relation label; subtypes such as `nsubj:pass` use their base.
    pub fn from_deprel(label: &str) -> Relation {
        match label.split(':').next().unwrap_or("") {
            "amod" => Relation::Amod,
            "advmod" => Relation::Advmod,
            "nsubj" => Relation::Nsubj,
            _ => Relation::Other,
        }
    }

    pub fn as_deprel(self) -> &'static str {
        match self {
            Relation::Amod => "amod",
            Relation::Advmod => "advmod",
            Relation::Nsubj => "nsubj",
            Relation::Other => "dep",
        }
    }

    pub fn is_trigger(self) -> bool {
        self != Relation::Other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoarsePos {
    Adj,
    Adv,
    Noun,
    Verb,
    Neg,
    Other,
}

impl CoarsePos {
    fn from_upos(upos: &str, lemma: &str) -> CoarsePos {
        match upos {
            "ADJ" => CoarsePos::Adj,
            "ADV" => CoarsePos::Adv,
            "NOUN" | "PROPN" => CoarsePos::Noun,
            "VERB" | "AUX" => CoarsePos::Verb,
            "PART" if lemma.eq_ignore_ascii_case("not") => CoarsePos::Neg,
            _ => CoarsePos::Other,
        }
    }

    fn upos(self) -> &'static str {
        match self {
            CoarsePos::Adj => "ADJ",
            CoarsePos::Adv => "ADV",
            CoarsePos::Noun => "NOUN",
            CoarsePos::Verb => "VERB",
            CoarsePos::Neg => "PART",
            CoarsePos::Other => "X",
        }
    }
}

/// `head` and `dependent` are 0-based token indices within the sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DepArc {
    pub relation: Relation,
    pub head: usize,
    pub dependent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedSentence {
    pub tokens: Vec<String>,
    pub pos: Vec<CoarsePos>,
    pub arcs: Vec<DepArc>,
}

impl ParsedSentence {
    pub fn new(tokens: Vec<String>, pos: Vec<CoarsePos>, arcs: Vec<DepArc>) -> Result<Self> {
        if tokens.len() != pos.len() {
            return Err(Error::Shape(format!("{} tokens but {} tags", tokens.len(), pos.len())));
        }
        let n = tokens.len();
        if let Some(a) = arcs.iter().find(|a| a.head >= n || a.dependent >= n || a.head == a.dependent) {
            return Err(Error::Shape(format!("invalid arc {a:?} for {n} tokens")));
        }
        Ok(ParsedSentence { tokens, pos, arcs })
    }
}

fn conllu_err(ctx: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::parse(ctx, line, msg)
}

/// Parses CoNLL-U text. Multiword-token ranges (`1-2`) and empty nodes (`1.1`)
/// are skipped; only FORM, LEMMA (for negation), UPOS, HEAD and DEPREL are used.
pub fn parse_conllu(text: &str, context: &str) -> Result<Vec<ParsedSentence>> {
    Ok(parse_with_doc_ids(text, context)?.into_iter().map(|(_, s)| s).collect())
}

/// Groups sentences by the most recent `# newdoc id = …` comment, in file
/// order. Sentences before any such comment are rejected.
pub fn parse_conllu_documents(text: &str, context: &str) -> Result<Vec<(String, Vec<ParsedSentence>)>> {
    let mut out: Vec<(String, Vec<ParsedSentence>)> = Vec::new();
    for (doc, sentence) in parse_with_doc_ids(text, context)? {
        let doc = doc.ok_or_else(|| Error::Schema(format!("{context}: sentence before any `# newdoc id`")))?;
        match out.last_mut() {
            Some((id, sents)) if *id == doc => sents.push(sentence),
            _ => out.push((doc, vec![sentence])),
        }
    }
    Ok(out)
}

type Row = (usize, String, CoarsePos, Option<usize>, Relation);

fn build_sentence(rows: &mut Vec<Row>, context: &str) -> Result<ParsedSentence> {
    let n = rows.len();
    let mut tokens = Vec::with_capacity(n);
    let mut pos = Vec::with_capacity(n);
    let mut arcs = Vec::new();
    for (dep, (line, form, p, head, rel)) in rows.drain(..).enumerate() {
        tokens.push(form);
        pos.push(p);
        if let Some(h) = head {
            if h > n || h - 1 == dep {
                return Err(conllu_err(context, line, format!("head {h} out of range")));
            }
            arcs.push(DepArc { relation: rel, head: h - 1, dependent: dep });
        }
    }
    Ok(ParsedSentence { tokens, pos, arcs })
}

fn parse_with_doc_ids(text: &str, context: &str) -> Result<Vec<(Option<String>, ParsedSentence)>> {
    let mut out = Vec::new();
    let mut rows: Vec<Row> = Vec::new();
    let mut doc: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            if !rows.is_empty() {
                out.push((doc.clone(), build_sentence(&mut rows, context)?));
            }
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("newdoc id") {
                doc = Some(id.trim_start().trim_start_matches('=').trim().to_string());
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(conllu_err(context, lineno, format!("expected 10 columns, found {}", cols.len())));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let idx: usize = id
            .parse()
            .map_err(|_| conllu_err(context, lineno, format!("bad token id `{id}`")))?;
        if idx != rows.len() + 1 {
            return Err(conllu_err(context, lineno, format!("token id {idx} out of sequence")));
        }
        let head = match cols[6] {
            "_" | "0" => None,
            h => Some(
                h.parse::<usize>()
                    .map_err(|_| conllu_err(context, lineno, format!("bad head `{h}`")))?,
            ),
        };
        rows.push((
            lineno,
            cols[1].to_string(),
            CoarsePos::from_upos(cols[3], cols[2]),
            head,
            Relation::from_deprel(cols[7]),
        ));
    }
    if !rows.is_empty() {
        out.push((doc, build_sentence(&mut rows, context)?));
    }
    Ok(out)
}

pub fn read_conllu(path: &Path) -> Result<Vec<ParsedSentence>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_conllu(&text, &path.display().to_string())
}

pub fn read_conllu_documents(path: &Path) -> Result<Vec<(String, Vec<ParsedSentence>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_conllu_documents(&text, &path.display().to_string())
}

/// Writes the subset of CoNLL-U this module consumes. Tokens without an
/// incoming arc are attached to the root.
pub fn write_conllu(sentences: &[ParsedSentence]) -> String {
    let mut out = String::new();
    write_sentences(&mut out, sentences);
    out
}

/// Like [`write_conllu`], with a `# newdoc id` header before each document.
pub fn write_conllu_documents<'a>(docs: impl IntoIterator<Item = (&'a str, &'a [ParsedSentence])>) -> String {
    let mut out = String::new();
    for (id, sentences) in docs {
        let _ = writeln!(out, "# newdoc id = {id}");
        write_sentences(&mut out, sentences);
    }
    out
}

fn write_sentences(out: &mut String, sentences: &[ParsedSentence]) {
    for s in sentences {
        let mut heads: Vec<Option<&DepArc>> = vec![None; s.tokens.len()];
        for a in &s.arcs {
            heads[a.dependent] = Some(a);
        }
        for (i, (tok, pos)) in s.tokens.iter().zip(&s.pos).enumerate() {
            let lemma = if *pos == CoarsePos::Neg { "not".to_string() } else { tok.to_lowercase() };
            let (head, rel) = match heads[i] {
                Some(a) => ((a.head + 1).to_string(), a.relation.as_deprel()),
                None => ("0".to_string(), "root"),
            };
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_", i + 1, tok, lemma, pos.upos(), head, rel);
        }
        out.push('\n');
    }
}

pub const COPULAS: &[&str] = &["is", "are", "was", "were", "be", "been", "seems", "looks"];

const NEGATIONS: &[&str] = &["not", "no", "never", "n't", "without", "hardly", "lack", "lacking"];

const ADVERBS: &[&str] = &[
    "very", "really", "extremely", "quite", "truly", "too", "so", "highly", "pretty", "fairly", "super",
    "always", "often", "sometimes", "rather", "somewhat", "incredibly", "overall", "mostly",
];

const ADJECTIVES: &[&str] = &[
    "good", "great", "bad", "nice", "poor", "excellent", "awful", "terrible", "amazing", "fantastic",
    "awesome", "wonderful", "horrible", "lousy", "solid", "rewarding", "generous", "supportive",
    "friendly", "toxic", "unfair", "stagnant", "mediocre", "disappointing", "decent", "fine", "ok",
    "okay", "competitive", "low", "high", "long", "short", "fair", "strong", "weak", "best", "worst",
    "better", "worse", "old", "new", "full", "free", "flexible", "rigid", "smart", "helpful", "hard",
    "easy", "cool", "fun", "happy", "stodgy", "conservative", "political", "stressful", "healthy",
    "talented", "inclusive", "interesting", "boring", "limited",
];

const CLOSED_OTHER: &[&str] = &[
    "the", "a", "an", "of", "to", "in", "on", "at", "for", "with", "and", "or", "but", "this", "that",
    "these", "those", "it", "its", "i", "we", "you", "they", "he", "she", "my", "our", "their", "your",
    "there", "here", "as", "by", "from", "about", "if", "than", "then", "some", "any", "all", "each",
    "every", "everyone",
];

/// Closed-class dictionary plus suffix rules.
#[derive(Debug, Clone)]
pub struct Tagger {
    dictionary: HashMap<String, CoarsePos>,
}

impl Default for Tagger {
    fn default() -> Self {
        let mut dictionary = HashMap::new();
        for (words, tag) in [
            (CLOSED_OTHER, CoarsePos::Other),
            (ADJECTIVES, CoarsePos::Adj),
            (ADVERBS, CoarsePos::Adv),
            (COPULAS, CoarsePos::Verb),
            (NEGATIONS, CoarsePos::Neg),
        ] {
            for w in words {
                dictionary.insert(w.to_string(), tag);
            }
        }
        Tagger { dictionary }
    }
}

impl Tagger {
    pub fn with_entries(mut self, words: impl IntoIterator<Item = (String, CoarsePos)>) -> Self {
        for (w, t) in words {
            self.dictionary.insert(w.to_lowercase(), t);
        }
        self
    }

    /// Registers words as nouns unless the dictionary already tags them.
    pub fn with_nouns<'a>(mut self, words: impl IntoIterator<Item = &'a str>) -> Self {
        for w in words {
            self.dictionary.entry(w.to_lowercase()).or_insert(CoarsePos::Noun);
        }
        self
    }

    pub fn tag_word(&self, word: &str) -> CoarsePos {
        let w = word.to_lowercase();
        if let Some(&t) = self.dictionary.get(&w) {
            return t;
        }
        if !w.chars().any(char::is_alphabetic) {
            return CoarsePos::Other;
        }
        if w.ends_with("n't") {
            return CoarsePos::Neg;
        }
        if w.ends_with("ly") && w.len() > 4 {
            return CoarsePos::Adv;
        }
        const ADJ_SUFFIXES: &[&str] = &["ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish"];
        if ADJ_SUFFIXES.iter().any(|s| w.len() > s.len() + 2 && w.ends_with(s)) {
            return CoarsePos::Adj;
        }
        if (w.ends_with("ing") || w.ends_with("ed")) && w.len() > 5 {
            return CoarsePos::Verb;
        }
        CoarsePos::Noun
    }

    pub fn tag(&self, tokens: &[String]) -> Vec<CoarsePos> {
        tokens.iter().map(|t| self.tag_word(t)).collect()
    }
}

fn is_copula(token: &str) -> bool {
    COPULAS.iter().any(|c| token.eq_ignore_ascii_case(c))
}

/// Pattern-based arcs: ADJ NOUN → amod, ADV ADJ → advmod, and
/// NOUN … copula … NOUN → nsubj (head = the noun after the copula). Each
/// copula pairs the nearest noun on its left (not crossing an earlier
/// copula) with the nearest noun on its right, so every token has at most
/// one head.
pub fn heuristic_parse(tokens: &[String], pos: &[CoarsePos]) -> Result<ParsedSentence> {
    if tokens.len() != pos.len() {
        return Err(Error::Shape(format!("{} tokens but {} tags", tokens.len(), pos.len())));
    }
    let mut arcs = Vec::new();
    for i in 1..tokens.len() {
        match (pos[i - 1], pos[i]) {
            (CoarsePos::Adj, CoarsePos::Noun) => arcs.push(DepArc { relation: Relation::Amod, head: i, dependent: i - 1 }),
            (CoarsePos::Adv, CoarsePos::Adj) => arcs.push(DepArc { relation: Relation::Advmod, head: i, dependent: i - 1 }),
            _ => {}
        }
    }
    let copulas: Vec<usize> = (0..tokens.len())
        .filter(|&i| pos[i] == CoarsePos::Verb && is_copula(&tokens[i]))
        .collect();
    let mut left_bound = 0;
    for (k, &c) in copulas.iter().enumerate() {
        let right_bound = copulas.get(k + 1).copied().unwrap_or(tokens.len());
        let subject = (left_bound..c).rev().find(|&i| pos[i] == CoarsePos::Noun);
        let object = (c + 1..right_bound).find(|&i| pos[i] == CoarsePos::Noun);
        if let (Some(s), Some(o)) = (subject, object) {
            arcs.push(DepArc { relation: Relation::Nsubj, head: o, dependent: s });
        }
        left_bound = c + 1;
    }
    arcs.sort_by_key(|a| (a.dependent, a.head));
    Ok(ParsedSentence { tokens: tokens.to_vec(), pos: pos.to_vec(), arcs })
}

/// Tokens linked to `aspect_index` by an amod/advmod/nsubj arc in either
/// direction, in token order.
pub fn modifiers_of(sentence: &ParsedSentence, aspect_index: usize) -> Vec<usize> {
    let mut out: Vec<usize> = sentence
        .arcs
        .iter()
        .filter(|a| a.relation.is_trigger())
        .filter_map(|a| {
            if a.head == aspect_index {
                Some(a.dependent)
            } else if a.dependent == aspect_index {
                Some(a.head)
            } else {
                None
            }
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    const SAMPLE: &str = "# text = Great opportunities\n\
1\tGreat\tgreat\tADJ\t_\t_\t2\tamod\t_\t_\n\
2\topportunities\topportunity\tNOUN\t_\t_\t0\troot\t_\t_\n\
\n\
1\tsalary\tsalary\tNOUN\t_\t_\t3\tnsubj\t_\t_\n\
2\tis\tbe\tAUX\t_\t_\t3\tcop\t_\t_\n\
3\tnot\tnot\tPART\t_\t_\t4\tadvmod\t_\t_\n\
4\tfine\tfine\tADJ\t_\t_\t0\troot\t_\t_\n\
5\there\there\tADV\t_\t_\t4\tobl\t_\t_\n";

    #[test]
    fn reads_conllu() {
        let got = parse_conllu(SAMPLE, "t").unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].arcs, vec![DepArc { relation: Relation::Amod, head: 1, dependent: 0 }]);
        assert_eq!(got[0].pos, vec![CoarsePos::Adj, CoarsePos::Noun]);
        assert_eq!(got[1].pos[2], CoarsePos::Neg);
        assert_eq!(got[1].arcs.last().unwrap().relation, Relation::Other);
        assert!(parse_conllu("", "t").unwrap().is_empty());
    }

    #[test]
    fn column_count_error_has_line() {
        let bad = "1\tGreat\tgreat\tADJ\n";
        assert!(matches!(parse_conllu(bad, "t").unwrap_err(), Error::Parse { line: 1, .. }));
    }

    #[test]
    fn groups_by_newdoc() {
        let text = format!("# newdoc id = a\n{SAMPLE}\n# newdoc id = b\n1\tpay\tpay\tNOUN\t_\t_\t0\troot\t_\t_\n");
        let docs = parse_conllu_documents(&text, "t").unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].0, "a");
        assert_eq!(docs[0].1.len(), 2);
        assert_eq!(docs[1].1[0].tokens, s(&["pay"]));
        assert!(parse_conllu_documents(SAMPLE, "t").is_err());
        let back = parse_conllu_documents(&write_conllu_documents(docs.iter().map(|(i, s)| (i.as_str(), s.as_slice()))), "t").unwrap();
        assert_eq!(back, docs);
    }

    #[test]
    fn skips_multiword_ranges() {
        let text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n1\tdo\tdo\tAUX\t_\t_\t0\troot\t_\t_\n2\tn't\tnot\tPART\t_\t_\t1\tadvmod\t_\t_\n";
        let got = parse_conllu(text, "t").unwrap();
        assert_eq!(got[0].tokens, s(&["do", "n't"]));
        assert_eq!(got[0].pos[1], CoarsePos::Neg);
    }

    #[test]
    fn heuristic_rules() {
        use CoarsePos::*;
        let p = heuristic_parse(&s(&["great", "salary"]), &[Adj, Noun]).unwrap();
        assert_eq!(p.arcs, vec![DepArc { relation: Relation::Amod, head: 1, dependent: 0 }]);
        let p = heuristic_parse(&s(&["very", "political"]), &[Adv, Adj]).unwrap();
        assert_eq!(p.arcs, vec![DepArc { relation: Relation::Advmod, head: 1, dependent: 0 }]);
        let p = heuristic_parse(&s(&["salary"]), &[Noun]).unwrap();
        assert!(p.arcs.is_empty());
        let p = heuristic_parse(&s(&["the", "perks", "are", "a", "joke"]), &[Other, Noun, Verb, Other, Noun]).unwrap();
        assert_eq!(p.arcs, vec![DepArc { relation: Relation::Nsubj, head: 4, dependent: 1 }]);
        assert!(heuristic_parse(&s(&["a"]), &[]).is_err());
    }

    #[test]
    fn modifiers_both_directions() {
        let tagger = Tagger::default();
        let toks = s(&["Great", "opportunities", "for", "career", "growth", "."]);
        let p = heuristic_parse(&toks, &tagger.tag(&toks)).unwrap();
        assert_eq!(modifiers_of(&p, 1), vec![0]);

        let toks = s(&["perks", "of", "business", "traveling"]);
        let p = ParsedSentence::new(
            toks,
            vec![CoarsePos::Noun, CoarsePos::Other, CoarsePos::Noun, CoarsePos::Verb],
            vec![DepArc { relation: Relation::Nsubj, head: 3, dependent: 0 }],
        )
        .unwrap();
        assert_eq!(modifiers_of(&p, 0), vec![3]);
        assert!(modifiers_of(&p, 2).is_empty());
    }

    #[test]
    fn tagger_basics() {
        let t = Tagger::default();
        assert_eq!(t.tag_word("Very"), CoarsePos::Adv);
        assert_eq!(t.tag_word("competitive"), CoarsePos::Adj);
        assert_eq!(t.tag_word("salary"), CoarsePos::Noun);
        assert_eq!(t.tag_word("isn't"), CoarsePos::Neg);
        assert_eq!(t.tag_word(":)"), CoarsePos::Other);
        assert_eq!(t.tag_word("is"), CoarsePos::Verb);
    }

    fn pos_strategy() -> impl Strategy<Value = CoarsePos> {
        prop_oneof![
            Just(CoarsePos::Adj),
            Just(CoarsePos::Adv),
            Just(CoarsePos::Noun),
            Just(CoarsePos::Verb),
            Just(CoarsePos::Neg),
            Just(CoarsePos::Other),
        ]
    }

    proptest! {
        #[test]
        fn heuristic_arcs_in_bounds_and_roundtrip(
            sent in prop::collection::vec(prop::collection::vec(("(is|was|salary|good|very|not|x[a-z]{0,4})", pos_strategy()), 1..12), 0..4)
        ) {
            let parsed: Vec<ParsedSentence> = sent
                .iter()
                .map(|ws| {
                    let toks: Vec<String> = ws.iter().map(|(w, _)| w.clone()).collect();
                    let pos: Vec<CoarsePos> = ws.iter().map(|(_, p)| *p).collect();
                    heuristic_parse(&toks, &pos).unwrap()
                })
                .collect();
            for p in &parsed {
                for a in &p.arcs {
                    prop_assert!(a.head < p.tokens.len() && a.dependent < p.tokens.len());
                    prop_assert_ne!(a.head, a.dependent);
                }
            }
            let back = parse_conllu(&write_conllu(&parsed), "rt").unwrap();
            prop_assert_eq!(back, parsed);
        }
    }
}
