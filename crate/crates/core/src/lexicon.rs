//! Merged sentiment dictionary.
//!
//! Two sources feed the dictionary: a primary source (SentiWordNet-style
//! signed scores) and a secondary one (SenticNet-style). Both are plain
//! `term<TAB>polarity` files. Entries whose absolute polarity falls below the
//! threshold are dropped, and a term present in both sources keeps the
//! primary value.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    Primary,
    Secondary,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Primary => "primary",
            Source::Secondary => "secondary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub term: String,
    pub polarity: f64,
    pub source: Source,
}

/// Immutable term → polarity map produced by [`merge`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
    threshold: f64,
}

impl Lexicon {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<&LexiconEntry> {
        if term.chars().any(char::is_uppercase) {
            self.entries.get(&term.to_lowercase())
        } else {
            self.entries.get(term)
        }
    }

    /// Case-insensitive exact-term lookup.
    pub fn lookup(&self, term: &str) -> Option<f64> {
        self.get(term).map(|e| e.polarity)
    }

    /// Entries in term order.
    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    /// Writes `term<TAB>polarity<TAB>source` rows sorted by term.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in self.entries.values() {
            writeln!(out, "{}\t{}\t{}", e.term, e.polarity, e.source.as_str())?;
        }
        Ok(())
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).map_err(|e| Error::io(path, e))?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    /// Reads a merged lexicon previously written by [`Lexicon::save_tsv`].
    pub fn load_merged(path: &Path, threshold: f64) -> Result<Lexicon> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ctx = path.display().to_string();
        let mut primary = Vec::new();
        let mut secondary = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(&ctx, i + 1, "expected term<TAB>polarity<TAB>source"));
            }
            let (term, polarity) = parse_pair(cols[0], cols[1], &ctx, i + 1)?;
            let source = match cols[2].trim() {
                "primary" => Source::Primary,
                "secondary" => Source::Secondary,
                other => return Err(Error::parse(&ctx, i + 1, format!("unknown source `{other}`"))),
            };
            let e = LexiconEntry { term, polarity, source };
            match source {
                Source::Primary => primary.push(e),
                Source::Secondary => secondary.push(e),
            }
        }
        Ok(merge_entries(primary, secondary, threshold))
    }
}

fn parse_pair(term: &str, polarity: &str, ctx: &str, line: usize) -> Result<(String, f64)> {
    let term = term.trim();
    if term.is_empty() {
        return Err(Error::parse(ctx, line, "empty term"));
    }
    if term.chars().any(char::is_whitespace) {
        return Err(Error::parse(ctx, line, format!("term `{term}` contains whitespace")));
    }
    let p: f64 = polarity
        .trim()
        .parse()
        .map_err(|_| Error::parse(ctx, line, format!("invalid polarity `{}`", polarity.trim())))?;
    if !p.is_finite() || !(-1.0..=1.0).contains(&p) {
        return Err(Error::parse(ctx, line, format!("polarity {p} outside [-1, 1]")));
    }
    Ok((term.to_lowercase(), p))
}

/// Parses `term<TAB>polarity` rows. Blank lines and `#` comments are skipped.
pub fn parse_source(text: &str, source: Source, context: &str) -> Result<Vec<LexiconEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(term), Some(pol), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::parse(context, i + 1, "expected term<TAB>polarity"));
        };
        let (term, polarity) = parse_pair(term, pol, context, i + 1)?;
        out.push(LexiconEntry { term, polarity, source });
    }
    Ok(out)
}

pub fn load_source(path: &Path, source: Source) -> Result<Vec<LexiconEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_source(&text, source, &path.display().to_string())
}

/// Merges two sources. Entries with `|polarity| < threshold` are dropped; a
/// term present in both sources keeps the primary pair. Within one source a
/// repeated term keeps its first row.
pub fn merge(primary: &[LexiconEntry], secondary: &[LexiconEntry], threshold: f64) -> Lexicon {
    merge_entries(primary.to_vec(), secondary.to_vec(), threshold)
}

fn merge_entries(primary: Vec<LexiconEntry>, secondary: Vec<LexiconEntry>, threshold: f64) -> Lexicon {
    let threshold = threshold.max(0.0);
    let mut entries = BTreeMap::new();
    for e in primary.into_iter().chain(secondary) {
        if e.polarity.abs() < threshold {
            continue;
        }
        entries.entry(e.term.clone()).or_insert(e);
    }
    Lexicon { entries, threshold }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(term: &str, polarity: f64, source: Source) -> LexiconEntry {
        LexiconEntry { term: term.into(), polarity, source }
    }

    #[test]
    fn parses_and_lowercases() {
        let got = parse_source("good\t0.7\nBAD\t-0.8\n", Source::Primary, "t").unwrap();
        assert_eq!(got, vec![entry("good", 0.7, Source::Primary), entry("bad", -0.8, Source::Primary)]);
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let got = parse_source("# header\n\n:)\t0.6\n", Source::Secondary, "t").unwrap();
        assert_eq!(got, vec![entry(":)", 0.6, Source::Secondary)]);
    }

    #[test]
    fn malformed_polarity_names_line() {
        let err = parse_source("oops\tNaNish\n", Source::Primary, "t").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_source("a\t0.1\nb 0.2\n", Source::Primary, "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_source("x\t1.5\n", Source::Primary, "t").is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_source(Path::new("/nonexistent/lex.tsv"), Source::Primary).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn primary_wins_conflicts() {
        let lex = merge(
            &[entry("good", 0.7, Source::Primary)],
            &[entry("good", 0.9, Source::Secondary)],
            0.25,
        );
        assert_eq!(lex.get("good").unwrap(), &entry("good", 0.7, Source::Primary));
    }

    #[test]
    fn threshold_is_absolute_and_inclusive() {
        let lex = merge(&[entry("ok", 0.10, Source::Primary), entry("edge", -0.25, Source::Primary)], &[], 0.25);
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.lookup("edge"), Some(-0.25));
    }

    #[test]
    fn secondary_passthrough() {
        let lex = merge(&[], &[entry("nasty", -0.8, Source::Secondary)], 0.25);
        assert_eq!(lex.get("nasty").unwrap().source, Source::Secondary);
    }

    #[test]
    fn below_threshold_primary_does_not_shadow_secondary() {
        let lex = merge(
            &[entry("fine", 0.1, Source::Primary)],
            &[entry("fine", 0.5, Source::Secondary)],
            0.25,
        );
        assert_eq!(lex.get("fine").unwrap().source, Source::Secondary);
    }

    #[test]
    fn lookup_is_case_insensitive() {
        let lex = merge(&[entry("great", 0.8, Source::Primary)], &[], 0.25);
        assert_eq!(lex.lookup("great"), Some(0.8));
        assert_eq!(lex.lookup("Great"), Some(0.8));
        assert_eq!(lex.lookup("terrible"), None);
    }

    #[test]
    fn tsv_round_trip() {
        let lex = merge(
            &[entry("good", 0.7, Source::Primary)],
            &[entry("bad", -0.3, Source::Secondary)],
            0.25,
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lex.tsv");
        lex.save_tsv(&p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "bad\t-0.3\tsecondary\ngood\t0.7\tprimary\n");
        assert_eq!(Lexicon::load_merged(&p, 0.25).unwrap(), lex);
    }
}
