//! Company aspect-sentiment embeddings and the reports built on them.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::aspects::AspectCatalog;
use crate::error::{Error, Result};

/// Formats a real with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompanyEmbedding {
    pub company: String,
    pub sector: String,
    /// Mean score per aspect, in catalog order; 0.0 where support is 0.
    pub vector: Vec<f64>,
    pub support: Vec<usize>,
}

/// Averages mention scores per (company, aspect).
///
/// `scores` yields `(doc_id, aspect, score)`; `company_of` maps every document
/// to its `(company, sector)`. Every company in `company_of` gets an
/// embedding, even without scored mentions. Output is sorted by company.
pub fn build_embeddings<'a>(
    scores: impl IntoIterator<Item = (&'a str, &'a str, f64)>,
    company_of: &HashMap<String, (String, String)>,
    catalog: &AspectCatalog,
) -> Result<Vec<CompanyEmbedding>> {
    let dims = catalog.len();
    let mut acc: BTreeMap<&str, (&str, Vec<f64>, Vec<usize>)> = company_of
        .values()
        .map(|(c, s)| (c.as_str(), (s.as_str(), vec![0.0; dims], vec![0; dims])))
        .collect();
    for (doc, aspect, score) in scores {
        let (company, _) = company_of
            .get(doc)
            .ok_or_else(|| Error::Schema(format!("no company for document `{doc}`")))?;
        let dim = catalog.index_of(aspect).ok_or_else(|| Error::UnknownAspect(aspect.to_string()))?;
        let entry = acc.get_mut(company.as_str()).expect("company registered");
        entry.1[dim] += score;
        entry.2[dim] += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(company, (sector, sums, support))| CompanyEmbedding {
            company: company.to_string(),
            sector: sector.to_string(),
            vector: sums
                .iter()
                .zip(&support)
                .map(|(&s, &n)| if n == 0 { 0.0 } else { s / n as f64 })
                .collect(),
            support,
        })
        .collect())
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| (x / na) * (y / nb)).sum();
    Ok(dot)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Best,
    Worst,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Best => "best",
            Direction::Worst => "worst",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCompany {
    pub company: String,
    pub sector: String,
    pub score: f64,
    pub support: usize,
}

/// Companies ordered by one aspect; ties go to the lexicographically smaller
/// company name.
pub fn rank_by_aspect(
    embeddings: &[CompanyEmbedding],
    catalog: &AspectCatalog,
    aspect: &str,
    sector: Option<&str>,
    top_k: usize,
    direction: Direction,
) -> Result<Vec<RankedCompany>> {
    let dim = catalog.index_of(aspect).ok_or_else(|| Error::UnknownAspect(aspect.to_string()))?;
    let mut rows: Vec<RankedCompany> = embeddings
        .iter()
        .filter(|e| sector.is_none_or(|s| e.sector == s))
        .map(|e| RankedCompany {
            company: e.company.clone(),
            sector: e.sector.clone(),
            score: e.vector[dim],
            support: e.support[dim],
        })
        .collect();
    rows.sort_by(|a, b| {
        let ord = a.score.total_cmp(&b.score);
        let ord = if direction == Direction::Best { ord.reverse() } else { ord };
        ord.then_with(|| a.company.cmp(&b.company))
    });
    rows.truncate(top_k);
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRow {
    pub company1: String,
    pub company2: String,
    pub cosine: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub rows: Vec<SimilarityRow>,
    /// Companies left out because their embedding is all zeros.
    pub warnings: Vec<String>,
}

/// Cosine similarity for every unordered pair of companies, or for the listed
/// pairs only.
pub fn similarity_report(embeddings: &[CompanyEmbedding], pairs: Option<&[(String, String)]>) -> Result<SimilarityReport> {
    if embeddings.len() < 2 {
        return Err(Error::InvalidArgument("similarity needs at least two companies".into()));
    }
    let by_name: HashMap<&str, &CompanyEmbedding> = embeddings.iter().map(|e| (e.company.as_str(), e)).collect();
    let is_zero = |e: &CompanyEmbedding| e.vector.iter().all(|&v| v == 0.0);
    let mut report = SimilarityReport::default();
    for e in embeddings.iter().filter(|e| is_zero(e)) {
        report.warnings.push(format!("{}: zero embedding, similarity undefined", e.company));
    }
    let candidates: Vec<(&CompanyEmbedding, &CompanyEmbedding)> = match pairs {
        Some(list) => list
            .iter()
            .map(|(a, b)| {
                let get = |n: &str| by_name.get(n).copied().ok_or_else(|| Error::InvalidArgument(format!("unknown company `{n}`")));
                Ok((get(a)?, get(b)?))
            })
            .collect::<Result<_>>()?,
        None => embeddings
            .iter()
            .enumerate()
            .flat_map(|(i, a)| embeddings[i + 1..].iter().map(move |b| (a, b)))
            .collect(),
    };
    for (a, b) in candidates {
        if is_zero(a) || is_zero(b) {
            continue;
        }
        report.rows.push(SimilarityRow {
            company1: a.company.clone(),
            company2: b.company.clone(),
            cosine: cosine(&a.vector, &b.vector)?,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub companies: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    /// Unit principal axes, each with its largest-magnitude entry positive.
    pub axes: [Vec<f64>; 2],
    pub eigenvalues: [f64; 2],
    pub total_variance: f64,
}

impl Projection {
    pub fn captured_variance(&self) -> f64 {
        (self.eigenvalues[0] + self.eigenvalues[1]) / self.total_variance
    }
}

const POWER_MAX_ITERS: usize = 200_000;
const POWER_TOL: f64 = 1e-14;

fn matvec(m: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum()).collect()
}

fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for b in basis {
        let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        for (x, y) in v.iter_mut().zip(b) {
            *x -= d * y;
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Leading eigenpairs of a symmetric positive semi-definite `n × n` matrix
/// by power iteration with deflation.
pub fn top_eigenpairs(matrix: &[f64], n: usize, count: usize) -> Vec<(f64, Vec<f64>)> {
    let mut m = matrix.to_vec();
    let scale = (0..n).map(|i| matrix[i * n + i]).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut found: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
    for k in 0..count.min(n) {
        let basis: Vec<Vec<f64>> = found.iter().map(|(_, v)| v.clone()).collect();
        // Fixed, generic start vector.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7 + k * 13) % 11) as f64 / 11.0).collect();
        if orthonormalize(&mut v, &basis) == 0.0 {
            v = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
            orthonormalize(&mut v, &basis);
        }
        for _ in 0..POWER_MAX_ITERS {
            let mut w = matvec(&m, n, &v);
            let norm = orthonormalize(&mut w, &basis);
            if norm <= scale * 1e-15 {
                break;
            }
            let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = w;
            if delta < POWER_TOL {
                break;
            }
        }
        let mv = matvec(&m, n, &v);
        let lambda = v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>().max(0.0);
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] -= lambda * v[i] * v[j];
            }
        }
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        found.push((lambda, v));
    }
    found
}

/// Principal-component projection of the embeddings onto two axes.
pub fn project_2d(embeddings: &[CompanyEmbedding]) -> Result<Projection> {
    let n = embeddings.len();
    if n < 2 {
        return Err(Error::InvalidArgument("projection needs at least two companies".into()));
    }
    let d = embeddings[0].vector.len();
    if d < 2 || embeddings.iter().any(|e| e.vector.len() != d) {
        return Err(Error::Shape("embeddings must share a dimension ≥ 2".into()));
    }
    let mean: Vec<f64> = (0..d)
        .map(|j| embeddings.iter().map(|e| e.vector[j]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = embeddings
        .iter()
        .map(|e| e.vector.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    if centered.iter().flatten().all(|&v| v == 0.0) {
        return Err(Error::ZeroVariance);
    }
    let mut cov = vec![0.0; d * d];
    for row in &centered {
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] += row[i] * row[j];
            }
        }
    }
    cov.iter_mut().for_each(|c| *c /= (n - 1) as f64);
    let total_variance: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    let pairs = top_eigenpairs(&cov, d, 2);
    let coords = centered
        .iter()
        .map(|row| {
            let p = |axis: &[f64]| row.iter().zip(axis).map(|(a, b)| a * b).sum::<f64>();
            [p(&pairs[0].1), p(&pairs[1].1)]
        })
        .collect();
    Ok(Projection {
        companies: embeddings.iter().map(|e| e.company.clone()).collect(),
        coords,
        eigenvalues: [pairs[0].0, pairs[1].0],
        axes: [pairs[0].1.clone(), pairs[1].1.clone()],
        total_variance,
    })
}

pub fn embeddings_tsv(embeddings: &[CompanyEmbedding], catalog: &AspectCatalog) -> String {
    let mut out = String::from("company\tsector");
    for name in catalog.names() {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for e in embeddings {
        out.push_str(&e.company);
        out.push('\t');
        out.push_str(&e.sector);
        for v in &e.vector {
            out.push('\t');
            out.push_str(&fmt_real(*v));
        }
        out.push('\n');
    }
    out
}

pub fn support_tsv(embeddings: &[CompanyEmbedding], catalog: &AspectCatalog) -> String {
    let mut out = String::from("company\tsector");
    for name in catalog.names() {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for e in embeddings {
        let _ = write!(out, "{}\t{}", e.company, e.sector);
        for s in &e.support {
            let _ = write!(out, "\t{s}");
        }
        out.push('\n');
    }
    out
}

/// Parses an embedding table; the header must list the catalog's aspects in
/// order. `support` (same layout, integer cells) is optional.
pub fn parse_embeddings_tsv(text: &str, support: Option<&str>, catalog: &AspectCatalog) -> Result<Vec<CompanyEmbedding>> {
    let expected: Vec<&str> = ["company", "sector"].into_iter().chain(catalog.names()).collect();
    let table = |text: &str, what: &str| -> Result<Vec<Vec<String>>> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split('\t').collect();
        if header != expected {
            return Err(Error::Schema(format!("{what} header does not match the catalog")));
        }
        Ok(lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split('\t').map(String::from).collect())
            .collect())
    };
    let rows = table(text, "embedding")?;
    let support_rows = support.map(|s| table(s, "support")).transpose()?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != expected.len() {
            return Err(Error::parse("embeddings", i + 2, "wrong column count"));
        }
        let vector = row[2..]
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| Error::parse("embeddings", i + 2, format!("bad value `{c}`"))))
            .collect::<Result<Vec<_>>>()?;
        let support = match &support_rows {
            Some(s) => {
                let srow = s
                    .iter()
                    .find(|r| r.first() == row.first())
                    .ok_or_else(|| Error::Schema(format!("no support row for `{}`", row[0])))?;
                srow[2..]
                    .iter()
                    .map(|c| c.parse::<usize>().map_err(|_| Error::Schema(format!("bad support `{c}`"))))
                    .collect::<Result<Vec<_>>>()?
            }
            None => vec![0; vector.len()],
        };
        out.push(CompanyEmbedding { company: row[0].clone(), sector: row[1].clone(), vector, support });
    }
    Ok(out)
}

pub fn similarity_tsv(report: &SimilarityReport) -> String {
    let mut out = String::from("company1\tcompany2\tcosine\n");
    for r in &report.rows {
        let _ = writeln!(out, "{}\t{}\t{}", r.company1, r.company2, fmt_real(r.cosine));
    }
    for w in &report.warnings {
        let _ = writeln!(out, "# warning: {w}");
    }
    out
}

pub const RANKINGS_HEADER: &str = "aspect\tdirection\trank\tcompany\tsector\tscore\tsupport\n";

/// Appends one ranking block; start the table with [`RANKINGS_HEADER`].
pub fn push_rankings(out: &mut String, aspect: &str, direction: Direction, rows: &[RankedCompany]) {
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{aspect}\t{}\t{}\t{}\t{}\t{}\t{}",
            direction.as_str(),
            i + 1,
            r.company,
            r.sector,
            fmt_real(r.score),
            r.support
        );
    }
}

pub fn projection_tsv(p: &Projection) -> String {
    let mut out = String::from("company\tx\ty\n");
    for (c, xy) in p.companies.iter().zip(&p.coords) {
        let _ = writeln!(out, "{c}\t{}\t{}", fmt_real(xy[0]), fmt_real(xy[1]));
    }
    let _ = writeln!(out, "# captured_variance={}", fmt_real(p.captured_variance()));
    out
}

/// Mention counts per aspect in catalog order.
pub fn frequency_tsv(counts: &[(String, usize)]) -> String {
    let mut out = String::from("aspect\tmentions\n");
    for (a, n) in counts {
        let _ = writeln!(out, "{a}\t{n}");
    }
    out
}

/// Per-aspect mention totals recovered from the support counts.
pub fn aspect_frequency(embeddings: &[CompanyEmbedding], catalog: &AspectCatalog) -> Vec<(String, usize)> {
    catalog
        .names()
        .enumerate()
        .map(|(i, n)| (n.to_string(), embeddings.iter().map(|e| e.support[i]).sum()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aspects::Aspect;
    use approx::assert_abs_diff_eq;

    fn small_catalog() -> AspectCatalog {
        AspectCatalog::new(
            ["Salary", "Location", "Culture"]
                .iter()
                .map(|n| Aspect { name: n.to_string(), terms: vec![n.to_lowercase()], modifiers: vec![] })
                .collect(),
        )
        .unwrap()
    }

    fn emb(company: &str, vector: Vec<f64>) -> CompanyEmbedding {
        let support = vec![1; vector.len()];
        CompanyEmbedding { company: company.into(), sector: "tech".into(), vector, support }
    }

    #[test]
    fn embeddings_are_means_with_zero_fill() {
        let cat = small_catalog();
        let company_of: HashMap<String, (String, String)> = [
            ("d1".to_string(), ("Acme".to_string(), "tech".to_string())),
            ("d2".to_string(), ("Acme".to_string(), "tech".to_string())),
        ]
        .into();
        let scores = [("d1", "Salary", 0.5), ("d1", "Salary", -0.1), ("d2", "Salary", 0.2)];
        let e = build_embeddings(scores, &company_of, &cat).unwrap();
        assert_eq!(e.len(), 1);
        assert_abs_diff_eq!(e[0].vector[0], 0.2, epsilon = 1e-15);
        assert_eq!(e[0].support, vec![3, 0, 0]);
        assert_eq!(e[0].vector[1], 0.0);
        assert!(matches!(
            build_embeddings([("d1", "Nope", 0.1)], &company_of, &cat),
            Err(Error::UnknownAspect(_))
        ));
        assert!(build_embeddings([("zz", "Salary", 0.1)], &company_of, &cat).is_err());
    }

    #[test]
    fn cosine_cases() {
        let v = [0.3, -0.2, 0.9];
        assert_abs_diff_eq!(cosine(&v, &v).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let mut a = vec![0.0; 30];
        let mut b = vec![0.0; 30];
        a[0] = 1.0;
        a[1] = 1.0;
        b[0] = 1.0;
        assert_abs_diff_eq!(cosine(&a, &b).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn ranking_order_and_ties() {
        let cat = small_catalog();
        let e = vec![emb("A", vec![0.9, 0.0, 0.0]), emb("B", vec![0.1, 0.0, 0.0]), emb("C", vec![-0.5, 0.0, 0.0])];
        let names = |r: Vec<RankedCompany>| r.into_iter().map(|x| x.company).collect::<Vec<_>>();
        assert_eq!(names(rank_by_aspect(&e, &cat, "Salary", None, 3, Direction::Best).unwrap()), ["A", "B", "C"]);
        assert_eq!(names(rank_by_aspect(&e, &cat, "Salary", None, 3, Direction::Worst).unwrap()), ["C", "B", "A"]);
        assert_eq!(names(rank_by_aspect(&e, &cat, "Salary", None, 1, Direction::Best).unwrap()), ["A"]);
        let tie = vec![emb("Zeta", vec![0.5, 0.0, 0.0]), emb("Acme", vec![0.5, 0.0, 0.0])];
        assert_eq!(names(rank_by_aspect(&tie, &cat, "Salary", None, 2, Direction::Best).unwrap()), ["Acme", "Zeta"]);
        assert!(matches!(
            rank_by_aspect(&e, &cat, "Stress", None, 3, Direction::Best),
            Err(Error::UnknownAspect(_))
        ));
        let mut other = emb("D", vec![1.0, 0.0, 0.0]);
        other.sector = "finance".into();
        let mixed = vec![e[0].clone(), other];
        assert_eq!(names(rank_by_aspect(&mixed, &cat, "Salary", Some("finance"), 5, Direction::Best).unwrap()), ["D"]);
    }

    #[test]
    fn similarity_pairs_and_warnings() {
        let e = vec![
            emb("A", vec![1.0, 0.0, 0.0]),
            emb("B", vec![1.0, 0.0, 0.0]),
            emb("C", vec![0.0, 1.0, 0.0]),
            emb("Z", vec![0.0, 0.0, 0.0]),
        ];
        let r = similarity_report(&e[..3], None).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[0].cosine, 1.0);
        let r = similarity_report(&e, None).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.warnings.len(), 1);
        let r = similarity_report(&e, Some(&[("C".into(), "A".into())])).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(similarity_report(&e, Some(&[("C".into(), "Q".into())])).is_err());
        assert!(similarity_report(&e[..1], None).is_err());
    }

    #[test]
    fn projection_basics() {
        let e = vec![emb("A", vec![1.0, 2.0, 0.0]), emb("B", vec![2.0, 4.0, 0.0]), emb("C", vec![3.0, 6.0, 0.0])];
        let p = project_2d(&e).unwrap();
        let spread = p.coords.iter().map(|c| c[0].abs()).fold(0.0, f64::max);
        assert!(p.coords.iter().all(|c| c[1].abs() <= 1e-8 * spread));
        let mx: f64 = p.coords.iter().map(|c| c[0]).sum::<f64>() / 3.0;
        assert!(mx.abs() < 1e-12);
        assert!((p.captured_variance() - 1.0).abs() < 1e-12);
        let same = vec![emb("A", vec![1.0, 1.0]), emb("B", vec![1.0, 1.0])];
        assert!(matches!(project_2d(&same), Err(Error::ZeroVariance)));
    }

    #[test]
    fn tsv_round_trip() {
        let cat = small_catalog();
        let e = vec![emb("A", vec![0.1, -0.2, 1.0 / 3.0]), emb("B", vec![0.0, 0.5, -0.75])];
        let text = embeddings_tsv(&e, &cat);
        assert!(text.starts_with("company\tsector\tSalary\tLocation\tCulture\n"));
        let back = parse_embeddings_tsv(&text, Some(&support_tsv(&e, &cat)), &cat).unwrap();
        assert_eq!(back, e);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec30() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-1.0f64..1.0, 30).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-6))
        }

        proptest! {
            #[test]
            fn cosine_symmetric_bounded_scale_free(a in vec30(), b in vec30(), alpha in 1e-3f64..1e3) {
                let ab = cosine(&a, &b).unwrap();
                prop_assert!((ab - cosine(&b, &a).unwrap()).abs() <= 1e-12);
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&ab));
                let scaled: Vec<f64> = a.iter().map(|x| alpha * x).collect();
                prop_assert!((cosine(&scaled, &b).unwrap() - ab).abs() <= 1e-12);
            }

            #[test]
            fn best_reversed_is_worst(scores in prop::collection::hash_set(-1000i32..1000, 1..20)) {
                let cat = small_catalog();
                let e: Vec<CompanyEmbedding> = scores
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| emb(&format!("c{i}"), vec![s as f64 / 1000.0, 0.0, 0.0]))
                    .collect();
                let best = rank_by_aspect(&e, &cat, "Salary", None, e.len(), Direction::Best).unwrap();
                let mut worst = rank_by_aspect(&e, &cat, "Salary", None, e.len(), Direction::Worst).unwrap();
                worst.reverse();
                prop_assert_eq!(best, worst);
            }

            #[test]
            fn support_times_mean_is_sum(raw in prop::collection::vec((0usize..3, 0usize..3, -1.0f64..1.0), 0..200)) {
                let cat = small_catalog();
                let company_of: HashMap<String, (String, String)> = (0..3)
                    .map(|d| (format!("d{d}"), (format!("c{}", d % 2), "s".to_string())))
                    .collect();
                let ids: Vec<String> = raw.iter().map(|(d, _, _)| format!("d{d}")).collect();
                let names: Vec<&str> = cat.names().collect();
                let scores = raw.iter().zip(&ids).map(|((_, a, s), id)| (id.as_str(), names[*a], *s));
                let e = build_embeddings(scores, &company_of, &cat).unwrap();
                for emb in &e {
                    for (dim, name) in names.iter().enumerate() {
                        let sum: f64 = raw
                            .iter()
                            .zip(&ids)
                            .filter(|((_, a, _), id)| *a == dim && company_of[id.as_str()].0 == emb.company && names[*a] == *name)
                            .map(|((_, _, s), _)| s)
                            .sum();
                        let n = emb.support[dim];
                        prop_assert!((emb.vector[dim] * n as f64 - sum).abs() <= 1e-12 * n.max(1) as f64);
                    }
                }
            }
        }
    }
}
