//! Command-line front end. Every subcommand writes a
//! `<subcommand>.manifest.json` into its output directory before any of its
//! outputs; the manifest records the full configuration, the seed and the
//! SHA-256 of every input file.

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::aspects::{load_catalog, AspectCatalog};
use crate::cascade::{score_corpus, CascadeContext, ParseSource, Tier};
use crate::corpus::{build_docs, ingest, read_docs, write_docs, write_reviews, Preprocessor};
use crate::docvec::{build_vocab, train, DocvecModel};
use crate::elm::{Activation, ElmModel};
use crate::error::{Error, Result};
use crate::eval::{kfold_compare, BaselineConfig, Comparison};
use crate::lexicon::{load_source, merge, Lexicon, Source, DEFAULT_THRESHOLD};
use crate::pipeline::{
    embeddings_from_records, fit_elm, labeled_vectors, parse_scores_tsv, scores_tsv, stage, stage_seed, tier_report,
    PipelineConfig,
};
use crate::profile::{
    aspect_frequency, embeddings_tsv, frequency_tsv, parse_embeddings_tsv, project_2d, projection_tsv, push_rankings,
    rank_by_aspect, similarity_report, similarity_tsv, support_tsv, Direction, RANKINGS_HEADER,
};
use crate::synth::{source_tsv, synth_corpus, SynthConfig};
use crate::syntax::{read_conllu_documents, Tagger};

#[derive(Debug, Parser)]
#[command(name = "aspect-sentiment", version, about = "Aspect-level sentiment analysis of employee reviews")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Merge two sentiment lexicons.
    BuildLexicon(BuildLexicon),
    /// Split reviews into labeled pros/cons sub-reviews and tokenize them.
    Ingest(Ingest),
    /// Generate a synthetic review corpus with matching lexicons.
    Synth(Synth),
    /// Train paragraph vectors.
    TrainDocvec(TrainDocvec),
    /// Fit the review-level sentiment classifier.
    TrainElm(TrainElm),
    /// Score every aspect mention.
    Score(Score),
    /// Average mention scores into company embeddings.
    Profile(Profile),
    /// Similarity, ranking, aspect-frequency and projection tables.
    Report(Report),
    /// k-fold comparison of the classifier against a linear SVM baseline.
    Eval(Eval),
}

#[derive(Debug, Args, Serialize)]
struct BuildLexicon {
    #[arg(long)]
    primary: PathBuf,
    #[arg(long)]
    secondary: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct Ingest {
    /// Line-delimited JSON review records.
    #[arg(long)]
    reviews: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct Synth {
    #[arg(long, default_value_t = 4)]
    companies: usize,
    /// Reviews per company.
    #[arg(long, default_value_t = 50)]
    per: usize,
    #[arg(long, value_delimiter = ',', default_value = "tech,finance")]
    sectors: Vec<String>,
    /// Fraction of single-word aspect terms given a lexicon entry.
    #[arg(long, default_value_t = 1.0)]
    coverage: f64,
    #[arg(long, default_value_t = 0.1)]
    negation_rate: f64,
    #[arg(long, default_value_t = 0.2)]
    bare_rate: f64,
    /// Do not give the first two companies a shared profile.
    #[arg(long)]
    no_twins: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct TrainDocvec {
    #[arg(long)]
    docs: PathBuf,
    #[arg(long, default_value_t = 50)]
    dims: usize,
    #[arg(long, default_value_t = 40)]
    epochs: usize,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum ActivationArg {
    Sigmoid,
    Tanh,
}

impl From<ActivationArg> for Activation {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Sigmoid => Activation::Sigmoid,
            ActivationArg::Tanh => Activation::Tanh,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct ElmArgs {
    #[arg(long, default_value_t = 100)]
    hidden: usize,
    #[arg(long, default_value_t = 1e-3)]
    ridge: f64,
    #[arg(long, value_enum, default_value_t = ActivationArg::Sigmoid)]
    activation: ActivationArg,
}

#[derive(Debug, Args, Serialize)]
struct TrainElm {
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    docvec: PathBuf,
    #[command(flatten)]
    elm: ElmArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct Score {
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    docvec: PathBuf,
    #[arg(long)]
    elm: PathBuf,
    /// Merged lexicon written by `build-lexicon`.
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Aspect catalog (TOML); the bundled 30-aspect catalog by default.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Dependency parses in CONLL-U, one `# newdoc id` per sub-review.
    /// Without it the built-in heuristic parser is used.
    #[arg(long)]
    conllu: Option<PathBuf>,
    #[arg(long, default_value_t = crate::cascade::DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, default_value_t = crate::cascade::DEFAULT_INFER_STEPS)]
    infer_steps: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct Profile {
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct Report {
    #[arg(long)]
    embeddings: PathBuf,
    /// Support table; defaults to `support.tsv` next to the embeddings.
    #[arg(long)]
    support: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Emit the similarity table. Without any table flag, all are emitted.
    #[arg(long)]
    similarity: bool,
    /// Two-column TSV of company pairs to restrict the similarity table to.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    rankings: bool,
    #[arg(long)]
    frequency: bool,
    #[arg(long)]
    projection: bool,
    /// Aspects to rank; all catalog aspects by default.
    #[arg(long, value_delimiter = ',')]
    aspects: Vec<String>,
    #[arg(long)]
    sector: Option<String>,
    #[arg(long, default_value_t = 5)]
    top_k: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct Eval {
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    docvec: PathBuf,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[command(flatten)]
    elm: ElmArgs,
    /// Baseline epochs.
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    /// Baseline L2 weight.
    #[arg(long, default_value_t = 1e-4)]
    reg: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a C,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    created_unix: u64,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Output directory of one subcommand invocation.
struct Run<'a> {
    dir: &'a Path,
}

impl<'a> Run<'a> {
    /// Creates the directory and writes the manifest naming `outputs`.
    fn start<C: Serialize>(
        command: &str,
        common: &'a Common,
        config: &C,
        inputs: &[&Path],
        outputs: &[&str],
    ) -> Result<Self> {
        let dir = common.out.as_path();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let inputs = inputs
            .iter()
            .map(|p| Ok((p.display().to_string(), sha256_file(p)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed: common.seed,
            config,
            inputs,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        };
        let path = dir.join(format!("{command}.manifest.json"));
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(Run { dir })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

fn catalog(path: &Option<PathBuf>) -> Result<AspectCatalog> {
    match path {
        Some(p) => load_catalog(p),
        None => Ok(AspectCatalog::default_catalog()),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn opt_inputs<'a>(required: &[&'a Path], optional: &[&'a Option<PathBuf>]) -> Vec<&'a Path> {
    required
        .iter()
        .copied()
        .chain(optional.iter().filter_map(|p| p.as_deref()))
        .collect()
}

fn build_lexicon(a: &BuildLexicon) -> Result<()> {
    let run = Run::start("build-lexicon", &a.common, a, &[&a.primary, &a.secondary], &["lexicon.tsv"])?;
    let primary = load_source(&a.primary, Source::Primary)?;
    let secondary = load_source(&a.secondary, Source::Secondary)?;
    let lexicon = merge(&primary, &secondary, a.threshold);
    lexicon.save_tsv(&run.path("lexicon.tsv"))?;
    println!("lexicon: {} entries", lexicon.len());
    Ok(())
}

fn run_ingest(a: &Ingest) -> Result<()> {
    let run = Run::start("ingest", &a.common, a, &[&a.reviews], &["docs.jsonl"])?;
    let reviews = ingest(&a.reviews)?;
    let docs = build_docs(&reviews, &Preprocessor::default(), stage_seed(a.common.seed, stage::INGEST));
    write_docs(&run.path("docs.jsonl"), &docs)?;
    println!("ingest: {} reviews -> {} sub-reviews", reviews.len(), docs.len());
    Ok(())
}

fn run_synth(a: &Synth) -> Result<()> {
    let outputs = ["reviews.jsonl", "primary.tsv", "secondary.tsv", "planted.json"];
    let run = Run::start("synth", &a.common, a, &[], &outputs)?;
    let config = SynthConfig {
        companies: a.companies,
        per_company: a.per,
        sectors: a.sectors.clone(),
        twins: !a.no_twins,
        aspect_coverage: a.coverage,
        negation_rate: a.negation_rate,
        bare_rate: a.bare_rate,
        ..SynthConfig::default()
    };
    let corpus = synth_corpus(&config, &AspectCatalog::default_catalog(), stage_seed(a.common.seed, stage::SYNTH))?;
    write_reviews(&run.path("reviews.jsonl"), &corpus.reviews)?;
    run.write("primary.tsv", &source_tsv(&corpus.primary))?;
    run.write("secondary.tsv", &source_tsv(&corpus.secondary))?;
    run.write("planted.json", &(serde_json::to_string_pretty(&corpus.planted)? + "\n"))?;
    println!("synth: {} reviews for {} companies", corpus.reviews.len(), a.companies);
    Ok(())
}

fn run_train_docvec(a: &TrainDocvec) -> Result<()> {
    let run = Run::start("train-docvec", &a.common, a, &[&a.docs], &["docvec.json"])?;
    let docs = read_docs(&a.docs)?;
    let config = PipelineConfig {
        dims: a.dims,
        docvec_epochs: a.epochs,
        negatives: a.negatives,
        seed: a.common.seed,
        ..PipelineConfig::default()
    };
    let vocab = build_vocab(&docs, a.min_count);
    let model = train(&docs, &vocab, config.docvec_config())?;
    model.save(&run.path("docvec.json"))?;
    let first = model.epoch_losses().first().copied().unwrap_or(f64::NAN);
    let last = model.epoch_losses().last().copied().unwrap_or(f64::NAN);
    println!("train-docvec: {} docs, {} words, loss {first:.4} -> {last:.4}", docs.len(), vocab.len());
    Ok(())
}

fn elm_pipeline_config(e: &ElmArgs, dims: usize, seed: u64) -> PipelineConfig {
    PipelineConfig {
        dims,
        hidden: e.hidden,
        ridge: e.ridge,
        activation: e.activation.into(),
        seed,
        ..PipelineConfig::default()
    }
}

fn run_train_elm(a: &TrainElm) -> Result<()> {
    let run = Run::start("train-elm", &a.common, a, &[&a.docs, &a.docvec], &["elm.json"])?;
    let docs = read_docs(&a.docs)?;
    let docvec = DocvecModel::load(&a.docvec)?;
    let config = elm_pipeline_config(&a.elm, docvec.dims(), a.common.seed);
    let model = fit_elm(&docvec, &docs, config.elm_config())?;
    model.save(&run.path("elm.json"))?;
    println!("train-elm: fitted on {} sub-reviews", docs.iter().filter(|d| d.label.is_some()).count());
    Ok(())
}

fn run_score(a: &Score) -> Result<()> {
    let inputs = opt_inputs(&[&a.docs, &a.docvec, &a.elm, &a.lexicon], &[&a.catalog, &a.conllu]);
    let run = Run::start("score", &a.common, a, &inputs, &["scores.tsv", "tiers.tsv"])?;
    let docs = read_docs(&a.docs)?;
    let docvec = DocvecModel::load(&a.docvec)?;
    let elm = ElmModel::load(&a.elm)?;
    let lexicon = Lexicon::load_merged(&a.lexicon, a.threshold)?;
    let catalog = catalog(&a.catalog)?;
    let mut ctx = CascadeContext::new(&lexicon, &elm, &docvec, stage_seed(a.common.seed, stage::SCORE));
    ctx.window = a.window;
    ctx.infer_steps = a.infer_steps;
    let tagger = Tagger::default().with_nouns(catalog.term_words());
    let parses: HashMap<String, _>;
    let source = match &a.conllu {
        Some(path) => {
            parses = read_conllu_documents(path)?.into_iter().collect();
            ParseSource::Conllu(&parses)
        }
        None => ParseSource::Heuristic(&tagger),
    };
    let scored = score_corpus(&docs, &catalog, &source, &ctx)?;
    run.write("scores.tsv", &scores_tsv(&scored))?;
    run.write("tiers.tsv", &tier_report(&scored))?;
    println!(
        "score: {} mentions; fallback ({}) rate {:.4}; aspect-word lexicon coverage {:.4}",
        scored.tiers.total(),
        Tier::ElmSemiRandom.as_str(),
        scored.tiers.fallback_rate(),
        scored.aspect_word_coverage()
    );
    Ok(())
}

fn run_profile(a: &Profile) -> Result<()> {
    let inputs = opt_inputs(&[&a.docs, &a.scores], &[&a.catalog]);
    let run = Run::start("profile", &a.common, a, &inputs, &["embeddings.tsv", "support.tsv"])?;
    let docs = read_docs(&a.docs)?;
    let records = parse_scores_tsv(&read_text(&a.scores)?)?;
    let catalog = catalog(&a.catalog)?;
    let embeddings = embeddings_from_records(&records, &docs, &catalog)?;
    run.write("embeddings.tsv", &embeddings_tsv(&embeddings, &catalog))?;
    run.write("support.tsv", &support_tsv(&embeddings, &catalog))?;
    println!("profile: {} companies x {} aspects", embeddings.len(), catalog.len());
    Ok(())
}

fn parse_pairs(text: &str, ctx: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') || line == "company1\tcompany2" {
            continue;
        }
        match line.split('\t').collect::<Vec<_>>()[..] {
            [a, b] => out.push((a.trim().to_string(), b.trim().to_string())),
            _ => return Err(Error::parse(ctx, i + 1, "expected company1<TAB>company2")),
        }
    }
    Ok(out)
}

fn run_report(a: &Report) -> Result<()> {
    let support = a
        .support
        .clone()
        .unwrap_or_else(|| a.embeddings.parent().unwrap_or(Path::new(".")).join("support.tsv"));
    let all = !(a.similarity || a.rankings || a.frequency || a.projection);
    let mut outputs = Vec::new();
    for (on, name) in [
        (a.similarity, "similarity.tsv"),
        (a.rankings, "rankings.tsv"),
        (a.frequency, "aspect_frequency.tsv"),
        (a.projection, "projection.tsv"),
    ] {
        if all || on {
            outputs.push(name);
        }
    }
    let support_opt = Some(support.clone());
    let inputs = opt_inputs(&[&a.embeddings], &[&support_opt, &a.catalog, &a.pairs]);
    let run = Run::start("report", &a.common, a, &inputs, &outputs)?;
    let catalog = catalog(&a.catalog)?;
    let embeddings = parse_embeddings_tsv(&read_text(&a.embeddings)?, Some(&read_text(&support)?), &catalog)?;
    if outputs.contains(&"similarity.tsv") {
        let pairs = match &a.pairs {
            Some(p) => Some(parse_pairs(&read_text(p)?, &p.display().to_string())?),
            None => None,
        };
        let report = similarity_report(&embeddings, pairs.as_deref())?;
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        run.write("similarity.tsv", &similarity_tsv(&report))?;
    }
    if outputs.contains(&"rankings.tsv") {
        let aspects: Vec<String> = if a.aspects.is_empty() {
            catalog.names().map(String::from).collect()
        } else {
            a.aspects.clone()
        };
        let mut text = String::from(RANKINGS_HEADER);
        for aspect in &aspects {
            for dir in [Direction::Best, Direction::Worst] {
                let rows = rank_by_aspect(&embeddings, &catalog, aspect, a.sector.as_deref(), a.top_k, dir)?;
                push_rankings(&mut text, aspect, dir, &rows);
            }
        }
        run.write("rankings.tsv", &text)?;
    }
    if outputs.contains(&"aspect_frequency.tsv") {
        run.write("aspect_frequency.tsv", &frequency_tsv(&aspect_frequency(&embeddings, &catalog)))?;
    }
    if outputs.contains(&"projection.tsv") {
        let p = project_2d(&embeddings)?;
        run.write("projection.tsv", &projection_tsv(&p))?;
    }
    println!("report: wrote {}", outputs.join(", "));
    Ok(())
}

fn run_eval(a: &Eval) -> Result<()> {
    let run = Run::start("eval", &a.common, a, &[&a.docs, &a.docvec], &["eval.tsv"])?;
    let docs = read_docs(&a.docs)?;
    let docvec = DocvecModel::load(&a.docvec)?;
    let (x, y) = labeled_vectors(&docvec, &docs)?;
    let seed = stage_seed(a.common.seed, stage::EVAL);
    let elm = elm_pipeline_config(&a.elm, docvec.dims(), seed).elm_config();
    let baseline = BaselineConfig { epochs: a.epochs, reg: a.reg, seed };
    let c = kfold_compare(&x, &y, a.folds, &elm, &baseline, seed)?;
    run.write("eval.tsv", &c.to_tsv())?;
    println!(
        "eval: elm acc {:.4}, baseline acc {:.4}, t {:.4}, p {:.4}, speed ratio {:.2}",
        Comparison::mean_accuracy(&c.elm),
        Comparison::mean_accuracy(&c.baseline),
        c.test.t,
        c.test.p,
        c.speed_ratio
    );
    Ok(())
}

/// Runs one invocation; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::BuildLexicon(a) => build_lexicon(a),
        Command::Ingest(a) => run_ingest(a),
        Command::Synth(a) => run_synth(a),
        Command::TrainDocvec(a) => run_train_docvec(a),
        Command::TrainElm(a) => run_train_elm(a),
        Command::Score(a) => run_score(a),
        Command::Profile(a) => run_profile(a),
        Command::Report(a) => run_report(a),
        Command::Eval(a) => run_eval(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
