use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_aspect-sentiment");

fn sh(args: &[&str]) -> std::process::Output {
    let out = Command::new(BIN).args(args).output().expect("spawn binary");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Runs synth through report into `root`.
fn full_pipeline(root: &Path) {
    let s = root.join("synth");
    sh(&["synth", "--companies", "4", "--per", "50", "--seed", "42", "--out", p(&s)]);
    let l = root.join("lex");
    sh(&[
        "build-lexicon",
        "--primary",
        p(&s.join("primary.tsv")),
        "--secondary",
        p(&s.join("secondary.tsv")),
        "--threshold",
        "0.25",
        "--out",
        p(&l),
    ]);
    let i = root.join("ingest");
    sh(&["ingest", "--reviews", p(&s.join("reviews.jsonl")), "--seed", "42", "--out", p(&i)]);
    let docs = i.join("docs.jsonl");
    let m = root.join("models");
    sh(&["train-docvec", "--docs", p(&docs), "--dims", "20", "--epochs", "10", "--seed", "42", "--out", p(&m)]);
    sh(&[
        "train-elm",
        "--docs",
        p(&docs),
        "--docvec",
        p(&m.join("docvec.json")),
        "--hidden",
        "30",
        "--seed",
        "42",
        "--out",
        p(&m),
    ]);
    let sc = root.join("score");
    sh(&[
        "score",
        "--docs",
        p(&docs),
        "--docvec",
        p(&m.join("docvec.json")),
        "--elm",
        p(&m.join("elm.json")),
        "--lexicon",
        p(&l.join("lexicon.tsv")),
        "--seed",
        "42",
        "--out",
        p(&sc),
    ]);
    let pr = root.join("profile");
    sh(&["profile", "--docs", p(&docs), "--scores", p(&sc.join("scores.tsv")), "--out", p(&pr)]);
    sh(&["report", "--embeddings", p(&pr.join("embeddings.tsv")), "--top-k", "3", "--out", p(&root.join("report"))]);
}

const OUTPUTS: &[&str] = &[
    "synth/reviews.jsonl",
    "synth/primary.tsv",
    "lex/lexicon.tsv",
    "ingest/docs.jsonl",
    "models/docvec.json",
    "models/elm.json",
    "score/scores.tsv",
    "score/tiers.tsv",
    "profile/embeddings.tsv",
    "profile/support.tsv",
    "report/similarity.tsv",
    "report/rankings.tsv",
    "report/aspect_frequency.tsv",
    "report/projection.tsv",
];

#[test]
fn pipeline_is_deterministic_and_well_formed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    full_pipeline(a.path());
    full_pipeline(b.path());
    for name in OUTPUTS {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between identical runs");
    }

    let emb = fs::read_to_string(a.path().join("profile/embeddings.tsv")).unwrap();
    let lines: Vec<&str> = emb.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| l.split('\t').count() == 32));
    assert!(lines[0].starts_with("company\tsector\tJob\t"));

    for stage in ["synth", "lex", "ingest", "score", "profile", "report"] {
        let dir = a.path().join(stage);
        let manifests: Vec<_> = fs::read_dir(&dir)
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".manifest.json"))
            .collect();
        assert!(!manifests.is_empty(), "{stage} has no manifest");
        for m in manifests {
            let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(m.path()).unwrap()).unwrap();
            assert!(v["seed"].is_u64());
            for out in v["outputs"].as_array().unwrap() {
                assert!(dir.join(out.as_str().unwrap()).exists());
            }
        }
    }
    let score_manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("score/score.manifest.json")).unwrap()).unwrap();
    assert_eq!(score_manifest["inputs"].as_object().unwrap().len(), 4);
    assert!(score_manifest["inputs"].as_object().unwrap().values().all(|d| d.as_str().unwrap().len() == 64));

    let tiers = fs::read_to_string(a.path().join("score/tiers.tsv")).unwrap();
    assert!(tiers.lines().last().unwrap().contains("fallback_rate="));
}

#[test]
fn lexicon_priority_and_pairs_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.tsv"), "good\t0.7\nmeh\t0.1\nbad\t-0.6\n").unwrap();
    fs::write(d.join("b.tsv"), "good\t0.3\nawful\t-0.9\nmeh\t0.8\n").unwrap();
    sh(&[
        "build-lexicon",
        "--primary",
        p(&d.join("a.tsv")),
        "--secondary",
        p(&d.join("b.tsv")),
        "--threshold",
        "0.25",
        "--out",
        p(d),
    ]);
    let lex = fs::read_to_string(d.join("lexicon.tsv")).unwrap();
    assert!(lex.contains("good\t0.7\tprimary"));
    assert!(lex.contains("awful\t-0.9\tsecondary"));
    // The weak primary row is dropped before conflicts are resolved.
    assert!(lex.contains("meh\t0.8\tsecondary"), "{lex}");

    let names: Vec<String> = aspect_sentiment::aspects::AspectCatalog::default_catalog()
        .names()
        .map(String::from)
        .collect();
    let mut emb = format!("company\tsector\t{}\n", names.join("\t"));
    let mut sup = emb.clone();
    for (c, v) in [("A", 0.5), ("B", 0.4), ("C", -0.3)] {
        let mut row: Vec<String> = vec![c.into(), "tech".into()];
        row.extend((0..30).map(|i| format!("{}", if i % 3 == 0 { v } else { v * 0.1 * i as f64 })));
        emb += &(row.join("\t") + "\n");
        sup += &format!("{c}\ttech\t{}\n", vec!["1"; 30].join("\t"));
    }
    fs::write(d.join("embeddings.tsv"), emb).unwrap();
    fs::write(d.join("support.tsv"), sup).unwrap();
    fs::write(d.join("pairs.tsv"), "A\tC\nB\tA\n").unwrap();
    sh(&[
        "report",
        "--embeddings",
        p(&d.join("embeddings.tsv")),
        "--similarity",
        "--pairs",
        p(&d.join("pairs.tsv")),
        "--out",
        p(&d.join("r")),
    ]);
    let sim = fs::read_to_string(d.join("r/similarity.tsv")).unwrap();
    let rows: Vec<&str> = sim.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("A\tC\t") && rows[1].starts_with("B\tA\t"));
    assert!(!d.join("r/rankings.tsv").exists());
}

#[test]
fn exit_codes() {
    let out = Command::new(BIN).arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    let out = Command::new(BIN)
        .args(["ingest", "--reviews", p(&missing), "--out", p(dir.path())])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.jsonl"));
}

#[test]
fn conllu_parses_reproduce_heuristic_scores() {
    use aspect_sentiment::aspects::AspectCatalog;
    use aspect_sentiment::corpus::read_docs;
    use aspect_sentiment::syntax::{heuristic_parse, write_conllu_documents, ParsedSentence, Tagger};

    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    full_pipeline(root);
    let docs = read_docs(&root.join("ingest/docs.jsonl")).unwrap();
    let tagger = Tagger::default().with_nouns(AspectCatalog::default_catalog().term_words());
    let parsed: Vec<(String, Vec<ParsedSentence>)> = docs
        .iter()
        .map(|d| {
            let s = d.tokens.iter().map(|t| heuristic_parse(t, &tagger.tag(t)).unwrap()).collect();
            (d.id.clone(), s)
        })
        .collect();
    let text = write_conllu_documents(parsed.iter().map(|(id, s)| (id.as_str(), s.as_slice())));
    fs::write(root.join("parses.conllu"), text).unwrap();
    let m = root.join("models");
    let out = root.join("score-conllu");
    sh(&[
        "score",
        "--docs",
        p(&root.join("ingest/docs.jsonl")),
        "--docvec",
        p(&m.join("docvec.json")),
        "--elm",
        p(&m.join("elm.json")),
        "--lexicon",
        p(&root.join("lex/lexicon.tsv")),
        "--conllu",
        p(&root.join("parses.conllu")),
        "--seed",
        "42",
        "--out",
        p(&out),
    ]);
    assert_eq!(
        fs::read_to_string(out.join("scores.tsv")).unwrap(),
        fs::read_to_string(root.join("score/scores.tsv")).unwrap()
    );
}
