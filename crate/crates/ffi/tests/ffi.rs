use std::ffi::{CStr, CString};
use std::ptr;

use aspect_sentiment_ffi::*;

fn lexicon_file(dir: &std::path::Path) -> CString {
    let path = dir.join("lexicon.tsv");
    std::fs::write(&path, "pay\t0.5\tprimary\nboss\t-0.75\tsecondary\n").unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(as_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn lexicon_handle_and_tier_scores() {
    let dir = tempfile::tempdir().unwrap();
    let path = lexicon_file(dir.path());
    unsafe {
        let mut lex = ptr::null_mut();
        assert_eq!(as_lexicon_load(path.as_ptr(), 0.25, &mut lex), AsStatus::Ok);
        assert_eq!(as_lexicon_len(lex), 2);

        let (mut p, mut found) = (0.0, false);
        let boss = CString::new("boss").unwrap();
        assert_eq!(as_lexicon_lookup(lex, boss.as_ptr(), &mut p, &mut found), AsStatus::Ok);
        assert!(found && p == -0.75);

        for (label, want) in [(1, -0.75), (0, 0.75)] {
            assert_eq!(as_score_elm_lookup(lex, boss.as_ptr(), label, &mut p, &mut found), AsStatus::Ok);
            assert!(found && p == want);
        }
        let unknown = CString::new("weather").unwrap();
        p = 9.0;
        assert_eq!(as_score_elm_lookup(lex, unknown.as_ptr(), 1, &mut p, &mut found), AsStatus::Ok);
        assert!(!found && p == 9.0);
        as_lexicon_free(lex);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut lex = ptr::null_mut();
        let missing = CString::new("/nonexistent/lexicon.tsv").unwrap();
        assert_eq!(as_lexicon_load(missing.as_ptr(), 0.25, &mut lex), AsStatus::Io);
        assert!(lex.is_null());
        assert!(last_error().contains("/nonexistent/lexicon.tsv"));

        assert_eq!(as_lexicon_load(ptr::null(), 0.25, &mut lex), AsStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(as_lexicon_load(bad.as_ptr().cast(), 0.25, &mut lex), AsStatus::InvalidUtf8);

        let mut v = 0.0;
        assert_eq!(as_score_semi_random(2, 0, &mut v), AsStatus::InvalidArgument);
        let z = [0.0; 3];
        assert_eq!(as_cosine(z.as_ptr(), z.as_ptr(), 3, &mut v), AsStatus::ZeroVector);
        assert_eq!(as_cosine(ptr::null(), z.as_ptr(), 3, &mut v), AsStatus::NullPointer);
    }
}

#[test]
fn semi_random_is_seeded_and_signed() {
    unsafe {
        for s in 0..500u64 {
            let (mut a, mut b, mut n) = (0.0, 0.0, 0.0);
            assert_eq!(as_score_semi_random(1, s, &mut a), AsStatus::Ok);
            assert_eq!(as_score_semi_random(1, s, &mut b), AsStatus::Ok);
            assert_eq!(as_score_semi_random(0, s, &mut n), AsStatus::Ok);
            assert_eq!(a, b);
            assert!(a > 0.0 && a < 1.0);
            assert!(n < 0.0 && n > -1.0);
        }
    }
}

#[test]
fn elm_fit_predict_and_roundtrip_through_file() {
    let x: Vec<f64> = (0..40).flat_map(|i| [i as f64 / 40.0, 1.0 - i as f64 / 40.0]).collect();
    let y: Vec<f64> = (0..40).map(|i| f64::from(u8::from(i >= 20))).collect();
    unsafe {
        let mut elm = ptr::null_mut();
        assert_eq!(as_elm_fit(x.as_ptr(), 40, 2, y.as_ptr(), 30, 1e-6, 3, &mut elm), AsStatus::Ok);
        assert_eq!(as_elm_input_dim(elm), 2);
        let mut correct = 0;
        for i in 0..40 {
            let mut label = -1;
            assert_eq!(as_elm_classify(elm, x[2 * i..].as_ptr(), 2, &mut label), AsStatus::Ok);
            correct += usize::from(f64::from(label) == y[i]);
        }
        assert!(correct >= 38, "{correct}/40");
        let mut out = 0.0;
        assert_eq!(as_elm_predict(elm, x.as_ptr(), 3, &mut out), AsStatus::Shape);
        as_elm_free(elm);

        let mut missing = ptr::null_mut();
        let path = CString::new("/nonexistent/elm.json").unwrap();
        assert_eq!(as_elm_load(path.as_ptr(), &mut missing), AsStatus::Io);
    }
}

#[test]
fn catalog_names_and_terms() {
    unsafe {
        let mut cat = ptr::null_mut();
        assert_eq!(as_catalog_default(&mut cat), AsStatus::Ok);
        assert_eq!(as_catalog_len(cat), 30);
        let mut name = ptr::null_mut();
        assert_eq!(as_catalog_name(cat, 0, &mut name), AsStatus::Ok);
        let first = CStr::from_ptr(name).to_str().unwrap().to_owned();
        as_string_free(name);
        let term = CString::new("salary").unwrap();
        let mut idx = -2;
        assert_eq!(as_catalog_aspect_for_term(cat, term.as_ptr(), &mut idx), AsStatus::Ok);
        assert!(idx >= 0);
        assert_eq!(as_catalog_name(cat, 30, &mut name), AsStatus::InvalidArgument);
        as_catalog_free(cat);
        assert_eq!(first, "Job");
    }
}

/// Compiles the C smoke program against the generated header and the static library.
#[test]
fn c_program_links_against_header() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libaspect_sentiment_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .arg(root.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("run cc");
    assert!(status.success());
    let lexicon = lexicon_file(dir.path());
    let out = std::process::Command::new(&bin).arg(lexicon.to_str().unwrap()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Job");
}
