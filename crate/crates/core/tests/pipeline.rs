use std::io::BufReader;
use std::path::PathBuf;

use proptest::prelude::*;

use knnfmt::corpus::Corpus;
use knnfmt::eval::generator::{generate_document, Style};
use knnfmt::formatter::format;
use knnfmt::model::{load_model, save_model, train, FormattingModel};
use knnfmt::syntax::blocklang::{Blocklang, Variant};
use knnfmt::syntax::{parse_document, TreeProvider};
use knnfmt::Error;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/clean")
}

fn fixture_model(lang: &Blocklang) -> FormattingModel {
    let c = Corpus::load_dir(lang, &fixtures(), Some("bl")).unwrap();
    train(&c.docs, lang, 4).unwrap()
}

#[test]
fn saved_model_formats_like_the_original() {
    let lang = Blocklang::new(Variant::B);
    let m = fixture_model(&lang);
    let mut bytes = Vec::new();
    save_model(&m, &mut bytes).unwrap();
    let back = load_model(BufReader::new(&bytes[..]), Some(&lang.vocabulary().fingerprint())).unwrap();
    assert_eq!(back, m);

    let src = generate_document(&Style::default(), 60, 4).unwrap();
    assert_eq!(format(&back, &src, &lang).unwrap(), format(&m, &src, &lang).unwrap());
}

#[test]
fn loading_checks_the_vocabulary() {
    let a = Blocklang::new(Variant::A);
    let b = Blocklang::new(Variant::B);
    let mut bytes = Vec::new();
    save_model(&fixture_model(&a), &mut bytes).unwrap();
    let err = load_model(BufReader::new(&bytes[..]), Some(&b.vocabulary().fingerprint())).unwrap_err();
    assert!(matches!(err, Error::VocabularyMismatch { .. }), "{err}");
}

#[test]
fn formatting_is_idempotent_on_the_fixtures() {
    let lang = Blocklang::new(Variant::A);
    let m = fixture_model(&lang);
    for seed in 0..20 {
        let style = Style {
            indent: 2,
            brace_next_line: true,
            ..Style::default()
        };
        let src = generate_document(&style, 40, seed).unwrap();
        let once = format(&m, &src, &lang).unwrap();
        let twice = format(&m, &once, &lang).unwrap();
        assert_eq!(once, twice, "seed {seed}");
    }
}

#[test]
fn foreign_style_is_rewritten_to_the_corpus_style() {
    let lang = Blocklang::new(Variant::A);
    let m = fixture_model(&lang);
    let out = format(&m, "func f(a,b){if(a<b){return a;}else{return b;}}", &lang).unwrap();
    assert_eq!(
        out,
        "func f(a, b) {\n    if (a < b) {\n        return a;\n    } else {\n        return b;\n    }\n}\n"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tokens_survive_any_generated_style(
        seed in 0u64..10_000,
        indent in 1usize..6,
        brace_next_line: bool,
        b: bool,
    ) {
        let lang = Blocklang::new(if b { Variant::B } else { Variant::A });
        let m = fixture_model(&lang);
        let style = Style { indent, brace_next_line, ..Style::default() };
        let src = generate_document(&style, 15, seed).unwrap();
        let out = format(&m, &src, &lang).unwrap();
        let before = parse_document(&lang, &src).unwrap();
        let after = parse_document(&lang, &out).unwrap();
        let texts = |d: &knnfmt::syntax::Document| d.tokens.iter().map(|t| t.text.clone()).collect::<Vec<_>>();
        prop_assert_eq!(texts(&before), texts(&after));
        prop_assert!(out.lines().all(|l| !l.ends_with(' ')));
    }
}
