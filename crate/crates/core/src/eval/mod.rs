//! Measuring how well a model reproduces a corpus: per-document error
//! rates, leave-one-out validation, grammar comparison and parameter
//! experiments.

pub mod generator;
mod metrics;

pub use metrics::{edit_distance_normalized, levenshtein, median};

use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::directives::{capture_hpos, capture_ws};
use crate::error::{Error, Result};
use crate::formatter::format_document;
use crate::model::{train_subset, FormattingModel, Predictor, DEFAULT_K, DEFAULT_THRESHOLD};
use crate::syntax::{parse_document, Document, TreeProvider};

/// Model parameters shared by the experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalParams {
    pub indent_size: usize,
    pub k: usize,
    pub threshold: f64,
}

impl EvalParams {
    pub fn with_indent(indent_size: usize) -> Self {
        EvalParams {
            indent_size,
            k: DEFAULT_K,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Misclassifications on one document.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DocEval {
    pub file: String,
    pub ws_errors: usize,
    pub ws_decisions: usize,
    pub hpos_errors: usize,
    pub hpos_decisions: usize,
    pub error_rate: f64,
    pub edit_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub docs: Vec<DocEval>,
    pub median_error: f64,
    pub median_edit_distance: f64,
}

impl EvalResult {
    fn from_docs(docs: Vec<DocEval>) -> Self {
        let errors: Vec<f64> = docs.iter().map(|d| d.error_rate).collect();
        let edits: Vec<f64> = docs.iter().map(|d| d.edit_distance).collect();
        EvalResult {
            median_error: median(&errors),
            median_edit_distance: median(&edits),
            docs,
        }
    }
}

/// Formats `doc` and compares every decision with the document's own
/// layout. Hpos is scored wherever the original starts a line, whether or
/// not the formatter chose a newline there.
pub fn error_rate(predictor: &Predictor, doc: &Document, provider: &dyn TreeProvider, file: &str) -> DocEval {
    let indent = predictor.model().indent_size;
    let out = format_document(predictor, doc, provider);
    let mut e = DocEval {
        file: file.to_string(),
        ws_errors: 0,
        ws_decisions: 0,
        hpos_errors: 0,
        hpos_decisions: 0,
        error_rate: 0.0,
        edit_distance: edit_distance_normalized(&out.text, &doc.text),
    };
    for i in 1..doc.len() {
        let decision = out.decisions[i].expect("every token after the first is decided");
        let truth = capture_ws(doc, i).expect("i is at least 1");
        e.ws_decisions += 1;
        e.ws_errors += usize::from(decision.ws != truth);
        if truth.is_newline() {
            let predicted = decision
                .hpos
                .unwrap_or_else(|| predictor.predict_hpos(&out.features[i]));
            e.hpos_decisions += 1;
            e.hpos_errors += usize::from(predicted != capture_hpos(doc, i, indent));
        }
    }
    let decisions = e.ws_decisions + e.hpos_decisions;
    if decisions > 0 {
        e.error_rate = (e.ws_errors + e.hpos_errors) as f64 / decisions as f64;
    }
    e
}

/// Model trained on every document except `held_out`.
pub fn fold_model(
    corpus: &Corpus,
    held_out: usize,
    provider: &dyn TreeProvider,
    params: EvalParams,
) -> Result<FormattingModel> {
    let ids: Vec<usize> = (0..corpus.len()).filter(|&d| d != held_out).collect();
    let mut m = train_subset(&corpus.docs, &ids, provider, params.indent_size)?;
    m.k = params.k;
    m.threshold = params.threshold;
    assert!(!m.source_documents().contains(&(held_out as u32)));
    Ok(m)
}

fn require_two(corpus: &Corpus) -> Result<()> {
    if corpus.len() < 2 {
        return Err(Error::CorpusTooSmall {
            needed: 2,
            got: corpus.len(),
        });
    }
    Ok(())
}

fn evaluate_held_out(
    corpus: &Corpus,
    d: usize,
    model: &FormattingModel,
    provider: &dyn TreeProvider,
) -> Result<DocEval> {
    let p = Predictor::new(model).map_err(|e| e.in_file(&corpus.names[d]))?;
    Ok(error_rate(&p, &corpus.docs[d], provider, &corpus.names[d]))
}

/// Evaluates each document against a model trained on all the others.
pub fn leave_one_out(corpus: &Corpus, provider: &dyn TreeProvider, params: EvalParams) -> Result<EvalResult> {
    require_two(corpus)?;
    let docs = (0..corpus.len())
        .into_par_iter()
        .map(|d| evaluate_held_out(corpus, d, &fold_model(corpus, d, provider, params)?, provider))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalResult::from_docs(docs))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceRow {
    pub file: String,
    pub edit_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceResult {
    pub rows: Vec<InvarianceRow>,
    pub median: f64,
}

/// Parses every text under both providers, which must accept exactly the
/// same documents.
fn parse_both(
    texts: &[(String, String)],
    a: &dyn TreeProvider,
    b: &dyn TreeProvider,
) -> Result<(Corpus, Corpus)> {
    let mut ca = Corpus {
        names: Vec::new(),
        docs: Vec::new(),
    };
    let mut cb = ca.clone();
    for (name, text) in texts {
        match (parse_document(a, text), parse_document(b, text)) {
            (Ok(da), Ok(db)) => {
                ca.names.push(name.clone());
                ca.docs.push(da);
                cb.names.push(name.clone());
                cb.docs.push(db);
            }
            (Err(e), Err(_)) => return Err(e.in_file(name)),
            (Ok(_), Err(e)) | (Err(e), Ok(_)) => {
                return Err(Error::LanguageMismatch {
                    document: name.clone(),
                    detail: e.to_string(),
                })
            }
        }
    }
    Ok((ca, cb))
}

/// Leave-one-out formats every text under two grammars of the same language
/// and measures how far the outputs differ.
pub fn grammar_invariance(
    texts: &[(String, String)],
    a: &dyn TreeProvider,
    b: &dyn TreeProvider,
    params: EvalParams,
) -> Result<InvarianceResult> {
    let (ca, cb) = parse_both(texts, a, b)?;
    require_two(&ca)?;
    let rows = (0..ca.len())
        .into_par_iter()
        .map(|d| {
            let ma = fold_model(&ca, d, a, params)?;
            let mb = fold_model(&cb, d, b, params)?;
            let oa = format_document(&Predictor::new(&ma)?, &ca.docs[d], a).text;
            let ob = format_document(&Predictor::new(&mb)?, &cb.docs[d], b).text;
            Ok(InvarianceRow {
                file: ca.names[d].clone(),
                edit_distance: edit_distance_normalized(&oa, &ob),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ds: Vec<f64> = rows.iter().map(|r| r.edit_distance).collect();
    Ok(InvarianceResult {
        median: median(&ds),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeRow {
    pub size: usize,
    pub trials: usize,
    pub median_error: f64,
}

/// For each size, repeatedly trains on `size` random documents and scores a
/// random held-out one. Draws come from one seeded stream, so a seed fixes
/// the whole table.
pub fn corpus_size_experiment(
    corpus: &Corpus,
    provider: &dyn TreeProvider,
    params: EvalParams,
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<SizeRow>> {
    require_two(corpus)?;
    let n = corpus.len();
    if let Some(&s) = sizes.iter().find(|&&s| s == 0 || s > n - 1) {
        return Err(Error::InvalidParameter(format!(
            "corpus size {s} is outside 1..={}",
            n - 1
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plan = Vec::new();
    for &s in sizes {
        for _ in 0..trials {
            let held = rng.gen_range(0..n);
            let mut ids: Vec<usize> = sample(&mut rng, n - 1, s)
                .into_iter()
                .map(|j| if j >= held { j + 1 } else { j })
                .collect();
            ids.sort_unstable();
            plan.push((s, held, ids));
        }
    }

    let errors = plan
        .par_iter()
        .map(|(_, held, ids)| {
            let mut m = train_subset(&corpus.docs, ids, provider, params.indent_size)?;
            m.k = params.k;
            m.threshold = params.threshold;
            Ok(evaluate_held_out(corpus, *held, &m, provider)?.error_rate)
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(sizes
        .iter()
        .zip(errors.chunks(trials))
        .map(|(&size, errs)| SizeRow {
            size,
            trials,
            median_error: median(errs),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KRow {
    pub k: usize,
    pub median_error: f64,
    pub default: bool,
}

/// Leave-one-out median error for each `k`. Folds are trained once and
/// reused across all values.
pub fn k_sweep(
    corpus: &Corpus,
    provider: &dyn TreeProvider,
    params: EvalParams,
    ks: &[usize],
) -> Result<Vec<KRow>> {
    require_two(corpus)?;
    if ks.contains(&0) {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let folds = (0..corpus.len())
        .into_par_iter()
        .map(|d| fold_model(corpus, d, provider, params))
        .collect::<Result<Vec<_>>>()?;
    ks.iter()
        .map(|&k| {
            let errs = folds
                .par_iter()
                .enumerate()
                .map(|(d, m)| {
                    let m = FormattingModel { k, ..m.clone() };
                    Ok(evaluate_held_out(corpus, d, &m, provider)?.error_rate)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(KRow {
                k,
                median_error: median(&errs),
                default: k == DEFAULT_K,
            })
        })
        .collect()
}

/// Writes rows as CSV with a header line.
pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::generator::{generate_corpus, Style};
    use crate::syntax::blocklang::{Blocklang, Variant};

    fn fixture(n: usize, seed: u64) -> (Blocklang, Corpus) {
        let lang = Blocklang::new(Variant::A);
        let files = generate_corpus(&Style::default(), n, seed).unwrap();
        let c = Corpus::from_texts(&lang, files).unwrap();
        (lang, c)
    }

    #[test]
    fn error_formula() {
        let e = |ws, wd, h, hd| {
            let mut d = DocEval {
                file: String::new(),
                ws_errors: ws,
                ws_decisions: wd,
                hpos_errors: h,
                hpos_decisions: hd,
                error_rate: 0.0,
                edit_distance: 0.0,
            };
            d.error_rate = (d.ws_errors + d.hpos_errors) as f64 / (d.ws_decisions + d.hpos_decisions) as f64;
            d.error_rate
        };
        assert_eq!(e(2, 10, 1, 4), 3.0 / 14.0);
    }

    #[test]
    fn memorized_document_has_no_errors() {
        let (lang, c) = fixture(15, 1);
        let m = crate::model::train(&c.docs, &lang, 4).unwrap();
        let p = Predictor::new(&m).unwrap();
        for (name, d) in c.names.iter().zip(&c.docs) {
            let e = error_rate(&p, d, &lang, name);
            assert_eq!(e.error_rate, 0.0, "{name}");
            assert_eq!(e.edit_distance, 0.0);
            assert_eq!(e.ws_decisions, d.len() - 1);
        }
    }

    #[test]
    fn consistent_corpus_leave_one_out() {
        let (lang, c) = fixture(6, 7);
        let r = leave_one_out(&c, &lang, EvalParams::with_indent(4)).unwrap();
        assert_eq!(r.docs.len(), 6);
        assert!(r.median_error <= 0.02, "{}", r.median_error);
    }

    #[test]
    fn contradictory_styles_have_errors() {
        let lang = Blocklang::new(Variant::A);
        let c = Corpus::from_texts(
            &lang,
            [("a", "x = f(1, 2);\ny = 3;\n"), ("b", "x=f(1,2);\n\n\ny=3;\n")],
        )
        .unwrap();
        let r = leave_one_out(&c, &lang, EvalParams::with_indent(4)).unwrap();
        assert!(r.docs.iter().all(|d| d.error_rate > 0.0));
        assert!(r.docs.iter().all(|d| (0.0..=1.0).contains(&d.error_rate)));
    }

    #[test]
    fn single_document_is_too_small() {
        let (lang, c) = fixture(1, 3);
        assert!(matches!(
            leave_one_out(&c, &lang, EvalParams::with_indent(4)),
            Err(Error::CorpusTooSmall { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn same_grammar_is_invariant() {
        let files = generate_corpus(&Style::default(), 4, 11).unwrap();
        let a = Blocklang::new(Variant::A);
        let r = grammar_invariance(&files, &a, &a, EvalParams::with_indent(4)).unwrap();
        assert_eq!(r.median, 0.0);
    }

    #[test]
    fn size_experiment_is_reproducible() {
        let (lang, c) = fixture(5, 2);
        let p = EvalParams::with_indent(4);
        let t1 = corpus_size_experiment(&c, &lang, p, &[1, 4], 3, 9).unwrap();
        let t2 = corpus_size_experiment(&c, &lang, p, &[1, 4], 3, 9).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.len(), 2);
        assert!(corpus_size_experiment(&c, &lang, p, &[5], 3, 9).is_err());
    }

    #[test]
    fn k_sweep_rows() {
        let (lang, c) = fixture(4, 5);
        let rows = k_sweep(&c, &lang, EvalParams::with_indent(4), &[1, 11]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].default && !rows[0].default);
        assert!(rows.iter().all(|r| r.median_error <= 0.05));
    }

    #[test]
    fn csv_has_header() {
        let rows = [KRow {
            k: 11,
            median_error: 0.5,
            default: true,
        }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,median_error,default\n11,0.5,true\n");
    }
}
