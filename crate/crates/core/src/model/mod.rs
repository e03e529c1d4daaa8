//! Training the formatting model and querying it.

mod io;
mod knn;
mod stats;

pub use io::{load_model, save_model, FORMAT_VERSION, MAGIC};
pub use knn::{weight, Predictor};
pub use stats::{model_stats, ModelStats};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{collect_list_stats, compute_pairs, tag_lists, ListStats, PairTable};
use crate::directives::{capture_hpos, capture_ws, original_positions, HposDirective, WsDirective};
use crate::error::{Error, Result};
use crate::features::{compute_features, FeatureVector};
use crate::syntax::{Document, TreeProvider, VocabFingerprint};

pub const DEFAULT_K: usize = 11;
pub const DEFAULT_THRESHOLD: f64 = 0.15;
pub const DEFAULT_INDENT: usize = 4;

/// Context and formatting captured at one corpus token.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub features: FeatureVector,
    pub ws: WsDirective,
    /// Present exactly when `ws` is a newline.
    pub hpos: Option<HposDirective>,
    pub starts_line: bool,
    /// `(document id, token index)` within the training corpus.
    pub source: (u32, u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormattingModel {
    pub provider_id: String,
    pub vocabulary: VocabFingerprint,
    pub indent_size: usize,
    pub k: usize,
    pub threshold: f64,
    /// Whether most training documents end with a newline.
    pub final_newline: bool,
    pub pairs: PairTable,
    pub list_stats: ListStats,
    pub exemplars: Vec<Exemplar>,
}

impl FormattingModel {
    pub fn validate(&self) -> Result<()> {
        if self.indent_size < 1 {
            return Err(Error::InvalidParameter("indent size must be at least 1".into()));
        }
        if self.k < 1 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold {} is outside (0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }

    /// Ids of the training documents that contributed exemplars.
    pub fn source_documents(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.exemplars.iter().map(|e| e.source.0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Trains on every document of `corpus`.
pub fn train(
    corpus: &[Document],
    provider: &dyn TreeProvider,
    indent_size: usize,
) -> Result<FormattingModel> {
    let ids: Vec<usize> = (0..corpus.len()).collect();
    train_subset(corpus, &ids, provider, indent_size)
}

/// Trains on `corpus[ids]`, keeping the ids as exemplar sources.
pub fn train_subset(
    corpus: &[Document],
    ids: &[usize],
    provider: &dyn TreeProvider,
    indent_size: usize,
) -> Result<FormattingModel> {
    if ids.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if indent_size < 1 {
        return Err(Error::InvalidParameter("indent size must be at least 1".into()));
    }
    let docs = || ids.iter().map(|&d| &corpus[d]);
    let pairs = compute_pairs(docs());
    let list_stats = collect_list_stats(docs());

    let per_doc: Vec<Vec<Exemplar>> = ids
        .par_iter()
        .map(|&d| exemplars_of(&corpus[d], d as u32, &pairs, indent_size))
        .collect::<Result<_>>()?;

    let ending = docs().filter(|d| d.text.ends_with('\n')).count();
    Ok(FormattingModel {
        provider_id: provider.id().to_string(),
        vocabulary: provider.vocabulary().fingerprint(),
        indent_size,
        k: DEFAULT_K,
        threshold: DEFAULT_THRESHOLD,
        final_newline: 2 * ending >= ids.len(),
        pairs,
        list_stats,
        exemplars: per_doc.into_iter().flatten().collect(),
    })
}

fn exemplars_of(
    doc: &Document,
    id: u32,
    pairs: &PairTable,
    indent_size: usize,
) -> Result<Vec<Exemplar>> {
    let tags = tag_lists(doc, None);
    let pos = original_positions(doc);
    (1..doc.len())
        .map(|i| {
            let ws = capture_ws(doc, i)?;
            Ok(Exemplar {
                features: compute_features(doc, i, &tags, pairs, &pos),
                ws,
                hpos: ws.is_newline().then(|| capture_hpos(doc, i, indent_size)),
                starts_line: pos[i].line != pos[i - 1].line,
                source: (id, i as u32),
            })
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::syntax::blocklang::{Blocklang, Variant};
    use crate::syntax::parse_document;

    pub(crate) const SAMPLE: &[&str] = &[
        "func reset(a, b) {\n    x = 0;\n    if (a) {\n        y = 1;\n    } else {\n        y = 2;\n    }\n}\n",
        "func step(count) {\n    while (count > 0) {\n        count = count - 1;\n    }\n    return count;\n}\n",
        "x = f(1, 2);\ny = [3, 4, 5];\nprint(x);\n",
    ];

    pub(crate) fn sample_docs(v: Variant) -> (Blocklang, Vec<Document>) {
        let lang = Blocklang::new(v);
        let docs = SAMPLE
            .iter()
            .map(|s| parse_document(&lang, s).unwrap())
            .collect();
        (lang, docs)
    }

    #[test]
    fn one_exemplar_per_token_after_the_first() {
        let (lang, docs) = sample_docs(Variant::A);
        let m = train(&docs, &lang, 4).unwrap();
        let expected: usize = docs.iter().map(|d| d.len() - 1).sum();
        assert_eq!(m.exemplars.len(), expected);
        for e in &m.exemplars {
            assert_eq!(e.hpos.is_some(), e.ws.is_newline());
        }
        assert!(m.final_newline);
        assert_eq!(m.source_documents(), [0, 1, 2]);
    }

    #[test]
    fn one_line_corpus_has_no_hpos() {
        let lang = Blocklang::new(Variant::B);
        let docs = vec![parse_document(&lang, "x = 1; y = f(x);").unwrap()];
        let m = train(&docs, &lang, 4).unwrap();
        assert!(m.exemplars.iter().all(|e| e.hpos.is_none()));
        assert!(!m.final_newline);
    }

    #[test]
    fn subset_training_keeps_corpus_ids() {
        let (lang, docs) = sample_docs(Variant::A);
        let m = train_subset(&docs, &[0, 2], &lang, 4).unwrap();
        assert_eq!(m.source_documents(), [0, 2]);
    }

    #[test]
    fn rejects_empty_corpus_and_zero_indent() {
        let (lang, docs) = sample_docs(Variant::A);
        assert!(matches!(train(&[], &lang, 4), Err(Error::EmptyCorpus)));
        assert!(matches!(train(&docs, &lang, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn validate_parameters() {
        let (lang, docs) = sample_docs(Variant::A);
        let mut m = train(&docs, &lang, 4).unwrap();
        assert!(m.validate().is_ok());
        m.threshold = 0.0;
        assert!(m.validate().is_err());
        m.threshold = 1.0;
        m.k = 0;
        assert!(m.validate().is_err());
    }
}
