//! Re-laying out a document from scratch by predicting the whitespace before
//! every token.

use crate::analysis::tag_lists;
use crate::directives::{resolve_locator, HposDirective, Position, WsDirective};
use crate::error::{Error, Result};
use crate::features::{compute_features, FeatureVector};
use crate::model::{FormattingModel, Predictor};
use crate::syntax::{parse_document, Channel, Document, HiddenKind, Token, TokenType, TreeProvider};

/// What the formatter did before one token.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    /// Whitespace actually emitted, after any forced newline.
    pub ws: WsDirective,
    /// Set when `ws` is a newline.
    pub hpos: Option<HposDirective>,
}

#[derive(Clone, Debug)]
pub struct FormatOutput {
    pub text: String,
    /// Emitted position of every token.
    pub positions: Vec<Position>,
    /// Context of every token under the emitted layout.
    pub features: Vec<FeatureVector>,
    /// `None` for the first token, which is never predicted.
    pub decisions: Vec<Option<Decision>>,
}

/// Output buffer tracking the current line and column.
struct Emitter {
    out: String,
    line: usize,
    col: usize,
    tab_width: usize,
}

impl Emitter {
    fn push(&mut self, s: &str) {
        for c in s.chars() {
            match c {
                '\n' => {
                    self.line += 1;
                    self.col = 0;
                }
                '\t' => self.col += self.tab_width - self.col % self.tab_width,
                _ => self.col += 1,
            }
        }
        self.out.push_str(s);
    }

    fn newlines(&mut self, n: u32) {
        for _ in 0..n {
            self.push("\n");
        }
    }

    fn spaces(&mut self, n: usize) {
        self.out.extend(std::iter::repeat_n(' ', n));
        self.col += n;
    }

    /// Replays an original whitespace run, dropping anything a line would
    /// otherwise end with.
    fn whitespace_run(&mut self, run: &str) {
        match run.rfind('\n') {
            Some(last) => {
                self.newlines(run.matches('\n').count() as u32);
                self.push(&run[last + 1..]);
            }
            None => self.push(run),
        }
    }
}

fn is_ws(t: &Token) -> bool {
    t.channel == Channel::Hidden(HiddenKind::Whitespace)
}

/// Emits the comments in `hidden`, each after its own original whitespace.
/// Returns the whitespace run that follows the last comment, and whether
/// that comment was a line comment.
fn emit_comments<'d>(
    em: &mut Emitter,
    hidden: &'d [Token],
    line_comment: Option<TokenType>,
) -> (Option<&'d str>, bool) {
    let mut after = None;
    let mut last_is_line = false;
    for (k, h) in hidden.iter().enumerate() {
        if is_ws(h) {
            after = Some(h.text.as_str());
            continue;
        }
        if k > 0 && is_ws(&hidden[k - 1]) {
            em.whitespace_run(&hidden[k - 1].text);
        }
        em.push(&h.text);
        after = None;
        last_is_line = Some(h.type_id) == line_comment;
    }
    let seen_comment = hidden.iter().any(|h| !is_ws(h));
    (after.filter(|_| seen_comment), last_is_line)
}

/// Formats a parsed document. Only the document's tokens, tree and comments
/// are used; its original whitespace is ignored except around comments.
pub fn format_document(
    predictor: &Predictor,
    doc: &Document,
    provider: &dyn TreeProvider,
) -> FormatOutput {
    let model = predictor.model();
    let n = doc.len();
    let line_comment = provider.line_comment_type();
    let tags = tag_lists(doc, Some(&model.list_stats));
    let mut em = Emitter {
        out: String::with_capacity(doc.text.len() + 16),
        line: 0,
        col: 0,
        tab_width: provider.tab_width(),
    };
    let mut positions = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n);
    let mut decisions = Vec::with_capacity(n);

    for i in 0..n {
        let (run, after_line_comment) = emit_comments(&mut em, doc.hidden_before(i), line_comment);
        let f = compute_features(doc, i, &tags, &model.pairs, &positions);
        if i == 0 {
            if let Some(run) = run {
                em.whitespace_run(run);
            } else if after_line_comment {
                em.newlines(1);
            }
            decisions.push(None);
        } else {
            let mut ws = predictor.predict_ws(&f);
            if after_line_comment && !ws.is_newline() {
                ws = WsDirective::Newline { n: 1 };
            }
            let mut hpos = None;
            match ws {
                WsDirective::Newline { n } => {
                    em.newlines(n);
                    let h = predictor.predict_hpos(&f);
                    let col = resolve_locator(&doc.tree, i, h, &positions, model.indent_size);
                    em.spaces(col);
                    hpos = Some(h);
                }
                WsDirective::Space { n } => em.spaces(n as usize),
                WsDirective::None => {}
            }
            decisions.push(Some(Decision { ws, hpos }));
        }
        positions.push(Position {
            line: em.line,
            col: em.col,
        });
        features.push(f);
        em.push(&doc.tokens[i].text);
    }

    emit_comments(&mut em, doc.hidden_before(n), line_comment);
    if model.final_newline && !em.out.is_empty() && !em.out.ends_with('\n') {
        em.push("\n");
    }
    FormatOutput {
        text: em.out,
        positions,
        features,
        decisions,
    }
}

/// Parses `text` with `provider` and formats it with `model`.
pub fn format(model: &FormattingModel, text: &str, provider: &dyn TreeProvider) -> Result<String> {
    check_vocabulary(model, provider)?;
    let doc = parse_document(provider, text)?;
    let predictor = Predictor::new(model)?;
    Ok(format_document(&predictor, &doc, provider).text)
}

pub fn check_vocabulary(model: &FormattingModel, provider: &dyn TreeProvider) -> Result<()> {
    let fp = provider.vocabulary().fingerprint();
    if fp != model.vocabulary {
        return Err(Error::VocabularyMismatch {
            model: model.vocabulary.to_string(),
            provider: fp.to_string(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{sample_docs, SAMPLE};
    use crate::model::train;
    use crate::syntax::blocklang::{Blocklang, Variant};

    fn strip(src: &str) -> String {
        let lang = Blocklang::new(Variant::A);
        let doc = parse_document(&lang, src).unwrap();
        doc.tokens
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn model_for(v: Variant) -> (Blocklang, FormattingModel) {
        let (lang, docs) = sample_docs(v);
        let m = train(&docs, &lang, 4).unwrap();
        (lang, m)
    }

    #[test]
    fn training_documents_come_back_unchanged() {
        for v in [Variant::A, Variant::B] {
            let (lang, m) = model_for(v);
            for src in SAMPLE {
                assert_eq!(format(&m, &strip(src), &lang).unwrap(), *src, "{v:?}");
            }
        }
    }

    #[test]
    fn empty_document() {
        let (lang, m) = model_for(Variant::A);
        assert_eq!(format(&m, "", &lang).unwrap(), "");
        assert_eq!(format(&m, "  \n\n", &lang).unwrap(), "");
    }

    #[test]
    fn line_comment_forces_newline() {
        let (lang, m) = model_for(Variant::A);
        let out = format(&m, "x = 1; // one\ny = 2;", &lang).unwrap();
        assert_eq!(out, "x = 1; // one\ny = 2;\n");
        // even when the model would put `y` on the same line
        let lang1 = Blocklang::new(Variant::A);
        let one_line = vec![parse_document(&lang1, "x = 1; y = 2;").unwrap()];
        let m1 = train(&one_line, &lang1, 4).unwrap();
        let out = format(&m1, "x=1; // one\ny=2;", &lang1).unwrap();
        assert_eq!(out, "x = 1; // one\ny = 2;");
    }

    #[test]
    fn comments_keep_their_whitespace() {
        let (lang, m) = model_for(Variant::A);
        let src = "// header\n\nx = f(1, /* two */ 2);\n";
        let out = format(&m, src, &lang).unwrap();
        assert_eq!(out, src);
        let out = format(&m, "x=f(1,/* two */2);", &lang).unwrap();
        assert_eq!(out, "x = f(1,/* two */ 2);\n");
    }

    #[test]
    fn comment_only_document() {
        let (lang, m) = model_for(Variant::A);
        assert_eq!(format(&m, "// nothing\n", &lang).unwrap(), "// nothing\n");
        assert_eq!(format(&m, "/* a */  /* b */", &lang).unwrap(), "/* a */  /* b */\n");
    }

    #[test]
    fn no_trailing_whitespace() {
        let (lang, m) = model_for(Variant::A);
        let out = format(&m, "x = 1;   \n\n   // c\n  \t\ny = 2;   ", &lang).unwrap();
        assert!(out.lines().all(|l| !l.ends_with(' ')), "{out:?}");
    }

    #[test]
    fn vocabulary_must_match() {
        let (_, m) = model_for(Variant::A);
        let b = Blocklang::new(Variant::B);
        assert!(matches!(format(&m, "x = 1;", &b), Err(Error::VocabularyMismatch { .. })));
    }

    #[test]
    fn positions_match_output() {
        let (lang, m) = model_for(Variant::B);
        let doc = parse_document(&lang, &strip(SAMPLE[0])).unwrap();
        let p = Predictor::new(&m).unwrap();
        let out = format_document(&p, &doc, &lang);
        let lines: Vec<&str> = out.text.lines().collect();
        for (t, pos) in doc.tokens.iter().zip(&out.positions) {
            assert!(lines[pos.line][pos.col..].starts_with(&t.text));
        }
    }
}
