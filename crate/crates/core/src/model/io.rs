//! Model files: a magic line, a one-line JSON header carrying the format
//! version, vocabulary fingerprints and feature names, then the model body
//! as JSON.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FEATURE_NAMES;
use crate::syntax::VocabFingerprint;

use super::FormattingModel;

pub const MAGIC: &str = "knnfmt-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    provider_id: String,
    vocabulary: VocabFingerprint,
    feature_names: Vec<String>,
}

/// Writes `model`, returning the number of bytes written.
pub fn save_model(model: &FormattingModel, mut out: impl Write) -> Result<usize> {
    let header = Header {
        format_version: FORMAT_VERSION,
        provider_id: model.provider_id.clone(),
        vocabulary: model.vocabulary.clone(),
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let mut buf = format!("{MAGIC}\n").into_bytes();
    serde_json::to_writer(&mut buf, &header).map_err(std::io::Error::from)?;
    buf.push(b'\n');
    serde_json::to_writer(&mut buf, model).map_err(std::io::Error::from)?;
    buf.push(b'\n');
    out.write_all(&buf)?;
    out.flush()?;
    Ok(buf.len())
}

fn corrupt(what: impl std::fmt::Display) -> Error {
    Error::CorruptModel(what.to_string())
}

/// Reads a model. With `expected` set, fails before decoding the body when
/// the model was trained under different vocabularies.
pub fn load_model(mut input: impl BufRead, expected: Option<&VocabFingerprint>) -> Result<FormattingModel> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(corrupt("missing magic line"));
    }

    line.clear();
    input.read_line(&mut line)?;
    let header: serde_json::Value = serde_json::from_str(&line).map_err(|e| corrupt(format!("header: {e}")))?;
    let version = header
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| corrupt("header has no format version"))?;
    if version != FORMAT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: version.min(u32::MAX as u64) as u32,
            expected: FORMAT_VERSION,
        });
    }
    let header: Header = serde_json::from_value(header).map_err(|e| corrupt(format!("header: {e}")))?;
    if let Some(fp) = expected {
        if *fp != header.vocabulary {
            return Err(Error::VocabularyMismatch {
                model: header.vocabulary.to_string(),
                provider: fp.to_string(),
            });
        }
    }
    if header.feature_names != FEATURE_NAMES {
        return Err(corrupt("feature layout differs from this build"));
    }

    let model: FormattingModel = serde_json::from_reader(input).map_err(|e| corrupt(format!("body: {e}")))?;
    if model.vocabulary != header.vocabulary || model.provider_id != header.provider_id {
        return Err(corrupt("header and body disagree"));
    }
    model.validate().map_err(corrupt)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::sample_docs;
    use crate::model::train;
    use crate::syntax::blocklang::{Blocklang, Variant};
    use crate::syntax::TreeProvider;

    fn saved() -> (FormattingModel, Vec<u8>) {
        let (lang, docs) = sample_docs(Variant::A);
        let m = train(&docs, &lang, 4).unwrap();
        let mut buf = Vec::new();
        let n = save_model(&m, &mut buf).unwrap();
        assert_eq!(n, buf.len());
        (m, buf)
    }

    #[test]
    fn round_trip() {
        let (m, buf) = saved();
        let fp = Blocklang::new(Variant::A).vocabulary().fingerprint();
        assert_eq!(load_model(&buf[..], Some(&fp)).unwrap(), m);
        assert_eq!(load_model(&buf[..], None).unwrap(), m);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let (_, buf) = saved();
        for cut in [0, 5, MAGIC.len() + 10, buf.len() / 2, buf.len() - 3] {
            let err = load_model(&buf[..cut], None).unwrap_err();
            assert!(matches!(err, Error::CorruptModel(_)), "cut {cut}: {err}");
        }
    }

    #[test]
    fn other_version_is_rejected() {
        let (_, buf) = saved();
        let text = String::from_utf8(buf).unwrap().replacen("\"format_version\":1", "\"format_version\":7", 1);
        assert!(matches!(
            load_model(text.as_bytes(), None),
            Err(Error::VersionMismatch { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn other_grammar_is_rejected() {
        let (_, buf) = saved();
        let fp = Blocklang::new(Variant::B).vocabulary().fingerprint();
        assert!(matches!(
            load_model(&buf[..], Some(&fp)),
            Err(Error::VocabularyMismatch { .. })
        ));
    }
}
