//! Named collections of parsed documents.

use std::fs;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::syntax::{parse_document, Document, TreeProvider};

#[derive(Clone, Debug)]
pub struct Corpus {
    pub names: Vec<String>,
    pub docs: Vec<Document>,
}

impl Corpus {
    /// Parses in-memory sources; errors name the offending source.
    pub fn from_texts<N, T>(provider: &dyn TreeProvider, texts: impl IntoIterator<Item = (N, T)>) -> Result<Corpus>
    where
        N: Into<String>,
        T: AsRef<str>,
    {
        let mut names = Vec::new();
        let mut docs = Vec::new();
        for (name, text) in texts {
            let name = name.into();
            let doc = parse_document(provider, text.as_ref()).map_err(|e| e.in_file(&name))?;
            names.push(name);
            docs.push(doc);
        }
        Ok(Corpus { names, docs })
    }

    /// Loads every file under `dir` (recursively, hidden entries skipped)
    /// whose extension is `ext`, or every file when `ext` is `None`.
    /// Files are ordered by path.
    pub fn load_dir(provider: &dyn TreeProvider, dir: &Path, ext: Option<&str>) -> Result<Corpus> {
        let texts = source_files(dir, ext)?
            .into_iter()
            .map(|p| {
                let text = fs::read_to_string(&p).map_err(|e| Error::from(e).in_file(&p))?;
                let name = p.strip_prefix(dir).unwrap_or(&p).display().to_string();
                Ok((name, text))
            })
            .collect::<Result<Vec<_>>>()?;
        Corpus::from_texts(provider, texts)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

/// Sorted regular files under `dir` matching `ext`.
pub fn source_files(dir: &Path, ext: Option<&str>) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::InvalidParameter(format!("{} is not a directory", dir.display())));
    }
    let mut files = Vec::new();
    let walk = WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    for entry in walk {
        let entry = entry.map_err(|e| Error::Io(e.into()))?;
        let wanted = ext.is_none_or(|x| entry.path().extension().is_some_and(|e| e == x));
        if entry.file_type().is_file() && wanted {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::blocklang::{Blocklang, Variant};

    #[test]
    fn loads_sorted_and_filters() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.bl"), "y = 2;\n").unwrap();
        fs::write(dir.path().join("a.bl"), "x = 1;\n").unwrap();
        fs::write(dir.path().join("notes.txt"), "not code").unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        fs::write(dir.path().join("sub/c.bl"), "z = 3;\n").unwrap();
        fs::write(dir.path().join(".hidden.bl"), "w = 4;\n").unwrap();
        let lang = Blocklang::new(Variant::A);
        let c = Corpus::load_dir(&lang, dir.path(), Some("bl")).unwrap();
        assert_eq!(c.names, ["a.bl", "b.bl", "sub/c.bl"]);
    }

    #[test]
    fn parse_errors_name_the_file() {
        let lang = Blocklang::new(Variant::A);
        let err = Corpus::from_texts(&lang, [("ok.bl", "x = 1;"), ("bad.bl", "x = ;")]).unwrap_err();
        assert!(err.to_string().starts_with("bad.bl: syntax error at 0:4"), "{err}");
    }
}
