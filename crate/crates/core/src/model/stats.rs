use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

use serde::Serialize;

use crate::features::Projection;

use super::FormattingModel;

/// Context uniqueness and directive ambiguity over a model's exemplars.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelStats {
    pub exemplars: usize,
    pub line_starts: usize,
    /// Unique ws contexts as a percentage of all exemplars.
    pub ws_unique_pct: f64,
    /// Unique hpos contexts as a percentage of line-starting exemplars.
    pub hpos_unique_pct: f64,
    /// Unique ws contexts seen with more than one directive, in percent.
    pub ws_ambiguous_pct: f64,
    pub hpos_ambiguous_pct: f64,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn uniqueness<D: Eq + Hash>(items: impl Iterator<Item = (Vec<u32>, D)>) -> (usize, f64, f64) {
    let mut seen: HashMap<Vec<u32>, HashSet<D>> = HashMap::new();
    let mut n = 0;
    for (v, d) in items {
        seen.entry(v).or_default().insert(d);
        n += 1;
    }
    let ambiguous = seen.values().filter(|s| s.len() > 1).count();
    (n, pct(seen.len(), n), pct(ambiguous, seen.len()))
}

pub fn model_stats(model: &FormattingModel) -> ModelStats {
    let (exemplars, ws_unique_pct, ws_ambiguous_pct) = uniqueness(
        model
            .exemplars
            .iter()
            .map(|e| (e.features.project(Projection::Ws), e.ws)),
    );
    let (line_starts, hpos_unique_pct, hpos_ambiguous_pct) = uniqueness(
        model
            .exemplars
            .iter()
            .filter_map(|e| Some((e.features.project(Projection::Hpos), e.hpos?))),
    );
    ModelStats {
        exemplars,
        line_starts,
        ws_unique_pct,
        hpos_unique_pct,
        ws_ambiguous_pct,
        hpos_ambiguous_pct,
    }
}

impl fmt::Display for ModelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "exemplars          {}", self.exemplars)?;
        writeln!(f, "line starts        {}", self.line_starts)?;
        writeln!(f, "unique ws ctx      {:.1}%", self.ws_unique_pct)?;
        writeln!(f, "unique hpos ctx    {:.1}%", self.hpos_unique_pct)?;
        writeln!(f, "ambiguous ws ctx   {:.1}%", self.ws_ambiguous_pct)?;
        write!(f, "ambiguous hpos ctx {:.1}%", self.hpos_ambiguous_pct)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::train;
    use crate::syntax::blocklang::{Blocklang, Variant};
    use crate::syntax::parse_document;

    #[test]
    fn duplicate_files_collapse_contexts() {
        let lang = Blocklang::new(Variant::A);
        let src = "x = 1;\ny = 2;\nz = 3;\n";
        let docs: Vec<_> = (0..4).map(|_| parse_document(&lang, src).unwrap()).collect();
        let s = model_stats(&train(&docs, &lang, 4).unwrap());
        assert_eq!(s.exemplars, 4 * 11);
        assert!(s.ws_unique_pct < 25.0);
        assert_eq!(s.ws_ambiguous_pct, 0.0);
        assert_eq!(s.line_starts, 8);
    }

    #[test]
    fn conflicting_styles_are_ambiguous() {
        let lang = Blocklang::new(Variant::A);
        let docs = vec![
            parse_document(&lang, "x = 1;").unwrap(),
            parse_document(&lang, "x=1;").unwrap(),
        ];
        let s = model_stats(&train(&docs, &lang, 4).unwrap());
        assert!(s.ws_ambiguous_pct > 0.0);
        assert_eq!(s.hpos_unique_pct, 0.0);
    }
}
