//! Plausible paired tokens (braces, brackets, `:`/`;`...) inferred per rule.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::syntax::{Document, NodeKind, NodeLabel, TokenType};

/// Token-text pairs preferred when a token has several viable partners.
pub const COMMON_PAIRS: [(&str, &str); 4] = [("(", ")"), ("[", "]"), ("{", "}"), ("<", ">")];

/// For each rule label, the ordered (left, right) literal token type pairs
/// that appeared as non-repeated siblings somewhere in the corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<PairEntry>", into = "Vec<PairEntry>")]
pub struct PairTable {
    pairs: BTreeMap<NodeLabel, BTreeSet<(TokenType, TokenType)>>,
}

#[derive(Serialize, Deserialize)]
struct PairEntry {
    label: NodeLabel,
    pairs: Vec<(TokenType, TokenType)>,
}

impl From<Vec<PairEntry>> for PairTable {
    fn from(entries: Vec<PairEntry>) -> Self {
        PairTable {
            pairs: entries
                .into_iter()
                .map(|e| (e.label, e.pairs.into_iter().collect()))
                .collect(),
        }
    }
}

impl From<PairTable> for Vec<PairEntry> {
    fn from(t: PairTable) -> Self {
        t.pairs
            .into_iter()
            .map(|(label, pairs)| PairEntry {
                label,
                pairs: pairs.into_iter().collect(),
            })
            .collect()
    }
}

impl PairTable {
    pub fn get(&self, label: NodeLabel) -> Option<&BTreeSet<(TokenType, TokenType)>> {
        self.pairs.get(&label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &NodeLabel> {
        self.pairs.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.values().all(BTreeSet::is_empty)
    }
}

pub fn compute_pairs<'a>(corpus: impl IntoIterator<Item = &'a Document>) -> PairTable {
    let mut pairs: BTreeMap<NodeLabel, BTreeSet<(TokenType, TokenType)>> = BTreeMap::new();
    let mut repeats: BTreeMap<NodeLabel, BTreeSet<TokenType>> = BTreeMap::new();

    for doc in corpus {
        if doc.is_empty() {
            continue;
        }
        for node in doc.tree.preorder() {
            let NodeKind::Rule { label, children } = doc.tree.kind(node) else {
                continue;
            };
            let literals: Vec<TokenType> = children
                .iter()
                .filter_map(|c| doc.tree.leaf_token(*c))
                .map(|t| &doc.tokens[t])
                .filter(|t| t.is_literal)
                .map(|t| t.type_id)
                .collect();
            let entry = pairs.entry(*label).or_default();
            let reps = repeats.entry(*label).or_default();
            for (i, &s) in literals.iter().enumerate() {
                for &t in &literals[i + 1..] {
                    entry.insert((s, t));
                }
                if literals[..i].contains(&s) {
                    reps.insert(s);
                }
            }
        }
    }

    for (label, set) in pairs.iter_mut() {
        if let Some(reps) = repeats.get(label) {
            set.retain(|(s, t)| !reps.contains(s) && !reps.contains(t));
        }
    }
    pairs.retain(|_, set| !set.is_empty());
    PairTable { pairs }
}

/// The token that `token` closes or continues, e.g. the `{` for a `}`.
pub fn paired(table: &PairTable, doc: &Document, token: usize) -> Option<usize> {
    let tree = &doc.tree;
    let parent = tree.parent(tree.leaf(token))?;
    let label = tree.label(parent)?;
    let mine = table.get(label)?;
    let ty = doc.tokens[token].type_id;

    let siblings: Vec<usize> = tree
        .children(parent)
        .iter()
        .filter_map(|c| tree.leaf_token(*c))
        .collect();
    let text_of = |ty: TokenType| {
        siblings
            .iter()
            .find(|&&s| doc.tokens[s].type_id == ty)
            .map(|&s| doc.tokens[s].text.as_str())
    };

    // sorted by left type: the set is ordered by (left, right) and right is fixed
    let viable: Vec<TokenType> = mine
        .iter()
        .filter(|(_, t)| *t == ty)
        .map(|(s, _)| *s)
        .filter(|s| siblings.iter().any(|&j| doc.tokens[j].type_id == *s))
        .collect();

    let my_text = doc.tokens[token].text.as_str();
    let chosen = match viable.as_slice() {
        [] => return None,
        [only] => *only,
        _ => viable
            .iter()
            .copied()
            .find(|&s| {
                let st = text_of(s).unwrap_or("");
                COMMON_PAIRS.contains(&(st, my_text))
            })
            .or_else(|| {
                viable.iter().copied().find(|&s| {
                    text_of(s).is_some_and(|st| st.chars().count() == 1)
                        && my_text.chars().count() == 1
                })
            })
            .unwrap_or(viable[0]),
    };

    siblings
        .iter()
        .rev()
        .copied()
        .find(|&j| j < token && doc.tokens[j].type_id == chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::blocklang::{Blocklang, Variant};
    use crate::syntax::{parse_document, TreeProvider};

    fn docs(v: Variant, srcs: &[&str]) -> (Blocklang, Vec<Document>) {
        let lang = Blocklang::new(v);
        let docs = srcs
            .iter()
            .map(|s| parse_document(&lang, s).unwrap())
            .collect();
        (lang, docs)
    }

    fn ty(lang: &Blocklang, name: &str) -> TokenType {
        lang.vocabulary().token_type(name).unwrap()
    }

    fn label(lang: &Blocklang, rule: &str, alt: u16) -> NodeLabel {
        NodeLabel::new(lang.vocabulary().rule_id(rule).unwrap(), alt)
    }

    #[test]
    fn if_rule_pairs_parens_and_block_rule_pairs_braces() {
        let (lang, docs) = docs(Variant::A, &["if (x) { y; }"]);
        let table = compute_pairs(&docs);
        let ifs = table.get(label(&lang, "ifStmt", 1)).unwrap();
        assert!(ifs.contains(&(ty(&lang, "'('"), ty(&lang, "')'"))));
        assert!(ifs.contains(&(ty(&lang, "'if'"), ty(&lang, "')'"))));
        let block = table.get(label(&lang, "block", 1)).unwrap();
        assert!(block.contains(&(ty(&lang, "'{'"), ty(&lang, "'}'"))));
    }

    #[test]
    fn repeated_separator_is_never_paired() {
        // `,` repeats among the children of `call` in the second document
        let (lang, docs) = docs(Variant::A, &["f(a, b);", "g(a, b, c);"]);
        let table = compute_pairs(&docs);
        let comma = ty(&lang, "','");
        let call = table.get(label(&lang, "call", 1)).unwrap();
        assert!(call.iter().all(|(s, t)| *s != comma && *t != comma));
        assert!(call.contains(&(ty(&lang, "'('"), ty(&lang, "')'"))));
    }

    #[test]
    fn single_literal_rules_have_no_pairs() {
        let (lang, docs) = docs(Variant::A, &["x = -y;"]);
        let table = compute_pairs(&docs);
        assert!(table.get(label(&lang, "unaryExpr", 1)).is_none());
    }

    #[test]
    fn corpus_order_does_not_matter() {
        let srcs = ["f(a, b);", "if (x) { y = [1, 2]; } else { z; }", "return (a);"];
        let (_, fwd) = docs(Variant::B, &srcs);
        let rev_srcs: Vec<&str> = srcs.iter().rev().copied().collect();
        let (_, rev) = docs(Variant::B, &rev_srcs);
        assert_eq!(compute_pairs(&fwd), compute_pairs(&rev));
    }

    #[test]
    fn closing_brace_finds_its_opener() {
        let (_, docs) = docs(Variant::A, &["func reset() {x = 0;}"]);
        let table = compute_pairs(&docs);
        let doc = &docs[0];
        let close = doc.tokens.iter().position(|t| t.text == "}").unwrap();
        let open = doc.tokens.iter().position(|t| t.text == "{").unwrap();
        assert_eq!(paired(&table, doc, close), Some(open));
        let rparen = doc.tokens.iter().position(|t| t.text == ")").unwrap();
        assert_eq!(paired(&table, doc, rparen), Some(2));
    }

    #[test]
    fn common_pair_wins_over_other_viable_partners() {
        // `)` under ifStmt may pair with `if` or `(`
        let (_, docs) = docs(Variant::A, &["if (x) { y; }"]);
        let table = compute_pairs(&docs);
        let doc = &docs[0];
        assert_eq!(paired(&table, doc, 3), Some(1));
    }

    #[test]
    fn no_viable_partner() {
        let (_, docs) = docs(Variant::A, &["x = 1;"]);
        let table = compute_pairs(&docs);
        // `x` is not a literal and `=` opens nothing
        assert_eq!(paired(&table, &docs[0], 0), None);
        assert_eq!(paired(&table, &docs[0], 1), None);
    }
}
