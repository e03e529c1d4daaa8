//! Separator-delimited list detection, component tagging, and the
//! regular/oversize length statistics used to classify lists in
//! whitespace-free input.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::syntax::{Document, NodeId, NodeKind, NodeLabel, TokenType};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ListKind {
    #[default]
    NotInList,
    Regular,
    Oversize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    #[default]
    None,
    Prefix,
    FirstMember,
    FirstSeparator,
    Member,
    Separator,
    Suffix,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ListTag {
    pub kind: ListKind,
    pub component: Component,
}

/// `(enclosing rule, repeated child label, separator type)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ListKey {
    pub rule_id: u16,
    pub child: NodeLabel,
    pub sep: TokenType,
}

/// One list occurrence in a document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListInstance {
    pub key: ListKey,
    pub parent: NodeId,
    pub members: Vec<NodeId>,
    pub separators: Vec<usize>,
    pub prefix: Option<usize>,
    pub suffix: Option<usize>,
}

impl ListInstance {
    /// Token range covered by the members and separators.
    pub fn span(&self, doc: &Document) -> (usize, usize) {
        (
            doc.tree.leftmost_leaf(self.members[0]),
            doc.tree.rightmost_leaf(*self.members.last().expect("lists have members")),
        )
    }

    /// Length of the list text with all whitespace removed.
    pub fn text_len(&self, doc: &Document) -> usize {
        let (a, b) = self.span(doc);
        doc.tokens[a..=b].iter().map(|t| t.len()).sum()
    }

    /// Whether the list spans several lines in the document's own layout.
    pub fn split_across_lines(&self, doc: &Document) -> bool {
        let (a, b) = self.span(doc);
        doc.tokens[a].line != doc.tokens[b].line
    }
}

/// Finds all lists, outermost first (pre-order).
///
/// A list is a maximal run of at least two same-label sibling subtrees where
/// each adjacent pair is separated by exactly one literal token, and that
/// separator has the same type throughout the run.
pub fn find_lists(doc: &Document) -> Vec<ListInstance> {
    let mut out = Vec::new();
    if doc.is_empty() {
        return out;
    }
    let tree = &doc.tree;
    for node in tree.preorder() {
        let NodeKind::Rule { label, children } = tree.kind(node) else {
            continue;
        };
        let mut claimed = vec![false; children.len()];
        for start in 0..children.len() {
            if claimed[start] {
                continue;
            }
            let Some(member_label) = tree.label(children[start]) else {
                continue;
            };
            let mut members = vec![children[start]];
            let mut separators = Vec::new();
            let mut sep_type = None;
            let mut pos = start;
            while pos + 2 < children.len() {
                let Some(sep) = tree.leaf_token(children[pos + 1]) else {
                    break;
                };
                let sep_tok = &doc.tokens[sep];
                if !sep_tok.is_literal
                    || sep_type.is_some_and(|t| t != sep_tok.type_id)
                    || tree.label(children[pos + 2]) != Some(member_label)
                {
                    break;
                }
                sep_type = Some(sep_tok.type_id);
                separators.push(sep);
                members.push(children[pos + 2]);
                pos += 2;
            }
            if members.len() < 2 {
                continue;
            }
            for c in claimed.iter_mut().take(pos + 1).skip(start) {
                *c = true;
            }
            let prefix = start
                .checked_sub(1)
                .and_then(|p| tree.leaf_token(children[p]));
            let suffix = children.get(pos + 1).and_then(|c| tree.leaf_token(*c));
            out.push(ListInstance {
                key: ListKey {
                    rule_id: label.rule_id,
                    child: member_label,
                    sep: sep_type.expect("two members imply a separator"),
                },
                parent: node,
                members,
                separators,
                prefix,
                suffix,
            });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListLengthStats {
    pub n_reg: usize,
    pub median_reg: usize,
    pub n_big: usize,
    pub median_big: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<(ListKey, ListLengthStats)>", into = "Vec<(ListKey, ListLengthStats)>")]
pub struct ListStats {
    entries: BTreeMap<ListKey, ListLengthStats>,
}

impl From<Vec<(ListKey, ListLengthStats)>> for ListStats {
    fn from(v: Vec<(ListKey, ListLengthStats)>) -> Self {
        ListStats {
            entries: v.into_iter().collect(),
        }
    }
}

impl From<ListStats> for Vec<(ListKey, ListLengthStats)> {
    fn from(s: ListStats) -> Self {
        s.entries.into_iter().collect()
    }
}

impl ListStats {
    pub fn get(&self, key: &ListKey) -> Option<&ListLengthStats> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: ListKey, stats: ListLengthStats) {
        self.entries.insert(key, stats);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ListKey, &ListLengthStats)> {
        self.entries.iter()
    }
}

/// Lower-middle element after sorting; 0 for an empty population.
pub fn lower_median(values: &mut [usize]) -> usize {
    if values.is_empty() {
        return 0;
    }
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

pub fn collect_list_stats<'a>(corpus: impl IntoIterator<Item = &'a Document>) -> ListStats {
    let mut lengths: BTreeMap<ListKey, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for doc in corpus {
        for list in find_lists(doc) {
            let (reg, big) = lengths.entry(list.key).or_default();
            let ll = list.text_len(doc);
            if list.split_across_lines(doc) {
                big.push(ll);
            } else {
                reg.push(ll);
            }
        }
    }
    let mut stats = ListStats::default();
    for (key, (mut reg, mut big)) in lengths {
        stats.insert(
            key,
            ListLengthStats {
                n_reg: reg.len(),
                median_reg: lower_median(&mut reg),
                n_big: big.len(),
                median_big: lower_median(&mut big),
            },
        );
    }
    stats
}

/// Classifies a list of whitespace-free length `ll` by its distance to the
/// regular and oversize medians, each scaled by the other class's prior.
///
/// Lengths outside the interval spanned by the two medians are clamped to
/// it, which keeps the decision monotone in `ll`.
pub fn predict_oversize(stats: &ListStats, key: &ListKey, ll: usize) -> ListKind {
    let Some(s) = stats.get(key) else {
        return ListKind::Regular;
    };
    if s.n_big == 0 {
        return ListKind::Regular;
    }
    if s.n_reg == 0 {
        return ListKind::Oversize;
    }
    let n = (s.n_reg + s.n_big) as f64;
    let p_reg = s.n_reg as f64 / n;
    let p_big = s.n_big as f64 / n;
    let (lo, hi) = (s.median_reg.min(s.median_big), s.median_reg.max(s.median_big));
    let ll = ll.clamp(lo, hi) as f64;
    let dist_reg = (ll - s.median_reg as f64).powi(2) * (1.0 - p_reg);
    let dist_big = (ll - s.median_big as f64).powi(2) * (1.0 - p_big);
    if dist_big < dist_reg {
        ListKind::Oversize
    } else {
        ListKind::Regular
    }
}

/// Tags every token that plays a role in a list.
///
/// With `stats = None` (training) a list is oversize when it spans several
/// lines of the document; otherwise the oversize classifier decides from the
/// list's whitespace-free length. A token in several lists keeps the
/// outermost association.
pub fn tag_lists(doc: &Document, stats: Option<&ListStats>) -> Vec<ListTag> {
    let mut tags = vec![ListTag::default(); doc.len()];
    for list in find_lists(doc) {
        let kind = match stats {
            None if list.split_across_lines(doc) => ListKind::Oversize,
            None => ListKind::Regular,
            Some(stats) => predict_oversize(stats, &list.key, list.text_len(doc)),
        };
        let mut latch = |token: usize, component: Component| {
            let tag = &mut tags[token];
            if tag.kind == ListKind::NotInList {
                *tag = ListTag { kind, component };
            }
        };
        if let Some(p) = list.prefix {
            latch(p, Component::Prefix);
        }
        for (k, m) in list.members.iter().enumerate() {
            let c = if k == 0 {
                Component::FirstMember
            } else {
                Component::Member
            };
            latch(doc.tree.leftmost_leaf(*m), c);
        }
        for (k, s) in list.separators.iter().enumerate() {
            let c = if k == 0 {
                Component::FirstSeparator
            } else {
                Component::Separator
            };
            latch(*s, c);
        }
        if let Some(s) = list.suffix {
            latch(s, Component::Suffix);
        }
    }
    tags
}
