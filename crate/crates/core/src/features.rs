//! The 21-slot token context vector, its ws/hpos projections, and the L0
//! distance between projected vectors.

use serde::{Deserialize, Serialize};

use crate::analysis::{paired, Component, ListKind, ListTag, PairTable};
use crate::directives::Position;
use crate::error::{Error, Result};
use crate::syntax::{ChildIndex, Document, NodeId, NodeLabel, Tree};

pub const NUM_FEATURES: usize = 21;

/// A slot whose referent does not exist.
pub const UNSET: u32 = 0;

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "prev_type",
    "cur_type",
    "prev_starts_line",
    "paired_starts_line",
    "paired_ends_line",
    "list_kind",
    "list_component",
    "child_index",
    "prev_right_ancestor",
    "left_ancestor",
    "left_ancestor_child_index",
    "parent1",
    "parent1_child_index",
    "parent2",
    "parent2_child_index",
    "parent3",
    "parent3_child_index",
    "parent4",
    "parent4_child_index",
    "parent5",
    "parent5_child_index",
];

/// 0-based slots used for whitespace prediction.
pub const WS_SLOTS: [usize; 11] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 11];

/// 0-based slots used for horizontal-position prediction.
pub const HPOS_SLOTS: [usize; 17] = [1, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20];

/// Categorical context of one token. Every slot is a small integer code
/// with [`UNSET`] reserved for missing referents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector(pub [u32; NUM_FEATURES]);

/// Which projection of the vector a prediction uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Projection {
    Ws,
    Hpos,
}

impl Projection {
    pub fn slots(self) -> &'static [usize] {
        match self {
            Projection::Ws => &WS_SLOTS,
            Projection::Hpos => &HPOS_SLOTS,
        }
    }
}

impl FeatureVector {
    pub fn project(&self, p: Projection) -> Vec<u32> {
        p.slots().iter().map(|&s| self.0[s]).collect()
    }
}

pub fn ws_subset(v: &FeatureVector) -> Vec<u32> {
    v.project(Projection::Ws)
}

pub fn hpos_subset(v: &FeatureVector) -> Vec<u32> {
    v.project(Projection::Hpos)
}

/// Fraction of slots on which `a` and `b` differ.
pub fn l0_distance(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(mismatches(a, b) as f64 / a.len() as f64)
}

/// Number of differing slots; the caller guarantees equal lengths.
pub(crate) fn mismatches(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn code_type(ty: u16) -> u32 {
    ty as u32 + 1
}

fn code_bool(b: bool) -> u32 {
    if b {
        2
    } else {
        1
    }
}

fn code_kind(k: ListKind) -> u32 {
    match k {
        ListKind::NotInList => 1,
        ListKind::Regular => 2,
        ListKind::Oversize => 3,
    }
}

fn code_component(c: Component) -> u32 {
    match c {
        Component::None => 1,
        Component::Prefix => 2,
        Component::FirstMember => 3,
        Component::FirstSeparator => 4,
        Component::Member => 5,
        Component::Separator => 6,
        Component::Suffix => 7,
    }
}

fn code_label(l: NodeLabel) -> u32 {
    ((l.rule_id as u32 + 1) << 16) | l.alt as u32
}

fn code_child(tree: &Tree, n: NodeId) -> u32 {
    match tree.child_index(n, true) {
        Ok(ChildIndex::Repeated) => 1,
        Ok(ChildIndex::At(k)) => k as u32 + 2,
        Err(_) => UNSET,
    }
}

fn starts_line(positions: &[Position], j: usize) -> bool {
    j == 0 || positions[j - 1].line != positions[j].line
}

/// Context vector for token `i`.
///
/// `positions` must hold the layout of every token before `i`; the layout
/// of `i` itself and anything after it is never read. Paired-token line
/// tests therefore only look at tokens before `i`.
pub fn compute_features(
    doc: &Document,
    i: usize,
    tags: &[ListTag],
    pairs: &PairTable,
    positions: &[Position],
) -> FeatureVector {
    let tree = &doc.tree;
    let mut f = [UNSET; NUM_FEATURES];

    f[1] = code_type(doc.tokens[i].type_id);
    if i > 0 {
        f[0] = code_type(doc.tokens[i - 1].type_id);
        f[2] = code_bool(starts_line(positions, i - 1));
        f[8] = tree.label(tree.right_ancestor(i - 1)).map_or(UNSET, code_label);
    }
    if let Some(j) = paired(pairs, doc, i) {
        f[3] = code_bool(starts_line(positions, j));
        let ends = j + 1 == i || positions[j + 1].line != positions[j].line;
        f[4] = code_bool(ends);
    }
    let tag = tags.get(i).copied().unwrap_or_default();
    f[5] = code_kind(tag.kind);
    f[6] = code_component(tag.component);
    f[7] = code_child(tree, tree.leaf(i));

    let left = tree.left_ancestor(i);
    f[9] = tree.label(left).map_or(UNSET, code_label);
    f[10] = code_child(tree, left);
    for k in 1..=5 {
        if let Some(p) = tree.ancestor(left, k) {
            f[9 + 2 * k] = tree.label(p).map_or(UNSET, code_label);
            f[10 + 2 * k] = code_child(tree, p);
        }
    }
    FeatureVector(f)
}
