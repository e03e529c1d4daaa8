//! Corpus preprocessing: paired tokens and list structure.

pub mod lists;
pub mod pairs;

pub use lists::{
    collect_list_stats, find_lists, predict_oversize, tag_lists, Component, ListKey, ListKind,
    ListLengthStats, ListStats, ListTag,
};
pub use pairs::{compute_pairs, paired, PairTable};
