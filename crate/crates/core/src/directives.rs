//! Whitespace (`ws`) and horizontal-position (`hpos`) directives: capturing
//! them from laid-out documents and executing them against a layout.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{Document, HiddenKind, Channel, Tree};

/// Whitespace injected before a token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WsDirective {
    None,
    Newline { n: u32 },
    Space { n: u32 },
}

impl WsDirective {
    pub fn is_newline(self) -> bool {
        matches!(self, WsDirective::Newline { .. })
    }
}

impl fmt::Display for WsDirective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WsDirective::None => write!(f, "none"),
            WsDirective::Newline { n } => write!(f, "(nl,{n})"),
            WsDirective::Space { n } => write!(f, "(sp,{n})"),
        }
    }
}

/// Column placement for a token that starts a line.
///
/// The located forms name an earlier token by climbing `ancestor_delta`
/// levels above the token's left ancestor and taking the leftmost leaf of
/// child `child` there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HposDirective {
    AlignTo { ancestor_delta: u32, child: u32 },
    IndentFrom { ancestor_delta: u32, child: u32 },
    AlignPrevLine,
    IndentPrevLine,
}

impl fmt::Display for HposDirective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HposDirective::AlignTo {
                ancestor_delta,
                child,
            } => write!(f, "(align,{ancestor_delta},{child})"),
            HposDirective::IndentFrom {
                ancestor_delta,
                child,
            } => write!(f, "(indent,{ancestor_delta},{child})"),
            HposDirective::AlignPrevLine => write!(f, "align"),
            HposDirective::IndentPrevLine => write!(f, "indent"),
        }
    }
}

/// Line and column of a token, original or emitted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub col: usize,
}

pub fn original_positions(doc: &Document) -> Vec<Position> {
    doc.tokens
        .iter()
        .map(|t| Position {
            line: t.line,
            col: t.col,
        })
        .collect()
}

/// Whitespace immediately preceding token `i` in its original layout.
///
/// When comments sit between `t[i-1]` and `t[i]`, the whitespace is measured
/// from the last comment, which is where the formatter resumes after
/// re-emitting comments.
pub fn capture_ws(doc: &Document, i: usize) -> Result<WsDirective> {
    if i == 0 {
        return Err(Error::NoPreviousToken(0));
    }
    let Some(ws) = doc
        .hidden_before(i)
        .last()
        .filter(|h| h.channel == Channel::Hidden(HiddenKind::Whitespace))
    else {
        return Ok(WsDirective::None);
    };
    let newlines = ws.text.bytes().filter(|b| *b == b'\n').count() as u32;
    if newlines > 0 {
        return Ok(WsDirective::Newline { n: newlines });
    }
    match doc.tokens[i].col.saturating_sub(ws.col) as u32 {
        0 => Ok(WsDirective::None),
        n => Ok(WsDirective::Space { n }),
    }
}

/// Column of the first token on the line holding token `i - 1`.
fn prev_line_start(positions: &[Position], i: usize) -> usize {
    let line = positions[i - 1].line;
    let mut k = i - 1;
    while k > 0 && positions[k - 1].line == line {
        k -= 1;
    }
    positions[k].col
}

/// Captures how line-starting token `i` is placed in the original layout.
///
/// Searches upward from the left ancestor for a child whose leftmost leaf
/// precedes `i` and sits at `i`'s column (alignment) or `indent_size`
/// columns to its left (indentation). The smallest ancestor delta wins, then
/// indentation over alignment, then the smallest child index. Without a
/// match the token is placed relative to the previous line.
pub fn capture_hpos(doc: &Document, i: usize, indent_size: usize) -> HposDirective {
    if i == 0 {
        return HposDirective::AlignPrevLine;
    }
    let tree = &doc.tree;
    let col = doc.tokens[i].col;
    let mut ancestor = Some(tree.left_ancestor(i));
    let mut delta = 0u32;
    while let Some(node) = ancestor {
        let mut align = None;
        let mut indent = None;
        for (c, child) in tree.children(node).iter().enumerate() {
            let j = tree.leftmost_leaf(*child);
            if j >= i {
                break;
            }
            let cj = doc.tokens[j].col;
            if align.is_none() && cj == col {
                align = Some(c as u32);
            }
            if indent.is_none() && cj + indent_size == col {
                indent = Some(c as u32);
            }
        }
        if let Some(child) = indent {
            return HposDirective::IndentFrom {
                ancestor_delta: delta,
                child,
            };
        }
        if let Some(child) = align {
            return HposDirective::AlignTo {
                ancestor_delta: delta,
                child,
            };
        }
        ancestor = tree.parent(node);
        delta += 1;
    }
    let positions = original_positions(doc);
    if col > prev_line_start(&positions, i) {
        HposDirective::IndentPrevLine
    } else {
        HposDirective::AlignPrevLine
    }
}

/// The earlier token a located directive refers to, if the locator is valid
/// for token `i` in `tree`.
pub fn locate(tree: &Tree, i: usize, ancestor_delta: u32, child: u32) -> Option<usize> {
    let base = tree.ancestor(tree.left_ancestor(i), ancestor_delta as usize)?;
    let target = *tree.children(base).get(child as usize)?;
    let j = tree.leftmost_leaf(target);
    (j < i).then_some(j)
}

/// Executes `h` for token `i`, returning its column. `positions` must hold
/// the layout of every token before `i`. Invalid locators degrade to the
/// matching previous-line form.
pub fn resolve_locator(
    tree: &Tree,
    i: usize,
    h: HposDirective,
    positions: &[Position],
    indent_size: usize,
) -> usize {
    if i == 0 {
        return 0;
    }
    match h {
        HposDirective::AlignTo {
            ancestor_delta,
            child,
        } => match locate(tree, i, ancestor_delta, child) {
            Some(j) => positions[j].col,
            None => prev_line_start(positions, i),
        },
        HposDirective::IndentFrom {
            ancestor_delta,
            child,
        } => match locate(tree, i, ancestor_delta, child) {
            Some(j) => positions[j].col + indent_size,
            None => prev_line_start(positions, i) + indent_size,
        },
        HposDirective::AlignPrevLine => prev_line_start(positions, i),
        HposDirective::IndentPrevLine => prev_line_start(positions, i) + indent_size,
    }
}
