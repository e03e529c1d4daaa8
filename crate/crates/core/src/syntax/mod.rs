//! Language-neutral tokens and parse trees.
//!
//! Every grammar backend implements [`TreeProvider`]; everything downstream
//! (training, formatting, evaluation) only sees [`Document`]s built through
//! that contract. Trees are stored in an arena and are immutable once built.

pub mod blocklang;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type TokenType = u16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HiddenKind {
    Whitespace,
    LineComment,
    BlockComment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    Default,
    Hidden(HiddenKind),
}

/// A lexical unit.
///
/// For default-channel tokens `index` is the position among the document's
/// default-channel tokens. Hidden tokens carry the index of the default
/// token they precede (the token count for trailing hidden text).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub type_id: TokenType,
    pub text: String,
    pub index: usize,
    pub line: usize,
    pub col: usize,
    pub channel: Channel,
    pub is_literal: bool,
}

impl Token {
    pub fn is_default(&self) -> bool {
        self.channel == Channel::Default
    }

    pub fn is_comment(&self) -> bool {
        matches!(
            self.channel,
            Channel::Hidden(HiddenKind::LineComment | HiddenKind::BlockComment)
        )
    }

    pub fn len(&self) -> usize {
        self.text.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }
}

/// Names of token types and grammar rules understood by a provider.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    pub token_names: Vec<String>,
    pub literal: Vec<bool>,
    pub rule_names: Vec<String>,
}

impl Vocabulary {
    pub fn token_name(&self, ty: TokenType) -> &str {
        self.token_names
            .get(ty as usize)
            .map(String::as_str)
            .unwrap_or("?")
    }

    pub fn token_type(&self, name: &str) -> Option<TokenType> {
        self.token_names
            .iter()
            .position(|n| n == name)
            .map(|p| p as TokenType)
    }

    pub fn rule_name(&self, rule: u16) -> &str {
        self.rule_names
            .get(rule as usize)
            .map(String::as_str)
            .unwrap_or("?")
    }

    pub fn rule_id(&self, name: &str) -> Option<u16> {
        self.rule_names
            .iter()
            .position(|n| n == name)
            .map(|p| p as u16)
    }

    pub fn fingerprint(&self) -> VocabFingerprint {
        fn digest(names: &[String]) -> String {
            let mut h = Sha256::new();
            for n in names {
                h.update(n.as_bytes());
                h.update([0u8]);
            }
            h.finalize()
                .iter()
                .take(12)
                .map(|b| format!("{b:02x}"))
                .collect()
        }
        VocabFingerprint {
            tokens: digest(&self.token_names),
            rules: digest(&self.rule_names),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabFingerprint {
    pub tokens: String,
    pub rules: String,
}

impl fmt::Display for VocabFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tokens:{} rules:{}", self.tokens, self.rules)
    }
}

/// Grammar rule plus alternative number, the identity of an interior node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeLabel {
    pub rule_id: u16,
    pub alt: u16,
}

impl NodeLabel {
    pub fn new(rule_id: u16, alt: u16) -> Self {
        debug_assert!(alt >= 1);
        NodeLabel { rule_id, alt }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    fn ix(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
pub enum NodeKind {
    Rule {
        label: NodeLabel,
        children: Vec<NodeId>,
    },
    Leaf {
        token: usize,
    },
}

#[derive(Clone, Debug)]
struct Node {
    kind: NodeKind,
    parent: Option<NodeId>,
    position: usize,
    repeated: bool,
    first_token: usize,
    last_token: usize,
}

/// Position of a node among its siblings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChildIndex {
    At(usize),
    /// A repeated sibling other than the first occurrence of its rule (alternatives ignored).
    Repeated,
}

/// Arena-backed concrete syntax tree whose leaves are the document's
/// default-channel tokens in order.
#[derive(Clone, Debug)]
pub struct Tree {
    nodes: Vec<Node>,
    root: NodeId,
    leaves: Vec<NodeId>,
}

impl Tree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn token_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn kind(&self, n: NodeId) -> &NodeKind {
        &self.nodes[n.ix()].kind
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.nodes[n.ix()].parent
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        match &self.nodes[n.ix()].kind {
            NodeKind::Rule { children, .. } => children,
            NodeKind::Leaf { .. } => &[],
        }
    }

    pub fn label(&self, n: NodeId) -> Option<NodeLabel> {
        match &self.nodes[n.ix()].kind {
            NodeKind::Rule { label, .. } => Some(*label),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn leaf_token(&self, n: NodeId) -> Option<usize> {
        match &self.nodes[n.ix()].kind {
            NodeKind::Leaf { token } => Some(*token),
            NodeKind::Rule { .. } => None,
        }
    }

    pub fn leaf(&self, token: usize) -> NodeId {
        self.leaves[token]
    }

    /// Index of the first token in `n`'s subtree.
    pub fn leftmost_leaf(&self, n: NodeId) -> usize {
        self.nodes[n.ix()].first_token
    }

    /// Index of the last token in `n`'s subtree.
    pub fn rightmost_leaf(&self, n: NodeId) -> usize {
        self.nodes[n.ix()].last_token
    }

    /// Oldest ancestor whose leftmost leaf is `token`, falling back to the
    /// leaf's parent when no ancestor starts with it.
    pub fn left_ancestor(&self, token: usize) -> NodeId {
        self.climb(token, |node| node.first_token == token)
    }

    /// Oldest ancestor whose rightmost leaf is `token`, falling back to the
    /// leaf's parent.
    pub fn right_ancestor(&self, token: usize) -> NodeId {
        self.climb(token, |node| node.last_token == token)
    }

    fn climb(&self, token: usize, edge: impl Fn(&Node) -> bool) -> NodeId {
        let leaf = self.leaves[token];
        let parent = self.nodes[leaf.ix()]
            .parent
            .expect("leaf tokens always have a parent rule node");
        let mut best = parent;
        let mut cur = parent;
        while edge(&self.nodes[cur.ix()]) {
            best = cur;
            match self.nodes[cur.ix()].parent {
                Some(p) => cur = p,
                None => break,
            }
        }
        best
    }

    pub fn child_index(&self, n: NodeId, star_for_repeats: bool) -> Result<ChildIndex> {
        let node = &self.nodes[n.ix()];
        if node.parent.is_none() {
            return Err(Error::NoParent);
        }
        if star_for_repeats && node.repeated {
            Ok(ChildIndex::Repeated)
        } else {
            Ok(ChildIndex::At(node.position))
        }
    }

    /// Plain 0-based position among the parent's children (0 for the root).
    pub fn position(&self, n: NodeId) -> usize {
        self.nodes[n.ix()].position
    }

    /// The `k`-th ancestor of `n` (`k = 0` is `n` itself).
    pub fn ancestor(&self, n: NodeId, k: usize) -> Option<NodeId> {
        let mut cur = n;
        for _ in 0..k {
            cur = self.nodes[cur.ix()].parent?;
        }
        Some(cur)
    }

    /// Depth-first pre-order walk over all nodes.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev().copied());
        }
        out
    }
}

/// Bottom-up tree construction used by parsers.
pub struct TreeBuilder<'a> {
    tokens: &'a [Token],
    nodes: Vec<Node>,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(tokens: &'a [Token]) -> Self {
        TreeBuilder {
            tokens,
            nodes: Vec::with_capacity(tokens.len() * 3),
        }
    }

    pub fn leaf(&mut self, token: usize) -> NodeId {
        self.push(Node {
            kind: NodeKind::Leaf { token },
            parent: None,
            position: 0,
            repeated: false,
            first_token: token,
            last_token: token,
        })
    }

    /// Creates a rule node. Rule nodes must have at least one child; empty
    /// productions are represented by omitting the node.
    pub fn rule(&mut self, label: NodeLabel, children: Vec<NodeId>) -> NodeId {
        assert!(!children.is_empty(), "rule nodes need at least one child");
        let first_token = self.nodes[children[0].ix()].first_token;
        let last_token = self.nodes[children[children.len() - 1].ix()].last_token;
        self.push(Node {
            kind: NodeKind::Rule { label, children },
            parent: None,
            position: 0,
            repeated: false,
            first_token,
            last_token,
        })
    }

    fn push(&mut self, node: Node) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    /// Tree for a document without tokens: a childless root.
    pub fn empty(label: NodeLabel) -> Tree {
        Tree {
            nodes: vec![Node {
                kind: NodeKind::Rule {
                    label,
                    children: Vec::new(),
                },
                parent: None,
                position: 0,
                repeated: false,
                first_token: 0,
                last_token: 0,
            }],
            root: NodeId(0),
            leaves: Vec::new(),
        }
    }

    pub fn finish(mut self, root: NodeId) -> Tree {
                // Repeats are judged by rule alone, as a `statement*` list repeats
        // one rule whatever alternative each element takes.
        #[derive(PartialEq)]
        enum Key {
            Rule(u16),
            Tok(TokenType),
        }

        let mut leaves = vec![NodeId(u32::MAX); self.tokens.len()];
        for id in 0..self.nodes.len() {
            let children = match &self.nodes[id].kind {
                NodeKind::Rule { children, .. } => children.clone(),
                NodeKind::Leaf { token } => {
                    leaves[*token] = NodeId(id as u32);
                    continue;
                }
            };
            let keys: Vec<Key> = children
                .iter()
                .map(|c| match &self.nodes[c.ix()].kind {
                    NodeKind::Rule { label, .. } => Key::Rule(label.rule_id),
                    NodeKind::Leaf { token } => Key::Tok(self.tokens[*token].type_id),
                })
                .collect();
            for (pos, c) in children.iter().enumerate() {
                let node = &mut self.nodes[c.ix()];
                node.parent = Some(NodeId(id as u32));
                node.position = pos;
                node.repeated = keys[..pos].contains(&keys[pos]);
            }
        }
        debug_assert!(leaves.iter().all(|l| l.0 != u32::MAX));
        Tree {
            nodes: self.nodes,
            root,
            leaves,
        }
    }
}

/// A parsed document: normalized text, default-channel tokens, hidden-channel
/// tokens, and the parse tree over the default tokens.
#[derive(Clone, Debug)]
pub struct Document {
    pub text: String,
    pub tokens: Vec<Token>,
    pub hidden: Vec<Token>,
    pub tree: Tree,
    hidden_start: Vec<usize>,
}

impl Document {
    pub fn new(text: String, all_tokens: Vec<Token>, tree: Tree) -> Self {
        let (tokens, hidden): (Vec<Token>, Vec<Token>) =
            all_tokens.into_iter().partition(Token::is_default);
        let mut hidden_start = Vec::with_capacity(tokens.len() + 2);
        let mut h = 0;
        for i in 0..=tokens.len() {
            while h < hidden.len() && hidden[h].index < i {
                h += 1;
            }
            hidden_start.push(h);
        }
        hidden_start.push(hidden.len());
        Document {
            text,
            tokens,
            hidden,
            tree,
            hidden_start,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Hidden tokens between default token `i - 1` and default token `i`
    /// (`i == len()` yields trailing hidden text).
    pub fn hidden_before(&self, i: usize) -> &[Token] {
        &self.hidden[self.hidden_start[i]..self.hidden_start[i + 1]]
    }

    pub fn leftmost_leaf(&self, n: NodeId) -> &Token {
        &self.tokens[self.tree.leftmost_leaf(n)]
    }

    /// Reassembles the document text from both channels.
    pub fn to_source(&self) -> String {
        let mut out = String::with_capacity(self.text.len());
        for i in 0..=self.tokens.len() {
            for h in self.hidden_before(i) {
                out.push_str(&h.text);
            }
            if let Some(t) = self.tokens.get(i) {
                out.push_str(&t.text);
            }
        }
        out
    }
}

/// The contract any parser backend satisfies.
pub trait TreeProvider: Send + Sync {
    /// Registry id, e.g. `blocklang-a`.
    fn id(&self) -> &str;

    fn vocabulary(&self) -> &Vocabulary;

    /// Splits text into default and hidden-channel tokens in source order.
    /// Input line endings are already normalized to `\n`.
    fn tokenize(&self, text: &str) -> Result<Vec<Token>>;

    /// Parses the default-channel tokens.
    fn parse(&self, tokens: &[Token]) -> Result<Tree>;

    /// Token type of single-line comments, if the language has them.
    fn line_comment_type(&self) -> Option<TokenType> {
        None
    }

    /// Column stops used when a tab is measured.
    fn tab_width(&self) -> usize {
        4
    }
}

pub fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// Tokenizes and parses `text` through `provider`.
pub fn parse_document(provider: &dyn TreeProvider, text: &str) -> Result<Document> {
    let text = normalize_newlines(text);
    let all = provider.tokenize(&text)?;
    let defaults: Vec<Token> = all.iter().filter(|t| t.is_default()).cloned().collect();
    let tree = provider.parse(&defaults)?;
    Ok(Document::new(text, all, tree))
}

/// Looks up a built-in provider by id.
pub fn provider_by_id(id: &str) -> Option<Box<dyn TreeProvider>> {
    match id {
        "blocklang-a" => Some(Box::new(blocklang::Blocklang::new(blocklang::Variant::A))),
        "blocklang-b" => Some(Box::new(blocklang::Blocklang::new(blocklang::Variant::B))),
        _ => None,
    }
}

pub const PROVIDER_IDS: &[&str] = &["blocklang-a", "blocklang-b"];

/// A provider with its single-line comment type replaced, for languages
/// whose backend does not declare one.
pub struct LineCommentOverride {
    inner: Box<dyn TreeProvider>,
    line_comment: Option<TokenType>,
}

impl LineCommentOverride {
    /// Fails when `token_name` is not in the provider's vocabulary.
    pub fn new(inner: Box<dyn TreeProvider>, token_name: &str) -> Result<Self> {
        let ty = inner.vocabulary().token_type(token_name).ok_or_else(|| {
            Error::InvalidParameter(format!("{} has no token type named {token_name}", inner.id()))
        })?;
        Ok(LineCommentOverride {
            inner,
            line_comment: Some(ty),
        })
    }
}

impl TreeProvider for LineCommentOverride {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn vocabulary(&self) -> &Vocabulary {
        self.inner.vocabulary()
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>> {
        self.inner.tokenize(text)
    }

    fn parse(&self, tokens: &[Token]) -> Result<Tree> {
        self.inner.parse(tokens)
    }

    fn line_comment_type(&self) -> Option<TokenType> {
        self.line_comment
    }

    fn tab_width(&self) -> usize {
        self.inner.tab_width()
    }
}
