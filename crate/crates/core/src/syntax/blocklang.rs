//! Blocklang: a small C-like block language with two grammar variants.
//!
//! ```text
//! program    : stmt* ;
//! stmt       : funcDef | ifStmt | whileStmt | returnStmt | block | assign | exprStmt ;
//! funcDef    : 'func' ID '(' (param (',' param)*)? ')' block ;
//! block      : '{' stmt* '}' ;
//! ifStmt     : 'if' '(' expr ')' block ('else' (ifStmt | block))? ;
//! whileStmt  : 'while' '(' expr ')' block ;
//! returnStmt : 'return' expr? ';' ;
//! assign     : ID '=' expr ';' ;
//! exprStmt   : expr ';' ;
//! expr       : binary operators || && == != < > <= >= + - * / %, unary - !,
//!              ID, NUM, STRING, call ID '(' args? ')', '(' expr ')', '[' args? ']' ;
//! ```
//!
//! Both variants accept the same language. Variant A builds flat trees:
//! operator levels are n-ary and only materialize when an operator is
//! present, argument and parameter lists hang directly off their owner.
//! Variant B builds deeper, ANTLR-shaped trees: a labelled `statement`
//! wrapper per statement, binary `expr` nodes with one alternative per
//! operator level, and explicit `stmtList`, `paramList`, `argList`,
//! `elseClause` wrapper rules.

use crate::error::{Error, Result};
use crate::syntax::{
    Channel, HiddenKind, NodeId, NodeLabel, Token, TokenType, Tree, TreeBuilder, TreeProvider,
    Vocabulary,
};

pub const ID: TokenType = 0;
pub const NUM: TokenType = 1;
pub const STRING: TokenType = 2;
pub const WS: TokenType = 3;
pub const LINE_COMMENT: TokenType = 4;
pub const BLOCK_COMMENT: TokenType = 5;

const NAMED_TOKENS: [&str; 6] = ["ID", "NUM", "STRING", "WS", "LINE_COMMENT", "BLOCK_COMMENT"];

/// Literal tokens, longest operators first within each prefix group.
const LITERALS: [&str; 28] = [
    "func", "if", "else", "while", "return", "(", ")", "{", "}", "[", "]", ",", ";", "==", "!=",
    "<=", ">=", "&&", "||", "=", "<", ">", "+", "-", "*", "/", "%", "!",
];

const KEYWORDS: usize = 5;

fn literal_type(text: &str) -> Option<TokenType> {
    LITERALS
        .iter()
        .position(|l| *l == text)
        .map(|p| (NAMED_TOKENS.len() + p) as TokenType)
}

fn lit(text: &str) -> TokenType {
    literal_type(text).expect("known literal")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Program,
    Statement,
    StmtList,
    FuncDef,
    ParamList,
    Param,
    Block,
    IfStmt,
    ElseClause,
    WhileStmt,
    ReturnStmt,
    AssignStmt,
    ExprStmt,
    Expr,
    OrExpr,
    AndExpr,
    EqExpr,
    RelExpr,
    AddExpr,
    MulExpr,
    UnaryExpr,
    Call,
    Paren,
    ListLit,
    ArgList,
    Arg,
}

const RULES_A: &[(Rule, &str)] = &[
    (Rule::Program, "program"),
    (Rule::FuncDef, "funcDef"),
    (Rule::Param, "param"),
    (Rule::Block, "block"),
    (Rule::IfStmt, "ifStmt"),
    (Rule::WhileStmt, "whileStmt"),
    (Rule::ReturnStmt, "returnStmt"),
    (Rule::AssignStmt, "assignStmt"),
    (Rule::ExprStmt, "exprStmt"),
    (Rule::Expr, "expr"),
    (Rule::OrExpr, "orExpr"),
    (Rule::AndExpr, "andExpr"),
    (Rule::EqExpr, "eqExpr"),
    (Rule::RelExpr, "relExpr"),
    (Rule::AddExpr, "addExpr"),
    (Rule::MulExpr, "mulExpr"),
    (Rule::UnaryExpr, "unaryExpr"),
    (Rule::Call, "call"),
    (Rule::Paren, "paren"),
    (Rule::ListLit, "listLit"),
];

const RULES_B: &[(Rule, &str)] = &[
    (Rule::Program, "program"),
    (Rule::Statement, "statement"),
    (Rule::StmtList, "stmtList"),
    (Rule::FuncDef, "funcDef"),
    (Rule::ParamList, "paramList"),
    (Rule::Param, "param"),
    (Rule::Block, "block"),
    (Rule::IfStmt, "ifStmt"),
    (Rule::ElseClause, "elseClause"),
    (Rule::WhileStmt, "whileStmt"),
    (Rule::ReturnStmt, "returnStmt"),
    (Rule::AssignStmt, "assignStmt"),
    (Rule::ExprStmt, "exprStmt"),
    (Rule::Expr, "expr"),
    (Rule::ArgList, "argList"),
    (Rule::Arg, "arg"),
];

/// Binary operator levels, loosest first.
const LEVELS: [&[&str]; 6] = [
    &["||"],
    &["&&"],
    &["==", "!="],
    &["<", ">", "<=", ">="],
    &["+", "-"],
    &["*", "/", "%"],
];

const LEVEL_RULES_A: [Rule; 6] = [
    Rule::OrExpr,
    Rule::AndExpr,
    Rule::EqExpr,
    Rule::RelExpr,
    Rule::AddExpr,
    Rule::MulExpr,
];

// Variant B `expr` alternatives.
const ALT_ID: u16 = 1;
const ALT_NUM: u16 = 2;
const ALT_STRING: u16 = 3;
const ALT_CALL: u16 = 4;
const ALT_PAREN: u16 = 5;
const ALT_LIST: u16 = 6;
const ALT_UNARY: u16 = 7;
/// Binary alternatives count down from the tightest level: `*` is 8, `||` is 13.
const ALT_BINARY_TIGHTEST: u16 = 8;

/// Built-in provider for one blocklang grammar variant.
#[derive(Clone, Debug)]
pub struct Blocklang {
    variant: Variant,
    vocab: Vocabulary,
    tab_width: usize,
}

impl Blocklang {
    pub fn new(variant: Variant) -> Self {
        let rules = match variant {
            Variant::A => RULES_A,
            Variant::B => RULES_B,
        };
        let mut token_names: Vec<String> = NAMED_TOKENS.iter().map(|s| s.to_string()).collect();
        token_names.extend(LITERALS.iter().map(|l| format!("'{l}'")));
        let mut literal = vec![false; NAMED_TOKENS.len()];
        literal.extend(std::iter::repeat_n(true, LITERALS.len()));
        Blocklang {
            variant,
            vocab: Vocabulary {
                token_names,
                literal,
                rule_names: rules.iter().map(|(_, n)| n.to_string()).collect(),
            },
            tab_width: 4,
        }
    }

    pub fn with_tab_width(mut self, width: usize) -> Self {
        self.tab_width = width.max(1);
        self
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    fn rule_id(&self, rule: Rule) -> u16 {
        let rules = match self.variant {
            Variant::A => RULES_A,
            Variant::B => RULES_B,
        };
        rules
            .iter()
            .position(|(r, _)| *r == rule)
            .unwrap_or_else(|| panic!("{rule:?} is not part of variant {:?}", self.variant))
            as u16
    }
}

impl TreeProvider for Blocklang {
    fn id(&self) -> &str {
        match self.variant {
            Variant::A => "blocklang-a",
            Variant::B => "blocklang-b",
        }
    }

    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>> {
        Lexer::new(text, self.tab_width).run()
    }

    fn parse(&self, tokens: &[Token]) -> Result<Tree> {
        if tokens.is_empty() {
            return Ok(TreeBuilder::empty(NodeLabel::new(
                self.rule_id(Rule::Program),
                1,
            )));
        }
        let mut p = Parser {
            lang: self,
            tokens,
            pos: 0,
            b: TreeBuilder::new(tokens),
        };
        let root = p.program()?;
        Ok(p.b.finish(root))
    }

    fn line_comment_type(&self) -> Option<TokenType> {
        Some(LINE_COMMENT)
    }

    fn tab_width(&self) -> usize {
        self.tab_width
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    tab_width: usize,
    out: Vec<Token>,
    n_default: usize,
}

impl Lexer {
    fn new(src: &str, tab_width: usize) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: 0,
            col: 0,
            tab_width,
            out: Vec::new(),
            n_default: 0,
        }
    }

    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.pos];
        self.pos += 1;
        match c {
            '\n' => {
                self.line += 1;
                self.col = 0;
            }
            '\t' => self.col += self.tab_width - self.col % self.tab_width,
            _ => self.col += 1,
        }
        c
    }

    fn run(mut self) -> Result<Vec<Token>> {
        while let Some(c) = self.peek(0) {
            let (line, col, start) = (self.line, self.col, self.pos);
            let (type_id, channel) = if c == ' ' || c == '\t' || c == '\n' {
                while matches!(self.peek(0), Some(' ' | '\t' | '\n')) {
                    self.bump();
                }
                (WS, Channel::Hidden(HiddenKind::Whitespace))
            } else if c == '/' && self.peek(1) == Some('/') {
                while !matches!(self.peek(0), None | Some('\n')) {
                    self.bump();
                }
                (LINE_COMMENT, Channel::Hidden(HiddenKind::LineComment))
            } else if c == '/' && self.peek(1) == Some('*') {
                self.bump();
                self.bump();
                loop {
                    match self.peek(0) {
                        None => return Err(Error::UnterminatedComment { line, col }),
                        Some('*') if self.peek(1) == Some('/') => {
                            self.bump();
                            self.bump();
                            break;
                        }
                        Some(_) => {
                            self.bump();
                        }
                    }
                }
                (BLOCK_COMMENT, Channel::Hidden(HiddenKind::BlockComment))
            } else if c.is_ascii_alphabetic() || c == '_' {
                while matches!(self.peek(0), Some(ch) if ch.is_ascii_alphanumeric() || ch == '_') {
                    self.bump();
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                let ty = LITERALS[..KEYWORDS]
                    .iter()
                    .position(|k| *k == word)
                    .map(|p| (NAMED_TOKENS.len() + p) as TokenType)
                    .unwrap_or(ID);
                (ty, Channel::Default)
            } else if c.is_ascii_digit() {
                while matches!(self.peek(0), Some(ch) if ch.is_ascii_digit()) {
                    self.bump();
                }
                if self.peek(0) == Some('.') && matches!(self.peek(1), Some(ch) if ch.is_ascii_digit())
                {
                    self.bump();
                    while matches!(self.peek(0), Some(ch) if ch.is_ascii_digit()) {
                        self.bump();
                    }
                }
                (NUM, Channel::Default)
            } else if c == '"' {
                self.bump();
                loop {
                    match self.peek(0) {
                        None | Some('\n') => {
                            return Err(Error::Syntax {
                                line,
                                col,
                                message: "unterminated string".into(),
                            })
                        }
                        Some('\\') => {
                            self.bump();
                            if self.peek(0).is_some_and(|ch| ch != '\n') {
                                self.bump();
                            }
                        }
                        Some('"') => {
                            self.bump();
                            break;
                        }
                        Some(_) => {
                            self.bump();
                        }
                    }
                }
                (STRING, Channel::Default)
            } else {
                let two: String = self.chars[self.pos..(self.pos + 2).min(self.chars.len())]
                    .iter()
                    .collect();
                let ty = if two.chars().count() == 2 && literal_type(&two).is_some() {
                    self.bump();
                    self.bump();
                    literal_type(&two)
                } else {
                    let ty = literal_type(&c.to_string());
                    if ty.is_some() {
                        self.bump();
                    }
                    ty
                };
                match ty {
                    Some(ty) => (ty, Channel::Default),
                    None => {
                        return Err(Error::Syntax {
                            line,
                            col,
                            message: format!("unexpected character {c:?}"),
                        })
                    }
                }
            };
            let text: String = self.chars[start..self.pos].iter().collect();
            let index = self.n_default;
            if channel == Channel::Default {
                self.n_default += 1;
            }
            self.out.push(Token {
                type_id,
                text,
                index,
                line,
                col,
                channel,
                is_literal: type_id as usize >= NAMED_TOKENS.len(),
            });
        }
        Ok(self.out)
    }
}

struct Parser<'a> {
    lang: &'a Blocklang,
    tokens: &'a [Token],
    pos: usize,
    b: TreeBuilder<'a>,
}

impl<'a> Parser<'a> {
    fn is_a(&self) -> bool {
        self.lang.variant == Variant::A
    }

    fn label(&self, rule: Rule, alt: u16) -> NodeLabel {
        NodeLabel::new(self.lang.rule_id(rule), alt)
    }

    fn node(&mut self, rule: Rule, alt: u16, children: Vec<NodeId>) -> NodeId {
        let label = self.label(rule, alt);
        self.b.rule(label, children)
    }

    fn peek_type(&self, k: usize) -> Option<TokenType> {
        self.tokens.get(self.pos + k).map(|t| t.type_id)
    }

    fn at(&self, text: &str) -> bool {
        self.peek_type(0) == Some(lit(text))
    }

    fn error_here(&self, expected: &str) -> Error {
        match self.tokens.get(self.pos) {
            Some(t) => Error::Syntax {
                line: t.line,
                col: t.col,
                message: format!("expected {expected}, found `{}`", t.text),
            },
            None => {
                let last = self.tokens.last().expect("non-empty token stream");
                Error::Syntax {
                    line: last.line,
                    col: last.col + last.len(),
                    message: format!("expected {expected}, found end of input"),
                }
            }
        }
    }

    fn expect(&mut self, text: &str) -> Result<NodeId> {
        if self.at(text) {
            Ok(self.advance())
        } else {
            Err(self.error_here(&format!("`{text}`")))
        }
    }

    fn expect_type(&mut self, ty: TokenType, what: &str) -> Result<NodeId> {
        if self.peek_type(0) == Some(ty) {
            Ok(self.advance())
        } else {
            Err(self.error_here(what))
        }
    }

    fn advance(&mut self) -> NodeId {
        let leaf = self.b.leaf(self.pos);
        self.pos += 1;
        leaf
    }

    fn program(&mut self) -> Result<NodeId> {
        let mut kids = Vec::new();
        while self.pos < self.tokens.len() {
            kids.push(self.statement()?);
        }
        Ok(self.node(Rule::Program, 1, kids))
    }

    fn statement(&mut self) -> Result<NodeId> {
        let (alt, inner) = if self.at("func") {
            (1, self.func_def()?)
        } else if self.at("if") {
            (2, self.if_stmt()?)
        } else if self.at("while") {
            (3, self.while_stmt()?)
        } else if self.at("return") {
            (4, self.return_stmt()?)
        } else if self.at("{") {
            (5, self.block()?)
        } else if self.peek_type(0) == Some(ID) && self.peek_type(1) == Some(lit("=")) {
            (6, self.assign()?)
        } else {
            let e = self.expr()?;
            let semi = self.expect(";")?;
            (7, self.node(Rule::ExprStmt, 1, vec![e, semi]))
        };
        if self.is_a() {
            Ok(inner)
        } else {
            Ok(self.node(Rule::Statement, alt, vec![inner]))
        }
    }

    fn func_def(&mut self) -> Result<NodeId> {
        let mut kids = vec![self.expect("func")?, self.expect_type(ID, "function name")?];
        kids.push(self.expect("(")?);
        if !self.at(")") {
            let mut params = vec![self.param()?];
            while self.at(",") {
                params.push(self.advance());
                params.push(self.param()?);
            }
            if self.is_a() {
                kids.extend(params);
            } else {
                kids.push(self.node(Rule::ParamList, 1, params));
            }
        }
        kids.push(self.expect(")")?);
        kids.push(self.block()?);
        Ok(self.node(Rule::FuncDef, 1, kids))
    }

    fn param(&mut self) -> Result<NodeId> {
        let id = self.expect_type(ID, "parameter name")?;
        Ok(self.node(Rule::Param, 1, vec![id]))
    }

    fn block(&mut self) -> Result<NodeId> {
        let mut kids = vec![self.expect("{")?];
        let mut stmts = Vec::new();
        while !self.at("}") {
            if self.pos >= self.tokens.len() {
                return Err(self.error_here("`}`"));
            }
            stmts.push(self.statement()?);
        }
        if self.is_a() {
            kids.extend(stmts);
        } else if !stmts.is_empty() {
            kids.push(self.node(Rule::StmtList, 1, stmts));
        }
        kids.push(self.expect("}")?);
        Ok(self.node(Rule::Block, 1, kids))
    }

    fn if_stmt(&mut self) -> Result<NodeId> {
        let mut kids = vec![self.expect("if")?, self.expect("(")?];
        kids.push(self.expr()?);
        kids.push(self.expect(")")?);
        kids.push(self.block()?);
        if !self.at("else") {
            return Ok(self.node(Rule::IfStmt, 1, kids));
        }
        let else_kw = self.advance();
        let (alt, branch) = if self.at("if") {
            (3, self.if_stmt()?)
        } else {
            (2, self.block()?)
        };
        if self.is_a() {
            kids.push(else_kw);
            kids.push(branch);
            Ok(self.node(Rule::IfStmt, alt, kids))
        } else {
            let clause = self.node(Rule::ElseClause, alt - 1, vec![else_kw, branch]);
            kids.push(clause);
            Ok(self.node(Rule::IfStmt, 2, kids))
        }
    }

    fn while_stmt(&mut self) -> Result<NodeId> {
        let mut kids = vec![self.expect("while")?, self.expect("(")?];
        kids.push(self.expr()?);
        kids.push(self.expect(")")?);
        kids.push(self.block()?);
        Ok(self.node(Rule::WhileStmt, 1, kids))
    }

    fn return_stmt(&mut self) -> Result<NodeId> {
        let kw = self.expect("return")?;
        if self.at(";") {
            let semi = self.advance();
            return Ok(self.node(Rule::ReturnStmt, 2, vec![kw, semi]));
        }
        let e = self.expr()?;
        let semi = self.expect(";")?;
        Ok(self.node(Rule::ReturnStmt, 1, vec![kw, e, semi]))
    }

    fn assign(&mut self) -> Result<NodeId> {
        let id = self.advance();
        let eq = self.expect("=")?;
        let e = self.expr()?;
        let semi = self.expect(";")?;
        Ok(self.node(Rule::AssignStmt, 1, vec![id, eq, e, semi]))
    }

    fn expr(&mut self) -> Result<NodeId> {
        let inner = self.level(0)?;
        if self.is_a() {
            Ok(self.node(Rule::Expr, 1, vec![inner]))
        } else {
            Ok(inner)
        }
    }

    fn at_level_op(&self, level: usize) -> bool {
        LEVELS[level].iter().any(|op| self.at(op))
    }

    fn level(&mut self, level: usize) -> Result<NodeId> {
        if level == LEVELS.len() {
            return self.unary();
        }
        let first = self.level(level + 1)?;
        if !self.at_level_op(level) {
            return Ok(first);
        }
        if self.is_a() {
            let mut kids = vec![first];
            while self.at_level_op(level) {
                kids.push(self.advance());
                kids.push(self.level(level + 1)?);
            }
            Ok(self.node(LEVEL_RULES_A[level], 1, kids))
        } else {
            let alt = ALT_BINARY_TIGHTEST + (LEVELS.len() - 1 - level) as u16;
            let mut lhs = first;
            while self.at_level_op(level) {
                let op = self.advance();
                let rhs = self.level(level + 1)?;
                lhs = self.node(Rule::Expr, alt, vec![lhs, op, rhs]);
            }
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<NodeId> {
        if self.at("-") || self.at("!") {
            let op = self.advance();
            let operand = self.unary()?;
            return Ok(if self.is_a() {
                self.node(Rule::UnaryExpr, 1, vec![op, operand])
            } else {
                self.node(Rule::Expr, ALT_UNARY, vec![op, operand])
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<NodeId> {
        match self.peek_type(0) {
            Some(ID) if self.peek_type(1) == Some(lit("(")) => {
                let mut kids = vec![self.advance(), self.advance()];
                self.args(&mut kids, ")")?;
                kids.push(self.expect(")")?);
                Ok(if self.is_a() {
                    self.node(Rule::Call, 1, kids)
                } else {
                    self.node(Rule::Expr, ALT_CALL, kids)
                })
            }
            Some(ty @ (ID | NUM | STRING)) => {
                let leaf = self.advance();
                Ok(if self.is_a() {
                    leaf
                } else {
                    let alt = match ty {
                        ID => ALT_ID,
                        NUM => ALT_NUM,
                        _ => ALT_STRING,
                    };
                    self.node(Rule::Expr, alt, vec![leaf])
                })
            }
            _ if self.at("(") => {
                let open = self.advance();
                let e = self.expr()?;
                let close = self.expect(")")?;
                Ok(if self.is_a() {
                    self.node(Rule::Paren, 1, vec![open, e, close])
                } else {
                    self.node(Rule::Expr, ALT_PAREN, vec![open, e, close])
                })
            }
            _ if self.at("[") => {
                let mut kids = vec![self.advance()];
                self.args(&mut kids, "]")?;
                kids.push(self.expect("]")?);
                Ok(if self.is_a() {
                    self.node(Rule::ListLit, 1, kids)
                } else {
                    self.node(Rule::Expr, ALT_LIST, kids)
                })
            }
            _ => Err(self.error_here("expression")),
        }
    }

    /// Comma-separated expressions up to (not including) `close`.
    fn args(&mut self, kids: &mut Vec<NodeId>, close: &str) -> Result<()> {
        if self.at(close) {
            return Ok(());
        }
        let mut items = vec![self.arg()?];
        while self.at(",") {
            items.push(self.advance());
            items.push(self.arg()?);
        }
        if self.is_a() {
            kids.extend(items);
        } else {
            let list = self.node(Rule::ArgList, 1, items);
            kids.push(list);
        }
        Ok(())
    }

    fn arg(&mut self) -> Result<NodeId> {
        let e = self.expr()?;
        if self.is_a() {
            Ok(e)
        } else {
            Ok(self.node(Rule::Arg, 1, vec![e]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_document, ChildIndex, Document, NodeKind};

    fn parse(v: Variant, src: &str) -> Document {
        parse_document(&Blocklang::new(v), src).unwrap()
    }

    fn texts(doc: &Document) -> Vec<&str> {
        doc.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    fn rule_name(doc: &Document, lang: &Blocklang, n: NodeId) -> String {
        match doc.tree.kind(n) {
            NodeKind::Rule { label, .. } => lang.vocab.rule_name(label.rule_id).to_string(),
            NodeKind::Leaf { token } => doc.tokens[*token].text.clone(),
        }
    }

    #[test]
    fn lexes_operators_longest_first() {
        let lang = Blocklang::new(Variant::A);
        let toks = lang.tokenize("a<=b==c!d").unwrap();
        let t: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(t, ["a", "<=", "b", "==", "c", "!", "d"]);
    }

    #[test]
    fn columns_expand_tabs() {
        let lang = Blocklang::new(Variant::A).with_tab_width(4);
        let toks = lang.tokenize("\tx = 1;\n  \ty;").unwrap();
        let x = toks.iter().find(|t| t.text == "x").unwrap();
        assert_eq!((x.line, x.col), (0, 4));
        let y = toks.iter().find(|t| t.text == "y").unwrap();
        assert_eq!((y.line, y.col), (1, 4));
    }

    #[test]
    fn call_has_two_member_argument_list_in_both_variants() {
        let a = parse(Variant::A, "f(x, y);");
        let call_a = a.tree.left_ancestor(0);
        // exprStmt > expr > call in A
        let lang_a = Blocklang::new(Variant::A);
        let call = a.tree.parent(a.tree.leaf(0)).unwrap();
        assert_eq!(rule_name(&a, &lang_a, call), "call");
        let exprs = a
            .tree
            .children(call)
            .iter()
            .filter(|c| a.tree.label(**c).map(|l| l.rule_id) == lang_a.vocab.rule_id("expr"))
            .count();
        assert_eq!(exprs, 2);
        // the first token of a file starts the whole program
        assert_eq!(rule_name(&a, &lang_a, call_a), "program");

        let lang_b = Blocklang::new(Variant::B);
        let b = parse(Variant::B, "f(x, y);");
        let call = b.tree.parent(b.tree.leaf(0)).unwrap();
        let list = b.tree.children(call)[2];
        assert_eq!(rule_name(&b, &lang_b, list), "argList");
        let args = b.tree.children(list);
        assert_eq!(args.len(), 3);
        assert_eq!(rule_name(&b, &lang_b, args[0]), "arg");
    }

    #[test]
    fn variants_agree_on_leaves_but_not_shape() {
        let src = "if (x) { y = 1; } else { z = 2; }";
        let a = parse(Variant::A, src);
        let b = parse(Variant::B, src);
        assert_eq!(texts(&a), texts(&b));
        assert!(b.tree.node_count() > a.tree.node_count());
        for d in [&a, &b] {
            for (i, _) in d.tokens.iter().enumerate() {
                let leaf = d.tree.leaf(i);
                assert_eq!(d.tree.leaf_token(leaf), Some(i));
            }
        }
    }

    #[test]
    fn missing_expression_is_a_syntax_error() {
        let err = parse_document(&Blocklang::new(Variant::A), "x = ;").unwrap_err();
        match err {
            Error::Syntax { line, col, .. } => assert_eq!((line, col), (0, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unterminated_block_comment() {
        let err = parse_document(&Blocklang::new(Variant::B), "x = 1; /* open").unwrap_err();
        assert!(matches!(err, Error::UnterminatedComment { line: 0, col: 7 }));
    }

    #[test]
    fn empty_document_parses() {
        let d = parse(Variant::A, "");
        assert!(d.is_empty());
        assert_eq!(d.to_source(), "");
        let d = parse(Variant::B, "  // only a comment\n");
        assert!(d.is_empty());
        assert_eq!(d.hidden.len(), 3);
    }

    #[test]
    fn round_trip_reproduces_text() {
        let src = "func f(a, b) {\n\treturn a + b; // sum\n}\n/* tail */\n";
        for v in [Variant::A, Variant::B] {
            assert_eq!(parse(v, src).to_source(), src);
        }
    }

    #[test]
    fn hidden_tokens_attach_between_default_tokens() {
        let d = parse(Variant::A, "x = 1; // c\ny = 2;");
        let before_y = d.hidden_before(4);
        let kinds: Vec<_> = before_y.iter().map(|t| t.type_id).collect();
        assert_eq!(kinds, [WS, LINE_COMMENT, WS]);
        assert!(d.hidden_before(1).iter().all(|t| t.type_id == WS));
    }

    #[test]
    fn star_marks_repeated_statements() {
        let d = parse(Variant::A, "{ a = 1; b = 2; c = 3; }");
        let block = d.tree.root();
        let block = d.tree.children(block)[0];
        let kids = d.tree.children(block);
        assert_eq!(d.tree.child_index(kids[1], true).unwrap(), ChildIndex::At(1));
        assert_eq!(d.tree.child_index(kids[2], true).unwrap(), ChildIndex::Repeated);
        assert_eq!(d.tree.child_index(kids[3], true).unwrap(), ChildIndex::Repeated);
        assert_eq!(d.tree.child_index(kids[4], false).unwrap(), ChildIndex::At(4));
        assert!(matches!(
            d.tree.child_index(d.tree.root(), false),
            Err(Error::NoParent)
        ));
    }
}
