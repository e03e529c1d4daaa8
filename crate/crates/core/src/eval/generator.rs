//! Seeded synthetic blocklang corpora. Programs are generated as syntax
//! trees and printed mechanically from a [`Style`], so every file of a
//! corpus follows exactly the same layout rules.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Argument lists at most this long (whitespace removed) are generated for
/// single-line use.
pub const REGULAR_MAX: usize = 30;

/// Argument lists generated for wrapping are at least this long.
pub const OVERSIZE_MIN: usize = 55;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Style {
    pub indent: usize,
    /// Put `{` on its own line (and `else` after `}` on the next).
    pub brace_next_line: bool,
    /// Statement-level calls whose argument text exceeds this are wrapped,
    /// one argument per line aligned with the first.
    pub wrap_threshold: usize,
    /// Separate top-level functions from their neighbors by a blank line.
    pub blank_line_around_funcs: bool,
    pub comments: bool,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            indent: 4,
            brace_next_line: false,
            wrap_threshold: 40,
            blank_line_around_funcs: true,
            comments: true,
        }
    }
}

impl Style {
    fn validate(&self) -> Result<()> {
        if self.indent == 0 {
            return Err(Error::InvalidParameter("style indent must be at least 1".into()));
        }
        if !(REGULAR_MAX..OVERSIZE_MIN).contains(&self.wrap_threshold) {
            return Err(Error::InvalidParameter(format!(
                "wrap threshold must lie in {REGULAR_MAX}..{OVERSIZE_MIN}"
            )));
        }
        Ok(())
    }
}

const SHORT_NAMES: &[&str] = &[
    "x", "y", "n", "i", "acc", "sum", "temp", "left", "right", "count", "value", "total", "index", "limit",
    "flag", "result",
];
const LONG_NAMES: &[&str] = &[
    "alphaValue", "betaWeight", "gammaOffset", "deltaScale", "epsilonLimit", "currentIndex",
    "previousTotal", "runningCount", "maximumWidth", "minimumHeight", "pendingItems", "lastSeenValue",
];
const FUNC_NAMES: &[&str] = &[
    "compute", "update", "render", "reset", "combine", "measure", "process", "collect", "filter", "lookup",
    "append", "resize", "scaled", "clamp", "normalize", "accumulate", "dispatch", "validate",
];
const STRINGS: &[&str] = &["\"done\"", "\"hello\"", "\"a b c\"", "\"error: %d\"", "\"\""];
const WORDS: &[&str] = &[
    "keep", "the", "running", "total", "in", "sync", "check", "bounds", "first", "fast", "path", "note",
    "edge", "case", "retry", "later",
];
const ARITH: &[&str] = &["+", "-", "*", "/", "%"];
const COMPARE: &[&str] = &["==", "!=", "<", ">", "<=", ">="];

#[derive(Clone, Debug)]
enum Expr {
    Leaf(String),
    Call(String, Vec<Expr>),
    List(Vec<Expr>),
    Paren(Box<Expr>),
    Unary(&'static str, Box<Expr>),
    Nary(&'static str, Vec<Expr>),
}

#[derive(Clone, Debug)]
enum Else {
    Block(Vec<Stmt>),
    If(Box<If>),
}

#[derive(Clone, Debug)]
struct If {
    cond: Expr,
    then: Vec<Stmt>,
    els: Option<Else>,
}

#[derive(Clone, Debug)]
enum Stmt {
    Comment(String),
    Assign(String, Expr, Option<String>),
    Call(Expr, Option<String>),
    Return(Expr, Option<String>),
    If(If),
    While(Expr, Vec<Stmt>),
}

#[derive(Clone, Debug)]
enum Item {
    Func(String, Vec<String>, Vec<Stmt>),
    Stmt(Stmt),
}

/// Text of `e` with all optional whitespace removed.
fn compact(e: &Expr) -> String {
    match e {
        Expr::Leaf(s) => s.clone(),
        Expr::Call(f, args) => format!("{f}({})", join(args, ",", compact)),
        Expr::List(items) => format!("[{}]", join(items, ",", compact)),
        Expr::Paren(inner) => format!("({})", compact(inner)),
        Expr::Unary(op, inner) => format!("{op}{}", compact(inner)),
        Expr::Nary(op, xs) => join(xs, op, compact),
    }
}

fn spaced(e: &Expr) -> String {
    match e {
        Expr::Leaf(s) => s.clone(),
        Expr::Call(f, args) => format!("{f}({})", join(args, ", ", spaced)),
        Expr::List(items) => format!("[{}]", join(items, ", ", spaced)),
        Expr::Paren(inner) => format!("({})", spaced(inner)),
        Expr::Unary(op, inner) => format!("{op}{}", spaced(inner)),
        Expr::Nary(op, xs) => join(xs, &format!(" {op} "), spaced),
    }
}

fn join(xs: &[Expr], sep: &str, f: fn(&Expr) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(sep)
}

/// Whitespace-free length of a comma-separated list.
fn list_len(xs: &[Expr]) -> usize {
    xs.iter().map(|x| compact(x).len()).sum::<usize>() + xs.len().saturating_sub(1)
}

struct Gen {
    rng: ChaCha8Rng,
    comments: bool,
}

impl Gen {
    fn pick(&mut self, xs: &[&str]) -> String {
        xs.choose(&mut self.rng).expect("non-empty pool").to_string()
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn atom(&mut self) -> Expr {
        match self.rng.gen_range(0..10) {
            0..=5 => Expr::Leaf(self.pick(SHORT_NAMES)),
            6..=8 => Expr::Leaf(self.rng.gen_range(0..1000).to_string()),
            _ => Expr::Leaf(self.pick(STRINGS)),
        }
    }

    /// A short list of atoms that always fits on one line.
    fn short_list(&mut self, min: usize, max: usize) -> Vec<Expr> {
        loop {
            let n = self.rng.gen_range(min..=max);
            let xs: Vec<Expr> = (0..n).map(|_| self.atom()).collect();
            if list_len(&xs) <= REGULAR_MAX {
                return xs;
            }
        }
    }

    fn small_call(&mut self) -> Expr {
        let f = self.pick(FUNC_NAMES);
        Expr::Call(f, self.short_list(0, 3))
    }

    fn expr(&mut self) -> Expr {
        match self.rng.gen_range(0..12) {
            0..=3 => self.atom(),
            4 | 5 => {
                let n = self.rng.gen_range(2..=3);
                let op = *ARITH.choose(&mut self.rng).expect("ops");
                Expr::Nary(op, (0..n).map(|_| self.atom()).collect())
            }
            6 => Expr::Unary("-", Box::new(self.atom())),
            7 => {
                let inner = Expr::Nary("+", vec![self.atom(), self.atom()]);
                Expr::Nary("*", vec![Expr::Paren(Box::new(inner)), self.atom()])
            }
            8 | 9 => self.small_call(),
            _ => Expr::List(self.short_list(2, 3)),
        }
    }

    fn comparison(&mut self) -> Expr {
        let op = *COMPARE.choose(&mut self.rng).expect("ops");
        Expr::Nary(op, vec![self.atom(), self.atom()])
    }

    fn cond(&mut self) -> Expr {
        match self.rng.gen_range(0..6) {
            0..=2 => self.comparison(),
            3 => Expr::Nary("&&", vec![self.comparison(), self.comparison()]),
            4 => Expr::Unary("!", Box::new(Expr::Leaf(self.pick(SHORT_NAMES)))),
            _ => Expr::Leaf(self.pick(SHORT_NAMES)),
        }
    }

    /// A statement-level call: either regular, or long enough to wrap.
    fn stmt_call(&mut self) -> Expr {
        let f = self.pick(FUNC_NAMES);
        if !self.chance(0.3) {
            return Expr::Call(f, self.short_list(0, 3));
        }
        loop {
            let n = self.rng.gen_range(3..=5);
            // wrapped members start with a name so their contexts stay common
            let args: Vec<Expr> = (0..n)
                .map(|_| match self.rng.gen_range(0..4) {
                    0..=2 => Expr::Leaf(self.pick(LONG_NAMES)),
                    _ => self.small_call(),
                })
                .collect();
            if (OVERSIZE_MIN..=100).contains(&list_len(&args)) {
                return Expr::Call(f, args);
            }
        }
    }

    fn trailing(&mut self) -> Option<String> {
        (self.comments && self.chance(0.08)).then(|| self.comment_text())
    }

    fn comment_text(&mut self) -> String {
        let n = self.rng.gen_range(1..=4);
        let words: Vec<String> = (0..n).map(|_| self.pick(WORDS)).collect();
        if self.chance(0.2) {
            format!("/* {} */", words.join(" "))
        } else {
            format!("// {}", words.join(" "))
        }
    }

    fn simple_stmt(&mut self) -> Stmt {
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let name = self.pick(SHORT_NAMES);
                let e = self.expr();
                Stmt::Assign(name, e, self.trailing())
            }
            4 | 5 => {
                let name = self.pick(SHORT_NAMES);
                let e = self.stmt_call();
                Stmt::Assign(name, e, self.trailing())
            }
            _ => {
                let e = self.stmt_call();
                Stmt::Call(e, self.trailing())
            }
        }
    }

    fn if_chain(&mut self, depth: usize, links: usize) -> If {
        let cond = self.cond();
        let then = self.block(depth + 1);
        let els = if links > 1 {
            Some(Else::If(Box::new(self.if_chain(depth, links - 1))))
        } else if self.chance(0.5) {
            Some(Else::Block(self.block(depth + 1)))
        } else {
            None
        };
        If { cond, then, els }
    }

    fn stmt(&mut self, depth: usize) -> Stmt {
        // shallow nesting and fixed-length chains keep each context common
        if depth >= 2 {
            return self.simple_stmt();
        }
        match self.rng.gen_range(0..10) {
            0..=5 => self.simple_stmt(),
            6..=8 => {
                let links = if self.chance(0.5) { 1 } else { 3 };
                Stmt::If(self.if_chain(depth, links))
            }
            _ => {
                let c = self.cond();
                Stmt::While(c, self.block(depth + 1))
            }
        }
    }

    /// One to four statements, optionally preceded by comments.
    fn block(&mut self, depth: usize) -> Vec<Stmt> {
        let n = self.rng.gen_range(1..=4);
        let mut out = Vec::new();
        for _ in 0..n {
            if self.comments && self.chance(0.1) {
                let c = self.comment_text();
                out.push(Stmt::Comment(c));
            }
            out.push(self.stmt(depth));
        }
        out
    }

    fn item(&mut self) -> Item {
        if self.chance(0.7) {
            let name = self.pick(FUNC_NAMES);
            let n = self.rng.gen_range(0..=3);
            let mut params: Vec<String> = Vec::new();
            while params.len() < n {
                let p = self.pick(SHORT_NAMES);
                if !params.contains(&p) {
                    params.push(p);
                }
            }
            let mut body = self.block(1);
            // returns only end function bodies
            if self.chance(0.6) {
                let e = self.expr();
                body.push(Stmt::Return(e, self.trailing()));
            }
            Item::Func(name, params, body)
        } else {
            Item::Stmt(self.simple_stmt())
        }
    }
}

/// Lays out a generated program.
struct Printer<'s> {
    style: &'s Style,
    out: String,
}

impl Printer<'_> {
    fn line(&mut self, depth: usize, text: &str) {
        self.out.push_str(&" ".repeat(depth * self.style.indent));
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn open(&mut self, depth: usize, header: &str) {
        if self.style.brace_next_line {
            self.line(depth, header);
            self.line(depth, "{");
        } else {
            self.line(depth, &format!("{header} {{"));
        }
    }

    fn body(&mut self, stmts: &[Stmt], depth: usize) {
        for s in stmts {
            self.stmt(s, depth);
        }
    }

    /// A statement-level call starting at column `col`.
    fn call_at(&self, e: &Expr, col: usize) -> String {
        let Expr::Call(f, args) = e else {
            return spaced(e);
        };
        if list_len(args) <= self.style.wrap_threshold {
            return spaced(e);
        }
        let first = col + f.len() + 1;
        let sep = format!(",\n{}", " ".repeat(first));
        format!("{f}({})", join(args, &sep, spaced))
    }

    fn simple(&mut self, depth: usize, text: String, trailing: &Option<String>) {
        match trailing {
            Some(c) => self.line(depth, &format!("{text} {c}")),
            None => self.line(depth, &text),
        }
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) {
        let col = depth * self.style.indent;
        match s {
            Stmt::Comment(c) => self.line(depth, c),
            Stmt::Assign(name, e, t) => {
                let rhs = self.call_at(e, col + name.len() + 3);
                self.simple(depth, format!("{name} = {rhs};"), t);
            }
            Stmt::Call(e, t) => {
                let text = self.call_at(e, col);
                self.simple(depth, format!("{text};"), t);
            }
            Stmt::Return(e, t) => self.simple(depth, format!("return {};", spaced(e)), t),
            Stmt::If(chain) => self.if_stmt(chain, depth, ""),
            Stmt::While(c, body) => {
                self.open(depth, &format!("while ({})", spaced(c)));
                self.body(body, depth + 1);
                self.line(depth, "}");
            }
        }
    }

    fn if_stmt(&mut self, s: &If, depth: usize, lead: &str) {
        self.open(depth, &format!("{lead}if ({})", spaced(&s.cond)));
        self.body(&s.then, depth + 1);
        let next_line = self.style.brace_next_line;
        match &s.els {
            None => self.line(depth, "}"),
            Some(Else::Block(b)) => {
                if next_line {
                    self.line(depth, "}");
                    self.open(depth, "else");
                } else {
                    self.line(depth, "} else {");
                }
                self.body(b, depth + 1);
                self.line(depth, "}");
            }
            Some(Else::If(inner)) => {
                if next_line {
                    self.line(depth, "}");
                    self.if_stmt(inner, depth, "else ");
                } else {
                    self.if_stmt(inner, depth, "} else ");
                }
            }
        }
    }

    fn program(&mut self, header: Option<&str>, items: &[Item]) {
        if let Some(h) = header {
            self.line(0, h);
            self.out.push('\n');
        }
        for (k, item) in items.iter().enumerate() {
            let is_func = matches!(item, Item::Func(..));
            let after_func = k > 0 && matches!(items[k - 1], Item::Func(..));
            if k > 0 && self.style.blank_line_around_funcs && (is_func || after_func) {
                self.out.push('\n');
            }
            match item {
                Item::Func(name, params, body) => {
                    self.open(0, &format!("func {name}({})", params.join(", ")));
                    self.body(body, 1);
                    self.line(0, "}");
                }
                Item::Stmt(s) => self.stmt(s, 0),
            }
        }
    }
}

fn render(style: &Style, gen: &mut Gen, min_items: usize, min_lines: usize) -> String {
    let header = (gen.comments && gen.chance(0.5)).then(|| format!("// {}", gen.pick(WORDS)));
    let mut items = Vec::new();
    loop {
        items.push(gen.item());
        if items.len() < min_items {
            continue;
        }
        let mut p = Printer {
            style,
            out: String::new(),
        };
        p.program(header.as_deref(), &items);
        if p.out.lines().count() >= min_lines {
            return p.out;
        }
    }
}

/// `n_files` files named `file_NN.bl`, all laid out in `style`.
pub fn generate_corpus(style: &Style, n_files: usize, seed: u64) -> Result<Vec<(String, String)>> {
    style.validate()?;
    if n_files < 1 {
        return Err(Error::InvalidParameter("at least one file must be generated".into()));
    }
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_files)
        .map(|k| {
            let mut gen = Gen {
                rng: ChaCha8Rng::seed_from_u64(seeds.gen()),
                comments: style.comments,
            };
            (format!("file_{k:02}.bl"), render(style, &mut gen, 4, 300))
        })
        .collect())
}

/// One file of at least `min_lines` lines.
pub fn generate_document(style: &Style, min_lines: usize, seed: u64) -> Result<String> {
    style.validate()?;
    let mut gen = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        comments: style.comments,
    };
    Ok(render(style, &mut gen, 1, min_lines))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::find_lists;
    use crate::syntax::blocklang::{Blocklang, Variant};
    use crate::syntax::{parse_document, TreeProvider};

    #[test]
    fn deterministic_per_seed() {
        let s = Style::default();
        assert_eq!(generate_corpus(&s, 3, 42).unwrap(), generate_corpus(&s, 3, 42).unwrap());
        assert_ne!(generate_corpus(&s, 3, 42).unwrap(), generate_corpus(&s, 3, 43).unwrap());
    }

    #[test]
    fn styles_change_the_layout() {
        let four = generate_corpus(&Style::default(), 2, 1).unwrap();
        let two = generate_corpus(
            &Style {
                indent: 2,
                ..Style::default()
            },
            2,
            1,
        )
        .unwrap();
        assert_ne!(four, two);
    }

    #[test]
    fn every_style_parses_under_both_grammars() {
        for brace_next_line in [false, true] {
            for indent in [2, 4] {
                let style = Style {
                    indent,
                    brace_next_line,
                    ..Style::default()
                };
                for (name, text) in generate_corpus(&style, 5, 9).unwrap() {
                    for v in [Variant::A, Variant::B] {
                        let d = parse_document(&Blocklang::new(v), &text);
                        assert!(d.is_ok(), "{name} {v:?}: {:?}\n{text}", d.err());
                    }
                }
            }
        }
    }

    #[test]
    fn list_lengths_stay_out_of_the_gap() {
        let lang = Blocklang::new(Variant::B);
        for (_, text) in generate_corpus(&Style::default(), 8, 3).unwrap() {
            let d = parse_document(&lang, &text).unwrap();
            for list in find_lists(&d) {
                let ll = list.text_len(&d);
                if list.split_across_lines(&d) {
                    assert!(ll >= OVERSIZE_MIN, "{ll}");
                } else if lang.vocabulary().rule_name(list.key.rule_id) == "argList" {
                    assert!(ll <= REGULAR_MAX, "{ll}");
                }
            }
        }
    }

    #[test]
    fn corpus_has_the_interesting_shapes() {
        let all: String = generate_corpus(&Style::default(), 15, 2024)
            .unwrap()
            .into_iter()
            .map(|(_, t)| t)
            .collect();
        assert!(all.contains("} else if"));
        assert!(all.contains("//"));
        assert!(all.contains(",\n"));
        assert!(all.contains("\n\n"));
    }

    #[test]
    fn large_document() {
        let text = generate_document(&Style::default(), 500, 1).unwrap();
        assert!(text.lines().count() >= 500);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_corpus(&Style::default(), 0, 1).is_err());
        let bad = Style {
            wrap_threshold: 60,
            ..Style::default()
        };
        assert!(generate_corpus(&bad, 1, 1).is_err());
    }
}
