//! Textual language for (possibilistic) multi-context systems.
//!
//! ```text
//! % comment
//! context c1 asp {
//!   atoms a, b, c.
//!   choice a [0.9] | b.
//!   :- a, not b.
//!   c :- a, not b [0.8].
//! }
//! (c1:b) :- (c2:x), not (c3:y) [0.7].
//! ```
//!
//! Degrees default to 1. Contexts default to answer-set semantics; `minimal`
//! selects minimal models of definite programs with choice clauses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::decimal::{Decimal, Degree};
use crate::logic::{Atom, AtomSet, Constraint, LogicError, PossChoice, PossProgram, PossRule, Rule, Semantics};
use crate::mcs::{BridgeRule, Mcs, QualifiedAtom};
use crate::poss::{PossBridgeRule, PossError, PossMcs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{}:{}: {message}", at.line, at.column)]
    Syntax { at: Span, message: String },
    #[error("{}:{}: degree {value} is outside [0, 1]", at.line, at.column)]
    DegreeOutOfRange { at: Span, value: String },
    #[error("{}:{}: unknown context `{name}`", at.line, at.column)]
    UnknownContext { at: Span, name: String },
    #[error("{}:{}: context `{name}` declared twice", at.line, at.column)]
    DuplicateContext { at: Span, name: String },
    #[error("{}:{}: bridge head `{atom}` is not in the alphabet of context `{context}`", at.line, at.column)]
    HeadOutsideAlphabet { at: Span, context: String, atom: Atom },
    #[error("{}:{}: {source}", at.line, at.column)]
    Logic { at: Span, source: LogicError },
    #[error(transparent)]
    System(#[from] PossError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    ColonDash,
    Comma,
    Dot,
    Bar,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number {s}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::ColonDash => "`:-`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Bar => "`|`".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let at = Span { line, column: col };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                col += 1;
                i += 1;
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            _ => {}
        }
        let (tok, len) = match c {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            '|' => (Tok::Bar, 1),
            ':' if chars.get(i + 1) == Some(&'-') => (Tok::ColonDash, 2),
            ':' => (Tok::Colon, 1),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let len = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').count();
                (Tok::Ident(chars[i..i + len].iter().collect()), len)
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut len = 1 + chars[i + 1..].iter().take_while(|c| c.is_ascii_digit()).count();
                if chars.get(i + len) == Some(&'.') && chars.get(i + len + 1).is_some_and(char::is_ascii_digit) {
                    len += 1 + chars[i + len + 1..].iter().take_while(|c| c.is_ascii_digit()).count();
                }
                (Tok::Number(chars[i..i + len].iter().collect()), len)
            }
            other => {
                return Err(ParseError::Syntax { at, message: format!("unexpected character `{other}`") });
            }
        };
        out.push((tok, at));
        i += len;
        col += len;
    }
    Ok(out)
}

struct RawBridge {
    at: Span,
    target: (String, Span),
    head: Atom,
    body: Vec<(bool, String, Span, Atom)>,
    degree: Degree,
}

struct RawContext {
    name: String,
    at: Span,
    semantics: Semantics,
    declared: AtomSet,
    rules: Vec<PossRule>,
    choices: Vec<PossChoice>,
    constraints: Vec<Constraint>,
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    end: Span,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map_or(self.end, |(_, s)| *s)
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let found = self.peek().map_or("end of input".to_string(), Tok::describe);
        Err(ParseError::Syntax { at: self.span(), message: format!("expected {expected}, found {found}") })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(&tok.describe())
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        let at = self.span();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, at))
            }
            _ => self.error(what),
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let (name, at) = self.ident("an atom")?;
        if matches!(name.as_str(), "not" | "choice" | "atoms" | "context") {
            return Err(ParseError::Syntax { at, message: format!("`{name}` is a keyword") });
        }
        Atom::new(&name).map_err(|source| ParseError::Logic { at, source })
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn degree(&mut self) -> Result<Degree, ParseError> {
        if !self.eat(&Tok::LBracket) {
            return Ok(Degree::ONE);
        }
        let at = self.span();
        let text = match self.peek() {
            Some(Tok::Number(s)) => s.clone(),
            _ => return self.error("a degree"),
        };
        self.pos += 1;
        let value: Decimal = text
            .parse()
            .map_err(|e| ParseError::Syntax { at, message: format!("bad degree `{text}`: {e}") })?;
        let d = Degree::new(value).map_err(|_| ParseError::DegreeOutOfRange { at, value: text })?;
        self.expect(Tok::RBracket)?;
        Ok(d)
    }

    /// `a, not b, ...` up to (not including) a degree or the final dot.
    fn local_body(&mut self) -> Result<(AtomSet, AtomSet), ParseError> {
        let (mut pos, mut neg) = (AtomSet::new(), AtomSet::new());
        loop {
            let negated = self.is_keyword("not");
            if negated {
                self.pos += 1;
            }
            let a = self.atom()?;
            if negated {
                neg.insert(a);
            } else {
                pos.insert(a);
            }
            if !self.eat(&Tok::Comma) {
                return Ok((pos, neg));
            }
        }
    }

    fn context(&mut self) -> Result<RawContext, ParseError> {
        self.pos += 1;
        let (name, at) = self.ident("a context name")?;
        let semantics = if self.eat(&Tok::Ident("asp".into())) {
            Semantics::AnswerSet
        } else if self.eat(&Tok::Ident("minimal".into())) {
            Semantics::ChoiceMinimalModel
        } else {
            Semantics::AnswerSet
        };
        self.expect(Tok::LBrace)?;
        let mut ctx = RawContext {
            name,
            at,
            semantics,
            declared: AtomSet::new(),
            rules: Vec::new(),
            choices: Vec::new(),
            constraints: Vec::new(),
        };
        while !self.eat(&Tok::RBrace) {
            if self.peek().is_none() {
                return self.error("`}`");
            }
            let at = self.span();
            if self.is_keyword("atoms") {
                self.pos += 1;
                loop {
                    ctx.declared.insert(self.atom()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            } else if self.is_keyword("choice") {
                self.pos += 1;
                let mut alts = Vec::new();
                loop {
                    let a = self.atom()?;
                    alts.push((a, self.degree()?));
                    if !self.eat(&Tok::Bar) {
                        break;
                    }
                }
                ctx.choices.push(PossChoice::new(alts).map_err(|source| ParseError::Logic { at, source })?);
            } else if self.eat(&Tok::ColonDash) {
                let (pos, neg) = self.local_body()?;
                ctx.constraints.push(Constraint::new(pos, neg));
            } else {
                let head = self.atom()?;
                let (pos, neg) = if self.eat(&Tok::ColonDash) { self.local_body()? } else { Default::default() };
                let d = self.degree()?;
                ctx.rules.push(PossRule::new(Rule::new(head, pos, neg), d));
            }
            self.expect(Tok::Dot)?;
        }
        Ok(ctx)
    }

    fn qualified(&mut self) -> Result<(String, Span, Atom), ParseError> {
        self.expect(Tok::LParen)?;
        let (ctx, at) = self.ident("a context name")?;
        self.expect(Tok::Colon)?;
        let a = self.atom()?;
        self.expect(Tok::RParen)?;
        Ok((ctx, at, a))
    }

    fn bridge(&mut self) -> Result<RawBridge, ParseError> {
        let at = self.span();
        let (target, target_at, head) = self.qualified()?;
        let mut body = Vec::new();
        if self.eat(&Tok::ColonDash) {
            loop {
                let negated = self.is_keyword("not");
                if negated {
                    self.pos += 1;
                }
                let (c, c_at, a) = self.qualified()?;
                body.push((negated, c, c_at, a));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let degree = self.degree()?;
        self.expect(Tok::Dot)?;
        Ok(RawBridge { at, target: (target, target_at), head, body, degree })
    }
}

/// A parsed system with the source positions of its parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsDocument {
    pub system: PossMcs,
    pub context_spans: Vec<Span>,
    pub bridge_spans: Vec<Span>,
    /// Whether any degree other than 1 appears.
    pub uncertain: bool,
}

impl McsDocument {
    pub fn classical(&self) -> Mcs {
        self.system.classical()
    }
}

pub fn parse_mcs(text: &str) -> Result<McsDocument, ParseError> {
    let toks = lex(text)?;
    let end = Span { line: text.lines().count().max(1), column: text.lines().last().map_or(1, |l| l.chars().count() + 1) };
    let mut p = Parser { toks, pos: 0, end };
    let mut contexts: Vec<RawContext> = Vec::new();
    let mut bridges = Vec::new();
    while let Some(tok) = p.peek() {
        match tok {
            Tok::Ident(s) if s == "context" => {
                let c = p.context()?;
                if contexts.iter().any(|o| o.name == c.name) {
                    return Err(ParseError::DuplicateContext { at: c.at, name: c.name });
                }
                contexts.push(c);
            }
            Tok::LParen => bridges.push(p.bridge()?),
            _ => return p.error("`context` or a bridge rule"),
        }
    }

    let index: BTreeMap<&str, usize> = contexts.iter().enumerate().map(|(i, c)| (c.name.as_str(), i)).collect();
    let resolve = |name: &str, at: Span| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| ParseError::UnknownContext { at, name: name.to_string() })
    };
    let mut uncertain = false;
    let mut poss_bridges = Vec::new();
    let mut bridge_spans = Vec::new();
    for b in &bridges {
        let target = resolve(&b.target.0, b.target.1)?;
        let (mut pos, mut neg) = (BTreeSet::new(), BTreeSet::new());
        for (negated, c, at, a) in &b.body {
            let q = QualifiedAtom::new(resolve(c, *at)?, a.clone());
            if *negated {
                neg.insert(q);
            } else {
                pos.insert(q);
            }
        }
        uncertain |= b.degree != Degree::ONE;
        poss_bridges.push(PossBridgeRule::new(BridgeRule::new(target, b.head.clone(), pos, neg), b.degree));
        bridge_spans.push(b.at);
    }

    let mut programs = Vec::new();
    for c in contexts.iter() {
        uncertain |= c.rules.iter().any(|r| r.necessity != Degree::ONE)
            || c.choices.iter().flat_map(|ch| ch.alternatives()).any(|(_, d)| *d != Degree::ONE);
        let program = PossProgram::inferred(c.semantics, c.rules.clone(), c.choices.clone(), c.constraints.clone())
            .map_err(|source| ParseError::Logic { at: c.at, source })?
            .extend_alphabet(c.declared.iter().cloned());
        programs.push((c.name.clone(), program));
    }
    for (b, raw) in poss_bridges.iter().zip(&bridges) {
        let (name, program) = &programs[b.bridge.target];
        if !program.alphabet().contains(&b.bridge.head) {
            return Err(ParseError::HeadOutsideAlphabet {
                at: raw.target.1,
                context: name.clone(),
                atom: b.bridge.head.clone(),
            });
        }
    }
    let context_spans = contexts.iter().map(|c| c.at).collect();
    Ok(McsDocument { system: PossMcs::new(programs, poss_bridges)?, context_spans, bridge_spans, uncertain })
}

fn degree_suffix(d: Degree) -> String {
    if d == Degree::ONE {
        String::new()
    } else {
        format!(" [{d}]")
    }
}

fn body(pos: &AtomSet, neg: &AtomSet) -> String {
    pos.iter()
        .map(|a| a.to_string())
        .chain(neg.iter().map(|a| format!("not {a}")))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Prints a system so that parsing the output gives it back.
pub fn print_poss_mcs(system: &PossMcs) -> String {
    let mut out = String::new();
    let names: Vec<&str> = system.contexts().iter().map(|c| c.id.name.as_str()).collect();
    for c in system.contexts() {
        let p = &c.program;
        let semantics = match p.semantics() {
            Semantics::AnswerSet => "asp",
            Semantics::ChoiceMinimalModel => "minimal",
        };
        let _ = writeln!(out, "context {} {semantics} {{", c.id.name);
        if !p.alphabet().is_empty() {
            let atoms: Vec<&str> = p.alphabet().iter().map(Atom::name).collect();
            let _ = writeln!(out, "  atoms {}.", atoms.join(", "));
        }
        for ch in p.choices() {
            let alts: Vec<String> = ch.alternatives().iter().map(|(a, d)| format!("{a}{}", degree_suffix(*d))).collect();
            let _ = writeln!(out, "  choice {}.", alts.join(" | "));
        }
        for k in p.constraints() {
            let _ = writeln!(out, "  :- {}.", body(&k.pos, &k.neg));
        }
        for r in p.rules() {
            let _ = writeln!(out, "  {}{}.", r.rule, degree_suffix(r.necessity));
        }
        out.push_str("}\n");
    }
    for b in system.bridges() {
        let r = &b.bridge;
        let q = |x: &QualifiedAtom| format!("({}:{})", names[x.context], x.atom);
        let lits: Vec<String> = r.pos.iter().map(q).chain(r.neg.iter().map(|x| format!("not {}", q(x)))).collect();
        let _ = write!(out, "({}:{})", names[r.target], r.head);
        if !lits.is_empty() {
            let _ = write!(out, " :- {}", lits.join(", "));
        }
        let _ = writeln!(out, "{}.", degree_suffix(b.necessity));
    }
    out
}

pub fn print_mcs(system: &Mcs) -> String {
    print_poss_mcs(&PossMcs::certain(system))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "% sample\ncontext c1 {\n  atoms z.\n  a :- b, not c [0.8].\n  b.\n  :- a, c.\n}\ncontext c2 minimal {\n  choice x [0.5] | y.\n}\n(c1:c) :- (c2:x), not (c2:y) [0.7].\n";

    #[test]
    fn parses_and_round_trips() {
        let doc = parse_mcs(SAMPLE).unwrap();
        assert_eq!(doc.system.len(), 2);
        assert_eq!(doc.system.bridges().len(), 1);
        assert!(doc.uncertain);
        assert_eq!(doc.bridge_spans[0], Span { line: 11, column: 1 });
        let printed = print_poss_mcs(&doc.system);
        assert_eq!(parse_mcs(&printed).unwrap().system, doc.system);
    }

    #[test]
    fn empty_file() {
        let doc = parse_mcs("% nothing\n").unwrap();
        assert!(doc.system.is_empty());
    }

    #[test]
    fn degree_out_of_range() {
        let err = parse_mcs("context c { a [1.5]. }").unwrap_err();
        assert!(matches!(err, ParseError::DegreeOutOfRange { at: Span { line: 1, column: 16 }, .. }), "{err}");
        assert!(matches!(parse_mcs("context c { a [-0.5]. }"), Err(ParseError::DegreeOutOfRange { .. })));
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(
            parse_mcs("context c { a. }\n(d:a) :- (c:a)."),
            Err(ParseError::UnknownContext { at: Span { line: 2, column: 2 }, .. })
        ));
        assert!(matches!(
            parse_mcs("context c { a. }\n(c:b) :- (c:a)."),
            Err(ParseError::HeadOutsideAlphabet { .. })
        ));
        assert!(matches!(parse_mcs("context c { } context c { }"), Err(ParseError::DuplicateContext { .. })));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = parse_mcs("context c {\n  a :- .\n}").unwrap_err();
        assert_eq!(err.to_string(), "2:8: expected an atom, found `.`");
        assert!(matches!(parse_mcs("context c { a# }"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_mcs("context c { a."), Err(ParseError::Syntax { .. })));
    }
}
