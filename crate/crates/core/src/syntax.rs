//! Formulas of the conditional language, consequence pairs, and the
//! concrete ASCII syntax.
//!
//! The grammar, with `~>` binding loosest and right-associative:
//!
//! ```text
//! pair    := formula "|-" formula
//! formula := or_f ("~>" formula)?
//! or_f    := and_f ("\/" and_f)*
//! and_f   := atom_f ("/\" atom_f)*
//! atom_f  := "T" | "F" | ATOM | "(" formula ")"
//! ATOM    := [a-z][a-zA-Z0-9_]*
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A formula built from atoms, constants, conjunction, disjunction and
/// conditional implication.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Formula {
    Prop(String),
    Top,
    Bot,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Cto(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn prop(name: &str) -> Formula {
        Formula::Prop(name.to_owned())
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn cto(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Cto(Box::new(lhs), Box::new(rhs))
    }

    /// Atom names occurring in the formula, sorted.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Prop(p) => {
                out.insert(p.clone());
            }
            Formula::Top | Formula::Bot => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Cto(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Nesting depth; atoms and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Prop(_) | Formula::Top | Formula::Bot => 0,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Cto(l, r) => {
                1 + l.depth().max(r.depth())
            }
        }
    }

    /// The subterm closure, including the formula itself.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        out.insert(self.clone());
        match self {
            Formula::Prop(_) | Formula::Top | Formula::Bot => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Cto(l, r) => {
                l.collect_subformulas(out);
                r.collect_subformulas(out);
            }
        }
    }

    /// Simultaneous substitution; atoms absent from the map are fixed.
    pub fn substitute(&self, map: &BTreeMap<String, Formula>) -> Formula {
        match self {
            Formula::Prop(p) => map.get(p).cloned().unwrap_or_else(|| self.clone()),
            Formula::Top | Formula::Bot => self.clone(),
            Formula::And(l, r) => Formula::and(l.substitute(map), r.substitute(map)),
            Formula::Or(l, r) => Formula::or(l.substitute(map), r.substitute(map)),
            Formula::Cto(l, r) => Formula::cto(l.substitute(map), r.substitute(map)),
        }
    }
}

// Precedence levels used by the printer: 0 = formula (~>), 1 = \/, 2 = /\.
fn fmt_prec(f: &Formula, prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let level = match f {
        Formula::Cto(..) => 0,
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        _ => 3,
    };
    if level < prec {
        write!(out, "(")?;
    }
    match f {
        Formula::Prop(p) => write!(out, "{p}")?,
        Formula::Top => write!(out, "T")?,
        Formula::Bot => write!(out, "F")?,
        Formula::Cto(l, r) => {
            fmt_prec(l, 1, out)?;
            write!(out, " ~> ")?;
            fmt_prec(r, 0, out)?;
        }
        Formula::Or(l, r) => {
            fmt_prec(l, 1, out)?;
            write!(out, " \\/ ")?;
            fmt_prec(r, 2, out)?;
        }
        Formula::And(l, r) => {
            fmt_prec(l, 2, out)?;
            write!(out, " /\\ ")?;
            fmt_prec(r, 3, out)?;
        }
    }
    if level < prec {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}

/// A consequence pair `lhs |- rhs`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ConsequencePair {
    pub lhs: Formula,
    pub rhs: Formula,
}

impl ConsequencePair {
    pub fn new(lhs: Formula, rhs: Formula) -> Self {
        ConsequencePair { lhs, rhs }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = self.lhs.atoms();
        out.extend(self.rhs.atoms());
        out
    }

    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = self.lhs.subformulas();
        out.extend(self.rhs.subformulas());
        out
    }
}

impl fmt::Display for ConsequencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.lhs, self.rhs)
    }
}

/// A finite set of consequence pairs, deduplicated and kept in a canonical
/// order on construction.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TheoryGamma {
    pairs: Vec<ConsequencePair>,
}

impl TheoryGamma {
    pub fn empty() -> Self {
        TheoryGamma { pairs: Vec::new() }
    }

    pub fn new(pairs: impl IntoIterator<Item = ConsequencePair>) -> Self {
        let set: BTreeSet<ConsequencePair> = pairs.into_iter().collect();
        TheoryGamma {
            pairs: set.into_iter().collect(),
        }
    }

    pub fn pairs(&self) -> &[ConsequencePair] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        for p in &self.pairs {
            out.extend(p.subformulas());
        }
        out
    }
}

/// Syntax error with a byte position into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

fn err<T>(pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    And,
    Or,
    Cto,
    Turnstile,
    Top,
    Bot,
    Atom(String),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '/' => {
                if bytes.get(i + 1) == Some(&b'\\') {
                    toks.push((i, Tok::And));
                    i += 2;
                } else {
                    return err(i, "expected `/\\`");
                }
            }
            '\\' => {
                if bytes.get(i + 1) == Some(&b'/') {
                    toks.push((i, Tok::Or));
                    i += 2;
                } else {
                    return err(i, "expected `\\/`");
                }
            }
            '~' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Cto));
                    i += 2;
                } else {
                    return err(i, "expected `~>`");
                }
            }
            '|' => {
                if bytes.get(i + 1) == Some(&b'-') {
                    toks.push((i, Tok::Turnstile));
                    i += 2;
                } else {
                    return err(i, "expected `|-`");
                }
            }
            'T' => {
                toks.push((i, Tok::Top));
                i += 1;
            }
            'F' => {
                toks.push((i, Tok::Bot));
                i += 1;
            }
            'a'..='z' => {
                let start = i;
                i += 1;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_alphanumeric() || d == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                toks.push((start, Tok::Atom(text[start..i].to_owned())));
            }
            _ => return err(i, format!("unexpected character `{c}`")),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            err(self.here(), format!("expected {what}"))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_f()?;
        if self.peek() == Some(&Tok::Cto) {
            self.pos += 1;
            let rhs = self.formula()?;
            Ok(Formula::cto(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_f(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and_f()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.and_f()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and_f(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.atom_f()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.atom_f()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn atom_f(&mut self) -> Result<Formula, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Top) => Ok(Formula::Top),
            Some(Tok::Bot) => Ok(Formula::Bot),
            Some(Tok::Atom(name)) => Ok(Formula::Prop(name)),
            Some(Tok::LParen) => {
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(tok) => err(at, format!("unexpected token {tok:?}")),
            None => err(at, "unexpected end of input"),
        }
    }
}

/// Parse a single formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.peek().is_some() {
        return err(p.here(), "trailing input after formula");
    }
    Ok(f)
}

/// Parse a consequence pair `phi |- psi`.
pub fn parse_pair(text: &str) -> Result<ConsequencePair, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
    };
    let lhs = p.formula()?;
    p.expect(Tok::Turnstile, "`|-`")?;
    let rhs = p.formula()?;
    if p.peek().is_some() {
        return err(p.here(), "trailing input after pair");
    }
    Ok(ConsequencePair::new(lhs, rhs))
}
