use std::collections::BTreeMap;

use super::{Connectives, Constant, HornBody, HornSentence, PredFormula, PropFormula, Term};
use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Number of modalities; `box[i]` requires `1 <= i <= modalities`.
    pub modalities: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { modalities: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(String),
    Num(usize),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Tilde,
    Amp,
    Bar,
    Arrow,
    FatArrow,
    False,
    True,
    Box,
    Dia,
    Forall,
    Exists,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Const(s) => format!("constant `@{s}`"),
        Tok::Num(n) => format!("number `{n}`"),
        other => format!("{other:?}"),
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_ascii() {
            return Err(ParseError::new(i, format!("unexpected character `{c}`")));
        }
        let start = i;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '~' => Tok::Tilde,
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '-' if bytes.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Arrow
            }
            '=' if bytes.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::FatArrow
            }
            '@' => {
                let mut j = i + 1;
                while j < bytes.len() && is_ident_char(bytes[j]) {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(ParseError::new(i, "empty constant name"));
                }
                let name: String = bytes[i + 1..j].iter().collect();
                i = j - 1;
                Tok::Const(name)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = bytes[i..j].iter().collect();
                i = j - 1;
                Tok::Num(s.parse().map_err(|_| ParseError::new(start, "number too large"))?)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && is_ident_char(bytes[j]) {
                    j += 1;
                }
                let s: String = bytes[i..j].iter().collect();
                i = j - 1;
                match s.as_str() {
                    "false" => Tok::False,
                    "true" => Tok::True,
                    "box" => Tok::Box,
                    "dia" => Tok::Dia,
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(s),
                }
            }
            other => return Err(ParseError::new(i, format!("unexpected character `{other}`"))),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Cursor {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Cursor { toks: lex(text)?, pos: 0, end: text.len() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::new(self.offset(), format!("expected {what}, found {}", describe(t))),
            None => ParseError::new(self.offset(), format!("expected {what}, found end of input")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            Err(self.unexpected("end of input"))
        } else {
            Ok(())
        }
    }

    fn modality(&mut self, opts: &ParseOptions) -> Result<usize, ParseError> {
        if !self.eat(&Tok::LBracket) {
            return Ok(1);
        }
        let at = self.offset();
        let idx = match self.bump() {
            Some(Tok::Num(n)) => n,
            _ => return Err(ParseError::new(at, "expected modality index")),
        };
        if idx == 0 || idx > opts.modalities {
            return Err(ParseError::new(
                at,
                format!("unknown modality index {idx} (declared modalities: {})", opts.modalities),
            ));
        }
        self.expect(&Tok::RBracket, "`]`")?;
        Ok(idx)
    }
}

/// Binary layers shared by both formula grammars: `->` (right assoc), `|`, `&`.
trait Layered {
    type Out: Connectives;

    fn unary(&mut self, cur: &mut Cursor) -> Result<Self::Out, ParseError>;

    fn imp(&mut self, cur: &mut Cursor) -> Result<Self::Out, ParseError> {
        let lhs = self.disj(cur)?;
        if cur.eat(&Tok::Arrow) {
            let rhs = self.imp(cur)?;
            Ok(Self::Out::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disj(&mut self, cur: &mut Cursor) -> Result<Self::Out, ParseError> {
        let mut acc = self.conj(cur)?;
        while cur.eat(&Tok::Bar) {
            let rhs = self.conj(cur)?;
            acc = Self::Out::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conj(&mut self, cur: &mut Cursor) -> Result<Self::Out, ParseError> {
        let mut acc = self.unary(cur)?;
        while cur.eat(&Tok::Amp) {
            let rhs = self.unary(cur)?;
            acc = Self::Out::and(acc, rhs);
        }
        Ok(acc)
    }
}

struct PropParser {
    opts: ParseOptions,
}

impl Layered for PropParser {
    type Out = PropFormula;

    fn unary(&mut self, cur: &mut Cursor) -> Result<PropFormula, ParseError> {
        let at = cur.offset();
        match cur.bump() {
            Some(Tok::Tilde) => Ok(PropFormula::not(self.unary(cur)?)),
            Some(Tok::Box) => {
                let i = cur.modality(&self.opts)?;
                Ok(PropFormula::boxed(i, self.unary(cur)?))
            }
            Some(Tok::Dia) => {
                let i = cur.modality(&self.opts)?;
                Ok(PropFormula::dia(i, self.unary(cur)?))
            }
            Some(Tok::False) => Ok(PropFormula::Falsum),
            Some(Tok::True) => Ok(PropFormula::verum()),
            Some(Tok::Ident(name)) => {
                if cur.peek() == Some(&Tok::LParen) {
                    return Err(ParseError::new(cur.offset(), "predicate arguments in a propositional formula"));
                }
                Ok(PropFormula::Letter(name))
            }
            Some(Tok::LParen) => {
                let f = self.imp(cur)?;
                cur.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Forall) | Some(Tok::Exists) => {
                Err(ParseError::new(at, "quantifier in a propositional formula"))
            }
            _ => {
                cur.pos -= 1;
                Err(cur.unexpected("formula"))
            }
        }
    }
}

struct PredParser {
    opts: ParseOptions,
    bound: Vec<String>,
    arities: BTreeMap<String, usize>,
}

impl PredParser {
    fn quantifier(&mut self, cur: &mut Cursor, universal: bool) -> Result<PredFormula, ParseError> {
        let at = cur.offset();
        let var = match cur.bump() {
            Some(Tok::Ident(v)) => v,
            _ => return Err(ParseError::new(at, "expected variable after quantifier")),
        };
        if self.bound.contains(&var) {
            return Err(ParseError::new(at, format!("variable `{var}` is already bound here (shadowing is not allowed)")));
        }
        cur.expect(&Tok::Dot, "`.` after quantified variable")?;
        self.bound.push(var.clone());
        let body = self.unary(cur);
        self.bound.pop();
        let body = body?;
        Ok(if universal { PredFormula::forall(var, body) } else { PredFormula::exists(var, body) })
    }

    fn atom(&mut self, cur: &mut Cursor, at: usize, name: String) -> Result<PredFormula, ParseError> {
        let mut args = Vec::new();
        if cur.eat(&Tok::LParen) {
            loop {
                let aat = cur.offset();
                match cur.bump() {
                    Some(Tok::Ident(v)) => args.push(Term::Var(v)),
                    Some(Tok::Const(c)) => args.push(Term::Const(Constant(c))),
                    _ => return Err(ParseError::new(aat, "expected variable or constant")),
                }
                if cur.eat(&Tok::Comma) {
                    continue;
                }
                cur.expect(&Tok::RParen, "`,` or `)`")?;
                break;
            }
        }
        match self.arities.get(&name) {
            Some(&k) if k != args.len() => {
                return Err(ParseError::new(
                    at,
                    format!("predicate `{name}` used with arity {} but earlier with arity {k}", args.len()),
                ))
            }
            _ => {
                self.arities.insert(name.clone(), args.len());
            }
        }
        Ok(PredFormula::Atom { pred: name, args })
    }
}

impl Layered for PredParser {
    type Out = PredFormula;

    fn unary(&mut self, cur: &mut Cursor) -> Result<PredFormula, ParseError> {
        let at = cur.offset();
        match cur.bump() {
            Some(Tok::Tilde) => Ok(PredFormula::not(self.unary(cur)?)),
            Some(Tok::Box) => {
                let i = cur.modality(&self.opts)?;
                Ok(PredFormula::boxed(i, self.unary(cur)?))
            }
            Some(Tok::Dia) => {
                let i = cur.modality(&self.opts)?;
                Ok(PredFormula::dia(i, self.unary(cur)?))
            }
            Some(Tok::Forall) => self.quantifier(cur, true),
            Some(Tok::Exists) => self.quantifier(cur, false),
            Some(Tok::False) => Ok(PredFormula::Falsum),
            Some(Tok::True) => Ok(PredFormula::verum()),
            Some(Tok::Ident(name)) => self.atom(cur, at, name),
            Some(Tok::LParen) => {
                let f = self.imp(cur)?;
                cur.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => {
                cur.pos -= 1;
                Err(cur.unexpected("formula"))
            }
        }
    }
}

pub fn parse_prop(text: &str) -> Result<PropFormula, ParseError> {
    parse_prop_with(text, ParseOptions::default())
}

pub fn parse_prop_with(text: &str, opts: ParseOptions) -> Result<PropFormula, ParseError> {
    let mut cur = Cursor::new(text)?;
    let f = PropParser { opts }.imp(&mut cur)?;
    cur.finish()?;
    Ok(f)
}

pub fn parse_pred(text: &str) -> Result<PredFormula, ParseError> {
    parse_pred_with(text, ParseOptions::default())
}

pub fn parse_pred_with(text: &str, opts: ParseOptions) -> Result<PredFormula, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut p = PredParser { opts, bound: Vec::new(), arities: BTreeMap::new() };
    let f = p.imp(&mut cur)?;
    cur.finish()?;
    Ok(f)
}

/// Parses `ATOMS => v R v`.
pub fn parse_horn(text: &str) -> Result<HornSentence, ParseError> {
    let mut cur = Cursor::new(text)?;
    let body = horn_disj(&mut cur)?;
    cur.expect(&Tok::FatArrow, "`=>`")?;
    let head_at = cur.offset();
    if matches!(cur.peek(), Some(Tok::True) | Some(Tok::LParen) | Some(Tok::Tilde)) {
        return Err(ParseError::new(head_at, "head must be a single atom `v R v`"));
    }
    let (a, b) = horn_atom(&mut cur)?;
    if cur.peek() == Some(&Tok::Amp) || cur.peek() == Some(&Tok::Bar) {
        return Err(ParseError::new(cur.offset(), "head must be a single atom"));
    }
    cur.finish()?;
    for v in [&a, &b] {
        if v != "x" && v != "y" {
            return Err(ParseError::new(head_at, format!("head variable `{v}` must be `x` or `y`")));
        }
    }
    Ok(HornSentence { body, head: (a, b) })
}

fn horn_disj(cur: &mut Cursor) -> Result<HornBody, ParseError> {
    let mut acc = horn_conj(cur)?;
    while cur.eat(&Tok::Bar) {
        acc = HornBody::Or(Box::new(acc), Box::new(horn_conj(cur)?));
    }
    Ok(acc)
}

fn horn_conj(cur: &mut Cursor) -> Result<HornBody, ParseError> {
    let mut acc = horn_unit(cur)?;
    while cur.eat(&Tok::Amp) {
        acc = HornBody::And(Box::new(acc), Box::new(horn_unit(cur)?));
    }
    Ok(acc)
}

fn horn_unit(cur: &mut Cursor) -> Result<HornBody, ParseError> {
    match cur.peek() {
        Some(Tok::True) => {
            cur.bump();
            Ok(HornBody::True)
        }
        Some(Tok::LParen) => {
            cur.bump();
            let b = horn_disj(cur)?;
            cur.expect(&Tok::RParen, "`)`")?;
            Ok(b)
        }
        Some(Tok::Tilde) => Err(ParseError::new(cur.offset(), "negation is not allowed in a Horn body")),
        Some(Tok::Forall) | Some(Tok::Exists) => {
            Err(ParseError::new(cur.offset(), "quantifiers are not allowed in a Horn body"))
        }
        _ => {
            let (a, b) = horn_atom(cur)?;
            Ok(HornBody::Atom(a, b))
        }
    }
}

fn horn_atom(cur: &mut Cursor) -> Result<(String, String), ParseError> {
    let at = cur.offset();
    let a = match cur.bump() {
        Some(Tok::Ident(v)) => v,
        _ => return Err(ParseError::new(at, "expected relation atom `v R v`")),
    };
    let rat = cur.offset();
    match cur.bump() {
        Some(Tok::Ident(r)) if r == "R" => {}
        _ => return Err(ParseError::new(rat, "expected relation symbol `R`")),
    }
    let bat = cur.offset();
    let b = match cur.bump() {
        Some(Tok::Ident(v)) => v,
        _ => return Err(ParseError::new(bat, "expected variable")),
    };
    Ok((a, b))
}
