//! Printing in the ASCII grammar accepted by the parsers. Abbreviation
//! patterns are recognised and printed with their sugar, which re-parses to
//! the identical primitive tree.

use std::fmt;

use super::{PredFormula, PropFormula, Term};

const IMP: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;
const ATOM: u8 = 5;

enum View<'a, F> {
    Atom,
    Imp(&'a F, &'a F),
    Or(&'a F, &'a F),
    And(&'a F, &'a F),
    Not(&'a F),
    Box(usize, &'a F),
    Dia(usize, &'a F),
    Forall(&'a str, &'a F),
    Exists(&'a str, &'a F),
}

trait Shape: Sized {
    fn is_falsum(&self) -> bool;
    fn as_imp(&self) -> Option<(&Self, &Self)>;
    fn as_box(&self) -> Option<(usize, &Self)>;
    fn as_forall(&self) -> Option<(&str, &Self)>;
    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;

    fn as_not(&self) -> Option<&Self> {
        match self.as_imp() {
            Some((a, b)) if b.is_falsum() => Some(a),
            _ => None,
        }
    }

    fn view(&self) -> View<'_, Self> {
        if let Some(inner) = self.as_not() {
            if let Some((a, rest)) = inner.as_imp() {
                if let Some(b) = rest.as_not() {
                    return View::And(a, b);
                }
            }
            if let Some((i, body)) = inner.as_box() {
                if let Some(a) = body.as_not() {
                    return View::Dia(i, a);
                }
            }
            if let Some((x, body)) = inner.as_forall() {
                if let Some(a) = body.as_not() {
                    return View::Exists(x, a);
                }
            }
            return View::Not(inner);
        }
        if let Some((l, r)) = self.as_imp() {
            if let Some(a) = l.as_not() {
                return View::Or(a, r);
            }
            return View::Imp(l, r);
        }
        if let Some((i, a)) = self.as_box() {
            return View::Box(i, a);
        }
        if let Some((x, a)) = self.as_forall() {
            return View::Forall(x, a);
        }
        View::Atom
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let view = self.view();
        let prec = match view {
            View::Atom => ATOM,
            View::Imp(..) => IMP,
            View::Or(..) => OR,
            View::And(..) => AND,
            _ => UNARY,
        };
        if prec < ctx {
            f.write_str("(")?;
        }
        match view {
            View::Atom => self.fmt_atom(f)?,
            View::Imp(a, b) => {
                a.write(f, OR)?;
                f.write_str(" -> ")?;
                b.write(f, IMP)?;
            }
            View::Or(a, b) => {
                a.write(f, OR)?;
                f.write_str(" | ")?;
                b.write(f, AND)?;
            }
            View::And(a, b) => {
                a.write(f, AND)?;
                f.write_str(" & ")?;
                b.write(f, UNARY)?;
            }
            View::Not(a) => {
                f.write_str("~")?;
                a.write(f, UNARY)?;
            }
            View::Box(i, a) | View::Dia(i, a) => {
                let kw = if matches!(view, View::Box(..)) { "box" } else { "dia" };
                if i == 1 {
                    write!(f, "{kw} ")?;
                } else {
                    write!(f, "{kw}[{i}] ")?;
                }
                a.write(f, UNARY)?;
            }
            View::Forall(x, a) => {
                write!(f, "forall {x}. ")?;
                a.write(f, UNARY)?;
            }
            View::Exists(x, a) => {
                write!(f, "exists {x}. ")?;
                a.write(f, UNARY)?;
            }
        }
        if prec < ctx {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl Shape for PropFormula {
    fn is_falsum(&self) -> bool {
        matches!(self, PropFormula::Falsum)
    }
    fn as_imp(&self) -> Option<(&Self, &Self)> {
        match self {
            PropFormula::Implies(a, b) => Some((a, b)),
            _ => None,
        }
    }
    fn as_box(&self) -> Option<(usize, &Self)> {
        match self {
            PropFormula::Boxed(i, a) => Some((*i, a)),
            _ => None,
        }
    }
    fn as_forall(&self) -> Option<(&str, &Self)> {
        None
    }
    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropFormula::Falsum => f.write_str("false"),
            PropFormula::Letter(p) => f.write_str(p),
            _ => unreachable!("not an atom"),
        }
    }
}

impl Shape for PredFormula {
    fn is_falsum(&self) -> bool {
        matches!(self, PredFormula::Falsum)
    }
    fn as_imp(&self) -> Option<(&Self, &Self)> {
        match self {
            PredFormula::Implies(a, b) => Some((a, b)),
            _ => None,
        }
    }
    fn as_box(&self) -> Option<(usize, &Self)> {
        match self {
            PredFormula::Boxed(i, a) => Some((*i, a)),
            _ => None,
        }
    }
    fn as_forall(&self) -> Option<(&str, &Self)> {
        match self {
            PredFormula::Forall(x, a) => Some((x, a)),
            _ => None,
        }
    }
    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredFormula::Falsum => f.write_str("false"),
            PredFormula::Atom { pred, args } => {
                f.write_str(pred)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, t) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{t}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            _ => unreachable!("not an atom"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "@{c}"),
        }
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

impl fmt::Display for PredFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::*;

    #[test]
    fn sugar_is_printed() {
        for s in ["p -> q", "p & q", "p | q", "~p", "dia p", "box[2] p", "a -> b -> c", "(a -> b) -> c", "p & (q | r)"] {
            let f = parse_prop_with(s, ParseOptions { modalities: 2 }).unwrap();
            assert_eq!(f.to_string(), s);
        }
        for s in ["forall x. P(x) -> P(y)", "exists x. (P(x) & Q)", "box forall x. P(x, @d)"] {
            let f = parse_pred(s).unwrap();
            assert_eq!(f.to_string(), s);
        }
    }

    #[test]
    fn horn_printing() {
        for s in ["x R z1 & z1 R y => x R y", "true => x R x", "(x R z | z R x) & z R y => x R y"] {
            assert_eq!(parse_horn(s).unwrap().to_string(), s);
        }
    }
}
