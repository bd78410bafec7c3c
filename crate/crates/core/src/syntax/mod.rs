//! Object language: propositional and predicate modal formulas, and universal
//! strict Horn sentences over a single binary relation `R`.
//!
//! Only four (five, with `forall`) primitive constructors exist. Negation,
//! conjunction, disjunction, diamond and the existential quantifier are
//! abbreviations built by the [`Connectives`] helpers, so every formula is
//! already in normal form and structural equality is the right notion of
//! equality for the round-trip property.

mod horn;
mod parse;
mod print;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

pub use horn::{HornBody, HornSentence};
pub use parse::{parse_horn, parse_pred, parse_pred_with, parse_prop, parse_prop_with, ParseOptions};

/// An individual constant naming an element of some model's domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constant(pub String);

impl Constant {
    pub fn new(name: impl Into<String>) -> Self {
        Constant(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropFormula {
    Falsum,
    Letter(String),
    Implies(Box<PropFormula>, Box<PropFormula>),
    /// `box[i] A`, modality indices start at 1.
    Boxed(usize, Box<PropFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(Constant),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredFormula {
    Falsum,
    /// A predicate letter applied to its arguments; 0-ary letters have no args.
    Atom { pred: String, args: Vec<Term> },
    Implies(Box<PredFormula>, Box<PredFormula>),
    Boxed(usize, Box<PredFormula>),
    Forall(String, Box<PredFormula>),
}

/// Derived connectives shared by both formula kinds.
pub trait Connectives: Sized + Clone {
    fn falsum() -> Self;
    fn implies(a: Self, b: Self) -> Self;
    fn boxed(index: usize, a: Self) -> Self;

    fn not(a: Self) -> Self {
        Self::implies(a, Self::falsum())
    }

    fn verum() -> Self {
        Self::not(Self::falsum())
    }

    fn and(a: Self, b: Self) -> Self {
        Self::not(Self::implies(a, Self::not(b)))
    }

    fn or(a: Self, b: Self) -> Self {
        Self::implies(Self::not(a), b)
    }

    fn dia(index: usize, a: Self) -> Self {
        Self::not(Self::boxed(index, Self::not(a)))
    }

    /// Left-nested conjunction; the empty conjunction is `~false`.
    fn conj<I: IntoIterator<Item = Self>>(items: I) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Self::verum(),
            Some(first) => it.fold(first, Self::and),
        }
    }

    /// `k` nested unimodal boxes around `self`.
    fn box_power(self, k: usize) -> Self {
        (0..k).fold(self, |acc, _| Self::boxed(1, acc))
    }
}

impl Connectives for PropFormula {
    fn falsum() -> Self {
        PropFormula::Falsum
    }
    fn implies(a: Self, b: Self) -> Self {
        PropFormula::Implies(Box::new(a), Box::new(b))
    }
    fn boxed(index: usize, a: Self) -> Self {
        PropFormula::Boxed(index, Box::new(a))
    }
}

impl Connectives for PredFormula {
    fn falsum() -> Self {
        PredFormula::Falsum
    }
    fn implies(a: Self, b: Self) -> Self {
        PredFormula::Implies(Box::new(a), Box::new(b))
    }
    fn boxed(index: usize, a: Self) -> Self {
        PredFormula::Boxed(index, Box::new(a))
    }
}

impl PropFormula {
    pub fn letter(name: impl Into<String>) -> Self {
        PropFormula::Letter(name.into())
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            PropFormula::Falsum | PropFormula::Letter(_) => 0,
            PropFormula::Implies(a, b) => a.modal_depth().max(b.modal_depth()),
            PropFormula::Boxed(_, a) => 1 + a.modal_depth(),
        }
    }

    /// Propositional letters in order of first occurrence.
    pub fn letters(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_letters(&mut out);
        out
    }

    fn collect_letters(&self, out: &mut Vec<String>) {
        match self {
            PropFormula::Falsum => {}
            PropFormula::Letter(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            PropFormula::Implies(a, b) => {
                a.collect_letters(out);
                b.collect_letters(out);
            }
            PropFormula::Boxed(_, a) => a.collect_letters(out),
        }
    }

    pub fn max_modality(&self) -> usize {
        match self {
            PropFormula::Falsum | PropFormula::Letter(_) => 0,
            PropFormula::Implies(a, b) => a.max_modality().max(b.max_modality()),
            PropFormula::Boxed(i, a) => (*i).max(a.max_modality()),
        }
    }

    /// Reads propositional letters as 0-ary predicate letters.
    pub fn to_pred(&self) -> PredFormula {
        match self {
            PropFormula::Falsum => PredFormula::Falsum,
            PropFormula::Letter(p) => PredFormula::Atom { pred: p.clone(), args: Vec::new() },
            PropFormula::Implies(a, b) => PredFormula::implies(a.to_pred(), b.to_pred()),
            PropFormula::Boxed(i, a) => PredFormula::boxed(*i, a.to_pred()),
        }
    }
}

impl PredFormula {
    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Self {
        PredFormula::Atom { pred: pred.into(), args }
    }

    pub fn forall(var: impl Into<String>, body: Self) -> Self {
        PredFormula::Forall(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Self) -> Self {
        Self::not(Self::forall(var, Self::not(body)))
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            PredFormula::Falsum | PredFormula::Atom { .. } => 0,
            PredFormula::Implies(a, b) => a.modal_depth().max(b.modal_depth()),
            PredFormula::Boxed(_, a) => 1 + a.modal_depth(),
            PredFormula::Forall(_, a) => a.modal_depth(),
        }
    }

    pub fn max_modality(&self) -> usize {
        match self {
            PredFormula::Falsum | PredFormula::Atom { .. } => 0,
            PredFormula::Implies(a, b) => a.max_modality().max(b.max_modality()),
            PredFormula::Boxed(i, a) => (*i).max(a.max_modality()),
            PredFormula::Forall(_, a) => a.max_modality(),
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            PredFormula::Falsum => {}
            PredFormula::Atom { args, .. } => {
                for t in args {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) && !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                }
            }
            PredFormula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            PredFormula::Boxed(_, a) => a.collect_free(bound, out),
            PredFormula::Forall(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Variables bound by some quantifier anywhere in the formula.
    pub fn bound_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut Vec<String>) {
        match self {
            PredFormula::Falsum | PredFormula::Atom { .. } => {}
            PredFormula::Implies(a, b) => {
                a.collect_bound(out);
                b.collect_bound(out);
            }
            PredFormula::Boxed(_, a) => a.collect_bound(out),
            PredFormula::Forall(x, a) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
                a.collect_bound(out);
            }
        }
    }

    /// Constants occurring in the formula, sorted.
    pub fn constants(&self) -> Vec<Constant> {
        let mut out = std::collections::BTreeSet::new();
        self.walk_atoms(&mut |_, args| {
            for t in args {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        });
        out.into_iter().collect()
    }

    /// Predicate letters with their arities, sorted by name.
    pub fn predicates(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.walk_atoms(&mut |p, args| {
            out.insert(p.to_string(), args.len());
        });
        out
    }

    fn walk_atoms(&self, f: &mut impl FnMut(&str, &[Term])) {
        match self {
            PredFormula::Falsum => {}
            PredFormula::Atom { pred, args } => f(pred, args),
            PredFormula::Implies(a, b) => {
                a.walk_atoms(f);
                b.walk_atoms(f);
            }
            PredFormula::Boxed(_, a) | PredFormula::Forall(_, a) => a.walk_atoms(f),
        }
    }

    /// `forall x1 ... forall xk. A` with the free variables in first-occurrence
    /// order, `x1` outermost.
    pub fn universal_closure(&self) -> PredFormula {
        self.free_vars()
            .into_iter()
            .rev()
            .fold(self.clone(), |acc, v| PredFormula::forall(v, acc))
    }

    /// Replaces free occurrences of the assigned variables by constants.
    ///
    /// A variable that is bound anywhere in the formula cannot be substituted.
    pub fn substitute_constants(&self, assignment: &BTreeMap<String, Constant>) -> Result<PredFormula> {
        let bound = self.bound_vars();
        if let Some(v) = assignment.keys().find(|v| bound.contains(v)) {
            return Err(Error::Substitution(format!("variable `{v}` is bound in the formula")));
        }
        Ok(self.subst_free(assignment))
    }

    fn subst_free(&self, assignment: &BTreeMap<String, Constant>) -> PredFormula {
        match self {
            PredFormula::Falsum => PredFormula::Falsum,
            PredFormula::Atom { pred, args } => PredFormula::Atom {
                pred: pred.clone(),
                args: args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => match assignment.get(v) {
                            Some(c) => Term::Const(c.clone()),
                            None => t.clone(),
                        },
                        Term::Const(_) => t.clone(),
                    })
                    .collect(),
            },
            PredFormula::Implies(a, b) => PredFormula::implies(a.subst_free(assignment), b.subst_free(assignment)),
            PredFormula::Boxed(i, a) => PredFormula::boxed(*i, a.subst_free(assignment)),
            PredFormula::Forall(x, a) => PredFormula::forall(x.clone(), a.subst_free(assignment)),
        }
    }
}

/// The k-th one-way axiom `box p -> box^k p`.
pub fn ptc_axiom(k: usize) -> PropFormula {
    let p = PropFormula::letter("p");
    PropFormula::implies(p.clone().box_power(1), p.box_power(k))
}

/// The pretransitivity axiom `p & box p & ... & box^k p -> box^(k+1) p`.
pub fn pretransitivity_axiom(k: usize) -> PropFormula {
    let p = PropFormula::letter("p");
    let body = PropFormula::conj((0..=k).map(|i| p.clone().box_power(i)));
    PropFormula::implies(body, p.box_power(k + 1))
}

/// `forall x. box P(x) -> box forall x. P(x)`.
pub fn barcan() -> PredFormula {
    let px = PredFormula::atom("P", vec![Term::Var("x".into())]);
    PredFormula::implies(
        PredFormula::forall("x", px.clone().box_power(1)),
        PredFormula::forall("x", px).box_power(1),
    )
}

/// `box forall x. P(x) -> forall x. box P(x)`.
pub fn converse_barcan() -> PredFormula {
    let px = PredFormula::atom("P", vec![Term::Var("x".into())]);
    PredFormula::implies(
        PredFormula::forall("x", px.clone()).box_power(1),
        PredFormula::forall("x", px.box_power(1)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PropFormula {
        PropFormula::letter("p")
    }

    #[test]
    fn box_power_basics() {
        assert_eq!(p().box_power(0), p());
        assert_eq!(p().box_power(2), PropFormula::boxed(1, PropFormula::boxed(1, p())));
        for k in 0..=10 {
            assert_eq!(p().box_power(k).modal_depth(), k);
        }
    }

    #[test]
    fn box_power_composes() {
        for j in 0..5 {
            for k in 0..5 {
                assert_eq!(p().box_power(j + k), p().box_power(k).box_power(j));
            }
        }
    }

    #[test]
    fn free_vars_and_closure() {
        let f = parse_pred("forall x. P(x, y)").unwrap();
        assert_eq!(f.free_vars(), vec!["y".to_string()]);

        let g = parse_pred("P(x, y) -> Q(y)").unwrap();
        let closed = g.universal_closure();
        assert_eq!(closed, PredFormula::forall("x", PredFormula::forall("y", g.clone())));
        assert!(closed.is_closed());
        assert_eq!(closed.universal_closure(), closed);

        let px = parse_pred("P(x)").unwrap();
        assert_eq!(px.universal_closure(), PredFormula::forall("x", px.clone()));
    }

    #[test]
    fn substitution() {
        let px = parse_pred("P(x)").unwrap();
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), Constant::new("d"));
        let s = px.substitute_constants(&m).unwrap();
        assert_eq!(s, PredFormula::atom("P", vec![Term::Const(Constant::new("d"))]));
        assert!(s.is_closed());

        let bound = parse_pred("forall x. P(x)").unwrap();
        assert!(bound.substitute_constants(&m).is_err());
    }

    #[test]
    fn modal_depth_of_implication() {
        assert_eq!(parse_prop("p -> q").unwrap().modal_depth(), 0);
    }
}
