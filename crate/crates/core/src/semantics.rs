//! Extension-based evaluation shared by the Kripke and neighbourhood models.
//!
//! Both semantics agree on letters and Boolean connectives; they differ only
//! in how `box` maps the extension of its argument to a new extension.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::syntax::PropFormula;

/// The modal operator of a finite model, acting on extensions.
pub trait BoxOperator {
    fn point_count(&self) -> usize;

    /// Points where `box[index] A` holds, given the points where `A` holds.
    fn box_of(&self, index: usize, ext: &[bool]) -> Result<Vec<bool>>;
}

pub type Valuation = BTreeMap<String, BTreeSet<usize>>;

fn letter_ext(n: usize, val: &Valuation, p: &str) -> Result<Vec<bool>> {
    let set = val.get(p).ok_or_else(|| Error::MissingValuation(p.to_string()))?;
    let mut out = vec![false; n];
    for &w in set {
        out[w] = true;
    }
    Ok(out)
}

/// The set of points where `a` holds.
pub fn extension<B: BoxOperator + ?Sized>(op: &B, val: &Valuation, a: &PropFormula) -> Result<Vec<bool>> {
    let n = op.point_count();
    Ok(match a {
        PropFormula::Falsum => vec![false; n],
        PropFormula::Letter(p) => letter_ext(n, val, p)?,
        PropFormula::Implies(l, r) => {
            let l = extension(op, val, l)?;
            let r = extension(op, val, r)?;
            l.iter().zip(&r).map(|(&x, &y)| !x || y).collect()
        }
        PropFormula::Boxed(i, body) => {
            let e = extension(op, val, body)?;
            op.box_of(*i, &e)?
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Falsum,
    Letter(String),
    Imp(usize, usize),
    Box(usize, usize),
}

/// A hash-consed set of formulas evaluated bottom-up, each shared subformula
/// once per model. Used by the exhaustive agreement suites.
#[derive(Debug, Clone, Default)]
pub struct FormulaBank {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
    roots: Vec<usize>,
}

impl FormulaBank {
    pub fn new<'a>(formulas: impl IntoIterator<Item = &'a PropFormula>) -> Self {
        let mut bank = FormulaBank::default();
        for f in formulas {
            let r = bank.intern(f);
            bank.roots.push(r);
        }
        bank
    }

    fn intern(&mut self, f: &PropFormula) -> usize {
        let node = match f {
            PropFormula::Falsum => Node::Falsum,
            PropFormula::Letter(p) => Node::Letter(p.clone()),
            PropFormula::Implies(a, b) => {
                let a = self.intern(a);
                let b = self.intern(b);
                Node::Imp(a, b)
            }
            PropFormula::Boxed(i, a) => {
                let a = self.intern(a);
                Node::Box(*i, a)
            }
        };
        if let Some(&i) = self.index.get(&node) {
            return i;
        }
        self.nodes.push(node.clone());
        self.index.insert(node, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Extensions of every registered formula, in registration order.
    pub fn evaluate<B: BoxOperator + ?Sized>(&self, op: &B, val: &Valuation) -> Result<Vec<Vec<bool>>> {
        let n = op.point_count();
        let mut ext: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let e = match node {
                Node::Falsum => vec![false; n],
                Node::Letter(p) => letter_ext(n, val, p)?,
                Node::Imp(a, b) => ext[*a].iter().zip(&ext[*b]).map(|(&x, &y)| !x || y).collect(),
                Node::Box(i, a) => op.box_of(*i, &ext[*a])?,
            };
            ext.push(e);
        }
        Ok(self.roots.iter().map(|&r| ext[r].clone()).collect())
    }
}

/// All valuations of `letters` over `n` points, as a lazy iterator.
pub fn all_valuations(n: usize, letters: &[String]) -> impl Iterator<Item = Valuation> + '_ {
    let bits = n * letters.len();
    assert!(bits < 64, "too many valuations to enumerate");
    (0u64..(1u64 << bits)).map(move |mask| {
        letters
            .iter()
            .enumerate()
            .map(|(li, p)| {
                let set = (0..n).filter(|w| mask >> (li * n + w) & 1 == 1).collect();
                (p.clone(), set)
            })
            .collect()
    })
}
