use std::fmt;

/// Positive quantifier-free body of a Horn sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HornBody {
    /// The empty conjunction.
    True,
    Atom(String, String),
    And(Box<HornBody>, Box<HornBody>),
    Or(Box<HornBody>, Box<HornBody>),
}

/// `forall x y z1 .. zn (body -> head)` over the single relation `R`; the head
/// mentions only `x` and `y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HornSentence {
    pub body: HornBody,
    pub head: (String, String),
}

impl HornBody {
    pub fn holds(&self, value: &impl Fn(&str) -> usize, rel: &impl Fn(usize, usize) -> bool) -> bool {
        match self {
            HornBody::True => true,
            HornBody::Atom(a, b) => rel(value(a), value(b)),
            HornBody::And(l, r) => l.holds(value, rel) && r.holds(value, rel),
            HornBody::Or(l, r) => l.holds(value, rel) || r.holds(value, rel),
        }
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            HornBody::True => {}
            HornBody::Atom(a, b) => {
                for v in [a, b] {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
            HornBody::And(l, r) | HornBody::Or(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// The atoms of a pure conjunction, or `None` if a disjunction occurs.
    fn conjuncts(&self) -> Option<Vec<(String, String)>> {
        match self {
            HornBody::True => Some(Vec::new()),
            HornBody::Atom(a, b) => Some(vec![(a.clone(), b.clone())]),
            HornBody::And(l, r) => {
                let mut v = l.conjuncts()?;
                v.extend(r.conjuncts()?);
                Some(v)
            }
            HornBody::Or(..) => None,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, in_and: bool) -> fmt::Result {
        match self {
            HornBody::True => f.write_str("true"),
            HornBody::Atom(a, b) => write!(f, "{a} R {b}"),
            HornBody::And(l, r) => {
                l.fmt_prec(f, true)?;
                f.write_str(" & ")?;
                match **r {
                    HornBody::And(..) | HornBody::Or(..) => {
                        f.write_str("(")?;
                        r.fmt_prec(f, false)?;
                        f.write_str(")")
                    }
                    _ => r.fmt_prec(f, true),
                }
            }
            HornBody::Or(l, r) => {
                if in_and {
                    f.write_str("(")?;
                }
                l.fmt_prec(f, false)?;
                f.write_str(" | ")?;
                match **r {
                    HornBody::Or(..) => {
                        f.write_str("(")?;
                        r.fmt_prec(f, false)?;
                        f.write_str(")")?;
                    }
                    _ => r.fmt_prec(f, true)?,
                }
                if in_and {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl HornSentence {
    /// All universally bound variables: `x`, `y`, then body variables in
    /// first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = vec!["x".to_string(), "y".to_string()];
        self.body.collect_vars(&mut out);
        out
    }

    /// If the sentence is a chain condition `R^k ⊆ R` returns `k`:
    /// `0` for `true => x R x`, otherwise the length of a chain of atoms
    /// leading from `x` to `y` through pairwise distinct intermediate variables.
    pub fn chain_length(&self) -> Option<usize> {
        let atoms = self.body.conjuncts()?;
        let (hx, hy) = (&self.head.0, &self.head.1);
        if atoms.is_empty() {
            return (hx == "x" && hy == "x").then_some(0);
        }
        if hx != "x" || hy != "y" {
            return None;
        }
        let mut remaining = atoms;
        let mut current = "x".to_string();
        let mut visited = vec![current.clone()];
        let mut len = 0;
        while !remaining.is_empty() {
            let idx = remaining.iter().position(|(a, _)| *a == current)?;
            let (_, b) = remaining.swap_remove(idx);
            len += 1;
            if b == "y" {
                return remaining.is_empty().then_some(len);
            }
            if visited.contains(&b) {
                return None;
            }
            visited.push(b.clone());
            current = b;
        }
        None
    }
}

impl fmt::Display for HornBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

impl fmt::Display for HornSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {} R {}", self.body, self.head.0, self.head.1)
    }
}
