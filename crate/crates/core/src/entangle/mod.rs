//! The entanglement `F ⋈ G` of a rooted frame with a second rooted frame,
//! the `∼` quotient, the fibres `D♯`, and the maps `h`, `t`, `ξ`, `ψ` that
//! connect the dense frame over `F` with expanding domains over `F♯`.

mod eval;
mod hxi;
mod psi;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::kripke::{KripkeFrame, World};

pub use eval::{CompositeReport, DenseComposite, DensePredModel, PredVerdict};
pub use hxi::{
    gamma_of, h, show_mixed, t, xi, xi_locality_check, xi_surjectivity_check, LocalityReport, MixedWord,
    SurjectivityReport,
};
pub use psi::{build_psi, Psi};

/// A letter of `Σ = W ⊎ Σ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    /// A world of the left frame.
    W(World),
    /// A world of the right frame (a domain symbol).
    D(World),
}

impl Sym {
    pub fn is_w(self) -> bool {
        matches!(self, Sym::W(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EntangledWord(pub Vec<Sym>);

impl EntangledWord {
    pub fn empty() -> Self {
        EntangledWord(Vec::new())
    }

    pub fn letters(&self) -> &[Sym] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, s: Sym) {
        self.0.push(s);
    }

    /// `π`: the last letter.
    pub fn pi(&self) -> Option<Sym> {
        self.0.last().copied()
    }

    /// Strips trailing `W` letters; the result represents the `∼` class.
    pub fn canonicalize(&self) -> EntangledWord {
        let keep = self.0.iter().rposition(|s| !s.is_w()).map_or(0, |i| i + 1);
        EntangledWord(self.0[..keep].to_vec())
    }

    /// Number of domain letters.
    pub fn d_count(&self) -> usize {
        self.0.iter().filter(|s| !s.is_w()).count()
    }

    /// Letters of the left frame, in order.
    pub fn w_letters(&self) -> Vec<World> {
        self.0.iter().filter_map(|s| if let Sym::W(w) = s { Some(*w) } else { None }).collect()
    }

    /// Letters of the right frame, in order.
    pub fn d_letters(&self) -> Vec<World> {
        self.0.iter().filter_map(|s| if let Sym::D(d) = s { Some(*d) } else { None }).collect()
    }
}

/// `x ∼ y`: both have the same canonical form.
pub fn equiv(x: &EntangledWord, y: &EntangledWord) -> bool {
    x.canonicalize() == y.canonicalize()
}

/// Two rooted frames whose worlds form the alphabet `Σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entanglement {
    pub left: KripkeFrame,
    pub right: KripkeFrame,
}

impl Entanglement {
    pub fn new(left: KripkeFrame, right: KripkeFrame) -> Result<Self> {
        for f in [&left, &right] {
            if f.root().is_none() {
                return Err(Error::NotRooted("entangled frames need roots".into()));
            }
            if f.names().iter().any(|n| n == "0") {
                return Err(Error::InvalidFrame("`0` is reserved for the stop symbol".into()));
            }
        }
        if let Some(n) = left.names().iter().find(|n| right.names().contains(n)) {
            return Err(Error::InvalidFrame(format!("`{n}` names a world in both frames")));
        }
        Ok(Entanglement { left, right })
    }

    /// `F ⋈ G` with `G` the S5 frame on the domain alphabet `1..=n`.
    pub fn with_domain_alphabet(left: KripkeFrame, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::AlphabetTooSmall { needed: 1, have: 0, at: "ε".into() });
        }
        let right = KripkeFrame::total((1..=n).map(|i| i.to_string()))?.with_root(0)?;
        Self::new(left, right)
    }

    /// Size of the domain alphabet.
    pub fn sigma2(&self) -> usize {
        self.right.len()
    }

    fn left_root(&self) -> World {
        self.left.root().expect("checked on construction")
    }

    /// `p1`: the left root followed by the `W` letters.
    pub fn p1(&self, x: &EntangledWord) -> Vec<World> {
        std::iter::once(self.left_root()).chain(x.w_letters()).collect()
    }

    /// `p2`: the right root followed by the domain letters.
    pub fn p2(&self, x: &EntangledWord) -> Vec<World> {
        std::iter::once(self.right.root().expect("checked on construction")).chain(x.d_letters()).collect()
    }

    pub fn is_entangled(&self, x: &EntangledWord) -> bool {
        is_path(&self.left, &self.p1(x)) && is_path(&self.right, &self.p2(x))
    }

    /// All entangled words of length at most `max_len`, shortest first.
    pub fn enumerate(&self, max_len: usize) -> Vec<EntangledWord> {
        let mut out = vec![EntangledWord::empty()];
        let mut i = 0;
        while i < out.len() {
            let x = out[i].clone();
            if x.len() < max_len {
                let l_end = *self.p1(&x).last().expect("nonempty");
                let r_end = *self.p2(&x).last().expect("nonempty");
                for &w in self.left.succ(l_end) {
                    let mut y = x.clone();
                    y.push(Sym::W(w));
                    out.push(y);
                }
                for &d in self.right.succ(r_end) {
                    let mut y = x.clone();
                    y.push(Sym::D(d));
                    out.push(y);
                }
            }
            i += 1;
        }
        out
    }

    /// `ā ⋈ G`: entangled words of length at most `max_len` with `p1 = ā`.
    pub fn fiber(&self, path: &[World], max_len: usize) -> Vec<EntangledWord> {
        self.enumerate(max_len).into_iter().filter(|x| self.p1(x) == path).collect()
    }

    fn check_path(&self, path: &[World]) -> Result<()> {
        if path.first() != Some(&self.left_root()) || !is_path(&self.left, path) {
            return Err(Error::Precondition(format!("{path:?} is not a rooted path")));
        }
        Ok(())
    }

    /// `D♯_ā` cut to classes with at most `max_d` domain letters. A class is
    /// in `D♯_ā` iff the `W` letters of its canonical form spell a prefix of
    /// `ā` (without the root).
    pub fn dsharp(&self, path: &[World], max_d: usize) -> Result<BTreeSet<EntangledWord>> {
        self.check_path(path)?;
        let letters = &path[1..];
        let mut out = BTreeSet::new();
        // (word, consumed W letters, last domain letter)
        let mut stack = vec![(EntangledWord::empty(), 0usize)];
        while let Some((x, used)) = stack.pop() {
            let ends_in_d = x.0.last().is_none_or(|s| !s.is_w());
            if ends_in_d {
                out.insert(x.clone());
            }
            let d = x.d_count();
            if d < max_d {
                let r_end = *self.p2(&x).last().expect("nonempty");
                for &c in self.right.succ(r_end) {
                    let mut y = x.clone();
                    y.push(Sym::D(c));
                    stack.push((y, used));
                }
                if used < letters.len() {
                    let mut y = x.clone();
                    y.push(Sym::W(letters[used]));
                    stack.push((y, used + 1));
                }
            }
        }
        Ok(out)
    }

    /// Classes of `D♯_path` that are not in `D♯` of the parent path.
    pub fn fresh_classes(&self, path: &[World], max_d: usize) -> Result<Vec<EntangledWord>> {
        let all = self.dsharp(path, max_d)?;
        let mut fresh: Vec<EntangledWord> =
            all.into_iter().filter(|c| c.w_letters().len() + 1 == path.len()).collect();
        fresh.sort_by(|a, b| (a.d_count(), a.len(), a).cmp(&(b.d_count(), b.len(), b)));
        Ok(fresh)
    }

    /// For `ā R♯ b̄` checks `D♯_ā ⊆ D♯_b̄` at truncation `max_d` through the
    /// witnesses `ȳ·c̄`, and looks for a class of `D♯_b̄` outside `D♯_ā`.
    pub fn domain_monotonicity_check(&self, a: &[World], b: &[World], max_d: usize) -> Result<MonotonicityReport> {
        self.check_path(a)?;
        self.check_path(b)?;
        if b.len() <= a.len() || b[..a.len()] != *a {
            return Err(Error::Precondition(format!("{b:?} does not extend {a:?}")));
        }
        let da = self.dsharp(a, max_d)?;
        let db = self.dsharp(b, max_d)?;
        let mut missing = None;
        for x in &da {
            // ȳ ∈ D'_ā with ȳ ∼ x, then ȳ·c̄ ∈ D'_b̄
            let mut y = x.clone();
            for &w in &a[x.w_letters().len() + 1..] {
                y.push(Sym::W(w));
            }
            for &w in &b[a.len()..] {
                y.push(Sym::W(w));
            }
            let ok = self.is_entangled(&y) && self.p1(&y) == b && equiv(&y, x) && db.contains(x);
            if !ok && missing.is_none() {
                missing = Some(x.clone());
            }
        }
        let strict_witness = db.iter().find(|c| !da.contains(*c)).cloned();
        Ok(MonotonicityReport { checked: da.len(), missing, strict_witness })
    }

    pub fn show(&self, x: &EntangledWord) -> String {
        if x.is_empty() {
            return "ε".to_string();
        }
        x.0.iter().map(|s| self.sym_name(*s)).collect::<Vec<_>>().join(".")
    }

    /// `[x]` with `x` canonicalized.
    pub fn show_class(&self, x: &EntangledWord) -> String {
        format!("[{}]", self.show(&x.canonicalize()))
    }

    pub fn sym_name(&self, s: Sym) -> &str {
        match s {
            Sym::W(w) => self.left.name(w),
            Sym::D(d) => self.right.name(d),
        }
    }

    /// Parses dot-separated letters, `ε`/`eps`/empty for the empty word.
    pub fn parse(&self, text: &str) -> Result<EntangledWord> {
        let text = text.trim();
        if text.is_empty() || text == "ε" || text == "eps" {
            return Ok(EntangledWord::empty());
        }
        let word = text
            .split('.')
            .map(|tok| {
                let tok = tok.trim();
                self.left
                    .world(tok)
                    .map(Sym::W)
                    .or_else(|_| self.right.world(tok).map(Sym::D))
                    .map_err(|_| Error::UnknownWorld(tok.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EntangledWord(word))
    }

    /// Parses a path of left worlds (root included), dot-separated.
    pub fn parse_path(&self, text: &str) -> Result<Vec<World>> {
        let path = text.split('.').map(|t| self.left.world(t.trim())).collect::<Result<Vec<_>>>()?;
        self.check_path(&path)?;
        Ok(path)
    }

    pub fn show_path(&self, path: &[World]) -> String {
        path.iter().map(|&w| self.left.name(w)).collect::<Vec<_>>().join(".")
    }
}

fn is_path(frame: &KripkeFrame, path: &[World]) -> bool {
    path.windows(2).all(|p| frame.has_edge(p[0], p[1]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityReport {
    pub checked: usize,
    /// A class of `D♯_ā` whose witness failed.
    pub missing: Option<EntangledWord>,
    pub strict_witness: Option<EntangledWord>,
}

impl MonotonicityReport {
    pub fn included(&self) -> bool {
        self.missing.is_none()
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::W(w) => write!(f, "w{w}"),
            Sym::D(d) => write!(f, "d{d}"),
        }
    }
}
