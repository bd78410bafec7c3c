//! Paths with stops. `None` is the stop symbol `0`; a word `w` stands for the
//! pseudo-infinite path `w 0^ω`.

use std::fmt;

use crate::error::{Error, Result};
use crate::kripke::{KripkeFrame, World};

pub type Letter = Option<World>;

/// A path with stops in canonical form: no trailing stops.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StopWord(Vec<Letter>);

impl StopWord {
    /// Canonicalizes by dropping trailing stops.
    pub fn new(mut raw: Vec<Letter>) -> Self {
        while raw.last() == Some(&None) {
            raw.pop();
        }
        StopWord(raw)
    }

    pub fn empty() -> Self {
        StopWord(Vec::new())
    }

    /// `0^i b`.
    pub fn zeros_then(i: usize, b: World) -> Self {
        let mut v = vec![None; i];
        v.push(Some(b));
        StopWord(v)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Least `m` with only stops beyond position `m`.
    pub fn st(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `α|_k`: the first `k` letters, padded with stops past `st`.
    pub fn restrict(&self, k: usize) -> Vec<Letter> {
        let mut v: Vec<Letter> = self.0.iter().take(k).copied().collect();
        v.resize(k, None);
        v
    }

    /// Letter at position `i` (0-based) of the infinite word.
    pub fn at(&self, i: usize) -> Letter {
        self.0.get(i).copied().flatten()
    }

    /// Non-stop letters in order.
    pub fn dropped(&self) -> Vec<World> {
        self.0.iter().flatten().copied().collect()
    }

    pub fn show(&self, frame: &KripkeFrame) -> String {
        show_raw(&self.0, frame)
    }

    pub fn parse(text: &str, frame: &KripkeFrame) -> Result<Self> {
        Ok(StopWord::new(parse_raw(text, frame)?))
    }
}

impl From<Vec<Letter>> for StopWord {
    fn from(raw: Vec<Letter>) -> Self {
        StopWord::new(raw)
    }
}

/// Dot-separated letters, `0` for a stop; `ε` for the empty word.
pub fn show_raw(raw: &[Letter], frame: &KripkeFrame) -> String {
    if raw.is_empty() {
        return "ε".to_string();
    }
    raw.iter()
        .map(|l| match l {
            None => "0",
            Some(w) => frame.name(*w),
        })
        .collect::<Vec<_>>()
        .join(".")
}

/// Inverse of [`show_raw`]; also accepts an empty string or `eps`.
pub fn parse_raw(text: &str, frame: &KripkeFrame) -> Result<Vec<Letter>> {
    let text = text.trim();
    if text.is_empty() || text == "ε" || text == "eps" {
        return Ok(Vec::new());
    }
    text.split('.')
        .map(|tok| match tok.trim() {
            "0" => Ok(None),
            name => frame.world(name).map(Some),
        })
        .collect()
}

/// Dropping stops yields a path `root R b1 R .. R bm`.
pub fn validate_stopword(raw: &[Letter], frame: &KripkeFrame) -> bool {
    let Some(root) = frame.root() else { return false };
    let mut cur = root;
    for &b in raw.iter().flatten() {
        if b >= frame.len() || !frame.has_edge(cur, b) {
            return false;
        }
        cur = b;
    }
    true
}

/// The rooted path obtained by dropping stops and prefixing the root.
pub fn f0(word: &StopWord, frame: &KripkeFrame) -> Result<Vec<World>> {
    f0_raw(word.letters(), frame)
}

pub fn f0_raw(raw: &[Letter], frame: &KripkeFrame) -> Result<Vec<World>> {
    let root = frame.root().ok_or_else(|| Error::NotRooted("paths with stops need a root".into()))?;
    if !validate_stopword(raw, frame) {
        return Err(Error::InvalidStopWord(show_raw(raw, frame)));
    }
    Ok(std::iter::once(root).chain(raw.iter().flatten().copied()).collect())
}

/// Every valid raw word of length at most `max_len`, shortest first.
pub fn enumerate_raw(frame: &KripkeFrame, max_len: usize) -> Vec<Vec<Letter>> {
    let Some(root) = frame.root() else { return Vec::new() };
    let mut out = vec![(Vec::new(), root)];
    let mut i = 0;
    while i < out.len() {
        let (word, end) = out[i].clone();
        if word.len() < max_len {
            let mut next = word.clone();
            next.push(None);
            out.push((next, end));
            for &b in frame.succ(end) {
                let mut next = word.clone();
                next.push(Some(b));
                out.push((next, b));
            }
        }
        i += 1;
    }
    out.into_iter().map(|(w, _)| w).collect()
}

/// Distinct canonical words among [`enumerate_raw`].
pub fn enumerate_stopwords(frame: &KripkeFrame, max_len: usize) -> Vec<StopWord> {
    let set: std::collections::BTreeSet<StopWord> =
        enumerate_raw(frame, max_len).into_iter().map(StopWord::new).collect();
    set.into_iter().collect()
}

impl fmt::Display for StopWord {
    /// Letters by index; see [`StopWord::show`] for world names.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| match l {
                None => "0".to_string(),
                Some(w) => format!("#{w}"),
            })
            .collect();
        f.write_str(&parts.join("."))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> KripkeFrame {
        KripkeFrame::named(&["a0", "b"], &[("a0", "b")]).unwrap().with_root(0).unwrap()
    }

    fn ab_cycle() -> KripkeFrame {
        KripkeFrame::named(&["a0", "b"], &[("a0", "b"), ("b", "a0")]).unwrap().with_root(0).unwrap()
    }

    #[test]
    fn canonical_form() {
        let f = ab();
        let w = StopWord::parse("0.0.b.0.0", &f).unwrap();
        assert_eq!(w.show(&f), "0.0.b");
        assert_eq!(w.st(), 3);
        assert_eq!(w.restrict(5), vec![None, None, Some(1), None, None]);
        assert_eq!(w.restrict(2), vec![None, None]);
        assert_eq!(StopWord::parse("0.0.0", &f).unwrap(), StopWord::empty());
    }

    #[test]
    fn f0_examples() {
        let f = ab();
        assert_eq!(f0(&StopWord::empty(), &f).unwrap(), vec![0]);
        assert_eq!(f0(&StopWord::parse("0.0.b.0.0", &f).unwrap(), &f).unwrap(), vec![0, 1]);
        let refl = KripkeFrame::named(&["a0"], &[("a0", "a0")]).unwrap().with_root(0).unwrap();
        assert_eq!(f0(&StopWord::parse("a0", &refl).unwrap(), &refl).unwrap(), vec![0, 0]);
        assert!(matches!(f0(&StopWord::parse("b.b", &f).unwrap(), &f), Err(Error::InvalidStopWord(_))));
    }

    #[test]
    fn validation_examples() {
        let c = ab_cycle();
        assert!(validate_stopword(&parse_raw("b.a0.b.a0", &c).unwrap(), &c));
        assert!(!validate_stopword(&parse_raw("a0", &c).unwrap(), &c));
        assert!(validate_stopword(&[], &c));
        assert!(validate_stopword(&[], &ab()));
    }

    #[test]
    fn raw_enumeration_on_single_edge() {
        let f = ab();
        let got: std::collections::BTreeSet<Vec<Letter>> = enumerate_raw(&f, 5).into_iter().collect();
        let mut want = std::collections::BTreeSet::new();
        for len in 0..=5 {
            want.insert(vec![None; len]);
            for k in 0..len {
                let mut w = vec![None; len];
                w[k] = Some(1);
                want.insert(w);
            }
        }
        assert_eq!(got, want);
        assert_eq!(enumerate_stopwords(&f, 3).len(), 4);
    }
}
