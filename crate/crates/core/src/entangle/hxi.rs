//! `h` fills the stops of a path with domain letters, `t` inverts it, and
//! `ξ_α(γ) = [h(α, γ)]`.

use crate::dense::{f0_raw, DenseFrame, StopWord};
use crate::error::{Error, Result};

use super::{EntangledWord, Entanglement, Sym};

/// A word over `W ∪ Σ₂ ∪ {0}`, read as followed by `0^ω`.
pub type MixedWord = Vec<Option<Sym>>;

/// `h(α, γ)`: a nonzero head of `γ` is emitted first; on a zero head of `γ`
/// the head of `α` is emitted (if nonzero) and both advance.
pub fn h(alpha: &StopWord, gamma: &StopWord) -> EntangledWord {
    let mut out = EntangledWord::empty();
    let (mut i, mut j) = (0, 0);
    while i < alpha.st() {
        match gamma.at(j) {
            Some(c) => out.push(Sym::D(c)),
            None => {
                if let Some(a) = alpha.at(i) {
                    out.push(Sym::W(a));
                }
                i += 1;
            }
        }
        j += 1;
    }
    for c in gamma.letters().iter().skip(j).flatten() {
        out.push(Sym::D(*c));
    }
    out
}

/// `ξ_α(γ)` as a canonical representative.
pub fn xi(alpha: &StopWord, gamma: &StopWord) -> EntangledWord {
    h(alpha, gamma).canonicalize()
}

/// `t(α, ȳ)`: inserts the domain letters of `ȳ` into `α` so that dropping
/// the stops of the result gives back `ȳ`. The `W` letters of `ȳ` must be
/// exactly the nonzero letters of `α`.
pub fn t(alpha: &StopWord, y: &EntangledWord) -> Result<MixedWord> {
    if alpha.dropped() != y.w_letters() {
        return Err(Error::Incompatible(format!(
            "the path letters of the word {:?} are not those of {alpha}",
            y.letters()
        )));
    }
    let ys = y.letters();
    let mut out = MixedWord::new();
    let (mut i, mut j) = (0, 0);
    while i < alpha.st() {
        match (ys.get(j), alpha.at(i)) {
            (Some(Sym::D(c)), _) => {
                out.push(Some(Sym::D(*c)));
                j += 1;
            }
            (_, None) => {
                out.push(None);
                i += 1;
            }
            (Some(Sym::W(c)), Some(a)) if *c == a => {
                out.push(Some(Sym::W(a)));
                i += 1;
                j += 1;
            }
            _ => return Err(Error::Incompatible(format!("cannot align {alpha} with {:?}", y.letters()))),
        }
    }
    out.extend(ys[j..].iter().map(|&s| Some(s)));
    let dropped: Vec<Sym> = out.iter().flatten().copied().collect();
    if dropped != ys {
        return Err(Error::Incompatible(format!("t lost letters of {:?}", y.letters())));
    }
    Ok(out)
}

/// Replaces the path letters of a mixed word by stops.
pub fn gamma_of(word: &[Option<Sym>]) -> StopWord {
    StopWord::new(
        word.iter()
            .map(|s| match s {
                Some(Sym::D(d)) => Some(*d),
                _ => None,
            })
            .collect(),
    )
}

pub fn show_mixed(ent: &Entanglement, word: &[Option<Sym>]) -> String {
    if word.is_empty() {
        return "ε".to_string();
    }
    word.iter()
        .map(|s| match s {
            None => "0",
            Some(s) => ent.sym_name(*s),
        })
        .collect::<Vec<_>>()
        .join(".")
}

impl Entanglement {
    pub fn show_gamma(&self, gamma: &StopWord) -> String {
        gamma.show(&self.right)
    }

    pub fn parse_gamma(&self, text: &str) -> Result<StopWord> {
        StopWord::parse(text, &self.right)
    }

    pub fn show_alpha(&self, alpha: &StopWord) -> String {
        alpha.show(&self.left)
    }

    pub fn parse_alpha(&self, text: &str) -> Result<StopWord> {
        let a = StopWord::parse(text, &self.left)?;
        f0_raw(a.letters(), &self.left)?;
        Ok(a)
    }

    /// A `γ` with `ξ_α(γ) = [x]`, built through `t` from a member of
    /// `D'_{f0(α)}` equivalent to `x`.
    pub fn preimage(&self, alpha: &StopWord, x: &EntangledWord) -> Result<StopWord> {
        let path = f0_raw(alpha.letters(), &self.left)?;
        let mut y = x.canonicalize();
        let have = y.w_letters().len() + 1;
        if have > path.len() || path[1..have] != y.w_letters()[..] {
            return Err(Error::Precondition(format!(
                "{} is not in D♯ of {}",
                self.show_class(x),
                self.show_path(&path)
            )));
        }
        for &w in &path[have..] {
            y.push(Sym::W(w));
        }
        Ok(gamma_of(&t(alpha, &y)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurjectivityReport {
    pub classes: usize,
    pub hit: usize,
    pub unreached: Vec<EntangledWord>,
}

impl SurjectivityReport {
    pub fn passed(&self) -> bool {
        self.unreached.is_empty()
    }
}

/// Every class of `D♯_{f0(α)}` (at most `max_d` domain letters) is
/// `ξ_α(γ)` for the `γ` produced by `t`.
pub fn xi_surjectivity_check(ent: &Entanglement, alpha: &StopWord, max_d: usize) -> Result<SurjectivityReport> {
    let path = f0_raw(alpha.letters(), &ent.left)?;
    let classes = ent.dsharp(&path, max_d)?;
    let mut unreached = Vec::new();
    for c in &classes {
        let gamma = ent.preimage(alpha, c)?;
        if xi(alpha, &gamma) != *c {
            unreached.push(c.clone());
        }
    }
    Ok(SurjectivityReport { classes: classes.len(), hit: classes.len() - unreached.len(), unreached })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalityReport {
    /// `st(γ) + st(α)`.
    pub m: usize,
    pub members: usize,
    pub failure: Option<StopWord>,
}

impl LocalityReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// `ξ_β(γ) = ξ_α(γ)` for the enumerated members `β` of `U_m(α)`,
/// `m = st(γ) + st(α)`.
pub fn xi_locality_check(
    ent: &Entanglement,
    dense: &DenseFrame,
    alpha: &StopWord,
    gamma: &StopWord,
    j_max: usize,
) -> Result<LocalityReport> {
    if dense.base != ent.left {
        return Err(Error::Incompatible("the dense frame is not over the entangled frame".into()));
    }
    let m = gamma.st() + alpha.st();
    let here = xi(alpha, gamma);
    let members = dense.uk_members(alpha, m, j_max)?;
    let failure = members.iter().find(|b| xi(b, gamma) != here).cloned();
    Ok(LocalityReport { m, members: members.len(), failure })
}
