//! The dense n-frames `N_ω(F)` and `N_ω^Γ(F)` on pseudo-infinite paths.
//!
//! Neighbourhood bases `U_k(α)` are infinite; they are enumerated up to a
//! bound on inserted stops and, where possible, quantified over exactly by
//! classifying the behaviour of tail families (see [`eval`]).

pub mod eval;
pub mod word;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::horn::{gamma_close, HornTheory};
use crate::kripke::{check_axiom_inclusion, unravel, KripkeFrame, Unravelling, World};

pub use eval::{
    bounded_eval, counterexample_g, BoxWitness, CounterexampleReport, DenseModel, LetterClass, PatternValuation,
    TailClass, Verdict,
};
pub use word::{enumerate_raw, enumerate_stopwords, f0, f0_raw, parse_raw, show_raw, validate_stopword, Letter, StopWord};

/// Enumeration bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseBounds {
    pub k_max: usize,
    /// Stops inserted into an enumerated member.
    pub j_max: usize,
    /// Depth of truncated unravellings, and the longest closed extension
    /// considered in the Γ case.
    pub depth: usize,
}

impl Default for DenseBounds {
    fn default() -> Self {
        DenseBounds { k_max: 12, j_max: 8, depth: 6 }
    }
}

/// `N_ω(F)`, or `N_ω^Γ(F)` when a chain theory is given.
#[derive(Debug, Clone)]
pub struct DenseFrame {
    pub base: KripkeFrame,
    pub theory: Option<HornTheory>,
    pub bounds: DenseBounds,
    /// Path-length increments `d` such that `(R♯)^Γ` relates a path to its
    /// extensions by `d` letters, up to `bounds.depth`.
    steps: BTreeSet<usize>,
    chains: Vec<usize>,
}

/// Distances realised by the Γ-closure of a tree relation when Γ consists of
/// sentences `R^k ⊆ R`: the least set containing 1 and closed under sums of
/// `k` members (`0` for reflexivity), cut at `limit`.
pub fn closed_distances(chains: &[usize], limit: usize) -> BTreeSet<usize> {
    let mut s: BTreeSet<usize> = BTreeSet::from([1]);
    if limit == 0 {
        s.clear();
    }
    loop {
        let mut next = s.clone();
        for &k in chains {
            // all sums of exactly k members of s
            let mut sums: BTreeSet<usize> = BTreeSet::from([0]);
            for _ in 0..k {
                sums = sums.iter().flat_map(|&a| s.iter().map(move |&b| a + b)).filter(|&d| d <= limit).collect();
            }
            next.extend(sums);
        }
        if next == s {
            return s;
        }
        s = next;
    }
}

impl DenseFrame {
    pub fn new(base: KripkeFrame, bounds: DenseBounds) -> Result<Self> {
        Self::build(base, None, bounds)
    }

    pub fn with_theory(base: KripkeFrame, theory: HornTheory, bounds: DenseBounds) -> Result<Self> {
        Self::build(base, Some(theory), bounds)
    }

    fn build(base: KripkeFrame, theory: Option<HornTheory>, bounds: DenseBounds) -> Result<Self> {
        if base.root().is_none() {
            return Err(Error::NotRooted("dense frames are built on rooted frames".into()));
        }
        if let Some(w) = base.worlds().find(|&w| base.name(w) == "0") {
            return Err(Error::InvalidFrame(format!("world {w} is named `0`, which is the stop symbol")));
        }
        let chains = match &theory {
            Some(t) => t.chain_lengths()?,
            None => Vec::new(),
        };
        let steps = closed_distances(&chains, bounds.depth.max(1));
        Ok(DenseFrame { base, theory, bounds, steps, chains })
    }

    pub fn is_plain(&self) -> bool {
        self.steps.iter().all(|&d| d == 1)
    }

    pub fn is_reflexive(&self) -> bool {
        self.steps.contains(&0)
    }

    pub fn steps(&self) -> &BTreeSet<usize> {
        &self.steps
    }

    pub fn root(&self) -> World {
        self.base.root().expect("checked on construction")
    }

    pub fn validate(&self, raw: &[Letter]) -> bool {
        validate_stopword(raw, &self.base)
    }

    pub fn f0(&self, w: &StopWord) -> Result<Vec<World>> {
        f0(w, &self.base)
    }

    pub fn word(&self, text: &str) -> Result<StopWord> {
        let w = StopWord::parse(text, &self.base)?;
        if !self.validate(w.letters()) {
            return Err(Error::InvalidStopWord(text.to_string()));
        }
        Ok(w)
    }

    pub fn show(&self, w: &StopWord) -> String {
        w.show(&self.base)
    }

    /// `p (R♯)^Γ q` for rooted paths, or plain `R♯` without Γ.
    pub fn path_related(&self, p: &[World], q: &[World]) -> bool {
        if q.len() < p.len() || q[..p.len()] != *p {
            return false;
        }
        let d = q.len() - p.len();
        if d <= self.bounds.depth.max(1) {
            self.steps.contains(&d)
        } else {
            closed_distances(&self.chains, d).contains(&d)
        }
    }

    /// Extensions of the path `p` related to it, at most `bounds.depth` letters
    /// longer.
    pub fn related_paths(&self, p: &[World]) -> Vec<Vec<World>> {
        let mut out = Vec::new();
        let mut layer = vec![p.to_vec()];
        for d in 0..=self.bounds.depth {
            if self.steps.contains(&d) {
                out.extend(layer.iter().cloned());
            }
            layer = layer
                .iter()
                .flat_map(|q| {
                    let end = *q.last().expect("paths are nonempty");
                    self.base.succ(end).iter().map(move |&b| {
                        let mut r = q.clone();
                        r.push(b);
                        r
                    })
                })
                .collect();
        }
        out
    }

    /// The depth-truncated unravelling with its relation Γ-closed.
    pub fn closed_unravelling(&self) -> Result<Unravelling> {
        let mut u = unravel(&self.base, self.bounds.depth)?;
        if let Some(t) = &self.theory {
            u.frame = gamma_close(&u.frame, t);
        }
        Ok(u)
    }

    /// `β ∈ U_k(α)` (or `U_k^Γ(α)`): `α|_m = β|_m` for `m = max(k, st(α))`
    /// and `f0(α)` is related to `f0(β)`.
    pub fn is_member_uk(&self, beta: &StopWord, alpha: &StopWord, k: usize) -> Result<bool> {
        let m = k.max(alpha.st());
        if beta.restrict(m) != alpha.restrict(m) {
            return Ok(false);
        }
        Ok(self.path_related(&self.f0(alpha)?, &self.f0(beta)?))
    }

    /// Members of `U_k(α)` with at most `j_max` inserted stops and extensions
    /// of at most `bounds.depth` letters.
    pub fn uk_members(&self, alpha: &StopWord, k: usize, j_max: usize) -> Result<Vec<StopWord>> {
        let path = self.f0(alpha)?;
        let prefix = alpha.restrict(k.max(alpha.st()));
        let mut out = Vec::new();
        for q in self.related_paths(&path) {
            let ext = &q[path.len()..];
            if ext.is_empty() {
                out.push(alpha.clone());
                continue;
            }
            for gaps in gap_vectors(ext.len(), j_max) {
                let mut w = prefix.clone();
                for (g, &b) in gaps.iter().zip(ext) {
                    w.extend(std::iter::repeat(None).take(*g));
                    w.push(Some(b));
                }
                out.push(StopWord::new(w));
            }
        }
        Ok(out)
    }

    /// For `β ∈ U_n(α)` returns `k = st(β)` with `β ∉ U_{k+1}(α)`.
    pub fn density_witness(&self, alpha: &StopWord, n: usize, beta: &StopWord) -> Result<usize> {
        if !self.is_member_uk(beta, alpha, n)? {
            return Err(Error::Precondition(format!(
                "{} is not in U_{n}({})",
                self.show(beta),
                self.show(alpha)
            )));
        }
        let k = beta.st();
        if self.is_member_uk(beta, alpha, k + 1)? {
            return Err(Error::Precondition(format!(
                "{} lies in every U_n({}); the closed relation is reflexive there",
                self.show(beta),
                self.show(alpha)
            )));
        }
        Ok(k)
    }

    /// Compares `f0(U_k(α))` with the related paths of `f0(α)`.
    pub fn f0_image_check(&self, alpha: &StopWord, k: usize, j_max: usize) -> Result<ImageReport> {
        let path = self.f0(alpha)?;
        let expected: BTreeSet<Vec<World>> = self.related_paths(&path).into_iter().collect();
        let mut image = BTreeSet::new();
        let mut outside = Vec::new();
        for beta in self.uk_members(alpha, k, j_max)? {
            if !self.is_member_uk(&beta, alpha, k)? {
                outside.push(beta.clone());
            }
            let q = self.f0(&beta)?;
            if !expected.contains(&q) {
                outside.push(beta);
            }
            image.insert(q);
        }
        // the witness α 0^{k - st(α)} e for each related path α·e
        let mut unwitnessed = Vec::new();
        for q in &expected {
            let mut w = alpha.restrict(k.max(alpha.st()));
            w.extend(q[path.len()..].iter().map(|&b| Some(b)));
            let beta = StopWord::new(w);
            if !self.is_member_uk(&beta, alpha, k)? || self.f0(&beta)? != *q {
                unwitnessed.push(q.clone());
            }
        }
        Ok(ImageReport { expected, image, outside, unwitnessed })
    }

    /// `f0` maps the dense frame onto `N(F♯)`: surjectivity over the
    /// truncated unravelling, and zig and zag at `samples` random points.
    pub fn f0_pmorphism_check(&self, samples: usize, seed: u64) -> Result<PmorphismReport> {
        let u = unravel(&self.base, self.bounds.depth)?;
        let mut unreached = Vec::new();
        for p in &u.paths {
            let w = StopWord::new(p[1..].iter().map(|&b| Some(b)).collect());
            if self.f0(&w)? != *p {
                unreached.push(p.clone());
            }
        }
        let words: Vec<Vec<Letter>> = enumerate_raw(&self.base, self.bounds.depth.saturating_sub(1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = Vec::new();
        for _ in 0..samples {
            let alpha = StopWord::new(words.choose(&mut rng).expect("ε is always valid").clone());
            let k = rng.gen_range(0..=self.bounds.k_max);
            let r = self.f0_image_check(&alpha, k, self.bounds.j_max.min(3))?;
            if !r.passed() {
                failures.push((alpha, k));
            }
        }
        Ok(PmorphismReport { paths: u.paths.len(), unreached, samples, failures })
    }

    /// Follows random chains `α_1 ∈ U_m(α), .., α_n ∈ U_m(α_{n-1})` and checks
    /// `α_n ∈ U_m(α)`; requires `R^n ⊆ R` on the closed unravelling.
    pub fn chain_collapse_check(
        &self,
        alpha: &StopWord,
        m: usize,
        n: usize,
        samples: usize,
        seed: u64,
    ) -> Result<CollapseReport> {
        let closed = self.closed_unravelling()?;
        if !check_axiom_inclusion(&closed.frame, n) {
            return Err(Error::Precondition(format!("the closed unravelling does not satisfy R^{n} ⊆ R")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = self.bounds.j_max.min(3);
        let mut report = CollapseReport { chains: 0, dead_ends: 0, failures: Vec::new() };
        for _ in 0..samples {
            let mut chain = vec![alpha.clone()];
            for _ in 0..n {
                let cur = chain.last().expect("nonempty");
                let members = self.uk_members(cur, m, j)?;
                match members.choose(&mut rng) {
                    Some(b) => chain.push(b.clone()),
                    None => break,
                }
            }
            if chain.len() < n + 1 {
                report.dead_ends += 1;
                continue;
            }
            report.chains += 1;
            let last = chain.last().expect("nonempty");
            if !self.is_member_uk(last, alpha, m)? {
                report.failures.push(chain);
            }
        }
        Ok(report)
    }
}

/// All ways to put at most `j_max` stops in front of each of `len` letters.
fn gap_vectors(len: usize, j_max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                let used: usize = v.iter().sum();
                (0..=j_max - used).map(move |g| {
                    let mut w = v.clone();
                    w.push(g);
                    w
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageReport {
    pub expected: BTreeSet<Vec<World>>,
    pub image: BTreeSet<Vec<World>>,
    /// Enumerated members failing membership or mapping outside the target.
    pub outside: Vec<StopWord>,
    /// Related paths without a member witness.
    pub unwitnessed: Vec<Vec<World>>,
}

impl ImageReport {
    pub fn passed(&self) -> bool {
        self.outside.is_empty() && self.unwitnessed.is_empty() && self.image == self.expected
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmorphismReport {
    pub paths: usize,
    pub unreached: Vec<Vec<World>>,
    pub samples: usize,
    pub failures: Vec<(StopWord, usize)>,
}

impl PmorphismReport {
    pub fn passed(&self) -> bool {
        self.unreached.is_empty() && self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseReport {
    pub chains: usize,
    pub dead_ends: usize,
    pub failures: Vec<Vec<StopWord>>,
}

impl CollapseReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The "next" frame on `n` points: `root -> 1 -> 2 -> ..`.
pub fn next_frame(n: usize) -> KripkeFrame {
    let names = std::iter::once("root".to_string()).chain((1..n).map(|i| i.to_string()));
    let mut f = KripkeFrame::new(names).expect("distinct names");
    for i in 1..n {
        f.add_edge(i - 1, i);
    }
    f.with_root(0).expect("a chain is rooted")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::horn::HornTheory;

    fn g() -> DenseFrame {
        DenseFrame::new(next_frame(8), DenseBounds::default()).unwrap()
    }

    #[test]
    fn membership_examples() {
        let g = g();
        let eps = StopWord::empty();
        assert!(g.is_member_uk(&g.word("0.0.1").unwrap(), &eps, 2).unwrap());
        assert!(!g.is_member_uk(&g.word("0.1").unwrap(), &eps, 2).unwrap());
        assert!(!g.is_member_uk(&eps, &eps, 0).unwrap());
    }

    #[test]
    fn uk_members_on_next_frame() {
        let g = g();
        let members = g.uk_members(&StopWord::empty(), 2, 3).unwrap();
        let shown: Vec<String> = members.iter().map(|w| g.show(w)).collect();
        assert_eq!(shown, ["0.0.1", "0.0.0.1", "0.0.0.0.1", "0.0.0.0.0.1"]);
        let terminal = DenseFrame::new(next_frame(1), DenseBounds::default()).unwrap();
        assert!(terminal.uk_members(&StopWord::empty(), 0, 5).unwrap().is_empty());
    }

    #[test]
    fn density_examples() {
        let g = g();
        let eps = StopWord::empty();
        let beta = g.word("0.0.1").unwrap();
        assert_eq!(g.density_witness(&eps, 2, &beta).unwrap(), 3);
        assert!(!g.is_member_uk(&beta, &eps, 4).unwrap());
        assert!(g.density_witness(&eps, 3, &beta).is_err());
    }

    #[test]
    fn antitone_and_dense_on_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let f = gen::random_rooted_frame(&mut rng, 3, 0.4);
            let d = DenseFrame::new(f, DenseBounds::default()).unwrap();
            for raw in enumerate_raw(&d.base, 3) {
                let alpha = StopWord::new(raw);
                for k in 0..5 {
                    for beta in d.uk_members(&alpha, k, 4).unwrap() {
                        assert!(d.is_member_uk(&beta, &alpha, k).unwrap());
                        for m in 0..k {
                            assert!(d.is_member_uk(&beta, &alpha, m).unwrap());
                        }
                        let w = d.density_witness(&alpha, k, &beta).unwrap();
                        assert!(w >= alpha.st());
                    }
                }
            }
        }
    }

    #[test]
    fn f0_image_examples() {
        let g = g();
        let r = g.f0_image_check(&StopWord::empty(), 3, 4).unwrap();
        assert!(r.passed());
        assert_eq!(r.image, BTreeSet::from([vec![0, 1]]));
        let terminal = DenseFrame::new(next_frame(1), DenseBounds::default()).unwrap();
        let r = terminal.f0_image_check(&StopWord::empty(), 0, 4).unwrap();
        assert!(r.passed() && r.image.is_empty());
    }

    #[test]
    fn pmorphism_checks() {
        let single = DenseFrame::new(KripkeFrame::with_size(1).with_root(0).unwrap(), DenseBounds::default()).unwrap();
        assert!(single.f0_pmorphism_check(10, 1).unwrap().passed());
        let cyc = KripkeFrame::from_edges(2, [(0, 1), (1, 0)]).with_root(0).unwrap();
        let d = DenseFrame::new(cyc, DenseBounds { depth: 4, ..DenseBounds::default() }).unwrap();
        assert!(d.f0_pmorphism_check(50, 2).unwrap().passed());
        let gt = DenseFrame::with_theory(next_frame(6), HornTheory::from_axioms([2]), DenseBounds::default()).unwrap();
        assert!(gt.f0_pmorphism_check(50, 3).unwrap().passed());
    }

    #[test]
    fn distances_match_truncated_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for ks in [vec![2], vec![0], vec![3], vec![0, 3], vec![2, 3], vec![4]] {
            let f = gen::random_rooted_frame(&mut rng, 2, 0.5);
            let bounds = DenseBounds { depth: 4, ..Default::default() };
            let d = DenseFrame::with_theory(f, HornTheory::from_axioms(ks.clone()), bounds)
                .unwrap();
            let u = d.closed_unravelling().unwrap();
            for a in 0..u.paths.len() {
                for b in 0..u.paths.len() {
                    assert_eq!(
                        u.frame.has_edge(a, b),
                        d.path_related(&u.paths[a], &u.paths[b]),
                        "{ks:?} {:?} {:?}",
                        u.paths[a],
                        u.paths[b]
                    );
                }
            }
        }
    }

    #[test]
    fn closed_distance_sets() {
        assert_eq!(closed_distances(&[], 5), BTreeSet::from([1]));
        assert_eq!(closed_distances(&[2], 4), BTreeSet::from([1, 2, 3, 4]));
        assert_eq!(closed_distances(&[3], 6), BTreeSet::from([1, 3, 5]));
        assert_eq!(closed_distances(&[0], 6), BTreeSet::from([0, 1]));
        assert_eq!(closed_distances(&[0, 3], 4), BTreeSet::from([0, 1, 2, 3, 4]));
    }

    #[test]
    fn reflexive_closure_breaks_density() {
        let d = DenseFrame::with_theory(next_frame(4), HornTheory::from_axioms([0]), DenseBounds::default()).unwrap();
        let eps = StopWord::empty();
        assert!(d.is_member_uk(&eps, &eps, 7).unwrap());
        assert!(d.density_witness(&eps, 7, &eps).is_err());
    }

    #[test]
    fn chain_collapse() {
        let gt = DenseFrame::with_theory(next_frame(8), HornTheory::from_axioms([2]), DenseBounds::default()).unwrap();
        let r = gt.chain_collapse_check(&StopWord::empty(), 2, 2, 100, 9).unwrap();
        assert!(r.passed() && r.chains > 50, "{r:?}");
        assert!(gt.chain_collapse_check(&StopWord::empty(), 2, 1, 10, 9).unwrap().passed());
        let plain = g();
        assert!(plain.chain_collapse_check(&StopWord::empty(), 2, 2, 10, 9).is_err());
        let t3 = KripkeFrame::from_edges(3, [(0, 1), (1, 2), (0, 2)]).with_root(0).unwrap();
        let d = DenseFrame::with_theory(t3, HornTheory::from_axioms([2]), DenseBounds::default()).unwrap();
        assert!(d.chain_collapse_check(&StopWord::empty(), 1, 2, 100, 3).unwrap().passed());
    }
}
