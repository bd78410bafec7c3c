//! Universal strict Horn sentences on finite frames and the Γ-closure.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::kripke::{check_pmorphism, KripkeFrame, KripkeMorphism, MorphismViolation, World};
use crate::syntax::{parse_horn, HornBody, HornSentence};

/// A finite set of Horn sentences over the single relation `R`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HornTheory {
    pub sentences: Vec<HornSentence>,
}

impl HornTheory {
    pub fn new(sentences: Vec<HornSentence>) -> Self {
        HornTheory { sentences }
    }

    pub fn empty() -> Self {
        HornTheory::default()
    }

    /// One sentence per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sentences = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let s = parse_horn(line).map_err(|e| Error::Format { line: i + 1, message: e.to_string() })?;
            sentences.push(s);
        }
        Ok(HornTheory { sentences })
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn with(mut self, s: HornSentence) -> Self {
        self.sentences.push(s);
        self
    }

    pub fn holds_on(&self, frame: &KripkeFrame) -> bool {
        self.sentences.iter().all(|s| eval_horn(frame, s))
    }

    /// The `k` of each sentence read as `R^k ⊆ R`, or an error naming the
    /// first sentence outside that class.
    pub fn chain_lengths(&self) -> Result<Vec<usize>> {
        self.sentences
            .iter()
            .map(|s| s.chain_length().ok_or_else(|| Error::NotChainTheory(s.to_string())))
            .collect()
    }

    /// Theory of the one-way axioms `box p -> box^k p`, `k` in `ks`.
    pub fn from_axioms(ks: impl IntoIterator<Item = usize>) -> Self {
        HornTheory { sentences: ks.into_iter().filter_map(axiom_to_horn).collect() }
    }
}

impl fmt::Display for HornTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sentences {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Calls `visit` on every assignment of worlds to `vars`; stops early when it
/// returns `false`.
fn for_each_assignment(n: usize, vars: usize, mut visit: impl FnMut(&[World]) -> bool) {
    let mut a = vec![0; vars];
    loop {
        if !visit(&a) {
            return;
        }
        let mut i = 0;
        loop {
            if i == vars {
                return;
            }
            a[i] += 1;
            if a[i] < n {
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}

fn body_holds(body: &HornBody, vars: &[String], a: &[World], rel: &impl Fn(World, World) -> bool) -> bool {
    let value = |v: &str| a[vars.iter().position(|x| x == v).expect("variable is bound")];
    body.holds(&value, rel)
}

/// Assignments whose body holds but whose head pair is missing.
fn violations(n: usize, s: &HornSentence, rel: &impl Fn(World, World) -> bool) -> Vec<(World, World)> {
    let vars = s.variables();
    let hx = vars.iter().position(|v| *v == s.head.0).expect("head variable is bound");
    let hy = vars.iter().position(|v| *v == s.head.1).expect("head variable is bound");
    let mut out = Vec::new();
    for_each_assignment(n, vars.len(), |a| {
        if !rel(a[hx], a[hy]) && body_holds(&s.body, &vars, a, rel) {
            out.push((a[hx], a[hy]));
        }
        true
    });
    out
}

pub fn eval_horn(frame: &KripkeFrame, s: &HornSentence) -> bool {
    horn_counterexample(frame, s).is_none()
}

/// An assignment (in the order of [`HornSentence::variables`]) making the body
/// true and the head false.
pub fn horn_counterexample(frame: &KripkeFrame, s: &HornSentence) -> Option<Vec<World>> {
    let vars = s.variables();
    let hx = vars.iter().position(|v| *v == s.head.0).expect("head variable is bound");
    let hy = vars.iter().position(|v| *v == s.head.1).expect("head variable is bound");
    let rel = |a: World, b: World| frame.has_edge(a, b);
    let mut found = None;
    for_each_assignment(frame.len(), vars.len(), |a| {
        if !rel(a[hx], a[hy]) && body_holds(&s.body, &vars, a, &rel) {
            found = Some(a.to_vec());
            return false;
        }
        true
    });
    found
}

/// `F^Γ` together with the number of rounds the fixpoint took.
pub fn gamma_close_counted(frame: &KripkeFrame, theory: &HornTheory) -> (KripkeFrame, usize) {
    let n = frame.len();
    let mut edges = frame.edge_set();
    let mut rounds = 0;
    loop {
        let rel = |a: World, b: World| edges.contains(&(a, b));
        let added: BTreeSet<(World, World)> =
            theory.sentences.iter().flat_map(|s| violations(n, s, &rel)).collect();
        if added.is_empty() {
            break;
        }
        rounds += 1;
        edges.extend(added);
    }
    (frame.with_edges(edges), rounds)
}

/// The least extension of the relation satisfying every sentence of `theory`.
pub fn gamma_close(frame: &KripkeFrame, theory: &HornTheory) -> KripkeFrame {
    gamma_close_counted(frame, theory).0
}

/// Result of [`closure_minimality_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalityReport {
    pub added: Vec<(World, World)>,
    /// Added pairs whose removal leaves a relation still satisfying Γ.
    pub removable: Vec<(World, World)>,
    /// Added pairs that re-closure from `R` inside `R^Γ \ {e}` fails to restore.
    pub not_restored: Vec<(World, World)>,
}

impl MinimalityReport {
    pub fn passed(&self) -> bool {
        self.removable.is_empty() && self.not_restored.is_empty()
    }
}

/// For each pair added by the closure, removing it must break Γ, and closing
/// the original relation again must bring it back.
pub fn closure_minimality_check(frame: &KripkeFrame, theory: &HornTheory) -> MinimalityReport {
    let closed = gamma_close(frame, theory);
    let base = frame.edge_set();
    let added: Vec<(World, World)> = closed.edges().filter(|e| !base.contains(e)).collect();
    let mut report = MinimalityReport { added: added.clone(), removable: Vec::new(), not_restored: Vec::new() };
    for e in added {
        let smaller = closed.with_edges(closed.edges().filter(|&x| x != e));
        if theory.holds_on(&smaller) {
            report.removable.push(e);
        }
        if !gamma_close(frame, theory).has_edge(e.0, e.1) {
            report.not_restored.push(e);
        }
    }
    report
}

/// `f : F -> G` with `G |= Γ` stays a p-morphism from `F^Γ` to `G`.
pub fn closure_pmorphism_lift_check(
    f: &KripkeMorphism,
    theory: &HornTheory,
) -> Result<std::result::Result<KripkeMorphism, MorphismViolation>> {
    if let Some(s) = theory.sentences.iter().find(|s| !eval_horn(&f.target, s)) {
        return Err(Error::Precondition(format!("target frame does not satisfy `{s}`")));
    }
    let closed = gamma_close(&f.source, theory);
    Ok(check_pmorphism(&f.map, &closed, &f.target))
}

/// The Horn sentence for `box p -> box^k p`; `None` for `k = 1`.
pub fn axiom_to_horn(k: usize) -> Option<HornSentence> {
    let atom = |a: &str, b: &str| HornBody::Atom(a.to_string(), b.to_string());
    match k {
        0 => Some(HornSentence { body: HornBody::True, head: ("x".into(), "x".into()) }),
        1 => None,
        _ => {
            let names: Vec<String> = std::iter::once("x".to_string())
                .chain((1..k).map(|i| format!("z{i}")))
                .chain(std::iter::once("y".to_string()))
                .collect();
            let body = names
                .windows(2)
                .map(|w| atom(&w[0], &w[1]))
                .reduce(|l, r| HornBody::And(Box::new(l), Box::new(r)))
                .expect("k >= 2 gives at least two atoms");
            Some(HornSentence { body, head: ("x".into(), "y".into()) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::kripke::check_axiom_inclusion;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trans() -> HornTheory {
        HornTheory::from_axioms([2])
    }

    /// Iterative squaring: `R := R ∪ R∘R` until stable.
    fn squaring_closure(f: &KripkeFrame) -> BTreeSet<(World, World)> {
        let mut r = f.edge_set();
        loop {
            let comp: BTreeSet<_> = r
                .iter()
                .flat_map(|&(a, b)| r.iter().filter(move |&&(c, _)| c == b).map(move |&(_, d)| (a, d)))
                .collect();
            let next: BTreeSet<_> = r.union(&comp).copied().collect();
            if next == r {
                return r;
            }
            r = next;
        }
    }

    /// Intersection of all Γ-satisfying supersets of `R`, by enumeration.
    fn intersection_oracle(f: &KripkeFrame, theory: &HornTheory) -> BTreeSet<(World, World)> {
        let n = f.len();
        let base = f.edge_set();
        let mut acc: Option<BTreeSet<(World, World)>> = None;
        for mask in 0u32..(1 << (n * n)) {
            let rel: BTreeSet<_> = (0..n * n).filter(|i| mask >> i & 1 == 1).map(|i| (i / n, i % n)).collect();
            if !base.is_subset(&rel) || !theory.holds_on(&f.with_edges(rel.iter().copied())) {
                continue;
            }
            acc = Some(match acc {
                None => rel,
                Some(a) => a.intersection(&rel).copied().collect(),
            });
        }
        acc.expect("the full relation satisfies every Horn theory")
    }

    #[test]
    fn eval_examples() {
        let t = axiom_to_horn(2).unwrap();
        let chain = KripkeFrame::from_edges(3, [(0, 1), (1, 2)]);
        assert!(!eval_horn(&chain, &t));
        assert_eq!(horn_counterexample(&chain, &t), Some(vec![0, 2, 1]));
        assert!(eval_horn(&chain.with_edges([(0, 1), (1, 2), (0, 2)]), &t));
        assert!(!eval_horn(&KripkeFrame::with_size(1), &axiom_to_horn(0).unwrap()));
    }

    #[test]
    fn axiom_sentences_print() {
        assert_eq!(axiom_to_horn(0).unwrap().to_string(), "true => x R x");
        assert_eq!(axiom_to_horn(3).unwrap().to_string(), "x R z1 & z1 R z2 & z2 R y => x R y");
        assert!(axiom_to_horn(1).is_none());
        assert!(HornTheory::from_axioms([1]).is_empty());
        assert_eq!(HornTheory::from_axioms([0, 2, 3]).chain_lengths().unwrap(), vec![0, 2, 3]);
    }

    #[test]
    fn axiom_sentence_matches_inclusion() {
        for f in gen::small_frames(3) {
            for k in [0, 2, 3] {
                assert_eq!(eval_horn(&f, &axiom_to_horn(k).unwrap()), check_axiom_inclusion(&f, k), "{f} k={k}");
            }
        }
    }

    #[test]
    fn closure_examples() {
        let chain = KripkeFrame::from_edges(3, [(0, 1), (1, 2)]);
        assert_eq!(gamma_close(&chain, &HornTheory::empty()), chain);
        assert_eq!(gamma_close(&chain, &trans()).edge_set(), BTreeSet::from([(0, 1), (1, 2), (0, 2)]));
        let s4 = gamma_close(&chain, &HornTheory::from_axioms([0, 2]));
        assert_eq!(s4.edge_count(), 6);
    }

    #[test]
    fn closure_matches_squaring_and_intersection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sym = HornTheory::parse("x R y => y R x").unwrap();
        let euclid = HornTheory::parse("z R x & z R y => x R y").unwrap();
        for _ in 0..100 {
            let n = 1 + (rand::Rng::gen_range(&mut rng, 0..3));
            let f = gen::random_frame(&mut rng, n, 0.3);
            assert_eq!(gamma_close(&f, &trans()).edge_set(), squaring_closure(&f));
            for th in [&trans(), &sym, &euclid] {
                assert_eq!(gamma_close(&f, th).edge_set(), intersection_oracle(&f, th));
            }
        }
    }

    #[test]
    fn minimality_examples() {
        let chain = KripkeFrame::from_edges(3, [(0, 1), (1, 2)]);
        let r = closure_minimality_check(&chain, &trans());
        assert_eq!(r.added, vec![(0, 2)]);
        assert!(r.passed());
        assert!(closure_minimality_check(&chain, &HornTheory::empty()).added.is_empty());
        let ab = KripkeFrame::from_edges(2, [(0, 1)]);
        let r = closure_minimality_check(&ab, &HornTheory::parse("x R y => y R x").unwrap());
        assert_eq!(r.added, vec![(1, 0)]);
        assert!(r.passed());
    }

    #[test]
    fn lift_after_closure() {
        // chain 0 -> 1 -> 2 onto a reflexive point
        let chain = KripkeFrame::from_edges(3, [(0, 1), (1, 2), (2, 2)]);
        let point = KripkeFrame::from_edges(1, [(0, 0)]);
        let f = check_pmorphism(&[0, 0, 0], &chain, &point).unwrap();
        assert!(closure_pmorphism_lift_check(&f, &trans()).unwrap().is_ok());
        assert!(closure_pmorphism_lift_check(&f, &HornTheory::empty()).unwrap().is_ok());
        let chain2 = KripkeFrame::from_edges(2, [(0, 1)]);
        let id = KripkeMorphism::identity(&chain2);
        assert!(closure_pmorphism_lift_check(&id, &HornTheory::from_axioms([0])).is_err());
    }

    #[test]
    fn theory_file_format() {
        let th = HornTheory::parse("# transitivity\nx R z & z R y => x R y\n\ntrue => x R x # refl\n").unwrap();
        assert_eq!(th.len(), 2);
        assert!(matches!(HornTheory::parse("x R y\n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(
            HornTheory::parse("x R y => y R x").unwrap().chain_lengths(),
            Err(Error::NotChainTheory(_))
        ));
    }
}
