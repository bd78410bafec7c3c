//! Finite Kripke frames and models.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gen;
use crate::semantics::{self, all_valuations, BoxOperator, Valuation};
use crate::syntax::PropFormula;

pub type World = usize;

/// Default budget for [`brute_validity`]: `2^20` model evaluations.
pub const DEFAULT_VALIDITY_BUDGET: u128 = 1 << 20;

/// A finite frame `(W, R)` with an optional root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeFrame {
    names: Vec<String>,
    succ: Vec<BTreeSet<World>>,
    root: Option<World>,
}

impl KripkeFrame {
    /// Frame on the given world names with an empty relation.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidFrame("a frame needs at least one world".into()));
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if n.is_empty() {
                return Err(Error::InvalidFrame("empty world name".into()));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidFrame(format!("duplicate world `{n}`")));
            }
        }
        let succ = vec![BTreeSet::new(); names.len()];
        Ok(KripkeFrame { names, succ, root: None })
    }

    /// Frame on worlds `w0 .. w{n-1}`.
    pub fn with_size(n: usize) -> Self {
        assert!(n > 0, "a frame needs at least one world");
        KripkeFrame::new((0..n).map(|i| format!("w{i}"))).expect("generated names are distinct")
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (World, World)>) -> Self {
        let mut f = KripkeFrame::with_size(n);
        for (a, b) in edges {
            f.add_edge(a, b);
        }
        f
    }

    /// Convenience constructor from names and named edges.
    pub fn named(worlds: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let mut f = KripkeFrame::new(worlds.iter().copied())?;
        for (a, b) in edges {
            let a = f.world(a)?;
            let b = f.world(b)?;
            f.add_edge(a, b);
        }
        Ok(f)
    }

    /// The S5 frame: every world sees every world.
    pub fn total<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut f = KripkeFrame::new(names)?;
        let n = f.len();
        for a in 0..n {
            for b in 0..n {
                f.add_edge(a, b);
            }
        }
        Ok(f)
    }

    pub fn add_edge(&mut self, a: World, b: World) {
        assert!(a < self.len() && b < self.len(), "edge endpoint out of range");
        self.succ[a].insert(b);
    }

    /// Declares `root`; every world must be reachable from it.
    pub fn with_root(mut self, root: World) -> Result<Self> {
        if root >= self.len() {
            return Err(Error::UnknownWorld(root.to_string()));
        }
        let reach = self.reachable(root);
        if let Some(w) = self.worlds().find(|w| !reach.contains(w)) {
            return Err(Error::NotRooted(format!(
                "world `{}` is not reachable from `{}`",
                self.names[w], self.names[root]
            )));
        }
        self.root = Some(root);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn worlds(&self) -> std::ops::Range<World> {
        0..self.names.len()
    }

    pub fn name(&self, w: World) -> &str {
        &self.names[w]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn world(&self, name: &str) -> Result<World> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownWorld(name.to_string()))
    }

    pub fn root(&self) -> Option<World> {
        self.root
    }

    pub fn succ(&self, w: World) -> &BTreeSet<World> {
        &self.succ[w]
    }

    pub fn has_edge(&self, a: World, b: World) -> bool {
        self.succ[a].contains(&b)
    }

    pub fn edges(&self) -> impl Iterator<Item = (World, World)> + '_ {
        self.succ.iter().enumerate().flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(BTreeSet::len).sum()
    }

    pub fn edge_set(&self) -> BTreeSet<(World, World)> {
        self.edges().collect()
    }

    /// Same worlds and root, relation replaced.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = (World, World)>) -> Self {
        let mut f = KripkeFrame { names: self.names.clone(), succ: vec![BTreeSet::new(); self.len()], root: self.root };
        for (a, b) in edges {
            f.add_edge(a, b);
        }
        f
    }

    /// `R*(w)`: worlds reachable from `w` in zero or more steps.
    pub fn reachable(&self, w: World) -> BTreeSet<World> {
        let mut seen = BTreeSet::from([w]);
        let mut queue = VecDeque::from([w]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.succ[u] {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// `R^k(w)`; `R^0(w) = {w}`.
    pub fn power_image(&self, w: World, k: usize) -> BTreeSet<World> {
        let mut cur = BTreeSet::from([w]);
        for _ in 0..k {
            cur = cur.iter().flat_map(|&u| self.succ[u].iter().copied()).collect();
        }
        cur
    }

    /// The subframe generated by `w`, rooted at `w`, together with the map
    /// from new world ids to the original ones.
    pub fn generated_subframe(&self, w: World) -> (KripkeFrame, Vec<World>) {
        let keep: Vec<World> = self.reachable(w).into_iter().collect();
        let new_id: BTreeMap<World, World> = keep.iter().enumerate().map(|(i, &o)| (o, i)).collect();
        let mut f = KripkeFrame {
            names: keep.iter().map(|&o| self.names[o].clone()).collect(),
            succ: vec![BTreeSet::new(); keep.len()],
            root: Some(new_id[&w]),
        };
        for &o in &keep {
            for v in &self.succ[o] {
                f.succ[new_id[&o]].insert(new_id[v]);
            }
        }
        (f, keep)
    }

    /// A rooted frame in which every non-root world has exactly one
    /// predecessor and the root has none, so paths from the root are unique.
    pub fn is_tree(&self) -> bool {
        let Some(root) = self.root else { return false };
        let mut indeg = vec![0usize; self.len()];
        for (_, b) in self.edges() {
            indeg[b] += 1;
        }
        indeg[root] == 0 && self.worlds().all(|w| w == root || indeg[w] == 1)
    }

    pub fn is_transitive(&self) -> bool {
        self.worlds().all(|w| self.power_image(w, 2).is_subset(&self.succ[w]))
    }
}

impl fmt::Display for KripkeFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "worlds {}", self.names.join(" "))?;
        if let Some(r) = self.root {
            write!(f, "\nroot {}", self.names[r])?;
        }
        f.write_str("\nedges")?;
        for (a, b) in self.edges() {
            write!(f, " {}->{}", self.names[a], self.names[b])?;
        }
        Ok(())
    }
}

impl BoxOperator for KripkeFrame {
    fn point_count(&self) -> usize {
        self.len()
    }

    fn box_of(&self, index: usize, ext: &[bool]) -> Result<Vec<bool>> {
        if index != 1 {
            return Err(Error::UnsupportedModality(index));
        }
        Ok(self.succ.iter().map(|s| s.iter().all(|&v| ext[v])).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    pub frame: KripkeFrame,
    valuation: Valuation,
}

impl KripkeModel {
    pub fn new(frame: KripkeFrame, valuation: Valuation) -> Result<Self> {
        for (p, set) in &valuation {
            if let Some(w) = set.iter().find(|&&w| w >= frame.len()) {
                return Err(Error::UnknownWorld(format!("{w} (in valuation of `{p}`)")));
            }
        }
        Ok(KripkeModel { frame, valuation })
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn extension(&self, a: &PropFormula) -> Result<Vec<bool>> {
        semantics::extension(&self.frame, &self.valuation, a)
    }

    /// `M, w |= A`.
    pub fn eval(&self, w: World, a: &PropFormula) -> Result<bool> {
        if w >= self.frame.len() {
            return Err(Error::UnknownWorld(w.to_string()));
        }
        Ok(self.extension(a)?[w])
    }
}

/// Truth at every world under every valuation of the letters of `a`.
pub fn brute_validity(frame: &KripkeFrame, a: &PropFormula, cap: u128) -> Result<bool> {
    let letters = a.letters();
    let bits = frame.len() * letters.len();
    let needed: u128 = if bits >= 127 { u128::MAX } else { 1u128 << bits };
    if needed > cap {
        return Err(Error::BudgetExceeded { needed, cap });
    }
    for val in all_valuations(frame.len(), &letters) {
        if semantics::extension(frame, &val, a)?.iter().any(|&t| !t) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A pair `(w, v)` with `v ∈ R^k(w) \ R(w)`, if any.
pub fn axiom_inclusion_witness(frame: &KripkeFrame, k: usize) -> Option<(World, World)> {
    frame.worlds().find_map(|w| {
        frame
            .power_image(w, k)
            .into_iter()
            .find(|v| !frame.has_edge(w, *v))
            .map(|v| (w, v))
    })
}

/// Frame condition of `box p -> box^k p`: `R^k(w) ⊆ R(w)` for all `w`.
pub fn check_axiom_inclusion(frame: &KripkeFrame, k: usize) -> bool {
    axiom_inclusion_witness(frame, k).is_none()
}

/// A pair `(w, v)` with `v ∈ R^(k+1)(w)` but in no `R^i(w)`, `i <= k`.
pub fn pretransitive_witness(frame: &KripkeFrame, k: usize) -> Option<(World, World)> {
    frame.worlds().find_map(|w| {
        let mut lower = BTreeSet::new();
        let mut layer = BTreeSet::from([w]);
        for _ in 0..=k {
            lower.extend(layer.iter().copied());
            layer = layer.iter().flat_map(|&u| frame.succ(u).iter().copied()).collect();
        }
        layer.into_iter().find(|v| !lower.contains(v)).map(|v| (w, v))
    })
}

/// Frame condition of `p & box p & .. & box^k p -> box^(k+1) p`.
pub fn check_pretransitive(frame: &KripkeFrame, k: usize) -> bool {
    pretransitive_witness(frame, k).is_none()
}

/// Which p-morphism condition failed, with the offending worlds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismViolation {
    NotTotal { expected: usize, got: usize },
    OutOfRange { world: World, image: World },
    NotSurjective { missing: World },
    /// `from R to` but `f(from) S f(to)` fails.
    NotMonotone { from: World, to: World },
    /// `f(world) S target` has no lift among the successors of `world`.
    NoLift { world: World, target: World },
}

impl fmt::Display for MorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismViolation::NotTotal { expected, got } => {
                write!(f, "map is not total: {got} images for {expected} worlds")
            }
            MorphismViolation::OutOfRange { world, image } => write!(f, "world {world} maps to unknown {image}"),
            MorphismViolation::NotSurjective { missing } => write!(f, "surjectivity fails: {missing} has no preimage"),
            MorphismViolation::NotMonotone { from, to } => {
                write!(f, "monotonicity fails on the edge ({from}, {to})")
            }
            MorphismViolation::NoLift { world, target } => {
                write!(f, "lifting fails at {world}: image successor {target} is not hit")
            }
        }
    }
}

/// A map between frames that passed [`check_pmorphism`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeMorphism {
    pub source: KripkeFrame,
    pub target: KripkeFrame,
    pub map: Vec<World>,
}

impl KripkeMorphism {
    pub fn apply(&self, w: World) -> World {
        self.map[w]
    }

    pub fn identity(frame: &KripkeFrame) -> Self {
        KripkeMorphism { source: frame.clone(), target: frame.clone(), map: frame.worlds().collect() }
    }

    /// `V(p) = f^{-1}(V'(p))`.
    pub fn pullback(&self, target_val: &Valuation) -> Valuation {
        target_val
            .iter()
            .map(|(p, set)| {
                let pre = self.source.worlds().filter(|&w| set.contains(&self.map[w])).collect();
                (p.clone(), pre)
            })
            .collect()
    }
}

pub fn check_pmorphism(
    map: &[World],
    source: &KripkeFrame,
    target: &KripkeFrame,
) -> std::result::Result<KripkeMorphism, MorphismViolation> {
    check_pmorphism_where(map, source, target, |_| true)
}

/// Like [`check_pmorphism`] but the lifting condition is only required at
/// worlds accepted by `lift_at` (interior points of a truncated structure).
pub fn check_pmorphism_where(
    map: &[World],
    source: &KripkeFrame,
    target: &KripkeFrame,
    lift_at: impl Fn(World) -> bool,
) -> std::result::Result<KripkeMorphism, MorphismViolation> {
    if map.len() != source.len() {
        return Err(MorphismViolation::NotTotal { expected: source.len(), got: map.len() });
    }
    if let Some((w, &img)) = map.iter().enumerate().find(|(_, &v)| v >= target.len()) {
        return Err(MorphismViolation::OutOfRange { world: w, image: img });
    }
    let hit: BTreeSet<World> = map.iter().copied().collect();
    if let Some(missing) = target.worlds().find(|v| !hit.contains(v)) {
        return Err(MorphismViolation::NotSurjective { missing });
    }
    for (a, b) in source.edges() {
        if !target.has_edge(map[a], map[b]) {
            return Err(MorphismViolation::NotMonotone { from: a, to: b });
        }
    }
    for w in source.worlds().filter(|&w| lift_at(w)) {
        let images: BTreeSet<World> = source.succ(w).iter().map(|&v| map[v]).collect();
        if let Some(&t) = target.succ(map[w]).iter().find(|t| !images.contains(t)) {
            return Err(MorphismViolation::NoLift { world: w, target: t });
        }
    }
    Ok(KripkeMorphism { source: source.clone(), target: target.clone(), map: map.to_vec() })
}

/// The depth-truncated unravelling of a rooted frame.
#[derive(Debug, Clone)]
pub struct Unravelling {
    /// Frame whose worlds are rooted paths, related by one-step extension.
    pub frame: KripkeFrame,
    pub paths: Vec<Vec<World>>,
    /// Last world of each path.
    pub projection: Vec<World>,
    /// Paths shorter than the depth bound; lifting holds only here.
    pub interior: BTreeSet<World>,
}

impl Unravelling {
    /// Checks the endpoint map as a p-morphism onto `base`, lifting at
    /// interior paths only.
    pub fn check_projection(&self, base: &KripkeFrame) -> std::result::Result<KripkeMorphism, MorphismViolation> {
        check_pmorphism_where(&self.projection, &self.frame, base, |p| self.interior.contains(&p))
    }

    pub fn path_id(&self, path: &[World]) -> Option<World> {
        self.paths.iter().position(|p| p == path)
    }
}

/// Rooted paths with at most `depth` worlds.
pub fn unravel(frame: &KripkeFrame, depth: usize) -> Result<Unravelling> {
    let root = frame
        .root()
        .ok_or_else(|| Error::NotRooted("unravelling needs a root".into()))?;
    if depth == 0 {
        return Err(Error::Precondition("unravelling depth must be at least 1".into()));
    }
    let mut paths: Vec<Vec<World>> = vec![vec![root]];
    let mut edges = Vec::new();
    let mut i = 0;
    while i < paths.len() {
        if paths[i].len() < depth {
            let last = *paths[i].last().expect("paths are nonempty");
            for &v in frame.succ(last) {
                let mut p = paths[i].clone();
                p.push(v);
                paths.push(p);
                edges.push((i, paths.len() - 1));
            }
        }
        i += 1;
    }
    let names: Vec<String> = paths
        .iter()
        .map(|p| p.iter().map(|&w| frame.name(w)).collect::<Vec<_>>().join("."))
        .collect();
    let mut out = KripkeFrame::new(names)?;
    for (a, b) in edges {
        out.add_edge(a, b);
    }
    let out = out.with_root(0)?;
    let projection = paths.iter().map(|p| *p.last().expect("nonempty")).collect();
    let interior = (0..paths.len()).filter(|&i| paths[i].len() < depth).collect();
    Ok(Unravelling { frame: out, paths, projection, interior })
}

/// Outcome of a sampled truth-preservation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreservationReport {
    pub samples: usize,
    pub agreed: usize,
    pub failures: Vec<String>,
}

impl PreservationReport {
    pub fn new() -> Self {
        PreservationReport { samples: 0, agreed: 0, failures: Vec::new() }
    }

    pub fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.samples += 1;
        if ok {
            self.agreed += 1;
        } else if self.failures.len() < 10 {
            self.failures.push(describe());
        }
    }

    pub fn all_agree(&self) -> bool {
        self.samples == self.agreed
    }
}

impl Default for PreservationReport {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Display for PreservationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} samples agree", self.agreed, self.samples)?;
        for fail in &self.failures {
            write!(f, "\n  disagreement: {fail}")?;
        }
        Ok(())
    }
}

/// Random valuations on the target, pulled back along `f`, random formulas of
/// modal depth at most 3 and random points: `F,V,x |= A` iff `G,V',f(x) |= A`.
pub fn truth_preservation_test(f: &KripkeMorphism, samples: usize, seed: u64) -> Result<PreservationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = ["p".to_string(), "q".to_string()];
    let mut report = PreservationReport::new();
    for _ in 0..samples {
        let target_val = gen::random_valuation(&mut rng, f.target.len(), &letters);
        let source_val = f.pullback(&target_val);
        let a = gen::random_prop(&mut rng, &letters, 3);
        let x = rng.gen_range(0..f.source.len());
        let lhs = KripkeModel::new(f.source.clone(), source_val)?.eval(x, &a)?;
        let rhs = KripkeModel::new(f.target.clone(), target_val)?.eval(f.apply(x), &a)?;
        report.record(lhs == rhs, || format!("{a} at {x}"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_prop, ptc_axiom, Connectives};

    fn val(pairs: &[(&str, &[World])]) -> Valuation {
        pairs.iter().map(|(p, ws)| (p.to_string(), ws.iter().copied().collect())).collect()
    }

    #[test]
    fn eval_box_on_chain() {
        let f = KripkeFrame::named(&["a", "b"], &[("a", "b")]).unwrap();
        let m = KripkeModel::new(f, val(&[("p", &[1])])).unwrap();
        let bp = parse_prop("box p").unwrap();
        assert!(m.eval(0, &bp).unwrap());
        assert!(m.eval(1, &bp).unwrap(), "terminal world: vacuous box");
    }

    #[test]
    fn eval_dia_on_reflexive_point() {
        let f = KripkeFrame::from_edges(1, [(0, 0)]);
        let m = KripkeModel::new(f, val(&[("p", &[0])])).unwrap();
        assert!(m.eval(0, &parse_prop("dia p").unwrap()).unwrap());
    }

    #[test]
    fn missing_letter_is_an_error() {
        let f = KripkeFrame::with_size(1);
        let m = KripkeModel::new(f, Valuation::new()).unwrap();
        assert_eq!(m.eval(0, &parse_prop("q").unwrap()), Err(Error::MissingValuation("q".into())));
        assert!(matches!(m.eval(3, &parse_prop("false").unwrap()), Err(Error::UnknownWorld(_))));
    }

    #[test]
    fn next_frame_validates_dia_to_box() {
        let g = KripkeFrame::from_edges(5, (0..4).map(|i| (i, i + 1)));
        assert!(brute_validity(&g, &parse_prop("dia p -> box p").unwrap(), DEFAULT_VALIDITY_BUDGET).unwrap());
    }

    #[test]
    fn brute_validity_examples() {
        let any = KripkeFrame::from_edges(3, [(0, 1), (1, 2), (2, 0)]);
        assert!(brute_validity(&any, &parse_prop("p -> p").unwrap(), 1 << 20).unwrap());
        let irr = KripkeFrame::with_size(1);
        assert!(!brute_validity(&irr, &ptc_axiom(0), 1 << 20).unwrap());
        let trans = KripkeFrame::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        assert!(brute_validity(&trans, &ptc_axiom(2), 1 << 20).unwrap());
        assert!(check_axiom_inclusion(&trans, 2));
    }

    #[test]
    fn budget_is_enforced() {
        let f = KripkeFrame::with_size(30);
        let a = parse_prop("p -> q").unwrap();
        assert!(matches!(brute_validity(&f, &a, 1 << 20), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn generated_subframes() {
        let chain = KripkeFrame::named(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let (sub, back) = chain.generated_subframe(1);
        assert_eq!(back, vec![1, 2]);
        assert_eq!(sub.names(), &["b".to_string(), "c".to_string()]);
        assert_eq!(sub.edge_set(), BTreeSet::from([(0, 1)]));
        let rooted = chain.clone().with_root(0).unwrap();
        let (whole, _) = rooted.generated_subframe(0);
        assert_eq!(whole, rooted);
        let (single, _) = chain.generated_subframe(2);
        assert_eq!(single.len(), 1);
        assert_eq!(single.edge_count(), 0);
    }

    #[test]
    fn rootedness_is_checked() {
        let f = KripkeFrame::from_edges(2, [(1, 0)]);
        assert!(matches!(f.clone().with_root(0), Err(Error::NotRooted(_))));
        assert!(f.with_root(1).is_ok());
    }

    #[test]
    fn pmorphism_examples() {
        let cyc = KripkeFrame::from_edges(2, [(0, 1), (1, 0)]);
        assert!(check_pmorphism(&[0, 1], &cyc, &cyc).is_ok());
        let refl = KripkeFrame::from_edges(1, [(0, 0)]);
        assert!(check_pmorphism(&[0, 0], &cyc, &refl).is_ok());
        let chain = KripkeFrame::from_edges(2, [(0, 1)]);
        assert_eq!(
            check_pmorphism(&[0, 1], &chain, &cyc),
            Err(MorphismViolation::NoLift { world: 1, target: 0 })
        );
        assert_eq!(
            check_pmorphism(&[0, 0], &chain, &cyc),
            Err(MorphismViolation::NotSurjective { missing: 1 })
        );
    }

    #[test]
    fn inclusion_witness() {
        let f = KripkeFrame::named(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert_eq!(axiom_inclusion_witness(&f, 2), Some((0, 2)));
        assert!(check_axiom_inclusion(&f, 1));
    }

    #[test]
    fn pretransitive_cycles() {
        let c3 = KripkeFrame::from_edges(3, [(0, 1), (1, 2), (2, 0)]);
        let c4 = KripkeFrame::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(check_pretransitive(&c3, 2));
        assert!(!check_pretransitive(&c4, 2));
        let trans = KripkeFrame::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        assert!(check_pretransitive(&trans, 1));
    }

    #[test]
    fn unravel_two_cycle() {
        let cyc = KripkeFrame::named(&["a", "b"], &[("a", "b"), ("b", "a")]).unwrap().with_root(0).unwrap();
        let u = unravel(&cyc, 3).unwrap();
        assert_eq!(u.frame.names(), &["a".to_string(), "a.b".into(), "a.b.a".into()]);
        assert_eq!(u.interior, BTreeSet::from([0, 1]));
        assert!(u.check_projection(&cyc).is_ok());
        // the frontier path a.b.a cannot lift a -> b
        assert!(check_pmorphism(&u.projection, &u.frame, &cyc).is_err());
    }

    #[test]
    fn unravel_single_and_tree() {
        let single = KripkeFrame::with_size(1).with_root(0).unwrap();
        let u = unravel(&single, 4).unwrap();
        assert_eq!(u.paths, vec![vec![0]]);
        let tree = KripkeFrame::from_edges(4, [(0, 1), (0, 2), (2, 3)]).with_root(0).unwrap();
        let u = unravel(&tree, 5).unwrap();
        assert_eq!(u.frame.len(), 4);
        assert!(check_pmorphism(&u.projection, &u.frame, &tree).is_ok());
        assert!(unravel(&KripkeFrame::with_size(2), 2).is_err());
    }

    #[test]
    fn truth_preservation_collapse() {
        let cyc = KripkeFrame::from_edges(2, [(0, 1), (1, 0)]);
        let refl = KripkeFrame::from_edges(1, [(0, 0)]);
        let f = check_pmorphism(&[0, 0], &cyc, &refl).unwrap();
        let report = truth_preservation_test(&f, 1000, 7).unwrap();
        assert!(report.all_agree(), "{report}");
        let id = KripkeMorphism::identity(&cyc);
        assert!(truth_preservation_test(&id, 100, 1).unwrap().all_agree());
    }

    #[test]
    fn closed_formulas_transfer() {
        let cyc = KripkeFrame::from_edges(2, [(0, 1), (1, 0)]);
        let refl = KripkeFrame::from_edges(1, [(0, 0)]);
        let f = check_pmorphism(&[0, 0], &cyc, &refl).unwrap();
        let closed = [PropFormula::dia(1, PropFormula::verum()), parse_prop("box false").unwrap()];
        for a in &closed {
            for x in cyc.worlds() {
                let lhs = brute_validity_at(&cyc, x, a);
                let rhs = brute_validity_at(&refl, f.apply(x), a);
                assert_eq!(lhs, rhs);
            }
        }
    }

    fn brute_validity_at(f: &KripkeFrame, w: World, a: &PropFormula) -> bool {
        KripkeModel::new(f.clone(), Valuation::new()).unwrap().eval(w, a).unwrap()
    }
}
