//! Predicate Kripke frames with expanding domains, predicate neighbourhood
//! frames with a constant domain, and the morphisms between them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kripke::{check_pmorphism, KripkeFrame, MorphismViolation, PreservationReport, World};
use crate::neighbourhood::{check_n_pmorphism, nf_from_kripke, NFrame, NMorphismViolation, Point};
use crate::syntax::{barcan, converse_barcan, Connectives, Constant, PredFormula, Term};

pub type Tuple = Vec<Constant>;
/// Extension of each predicate letter at one point; 0-ary letters are true
/// iff their set holds the empty tuple.
pub type Interpretation = BTreeMap<String, BTreeSet<Tuple>>;
pub type Domain = BTreeSet<Constant>;

pub fn domain<S: AsRef<str>>(names: &[S]) -> Domain {
    names.iter().map(|n| Constant::new(n.as_ref())).collect()
}

/// Every tuple of the given arity over `dom`.
pub fn tuples(dom: &Domain, arity: usize) -> Vec<Tuple> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t: Tuple| {
                dom.iter().map(move |d| {
                    let mut u = t.clone();
                    u.push(d.clone());
                    u
                })
            })
            .collect();
    }
    out
}

fn infer_arities(interps: &[Interpretation]) -> Result<BTreeMap<String, usize>> {
    let mut arities = BTreeMap::new();
    for interp in interps {
        for (p, set) in interp {
            for t in set {
                match arities.insert(p.clone(), t.len()) {
                    Some(a) if a != t.len() => {
                        return Err(Error::Precondition(format!("`{p}` is used with arities {a} and {}", t.len())))
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(arities)
}

/// Constants of a closed formula must name elements of `dom`.
fn check_closed(a: &PredFormula, dom: &Domain) -> Result<()> {
    if let Some(v) = a.free_vars().into_iter().next() {
        return Err(Error::NotClosed(v));
    }
    if let Some(c) = a.constants().into_iter().find(|c| !dom.contains(c)) {
        return Err(Error::UnknownConstant(c.0));
    }
    Ok(())
}

type Env = Vec<(String, Constant)>;

fn term_value(t: &Term, env: &Env) -> Constant {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => env.iter().rev().find(|(x, _)| x == v).map(|(_, c)| c.clone()).expect("formula is closed"),
    }
}

fn atom_holds(interp: &Interpretation, arities: &BTreeMap<String, usize>, pred: &str, args: &[Term], env: &Env) -> Result<bool> {
    let set = interp.get(pred).ok_or_else(|| Error::MissingValuation(pred.to_string()))?;
    if let Some(&a) = arities.get(pred) {
        if a != args.len() {
            return Err(Error::Precondition(format!("`{pred}` has arity {a}, used with {}", args.len())));
        }
    }
    let tuple: Tuple = args.iter().map(|t| term_value(t, env)).collect();
    Ok(set.contains(&tuple))
}

/// A Kripke frame with expanding domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredKripkeFrame {
    pub frame: KripkeFrame,
    domains: Vec<Domain>,
}

impl PredKripkeFrame {
    pub fn new(frame: KripkeFrame, domains: Vec<Domain>) -> Result<Self> {
        if domains.len() != frame.len() {
            return Err(Error::InvalidFrame(format!("{} domains for {} worlds", domains.len(), frame.len())));
        }
        if let Some(w) = frame.worlds().find(|&w| domains[w].is_empty()) {
            return Err(Error::InvalidFrame(format!("empty domain at `{}`", frame.name(w))));
        }
        for (u, v) in frame.edges() {
            if !domains[u].is_subset(&domains[v]) {
                return Err(Error::InvalidFrame(format!(
                    "domains do not expand along {} -> {}",
                    frame.name(u),
                    frame.name(v)
                )));
            }
        }
        Ok(PredKripkeFrame { frame, domains })
    }

    pub fn domain(&self, w: World) -> &Domain {
        &self.domains[w]
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredKripkeModel {
    pub frame: PredKripkeFrame,
    xi: Vec<Interpretation>,
    arities: BTreeMap<String, usize>,
}

impl PredKripkeModel {
    pub fn new(frame: PredKripkeFrame, xi: Vec<Interpretation>) -> Result<Self> {
        if xi.len() != frame.len() {
            return Err(Error::InvalidFrame(format!("{} interpretations for {} worlds", xi.len(), frame.len())));
        }
        for (u, interp) in xi.iter().enumerate() {
            for (p, set) in interp {
                if let Some(t) = set.iter().find(|t| t.iter().any(|d| !frame.domain(u).contains(d))) {
                    return Err(Error::UnknownConstant(format!(
                        "{t:?} in `{p}` at `{}` leaves the local domain",
                        frame.frame.name(u)
                    )));
                }
            }
        }
        let arities = infer_arities(&xi)?;
        Ok(PredKripkeModel { frame, xi, arities })
    }

    pub fn interpretation(&self, u: World) -> &Interpretation {
        &self.xi[u]
    }

    pub fn interpretations(&self) -> &[Interpretation] {
        &self.xi
    }

    /// Truth of a closed formula at `u`; quantifiers range over `D_u`.
    pub fn eval(&self, u: World, a: &PredFormula) -> Result<bool> {
        if u >= self.frame.len() {
            return Err(Error::UnknownWorld(u.to_string()));
        }
        check_closed(a, self.frame.domain(u))?;
        self.eval_env(u, a, &mut Vec::new())
    }

    fn eval_env(&self, u: World, a: &PredFormula, env: &mut Env) -> Result<bool> {
        Ok(match a {
            PredFormula::Falsum => false,
            PredFormula::Atom { pred, args } => atom_holds(&self.xi[u], &self.arities, pred, args, env)?,
            PredFormula::Implies(l, r) => !self.eval_env(u, l, env)? || self.eval_env(u, r, env)?,
            PredFormula::Boxed(i, b) => {
                if *i != 1 {
                    return Err(Error::UnsupportedModality(*i));
                }
                for &v in self.frame.frame.succ(u) {
                    if !self.eval_env(v, b, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            PredFormula::Forall(x, b) => {
                for d in self.frame.domain(u) {
                    env.push((x.clone(), d.clone()));
                    let r = self.eval_env(u, b, env);
                    env.pop();
                    if !r? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }
}

/// A neighbourhood frame with one constant domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredNFrame {
    pub space: NFrame,
    pub domain: Domain,
}

impl PredNFrame {
    pub fn new(space: NFrame, domain: Domain) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::InvalidFrame("the constant domain is empty".into()));
        }
        Ok(PredNFrame { space, domain })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredNModel {
    pub frame: PredNFrame,
    theta: Vec<Interpretation>,
    arities: BTreeMap<String, usize>,
}

impl PredNModel {
    pub fn new(frame: PredNFrame, theta: Vec<Interpretation>) -> Result<Self> {
        if theta.len() != frame.space.len() {
            return Err(Error::InvalidFrame(format!("{} interpretations for {} points", theta.len(), frame.space.len())));
        }
        for interp in &theta {
            for (p, set) in interp {
                if let Some(t) = set.iter().find(|t| t.iter().any(|d| !frame.domain.contains(d))) {
                    return Err(Error::UnknownConstant(format!("{t:?} in `{p}` is outside the domain")));
                }
            }
        }
        let arities = infer_arities(&theta)?;
        Ok(PredNModel { frame, theta, arities })
    }

    pub fn interpretation(&self, x: Point) -> &Interpretation {
        &self.theta[x]
    }

    pub fn interpretations(&self) -> &[Interpretation] {
        &self.theta
    }

    pub fn eval(&self, x: Point, a: &PredFormula) -> Result<bool> {
        if x >= self.frame.space.len() {
            return Err(Error::UnknownWorld(x.to_string()));
        }
        Ok(self.extension(a)?[x])
    }

    /// Points where the closed formula `a` holds.
    pub fn extension(&self, a: &PredFormula) -> Result<Vec<bool>> {
        check_closed(a, &self.frame.domain)?;
        self.ext_env(a, &mut Vec::new())
    }

    fn ext_env(&self, a: &PredFormula, env: &mut Env) -> Result<Vec<bool>> {
        let n = self.frame.space.len();
        Ok(match a {
            PredFormula::Falsum => vec![false; n],
            PredFormula::Atom { pred, args } => (0..n)
                .map(|x| atom_holds(&self.theta[x], &self.arities, pred, args, env))
                .collect::<Result<_>>()?,
            PredFormula::Implies(l, r) => {
                let l = self.ext_env(l, env)?;
                let r = self.ext_env(r, env)?;
                l.iter().zip(&r).map(|(&p, &q)| !p || q).collect()
            }
            PredFormula::Boxed(i, b) => {
                let e = self.ext_env(b, env)?;
                crate::semantics::BoxOperator::box_of(&self.frame.space, *i, &e)?
            }
            PredFormula::Forall(x, b) => {
                let mut acc = vec![true; n];
                for d in &self.frame.domain {
                    env.push((x.clone(), d.clone()));
                    let e = self.ext_env(b, env);
                    env.pop();
                    for (a, v) in acc.iter_mut().zip(e?) {
                        *a &= v;
                    }
                }
                acc
            }
        })
    }
}

/// Per-point maps on individuals.
pub type ElementMaps = Vec<BTreeMap<Constant, Constant>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredMorphismViolation {
    Frame(MorphismViolation),
    NFrame(NMorphismViolation),
    MapCount { expected: usize, got: usize },
    /// The individual map at `point` is undefined on `element`.
    Undefined { point: usize, element: Constant },
    OutOfDomain { point: usize, element: Constant, image: Constant },
    NotSurjective { point: usize, missing: Constant },
    /// `from R to` but the maps at `from` and `to` differ on `element`.
    Disagree { from: World, to: World, element: Constant },
    /// No neighbourhood of `point` on which the maps agree on `element`.
    NotLocal { point: Point, element: Constant },
}

impl fmt::Display for PredMorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredMorphismViolation::Frame(v) => write!(f, "{v}"),
            PredMorphismViolation::NFrame(v) => write!(f, "{v}"),
            PredMorphismViolation::MapCount { expected, got } => write!(f, "{got} individual maps for {expected} points"),
            PredMorphismViolation::Undefined { point, element } => write!(f, "map at {point} is undefined on {element}"),
            PredMorphismViolation::OutOfDomain { point, element, image } => {
                write!(f, "map at {point} sends {element} to {image}, outside the target domain")
            }
            PredMorphismViolation::NotSurjective { point, missing } => {
                write!(f, "map at {point} does not reach {missing}")
            }
            PredMorphismViolation::Disagree { from, to, element } => {
                write!(f, "maps at {from} and {to} disagree on {element}")
            }
            PredMorphismViolation::NotLocal { point, element } => {
                write!(f, "no neighbourhood of {point} keeps the image of {element} fixed")
            }
        }
    }
}

type Checked<T> = std::result::Result<T, PredMorphismViolation>;

fn check_element_maps(maps: &ElementMaps, sources: &[&Domain], targets: &[&Domain]) -> Checked<()> {
    if maps.len() != sources.len() {
        return Err(PredMorphismViolation::MapCount { expected: sources.len(), got: maps.len() });
    }
    for (x, m) in maps.iter().enumerate() {
        for d in sources[x] {
            let img = m.get(d).ok_or_else(|| PredMorphismViolation::Undefined { point: x, element: d.clone() })?;
            if !targets[x].contains(img) {
                return Err(PredMorphismViolation::OutOfDomain { point: x, element: d.clone(), image: img.clone() });
            }
        }
        let hit: BTreeSet<&Constant> = sources[x].iter().map(|d| &m[d]).collect();
        if let Some(missing) = targets[x].iter().find(|c| !hit.contains(c)) {
            return Err(PredMorphismViolation::NotSurjective { point: x, missing: missing.clone() });
        }
    }
    Ok(())
}

/// A verified p-morphism between predicate Kripke frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredKKMorphism {
    pub source: PredKripkeFrame,
    pub target: PredKripkeFrame,
    pub phi0: Vec<World>,
    pub phi1: ElementMaps,
}

pub fn check_kk_morphism(
    phi0: &[World],
    phi1: &ElementMaps,
    source: &PredKripkeFrame,
    target: &PredKripkeFrame,
) -> Checked<PredKKMorphism> {
    check_pmorphism(phi0, &source.frame, &target.frame).map_err(PredMorphismViolation::Frame)?;
    let sources: Vec<&Domain> = source.domains.iter().collect();
    let targets: Vec<&Domain> = phi0.iter().map(|&w| target.domain(w)).collect();
    check_element_maps(phi1, &sources, &targets)?;
    for (u, v) in source.frame.edges() {
        if let Some(d) = source.domain(u).iter().find(|d| phi1[u][*d] != phi1[v][*d]) {
            return Err(PredMorphismViolation::Disagree { from: u, to: v, element: d.clone() });
        }
    }
    Ok(PredKKMorphism { source: source.clone(), target: target.clone(), phi0: phi0.to_vec(), phi1: phi1.clone() })
}

impl PredKKMorphism {
    pub fn identity(frame: &PredKripkeFrame) -> Self {
        PredKKMorphism {
            source: frame.clone(),
            target: frame.clone(),
            phi0: frame.frame.worlds().collect(),
            phi1: frame.domains.iter().map(|d| d.iter().map(|c| (c.clone(), c.clone())).collect()).collect(),
        }
    }
}

/// A verified p-morphism from a predicate n-frame to a predicate Kripke frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredNKMorphism {
    pub source: PredNFrame,
    pub target: PredKripkeFrame,
    pub phi0: Vec<World>,
    pub phi1: ElementMaps,
}

pub fn check_nk_morphism(
    phi0: &[World],
    phi1: &ElementMaps,
    source: &PredNFrame,
    target: &PredKripkeFrame,
) -> Checked<PredNKMorphism> {
    check_n_pmorphism(phi0, &source.space, &nf_from_kripke(&target.frame)).map_err(PredMorphismViolation::NFrame)?;
    let sources: Vec<&Domain> = vec![&source.domain; source.space.len()];
    let targets: Vec<&Domain> = phi0.iter().map(|&w| target.domain(w)).collect();
    check_element_maps(phi1, &sources, &targets)?;
    for x in source.space.points() {
        for d in &source.domain {
            let local = source.space.base(x).iter().any(|b| b.iter().all(|&y| phi1[y][d] == phi1[x][d]));
            if !local {
                return Err(PredMorphismViolation::NotLocal { point: x, element: d.clone() });
            }
        }
    }
    Ok(PredNKMorphism { source: source.clone(), target: target.clone(), phi0: phi0.to_vec(), phi1: phi1.clone() })
}

fn pull(interp: &Interpretation, dom: &Domain, map: &BTreeMap<Constant, Constant>) -> Interpretation {
    interp
        .iter()
        .map(|(p, set)| {
            let arity = set.iter().next().map(Vec::len);
            let arities: Vec<usize> = match arity {
                Some(a) => vec![a],
                None => Vec::new(),
            };
            let pulled = arities
                .into_iter()
                .flat_map(|a| tuples(dom, a))
                .filter(|t| set.contains(&t.iter().map(|d| map[d].clone()).collect::<Tuple>()))
                .collect();
            (p.clone(), pulled)
        })
        .collect()
}

/// `ξ_u(P) = { t over D_u : φ1u(t) ∈ ξ'_{φ0 u}(P) }`.
pub fn pullback_kk(target_xi: &[Interpretation], m: &PredKKMorphism) -> Vec<Interpretation> {
    m.source.frame.worlds().map(|u| pull(&target_xi[m.phi0[u]], m.source.domain(u), &m.phi1[u])).collect()
}

/// `θ_x(P) = { t over D* : φ1x(t) ∈ ξ_{φ0 x}(P) }`.
pub fn pullback_nk(xi: &[Interpretation], m: &PredNKMorphism) -> Vec<Interpretation> {
    m.source.space.points().map(|x| pull(&xi[m.phi0[x]], &m.source.domain, &m.phi1[x])).collect()
}

/// `η0 = ψ0 ∘ φ0`, `η1x(d) = ψ1_{φ0 x}(φ1x(d))`, checked.
pub fn compose_morphisms(nk: &PredNKMorphism, kk: &PredKKMorphism) -> Result<PredNKMorphism> {
    if nk.target != kk.source {
        return Err(Error::Incompatible("the Kripke morphism does not start where the first one ends".into()));
    }
    let phi0: Vec<World> = nk.phi0.iter().map(|&w| kk.phi0[w]).collect();
    let phi1: ElementMaps = nk
        .phi1
        .iter()
        .enumerate()
        .map(|(x, m)| m.iter().map(|(d, e)| (d.clone(), kk.phi1[nk.phi0[x]][e].clone())).collect())
        .collect();
    check_nk_morphism(&phi0, &phi1, &nk.source, &kk.target)
        .map_err(|v| Error::Precondition(format!("composite is not a p-morphism: {v}")))
}

/// Predicate letters used by the random pools, with arities.
pub const SAMPLE_PREDICATES: [(&str, usize); 3] = [("P", 1), ("R", 2), ("Q", 0)];

pub fn random_interpretation<R: Rng + ?Sized>(rng: &mut R, dom: &Domain) -> Interpretation {
    SAMPLE_PREDICATES
        .iter()
        .map(|&(p, a)| {
            let set = tuples(dom, a).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
            (p.to_string(), set)
        })
        .collect()
}

/// Closed formulas for the preservation suites: the universal closure of a
/// random formula of modal depth at most 2 over `x`, `y`, plus the box and
/// quantifier shapes of the inductive proof.
pub fn formula_pool<R: Rng + ?Sized>(rng: &mut R, random: usize) -> Vec<PredFormula> {
    let x = || Term::Var("x".into());
    let y = || Term::Var("y".into());
    let px = PredFormula::atom("P", vec![x()]);
    let rxy = PredFormula::atom("R", vec![x(), y()]);
    let q = PredFormula::atom("Q", vec![]);
    let mut pool = vec![
        barcan(),
        converse_barcan(),
        PredFormula::boxed(1, PredFormula::forall("x", px.clone())),
        PredFormula::forall("x", PredFormula::boxed(1, px.clone())),
        PredFormula::forall("x", PredFormula::exists("y", PredFormula::dia(1, rxy.clone()))),
        PredFormula::boxed(1, PredFormula::exists("x", PredFormula::and(px.clone(), q.clone()))),
        PredFormula::implies(q.clone(), PredFormula::boxed(1, q)),
        PredFormula::forall("x", PredFormula::forall("y", PredFormula::implies(rxy, PredFormula::boxed(1, px)))),
    ];
    for _ in 0..random {
        pool.push(crate::gen::random_pred(rng, 2).universal_closure());
    }
    pool
}

/// Samples pulled-back valuations, closed formulas and points and compares
/// truth across a Kripke-to-Kripke morphism.
pub fn kk_truth_preservation_test(m: &PredKKMorphism, samples: usize, seed: u64) -> Result<PreservationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = formula_pool(&mut rng, 40);
    let mut report = PreservationReport::new();
    for _ in 0..samples {
        let xi_t: Vec<Interpretation> =
            m.target.frame.worlds().map(|w| random_interpretation(&mut rng, m.target.domain(w))).collect();
        let xi_s = pullback_kk(&xi_t, m);
        let a = pool.choose(&mut rng).expect("nonempty pool");
        let u = rng.gen_range(0..m.source.len());
        let lhs = PredKripkeModel::new(m.source.clone(), xi_s)?.eval(u, a)?;
        let rhs = PredKripkeModel::new(m.target.clone(), xi_t)?.eval(m.phi0[u], a)?;
        report.record(lhs == rhs, || format!("{a} at {u}"));
    }
    Ok(report)
}

/// As [`kk_truth_preservation_test`] for an n-frame-to-Kripke morphism.
pub fn nk_truth_preservation_test(m: &PredNKMorphism, samples: usize, seed: u64) -> Result<PreservationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = formula_pool(&mut rng, 40);
    let mut report = PreservationReport::new();
    for _ in 0..samples {
        let xi: Vec<Interpretation> =
            m.target.frame.worlds().map(|w| random_interpretation(&mut rng, m.target.domain(w))).collect();
        let theta = pullback_nk(&xi, m);
        let a = pool.choose(&mut rng).expect("nonempty pool");
        let x = rng.gen_range(0..m.source.space.len());
        let lhs = PredNModel::new(m.source.clone(), theta)?.eval(x, a)?;
        let rhs = PredKripkeModel::new(m.target.clone(), xi)?.eval(m.phi0[x], a)?;
        report.record(lhs == rhs, || format!("{a} at {x}"));
    }
    Ok(report)
}

fn subsets_of(dom: &Domain) -> Vec<Domain> {
    let elems: Vec<&Constant> = dom.iter().collect();
    (0u32..1 << elems.len())
        .map(|m| (0..elems.len()).filter(|i| m >> i & 1 == 1).map(|i| elems[i].clone()).collect())
        .collect()
}

/// Assignments choosing one option per point.
fn product<T: Clone>(options: &[Vec<T>]) -> Vec<Vec<T>> {
    options.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.into_iter()
            .flat_map(|v| {
                opts.iter().map(move |o| {
                    let mut w = v.clone();
                    w.push(o.clone());
                    w
                })
            })
            .collect()
    })
}

/// Outcome of an exhaustive validity sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    pub instances: usize,
    pub failures: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The Barcan formula on every constant-domain n-frame with at most
/// `max_points` points and `max_elems` elements, under every valuation of `P`.
/// On finite point sets every filter is principal, so single-set bases cover
/// all n-frames.
pub fn barcan_constant_domain_sweep(max_points: usize, max_elems: usize) -> Result<SweepReport> {
    let formula = barcan();
    let mut report = SweepReport { instances: 0, failures: Vec::new() };
    for n in 1..=max_points {
        let all: BTreeSet<Point> = (0..n).collect();
        let sets: Vec<Vec<BTreeSet<Point>>> = subsets_of_points(&all).into_iter().map(|s| vec![s]).collect();
        for bases in product(&vec![sets.clone(); n]) {
            let names = (0..n).map(|i| format!("x{i}")).collect();
            let space = NFrame::new(names, bases)?;
            for e in 1..=max_elems {
                let dom = domain(&["d", "e", "f", "g"][..e]);
                let frame = PredNFrame::new(space.clone(), dom.clone())?;
                let exts: Vec<Vec<Domain>> = vec![subsets_of(&dom); n];
                for choice in product(&exts) {
                    let theta: Vec<Interpretation> = choice
                        .into_iter()
                        .map(|s| [("P".to_string(), s.into_iter().map(|c| vec![c]).collect())].into())
                        .collect();
                    let model = PredNModel::new(frame.clone(), theta)?;
                    report.instances += 1;
                    let ext = model.extension(&formula)?;
                    if let Some(x) = ext.iter().position(|v| !v) {
                        if report.failures.len() < 10 {
                            report.failures.push(format!("{space} with D* = {dom:?}: fails at x{x}"));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

fn subsets_of_points(all: &BTreeSet<Point>) -> Vec<BTreeSet<Point>> {
    let v: Vec<Point> = all.iter().copied().collect();
    (0u32..1 << v.len()).map(|m| (0..v.len()).filter(|i| m >> i & 1 == 1).map(|i| v[i]).collect()).collect()
}

/// Every expanding-domain Kripke instance with at most `max_worlds` worlds
/// (frames up to isomorphism) and domains drawn from `max_elems` elements,
/// under every valuation of `P`, checking `formula` at every world.
pub fn expanding_domain_sweep(formula: &PredFormula, max_worlds: usize, max_elems: usize) -> Result<SweepReport> {
    let universe = domain(&["d", "e", "f", "g"][..max_elems]);
    let nonempty: Vec<Domain> = subsets_of(&universe).into_iter().filter(|s| !s.is_empty()).collect();
    let mut report = SweepReport { instances: 0, failures: Vec::new() };
    for f in crate::gen::small_frames(max_worlds) {
        for doms in product(&vec![nonempty.clone(); f.len()]) {
            let Ok(frame) = PredKripkeFrame::new(f.clone(), doms.clone()) else { continue };
            let exts: Vec<Vec<Domain>> = doms.iter().map(subsets_of).collect();
            for choice in product(&exts) {
                let xi: Vec<Interpretation> = choice
                    .into_iter()
                    .map(|s| [("P".to_string(), s.into_iter().map(|c| vec![c]).collect())].into())
                    .collect();
                let model = PredKripkeModel::new(frame.clone(), xi)?;
                report.instances += 1;
                for u in f.worlds() {
                    if !model.eval(u, formula)? && report.failures.len() < 10 {
                        report.failures.push(format!("{f} with domains {doms:?}: fails at {}", f.name(u)));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Two worlds `u -> v`, `D_u = {d}`, `D_v = {d, e}`, `P` true of `d` only.
pub fn barcan_counter_witness() -> PredKripkeModel {
    let f = KripkeFrame::named(&["u", "v"], &[("u", "v")]).expect("valid").with_root(0).expect("rooted");
    let frame = PredKripkeFrame::new(f, vec![domain(&["d"]), domain(&["d", "e"])]).expect("expanding");
    let p = |ds: &[&str]| -> Interpretation {
        [("P".to_string(), ds.iter().map(|d| vec![Constant::new(*d)]).collect())].into()
    };
    PredKripkeModel::new(frame, vec![p(&["d"]), p(&["d"])]).expect("valid valuation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighbourhood::PointSet;
    use crate::syntax::parse_pred;

    fn c(s: &str) -> Constant {
        Constant::new(s)
    }

    fn ident(dom: &Domain) -> BTreeMap<Constant, Constant> {
        dom.iter().map(|d| (d.clone(), d.clone())).collect()
    }

    fn chain2() -> PredKripkeFrame {
        let f = KripkeFrame::named(&["u", "v"], &[("u", "v")]).unwrap().with_root(0).unwrap();
        PredKripkeFrame::new(f, vec![domain(&["d"]), domain(&["d", "e"])]).unwrap()
    }

    #[test]
    fn kripke_examples() {
        let f = KripkeFrame::with_size(1);
        let frame = PredKripkeFrame::new(f, vec![domain(&["d"])]).unwrap();
        let m = PredKripkeModel::new(frame, vec![[("P".to_string(), BTreeSet::from([vec![c("d")]]))].into()]).unwrap();
        assert!(m.eval(0, &parse_pred("forall x. P(x)").unwrap()).unwrap());
        let w = barcan_counter_witness();
        assert!(!w.eval(0, &parse_pred("box forall x. P(x)").unwrap()).unwrap());
        assert!(w.eval(0, &parse_pred("forall x. box P(x)").unwrap()).unwrap());
        assert!(!w.eval(0, &barcan()).unwrap());
    }

    #[test]
    fn evaluation_errors() {
        let w = barcan_counter_witness();
        assert_eq!(w.eval(0, &parse_pred("P(x)").unwrap()), Err(Error::NotClosed("x".into())));
        assert!(matches!(w.eval(0, &parse_pred("P(@e)").unwrap()), Err(Error::UnknownConstant(_))));
        assert!(w.eval(1, &parse_pred("P(@e)").unwrap()).is_ok());
        assert!(w.eval(0, &parse_pred("box P(@d)").unwrap()).unwrap());
        assert!(matches!(w.eval(0, &parse_pred("S(@d)").unwrap()), Err(Error::MissingValuation(_))));
    }

    #[test]
    fn expanding_domains_enforced() {
        let f = KripkeFrame::from_edges(2, [(0, 1)]);
        assert!(PredKripkeFrame::new(f, vec![domain(&["d", "e"]), domain(&["d"])]).is_err());
    }

    #[test]
    fn nbhd_examples() {
        let space = NFrame::new(vec!["x".into()], vec![vec![PointSet::from([0])]]).unwrap();
        let frame = PredNFrame::new(space, domain(&["d"])).unwrap();
        let m = PredNModel::new(frame, vec![[("P".to_string(), BTreeSet::from([vec![c("d")]]))].into()]).unwrap();
        assert!(m.eval(0, &parse_pred("box forall x. P(x)").unwrap()).unwrap());
    }

    #[test]
    fn barcan_sweeps_small() {
        let r = barcan_constant_domain_sweep(2, 2).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        let r = expanding_domain_sweep(&converse_barcan(), 2, 2).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        let r = expanding_domain_sweep(&barcan(), 2, 2).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn kk_morphisms() {
        let f = chain2();
        let id = PredKKMorphism::identity(&f);
        assert!(check_kk_morphism(&id.phi0, &id.phi1, &f, &f).is_ok());
        // swapping d and e at v breaks agreement along u -> v
        let mut bad = id.phi1.clone();
        bad[1] = BTreeMap::from([(c("d"), c("e")), (c("e"), c("d"))]);
        assert_eq!(
            check_kk_morphism(&id.phi0, &bad, &f, &f),
            Err(PredMorphismViolation::Disagree { from: 0, to: 1, element: c("d") })
        );
        let r = kk_truth_preservation_test(&id, 200, 3).unwrap();
        assert!(r.all_agree(), "{r}");
    }

    #[test]
    fn kk_collapse_preserves_truth() {
        // 2-cycle with constant domain {d, e} onto a reflexive point with domain {d}
        let cyc = KripkeFrame::from_edges(2, [(0, 1), (1, 0)]);
        let src = PredKripkeFrame::new(cyc, vec![domain(&["d", "e"]); 2]).unwrap();
        let pt = KripkeFrame::from_edges(1, [(0, 0)]);
        let tgt = PredKripkeFrame::new(pt, vec![domain(&["d"])]).unwrap();
        let collapse: BTreeMap<Constant, Constant> = BTreeMap::from([(c("d"), c("d")), (c("e"), c("d"))]);
        let m = check_kk_morphism(&[0, 0], &vec![collapse.clone(), collapse], &src, &tgt).unwrap();
        let r = kk_truth_preservation_test(&m, 500, 8).unwrap();
        assert!(r.all_agree(), "{r}");
    }

    fn nk_instance() -> PredNKMorphism {
        // N(F) for a 2-chain with domains {d, e}, constant domain {d, e, f}
        let f = KripkeFrame::named(&["u", "v"], &[("u", "v")]).unwrap().with_root(0).unwrap();
        let target = PredKripkeFrame::new(f, vec![domain(&["d", "e"]); 2]).unwrap();
        let src = PredNFrame::new(nf_from_kripke(&target.frame), domain(&["d", "e", "f"])).unwrap();
        let at_u = BTreeMap::from([(c("d"), c("d")), (c("e"), c("e")), (c("f"), c("d"))]);
        // locality at u forces the same map at v, the only point of its neighbourhood
        check_nk_morphism(&[0, 1], &vec![at_u.clone(), at_u], &src, &target).unwrap()
    }

    /// A strictly growing domain along an edge admits no such morphism from a
    /// finite space: the maps must agree on a whole neighbourhood.
    #[test]
    fn expanding_target_needs_infinite_space() {
        let f = chain2();
        let src = PredNFrame::new(nf_from_kripke(&f.frame), domain(&["d", "e"])).unwrap();
        let at_u = BTreeMap::from([(c("d"), c("d")), (c("e"), c("d"))]);
        let r = check_nk_morphism(&[0, 1], &vec![at_u, ident(&domain(&["d", "e"]))], &src, &f);
        assert!(matches!(r, Err(PredMorphismViolation::NotLocal { point: 0, .. })));
    }

    #[test]
    fn nk_morphism_and_pullback() {
        let m = nk_instance();
        let r = nk_truth_preservation_test(&m, 500, 4).unwrap();
        assert!(r.all_agree(), "{r}");
        let xi: Vec<Interpretation> = vec![
            [("Q".to_string(), BTreeSet::from([vec![]]))].into(),
            [("Q".to_string(), BTreeSet::new())].into(),
        ];
        assert_eq!(pullback_nk(&xi, &m), xi);
        let unary: Vec<Interpretation> = vec![
            [("P".to_string(), BTreeSet::from([vec![c("d")]]))].into(),
            [("P".to_string(), BTreeSet::from([vec![c("d")]]))].into(),
        ];
        let theta = pullback_nk(&unary, &m);
        assert_eq!(theta[0]["P"], BTreeSet::from([vec![c("d")], vec![c("f")]]));
        assert_eq!(theta[1]["P"], BTreeSet::from([vec![c("d")], vec![c("f")]]));
    }

    #[test]
    fn composition() {
        let nk = nk_instance();
        let id = PredKKMorphism::identity(&nk.target);
        assert_eq!(compose_morphisms(&nk, &id).unwrap(), nk);
        let other = PredKKMorphism::identity(&PredKripkeFrame::new(KripkeFrame::with_size(1), vec![domain(&["d"])]).unwrap());
        assert!(matches!(compose_morphisms(&nk, &other), Err(Error::Incompatible(_))));
    }
}
