//! Valuations on pseudo-infinite paths and three-valued evaluation on dense
//! frames.
//!
//! A member of `U_k(α)` in a plain dense frame has the form `α 0^i b 0^ω` with
//! `i >= max(k, st(α)) - st(α)` and `b` a successor of the endpoint of
//! `f0(α)`. Every valuation class makes the truth of a letter along such a
//! family eventually periodic in `i` with period 2, so boxes over modal-free
//! bodies are decided exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::kripke::{brute_validity, World, DEFAULT_VALIDITY_BUDGET};
use crate::syntax::{Connectives, PropFormula};

use super::word::{f0_raw, Letter, StopWord};
use super::{next_frame, DenseBounds, DenseFrame};

/// How one propositional letter is interpreted on pseudo-infinite paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LetterClass {
    FiniteSet(BTreeSet<StopWord>),
    /// Words `0^i ℓ` with `i` even (or odd).
    ZeroParityBeforeLetter { letter: World, even: bool },
    /// Words whose `f0`-image is one of the given rooted paths.
    PathFactored(BTreeSet<Vec<World>>),
}

/// Truth of a letter on the family `prefix 0^j b 0^ω` as a function of `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailClass {
    ConstTrue,
    ConstFalse,
    EvenTrue,
    OddTrue,
    /// False for every `j >= t`.
    FalseBeyond(usize),
    /// Arbitrary below `from`, then alternating as given by `(even, odd)`.
    EventuallyPeriodic { from: usize, even: bool, odd: bool },
}

impl fmt::Display for TailClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailClass::ConstTrue => f.write_str("constantly true"),
            TailClass::ConstFalse => f.write_str("constantly false"),
            TailClass::EvenTrue => f.write_str("true iff j even"),
            TailClass::OddTrue => f.write_str("true iff j odd"),
            TailClass::FalseBeyond(t) => write!(f, "false for j >= {t}"),
            TailClass::EventuallyPeriodic { from, even, odd } => {
                write!(f, "from j = {from}: {even} at even j, {odd} at odd j")
            }
        }
    }
}

/// Explicit values below `head.len()`, then `period[j % 2]`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Tail {
    head: Vec<bool>,
    period: [bool; 2],
}

impl Tail {
    fn constant(v: bool) -> Self {
        Tail { head: Vec::new(), period: [v, v] }
    }

    fn at(&self, j: usize) -> bool {
        self.head.get(j).copied().unwrap_or(self.period[j % 2])
    }

    fn implies(&self, other: &Tail) -> Tail {
        let n = self.head.len().max(other.head.len());
        Tail {
            head: (0..n).map(|j| !self.at(j) || other.at(j)).collect(),
            period: [0, 1].map(|r| {
                // a position past both heads with residue r
                let j = n + (n + r) % 2;
                !self.at(j) || other.at(j)
            }),
        }
    }

    fn eventually_false(&self) -> bool {
        !(self.period[0] && self.period[1])
    }

    fn class(&self) -> TailClass {
        let uniform = |v: [bool; 2]| (0..self.head.len()).all(|j| self.head[j] == v[j % 2]);
        match self.period {
            [true, true] if uniform([true, true]) => TailClass::ConstTrue,
            [false, false] if uniform([false, false]) => TailClass::ConstFalse,
            [false, false] => {
                TailClass::FalseBeyond(self.head.iter().rposition(|&v| v).map_or(0, |i| i + 1))
            }
            [true, false] if uniform([true, false]) => TailClass::EvenTrue,
            [false, true] if uniform([false, true]) => TailClass::OddTrue,
            [even, odd] => TailClass::EventuallyPeriodic { from: self.head.len(), even, odd },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternValuation {
    classes: BTreeMap<String, LetterClass>,
}

impl PatternValuation {
    pub fn new() -> Self {
        PatternValuation::default()
    }

    pub fn with(mut self, letter: impl Into<String>, class: LetterClass) -> Self {
        self.classes.insert(letter.into(), class);
        self
    }

    pub fn insert(&mut self, letter: impl Into<String>, class: LetterClass) {
        self.classes.insert(letter.into(), class);
    }

    pub fn get(&self, letter: &str) -> Result<&LetterClass> {
        self.classes.get(letter).ok_or_else(|| Error::MissingValuation(letter.to_string()))
    }

    pub fn letters(&self) -> impl Iterator<Item = (&String, &LetterClass)> {
        self.classes.iter()
    }

    pub fn holds(&self, letter: &str, word: &StopWord, frame: &DenseFrame) -> Result<bool> {
        Ok(match self.get(letter)? {
            LetterClass::FiniteSet(set) => set.contains(word),
            LetterClass::ZeroParityBeforeLetter { letter, even } => match word.letters().split_last() {
                Some((Some(l), zeros)) if l == letter && zeros.iter().all(Option::is_none) => {
                    (zeros.len() % 2 == 0) == *even
                }
                _ => false,
            },
            LetterClass::PathFactored(paths) => paths.contains(&frame.f0(word)?),
        })
    }

    fn tail(&self, letter: &str, prefix: &[Letter], b: World, frame: &DenseFrame) -> Result<Tail> {
        Ok(match self.get(letter)? {
            LetterClass::FiniteSet(set) => {
                let mut hits = Vec::new();
                for w in set {
                    let l = w.letters();
                    if l.len() > prefix.len()
                        && l[..prefix.len()] == *prefix
                        && l.last() == Some(&Some(b))
                        && l[prefix.len()..l.len() - 1].iter().all(Option::is_none)
                    {
                        hits.push(l.len() - prefix.len() - 1);
                    }
                }
                let mut head = vec![false; hits.iter().max().map_or(0, |m| m + 1)];
                for j in hits {
                    head[j] = true;
                }
                Tail { head, period: [false, false] }
            }
            LetterClass::ZeroParityBeforeLetter { letter, even } => {
                if b == *letter && prefix.iter().all(Option::is_none) {
                    let n = prefix.len();
                    Tail { head: Vec::new(), period: [n % 2 == 0, n % 2 == 1].map(|e| e == *even) }
                } else {
                    Tail::constant(false)
                }
            }
            LetterClass::PathFactored(paths) => {
                let mut path = f0_raw(prefix, &frame.base)?;
                path.push(b);
                Tail::constant(paths.contains(&path))
            }
        })
    }

    /// Classifies membership of `prefix 0^j b 0^ω` in `V(letter)` over `j`.
    pub fn tail_class(&self, letter: &str, prefix: &[Letter], b: World, frame: &DenseFrame) -> Result<TailClass> {
        Ok(self.tail(letter, prefix, b, frame)?.class())
    }
}

#[derive(Debug, Clone)]
pub struct DenseModel {
    pub frame: DenseFrame,
    pub valuation: PatternValuation,
}

impl DenseModel {
    pub fn new(frame: DenseFrame, valuation: PatternValuation) -> Result<Self> {
        for (p, class) in valuation.letters() {
            if let LetterClass::FiniteSet(set) = class {
                if let Some(w) = set.iter().find(|w| !frame.validate(w.letters())) {
                    return Err(Error::InvalidStopWord(format!("{} (in valuation of `{p}`)", frame.show(w))));
                }
            }
        }
        Ok(DenseModel { frame, valuation })
    }
}

/// Why a box verdict holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoxWitness {
    /// No path is related to `f0(α)`, so every `U_k(α)` is empty.
    EmptyBase,
    /// Every member of `U_k(α)` satisfies the body.
    Threshold { k: usize },
    /// For every `k`, members of `U_k(α)` along the step `b` refute the body;
    /// `class` describes the body along that family.
    Refuted { step: World, class: TailClass },
    /// `α` itself belongs to every `U_k(α)` and refutes the body.
    Reflexive,
    /// Checked only for `k <= k_max` and `j <= j_max`; `k` is the first bound
    /// at which every enumerated member satisfied the body.
    Bounded { k: Option<usize>, k_max: usize, j_max: usize },
}

/// A truth value; `certified` values hold in the infinite frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub value: bool,
    pub certified: bool,
    pub witness: Option<BoxWitness>,
}

impl Verdict {
    fn exact(value: bool) -> Self {
        Verdict { value, certified: true, witness: None }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cert = if self.certified { "certified" } else { "bounded" };
        write!(f, "{} ({cert})", self.value)?;
        if let Some(w) = &self.witness {
            write!(f, " [{w:?}]")?;
        }
        Ok(())
    }
}

fn body_tail(model: &DenseModel, a: &PropFormula, prefix: &[Letter], b: World) -> Result<Tail> {
    Ok(match a {
        PropFormula::Falsum => Tail::constant(false),
        PropFormula::Letter(p) => model.valuation.tail(p, prefix, b, &model.frame)?,
        PropFormula::Implies(l, r) => body_tail(model, l, prefix, b)?.implies(&body_tail(model, r, prefix, b)?),
        PropFormula::Boxed(..) => unreachable!("bodies of exact boxes are modal-free"),
    })
}

/// Truth of `a` at `alpha`, exact where the tail analysis applies and bounded
/// by `k_max`, `j_max` elsewhere.
pub fn bounded_eval(model: &DenseModel, alpha: &StopWord, a: &PropFormula, k_max: usize, j_max: usize) -> Result<Verdict> {
    if !model.frame.validate(alpha.letters()) {
        return Err(Error::InvalidStopWord(model.frame.show(alpha)));
    }
    eval_at(model, alpha, a, k_max, j_max)
}

fn eval_at(model: &DenseModel, alpha: &StopWord, a: &PropFormula, k_max: usize, j_max: usize) -> Result<Verdict> {
    match a {
        PropFormula::Falsum => Ok(Verdict::exact(false)),
        PropFormula::Letter(p) => Ok(Verdict::exact(model.valuation.holds(p, alpha, &model.frame)?)),
        PropFormula::Implies(lf, rf) => {
            let l = eval_at(model, alpha, lf, k_max, j_max)?;
            let r = eval_at(model, alpha, rf, k_max, j_max)?;
            let value = !l.value || r.value;
            let certified = (l.certified && !l.value) || (r.certified && r.value) || (l.certified && r.certified);
            let witness = if matches!(**rf, PropFormula::Falsum) { l.witness } else { None };
            Ok(Verdict { value, certified, witness })
        }
        PropFormula::Boxed(i, body) => {
            if *i != 1 {
                return Err(Error::UnsupportedModality(*i));
            }
            eval_box(model, alpha, body, k_max, j_max)
        }
    }
}

fn eval_box(model: &DenseModel, alpha: &StopWord, body: &PropFormula, k_max: usize, j_max: usize) -> Result<Verdict> {
    let frame = &model.frame;
    let path = frame.f0(alpha)?;
    let end = *path.last().expect("paths are nonempty");
    let steps: Vec<World> = frame.base.succ(end).iter().copied().collect();
    let extends = frame.steps().iter().any(|&d| d >= 1);
    if (steps.is_empty() || !extends) && !frame.is_reflexive() {
        return Ok(Verdict { value: true, certified: true, witness: Some(BoxWitness::EmptyBase) });
    }
    let single_step = frame.steps().iter().all(|&d| d <= 1);
    if single_step && body.modal_depth() == 0 {
        if frame.is_reflexive() && !eval_at(model, alpha, body, k_max, j_max)?.value {
            return Ok(Verdict { value: false, certified: true, witness: Some(BoxWitness::Reflexive) });
        }
        let st = alpha.st();
        let mut need = 0;
        for &b in &steps {
            let tail = body_tail(model, body, alpha.letters(), b)?;
            if tail.eventually_false() {
                let class = tail.class();
                return Ok(Verdict { value: false, certified: true, witness: Some(BoxWitness::Refuted { step: b, class }) });
            }
            if let Some(last) = tail.head.iter().rposition(|&v| !v) {
                need = need.max(last + 1);
            }
        }
        let k = if need == 0 { 0 } else { st + need };
        return Ok(Verdict { value: true, certified: true, witness: Some(BoxWitness::Threshold { k }) });
    }
    for k in 0..=k_max {
        let mut all = true;
        for beta in frame.uk_members(alpha, k, j_max)? {
            if !eval_at(model, &beta, body, k_max, j_max)?.value {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Verdict {
                value: true,
                certified: false,
                witness: Some(BoxWitness::Bounded { k: Some(k), k_max, j_max }),
            });
        }
    }
    Ok(Verdict { value: false, certified: false, witness: Some(BoxWitness::Bounded { k: None, k_max, j_max }) })
}

/// A member of `U_k(0^ω)` in `V(p)` and one outside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessRow {
    pub k: usize,
    pub p_witness: StopWord,
    pub not_p_witness: StopWord,
    pub verified: bool,
}

#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub model: DenseModel,
    pub both_diamonds: Verdict,
    pub implication: Verdict,
    pub rows: Vec<WitnessRow>,
    /// `G |= dia p -> box p` on the truncated chain.
    pub kripke_valid: bool,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.both_diamonds.certified
            && self.both_diamonds.value
            && self.implication.certified
            && !self.implication.value
            && self.rows.iter().all(|r| r.verified)
            && self.kripke_valid
    }
}

impl fmt::Display for CounterexampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |w: &StopWord| format!("{}.0^ω", self.model.frame.show(w));
        writeln!(f, "frame G: {}", self.model.frame.base)?;
        writeln!(f, "V(p) = 0^(2n).1.0^ω")?;
        writeln!(f, "dia p & dia ~p at 0^ω: {}", self.both_diamonds)?;
        writeln!(f, "dia p -> box p at 0^ω: {}", self.implication)?;
        for r in &self.rows {
            writeln!(
                f,
                "k = {:>2}: p at {}, ~p at {}{}",
                r.k,
                show(&r.p_witness),
                show(&r.not_p_witness),
                if r.verified { "" } else { "  FAILED" }
            )?;
        }
        writeln!(f, "Kripke side: G |= dia p -> box p: {}", self.kripke_valid)?;
        write!(f, "counterexample {}", if self.passed() { "certified" } else { "NOT certified" })
    }
}

/// `N_ω(G)` with `V(p) = { 0^(2n) 1 0^ω }` refutes `dia p -> box p` at `0^ω`
/// although `G` validates it.
pub fn counterexample_g(k_max: usize) -> Result<CounterexampleReport> {
    if k_max < 2 {
        return Err(Error::Precondition("k_max must be at least 2".into()));
    }
    let g = next_frame(8);
    let one = g.world("1")?;
    let frame = DenseFrame::new(g.clone(), DenseBounds { k_max, ..DenseBounds::default() })?;
    let valuation = PatternValuation::new().with("p", LetterClass::ZeroParityBeforeLetter { letter: one, even: true });
    let model = DenseModel::new(frame, valuation)?;
    let p = PropFormula::letter("p");
    let both = PropFormula::and(PropFormula::dia(1, p.clone()), PropFormula::dia(1, PropFormula::not(p.clone())));
    let implication = PropFormula::implies(PropFormula::dia(1, p.clone()), PropFormula::boxed(1, p.clone()));
    let eps = StopWord::empty();
    let j_max = model.frame.bounds.j_max;
    let both_diamonds = bounded_eval(&model, &eps, &both, k_max, j_max)?;
    let implication_verdict = bounded_eval(&model, &eps, &implication, k_max, j_max)?;
    let mut rows = Vec::new();
    for k in 0..=k_max {
        let a = StopWord::zeros_then(k, one);
        let b = StopWord::zeros_then(k + 1, one);
        let (pw, npw) = if model.valuation.holds("p", &a, &model.frame)? { (a, b) } else { (b, a) };
        let verified = model.frame.is_member_uk(&pw, &eps, k)?
            && model.frame.is_member_uk(&npw, &eps, k)?
            && model.valuation.holds("p", &pw, &model.frame)?
            && !model.valuation.holds("p", &npw, &model.frame)?;
        rows.push(WitnessRow { k, p_witness: pw, not_p_witness: npw, verified });
    }
    let kripke_valid = brute_validity(&g, &implication, DEFAULT_VALIDITY_BUDGET)?;
    Ok(CounterexampleReport { model, both_diamonds, implication: implication_verdict, rows, kripke_valid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseBounds;
    use crate::horn::HornTheory;
    use crate::kripke::KripkeFrame;
    use crate::syntax::parse_prop;

    fn g_model() -> DenseModel {
        let g = next_frame(6);
        let frame = DenseFrame::new(g, DenseBounds::default()).unwrap();
        let v = PatternValuation::new()
            .with("p", LetterClass::ZeroParityBeforeLetter { letter: 1, even: true })
            .with("q", LetterClass::PathFactored(BTreeSet::from([vec![0, 1]])))
            .with("r", LetterClass::FiniteSet(BTreeSet::from([StopWord::zeros_then(3, 1)])));
        DenseModel::new(frame, v).unwrap()
    }

    /// Direct evaluation of a modal-free body over members `α 0^i b`, `i < n`.
    fn sampled(model: &DenseModel, a: &PropFormula, b: World, n: usize) -> Vec<bool> {
        (0..n)
            .map(|i| {
                let w = StopWord::zeros_then(i, b);
                eval_at(model, &w, a, 0, 0).unwrap().value
            })
            .collect()
    }

    #[test]
    fn tails_agree_with_direct_membership() {
        let m = g_model();
        for s in ["p", "q", "r", "p -> r", "~p & ~r", "p | r", "q -> p", "false"] {
            let a = parse_prop(s).unwrap();
            let tail = body_tail(&m, &a, &[], 1).unwrap();
            let direct = sampled(&m, &a, 1, 12);
            let predicted: Vec<bool> = (0..12).map(|j| tail.at(j)).collect();
            assert_eq!(direct, predicted, "{s}");
        }
    }

    #[test]
    fn tail_classes() {
        let m = g_model();
        let f = &m.frame;
        assert_eq!(m.valuation.tail_class("p", &[], 1, f).unwrap(), TailClass::EvenTrue);
        assert_eq!(m.valuation.tail_class("p", &[None], 1, f).unwrap(), TailClass::OddTrue);
        assert_eq!(m.valuation.tail_class("q", &[None, None], 1, f).unwrap(), TailClass::ConstTrue);
        assert_eq!(m.valuation.tail_class("r", &[], 1, f).unwrap(), TailClass::FalseBeyond(4));
        assert_eq!(m.valuation.tail_class("r", &[None; 4], 1, f).unwrap(), TailClass::ConstFalse);
        assert_eq!(m.valuation.tail_class("p", &[Some(1)], 2, f).unwrap(), TailClass::ConstFalse);
    }

    #[test]
    fn parity_valuation_verdicts() {
        let m = g_model();
        let eps = StopWord::empty();
        let both = parse_prop("dia p & dia ~p").unwrap();
        let v = bounded_eval(&m, &eps, &both, 12, 8).unwrap();
        assert!(v.value && v.certified);
        let bp = bounded_eval(&m, &eps, &parse_prop("box p").unwrap(), 12, 8).unwrap();
        assert!(!bp.value && bp.certified);
        assert_eq!(bp.witness, Some(BoxWitness::Refuted { step: 1, class: TailClass::EvenTrue }));
        let bq = bounded_eval(&m, &eps, &parse_prop("box q").unwrap(), 12, 8).unwrap();
        assert_eq!(bq.witness, Some(BoxWitness::Threshold { k: 0 }));
        let bnr = bounded_eval(&m, &eps, &parse_prop("box ~r").unwrap(), 12, 8).unwrap();
        assert!(bnr.value && bnr.certified);
        assert_eq!(bnr.witness, Some(BoxWitness::Threshold { k: 4 }));
    }

    #[test]
    fn terminal_endpoint_is_certified_true() {
        let frame = DenseFrame::new(next_frame(2), DenseBounds::default()).unwrap();
        let alpha = frame.word("1").unwrap();
        let v = PatternValuation::new().with("p", LetterClass::FiniteSet(BTreeSet::from([alpha.clone()])));
        let m = DenseModel::new(frame, v).unwrap();
        let r = bounded_eval(&m, &alpha, &parse_prop("box p").unwrap(), 12, 8).unwrap();
        assert_eq!(r, Verdict { value: true, certified: true, witness: Some(BoxWitness::EmptyBase) });
        let r = bounded_eval(&m, &alpha, &parse_prop("box box false").unwrap(), 3, 3).unwrap();
        assert!(r.value && r.certified);
    }

    #[test]
    fn deep_boxes_are_bounded() {
        let m = g_model();
        let r = bounded_eval(&m, &StopWord::empty(), &parse_prop("box box q").unwrap(), 4, 3).unwrap();
        assert!(!r.certified);
    }

    #[test]
    fn certified_verdicts_survive_larger_bounds() {
        let m = g_model();
        let eps = StopWord::empty();
        for s in ["box p", "dia p", "box (p | ~p)", "box ~r", "dia r", "box q -> dia p", "dia (p & r)"] {
            let a = parse_prop(s).unwrap();
            let small = bounded_eval(&m, &eps, &a, 3, 2).unwrap();
            let large = bounded_eval(&m, &eps, &a, 24, 16).unwrap();
            if small.certified {
                assert_eq!(small.value, large.value, "{s}");
            }
        }
    }

    #[test]
    fn reflexive_closure_evaluates_alpha_itself() {
        let f = DenseFrame::with_theory(next_frame(3), HornTheory::from_axioms([0]), DenseBounds::default()).unwrap();
        let v = PatternValuation::new().with("p", LetterClass::PathFactored(BTreeSet::from([vec![0, 1]])));
        let m = DenseModel::new(f, v).unwrap();
        let r = bounded_eval(&m, &StopWord::empty(), &parse_prop("box p").unwrap(), 12, 8).unwrap();
        assert_eq!(r.witness, Some(BoxWitness::Reflexive));
        let r = bounded_eval(&m, &StopWord::empty(), &parse_prop("box p -> p").unwrap(), 12, 8).unwrap();
        assert!(r.value && r.certified);
    }

    #[test]
    fn counterexample_report() {
        let r = counterexample_g(10).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.rows.len(), 11);
        let row4 = &r.rows[4];
        assert_eq!(r.model.frame.show(&row4.p_witness), "0.0.0.0.1");
        assert_eq!(r.model.frame.show(&row4.not_p_witness), "0.0.0.0.0.1");
        assert!(counterexample_g(1).is_err());
    }

    #[test]
    fn invalid_point_is_rejected() {
        let m = g_model();
        let bad = StopWord::new(vec![Some(2)]);
        assert!(bounded_eval(&m, &bad, &parse_prop("p").unwrap(), 1, 1).is_err());
        let one = DenseFrame::new(KripkeFrame::with_size(1).with_root(0).unwrap(), DenseBounds::default()).unwrap();
        let v = PatternValuation::new().with("p", LetterClass::FiniteSet(BTreeSet::from([StopWord::zeros_then(0, 0)])));
        assert!(DenseModel::new(one, v).is_err());
    }
}
