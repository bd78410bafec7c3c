//! Finite neighbourhood frames given by filter bases.
//!
//! `U ∈ τ(x)` iff some base member of `x` is a subset of `U`; the filters
//! themselves are never built.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gen;
use crate::kripke::{KripkeFrame, KripkeMorphism, PreservationReport};
use crate::semantics::{self, BoxOperator, Valuation};
use crate::syntax::PropFormula;

pub type Point = usize;
pub type PointSet = BTreeSet<Point>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NFrame {
    names: Vec<String>,
    base: Vec<Vec<PointSet>>,
}

impl NFrame {
    /// Validates that every base is nonempty, in range, and closed under
    /// refinement of pairwise intersections.
    pub fn new(names: Vec<String>, base: Vec<Vec<PointSet>>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidFrame("an n-frame needs at least one point".into()));
        }
        if base.len() != names.len() {
            return Err(Error::InvalidFrame(format!("{} bases for {} points", base.len(), names.len())));
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(Error::InvalidFrame(format!("duplicate point `{n}`")));
            }
        }
        for (x, bs) in base.iter().enumerate() {
            if bs.is_empty() {
                return Err(Error::InvalidFrame(format!("empty base at `{}`", names[x])));
            }
            if let Some(&y) = bs.iter().flatten().find(|&&y| y >= names.len()) {
                return Err(Error::UnknownWorld(format!("{y} (in base of `{}`)", names[x])));
            }
            for b1 in bs {
                for b2 in bs {
                    let meet: PointSet = b1.intersection(b2).copied().collect();
                    if !bs.iter().any(|b3| b3.is_subset(&meet)) {
                        return Err(Error::InvalidFrame(format!(
                            "base at `{}` is not a filter base: no member below {} ∩ {}",
                            names[x],
                            show_set(&names, b1),
                            show_set(&names, b2)
                        )));
                    }
                }
            }
        }
        Ok(NFrame { names, base })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn points(&self) -> std::ops::Range<Point> {
        0..self.names.len()
    }

    pub fn name(&self, x: Point) -> &str {
        &self.names[x]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn point(&self, name: &str) -> Result<Point> {
        self.names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownWorld(name.to_string()))
    }

    pub fn base(&self, x: Point) -> &[PointSet] {
        &self.base[x]
    }

    /// `U ∈ τ(x)`.
    pub fn is_neighbourhood(&self, x: Point, u: &PointSet) -> bool {
        self.base[x].iter().any(|b| b.is_subset(u))
    }
}

fn show_set(names: &[String], s: &PointSet) -> String {
    let inner: Vec<&str> = s.iter().map(|&y| names[y].as_str()).collect();
    format!("{{{}}}", inner.join(","))
}

impl fmt::Display for NFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "points {}", self.names.join(" "))?;
        for x in self.points() {
            write!(f, "\nbase {} =", self.names[x])?;
            for b in &self.base[x] {
                write!(f, " {}", show_set(&self.names, b))?;
            }
        }
        Ok(())
    }
}

impl BoxOperator for NFrame {
    fn point_count(&self) -> usize {
        self.len()
    }

    fn box_of(&self, index: usize, ext: &[bool]) -> Result<Vec<bool>> {
        if index != 1 {
            return Err(Error::UnsupportedModality(index));
        }
        Ok(self.base.iter().map(|bs| bs.iter().any(|b| b.iter().all(|&y| ext[y]))).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NModel {
    pub frame: NFrame,
    valuation: Valuation,
}

impl NModel {
    pub fn new(frame: NFrame, valuation: Valuation) -> Result<Self> {
        for (p, set) in &valuation {
            if let Some(y) = set.iter().find(|&&y| y >= frame.len()) {
                return Err(Error::UnknownWorld(format!("{y} (in valuation of `{p}`)")));
            }
        }
        Ok(NModel { frame, valuation })
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn extension(&self, a: &PropFormula) -> Result<Vec<bool>> {
        semantics::extension(&self.frame, &self.valuation, a)
    }

    pub fn eval(&self, x: Point, a: &PropFormula) -> Result<bool> {
        if x >= self.frame.len() {
            return Err(Error::UnknownWorld(x.to_string()));
        }
        Ok(self.extension(a)?[x])
    }
}

/// `N(F)`: the principal filter generated by `R(w)` at each world.
pub fn nf_from_kripke(frame: &KripkeFrame) -> NFrame {
    NFrame {
        names: frame.names().to_vec(),
        base: frame.worlds().map(|w| vec![frame.succ(w).clone()]).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NMorphismViolation {
    NotTotal { expected: usize, got: usize },
    OutOfRange { point: Point, image: Point },
    NotSurjective { missing: Point },
    /// `f(base)` is not a neighbourhood of `f(point)`.
    Zig { point: Point, base: PointSet },
    /// `f^{-1}(target_base)` is not a neighbourhood of `point`.
    Zag { point: Point, target_base: PointSet },
}

impl fmt::Display for NMorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NMorphismViolation::NotTotal { expected, got } => {
                write!(f, "map is not total: {got} images for {expected} points")
            }
            NMorphismViolation::OutOfRange { point, image } => write!(f, "point {point} maps to unknown {image}"),
            NMorphismViolation::NotSurjective { missing } => write!(f, "surjectivity fails: {missing} has no preimage"),
            NMorphismViolation::Zig { point, base } => write!(f, "zig fails at {point} for base member {base:?}"),
            NMorphismViolation::Zag { point, target_base } => {
                write!(f, "zag fails at {point} for target base member {target_base:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NMorphism {
    pub source: NFrame,
    pub target: NFrame,
    pub map: Vec<Point>,
}

impl NMorphism {
    pub fn apply(&self, x: Point) -> Point {
        self.map[x]
    }

    pub fn identity(frame: &NFrame) -> Self {
        NMorphism { source: frame.clone(), target: frame.clone(), map: frame.points().collect() }
    }

    pub fn pullback(&self, target_val: &Valuation) -> Valuation {
        target_val
            .iter()
            .map(|(p, set)| (p.clone(), self.source.points().filter(|&x| set.contains(&self.map[x])).collect()))
            .collect()
    }

    /// The morphism `N(F) -> N(G)` with the same underlying map.
    pub fn from_kripke(f: &KripkeMorphism) -> std::result::Result<Self, NMorphismViolation> {
        check_n_pmorphism(&f.map, &nf_from_kripke(&f.source), &nf_from_kripke(&f.target))
    }
}

pub fn check_n_pmorphism(
    map: &[Point],
    source: &NFrame,
    target: &NFrame,
) -> std::result::Result<NMorphism, NMorphismViolation> {
    if map.len() != source.len() {
        return Err(NMorphismViolation::NotTotal { expected: source.len(), got: map.len() });
    }
    if let Some((x, &y)) = map.iter().enumerate().find(|(_, &y)| y >= target.len()) {
        return Err(NMorphismViolation::OutOfRange { point: x, image: y });
    }
    let hit: BTreeSet<Point> = map.iter().copied().collect();
    if let Some(missing) = target.points().find(|y| !hit.contains(y)) {
        return Err(NMorphismViolation::NotSurjective { missing });
    }
    for x in source.points() {
        for b in source.base(x) {
            let image: PointSet = b.iter().map(|&y| map[y]).collect();
            if !target.is_neighbourhood(map[x], &image) {
                return Err(NMorphismViolation::Zig { point: x, base: b.clone() });
            }
        }
        for v in target.base(map[x]) {
            let pre: PointSet = source.points().filter(|&y| v.contains(&map[y])).collect();
            if !source.is_neighbourhood(x, &pre) {
                return Err(NMorphismViolation::Zag { point: x, target_base: v.clone() });
            }
        }
    }
    Ok(NMorphism { source: source.clone(), target: target.clone(), map: map.to_vec() })
}

pub fn n_truth_preservation_test(f: &NMorphism, samples: usize, seed: u64) -> Result<PreservationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = ["p".to_string(), "q".to_string()];
    let mut report = PreservationReport::new();
    for _ in 0..samples {
        let target_val = gen::random_valuation(&mut rng, f.target.len(), &letters);
        let source_val = f.pullback(&target_val);
        let a = gen::random_prop(&mut rng, &letters, 3);
        let x = rng.gen_range(0..f.source.len());
        let lhs = NModel::new(f.source.clone(), source_val)?.eval(x, &a)?;
        let rhs = NModel::new(f.target.clone(), target_val)?.eval(f.apply(x), &a)?;
        report.record(lhs == rhs, || format!("{a} at {x}"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::{check_pmorphism, KripkeModel};
    use crate::semantics::all_valuations;
    use crate::syntax::{parse_prop, Connectives};

    fn set(xs: &[Point]) -> PointSet {
        xs.iter().copied().collect()
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    fn subsets(n: usize) -> Vec<PointSet> {
        (0u32..1 << n).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
    }

    /// The whole filter generated by the base of `x`.
    fn filter(frame: &NFrame, x: Point) -> Vec<PointSet> {
        subsets(frame.len()).into_iter().filter(|u| frame.base(x).iter().any(|b| b.is_subset(u))).collect()
    }

    fn brute_box(frame: &NFrame, ext: &[bool]) -> Vec<bool> {
        frame.points().map(|x| filter(frame, x).iter().any(|u| u.iter().all(|&y| ext[y]))).collect()
    }

    fn brute_pmorphism(map: &[Point], src: &NFrame, tgt: &NFrame) -> bool {
        let onto = tgt.points().all(|y| map.contains(&y));
        onto && src.points().all(|x| {
            let zig = filter(src, x).iter().all(|u| {
                let img: PointSet = u.iter().map(|&y| map[y]).collect();
                filter(tgt, map[x]).contains(&img)
            });
            let zag = filter(tgt, map[x]).iter().all(|v| {
                let pre: PointSet = src.points().filter(|&y| v.contains(&map[y])).collect();
                filter(src, x).contains(&pre)
            });
            zig && zag
        })
    }

    /// All frames on `n` points whose bases are single sets or a chain of
    /// two nested sets.
    fn small_nframes(n: usize) -> Vec<NFrame> {
        let subs = subsets(n);
        let mut options: Vec<Vec<PointSet>> = subs.iter().map(|s| vec![s.clone()]).collect();
        for a in &subs {
            for b in &subs {
                if a.is_subset(b) && a != b {
                    options.push(vec![b.clone(), a.clone()]);
                }
            }
        }
        let mut out = Vec::new();
        let mut idx = vec![0; n];
        'outer: loop {
            let base = idx.iter().map(|&i| options[i].clone()).collect();
            out.push(NFrame::new(names(n), base).unwrap());
            for i in 0..n {
                idx[i] += 1;
                if idx[i] < options.len() {
                    continue 'outer;
                }
                idx[i] = 0;
            }
            break;
        }
        out
    }

    #[test]
    fn eval_examples() {
        let f = NFrame::new(names(1), vec![vec![set(&[0])]]).unwrap();
        let m = NModel::new(f, [("p".to_string(), set(&[0]))].into()).unwrap();
        assert!(m.eval(0, &parse_prop("box p").unwrap()).unwrap());
        let improper = NFrame::new(names(1), vec![vec![set(&[0]), set(&[])]]).unwrap();
        let m = NModel::new(improper, Valuation::new()).unwrap();
        assert!(m.eval(0, &parse_prop("box false").unwrap()).unwrap());
        assert!(matches!(m.eval(0, &parse_prop("r").unwrap()), Err(Error::MissingValuation(_))));
    }

    #[test]
    fn filter_base_validation() {
        let bad = NFrame::new(names(3), vec![vec![set(&[0, 1]), set(&[1, 2])], vec![set(&[0])], vec![set(&[0])]]);
        assert!(matches!(bad, Err(Error::InvalidFrame(_))));
        let good = NFrame::new(
            names(3),
            vec![vec![set(&[0, 1]), set(&[1, 2]), set(&[1])], vec![set(&[0])], vec![set(&[0])]],
        );
        assert!(good.is_ok());
        assert!(NFrame::new(names(1), vec![vec![]]).is_err());
    }

    #[test]
    fn nf_shapes() {
        let f = KripkeFrame::from_edges(2, [(0, 1)]);
        let n = nf_from_kripke(&f);
        assert_eq!(n.base(1), &[set(&[])]);
        let full = KripkeFrame::total(["a", "b"]).unwrap();
        assert_eq!(nf_from_kripke(&full).base(0), &[set(&[0, 1])]);
    }

    #[test]
    fn base_evaluation_matches_materialised_filters() {
        for n in 1..=2 {
            for frame in small_nframes(n) {
                for mask in 0u32..1 << n {
                    let ext: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                    assert_eq!(frame.box_of(1, &ext).unwrap(), brute_box(&frame, &ext));
                }
            }
        }
        let three: Vec<NFrame> = crate::gen::small_frames(3).iter().map(nf_from_kripke).collect();
        for frame in &three {
            for mask in 0u32..8 {
                let ext: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
                assert_eq!(frame.box_of(1, &ext).unwrap(), brute_box(frame, &ext));
            }
        }
    }

    #[test]
    fn n_pmorphism_matches_brute_force() {
        let frames: Vec<NFrame> = (1..=2).flat_map(small_nframes).collect();
        let mut agree = 0;
        for src in frames.iter().filter(|f| f.len() == 2) {
            for tgt in &frames {
                for m in 0..tgt.len().pow(2) {
                    let map = vec![m % tgt.len(), m / tgt.len()];
                    assert_eq!(check_n_pmorphism(&map, src, tgt).is_ok(), brute_pmorphism(&map, src, tgt));
                    agree += 1;
                }
            }
        }
        assert!(agree > 1000);
    }

    #[test]
    fn n_pmorphism_examples() {
        let f = NFrame::new(names(2), vec![vec![set(&[0])], vec![set(&[1])]]).unwrap();
        assert!(check_n_pmorphism(&[0, 1], &f, &f).is_ok());
        let point = NFrame::new(names(1), vec![vec![set(&[0])]]).unwrap();
        assert!(check_n_pmorphism(&[0, 0], &f, &point).is_ok());
        let split = NFrame::new(names(2), vec![vec![set(&[0, 1])], vec![set(&[0, 1])]]).unwrap();
        assert!(matches!(check_n_pmorphism(&[0, 1], &f, &split), Err(NMorphismViolation::Zig { .. })));
        assert!(matches!(check_n_pmorphism(&[0, 1], &split, &f), Err(NMorphismViolation::Zag { .. })));
    }

    #[test]
    fn induced_from_kripke() {
        let cyc = KripkeFrame::from_edges(2, [(0, 1), (1, 0)]);
        let refl = KripkeFrame::from_edges(1, [(0, 0)]);
        let k = check_pmorphism(&[0, 0], &cyc, &refl).unwrap();
        let n = NMorphism::from_kripke(&k).unwrap();
        let r = n_truth_preservation_test(&n, 1000, 5).unwrap();
        assert!(r.all_agree(), "{r}");
        assert!(n_truth_preservation_test(&NMorphism::identity(&nf_from_kripke(&cyc)), 50, 2).unwrap().all_agree());
    }

    #[test]
    fn agrees_with_kripke_on_three_worlds() {
        let letters = vec!["p".to_string()];
        let formulas: Vec<PropFormula> = ["box p -> box box p", "dia p -> box p", "p -> box dia p", "box false"]
            .iter()
            .map(|s| parse_prop(s).unwrap())
            .chain([PropFormula::dia(1, PropFormula::verum())])
            .collect();
        for f in crate::gen::small_frames(3) {
            let nf = nf_from_kripke(&f);
            for v in all_valuations(f.len(), &letters) {
                let km = KripkeModel::new(f.clone(), v.clone()).unwrap();
                let nm = NModel::new(nf.clone(), v).unwrap();
                for a in &formulas {
                    assert_eq!(km.extension(a).unwrap(), nm.extension(a).unwrap());
                }
            }
        }
    }
}
