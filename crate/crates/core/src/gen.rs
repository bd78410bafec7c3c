//! Seeded generators and small exhaustive enumerations.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::kripke::{check_pmorphism, KripkeFrame, KripkeMorphism, World};
use crate::neighbourhood::nf_from_kripke;
use crate::predicate::{
    check_kk_morphism, check_nk_morphism, Domain, ElementMaps, PredKKMorphism, PredKripkeFrame, PredNFrame,
    PredNKMorphism,
};
use crate::semantics::Valuation;
use crate::syntax::Constant;
use crate::syntax::{pretransitivity_axiom, ptc_axiom, Connectives, PredFormula, PropFormula, Term};

/// A random formula over `letters` with modal depth at most `depth`.
pub fn random_prop<R: Rng + ?Sized>(rng: &mut R, letters: &[String], depth: usize) -> PropFormula {
    random_prop_sized(rng, letters, depth, 4)
}

/// Like [`random_prop`]; `size` bounds the nesting of Boolean connectives
/// between modal layers.
pub fn random_prop_sized<R: Rng + ?Sized>(rng: &mut R, letters: &[String], depth: usize, size: usize) -> PropFormula {
    let roll = rng.gen_range(0..10);
    if size == 0 || roll < 2 {
        return if letters.is_empty() || rng.gen_bool(0.15) {
            PropFormula::Falsum
        } else {
            PropFormula::letter(letters.choose(rng).expect("nonempty").clone())
        };
    }
    match roll {
        2..=4 => PropFormula::implies(
            random_prop_sized(rng, letters, depth, size - 1),
            random_prop_sized(rng, letters, depth, size - 1),
        ),
        5 => PropFormula::and(
            random_prop_sized(rng, letters, depth, size - 1),
            random_prop_sized(rng, letters, depth, size - 1),
        ),
        6 => PropFormula::not(random_prop_sized(rng, letters, depth, size - 1)),
        _ if depth == 0 => random_prop_sized(rng, letters, 0, size - 1),
        7 | 8 => PropFormula::boxed(1, random_prop_sized(rng, letters, depth - 1, size)),
        _ => PropFormula::dia(1, random_prop_sized(rng, letters, depth - 1, size)),
    }
}

/// A random predicate formula over `P/1`, `R/2`, `Q/0` and the variables
/// `x`, `y`, with modal depth at most `depth` and no shadowing. Free
/// variables may remain.
pub fn random_pred<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> PredFormula {
    random_pred_in(rng, depth, 4, &mut Vec::new())
}

fn random_pred_in<R: Rng + ?Sized>(rng: &mut R, depth: usize, size: usize, bound: &mut Vec<&'static str>) -> PredFormula {
    let var = |rng: &mut R| Term::Var(["x", "y"].choose(rng).expect("nonempty").to_string());
    let roll = rng.gen_range(0..12);
    if size == 0 || roll < 3 {
        return match rng.gen_range(0..7) {
            0 => PredFormula::Falsum,
            1 => PredFormula::atom("Q", vec![]),
            2 | 3 => PredFormula::atom("P", vec![var(rng)]),
            _ => PredFormula::atom("R", vec![var(rng), var(rng)]),
        };
    }
    match roll {
        3..=5 => PredFormula::implies(
            random_pred_in(rng, depth, size - 1, bound),
            random_pred_in(rng, depth, size - 1, bound),
        ),
        6 => PredFormula::not(random_pred_in(rng, depth, size - 1, bound)),
        7 | 8 => {
            let free: Vec<&'static str> = ["x", "y"].into_iter().filter(|v| !bound.contains(v)).collect();
            match free.choose(rng) {
                Some(&v) => {
                    bound.push(v);
                    let body = random_pred_in(rng, depth, size - 1, bound);
                    bound.pop();
                    if rng.gen_bool(0.5) {
                        PredFormula::forall(v, body)
                    } else {
                        PredFormula::exists(v, body)
                    }
                }
                None => random_pred_in(rng, depth, size - 1, bound),
            }
        }
        _ if depth == 0 => random_pred_in(rng, 0, size - 1, bound),
        9 | 10 => PredFormula::boxed(1, random_pred_in(rng, depth - 1, size, bound)),
        _ => PredFormula::dia(1, random_pred_in(rng, depth - 1, size, bound)),
    }
}

pub fn random_valuation<R: Rng + ?Sized>(rng: &mut R, n: usize, letters: &[String]) -> Valuation {
    letters
        .iter()
        .map(|p| (p.clone(), (0..n).filter(|_| rng.gen_bool(0.5)).collect()))
        .collect()
}

/// Each ordered pair is an edge with probability `density`.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> KripkeFrame {
    let mut f = KripkeFrame::with_size(n);
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(density) {
                f.add_edge(a, b);
            }
        }
    }
    f
}

/// A random frame rooted at world 0: unreachable worlds get an edge from a
/// random reachable one.
pub fn random_rooted_frame<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> KripkeFrame {
    let mut f = random_frame(rng, n, density);
    loop {
        let reach = f.reachable(0);
        let Some(w) = f.worlds().find(|w| !reach.contains(w)) else { break };
        let from: Vec<usize> = reach.into_iter().collect();
        f.add_edge(*from.choose(rng).expect("root is reachable"), w);
    }
    f.with_root(0).expect("all worlds reachable")
}

/// A random tree rooted at world 0; each world's parent is an earlier world.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize) -> KripkeFrame {
    let mut f = KripkeFrame::with_size(n);
    for w in 1..n {
        f.add_edge(rng.gen_range(0..w), w);
    }
    f.with_root(0).expect("trees are rooted")
}

/// A frame in which every world of `target` is split into one or two copies,
/// with copy edges over target edges chosen so that every copy still sees a
/// copy of each target successor; the projection is a p-morphism.
pub fn random_pmorphism<R: Rng + ?Sized>(rng: &mut R, target: &KripkeFrame) -> KripkeMorphism {
    let mut map: Vec<World> = Vec::new();
    let mut copies: Vec<Vec<usize>> = Vec::new();
    for w in target.worlds() {
        let c = rng.gen_range(1..=2);
        copies.push((map.len()..map.len() + c).collect());
        map.extend(std::iter::repeat(w).take(c));
    }
    let names: Vec<String> = map.iter().enumerate().map(|(i, &w)| format!("{}~{i}", target.name(w))).collect();
    let mut source = KripkeFrame::new(names).expect("distinct names");
    for (u, v) in target.edges() {
        for &cu in &copies[u] {
            let mut any = false;
            for &cv in &copies[v] {
                if rng.gen_bool(0.6) {
                    source.add_edge(cu, cv);
                    any = true;
                }
            }
            if !any {
                source.add_edge(cu, *copies[v].choose(rng).expect("at least one copy"));
            }
        }
    }
    check_pmorphism(&map, &source, target).expect("projection of a blow-up")
}

/// Domains grown from random seeds: each world holds the seeds of every
/// world that reaches it, so domains expand along edges.
pub fn random_expanding_domains<R: Rng + ?Sized>(rng: &mut R, frame: &KripkeFrame, max_new: usize) -> Vec<Domain> {
    let seeds: Vec<Domain> = frame
        .worlds()
        .map(|w| (0..rng.gen_range(usize::from(w == 0)..=max_new)).map(|i| Constant::new(format!("e{w}_{i}"))).collect())
        .collect();
    frame
        .worlds()
        .map(|v| {
            let mut d: Domain = frame.worlds().filter(|&u| frame.reachable(u).contains(&v) || u == v).flat_map(|u| seeds[u].clone()).collect();
            if d.is_empty() {
                d.insert(Constant::new("e"));
            }
            d
        })
        .collect()
}

/// Every element `d` at a copy becomes `d~0` and `d~1`, both sent to `d`.
fn doubled(d: &Domain) -> (Domain, std::collections::BTreeMap<Constant, Constant>) {
    let map: std::collections::BTreeMap<Constant, Constant> = d
        .iter()
        .flat_map(|c| (0..2).map(move |k| (Constant::new(format!("{}~{k}", c.name())), c.clone())))
        .collect();
    (map.keys().cloned().collect(), map)
}

/// A predicate p-morphism between Kripke frames over a random rooted frame
/// with expanding domains.
pub fn random_kk_morphism<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PredKKMorphism {
    let target_frame = random_rooted_frame(rng, n, 0.4);
    let domains = random_expanding_domains(rng, &target_frame, 2);
    let m = random_pmorphism(rng, &target_frame);
    let (src_domains, phi1): (Vec<Domain>, ElementMaps) = m.map.iter().map(|&w| doubled(&domains[w])).unzip();
    let target = PredKripkeFrame::new(target_frame, domains).expect("expanding");
    let source = PredKripkeFrame::new(m.source.clone(), src_domains).expect("expanding");
    check_kk_morphism(&m.map, &phi1, &source, &target).expect("projection of a blow-up")
}

/// A predicate p-morphism from the neighbourhood frame of a blow-up onto a
/// constant-domain Kripke frame.
pub fn random_nk_morphism<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PredNKMorphism {
    let target_frame = random_rooted_frame(rng, n, 0.4);
    let d: Domain = (0..rng.gen_range(1..=2)).map(|i| Constant::new(format!("e{i}"))).collect();
    let m = random_pmorphism(rng, &target_frame);
    let (src_domain, map) = doubled(&d);
    let target = PredKripkeFrame::new(target_frame, vec![d; n]).expect("constant");
    let source = PredNFrame::new(nf_from_kripke(&m.source), src_domain).expect("nonempty");
    let phi1 = vec![map; m.map.len()];
    check_nk_morphism(&m.map, &phi1, &source, &target).expect("projection of a blow-up")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// One representative per isomorphism class of frames on exactly `n` worlds
/// (`n <= 4`). The representative has the least edge bitmask in its class.
pub fn frames_up_to_iso(n: usize) -> Vec<KripkeFrame> {
    assert!((1..=4).contains(&n), "exhaustive enumeration is limited to 4 worlds");
    let perms = permutations(n);
    let bits = n * n;
    let mut reps = BTreeSet::new();
    for mask in 0u32..(1 << bits) {
        let canon = perms
            .iter()
            .map(|p| {
                let mut m = 0u32;
                for a in 0..n {
                    for b in 0..n {
                        if mask >> (a * n + b) & 1 == 1 {
                            m |= 1 << (p[a] * n + p[b]);
                        }
                    }
                }
                m
            })
            .min()
            .expect("at least one permutation");
        if canon == mask {
            reps.insert(mask);
        }
    }
    reps.into_iter()
        .map(|mask| {
            KripkeFrame::from_edges(
                n,
                (0..bits).filter(|i| mask >> i & 1 == 1).map(|i| (i / n, i % n)),
            )
        })
        .collect()
}

/// Representatives for every size from 1 to `max_n`.
pub fn small_frames(max_n: usize) -> Vec<KripkeFrame> {
    (1..=max_n).flat_map(frames_up_to_iso).collect()
}

/// A fixed list of formulas over `p` and `q` of modal depth at most 2.
pub fn depth2_formulas() -> Vec<PropFormula> {
    let p = PropFormula::letter("p");
    let q = PropFormula::letter("q");
    let not = PropFormula::not;
    let imp = PropFormula::implies;
    let and = PropFormula::and;
    let or = PropFormula::or;
    let bx = |a: PropFormula| PropFormula::boxed(1, a);
    let dia = |a: PropFormula| PropFormula::dia(1, a);

    let base = vec![
        PropFormula::Falsum,
        p.clone(),
        q.clone(),
        not(p.clone()),
        and(p.clone(), q.clone()),
        or(p.clone(), not(q.clone())),
    ];
    let mut out = base.clone();
    let mut one = Vec::new();
    for a in &base {
        one.push(bx(a.clone()));
        one.push(dia(a.clone()));
    }
    one.extend([
        imp(bx(p.clone()), p.clone()),
        imp(p.clone(), bx(p.clone())),
        imp(dia(p.clone()), bx(p.clone())),
        imp(bx(imp(p.clone(), q.clone())), imp(bx(p.clone()), bx(q.clone()))),
        or(bx(p.clone()), bx(q.clone())),
        imp(bx(or(p.clone(), q.clone())), or(dia(p.clone()), bx(q.clone()))),
        and(dia(p.clone()), dia(not(p.clone()))),
        imp(and(p.clone(), dia(q.clone())), dia(and(p.clone(), q.clone()))),
    ]);
    out.extend(one.iter().cloned());
    for a in &one {
        out.push(bx(a.clone()));
        out.push(dia(a.clone()));
    }
    out.extend([
        imp(p.clone(), dia(p.clone())),
        ptc_axiom(2),
        pretransitivity_axiom(1),
        imp(p.clone(), bx(dia(p.clone()))),
        imp(dia(p.clone()), bx(dia(p.clone()))),
        imp(dia(bx(p.clone())), bx(dia(p.clone()))),
        imp(bx(bx(p.clone())), bx(p.clone())),
        imp(dia(dia(q.clone())), or(q.clone(), dia(q.clone()))),
        imp(bx(imp(bx(p.clone()), p.clone())), bx(p.clone())),
        and(bx(dia(p.clone())), dia(bx(not(p.clone())))),
        or(bx(bx(PropFormula::Falsum)), dia(dia(PropFormula::verum()))),
        imp(and(bx(p.clone()), dia(q.clone())), dia(dia(or(p.clone(), q.clone())))),
    ]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iso_class_counts() {
        // number of digraphs with loops allowed, up to isomorphism
        let counts: Vec<usize> = (1..=3).map(|n| frames_up_to_iso(n).len()).collect();
        assert_eq!(counts, vec![2, 10, 104]);
    }

    #[test]
    fn four_world_classes() {
        assert_eq!(frames_up_to_iso(4).len(), 3044);
    }

    #[test]
    fn enumeration_shape() {
        let fs = depth2_formulas();
        assert!((60..=100).contains(&fs.len()), "{}", fs.len());
        assert!(fs.iter().all(|f| f.modal_depth() <= 2));
        let distinct: BTreeSet<String> = fs.iter().map(|f| f.to_string()).collect();
        assert_eq!(distinct.len(), fs.len());
    }

    #[test]
    fn random_generators_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let letters = vec!["p".to_string(), "q".to_string()];
        for _ in 0..200 {
            assert!(random_prop(&mut rng, &letters, 3).modal_depth() <= 3);
            let f = random_rooted_frame(&mut rng, 5, 0.2);
            assert_eq!(f.reachable(0).len(), 5);
            assert!(random_tree(&mut rng, 6).is_tree());
        }
    }

    #[test]
    fn random_morphisms_verify() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=4 {
            for _ in 0..20 {
                let target = random_rooted_frame(&mut rng, n, 0.5);
                let m = random_pmorphism(&mut rng, &target);
                assert!(m.source.len() >= n);
                let kk = random_kk_morphism(&mut rng, n);
                assert_eq!(kk.target.len(), n);
                let nk = random_nk_morphism(&mut rng, n);
                assert_eq!(nk.phi0.len(), nk.source.space.len());
            }
        }
    }
}
