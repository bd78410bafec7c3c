//! The family `ψ = (ψ_ā)` from `D♯` onto the domains of a predicate frame
//! over a tree.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::horn::{gamma_close, HornTheory};
use crate::kripke::{unravel, World};
use crate::predicate::{check_kk_morphism, Domain, ElementMaps, PredKKMorphism, PredKripkeFrame, PredMorphismViolation};
use crate::syntax::Constant;

use super::{EntangledWord, Entanglement};

/// `ψ`, defined on every class: a class is fresh at the path spelled by its
/// `W` letters; the first fresh classes there are sent onto the elements new
/// at that world, every other fresh class to a designated element of the
/// parent's domain (of the root domain at the root).
#[derive(Debug, Clone)]
pub struct Psi {
    pub ent: Entanglement,
    pub domains: Vec<Domain>,
    pub max_d: usize,
    parent: Vec<Option<World>>,
    assigned: Vec<BTreeMap<EntangledWord, Constant>>,
    overflow: Vec<Constant>,
}

/// Builds `ψ` for the tree `ent.left` with domains `domains`; fresh classes
/// are drawn from those with at most `max_d` domain letters.
pub fn build_psi(ent: &Entanglement, domains: &[Domain], max_d: usize) -> Result<Psi> {
    let tree = &ent.left;
    if !tree.is_tree() {
        return Err(Error::NotTree("ψ is defined over trees".into()));
    }
    if domains.len() != tree.len() {
        return Err(Error::Precondition(format!("{} domains for {} worlds", domains.len(), tree.len())));
    }
    if let Some(w) = tree.worlds().find(|&w| domains[w].is_empty()) {
        return Err(Error::Precondition(format!("empty domain at `{}`", tree.name(w))));
    }
    let mut parent = vec![None; tree.len()];
    for (u, v) in tree.edges() {
        if !domains[u].is_subset(&domains[v]) {
            return Err(Error::Precondition(format!(
                "domains do not expand from `{}` to `{}`",
                tree.name(u),
                tree.name(v)
            )));
        }
        parent[v] = Some(u);
    }
    let mut psi = Psi {
        ent: ent.clone(),
        domains: domains.to_vec(),
        max_d,
        parent,
        assigned: vec![BTreeMap::new(); tree.len()],
        overflow: Vec::with_capacity(tree.len()),
    };
    for w in tree.worlds() {
        let path = psi.path_to(w);
        let (new, designated): (Vec<&Constant>, &Constant) = match psi.parent[w] {
            None => (domains[w].iter().collect(), domains[w].first().expect("nonempty")),
            Some(p) => (
                domains[w].difference(&domains[p]).collect(),
                domains[p].first().expect("nonempty"),
            ),
        };
        let fresh = ent.fresh_classes(&path, max_d)?;
        if fresh.len() < new.len() {
            return Err(Error::AlphabetTooSmall { needed: new.len(), have: fresh.len(), at: ent.show_path(&path) });
        }
        psi.assigned[w] = fresh.into_iter().zip(new.into_iter().cloned()).collect();
        psi.overflow.push(designated.clone());
    }
    Ok(psi)
}

impl Psi {
    /// The unique path from the root to `w`.
    pub fn path_to(&self, w: World) -> Vec<World> {
        let mut path = vec![w];
        let mut cur = w;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// `ψ_ā([x])`.
    pub fn apply(&self, path: &[World], x: &EntangledWord) -> Result<Constant> {
        let c = x.canonicalize();
        let ws = c.w_letters();
        if ws.len() >= path.len() || path[1..=ws.len()] != ws[..] {
            return Err(Error::Precondition(format!(
                "{} is not in D♯ of {}",
                self.ent.show_class(&c),
                self.ent.show_path(path)
            )));
        }
        let w = path[ws.len()];
        Ok(self.assigned[w].get(&c).unwrap_or(&self.overflow[w]).clone())
    }

    /// The constant naming a class in truncated `D♯` domains.
    pub fn class_constant(&self, x: &EntangledWord) -> Constant {
        Constant::new(self.ent.show_class(x))
    }

    /// The truncated predicate frame `(F♯, D♯)`, with its relation closed
    /// under `theory` when given.
    pub fn source_frame(&self, theory: Option<&HornTheory>) -> Result<(PredKripkeFrame, Vec<Vec<World>>)> {
        let mut u = unravel(&self.ent.left, self.ent.left.len())?;
        if let Some(t) = theory {
            u.frame = gamma_close(&u.frame, t);
        }
        let domains = u
            .paths
            .iter()
            .map(|p| Ok(self.ent.dsharp(p, self.max_d)?.iter().map(|c| self.class_constant(c)).collect()))
            .collect::<Result<Vec<Domain>>>()?;
        Ok((PredKripkeFrame::new(u.frame, domains)?, u.paths))
    }

    /// `(π, ψ)` on the truncated frame, checked against `target`.
    pub fn kk_morphism(
        &self,
        target: &PredKripkeFrame,
        theory: Option<&HornTheory>,
    ) -> Result<std::result::Result<PredKKMorphism, PredMorphismViolation>> {
        let (source, paths) = self.source_frame(theory)?;
        let phi0: Vec<World> = paths.iter().map(|p| *p.last().expect("nonempty")).collect();
        let phi1 = paths
            .iter()
            .map(|p| {
                self.ent
                    .dsharp(p, self.max_d)?
                    .iter()
                    .map(|c| Ok((self.class_constant(c), self.apply(p, c)?)))
                    .collect::<Result<BTreeMap<_, _>>>()
            })
            .collect::<Result<ElementMaps>>()?;
        Ok(check_kk_morphism(&phi0, &phi1, &source, target))
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::gen::random_tree;
    use crate::kripke::KripkeFrame;
    use crate::predicate::domain;

    fn chain2() -> KripkeFrame {
        KripkeFrame::named(&["u", "v"], &[("u", "v")]).unwrap().with_root(0).unwrap()
    }

    #[test]
    fn constant_domains_overflow() {
        let ent = Entanglement::with_domain_alphabet(chain2(), 2).unwrap();
        let doms = vec![domain(&["d", "e"]), domain(&["d", "e"])];
        let psi = build_psi(&ent, &doms, 2).unwrap();
        let target = PredKripkeFrame::new(chain2(), doms).unwrap();
        let m = psi.kk_morphism(&target, None).unwrap().unwrap();
        assert_eq!(m.phi0, vec![0, 1]);
        // every fresh class at v falls to the designated element
        let fresh = ent.fresh_classes(&[0, 1], 2).unwrap();
        assert!(fresh.iter().all(|c| psi.apply(&[0, 1], c).unwrap() == Constant::new("d")));
    }

    #[test]
    fn new_element_hit_by_a_fresh_class() {
        let ent = Entanglement::with_domain_alphabet(chain2(), 2).unwrap();
        let doms = vec![domain(&["d"]), domain(&["d", "e"])];
        let psi = build_psi(&ent, &doms, 1).unwrap();
        let hit = ent.parse("v.1").unwrap();
        assert_eq!(psi.apply(&[0, 1], &hit).unwrap(), Constant::new("e"));
        assert_eq!(psi.apply(&[0, 1], &ent.parse("1.v").unwrap()).unwrap(), Constant::new("d"));
        let target = PredKripkeFrame::new(chain2(), doms).unwrap();
        assert!(psi.kk_morphism(&target, None).unwrap().is_ok());
        assert!(psi.apply(&[0], &hit).is_err());
    }

    #[test]
    fn alphabet_too_small() {
        let ent = Entanglement::with_domain_alphabet(chain2(), 1).unwrap();
        let doms = vec![domain(&["d"]), domain(&["d", "e", "f"])];
        assert!(matches!(build_psi(&ent, &doms, 1), Err(Error::AlphabetTooSmall { needed: 2, have: 1, .. })));
        assert!(build_psi(&ent, &doms, 2).is_ok());
    }

    #[test]
    fn not_a_tree() {
        let f = KripkeFrame::named(&["u"], &[("u", "u")]).unwrap().with_root(0).unwrap();
        let ent = Entanglement::with_domain_alphabet(f, 1).unwrap();
        assert!(matches!(build_psi(&ent, &[domain(&["d"])], 1), Err(Error::NotTree(_))));
    }

    #[test]
    fn random_trees_pass_the_checker() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(1..=4);
            let tree = random_tree(&mut rng, n);
            let mut doms: Vec<Domain> = vec![Domain::new(); n];
            let mut next = 0;
            for w in tree.worlds() {
                // parents precede children in the generator
                let mut d = tree.worlds().find(|&p| tree.has_edge(p, w)).map(|p| doms[p].clone()).unwrap_or_default();
                for _ in 0..rng.gen_range(usize::from(d.is_empty())..=2) {
                    d.insert(Constant::new(format!("e{next}")));
                    next += 1;
                }
                doms[w] = d;
            }
            let ent = Entanglement::with_domain_alphabet(tree.clone(), 2).unwrap();
            let psi = build_psi(&ent, &doms, 2).unwrap();
            let target = PredKripkeFrame::new(tree, doms).unwrap();
            assert!(psi.kk_morphism(&target, None).unwrap().is_ok());
        }
    }
}
