//! The composite `η_α = ψ_{f0(α)} ∘ ξ_α` and predicate evaluation on the
//! dense side under the pulled-back interpretation
//! `θ_α(P) = { γ̄ : η_α(γ̄) ∈ ξ_{π f0(α)}(P) }`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{enumerate_stopwords, DenseFrame, StopWord};
use crate::error::{Error, Result};
use crate::kripke::World;
use crate::predicate::{PredKripkeModel, Tuple};
use crate::syntax::{Constant, PredFormula, Term};

use super::psi::Psi;
use super::{xi, Entanglement};

/// `(f0, η)` from the dense frame with the constant domain of `γ` words to
/// the predicate frame under `ψ`.
#[derive(Debug, Clone)]
pub struct DenseComposite {
    pub dense: DenseFrame,
    pub psi: Psi,
}

impl DenseComposite {
    pub fn new(dense: DenseFrame, psi: Psi) -> Result<Self> {
        if dense.base != psi.ent.left {
            return Err(Error::Incompatible("ψ is not defined over the dense frame's base".into()));
        }
        Ok(DenseComposite { dense, psi })
    }

    pub fn ent(&self) -> &Entanglement {
        &self.psi.ent
    }

    /// `π(f0(α))`.
    pub fn point(&self, alpha: &StopWord) -> Result<World> {
        Ok(*self.dense.f0(alpha)?.last().expect("paths are nonempty"))
    }

    /// `η_α(γ) = ψ_{f0(α)}(ξ_α(γ))`.
    pub fn eta(&self, alpha: &StopWord, gamma: &StopWord) -> Result<Constant> {
        self.psi.apply(&self.dense.f0(alpha)?, &xi(alpha, gamma))
    }

    /// One `γ` per class of truncated `D♯_{f0(α)}`, built through `t`.
    pub fn representatives(&self, alpha: &StopWord) -> Result<Vec<StopWord>> {
        let path = self.dense.f0(alpha)?;
        self.ent().dsharp(&path, self.psi.max_d)?.iter().map(|c| self.ent().preimage(alpha, c)).collect()
    }

    /// Samples points `α` with `st(α) ≤ max_len` and checks that `η_α` is onto
    /// `D_{π f0(α)}` and that `η_β(γ) = η_α(γ)` on enumerated `β ∈ U_m(α)`,
    /// `m = st(γ) + st(α)`.
    pub fn check(&self, samples: usize, seed: u64, max_len: usize) -> Result<CompositeReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alphas = enumerate_stopwords(&self.dense.base, max_len);
        let n = self.ent().sigma2();
        let mut report = CompositeReport { samples, seed, ..Default::default() };
        for _ in 0..samples {
            let alpha = alphas.choose(&mut rng).expect("the empty word is always enumerated");
            let u = self.point(alpha)?;
            let hit: BTreeSet<Constant> =
                self.representatives(alpha)?.iter().map(|g| self.eta(alpha, g)).collect::<Result<_>>()?;
            if hit == self.psi.domains[u] {
                report.surjective += 1;
            } else {
                report.failures.push(format!("η at {} misses part of the domain", self.ent().show_alpha(alpha)));
            }
            let gamma =
                StopWord::new((0..rng.gen_range(0..=4)).map(|_| rng.gen_bool(0.6).then(|| rng.gen_range(0..n))).collect());
            let m = gamma.st() + alpha.st();
            let here = self.eta(alpha, &gamma)?;
            let members = self.dense.uk_members(alpha, m, self.dense.bounds.j_max.min(3))?;
            let mut local = true;
            for beta in &members {
                if self.eta(beta, &gamma)? != here {
                    local = false;
                    report.failures.push(format!(
                        "η moves {} between {} and {}",
                        self.ent().show_gamma(&gamma),
                        self.ent().show_alpha(alpha),
                        self.ent().show_alpha(beta)
                    ));
                    break;
                }
            }
            report.local += usize::from(local);
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompositeReport {
    pub samples: usize,
    pub seed: u64,
    pub surjective: usize,
    pub local: usize,
    pub failures: Vec<String>,
}

impl CompositeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.surjective == self.samples && self.local == self.samples
    }
}

impl fmt::Display for CompositeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "composite seed={} samples={} surjective={} local={}",
            self.seed, self.samples, self.surjective, self.local
        )?;
        for x in &self.failures {
            write!(f, "\n  {x}")?;
        }
        Ok(())
    }
}

/// Outcome of dense-side predicate evaluation. `certified` holds when every
/// quantifier's representatives cover the target domain, every box gave the
/// same answer at neighbourhood index `m` and `m + 1`, and no related path
/// was cut by the depth bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredVerdict {
    pub value: bool,
    pub certified: bool,
}

impl fmt::Display for PredVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.value, if self.certified { "certified" } else { "uncertified" })
    }
}

/// The dense frame with constant domain and interpretation `θ` pulled back
/// along the composite.
#[derive(Debug, Clone)]
pub struct DensePredModel {
    pub composite: DenseComposite,
    pub target: PredKripkeModel,
    complete: bool,
}

type Env = BTreeMap<String, StopWord>;

impl DensePredModel {
    /// `target` lives on the (closed) base frame with `ψ`'s domains.
    pub fn new(composite: DenseComposite, target: PredKripkeModel) -> Result<Self> {
        let base = &composite.dense.base;
        if target.frame.len() != base.len() || target.frame.domains() != composite.psi.domains.as_slice() {
            return Err(Error::Incompatible("the target model is not over ψ's domains".into()));
        }
        let complete = composite.dense.bounds.depth >= base.len();
        Ok(DensePredModel { composite, target, complete })
    }

    /// `γ̄ ∈ θ_α(P)`.
    pub fn theta(&self, alpha: &StopWord, pred: &str, args: &[StopWord]) -> Result<bool> {
        let u = self.composite.point(alpha)?;
        let tuple: Tuple = args.iter().map(|g| self.composite.eta(alpha, g)).collect::<Result<_>>()?;
        Ok(self.target.interpretation(u).get(pred).is_some_and(|s| s.contains(&tuple)))
    }

    /// Truth of a closed formula at `α`.
    pub fn eval(&self, alpha: &StopWord, a: &PredFormula) -> Result<PredVerdict> {
        if !a.is_closed() {
            return Err(Error::Precondition(format!("`{a}` has free variables")));
        }
        let (value, certified) = self.ev(alpha, a, &mut Env::new())?;
        Ok(PredVerdict { value, certified })
    }

    /// Members of `U_k(α)`, one for each path related to `f0(α)`.
    fn neighbours(&self, alpha: &StopWord, k: usize) -> Result<Vec<StopWord>> {
        let dense = &self.composite.dense;
        let path = dense.f0(alpha)?;
        let prefix = alpha.restrict(k.max(alpha.st()));
        Ok(dense
            .related_paths(&path)
            .into_iter()
            .map(|q| {
                if q.len() == path.len() {
                    alpha.clone()
                } else {
                    let mut w = prefix.clone();
                    w.extend(q[path.len()..].iter().map(|&b| Some(b)));
                    StopWord::new(w)
                }
            })
            .collect())
    }

    fn ev(&self, alpha: &StopWord, a: &PredFormula, env: &mut Env) -> Result<(bool, bool)> {
        match a {
            PredFormula::Falsum => Ok((false, true)),
            PredFormula::Atom { pred, args } => {
                let gammas = args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => env.get(v).cloned().ok_or_else(|| Error::Precondition(format!("`{v}` is free"))),
                        Term::Const(c) => Err(Error::Precondition(format!(
                            "constant {c} does not name an element of the constant domain"
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((self.theta(alpha, pred, &gammas)?, true))
            }
            PredFormula::Implies(x, y) => {
                let (vx, cx) = self.ev(alpha, x, env)?;
                let (vy, cy) = self.ev(alpha, y, env)?;
                Ok((!vx || vy, cx && cy))
            }
            PredFormula::Boxed(i, body) => {
                if *i != 1 {
                    return Err(Error::UnsupportedModality(*i));
                }
                let m = alpha.st() + env.values().map(StopWord::st).max().unwrap_or(0);
                let mut certified = self.complete;
                let mut values = [true, true];
                for (slot, k) in [m, m + 1].into_iter().enumerate() {
                    for beta in self.neighbours(alpha, k)? {
                        let (v, c) = self.ev(&beta, body, env)?;
                        values[slot] &= v;
                        certified &= c;
                    }
                }
                Ok((values[0], certified && values[0] == values[1]))
            }
            PredFormula::Forall(x, body) => {
                let u = self.composite.point(alpha)?;
                let saved = env.remove(x);
                let mut value = true;
                let mut certified = true;
                let mut covered = BTreeSet::new();
                for gamma in self.composite.representatives(alpha)? {
                    covered.insert(self.composite.eta(alpha, &gamma)?);
                    env.insert(x.clone(), gamma);
                    let (v, c) = self.ev(alpha, body, env)?;
                    value &= v;
                    certified &= c;
                }
                env.remove(x);
                if let Some(g) = saved {
                    env.insert(x.clone(), g);
                }
                let cover = covered == *self.target.frame.domain(u);
                Ok((value, certified && cover))
            }
        }
    }
}
