//! Scenario files and the end-to-end run: a refuting predicate Kripke model
//! over a tree is carried to the dense frame with a constant domain through
//! `(π, ψ)` and `(f0, ξ)`, and the formula is evaluated on both sides.
//!
//! ```text
//! [frame]        worlds / root / edges of the tree skeleton
//! [domains]      domain w = {d1,d2}
//! [valuation]    val P @ w = {(d1)}
//! [horn]         optional chain sentences, closed over the skeleton
//! [formula]      one formula; free variables are closed universally
//! [bounds]       depth = 4, k_max = 12, j_max = 3, max_len = 2,
//!                sigma2 = 2 (or dalphabet = 1 2), seed = 7, samples = 40
//! ```

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{enumerate_stopwords, DenseBounds, DenseFrame, StopWord};
use crate::entangle::{build_psi, xi_locality_check, xi_surjectivity_check, DenseComposite, DensePredModel, Entanglement};
use crate::error::{Error, Result};
use crate::formats::{content_lines, parse_kripke};
use crate::horn::{closure_minimality_check, eval_horn, gamma_close, HornTheory};
use crate::kripke::{check_axiom_inclusion, check_pmorphism, unravel, KripkeFrame};
use crate::predicate::{pullback_kk, Domain, Interpretation, PredKripkeFrame, PredKripkeModel};
use crate::syntax::{parse_pred, PredFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioBounds {
    pub depth: usize,
    pub k_max: usize,
    pub j_max: usize,
    /// Domain letters per truncated `D♯` class.
    pub max_len: usize,
    pub sigma2: usize,
    pub seed: u64,
    pub samples: usize,
}

impl Default for ScenarioBounds {
    fn default() -> Self {
        ScenarioBounds { depth: 4, k_max: 12, j_max: 3, max_len: 2, sigma2: 2, seed: 7, samples: 40 }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub skeleton: KripkeFrame,
    pub domains: Vec<Domain>,
    pub interpretations: Vec<Interpretation>,
    pub theory: Option<HornTheory>,
    pub formula: PredFormula,
    pub bounds: ScenarioBounds,
}

const SECTIONS: [&str; 6] = ["frame", "domains", "valuation", "horn", "formula", "bounds"];

/// Text of one section, other lines blanked so line numbers survive.
fn section(text: &str, owner: &[Option<&str>], name: &str) -> String {
    text.lines()
        .zip(owner)
        .map(|(l, o)| if *o == Some(name) { l } else { "" })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_scenario(name: &str, text: &str) -> Result<Scenario> {
    let mut owner: Vec<Option<&str>> = Vec::new();
    let mut current = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.split('#').next().unwrap_or("").trim();
        if let Some(sec) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let sec = SECTIONS
                .iter()
                .find(|s| **s == sec.trim())
                .ok_or_else(|| Error::Format { line: i + 1, message: format!("unknown section `{sec}`") })?;
            current = Some(*sec);
            owner.push(None);
        } else {
            if current.is_none() && !t.is_empty() {
                return Err(Error::Format { line: i + 1, message: "text before the first section".into() });
            }
            owner.push(current);
        }
    }
    let model_text =
        ["frame", "domains", "valuation"].iter().map(|s| section(text, &owner, s)).collect::<Vec<_>>().join("\n");
    // sections are concatenated, so shift line numbers back
    let doc = parse_kripke(&model_text).map_err(|e| match e {
        Error::Format { line, message } if line > 0 => {
            let n = text.lines().count().max(1);
            Error::Format { line: (line - 1) % n + 1, message }
        }
        e => e,
    })?;
    let skeleton = doc.frame.clone();
    if skeleton.root().is_none() {
        return Err(Error::NotRooted("the scenario frame needs a `root` line".into()));
    }
    if !skeleton.is_tree() {
        return Err(Error::NotTree("the scenario frame must be a tree skeleton".into()));
    }
    let domains = doc.domains.clone().ok_or_else(|| Error::Precondition("the scenario has no domains".into()))?;
    let horn = HornTheory::parse(&section(text, &owner, "horn"))?;
    let theory = (!horn.is_empty()).then_some(horn);
    let formula_text = section(text, &owner, "formula");
    let formula_lines: Vec<(usize, &str)> = content_lines(&formula_text).collect();
    let (fline, ftext) = match formula_lines.as_slice() {
        [one] => *one,
        _ => return Err(Error::Format { line: 0, message: "[formula] must hold exactly one formula".into() }),
    };
    let formula = parse_pred(ftext)
        .map_err(|e| Error::Format { line: fline, message: e.to_string() })?
        .universal_closure();
    let mut bounds = ScenarioBounds::default();
    let bounds_text = section(text, &owner, "bounds");
    for (line, l) in content_lines(&bounds_text) {
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| Error::Format { line, message: format!("expected `key = value`, found `{l}`") })?;
        let (k, v) = (k.trim(), v.trim());
        let num = || v.parse::<u64>().map_err(|_| Error::Format { line, message: format!("`{v}` is not a number") });
        match k {
            "depth" => bounds.depth = num()? as usize,
            "k_max" => bounds.k_max = num()? as usize,
            "j_max" => bounds.j_max = num()? as usize,
            "max_len" => bounds.max_len = num()? as usize,
            "sigma2" => bounds.sigma2 = num()? as usize,
            "seed" => bounds.seed = num()?,
            "samples" => bounds.samples = num()? as usize,
            "dalphabet" => {
                let syms: Vec<&str> = v.split_whitespace().collect();
                let expected: Vec<String> = (1..=syms.len()).map(|i| i.to_string()).collect();
                if syms != expected {
                    return Err(Error::Format { line, message: "dalphabet must list 1 2 .. n".into() });
                }
                bounds.sigma2 = syms.len();
            }
            "walphabet" => {
                let syms: Vec<&str> = v.split_whitespace().collect();
                if syms != skeleton.names().iter().map(String::as_str).collect::<Vec<_>>() {
                    return Err(Error::Format { line, message: "walphabet must list the worlds in order".into() });
                }
            }
            _ => return Err(Error::Format { line, message: format!("unknown bound `{k}`") }),
        }
    }
    Ok(Scenario {
        name: name.to_string(),
        skeleton,
        domains,
        interpretations: doc.interpretations,
        theory,
        formula,
        bounds,
    })
}

impl Scenario {
    pub fn closed_frame(&self) -> KripkeFrame {
        match &self.theory {
            Some(t) => gamma_close(&self.skeleton, t),
            None => self.skeleton.clone(),
        }
    }

    pub fn dense_bounds(&self) -> DenseBounds {
        let b = self.bounds;
        DenseBounds { k_max: b.k_max, j_max: b.j_max, depth: b.depth.max(self.skeleton.len()) }
    }

    pub fn dense_frame(&self) -> Result<DenseFrame> {
        match &self.theory {
            Some(t) => DenseFrame::with_theory(self.skeleton.clone(), t.clone(), self.dense_bounds()),
            None => DenseFrame::new(self.skeleton.clone(), self.dense_bounds()),
        }
    }

    pub fn entanglement(&self) -> Result<Entanglement> {
        Entanglement::with_domain_alphabet(self.skeleton.clone(), self.bounds.sigma2)
    }

    /// The dense frame with constant domain and the pulled-back
    /// interpretation, without running the morphism checks.
    pub fn dense_model(&self) -> Result<DensePredModel> {
        let psi = build_psi(&self.entanglement()?, &self.domains, self.bounds.max_len)?;
        DensePredModel::new(DenseComposite::new(self.dense_frame()?, psi)?, self.target()?)
    }

    pub fn target(&self) -> Result<PredKripkeModel> {
        PredKripkeModel::new(
            PredKripkeFrame::new(self.closed_frame(), self.domains.clone())?,
            self.interpretations.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub scenario: String,
    pub formula: String,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub kripke_value: bool,
    /// Absent when a morphism stage failed.
    pub dense: Option<crate::entangle::PredVerdict>,
    /// Wall-clock time; kept out of the text rendering.
    pub elapsed_ms: u128,
}

impl PipelineReport {
    pub fn morphisms_verified(&self) -> bool {
        self.stages.iter().all(|s| s.ok)
    }

    /// Every stage passed and the dense side agrees with the Kripke side
    /// under a certified verdict.
    pub fn reproduced(&self) -> bool {
        self.morphisms_verified() && self.dense.is_some_and(|v| v.certified && v.value == self.kripke_value)
    }

    pub fn status(&self) -> &'static str {
        match (self.reproduced(), self.kripke_value) {
            (true, false) => "refutation-reproduced",
            (true, true) => "valid-at-root-agreed",
            _ if !self.morphisms_verified() => "stage-failed",
            _ => "uncertified",
        }
    }
}

impl fmt::Display for PipelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.scenario)?;
        writeln!(f, "formula {}", self.formula)?;
        writeln!(f, "seed {}", self.seed)?;
        for s in &self.stages {
            writeln!(f, "stage {:<14} {} {}", s.name, if s.ok { "ok  " } else { "FAIL" }, s.detail)?;
        }
        writeln!(f, "kripke root {}", self.kripke_value)?;
        match &self.dense {
            Some(v) => writeln!(f, "dense root {v}")?,
            None => writeln!(f, "dense root skipped")?,
        }
        writeln!(f, "--- summary")?;
        writeln!(f, "status={}", self.status())?;
        writeln!(f, "stages_ok={}/{}", self.stages.iter().filter(|s| s.ok).count(), self.stages.len())?;
        writeln!(f, "kripke={}", self.kripke_value)?;
        writeln!(f, "dense={}", self.dense.map_or("none".to_string(), |v| v.value.to_string()))?;
        writeln!(f, "certified={}", self.dense.is_some_and(|v| v.certified))?;
        write!(f, "seed={}", self.seed)
    }
}

fn stage(name: &'static str, ok: bool, detail: impl Into<String>) -> Stage {
    Stage { name, ok, detail: detail.into() }
}

pub fn run_pipeline(s: &Scenario) -> Result<PipelineReport> {
    let started = Instant::now();
    let b = s.bounds;
    let closed = s.closed_frame();
    let target = s.target()?;
    let root = s.skeleton.root().expect("checked on parsing");
    let kripke_value = target.eval(root, &s.formula)?;
    let mut stages = Vec::new();

    // unravelling of the skeleton, and of its closure onto the closed frame
    let mut unr = unravel(&s.skeleton, s.skeleton.len())?;
    let plain = unr.check_projection(&s.skeleton).is_ok();
    if let Some(t) = &s.theory {
        unr.frame = gamma_close(&unr.frame, t);
    }
    let closed_ok = check_pmorphism(&unr.projection, &unr.frame, &closed).is_ok();
    stages.push(stage(
        "unravelling",
        plain && closed_ok,
        format!("paths={} projection={} closed-projection={}", unr.paths.len(), plain, closed_ok),
    ));

    // Γ-closure
    let (gamma_ok, gamma_detail) = match &s.theory {
        None => (true, "no theory".to_string()),
        Some(t) => {
            let holds = t.sentences.iter().all(|x| eval_horn(&closed, x));
            let minimal = closure_minimality_check(&s.skeleton, t).passed();
            let chains = t.chain_lengths()?;
            let axioms = chains.iter().all(|&k| check_axiom_inclusion(&closed, k));
            (
                holds && minimal && axioms,
                format!(
                    "sentences={} added={} holds={} minimal={} axioms={}",
                    t.len(),
                    closed.edge_count() - s.skeleton.edge_count(),
                    holds,
                    minimal,
                    axioms
                ),
            )
        }
    };
    stages.push(stage("gamma-closure", gamma_ok, gamma_detail));

    // (π, ψ) on the truncated frame with D♯ domains
    let ent = s.entanglement()?;
    let psi = build_psi(&ent, &s.domains, b.max_len)?;
    let kk = psi.kk_morphism(&target.frame, s.theory.as_ref())?;
    stages.push(stage(
        "psi",
        kk.is_ok(),
        match &kk {
            Ok(m) => format!("points={} classes={}", m.source.len(), m.source.domains().iter().map(|d| d.len()).sum::<usize>()),
            Err(v) => v.to_string(),
        },
    ));

    // pulled-back model on (F♯, D♯) agrees at the root path
    let pulled = match &kk {
        Ok(m) => {
            let src = PredKripkeModel::new(m.source.clone(), pullback_kk(target.interpretations(), m))?;
            let v = src.eval(0, &s.formula)?;
            stage("kk-pullback", v == kripke_value, format!("root-path={v}"))
        }
        Err(_) => stage("kk-pullback", false, "skipped"),
    };
    stages.push(pulled);

    // f0 onto N(F♯Γ)
    let dense = s.dense_frame()?;
    let f0r = dense.f0_pmorphism_check(b.samples, b.seed)?;
    stages.push(stage(
        "f0",
        f0r.passed(),
        format!("paths={} samples={} failures={}", f0r.paths, f0r.samples, f0r.failures.len()),
    ));

    // ξ: surjective on every short point, locally stable on samples
    let alphas = enumerate_stopwords(&s.skeleton, 3);
    let mut surj_fail = 0;
    for a in &alphas {
        surj_fail += usize::from(!xi_surjectivity_check(&ent, a, b.max_len)?.passed());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
    let mut loc_fail = 0;
    for _ in 0..b.samples {
        let a = alphas.choose(&mut rng).expect("ε is enumerated");
        let g = StopWord::new(
            (0..rng.gen_range(0..=3)).map(|_| rng.gen_bool(0.6).then(|| rng.gen_range(0..b.sigma2))).collect(),
        );
        loc_fail += usize::from(!xi_locality_check(&ent, &dense, a, &g, b.j_max.min(2))?.passed());
    }
    stages.push(stage(
        "xi",
        surj_fail == 0 && loc_fail == 0,
        format!("points={} onto-failures={} local-samples={} local-failures={}", alphas.len(), surj_fail, b.samples, loc_fail),
    ));

    // η = ψ ∘ ξ
    let composite = DenseComposite::new(dense, psi)?;
    let cr = composite.check(b.samples, b.seed, 3)?;
    stages.push(stage(
        "composition",
        cr.passed(),
        format!("samples={} onto={} local={}", cr.samples, cr.surjective, cr.local),
    ));

    let verified = stages.iter().all(|st| st.ok);
    let dense_verdict = if verified {
        let model = DensePredModel::new(composite, target)?;
        Some(model.eval(&StopWord::empty(), &s.formula)?)
    } else {
        None
    };
    Ok(PipelineReport {
        scenario: s.name.clone(),
        formula: s.formula.to_string(),
        seed: b.seed,
        stages,
        kripke_value,
        dense: dense_verdict,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const BARCAN: &str = "\
[frame]
worlds u v
root u
edges u->v
[domains]
domain u = {d}
domain v = {d,e}
[valuation]
val P @ u = {(d)}
val P @ v = {(d)}
[formula]
(forall x. box P(x)) -> box forall x. P(x)
[bounds]
max_len = 2
sigma2 = 2
seed = 3
samples = 20
";

    #[test]
    fn barcan_refutation_is_reproduced() {
        let s = parse_scenario("barcan", BARCAN).unwrap();
        let r = run_pipeline(&s).unwrap();
        assert!(r.reproduced(), "{r}");
        assert!(!r.kripke_value);
        assert_eq!(r.status(), "refutation-reproduced");
        let again = run_pipeline(&s).unwrap();
        assert_eq!(r.to_string(), again.to_string());
        assert!(r.to_string().contains("seed=3"));
    }

    #[test]
    fn scenario_errors() {
        assert!(matches!(parse_scenario("x", "worlds a"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(parse_scenario("x", "[frame]\nworlds a\n[weird]"), Err(Error::Format { line: 3, .. })));
        let cyclic = BARCAN.replace("edges u->v", "edges u->v v->u");
        assert!(matches!(parse_scenario("x", &cyclic), Err(Error::NotTree(_))));
        let bad = BARCAN.replace("seed = 3", "seed = three");
        assert!(matches!(parse_scenario("x", &bad), Err(Error::Format { line: 16, .. })));
        let two = BARCAN.replace("[bounds]", "false\n[bounds]");
        assert!(parse_scenario("x", &two).is_err());
    }
}
