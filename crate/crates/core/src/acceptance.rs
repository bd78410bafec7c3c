//! The acceptance suite: one check per criterion, each reporting pass/fail
//! with a short detail line. Shared by `mlwb selftest` and the `acceptance`
//! test target.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{
    counterexample_g, enumerate_raw, enumerate_stopwords, parse_raw, validate_stopword, DenseBounds, DenseFrame,
    Letter, StopWord,
};
use crate::entangle::{gamma_of, h, show_mixed, t, xi, EntangledWord, Entanglement};
use crate::error::Result;
use crate::gen::{
    depth2_formulas, random_frame, random_kk_morphism, random_nk_morphism, random_pmorphism, random_rooted_frame,
    small_frames,
};
use crate::horn::{axiom_to_horn, gamma_close, HornTheory};
use crate::kripke::{
    brute_validity, check_axiom_inclusion, check_pretransitive, truth_preservation_test, KripkeFrame, World,
    DEFAULT_VALIDITY_BUDGET,
};
use crate::neighbourhood::{n_truth_preservation_test, nf_from_kripke, NMorphism};
use crate::pipeline::{parse_scenario, run_pipeline, Scenario};
use crate::predicate::{
    barcan_constant_domain_sweep, barcan_counter_witness, expanding_domain_sweep, formula_pool,
    kk_truth_preservation_test, nk_truth_preservation_test, random_interpretation,
};
use crate::semantics::{all_valuations, FormulaBank};
use crate::syntax::{barcan, converse_barcan, parse_horn, pretransitivity_axiom, ptc_axiom};

/// Bundled scenario files, by name.
pub const SCENARIOS: [(&str, &str); 4] = [
    ("barcan_chain", include_str!("../scenarios/barcan_chain.scn")),
    ("transitive_chain", include_str!("../scenarios/transitive_chain.scn")),
    ("fork_exists", include_str!("../scenarios/fork_exists.scn")),
    ("one_world", include_str!("../scenarios/one_world.scn")),
];

#[derive(Debug, Clone)]
pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} [{}] {}: {} ({} ms)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_millis()
        )
    }
}

pub const TITLES: [&str; 11] = [
    "dense counterexample",
    "worked-example vectors",
    "paths-with-stops vectors",
    "Horn closure oracle",
    "axiom/relation equivalences",
    "truth preservation",
    "logic agreement N(F) vs F",
    "density and image lemmas",
    "canonicalization oracle",
    "Barcan behaviour",
    "end-to-end pipeline",
];

/// Runs criterion `id` (1-based).
pub fn run(id: usize) -> Criterion {
    let started = Instant::now();
    let outcome = match id {
        1 => dense_counterexample(20),
        2 => worked_vectors(),
        3 => stopword_vectors(),
        4 => horn_closure_oracle(1000),
        5 => axiom_equivalences(),
        6 => truth_preservation(1000),
        7 => logic_agreement(),
        8 => density_and_image(100),
        9 => canonicalization(6),
        10 => barcan_behaviour(),
        11 => end_to_end(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let elapsed = started.elapsed();
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Criterion { id, title: TITLES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown"), passed, detail, elapsed }
}

pub fn run_all() -> Vec<Criterion> {
    (1..=TITLES.len()).map(run).collect()
}

type Outcome = Result<(bool, String)>;

pub fn dense_counterexample(k_max: usize) -> Outcome {
    let started = Instant::now();
    let r = counterexample_g(k_max)?;
    let elapsed = started.elapsed();
    let pattern = r.rows.iter().all(|row| {
        let a = StopWord::zeros_then(row.k, 1);
        let b = StopWord::zeros_then(row.k + 1, 1);
        (row.p_witness == a && row.not_p_witness == b) || (row.p_witness == b && row.not_p_witness == a)
    });
    let ok = r.passed() && pattern && r.rows.len() == k_max + 1 && elapsed < Duration::from_secs(5);
    Ok((
        ok,
        format!(
            "both diamonds {}, implication {}, {} witness rows, G validates: {}",
            r.both_diamonds,
            r.implication,
            r.rows.len(),
            r.kripke_valid
        ),
    ))
}

/// Letters joined without separators, as in the written vectors.
fn compact(s: &str) -> String {
    s.replace('.', "")
}

pub fn worked_vectors() -> Outcome {
    let f = KripkeFrame::named(&["r", "a", "b", "c"], &[("r", "a"), ("a", "b"), ("b", "c")])?.with_root(0)?;
    let e = Entanglement::with_domain_alphabet(f, 4)?;
    let h_got = compact(&e.show(&h(&e.parse_alpha("a.0.b.0.0.c")?, &e.parse_gamma("1.0.3.4")?)));
    let t_word = t(&e.parse_alpha("a.b.0.0.c")?, &e.parse("a.1.2.b.c.3")?)?;
    let t_got = format!("{}0^ω", compact(&show_mixed(&e, &t_word)));
    let xi_got = compact(&e.show_class(&xi(&e.parse_alpha("a.b.0.0.c")?, &e.parse_gamma("0.1.2.0.0.0.3.0")?)));
    let checks = [("h", h_got, "1a34bc"), ("t", t_got, "a12b00c30^ω"), ("xi", xi_got, "[a12bc3]")];
    let failed: Vec<String> =
        checks.iter().filter(|(_, got, want)| got != want).map(|(n, got, want)| format!("{n}: {got} != {want}")).collect();
    let detail = if failed.is_empty() {
        checks.iter().map(|(n, got, _)| format!("{n}={got}")).collect::<Vec<_>>().join(", ")
    } else {
        let gamma = compact(&e.show_gamma(&gamma_of(&t_word)));
        format!("{} (t yields the stop pattern {gamma}·0^ω)", failed.join("; "))
    };
    Ok((failed.is_empty(), detail))
}

pub fn stopword_vectors() -> Outcome {
    let f = KripkeFrame::named(&["a0", "b"], &[("a0", "b")])?.with_root(0)?;
    let got: BTreeSet<Vec<Letter>> = enumerate_raw(&f, 5).into_iter().collect();
    let mut want = BTreeSet::new();
    for len in 0..=5 {
        want.insert(vec![None; len]);
        for k in 0..len {
            let mut w = vec![None; len];
            w[k] = Some(1);
            want.insert(w);
        }
    }
    let cycle = KripkeFrame::named(&["a0", "b"], &[("a0", "b"), ("b", "a0")])?.with_root(0)?;
    let accepted = validate_stopword(&parse_raw("b.a0.b.a0", &cycle)?, &cycle);
    let rejected = !validate_stopword(&parse_raw("a0", &cycle)?, &cycle);
    let ok = got == want && accepted && rejected;
    Ok((ok, format!("{} words enumerated, expected {}; b.a0.b.a0 accepted: {accepted}; a0 rejected: {rejected}", got.len(), want.len())))
}

/// Iterated squaring `R := R ∪ R∘R` to a fixpoint.
fn squaring_closure(frame: &KripkeFrame, reflexive: bool) -> BTreeSet<(World, World)> {
    let mut r = frame.edge_set();
    if reflexive {
        r.extend(frame.worlds().map(|w| (w, w)));
    }
    loop {
        let sq: BTreeSet<(World, World)> =
            r.iter().flat_map(|&(a, b)| r.iter().filter(move |&&(c, _)| c == b).map(move |&(_, d)| (a, d))).collect();
        let before = r.len();
        r.extend(sq);
        if r.len() == before {
            return r;
        }
    }
}

pub fn horn_closure_oracle(frames: usize) -> Outcome {
    let started = Instant::now();
    let trans = HornTheory::new(vec![axiom_to_horn(2).expect("k = 2 has a Horn form")]);
    let refl_trans = trans.clone().with(parse_horn("true => x R x").expect("valid sentence"));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..frames {
        let n = rng.gen_range(1..=6);
        let density = rng.gen_range(0.05..0.5);
        let f = random_frame(&mut rng, n, density);
        if gamma_close(&f, &trans).edge_set() != squaring_closure(&f, false) {
            mismatches += 1;
        }
        if gamma_close(&f, &refl_trans).edge_set() != squaring_closure(&f, true) {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    Ok((
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!("{frames} frames, {mismatches} mismatches, {} ms", elapsed.as_millis()),
    ))
}

pub fn axiom_equivalences() -> Outcome {
    let frames = small_frames(4);
    let mut checked = 0;
    let mut mismatches = 0;
    for f in &frames {
        for k in 0..=3 {
            checked += 1;
            mismatches += usize::from(check_axiom_inclusion(f, k) != brute_validity(f, &ptc_axiom(k), DEFAULT_VALIDITY_BUDGET)?);
        }
        for k in 0..=2 {
            checked += 1;
            mismatches += usize::from(
                check_pretransitive(f, k) != brute_validity(f, &pretransitivity_axiom(k), DEFAULT_VALIDITY_BUDGET)?,
            );
        }
    }
    Ok((mismatches == 0, format!("{} frames, {checked} comparisons, {mismatches} mismatches", frames.len())))
}

/// `samples` cases per morphism kind, 20 per random morphism, plus dense-side
/// samples on the bundled scenarios where only certified verdicts count.
pub fn truth_preservation(samples: usize) -> Outcome {
    let per = 20;
    let instances = samples.div_ceil(per);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut totals = [(0usize, 0usize); 4];
    for i in 0..instances {
        let seed = rng.gen();
        let n = rng.gen_range(1..=3);
        let target = random_rooted_frame(&mut rng, n, 0.4);
        let m = random_pmorphism(&mut rng, &target);
        let r = truth_preservation_test(&m, per, seed)?;
        totals[0].0 += r.samples;
        totals[0].1 += r.agreed;
        let nm = NMorphism::from_kripke(&m).map_err(|v| crate::error::Error::Precondition(v.to_string()))?;
        let r = n_truth_preservation_test(&nm, per, seed)?;
        totals[1].0 += r.samples;
        totals[1].1 += r.agreed;
        let kk = random_kk_morphism(&mut rng, n);
        let r = kk_truth_preservation_test(&kk, per, seed ^ i as u64)?;
        totals[2].0 += r.samples;
        totals[2].1 += r.agreed;
        let nk = random_nk_morphism(&mut rng, n);
        let r = nk_truth_preservation_test(&nk, per, seed ^ i as u64)?;
        totals[3].0 += r.samples;
        totals[3].1 += r.agreed;
    }
    let (dense_samples, dense_certified, dense_agreed) = dense_preservation(100, 8)?;
    let ok = totals.iter().all(|&(s, a)| s >= samples && s == a) && dense_certified == dense_agreed && dense_certified > 0;
    let names = ["kripke", "nframe", "kk", "nk"];
    let mut detail: Vec<String> = names.iter().zip(&totals).map(|(n, (s, a))| format!("{n} {a}/{s}")).collect();
    detail.push(format!("dense {dense_agreed}/{dense_certified} certified of {dense_samples}"));
    Ok((ok, detail.join(", ")))
}

/// Random interpretations, points and closed formulas on the refuting
/// scenarios: certified dense verdicts against the Kripke side.
pub fn dense_preservation(samples: usize, seed: u64) -> Result<(usize, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = formula_pool(&mut rng, 0);
    let models = SCENARIOS[..3]
        .iter()
        .map(|(name, text)| {
            let mut s = parse_scenario(name, text)?;
            s.interpretations = s.domains.iter().map(|d| random_interpretation(&mut rng, d)).collect();
            s.dense_model()
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut certified, mut agreed) = (0, 0);
    for _ in 0..samples {
        let model = models.choose(&mut rng).expect("nonempty");
        let alphas = enumerate_stopwords(&model.composite.dense.base, 2);
        let alpha = alphas.choose(&mut rng).expect("ε is enumerated");
        let a = pool.choose(&mut rng).expect("nonempty");
        let v = model.eval(alpha, a)?;
        if v.certified {
            certified += 1;
            let u = model.composite.point(alpha)?;
            agreed += usize::from(v.value == model.target.eval(u, a)?);
        }
    }
    Ok((samples, certified, agreed))
}

pub fn logic_agreement() -> Outcome {
    let formulas = depth2_formulas();
    let bank = FormulaBank::new(&formulas);
    let letters = vec!["p".to_string(), "q".to_string()];
    let frames = small_frames(4);
    let mut models = 0usize;
    let mut mismatches = 0usize;
    for f in &frames {
        let nf = nf_from_kripke(f);
        for val in all_valuations(f.len(), &letters) {
            models += 1;
            if bank.evaluate(f, &val)? != bank.evaluate(&nf, &val)? {
                mismatches += 1;
            }
        }
    }
    Ok((
        mismatches == 0,
        format!("{} frames, {models} models, {} formulas, {mismatches} disagreeing models", frames.len(), formulas.len()),
    ))
}

pub fn density_and_image(instances: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut members, mut density_fail, mut image_fail, mut anti_checked, mut anti_fail) = (0, 0, 0, 0, 0);
    for _ in 0..instances {
        let n_worlds = rng.gen_range(2..=4);
        let f = random_rooted_frame(&mut rng, n_worlds, 0.4);
        let dense = DenseFrame::new(f.clone(), DenseBounds { k_max: 6, j_max: 2, depth: 3 })?;
        let alphas = enumerate_stopwords(&f, 3);
        let alpha = alphas.choose(&mut rng).expect("ε is enumerated");
        let n = rng.gen_range(0..=4);
        for beta in dense.uk_members(alpha, n, 2)? {
            members += 1;
            density_fail += usize::from(dense.density_witness(alpha, n, &beta).is_err());
        }
        image_fail += usize::from(!dense.f0_image_check(alpha, n, 2)?.passed());
        for k in 0..=4 {
            for beta in dense.uk_members(alpha, k + 1, 2)? {
                anti_checked += 1;
                anti_fail += usize::from(!dense.is_member_uk(&beta, alpha, k)?);
            }
        }
    }
    Ok((
        density_fail == 0 && image_fail == 0 && anti_fail == 0,
        format!(
            "{instances} instances: density {}/{members}, image {}/{instances}, antitone {}/{anti_checked}",
            members - density_fail,
            instances - image_fail,
            anti_checked - anti_fail
        ),
    ))
}

/// `x ∼ y` by searching every split `x = t·c`, `y = t·d` with `t` entangled
/// and `c`, `d` made of path letters.
fn oracle_equiv(e: &Entanglement, x: &EntangledWord, y: &EntangledWord) -> bool {
    let (xs, ys) = (x.letters(), y.letters());
    (0..=xs.len().min(ys.len())).any(|i| {
        xs[..i] == ys[..i]
            && xs[i..].iter().all(|s| s.is_w())
            && ys[i..].iter().all(|s| s.is_w())
            && e.is_entangled(&EntangledWord(xs[..i].to_vec()))
    })
}

pub fn canonicalization(max_len: usize) -> Outcome {
    let w = KripkeFrame::total(["a", "b"])?.with_root(0)?;
    let e = Entanglement::with_domain_alphabet(w, 2)?;
    let words = e.enumerate(max_len);
    let canon: Vec<EntangledWord> = words.iter().map(EntangledWord::canonicalize).collect();
    let mut mismatches = 0usize;
    for (i, x) in words.iter().enumerate() {
        for (j, y) in words.iter().enumerate() {
            if (canon[i] == canon[j]) != oracle_equiv(&e, x, y) {
                mismatches += 1;
            }
        }
    }
    let pairs = words.len() * words.len();
    Ok((mismatches == 0, format!("{} words, {pairs} pairs, {mismatches} disagreements", words.len())))
}

pub fn barcan_behaviour() -> Outcome {
    let constant = barcan_constant_domain_sweep(3, 2)?;
    let witness = barcan_counter_witness();
    let root = witness.frame.frame.root().expect("rooted witness");
    let refuted = !witness.eval(root, &barcan())?;
    let converse = expanding_domain_sweep(&converse_barcan(), 3, 2)?;
    Ok((
        constant.passed() && refuted && converse.passed(),
        format!(
            "Barcan valid on {}/{} constant-domain n-frames, refuted on the expanding chain: {refuted}, converse valid on {}/{} expanding instances",
            constant.instances - constant.failures.len(),
            constant.instances,
            converse.instances - converse.failures.len(),
            converse.instances
        ),
    ))
}

pub fn end_to_end() -> Outcome {
    let started = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut transitive = false;
    for (name, text) in SCENARIOS {
        let s: Scenario = parse_scenario(name, text)?;
        let r = run_pipeline(&s)?;
        let again = run_pipeline(&s)?;
        let deterministic = r.to_string() == again.to_string();
        transitive |= s.theory.is_some() && r.reproduced();
        ok &= r.reproduced() && deterministic;
        lines.push(format!("{name}={}{}", r.status(), if deterministic { "" } else { " (nondeterministic)" }));
    }
    let elapsed = started.elapsed();
    let refutations = lines.iter().filter(|l| l.ends_with("refutation-reproduced")).count();
    ok &= transitive && refutations >= 3 && elapsed < Duration::from_secs(60);
    Ok((ok, format!("{}, {} ms", lines.join(", "), elapsed.as_millis())))
}
