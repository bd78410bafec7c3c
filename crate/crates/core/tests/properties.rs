use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mlwb::dense::{enumerate_stopwords, f0, validate_stopword};
use mlwb::entangle::{equiv, gamma_of, t, xi, EntangledWord, Entanglement, Sym};
use mlwb::gen::{random_pred, random_prop, random_rooted_frame};
use mlwb::horn::{axiom_to_horn, closure_minimality_check, gamma_close, HornTheory};
use mlwb::kripke::{unravel, KripkeFrame, KripkeModel};
use mlwb::neighbourhood::{nf_from_kripke, NModel};
use mlwb::semantics::Valuation;
use mlwb::syntax::{parse_pred, parse_prop};

fn frame(max_n: usize) -> impl Strategy<Value = KripkeFrame> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            KripkeFrame::from_edges(n, (0..n * n).filter(|&i| bits[i]).map(|i| (i / n, i % n)))
        })
    })
}

fn theory(ks: &[usize]) -> HornTheory {
    HornTheory::new(ks.iter().filter_map(|&k| axiom_to_horn(k)).collect())
}

fn theory_strategy() -> impl Strategy<Value = HornTheory> {
    proptest::sample::subsequence(vec![0usize, 2, 3], 0..=3).prop_map(|ks| theory(&ks))
}

fn letters() -> Vec<String> {
    vec!["p".into(), "q".into()]
}

fn random_valuation(rng: &mut ChaCha8Rng, n: usize) -> Valuation {
    letters().into_iter().map(|l| (l, (0..n).filter(|_| rng.gen_bool(0.5)).collect())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn prop_formulas_round_trip(seed in any::<u64>(), depth in 0usize..4) {
        let f = random_prop(&mut ChaCha8Rng::seed_from_u64(seed), &letters(), depth);
        prop_assert_eq!(parse_prop(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn pred_formulas_round_trip(seed in any::<u64>(), depth in 0usize..3) {
        let f = random_pred(&mut ChaCha8Rng::seed_from_u64(seed), depth);
        prop_assert_eq!(parse_pred(&f.to_string()).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closure_is_extensive_idempotent_and_satisfies_the_theory(f in frame(5), th in theory_strategy()) {
        let c = gamma_close(&f, &th);
        prop_assert!(f.edge_set().is_subset(&c.edge_set()));
        prop_assert_eq!(gamma_close(&c, &th).edge_set(), c.edge_set());
        prop_assert!(th.holds_on(&c));
        prop_assert!(closure_minimality_check(&f, &th).passed());
    }

    #[test]
    fn closure_is_monotone(f in frame(5), extra in proptest::collection::vec((0usize..5, 0usize..5), 0..4), th in theory_strategy()) {
        let n = f.len();
        let bigger = f.with_edges(f.edges().chain(extra.into_iter().filter(|&(a, b)| a < n && b < n)));
        prop_assert!(gamma_close(&f, &th).edge_set().is_subset(&gamma_close(&bigger, &th).edge_set()));
    }

    #[test]
    fn kripke_and_neighbourhood_semantics_agree(f in frame(4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let val = random_valuation(&mut rng, f.len());
        let a = random_prop(&mut rng, &letters(), 3);
        let k = KripkeModel::new(f.clone(), val.clone()).unwrap();
        let n = NModel::new(nf_from_kripke(&f), val).unwrap();
        for w in f.worlds() {
            prop_assert_eq!(k.eval(w, &a).unwrap(), n.eval(w, &a).unwrap());
        }
    }

    #[test]
    fn unravelling_projects_onto_the_frame(seed in any::<u64>(), n in 1usize..5, extra in 0usize..2) {
        // every world is reachable within `n` steps of the root
        let f = random_rooted_frame(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.4);
        let u = unravel(&f, n + extra).unwrap();
        prop_assert!(u.check_projection(&f).is_ok());
        prop_assert!(u.frame.is_tree());
    }

    #[test]
    fn enumerated_stopwords_are_valid(seed in any::<u64>(), n in 1usize..4) {
        let f = random_rooted_frame(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.5);
        for a in enumerate_stopwords(&f, 4) {
            prop_assert!(validate_stopword(a.letters(), &f));
            prop_assert!(f0(&a, &f).is_ok());
        }
    }

    #[test]
    fn canonical_forms_are_idempotent_and_equivalent(seed in any::<u64>(), n in 1usize..4, sigma in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = Entanglement::with_domain_alphabet(random_rooted_frame(&mut rng, n, 0.5), sigma).unwrap();
        let words = e.enumerate(4);
        for _ in 0..20 {
            let x = &words[rng.gen_range(0..words.len())];
            let c = x.canonicalize();
            prop_assert_eq!(c.canonicalize(), c.clone());
            prop_assert!(equiv(x, &c));
            prop_assert!(e.is_entangled(&c));
        }
    }

    #[test]
    fn t_inverts_h_on_entangled_words(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = Entanglement::with_domain_alphabet(random_rooted_frame(&mut rng, n, 0.5), 3).unwrap();
        let alphas = enumerate_stopwords(&e.left, 4);
        let alpha = &alphas[rng.gen_range(0..alphas.len())];
        let mut y = EntangledWord::empty();
        for w in alpha.dropped() {
            for _ in 0..rng.gen_range(0..3) {
                y.push(Sym::D(rng.gen_range(0..3)));
            }
            y.push(Sym::W(w));
        }
        let a = t(alpha, &y).unwrap();
        prop_assert_eq!(a.iter().flatten().copied().collect::<Vec<Sym>>(), y.0.clone());
        prop_assert_eq!(xi(alpha, &gamma_of(&a)), y.canonicalize());
    }

    #[test]
    fn sharp_domains_expand_along_edges(seed in any::<u64>(), n in 1usize..4) {
        let e = Entanglement::with_domain_alphabet(random_rooted_frame(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.5), 2).unwrap();
        let u = unravel(&e.left, 3).unwrap();
        for (a, b) in u.frame.edges() {
            prop_assert!(e.domain_monotonicity_check(&u.paths[a], &u.paths[b], 2).unwrap().included());
        }
        let root: BTreeSet<_> = e.dsharp(&u.paths[0], 2).unwrap();
        prop_assert!(!root.is_empty());
    }
}
