mod common;

use common::{prefix_truth, rng};
use fairctl_core::eval::{
    brute_force_af, brute_force_ar, brute_force_eg, brute_force_eu, gfp, lfp, ComplexAlgebra, CtlAlgebra,
};
use fairctl_core::gen::{prop_names, random_formula, random_rooted_system, random_system};
use fairctl_core::kripke::{omega_expand_to_depth, unravel_to_depth};
use fairctl_core::{eval, Dialect, Formula, NodeSet, Valuation};
use proptest::prelude::*;
use rand::Rng;

fn set(n: usize, mask: u64) -> NodeSet {
    NodeSet::from_mask(n, mask & ((1 << n) - 1))
}

fn with_sets(ts: &fairctl_core::TransitionSystem, a: &NodeSet, b: &NodeSet) -> Valuation {
    let mut v = Valuation::new();
    v.insert("a", a.clone());
    v.insert("b", b.clone());
    let _ = ts;
    v
}

fn ab() -> (Formula, Formula) {
    (Formula::var("a"), Formula::var("b"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fixpoints_match_path_oracles(seed in any::<u64>(), n in 1usize..=6, ma in any::<u64>(), mb in any::<u64>()) {
        let ts = random_system(&mut rng(seed), n, &[]);
        let (a, b) = (set(n, ma), set(n, mb));
        let v = with_sets(&ts, &a, &b);
        let (fa, fb) = ab();
        prop_assert_eq!(eval(&Formula::eu(fa.clone(), fb.clone()), &ts, &v).unwrap(), brute_force_eu(&ts, &a, &b).unwrap());
        prop_assert_eq!(eval(&Formula::eg(fa.clone(), fb.clone()), &ts, &v).unwrap(), brute_force_eg(&ts, &a, &b).unwrap());
        prop_assert_eq!(eval(&Formula::ar(fa.clone(), fb.clone()), &ts, &v).unwrap(), brute_force_ar(&ts, &a, &b).unwrap());
        prop_assert_eq!(eval(&Formula::af(fa, fb), &ts, &v).unwrap(), brute_force_af(&ts, &a, &b).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn operators_are_monotone(seed in any::<u64>(), n in 1usize..=6, m in any::<[u64; 4]>()) {
        let ts = random_system(&mut rng(seed), n, &[]);
        let alg = ComplexAlgebra::new(&ts);
        let (a, b) = (set(n, m[0]), set(n, m[1]));
        let (a2, b2) = (a.union(&set(n, m[2])), b.union(&set(n, m[3])));
        prop_assert!(alg.eu(&a, &b).is_subset(&alg.eu(&a2, &b2)));
        prop_assert!(alg.eg(&a, &b).is_subset(&alg.eg(&a2, &b2)));
        prop_assert!(alg.ar(&a, &b).is_subset(&alg.ar(&a2, &b2)));
        prop_assert!(alg.af(&a, &b).is_subset(&alg.af(&a2, &b2)));
    }

    #[test]
    fn duals_are_complements(seed in any::<u64>(), n in 1usize..=6, ma in any::<u64>(), mb in any::<u64>()) {
        let ts = random_system(&mut rng(seed), n, &[]);
        let (a, b) = (set(n, ma), set(n, mb));
        let v = with_sets(&ts, &a, &b);
        let (fa, fb) = ab();
        let (na, nb) = (Formula::neg(fa.clone()), Formula::neg(fb.clone()));
        prop_assert_eq!(
            eval(&Formula::ar(fa.clone(), fb.clone()), &ts, &v).unwrap(),
            eval(&Formula::eu(na.clone(), nb.clone()), &ts, &v).unwrap().complement()
        );
        prop_assert_eq!(
            eval(&Formula::af(fa, fb), &ts, &v).unwrap(),
            eval(&Formula::eg(na, nb), &ts, &v).unwrap().complement()
        );
    }

    #[test]
    fn kleene_chains_are_short(seed in any::<u64>(), n in 1usize..=8, ma in any::<u64>(), mb in any::<u64>()) {
        let ts = random_system(&mut rng(seed), n, &[]);
        let alg = ComplexAlgebra::new(&ts);
        let (a, b) = (set(n, ma), set(n, mb));
        let eu = lfp(n, |x| a.union(&b.intersection(&alg.dia(x))));
        prop_assert!(eu.rounds <= n + 1);
        let eg = gfp(n, |y| a.intersection(&alg.dia(&alg.eu(&b.intersection(y), &a))));
        prop_assert!(eg.rounds <= n + 1);
    }

    #[test]
    fn unravelling_prefix_agrees_on_decided_formulas(seed in any::<u64>(), depth in 1usize..4) {
        let mut r = rng(seed);
        let props = prop_names(2);
        let n = r.gen_range(2..=5);
        let ts = random_rooted_system(&mut r, n, &props);
        let f = random_formula(&mut r, Dialect::Plain, 3, &props);
        let v = Valuation::from_colouring_with(&ts, &props);
        let ext = eval(&f, &ts, &v).unwrap();
        let tree = unravel_to_depth(&ts, depth).unwrap();
        for (i, node) in tree.nodes.iter().enumerate() {
            if let Some(b) = prefix_truth(&f, &tree, &ts, i) {
                prop_assert_eq!(b, ext.contains(node.state), "{} at node {}", f, i);
            }
        }
    }

    #[test]
    fn omega_expansion_is_bisimilar(seed in any::<u64>(), w in 1usize..3) {
        let mut r = rng(seed);
        let props = prop_names(2);
        let n = r.gen_range(2..=4);
        let ts = random_rooted_system(&mut r, n, &props);
        let f = random_formula(&mut r, Dialect::Plain, 3, &props);
        let v = Valuation::from_colouring_with(&ts, &props);
        let ext = eval(&f, &ts, &v).unwrap();
        let tree = omega_expand_to_depth(&ts, 3, w).unwrap();
        for (i, node) in tree.nodes.iter().enumerate() {
            if let Some(b) = prefix_truth(&f, &tree, &ts, i) {
                prop_assert_eq!(b, ext.contains(node.state), "{} at node {}", f, i);
            }
        }
    }
}
