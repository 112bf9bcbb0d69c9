mod common;

use common::rng;
use fairctl_core::eval::{eval_qf, NodeSet};
use fairctl_core::gen::{prop_names, random_formula, random_qf_fo, random_rooted_system, random_system};
use fairctl_core::translate::{
    fo_to_mso, mso_eval, qf_to_equation, qf_to_nonbot, standard_translation, FoFormula,
};
use fairctl_core::{eval, Dialect, Formula, Valuation};
use proptest::prelude::*;
use rand::Rng;

fn random_set(r: &mut impl Rng, n: usize) -> NodeSet {
    NodeSet::from_mask(n, r.gen::<u64>() & ((1 << n) - 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn equation_and_nonbot_terms_decide_the_formula(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=5);
        let ts = random_rooted_system(&mut r, n, &[]);
        let vars = prop_names(3);
        let depth = r.gen_range(0..=3);
        let phi = random_qf_fo(&mut r, depth, 2, &vars);
        let mut v = Valuation::new();
        for x in &vars {
            v.insert(x.clone(), random_set(&mut r, n));
        }
        let truth = eval_qf(&phi, &ts, &v).unwrap();
        prop_assert_eq!(truth, eval(&qf_to_equation(&phi).unwrap(), &ts, &v).unwrap().is_full());
        prop_assert_eq!(truth, !eval(&qf_to_nonbot(&phi).unwrap(), &ts, &v).unwrap().is_empty());
    }

    #[test]
    fn standard_translation_agrees_pointwise(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let props = prop_names(2);
        let ts = random_system(&mut r, n, &props);
        let t = if r.gen_bool(0.5) {
            let (a, b) = (random_formula(&mut r, Dialect::Plain, 1, &props), random_formula(&mut r, Dialect::Plain, 1, &props));
            Formula::eu(a, b)
        } else {
            random_formula(&mut r, Dialect::Plain, 3, &props)
        };
        let v = Valuation::from_colouring_with(&ts, &props);
        let ext = eval(&t, &ts, &v).unwrap();
        let st = standard_translation(&t, "v");
        for s in 0..n {
            let mut w = v.clone();
            w.insert("v", NodeSet::singleton(n, s));
            prop_assert_eq!(mso_eval(&st, &ts, &w).unwrap(), ext.contains(s), "{} at {}", t, s);
        }
    }

    #[test]
    fn fo_translation_keeps_quantifiers_and_free_variables(seed in any::<u64>()) {
        let mut r = rng(seed);
        let vars = prop_names(3);
        let depth = r.gen_range(0..=2);
        let mut phi = random_qf_fo(&mut r, depth, 2, &vars);
        let chosen: Vec<&String> = vars.iter().filter(|_| r.gen_bool(0.5)).collect();
        for x in chosen {
            phi = if r.gen_bool(0.5) { FoFormula::forall(x.clone(), phi) } else { FoFormula::exists(x.clone(), phi) };
        }
        let m = fo_to_mso(&phi);
        prop_assert_eq!(m.free_vars(), phi.free_vars());
        let fo_bound = m.bound_names().into_iter().filter(|(_, x)| vars.contains(x)).count();
        prop_assert_eq!(fo_bound, phi.quantifier_count());
    }
}
