mod common;

use common::rng;
use fairctl_core::automata::{
    acc_holds_everywhere, accepts_regular, check_run_prefix, compile_acc, compile_acc_binary, product_system,
    search_labellings, strategy_run_prefix, Automaton, LabellingSearch,
};
use fairctl_core::gen::{prop_names, random_binary_system, random_parity_automaton};
use fairctl_core::Dialect;
use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeSet;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn acc_term_mentions_exactly_props_and_states(seed in any::<u64>()) {
        let mut r = rng(seed);
        let props = prop_names(r.gen_range(1..=2));
        let q = r.gen_range(1..=3);
        let aut = random_parity_automaton(&mut r, q, 3, &props);
        let acc = compile_acc(&Automaton::Parity(aut.clone()));
        prop_assert!(acc.dialect() >= Dialect::Rooted && Dialect::Binary.allows(acc.dialect()));
        let want: BTreeSet<String> = props.iter().chain(&aut.states).cloned().collect();
        prop_assert!(acc.vars().is_subset(&want));
        if !aut.delta.is_empty() {
            prop_assert_eq!(acc.vars(), want);
        }
    }

    #[test]
    fn acceptance_agrees_with_labelling_search(seed in any::<u64>()) {
        let mut r = rng(seed);
        let props = prop_names(r.gen_range(1..=2));
        let n = r.gen_range(1..=3);
        let q = r.gen_range(1..=(6 / n).min(3));
        let aut = random_parity_automaton(&mut r, q, 3, &props);
        let gen = random_binary_system(&mut r, n, &props, false);
        let acc = accepts_regular(&aut, &gen).unwrap();
        let search = search_labellings(&aut, &gen, 1 << 20).unwrap();
        if acc.accepted {
            let p = product_system(&aut, &gen, &acc.strategy).unwrap();
            prop_assert!(acc_holds_everywhere(&aut, &compile_acc_binary(&aut), &p));
            let found = matches!(search, LabellingSearch::Found { .. });
            prop_assert!(found, "{:?}", search);
        } else {
            let none = matches!(search, LabellingSearch::NoneFound { .. });
            prop_assert!(none, "{:?}", search);
        }
    }

    #[test]
    fn strategy_prefixes_pass_the_run_check(seed in any::<u64>(), d in 1usize..5) {
        let mut r = rng(seed);
        let props = prop_names(r.gen_range(1..=2));
        let n = r.gen_range(1..=3);
        let q = r.gen_range(1..=3);
        let aut = random_parity_automaton(&mut r, q, 3, &props);
        let gen = random_binary_system(&mut r, n, &props, false);
        let acc = accepts_regular(&aut, &gen).unwrap();
        if !acc.accepted {
            return Ok(());
        }
        let (tree, run, lassos) = strategy_run_prefix(&aut, &gen, &acc.strategy, d).unwrap();
        let wrapped = Automaton::Parity(aut.clone());
        let rep = check_run_prefix(&wrapped, &gen, &tree, &run, &lassos).unwrap();
        prop_assert!(rep.ok(), "{:?}", rep);
        if aut.states.len() > 1 {
            let mut bad = run.clone();
            bad[0] = (aut.init + 1) % aut.states.len();
            let rep = check_run_prefix(&wrapped, &gen, &tree, &bad, &lassos).unwrap();
            prop_assert!(!rep.ok());
        }
    }
}
