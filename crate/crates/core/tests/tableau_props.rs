mod common;

use common::rng;
use fairctl_core::gen::{prop_names, random_formula, random_model};
use fairctl_core::tableau::{monitor_eventualities, sat_in, unravel, Ambient, UnravelOptions, Unravelling};
use fairctl_core::{Dialect, Formula, TransitionSystem, Valuation};
use proptest::prelude::*;
use rand::Rng;

/// A satisfiable instance of the given dialect, or `None` after 32 draws.
fn instance(seed: u64, dialect: Dialect) -> Option<(TransitionSystem, Formula)> {
    let mut r = rng(seed);
    let props = prop_names(2);
    for _ in 0..32 {
        let ts = random_model(&mut r, dialect, 4, &props);
        let depth = r.gen_range(1..=3);
        let f = random_formula(&mut r, dialect, depth, &props);
        let v = Valuation::from_colouring_with(&ts, &props);
        if sat_in(&f, &mut Ambient::new(&ts, &v)).unwrap().is_some() {
            return Some((ts, f));
        }
    }
    None
}

fn build(ts: &TransitionSystem, f: &Formula, dialect: Dialect, depth: usize) -> Unravelling {
    let v = Valuation::from_colouring_with(ts, prop_names(2));
    let mut amb = Ambient::new(ts, &v);
    let mut opts = UnravelOptions::new(depth, dialect);
    opts.node_budget = 4000;
    opts.check_every_round = true;
    unravel(f, &mut amb, &opts).unwrap()
}

fn dialect(i: u8) -> Dialect {
    [Dialect::Plain, Dialect::Rooted, Dialect::Binary][i as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rounds_stay_well_formed_and_deterministic(seed in any::<u64>(), d in 0u8..3) {
        let Some((ts, f)) = instance(seed, dialect(d)) else { return Ok(()) };
        let a = build(&ts, &f, dialect(d), 5);
        let b = build(&ts, &f, dialect(d), 5);
        prop_assert_eq!(a.trace_json(), b.trace_json());
    }

    #[test]
    fn beta_only_grows_along_branches(seed in any::<u64>(), d in 0u8..3) {
        let Some((ts, f)) = instance(seed, dialect(d)) else { return Ok(()) };
        let u = build(&ts, &f, dialect(d), 5);
        for node in &u.tableau.nodes {
            let Some(p) = node.parent else { continue };
            let parent = &u.tableau.nodes[p];
            prop_assert!(node.beta.len() >= parent.beta.len());
            for (e, pe) in node.beta.iter().zip(&parent.beta) {
                prop_assert_eq!(&e.theta, &pe.theta);
            }
        }
    }

    #[test]
    fn contexts_strengthen_at_the_active_index(seed in any::<u64>(), d in 0u8..3) {
        let Some((ts, f)) = instance(seed, dialect(d)) else { return Ok(()) };
        let u = build(&ts, &f, dialect(d), 5);
        let v = Valuation::from_colouring_with(&ts, prop_names(2));
        let mut amb = Ambient::new(&ts, &v);
        for node in &u.tableau.nodes {
            let Some(p) = node.parent else { continue };
            let parent = &u.tableau.nodes[p];
            let Some(x) = &parent.expansion else { continue };
            let (Some(m), Some(gamma)) = (x.m, &x.gamma) else { continue };
            let (old, new) = (&parent.beta[m].chi_prime, &node.beta[m].chi_prime);
            if old == new {
                continue;
            }
            let old_ext = amb.extension(old).unwrap();
            let new_ext = amb.extension(new).unwrap();
            prop_assert!(new_ext.is_subset(&old_ext));
            prop_assert!(!new_ext.intersects(&amb.extension(gamma).unwrap()));
        }
    }

    #[test]
    fn no_index_stays_active_past_its_bound(seed in any::<u64>(), d in 0u8..3) {
        let Some((ts, f)) = instance(seed, dialect(d)) else { return Ok(()) };
        let u = build(&ts, &f, dialect(d), 6);
        let v = Valuation::from_colouring_with(&ts, prop_names(2));
        let rep = monitor_eventualities(&u, &mut Ambient::new(&ts, &v)).unwrap();
        prop_assert!(rep.ok(), "{:?} {:?} {:?}", rep.bound_violations, rep.type_violations, rep.rho_violations);
    }
}
