//! Seeded random instances: systems, formulas, first-order formulas and
//! parity tree automata.
//!
//! Every generator draws only from the `Rng` it is given, so a fixed
//! ChaCha8 stream reproduces the same instance on every platform.

use crate::automata::{ParityTreeAutomaton, Transition};
use crate::formula::{Dialect, Formula};
use crate::kripke::TransitionSystem;
use crate::translate::FoFormula;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

/// The proposition names `p`, `q`, `r`, `s`, … truncated to `k`.
pub fn prop_names(k: usize) -> Vec<String> {
    const NAMES: [&str; 6] = ["p", "q", "r", "s", "t", "u"];
    NAMES.iter().take(k).map(|s| s.to_string()).collect()
}

pub fn random_colouring(rng: &mut impl Rng, n: usize, props: &[String]) -> Vec<BTreeSet<String>> {
    (0..n)
        .map(|_| props.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect())
        .collect()
}

/// A serial system without a root; each state gets one to three successors.
pub fn random_system(rng: &mut impl Rng, n: usize, props: &[String]) -> TransitionSystem {
    assert!(n > 0);
    let mut edges = Vec::new();
    for s in 0..n {
        let k = rng.gen_range(1..=3.min(n));
        for _ in 0..k {
            edges.push((s, rng.gen_range(0..n)));
        }
    }
    TransitionSystem::new(n, edges, random_colouring(rng, n, props), None).expect("serial by construction")
}

/// A serial system rooted at state 0 that no edge enters; `n ≥ 2`.
pub fn random_rooted_system(rng: &mut impl Rng, n: usize, props: &[String]) -> TransitionSystem {
    assert!(n >= 2);
    let mut edges = Vec::new();
    for s in 1..n {
        edges.push((rng.gen_range(0..s), s));
    }
    for s in 0..n {
        let k = rng.gen_range(0..=2);
        for _ in 0..k {
            edges.push((s, rng.gen_range(1..n)));
        }
        if !edges.iter().any(|&(a, _)| a == s) {
            edges.push((s, rng.gen_range(1..n)));
        }
    }
    TransitionSystem::new(n, edges, random_colouring(rng, n, props), Some(0)).expect("reachable by construction")
}

/// A binary system rooted at 0 in which every state is reachable. With
/// `proper_root` no successor map returns to 0, which needs `n ≥ 2`.
pub fn random_binary_system(rng: &mut impl Rng, n: usize, props: &[String], proper_root: bool) -> TransitionSystem {
    assert!(n > usize::from(proper_root));
    let mut maps: [Vec<Option<usize>>; 2] = [vec![None; n], vec![None; n]];
    for s in 1..n {
        let free: Vec<(usize, usize)> = (0..s)
            .flat_map(|a| [(0, a), (1, a)])
            .filter(|&(d, a)| maps[d][a].is_none())
            .collect();
        let &(d, a) = free.choose(rng).expect("a tree on s nodes leaves a free slot");
        maps[d][a] = Some(s);
    }
    let lo = usize::from(proper_root);
    let [f0, f1] = maps.map(|m| m.into_iter().map(|t| t.unwrap_or_else(|| rng.gen_range(lo..n))).collect::<Vec<_>>());
    TransitionSystem::binary(f0, f1, random_colouring(rng, n, props), Some(0)).expect("reachable by construction")
}

/// A random system whose shape suits `dialect`: no root for plain, a
/// proper root for rooted, binary with a proper root otherwise.
pub fn random_model(rng: &mut impl Rng, dialect: Dialect, max_states: usize, props: &[String]) -> TransitionSystem {
    match dialect {
        Dialect::Plain => {
            let n = rng.gen_range(1..=max_states);
            random_system(rng, n, props)
        }
        Dialect::Rooted => {
            let n = rng.gen_range(2..=max_states.max(2));
            random_rooted_system(rng, n, props)
        }
        Dialect::Binary => {
            let n = rng.gen_range(2..=max_states.max(2));
            random_binary_system(rng, n, props, true)
        }
    }
}

/// A random formula of depth at most `depth` over `props` using every
/// operator of `dialect`, including the ternary `EU` and `AF`.
pub fn random_formula(rng: &mut impl Rng, dialect: Dialect, depth: usize, props: &[String]) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return random_atom(rng, dialect, props);
    }
    let d = depth - 1;
    let sub = |rng: &mut _| random_formula(rng, dialect, d, props);
    let ops = match dialect {
        Dialect::Binary => 14,
        _ => 12,
    };
    match rng.gen_range(0..ops) {
        0 => Formula::neg(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::dia(sub(rng)),
        4 => Formula::boxf(sub(rng)),
        5 => Formula::eu(sub(rng), sub(rng)),
        6 => Formula::eg(sub(rng), sub(rng)),
        7 => Formula::ar(sub(rng), sub(rng)),
        8 => Formula::af(sub(rng), sub(rng)),
        9 => Formula::eu3(sub(rng), sub(rng), sub(rng)),
        10 => Formula::af3(sub(rng), sub(rng), sub(rng)),
        11 => Formula::implies(sub(rng), sub(rng)),
        12 => Formula::x0(sub(rng)),
        _ => Formula::x1(sub(rng)),
    }
}

fn random_atom(rng: &mut impl Rng, dialect: Dialect, props: &[String]) -> Formula {
    let roll = rng.gen_range(0..10);
    match roll {
        0 => Formula::top(),
        1 => Formula::bot(),
        2 if dialect != Dialect::Plain => Formula::root(),
        _ if props.is_empty() => Formula::top(),
        _ => Formula::var(props.choose(rng).unwrap()),
    }
}

/// A quantifier-free first-order formula whose equations compare rooted
/// terms of depth at most `term_depth` over `vars`.
pub fn random_qf_fo(rng: &mut impl Rng, depth: usize, term_depth: usize, vars: &[String]) -> FoFormula {
    if depth == 0 || rng.gen_bool(0.3) {
        let a = random_formula(rng, Dialect::Rooted, term_depth, vars);
        let b = random_formula(rng, Dialect::Rooted, term_depth, vars);
        return FoFormula::eq(a, b);
    }
    let d = depth - 1;
    match rng.gen_range(0..4) {
        0 => FoFormula::not(random_qf_fo(rng, d, term_depth, vars)),
        1 => FoFormula::and(random_qf_fo(rng, d, term_depth, vars), random_qf_fo(rng, d, term_depth, vars)),
        2 => FoFormula::or(random_qf_fo(rng, d, term_depth, vars), random_qf_fo(rng, d, term_depth, vars)),
        _ => FoFormula::implies(random_qf_fo(rng, d, term_depth, vars), random_qf_fo(rng, d, term_depth, vars)),
    }
}

/// A parity tree automaton with `states` states named `q0`, `q1`, …,
/// priorities in `0..=max_prio`, and zero to two transitions for every
/// state and label over `props`.
pub fn random_parity_automaton(
    rng: &mut impl Rng,
    states: usize,
    max_prio: u32,
    props: &[String],
) -> ParityTreeAutomaton {
    assert!(states > 0 && props.len() < 32);
    let labels = 1u32 << props.len();
    let mut delta = Vec::new();
    for from in 0..states {
        for label in 0..labels {
            let k = *[0, 1, 1, 2].choose(rng).unwrap();
            let mut moves: BTreeSet<Transition> = BTreeSet::new();
            for _ in 0..k {
                moves.insert(Transition {
                    from,
                    label,
                    left: rng.gen_range(0..states),
                    right: rng.gen_range(0..states),
                });
            }
            delta.extend(moves);
        }
    }
    ParityTreeAutomaton {
        props: props.to_vec(),
        states: (0..states).map(|i| format!("q{i}")).collect(),
        init: 0,
        prio: (0..states).map(|_| rng.gen_range(0..=max_prio)).collect(),
        delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_systems_have_the_requested_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let props = prop_names(2);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let ts = random_rooted_system(&mut rng, n, &props);
            assert!(ts.has_proper_root());
            let b = random_binary_system(&mut rng, n.min(4), &props, true);
            assert!(b.is_binary() && b.has_proper_root());
            let g = random_binary_system(&mut rng, 1 + n % 3, &props, false);
            assert!(g.is_binary() && g.root() == Some(0));
        }
    }

    #[test]
    fn formulas_respect_dialect_and_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let props = prop_names(3);
        for d in [Dialect::Plain, Dialect::Rooted, Dialect::Binary] {
            for _ in 0..200 {
                let f = random_formula(&mut rng, d, 4, &props);
                assert!(d.allows(f.dialect()));
                assert!(f.vars().iter().all(|v| props.contains(v)));
            }
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let props = prop_names(2);
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let a = random_parity_automaton(&mut rng, 3, 3, &props);
            let f = random_formula(&mut rng, Dialect::Binary, 5, &props);
            (a, f.to_string())
        };
        assert_eq!(draw(), draw());
    }
}
