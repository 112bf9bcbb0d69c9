#![allow(dead_code)]

use fairctl_core::kripke::{Tree, TransitionSystem};
use fairctl_core::{Formula, Kind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Truth at a node of a finite tree prefix when the prefix decides it:
/// literals, boolean connectives, `dia`, `box`, and `EU` witnesses inside
/// the prefix.
pub fn prefix_truth(f: &Formula, tree: &Tree, ts: &TransitionSystem, v: usize) -> Option<bool> {
    let node = &tree.nodes[v];
    let kids = &node.children;
    match f.kind() {
        Kind::Top => Some(true),
        Kind::Bot => Some(false),
        Kind::Var(p) => Some(ts.colour(node.state).contains(&**p)),
        Kind::Neg(a) => prefix_truth(a, tree, ts, v).map(|b| !b),
        Kind::And(a, b) => match (prefix_truth(a, tree, ts, v), prefix_truth(b, tree, ts, v)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Kind::Or(a, b) => match (prefix_truth(a, tree, ts, v), prefix_truth(b, tree, ts, v)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Kind::Dia(a) | Kind::Box(a) if !kids.is_empty() => {
            let vals: Vec<Option<bool>> = kids.iter().map(|&c| prefix_truth(a, tree, ts, c)).collect();
            let dia = if vals.contains(&Some(true)) {
                Some(true)
            } else if vals.iter().all(|x| *x == Some(false)) {
                Some(false)
            } else {
                None
            };
            if matches!(f.kind(), Kind::Dia(_)) {
                dia
            } else {
                let neg: Vec<Option<bool>> = vals.iter().map(|x| x.map(|b| !b)).collect();
                if neg.contains(&Some(true)) {
                    Some(false)
                } else if neg.iter().all(|x| *x == Some(false)) {
                    Some(true)
                } else {
                    None
                }
            }
        }
        Kind::EU(a, b, c) if c.is_top() => {
            if prefix_truth(a, tree, ts, v) == Some(true) {
                return Some(true);
            }
            let here = prefix_truth(b, tree, ts, v) == Some(true);
            (here && kids.iter().any(|&k| prefix_truth(f, tree, ts, k) == Some(true))).then_some(true)
        }
        _ => None,
    }
}
