use super::game::{solve_parity_game, ParityGame, Player};
use super::{compile_acc, Automaton, AutomatonError, ParityTreeAutomaton, Transition};
use crate::eval::{eval, Valuation};
use crate::formula::Formula;
use crate::kripke::{unravel_to_depth, Tree, TransitionSystem};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// Bitmask over `props` of the colour of `s`.
pub fn label_of(ts: &TransitionSystem, s: usize, props: &[String]) -> u32 {
    props
        .iter()
        .enumerate()
        .filter(|(_, p)| ts.colour(s).contains(*p))
        .fold(0, |m, (i, _)| m | 1 << i)
}

fn check_alphabet(props: &[String], ts: &TransitionSystem) -> Result<(), AutomatonError> {
    let system: Vec<String> = ts.propositions().into_iter().collect();
    if system.iter().all(|p| props.contains(p)) {
        Ok(())
    } else {
        Err(AutomatonError::Alphabet {
            aut: props.to_vec(),
            system,
        })
    }
}

/// Positional choices `(state, automaton state) ↦ transition`.
pub type Choice = BTreeMap<(usize, usize), Transition>;

/// Outcome of [`accepts_regular`].
#[derive(Clone, Debug)]
pub struct Acceptance {
    pub accepted: bool,
    pub game_vertices: usize,
    /// A winning positional choice at every pair won by the automaton.
    pub strategy: Choice,
}

/// Decides whether the automaton has a successful run on the colouring
/// of the full binary tree generated by `gen`.
///
/// The product of `gen` with the automaton states is read as a parity
/// game: the automaton picks a transition, the opponent a direction.
pub fn accepts_regular(aut: &ParityTreeAutomaton, gen: &TransitionSystem) -> Result<Acceptance, AutomatonError> {
    let (Some(root), true) = (gen.root(), gen.is_binary()) else {
        return Err(AutomatonError::NotGenerator);
    };
    check_alphabet(&aut.props, gen)?;
    let n = gen.len();
    let m = aut.states.len();
    let max_prio = aut.prio.iter().copied().max().unwrap_or(0);
    let mut g = ParityGame::default();
    for _s in 0..n {
        for q in 0..m {
            g.add_vertex(Player::Even, aut.prio[q]);
        }
    }
    let sink = g.add_vertex(Player::Odd, 1);
    g.succ[sink].push(sink);
    let mut branch_vertex: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut branch_info: Vec<(usize, usize, usize)> = Vec::new();
    for s in 0..n {
        let label = label_of(gen, s, &aut.props);
        for q in 0..m {
            let e = s * m + q;
            for t in aut.moves(q, label) {
                let key = (s, t.left, t.right);
                let o = *branch_vertex.entry(key).or_insert_with(|| {
                    let o = g.add_vertex(Player::Odd, max_prio);
                    branch_info.push(key);
                    o
                });
                if !g.succ[e].contains(&o) {
                    g.succ[e].push(o);
                }
            }
            if g.succ[e].is_empty() {
                g.succ[e].push(sink);
            }
        }
    }
    for &(s, l, r) in &branch_info {
        let o = branch_vertex[&(s, l, r)];
        let f0 = gen.step(false, s).unwrap();
        let f1 = gen.step(true, s).unwrap();
        g.succ[o] = vec![f0 * m + l, f1 * m + r];
        g.succ[o].dedup();
    }
    let sol = solve_parity_game(&g);
    let mut strategy = Choice::new();
    let base = sink + 1;
    for s in 0..n {
        let label = label_of(gen, s, &aut.props);
        for q in 0..m {
            let e = s * m + q;
            if sol.winner[e] != Player::Even {
                continue;
            }
            let o = sol.strategy[e].expect("winning vertex without a move");
            let key = branch_info[o - base];
            let t = *aut
                .moves(q, label)
                .find(|t| (s, t.left, t.right) == key)
                .expect("branching vertex matches a transition");
            strategy.insert((s, q), t);
        }
    }
    Ok(Acceptance {
        accepted: sol.winner[root * m + aut.init] == Player::Even,
        game_vertices: g.len(),
        strategy,
    })
}

/// The pairs reachable from `(root, init)` under `choice`, with the chosen
/// transition; `None` if some reachable pair has no choice.
pub fn positional_run(
    aut: &ParityTreeAutomaton,
    gen: &TransitionSystem,
    choice: &Choice,
) -> Option<Vec<((usize, usize), Transition)>> {
    let start = (gen.root()?, aut.init);
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some((s, q)) = queue.pop_front() {
        let t = *choice.get(&(s, q))?;
        out.push(((s, q), t));
        for next in [(gen.step(false, s)?, t.left), (gen.step(true, s)?, t.right)] {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    Some(out)
}

/// A regular run presented as a binary system over `props ∪ states`.
#[derive(Clone, Debug)]
pub struct ProductSystem {
    /// State 0 is the initial pair and has no incoming edges.
    pub ts: TransitionSystem,
    /// `pairs[i]` is the pair represented by state `i`.
    pub pairs: Vec<(usize, usize)>,
}

/// The run of `choice` on `gen` as a rooted binary system. If the initial
/// pair is revisited, the revisits go to a copy of state 0.
pub fn product_system(aut: &ParityTreeAutomaton, gen: &TransitionSystem, choice: &Choice) -> Option<ProductSystem> {
    let run = positional_run(aut, gen, choice)?;
    let mut pairs: Vec<(usize, usize)> = run.iter().map(|(v, _)| *v).collect();
    let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut maps = [Vec::new(), Vec::new()];
    let mut colour = Vec::new();
    let mut copy = None;
    for ((s, q), t) in &run {
        for (dir, target) in [(false, t.left), (true, t.right)] {
            let mut j = index[&(gen.step(dir, *s)?, target)];
            if j == 0 {
                j = *copy.get_or_insert(run.len());
            }
            maps[dir as usize].push(j);
        }
        let mut c: BTreeSet<String> = gen.colour(*s).clone();
        c.insert(aut.states[*q].clone());
        colour.push(c);
    }
    if copy.is_some() {
        let [f0, f1] = &mut maps;
        f0.push(f0[0]);
        f1.push(f1[0]);
        colour.push(colour[0].clone());
        pairs.push(pairs[0]);
    }
    let [f0, f1] = maps;
    let ts = TransitionSystem::binary(f0, f1, colour, Some(0)).ok()?;
    Some(ProductSystem { ts, pairs })
}

/// Whether `acc` holds at every state of a product system.
pub fn acc_holds_everywhere(aut: &ParityTreeAutomaton, acc: &Formula, p: &ProductSystem) -> bool {
    let names = aut.props.iter().chain(&aut.states);
    let v = Valuation::from_colouring_with(&p.ts, names);
    eval(acc, &p.ts, &v).map(|s| s.is_full()).unwrap_or(false)
}

/// Result of the exhaustive search for a positional labelling.
#[derive(Clone, Debug)]
pub enum LabellingSearch {
    Found { choice: Choice, candidates: usize },
    NoneFound { candidates: usize },
    /// More than the allowed number of complete candidates.
    Exceeded { candidates: usize },
}

/// Enumerates the positional choices on pairs reachable from the initial
/// pair and evaluates the acceptance term on each resulting system.
pub fn search_labellings(
    aut: &ParityTreeAutomaton,
    gen: &TransitionSystem,
    cap: usize,
) -> Result<LabellingSearch, AutomatonError> {
    let (Some(root), true) = (gen.root(), gen.is_binary()) else {
        return Err(AutomatonError::NotGenerator);
    };
    check_alphabet(&aut.props, gen)?;
    let acc = compile_acc(&Automaton::Parity(aut.clone()));
    let mut search = Search {
        aut,
        gen,
        acc,
        cap,
        candidates: 0,
        found: None,
    };
    let mut choice = Choice::new();
    let exhausted = search.extend(&mut choice, vec![(root, aut.init)]);
    Ok(match search.found {
        Some(choice) => LabellingSearch::Found {
            choice,
            candidates: search.candidates,
        },
        None if exhausted => LabellingSearch::NoneFound {
            candidates: search.candidates,
        },
        None => LabellingSearch::Exceeded {
            candidates: search.candidates,
        },
    })
}

struct Search<'a> {
    aut: &'a ParityTreeAutomaton,
    gen: &'a TransitionSystem,
    acc: Formula,
    cap: usize,
    candidates: usize,
    found: Option<Choice>,
}

impl Search<'_> {
    /// Returns false when the search stopped early.
    fn extend(&mut self, choice: &mut Choice, mut pending: Vec<(usize, usize)>) -> bool {
        while let Some(v) = pending.last() {
            if choice.contains_key(v) {
                pending.pop();
            } else {
                break;
            }
        }
        let Some(&(s, q)) = pending.last() else {
            self.candidates += 1;
            if self.candidates > self.cap {
                return false;
            }
            let p = product_system(self.aut, self.gen, choice).expect("complete choice");
            if acc_holds_everywhere(self.aut, &self.acc, &p) {
                self.found = Some(choice.clone());
                return false;
            }
            return true;
        };
        pending.pop();
        let label = label_of(self.gen, s, &self.aut.props);
        let moves: Vec<Transition> = self.aut.moves(q, label).copied().collect();
        for t in moves {
            choice.insert((s, q), t);
            let mut next = pending.clone();
            next.push((self.gen.step(true, s).unwrap(), t.right));
            next.push((self.gen.step(false, s).unwrap(), t.left));
            let go_on = self.extend(choice, next);
            choice.remove(&(s, q));
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// A branch prefix whose node `end` repeats the state and label of the
/// branch node at depth `cycle_start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Lasso {
    pub end: usize,
    pub cycle_start: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RunReport {
    pub nodes: usize,
    pub initial_ok: bool,
    pub transitions_checked: usize,
    pub transition_violations: Vec<usize>,
    pub lassos_checked: usize,
    pub invalid_lassos: Vec<usize>,
    /// Lassos whose cycle has odd least priority, read on paths from the root.
    pub root_reading_violations: Vec<usize>,
    /// Lassos violating the success condition on some suffix path.
    pub suffix_reading_violations: Vec<usize>,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.initial_ok
            && self.transition_violations.is_empty()
            && self.invalid_lassos.is_empty()
            && self.suffix_reading_violations.is_empty()
    }
}

/// Checks a labelling `r` of a finite tree prefix of `ts` against the
/// initial and transition conditions, and the parity condition on the
/// supplied lassos. Leaves are not checked for transitions.
pub fn check_run_prefix(
    aut: &Automaton,
    ts: &TransitionSystem,
    tree: &Tree,
    r: &[usize],
    lassos: &[Lasso],
) -> Result<RunReport, AutomatonError> {
    if r.len() != tree.len() {
        return Err(AutomatonError::Labelling {
            got: r.len(),
            nodes: tree.len(),
        });
    }
    check_alphabet(aut.props(), ts)?;
    let prio = aut.prio();
    let mut rep = RunReport {
        nodes: tree.len(),
        initial_ok: r.first() == Some(&aut.init()),
        ..RunReport::default()
    };
    for (v, node) in tree.nodes.iter().enumerate() {
        if node.children.is_empty() {
            continue;
        }
        rep.transitions_checked += 1;
        let label = label_of(ts, node.state, aut.props());
        let ok = match aut {
            Automaton::Modal(a) => {
                let d: BTreeSet<usize> = node.children.iter().map(|&c| r[c]).collect();
                a.delta.get(&(r[v], label)).is_some_and(|alts| alts.contains(&d))
            }
            Automaton::Parity(a) => match node.children[..] {
                [c0, c1] => a.moves(r[v], label).any(|t| t.left == r[c0] && t.right == r[c1]),
                _ => false,
            },
        };
        if !ok {
            rep.transition_violations.push(v);
        }
    }
    for (i, lasso) in lassos.iter().enumerate() {
        rep.lassos_checked += 1;
        let branch = tree.branch(lasso.end);
        let end_depth = branch.len() - 1;
        let valid = lasso.cycle_start < end_depth && {
            let a = branch[lasso.cycle_start];
            tree.nodes[a].state == tree.nodes[lasso.end].state && r[a] == r[lasso.end]
        };
        if !valid {
            rep.invalid_lassos.push(i);
            continue;
        }
        let labels: Vec<usize> = branch.iter().map(|&u| r[u]).collect();
        let cycle = &labels[lasso.cycle_start..end_depth];
        let least = cycle.iter().map(|&q| prio[q]).min().unwrap();
        if least % 2 == 1 {
            rep.root_reading_violations.push(i);
        }
        let suffix_ok = (0..=end_depth).all(|k| {
            let seen: BTreeSet<usize> = labels[k..end_depth].iter().chain(cycle).copied().collect();
            cycle.iter().map(|&q| prio[q]).filter(|n| n % 2 == 1).all(|n| seen.iter().any(|&q| prio[q] < n))
        });
        if !suffix_ok {
            rep.suffix_reading_violations.push(i);
        }
    }
    Ok(rep)
}

/// The labelling of the depth-`d` unravelling of `gen` induced by
/// `choice`, with a lasso certificate at the first repetition of each
/// branch.
pub fn strategy_run_prefix(
    aut: &ParityTreeAutomaton,
    gen: &TransitionSystem,
    choice: &Choice,
    d: usize,
) -> Option<(Tree, Vec<usize>, Vec<Lasso>)> {
    let tree = unravel_to_depth(gen, d).ok()?;
    let mut r = vec![aut.init; tree.len()];
    for v in 0..tree.len() {
        let node = &tree.nodes[v];
        if let [c0, c1] = node.children[..] {
            let t = choice.get(&(node.state, r[v]))?;
            r[c0] = t.left;
            r[c1] = t.right;
        }
    }
    let mut lassos = Vec::new();
    let mut marked = BTreeSet::new();
    for leaf in tree.leaves() {
        let branch = tree.branch(leaf);
        let mut first: HashMap<(usize, usize), usize> = HashMap::new();
        for (depth, &u) in branch.iter().enumerate() {
            let key = (tree.nodes[u].state, r[u]);
            if let Some(&j) = first.get(&key) {
                if marked.insert(u) {
                    lassos.push(Lasso { end: u, cycle_start: j });
                }
                break;
            }
            first.insert(key, depth);
        }
    }
    Some((tree, r, lassos))
}
