//! Modal automata and binary parity tree automata: loading, acceptance
//! terms, acceptance on regular trees, and run checking.

mod game;
mod run;

pub use game::{solve_parity_game, ParityGame, Player, Solution};
pub use run::{
    acc_holds_everywhere, accepts_regular, check_run_prefix, label_of, positional_run, product_system,
    search_labellings, strategy_run_prefix, Acceptance, Choice, LabellingSearch, Lasso, ProductSystem, RunReport,
};

use crate::formula::{conj, disj, is_proposition_name, Formula};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("automaton propositions {aut:?} do not cover the system's {system:?}")]
    Alphabet { aut: Vec<String>, system: Vec<String> },
    #[error("acceptance is decided for parity tree automata only")]
    NotParity,
    #[error("the generator must be a rooted binary system")]
    NotGenerator,
    #[error("labelling does not cover the tree ({got} labels for {nodes} nodes)")]
    Labelling { got: usize, nodes: usize },
}

/// `(Q, q0, δ, Ω)` with `δ(q, α)` a list of successor sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModalAutomaton {
    pub props: Vec<String>,
    pub states: Vec<String>,
    pub init: usize,
    pub prio: Vec<u32>,
    /// Keyed by state and label bitmask over `props`; absent entries are empty.
    pub delta: BTreeMap<(usize, u32), Vec<BTreeSet<usize>>>,
}

/// One element `(q, α, q0, q1)` of `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub label: u32,
    pub left: usize,
    pub right: usize,
}

/// `(Q, qI, Δ, Ω)` over binary trees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityTreeAutomaton {
    pub props: Vec<String>,
    pub states: Vec<String>,
    pub init: usize,
    pub prio: Vec<u32>,
    pub delta: Vec<Transition>,
}

impl ParityTreeAutomaton {
    /// Transitions leaving `q` on label `label`, in file order.
    pub fn moves(&self, q: usize, label: u32) -> impl Iterator<Item = &Transition> + '_ {
        self.delta.iter().filter(move |t| t.from == q && t.label == label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Automaton {
    Modal(ModalAutomaton),
    Parity(ParityTreeAutomaton),
}

impl Automaton {
    pub fn props(&self) -> &[String] {
        match self {
            Automaton::Modal(a) => &a.props,
            Automaton::Parity(a) => &a.props,
        }
    }

    pub fn state_names(&self) -> &[String] {
        match self {
            Automaton::Modal(a) => &a.states,
            Automaton::Parity(a) => &a.states,
        }
    }

    pub fn init(&self) -> usize {
        match self {
            Automaton::Modal(a) => a.init,
            Automaton::Parity(a) => a.init,
        }
    }

    pub fn prio(&self) -> &[u32] {
        match self {
            Automaton::Modal(a) => &a.prio,
            Automaton::Parity(a) => &a.prio,
        }
    }
}

/// Bitmask of the propositions of `names` within `props`; `None` if a name is unknown.
pub fn label_mask<'a>(props: &[String], names: impl IntoIterator<Item = &'a str>) -> Option<u32> {
    let mut m = 0;
    for n in names {
        m |= 1 << props.iter().position(|p| p == n)?;
    }
    Some(m)
}

fn label_text(props: &[String], mask: u32) -> String {
    let names: Vec<&str> = props
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, p)| p.as_str())
        .collect();
    format!("{{{}}}", names.join(" "))
}

struct Lines<'a> {
    line: usize,
    text: &'a str,
}

impl Lines<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, AutomatonError> {
        Err(AutomatonError::Parse {
            line: self.line,
            msg: msg.into(),
        })
    }
}

/// Splits `{a b}` / `{a,b}` groups and bare words.
fn braced(src: &str, at: &Lines) -> Result<(Vec<String>, String), AutomatonError> {
    let src = src.trim_start();
    let Some(rest) = src.strip_prefix('{') else {
        return at.err(format!("expected `{{` in `{}`", at.text));
    };
    let Some(end) = rest.find('}') else {
        return at.err("unclosed `{`");
    };
    let items = rest[..end]
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    Ok((items, rest[end + 1..].to_string()))
}

/// Reads the line-based automaton format.
pub fn load_automaton(text: &str) -> Result<Automaton, AutomatonError> {
    let mut kind: Option<bool> = None;
    let mut props: Option<Vec<String>> = None;
    let mut states: Option<Vec<String>> = None;
    let mut init: Option<String> = None;
    let mut prio: BTreeMap<String, u32> = BTreeMap::new();
    let mut deltas: Vec<(Lines, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let at = Lines { line: i + 1, text: raw };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (head, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let words: Vec<&str> = rest.split_whitespace().collect();
        match head {
            "modal" | "parity" if kind.is_none() && words.is_empty() => kind = Some(head == "modal"),
            "modal" | "parity" => return at.err("duplicate automaton kind"),
            "props" => props = Some(words.iter().map(|s| s.to_string()).collect()),
            "states" => states = Some(words.iter().map(|s| s.to_string()).collect()),
            "init" if words.len() == 1 => init = Some(words[0].to_string()),
            "prio" if words.len() == 2 => {
                let n = words[1].parse().or_else(|_| at.err("bad priority"))?;
                prio.insert(words[0].to_string(), n);
            }
            "delta" => deltas.push((at, rest)),
            _ => return at.err(format!("unrecognised line `{content}`")),
        }
    }
    let top = Lines { line: 0, text: "" };
    let Some(modal) = kind else {
        return top.err("missing `modal` or `parity` header");
    };
    let props = props.unwrap_or_default();
    let Some(states) = states else {
        return top.err("missing `states`");
    };
    for (set, what) in [(&props, "proposition"), (&states, "state")] {
        let mut seen = BTreeSet::new();
        for n in set.iter() {
            if !is_proposition_name(n) {
                return top.err(format!("invalid {what} name `{n}`"));
            }
            if !seen.insert(n) {
                return top.err(format!("duplicate {what} `{n}`"));
            }
        }
    }
    if let Some(clash) = states.iter().find(|q| props.contains(q)) {
        return top.err(format!("`{clash}` is both a proposition and a state"));
    }
    if props.len() > 16 {
        return top.err("at most 16 propositions are supported");
    }
    let index = |name: &str| states.iter().position(|q| q == name);
    let Some(init) = init.as_deref().and_then(index) else {
        return top.err("missing or unknown `init` state");
    };
    let mut prios = Vec::new();
    for q in &states {
        match prio.get(q) {
            Some(&p) => prios.push(p),
            None => return top.err(format!("no priority for state `{q}`")),
        }
    }
    if let Some(extra) = prio.keys().find(|k| index(k).is_none()) {
        return top.err(format!("priority for unknown state `{extra}`"));
    }
    let mut modal_delta: BTreeMap<(usize, u32), Vec<BTreeSet<usize>>> = BTreeMap::new();
    let mut parity_delta = Vec::new();
    for (at, rest) in deltas {
        let (q, rest) = rest.trim().split_once(char::is_whitespace).unwrap_or((rest.trim(), ""));
        let Some(from) = index(q) else {
            return at.err(format!("unknown state `{q}`"));
        };
        let (names, rest) = braced(rest, &at)?;
        let Some(label) = label_mask(&props, names.iter().map(String::as_str)) else {
            return at.err("label mentions an unknown proposition");
        };
        let Some(rhs) = rest.trim().strip_prefix("->") else {
            return at.err("expected `->`");
        };
        if modal {
            let entry = modal_delta.entry((from, label)).or_default();
            for alt in rhs.split('|') {
                let (names, tail) = braced(alt, &at)?;
                if !tail.trim().is_empty() {
                    return at.err("unexpected text after successor set");
                }
                let mut d = BTreeSet::new();
                for n in names {
                    match index(&n) {
                        Some(s) => {
                            d.insert(s);
                        }
                        None => return at.err(format!("unknown state `{n}`")),
                    }
                }
                if !entry.contains(&d) {
                    entry.push(d);
                }
            }
        } else {
            let words: Vec<&str> = rhs.split_whitespace().collect();
            let [l, r] = words[..] else {
                return at.err("parity transitions name two successor states");
            };
            let (Some(left), Some(right)) = (index(l), index(r)) else {
                return at.err("unknown successor state");
            };
            let t = Transition { from, label, left, right };
            if !parity_delta.contains(&t) {
                parity_delta.push(t);
            }
        }
    }
    Ok(if modal {
        Automaton::Modal(ModalAutomaton {
            props,
            states,
            init,
            prio: prios,
            delta: modal_delta,
        })
    } else {
        Automaton::Parity(ParityTreeAutomaton {
            props,
            states,
            init,
            prio: prios,
            delta: parity_delta,
        })
    })
}

/// Writes an automaton in the format read by [`load_automaton`].
pub fn save_automaton(aut: &Automaton) -> String {
    let mut out = String::new();
    let (props, states) = (aut.props(), aut.state_names());
    out.push_str(match aut {
        Automaton::Modal(_) => "modal\n",
        Automaton::Parity(_) => "parity\n",
    });
    let _ = writeln!(out, "props {}", props.join(" "));
    let _ = writeln!(out, "states {}", states.join(" "));
    let _ = writeln!(out, "init {}", states[aut.init()]);
    for (q, p) in states.iter().zip(aut.prio()) {
        let _ = writeln!(out, "prio {q} {p}");
    }
    match aut {
        Automaton::Modal(a) => {
            for ((q, label), alts) in &a.delta {
                let rhs: Vec<String> = alts
                    .iter()
                    .map(|d| format!("{{{}}}", d.iter().map(|&s| states[s].as_str()).collect::<Vec<_>>().join(" ")))
                    .collect();
                let _ = writeln!(out, "delta {} {} -> {}", states[*q], label_text(props, *label), rhs.join(" | "));
            }
        }
        Automaton::Parity(a) => {
            for t in &a.delta {
                let _ = writeln!(
                    out,
                    "delta {} {} -> {} {}",
                    states[t.from],
                    label_text(props, t.label),
                    states[t.left],
                    states[t.right]
                );
            }
        }
    }
    out
}

fn conj_nontrivial(items: impl IntoIterator<Item = Formula>) -> Formula {
    conj(items.into_iter().filter(|f| !f.is_top()))
}

/// `⊙α`: the literals fixing the colour to `α`.
fn literal_conj(props: &[String], label: u32) -> Vec<Formula> {
    let pos = props
        .iter()
        .enumerate()
        .filter(|(i, _)| label >> i & 1 == 1)
        .map(|(_, p)| Formula::var(p));
    let neg = props
        .iter()
        .enumerate()
        .filter(|(i, _)| label >> i & 1 == 0)
        .map(|(_, p)| Formula::neg(Formula::var(p)));
    pos.chain(neg).collect()
}

/// `∇D = ⋀_{q∈D} ◇q ∧ □(⋁_{q∈D} q)`.
pub fn nabla(states: &[String], d: &BTreeSet<usize>) -> Formula {
    let dias = d.iter().map(|&q| Formula::dia(Formula::var(&states[q])));
    let all = Formula::boxf(disj(d.iter().map(|&q| Formula::var(&states[q]))));
    conj(dias.chain(std::iter::once(all)))
}

fn acc1(states: &[String], init: usize) -> Formula {
    Formula::or(Formula::neg(Formula::root()), Formula::var(&states[init]))
}

fn acc2(states: &[String], moves: impl Fn(usize) -> Formula) -> Formula {
    disj((0..states.len()).map(|q| {
        let others = states
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != q)
            .map(|(_, name)| Formula::neg(Formula::var(name)));
        conj_nontrivial(std::iter::once(Formula::var(&states[q])).chain(others).chain(std::iter::once(moves(q))))
    }))
}

/// `⋀` over odd priorities `n` of `AF(⋁_{Ω(q′)<n} q′, ⋀_{Ω(q)=n} ¬q)`.
fn acc3(states: &[String], prio: &[u32]) -> Formula {
    let odd: BTreeSet<u32> = prio.iter().copied().filter(|n| n % 2 == 1).collect();
    conj(odd.into_iter().map(|n| {
        let lower = disj((0..states.len()).filter(|&q| prio[q] < n).map(|q| Formula::var(&states[q])));
        let avoid = conj(
            (0..states.len())
                .filter(|&q| prio[q] == n)
                .map(|q| Formula::neg(Formula::var(&states[q]))),
        );
        Formula::af(lower, avoid)
    }))
}

/// The components `acc₁`, `acc₂`, `acc₃` of the acceptance term.
pub fn acc_components(aut: &Automaton) -> [Formula; 3] {
    let states = aut.state_names();
    let a2 = match aut {
        Automaton::Modal(a) => {
            let k = a.props.len();
            acc2(states, |q| {
                disj((0..1u32 << k).flat_map(|label| {
                    let lits = literal_conj(&a.props, label);
                    a.delta
                        .get(&(q, label))
                        .into_iter()
                        .flatten()
                        .map(move |d| conj_nontrivial(std::iter::once(nabla(states, d)).chain(lits.clone())))
                        .collect::<Vec<_>>()
                }))
            })
        }
        Automaton::Parity(a) => acc2(states, |q| {
            disj(a.delta.iter().filter(|t| t.from == q).map(|t| bullet(a, t)))
        }),
    };
    [acc1(states, aut.init()), a2, acc3(states, aut.prio())]
}

/// `•θ = X0 q0 ∧ X1 q1 ∧ ⊙α` for `θ = (α, q0, q1)`.
pub fn bullet(aut: &ParityTreeAutomaton, t: &Transition) -> Formula {
    let steps = [
        Formula::x0(Formula::var(&aut.states[t.left])),
        Formula::x1(Formula::var(&aut.states[t.right])),
    ];
    conj(steps.into_iter().chain(literal_conj(&aut.props, t.label)))
}

/// `acc = acc₁ ∧ acc₂ ∧ acc₃` over the propositions and automaton states.
pub fn compile_acc(aut: &Automaton) -> Formula {
    let [a1, a2, a3] = acc_components(aut);
    Formula::and(Formula::and(a1, a2), a3)
}

pub fn compile_acc_modal(aut: &ModalAutomaton) -> Formula {
    compile_acc(&Automaton::Modal(aut.clone()))
}

pub fn compile_acc_binary(aut: &ParityTreeAutomaton) -> Formula {
    compile_acc(&Automaton::Parity(aut.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Dialect};

    fn parse(s: &str) -> Formula {
        parse_formula(s, Dialect::Binary).unwrap()
    }

    const ALL_MODAL: &str = "modal\nprops p\nstates q0\ninit q0\nprio q0 0\ndelta q0 {} -> {q0}\ndelta q0 {p} -> {q0}\n";

    #[test]
    fn load_and_save_round_trip() {
        let m = load_automaton("modal\nprops p q\nstates a b\ninit a\nprio a 0\nprio b 1\ndelta a {p,q} -> {a b} | {b}\n").unwrap();
        let Automaton::Modal(ma) = &m else { panic!() };
        assert_eq!(ma.delta[&(0, 3)].len(), 2);
        assert_eq!(load_automaton(&save_automaton(&m)).unwrap(), m);
        let p = load_automaton("parity\nprops p\nstates a\ninit a\nprio a 2\ndelta a {p} -> a a\n").unwrap();
        assert_eq!(load_automaton(&save_automaton(&p)).unwrap(), p);
    }

    #[test]
    fn load_errors() {
        assert!(load_automaton("modal\nprops p\nstates p\ninit p\nprio p 0\n").is_err());
        assert!(load_automaton("parity\nstates a\ninit a\nprio a 0\ndelta a {} -> a\n").is_err());
        assert!(load_automaton("parity\nstates a\ninit b\nprio a 0\n").is_err());
        assert!(load_automaton("parity\nstates a\ninit a\n").is_err());
        assert!(load_automaton("states a\ninit a\nprio a 0\n").is_err());
    }

    #[test]
    fn acc_components_modal() {
        let a = load_automaton(ALL_MODAL).unwrap();
        let [a1, a2, a3] = acc_components(&a);
        assert_eq!(a1, parse("~I | q0"));
        assert!(a3.is_top());
        assert_eq!(a2, parse("q0 & ((dia q0 & box q0 & ~p) | (dia q0 & box q0 & p))"));
    }

    #[test]
    fn nabla_singleton() {
        let states = vec!["q".to_string()];
        assert_eq!(nabla(&states, &[0].into_iter().collect()), parse("dia q & box q"));
    }

    #[test]
    fn acc_binary_bullet_and_parity() {
        let a = load_automaton("parity\nprops p\nstates q\ninit q\nprio q 0\ndelta q {} -> q q\n").unwrap();
        let Automaton::Parity(pa) = &a else { panic!() };
        assert_eq!(bullet(pa, &pa.delta[0]), parse("X0 q & X1 q & ~p"));
        let [_, a2, _] = acc_components(&a);
        assert_eq!(a2, parse("q & (X0 q & X1 q & ~p)"));
        let two = load_automaton(
            "parity\nprops p\nstates w s\ninit w\nprio w 1\nprio s 0\ndelta w {p} -> s s\ndelta s {p} -> s s\ndelta w {} -> w w\ndelta s {} -> w w\n",
        )
        .unwrap();
        let [_, _, a3] = acc_components(&two);
        assert_eq!(a3, parse("AF(s, ~w)"));
    }

    #[test]
    fn acc_mentions_exactly_props_and_states() {
        let a = load_automaton(ALL_MODAL).unwrap();
        let vars = compile_acc(&a).vars();
        assert_eq!(vars, ["p".to_string(), "q0".to_string()].into_iter().collect());
        assert_eq!(compile_acc(&a).dialect(), Dialect::Rooted);
    }
}
