//! Explicit-state fixpoint evaluation over the complex algebra of a finite
//! transition system, brute-force path oracles, and first-order checks.

mod axioms;
mod nodeset;

pub use axioms::{check_axioms, check_axioms_with, AxiomConfig, AxiomReport, AxiomViolation};
pub use nodeset::NodeSet;

use crate::formula::{Formula, Kind};
use crate::kripke::TransitionSystem;
use crate::translate::FoFormula;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("formula uses I but the system has no root")]
    NoRoot,
    #[error("formula uses X0/X1 but the system has no successor maps")]
    NotBinary,
    #[error("size guard exceeded: {n} states, limit {limit}")]
    SizeGuard { n: usize, limit: usize },
    #[error("quantifier in a formula required to be quantifier-free")]
    Quantifier,
    #[error("valuation for `{name}` has {got} states, system has {expected}")]
    Universe { name: String, got: usize, expected: usize },
}

/// Result of a Kleene iteration.
#[derive(Clone, Debug)]
pub struct Fixpoint {
    pub set: NodeSet,
    /// Number of operator applications until the value repeated.
    pub rounds: usize,
}

/// Least fixpoint of a monotone operator, iterating upward from `∅`.
pub fn lfp(n: usize, f: impl FnMut(&NodeSet) -> NodeSet) -> Fixpoint {
    iterate(NodeSet::empty(n), f)
}

/// Greatest fixpoint of a monotone operator, iterating downward from all states.
pub fn gfp(n: usize, f: impl FnMut(&NodeSet) -> NodeSet) -> Fixpoint {
    iterate(NodeSet::full(n), f)
}

fn iterate(mut x: NodeSet, mut f: impl FnMut(&NodeSet) -> NodeSet) -> Fixpoint {
    let mut rounds = 0;
    loop {
        let next = f(&x);
        rounds += 1;
        if next == x {
            return Fixpoint { set: x, rounds };
        }
        x = next;
    }
}

/// The operations of a fair CTL algebra on state sets.
///
/// Only `dia` is required; the fixpoint operators default to their
/// Kleene characterisations and may be overridden.
pub trait CtlAlgebra {
    fn size(&self) -> usize;
    fn dia(&self, a: &NodeSet) -> NodeSet;

    /// The root singleton, when the algebra is rooted.
    fn root(&self) -> Option<NodeSet> {
        None
    }

    /// Preimage under `f_dir`, when the algebra is binary.
    fn step_pre(&self, _dir: bool, _a: &NodeSet) -> Option<NodeSet> {
        None
    }

    fn bot(&self) -> NodeSet {
        NodeSet::empty(self.size())
    }

    fn top(&self) -> NodeSet {
        NodeSet::full(self.size())
    }

    fn boxed(&self, a: &NodeSet) -> NodeSet {
        self.dia(&a.complement()).complement()
    }

    /// Least fixpoint of `x ↦ a ∨ (b ∧ ◇x)`.
    fn eu(&self, a: &NodeSet, b: &NodeSet) -> NodeSet {
        lfp(self.size(), |x| a.union(&b.intersection(&self.dia(x)))).set
    }

    /// Greatest fixpoint of `y ↦ a ∧ ◇EU(b ∧ y, a)`.
    fn eg(&self, a: &NodeSet, b: &NodeSet) -> NodeSet {
        gfp(self.size(), |y| a.intersection(&self.dia(&self.eu(&b.intersection(y), a)))).set
    }

    /// Greatest fixpoint of `c ↦ a ∧ (b ∨ □c)`.
    fn ar(&self, a: &NodeSet, b: &NodeSet) -> NodeSet {
        gfp(self.size(), |c| a.intersection(&b.union(&self.boxed(c)))).set
    }

    /// Least fixpoint of `x ↦ a ∨ □AR(b ∨ x, a)`.
    fn af(&self, a: &NodeSet, b: &NodeSet) -> NodeSet {
        lfp(self.size(), |x| a.union(&self.boxed(&self.ar(&b.union(x), a)))).set
    }

    /// `EU_c(p,q,r) = p ∨ (q ∧ ◇EU(p ∧ r, q ∧ r))`.
    fn eu3(&self, p: &NodeSet, q: &NodeSet, r: &NodeSet) -> NodeSet {
        let inner = self.eu(&p.intersection(r), &q.intersection(r));
        p.union(&q.intersection(&self.dia(&inner)))
    }

    /// `AF_c(p,q,r) = AF(p,q) ∧ (p ∨ □AR(q ∨ r, p))`.
    fn af3(&self, p: &NodeSet, q: &NodeSet, r: &NodeSet) -> NodeSet {
        let guard = p.union(&self.boxed(&self.ar(&q.union(r), p)));
        self.af(p, q).intersection(&guard)
    }
}

/// The power-set algebra of a transition system.
#[derive(Clone, Copy)]
pub struct ComplexAlgebra<'a> {
    pub ts: &'a TransitionSystem,
}

impl<'a> ComplexAlgebra<'a> {
    pub fn new(ts: &'a TransitionSystem) -> Self {
        ComplexAlgebra { ts }
    }
}

impl CtlAlgebra for ComplexAlgebra<'_> {
    fn size(&self) -> usize {
        self.ts.len()
    }

    fn dia(&self, a: &NodeSet) -> NodeSet {
        let n = self.ts.len();
        NodeSet::from_states(n, (0..n).filter(|&s| self.ts.successors(s).iter().any(|&t| a.contains(t))))
    }

    fn root(&self) -> Option<NodeSet> {
        self.ts.root().map(|r| NodeSet::singleton(self.ts.len(), r))
    }

    fn step_pre(&self, dir: bool, a: &NodeSet) -> Option<NodeSet> {
        let n = self.ts.len();
        self.ts.step(dir, 0)?;
        Some(NodeSet::from_states(
            n,
            (0..n).filter(|&s| a.contains(self.ts.step(dir, s).unwrap_or(usize::MAX))),
        ))
    }
}

/// Interpretation of proposition names as state sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation {
    map: BTreeMap<String, NodeSet>,
}

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    /// `V_σ`: each proposition of the colouring holds where it is listed.
    pub fn from_colouring(ts: &TransitionSystem) -> Self {
        Valuation::from_colouring_with(ts, std::iter::empty::<String>())
    }

    /// `V_σ` extended to `extra` names, which hold where coloured (possibly nowhere).
    pub fn from_colouring_with<S: AsRef<str>>(ts: &TransitionSystem, extra: impl IntoIterator<Item = S>) -> Self {
        let n = ts.len();
        let mut map: BTreeMap<String, NodeSet> = BTreeMap::new();
        for name in ts.propositions() {
            map.insert(name, NodeSet::empty(n));
        }
        for name in extra {
            map.entry(name.as_ref().to_string()).or_insert_with(|| NodeSet::empty(n));
        }
        for s in 0..n {
            for p in ts.colour(s) {
                if let Some(set) = map.get_mut(p) {
                    set.insert(s);
                }
            }
        }
        Valuation { map }
    }

    pub fn insert(&mut self, name: impl Into<String>, set: NodeSet) {
        self.map.insert(name.into(), set);
    }

    pub fn get(&self, name: &str) -> Option<&NodeSet> {
        self.map.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &NodeSet)> {
        self.map.iter()
    }
}

impl<T: CtlAlgebra + ?Sized> CtlAlgebra for &T {
    fn size(&self) -> usize {
        (**self).size()
    }
    fn dia(&self, a: &NodeSet) -> NodeSet {
        (**self).dia(a)
    }
    fn root(&self) -> Option<NodeSet> {
        (**self).root()
    }
    fn step_pre(&self, dir: bool, a: &NodeSet) -> Option<NodeSet> {
        (**self).step_pre(dir, a)
    }
    fn boxed(&self, a: &NodeSet) -> NodeSet {
        (**self).boxed(a)
    }
    fn eu(&self, a: &NodeSet, b: &NodeSet) -> NodeSet {
        (**self).eu(a, b)
    }
    fn eg(&self, a: &NodeSet, b: &NodeSet) -> NodeSet {
        (**self).eg(a, b)
    }
    fn ar(&self, a: &NodeSet, b: &NodeSet) -> NodeSet {
        (**self).ar(a, b)
    }
    fn af(&self, a: &NodeSet, b: &NodeSet) -> NodeSet {
        (**self).af(a, b)
    }
    fn eu3(&self, p: &NodeSet, q: &NodeSet, r: &NodeSet) -> NodeSet {
        (**self).eu3(p, q, r)
    }
    fn af3(&self, p: &NodeSet, q: &NodeSet, r: &NodeSet) -> NodeSet {
        (**self).af3(p, q, r)
    }
}

/// Memoising evaluator for one algebra and valuation.
pub struct Evaluator<'a, A: CtlAlgebra> {
    alg: A,
    val: &'a Valuation,
    cache: HashMap<Formula, NodeSet>,
}

impl<'a, A: CtlAlgebra> Evaluator<'a, A> {
    pub fn new(alg: A, val: &'a Valuation) -> Self {
        Evaluator {
            alg,
            val,
            cache: HashMap::new(),
        }
    }

    pub fn algebra(&self) -> &A {
        &self.alg
    }

    pub fn valuation(&self) -> &'a Valuation {
        self.val
    }

    /// Whether `state` belongs to the extension of `f`.
    pub fn holds(&mut self, f: &Formula, state: usize) -> Result<bool, EvalError> {
        Ok(self.eval(f)?.contains(state))
    }

    pub fn eval(&mut self, f: &Formula) -> Result<NodeSet, EvalError> {
        if let Some(s) = self.cache.get(f) {
            return Ok(s.clone());
        }
        let n = self.alg.size();
        let r = match f.kind() {
            Kind::Bot => self.alg.bot(),
            Kind::Top => self.alg.top(),
            Kind::Root => self.alg.root().ok_or(EvalError::NoRoot)?,
            Kind::Var(name) => {
                let set = self.val.get(name).ok_or_else(|| EvalError::Unbound(name.to_string()))?;
                if set.universe() != n {
                    return Err(EvalError::Universe {
                        name: name.to_string(),
                        got: set.universe(),
                        expected: n,
                    });
                }
                set.clone()
            }
            Kind::Neg(a) => self.eval(a)?.complement(),
            Kind::Or(a, b) => self.eval(a)?.union(&self.eval(b)?),
            Kind::And(a, b) => self.eval(a)?.intersection(&self.eval(b)?),
            Kind::Dia(a) => {
                let a = self.eval(a)?;
                self.alg.dia(&a)
            }
            Kind::Box(a) => {
                let a = self.eval(a)?;
                self.alg.boxed(&a)
            }
            Kind::X(dir, a) => {
                let a = self.eval(a)?;
                self.alg.step_pre(*dir, &a).ok_or(EvalError::NotBinary)?
            }
            Kind::EU(a, b, c) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                if c.is_top() {
                    self.alg.eu(&a, &b)
                } else {
                    let c = self.eval(c)?;
                    self.alg.eu3(&a, &b, &c)
                }
            }
            Kind::AF(a, b, c) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                if c.is_top() {
                    self.alg.af(&a, &b)
                } else {
                    let c = self.eval(c)?;
                    self.alg.af3(&a, &b, &c)
                }
            }
            Kind::EG(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.alg.eg(&a, &b)
            }
            Kind::AR(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.alg.ar(&a, &b)
            }
        };
        self.cache.insert(f.clone(), r.clone());
        Ok(r)
    }
}

/// The set of states forcing `f` in `ts` under `v`.
pub fn eval(f: &Formula, ts: &TransitionSystem, v: &Valuation) -> Result<NodeSet, EvalError> {
    Evaluator::new(&ComplexAlgebra::new(ts), v).eval(f)
}

/// Largest system accepted by the path-enumeration oracles.
pub const BRUTE_FORCE_LIMIT: usize = 8;

fn guard(ts: &TransitionSystem, limit: usize) -> Result<(), EvalError> {
    if ts.len() > limit {
        Err(EvalError::SizeGuard { n: ts.len(), limit })
    } else {
        Ok(())
    }
}

/// `EU(a, b)` by enumerating simple paths whose last state is in `a` and
/// whose earlier states are in `b`.
pub fn brute_force_eu(ts: &TransitionSystem, a: &NodeSet, b: &NodeSet) -> Result<NodeSet, EvalError> {
    guard(ts, BRUTE_FORCE_LIMIT)?;
    fn search(ts: &TransitionSystem, s: usize, a: &NodeSet, b: &NodeSet, on_path: &mut Vec<bool>) -> bool {
        if a.contains(s) {
            return true;
        }
        if !b.contains(s) {
            return false;
        }
        on_path[s] = true;
        let found = ts
            .successors(s)
            .iter()
            .any(|&t| !on_path[t] && search(ts, t, a, b, on_path));
        on_path[s] = false;
        found
    }
    let n = ts.len();
    let mut on_path = vec![false; n];
    Ok(NodeSet::from_states(n, (0..n).filter(|&s| search(ts, s, a, b, &mut on_path))))
}

/// `EG(a, b)` by searching for a lasso inside `a` whose cycle meets `b`.
///
/// Every such lasso shortens to a simple path `s0 … sk` inside `a` with an
/// edge from `sk` back to some `sj` and a `b`-state among `sj … sk`, so only
/// simple paths are enumerated.
pub fn brute_force_eg(ts: &TransitionSystem, a: &NodeSet, b: &NodeSet) -> Result<NodeSet, EvalError> {
    guard(ts, BRUTE_FORCE_LIMIT)?;
    fn search(ts: &TransitionSystem, a: &NodeSet, b: &NodeSet, path: &mut Vec<usize>) -> bool {
        let last = *path.last().unwrap();
        for &t in ts.successors(last) {
            if let Some(j) = path.iter().position(|&u| u == t) {
                if path[j..].iter().any(|&u| b.contains(u)) {
                    return true;
                }
            } else if a.contains(t) {
                path.push(t);
                let found = search(ts, a, b, path);
                path.pop();
                if found {
                    return true;
                }
            }
        }
        false
    }
    let n = ts.len();
    Ok(NodeSet::from_states(
        n,
        (0..n).filter(|&s| a.contains(s) && search(ts, a, b, &mut vec![s])),
    ))
}

/// `AR(a, b)` as the complement of the `EU` oracle on complements.
pub fn brute_force_ar(ts: &TransitionSystem, a: &NodeSet, b: &NodeSet) -> Result<NodeSet, EvalError> {
    Ok(brute_force_eu(ts, &a.complement(), &b.complement())?.complement())
}

/// `AF(a, b)` as the complement of the `EG` oracle on complements.
pub fn brute_force_af(ts: &TransitionSystem, a: &NodeSet, b: &NodeSet) -> Result<NodeSet, EvalError> {
    Ok(brute_force_eg(ts, &a.complement(), &b.complement())?.complement())
}

/// Truth of a quantifier-free first-order formula in the complex algebra.
pub fn eval_qf(phi: &FoFormula, ts: &TransitionSystem, v: &Valuation) -> Result<bool, EvalError> {
    if !phi.is_quantifier_free() {
        return Err(EvalError::Quantifier);
    }
    eval_fo(phi, ts, v)
}

/// Largest system on which first-order quantifiers are enumerated.
pub const FO_LIMIT: usize = 10;

/// Truth of a first-order formula; quantifiers range over all state sets.
pub fn eval_fo(phi: &FoFormula, ts: &TransitionSystem, v: &Valuation) -> Result<bool, EvalError> {
    let alg = ComplexAlgebra::new(ts);
    let mut ev = Evaluator::new(alg, v);
    fo_rec(phi, ts, v, &mut ev)
}

fn fo_rec(
    phi: &FoFormula,
    ts: &TransitionSystem,
    v: &Valuation,
    ev: &mut Evaluator<'_, ComplexAlgebra<'_>>,
) -> Result<bool, EvalError> {
    Ok(match phi {
        FoFormula::Eq(a, b) => ev.eval(a)? == ev.eval(b)?,
        FoFormula::Not(a) => !fo_rec(a, ts, v, ev)?,
        FoFormula::And(a, b) => fo_rec(a, ts, v, ev)? && fo_rec(b, ts, v, ev)?,
        FoFormula::Or(a, b) => fo_rec(a, ts, v, ev)? || fo_rec(b, ts, v, ev)?,
        FoFormula::Implies(a, b) => !fo_rec(a, ts, v, ev)? || fo_rec(b, ts, v, ev)?,
        FoFormula::Forall(x, body) | FoFormula::Exists(x, body) => {
            guard(ts, FO_LIMIT)?;
            let universal = matches!(phi, FoFormula::Forall(..));
            let n = ts.len();
            for mask in 0..(1u64 << n) {
                let mut inner = v.clone();
                inner.insert(x.clone(), NodeSet::from_mask(n, mask));
                let alg = ComplexAlgebra::new(ts);
                let mut sub = Evaluator::new(alg, &inner);
                let r = fo_rec(body, ts, &inner, &mut sub)?;
                if r != universal {
                    return Ok(!universal);
                }
            }
            universal
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Dialect};
    use crate::kripke::load_system;

    fn parse(s: &str) -> Formula {
        parse_formula(s, Dialect::Binary).unwrap()
    }

    fn two_cycle() -> TransitionSystem {
        load_system("states 2\nroot 0\nedge 0 1\nedge 1 0\ncolor 1 p\n").unwrap()
    }

    fn ev(f: &str, ts: &TransitionSystem) -> NodeSet {
        let f = parse(f);
        let v = Valuation::from_colouring_with(ts, f.vars());
        eval(&f, ts, &v).unwrap()
    }

    #[test]
    fn diamond_top_is_everything() {
        let ts = load_system("states 3\nedge 0 1\nedge 1 2\nedge 2 2\n").unwrap();
        assert!(ev("dia true", &ts).is_full());
    }

    #[test]
    fn until_without_target() {
        let ts = load_system("states 1\nedge 0 0\ncolor 0 q\n").unwrap();
        assert!(ev("EU(p,q)", &ts).is_empty());
    }

    #[test]
    fn fair_globally_on_two_cycle() {
        let ts = two_cycle();
        assert!(ev("EG(true,p)", &ts).is_full());
        assert!(ev("EG(~p,p)", &ts).is_empty());
    }

    #[test]
    fn root_and_successors() {
        let ts = two_cycle();
        assert_eq!(ev("I", &ts), NodeSet::singleton(2, 0));
        let gen = load_system("states 2\nroot 0\nf0 0 1\nf1 0 0\nf0 1 1\nf1 1 1\ncolor 1 p\n").unwrap();
        assert_eq!(ev("X0 p", &gen), NodeSet::full(2));
        assert_eq!(ev("X1 p", &gen), NodeSet::singleton(2, 1));
        let plain = load_system("states 1\nedge 0 0\n").unwrap();
        let v = Valuation::new();
        assert_eq!(eval(&parse("X0 true"), &plain, &v), Err(EvalError::NotBinary));
        assert_eq!(eval(&parse("I"), &plain, &v), Err(EvalError::NoRoot));
        assert_eq!(eval(&parse("p"), &plain, &v), Err(EvalError::Unbound("p".into())));
    }

    #[test]
    fn oracle_trivial_cases() {
        let ts = two_cycle();
        let n = ts.len();
        assert!(brute_force_eu(&ts, &NodeSet::empty(n), &NodeSet::full(n)).unwrap().is_empty());
        assert!(brute_force_eu(&ts, &NodeSet::full(n), &NodeSet::empty(n)).unwrap().is_full());
        let p = NodeSet::singleton(n, 1);
        assert!(brute_force_eg(&ts, &NodeSet::full(n), &p).unwrap().is_full());
        assert!(brute_force_eg(&ts, &p.complement(), &p).unwrap().is_empty());
    }

    #[test]
    fn qf_examples() {
        let ts = two_cycle();
        let v = Valuation::from_colouring_with(&ts, ["q"]);
        let t = FoFormula::eq(Formula::top(), Formula::top());
        assert!(eval_qf(&t, &ts, &v).unwrap());
        let d = FoFormula::eq(parse("dia true"), Formula::top());
        assert!(eval_qf(&d, &ts, &v).unwrap());
        let fix = FoFormula::eq(parse("EU(p,q)"), parse("p | (q & dia EU(p,q))"));
        assert!(eval_qf(&fix, &ts, &v).unwrap());
        let q = FoFormula::exists("x", FoFormula::eq(Formula::var("x"), Formula::top()));
        assert_eq!(eval_qf(&q, &ts, &v), Err(EvalError::Quantifier));
        assert!(eval_fo(&q, &ts, &v).unwrap());
    }

    #[test]
    fn fixpoint_rounds_are_bounded() {
        let ts = load_system("states 4\nedge 0 1\nedge 1 2\nedge 2 3\nedge 3 3\ncolor 3 p\n").unwrap();
        let alg = ComplexAlgebra::new(&ts);
        let a = NodeSet::singleton(4, 3);
        let r = lfp(4, |x| a.union(&alg.dia(x)));
        assert!(r.set.is_full());
        assert!(r.rounds <= 5);
    }
}
