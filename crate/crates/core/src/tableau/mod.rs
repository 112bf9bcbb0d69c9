//! Tree models built from well-formed partial tableaux over a finite
//! complex algebra.
//!
//! Ultrafilters of a finite power-set algebra are its states, so "`θ` lies
//! in `x`" is evaluated as membership of state `x` in the extension of `θ`,
//! and every existence step of the construction becomes a search for the
//! lowest-index state.

mod trace;
mod verify;

pub use trace::{root_wrapper, unravel, StopReason, UnravelOptions, Unravelling};
pub use verify::{
    monitor_eventualities, verify_truth_prefix, EntryTrace, MonitorReport, Outcome, TruthEntry, TruthReport,
};

use crate::eval::{ComplexAlgebra, EvalError, Evaluator, NodeSet, Valuation};
use crate::formula::{characteristic_formula_by, fischer_ladner_closure, nnf, ClosureSet, Dialect, Formula, Heart, Kind};
use crate::kripke::TransitionSystem;
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableauError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("the formula holds at no state of the model")]
    Unsatisfiable,
    #[error("{0}")]
    Dialect(String),
    #[error("invariant failure at node {node}: {detail}")]
    Invariant { node: usize, detail: String },
}

/// A finite complex algebra with a valuation and a shared evaluation cache.
pub struct Ambient<'a> {
    ts: &'a TransitionSystem,
    ev: Evaluator<'a, ComplexAlgebra<'a>>,
}

impl<'a> Ambient<'a> {
    pub fn new(ts: &'a TransitionSystem, v: &'a Valuation) -> Self {
        Ambient {
            ts,
            ev: Evaluator::new(ComplexAlgebra::new(ts), v),
        }
    }

    pub fn system(&self) -> &'a TransitionSystem {
        self.ts
    }

    pub fn extension(&mut self, f: &Formula) -> Result<NodeSet, TableauError> {
        Ok(self.ev.eval(f)?)
    }

    /// Whether `f` belongs to the ultrafilter `x`.
    pub fn holds(&mut self, f: &Formula, x: usize) -> Result<bool, TableauError> {
        Ok(self.ev.holds(f, x)?)
    }

    /// `κ(x, ρ)`.
    pub fn kappa(&mut self, x: usize, rho: &BTreeSet<Formula>) -> Result<Formula, TableauError> {
        let mut truth = HashMap::new();
        for g in rho {
            truth.insert(g.clone(), self.holds(g, x)?);
        }
        Ok(characteristic_formula_by(rho, |g| truth[g]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    #[serde(rename = "a")]
    Active,
    #[serde(rename = "f")]
    Frozen,
    #[serde(rename = "e")]
    Extinguished,
}

impl Status {
    pub fn letter(self) -> char {
        match self {
            Status::Active => 'a',
            Status::Frozen => 'f',
            Status::Extinguished => 'e',
        }
    }
}

/// One letter `(θ, σ, ρ, χ′)` of a `β` word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub theta: Formula,
    pub status: Status,
    pub rho: Arc<BTreeSet<Formula>>,
    pub chi_prime: Formula,
}

impl Entry {
    /// A fresh active entry with context `χ`.
    pub fn new(theta: Formula, rho: Arc<BTreeSet<Formula>>) -> Entry {
        let chi = parts(&theta).3;
        Entry {
            theta,
            status: Status::Active,
            rho,
            chi_prime: chi,
        }
    }

    pub fn heart(&self) -> Heart {
        parts(&self.theta).0
    }

    pub fn phi(&self) -> Formula {
        parts(&self.theta).1
    }

    pub fn psi(&self) -> Formula {
        parts(&self.theta).2
    }

    pub fn chi(&self) -> Formula {
        parts(&self.theta).3
    }

    /// `♥(φ, ψ, χ′)`.
    pub fn contextual(&self) -> Formula {
        let (h, p, q, _) = parts(&self.theta);
        h.build(p, q, self.chi_prime.clone())
    }

    /// `χ ∧ θ`, the argument of the unfolding diamond of an `EU` entry.
    pub fn unfolding(&self) -> Formula {
        Formula::and(self.chi(), self.theta.clone())
    }
}

fn parts(theta: &Formula) -> (Heart, Formula, Formula, Formula) {
    let (h, p, q, r) = theta.eventuality_parts().expect("tableau entries are eventualities");
    (h, p.clone(), q.clone(), r.clone())
}

/// The jump made when a leaf was expanded.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub x_v: usize,
    /// Active index, 0-based.
    pub m: Option<usize>,
    pub gamma: Option<Formula>,
}

#[derive(Clone, Debug)]
pub struct TableauNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
    pub alpha: usize,
    pub beta: Vec<Entry>,
    /// `λ` of a child `w_λ`.
    pub label: Option<Formula>,
    /// Direction of a binary child.
    pub dir: Option<bool>,
    /// The `λ` for which a binary child is designated.
    pub designated: Vec<Formula>,
    pub expansion: Option<Expansion>,
}

/// A partial tableau `(T, α, β)` for `Γ0`.
#[derive(Clone, Debug)]
pub struct PartialTableau {
    pub dialect: Dialect,
    /// The seed, in negation normal form.
    pub phi0: Formula,
    pub gamma0: ClosureSet,
    gamma_set: Arc<BTreeSet<Formula>>,
    pub nodes: Vec<TableauNode>,
}

impl PartialTableau {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn gamma_set(&self) -> &Arc<BTreeSet<Formula>> {
        &self.gamma_set
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&v| self.nodes[v].children.is_empty())
    }

    /// Nodes from the root to `v`.
    pub fn branch(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while let Some(p) = self.nodes[v].parent {
            out.push(p);
            v = p;
        }
        out.reverse();
        out
    }

    fn binary(&self) -> bool {
        self.dialect == Dialect::Binary
    }

    fn diamonds(&self) -> impl Iterator<Item = (&Formula, &Formula)> + '_ {
        self.gamma0.iter().filter_map(|f| match f.kind() {
            Kind::Dia(l) => Some((f, l)),
            _ => None,
        })
    }

    fn eventualities(&self) -> impl Iterator<Item = &Formula> + '_ {
        self.gamma0.iter().filter(|f| f.is_eventuality())
    }
}

fn check_dialect(phi: &Formula, ts: &TransitionSystem, dialect: Dialect) -> Result<(), TableauError> {
    if !dialect.allows(phi.dialect()) {
        return Err(TableauError::Dialect(format!(
            "formula needs the {} dialect, got {}",
            phi.dialect().name(),
            dialect.name()
        )));
    }
    if dialect == Dialect::Binary && !ts.is_binary() {
        return Err(TableauError::Dialect("binary unravelling needs a binary system".into()));
    }
    Ok(())
}

/// Lowest state satisfying `phi`.
pub fn sat_in(phi: &Formula, amb: &mut Ambient) -> Result<Option<usize>, TableauError> {
    Ok(amb.extension(phi)?.first())
}

/// Lowest `x′ ∼ρ x` with `♥(φ, ψ, χ′ ∧ ¬κ(x, ρ)) ∈ x′`, together with
/// `κ(x, ρ)`. `contextual` is `♥(φ, ψ, χ′)`.
pub fn jump(
    amb: &mut Ambient,
    x: usize,
    contextual: &Formula,
    rho: &BTreeSet<Formula>,
) -> Result<Option<(usize, Formula)>, TableauError> {
    let (h, p, q, r) = parts(contextual);
    let gamma = amb.kappa(x, rho)?;
    let target = h.build(p, q, Formula::and(r, Formula::neg(gamma.clone())));
    let found = amb.extension(&gamma)?.intersection(&amb.extension(&target)?).first();
    Ok(found.map(|x2| (x2, gamma)))
}

/// The one-node tableau at the lowest state satisfying `phi0`.
pub fn init_tableau(phi0: &Formula, amb: &mut Ambient, dialect: Dialect) -> Result<PartialTableau, TableauError> {
    check_dialect(phi0, amb.system(), dialect)?;
    let seed = nnf(phi0);
    let gamma0 = fischer_ladner_closure([&seed], dialect);
    let x0 = sat_in(&seed, amb)?.ok_or(TableauError::Unsatisfiable)?;
    let gamma_set = Arc::new(gamma0.members().clone());
    let mut beta = Vec::new();
    for theta in gamma0.iter().filter(|f| f.is_eventuality()) {
        if amb.holds(theta, x0)? && !amb.holds(&parts(theta).1, x0)? {
            beta.push(Entry::new(theta.clone(), gamma_set.clone()));
        }
    }
    Ok(PartialTableau {
        dialect,
        phi0: seed,
        gamma0,
        gamma_set,
        nodes: vec![TableauNode {
            parent: None,
            children: Vec::new(),
            depth: 0,
            alpha: x0,
            beta,
            label: None,
            dir: None,
            designated: Vec::new(),
            expansion: None,
        }],
    })
}

/// A failed well-formedness condition at a node and 1-based index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub node: usize,
    pub index: usize,
    pub condition: char,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s{},{},{})", self.node, self.index, self.condition)
    }
}

/// All violations of conditions (a)–(g).
pub fn well_formed(t: &PartialTableau, amb: &mut Ambient) -> Result<Vec<Violation>, TableauError> {
    well_formed_at(t, amb, 0..t.nodes.len())
}

fn well_formed_at(
    t: &PartialTableau,
    amb: &mut Ambient,
    nodes: impl IntoIterator<Item = usize>,
) -> Result<Vec<Violation>, TableauError> {
    let mut out = Vec::new();
    for v in nodes {
        let node = &t.nodes[v];
        let x = node.alpha;
        let mut bad = |index: usize, condition: char| out.push(Violation { node: v, index, condition });
        if let Some(p) = node.parent {
            let above = &t.nodes[p].beta;
            if above.len() > node.beta.len() {
                bad(above.len(), 'a');
            }
            for (k, (e1, e2)) in above.iter().zip(&node.beta).enumerate() {
                if e1.theta != e2.theta {
                    bad(k + 1, 'a');
                }
            }
        }
        for (k, e) in node.beta.iter().enumerate() {
            let i = k + 1;
            if amb.holds(&e.phi(), x)? && e.status != Status::Extinguished {
                bad(i, 'b');
            }
            if !t.gamma_set.is_subset(&e.rho) {
                bad(i, 'c');
            }
            if e.heart() == Heart::EU && e.status == Status::Frozen {
                bad(i, 'd');
            }
            if !amb.extension(&e.chi_prime)?.is_subset(&amb.extension(&e.chi())?) {
                bad(i, 'e');
            }
            if node.beta[..k].iter().any(|earlier| !e.rho.contains(&earlier.contextual())) {
                bad(i, 'f');
            }
            if e.status != Status::Extinguished && !amb.holds(&e.contextual(), x)? {
                bad(i, 'g');
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub expanded: usize,
    /// The node budget stopped the round before every leaf was expanded.
    pub truncated: bool,
}

struct ChildPlan {
    label: Option<Formula>,
    dir: Option<bool>,
    alpha: usize,
    designated: Vec<Formula>,
}

/// Data of the active index shared by all children of a leaf.
struct Active {
    m: usize,
    /// `χ′_m ∧ ¬γ_v`.
    strengthened: Formula,
    /// `♥_m(φ_m, ψ_m, χ′_m ∧ ¬γ_v)`.
    target: Formula,
}

/// Expands every leaf once, then checks well-formedness of the new nodes.
pub fn one_step_unravel(t: &mut PartialTableau, amb: &mut Ambient, budget: usize) -> Result<StepOutcome, TableauError> {
    let leaves: Vec<usize> = t.leaves().collect();
    let first_new = t.nodes.len();
    let mut expanded = 0;
    let mut truncated = false;
    for v in leaves {
        let (expansion, active, plans) = plan_leaf(t, amb, v)?;
        if t.nodes.len() + plans.len() > budget {
            truncated = true;
            break;
        }
        for plan in plans {
            let beta = update_beta(t, amb, v, active.as_ref(), &plan)?;
            let w = t.nodes.len();
            t.nodes.push(TableauNode {
                parent: Some(v),
                children: Vec::new(),
                depth: t.nodes[v].depth + 1,
                alpha: plan.alpha,
                beta,
                label: plan.label,
                dir: plan.dir,
                designated: plan.designated,
                expansion: None,
            });
            t.nodes[v].children.push(w);
        }
        t.nodes[v].expansion = Some(expansion);
        expanded += 1;
    }
    let fresh = first_new..t.nodes.len();
    let violations = well_formed_at(t, amb, fresh)?;
    if let Some(first) = violations.first() {
        let detail = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        return Err(TableauError::Invariant { node: first.node, detail });
    }
    Ok(StepOutcome { expanded, truncated })
}

fn invariant(node: usize, detail: impl Into<String>) -> TableauError {
    TableauError::Invariant {
        node,
        detail: detail.into(),
    }
}

fn plan_leaf(
    t: &PartialTableau,
    amb: &mut Ambient,
    v: usize,
) -> Result<(Expansion, Option<Active>, Vec<ChildPlan>), TableauError> {
    let node = &t.nodes[v];
    let a = node.alpha;
    let m = node.beta.iter().position(|e| e.status == Status::Active);
    let (x_v, gamma, active) = match m {
        None => (a, None, None),
        Some(m) => {
            let e = &node.beta[m];
            let (x, gamma) = jump(amb, a, &e.contextual(), &e.rho)?
                .ok_or_else(|| invariant(v, format!("no jump target for {}", e.theta)))?;
            let strengthened = Formula::and(e.chi_prime.clone(), Formula::neg(gamma.clone()));
            let target = e.heart().build(e.phi(), e.psi(), strengthened.clone());
            let new_ctx = amb.extension(&strengthened)?;
            if !new_ctx.is_subset(&amb.extension(&e.chi_prime)?) || new_ctx.intersects(&amb.extension(&gamma)?) {
                return Err(invariant(v, "context did not strengthen"));
            }
            (x, Some(gamma), Some(Active { m, strengthened, target }))
        }
    };
    let mut lambdas = Vec::new();
    for (dia, l) in t.diamonds() {
        if amb.holds(dia, a)? {
            lambdas.push(l.clone());
        }
    }
    let eu_payload = match &active {
        Some(act) if node.beta[act.m].heart() == Heart::EU => Some((
            node.beta[act.m].unfolding(),
            Formula::and(act.strengthened.clone(), act.target.clone()),
        )),
        _ => None,
    };
    let requirement = |l: &Formula| match &eu_payload {
        Some((lm, req)) if lm == l => req.clone(),
        _ => l.clone(),
    };
    let ts = amb.system();
    let mut plans = Vec::new();
    if t.binary() {
        let ys = [ts.step(false, x_v), ts.step(true, x_v)];
        let [Some(y0), Some(y1)] = ys else {
            return Err(invariant(v, "state without binary successors"));
        };
        let mut designated = [Vec::new(), Vec::new()];
        for l in &lambdas {
            let req = requirement(l);
            let i = if amb.holds(&req, y0)? {
                0
            } else if amb.holds(&req, y1)? {
                1
            } else {
                return Err(invariant(v, format!("no designated successor for {l}")));
            };
            designated[i].push(l.clone());
        }
        for (i, (y, d)) in [y0, y1].into_iter().zip(designated).enumerate() {
            plans.push(ChildPlan {
                label: None,
                dir: Some(i == 1),
                alpha: y,
                designated: d,
            });
        }
    } else {
        for l in lambdas {
            let req = requirement(&l);
            let mut found = None;
            for &y in ts.successors(x_v) {
                if amb.holds(&req, y)? {
                    found = Some(y);
                    break;
                }
            }
            let y = found.ok_or_else(|| invariant(v, format!("no successor for {l}")))?;
            plans.push(ChildPlan {
                label: Some(l.clone()),
                dir: None,
                alpha: y,
                designated: vec![l],
            });
        }
    }
    if plans.is_empty() {
        return Err(invariant(v, "no children"));
    }
    Ok((Expansion { x_v, m, gamma }, active, plans))
}

fn update_beta(
    t: &PartialTableau,
    amb: &mut Ambient,
    v: usize,
    active: Option<&Active>,
    plan: &ChildPlan,
) -> Result<Vec<Entry>, TableauError> {
    let old = &t.nodes[v].beta;
    let y = plan.alpha;
    let m = active.map(|a| a.m);
    let before_m = m.unwrap_or(old.len());

    // (1)
    let mut union: BTreeSet<Formula> = (*t.gamma_set).clone();
    for e in old {
        union.extend(e.rho.iter().cloned());
    }
    for e in &old[..before_m] {
        union.insert(e.contextual());
    }
    let rho_new = Arc::new(union);
    let mut beta = old.clone();
    for theta in t.eventualities() {
        let open = old.iter().any(|e| &e.theta == theta && e.status != Status::Extinguished);
        if !open && amb.holds(theta, y)? {
            beta.push(Entry::new(theta.clone(), rho_new.clone()));
        }
    }

    if let Some(act) = active {
        // (2)
        for (k, e) in beta.iter_mut().enumerate() {
            if k == act.m {
                e.chi_prime = act.strengthened.clone();
            } else if k > act.m {
                e.chi_prime = e.chi();
            }
        }
        // (3)
        let mut shared: HashMap<*const BTreeSet<Formula>, Arc<BTreeSet<Formula>>> = HashMap::new();
        for e in &mut beta[act.m + 1..] {
            let key = Arc::as_ptr(&e.rho);
            let updated = shared.entry(key).or_insert_with(|| {
                let mut s = (*e.rho).clone();
                s.insert(act.target.clone());
                Arc::new(s)
            });
            e.rho = updated.clone();
        }
    }

    // (4)
    for e in &mut beta {
        if amb.holds(&e.phi(), y)? {
            e.status = Status::Extinguished;
        }
    }

    // (5)
    let mut reappend = Vec::new();
    for e in &mut beta {
        if e.heart() == Heart::EU && !plan.designated.contains(&e.unfolding()) {
            let changed = e.status != Status::Extinguished;
            e.status = Status::Extinguished;
            if t.binary() && changed && amb.holds(&e.theta, y)? && !amb.holds(&e.phi(), y)? {
                reappend.push(e.theta.clone());
            }
        }
    }
    if !reappend.is_empty() {
        let mut rho5 = (*rho_new).clone();
        if let Some(act) = active {
            rho5.insert(act.target.clone());
        }
        let rho5 = Arc::new(rho5);
        for theta in reappend {
            beta.push(Entry::new(theta, rho5.clone()));
        }
    }

    // (6)
    for e in &mut beta {
        if e.heart() == Heart::AF && e.status == Status::Active && amb.holds(&e.psi(), y)? {
            e.status = Status::Frozen;
        }
    }

    // (7)
    for e in beta.iter_mut().take(before_m) {
        if e.heart() == Heart::AF
            && e.status == Status::Frozen
            && !amb.holds(&e.phi(), y)?
            && !amb.holds(&e.psi(), y)?
        {
            e.status = Status::Active;
        }
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::kripke::load_system;

    const TWO_CYCLE: &str = "states 2\nedge 0 1\nedge 1 0\ncolor 1 p\n";

    fn parse(s: &str) -> Formula {
        parse_formula(s, Dialect::Binary).unwrap()
    }

    fn setup(text: &str) -> (TransitionSystem, Valuation) {
        let ts = load_system(text).unwrap();
        let v = Valuation::from_colouring_with(&ts, ["p", "q"]);
        (ts, v)
    }

    #[test]
    fn sat_in_examples() {
        let (ts, v) = setup(TWO_CYCLE);
        let mut amb = Ambient::new(&ts, &v);
        assert_eq!(sat_in(&parse("true"), &mut amb).unwrap(), Some(0));
        assert_eq!(sat_in(&parse("false"), &mut amb).unwrap(), None);
        assert_eq!(sat_in(&parse("EG(true,p)"), &mut amb).unwrap(), Some(0));
        assert_eq!(sat_in(&parse("p"), &mut amb).unwrap(), Some(1));
    }

    #[test]
    fn init_filters_satisfied_eventualities() {
        let (ts, v) = setup("states 3\nedge 0 1\nedge 1 2\nedge 2 2\ncolor 2 p\n");
        let mut amb = Ambient::new(&ts, &v);
        let t = init_tableau(&parse("p"), &mut amb, Dialect::Plain).unwrap();
        assert_eq!(t.nodes[0].alpha, 2);
        assert!(t.nodes[0].beta.is_empty());
        assert!(well_formed(&t, &mut amb).unwrap().is_empty());

        let (ts, v) = setup("states 2\nedge 0 1\nedge 1 1\ncolor 1 p\ncolor 0 q\n");
        let mut amb = Ambient::new(&ts, &v);
        let t = init_tableau(&parse("EU(p,q)"), &mut amb, Dialect::Plain).unwrap();
        let beta = &t.nodes[0].beta;
        assert_eq!(t.nodes[0].alpha, 0);
        assert_eq!(beta.len(), 1);
        assert_eq!(beta[0].theta, parse("EU(p,q)"));
        assert_eq!(beta[0].status, Status::Active);
        assert_eq!(*beta[0].rho, *t.gamma_set);
        assert!(beta[0].chi_prime.is_top());
        assert!(well_formed(&t, &mut amb).unwrap().is_empty());
    }

    #[test]
    fn hand_built_violations() {
        let (ts, v) = setup("states 2\nedge 0 1\nedge 1 1\ncolor 1 p\ncolor 0 q\n");
        let mut amb = Ambient::new(&ts, &v);
        let mut t = init_tableau(&parse("EU(p,q)"), &mut amb, Dialect::Plain).unwrap();
        t.nodes[0].beta[0].status = Status::Frozen;
        let got = well_formed(&t, &mut amb).unwrap();
        assert_eq!(got, vec![Violation { node: 0, index: 1, condition: 'd' }]);
        assert_eq!(got[0].to_string(), "(s0,1,d)");
        t.nodes[0].beta[0].status = Status::Active;
        t.nodes[0].beta[0].rho = Arc::new(BTreeSet::new());
        let got = well_formed(&t, &mut amb).unwrap();
        assert_eq!(got, vec![Violation { node: 0, index: 1, condition: 'c' }]);
    }

    #[test]
    fn jump_on_the_two_cycle() {
        let (ts, v) = setup(TWO_CYCLE);
        let mut amb = Ambient::new(&ts, &v);
        let t = init_tableau(&parse("EU(p,true)"), &mut amb, Dialect::Plain).unwrap();
        let e = &t.nodes[0].beta[0];
        assert_eq!(t.nodes[0].alpha, 0);
        let (x, gamma) = jump(&mut amb, 0, &e.contextual(), &e.rho).unwrap().unwrap();
        assert_eq!(x, 0);
        assert_eq!(amb.extension(&gamma).unwrap(), NodeSet::singleton(2, 0));
        let single = load_system("states 1\nedge 0 0\n").unwrap();
        let v1 = Valuation::from_colouring_with(&single, ["p"]);
        let mut amb1 = Ambient::new(&single, &v1);
        let rho: BTreeSet<Formula> = [parse("p")].into_iter().collect();
        let (x, _) = jump(&mut amb1, 0, &parse("EU(true,true,true)"), &rho).unwrap().unwrap();
        assert_eq!(x, 0);
    }

    #[test]
    fn only_the_trivial_diamond_gives_one_child() {
        let (ts, v) = setup("states 1\nedge 0 0\n");
        let mut amb = Ambient::new(&ts, &v);
        let mut t = init_tableau(&parse("true"), &mut amb, Dialect::Plain).unwrap();
        one_step_unravel(&mut t, &mut amb, 100).unwrap();
        assert_eq!(t.nodes[0].children.len(), 1);
        assert_eq!(t.nodes[1].label, Some(parse("true & EU(true,true,true)")));
    }

    #[test]
    fn extinguish_and_freeze_rules() {
        let (ts, v) = setup("states 2\nedge 0 1\nedge 1 1\ncolor 1 p\ncolor 0 q\n");
        let mut amb = Ambient::new(&ts, &v);
        let mut t = init_tableau(&parse("EU(p,q)"), &mut amb, Dialect::Plain).unwrap();
        one_step_unravel(&mut t, &mut amb, 100).unwrap();
        for &w in &t.nodes[0].children {
            assert_eq!(t.nodes[w].beta[0].status, Status::Extinguished);
        }

        let (ts, v) = setup("states 2\nedge 0 1\nedge 1 1\ncolor 1 q\n");
        let mut amb = Ambient::new(&ts, &v);
        let mut t = init_tableau(&parse("AF(p,q)"), &mut amb, Dialect::Plain).unwrap();
        assert_eq!(t.nodes[0].beta[0].status, Status::Active);
        one_step_unravel(&mut t, &mut amb, 100).unwrap();
        let w = t.nodes[0].children[0];
        assert_eq!(t.nodes[w].alpha, 1);
        assert_eq!(t.nodes[w].beta[0].status, Status::Frozen);
    }

    #[test]
    fn binary_children() {
        let ts = load_system("states 1\nroot 0\nf0 0 0\nf1 0 0\n").unwrap();
        let v = Valuation::from_colouring_with(&ts, ["p"]);
        let mut amb = Ambient::new(&ts, &v);
        let mut t = init_tableau(&parse("X0 ~p & EU(~p, true)"), &mut amb, Dialect::Binary).unwrap();
        for _ in 0..3 {
            one_step_unravel(&mut t, &mut amb, 1000).unwrap();
        }
        for node in &t.nodes {
            assert!(node.children.is_empty() || node.children.len() == 2);
        }
        assert_eq!(t.nodes.len(), 15);
        let d: Vec<_> = t.nodes[0].children.iter().map(|&c| t.nodes[c].designated.len()).collect();
        assert_eq!(d.iter().sum::<usize>(), t.diamonds().filter(|(f, _)| amb.holds(f, 0).unwrap()).count());
    }
}
