use super::{Ambient, Heart, Status, TableauError, Unravelling};
use crate::formula::{Formula, Kind};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};

/// Result of checking `v ⊩ θ` inside a finite prefix, ordered from worst to best.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Outcome {
    Violated,
    /// Depends on infinite branches or on nodes beyond the prefix.
    Deferred,
    /// An `EU` witness that starts one step later, after the entry was
    /// extinguished at the first node by the child-label rule.
    ViaSuccessor,
    Verified,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruthEntry {
    pub node: usize,
    pub formula: String,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TruthReport {
    pub checked: usize,
    pub verified: usize,
    pub via_successor: usize,
    pub deferred: usize,
    pub violated: usize,
    /// Entries that are violated or verified via a successor.
    pub notes: Vec<TruthEntry>,
}

impl TruthReport {
    pub fn ok(&self) -> bool {
        self.violated == 0
    }
}

struct Prefix<'u, 'a, 'b> {
    u: &'u Unravelling,
    amb: &'b mut Ambient<'a>,
    memo: HashMap<(Formula, usize), Outcome>,
}

impl Prefix<'_, '_, '_> {
    fn member(&mut self, f: &Formula, v: usize) -> Result<bool, TableauError> {
        self.amb.holds(f, self.u.tableau.nodes[v].alpha)
    }

    fn check(&mut self, f: &Formula, v: usize) -> Result<Outcome, TableauError> {
        if let Some(&o) = self.memo.get(&(f.clone(), v)) {
            return Ok(o);
        }
        let o = self.compute(f, v)?;
        self.memo.insert((f.clone(), v), o);
        Ok(o)
    }

    fn check_member(&mut self, f: &Formula, v: usize) -> Result<Outcome, TableauError> {
        if self.member(f, v)? {
            self.check(f, v)
        } else {
            Ok(Outcome::Violated)
        }
    }

    fn compute(&mut self, f: &Formula, v: usize) -> Result<Outcome, TableauError> {
        use Outcome::*;
        let verdict = |b: bool| if b { Verified } else { Violated };
        let children = self.u.tableau.nodes[v].children.clone();
        Ok(match f.kind() {
            Kind::Top => Verified,
            Kind::Bot => Violated,
            Kind::Var(p) => verdict(self.u.colours[v].contains(&**p)),
            Kind::Root => verdict(v == 0),
            Kind::Neg(a) => match a.kind() {
                Kind::Var(p) => verdict(!self.u.colours[v].contains(&**p)),
                Kind::Root => verdict(v != 0),
                _ => Deferred,
            },
            Kind::And(a, b) => self.check_member(a, v)?.min(self.check_member(b, v)?),
            Kind::Or(a, b) => {
                let mut best = Violated;
                for g in [a, b] {
                    if self.member(g, v)? {
                        best = best.max(self.check(g, v)?);
                    }
                }
                best
            }
            Kind::Dia(l) => {
                if children.is_empty() {
                    return Ok(Deferred);
                }
                let mut best = Violated;
                for w in children {
                    if self.member(l, w)? {
                        best = best.max(self.check(l, w)?);
                    }
                }
                best
            }
            Kind::Box(l) => {
                if children.is_empty() {
                    return Ok(Deferred);
                }
                let mut worst = Verified;
                for w in children {
                    worst = worst.min(self.check_member(l, w)?);
                }
                worst
            }
            Kind::X(dir, l) => {
                let nodes = &self.u.tableau.nodes;
                match children.iter().copied().find(|&w| nodes[w].dir == Some(*dir)) {
                    Some(w) => self.check_member(l, w)?,
                    None => Deferred,
                }
            }
            Kind::EU(..) => self.until(f, v)?,
            Kind::EG(..) | Kind::AR(..) | Kind::AF(..) => Deferred,
        })
    }

    /// Follows the `χ ∧ θ`-children from `v` until `φ` is reached.
    fn until(&mut self, theta: &Formula, v: usize) -> Result<Outcome, TableauError> {
        let (_, phi, psi, chi) = theta.eventuality_parts().unwrap();
        let (phi, psi, chi) = (phi.clone(), psi.clone(), chi.clone());
        if self.member(&phi, v)? {
            return self.check(&phi, v);
        }
        let lambda = Formula::and(chi.clone(), theta.clone());
        let mut acc = self.check_member(&psi, v)?;
        let mut cur = v;
        let mut first = true;
        loop {
            let Some(next) = self.lambda_child(cur, &lambda)? else {
                let leaf = self.u.tableau.nodes[cur].children.is_empty();
                return Ok(acc.min(if leaf { Outcome::Deferred } else { Outcome::Violated }));
            };
            acc = acc.min(self.check_member(&chi, next)?);
            if self.member(&phi, next)? {
                return Ok(acc.min(self.check(&phi, next)?));
            }
            if first && !self.open_entry(next, theta) {
                acc = acc.min(Outcome::ViaSuccessor);
            }
            first = false;
            acc = acc.min(self.check_member(&psi, next)?);
            cur = next;
        }
    }

    fn lambda_child(&mut self, v: usize, lambda: &Formula) -> Result<Option<usize>, TableauError> {
        let nodes = &self.u.tableau.nodes;
        let children = nodes[v].children.clone();
        for &w in &children {
            let n = &nodes[w];
            if n.label.as_ref() == Some(lambda) || n.designated.contains(lambda) {
                return Ok(Some(w));
            }
        }
        for w in children {
            if self.member(lambda, w)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    fn open_entry(&self, v: usize, theta: &Formula) -> bool {
        self.u.tableau.nodes[v]
            .beta
            .iter()
            .any(|e| &e.theta == theta && e.status == Status::Active)
    }
}

/// Checks every `θ ∈ Γ0 ∩ α(v)` at every node against the generated prefix.
pub fn verify_truth_prefix(u: &Unravelling, amb: &mut Ambient) -> Result<TruthReport, TableauError> {
    let mut p = Prefix {
        u,
        amb,
        memo: HashMap::new(),
    };
    let mut rep = TruthReport::default();
    let gamma: Vec<Formula> = u.tableau.gamma0.iter().cloned().collect();
    for v in 0..u.tableau.nodes.len() {
        for theta in &gamma {
            if !p.member(theta, v)? {
                continue;
            }
            rep.checked += 1;
            let o = p.check(theta, v)?;
            match o {
                Outcome::Verified => rep.verified += 1,
                Outcome::ViaSuccessor => rep.via_successor += 1,
                Outcome::Deferred => rep.deferred += 1,
                Outcome::Violated => rep.violated += 1,
            }
            if matches!(o, Outcome::Violated | Outcome::ViaSuccessor) {
                rep.notes.push(TruthEntry {
                    node: v,
                    formula: theta.to_string(),
                    outcome: o,
                });
            }
        }
    }
    Ok(rep)
}

/// Status history of one entry index along one branch.
#[derive(Clone, Debug, Serialize)]
pub struct EntryTrace {
    pub leaf: usize,
    /// 1-based index in `β`.
    pub index: usize,
    pub heart: Heart,
    pub theta: String,
    /// Depth at which the index first appears.
    pub birth: usize,
    pub statuses: String,
    /// First depth after which no earlier index is active again.
    pub t_tilde: usize,
    pub active: usize,
    pub rho_at_activation: usize,
    pub rho_final: usize,
    /// `t̃ + 2^{|ρ|}` with `ρ` taken at activation, saturating.
    pub bound_activation: u64,
    pub bound_final: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MonitorReport {
    pub branches: usize,
    pub entries: usize,
    pub eu_extinguished: usize,
    /// `EU` entries still active at the leaf, within the bound.
    pub eu_pending: usize,
    pub af_settled: usize,
    pub af_unsettled: usize,
    pub max_active: usize,
    /// `(leaf, index)` pairs active more often than the bound allows.
    pub bound_violations: Vec<(usize, usize)>,
    /// `(leaf, index)` pairs with two active depths after `t̃` of equal `ρ`-type.
    pub type_violations: Vec<(usize, usize)>,
    /// `(leaf, index)` pairs whose relevance set changed after `t̃`.
    pub rho_violations: Vec<(usize, usize)>,
    pub traces: Vec<EntryTrace>,
}

impl MonitorReport {
    pub fn ok(&self) -> bool {
        self.bound_violations.is_empty() && self.type_violations.is_empty() && self.rho_violations.is_empty()
    }
}

fn bound(t_tilde: usize, rho: usize) -> u64 {
    let pow = if rho >= 63 { u64::MAX } else { 1u64 << rho };
    pow.saturating_add(t_tilde as u64)
}

/// Per-branch status traces for every entry index, with the checks of the
/// argument that no index stays active forever.
pub fn monitor_eventualities(u: &Unravelling, amb: &mut Ambient) -> Result<MonitorReport, TableauError> {
    let t = &u.tableau;
    let mut rep = MonitorReport::default();
    let leaves: Vec<usize> = t.leaves().collect();
    rep.branches = leaves.len();
    for leaf in leaves {
        let branch = t.branch(leaf);
        let depth = branch.len() - 1;
        let len = t.nodes[leaf].beta.len();
        let status = |time: usize, k: usize| t.nodes[branch[time]].beta.get(k).map(|e| e.status);
        let mut last_active_before = 0usize;
        for k in 0..len {
            let birth = (0..=depth).find(|&s| t.nodes[branch[s]].beta.len() > k).unwrap();
            let t_tilde = last_active_before.max(birth);
            let entry = |time: usize| &t.nodes[branch[time]].beta[k];
            let statuses: String = (birth..=depth).map(|s| status(s, k).unwrap().letter()).collect();
            let active_times: Vec<usize> = (birth..=depth)
                .filter(|&s| status(s, k) == Some(Status::Active))
                .collect();
            if let Some(&last) = active_times.last() {
                last_active_before = last_active_before.max(last + 1);
            }
            let heart = entry(birth).heart();
            let rho_act = entry(birth).rho.len();
            let rho_fin = entry(depth).rho.len();
            let bound_activation = bound(t_tilde, rho_act);
            let tr = EntryTrace {
                leaf,
                index: k + 1,
                heart,
                theta: entry(birth).theta.to_string(),
                birth,
                statuses,
                t_tilde,
                active: active_times.len(),
                rho_at_activation: rho_act,
                rho_final: rho_fin,
                bound_activation,
                bound_final: bound(t_tilde, rho_fin),
            };
            rep.entries += 1;
            rep.max_active = rep.max_active.max(tr.active);
            let last = status(depth, k).unwrap();
            match heart {
                Heart::EU if last == Status::Extinguished => rep.eu_extinguished += 1,
                Heart::EU => rep.eu_pending += 1,
                Heart::AF if last == Status::Active => rep.af_unsettled += 1,
                Heart::AF => rep.af_settled += 1,
            }
            if tr.active as u64 > bound_activation {
                rep.bound_violations.push((leaf, k + 1));
            }
            if t_tilde <= depth {
                let rho = entry(t_tilde).rho.clone();
                if (t_tilde..=depth).any(|s| *entry(s).rho != *rho) {
                    rep.rho_violations.push((leaf, k + 1));
                }
                let mut seen = BTreeSet::new();
                for &s in active_times.iter().filter(|&&s| s >= t_tilde) {
                    let x = t.nodes[branch[s]].alpha;
                    let mut ty = Vec::with_capacity(rho.len());
                    for g in rho.iter() {
                        ty.push(amb.holds(g, x)?);
                    }
                    if !seen.insert(ty) {
                        rep.type_violations.push((leaf, k + 1));
                        break;
                    }
                }
            }
            rep.traces.push(tr);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::super::{unravel, Ambient, UnravelOptions};
    use super::*;
    use crate::eval::Valuation;
    use crate::formula::{parse_formula, Dialect};
    use crate::kripke::load_system;

    fn parse(s: &str) -> Formula {
        parse_formula(s, Dialect::Binary).unwrap()
    }

    #[test]
    fn until_witness_on_the_two_cycle() {
        let ts = load_system("states 2\nedge 0 1\nedge 1 0\ncolor 1 p\ncolor 0 q\n").unwrap();
        let v = Valuation::from_colouring(&ts);
        let mut amb = Ambient::new(&ts, &v);
        let u = unravel(&parse("EU(p,q)"), &mut amb, &UnravelOptions::new(6, Dialect::Plain)).unwrap();
        assert_eq!(u.rounds, 6);
        let rep = verify_truth_prefix(&u, &mut amb).unwrap();
        assert!(rep.ok(), "{rep:?}");
        let eu = parse("EU(p,q)");
        let mut p = Prefix {
            u: &u,
            amb: &mut amb,
            memo: HashMap::new(),
        };
        assert_eq!(p.check(&eu, 0).unwrap(), Outcome::Verified);
        let mon = monitor_eventualities(&u, &mut amb).unwrap();
        assert!(mon.ok(), "{mon:?}");
        assert!(mon.traces.iter().filter(|t| t.heart == Heart::EU).all(|t| t.active as u64 <= t.bound_activation));
    }

    #[test]
    fn literals_match_colours_and_top_eventuality_dies() {
        let ts = load_system("states 3\nedge 0 1\nedge 1 2\nedge 2 0\nedge 2 2\ncolor 0 p\ncolor 2 q\n").unwrap();
        let v = Valuation::from_colouring(&ts);
        let mut amb = Ambient::new(&ts, &v);
        let u = unravel(&parse("p & dia ~p & EG(true, q)"), &mut amb, &UnravelOptions::new(4, Dialect::Plain)).unwrap();
        let rep = verify_truth_prefix(&u, &mut amb).unwrap();
        assert!(rep.ok(), "{rep:?}");
        assert!(rep.deferred > 0);
        let mon = monitor_eventualities(&u, &mut amb).unwrap();
        assert!(mon.ok());
        let top = parse("EU(true,true,true)").to_string();
        for tr in mon.traces.iter().filter(|t| t.theta == top) {
            assert!(tr.statuses.chars().all(|c| c == 'e'), "{tr:?}");
        }
    }

    #[test]
    fn frozen_forever_when_psi_everywhere() {
        let ts = load_system("states 2\nedge 0 1\nedge 1 0\ncolor 0 q\ncolor 1 q\n").unwrap();
        let v = Valuation::from_colouring_with(&ts, ["p"]);
        let mut amb = Ambient::new(&ts, &v);
        let u = unravel(&parse("AF(p,q)"), &mut amb, &UnravelOptions::new(5, Dialect::Plain)).unwrap();
        let mon = monitor_eventualities(&u, &mut amb).unwrap();
        let af = parse("AF(p,q)").to_string();
        let traces: Vec<_> = mon.traces.iter().filter(|t| t.theta == af && t.birth == 0).collect();
        assert!(!traces.is_empty());
        for tr in traces {
            assert!(tr.statuses.starts_with('a'));
            assert!(tr.statuses[1..].chars().all(|c| c == 'f'), "{tr:?}");
        }
    }

    #[test]
    fn rooted_wrapper_marks_only_the_root() {
        let ts = load_system("states 3\nroot 0\nedge 0 1\nedge 1 2\nedge 2 1\ncolor 2 p\n").unwrap();
        let v = Valuation::from_colouring(&ts);
        let mut amb = Ambient::new(&ts, &v);
        let u = unravel(&parse("p"), &mut amb, &UnravelOptions::new(4, Dialect::Rooted)).unwrap();
        let root = Formula::root();
        for (i, node) in u.tableau.nodes.iter().enumerate() {
            assert_eq!(amb.holds(&root, node.alpha).unwrap(), i == 0);
        }
        assert!(verify_truth_prefix(&u, &mut amb).unwrap().ok());
    }
}
