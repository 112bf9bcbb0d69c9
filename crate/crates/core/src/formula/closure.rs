use super::{Dialect, Formula, Kind};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// The rule that first put a formula into a closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClosureRule {
    Seed,
    /// `EU(⊤,⊤,⊤)` is always present.
    TopEventuality,
    Subformula,
    /// `EG(φ,ψ)` adds `dia EU(ψ & EG(φ,ψ), φ)`.
    EgUnfold,
    /// `AR(φ,ψ)` adds `box AR(φ,ψ)`.
    ArUnfold,
    /// `EU(φ,ψ,χ)` adds `dia (χ & EU(φ,ψ,χ))`.
    EuUnfold,
    /// `AF(φ,ψ,χ)` adds `box AR(ψ | χ, φ)`.
    AfUnfold,
    /// Binary dialect: `dia φ` adds `X0 φ` and `X1 φ`.
    Successor,
}

impl ClosureRule {
    pub fn name(self) -> &'static str {
        match self {
            ClosureRule::Seed => "seed",
            ClosureRule::TopEventuality => "top-eventuality",
            ClosureRule::Subformula => "subformula",
            ClosureRule::EgUnfold => "EG-unfold",
            ClosureRule::ArUnfold => "AR-unfold",
            ClosureRule::EuUnfold => "EU-unfold",
            ClosureRule::AfUnfold => "AF-unfold",
            ClosureRule::Successor => "successor",
        }
    }
}

/// A closed formula set with the rule that introduced each member.
#[derive(Clone, Debug)]
pub struct ClosureSet {
    pub dialect: Dialect,
    members: BTreeSet<Formula>,
    provenance: BTreeMap<Formula, ClosureRule>,
    seed_subformulas: usize,
}

impl ClosureSet {
    pub fn members(&self) -> &BTreeSet<Formula> {
        &self.members
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.members.contains(f)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn rule(&self, f: &Formula) -> Option<ClosureRule> {
        self.provenance.get(f).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.members.iter()
    }

    /// Upper bound on the closure size computed from the seed alone.
    ///
    /// Each subformula of the seed triggers at most five unfolding
    /// formulas, the top eventuality contributes four more, and in the
    /// binary dialect every `dia` member adds two successor formulas.
    pub fn size_bound(&self) -> usize {
        let base = 6 * self.seed_subformulas + 4;
        match self.dialect {
            Dialect::Binary => 3 * base,
            _ => base,
        }
    }
}

/// Smallest closed superset of `seed` for the given dialect.
pub fn fischer_ladner_closure<'a, I>(seed: I, dialect: Dialect) -> ClosureSet
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut provenance = BTreeMap::new();
    let mut work: VecDeque<(Formula, ClosureRule)> = VecDeque::new();
    let mut seed_subs = BTreeSet::new();
    for f in seed {
        seed_subs.extend(f.subformulas());
        work.push_back((f.clone(), ClosureRule::Seed));
    }
    let top = Formula::top();
    work.push_back((Formula::eu3(top.clone(), top.clone(), top), ClosureRule::TopEventuality));
    while let Some((f, rule)) = work.pop_front() {
        if provenance.contains_key(&f) {
            continue;
        }
        for c in f.children() {
            work.push_back((c.clone(), ClosureRule::Subformula));
        }
        match f.kind() {
            Kind::EG(a, b) => work.push_back((
                Formula::dia(Formula::eu(Formula::and(b.clone(), f.clone()), a.clone())),
                ClosureRule::EgUnfold,
            )),
            Kind::AR(..) => work.push_back((Formula::boxf(f.clone()), ClosureRule::ArUnfold)),
            Kind::EU(_, _, c) => work.push_back((
                Formula::dia(Formula::and(c.clone(), f.clone())),
                ClosureRule::EuUnfold,
            )),
            Kind::AF(a, b, c) => work.push_back((
                Formula::boxf(Formula::ar(Formula::or(b.clone(), c.clone()), a.clone())),
                ClosureRule::AfUnfold,
            )),
            Kind::Dia(a) if dialect == Dialect::Binary => {
                work.push_back((Formula::x0(a.clone()), ClosureRule::Successor));
                work.push_back((Formula::x1(a.clone()), ClosureRule::Successor));
            }
            _ => {}
        }
        provenance.insert(f, rule);
    }
    ClosureSet {
        dialect,
        members: provenance.keys().cloned().collect(),
        provenance,
        seed_subformulas: seed_subs.len(),
    }
}

/// The `EU` and `AF` members of a closure.
pub fn eventualities(gamma: &ClosureSet) -> BTreeSet<Formula> {
    gamma.iter().filter(|f| f.is_eventuality()).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn parse(s: &str) -> Formula {
        parse_formula(s, Dialect::Binary).unwrap()
    }

    fn close(s: &str) -> ClosureSet {
        fischer_ladner_closure([&parse(s)], Dialect::Plain)
    }

    #[test]
    fn eg_unfolding_member() {
        let c = close("EG(p,q)");
        let target = parse("dia EU(q & EG(p,q), p, true)");
        assert!(c.contains(&target));
        assert_eq!(c.rule(&target), Some(ClosureRule::EgUnfold));
    }

    #[test]
    fn empty_seed_matches_top_seed() {
        let empty = fischer_ladner_closure([], Dialect::Plain);
        let top = close("true");
        assert_eq!(empty.members(), top.members());
        for s in ["EU(true,true,true)", "true", "dia (true & EU(true,true,true))", "true & EU(true,true,true)"] {
            assert!(empty.contains(&parse(s)), "{s}");
        }
        assert_eq!(empty.len(), 4);
    }

    #[test]
    fn af_unfolding_member() {
        assert!(close("AF(p,q,r)").contains(&parse("box AR(q | r, p)")));
    }

    #[test]
    fn eventuality_examples() {
        let ev = eventualities(&close("EU(true,true,true)"));
        assert_eq!(ev, [parse("EU(true,true,true)")].into_iter().collect());
        let ev = eventualities(&close("EG(p,q)"));
        let expected: BTreeSet<_> = [parse("EU(q & EG(p,q), p)"), parse("EU(true,true,true)")].into_iter().collect();
        assert_eq!(ev, expected);
        let ev = eventualities(&close("box p"));
        assert_eq!(ev, [parse("EU(true,true,true)")].into_iter().collect());
    }

    #[test]
    fn binary_successors() {
        let c = fischer_ladner_closure([&parse("dia p")], Dialect::Binary);
        assert!(c.contains(&parse("X0 p")));
        assert!(c.contains(&parse("X1 p")));
        assert!(c.contains(&parse("X1 (true & EU(true,true,true))")));
        assert!(c.len() <= c.size_bound());
    }
}
