//! Hash-consed formulas of fair CTL and its rooted and binary dialects.
//!
//! Every [`Formula`] is interned in a process-wide table, so structurally
//! equal formulas are pointer-equal and compare by id in constant time.
//! The total order on formulas is structural (size, then kind, then
//! children) and therefore independent of interning order.

mod closure;
mod normal;
mod syntax;

pub use closure::{eventualities, fischer_ladner_closure, ClosureRule, ClosureSet};
pub use normal::{expand_derived, formal_negation, is_basic, is_nnf, nnf, unfold_definition};
pub use syntax::{is_proposition_name, parse_formula, FormulaError};

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

/// Language variant a formula belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dialect {
    /// Plain fair CTL.
    Plain,
    /// Adds the root constant `I`.
    Rooted,
    /// Adds `I` and the successor operators `X0`, `X1`.
    Binary,
}

impl Dialect {
    pub fn allows(self, needed: Dialect) -> bool {
        needed <= self
    }

    pub fn name(self) -> &'static str {
        match self {
            Dialect::Plain => "plain",
            Dialect::Rooted => "rooted",
            Dialect::Binary => "binary",
        }
    }
}

impl std::str::FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Dialect::Plain),
            "rooted" => Ok(Dialect::Rooted),
            "binary" | "s2s" => Ok(Dialect::Binary),
            other => Err(format!("unknown dialect `{other}`")),
        }
    }
}

/// The operator at the top of a formula.
///
/// `EU` and `AF` are always stored in ternary form; the binary operators
/// carry `⊤` as their context argument.
#[derive(Clone, Debug)]
pub enum Kind {
    Bot,
    Top,
    Var(Arc<str>),
    Neg(Formula),
    Or(Formula, Formula),
    And(Formula, Formula),
    /// `dia f`: some successor satisfies `f`.
    Dia(Formula),
    /// `box f`: every successor satisfies `f`.
    Box(Formula),
    /// Contextual until `EU(φ, ψ, χ)`; binary until when `χ = ⊤`.
    EU(Formula, Formula, Formula),
    /// Fair globally: a path with `φ` always and `ψ` infinitely often.
    EG(Formula, Formula),
    /// Dual of `EU`: `AR(a, b) = ~EU(~a, ~b)`.
    AR(Formula, Formula),
    /// Contextual fair eventually `AF(φ, ψ, χ)`; binary when `χ = ⊤`.
    AF(Formula, Formula, Formula),
    /// The root constant `I`.
    Root,
    /// Successor operator `X0` (`false`) or `X1` (`true`).
    X(bool, Formula),
}

impl Kind {
    fn tag(&self) -> u8 {
        match self {
            Kind::Bot => 0,
            Kind::Top => 1,
            Kind::Root => 2,
            Kind::Var(_) => 3,
            Kind::Neg(_) => 4,
            Kind::Or(..) => 5,
            Kind::And(..) => 6,
            Kind::Dia(_) => 7,
            Kind::Box(_) => 8,
            Kind::X(false, _) => 9,
            Kind::X(true, _) => 10,
            Kind::EU(..) => 11,
            Kind::EG(..) => 12,
            Kind::AR(..) => 13,
            Kind::AF(..) => 14,
        }
    }
}

struct Node {
    id: u32,
    size: u32,
    kind: Kind,
}

/// An interned formula. Cloning is a reference-count increment.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Leaf(u8),
    Var(Arc<str>),
    Un(u8, u32),
    Bin(u8, u32, u32),
    Ter(u8, u32, u32, u32),
}

struct Interner {
    table: HashMap<Key, Formula>,
    next: u32,
}

fn interner() -> &'static Mutex<Interner> {
    static TABLE: OnceLock<Mutex<Interner>> = OnceLock::new();
    TABLE.get_or_init(|| {
        Mutex::new(Interner {
            table: HashMap::new(),
            next: 0,
        })
    })
}

fn intern(kind: Kind) -> Formula {
    let key = match &kind {
        Kind::Var(name) => Key::Var(name.clone()),
        Kind::Bot | Kind::Top | Kind::Root => Key::Leaf(kind.tag()),
        Kind::Neg(a) | Kind::Dia(a) | Kind::Box(a) | Kind::X(_, a) => Key::Un(kind.tag(), a.id()),
        Kind::Or(a, b) | Kind::And(a, b) | Kind::EG(a, b) | Kind::AR(a, b) => {
            Key::Bin(kind.tag(), a.id(), b.id())
        }
        Kind::EU(a, b, c) | Kind::AF(a, b, c) => Key::Ter(kind.tag(), a.id(), b.id(), c.id()),
    };
    let mut guard = interner().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(f) = guard.table.get(&key) {
        return f.clone();
    }
    let size = children_of(&kind).iter().fold(1u32, |acc, c| acc.saturating_add(c.0.size));
    let id = guard.next;
    guard.next += 1;
    let f = Formula(Arc::new(Node { id, size, kind }));
    guard.table.insert(key, f.clone());
    f
}

fn children_of(kind: &Kind) -> Vec<&Formula> {
    match kind {
        Kind::Bot | Kind::Top | Kind::Root | Kind::Var(_) => vec![],
        Kind::Neg(a) | Kind::Dia(a) | Kind::Box(a) | Kind::X(_, a) => vec![a],
        Kind::Or(a, b) | Kind::And(a, b) | Kind::EG(a, b) | Kind::AR(a, b) => vec![a, b],
        Kind::EU(a, b, c) | Kind::AF(a, b, c) => vec![a, b, c],
    }
}

impl Formula {
    pub fn bot() -> Formula {
        intern(Kind::Bot)
    }
    pub fn top() -> Formula {
        intern(Kind::Top)
    }
    pub fn root() -> Formula {
        intern(Kind::Root)
    }
    pub fn var(name: &str) -> Formula {
        intern(Kind::Var(Arc::from(name)))
    }
    pub fn neg(a: Formula) -> Formula {
        intern(Kind::Neg(a))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        intern(Kind::Or(a, b))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        intern(Kind::And(a, b))
    }
    pub fn dia(a: Formula) -> Formula {
        intern(Kind::Dia(a))
    }
    pub fn boxf(a: Formula) -> Formula {
        intern(Kind::Box(a))
    }
    /// Binary until, stored as `EU(a, b, ⊤)`.
    pub fn eu(a: Formula, b: Formula) -> Formula {
        intern(Kind::EU(a, b, Formula::top()))
    }
    pub fn eu3(a: Formula, b: Formula, c: Formula) -> Formula {
        intern(Kind::EU(a, b, c))
    }
    pub fn eg(a: Formula, b: Formula) -> Formula {
        intern(Kind::EG(a, b))
    }
    pub fn ar(a: Formula, b: Formula) -> Formula {
        intern(Kind::AR(a, b))
    }
    /// Binary fair eventually, stored as `AF(a, b, ⊤)`.
    pub fn af(a: Formula, b: Formula) -> Formula {
        intern(Kind::AF(a, b, Formula::top()))
    }
    pub fn af3(a: Formula, b: Formula, c: Formula) -> Formula {
        intern(Kind::AF(a, b, c))
    }
    pub fn x(dir: bool, a: Formula) -> Formula {
        intern(Kind::X(dir, a))
    }
    pub fn x0(a: Formula) -> Formula {
        Formula::x(false, a)
    }
    pub fn x1(a: Formula) -> Formula {
        Formula::x(true, a)
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::neg(a), b)
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Interning id. Stable within a process, not across processes.
    pub fn id(&self) -> u32 {
        self.0.id
    }

    /// Number of nodes in the formula tree (shared subterms counted per occurrence).
    pub fn size(&self) -> u32 {
        self.0.size
    }

    pub fn children(&self) -> Vec<&Formula> {
        children_of(&self.0.kind)
    }

    pub fn is_top(&self) -> bool {
        matches!(self.kind(), Kind::Top)
    }

    pub fn is_bot(&self) -> bool {
        matches!(self.kind(), Kind::Bot)
    }

    /// True for `EU` and `AF` nodes.
    pub fn is_eventuality(&self) -> bool {
        matches!(self.kind(), Kind::EU(..) | Kind::AF(..))
    }

    /// Components `(φ, ψ, χ)` of an eventuality.
    pub fn eventuality_parts(&self) -> Option<(Heart, &Formula, &Formula, &Formula)> {
        match self.kind() {
            Kind::EU(a, b, c) => Some((Heart::EU, a, b, c)),
            Kind::AF(a, b, c) => Some((Heart::AF, a, b, c)),
            _ => None,
        }
    }

    /// The smallest dialect containing this formula.
    pub fn dialect(&self) -> Dialect {
        let mut d = Dialect::Plain;
        self.visit(&mut |f| match f.kind() {
            Kind::X(..) => d = Dialect::Binary,
            Kind::Root if d == Dialect::Plain => d = Dialect::Rooted,
            _ => {}
        });
        d
    }

    /// Proposition names occurring in the formula.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Kind::Var(n) = f.kind() {
                out.insert(n.to_string());
            }
        });
        out
    }

    /// Visits each distinct subformula once, children before parents.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        let mut seen = std::collections::HashSet::new();
        self.visit_inner(f, &mut seen);
    }

    fn visit_inner(&self, f: &mut impl FnMut(&Formula), seen: &mut std::collections::HashSet<u32>) {
        if !seen.insert(self.id()) {
            return;
        }
        for c in self.children() {
            c.visit_inner(f, seen);
        }
        f(self);
    }

    /// All distinct subformulas, including the formula itself.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| {
            out.insert(g.clone());
        });
        out
    }
}

/// Which eventuality operator heads an entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Heart {
    EU,
    AF,
}

impl Heart {
    pub fn build(self, a: Formula, b: Formula, c: Formula) -> Formula {
        match self {
            Heart::EU => Formula::eu3(a, b, c),
            Heart::AF => Formula::af3(a, b, c),
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.size()
            .cmp(&other.size())
            .then_with(|| self.kind().tag().cmp(&other.kind().tag()))
            .then_with(|| match (self.kind(), other.kind()) {
                (Kind::Var(a), Kind::Var(b)) => a.cmp(b),
                _ => self
                    .children()
                    .into_iter()
                    .zip(other.children())
                    .map(|(a, b)| a.cmp(b))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal),
            })
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_formula(self))
    }
}

/// Left-nested conjunction; `⊤` when empty.
pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
    items
        .into_iter()
        .reduce(Formula::and)
        .unwrap_or_else(Formula::top)
}

/// Left-nested disjunction; `⊥` when empty.
pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
    items
        .into_iter()
        .reduce(Formula::or)
        .unwrap_or_else(Formula::bot)
}

/// Contextual until `EU_c(p, q, r)`.
pub fn eu_c(p: Formula, q: Formula, r: Formula) -> Formula {
    Formula::eu3(p, q, r)
}

/// Contextual fair eventually `AF_c(p, q, r)`.
pub fn af_c(p: Formula, q: Formula, r: Formula) -> Formula {
    Formula::af3(p, q, r)
}

/// `κ(x, ρ)`: the members of `ρ` true in `x`, and the negations of the rest,
/// conjoined in formula order.
pub fn characteristic_formula(state: &BTreeSet<Formula>, rho: &BTreeSet<Formula>) -> Formula {
    characteristic_formula_by(rho, |g| state.contains(g))
}

/// `κ` with membership given by a predicate.
pub fn characteristic_formula_by(rho: &BTreeSet<Formula>, mut holds: impl FnMut(&Formula) -> bool) -> Formula {
    conj(rho.iter().map(|g| {
        if holds(g) {
            g.clone()
        } else {
            Formula::neg(g.clone())
        }
    }))
}

/// Ordered, duplicate-free list of proposition names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarSet(Vec<String>);

impl VarSet {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Result<VarSet, String> {
        let mut out = Vec::new();
        for n in names {
            let n = n.into();
            if out.contains(&n) {
                return Err(format!("duplicate proposition `{n}`"));
            }
            out.push(n);
        }
        Ok(VarSet(out))
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::var("p")
    }
    fn q() -> Formula {
        Formula::var("q")
    }

    #[test]
    fn hash_consing_shares_structure() {
        let a = Formula::and(p(), Formula::dia(q()));
        let b = Formula::and(Formula::var("p"), Formula::dia(Formula::var("q")));
        assert_eq!(a, b);
        assert_eq!(a.id(), b.id());
    }

    #[test]
    fn binary_until_has_top_context() {
        match Formula::eu(p(), q()).kind() {
            Kind::EU(_, _, c) => assert!(c.is_top()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn order_is_structural() {
        let small = p();
        let big = Formula::and(p(), q());
        assert!(small < big);
        assert!(Formula::var("a") < Formula::var("b"));
    }

    #[test]
    fn empty_junctions() {
        assert_eq!(conj(vec![]), Formula::top());
        assert_eq!(disj(vec![]), Formula::bot());
    }

    #[test]
    fn kappa_examples() {
        let rho = BTreeSet::new();
        assert_eq!(characteristic_formula(&BTreeSet::new(), &rho), Formula::top());
        let rho: BTreeSet<_> = [p(), q()].into_iter().collect();
        let state: BTreeSet<_> = [p()].into_iter().collect();
        assert_eq!(
            characteristic_formula(&state, &rho),
            Formula::and(p(), Formula::neg(q()))
        );
    }

    #[test]
    fn dialect_detection() {
        assert_eq!(p().dialect(), Dialect::Plain);
        assert_eq!(Formula::or(Formula::root(), p()).dialect(), Dialect::Rooted);
        assert_eq!(Formula::x0(Formula::root()).dialect(), Dialect::Binary);
    }

    #[test]
    fn concurrent_interning_agrees() {
        let handles: Vec<_> = (0..8)
            .map(|_| {
                std::thread::spawn(|| {
                    (0..200)
                        .map(|i| Formula::eu(Formula::var(&format!("v{i}")), Formula::top()).id())
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(results.windows(2).all(|w| w[0] == w[1]));
    }
}
