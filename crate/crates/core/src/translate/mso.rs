use super::FoFormula;
use crate::eval::{NodeSet, Valuation};
use crate::formula::{expand_derived, Formula, Kind};
use crate::kripke::TransitionSystem;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MsoError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unassigned variable `{0}`")]
    Unbound(String),
    #[error("successor atom on a system without successor maps")]
    NotBinary,
    #[error("size guard exceeded: {n} states, limit {limit}")]
    SizeGuard { n: usize, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// Ranges over all sets of states.
    Set,
    /// Ranges over singletons.
    Individual,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MsoKind {
    Sub(Arc<str>, Arc<str>),
    Edge(Arc<str>, Arc<str>),
    Succ(bool, Arc<str>, Arc<str>),
    Not(Mso),
    Or(Mso, Mso),
    And(Mso, Mso),
    Exists(VarKind, Arc<str>, Mso),
    Forall(VarKind, Arc<str>, Mso),
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct MsoNode {
    kind: MsoKind,
    free: Vec<Arc<str>>,
}

/// A monadic second-order formula over a transition system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mso(Arc<MsoNode>);

impl Mso {
    fn make(kind: MsoKind) -> Mso {
        let mut free: BTreeSet<Arc<str>> = BTreeSet::new();
        match &kind {
            MsoKind::Sub(a, b) | MsoKind::Edge(a, b) | MsoKind::Succ(_, a, b) => {
                free.insert(a.clone());
                free.insert(b.clone());
            }
            MsoKind::Not(a) => free.extend(a.0.free.iter().cloned()),
            MsoKind::Or(a, b) | MsoKind::And(a, b) => {
                free.extend(a.0.free.iter().cloned());
                free.extend(b.0.free.iter().cloned());
            }
            MsoKind::Exists(_, x, a) | MsoKind::Forall(_, x, a) => {
                free.extend(a.0.free.iter().filter(|y| *y != x).cloned());
            }
        }
        Mso(Arc::new(MsoNode {
            kind,
            free: free.into_iter().collect(),
        }))
    }

    pub fn kind(&self) -> &MsoKind {
        &self.0.kind
    }

    pub fn sub(a: &str, b: &str) -> Mso {
        Mso::make(MsoKind::Sub(a.into(), b.into()))
    }

    pub fn edge(a: &str, b: &str) -> Mso {
        Mso::make(MsoKind::Edge(a.into(), b.into()))
    }

    pub fn succ(dir: bool, a: &str, b: &str) -> Mso {
        Mso::make(MsoKind::Succ(dir, a.into(), b.into()))
    }

    pub fn not(a: Mso) -> Mso {
        Mso::make(MsoKind::Not(a))
    }

    pub fn or(a: Mso, b: Mso) -> Mso {
        Mso::make(MsoKind::Or(a, b))
    }

    pub fn and(a: Mso, b: Mso) -> Mso {
        Mso::make(MsoKind::And(a, b))
    }

    pub fn implies(a: Mso, b: Mso) -> Mso {
        Mso::or(Mso::not(a), b)
    }

    pub fn iff(a: Mso, b: Mso) -> Mso {
        Mso::and(Mso::implies(a.clone(), b.clone()), Mso::implies(b, a))
    }

    /// `a = b` as mutual inclusion.
    pub fn equal(a: &str, b: &str) -> Mso {
        Mso::and(Mso::sub(a, b), Mso::sub(b, a))
    }

    pub fn exists(kind: VarKind, x: &str, body: Mso) -> Mso {
        Mso::make(MsoKind::Exists(kind, x.into(), body))
    }

    pub fn forall(kind: VarKind, x: &str, body: Mso) -> Mso {
        Mso::make(MsoKind::Forall(kind, x.into(), body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.0.free.iter().map(|s| s.to_string()).collect()
    }

    /// Whether any `f0`/`f1` atom occurs.
    pub fn uses_successors(&self) -> bool {
        match self.kind() {
            MsoKind::Succ(..) => true,
            MsoKind::Sub(..) | MsoKind::Edge(..) => false,
            MsoKind::Not(a) | MsoKind::Exists(_, _, a) | MsoKind::Forall(_, _, a) => a.uses_successors(),
            MsoKind::Or(a, b) | MsoKind::And(a, b) => a.uses_successors() || b.uses_successors(),
        }
    }

    /// Names bound by quantifiers, with multiplicity.
    pub fn bound_names(&self) -> Vec<(VarKind, String)> {
        let mut out = Vec::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut Vec<(VarKind, String)>) {
        match self.kind() {
            MsoKind::Sub(..) | MsoKind::Edge(..) | MsoKind::Succ(..) => {}
            MsoKind::Not(a) => a.collect_bound(out),
            MsoKind::Or(a, b) | MsoKind::And(a, b) => {
                a.collect_bound(out);
                b.collect_bound(out);
            }
            MsoKind::Exists(k, x, a) | MsoKind::Forall(k, x, a) => {
                out.push((*k, x.to_string()));
                a.collect_bound(out);
            }
        }
    }
}

impl fmt::Display for Mso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            MsoKind::Sub(a, b) => write!(f, "sub({a},{b})"),
            MsoKind::Edge(a, b) => write!(f, "edge({a},{b})"),
            MsoKind::Succ(d, a, b) => write!(f, "f{}({a},{b})", *d as u8),
            MsoKind::Not(a) => write!(f, "~{a}"),
            MsoKind::Or(a, b) => write!(f, "({a}|{b})"),
            MsoKind::And(a, b) => write!(f, "({a}&{b})"),
            MsoKind::Exists(k, x, a) => write!(f, "{} {x}. {a}", if *k == VarKind::Set { "ex" } else { "ex1" }),
            MsoKind::Forall(k, x, a) => write!(f, "{} {x}. {a}", if *k == VarKind::Set { "all" } else { "all1" }),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, MsoError> {
        Err(MsoError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), MsoError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{}`", c as char))
        }
    }

    fn ident(&mut self) -> Result<String, MsoError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos || self.src[start].is_ascii_digit() {
            self.pos = start;
            return self.err("expected identifier");
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn formula(&mut self) -> Result<Mso, MsoError> {
        self.skip_ws();
        if self.eat(b'~') {
            return Ok(Mso::not(self.formula()?));
        }
        if self.eat(b'(') {
            let a = self.formula()?;
            let r = if self.eat(b'|') {
                Mso::or(a, self.formula()?)
            } else if self.eat(b'&') {
                Mso::and(a, self.formula()?)
            } else {
                a
            };
            self.expect(b')')?;
            return Ok(r);
        }
        let start = self.pos;
        let word = self.ident()?;
        let quant = match word.as_str() {
            "ex" => Some((true, VarKind::Set)),
            "ex1" => Some((true, VarKind::Individual)),
            "all" => Some((false, VarKind::Set)),
            "all1" => Some((false, VarKind::Individual)),
            _ => None,
        };
        if let Some((existential, kind)) = quant {
            let x = self.ident()?;
            self.expect(b'.')?;
            let body = self.formula()?;
            return Ok(if existential {
                Mso::exists(kind, &x, body)
            } else {
                Mso::forall(kind, &x, body)
            });
        }
        let build: fn(&str, &str) -> Mso = match word.as_str() {
            "sub" => Mso::sub,
            "edge" => Mso::edge,
            "f0" => |a, b| Mso::succ(false, a, b),
            "f1" => |a, b| Mso::succ(true, a, b),
            _ => {
                self.pos = start;
                return self.err(format!("unknown atom `{word}`"));
            }
        };
        self.expect(b'(')?;
        let a = self.ident()?;
        self.expect(b',')?;
        let b = self.ident()?;
        self.expect(b')')?;
        Ok(build(&a, &b))
    }
}

/// Parses the ASCII syntax produced by `Display`.
pub fn parse_mso(text: &str) -> Result<Mso, MsoError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

struct Fresh {
    taken: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    fn new(taken: BTreeSet<String>) -> Fresh {
        Fresh { taken, next: 0 }
    }

    fn name(&mut self, prefix: &str) -> String {
        loop {
            self.next += 1;
            let n = format!("{prefix}{}", self.next);
            if self.taken.insert(n.clone()) {
                return n;
            }
        }
    }
}

struct St {
    fresh: Fresh,
}

impl St {
    fn truth(v: &str) -> Mso {
        Mso::equal(v, v)
    }

    fn term(&mut self, t: &Formula, v: &str) -> Mso {
        match t.kind() {
            Kind::Var(p) => Mso::sub(v, p),
            Kind::Bot => Mso::not(St::truth(v)),
            Kind::Top => St::truth(v),
            Kind::Neg(a) => Mso::not(self.term(a, v)),
            Kind::Or(a, b) => {
                let a = self.term(a, v);
                Mso::or(a, self.term(b, v))
            }
            Kind::And(a, b) => {
                let a = self.term(a, v);
                Mso::and(a, self.term(b, v))
            }
            Kind::Dia(a) => {
                let w = self.fresh.name("v");
                let body = Mso::and(Mso::edge(v, &w), self.term(a, &w));
                Mso::exists(VarKind::Individual, &w, body)
            }
            Kind::X(dir, a) => {
                let w = self.fresh.name("v");
                let body = Mso::and(Mso::succ(*dir, v, &w), self.term(a, &w));
                Mso::exists(VarKind::Individual, &w, body)
            }
            Kind::Root => {
                let w = self.fresh.name("v");
                Mso::forall(VarKind::Individual, &w, Mso::not(Mso::edge(&w, v)))
            }
            Kind::EU(a, b, c) if c.is_top() => {
                let q = self.fresh.name("X");
                let pre = self.pre(a, b, None, &q);
                Mso::forall(VarKind::Set, &q, Mso::implies(pre, Mso::sub(v, &q)))
            }
            Kind::EG(a, b) => {
                let p = self.fresh.name("X");
                let q = self.fresh.name("X");
                let w = self.fresh.name("v");
                let w2 = self.fresh.name("v");
                let pre = self.pre(b, a, Some(&p), &q);
                let in_eu = Mso::forall(VarKind::Set, &q, Mso::implies(pre, Mso::sub(&w2, &q)));
                let step = Mso::exists(VarKind::Individual, &w2, Mso::and(Mso::edge(&w, &w2), in_eu));
                let body = Mso::and(self.term(a, &w), step);
                let closed = Mso::forall(VarKind::Individual, &w, Mso::implies(Mso::sub(&w, &p), body));
                Mso::exists(VarKind::Set, &p, Mso::and(Mso::sub(v, &p), closed))
            }
            _ => {
                let basic = expand_derived(t);
                self.term(&basic, v)
            }
        }
    }

    /// `(t1 ∧ p) ∨ (t2 ∧ ◇q) ≤ q`; `p = None` stands for the true predicate.
    fn pre(&mut self, t1: &Formula, t2: &Formula, p: Option<&str>, q: &str) -> Mso {
        let w = self.fresh.name("v");
        let guard = match p {
            Some(p) => Mso::sub(&w, p),
            None => St::truth(&w),
        };
        let left = Mso::and(self.term(t1, &w), guard);
        let right = Mso::and(self.term(t2, &w), Mso::edge(&w, q));
        Mso::forall(VarKind::Individual, &w, Mso::implies(Mso::or(left, right), Mso::sub(&w, q)))
    }
}

/// `ṫ(p̄, v)`: the standard translation of `expand_derived(t)` with free
/// individual variable `v`.
pub fn standard_translation(t: &Formula, v: &str) -> Mso {
    let mut taken = t.vars();
    taken.insert(v.to_string());
    let mut st = St { fresh: Fresh::new(taken) };
    st.term(&expand_derived(t), v)
}

/// Replaces each equation `t1 = t2` by `∀v (ṫ1(v) ↔ ṫ2(v))`.
pub fn fo_to_mso(phi: &FoFormula) -> Mso {
    let mut taken = BTreeSet::new();
    collect_names(phi, &mut taken);
    let mut st = St { fresh: Fresh::new(taken) };
    fo_rec(phi, &mut st)
}

fn collect_names(phi: &FoFormula, out: &mut BTreeSet<String>) {
    match phi {
        FoFormula::Eq(a, b) => {
            out.extend(a.vars());
            out.extend(b.vars());
        }
        FoFormula::Not(a) => collect_names(a, out),
        FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Implies(a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
        FoFormula::Forall(x, a) | FoFormula::Exists(x, a) => {
            out.insert(x.clone());
            collect_names(a, out);
        }
    }
}

fn fo_rec(phi: &FoFormula, st: &mut St) -> Mso {
    match phi {
        FoFormula::Eq(a, b) => {
            let v = st.fresh.name("v");
            let ta = st.term(&expand_derived(a), &v);
            let tb = st.term(&expand_derived(b), &v);
            Mso::forall(VarKind::Individual, &v, Mso::iff(ta, tb))
        }
        FoFormula::Not(a) => Mso::not(fo_rec(a, st)),
        FoFormula::And(a, b) => Mso::and(fo_rec(a, st), fo_rec(b, st)),
        FoFormula::Or(a, b) => Mso::or(fo_rec(a, st), fo_rec(b, st)),
        FoFormula::Implies(a, b) => Mso::implies(fo_rec(a, st), fo_rec(b, st)),
        FoFormula::Forall(x, a) => Mso::forall(VarKind::Set, x, fo_rec(a, st)),
        FoFormula::Exists(x, a) => Mso::exists(VarKind::Set, x, fo_rec(a, st)),
    }
}

/// Largest system on which second-order quantifiers are enumerated.
pub const MSO_LIMIT: usize = 8;

struct MsoEval<'a> {
    n: usize,
    succ: Vec<u64>,
    maps: Option<[&'a [usize]; 2]>,
    env: Vec<(Arc<str>, u64)>,
    memo: HashMap<(usize, Vec<u64>), bool>,
}

impl MsoEval<'_> {
    fn lookup(&self, x: &str) -> Result<u64, MsoError> {
        self.env
            .iter()
            .rev()
            .find(|(y, _)| &**y == x)
            .map(|(_, m)| *m)
            .ok_or_else(|| MsoError::Unbound(x.to_string()))
    }

    fn eval(&mut self, f: &Mso) -> Result<bool, MsoError> {
        let key_vals = f.0.free.iter().map(|x| self.lookup(x)).collect::<Result<Vec<_>, _>>()?;
        let key = (Arc::as_ptr(&f.0) as usize, key_vals);
        if let Some(r) = self.memo.get(&key) {
            return Ok(*r);
        }
        let r = match f.kind() {
            MsoKind::Sub(a, b) => {
                let (a, b) = (self.lookup(a)?, self.lookup(b)?);
                a & !b == 0
            }
            MsoKind::Edge(a, b) => {
                let (a, b) = (self.lookup(a)?, self.lookup(b)?);
                (0..self.n).any(|s| a >> s & 1 == 1 && self.succ[s] & b != 0)
            }
            MsoKind::Succ(dir, a, b) => {
                let maps = self.maps.ok_or(MsoError::NotBinary)?;
                let (a, b) = (self.lookup(a)?, self.lookup(b)?);
                let map = maps[*dir as usize];
                (0..self.n).any(|s| a >> s & 1 == 1 && b >> map[s] & 1 == 1)
            }
            MsoKind::Not(a) => !self.eval(a)?,
            MsoKind::Or(a, b) => self.eval(a)? || self.eval(b)?,
            MsoKind::And(a, b) => self.eval(a)? && self.eval(b)?,
            MsoKind::Exists(k, x, a) | MsoKind::Forall(k, x, a) => {
                let universal = matches!(f.kind(), MsoKind::Forall(..));
                let values: Vec<u64> = match k {
                    VarKind::Set => (0..1u64 << self.n).collect(),
                    VarKind::Individual => (0..self.n).map(|s| 1u64 << s).collect(),
                };
                let mut result = universal;
                for m in values {
                    self.env.push((x.clone(), m));
                    let r = self.eval(a);
                    self.env.pop();
                    if r? != universal {
                        result = !universal;
                        break;
                    }
                }
                result
            }
        };
        self.memo.insert(key, r);
        Ok(r)
    }
}

/// Truth of `phi` in `ts` with free variables assigned by `assignment`.
///
/// Free variables are read as sets; a free individual variable is
/// assigned by passing a singleton.
pub fn mso_eval(phi: &Mso, ts: &TransitionSystem, assignment: &Valuation) -> Result<bool, MsoError> {
    let n = ts.len();
    if n > MSO_LIMIT {
        return Err(MsoError::SizeGuard { n, limit: MSO_LIMIT });
    }
    let mut env = Vec::new();
    for x in phi.free_vars() {
        let set: &NodeSet = assignment.get(&x).ok_or_else(|| MsoError::Unbound(x.clone()))?;
        env.push((Arc::<str>::from(x.as_str()), set.mask()));
    }
    let maps = if ts.is_binary() {
        let f0: Vec<usize> = (0..n).map(|s| ts.step(false, s).unwrap()).collect();
        let f1: Vec<usize> = (0..n).map(|s| ts.step(true, s).unwrap()).collect();
        Some([f0, f1])
    } else {
        None
    };
    let mut ev = MsoEval {
        n,
        succ: (0..n)
            .map(|s| ts.successors(s).iter().fold(0u64, |m, &t| m | 1 << t))
            .collect(),
        maps: maps.as_ref().map(|[a, b]| [a.as_slice(), b.as_slice()]),
        env,
        memo: HashMap::new(),
    };
    ev.eval(phi)
}
