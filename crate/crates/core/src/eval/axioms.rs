use super::{lfp, ComplexAlgebra, CtlAlgebra, NodeSet};
use crate::kripke::TransitionSystem;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// How many subset tuples the axiom checker visits.
#[derive(Clone, Debug)]
pub struct AxiomConfig {
    /// Triples are enumerated exhaustively up to this many states.
    pub exhaustive_max: usize,
    /// Random triples checked on larger systems.
    pub samples: usize,
    /// Context-rule quadruples are enumerated exhaustively up to this many states.
    pub context_exhaustive_max: usize,
    /// Random quadruples checked on larger systems.
    pub context_samples: usize,
    /// Cap on recorded violation witnesses.
    pub max_witnesses: usize,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        AxiomConfig {
            exhaustive_max: 5,
            samples: 128,
            context_exhaustive_max: 3,
            context_samples: 256,
            max_witnesses: 16,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: &'static str,
    /// The subsets the axiom was instantiated with, in argument order.
    pub sets: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomReport {
    pub states: usize,
    pub exhaustive: bool,
    pub rooted: bool,
    pub binary: bool,
    /// Instances checked per axiom.
    pub checks: BTreeMap<&'static str, u64>,
    pub violation_count: u64,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.violation_count == 0
    }

    pub fn total_checks(&self) -> u64 {
        self.checks.values().sum()
    }

    /// Folds another report into this one.
    pub fn absorb(&mut self, other: &AxiomReport, max_witnesses: usize) {
        for (k, v) in &other.checks {
            *self.checks.entry(k).or_insert(0) += v;
        }
        self.violation_count += other.violation_count;
        for v in &other.violations {
            if self.violations.len() < max_witnesses {
                self.violations.push(v.clone());
            }
        }
    }
}

struct Recorder {
    report: AxiomReport,
    cap: usize,
}

impl Recorder {
    fn check(&mut self, axiom: &'static str, holds: bool, sets: &[&NodeSet]) {
        *self.report.checks.entry(axiom).or_insert(0) += 1;
        if !holds {
            self.report.violation_count += 1;
            if self.report.violations.len() < self.cap {
                self.report.violations.push(AxiomViolation {
                    axiom,
                    sets: sets.iter().map(|s| s.to_string()).collect(),
                });
            }
        }
    }
}

fn random_subset(n: usize, rng: &mut impl Rng) -> NodeSet {
    NodeSet::from_states(n, (0..n).filter(|_| rng.gen_bool(0.5)))
}

fn tuples(n: usize, arity: usize, exhaustive: bool, samples: usize, rng: &mut impl Rng) -> Vec<Vec<NodeSet>> {
    if exhaustive {
        let subsets: Vec<NodeSet> = (0..1u64 << n).map(|m| NodeSet::from_mask(n, m)).collect();
        let mut out = vec![vec![]];
        for _ in 0..arity {
            out = out
                .into_iter()
                .flat_map(|t| {
                    subsets.iter().map(move |s| {
                        let mut t = t.clone();
                        t.push(s.clone());
                        t
                    })
                })
                .collect();
        }
        out
    } else {
        let corners = [NodeSet::empty(n), NodeSet::full(n)];
        let mut out: Vec<Vec<NodeSet>> = (0..1usize << arity)
            .map(|bits| (0..arity).map(|i| corners[bits >> i & 1].clone()).collect())
            .collect();
        for _ in 0..samples {
            out.push((0..arity).map(|_| random_subset(n, rng)).collect());
        }
        out
    }
}

/// Checks the axioms of the complex algebra of `ts` on subset tuples.
///
/// Rooted axioms are included when `ts` has a root without incoming
/// edges, and the successor axioms when `ts` is binary.
pub fn check_axioms(ts: &TransitionSystem, rng: &mut impl Rng, cfg: &AxiomConfig) -> AxiomReport {
    check_axioms_with(&ComplexAlgebra::new(ts), ts.has_proper_root(), ts.is_binary(), rng, cfg)
}

/// Checks the axioms against an arbitrary implementation of the operations.
pub fn check_axioms_with<A: CtlAlgebra + ?Sized>(
    alg: &A,
    rooted: bool,
    binary: bool,
    rng: &mut impl Rng,
    cfg: &AxiomConfig,
) -> AxiomReport {
    let n = alg.size();
    let exhaustive = n <= cfg.exhaustive_max;
    let mut rec = Recorder {
        report: AxiomReport {
            states: n,
            exhaustive,
            rooted,
            binary,
            ..AxiomReport::default()
        },
        cap: cfg.max_witnesses,
    };
    let bot = alg.bot();
    let top = alg.top();

    rec.check("K-bot", alg.dia(&bot).is_empty(), &[]);
    rec.check("D", alg.dia(&top).is_full(), &[]);
    let root = if rooted { alg.root() } else { None };
    if let Some(i) = &root {
        rec.check("I-nonempty", !i.is_empty(), &[i]);
        rec.check("I-no-predecessor", alg.dia(&alg.eu(i, &top)).is_empty(), &[i]);
    }
    if binary {
        for dir in [false, true] {
            let name = if dir { "X1-bot" } else { "X0-bot" };
            rec.check(name, alg.step_pre(dir, &bot).is_some_and(|s| s.is_empty()), &[]);
        }
    }

    let mut pair_cache: BTreeMap<(u64, u64), Pair> = BTreeMap::new();
    let small = n <= 64;
    for t in tuples(n, 3, exhaustive, cfg.samples, rng) {
        let (a, b, c) = (&t[0], &t[1], &t[2]);
        let pair = if small {
            pair_cache
                .entry((a.mask(), b.mask()))
                .or_insert_with(|| Pair::new(alg, a, b, &mut rec))
                .clone()
        } else {
            Pair::new(alg, a, b, &mut rec)
        };
        triple_checks(alg, a, b, c, &pair, &mut rec);
        let first_of_a = !exhaustive || (b.is_empty() && c.is_empty());
        if let Some(i) = &root {
            if first_of_a {
                let holds = a.is_empty() || i.is_subset(&alg.eu(a, &top));
                rec.check("I-reaches", holds, &[a]);
            }
        }
        if binary && (!exhaustive || c.is_empty()) {
            binary_checks(alg, a, b, &mut rec);
        }
    }

    let exhaustive_ctx = n <= cfg.context_exhaustive_max;
    for t in tuples(n, 4, exhaustive_ctx, cfg.context_samples, rng) {
        let (g, p, q, r) = (&t[0], &t[1], &t[2], &t[3]);
        let ng = g.complement();
        let r2 = r.intersection(&ng);
        if g.intersects(&alg.eu3(p, q, r)) {
            rec.check("EUc-context", g.intersects(&alg.eu3(p, q, &r2)), &[g, p, q, r]);
        }
        if g.intersects(&alg.af3(p, q, r)) {
            rec.check("AFc-context", g.intersects(&alg.af3(p, q, &r2)), &[g, p, q, r]);
        }
    }
    rec.report
}

#[derive(Clone)]
struct Pair {
    eu: NodeSet,
    eg: NodeSet,
    ar: NodeSet,
    af: NodeSet,
}

impl Pair {
    fn new<A: CtlAlgebra + ?Sized>(alg: &A, a: &NodeSet, b: &NodeSet, rec: &mut Recorder) -> Pair {
        let eu = alg.eu(a, b);
        let eg = alg.eg(a, b);
        let ar = alg.ar(a, b);
        let af = alg.af(a, b);
        let top = alg.top();
        rec.check(
            "K-join",
            alg.dia(&a.union(b)) == alg.dia(a).union(&alg.dia(b)),
            &[a, b],
        );
        rec.check("EUfix", a.union(&b.intersection(&alg.dia(&eu))).is_subset(&eu), &[a, b]);
        rec.check(
            "EGfix",
            eg.is_subset(&a.intersection(&alg.dia(&alg.eu(&b.intersection(&eg), a)))),
            &[a, b],
        );
        rec.check("ARfix", ar.is_subset(&a.intersection(&b.union(&alg.boxed(&ar)))), &[a, b]);
        rec.check("AFfix", a.union(&alg.boxed(&alg.ar(&b.union(&af), a))).is_subset(&af), &[a, b]);
        rec.check("AR-dual", ar == alg.eu(&a.complement(), &b.complement()).complement(), &[a, b]);
        rec.check("AF-dual", af == alg.eg(&a.complement(), &b.complement()).complement(), &[a, b]);
        rec.check("EUc-top", alg.eu3(a, b, &top) == eu, &[a, b]);
        rec.check("AFc-top", alg.af3(a, b, &top) == af, &[a, b]);
        Pair { eu, eg, ar, af }
    }
}

fn triple_checks<A: CtlAlgebra + ?Sized>(alg: &A, a: &NodeSet, b: &NodeSet, c: &NodeSet, pair: &Pair, rec: &mut Recorder) {
    if a.union(&b.intersection(&alg.dia(c))).is_subset(c) {
        rec.check("EUmin", pair.eu.is_subset(c), &[a, b, c]);
    }
    if c.is_subset(&a.intersection(&alg.dia(&alg.eu(&b.intersection(c), a)))) {
        rec.check("EGmax", c.is_subset(&pair.eg), &[a, b, c]);
    }
    if c.is_subset(&a.intersection(&b.union(&alg.boxed(c)))) {
        rec.check("ARmax", c.is_subset(&pair.ar), &[a, b, c]);
    }
    if a.union(&alg.boxed(&alg.ar(&b.union(c), a))).is_subset(c) {
        rec.check("AFmin", pair.af.is_subset(c), &[a, b, c]);
    }

    let (p, q, r) = (a, b, c);
    let n = alg.size();
    let eu3 = alg.eu3(p, q, r);
    let af3 = alg.af3(p, q, r);
    let eu_kleene = lfp(n, |x| p.union(&q.intersection(&alg.dia(&r.intersection(x))))).set;
    rec.check("EUc-lfp", eu3 == eu_kleene, &[p, q, r]);
    let af_kleene = lfp(n, |x| p.union(&alg.boxed(&alg.ar(&q.union(&r.intersection(x)), p)))).set;
    rec.check("AFc-lfp", af3 == af_kleene, &[p, q, r]);
    rec.check(
        "AFc-unfold",
        af3 == p.union(&alg.boxed(&q.union(r).intersection(&af3))),
        &[p, q, r],
    );
    rec.check(
        "EUc-step",
        eu3.difference(p).is_subset(&alg.dia(&r.intersection(&eu3))),
        &[p, q, r],
    );
}

fn binary_checks<A: CtlAlgebra + ?Sized>(alg: &A, a: &NodeSet, b: &NodeSet, rec: &mut Recorder) {
    let (Some(x0), Some(x1)) = (alg.step_pre(false, a), alg.step_pre(true, a)) else {
        rec.check("X-defined", false, &[a]);
        return;
    };
    rec.check("X-dia", alg.dia(a) == x0.union(&x1), &[a]);
    for (dir, xa) in [(false, &x0), (true, &x1)] {
        let xb = alg.step_pre(dir, b).unwrap_or_else(|| alg.bot());
        let join = alg.step_pre(dir, &a.union(b)).unwrap_or_else(|| alg.bot());
        let neg = alg.step_pre(dir, &a.complement()).unwrap_or_else(|| alg.bot());
        let (j, m) = if dir { ("X1-join", "X1-neg") } else { ("X0-join", "X0-neg") };
        rec.check(j, join == xa.union(&xb), &[a, b]);
        rec.check(m, neg == xa.complement(), &[a]);
    }
}
