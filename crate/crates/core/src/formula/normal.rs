use super::{Formula, Kind};
use std::collections::HashMap;

/// Replaces one derived operator at the top by its definition.
///
/// Basic symbols are returned unchanged.
pub fn unfold_definition(f: &Formula) -> Formula {
    use Formula as F;
    match f.kind() {
        Kind::Top => F::neg(F::bot()),
        Kind::And(a, b) => F::neg(F::or(F::neg(a.clone()), F::neg(b.clone()))),
        Kind::Box(a) => F::neg(F::dia(F::neg(a.clone()))),
        Kind::AR(a, b) => F::neg(F::eu(F::neg(a.clone()), F::neg(b.clone()))),
        Kind::EU(p, q, r) if !r.is_top() => F::or(
            p.clone(),
            F::and(
                q.clone(),
                F::dia(F::eu(F::and(p.clone(), r.clone()), F::and(q.clone(), r.clone()))),
            ),
        ),
        Kind::AF(a, b, c) if c.is_top() => F::neg(F::eg(F::neg(a.clone()), F::neg(b.clone()))),
        Kind::AF(p, q, r) => F::and(
            F::af(p.clone(), q.clone()),
            F::or(p.clone(), F::boxf(F::ar(F::or(q.clone(), r.clone()), p.clone()))),
        ),
        _ => f.clone(),
    }
}

/// True if only basic symbols occur: `⊥ ~ | dia EU EG`, variables, `I`, `X0`, `X1`.
pub fn is_basic(f: &Formula) -> bool {
    let mut ok = true;
    f.visit(&mut |g| match g.kind() {
        Kind::Bot | Kind::Var(_) | Kind::Root | Kind::Neg(_) | Kind::Or(..) | Kind::Dia(_) | Kind::EG(..) | Kind::X(..) => {}
        Kind::EU(_, _, c) if c.is_top() => {}
        // `⊤` is allowed only as the context marker of a binary until.
        Kind::Top => {}
        _ => ok = false,
    });
    ok && !contains_free_top(f)
}

fn contains_free_top(f: &Formula) -> bool {
    match f.kind() {
        Kind::Top => true,
        Kind::EU(a, b, c) if c.is_top() => contains_free_top(a) || contains_free_top(b),
        _ => f.children().into_iter().any(contains_free_top),
    }
}

/// Rewrites every derived operator into basic symbols.
pub fn expand_derived(f: &Formula) -> Formula {
    let mut memo = HashMap::new();
    expand(f, &mut memo)
}

fn expand(f: &Formula, memo: &mut HashMap<Formula, Formula>) -> Formula {
    if let Some(r) = memo.get(f) {
        return r.clone();
    }
    use Formula as F;
    let r = match f.kind() {
        Kind::Bot | Kind::Var(_) | Kind::Root => f.clone(),
        Kind::Neg(a) => F::neg(expand(a, memo)),
        Kind::Or(a, b) => F::or(expand(a, memo), expand(b, memo)),
        Kind::Dia(a) => F::dia(expand(a, memo)),
        Kind::X(i, a) => F::x(*i, expand(a, memo)),
        Kind::EG(a, b) => F::eg(expand(a, memo), expand(b, memo)),
        Kind::EU(a, b, c) if c.is_top() => F::eu(expand(a, memo), expand(b, memo)),
        _ => {
            let unfolded = unfold_definition(f);
            expand(&unfolded, memo)
        }
    };
    memo.insert(f.clone(), r.clone());
    r
}

/// Negation normal form: negation only on propositions and `I`.
pub fn nnf(f: &Formula) -> Formula {
    Nnf::default().pos(f)
}

/// The formal negation `f̄`: an NNF formula equivalent to `~f`.
pub fn formal_negation(f: &Formula) -> Formula {
    Nnf::default().neg(f)
}

/// True if negation is applied only to propositions and `I`.
pub fn is_nnf(f: &Formula) -> bool {
    let mut ok = true;
    f.visit(&mut |g| {
        if let Kind::Neg(a) = g.kind() {
            if !matches!(a.kind(), Kind::Var(_) | Kind::Root) {
                ok = false;
            }
        }
    });
    ok
}

#[derive(Default)]
struct Nnf {
    pos: HashMap<Formula, Formula>,
    neg: HashMap<Formula, Formula>,
}

impl Nnf {
    fn pos(&mut self, f: &Formula) -> Formula {
        if let Some(r) = self.pos.get(f) {
            return r.clone();
        }
        use Formula as F;
        let r = match f.kind() {
            Kind::Bot | Kind::Top | Kind::Var(_) | Kind::Root => f.clone(),
            Kind::Neg(a) => self.neg(a),
            Kind::Or(a, b) => F::or(self.pos(a), self.pos(b)),
            Kind::And(a, b) => F::and(self.pos(a), self.pos(b)),
            Kind::Dia(a) => F::dia(self.pos(a)),
            Kind::Box(a) => F::boxf(self.pos(a)),
            Kind::X(i, a) => F::x(*i, self.pos(a)),
            Kind::EU(a, b, c) => F::eu3(self.pos(a), self.pos(b), self.pos(c)),
            Kind::AF(a, b, c) => F::af3(self.pos(a), self.pos(b), self.pos(c)),
            Kind::EG(a, b) => F::eg(self.pos(a), self.pos(b)),
            Kind::AR(a, b) => F::ar(self.pos(a), self.pos(b)),
        };
        self.pos.insert(f.clone(), r.clone());
        r
    }

    fn neg(&mut self, f: &Formula) -> Formula {
        if let Some(r) = self.neg.get(f) {
            return r.clone();
        }
        use Formula as F;
        let r = match f.kind() {
            Kind::Bot => F::top(),
            Kind::Top => F::bot(),
            Kind::Var(_) | Kind::Root => F::neg(f.clone()),
            Kind::Neg(a) => self.pos(a),
            Kind::Or(a, b) => F::and(self.neg(a), self.neg(b)),
            Kind::And(a, b) => F::or(self.neg(a), self.neg(b)),
            Kind::Dia(a) => F::boxf(self.neg(a)),
            Kind::Box(a) => F::dia(self.neg(a)),
            Kind::X(i, a) => F::x(*i, self.neg(a)),
            Kind::EU(a, b, c) if c.is_top() => F::ar(self.neg(a), self.neg(b)),
            Kind::AR(a, b) => F::eu(self.neg(a), self.neg(b)),
            Kind::EG(a, b) => F::af(self.neg(a), self.neg(b)),
            Kind::AF(a, b, c) if c.is_top() => F::eg(self.neg(a), self.neg(b)),
            Kind::EU(p, q, r) => {
                // ~(p | (q & dia EU(p & r, q & r)))
                let np = self.neg(p);
                let nq = self.neg(q);
                let nr = self.neg(r);
                F::and(
                    np.clone(),
                    F::or(nq.clone(), F::boxf(F::ar(F::or(np, nr.clone()), F::or(nq, nr)))),
                )
            }
            Kind::AF(p, q, r) => {
                // ~(AF(p,q) & (p | box AR(q | r, p)))
                let np = self.neg(p);
                let nq = self.neg(q);
                let nr = self.neg(r);
                F::or(
                    F::eg(np.clone(), nq.clone()),
                    F::and(np.clone(), F::dia(F::eu(F::and(nq, nr), np))),
                )
            }
        };
        self.neg.insert(f.clone(), r.clone());
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Dialect};

    fn parse(s: &str) -> Formula {
        parse_formula(s, Dialect::Binary).unwrap()
    }

    #[test]
    fn definitions() {
        assert_eq!(expand_derived(&parse("box p")), parse("~dia ~p"));
        assert_eq!(expand_derived(&parse("AR(p,q)")), parse("~EU(~p,~q)"));
        assert_eq!(
            expand_derived(&parse("EU(p,q,r)")),
            expand_derived(&parse("p | (q & dia EU(p & r, q & r))"))
        );
        assert_eq!(
            expand_derived(&parse("AF(p,q,r)")),
            expand_derived(&parse("AF(p,q) & (p | box AR(q | r, p))"))
        );
    }

    #[test]
    fn expansion_is_basic() {
        for s in ["AF(p, q & r, box p)", "EU(true, AR(p,q), r) & X0 box I", "true"] {
            assert!(is_basic(&expand_derived(&parse(s))), "{s}");
        }
        assert!(!is_basic(&parse("p & q")));
    }

    #[test]
    fn formal_negation_clauses() {
        assert_eq!(nnf(&parse("~EU(p,q)")), parse("AR(~p,~q)"));
        assert_eq!(nnf(&parse("~~p")), parse("p"));
        assert_eq!(nnf(&parse("~EG(p, q | r)")), parse("AF(~p, ~q & ~r)"));
        assert_eq!(nnf(&parse("~X1 ~I")), parse("X1 I"));
    }

    #[test]
    fn nnf_shape() {
        let f = parse("~(AF(p,q,r) | ~EU(p,~q,dia r)) & ~box ~I");
        let g = nnf(&f);
        assert!(is_nnf(&g));
        assert_eq!(nnf(&g), g);
    }
}
