//! First-order formulas over the algebra signature, their reduction to
//! equations, and the translation of terms into monadic second-order logic.

mod mso;

pub use mso::{
    fo_to_mso, mso_eval, parse_mso, standard_translation, Mso, MsoError, MsoKind, VarKind, MSO_LIMIT,
};

use crate::automata::{compile_acc, Automaton};
use crate::formula::{Formula, VarSet};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("quantifier in a formula required to be quantifier-free")]
    Quantifier,
    #[error("automaton propositions {found:?} differ from {expected:?}")]
    Alphabet { expected: Vec<String>, found: Vec<String> },
}

/// A first-order formula whose atoms are equations between terms and whose
/// variables range over algebra elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FoFormula {
    Eq(Formula, Formula),
    Not(Box<FoFormula>),
    And(Box<FoFormula>, Box<FoFormula>),
    Or(Box<FoFormula>, Box<FoFormula>),
    Implies(Box<FoFormula>, Box<FoFormula>),
    Forall(String, Box<FoFormula>),
    Exists(String, Box<FoFormula>),
}

impl FoFormula {
    pub fn eq(a: Formula, b: Formula) -> Self {
        FoFormula::Eq(a, b)
    }

    pub fn not(a: FoFormula) -> Self {
        FoFormula::Not(Box::new(a))
    }

    pub fn and(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(x: impl Into<String>, body: FoFormula) -> Self {
        FoFormula::Forall(x.into(), Box::new(body))
    }

    pub fn exists(x: impl Into<String>, body: FoFormula) -> Self {
        FoFormula::Exists(x.into(), Box::new(body))
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_count() == 0
    }

    pub fn quantifier_count(&self) -> usize {
        match self {
            FoFormula::Eq(..) => 0,
            FoFormula::Not(a) => a.quantifier_count(),
            FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Implies(a, b) => {
                a.quantifier_count() + b.quantifier_count()
            }
            FoFormula::Forall(_, a) | FoFormula::Exists(_, a) => 1 + a.quantifier_count(),
        }
    }

    /// Variables occurring free in some atom.
    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            FoFormula::Eq(a, b) => a.vars().union(&b.vars()).cloned().collect(),
            FoFormula::Not(a) => a.free_vars(),
            FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Implies(a, b) => {
                a.free_vars().union(&b.free_vars()).cloned().collect()
            }
            FoFormula::Forall(x, a) | FoFormula::Exists(x, a) => {
                let mut s = a.free_vars();
                s.remove(x);
                s
            }
        }
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoFormula::Eq(a, b) => write!(f, "[{a} = {b}]"),
            FoFormula::Not(a) => write!(f, "~{a}"),
            FoFormula::And(a, b) => write!(f, "({a} & {b})"),
            FoFormula::Or(a, b) => write!(f, "({a} | {b})"),
            FoFormula::Implies(a, b) => write!(f, "({a} -> {b})"),
            FoFormula::Forall(x, a) => write!(f, "forall {x}. {a}"),
            FoFormula::Exists(x, a) => write!(f, "exists {x}. {a}"),
        }
    }
}

/// The term `t_φ` with `φ ⇔ (t_φ = ⊤)` in every rooted algebra.
///
/// `∨` and `→` are first rewritten with `∧` and `¬`.
pub fn qf_to_equation(phi: &FoFormula) -> Result<Formula, TranslateError> {
    use Formula as F;
    Ok(match phi {
        FoFormula::Eq(a, b) => F::or(
            F::and(a.clone(), b.clone()),
            F::and(F::neg(a.clone()), F::neg(b.clone())),
        ),
        FoFormula::And(a, b) => F::and(qf_to_equation(a)?, qf_to_equation(b)?),
        FoFormula::Not(a) => F::or(F::neg(F::root()), F::eu(F::neg(qf_to_equation(a)?), F::top())),
        FoFormula::Or(a, b) => qf_to_equation(&FoFormula::not(FoFormula::and(
            FoFormula::not((**a).clone()),
            FoFormula::not((**b).clone()),
        )))?,
        FoFormula::Implies(a, b) => qf_to_equation(&FoFormula::not(FoFormula::and(
            (**a).clone(),
            FoFormula::not((**b).clone()),
        )))?,
        FoFormula::Forall(..) | FoFormula::Exists(..) => return Err(TranslateError::Quantifier),
    })
}

/// The term `t′_φ = I ∧ ¬EU(¬t_φ, ⊤)` with `φ ⇔ (t′_φ ≠ ⊥)`.
pub fn qf_to_nonbot(phi: &FoFormula) -> Result<Formula, TranslateError> {
    let t = qf_to_equation(phi)?;
    Ok(Formula::and(Formula::root(), Formula::neg(Formula::eu(Formula::neg(t), Formula::top()))))
}

/// `ψ(p̄) = ∃q̄ (acc(p̄, q̄) = ⊤)` for an automaton over the propositions `params`.
pub fn build_psi(aut: &Automaton, params: &VarSet) -> Result<FoFormula, TranslateError> {
    let found = aut.props().to_vec();
    if found != params.names() {
        return Err(TranslateError::Alphabet {
            expected: params.names().to_vec(),
            found,
        });
    }
    let acc = compile_acc(aut);
    let mut psi = FoFormula::eq(acc, Formula::top());
    for q in aut.state_names().iter().rev() {
        psi = FoFormula::exists(q.clone(), psi);
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::load_automaton;
    use crate::eval::{eval, eval_fo, eval_qf, Valuation};
    use crate::formula::{parse_formula, Dialect};
    use crate::kripke::load_system;

    fn parse(s: &str) -> Formula {
        parse_formula(s, Dialect::Rooted).unwrap()
    }

    #[test]
    fn equation_clauses() {
        let atom = FoFormula::eq(parse("p"), parse("q"));
        assert_eq!(qf_to_equation(&atom).unwrap(), parse("(p & q) | (~p & ~q)"));
        let conj = FoFormula::and(atom.clone(), FoFormula::eq(parse("p"), parse("true")));
        assert_eq!(
            qf_to_equation(&conj).unwrap(),
            parse("((p & q) | (~p & ~q)) & ((p & true) | (~p & ~true))")
        );
        let neg = FoFormula::not(atom);
        assert_eq!(qf_to_equation(&neg).unwrap(), parse("~I | EU(~((p & q) | (~p & ~q)), true)"));
        let q = FoFormula::exists("x", FoFormula::eq(parse("x"), parse("x")));
        assert_eq!(qf_to_equation(&q), Err(TranslateError::Quantifier));
    }

    #[test]
    fn equation_agrees_on_a_rooted_system() {
        let ts = load_system("states 3\nroot 0\nedge 0 1\nedge 1 2\nedge 2 1\ncolor 1 p\ncolor 2 q\n").unwrap();
        let v = Valuation::from_colouring(&ts);
        let phis = [
            FoFormula::eq(parse("p"), parse("q")),
            FoFormula::not(FoFormula::eq(parse("p"), parse("q"))),
            FoFormula::or(
                FoFormula::eq(parse("dia p"), parse("q | I")),
                FoFormula::eq(parse("p"), parse("false")),
            ),
            FoFormula::implies(FoFormula::eq(parse("p"), parse("p")), FoFormula::eq(parse("EG(true,p)"), parse("true"))),
        ];
        for phi in &phis {
            let truth = eval_qf(phi, &ts, &v).unwrap();
            let t = eval(&qf_to_equation(phi).unwrap(), &ts, &v).unwrap();
            let t2 = eval(&qf_to_nonbot(phi).unwrap(), &ts, &v).unwrap();
            assert_eq!(truth, t.is_full(), "{phi}");
            assert_eq!(truth, !t2.is_empty(), "{phi}");
        }
    }

    #[test]
    fn psi_for_accept_all_and_empty_automata() {
        let all = load_automaton("modal\nprops p\nstates q0\ninit q0\nprio q0 0\ndelta q0 {} -> {q0}\ndelta q0 {p} -> {q0}\n").unwrap();
        let params = VarSet::new(["p"]).unwrap();
        let psi = build_psi(&all, &params).unwrap();
        assert_eq!(psi.free_vars(), ["p".to_string()].into_iter().collect());
        let ts = load_system("states 2\nroot 0\nedge 0 1\nedge 1 1\ncolor 1 p\n").unwrap();
        let v = Valuation::from_colouring_with(&ts, ["p"]);
        let FoFormula::Exists(_, body) = &psi else { panic!() };
        let mut with_q = v.clone();
        with_q.insert("q0", crate::NodeSet::full(2));
        assert!(eval_qf(body, &ts, &with_q).unwrap());
        assert!(eval_fo(&psi, &ts, &v).unwrap());

        let none = load_automaton("modal\nprops p\nstates q0\ninit q0\nprio q0 0\n").unwrap();
        let psi = build_psi(&none, &params).unwrap();
        assert!(!eval_fo(&psi, &ts, &v).unwrap());

        let wrong = VarSet::new(["r"]).unwrap();
        assert!(matches!(build_psi(&all, &wrong), Err(TranslateError::Alphabet { .. })));
    }
}
