//! Fair CTL toolkit: hash-consed formulas, finite transition systems,
//! fixpoint evaluation with executable axiom checks, tableau unravelling
//! over finite complex algebras, parity tree automata with their
//! acceptance terms, and translations into first-order logic and MSO.

pub mod automata;
pub mod eval;
pub mod formula;
pub mod gen;
pub mod kripke;
pub mod selftest;
pub mod tableau;
pub mod translate;

pub use eval::{eval, NodeSet, Valuation};
pub use formula::{Dialect, Formula, Kind};
pub use kripke::TransitionSystem;
