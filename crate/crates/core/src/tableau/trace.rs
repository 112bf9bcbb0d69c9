use super::{init_tableau, one_step_unravel, well_formed, Ambient, PartialTableau, Status, TableauError};
use crate::formula::{conj, Dialect, Formula, Kind};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::{BTreeSet, HashMap};

#[derive(Clone, Debug)]
pub struct UnravelOptions {
    pub depth: usize,
    pub node_budget: usize,
    pub dialect: Dialect,
    /// Replace `φ` by `I ∧ EU(φ, ⊤) ∧ □AR(¬I, ⊥)` before building.
    pub root_wrapper: bool,
    /// Re-check the whole tableau after every round, not just the new nodes.
    pub check_every_round: bool,
}

impl UnravelOptions {
    pub fn new(depth: usize, dialect: Dialect) -> Self {
        UnravelOptions {
            depth,
            node_budget: 20_000,
            dialect,
            root_wrapper: dialect == Dialect::Rooted,
            check_every_round: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopReason {
    #[serde(rename = "node budget")]
    NodeBudget,
}

/// A tableau after some rounds of unravelling, with its colouring.
#[derive(Clone, Debug)]
pub struct Unravelling {
    pub tableau: PartialTableau,
    /// The formula the user asked for, before wrapping.
    pub formula: Formula,
    pub props: Vec<String>,
    pub rounds: usize,
    pub stopped: Option<StopReason>,
    /// `σ(v) = α(v) ∩ p̄`.
    pub colours: Vec<BTreeSet<String>>,
}

/// `I ∧ EU(φ, ⊤) ∧ □AR(¬I, ⊥)`.
pub fn root_wrapper(phi: &Formula) -> Formula {
    conj([
        Formula::root(),
        Formula::eu(phi.clone(), Formula::top()),
        Formula::boxf(Formula::ar(Formula::neg(Formula::root()), Formula::bot())),
    ])
}

/// Builds `depth` rounds of one-step unravelling from the initial tableau.
pub fn unravel(phi0: &Formula, amb: &mut Ambient, opts: &UnravelOptions) -> Result<Unravelling, TableauError> {
    let seed = if opts.root_wrapper { root_wrapper(phi0) } else { phi0.clone() };
    let mut t = init_tableau(&seed, amb, opts.dialect)?;
    if let Some(v) = well_formed(&t, amb)?.first() {
        return Err(TableauError::Invariant {
            node: v.node,
            detail: format!("initial tableau {v}"),
        });
    }
    let mut rounds = 0;
    let mut stopped = None;
    for _ in 0..opts.depth {
        let out = one_step_unravel(&mut t, amb, opts.node_budget)?;
        if out.truncated {
            stopped = Some(StopReason::NodeBudget);
            break;
        }
        rounds += 1;
        if opts.check_every_round {
            if let Some(v) = well_formed(&t, amb)?.first() {
                return Err(TableauError::Invariant {
                    node: v.node,
                    detail: format!("round {rounds} {v}"),
                });
            }
        }
    }
    let props: Vec<String> = phi0.vars().into_iter().collect();
    let mut colours = Vec::with_capacity(t.nodes.len());
    for node in &t.nodes {
        let mut c = BTreeSet::new();
        for p in &props {
            if amb.holds(&Formula::var(p), node.alpha)? {
                c.insert(p.clone());
            }
        }
        colours.push(c);
    }
    Ok(Unravelling {
        tableau: t,
        formula: phi0.clone(),
        props,
        rounds,
        stopped,
        colours,
    })
}

/// Larger formulas are printed with references to earlier table entries.
const INLINE_SIZE: u32 = 120;

struct Table {
    index: HashMap<Formula, usize>,
    text: Vec<String>,
}

impl Table {
    fn id(&mut self, f: &Formula) -> usize {
        if let Some(&i) = self.index.get(f) {
            return i;
        }
        let text = if f.size() <= INLINE_SIZE {
            f.to_string()
        } else {
            self.shallow(f)
        };
        let i = self.text.len();
        self.text.push(text);
        self.index.insert(f.clone(), i);
        i
    }

    /// Top operator with `#n` references to the table for the arguments.
    fn shallow(&mut self, f: &Formula) -> String {
        let args: Vec<String> = f.children().into_iter().map(|c| format!("#{}", self.id(c))).collect();
        match f.kind() {
            Kind::Neg(_) => format!("~{}", args[0]),
            Kind::And(..) => format!("({} & {})", args[0], args[1]),
            Kind::Or(..) => format!("({} | {})", args[0], args[1]),
            Kind::Dia(_) => format!("dia {}", args[0]),
            Kind::Box(_) => format!("box {}", args[0]),
            Kind::X(d, _) => format!("X{} {}", u8::from(*d), args[0]),
            Kind::EU(..) => format!("EU({})", args.join(",")),
            Kind::AF(..) => format!("AF({})", args.join(",")),
            Kind::EG(..) => format!("EG({})", args.join(",")),
            Kind::AR(..) => format!("AR({})", args.join(",")),
            _ => f.to_string(),
        }
    }
}

impl Unravelling {
    pub fn len(&self) -> usize {
        self.tableau.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tableau.nodes.is_empty()
    }

    /// JSON trace. Formulas are numbered in order of first appearance and
    /// every formula field refers to that numbering.
    pub fn trace_json(&self) -> Value {
        let t = &self.tableau;
        let mut table = Table {
            index: HashMap::new(),
            text: Vec::new(),
        };
        let gamma0: Vec<usize> = t.gamma0.iter().map(|f| table.id(f)).collect();
        let mut nodes = Vec::with_capacity(t.nodes.len());
        for (id, node) in t.nodes.iter().enumerate() {
            let beta: Vec<Value> = node
                .beta
                .iter()
                .map(|e| {
                    let theta = table.id(&e.theta);
                    let chi = table.id(&e.chi_prime);
                    let rho: Vec<usize> = e.rho.iter().map(|f| table.id(f)).collect();
                    json!({
                        "theta": theta,
                        "status": e.status,
                        "rho_ids": rho,
                        "chi_prime": chi,
                    })
                })
                .collect();
            let jump = node.expansion.as_ref().map(|x| {
                json!({
                    "x_v": x.x_v,
                    "m": x.m.map(|m| m + 1),
                    "gamma_v": x.gamma.as_ref().map(|g| table.id(g)),
                })
            });
            let label = node.label.as_ref().map(|l| table.id(l));
            let designated: Vec<usize> = node.designated.iter().map(|l| table.id(l)).collect();
            nodes.push(json!({
                "id": id,
                "parent": node.parent,
                "depth": node.depth,
                "alpha_state": node.alpha,
                "colour": self.colours[id],
                "label": label,
                "dir": node.dir.map(u8::from),
                "designated": designated,
                "beta": beta,
                "jump": jump,
            }));
        }
        json!({
            "formula": self.formula.to_string(),
            "seed": t.phi0.to_string(),
            "dialect": t.dialect.name(),
            "rounds": self.rounds,
            "stopped": self.stopped,
            "gamma0": gamma0,
            "formulas": table.text,
            "nodes": nodes,
        })
    }

    /// One line per node: `id parent state {colour} statuses`.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (id, node) in self.tableau.nodes.iter().enumerate() {
            let parent = node.parent.map_or("-".to_string(), |p| p.to_string());
            let colour: Vec<&str> = self.colours[id].iter().map(String::as_str).collect();
            let statuses: String = node.beta.iter().map(|e| e.status.letter()).collect();
            out.push_str(&format!(
                "{id} {parent} s{} {{{}}} [{}]\n",
                node.alpha,
                colour.join(","),
                statuses
            ));
        }
        out
    }

    /// Number of entries with the given status at node `v`.
    pub fn count_status(&self, v: usize, s: Status) -> usize {
        self.tableau.nodes[v].beta.iter().filter(|e| e.status == s).count()
    }
}
