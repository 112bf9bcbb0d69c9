//! `fairctl`: command-line front end for fairctl-core.
//!
//! Exit status is 0 on success, 1 when a property violation is found and
//! 2 on usage or input errors.

use clap::{Args, Parser, Subcommand};
use fairctl_core::automata::{accepts_regular, compile_acc, load_automaton, Automaton};
use fairctl_core::eval::{check_axioms, AxiomConfig, AxiomReport};
use fairctl_core::formula::{fischer_ladner_closure, nnf, parse_formula};
use fairctl_core::gen::{random_binary_system, random_rooted_system, random_system};
use fairctl_core::kripke::load_system;
use fairctl_core::selftest::{run_selftest, SelftestConfig};
use fairctl_core::tableau::{
    monitor_eventualities, unravel, verify_truth_prefix, Ambient, TableauError, UnravelOptions,
};
use fairctl_core::translate::{mso_eval, parse_mso, standard_translation};
use fairctl_core::{eval, Dialect, Formula, NodeSet, TransitionSystem, Valuation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fairctl", version, propagate_version = true, about = "Fair CTL toolkit")]
struct Cli {
    /// Print JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula on a model.
    Check(CheckArgs),
    /// Check the algebra axioms on random models or on a given model.
    Axioms(AxiomArgs),
    /// Build a partial tableau and check its bookkeeping.
    Unravel(UnravelArgs),
    /// Decide whether a parity tree automaton accepts the tree of a binary generator.
    Accepts(AcceptsArgs),
    /// Print the acceptance term of an automaton.
    AccTerm(AccTermArgs),
    /// Print the standard translation of a formula into MSO.
    ToMso(ToMsoArgs),
    /// Evaluate an MSO formula on a model.
    MsoEval(MsoEvalArgs),
    /// Print the negation normal form of a formula.
    Nnf(FormulaArgs),
    /// List the closure of a formula with the rule that added each member.
    Closure(FormulaArgs),
    /// Run the seeded property suite.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(long)]
    formula: String,
    /// plain, rooted or binary; defaults to the smallest dialect containing the formula.
    #[arg(long)]
    dialect: Option<Dialect>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    formula: String,
    /// Answer yes or no for this state; exits 1 on no.
    #[arg(long)]
    at: Option<usize>,
}

#[derive(Args)]
struct AxiomArgs {
    /// Check this model instead of random ones.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    states: usize,
    /// Number of random models.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shape of the random models.
    #[arg(long, default_value = "plain")]
    dialect: Dialect,
}

#[derive(Args)]
struct UnravelArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    formula: String,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long)]
    dialect: Option<Dialect>,
    /// Stop once the tableau would exceed this many nodes.
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
    /// Write the JSON trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Build from the formula as given, without the root wrapper of the rooted dialect.
    #[arg(long)]
    no_wrapper: bool,
}

#[derive(Args)]
struct AcceptsArgs {
    #[arg(long)]
    aut: PathBuf,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct AccTermArgs {
    #[arg(long)]
    aut: PathBuf,
}

#[derive(Args)]
struct ToMsoArgs {
    #[arg(long)]
    formula: String,
    #[arg(long)]
    dialect: Option<Dialect>,
    /// Name of the free individual variable.
    #[arg(long, default_value = "v")]
    var: String,
}

#[derive(Args)]
struct MsoEvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    mso: String,
    /// `name=s1,s2,...`; unassigned free variables take their colour sets.
    #[arg(long, num_args = 1..)]
    assign: Vec<String>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Tableau depth for the integrity criterion.
    #[arg(long, default_value_t = 8)]
    depth: usize,
}

/// Outcome of a subcommand other than plain success.
enum Failure {
    Violation(String),
    Input(String),
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn model(path: &Path) -> Result<TransitionSystem, Failure> {
    load_system(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn formula(text: &str, dialect: Option<Dialect>) -> Result<Formula, Failure> {
    parse_formula(text, dialect.unwrap_or(Dialect::Binary)).map_err(input)
}

fn automaton(path: &Path) -> Result<Automaton, Failure> {
    load_automaton(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(json: bool, value: Value, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).expect("serialisable"));
    } else {
        print!("{}", text());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let result = match cli.command {
        Command::Check(a) => check(a, json),
        Command::Axioms(a) => axioms(a, json),
        Command::Unravel(a) => unravel_cmd(a, json),
        Command::Accepts(a) => accepts(a, json),
        Command::AccTerm(a) => acc_term(a, json),
        Command::ToMso(a) => to_mso(a, json),
        Command::MsoEval(a) => mso_eval_cmd(a, json),
        Command::Nnf(a) => nnf_cmd(a, json),
        Command::Closure(a) => closure(a, json),
        Command::Selftest(a) => selftest(a, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn set_text(s: &NodeSet) -> String {
    let items: Vec<String> = s.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

fn check(a: CheckArgs, json: bool) -> Outcome {
    let ts = model(&a.model)?;
    let f = formula(&a.formula, None)?;
    let v = Valuation::from_colouring_with(&ts, f.vars());
    let ext = eval(&f, &ts, &v).map_err(input)?;
    match a.at {
        None => {
            let states: Vec<usize> = ext.iter().collect();
            emit(json, json!({ "formula": f.to_string(), "states": states }), || {
                format!("{}\n", set_text(&ext))
            });
            Ok(())
        }
        Some(s) if s >= ts.len() => Err(Failure::Input(format!("state {s} out of range 0..{}", ts.len()))),
        Some(s) => {
            let holds = ext.contains(s);
            emit(json, json!({ "formula": f.to_string(), "state": s, "holds": holds }), || {
                format!("{}\n", if holds { "yes" } else { "no" })
            });
            if holds {
                Ok(())
            } else {
                Err(Failure::Violation(String::new()))
            }
        }
    }
}

fn axiom_text(rep: &AxiomReport, models: usize) -> String {
    let mut out = format!(
        "models {models}, states {}, checks {}, violations {}\n",
        rep.states,
        rep.total_checks(),
        rep.violation_count
    );
    for (name, k) in &rep.checks {
        out.push_str(&format!("  {name:<18} {k}\n"));
    }
    for v in &rep.violations {
        out.push_str(&format!("violation {} at {}\n", v.axiom, v.sets.join(" ")));
    }
    out
}

fn axioms(a: AxiomArgs, json: bool) -> Outcome {
    let cfg = AxiomConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (rep, models) = match &a.model {
        Some(path) => (check_axioms(&model(path)?, &mut rng, &cfg), 1),
        None => {
            let min = if a.dialect == Dialect::Plain { 1 } else { 2 };
            if a.states < min || a.states > 64 {
                return Err(Failure::Input(format!("--states must lie in {min}..=64")));
            }
            let mut total = AxiomReport::default();
            for _ in 0..a.samples {
                let ts = match a.dialect {
                    Dialect::Plain => random_system(&mut rng, a.states, &[]),
                    Dialect::Rooted => random_rooted_system(&mut rng, a.states, &[]),
                    Dialect::Binary => random_binary_system(&mut rng, a.states, &[], true),
                };
                let rep = check_axioms(&ts, &mut rng, &cfg);
                total.states = rep.states;
                total.exhaustive = rep.exhaustive;
                total.rooted = rep.rooted;
                total.binary = rep.binary;
                total.absorb(&rep, cfg.max_witnesses);
            }
            (total, a.samples)
        }
    };
    emit(json, json!({ "models": models, "report": rep }), || axiom_text(&rep, models));
    if rep.ok() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{} axiom violations", rep.violation_count)))
    }
}

fn unravel_cmd(a: UnravelArgs, json: bool) -> Outcome {
    let ts = model(&a.model)?;
    let f = formula(&a.formula, a.dialect)?;
    let dialect = a.dialect.unwrap_or_else(|| f.dialect());
    let v = Valuation::from_colouring_with(&ts, f.vars());
    let mut amb = Ambient::new(&ts, &v);
    let mut opts = UnravelOptions::new(a.depth, dialect);
    opts.node_budget = a.budget;
    opts.check_every_round = true;
    if a.no_wrapper {
        opts.root_wrapper = false;
    }
    let u = match unravel(&f, &mut amb, &opts) {
        Ok(u) => u,
        Err(e @ TableauError::Invariant { .. }) => return Err(Failure::Violation(e.to_string())),
        Err(TableauError::Unsatisfiable) => {
            return Err(Failure::Violation(format!("{f} holds at no state of the model")))
        }
        Err(e) => return Err(input(e)),
    };
    let truth = verify_truth_prefix(&u, &mut amb).map_err(input)?;
    let monitor = monitor_eventualities(&u, &mut amb).map_err(input)?;
    if let Some(path) = &a.trace {
        let text = serde_json::to_string_pretty(&u.trace_json()).expect("serialisable");
        std::fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    let stopped = u.stopped.map(|_| "node budget");
    emit(
        json,
        json!({
            "formula": f.to_string(),
            "dialect": dialect.name(),
            "rounds": u.rounds,
            "nodes": u.len(),
            "stopped": stopped,
            "truth": truth,
            "monitor": {
                "branches": monitor.branches,
                "entries": monitor.entries,
                "eu_extinguished": monitor.eu_extinguished,
                "eu_pending": monitor.eu_pending,
                "af_settled": monitor.af_settled,
                "af_unsettled": monitor.af_unsettled,
                "max_active": monitor.max_active,
                "bound_violations": monitor.bound_violations,
                "type_violations": monitor.type_violations,
                "rho_violations": monitor.rho_violations,
            },
        }),
        || {
            let mut out = format!(
                "{} rounds, {} nodes, dialect {}{}\n",
                u.rounds,
                u.len(),
                dialect.name(),
                stopped.map_or(String::new(), |s| format!(", stopped by {s}"))
            );
            out.push_str(&u.summary());
            out.push_str(&format!(
                "truth: {} checked, {} verified, {} via successor, {} deferred, {} violated\n",
                truth.checked, truth.verified, truth.via_successor, truth.deferred, truth.violated
            ));
            out.push_str(&format!(
                "eventualities: {} entries on {} branches, EU {} extinguished {} pending, AF {} settled {} active, max active {}\n",
                monitor.entries,
                monitor.branches,
                monitor.eu_extinguished,
                monitor.eu_pending,
                monitor.af_settled,
                monitor.af_unsettled,
                monitor.max_active
            ));
            out
        },
    );
    if truth.ok() && monitor.ok() {
        Ok(())
    } else {
        Err(Failure::Violation("tableau check failed".to_string()))
    }
}

fn accepts(a: AcceptsArgs, json: bool) -> Outcome {
    let Automaton::Parity(aut) = automaton(&a.aut)? else {
        return Err(Failure::Input("accepts needs a parity tree automaton".to_string()));
    };
    let gen = model(&a.model)?;
    let acc = accepts_regular(&aut, &gen).map_err(input)?;
    let choice: Vec<Value> = acc
        .strategy
        .iter()
        .map(|((s, q), t)| {
            json!({
                "state": s,
                "automaton_state": aut.states[*q],
                "left": aut.states[t.left],
                "right": aut.states[t.right],
            })
        })
        .collect();
    emit(
        json,
        json!({ "accepted": acc.accepted, "game_vertices": acc.game_vertices, "strategy": choice }),
        || {
            let mut out = format!("{}\n", if acc.accepted { "accepted" } else { "rejected" });
            if acc.accepted {
                for ((s, q), t) in &acc.strategy {
                    out.push_str(&format!(
                        "  ({s}, {}) -> {} {}\n",
                        aut.states[*q], aut.states[t.left], aut.states[t.right]
                    ));
                }
            }
            out
        },
    );
    Ok(())
}

fn acc_term(a: AccTermArgs, json: bool) -> Outcome {
    let aut = automaton(&a.aut)?;
    let t = compile_acc(&aut);
    emit(json, json!({ "acc": t.to_string(), "size": t.size() }), || format!("{t}\n"));
    Ok(())
}

fn to_mso(a: ToMsoArgs, json: bool) -> Outcome {
    let f = formula(&a.formula, a.dialect)?;
    if f.vars().contains(&a.var) {
        return Err(Failure::Input(format!("`{}` is a proposition of the formula", a.var)));
    }
    let m = standard_translation(&f, &a.var);
    emit(json, json!({ "formula": f.to_string(), "var": a.var, "mso": m.to_string() }), || {
        format!("{m}\n")
    });
    Ok(())
}

fn parse_assignment(text: &str, n: usize) -> Result<(String, NodeSet), Failure> {
    let (name, states) = text
        .split_once('=')
        .ok_or_else(|| Failure::Input(format!("expected name=states in `{text}`")))?;
    let mut set = NodeSet::empty(n);
    for w in states.split(',').map(str::trim).filter(|w| !w.is_empty()) {
        let s: usize = w
            .parse()
            .map_err(|_| Failure::Input(format!("bad state `{w}` in `{text}`")))?;
        if s >= n {
            return Err(Failure::Input(format!("state {s} out of range 0..{n}")));
        }
        set.insert(s);
    }
    Ok((name.to_string(), set))
}

fn mso_eval_cmd(a: MsoEvalArgs, json: bool) -> Outcome {
    let ts = model(&a.model)?;
    let phi = parse_mso(&a.mso).map_err(input)?;
    let free: BTreeSet<String> = phi.free_vars();
    let mut v = Valuation::from_colouring_with(&ts, &free);
    for item in &a.assign {
        let (name, set) = parse_assignment(item, ts.len())?;
        v.insert(name, set);
    }
    let holds = mso_eval(&phi, &ts, &v).map_err(input)?;
    emit(json, json!({ "mso": phi.to_string(), "holds": holds }), || format!("{holds}\n"));
    Ok(())
}

fn nnf_cmd(a: FormulaArgs, json: bool) -> Outcome {
    let f = formula(&a.formula, a.dialect)?;
    let g = nnf(&f);
    emit(json, json!({ "formula": f.to_string(), "nnf": g.to_string() }), || format!("{g}\n"));
    Ok(())
}

fn closure(a: FormulaArgs, json: bool) -> Outcome {
    let f = formula(&a.formula, a.dialect)?;
    let dialect = a.dialect.unwrap_or_else(|| f.dialect());
    let cl = fischer_ladner_closure([&f], dialect);
    let rows: Vec<(String, &str)> = cl
        .iter()
        .map(|g| (g.to_string(), cl.rule(g).map_or("", |r| r.name())))
        .collect();
    let members: Vec<Value> = rows.iter().map(|(g, r)| json!({ "formula": g, "rule": r })).collect();
    emit(json, json!({ "formula": f.to_string(), "size": rows.len(), "members": members }), || {
        let width = rows.iter().map(|(g, _)| g.len()).max().unwrap_or(0);
        rows.iter().map(|(g, r)| format!("{g:<width$}  {r}\n")).collect()
    });
    Ok(())
}

fn selftest(a: SelftestArgs, json: bool) -> Outcome {
    if a.depth == 0 {
        return Err(Failure::Input("--depth must be positive".to_string()));
    }
    let cfg = SelftestConfig {
        seed: a.seed,
        samples: a.samples,
        depth: a.depth,
    };
    let report = run_selftest(&cfg);
    emit(json, serde_json::to_value(&report).expect("serialisable"), || report.render());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation(String::new()))
    }
}
