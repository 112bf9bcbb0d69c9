use std::path::PathBuf;
use std::process::{Command, Output};

fn fairctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairctl"))
        .args(args)
        .output()
        .expect("fairctl runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fairctl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const CYCLE: &str = "states 2\nedge 0 1\nedge 1 0\ncolor 1 p\n";

#[test]
fn nnf_pushes_negation_through_until() {
    let o = fairctl(&["nnf", "--formula", "~EU(p,q)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "AR(~p,~q)");
}

#[test]
fn closure_lists_the_eg_unfolding() {
    let o = fairctl(&["--json", "closure", "--formula", "EG(p,q)"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let members: Vec<&str> = v["members"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["formula"].as_str().unwrap())
        .collect();
    assert!(members.contains(&"dia EU(q & EG(p,q),p)"), "{members:?}");
}

#[test]
fn check_reports_sets_and_single_states() {
    let m = write("cycle.ts", CYCLE);
    let m = m.to_str().unwrap();
    let o = fairctl(&["check", "--model", m, "--formula", "EG(true,p)"]);
    assert_eq!(stdout(&o).trim(), "{0, 1}");
    let yes = fairctl(&["check", "--model", m, "--formula", "p", "--at", "1"]);
    assert_eq!((stdout(&yes).trim(), yes.status.code()), ("yes", Some(0)));
    let no = fairctl(&["check", "--model", m, "--formula", "p", "--at", "0"]);
    assert_eq!((stdout(&no).trim(), no.status.code()), ("no", Some(1)));
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(fairctl(&["check", "--formula", "p"]).status.code(), Some(2));
    assert_eq!(fairctl(&["nnf", "--formula", "EU(p"]).status.code(), Some(2));
    let missing = fairctl(&["check", "--model", "/nonexistent/m.ts", "--formula", "p"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn version_and_help_on_subcommands() {
    for sub in ["check", "unravel", "selftest", "mso-eval"] {
        assert_eq!(fairctl(&[sub, "--help"]).status.code(), Some(0));
        let v = fairctl(&[sub, "--version"]);
        assert!(stdout(&v).contains(env!("CARGO_PKG_VERSION")), "{sub}");
    }
}

#[test]
fn axioms_on_random_models() {
    let o = fairctl(&["axioms", "--states", "3", "--samples", "4", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("violations 0"));
}

#[test]
fn unravel_writes_a_trace() {
    let m = write("rooted.ts", "states 3\nroot 0\nedge 0 1\nedge 1 2\nedge 2 1\ncolor 2 p\n");
    let trace = m.with_file_name("trace.json");
    let o = fairctl(&[
        "unravel",
        "--model",
        m.to_str().unwrap(),
        "--formula",
        "EU(p,true)",
        "--depth",
        "4",
        "--dialect",
        "rooted",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    let nodes = v["nodes"].as_array().unwrap();
    assert!(!nodes.is_empty());
    for key in ["id", "parent", "alpha_state", "colour", "beta", "jump"] {
        assert!(nodes[0].get(key).is_some(), "{key}");
    }
    assert_eq!(v["rounds"], 4);
}

#[test]
fn automaton_commands() {
    let aut = write(
        "all.aut",
        "parity\nprops p\nstates q0\ninit q0\nprio q0 0\ndelta q0 {} -> q0 q0\ndelta q0 {p} -> q0 q0\n",
    );
    let gen = write("gen.ts", "states 1\nroot 0\nf0 0 0\nf1 0 0\ncolor 0 p\n");
    let o = fairctl(&["accepts", "--aut", aut.to_str().unwrap(), "--model", gen.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("accepted"));
    let t = fairctl(&["acc-term", "--aut", aut.to_str().unwrap()]);
    assert_eq!(t.status.code(), Some(0));
    assert!(stdout(&t).contains("q0"));
}

#[test]
fn mso_commands() {
    let m = write("mso.ts", CYCLE);
    let o = fairctl(&["mso-eval", "--model", m.to_str().unwrap(), "--mso", "edge(x,p)", "--assign", "x=0"]);
    assert_eq!(stdout(&o).trim(), "true");
    let t = fairctl(&["to-mso", "--formula", "dia p"]);
    assert_eq!(t.status.code(), Some(0));
    assert!(stdout(&t).contains("edge("));
}

#[test]
fn identical_arguments_identical_output() {
    let args = ["axioms", "--states", "5", "--samples", "3", "--seed", "11", "--dialect", "rooted"];
    assert_eq!(fairctl(&args).stdout, fairctl(&args).stdout);
}
