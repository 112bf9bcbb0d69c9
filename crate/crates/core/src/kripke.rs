//! Finite serial transition systems with colourings, optional roots and
//! optional deterministic successor maps, plus finite tree unravellings.

use crate::formula::is_proposition_name;
use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KripkeError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("state {0} not serial")]
    NotSerial(usize),
    #[error("state {state} out of range (system has {n} states)")]
    OutOfRange { state: usize, n: usize },
    #[error("state {0} lacks an f0 or f1 successor")]
    MissingSuccessor(usize),
    #[error("edge relation differs from the union of f0 and f1")]
    SuccessorMismatch,
    #[error("bad root: {0}")]
    BadRoot(String),
    #[error("the system has no root")]
    NoRoot,
    #[error("invalid proposition name `{0}`")]
    BadName(String),
}

/// A finite serial transition system with a colouring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    colour: Vec<BTreeSet<String>>,
    root: Option<usize>,
    maps: Option<[Vec<usize>; 2]>,
}

impl TransitionSystem {
    /// Builds and validates a system from an edge list.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        colour: Vec<BTreeSet<String>>,
        root: Option<usize>,
    ) -> Result<Self, KripkeError> {
        let mut succ = vec![Vec::new(); n];
        for (i, j) in edges {
            check_range(i, n)?;
            check_range(j, n)?;
            succ[i].push(j);
        }
        Self::assemble(succ, colour, root, None)
    }

    /// Builds a binary system from its successor maps; the edge relation
    /// is their union.
    pub fn binary(
        f0: Vec<usize>,
        f1: Vec<usize>,
        colour: Vec<BTreeSet<String>>,
        root: Option<usize>,
    ) -> Result<Self, KripkeError> {
        let n = f0.len();
        if f1.len() != n {
            return Err(KripkeError::MissingSuccessor(n.min(f1.len())));
        }
        let mut succ = vec![Vec::new(); n];
        for s in 0..n {
            check_range(f0[s], n)?;
            check_range(f1[s], n)?;
            succ[s].push(f0[s]);
            succ[s].push(f1[s]);
        }
        Self::assemble(succ, colour, root, Some([f0, f1]))
    }

    fn assemble(
        mut succ: Vec<Vec<usize>>,
        mut colour: Vec<BTreeSet<String>>,
        root: Option<usize>,
        maps: Option<[Vec<usize>; 2]>,
    ) -> Result<Self, KripkeError> {
        let n = succ.len();
        if colour.len() > n {
            return Err(KripkeError::OutOfRange { state: colour.len() - 1, n });
        }
        colour.resize(n, BTreeSet::new());
        for names in &colour {
            if let Some(bad) = names.iter().find(|p| !is_proposition_name(p)) {
                return Err(KripkeError::BadName(bad.clone()));
            }
        }
        let mut pred = vec![Vec::new(); n];
        for (s, list) in succ.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.is_empty() {
                return Err(KripkeError::NotSerial(s));
            }
            for &t in list.iter() {
                pred[t].push(s);
            }
        }
        let ts = TransitionSystem { succ, pred, colour, root, maps };
        if let Some(r) = root {
            check_range(r, n).map_err(|_| KripkeError::BadRoot(format!("root {r} out of range")))?;
            let reach = ts.reachable_from(r);
            if let Some(s) = (0..n).find(|s| !reach[*s]) {
                return Err(KripkeError::BadRoot(format!("state {s} is not reachable from root {r}")));
            }
        }
        Ok(ts)
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }

    pub fn predecessors(&self, s: usize) -> &[usize] {
        &self.pred[s]
    }

    pub fn has_edge(&self, s: usize, t: usize) -> bool {
        self.succ[s].binary_search(&t).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(s, l)| l.iter().map(move |&t| (s, t)))
    }

    pub fn colour(&self, s: usize) -> &BTreeSet<String> {
        &self.colour[s]
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    /// True when the root exists and no edge enters it.
    pub fn has_proper_root(&self) -> bool {
        matches!(self.root, Some(r) if self.pred[r].is_empty())
    }

    pub fn is_binary(&self) -> bool {
        self.maps.is_some()
    }

    /// `f_i(s)` for a binary system.
    pub fn step(&self, dir: bool, s: usize) -> Option<usize> {
        self.maps.as_ref().map(|m| m[dir as usize][s])
    }

    /// Proposition names used by the colouring, sorted.
    pub fn propositions(&self) -> BTreeSet<String> {
        self.colour.iter().flatten().cloned().collect()
    }

    /// Replaces the colouring.
    pub fn with_colouring(mut self, colour: Vec<BTreeSet<String>>) -> Result<Self, KripkeError> {
        let n = self.len();
        if colour.len() != n {
            return Err(KripkeError::OutOfRange { state: colour.len(), n });
        }
        if let Some(bad) = colour.iter().flatten().find(|p| !is_proposition_name(p)) {
            return Err(KripkeError::BadName(bad.clone()));
        }
        self.colour = colour;
        Ok(self)
    }

    /// States reachable from `s` (including `s`).
    pub fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            for &t in &self.succ[u] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }
}

fn check_range(s: usize, n: usize) -> Result<(), KripkeError> {
    if s < n {
        Ok(())
    } else {
        Err(KripkeError::OutOfRange { state: s, n })
    }
}

/// Reads the line-based model format.
pub fn load_system(text: &str) -> Result<TransitionSystem, KripkeError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut colour: Vec<BTreeSet<String>> = Vec::new();
    let mut root = None;
    let mut maps: [Vec<Option<usize>>; 2] = [Vec::new(), Vec::new()];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| KripkeError::Parse { line: line_no, msg };
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |w: &str| w.parse::<usize>().map_err(|_| err(format!("expected a number, found `{w}`")));
        let need_n = || n.ok_or_else(|| err("`states N` must come first".into()));
        match (words[0], words.len()) {
            ("states", 2) => {
                if n.is_some() {
                    return Err(err("duplicate `states` line".into()));
                }
                let count = num(words[1])?;
                n = Some(count);
                colour = vec![BTreeSet::new(); count];
                maps = [vec![None; count], vec![None; count]];
            }
            ("edge", 3) => {
                let count = need_n()?;
                let (i, j) = (num(words[1])?, num(words[2])?);
                check_range(i, count)?;
                check_range(j, count)?;
                edges.push((i, j));
            }
            ("color" | "colour", 3) => {
                let count = need_n()?;
                let i = num(words[1])?;
                check_range(i, count)?;
                if !is_proposition_name(words[2]) {
                    return Err(KripkeError::BadName(words[2].to_string()));
                }
                colour[i].insert(words[2].to_string());
            }
            ("root", 2) => {
                need_n()?;
                if root.is_some() {
                    return Err(err("duplicate `root` line".into()));
                }
                root = Some(num(words[1])?);
            }
            ("f0" | "f1", 3) => {
                let count = need_n()?;
                let (i, j) = (num(words[1])?, num(words[2])?);
                check_range(i, count)?;
                check_range(j, count)?;
                let slot = &mut maps[(words[0] == "f1") as usize][i];
                if slot.is_some() {
                    return Err(err(format!("duplicate {} entry for state {i}", words[0])));
                }
                *slot = Some(j);
            }
            _ => return Err(err(format!("unrecognised line `{line}`"))),
        }
    }
    let n = n.ok_or(KripkeError::Parse {
        line: 0,
        msg: "missing `states N` line".into(),
    })?;
    let any_map = maps.iter().flatten().any(Option::is_some);
    if !any_map {
        return TransitionSystem::new(n, edges, colour, root);
    }
    let mut full: [Vec<usize>; 2] = [Vec::with_capacity(n), Vec::with_capacity(n)];
    for d in 0..2 {
        for s in 0..n {
            full[d].push(maps[d][s].ok_or(KripkeError::MissingSuccessor(s))?);
        }
    }
    let [f0, f1] = full;
    let ts = TransitionSystem::binary(f0, f1, colour, root)?;
    if !edges.is_empty() {
        let given: BTreeSet<_> = edges.into_iter().collect();
        let derived: BTreeSet<_> = ts.edges().collect();
        if given != derived {
            return Err(KripkeError::SuccessorMismatch);
        }
    }
    Ok(ts)
}

/// Writes the line-based model format; binary systems omit `edge` lines.
pub fn save_system(ts: &TransitionSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states {}", ts.len());
    if let Some(r) = ts.root {
        let _ = writeln!(out, "root {r}");
    }
    match &ts.maps {
        Some([f0, f1]) => {
            for s in 0..ts.len() {
                let _ = writeln!(out, "f0 {s} {}", f0[s]);
                let _ = writeln!(out, "f1 {s} {}", f1[s]);
            }
        }
        None => {
            for (s, t) in ts.edges() {
                let _ = writeln!(out, "edge {s} {t}");
            }
        }
    }
    for s in 0..ts.len() {
        for p in &ts.colour[s] {
            let _ = writeln!(out, "color {s} {p}");
        }
    }
    out
}

/// A node of a finite unravelling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Image of the node in the system (the projection `z`).
    pub state: usize,
    pub depth: usize,
    /// Copy index `k` of the last step (0 for the root and for plain unravelling).
    pub copy: usize,
}

/// A finite tree prefix, nodes in breadth-first order with the root at 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The sequence `(k1,s1)…(kn,sn)` naming a node; empty for the root.
    pub fn sequence(&self, mut v: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        while let Some(p) = self.nodes[v].parent {
            out.push((self.nodes[v].copy, self.nodes[v].state));
            v = p;
        }
        out.reverse();
        out
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&v| self.nodes[v].children.is_empty())
    }

    /// Node ids from the root to `v`.
    pub fn branch(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while let Some(p) = self.nodes[v].parent {
            out.push(p);
            v = p;
        }
        out.reverse();
        out
    }
}

fn expand_tree(root: usize, depth: usize, mut kids: impl FnMut(usize) -> Vec<(usize, usize)>) -> Tree {
    let mut nodes = vec![TreeNode {
        parent: None,
        children: Vec::new(),
        state: root,
        depth: 0,
        copy: 0,
    }];
    let mut frontier = vec![0];
    for d in 0..depth {
        let mut next = Vec::new();
        for v in frontier {
            for (copy, t) in kids(nodes[v].state) {
                let id = nodes.len();
                nodes.push(TreeNode {
                    parent: Some(v),
                    children: Vec::new(),
                    state: t,
                    depth: d + 1,
                    copy,
                });
                nodes[v].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    Tree { nodes }
}

/// The tree of paths from the root, cut at depth `d`. Binary systems
/// unravel along `f0`, `f1`, so every node has exactly two children.
pub fn unravel_to_depth(ts: &TransitionSystem, d: usize) -> Result<Tree, KripkeError> {
    let root = ts.root.ok_or(KripkeError::NoRoot)?;
    Ok(match &ts.maps {
        Some([f0, f1]) => expand_tree(root, d, |s| vec![(0, f0[s]), (1, f1[s])]),
        None => expand_tree(root, d, |s| ts.succ[s].iter().map(|&t| (0, t)).collect()),
    })
}

/// The ω-expansion cut at depth `d` with `w` copies of every successor.
pub fn omega_expand_to_depth(ts: &TransitionSystem, d: usize, w: usize) -> Result<Tree, KripkeError> {
    let root = ts.root.ok_or(KripkeError::NoRoot)?;
    let w = w.max(1);
    Ok(expand_tree(root, d, |s| {
        ts.succ[s]
            .iter()
            .flat_map(|&t| (0..w).map(move |k| (k, t)))
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_examples() {
        let ts = load_system("states 1\nedge 0 0\ncolor 0 p\n").unwrap();
        assert_eq!(ts.len(), 1);
        assert!(ts.colour(0).contains("p"));
        assert_eq!(
            load_system("states 2\nedge 0 1\n").unwrap_err().to_string(),
            "state 1 not serial"
        );
        let gen = load_system("# full binary tree\nstates 1\nroot 0\nf0 0 0\nf1 0 0\n").unwrap();
        assert!(gen.is_binary());
        assert_eq!(gen.root(), Some(0));
    }

    #[test]
    fn load_errors() {
        assert!(matches!(load_system("states 2\nedge 0 1\nedge 1 1\nroot 1\n"), Err(KripkeError::BadRoot(_))));
        assert!(matches!(load_system("states 1\nf0 0 0\n"), Err(KripkeError::MissingSuccessor(0))));
        assert!(matches!(
            load_system("states 2\nf0 0 1\nf1 0 1\nf0 1 1\nf1 1 1\nedge 0 0\n"),
            Err(KripkeError::SuccessorMismatch)
        ));
        assert!(matches!(load_system("states 1\nedge 0 3\n"), Err(KripkeError::OutOfRange { .. })));
        assert!(matches!(load_system("states 1\nedge 0 0\ncolor 0 dia\n"), Err(KripkeError::BadName(_))));
        assert!(matches!(load_system("edge 0 0\n"), Err(KripkeError::Parse { line: 1, .. })));
    }

    #[test]
    fn save_round_trip() {
        let text = "states 3\nroot 0\nedge 0 1\nedge 0 2\nedge 1 2\nedge 2 1\ncolor 1 p\ncolor 2 q\n";
        let ts = load_system(text).unwrap();
        assert_eq!(load_system(&save_system(&ts)).unwrap(), ts);
        let gen = load_system("states 2\nroot 0\nf0 0 1\nf1 0 0\nf0 1 1\nf1 1 0\ncolor 1 p\n").unwrap();
        let saved = save_system(&gen);
        assert!(!saved.contains("edge"));
        assert_eq!(load_system(&saved).unwrap(), gen);
    }

    #[test]
    fn proper_root() {
        let ts = load_system("states 2\nroot 0\nedge 0 1\nedge 1 1\n").unwrap();
        assert!(ts.has_proper_root());
        let gen = load_system("states 1\nroot 0\nf0 0 0\nf1 0 0\n").unwrap();
        assert!(!gen.has_proper_root());
    }

    #[test]
    fn unravel_examples() {
        let loop1 = load_system("states 1\nroot 0\nedge 0 0\n").unwrap();
        let t = unravel_to_depth(&loop1, 2).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.nodes.iter().all(|n| n.children.len() <= 1));

        let gen = load_system("states 1\nroot 0\nf0 0 0\nf1 0 0\n").unwrap();
        assert_eq!(unravel_to_depth(&gen, 2).unwrap().len(), 7);

        let cyc = load_system("states 2\nroot 0\nedge 0 1\nedge 1 0\n").unwrap();
        let t = unravel_to_depth(&cyc, 3).unwrap();
        let states: Vec<_> = t.nodes.iter().map(|n| n.state).collect();
        assert_eq!(states, vec![0, 1, 0, 1]);
    }

    #[test]
    fn omega_examples() {
        let loop1 = load_system("states 1\nroot 0\nedge 0 0\ncolor 0 p\n").unwrap();
        let t = omega_expand_to_depth(&loop1, 1, 2).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.nodes[0].children.len(), 2);
        assert_eq!(t.sequence(2), vec![(1, 0)]);
        let cyc = load_system("states 3\nroot 0\nedge 0 1\nedge 0 2\nedge 1 0\nedge 2 2\n").unwrap();
        assert_eq!(omega_expand_to_depth(&cyc, 3, 1).unwrap(), unravel_to_depth(&cyc, 3).unwrap());
    }
}
