/// The two players of a parity game; `Even` wins plays whose least
/// infinitely recurring priority is even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    Even,
    Odd,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Even => Player::Odd,
            Player::Odd => Player::Even,
        }
    }

    fn of_priority(p: u32) -> Player {
        if p.is_multiple_of(2) {
            Player::Even
        } else {
            Player::Odd
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// A finite min-parity game in which every vertex has a successor.
#[derive(Clone, Debug, Default)]
pub struct ParityGame {
    pub owner: Vec<Player>,
    pub prio: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
}

impl ParityGame {
    pub fn add_vertex(&mut self, owner: Player, prio: u32) -> usize {
        self.owner.push(owner);
        self.prio.push(prio);
        self.succ.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }
}

/// Winning regions and positional winning strategies.
#[derive(Clone, Debug)]
pub struct Solution {
    pub winner: Vec<Player>,
    /// For each vertex won by its owner, a move that keeps winning.
    pub strategy: Vec<Option<usize>>,
}

/// Solves a parity game with the recursive attractor algorithm.
pub fn solve_parity_game(g: &ParityGame) -> Solution {
    let n = g.len();
    let mut pred = vec![Vec::new(); n];
    for (v, list) in g.succ.iter().enumerate() {
        assert!(!list.is_empty(), "vertex {v} has no successor");
        for &w in list {
            pred[w].push(v);
        }
    }
    let solver = Solver { g, pred };
    let (win, strategy) = solver.solve(&vec![true; n]);
    let winner = (0..n)
        .map(|v| if win[0][v] { Player::Even } else { Player::Odd })
        .collect();
    Solution { winner, strategy }
}

struct Solver<'a> {
    g: &'a ParityGame,
    pred: Vec<Vec<usize>>,
}

type Regions = [Vec<bool>; 2];

impl Solver<'_> {
    /// Vertices of `alive` from which `pl` forces a visit to `target`,
    /// with attractor moves recorded in `strategy`.
    fn attractor(&self, alive: &[bool], target: &[bool], pl: Player, strategy: &mut [Option<usize>]) -> Vec<bool> {
        let n = self.g.len();
        let mut attr: Vec<bool> = (0..n).map(|v| alive[v] && target[v]).collect();
        let mut count: Vec<usize> = (0..n)
            .map(|v| self.g.succ[v].iter().filter(|&&w| alive[w]).count())
            .collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| attr[v]).collect();
        while let Some(w) = queue.pop() {
            for &v in &self.pred[w] {
                if !alive[v] || attr[v] {
                    continue;
                }
                if self.g.owner[v] == pl {
                    attr[v] = true;
                    strategy[v] = Some(w);
                    queue.push(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        attr[v] = true;
                        queue.push(v);
                    }
                }
            }
        }
        attr
    }

    fn solve(&self, alive: &[bool]) -> (Regions, Vec<Option<usize>>) {
        let n = self.g.len();
        let mut strategy = vec![None; n];
        let Some(p) = (0..n).filter(|&v| alive[v]).map(|v| self.g.prio[v]).min() else {
            return ([vec![false; n], vec![false; n]], strategy);
        };
        let i = Player::of_priority(p);
        let opp = i.opponent();
        let top: Vec<bool> = (0..n).map(|v| alive[v] && self.g.prio[v] == p).collect();
        let mut attr_moves = vec![None; n];
        let a = self.attractor(alive, &top, i, &mut attr_moves);
        let rest: Vec<bool> = (0..n).map(|v| alive[v] && !a[v]).collect();
        let (w1, s1) = self.solve(&rest);
        if !w1[opp.index()].iter().any(|&b| b) {
            let mut win = [vec![false; n], vec![false; n]];
            win[i.index()] = alive.to_vec();
            for v in (0..n).filter(|&v| alive[v] && self.g.owner[v] == i) {
                strategy[v] = if rest[v] {
                    s1[v]
                } else if top[v] {
                    self.g.succ[v].iter().copied().find(|&w| alive[w])
                } else {
                    attr_moves[v]
                };
            }
            return (win, strategy);
        }
        let mut opp_moves = vec![None; n];
        let b = self.attractor(alive, &w1[opp.index()], opp, &mut opp_moves);
        let remain: Vec<bool> = (0..n).map(|v| alive[v] && !b[v]).collect();
        let (w2, s2) = self.solve(&remain);
        let mut win = [vec![false; n], vec![false; n]];
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            if b[v] {
                win[opp.index()][v] = true;
                if self.g.owner[v] == opp {
                    strategy[v] = if w1[opp.index()][v] { s1[v] } else { opp_moves[v] };
                }
            } else {
                let who = if w2[opp.index()][v] { opp } else { i };
                win[who.index()][v] = true;
                if self.g.owner[v] == who {
                    strategy[v] = s2[v];
                }
            }
        }
        (win, strategy)
    }
}
