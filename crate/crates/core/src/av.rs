//! Adversarial visible robber: optimal game durations by backward value
//! iteration over `C(x, y)` (cops to move) and `R(x, y)` (robber to move).
//!
//! Durations count individual player moves; one round is a cop move
//! followed by a robber move, so capture time in rounds is `ceil(C / 2)`.

use crate::config::{ConfigSpace, DEFAULT_STATE_BUDGET};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// A game duration in player moves, or no capture at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Duration {
    Finite(u32),
    Infinite,
}

impl Duration {
    pub const ZERO: Duration = Duration::Finite(0);

    /// One more move; infinity absorbs.
    pub fn incr(self) -> Duration {
        match self {
            Duration::Finite(d) => Duration::Finite(d + 1),
            Duration::Infinite => Duration::Infinite,
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Duration::Finite(d) => Some(d),
            Duration::Infinite => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValueTables {
    space: ConfigSpace,
    closed: Vec<Vec<usize>>,
    cop: Vec<Duration>,
    robber: Vec<Duration>,
    cop_policy: Vec<u32>,
    robber_policy: Vec<u32>,
    sweeps: usize,
}

impl ValueTables {
    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    fn cell(&self, config: usize, robber: usize) -> usize {
        config * self.space.n() + robber
    }

    /// `C(x, y)`: duration with the cops to move.
    pub fn cop_to_move(&self, config: usize, robber: usize) -> Duration {
        self.cop[self.cell(config, robber)]
    }

    /// `R(x, y)`: duration with the robber to move.
    pub fn robber_to_move(&self, config: usize, robber: usize) -> Duration {
        self.robber[self.cell(config, robber)]
    }

    /// Minimizing successor configuration, lowest index on ties.
    /// `None` on capture positions.
    pub fn cop_policy(&self, config: usize, robber: usize) -> Option<usize> {
        let p = self.cop_policy[self.cell(config, robber)];
        (p != u32::MAX).then_some(p as usize)
    }

    /// Maximizing robber node in `N[y]`, lowest index on ties.
    pub fn robber_policy(&self, config: usize, robber: usize) -> Option<usize> {
        let p = self.robber_policy[self.cell(config, robber)];
        (p != u32::MAX).then_some(p as usize)
    }

    /// Sweeps performed, including the final one that changed nothing.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Checks the optimality equations by direct substitution.
    pub fn satisfies_optimality_equations(&self) -> bool {
        let n = self.space.n();
        (0..self.space.len()).all(|x| {
            (0..n).all(|y| {
                let i = self.cell(x, y);
                if self.space.occupies(x, y) {
                    return self.cop[i] == Duration::ZERO && self.robber[i] == Duration::ZERO;
                }
                let c = self
                    .space
                    .successors(x)
                    .iter()
                    .map(|&x2| self.robber_to_move(x2 as usize, y))
                    .min()
                    .unwrap()
                    .incr();
                let r = self.closed[y].iter().map(|&y2| self.cop_to_move(x, y2)).max().unwrap().incr();
                c == self.cop[i] && r == self.robber[i]
            })
        })
    }

    /// Writes the memoryless strategies, one position per line:
    /// `C <cops> <robber> <next cops>` and `R <cops> <robber> <next robber>`,
    /// 1-based.
    pub fn policy_text(&self) -> String {
        let mut out = format!("# adversarial visible, cops={} n={}\n", self.space.cops(), self.space.n());
        for x in 0..self.space.len() {
            for y in 0..self.space.n() {
                if let Some(next) = self.cop_policy(x, y) {
                    out.push_str(&format!("C {} {} {}\n", self.space.label(x), y + 1, self.space.label(next)));
                }
            }
        }
        for x in 0..self.space.len() {
            for y in 0..self.space.n() {
                if let Some(next) = self.robber_policy(x, y) {
                    out.push_str(&format!("R {} {} {}\n", self.space.label(x), y + 1, next + 1));
                }
            }
        }
        out
    }
}

pub fn caar_solve(g: &Graph, cops: usize) -> Result<ValueTables> {
    caar_solve_observed(g, cops, DEFAULT_STATE_BUDGET, |_, _| {})
}

/// As [`caar_solve`], calling `observe(C, R)` after every sweep.
pub(crate) fn caar_solve_observed(
    g: &Graph,
    cops: usize,
    budget: u128,
    mut observe: impl FnMut(&[Duration], &[Duration]),
) -> Result<ValueTables> {
    let space = ConfigSpace::new(g, cops, budget)?;
    let n = g.n();
    let m = space.len();
    let closed: Vec<Vec<usize>> = (0..n).map(|v| g.closed_neighbors(v)).collect();
    let init = |i: usize| {
        if space.occupies(i / n, i % n) {
            Duration::ZERO
        } else {
            Duration::Infinite
        }
    };
    let mut cop: Vec<Duration> = (0..m * n).map(init).collect();
    let mut robber = cop.clone();
    let cap = 2 * 2 * m * n + 1;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        if sweeps > cap {
            return Err(Error::NotConverged { iterations: cap });
        }
        // C from the previous R, then R from the new C
        let new_cop: Vec<Duration> = (0..m * n)
            .map(|i| {
                let (x, y) = (i / n, i % n);
                if space.occupies(x, y) {
                    return Duration::ZERO;
                }
                space
                    .successors(x)
                    .iter()
                    .map(|&x2| robber[x2 as usize * n + y])
                    .min()
                    .unwrap()
                    .incr()
            })
            .collect();
        let new_robber: Vec<Duration> = (0..m * n)
            .map(|i| {
                let (x, y) = (i / n, i % n);
                if space.occupies(x, y) {
                    return Duration::ZERO;
                }
                closed[y].iter().map(|&y2| new_cop[x * n + y2]).max().unwrap().incr()
            })
            .collect();
        observe(&new_cop, &new_robber);
        let done = new_cop == cop && new_robber == robber;
        cop = new_cop;
        robber = new_robber;
        if done {
            break;
        }
    }

    let mut cop_policy = vec![u32::MAX; m * n];
    let mut robber_policy = vec![u32::MAX; m * n];
    for x in 0..m {
        for y in 0..n {
            if space.occupies(x, y) {
                continue;
            }
            let i = x * n + y;
            let mut best: Option<(Duration, u32)> = None;
            for &x2 in space.successors(x) {
                let v = robber[x2 as usize * n + y];
                if best.map_or(true, |(b, _)| v < b) {
                    best = Some((v, x2));
                }
            }
            cop_policy[i] = best.unwrap().1;
            let mut worst: Option<(Duration, usize)> = None;
            for &y2 in &closed[y] {
                let v = cop[x * n + y2];
                if worst.map_or(true, |(w, _)| v > w) {
                    worst = Some((v, y2));
                }
            }
            robber_policy[i] = worst.unwrap().1 as u32;
        }
    }
    Ok(ValueTables { space, closed, cop, robber, cop_policy, robber_policy, sweeps })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CaptureTime {
    /// Optimal rounds to capture.
    pub rounds: u32,
    /// `min_x max_y C(x, y)` in player moves.
    pub half_moves: u32,
    /// The minimizing initial cop configuration (lowest index).
    pub start: usize,
}

/// `ct = ceil(min_x max_y C(x, y) / 2)` rounds.
pub fn capture_time(tables: &ValueTables) -> Result<CaptureTime> {
    let n = tables.space.n();
    if tables.cop.iter().any(|d| *d == Duration::Infinite) {
        return Err(Error::InfiniteCaptureTime { cops: tables.space.cops() });
    }
    let (start, worst) = (0..tables.space.len())
        .map(|x| (x, (0..n).map(|y| tables.cop_to_move(x, y)).max().unwrap()))
        .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
        .unwrap();
    let half_moves = worst.finite().expect("checked finite");
    Ok(CaptureTime { rounds: half_moves.div_ceil(2), half_moves, start })
}

const UNKNOWN: u32 = u32::MAX;
const ESCAPES: u32 = u32::MAX - 1;

/// Exhaustive depth-limited minimax over game trees, in rounds: the cops
/// choose a placement, the robber answers, then rounds alternate. Returns
/// the optimal number of rounds or [`Error::NoForcedCapture`] when the
/// cops cannot force capture within `horizon` rounds.
pub fn minimax_oracle(g: &Graph, cops: usize, horizon: usize) -> Result<u32> {
    let space = ConfigSpace::new(g, cops, DEFAULT_STATE_BUDGET)?;
    let n = g.n();
    let cells = space.len() as u128 * n as u128 * (horizon as u128 + 1);
    if cells > DEFAULT_STATE_BUDGET {
        return Err(Error::BudgetExceeded { required: cells, budget: DEFAULT_STATE_BUDGET });
    }
    let mut oracle = Minimax {
        space: &space,
        closed: (0..n).map(|v| g.closed_neighbors(v)).collect(),
        memo: vec![UNKNOWN; cells as usize],
        horizon,
    };
    let mut best = ESCAPES;
    for x in 0..space.len() {
        let mut worst = 0;
        for y in 0..n {
            let v = if space.occupies(x, y) { 0 } else { oracle.cops_move(x, y, horizon) };
            worst = worst_for_cops(worst, v);
        }
        best = best_for_cops(best, worst);
    }
    if best == ESCAPES {
        Err(Error::NoForcedCapture { horizon })
    } else {
        Ok(best)
    }
}

fn best_for_cops(a: u32, b: u32) -> u32 {
    a.min(b)
}

fn worst_for_cops(a: u32, b: u32) -> u32 {
    a.max(b)
}

struct Minimax<'a> {
    space: &'a ConfigSpace,
    closed: Vec<Vec<usize>>,
    memo: Vec<u32>,
    horizon: usize,
}

impl Minimax<'_> {
    /// Rounds to capture with the cops to move and `depth` rounds left.
    fn cops_move(&mut self, x: usize, y: usize, depth: usize) -> u32 {
        if depth == 0 {
            return ESCAPES;
        }
        let key = (x * self.space.n() + y) * (self.horizon + 1) + depth;
        if self.memo[key] != UNKNOWN {
            return self.memo[key];
        }
        let mut best = ESCAPES;
        for i in 0..self.space.successors(x).len() {
            let x2 = self.space.successors(x)[i] as usize;
            let v = if self.space.occupies(x2, y) {
                1
            } else {
                let mut worst = 0;
                for j in 0..self.closed[y].len() {
                    let y2 = self.closed[y][j];
                    let w = if self.space.occupies(x2, y2) {
                        1
                    } else {
                        match self.cops_move(x2, y2, depth - 1) {
                            ESCAPES => ESCAPES,
                            r => r + 1,
                        }
                    };
                    worst = worst_for_cops(worst, w);
                    if worst == ESCAPES {
                        break;
                    }
                }
                worst
            };
            best = best_for_cops(best, v);
            if best == 1 {
                break;
            }
        }
        self.memo[key] = best;
        best
    }
}
