//! The adversarial visible game as a reachability game on a digraph of
//! positions, solved by attractor computation.
//!
//! Positions are `(cops, robber, mover)` where the first two may be the
//! null placement. Play starts at `(null, null, C)`: the cops place, then
//! the robber places, then turns alternate. The cops win by reaching a
//! position where the robber shares a node with some cop.

use std::collections::VecDeque;

use crate::config::{ConfigSpace, DEFAULT_STATE_BUDGET};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mover {
    Cops,
    Robber,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Position {
    /// Nobody placed, cops to move.
    Initial,
    /// Cops placed at `config`, robber to place.
    Placement { config: usize },
    Play { config: usize, robber: usize, mover: Mover },
}

#[derive(Clone, Debug)]
pub struct ReachabilityGame {
    space: ConfigSpace,
    closed: Vec<Vec<usize>>,
}

impl ReachabilityGame {
    pub fn build(g: &Graph, cops: usize) -> Result<Self> {
        Self::with_budget(g, cops, DEFAULT_STATE_BUDGET)
    }

    pub fn with_budget(g: &Graph, cops: usize, budget: u128) -> Result<Self> {
        let space = ConfigSpace::new(g, cops, budget)?;
        let closed = (0..g.n()).map(|v| g.closed_neighbors(v)).collect();
        Ok(ReachabilityGame { space, closed })
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    fn n(&self) -> usize {
        self.space.n()
    }

    pub fn position_count(&self) -> usize {
        1 + self.space.len() + 2 * self.space.len() * self.n()
    }

    pub fn index(&self, p: Position) -> usize {
        let m = self.space.len();
        match p {
            Position::Initial => 0,
            Position::Placement { config } => 1 + config,
            Position::Play { config, robber, mover } => {
                1 + m + 2 * (config * self.n() + robber) + (mover == Mover::Robber) as usize
            }
        }
    }

    pub fn position(&self, idx: usize) -> Position {
        let m = self.space.len();
        if idx == 0 {
            Position::Initial
        } else if idx <= m {
            Position::Placement { config: idx - 1 }
        } else {
            let r = idx - 1 - m;
            let mover = if r % 2 == 0 { Mover::Cops } else { Mover::Robber };
            let cell = r / 2;
            Position::Play { config: cell / self.n(), robber: cell % self.n(), mover }
        }
    }

    pub fn mover(&self, p: Position) -> Mover {
        match p {
            Position::Initial => Mover::Cops,
            Position::Placement { .. } => Mover::Robber,
            Position::Play { mover, .. } => mover,
        }
    }

    /// Robber shares a node with a cop.
    pub fn is_target(&self, p: Position) -> bool {
        match p {
            Position::Play { config, robber, .. } => self.space.occupies(config, robber),
            _ => false,
        }
    }

    /// Successor positions. Cops slide or stay, all at once; the robber
    /// slides or stays. Placement allows the robber onto a cop's node.
    pub fn moves(&self, p: Position) -> Vec<Position> {
        match p {
            Position::Initial => (0..self.space.len()).map(|config| Position::Placement { config }).collect(),
            Position::Placement { config } => (0..self.n())
                .map(|robber| Position::Play { config, robber, mover: Mover::Cops })
                .collect(),
            Position::Play { config, robber, mover: Mover::Cops } => self
                .space
                .successors(config)
                .iter()
                .map(|&c| Position::Play { config: c as usize, robber, mover: Mover::Robber })
                .collect(),
            Position::Play { config, robber, mover: Mover::Robber } => self.closed[robber]
                .iter()
                .map(|&y| Position::Play { config, robber: y, mover: Mover::Cops })
                .collect(),
        }
    }

    fn predecessors(&self, p: Position, out: &mut Vec<Position>) {
        out.clear();
        match p {
            Position::Initial => {}
            Position::Placement { .. } => out.push(Position::Initial),
            Position::Play { config, robber, mover: Mover::Cops } => {
                out.push(Position::Placement { config });
                out.extend(
                    self.closed[robber]
                        .iter()
                        .map(|&y| Position::Play { config, robber: y, mover: Mover::Robber }),
                );
            }
            // slide-or-stay is symmetric, so predecessors are successors
            Position::Play { config, robber, mover: Mover::Robber } => out.extend(
                self.space
                    .successors(config)
                    .iter()
                    .map(|&c| Position::Play { config: c as usize, robber, mover: Mover::Cops }),
            ),
        }
    }

    /// Computes the cops' winning region by backward induction with
    /// out-degree counters on robber positions.
    pub fn attractor(&self) -> WinningRegions {
        let total = self.position_count();
        let mut win = vec![false; total];
        let mut strategy = vec![u32::MAX; total];
        let mut remaining: Vec<u32> = (0..total)
            .map(|i| match self.position(i) {
                Position::Placement { .. } => self.n() as u32,
                Position::Play { robber, mover: Mover::Robber, .. } => self.closed[robber].len() as u32,
                _ => 0,
            })
            .collect();

        let mut queue = VecDeque::new();
        for i in 0..total {
            if self.is_target(self.position(i)) {
                win[i] = true;
                queue.push_back(i);
            }
        }
        let mut preds = Vec::new();
        while let Some(i) = queue.pop_front() {
            self.predecessors(self.position(i), &mut preds);
            for &p in &preds {
                let j = self.index(p);
                if win[j] {
                    continue;
                }
                match self.mover(p) {
                    Mover::Cops => {
                        win[j] = true;
                        strategy[j] = i as u32;
                        queue.push_back(j);
                    }
                    Mover::Robber => {
                        remaining[j] -= 1;
                        if remaining[j] == 0 {
                            win[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        WinningRegions { win, strategy }
    }
}

/// Partition of positions into the cops' region W0 and its complement W1,
/// with one witnessing move for every non-target cop position in W0.
#[derive(Clone, Debug)]
pub struct WinningRegions {
    win: Vec<bool>,
    strategy: Vec<u32>,
}

impl WinningRegions {
    pub fn cops_win(&self, game: &ReachabilityGame, p: Position) -> bool {
        self.win[game.index(p)]
    }

    pub fn cops_win_from_start(&self) -> bool {
        self.win[0]
    }

    pub fn cop_move(&self, game: &ReachabilityGame, p: Position) -> Option<Position> {
        let s = self.strategy[game.index(p)];
        (s != u32::MAX).then(|| game.position(s as usize))
    }

    pub fn w0_len(&self) -> usize {
        self.win.iter().filter(|&&w| w).count()
    }
}

pub fn solve(g: &Graph, cops: usize) -> Result<(ReachabilityGame, WinningRegions)> {
    let game = ReachabilityGame::build(g, cops)?;
    let regions = game.attractor();
    Ok((game, regions))
}

/// Whether `cops` cops win the adversarial visible game on `g`.
pub fn is_cop_win(g: &Graph, cops: usize) -> Result<bool> {
    Ok(solve(g, cops)?.1.cops_win_from_start())
}

/// The least `K <= kmax` for which the cops win from the initial position.
pub fn cop_number(g: &Graph, kmax: usize) -> Result<usize> {
    if kmax == 0 {
        return Err(Error::InvalidParameter("kmax must be at least 1".into()));
    }
    for k in 1..=kmax {
        if is_cop_win(g, k)? {
            return Ok(k);
        }
    }
    Err(Error::CopLimitExhausted { kmax })
}

/// Repeatedly deletes a dominated node (one whose closed neighborhood lies
/// inside another's). Returns whether this empties the graph and, if so,
/// the deletion order ending with the last surviving node.
pub fn is_dismantlable(g: &Graph) -> (bool, Vec<usize>) {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let closed_alive = |v: usize, alive: &[bool]| -> Vec<usize> {
        g.closed_neighbors(v).into_iter().filter(|&w| alive[w]).collect()
    };
    for _ in 1..n {
        let dominated = (0..n).filter(|&v| alive[v]).find(|&v| {
            let nv = closed_alive(v, &alive);
            nv.iter().any(|&u| {
                u != v && {
                    let nu = closed_alive(u, &alive);
                    nv.iter().all(|w| nu.binary_search(w).is_ok())
                }
            })
        });
        match dominated {
            Some(v) => {
                alive[v] = false;
                order.push(v);
            }
            None => return (false, Vec::new()),
        }
    }
    order.extend((0..n).filter(|&v| alive[v]));
    (true, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn gen(f: Family) -> Graph {
        f.generate().unwrap()
    }

    #[test]
    fn p2_single_cop_position_count() {
        let game = ReachabilityGame::build(&gen(Family::Path(2)), 1).unwrap();
        assert_eq!(game.position_count(), 11);
        for i in 0..game.position_count() {
            assert_eq!(game.index(game.position(i)), i);
        }
    }

    #[test]
    fn k3_targets_are_the_diagonal() {
        let game = ReachabilityGame::build(&gen(Family::Clique(3)), 1).unwrap();
        let targets: Vec<_> = (0..game.position_count())
            .map(|i| game.position(i))
            .filter(|&p| game.is_target(p))
            .collect();
        assert_eq!(targets.len(), 6);
        for p in targets {
            let Position::Play { config, robber, .. } = p else { panic!() };
            assert_eq!(config, robber);
        }
    }

    #[test]
    fn moves_alternate_movers() {
        let game = ReachabilityGame::build(&gen(Family::Cycle(4)), 2).unwrap();
        for i in 0..game.position_count() {
            let p = game.position(i);
            for q in game.moves(p) {
                assert_ne!(game.mover(p), game.mover(q));
            }
        }
    }

    #[test]
    fn small_attractor_cases() {
        assert!(is_cop_win(&gen(Family::Clique(3)), 1).unwrap());
        assert!(!is_cop_win(&gen(Family::Cycle(4)), 1).unwrap());
        assert!(is_cop_win(&gen(Family::Cycle(4)), 2).unwrap());
    }

    #[test]
    fn cop_numbers() {
        for n in 4..=8 {
            assert_eq!(cop_number(&gen(Family::Cycle(n)), 3).unwrap(), 2, "C_{n}");
        }
        for n in 1..=6 {
            assert_eq!(cop_number(&gen(Family::Clique(n)), 2).unwrap(), 1);
        }
        assert_eq!(cop_number(&gen(Family::Grid { rows: 3, cols: 3 }), 3).unwrap(), 2);
        assert_eq!(cop_number(&gen(Family::Grid { rows: 3, cols: 4 }), 3).unwrap(), 2);
        assert!(matches!(
            cop_number(&gen(Family::Cycle(5)), 1),
            Err(Error::CopLimitExhausted { kmax: 1 })
        ));
    }

    #[test]
    fn every_graph_is_won_with_one_cop_per_node() {
        for g in [gen(Family::Cycle(4)), gen(Family::Path(3)), gen(Family::Cycle(5))] {
            assert!(is_cop_win(&g, g.n()).unwrap());
        }
    }

    #[test]
    fn attractor_is_a_fixed_point_with_valid_strategy() {
        let g = gen(Family::Cycle(5));
        for k in 1..=2 {
            let (game, w) = solve(&g, k).unwrap();
            for i in 0..game.position_count() {
                let p = game.position(i);
                if game.is_target(p) {
                    continue;
                }
                let into_w0 = game.moves(p).into_iter().filter(|&q| w.cops_win(&game, q)).count();
                let total = game.moves(p).len();
                match (game.mover(p), w.cops_win(&game, p)) {
                    (Mover::Cops, false) => assert_eq!(into_w0, 0),
                    (Mover::Robber, false) => assert!(into_w0 < total),
                    (Mover::Robber, true) => assert_eq!(into_w0, total),
                    (Mover::Cops, true) => {
                        let q = w.cop_move(&game, p).unwrap();
                        assert!(game.moves(p).contains(&q));
                        assert!(w.cops_win(&game, q));
                    }
                }
            }
        }
    }

    #[test]
    fn dismantlability() {
        // triangle-free with a cycle: only leaves could be dominated
        assert!(!is_dismantlable(&gen(Family::Grid { rows: 3, cols: 3 })).0);
        let (ok, order) = is_dismantlable(&gen(Family::Clique(4)));
        assert!(ok);
        assert_eq!(order.len(), 4);
        // a 3x3 grid with both diagonals of every cell is a king graph, dismantlable
        let mut edges = crate::graph::grid_edges(3, 3);
        for r in 0..2 {
            for c in 0..2 {
                edges.push((r * 3 + c, r * 3 + c + 4));
                edges.push((r * 3 + c + 1, r * 3 + c + 3));
            }
        }
        let (ok, order) = is_dismantlable(&Graph::from_edges(9, edges).unwrap());
        assert!(ok);
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..9).collect::<Vec<_>>());
        assert!(!is_dismantlable(&gen(Family::Cycle(4))).0);
        assert!(is_dismantlable(&gen(Family::LongStar { rays: 3, ray_len: 3 })).0);
        assert!(is_dismantlable(&Graph::from_edges(1, []).unwrap()).0);
    }

    #[test]
    fn budget_exceeded_is_reported() {
        let g = gen(Family::Clique(8));
        assert!(matches!(
            ReachabilityGame::with_budget(&g, 3, 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
