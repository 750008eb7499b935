//! Drunk invisible robber: the cops cannot see the robber, so they plan an
//! open-loop sequence of configurations against a belief over the robber's
//! node. The expected capture time of a sequence is the sum over rounds of
//! the uncaptured mass; a beam search over sequences estimates its minimum.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::config::{ConfigSpace, DEFAULT_STATE_BUDGET};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_BEAM: usize = 64;
pub const DEFAULT_EPSILON: f64 = 1e-6;
const DEDUP_SCALE: f64 = 1e12;

/// Distribution over robber nodes `0..n` plus the capture state `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Belief {
    p: Vec<f64>,
}

impl Belief {
    /// Uniform robber placement with the cops already at `config`: mass on
    /// occupied nodes is captured at once.
    pub fn initial(space: &ConfigSpace, config: usize) -> Self {
        let n = space.n();
        let mut p = vec![1.0 / n as f64; n + 1];
        p[n] = 0.0;
        for v in 0..n {
            if space.occupies(config, v) {
                p[n] += p[v];
                p[v] = 0.0;
            }
        }
        Belief { p }
    }

    pub fn from_probabilities(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 || p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::InvalidParameter("belief entries must lie in [0, 1]".into()));
        }
        if (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("belief must sum to 1".into()));
        }
        Ok(Belief { p })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// Probability the robber has been caught.
    pub fn capture(&self) -> f64 {
        self.p[self.p.len() - 1]
    }

    /// Capture mass after one round with the cops moving to `to`, without
    /// building the new belief.
    fn capture_after(&self, g: &Graph, space: &ConfigSpace, to: usize) -> f64 {
        let mut caught = self.p[space.n()];
        let cops = space.nodes(to);
        for (i, &v) in cops.iter().enumerate() {
            if i > 0 && cops[i - 1] == v {
                continue;
            }
            let v = v as usize;
            caught += self.p[v];
            for &u in g.neighbors(v) {
                if !space.occupies(to, u) {
                    caught += self.p[u] / g.degree(u) as f64;
                }
            }
        }
        // rounding can push the sum a hair past 1
        caught.min(1.0)
    }

    /// One round with the cops moving to `to`: mass on `to`'s nodes is
    /// captured, the rest takes one walk step, and mass walking onto a cop
    /// is captured.
    fn advance_into(&self, g: &Graph, space: &ConfigSpace, to: usize, out: &mut Vec<f64>) {
        let n = space.n();
        out.clear();
        out.resize(n + 1, 0.0);
        for u in 0..n {
            let mass = self.p[u];
            if mass == 0.0 || space.occupies(to, u) {
                continue;
            }
            let share = mass / g.degree(u) as f64;
            for &w in g.neighbors(u) {
                if !space.occupies(to, w) {
                    out[w] += share;
                }
            }
        }
        out[n] = self.capture_after(g, space, to);
    }
}

/// Belief after the cops move from `from` to `to`.
pub fn belief_update(g: &Graph, space: &ConfigSpace, p: &Belief, from: usize, to: usize) -> Result<Belief> {
    if !space.is_successor(from, to) {
        return Err(Error::IllegalMove(format!("{} -> {}", space.label(from), space.label(to))));
    }
    let mut out = Vec::new();
    p.advance_into(g, space, to, &mut out);
    Ok(Belief { p: out })
}

/// Adds the round's uncaptured mass to the running expected capture time.
pub fn cost_update(prev: f64, p_new: &Belief) -> f64 {
    prev + (1.0 - p_new.capture())
}

/// Cost of a whole schedule: the sum over rounds `0..=t` of uncaptured
/// mass, recomputed from scratch. Returns the cost and the final belief.
pub fn schedule_cost(g: &Graph, space: &ConfigSpace, schedule: &[usize]) -> Result<(f64, Belief)> {
    let (&first, rest) = schedule
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("schedule is empty".into()))?;
    let mut belief = Belief::initial(space, first);
    let mut cost = 1.0 - belief.capture();
    let mut from = first;
    for &to in rest {
        belief = belief_update(g, space, &belief, from, to)?;
        cost = cost_update(cost, &belief);
        from = to;
    }
    Ok((cost, belief))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcsSettings {
    /// Beam width; `None` keeps every distinct sequence.
    pub beam: Option<usize>,
    pub eps: f64,
    /// Level cap before giving up on the `eps` criterion. `None` means
    /// `50 * n * K`.
    pub max_levels: Option<usize>,
    /// Run exactly this many levels and ignore `eps`.
    pub horizon: Option<usize>,
}

impl Default for PcsSettings {
    fn default() -> Self {
        PcsSettings { beam: Some(DEFAULT_BEAM), eps: DEFAULT_EPSILON, max_levels: None, horizon: None }
    }
}

impl PcsSettings {
    fn level_cap(&self, space: &ConfigSpace) -> usize {
        self.horizon
            .or(self.max_levels)
            .unwrap_or(50 * space.n() * space.cops())
    }

    fn validate(&self) -> Result<()> {
        if self.beam == Some(0) {
            return Err(Error::InvalidParameter("beam must be at least 1".into()));
        }
        if self.horizon.is_none() && !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcsResult {
    /// Cop configurations `x_0 x_1 ... x_t`.
    pub sequence: Vec<usize>,
    pub cost: f64,
    /// Probability the robber is still free after the last round.
    pub residual: f64,
    /// False when the level cap was hit before the `eps` criterion.
    pub converged: bool,
    pub levels: usize,
}

struct Link {
    config: u32,
    parent: Option<Rc<Link>>,
}

fn materialize(link: &Rc<Link>) -> Vec<usize> {
    let mut out = Vec::new();
    let mut cur = Some(link);
    while let Some(l) = cur {
        out.push(l.config as usize);
        cur = l.parent.as_ref();
    }
    out.reverse();
    out
}

struct SearchNode {
    seq: Rc<Link>,
    config: usize,
    belief: Belief,
    cost: f64,
    /// Rank of `seq` in lexicographic order among nodes of its level.
    lex: usize,
}

/// A one-move extension, scored before its belief is built.
struct Candidate {
    parent: usize,
    config: usize,
    capture: f64,
    cost: f64,
}

/// Smaller cost first, then larger capture mass, then lexicographically
/// smaller sequence.
fn rank(a: &Candidate, b: &Candidate, parents: &[SearchNode]) -> Ordering {
    a.cost
        .total_cmp(&b.cost)
        .then_with(|| b.capture.total_cmp(&a.capture))
        .then_with(|| parents[a.parent].lex.cmp(&parents[b.parent].lex))
        .then_with(|| a.config.cmp(&b.config))
}

fn dedup_key(config: usize, belief: &[f64]) -> (usize, Vec<i64>) {
    (config, belief.iter().map(|&p| (p * DEDUP_SCALE).round() as i64).collect())
}

/// Beam search over cop sequences from `start`: expand every retained
/// sequence by all legal next configurations, keep the best `beam`, and
/// stop once the best cost moves by less than `eps`.
pub fn pcs_search(g: &Graph, space: &ConfigSpace, start: usize, settings: &PcsSettings) -> Result<PcsResult> {
    settings.validate()?;
    if start >= space.len() {
        return Err(Error::InvalidParameter(format!("no configuration {start}")));
    }
    Ok(search(g, space, start, settings, f64::INFINITY)?.expect("no cutoff"))
}

/// The beam search proper. The best retained cost never decreases from
/// one level to the next, so once it reaches `cutoff` the final cost
/// cannot fall below it and the search gives up with `None`.
fn search(g: &Graph, space: &ConfigSpace, start: usize, settings: &PcsSettings, cutoff: f64) -> Result<Option<PcsResult>> {
    let init = Belief::initial(space, start);
    let mut beam = vec![SearchNode {
        seq: Rc::new(Link { config: start as u32, parent: None }),
        config: start,
        cost: 1.0 - init.capture(),
        belief: init,
        lex: 0,
    }];
    if beam[0].cost >= cutoff {
        return Ok(None);
    }
    let cap = settings.level_cap(space);
    // With no width limit and a fixed horizon, a bounded run supplies an
    // upper bound. Costs only grow along a sequence, so every prefix of an
    // optimal sequence stays under it and pruning above it is exact.
    let bound = match (settings.beam, settings.horizon) {
        (None, Some(_)) => {
            let probe = PcsSettings { beam: Some(DEFAULT_BEAM), ..*settings };
            match search(g, space, start, &probe, cutoff)? {
                Some(r) => r.cost + 1e-12,
                None => return Ok(None),
            }
        }
        _ => f64::INFINITY,
    };
    let width = settings.beam.unwrap_or(usize::MAX);
    let mut best_old = beam[0].cost;
    let mut levels = 0;
    let mut converged = false;
    let mut seen = HashSet::new();

    while levels < cap {
        levels += 1;
        let mut candidates = Vec::new();
        for (pi, node) in beam.iter().enumerate() {
            for &to in space.successors(node.config) {
                let to = to as usize;
                let capture = node.belief.capture_after(g, space, to);
                let cost = node.cost + (1.0 - capture);
                if cost <= bound {
                    candidates.push(Candidate { parent: pi, config: to, capture, cost });
                }
            }
        }
        candidates.sort_unstable_by(|a, b| rank(a, b, &beam));

        // Duplicates of an earlier (better ranked) state are dropped, which
        // keeps the smaller cost for every merged state.
        seen.clear();
        let mut kept: Vec<(Candidate, Belief)> = Vec::new();
        for c in candidates {
            if kept.len() == width {
                break;
            }
            let mut p = Vec::with_capacity(space.n() + 1);
            beam[c.parent].belief.advance_into(g, space, c.config, &mut p);
            if seen.insert(dedup_key(c.config, &p)) {
                kept.push((c, Belief { p }));
            }
        }

        let mut order: Vec<usize> = (0..kept.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            let (ca, cb) = (&kept[a].0, &kept[b].0);
            beam[ca.parent].lex.cmp(&beam[cb.parent].lex).then(ca.config.cmp(&cb.config))
        });
        let mut lex = vec![0; kept.len()];
        for (r, &i) in order.iter().enumerate() {
            lex[i] = r;
        }
        let next_beam: Vec<SearchNode> = kept
            .into_iter()
            .zip(lex)
            .map(|((c, belief), lex)| SearchNode {
                seq: Rc::new(Link { config: c.config as u32, parent: Some(Rc::clone(&beam[c.parent].seq)) }),
                config: c.config,
                belief,
                cost: c.cost,
                lex,
            })
            .collect();
        beam = next_beam;

        let best = beam[0].cost;
        if best >= cutoff {
            return Ok(None);
        }
        if settings.horizon.is_none() && (best - best_old).abs() < settings.eps {
            converged = true;
            break;
        }
        best_old = best;
    }
    if settings.horizon.is_some() {
        converged = true;
    }
    let best = &beam[0];
    Ok(Some(PcsResult {
        sequence: materialize(&best.seq),
        cost: best.cost,
        residual: 1.0 - best.belief.capture(),
        converged,
        levels,
    }))
}

/// Best PCS result over every starting configuration (lowest index on
/// ties).
pub fn dct_i(g: &Graph, cops: usize, settings: &PcsSettings) -> Result<PcsResult> {
    let space = ConfigSpace::new(g, cops, DEFAULT_STATE_BUDGET)?;
    dct_i_in(g, &space, settings)
}

/// As [`dct_i`] on a prebuilt configuration space. A start is abandoned as
/// soon as it provably cannot beat the best start found so far.
pub fn dct_i_in(g: &Graph, space: &ConfigSpace, settings: &PcsSettings) -> Result<PcsResult> {
    settings.validate()?;
    let mut best: Option<PcsResult> = None;
    for start in 0..space.len() {
        let cutoff = best.as_ref().map_or(f64::INFINITY, |b| b.cost);
        if let Some(r) = search(g, space, start, settings, cutoff)? {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one configuration"))
}

/// Largest search-tree node count [`exhaustive_schedule_oracle`] will visit.
pub const ORACLE_NODE_BUDGET: u64 = 200_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub sequence: Vec<usize>,
    /// Minimum of the cost summed over rounds `0..=horizon`.
    pub cost: f64,
    /// Uncaptured mass after the horizon along the optimal sequence.
    pub residual: f64,
    pub nodes_visited: u64,
}

/// Enumerates every legal cop sequence of `horizon` moves from every
/// placement by depth-first search, pruning only branches that provably
/// cannot beat the incumbent (costs never decrease along a sequence) or
/// that repeat an already-reached state at the same depth more cheaply.
pub fn exhaustive_schedule_oracle(g: &Graph, cops: usize, horizon: usize) -> Result<OracleResult> {
    let space = ConfigSpace::new(g, cops, DEFAULT_STATE_BUDGET)?;
    let mut search = Exhaustive {
        g,
        space: &space,
        horizon,
        best: f64::INFINITY,
        best_seq: Vec::new(),
        best_residual: 1.0,
        path: Vec::with_capacity(horizon + 1),
        visited: 0,
        memo: HashMap::new(),
    };
    for start in 0..space.len() {
        let b = Belief::initial(&space, start);
        search.path.push(start);
        let cost = 1.0 - b.capture();
        search.descend(&b.p, cost, 0)?;
        search.path.pop();
    }
    Ok(OracleResult {
        sequence: search.best_seq,
        cost: search.best,
        residual: search.best_residual,
        nodes_visited: search.visited,
    })
}

struct Exhaustive<'a> {
    g: &'a Graph,
    space: &'a ConfigSpace,
    horizon: usize,
    best: f64,
    best_seq: Vec<usize>,
    best_residual: f64,
    path: Vec<usize>,
    visited: u64,
    memo: HashMap<(usize, usize, Vec<i64>), f64>,
}

impl Exhaustive<'_> {
    fn descend(&mut self, belief: &[f64], cost: f64, depth: usize) -> Result<()> {
        self.visited += 1;
        if self.visited > ORACLE_NODE_BUDGET {
            return Err(Error::BudgetExceeded { required: self.visited as u128, budget: ORACLE_NODE_BUDGET as u128 });
        }
        let n = self.space.n();
        if depth == self.horizon {
            if cost < self.best {
                self.best = cost;
                self.best_seq = self.path.clone();
                self.best_residual = 1.0 - belief[n];
            }
            return Ok(());
        }
        let here = *self.path.last().unwrap();
        let key = (depth, here, belief.iter().map(|&p| (p * DEDUP_SCALE).round() as i64).collect());
        match self.memo.get(&key) {
            Some(&c) if c <= cost => return Ok(()),
            _ => {
                self.memo.insert(key, cost);
            }
        }
        let from = Belief { p: belief.to_vec() };
        let mut children: Vec<(f64, usize, Vec<f64>)> = Vec::new();
        for &to in self.space.successors(here) {
            let mut next = Vec::with_capacity(n + 1);
            from.advance_into(self.g, self.space, to as usize, &mut next);
            let c = cost + (1.0 - next[n]);
            children.push((c, to as usize, next));
        }
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (c, to, next) in children {
            // later rounds only add non-negative mass
            if c >= self.best {
                break;
            }
            self.path.push(to);
            self.descend(&next, c, depth + 1)?;
            self.path.pop();
        }
        Ok(())
    }
}
