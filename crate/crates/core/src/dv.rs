//! Drunk visible robber: the cops see a robber who performs a uniform
//! random walk over open neighborhoods. Optimal expected capture times come
//! from value iteration; an exact linear solve and Monte Carlo simulation
//! serve as independent checks.
//!
//! One round: the cops move (capture if one lands on the robber), then the
//! robber steps to a uniformly chosen neighbor (capture if it is occupied).
//! Values are expected rounds to capture.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ConfigSpace, DEFAULT_STATE_BUDGET};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_SWEEP_CAP: usize = 1_000_000;
/// Largest transient state count accepted by [`policy_eval_exact`].
pub const EXACT_SOLVE_LIMIT: usize = 4000;
/// Stand-in for the infinite initial value. Updates saturate here, so the
/// iterates stay monotone non-increasing; any value this large would need
/// an escape probability of order 1e-9 per round.
pub const UNRESOLVED: f64 = 1e9;
/// Rounds after which a simulated episode is counted as censored.
pub const EPISODE_ROUND_CAP: u64 = 1_000_000;

/// Robber transition rows for a fixed cop configuration. States `0..n`
/// are robber nodes; state `n` is capture.
#[derive(Clone, Debug)]
pub struct DrunkKernel {
    rows: Vec<Vec<(usize, f64)>>,
}

impl DrunkKernel {
    pub fn capture_state(&self) -> usize {
        self.rows.len() - 1
    }

    /// Sparse row `from`: `(to, probability)` pairs.
    pub fn row(&self, from: usize) -> &[(usize, f64)] {
        &self.rows[from]
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from].iter().filter(|(t, _)| *t == to).map(|(_, p)| p).sum()
    }

    /// Rows sum to one and capture is absorbing.
    pub fn is_stochastic(&self, tol: f64) -> bool {
        let cap = self.capture_state();
        self.rows.iter().all(|r| (r.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() <= tol)
            && self.rows[cap] == [(cap, 1.0)]
    }
}

/// Transition rows of the robber's walk against cops standing at `config`.
pub fn drunk_kernel(g: &Graph, space: &ConfigSpace, config: usize) -> DrunkKernel {
    let n = g.n();
    let mut rows = Vec::with_capacity(n + 1);
    for y in 0..n {
        if space.occupies(config, y) {
            rows.push(vec![(n, 1.0)]);
            continue;
        }
        let p = 1.0 / g.degree(y) as f64;
        let mut row = Vec::with_capacity(g.degree(y) + 1);
        let mut caught = 0.0;
        for &w in g.neighbors(y) {
            if space.occupies(config, w) {
                caught += p;
            } else {
                row.push((w, p));
            }
        }
        if caught > 0.0 {
            row.push((n, caught));
        }
        rows.push(row);
    }
    rows.push(vec![(n, 1.0)]);
    DrunkKernel { rows }
}

/// A memoryless cop strategy: next configuration for every non-capture
/// `(configuration, robber)` position, plus the initial placement.
#[derive(Clone, Debug, PartialEq)]
pub struct CopPolicy {
    pub start: usize,
    next: Vec<u32>,
    n: usize,
}

impl CopPolicy {
    pub fn new(space: &ConfigSpace, start: usize, next: Vec<u32>) -> Self {
        CopPolicy { start, next, n: space.n() }
    }

    pub fn next(&self, config: usize, robber: usize) -> Option<usize> {
        let p = self.next[config * self.n + robber];
        (p != u32::MAX).then_some(p as usize)
    }

    /// Policy file: a header comment, `S <cops>` for the placement, then
    /// `C <cops> <robber> <next cops>` per position, all 1-based.
    pub fn to_text(&self, space: &ConfigSpace) -> String {
        let mut out = format!("# cop policy, cops={} n={}\nS {}\n", space.cops(), space.n(), space.label(self.start));
        for x in 0..space.len() {
            for y in 0..space.n() {
                if let Some(next) = self.next(x, y) {
                    out.push_str(&format!("C {} {} {}\n", space.label(x), y + 1, space.label(next)));
                }
            }
        }
        out
    }

    /// Parses the policy file format. Robber lines (`R ...`) are ignored so
    /// adversarial policy dumps load too; without an `S` line the start is
    /// configuration 0.
    pub fn parse(text: &str, space: &ConfigSpace) -> Result<Self> {
        let n = space.n();
        let mut next = vec![u32::MAX; space.len() * n];
        let mut start = 0;
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["S", cfg] => start = space.parse_label(cfg)?,
                ["R", ..] => {}
                ["C", cfg, y, to] => {
                    let x = space.parse_label(cfg)?;
                    let y: usize = y
                        .parse()
                        .ok()
                        .filter(|&v| v >= 1 && v <= n)
                        .ok_or_else(|| Error::MalformedPolicy(format!("bad robber node in '{line}'")))?;
                    let to = space.parse_label(to)?;
                    if !space.is_successor(x, to) {
                        return Err(Error::IllegalMove(line.to_string()));
                    }
                    next[x * n + y - 1] = to as u32;
                }
                _ => return Err(Error::MalformedPolicy(format!("unrecognized line '{line}'"))),
            }
        }
        for x in 0..space.len() {
            for y in 0..n {
                if !space.occupies(x, y) && next[x * n + y] == u32::MAX {
                    return Err(Error::MalformedPolicy(format!(
                        "no move for cops at {} robber at {}",
                        space.label(x),
                        y + 1
                    )));
                }
            }
        }
        Ok(CopPolicy { start, next, n })
    }
}

#[derive(Clone, Debug)]
pub struct DctTable {
    space: ConfigSpace,
    value: Vec<f64>,
    policy: Vec<u32>,
    sweeps: usize,
}

impl DctTable {
    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    /// Expected rounds to capture from `(config, robber)` with the cops to move.
    pub fn value(&self, config: usize, robber: usize) -> f64 {
        self.value[config * self.space.n() + robber]
    }

    pub fn values(&self) -> &[f64] {
        &self.value
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Uniform average over robber placements for each cop placement.
    pub fn start_values(&self) -> Vec<f64> {
        let n = self.space.n();
        self.value.chunks(n).map(|row| row.iter().sum::<f64>() / n as f64).collect()
    }

    /// Minimum of [`Self::start_values`] and the minimizing configuration
    /// (lowest index).
    pub fn dct(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (x, avg) in self.start_values().into_iter().enumerate() {
            if avg < best.0 {
                best = (avg, x);
            }
        }
        best
    }

    pub fn policy(&self) -> CopPolicy {
        CopPolicy::new(&self.space, self.dct().1, self.policy.clone())
    }

    /// `max |T(C) - C|` where `T` is the optimality operator.
    pub fn max_residual(&self, g: &Graph) -> f64 {
        let next = bellman_sweep(g, &self.space, &self.value);
        next.0
            .iter()
            .zip(&self.value)
            .map(|(a, b)| sup_diff(*a, *b))
            .fold(0.0, f64::max)
    }
}

fn sup_diff(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

/// One Jacobi application of the optimality operator; also returns the
/// minimizing successor per position.
fn bellman_sweep(g: &Graph, space: &ConfigSpace, value: &[f64]) -> (Vec<f64>, Vec<u32>) {
    let n = g.n();
    let m = space.len();
    // expected value after the cops settle at x2 and the robber walks from y
    let mut after_walk = vec![0.0; m * n];
    for x2 in 0..m {
        for y in 0..n {
            if space.occupies(x2, y) {
                continue;
            }
            let mut acc = 0.0;
            for &w in g.neighbors(y) {
                if !space.occupies(x2, w) {
                    acc += value[x2 * n + w];
                }
            }
            after_walk[x2 * n + y] = acc / g.degree(y) as f64;
        }
    }
    let mut next = vec![0.0; m * n];
    let mut arg = vec![u32::MAX; m * n];
    for x in 0..m {
        for y in 0..n {
            if space.occupies(x, y) {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut best_x = space.successors(x)[0];
            for &x2 in space.successors(x) {
                let v = after_walk[x2 as usize * n + y];
                if v < best {
                    best = v;
                    best_x = x2;
                }
            }
            next[x * n + y] = (1.0 + best).min(UNRESOLVED);
            arg[x * n + y] = best_x;
        }
    }
    (next, arg)
}

pub fn cadr_solve(g: &Graph, cops: usize, eps: f64) -> Result<DctTable> {
    cadr_solve_with(g, cops, eps, DEFAULT_SWEEP_CAP, |_| {})
}

/// Value iteration from 0 on capture positions and [`UNRESOLVED`] elsewhere
/// until the sup-norm change drops below `eps`. `observe` sees every
/// iterate.
pub fn cadr_solve_with(
    g: &Graph,
    cops: usize,
    eps: f64,
    sweep_cap: usize,
    mut observe: impl FnMut(&[f64]),
) -> Result<DctTable> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let space = ConfigSpace::new(g, cops, DEFAULT_STATE_BUDGET)?;
    let n = g.n();
    let mut value: Vec<f64> = (0..space.len() * n)
        .map(|i| if space.occupies(i / n, i % n) { 0.0 } else { UNRESOLVED })
        .collect();
    let mut sweeps = 0;
    loop {
        if sweeps == sweep_cap {
            return Err(Error::NotConverged { iterations: sweep_cap });
        }
        sweeps += 1;
        let (next, arg) = bellman_sweep(g, &space, &value);
        observe(&next);
        let change = next.iter().zip(&value).map(|(a, b)| sup_diff(*a, *b)).fold(0.0, f64::max);
        value = next;
        if change < eps {
            return Ok(DctTable { space, value, policy: arg, sweeps });
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dct {
    pub value: f64,
    pub start: usize,
}

/// Drunk visible capture time: best cop placement against a uniformly
/// placed robber (who may land on a cop).
pub fn dct(g: &Graph, cops: usize, eps: f64) -> Result<Dct> {
    let table = cadr_solve(g, cops, eps)?;
    let (value, start) = table.dct();
    Ok(Dct { value, start })
}

/// Expected absorption times `v = 1 + Q v` for a substochastic transient
/// block `q`; row deficits are the one-step absorption probabilities.
/// Fails with [`Error::SingularSystem`] if some state cannot reach
/// absorption.
pub fn solve_absorbing_chain(q: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
    let s = q.nrows();
    let mut reaches = vec![false; s];
    let mut stack: Vec<usize> = (0..s)
        .filter(|&i| q.row(i).iter().sum::<f64>() < 1.0 - 1e-12)
        .collect();
    for &i in &stack {
        reaches[i] = true;
    }
    while let Some(j) = stack.pop() {
        for i in 0..s {
            if !reaches[i] && q[(i, j)] > 0.0 {
                reaches[i] = true;
                stack.push(i);
            }
        }
    }
    if reaches.iter().any(|r| !r) {
        return Err(Error::SingularSystem);
    }
    let a = DMatrix::identity(s, s) - q;
    let ones = DVector::from_element(s, 1.0);
    let v = a.clone().lu().solve(&ones).ok_or(Error::SingularSystem)?;
    let residual = (&a * &v - &ones).amax();
    Ok((v, residual))
}

/// Exact expected rounds under a fixed memoryless policy, by a direct
/// linear solve over the transient positions. Capture positions get 0.
pub fn policy_eval_exact(g: &Graph, space: &ConfigSpace, policy: &CopPolicy) -> Result<(Vec<f64>, f64)> {
    let n = g.n();
    let cells = space.len() * n;
    let mut index = vec![usize::MAX; cells];
    let mut transient = Vec::new();
    for i in 0..cells {
        if !space.occupies(i / n, i % n) {
            index[i] = transient.len();
            transient.push(i);
        }
    }
    if transient.len() > EXACT_SOLVE_LIMIT {
        return Err(Error::BudgetExceeded {
            required: transient.len() as u128,
            budget: EXACT_SOLVE_LIMIT as u128,
        });
    }
    let s = transient.len();
    let mut q = DMatrix::zeros(s, s);
    for (row, &i) in transient.iter().enumerate() {
        let (x, y) = (i / n, i % n);
        let x2 = policy
            .next(x, y)
            .ok_or_else(|| Error::MalformedPolicy(format!("no move at cops {} robber {}", space.label(x), y + 1)))?;
        if space.occupies(x2, y) {
            continue;
        }
        let p = 1.0 / g.degree(y) as f64;
        for &w in g.neighbors(y) {
            if !space.occupies(x2, w) {
                q[(row, index[x2 * n + w])] += p;
            }
        }
    }
    let (v, residual) = solve_absorbing_chain(&q)?;
    let mut out = vec![0.0; cells];
    for (row, &i) in transient.iter().enumerate() {
        out[i] = v[row];
    }
    Ok((out, residual))
}

/// How the simulated cops choose moves.
#[derive(Clone, Copy, Debug)]
pub enum CopControl<'a> {
    /// Closed loop: the cops see the robber.
    Policy(&'a CopPolicy),
    /// Open loop: a fixed sequence of configurations, the first being the
    /// placement.
    Schedule(&'a [usize]),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    /// Episodes that outran the schedule or the round cap; counted at the
    /// round where they were cut off.
    pub censored: u64,
}

/// Simulates the drunk robber against the given cops. Trial `i` uses its
/// own generator seeded with `seed + i`, so results do not depend on
/// scheduling.
pub fn monte_carlo(g: &Graph, space: &ConfigSpace, control: CopControl<'_>, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if let CopControl::Schedule(s) = control {
        if s.is_empty() {
            return Err(Error::InvalidParameter("schedule is empty".into()));
        }
        for w in s.windows(2) {
            if !space.is_successor(w[0], w[1]) {
                return Err(Error::IllegalMove(format!("{} -> {}", space.label(w[0]), space.label(w[1]))));
            }
        }
    }
    let outcomes: Vec<(u64, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            episode(g, space, control, &mut rng)
        })
        .collect();
    let k = trials as f64;
    let mean = outcomes.iter().map(|o| o.0 as f64).sum::<f64>() / k;
    let var = if trials > 1 {
        outcomes.iter().map(|o| (o.0 as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        std_error: (var / k).sqrt(),
        trials,
        censored: outcomes.iter().filter(|o| o.1).count() as u64,
    })
}

/// Returns the capture round and whether the episode was censored.
fn episode(g: &Graph, space: &ConfigSpace, control: CopControl<'_>, rng: &mut impl Rng) -> (u64, bool) {
    let mut cops = match control {
        CopControl::Policy(p) => p.start,
        CopControl::Schedule(s) => s[0],
    };
    let mut robber = rng.gen_range(0..g.n());
    if space.occupies(cops, robber) {
        return (0, false);
    }
    let mut round = 0u64;
    loop {
        if round == EPISODE_ROUND_CAP {
            return (round, true);
        }
        round += 1;
        cops = match control {
            CopControl::Policy(p) => p.next(cops, robber).expect("policy covers every transient position"),
            CopControl::Schedule(s) => match s.get(round as usize) {
                Some(&c) => c,
                None => return (round - 1, true),
            },
        };
        if space.occupies(cops, robber) {
            return (round, false);
        }
        let nbrs = g.neighbors(robber);
        robber = nbrs[rng.gen_range(0..nbrs.len())];
        if space.occupies(cops, robber) {
            return (round, false);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn gen(f: Family) -> Graph {
        f.generate().unwrap()
    }

    fn space(g: &Graph, k: usize) -> ConfigSpace {
        ConfigSpace::new(g, k, DEFAULT_STATE_BUDGET).unwrap()
    }

    #[test]
    fn kernel_rows() {
        let k3 = gen(Family::Clique(3));
        let s = space(&k3, 1);
        let kern = drunk_kernel(&k3, &s, 0);
        assert!(kern.is_stochastic(1e-12));
        assert_eq!(kern.prob(1, 3), 0.5);
        assert_eq!(kern.prob(1, 2), 0.5);
        assert_eq!(kern.prob(0, 3), 1.0);

        let p3 = gen(Family::Path(3));
        let s = space(&p3, 1);
        assert_eq!(drunk_kernel(&p3, &s, 0).prob(2, 1), 1.0);
    }

    #[test]
    fn kernels_are_stochastic_everywhere() {
        let g = gen(Family::Grid { rows: 2, cols: 3 });
        for k in 1..=2 {
            let s = space(&g, k);
            for c in 0..s.len() {
                assert!(drunk_kernel(&g, &s, c).is_stochastic(1e-12));
            }
        }
    }

    #[test]
    fn clique_values() {
        for n in 2..=8 {
            let t = cadr_solve(&gen(Family::Clique(n)), 1, DEFAULT_EPSILON).unwrap();
            for x in 0..n {
                for y in 0..n {
                    assert_eq!(t.value(x, y), if x == y { 0.0 } else { 1.0 });
                }
            }
            let (v, _) = t.dct();
            assert!((v - (1.0 - 1.0 / n as f64)).abs() < 1e-9);
        }
    }

    #[test]
    fn two_node_path() {
        let p2 = gen(Family::Path(2));
        let t = cadr_solve(&p2, 1, DEFAULT_EPSILON).unwrap();
        assert_eq!(t.value(0, 1), 1.0);
        assert_eq!(dct(&p2, 1, DEFAULT_EPSILON).unwrap().value, 0.5);
    }

    #[test]
    fn residual_and_monotonicity() {
        let g = gen(Family::Grid { rows: 3, cols: 3 });
        let eps = 1e-9;
        let mut prev: Option<Vec<f64>> = None;
        let t = cadr_solve_with(&g, 1, eps, DEFAULT_SWEEP_CAP, |v| {
            if let Some(p) = &prev {
                assert!(v.iter().zip(p).all(|(a, b)| a <= b));
            }
            prev = Some(v.to_vec());
        })
        .unwrap();
        assert!(t.max_residual(&g) <= eps);
        for x in 0..9 {
            assert_eq!(t.value(x, x), 0.0);
        }
    }

    #[test]
    fn exact_evaluation_matches_value_iteration() {
        for g in [gen(Family::Clique(5)), gen(Family::Path(4)), gen(Family::Cycle(5))] {
            let t = cadr_solve(&g, 1, DEFAULT_EPSILON).unwrap();
            let (exact, residual) = policy_eval_exact(&g, t.space(), &t.policy()).unwrap();
            assert!(residual <= 1e-10);
            for (a, b) in exact.iter().zip(t.values()) {
                assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn closed_class_is_singular() {
        let q = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.5, 0.0, 0.0]);
        assert!(matches!(solve_absorbing_chain(&q), Err(Error::SingularSystem)));
        let ok = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.0, 0.0]);
        let (v, _) = solve_absorbing_chain(&ok).unwrap();
        assert_eq!(v.as_slice(), &[1.5, 1.0]);
    }

    #[test]
    fn policy_text_round_trip() {
        let g = gen(Family::Cycle(5));
        let t = cadr_solve(&g, 2, 1e-8).unwrap();
        let p = t.policy();
        let text = p.to_text(t.space());
        assert_eq!(CopPolicy::parse(&text, t.space()).unwrap(), p);
        assert!(CopPolicy::parse("C 1,2 3\n", t.space()).is_err());
        assert!(matches!(CopPolicy::parse("S 1,1\n", t.space()), Err(Error::MalformedPolicy(_))));
    }

    #[test]
    fn simulation_is_reproducible() {
        let g = gen(Family::Cycle(6));
        let t = cadr_solve(&g, 1, DEFAULT_EPSILON).unwrap();
        let p = t.policy();
        let a = monte_carlo(&g, t.space(), CopControl::Policy(&p), 1, 99).unwrap();
        let b = monte_carlo(&g, t.space(), CopControl::Policy(&p), 1, 99).unwrap();
        assert_eq!(a, b);
        assert!(monte_carlo(&g, t.space(), CopControl::Policy(&p), 0, 1).is_err());
    }

    #[test]
    fn simulation_agrees_on_small_cases() {
        let p2 = gen(Family::Path(2));
        let t = cadr_solve(&p2, 1, DEFAULT_EPSILON).unwrap();
        let est = monte_carlo(&p2, t.space(), CopControl::Policy(&t.policy()), 20_000, 3).unwrap();
        assert!((est.mean - 0.5).abs() <= 3.0 * est.std_error);
        assert_eq!(est.censored, 0);
    }

    #[test]
    fn short_schedule_is_censored() {
        let g = gen(Family::Path(6));
        let s = space(&g, 1);
        let est = monte_carlo(&g, &s, CopControl::Schedule(&[0, 1]), 500, 1).unwrap();
        assert!(est.censored > 0);
        assert!(matches!(
            monte_carlo(&g, &s, CopControl::Schedule(&[0, 2]), 5, 1),
            Err(Error::IllegalMove(_))
        ));
    }
}
