//! Cop configurations: `K`-element multisets of nodes, stored as sorted
//! tuples since cops are interchangeable.
//!
//! Configurations are numbered in lexicographic order, so "lowest index"
//! tie-breaking over configurations is lexicographic on the sorted tuple.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default cap on `configurations x n` table sizes.
pub const DEFAULT_STATE_BUDGET: u128 = 20_000_000;

/// Number of sorted `k`-tuples over `n` nodes, i.e. C(n + k - 1, k).
pub fn config_count(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 + i) / (i + 1);
    }
    acc
}

#[derive(Clone, Debug)]
pub struct ConfigSpace {
    n: usize,
    k: usize,
    nodes: Vec<u32>,
    occupied: Vec<bool>,
    succ_start: Vec<usize>,
    succ: Vec<u32>,
    index: HashMap<Vec<u32>, usize>,
}

impl ConfigSpace {
    /// Enumerates every configuration of `k` cops on `g` and their
    /// slide-or-stay successors. `budget` bounds `configurations * n`.
    pub fn new(g: &Graph, k: usize, budget: u128) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("cop count must be at least 1".into()));
        }
        let n = g.n();
        let required = config_count(n, k) * n as u128;
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
        let count = config_count(n, k) as usize;

        let mut nodes = Vec::with_capacity(count * k);
        let mut tuple = vec![0u32; k];
        loop {
            nodes.extend_from_slice(&tuple);
            // advance to the next non-decreasing tuple
            let mut i = k;
            while i > 0 && tuple[i - 1] as usize == n - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            let next = tuple[i - 1] + 1;
            for t in &mut tuple[i - 1..] {
                *t = next;
            }
        }
        debug_assert_eq!(nodes.len(), count * k);

        let mut index = HashMap::with_capacity(count);
        let mut occupied = vec![false; count * n];
        for c in 0..count {
            let t = &nodes[c * k..(c + 1) * k];
            for &v in t {
                occupied[c * n + v as usize] = true;
            }
            index.insert(t.to_vec(), c);
        }

        let closed: Vec<Vec<usize>> = (0..n).map(|v| g.closed_neighbors(v)).collect();
        let mut succ_start = Vec::with_capacity(count + 1);
        let mut succ = Vec::new();
        let mut scratch = Vec::new();
        let mut choice = vec![0usize; k];
        let mut key = vec![0u32; k];
        for c in 0..count {
            succ_start.push(succ.len());
            let t = &nodes[c * k..(c + 1) * k];
            scratch.clear();
            choice.iter_mut().for_each(|x| *x = 0);
            'odometer: loop {
                for j in 0..k {
                    key[j] = closed[t[j] as usize][choice[j]] as u32;
                }
                key.sort_unstable();
                scratch.push(index[&key] as u32);
                let mut j = k;
                loop {
                    if j == 0 {
                        break 'odometer;
                    }
                    j -= 1;
                    choice[j] += 1;
                    if choice[j] < closed[t[j] as usize].len() {
                        break;
                    }
                    choice[j] = 0;
                }
            }
            scratch.sort_unstable();
            scratch.dedup();
            succ.extend_from_slice(&scratch);
        }
        succ_start.push(succ.len());

        Ok(ConfigSpace { n, k, nodes, occupied, succ_start, succ, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cops(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.succ_start.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted 0-based nodes of configuration `c`.
    pub fn nodes(&self, c: usize) -> &[u32] {
        &self.nodes[c * self.k..(c + 1) * self.k]
    }

    /// True when some cop of configuration `c` stands on `v`.
    #[inline]
    pub fn occupies(&self, c: usize, v: usize) -> bool {
        self.occupied[c * self.n + v]
    }

    /// Configurations reachable in one round (every cop slides or stays),
    /// ascending and without repeats.
    #[inline]
    pub fn successors(&self, c: usize) -> &[u32] {
        &self.succ[self.succ_start[c]..self.succ_start[c + 1]]
    }

    pub fn is_successor(&self, from: usize, to: usize) -> bool {
        self.successors(from).binary_search(&(to as u32)).is_ok()
    }

    /// Index of the configuration holding exactly `nodes` (any order, 0-based).
    pub fn index_of(&self, nodes: &[usize]) -> Option<usize> {
        if nodes.len() != self.k || nodes.iter().any(|&v| v >= self.n) {
            return None;
        }
        let mut key: Vec<u32> = nodes.iter().map(|&v| v as u32).collect();
        key.sort_unstable();
        self.index.get(&key).copied()
    }

    /// Number of distinct nodes covered by configuration `c`.
    pub fn distinct_nodes(&self, c: usize) -> usize {
        let t = self.nodes(c);
        1 + t.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn label(&self, c: usize) -> ConfigLabel<'_> {
        ConfigLabel(self.nodes(c))
    }

    /// Parses a 1-based comma-separated list such as `2,5`.
    pub fn parse_label(&self, text: &str) -> Result<usize> {
        let nodes: Vec<usize> = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1 && v <= self.n)
                    .map(|v| v - 1)
                    .ok_or_else(|| Error::MalformedPolicy(format!("bad configuration '{text}'")))
            })
            .collect::<Result<_>>()?;
        self.index_of(&nodes)
            .ok_or_else(|| Error::MalformedPolicy(format!("configuration '{text}' needs {} cops", self.k)))
    }
}

/// Displays a configuration as 1-based comma-separated nodes.
pub struct ConfigLabel<'a>(&'a [u32]);

impl fmt::Display for ConfigLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        Ok(())
    }
}
