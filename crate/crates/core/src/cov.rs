//! Cost of visibility: how much longer capture takes when the cops cannot
//! see the robber. Covers closed forms for stars, long stars and cliques,
//! the node and edge pipelines on arbitrary graphs, and the floorplan
//! experiment harness that writes per-instance and averaged CSV files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigSpace, DEFAULT_STATE_BUDGET};
use crate::di::{self, PcsSettings};
use crate::dv;
use crate::envgen::{floorplan_graph, FloorplanSpec};
use crate::error::{Error, Result};
use crate::graph::{line_graph, Family, Graph};
use crate::reachability::cop_number;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// The closed form as printed in the source analysis.
    Paper,
    /// Recomputed under this crate's conventions where the printed form
    /// disagrees with them.
    Derived,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    /// Leading term as the ray length grows; lower-order terms are dropped.
    Asymptotic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticEntry {
    pub name: &'static str,
    pub value: Rational64,
    pub provenance: Provenance,
    pub exactness: Exactness,
    pub formula: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticFamilyValues {
    pub family: Family,
    pub entries: Vec<AnalyticEntry>,
}

impl AnalyticFamilyValues {
    /// First entry called `name` with the given provenance.
    pub fn get(&self, name: &str, provenance: Provenance) -> Option<Rational64> {
        self.entries
            .iter()
            .find(|e| e.name == name && e.provenance == provenance)
            .map(|e| e.value)
    }
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Drunk quantities of `K_N`, which are also the edge quantities of the
/// star with `N` leaves.
fn clique_drunk(n: i64, names: [&'static str; 3]) -> Vec<AnalyticEntry> {
    use Exactness::Exact;
    use Provenance::*;
    let [dct, dct_i, h_d] = names;
    let dct_v = r(n - 1, n);
    let paper_i = r((n - 1) * (n - 1), 2 * n - 3);
    let derived_i = r((n - 1) * (n - 1) + 1, 2 * n);
    vec![
        AnalyticEntry { name: dct, value: dct_v, provenance: Paper, exactness: Exact, formula: "1 - 1/N" },
        AnalyticEntry { name: dct_i, value: paper_i, provenance: Paper, exactness: Exact, formula: "(N-1)^2 / (2N-3)" },
        AnalyticEntry {
            name: dct_i,
            value: derived_i,
            provenance: Derived,
            exactness: Exact,
            formula: "((N-1)^2 + 1) / (2N)",
        },
        AnalyticEntry { name: h_d, value: paper_i / dct_v, provenance: Paper, exactness: Exact, formula: "N(N-1) / (2N-3)" },
        AnalyticEntry {
            name: h_d,
            value: derived_i / dct_v,
            provenance: Derived,
            exactness: Exact,
            formula: "((N-1)^2 + 1) / (2(N-1))",
        },
    ]
}

fn clique_adversarial(n: i64, names: [&'static str; 3]) -> Vec<AnalyticEntry> {
    use Exactness::Exact;
    use Provenance::Paper;
    vec![
        AnalyticEntry { name: names[0], value: r(1, 1), provenance: Paper, exactness: Exact, formula: "1" },
        AnalyticEntry { name: names[1], value: r(n - 1, 1), provenance: Paper, exactness: Exact, formula: "N - 1" },
        AnalyticEntry { name: names[2], value: r(n - 1, 1), provenance: Paper, exactness: Exact, formula: "N - 1" },
    ]
}

/// Closed-form values for the star `S_{N,1}`, the long star `S_{N,M}` and
/// the clique `K_N`.
pub fn analytic_values(family: Family) -> Result<AnalyticFamilyValues> {
    use Exactness::*;
    use Provenance::*;
    let entries = match family {
        Family::Star(n) if n >= 2 => {
            let n = n as i64;
            let mut e = vec![
                AnalyticEntry { name: "ct", value: r(1, 1), provenance: Paper, exactness: Exact, formula: "1" },
                AnalyticEntry { name: "ct_i", value: r(n, 1), provenance: Paper, exactness: Exact, formula: "N" },
                AnalyticEntry { name: "H_a", value: r(n, 1), provenance: Paper, exactness: Exact, formula: "N" },
            ];
            e.extend(clique_adversarial(n, ["edge_ct", "edge_ct_i", "edge_H_a"]));
            e.extend(clique_drunk(n, ["edge_dct", "edge_dct_i", "edge_H_d"]));
            e
        }
        Family::Clique(n) if n >= 2 => {
            let n = n as i64;
            let mut e = clique_adversarial(n, ["ct", "ct_i", "H_a"]);
            e.extend(clique_drunk(n, ["dct", "dct_i", "H_d"]));
            e
        }
        Family::LongStar { rays, ray_len } if rays >= 2 && ray_len >= 1 => {
            let (n, m) = (rays as i64, ray_len as i64);
            let h = r((2 * n - 1) * (n - 1) + 1, n);
            vec![
                AnalyticEntry { name: "dct", value: r(m, 2), provenance: Paper, exactness: Asymptotic, formula: "M/2" },
                AnalyticEntry {
                    name: "dct_i",
                    value: r(m, 2) * h,
                    provenance: Paper,
                    exactness: Asymptotic,
                    formula: "(M/2) ((2N-1)(N-1) + 1) / N",
                },
                AnalyticEntry {
                    name: "H_d",
                    value: h,
                    provenance: Paper,
                    exactness: Asymptotic,
                    formula: "((2N-1)(N-1) + 1) / N",
                },
                AnalyticEntry {
                    name: "H_d_lower",
                    value: r(2 * n - 3, 1),
                    provenance: Paper,
                    exactness: Asymptotic,
                    formula: "2N - 3",
                },
            ]
        }
        other => return Err(Error::UnsupportedFamily(other.to_string())),
    };
    Ok(AnalyticFamilyValues { family, entries })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovSettings {
    /// Largest cop count tried when computing the cop number.
    pub max_cops: usize,
    pub cadr_epsilon: f64,
    pub pcs: PcsSettings,
}

impl Default for CovSettings {
    fn default() -> Self {
        CovSettings { max_cops: 3, cadr_epsilon: dv::DEFAULT_EPSILON, pcs: PcsSettings::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cov {
    pub cops: usize,
    pub dct: f64,
    pub dct_i: f64,
    /// `dct_i / dct`; 1 when both are 0.
    pub h_d: f64,
    /// Whether PCS met its tolerance before the level cap.
    pub converged: bool,
    pub schedule: Vec<usize>,
}

/// Drunk cost of visibility with `K = c(G)` cops.
pub fn cov_drunk(g: &Graph, settings: &CovSettings) -> Result<Cov> {
    let cops = cop_number(g, settings.max_cops)?;
    let table = dv::cadr_solve(g, cops, settings.cadr_epsilon)?;
    let (dct, _) = table.dct();
    let pcs = di::dct_i_in(g, table.space(), &settings.pcs)?;
    let h_d = if dct == 0.0 && pcs.cost == 0.0 { 1.0 } else { pcs.cost / dct };
    Ok(Cov { cops, dct, dct_i: pcs.cost, h_d, converged: pcs.converged, schedule: pcs.sequence })
}

/// Edge variant: the cops and robber live on edges, which is the node
/// game on the line graph.
pub fn cov_drunk_edge(g: &Graph, settings: &CovSettings) -> Result<Cov> {
    cov_drunk(&line_graph(g)?.graph, settings)
}

/// Configuration space matching a [`Cov`] result, for decoding schedules.
pub fn cov_space(g: &Graph, cov: &Cov) -> Result<ConfigSpace> {
    ConfigSpace::new(g, cov.cops, DEFAULT_STATE_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Node,
    Edge,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Node => "node",
            Mode::Edge => "edge",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node" => Ok(Mode::Node),
            "edge" => Ok(Mode::Edge),
            _ => Err(Error::InvalidParameter(format!("unknown mode {s:?}"))),
        }
    }
}

/// The `(M, N)` pairs and `p0` values of the published floorplan study.
pub const PAPER_PAIRS: [(usize, usize); 5] = [(1, 30), (2, 15), (3, 10), (4, 7), (5, 6)];
pub const PAPER_P0: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
pub const DEFAULT_REPS: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub pairs: Vec<(usize, usize)>,
    pub p0: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    pub settings: CovSettings,
}

impl ExperimentSpec {
    pub fn paper(mode: Mode, seed: u64) -> Self {
        ExperimentSpec {
            mode,
            pairs: PAPER_PAIRS.to_vec(),
            p0: PAPER_P0.to_vec(),
            reps: DEFAULT_REPS,
            seed,
            jobs: None,
            settings: CovSettings::default(),
        }
    }
}

/// One row of the per-instance CSV. Failed instances keep their
/// parameters, carry `NaN` results and `converged = error`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub mode: Mode,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n_cols: usize,
    pub p0: f64,
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    pub edges: usize,
    pub cops: usize,
    pub dct: f64,
    pub dct_i: f64,
    #[serde(rename = "H_d")]
    pub h_d: f64,
    pub converged: String,
    pub wall_ms: u128,
}

impl ExperimentRecord {
    pub fn ok(&self) -> bool {
        self.converged != "error"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AverageRecord {
    pub mode: Mode,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n_cols: usize,
    pub p0: f64,
    pub mean_dct: f64,
    pub mean_dct_i: f64,
    #[serde(rename = "mean_H_d")]
    pub mean_h_d: f64,
    #[serde(rename = "stderr_H_d")]
    pub stderr_h_d: f64,
    /// Instances that contributed (failed ones are left out).
    pub reps: usize,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one instance: the master seed xor a fixed hash of its key.
pub fn instance_seed(master: u64, m: usize, n: usize, p0: f64, rep: usize) -> u64 {
    let h = [m as u64, n as u64, p0.to_bits(), rep as u64]
        .into_iter()
        .fold(0u64, |acc, x| mix(acc ^ x));
    master ^ h
}

fn run_instance(spec: &ExperimentSpec, m: usize, n: usize, p0: f64, rep: usize) -> ExperimentRecord {
    let seed = instance_seed(spec.seed, m, n, p0, rep);
    let started = Instant::now();
    let mut rec = ExperimentRecord {
        mode: spec.mode,
        m,
        n_cols: n,
        p0,
        rep,
        seed,
        n: m * n,
        edges: 0,
        cops: 0,
        dct: f64::NAN,
        dct_i: f64::NAN,
        h_d: f64::NAN,
        converged: "error".into(),
        wall_ms: 0,
    };
    let outcome = FloorplanSpec::new(m, n, p0, seed).and_then(|fs| floorplan_graph(&fs)).and_then(|g| {
        rec.edges = g.edge_count();
        match spec.mode {
            Mode::Node => cov_drunk(&g, &spec.settings),
            Mode::Edge => cov_drunk_edge(&g, &spec.settings),
        }
    });
    if let Ok(c) = outcome {
        rec.cops = c.cops;
        rec.dct = c.dct;
        rec.dct_i = c.dct_i;
        rec.h_d = c.h_d;
        rec.converged = c.converged.to_string();
    }
    rec.wall_ms = started.elapsed().as_millis();
    rec
}

/// Runs every `(M, N, p0, rep)` instance on a worker pool. Records come
/// back ordered by pair, then `p0`, then repetition, whatever the
/// scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRecord>> {
    if spec.reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    if spec.pairs.is_empty() || spec.p0.is_empty() {
        return Err(Error::InvalidParameter("need at least one (M, N) pair and one p0".into()));
    }
    for &(m, n) in &spec.pairs {
        for &p in &spec.p0 {
            FloorplanSpec::new(m, n, p, 0)?;
        }
    }
    let jobs: Vec<(usize, usize, f64, usize)> = spec
        .pairs
        .iter()
        .flat_map(|&(m, n)| spec.p0.iter().flat_map(move |&p| (0..spec.reps).map(move |rep| (m, n, p, rep))))
        .collect();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = spec.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(pool.install(|| jobs.par_iter().map(|&(m, n, p, rep)| run_instance(spec, m, n, p, rep)).collect()))
}

/// Arithmetic means per `(mode, M, N, p0)`, in first-appearance order.
/// `H_d` is averaged instance by instance, not as a ratio of means.
pub fn averages(records: &[ExperimentRecord]) -> Vec<AverageRecord> {
    let mut groups: Vec<(AverageRecord, Vec<&ExperimentRecord>)> = Vec::new();
    for rec in records {
        let key = |a: &AverageRecord| a.mode == rec.mode && a.m == rec.m && a.n_cols == rec.n_cols && a.p0 == rec.p0;
        let slot = match groups.iter().position(|(a, _)| key(a)) {
            Some(i) => i,
            None => {
                groups.push((
                    AverageRecord {
                        mode: rec.mode,
                        m: rec.m,
                        n_cols: rec.n_cols,
                        p0: rec.p0,
                        mean_dct: f64::NAN,
                        mean_dct_i: f64::NAN,
                        mean_h_d: f64::NAN,
                        stderr_h_d: f64::NAN,
                        reps: 0,
                    },
                    Vec::new(),
                ));
                groups.len() - 1
            }
        };
        if rec.ok() {
            groups[slot].1.push(rec);
        }
    }
    groups
        .into_iter()
        .map(|(mut a, recs)| {
            let k = recs.len();
            if k > 0 {
                let mean = |f: fn(&ExperimentRecord) -> f64| recs.iter().map(|r| f(r)).sum::<f64>() / k as f64;
                a.mean_dct = mean(|r| r.dct);
                a.mean_dct_i = mean(|r| r.dct_i);
                a.mean_h_d = mean(|r| r.h_d);
                a.stderr_h_d = if k > 1 {
                    let var = recs.iter().map(|r| (r.h_d - a.mean_h_d).powi(2)).sum::<f64>() / (k - 1) as f64;
                    (var / k as f64).sqrt()
                } else {
                    0.0
                };
            }
            a.reps = k;
            a
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    write_rows(path, records)
}

pub fn write_averages(path: &Path, averages: &[AverageRecord]) -> Result<()> {
    write_rows(path, averages)
}

/// Where the averages land for a given records path: `r.csv` gives
/// `r.averages.csv`.
pub fn averages_path(records: &Path) -> std::path::PathBuf {
    let stem = records.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    records.with_file_name(format!("{stem}.averages.csv"))
}
