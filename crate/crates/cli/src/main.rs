use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use copsrobbers::config::{ConfigSpace, DEFAULT_STATE_BUDGET};
use copsrobbers::cov::{self, CovSettings, ExperimentSpec, Mode};
use copsrobbers::di::{self, PcsSettings};
use copsrobbers::dv::{self, CopControl, CopPolicy};
use copsrobbers::envgen::{floorplan_graph, FloorplanSpec};
use copsrobbers::graph::line_graph;
use copsrobbers::{av, reachability, Error, Family, Graph};

/// Cops-and-robber solvers: cop number, capture times for visible and
/// invisible robbers, and cost-of-visibility experiments.
///
/// Graph files hold one JSON object such as {"n":3,"edges":[[1,2],[2,3]]}
/// with 1-based nodes.
#[derive(Parser)]
#[command(name = "copsrobbers", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a named graph or a random floorplan graph.
    Generate(GenerateArgs),
    /// Solve one game variant and print its capture time.
    Solve(SolveArgs),
    /// Print the smallest cop count that guarantees capture.
    Copnumber(CopnumberArgs),
    /// Write the line graph, whose nodes are the edges of the input.
    Linegraph(LinegraphArgs),
    /// Print dct, dct_i and H_d = dct_i / dct with K = c(G).
    Cov(CovArgs),
    /// Run the floorplan study and write per-instance and averaged CSV.
    Experiment(ExperimentArgs),
    /// Estimate a capture time by simulating the drunk robber.
    Simulate(SimulateArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["family", "floorplan"])))]
struct GenerateArgs {
    /// Named family: path:N, cycle:N, clique:N, star:N, long_star:N,M or
    /// grid:MxN.
    #[arg(long)]
    family: Option<Family>,
    /// Random floorplan on an MxN grid, e.g. 5x6.
    #[arg(long, value_parser = parse_pair)]
    floorplan: Option<(usize, usize)>,
    /// Probability of re-inserting each non-tree grid edge.
    #[arg(long, default_value_t = 0.0, requires = "floorplan")]
    p0: f64,
    /// Floorplan seed.
    #[arg(long, default_value_t = 0, requires = "floorplan")]
    seed: u64,
    /// Output file [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    /// Adversarial visible robber (CAAR).
    Av,
    /// Drunk visible robber (CADR).
    Dv,
    /// Drunk invisible robber (PCS beam search).
    Di,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    variant: Variant,
    /// Graph file.
    #[arg(long)]
    graph: PathBuf,
    /// Number of cops.
    #[arg(long, default_value_t = 1)]
    cops: usize,
    /// Convergence tolerance [default: 1e-9 for dv, 1e-6 for di].
    #[arg(long)]
    epsilon: Option<f64>,
    /// Beam width J_max for di; "inf" keeps every sequence [default: 64].
    #[arg(long, value_parser = parse_beam)]
    beam: Option<Beam>,
    /// Write the cop strategy (av, dv) to this file.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Write the cop schedule (di), one configuration per line.
    #[arg(long)]
    schedule: Option<PathBuf>,
}

#[derive(Args)]
struct CopnumberArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Largest cop count to try.
    #[arg(long, default_value_t = 3)]
    max_cops: usize,
}

#[derive(Args)]
struct LinegraphArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Output file [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Largest cop count tried for c(G).
    #[arg(long, default_value_t = 3)]
    max_cops: usize,
    /// CADR tolerance for dct.
    #[arg(long, default_value_t = dv::DEFAULT_EPSILON)]
    epsilon_dv: f64,
    /// PCS tolerance for dct_i.
    #[arg(long, default_value_t = di::DEFAULT_EPSILON)]
    epsilon_di: f64,
    /// PCS beam width J_max; "inf" keeps every sequence.
    #[arg(long, default_value = "64", value_parser = parse_beam)]
    beam: Beam,
}

impl SolverFlags {
    fn settings(&self) -> CovSettings {
        CovSettings {
            max_cops: self.max_cops,
            cadr_epsilon: self.epsilon_dv,
            pcs: PcsSettings { beam: self.beam.0, eps: self.epsilon_di, ..Default::default() },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Cops and robber on nodes.
    Node,
    /// Cops and robber on edges (the node game on the line graph).
    Edge,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Node => Mode::Node,
            ModeArg::Edge => Mode::Edge,
        }
    }
}

#[derive(Args)]
struct CovArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "node")]
    mode: ModeArg,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Grid shapes MxN, comma separated [default: 1x30,2x15,3x10,4x7,5x6].
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pairs: Vec<(usize, usize)>,
    /// Edge re-insertion probabilities [default: 0,0.25,0.5,0.75,1].
    #[arg(long, value_delimiter = ',')]
    p0: Vec<f64>,
    /// Repetitions per (M, N, p0).
    #[arg(long, default_value_t = cov::DEFAULT_REPS)]
    reps: usize,
    /// Master seed; each instance uses the seed xor a hash of its key.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "node")]
    mode: ModeArg,
    /// Per-instance CSV; averages go next to it as <stem>.averages.csv.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
    /// Record wall-clock times; without it wall_ms is 0 so reruns are
    /// byte-identical.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("control").required(true).args(["policy", "schedule"])))]
struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Cop policy file as written by `solve --variant dv --policy`.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Cop schedule file as written by `solve --variant di --schedule`.
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (m, n) = s.split_once('x').ok_or_else(|| format!("expected MxN, got {s:?}"))?;
    let m = m.trim().parse().map_err(|_| format!("bad M in {s:?}"))?;
    let n = n.trim().parse().map_err(|_| format!("bad N in {s:?}"))?;
    Ok((m, n))
}

/// Beam width; `None` is unbounded.
#[derive(Clone, Copy)]
struct Beam(Option<usize>);

fn parse_beam(s: &str) -> std::result::Result<Beam, String> {
    if s == "inf" {
        return Ok(Beam(None));
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("beam must be a positive integer or inf, got {s:?}")),
        Ok(b) => Ok(Beam(Some(b))),
    }
}

fn usage_error(msg: &str) -> ! {
    Cli::command().error(clap::error::ErrorKind::ArgumentConflict, msg).exit()
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Graph::decode(&text).with_context(|| format!("bad graph file {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let g = match (a.family, a.floorplan) {
        (Some(f), _) => f.generate()?,
        (None, Some((m, n))) => floorplan_graph(&FloorplanSpec::new(m, n, a.p0, a.seed)?)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    emit(a.out.as_deref(), &g.encode())
}

fn solve(a: SolveArgs) -> Result<()> {
    let is_di = matches!(a.variant, Variant::Di);
    if a.beam.is_some() && !is_di {
        usage_error("--beam only applies to --variant di");
    }
    if a.schedule.is_some() && !is_di {
        usage_error("--schedule only applies to --variant di");
    }
    if a.policy.is_some() && is_di {
        usage_error("--policy applies to --variant av and dv; use --schedule for di");
    }
    if a.epsilon.is_some() && matches!(a.variant, Variant::Av) {
        usage_error("--epsilon does not apply to --variant av");
    }
    let g = read_graph(&a.graph)?;
    match a.variant {
        Variant::Av => {
            let t = av::caar_solve(&g, a.cops)?;
            match av::capture_time(&t) {
                Ok(ct) => println!("ct = {}\nstart = {}", ct.rounds, t.space().label(ct.start)),
                Err(Error::InfiniteCaptureTime { cops }) => println!("ct = inf ({cops} cops cannot force capture)"),
                Err(e) => return Err(e.into()),
            }
            if let Some(p) = &a.policy {
                fs::write(p, t.policy_text())?;
            }
        }
        Variant::Dv => {
            let eps = a.epsilon.unwrap_or(dv::DEFAULT_EPSILON);
            let t = dv::cadr_solve(&g, a.cops, eps)?;
            let (value, start) = t.dct();
            println!("dct = {value:.9}\nstart = {}\nsweeps = {}", t.space().label(start), t.sweeps());
            if let Some(p) = &a.policy {
                fs::write(p, t.policy().to_text(t.space()))?;
            }
        }
        Variant::Di => {
            let settings = PcsSettings {
                beam: a.beam.map_or(Some(di::DEFAULT_BEAM), |b| b.0),
                eps: a.epsilon.unwrap_or(di::DEFAULT_EPSILON),
                ..Default::default()
            };
            let space = ConfigSpace::new(&g, a.cops, DEFAULT_STATE_BUDGET)?;
            let r = di::dct_i_in(&g, &space, &settings)?;
            println!(
                "dct_i = {:.9}\nstart = {}\nlevels = {}\nconverged = {}",
                r.cost,
                space.label(r.sequence[0]),
                r.levels,
                r.converged
            );
            if let Some(p) = &a.schedule {
                let body: String = r.sequence.iter().map(|&c| format!("{}\n", space.label(c))).collect();
                fs::write(p, body)?;
            }
        }
    }
    Ok(())
}

fn copnumber(a: CopnumberArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    match reachability::cop_number(&g, a.max_cops) {
        Ok(c) => {
            println!("c = {c}");
            Ok(())
        }
        Err(Error::CopLimitExhausted { kmax }) => bail!("c > {kmax}: no cop count up to {kmax} guarantees capture"),
        Err(e) => Err(e.into()),
    }
}

fn linegraph(a: LinegraphArgs) -> Result<()> {
    let l = line_graph(&read_graph(&a.graph)?)?;
    emit(a.out.as_deref(), &l.graph.encode())
}

fn cov_cmd(a: CovArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let settings = a.solver.settings();
    let (c, prefix) = match a.mode {
        ModeArg::Node => (cov::cov_drunk(&g, &settings)?, ""),
        ModeArg::Edge => (cov::cov_drunk_edge(&g, &settings)?, "edge_"),
    };
    println!(
        "cops = {}\n{prefix}dct = {:.9}\n{prefix}dct_i = {:.9}\n{prefix}H_d = {:.9}\nconverged = {}",
        c.cops, c.dct, c.dct_i, c.h_d, c.converged
    );
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let mut spec = ExperimentSpec::paper(a.mode.into(), a.seed);
    if !a.pairs.is_empty() {
        spec.pairs = a.pairs;
    }
    if !a.p0.is_empty() {
        spec.p0 = a.p0;
    }
    spec.reps = a.reps;
    spec.jobs = a.jobs;
    spec.settings = a.solver.settings();
    let mut records = cov::run_experiment(&spec)?;
    if !a.timing {
        records.iter_mut().for_each(|r| r.wall_ms = 0);
    }
    let averages = cov::averages(&records);
    let avg_path = cov::averages_path(&a.out);
    cov::write_records(&a.out, &records)?;
    cov::write_averages(&avg_path, &averages)?;
    let failed = records.iter().filter(|r| !r.ok()).count();
    println!("{} instances ({failed} failed) -> {}, {}", records.len(), a.out.display(), avg_path.display());
    for avg in &averages {
        println!("{} ({},{}) p0={}: mean H_d = {:.4} +- {:.4}", avg.mode, avg.m, avg.n_cols, avg.p0, avg.mean_h_d, avg.stderr_h_d);
    }
    Ok(())
}

/// Cop count of the first configuration in a policy or schedule file.
fn cops_in(text: &str) -> Result<usize> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .context("file has no configurations")?;
    let label = first.strip_prefix("S ").unwrap_or(first).split_whitespace().next().unwrap_or("");
    Ok(label.split(',').count())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let path = a.policy.as_ref().or(a.schedule.as_ref()).expect("clap requires one");
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let space = ConfigSpace::new(&g, cops_in(&text)?, DEFAULT_STATE_BUDGET)?;
    let est = if a.policy.is_some() {
        let policy = CopPolicy::parse(&text, &space)?;
        dv::monte_carlo(&g, &space, CopControl::Policy(&policy), a.trials, a.seed)?
    } else {
        let schedule = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| space.parse_label(l))
            .collect::<copsrobbers::Result<Vec<_>>>()?;
        dv::monte_carlo(&g, &space, CopControl::Schedule(&schedule), a.trials, a.seed)?
    };
    println!(
        "mean = {:.6}\nstd_error = {:.6}\ntrials = {}\ncensored = {}",
        est.mean, est.std_error, est.trials, est.censored
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Copnumber(a) => copnumber(a),
        Command::Linegraph(a) => linegraph(a),
        Command::Cov(a) => cov_cmd(a),
        Command::Experiment(a) => experiment(a),
        Command::Simulate(a) => simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
