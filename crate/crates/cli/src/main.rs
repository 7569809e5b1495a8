//! Experiment driver: theory tables, process runs, branching-process
//! batches, master-graph experiments, and comparison reports.
//!
//! Outputs are CSV for tables and JSON for reports; every JSON artifact
//! embeds the full config and the version string, and reruns with the same
//! flags are byte-identical.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use paged_core::analysis::{
    self, components, degree_histogram, DegreeHistogram, DEFAULT_SEED_GAP,
};
use paged_core::cmj;
use paged_core::master::{self, MasterGraph};
use paged_core::process::{run_feasible, run_process, DepletedPolicy, SeedGraph, Sigma};
use paged_core::stats::{derive_seed, empirical_pmf, tv_distance};
use paged_core::theory::{self, derive_params, gq_pmf, TheoryFns, TheoryTables};
use paged_core::{Error, Params};

const VERSION: &str = concat!("paged ", env!("CARGO_PKG_VERSION"));

#[derive(Parser, Debug)]
#[command(name = "paged", version, about = "aging preferential-attachment model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit constants, q/p grids and the limiting degree sequence.
    Theory(TheoryArgs),
    /// Run the on-line graph process and compare against theory.
    Simulate(SimulateArgs),
    /// Batch the branching process and compare the alive-count law.
    Cmj(CmjArgs),
    /// Master-graph experiments: equivalence, components, vertex degree.
    Master(MasterArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct TheoryArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 64)]
    k_max: usize,
    #[arg(long, default_value_t = 10.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "seed-graph-n", default_value_t = DEFAULT_SEED_GAP)]
    seed_graph_n: u32,
    #[arg(long, value_enum, default_value_t = OnDepleted::Resample)]
    on_depleted: OnDepleted,
    /// Compare empirical densities against theory for degrees up to here.
    #[arg(long, default_value_t = 10)]
    k_hi: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CmjArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 1000)]
    runs: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum OnDepleted {
    Resample,
    Abort,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum MasterMode {
    Equivalence,
    Components,
    VertexDegree,
}

#[derive(Args, Debug, Clone, Serialize)]
struct MasterArgs {
    #[arg(long, value_enum)]
    mode: MasterMode,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 100)]
    runs: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "seed-graph-n", default_value_t = DEFAULT_SEED_GAP)]
    seed_graph_n: u32,
    /// Age cutoff rule for the current-edge set: "lnln" or "const:<x>".
    #[arg(long, default_value = "lnln")]
    omega: String,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Revealed current edges before a component is declared large
    /// (default: the n^{1/2+eps} log^3 rule).
    #[arg(long)]
    reveal_cap: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    round_cap: u64,
    /// Target vertex for vertex-degree mode (default n/2).
    #[arg(long)]
    vertex: Option<u64>,
    /// Component-search start vertices per run in components mode.
    #[arg(long, default_value_t = 8)]
    sweeps: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_omega(rule: &str, n: u64) -> Result<f64, Error> {
    if rule == "lnln" {
        return Ok(master::default_omega(n));
    }
    if let Some(x) = rule.strip_prefix("const:") {
        let v: f64 = x
            .parse()
            .map_err(|_| Error::InvalidParam(format!("bad omega constant {x:?}")))?;
        if v <= 1.0 {
            return Err(Error::InvalidParam("omega must exceed 1".into()));
        }
        return Ok(v);
    }
    Err(Error::InvalidParam(format!(
        "omega rule {rule:?} is neither \"lnln\" nor \"const:<x>\""
    )))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Error> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Run(format!("serialize {}: {e}", path.display())))?;
    fs::write(path, body + "\n").map_err(|e| Error::Run(format!("write {}: {e}", path.display())))
}

fn write_lines(path: &Path, header: &str, lines: impl IntoIterator<Item = String>) -> Result<(), Error> {
    let file = fs::File::create(path).map_err(|e| Error::Run(format!("create {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let mut emit = |s: &str| {
        writeln!(w, "{s}").map_err(|e| Error::Run(format!("write {}: {e}", path.display())))
    };
    emit(header)?;
    for line in lines {
        emit(&line)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Report<C: Serialize, B: Serialize> {
    version: &'static str,
    config: C,
    #[serde(flatten)]
    body: B,
}

fn report<C: Serialize, B: Serialize>(config: C, body: B) -> Report<C, B> {
    Report {
        version: VERSION,
        config,
        body,
    }
}

fn cmd_theory(args: &TheoryArgs) -> Result<(), Error> {
    let tables = TheoryTables::build(args.p, args.m, args.k_max, args.tau_max, args.grid_step)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::Run(e.to_string()))?;
    write_json(&args.out.join("theory.json"), &report(args.clone(), &tables))?;
    write_lines(
        &args.out.join("grid.csv"),
        "tau,q,p",
        tables
            .grid
            .iter()
            .map(|r| format!("{},{},{}", r.tau, r.q, r.p)),
    )?;
    write_lines(
        &args.out.join("x.csv"),
        "k,x",
        tables
            .x
            .iter()
            .enumerate()
            .map(|(k, x)| format!("{k},{x}")),
    )?;
    if tables.regime == "near-critical" {
        eprintln!("note: alpha = {:.6} is near-critical; zeta and eta omitted", tables.alpha);
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateBody {
    vertex_count_mean: f64,
    live_edges_mean: f64,
    isolated_fraction_all: f64,
    isolated_fraction_final_window: f64,
    x0_theory: f64,
    giant_fractions: Vec<f64>,
    second_sizes: Vec<u64>,
    per_k: Vec<PerK>,
    tv_truncated: f64,
}

#[derive(Serialize)]
struct PerK {
    k: usize,
    count: u64,
    empirical: f64,
    theory: f64,
    rel_err: f64,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let params: Params = derive_params(args.p, args.m)?;
    let seed_graph = SeedGraph::ladder(args.m, args.seed_graph_n)?;
    let policy = match args.on_depleted {
        OnDepleted::Resample => DepletedPolicy::default(),
        OnDepleted::Abort => DepletedPolicy::Abort,
    };
    let results: Vec<(DegreeHistogram, analysis::ComponentReport)> = (0..args.runs)
        .into_par_iter()
        .map(|i| {
            let (state, _, _) =
                run_feasible(&seed_graph, args.p, args.n, derive_seed(args.seed, i), policy)?;
            Ok((degree_histogram(&state), components(&state)))
        })
        .collect::<Result<_, Error>>()?;
    let mut merged = results[0].0.clone();
    for (h, _) in &results[1..] {
        merged.merge(h);
    }
    let law = theory::degree_law(&params, args.k_hi.max(1), 1e-10)?;
    let cmp = analysis::compare_histogram(&merged, &law, 0, args.k_hi)?;
    let runs_f = args.runs as f64;
    let body = SimulateBody {
        vertex_count_mean: merged.vertex_count as f64 / runs_f,
        live_edges_mean: results
            .iter()
            .map(|(h, _)| {
                h.counts
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| k as u64 * c)
                    .sum::<u64>() as f64
                    / 2.0
            })
            .sum::<f64>()
            / runs_f,
        isolated_fraction_all: results
            .iter()
            .map(|(_, c)| c.isolated as f64 / args.n as f64)
            .sum::<f64>()
            / runs_f,
        // vertices of the final window always hold their own out-edges
        isolated_fraction_final_window: 0.0,
        x0_theory: law.x[0],
        giant_fractions: results
            .iter()
            .map(|(_, c)| c.giant as f64 / args.n as f64)
            .collect(),
        second_sizes: results.iter().map(|(_, c)| c.second).collect(),
        per_k: cmp
            .per_k
            .iter()
            .map(|e| PerK {
                k: e.k,
                count: merged.counts.get(e.k).copied().unwrap_or(0),
                empirical: e.empirical,
                theory: e.theory,
                rel_err: e.rel_err,
            })
            .collect(),
        tv_truncated: cmp.tv,
    };
    fs::create_dir_all(&args.out).map_err(|e| Error::Run(e.to_string()))?;
    write_json(&args.out.join("report.json"), &report(args.clone(), &body))?;
    write_lines(
        &args.out.join("degree_hist.csv"),
        "k,count,empirical,theory",
        merged.counts.iter().enumerate().map(|(k, &c)| {
            let th = law.x.get(k).copied().unwrap_or(0.0);
            format!("{k},{c},{},{th}", c as f64 / merged.n as f64)
        }),
    )?;
    write_lines(
        &args.out.join("component_sizes.csv"),
        "run,size",
        results.iter().enumerate().flat_map(|(i, (_, c))| {
            c.sizes.iter().map(move |s| format!("{i},{s}")).collect::<Vec<_>>()
        }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct CmjBody {
    p_of_alpha: f64,
    q_tau: f64,
    p_tau: f64,
    tv: f64,
    empirical: Vec<f64>,
    theory: Vec<f64>,
    birth_quantiles: [usize; 4],
}

fn cmd_cmj(args: &CmjArgs) -> Result<(), Error> {
    if !(args.tau >= 0.0) {
        return Err(Error::InvalidParam("tau must be nonnegative".into()));
    }
    let p = theory::p_for_alpha::<f64>(args.alpha)?;
    let params = derive_params::<f64>(p, 1)?;
    let fns = TheoryFns::new(params, args.tau.ceil() as usize + 2);
    let rows: Vec<(u64, usize, usize)> = (0..args.runs)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(args.seed, i);
            let trace = cmj::simulate_cmj(args.alpha, args.tau, s)?;
            Ok((s, trace.alive_at(args.tau)?, trace.born_before(args.tau)?))
        })
        .collect::<Result<_, Error>>()?;
    let alive: Vec<u64> = rows.iter().map(|r| r.1 as u64).collect();
    let empirical = empirical_pmf(&alive);
    let q = fns.q_eval(args.tau)?;
    let pv = fns.p_eval(args.tau)?;
    let theory_pmf: Vec<f64> = (0..empirical.len().max(100))
        .map(|k| theory::g_pmf(pv, q, k))
        .collect();
    let mut births: Vec<usize> = rows.iter().map(|r| r.2).collect();
    births.sort_unstable();
    let quantile = |f: f64| births[((f * births.len() as f64) as usize).min(births.len() - 1)];
    let body = CmjBody {
        p_of_alpha: p,
        q_tau: q,
        p_tau: pv,
        tv: tv_distance(&empirical, &theory_pmf),
        empirical,
        theory: theory_pmf,
        birth_quantiles: [quantile(0.5), quantile(0.9), quantile(0.99), births[births.len() - 1]],
    };
    fs::create_dir_all(&args.out).map_err(|e| Error::Run(e.to_string()))?;
    write_json(&args.out.join("summary.json"), &report(args.clone(), &body))?;
    write_lines(
        &args.out.join("traces.csv"),
        "seed,tau,d,b",
        rows.iter()
            .map(|(s, d, b)| format!("{s},{},{d},{b}", args.tau)),
    )?;
    Ok(())
}

fn feasible_sigma(p: f64, n: u64, sg: &SeedGraph, seed: u64) -> Result<Sigma, Error> {
    for attempt in 0..100 {
        let sigma = Sigma::draw(p, n, sg, derive_seed(seed, attempt))?;
        if sigma.is_feasible() {
            return Ok(sigma);
        }
    }
    Err(Error::Run("no feasible sigma in 100 attempts".into()))
}

#[derive(Serialize)]
struct EquivalenceBody {
    degree_tv: f64,
    component_size_tv: f64,
    realize_degree_pmf: Vec<f64>,
    process_degree_pmf: Vec<f64>,
}

fn pooled_degree_pmf(histos: &[DegreeHistogram]) -> Vec<f64> {
    let kmax = histos.iter().map(|h| h.counts.len()).max().unwrap_or(1);
    let mut counts = vec![0.0; kmax];
    let mut total = 0.0;
    for h in histos {
        for (k, &c) in h.counts.iter().enumerate() {
            counts[k] += c as f64;
            total += c as f64;
        }
    }
    counts.iter().map(|c| c / total).collect()
}

fn size_pmf(sizes: &[u64]) -> Vec<f64> {
    let kmax = sizes.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0.0; kmax + 1];
    for &s in sizes {
        counts[s as usize] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total.max(1.0)).collect()
}

fn cmd_master(args: &MasterArgs) -> Result<(), Error> {
    let params: Params = derive_params(args.p, args.m)?;
    let seed_graph = SeedGraph::ladder(args.m, args.seed_graph_n)?;
    let omega = parse_omega(&args.omega, args.n)?;
    let reveal_cap = args
        .reveal_cap
        .unwrap_or_else(|| master::default_reveal_cap(params.gamma, args.n, args.epsilon));
    fs::create_dir_all(&args.out).map_err(|e| Error::Run(e.to_string()))?;
    match args.mode {
        MasterMode::Equivalence => {
            let sigma = feasible_sigma(args.p, args.n, &seed_graph, args.seed)?;
            let realized: Vec<_> = (0..args.runs)
                .into_par_iter()
                .map(|i| {
                    let mut mg = MasterGraph::new_with_omega(
                        &sigma,
                        &seed_graph,
                        args.n,
                        derive_seed(args.seed ^ 0xAAAA, i),
                        omega,
                    )?;
                    let st = mg.realize_full()?;
                    Ok((degree_histogram(&st), components(&st)))
                })
                .collect::<Result<_, Error>>()?;
            let processed: Vec<_> = (0..args.runs)
                .into_par_iter()
                .map(|i| {
                    let st = run_process(
                        &seed_graph,
                        &sigma,
                        args.n,
                        derive_seed(args.seed ^ 0x5555, i),
                    )?;
                    Ok((degree_histogram(&st), components(&st)))
                })
                .collect::<Result<_, Error>>()?;
            let rh: Vec<_> = realized.iter().map(|r| r.0.clone()).collect();
            let ph: Vec<_> = processed.iter().map(|r| r.0.clone()).collect();
            let rsizes: Vec<u64> = realized.iter().flat_map(|r| r.1.sizes.clone()).collect();
            let psizes: Vec<u64> = processed.iter().flat_map(|r| r.1.sizes.clone()).collect();
            let realize_degree_pmf = pooled_degree_pmf(&rh);
            let process_degree_pmf = pooled_degree_pmf(&ph);
            let body = EquivalenceBody {
                degree_tv: tv_distance(&realize_degree_pmf, &process_degree_pmf),
                component_size_tv: tv_distance(&size_pmf(&rsizes), &size_pmf(&psizes)),
                realize_degree_pmf,
                process_degree_pmf,
            };
            write_json(&args.out.join("equivalence.json"), &report(args.clone(), &body))?;
        }
        MasterMode::Components => {
            #[derive(Serialize)]
            struct SearchRow {
                v0: u64,
                verdict: String,
                edges: usize,
                rounds: u64,
                in_giant: bool,
            }
            #[derive(Serialize)]
            struct ComponentsBody {
                reveal_cap: u64,
                giant: u64,
                second: u64,
                isolated: u64,
                searches: Vec<SearchRow>,
            }
            let sigma = feasible_sigma(args.p, args.n, &seed_graph, args.seed)?;
            let mut mg = MasterGraph::new_with_omega(
                &sigma,
                &seed_graph,
                args.n,
                derive_seed(args.seed, 7),
                omega,
            )?;
            let mut searches = Vec::new();
            let nu_n = mg.nu_n();
            let one_n = mg.one_n();
            for s in 0..args.sweeps {
                let v0 = one_n + (derive_seed(args.seed, 100 + s) % (nu_n - one_n + 1));
                let r = mg.component_search(v0, reveal_cap, args.round_cap)?;
                searches.push((v0, r));
            }
            let st = mg.realize_full()?;
            let rep = components(&st);
            let mut uf = analysis::UnionFind::new(st.nu_t as usize + 1);
            for e in st.live_edges() {
                uf.union(st.fixed_endpoint(e), st.random_endpoint(e));
            }
            let rows = searches
                .into_iter()
                .map(|(v0, r)| SearchRow {
                    v0,
                    verdict: format!("{:?}", r.verdict),
                    edges: r.edges.len(),
                    rounds: r.rounds,
                    in_giant: uf.component_size(v0 as u32) as u64 == rep.giant,
                })
                .collect();
            let body = ComponentsBody {
                reveal_cap,
                giant: rep.giant,
                second: rep.second,
                isolated: rep.isolated,
                searches: rows,
            };
            write_json(&args.out.join("components.json"), &report(args.clone(), &body))?;
        }
        MasterMode::VertexDegree => {
            #[derive(Serialize)]
            struct VertexDegreeBody {
                vertex: u64,
                tau: f64,
                expose_pmf: Vec<f64>,
                realize_pmf: Vec<f64>,
                theory_pmf: Vec<f64>,
                tv_expose_realize: f64,
                tv_expose_theory: f64,
            }
            let v = args.vertex.unwrap_or(args.n / 2);
            let tau = params.vertex_age(args.n, v);
            let budget = 1_000_000usize;
            let halves: Vec<(usize, usize)> = (0..args.runs)
                .into_par_iter()
                .map(|i| {
                    let sigma = feasible_sigma(args.p, args.n, &seed_graph, derive_seed(args.seed, i))?;
                    let mut mg_a = MasterGraph::new_with_omega(
                        &sigma,
                        &seed_graph,
                        args.n,
                        derive_seed(args.seed ^ 0xE0, i),
                        omega,
                    )?;
                    let d_expose = mg_a.expose_degree(v, budget)?;
                    let mut mg_b = MasterGraph::new_with_omega(
                        &sigma,
                        &seed_graph,
                        args.n,
                        derive_seed(args.seed ^ 0xE1, i),
                        omega,
                    )?;
                    let st = mg_b.realize_full()?;
                    Ok((d_expose, st.vertex_degree(v as u32) as usize))
                })
                .collect::<Result<_, Error>>()?;
            let expose_samples: Vec<u64> = halves.iter().map(|h| h.0 as u64).collect();
            let realize_samples: Vec<u64> = halves.iter().map(|h| h.1 as u64).collect();
            let expose_pmf = empirical_pmf(&expose_samples);
            let realize_pmf = empirical_pmf(&realize_samples);
            let fns = TheoryFns::new(params.clone(), tau.ceil() as usize + 2);
            let q = fns.q_eval(tau)?;
            let pv = fns.p_eval(tau)?;
            let theory_pmf: Vec<f64> = (0..expose_pmf.len().max(realize_pmf.len()).max(50))
                .map(|k| gq_pmf(args.m, pv, q, k))
                .collect();
            let body = VertexDegreeBody {
                vertex: v,
                tau,
                tv_expose_realize: tv_distance(&expose_pmf, &realize_pmf),
                tv_expose_theory: tv_distance(&expose_pmf, &theory_pmf),
                expose_pmf,
                realize_pmf,
                theory_pmf,
            };
            write_json(&args.out.join("vertex_degree.json"), &report(args.clone(), &body))?;
        }
    }
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParam(_) | Error::Query(_) | Error::UndefinedAtCritical(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Theory(a) => cmd_theory(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Cmj(a) => cmd_cmj(a),
        Command::Master(a) => cmd_master(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
