//! Observables of a finished run — degree histograms, component structure,
//! tail fits — and the Monte Carlo experiment that pits a fixed vertex's
//! degree against the limiting law.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::process::{run_feasible, DepletedPolicy, GraphState, SeedGraph};
use crate::stats::{self, derive_seed, ols_slope};
use crate::theory::{gq_pmf, DegreeLaw, ModelParams, TheoryFns};

/// Seed-graph gap used by experiment drivers when none is configured;
/// infeasibility is negligible at this depth for any p above one half.
pub const DEFAULT_SEED_GAP: u32 = 32;

/// Degree tally over the vertex universe `1 ..= nu_n`; departed vertices
/// count at degree zero.
#[derive(Debug, Clone)]
pub struct DegreeHistogram {
    pub counts: Vec<u64>,
    /// Time horizon used for densities (`counts[k] / n`).
    pub n: u64,
    /// Number of vertices tallied (`nu_n`).
    pub vertex_count: u64,
}

impl DegreeHistogram {
    pub fn mass(&self, k: usize) -> f64 {
        self.counts.get(k).copied().unwrap_or(0) as f64 / self.n as f64
    }

    /// `(k, counts[k] / n)` pairs.
    pub fn masses(&self) -> Vec<(u32, f64)> {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (k as u32, c as f64 / self.n as f64))
            .collect()
    }

    /// Degree-zero tally restricted to the final vertex window, next to the
    /// all-vertices tally (both readings are of interest for the isolated
    /// count).
    pub fn merge(&mut self, other: &DegreeHistogram) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (k, &c) in other.counts.iter().enumerate() {
            self.counts[k] += c;
        }
        self.n += other.n;
        self.vertex_count += other.vertex_count;
    }
}

pub fn degree_histogram(state: &GraphState) -> DegreeHistogram {
    let mut counts = Vec::new();
    for v in 1..=state.nu_t {
        let d = state.vertex_degree(v) as usize;
        if counts.len() <= d {
            counts.resize(d + 1, 0);
        }
        counts[d] += 1;
    }
    DegreeHistogram {
        counts,
        n: state.n,
        vertex_count: state.nu_t as u64,
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    pub fn component_size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }
}

/// Component structure of the live graph.
#[derive(Debug, Clone)]
pub struct ComponentReport {
    /// Vertex counts of all components among non-isolated vertices,
    /// descending.
    pub sizes: Vec<u64>,
    pub giant: u64,
    pub second: u64,
    /// Number of degree-zero vertices in `1 ..= nu_n`.
    pub isolated: u64,
}

pub fn components(state: &GraphState) -> ComponentReport {
    let n_vertices = state.nu_t as usize + 1;
    let mut uf = UnionFind::new(n_vertices);
    for e in state.live_edges() {
        uf.union(state.fixed_endpoint(e), state.random_endpoint(e));
    }
    let mut count_by_root = std::collections::HashMap::new();
    let mut isolated = 0u64;
    for v in 1..=state.nu_t {
        if state.vertex_degree(v) == 0 {
            isolated += 1;
        } else {
            *count_by_root.entry(uf.find(v)).or_insert(0u64) += 1;
        }
    }
    let mut sizes: Vec<u64> = count_by_root.into_values().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ComponentReport {
        giant: sizes.first().copied().unwrap_or(0),
        second: sizes.get(1).copied().unwrap_or(0),
        isolated,
        sizes,
    }
}

/// Per-degree comparison of an empirical histogram against the limiting
/// sequence.
#[derive(Debug, Clone)]
pub struct KError {
    pub k: usize,
    pub empirical: f64,
    pub theory: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone)]
pub struct HistogramComparison {
    pub per_k: Vec<KError>,
    /// Truncated total-variation distance over the compared range.
    pub tv: f64,
}

pub fn compare_histogram(
    h: &DegreeHistogram,
    law: &DegreeLaw<f64>,
    k_lo: usize,
    k_hi: usize,
) -> Result<HistogramComparison> {
    if h.n == 0 {
        return Err(Error::InvalidParam("empty histogram (n = 0)".into()));
    }
    if k_hi > law.k_max {
        return Err(Error::InvalidParam(format!(
            "k_hi = {k_hi} beyond the computed law (k_max = {})",
            law.k_max
        )));
    }
    let mut per_k = Vec::new();
    let mut tv = 0.0;
    for k in k_lo..=k_hi {
        let emp = h.mass(k);
        let th = law.x[k];
        tv += (emp - th).abs();
        per_k.push(KError {
            k,
            empirical: emp,
            theory: th,
            rel_err: if th > 0.0 { (emp - th).abs() / th } else { f64::NAN },
        });
    }
    Ok(HistogramComparison {
        per_k,
        tv: tv / 2.0,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
}

fn fit_tail(
    masses: &[(u32, f64)],
    k_lo: u32,
    k_hi: u32,
    xform: impl Fn(f64) -> f64,
) -> Result<TailFit> {
    if k_lo < 1 || k_hi <= k_lo {
        return Err(Error::Fit(format!("bad fit range [{k_lo}, {k_hi}]")));
    }
    let pts: Vec<(f64, f64)> = masses
        .iter()
        .filter(|(k, mass)| *k >= k_lo && *k <= k_hi && *mass > 0.0)
        .map(|&(k, mass)| (xform(k as f64), mass.ln()))
        .collect();
    match ols_slope(&pts) {
        Some((slope, stderr)) => Ok(TailFit {
            slope,
            stderr,
            points: pts.len(),
        }),
        None => Err(Error::Fit(format!(
            "no positive masses in [{k_lo}, {k_hi}]"
        ))),
    }
}

/// Least-squares slope of `ln(mass)` against `ln(k)`: the power-law exponent
/// of the tail.
pub fn fit_power_tail(masses: &[(u32, f64)], k_lo: u32, k_hi: u32) -> Result<TailFit> {
    fit_tail(masses, k_lo, k_hi, |k| k.ln())
}

/// Least-squares slope of `ln(mass)` against `k`: the log-rate of an
/// exponential tail.
pub fn fit_exponential_tail(masses: &[(u32, f64)], k_lo: u32, k_hi: u32) -> Result<TailFit> {
    fit_tail(masses, k_lo, k_hi, |k| k)
}

/// Result of the per-vertex degree experiment.
#[derive(Debug, Clone)]
pub struct VertexDegreeExperiment {
    pub tau: f64,
    pub empirical: Vec<f64>,
    pub theory: Vec<f64>,
    pub tv: f64,
    pub runs: u64,
}

/// How far `tau` must stay from the boundary ages 0 and 1, where the
/// limiting law has correction windows that the experiments do not model.
pub const TAU_EXCLUSION: f64 = 0.02;

/// Run `runs` independent feasible processes and tally the degree of vertex
/// `v` at the horizon, against the m-fold zero-inflated geometric at age
/// `tau = log_gamma(p n / v)`.
pub fn vertex_degree_experiment(
    params: &ModelParams<f64>,
    n: u64,
    v: u32,
    runs: u64,
    seed: u64,
) -> Result<VertexDegreeExperiment> {
    let omega = (n as f64).ln().ln().max(1.05);
    if (v as f64) < n as f64 / omega {
        return Err(Error::InvalidParam(format!(
            "vertex {v} is older than the n/omega cutoff ({})",
            n as f64 / omega
        )));
    }
    let tau = params.vertex_age(n, v as u64);
    if tau.min((tau - 1.0).abs()) < TAU_EXCLUSION || tau < 0.0 {
        return Err(Error::InvalidParam(format!(
            "tau = {tau} inside the excluded boundary windows"
        )));
    }
    let seed_graph = SeedGraph::ladder(params.m, DEFAULT_SEED_GAP)?;
    let samples: Vec<u64> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let (state, _, _) = run_feasible(
                &seed_graph,
                params.p,
                n,
                derive_seed(seed, i),
                DepletedPolicy::default(),
            )?;
            Ok(state.vertex_degree(v) as u64)
        })
        .collect::<Result<_>>()?;
    let empirical = stats::empirical_pmf(&samples);
    let fns = TheoryFns::new(params.clone(), tau.ceil() as usize + 2);
    let q = fns.q_eval(tau)?;
    let pv = fns.p_eval(tau)?;
    let kmax = empirical.len().max(60);
    let theory: Vec<f64> = (0..kmax).map(|k| gq_pmf(params.m, pv, q, k)).collect();
    let tv = stats::tv_distance(&empirical, &theory);
    Ok(VertexDegreeExperiment {
        tau,
        empirical,
        theory,
        tv,
        runs,
    })
}
