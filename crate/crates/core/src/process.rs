//! On-line simulation of the graph sequence: with probability `p` a vertex
//! arrives with `m` edges whose endpoints are drawn proportional to degree
//! (with replacement, never onto the newcomer itself), and with probability
//! `1 - p` the oldest vertex still holding its original `m` out-edges loses
//! them.
//!
//! Edges carry integer ids: vertex `v` owns out-edge ids `m(v-1)+1 ..= mv`,
//! so the live edges of `G_t` are exactly the contiguous id window
//! `m(1_t - 1)+1 ..= m nu_t` and deletion is id arithmetic. Degree-
//! proportional choice is realized by a uniform draw from a dynamic array of
//! half-edge slots (two per live edge) with swap-remove deletion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stats::derive_seed;

/// Initial graph: vertices `1..=nu_h`, out-degree `m` for `v >= one_h` and 0
/// below, edges oriented to smaller ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedGraph {
    pub m: u32,
    pub one_h: u32,
    pub nu_h: u32,
    /// Random endpoints of edges `m(one_h - 1)+1 ..= m nu_h`, in id order.
    endpoints: Vec<u32>,
}

impl SeedGraph {
    /// Ladder seed graph: `1_H = m + 1`, `nu_H = 1_H + n_gap`, and vertex `v`
    /// sends its `m` edges to `v-1, ..., v-m`.
    pub fn ladder(m: u32, n_gap: u32) -> Result<SeedGraph> {
        if m < 1 || n_gap < 1 {
            return Err(Error::InvalidParam(
                "seed graph needs m >= 1 and gap >= 1".into(),
            ));
        }
        let one_h = m + 1;
        let nu_h = one_h + n_gap;
        let mut endpoints = Vec::with_capacity((m * (nu_h - one_h + 1)) as usize);
        for v in one_h..=nu_h {
            for i in 1..=m {
                endpoints.push(v - i);
            }
        }
        Ok(SeedGraph {
            m,
            one_h,
            nu_h,
            endpoints,
        })
    }

    /// Time label of the seed graph, keeping `1_t + nu_t = t`.
    pub fn t0(&self) -> u64 {
        self.one_h as u64 + self.nu_h as u64
    }

    /// Smallest edge id in play.
    pub fn edge_min(&self) -> u64 {
        self.m as u64 * (self.one_h as u64 - 1) + 1
    }

    /// Largest seed edge id.
    pub fn edge_max(&self) -> u64 {
        self.m as u64 * self.nu_h as u64
    }

    /// Random endpoint of seed edge `e`.
    pub fn endpoint(&self, e: u64) -> u32 {
        self.endpoints[(e - self.edge_min()) as usize]
    }

    /// Membership in the model class: out-degree `m` beyond `one_h`, edges
    /// pointing strictly down, `m < one_h <= nu_h`.
    pub fn is_valid(&self) -> bool {
        self.m >= 1
            && self.m < self.one_h
            && self.one_h <= self.nu_h
            && self.endpoints.len() == (self.m as u64 * (self.nu_h - self.one_h + 1) as u64) as usize
            && (self.one_h..=self.nu_h).all(|v| {
                (1..=self.m).all(|i| {
                    let e = self.m as u64 * (v as u64 - 1) + i as u64;
                    let w = self.endpoint(e);
                    w >= 1 && w < v
                })
            })
    }
}

/// The add/delete decision sequence driving one run, together with the seed
/// graph counts needed to reconstruct `nu_t` and `1_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma {
    pub bits: Vec<u8>,
    pub p: f64,
    pub t0: u64,
    pub nu_h: u32,
    pub one_h: u32,
}

impl Sigma {
    /// Bernoulli(p) decisions for times `t0+1 ..= n`, deterministic per seed.
    pub fn draw(p: f64, n: u64, seed_graph: &SeedGraph, seed: u64) -> Result<Sigma> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParam(format!("p = {p} outside (0, 1)")));
        }
        let t0 = seed_graph.t0();
        if n <= t0 {
            return Err(Error::InvalidParam(format!(
                "horizon n = {n} must exceed t0 = {t0}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = (0..(n - t0)).map(|_| u8::from(rng.gen_bool(p))).collect();
        Ok(Sigma {
            bits,
            p,
            t0,
            nu_h: seed_graph.nu_h,
            one_h: seed_graph.one_h,
        })
    }

    /// Time horizon `n` covered by this sequence.
    pub fn n(&self) -> u64 {
        self.t0 + self.bits.len() as u64
    }

    /// `(t, nu_t, 1_t)` for `t = t0 ..= n`.
    pub fn counts(&self) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        let mut nu = self.nu_h as u64;
        std::iter::once((self.t0, nu, self.t0 - nu)).chain(self.bits.iter().enumerate().map(
            move |(i, &b)| {
                let t = self.t0 + i as u64 + 1;
                nu += b as u64;
                (t, nu, t - nu)
            },
        ))
    }

    /// `nu_n` at the horizon.
    pub fn nu_n(&self) -> u64 {
        self.nu_h as u64 + self.bits.iter().map(|&b| b as u64).sum::<u64>()
    }

    /// Feasible iff `nu_t > 1_t` for every `t > t0`: the graph never runs
    /// out of intact vertices.
    pub fn is_feasible(&self) -> bool {
        self.counts().skip(1).all(|(_, nu, one)| nu > one)
    }

    /// `omega`-concentrated iff `|nu_t - p t| <= sqrt(t) ln t` for all
    /// `t >= n / omega`.
    pub fn is_concentrated(&self, omega: f64) -> Result<bool> {
        if !(omega > 1.0) {
            return Err(Error::InvalidParam("omega must exceed 1".into()));
        }
        let from = (self.n() as f64 / omega).floor() as u64;
        Ok(self.counts().all(|(t, nu, _)| {
            if t < from.max(2) {
                return true;
            }
            let tf = t as f64;
            (nu as f64 - self.p * tf).abs() <= tf.sqrt() * tf.ln()
        }))
    }
}

const NO_SLOT: u32 = u32::MAX;

/// Uniform sampler over half-edge slots (one per endpoint per live edge).
/// Insert, delete, and sample are O(1); slot ids are `2 (e - e_min) + side`.
#[derive(Debug, Clone)]
struct HalfEdgeSampler {
    entries: Vec<(u32, u64)>, // (vertex, slot id)
    pos: Vec<u32>,            // slot id -> index in entries
}

impl HalfEdgeSampler {
    fn new() -> Self {
        HalfEdgeSampler {
            entries: Vec::new(),
            pos: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn insert(&mut self, slot: u64, vertex: u32) {
        let slot_us = slot as usize;
        if self.pos.len() <= slot_us {
            self.pos.resize(slot_us + 1, NO_SLOT);
        }
        debug_assert_eq!(self.pos[slot_us], NO_SLOT);
        self.pos[slot_us] = self.entries.len() as u32;
        self.entries.push((vertex, slot));
    }

    fn remove(&mut self, slot: u64) {
        let idx = self.pos[slot as usize];
        debug_assert_ne!(idx, NO_SLOT);
        self.pos[slot as usize] = NO_SLOT;
        let last = self.entries.len() - 1;
        self.entries.swap_remove(idx as usize);
        if (idx as usize) < last {
            let moved_slot = self.entries[idx as usize].1;
            self.pos[moved_slot as usize] = idx;
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Option<u32> {
        if self.entries.is_empty() {
            return None;
        }
        let i = rng.gen_range(0..self.entries.len());
        Some(self.entries[i].0)
    }

    /// Exhaustive index/array consistency check; debug builds only.
    fn is_consistent(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(i, &(_, slot))| self.pos[slot as usize] == i as u32)
            && self
                .pos
                .iter()
                .enumerate()
                .filter(|&(_, &p)| p != NO_SLOT)
                .all(|(slot, &p)| self.entries[p as usize].1 == slot as u64)
    }
}

/// Final (or realized) state of a run.
#[derive(Debug, Clone)]
pub struct GraphState {
    pub m: u32,
    /// Time horizon of the run.
    pub n: u64,
    pub one_h: u32,
    pub nu_h: u32,
    pub one_t: u32,
    pub nu_t: u32,
    edge_min: u64,
    /// Random endpoint of every edge ever inserted, by id offset.
    rand_endpoint: Vec<u32>,
    sampler: HalfEdgeSampler,
    deg: Vec<u32>,
}

impl GraphState {
    fn slot(&self, e: u64, side: u8) -> u64 {
        2 * (e - self.edge_min) + (side as u64 - 1)
    }

    pub fn edge_min(&self) -> u64 {
        self.edge_min
    }

    /// Ids of the live edges: `m(1_t - 1)+1 ..= m nu_t`.
    pub fn live_edges(&self) -> std::ops::RangeInclusive<u64> {
        (self.m as u64 * (self.one_t as u64 - 1) + 1)..=(self.m as u64 * self.nu_t as u64)
    }

    pub fn live_edge_count(&self) -> u64 {
        self.m as u64 * (self.nu_t as u64 - self.one_t as u64 + 1)
    }

    /// Fixed endpoint of edge `e`.
    pub fn fixed_endpoint(&self, e: u64) -> u32 {
        e.div_ceil(self.m as u64) as u32
    }

    /// Random endpoint of edge `e` (must have been inserted).
    pub fn random_endpoint(&self, e: u64) -> u32 {
        self.rand_endpoint[(e - self.edge_min) as usize]
    }

    /// Degree of `v` in the live graph; 0 for departed or out-of-range ids.
    pub fn vertex_degree(&self, v: u32) -> u32 {
        self.deg.get(v as usize).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> &[u32] {
        &self.deg
    }

    /// Assemble a state directly from endpoint data (used by the off-line
    /// realization path). `rand_endpoint[i]` is the endpoint of edge
    /// `edge_min + i`; ids above the live window are ignored.
    pub fn assemble(
        m: u32,
        n: u64,
        one_h: u32,
        nu_h: u32,
        one_t: u32,
        nu_t: u32,
        edge_min: u64,
        rand_endpoint: Vec<u32>,
    ) -> GraphState {
        let mut st = GraphState {
            m,
            n,
            one_h,
            nu_h,
            one_t,
            nu_t,
            edge_min,
            rand_endpoint,
            sampler: HalfEdgeSampler::new(),
            deg: vec![0; nu_t as usize + 1],
        };
        for e in st.live_edges() {
            let v = st.fixed_endpoint(e);
            let w = st.random_endpoint(e);
            st.sampler.insert(st.slot(e, 2), v);
            st.sampler.insert(st.slot(e, 1), w);
            st.deg[v as usize] += 1;
            st.deg[w as usize] += 1;
        }
        st
    }

    /// Plain-text dump: header then one `id fixed random` line per live edge.
    pub fn dump(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(
            w,
            "paged v1 m={} one_t={} nu_t={}",
            self.m, self.one_t, self.nu_t
        )?;
        for e in self.live_edges() {
            writeln!(w, "{e} {} {}", self.fixed_endpoint(e), self.random_endpoint(e))?;
        }
        Ok(())
    }
}

/// Run the process over `sigma`, drawing endpoint choices from `seed`.
///
/// On an addition step the `m` random endpoints are independent uniform
/// draws from the half-edge slots of the previous state, so the new vertex
/// cannot be drawn (no self-loops) and parallel edges are possible. On a
/// deletion step the out-edges of the oldest intact vertex leave the
/// sampler; edges into it stay.
pub fn run_process(
    seed_graph: &SeedGraph,
    sigma: &Sigma,
    n: u64,
    seed: u64,
) -> Result<GraphState> {
    if !seed_graph.is_valid() {
        return Err(Error::InvalidParam("seed graph is not in the model class".into()));
    }
    if sigma.n() != n || sigma.t0 != seed_graph.t0() {
        return Err(Error::InvalidParam(format!(
            "sigma covers t0 = {}, n = {}, expected t0 = {}, n = {n}",
            sigma.t0,
            sigma.n(),
            seed_graph.t0()
        )));
    }
    let m = seed_graph.m;
    let nu_n_bound = seed_graph.nu_h as u64 + sigma.bits.len() as u64;
    let mut st = GraphState {
        m,
        n,
        one_h: seed_graph.one_h,
        nu_h: seed_graph.nu_h,
        one_t: seed_graph.one_h,
        nu_t: seed_graph.nu_h,
        edge_min: seed_graph.edge_min(),
        rand_endpoint: Vec::with_capacity((m as u64 * nu_n_bound) as usize),
        sampler: HalfEdgeSampler::new(),
        deg: vec![0; nu_n_bound as usize + 1],
    };
    for e in seed_graph.edge_min()..=seed_graph.edge_max() {
        let v = st.fixed_endpoint(e);
        let w = seed_graph.endpoint(e);
        st.rand_endpoint.push(w);
        st.sampler.insert(st.slot(e, 2), v);
        st.sampler.insert(st.slot(e, 1), w);
        st.deg[v as usize] += 1;
        st.deg[w as usize] += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks: Vec<u32> = Vec::with_capacity(m as usize);
    for (i, &bit) in sigma.bits.iter().enumerate() {
        let t = sigma.t0 + i as u64 + 1;
        if bit == 1 {
            // all m draws observe the pre-step state
            picks.clear();
            for _ in 0..m {
                match st.sampler.sample(&mut rng) {
                    Some(v) => picks.push(v),
                    None => return Err(Error::Depleted { t }),
                }
            }
            let v_new = st.nu_t + 1;
            st.nu_t = v_new;
            for (j, &w) in picks.iter().enumerate() {
                let e = m as u64 * (v_new as u64 - 1) + j as u64 + 1;
                debug_assert_eq!(st.rand_endpoint.len() as u64, e - st.edge_min);
                st.rand_endpoint.push(w);
                st.sampler.insert(st.slot(e, 2), v_new);
                st.sampler.insert(st.slot(e, 1), w);
                st.deg[v_new as usize] += 1;
                st.deg[w as usize] += 1;
            }
        } else {
            let w = st.one_t;
            if w as u64 > st.nu_t as u64 {
                return Err(Error::Depleted { t });
            }
            for iedge in 1..=m as u64 {
                let e = m as u64 * (w as u64 - 1) + iedge;
                let other = st.random_endpoint(e);
                st.sampler.remove(st.slot(e, 2));
                st.sampler.remove(st.slot(e, 1));
                st.deg[w as usize] -= 1;
                st.deg[other as usize] -= 1;
            }
            st.one_t += 1;
        }
        debug_assert!(
            i % 16_384 != 0 || {
                st.sampler.is_consistent()
                    && st.sampler.len() as u64 == 2 * st.live_edge_count()
            },
            "sampler integrity lost at t = {t}"
        );
    }
    debug_assert_eq!(st.sampler.len() as u64, 2 * st.live_edge_count());
    Ok(st)
}

/// What to do when a run depletes (or a drawn sigma is infeasible).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepletedPolicy {
    /// Redraw sigma from a derived seed, up to the given number of retries.
    /// This conditions the run on feasibility.
    Resample { retries: u32 },
    Abort,
}

impl Default for DepletedPolicy {
    fn default() -> Self {
        DepletedPolicy::Resample { retries: 100 }
    }
}

/// Draw a feasible sigma and run the process. Returns the state, the sigma
/// actually used and the number of attempts taken.
pub fn run_feasible(
    seed_graph: &SeedGraph,
    p: f64,
    n: u64,
    seed: u64,
    policy: DepletedPolicy,
) -> Result<(GraphState, Sigma, u32)> {
    let attempts_allowed = match policy {
        DepletedPolicy::Resample { retries } => retries.max(1),
        DepletedPolicy::Abort => 1,
    };
    for attempt in 0..attempts_allowed {
        let sigma = Sigma::draw(p, n, seed_graph, derive_seed(seed, attempt as u64))?;
        if !sigma.is_feasible() {
            if matches!(policy, DepletedPolicy::Abort) {
                return Err(Error::InfeasibleSigma);
            }
            continue;
        }
        let state = run_process(seed_graph, &sigma, n, derive_seed(seed, u64::MAX - attempt as u64))?;
        return Ok((state, sigma, attempt + 1));
    }
    Err(Error::Run(format!(
        "no feasible sigma found in {attempts_allowed} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_state() -> GraphState {
        let sg = SeedGraph::ladder(2, 3).unwrap();
        let sigma = Sigma::draw(0.75, 200, &sg, 5).unwrap();
        run_process(&sg, &sigma, 200, 6).unwrap()
    }

    #[test]
    fn ladder_examples() {
        let sg = SeedGraph::ladder(1, 1).unwrap();
        assert_eq!(sg.one_h, 2);
        assert_eq!(sg.nu_h, 3);
        assert_eq!((sg.nu_h - sg.one_h + 1) * sg.m, 2); // 2 edges total
        assert!(sg.is_valid());
        for m in 1..=4 {
            for gap in 1..=5 {
                assert!(SeedGraph::ladder(m, gap).unwrap().is_valid());
            }
        }
        assert!(SeedGraph::ladder(0, 1).is_err());
    }

    #[test]
    fn sigma_identities() {
        let sg = SeedGraph::ladder(2, 4).unwrap();
        let sigma = Sigma::draw(0.7, 5000, &sg, 9).unwrap();
        for (t, nu, one) in sigma.counts() {
            assert_eq!(nu + one, t);
        }
        // empirical mean within 3 binomial standard errors
        let n_bits = sigma.bits.len() as f64;
        let mean = sigma.bits.iter().map(|&b| b as f64).sum::<f64>() / n_bits;
        let se = (0.7 * 0.3 / n_bits).sqrt();
        assert!((mean - 0.7).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn feasibility_edges() {
        let sg = SeedGraph::ladder(1, 2).unwrap();
        let mut sigma = Sigma::draw(0.9, 40, &sg, 3).unwrap();
        sigma.bits.iter_mut().for_each(|b| *b = 1);
        assert!(sigma.is_feasible());
        sigma.bits.iter_mut().for_each(|b| *b = 0);
        assert!(!sigma.is_feasible());
    }

    #[test]
    fn concentration_flags_adversarial_runs() {
        let sg = SeedGraph::ladder(1, 2).unwrap();
        let mut sigma = Sigma::draw(0.75, 4000, &sg, 3).unwrap();
        assert!(sigma.is_concentrated(10.0).unwrap());
        // a long all-delete run in the tail wrecks concentration
        let len = sigma.bits.len();
        sigma.bits[len / 2..].iter_mut().for_each(|b| *b = 0);
        assert!(!sigma.is_concentrated(10.0).unwrap());
        assert!(sigma.is_concentrated(0.5).is_err());
    }

    #[test]
    fn live_window_and_handshake_hold() {
        let st = small_state();
        assert_eq!(st.sampler.len() as u64, 2 * st.live_edge_count());
        let degree_sum: u64 = st.degrees().iter().map(|&d| d as u64).sum();
        assert_eq!(degree_sum, 2 * st.live_edge_count());
        // vertices below one_h never gain out-edges: their slots only appear
        // as random endpoints
        for e in st.live_edges() {
            assert!(st.fixed_endpoint(e) >= st.one_h);
            assert!(st.random_endpoint(e) < st.fixed_endpoint(e));
        }
    }

    #[test]
    fn last_added_vertex_keeps_out_edges() {
        let sg = SeedGraph::ladder(2, 3).unwrap();
        let mut sigma = Sigma::draw(0.75, 150, &sg, 5).unwrap();
        let last = sigma.bits.len() - 1;
        sigma.bits[last] = 1;
        let st = run_process(&sg, &sigma, 150, 6).unwrap();
        assert!(st.vertex_degree(st.nu_t) >= st.m);
    }

    #[test]
    fn deterministic_given_seed() {
        let sg = SeedGraph::ladder(2, 3).unwrap();
        let sigma = Sigma::draw(0.7, 300, &sg, 5).unwrap();
        let a = run_process(&sg, &sigma, 300, 11).unwrap();
        let b = run_process(&sg, &sigma, 300, 11).unwrap();
        assert_eq!(a.rand_endpoint, b.rand_endpoint);
        assert_eq!(a.one_t, b.one_t);
    }

    #[test]
    fn depletion_reported_with_time() {
        let sg = SeedGraph::ladder(1, 1).unwrap();
        let mut sigma = Sigma::draw(0.6, 30, &sg, 3).unwrap();
        sigma.bits.iter_mut().for_each(|b| *b = 0);
        match run_process(&sg, &sigma, 30, 1) {
            Err(Error::Depleted { t }) => assert!(t > sg.t0()),
            other => panic!("expected depletion, got {other:?}"),
        }
    }

    #[test]
    fn infeasibility_rate_decays_with_seed_size() {
        // Lemma-style check: P(infeasible) = O(c^N).
        let p = 0.7;
        let runs = 2000u64;
        let mut rates = Vec::new();
        for gap in [2u32, 4, 8, 16] {
            let sg = SeedGraph::ladder(1, gap).unwrap();
            let bad = (0..runs)
                .filter(|&s| !Sigma::draw(p, 3000, &sg, derive_seed(77, s)).unwrap().is_feasible())
                .count();
            rates.push(bad as f64 / runs as f64);
        }
        assert!(rates[0] > rates[3], "rates {rates:?} not decaying");
        assert!(rates[3] < 0.02, "gap 16 still infeasible often: {rates:?}");
    }

    #[test]
    fn degree_proportional_choice_frequencies() {
        // Freeze a small graph, then repeatedly look at the first draw of
        // the next step: frequencies must match d(v) / 2 e(G).
        let sg = SeedGraph::ladder(2, 4).unwrap();
        let sigma = Sigma::draw(0.75, 60, &sg, 21).unwrap();
        let st = run_process(&sg, &sigma, 60, 2).unwrap();
        let live2 = st.sampler.len() as f64;
        let runs = 200_000;
        let mut counts = vec![0u64; st.nu_t as usize + 1];
        for s in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(901, s));
            let v = st.sampler.sample(&mut rng).unwrap();
            counts[v as usize] += 1;
        }
        for v in 1..=st.nu_t {
            let want = st.vertex_degree(v) as f64 / live2;
            let got = counts[v as usize] as f64 / runs as f64;
            let se = (want * (1.0 - want) / runs as f64).sqrt();
            assert!(
                (got - want).abs() <= 3.5 * se + 1e-9,
                "v = {v}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn run_feasible_resamples() {
        let sg = SeedGraph::ladder(2, 1).unwrap();
        let (st, sigma, attempts) =
            run_feasible(&sg, 0.7, 500, 17, DepletedPolicy::default()).unwrap();
        assert!(sigma.is_feasible());
        assert!(attempts >= 1);
        assert_eq!(st.n, 500);
    }
}
