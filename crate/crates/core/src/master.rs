//! The off-line master graph: a coupling of the whole graph process under a
//! fixed decision sequence, generated lazily.
//!
//! Under a fixed feasible sigma the edge ids present at every time step are
//! known, so each edge `e` added after the seed graph can be given its
//! candidate window `E_e = {m(1_{t-1} - 1) + 1, ..., m nu_{t-1}}` (`t` its
//! insertion time) without revealing any randomness. The edge's actual
//! choice `phi(e)` is a uniform half-edge `(f, j)` over `E_e x {1, 2}`,
//! revealed on demand through two primitives:
//!
//! * `assign(e)` draws `phi(e)` from the candidates not yet excluded,
//! * `reveal(f, j)` decides for every still-free edge whether it chose
//!   `(f, j)`, adding the pair to the revealed set `R`.
//!
//! Everything else — endpoint resolution, the expose tree used for degree
//! reconstruction, the component search, and full realization — is a
//! sequence of those two moves, so any interleaving generates the same joint
//! law of `(phi(e))_e`, a product of uniforms.
//!
//! The component search shields its frontier edges from reveal queries, so a
//! shielded edge keeps the pairs revealed during its shielded period in its
//! candidate set. Reveals are therefore stamped with a sequence number and a
//! shielded edge records the count at shield time; assigning it later draws
//! uniformly from the pairs that are unrevealed or revealed after the stamp.
//! An unshielded free edge always rejects queries one at a time, so its last
//! candidate pair cannot be revealed away, and assignment cannot fail.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::process::{GraphState, SeedGraph, Sigma};

/// One endpoint slot of an edge: side 2 is the fixed endpoint
/// `ceil(e / m)`, side 1 the random endpoint `v(e)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfEdge {
    pub edge: u64,
    pub side: u8,
}

impl HalfEdge {
    pub fn new(edge: u64, side: u8) -> Self {
        debug_assert!(side == 1 || side == 2);
        HalfEdge { edge, side }
    }
}

/// Tree label in the expose algorithm; the root is `[0]`, children append
/// their arrival ordinal.
pub type Label = Vec<u32>;

/// Outcome of exposing a half-edge.
#[derive(Debug, Clone)]
pub struct ExposeResult {
    /// `(label, edge)` pairs in the order the tree was grown.
    pub tree: Vec<(Label, u64)>,
    /// Number of tree edges that are in the final graph (the root included
    /// when it is).
    pub en_count: usize,
    pub capped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The frontier emptied: the collected edge set is the whole component.
    Small,
    /// The reveal budget over current edges was exhausted first.
    Large,
    /// The round cap stopped the search (diagnostic).
    Capped,
}

#[derive(Debug, Clone)]
pub struct ComponentResult {
    /// Live edges found to share the component, ascending.
    pub edges: Vec<u64>,
    pub verdict: Verdict,
    pub rounds: u64,
}

const FREE: u64 = 0;

fn pack(h: HalfEdge) -> u64 {
    (h.edge << 1) | (h.side as u64 - 1)
}

fn unpack(p: u64) -> HalfEdge {
    HalfEdge {
        edge: p >> 1,
        side: (p & 1) as u8 + 1,
    }
}

/// Default age cutoff parameter `omega = ln ln n`, clamped above 1.
pub fn default_omega(n: u64) -> f64 {
    ((n as f64).ln().ln()).max(1.05)
}

/// Reveal budget over current edges at which a component is declared large:
/// `n^{1/2 + epsilon} log_gamma^3 n`.
pub fn default_reveal_cap(gamma: f64, n: u64, epsilon: f64) -> u64 {
    let lg = (n as f64).ln() / gamma.ln();
    ((n as f64).powf(0.5 + epsilon) * lg * lg * lg).ceil() as u64
}

struct RevealOutcome {
    adopters: Vec<u64>,
    /// Free sibling edges of live adopters, shielded on the spot
    /// (search mode only).
    newly_shielded: Vec<u64>,
}

pub struct MasterGraph {
    m: u64,
    n: u64,
    nu_h: u64,
    nu_n: u64,
    one_n: u64,
    seed_graph: SeedGraph,
    edge_min: u64,
    /// For vertex `nu_h + 1 + i`: the oldest intact vertex just before it
    /// arrived (determines the candidate window). Nondecreasing.
    w: Vec<u32>,
    /// Packed `phi` per choosable edge (`0` = still free).
    phi: Vec<u64>,
    /// Reveal sequence number per half-edge slot (0 = unrevealed).
    revealed_stamp: Vec<u32>,
    revealed_fen: Fenwick,
    /// Free edges whose queries are deferred: shield-time reveal count.
    shield_stamp: HashMap<u64, u32>,
    rng: ChaCha8Rng,
    assigned_count: usize,
    revealed_count: u32,
    /// Edge-id cutoff for the "current" edge set used by the component
    /// search budget; edges strictly above are current.
    ec_cutoff: u64,
    revealed_ec_edges: u64,
}

impl MasterGraph {
    /// Build the untouched master graph: nothing assigned, nothing revealed.
    /// The current-edge cutoff uses the default age rule `omega = ln ln n`.
    pub fn new(sigma: &Sigma, seed_graph: &SeedGraph, n: u64, seed: u64) -> Result<MasterGraph> {
        Self::new_with_omega(sigma, seed_graph, n, seed, default_omega(n))
    }

    /// [`MasterGraph::new`] with an explicit `omega` for the current-edge
    /// cutoff (`E_c` holds the edges above `m n / omega`).
    pub fn new_with_omega(
        sigma: &Sigma,
        seed_graph: &SeedGraph,
        n: u64,
        seed: u64,
        omega: f64,
    ) -> Result<MasterGraph> {
        if !(omega > 1.0) {
            return Err(Error::InvalidParam("omega must exceed 1".into()));
        }
        if !seed_graph.is_valid() {
            return Err(Error::InvalidParam(
                "seed graph is not in the model class".into(),
            ));
        }
        if sigma.t0 != seed_graph.t0() || sigma.n() != n {
            return Err(Error::InvalidParam(format!(
                "sigma covers t0 = {}, n = {}, expected t0 = {}, n = {n}",
                sigma.t0,
                sigma.n(),
                seed_graph.t0()
            )));
        }
        if !sigma.is_feasible() {
            return Err(Error::InfeasibleSigma);
        }
        let m = seed_graph.m as u64;
        let mut w = Vec::new();
        let mut prev_one = seed_graph.t0() - seed_graph.nu_h as u64;
        let mut nu_n = seed_graph.nu_h as u64;
        let mut one_n = prev_one;
        for (_, nu, one) in sigma.counts().skip(1) {
            if nu > nu_n {
                w.push(prev_one as u32);
                nu_n = nu;
            }
            prev_one = one;
            one_n = one;
        }
        let edge_min = seed_graph.edge_min();
        let slots = 2 * (m * nu_n - edge_min + 1) as usize;
        let ec_cutoff = ((m * n) as f64 / omega).floor() as u64;
        Ok(MasterGraph {
            m,
            n,
            nu_h: seed_graph.nu_h as u64,
            nu_n,
            one_n,
            seed_graph: seed_graph.clone(),
            edge_min,
            w,
            phi: vec![FREE; (m * (nu_n - seed_graph.nu_h as u64)) as usize],
            revealed_stamp: vec![0; slots],
            revealed_fen: Fenwick::new(slots),
            shield_stamp: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            assigned_count: 0,
            revealed_count: 0,
            ec_cutoff,
            revealed_ec_edges: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn nu_n(&self) -> u64 {
        self.nu_n
    }

    pub fn one_n(&self) -> u64 {
        self.one_n
    }

    pub fn seed_graph(&self) -> &SeedGraph {
        &self.seed_graph
    }

    pub fn assigned_count(&self) -> usize {
        self.assigned_count
    }

    pub fn revealed_count(&self) -> usize {
        self.revealed_count as usize
    }

    /// Largest edge id in the master graph.
    pub fn edge_max(&self) -> u64 {
        self.m * self.nu_n
    }

    /// Largest seed edge id; everything above is choosable.
    pub fn seed_edge_max(&self) -> u64 {
        self.m * self.nu_h
    }

    pub fn fixed_endpoint(&self, e: u64) -> u64 {
        e.div_ceil(self.m)
    }

    /// Edge ids of the final graph: those of vertices `one_n ..= nu_n`.
    pub fn en_range(&self) -> std::ops::RangeInclusive<u64> {
        (self.m * (self.one_n - 1) + 1)..=self.edge_max()
    }

    pub fn in_en(&self, e: u64) -> bool {
        self.en_range().contains(&e)
    }

    pub fn in_vn(&self, v: u64) -> bool {
        (self.one_n..=self.nu_n).contains(&v)
    }

    /// Out-edge bundle of vertex `v >= one_h`.
    pub fn bundle(&self, v: u64) -> std::ops::RangeInclusive<u64> {
        (self.m * (v - 1) + 1)..=(self.m * v)
    }

    fn slot(&self, h: HalfEdge) -> usize {
        (2 * (h.edge - self.edge_min) + (h.side as u64 - 1)) as usize
    }

    pub fn is_revealed(&self, h: HalfEdge) -> bool {
        self.revealed_stamp[self.slot(h)] != 0
    }

    fn mark_revealed(&mut self, h: HalfEdge) {
        let s = self.slot(h);
        debug_assert_eq!(self.revealed_stamp[s], 0);
        self.revealed_count += 1;
        self.revealed_stamp[s] = self.revealed_count;
        self.revealed_fen.add(s, 1);
        if h.edge > self.ec_cutoff {
            let other = HalfEdge::new(h.edge, 3 - h.side);
            if !self.is_revealed(other) {
                self.revealed_ec_edges += 1;
            }
        }
    }

    fn phi_of(&self, e: u64) -> Option<HalfEdge> {
        if e <= self.seed_edge_max() {
            return None;
        }
        let p = self.phi[(e - self.seed_edge_max() - 1) as usize];
        (p != FREE).then(|| unpack(p))
    }

    pub fn is_assigned(&self, e: u64) -> bool {
        self.phi_of(e).is_some()
    }

    /// The choice of `e`, if it has been made.
    pub fn choice_of(&self, e: u64) -> Option<HalfEdge> {
        self.phi_of(e)
    }

    pub fn is_shielded(&self, e: u64) -> bool {
        self.shield_stamp.contains_key(&e)
    }

    fn set_phi(&mut self, e: u64, h: HalfEdge) {
        let idx = (e - self.seed_edge_max() - 1) as usize;
        debug_assert_eq!(self.phi[idx], FREE);
        self.phi[idx] = pack(h);
        self.assigned_count += 1;
        self.shield_stamp.remove(&e);
    }

    /// Oldest intact vertex when `v` arrived.
    fn w_of(&self, v: u64) -> u64 {
        self.w[(v - self.nu_h - 1) as usize] as u64
    }

    /// Candidate window of the edges of vertex `v`, as an edge-id range.
    pub fn window_of_vertex(&self, v: u64) -> std::ops::RangeInclusive<u64> {
        let lo = self.m * (self.w_of(v) - 1) + 1;
        let hi = self.m * (v - 1);
        lo..=hi
    }

    /// Largest vertex whose window contains edges of vertex `u` (a prefix
    /// property since `w` is nondecreasing).
    fn vmax_choosing(&self, u: u64) -> u64 {
        let idx = self.w.partition_point(|&x| (x as u64) <= u);
        self.nu_h + idx as u64
    }

    fn check_choosable(&self, e: u64) -> Result<()> {
        if e <= self.seed_edge_max() || e > self.edge_max() {
            return Err(Error::Query(format!(
                "edge {e} is not a choosable edge of the master graph"
            )));
        }
        Ok(())
    }

    fn revealed_in_window(&self, v: u64) -> u64 {
        let win = self.window_of_vertex(v);
        let lo = self.slot(HalfEdge::new(*win.start(), 1));
        let hi = self.slot(HalfEdge::new(*win.end(), 2)) + 1;
        self.revealed_fen.range(lo, hi) as u64
    }

    /// Size of the remaining candidate set of a free, unshielded edge:
    /// `2 |E_e| - |R inside the window|`.
    pub fn omega_size(&self, e: u64) -> Result<u64> {
        self.check_choosable(e)?;
        if self.is_assigned(e) {
            return Err(Error::Query(format!("edge {e} is already assigned")));
        }
        let v = self.fixed_endpoint(e);
        let total = 2 * self.m * (v - self.w_of(v));
        Ok(total - self.revealed_in_window(v))
    }

    /// Fix the choice of a free edge, uniform over the candidates its
    /// history has not excluded: pairs unrevealed, or revealed while the
    /// edge was shielded from queries.
    pub fn assign(&mut self, e: u64) -> Result<HalfEdge> {
        self.check_choosable(e)?;
        if self.is_assigned(e) {
            return Err(Error::Query(format!("edge {e} is already assigned")));
        }
        let v = self.fixed_endpoint(e);
        let win = self.window_of_vertex(v);
        let total = 2 * self.m * (v - self.w_of(v));
        // pairs revealed at or before the stamp are excluded; for an edge
        // that was never shielded that is every revealed pair
        let stamp = self.shield_stamp.get(&e).copied().unwrap_or(u32::MAX);
        let acceptable = |mg: &Self, h: HalfEdge| -> bool {
            let s = mg.revealed_stamp[mg.slot(h)];
            s == 0 || s > stamp
        };
        let excluded_bound = self.revealed_in_window(v).min(total);
        let choice = if excluded_bound * 2 > total {
            // heavy exclusion: enumerate acceptable pairs exactly
            let mut pool = Vec::new();
            for f in win.clone() {
                for side in [1u8, 2u8] {
                    let h = HalfEdge::new(f, side);
                    if acceptable(self, h) {
                        pool.push(h);
                    }
                }
            }
            if pool.is_empty() {
                return Err(Error::AssignImpossible { edge: e });
            }
            pool[self.rng.gen_range(0..pool.len())]
        } else {
            loop {
                let idx = self.rng.gen_range(0..total);
                let h = HalfEdge::new(win.start() + idx / 2, (idx % 2) as u8 + 1);
                if acceptable(self, h) {
                    break h;
                }
            }
        };
        self.set_phi(e, choice);
        Ok(choice)
    }

    /// Reveal `(f, j)`: every free unshielded edge whose window contains `f`
    /// decides independently, with probability one over its current
    /// candidate count, whether its choice is exactly this half-edge.
    /// Returns the adopters in increasing id order; they are assigned to
    /// `h`.
    pub fn reveal(&mut self, h: HalfEdge) -> Result<Vec<u64>> {
        Ok(self.reveal_core(h, false)?.adopters)
    }

    fn reveal_core(&mut self, h: HalfEdge, shield_live_siblings: bool) -> Result<RevealOutcome> {
        if h.side != 1 && h.side != 2 {
            return Err(Error::Query(format!("bad half-edge side {}", h.side)));
        }
        if h.edge < self.edge_min || h.edge > self.edge_max() {
            return Err(Error::Query(format!("half-edge {} out of range", h.edge)));
        }
        if self.is_revealed(h) {
            return Err(Error::Protocol(format!(
                "half-edge ({}, {}) already revealed",
                h.edge, h.side
            )));
        }
        let u = self.fixed_endpoint(h.edge);
        let v_lo = (u + 1).max(self.nu_h + 1);
        let v_hi = self.vmax_choosing(u);
        let mut out = RevealOutcome {
            adopters: Vec::new(),
            newly_shielded: Vec::new(),
        };
        let mut v_block = v_lo;
        while v_block <= v_hi {
            let v_end = (v_block + (v_block / 2).max(63)).min(v_hi);
            self.reveal_block(h, v_block, v_end, shield_live_siblings, &mut out);
            v_block = v_end + 1;
        }
        self.mark_revealed(h);
        Ok(out)
    }

    /// Process candidate edges of vertices `v_block ..= v_end`. Bernoulli
    /// trials are independent per edge, so candidates can be visited by
    /// geometric jumps under an upper bound on the per-edge probability and
    /// thinned back down to the exact one.
    fn reveal_block(
        &mut self,
        h: HalfEdge,
        v_block: u64,
        v_end: u64,
        shield_live_siblings: bool,
        out: &mut RevealOutcome,
    ) {
        let e_lo = self.m * (v_block - 1) + 1;
        let e_hi = self.m * v_end;
        // lower bound over the block of each edge's candidate count
        let min_total = 2 * self.m * v_block.saturating_sub(self.w_of(v_end));
        let wide_lo = self.slot(HalfEdge::new(self.m * (self.w_of(v_block) - 1) + 1, 1));
        let wide_hi = self.slot(HalfEdge::new(self.m * (v_end - 1), 2)) + 1;
        let wide_revealed = self.revealed_fen.range(wide_lo, wide_hi) as u64;
        let omega_lb = min_total.saturating_sub(wide_revealed);

        if omega_lb < 1024 {
            for e in e_lo..=e_hi {
                if self.is_assigned(e) || self.is_shielded(e) {
                    continue;
                }
                let omega = self.omega_size(e).expect("free edge in range");
                if omega > 0 && self.rng.gen_range(0..omega) == 0 {
                    self.adopt(e, h, true, shield_live_siblings, out);
                }
            }
        } else {
            let p_ub = 1.0 / omega_lb as f64;
            let ln_fail = (-p_ub).ln_1p();
            let mut pos = e_lo;
            loop {
                let u01: f64 = self.rng.gen();
                let jump = ((1.0 - u01).ln() / ln_fail).floor() as u64;
                pos = pos.saturating_add(jump);
                if pos > e_hi {
                    break;
                }
                let accept_draw: f64 = self.rng.gen();
                if !self.is_assigned(pos) && !self.is_shielded(pos) {
                    let omega = self.omega_size(pos).expect("free edge in range");
                    // thinned geometric hit: accept with (1/omega)/(1/omega_lb)
                    if omega > 0 && accept_draw * (omega as f64) < omega_lb as f64 {
                        self.adopt(pos, h, true, shield_live_siblings, out);
                    }
                }
                pos += 1;
            }
        }
    }

    fn adopt(
        &mut self,
        e: u64,
        h: HalfEdge,
        queried_before_siblings: bool,
        shield_live_siblings: bool,
        out: &mut RevealOutcome,
    ) {
        let _ = queried_before_siblings;
        self.set_phi(e, h);
        out.adopters.push(e);
        if shield_live_siblings && self.in_en(e) {
            let v = self.fixed_endpoint(e);
            for f in self.bundle(v) {
                if f != e && !self.is_assigned(f) && !self.is_shielded(f) {
                    // Siblings are above the candidate range of the reveal
                    // in progress (their windows end below their own
                    // bundle), except siblings below the cursor which were
                    // already queried and rejected this very pair. In both
                    // cases the in-flight pair is excluded for them iff they
                    // were queried, which the stamp ordering encodes: the
                    // pair will carry stamp revealed_count + 1.
                    let queried_already = f < e;
                    let stamp = if queried_already {
                        self.revealed_count + 1
                    } else {
                        self.revealed_count
                    };
                    self.shield_stamp.insert(f, stamp);
                    out.newly_shielded.push(f);
                }
            }
        }
    }

    /// Shield a free edge outside any reveal: all pairs revealed so far were
    /// rejected by it, later ones stay available to it.
    fn shield_at_rest(&mut self, e: u64) {
        self.shield_stamp.entry(e).or_insert(self.revealed_count);
    }

    /// Random endpoint of `e`, assigning on demand along the choice chain:
    /// follow side-1 links downward until a side-2 choice or a seed edge.
    pub fn resolve_endpoint(&mut self, e: u64) -> Result<u64> {
        let mut cur = e;
        loop {
            if cur <= self.seed_edge_max() {
                return Ok(self.seed_graph.endpoint(cur) as u64);
            }
            let h = match self.phi_of(cur) {
                Some(h) => h,
                None => self.assign(cur)?,
            };
            if h.side == 2 {
                return Ok(self.fixed_endpoint(h.edge));
            }
            debug_assert!(h.edge < cur, "choice chains strictly decrease");
            cur = h.edge;
        }
    }

    /// Expose a half-edge: breadth-first reveal of the tree of edges whose
    /// choices lead to it, in lexicographic label order. `en_count` counts
    /// tree members lying in the final graph; generation stops once the
    /// tree outgrows `budget` (flagged, not an error).
    pub fn expose(&mut self, h: HalfEdge, budget: usize) -> Result<ExposeResult> {
        if self.is_revealed(h) {
            return Err(Error::Protocol(format!(
                "half-edge ({}, {}) already revealed",
                h.edge, h.side
            )));
        }
        let mut tree = vec![(vec![0u32], h.edge)];
        let mut en_count = usize::from(self.in_en(h.edge));
        let mut capped = false;
        let mut queue: BinaryHeap<Reverse<(Label, u64, u8)>> = BinaryHeap::new();
        queue.push(Reverse((vec![0u32], h.edge, h.side)));
        while let Some(Reverse((label, edge, side))) = queue.pop() {
            let he = HalfEdge::new(edge, side);
            if self.is_revealed(he) {
                // choices into this pair were settled earlier; nothing new
                // can adopt it
                continue;
            }
            let found = self.reveal(he)?;
            for (i, &e) in found.iter().enumerate() {
                let mut child = label.clone();
                child.push(i as u32 + 1);
                tree.push((child.clone(), e));
                if self.in_en(e) {
                    en_count += 1;
                }
                queue.push(Reverse((child, e, 1)));
            }
            if tree.len() > budget {
                capped = true;
                break;
            }
        }
        Ok(ExposeResult {
            tree,
            en_count,
            capped,
        })
    }

    /// Degree of `v` reconstructed lazily: the sum over its `m` out-edges of
    /// the exposed tree sizes restricted to the final graph.
    pub fn expose_degree(&mut self, v: u64, budget: usize) -> Result<usize> {
        if v < self.one_n || v > self.nu_n {
            return Err(Error::Query(format!("vertex {v} is not in the final graph")));
        }
        let mut total = 0;
        for e in self.bundle(v) {
            let r = self.expose(HalfEdge::new(e, 2), budget)?;
            if r.capped {
                return Err(Error::Run(format!("expose budget exhausted at edge {e}")));
            }
            total += r.en_count;
        }
        Ok(total)
    }

    /// Half-edges of the seed graph incident to seed vertex `v`, with side 2
    /// on `v`'s own out-edges and side 1 on seed edges pointing at `v`.
    fn seed_incident(&self, v: u64) -> Vec<HalfEdge> {
        let mut out = Vec::new();
        if v >= self.seed_graph.one_h as u64 {
            for e in self.bundle(v) {
                out.push(HalfEdge::new(e, 2));
            }
        }
        for e in self.edge_min..=self.seed_edge_max() {
            if self.seed_graph.endpoint(e) as u64 == v {
                out.push(HalfEdge::new(e, 1));
            }
        }
        out
    }

    /// Search the component of `v0` in the final graph, revealing as little
    /// as possible.
    ///
    /// Each round pops a free live edge, resolves where its random endpoint
    /// leads (short-circuiting when the choice lands on another live edge),
    /// and then grows that endpoint's tree by reveals, collecting the
    /// sibling bundles of live tree edges as future rounds. The verdict is
    /// `Large` as soon as more than `reveal_cap` current edges (ids above
    /// the age cutoff) have been touched by reveals since the search
    /// started, and `Small` when the frontier empties.
    pub fn component_search(
        &mut self,
        v0: u64,
        reveal_cap: u64,
        round_cap: u64,
    ) -> Result<ComponentResult> {
        if v0 < 1 || v0 > self.nu_n {
            return Err(Error::Query(format!("vertex {v0} out of range")));
        }
        let ec_base = self.revealed_ec_edges;
        let mut x: BTreeSet<u64> = BTreeSet::new();
        let mut c: HashSet<u64> = HashSet::new();
        let mut rounds = 0u64;

        // round 0
        let mut round0_queue: VecDeque<HalfEdge> = VecDeque::new();
        if self.in_vn(v0) {
            for e in self.bundle(v0) {
                if !self.is_assigned(e) && !self.is_shielded(e) {
                    self.shield_at_rest(e);
                    x.insert(e);
                    c.insert(e);
                }
            }
        } else if v0 <= self.nu_h {
            round0_queue.extend(self.seed_incident(v0));
        } else {
            for e in self.bundle(v0) {
                round0_queue.push_back(HalfEdge::new(e, 2));
            }
        }
        if !round0_queue.is_empty() {
            let grown = self.grow_tree(round0_queue, &mut x, &mut c, ec_base, reveal_cap)?;
            if !grown {
                return Ok(self.search_result(c, Verdict::Large, 0));
            }
        }
        self.check_bookkeeping(&c, &x, rounds)?;

        while let Some(x0) = x.pop_first() {
            rounds += 1;
            debug_assert!(!self.is_assigned(x0), "frontier edges stay free");
            let mut queue: VecDeque<HalfEdge> = VecDeque::new();
            queue.push_back(HalfEdge::new(x0, 1));
            queue.push_back(HalfEdge::new(x0, 2));

            // step 2: make x0's choice and trace it to a vertex
            if x0 <= self.seed_edge_max() {
                let v = self.seed_graph.endpoint(x0) as u64;
                if self.in_vn(v) {
                    self.add_bundle_to_frontier(v, &mut x, &mut c);
                } else {
                    queue.extend(self.seed_incident(v));
                }
            } else {
                let choice = self.assign(x0)?;
                let x1 = choice.edge;
                if x1 <= self.seed_edge_max() && choice.side == 1 {
                    // committed straight into the seed graph
                    let v = self.seed_graph.endpoint(x1) as u64;
                    queue.extend(self.seed_incident(v));
                } else if x1 > self.seed_edge_max() && self.is_assigned(x1) {
                    // Landed on a settled edge. Its committed side leads to
                    // an endpoint whose tree an earlier round explored, but
                    // its fixed endpoint may never have been (chains only
                    // reveal committed sides), so explore that one.
                    if choice.side == 2 {
                        self.enqueue_endpoint_tree(self.fixed_endpoint(x1), &mut queue);
                    }
                } else if self.in_en(x1) {
                    let v1 = self.fixed_endpoint(x1);
                    self.add_bundle_to_frontier(v1, &mut x, &mut c);
                } else if choice.side == 2 {
                    self.enqueue_endpoint_tree(self.fixed_endpoint(x1), &mut queue);
                } else {
                    // follow the committed chain downward
                    let mut cur = x1;
                    loop {
                        if cur <= self.seed_edge_max() {
                            let v = self.seed_graph.endpoint(cur) as u64;
                            queue.extend(self.seed_incident(v));
                            break;
                        }
                        let hop = match self.phi_of(cur) {
                            Some(hop) => hop,
                            None => {
                                let hop = self.assign(cur)?;
                                queue.push_back(HalfEdge::new(cur, 1));
                                hop
                            }
                        };
                        if hop.side == 2 {
                            self.enqueue_endpoint_tree(self.fixed_endpoint(hop.edge), &mut queue);
                            break;
                        }
                        cur = hop.edge;
                    }
                }
            }

            // steps 3 and 4
            let grown = self.grow_tree(queue, &mut x, &mut c, ec_base, reveal_cap)?;
            if !grown {
                return Ok(self.search_result(c, Verdict::Large, rounds));
            }
            self.check_bookkeeping(&c, &x, rounds)?;
            if rounds >= round_cap && !x.is_empty() {
                return Ok(self.search_result(c, Verdict::Capped, rounds));
            }
        }
        Ok(self.search_result(c, Verdict::Small, rounds))
    }

    /// The random endpoint of the popped edge resolved to `v`: expose the
    /// whole out-bundle of `v` so every edge that chose `v` is found.
    fn enqueue_endpoint_tree(&self, v: u64, queue: &mut VecDeque<HalfEdge>) {
        if v <= self.nu_h {
            queue.extend(self.seed_incident(v));
        } else {
            for e in self.bundle(v) {
                queue.push_back(HalfEdge::new(e, 2));
            }
        }
    }

    fn add_bundle_to_frontier(&mut self, v: u64, x: &mut BTreeSet<u64>, c: &mut HashSet<u64>) {
        for f in self.bundle(v) {
            if !self.is_assigned(f) && !x.contains(&f) {
                self.shield_at_rest(f);
                x.insert(f);
                c.insert(f);
            }
        }
    }

    /// Step-3 loop: drain the queue of half-edges, revealing each and
    /// walking the adoption tree. Live adopters contribute their sibling
    /// bundles to the frontier the moment they adopt, so later queries in
    /// the same reveal already see them shielded. Returns `false` when the
    /// reveal budget over current edges ran out.
    fn grow_tree(
        &mut self,
        mut queue: VecDeque<HalfEdge>,
        x: &mut BTreeSet<u64>,
        c: &mut HashSet<u64>,
        ec_base: u64,
        reveal_cap: u64,
    ) -> Result<bool> {
        while let Some(h) = queue.pop_front() {
            let mut stack = vec![h];
            while let Some(y) = stack.pop() {
                if self.is_revealed(y) {
                    continue;
                }
                let out = self.reveal_core(y, true)?;
                for &f in &out.newly_shielded {
                    x.insert(f);
                    c.insert(f);
                }
                for &e in &out.adopters {
                    stack.push(HalfEdge::new(e, 1));
                    if self.in_en(e) {
                        stack.push(HalfEdge::new(e, 2));
                        c.insert(e);
                    }
                }
                if self.revealed_ec_edges - ec_base > reveal_cap {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Bookkeeping identity: after every round, half the collected component
    /// size is at most the frontier plus the round count, which is at most
    /// the collected size. The lower half needs every live tree edge to
    /// contribute `m - 1` frontier siblings, so it only holds for `m >= 2`.
    fn check_bookkeeping(&self, c: &HashSet<u64>, x: &BTreeSet<u64>, rounds: u64) -> Result<()> {
        if self.m < 2 {
            return Ok(());
        }
        let csz = c.len() as u64;
        let xt = x.len() as u64 + rounds;
        if csz > 2 * xt || xt > csz {
            return Err(Error::Run(format!(
                "component bookkeeping identity violated: |C| = {csz}, |X| + t = {xt}"
            )));
        }
        Ok(())
    }

    fn search_result(&self, c: HashSet<u64>, verdict: Verdict, rounds: u64) -> ComponentResult {
        let mut edges: Vec<u64> = c.into_iter().collect();
        edges.sort_unstable();
        ComponentResult {
            edges,
            verdict,
            rounds,
        }
    }

    /// Assign every remaining edge, resolve all endpoints, and restrict to
    /// the final edge window. Consistent with whatever was revealed before.
    pub fn realize_full(&mut self) -> Result<GraphState> {
        let seed_max = self.seed_edge_max();
        let mut endpoints: Vec<u32> =
            Vec::with_capacity((self.edge_max() - self.edge_min + 1) as usize);
        for e in self.edge_min..=seed_max {
            endpoints.push(self.seed_graph.endpoint(e));
        }
        for e in (seed_max + 1)..=self.edge_max() {
            let h = match self.phi_of(e) {
                Some(h) => h,
                None => self.assign(e)?,
            };
            let v = if h.side == 2 {
                self.fixed_endpoint(h.edge) as u32
            } else {
                endpoints[(h.edge - self.edge_min) as usize]
            };
            endpoints.push(v);
        }
        Ok(GraphState::assemble(
            self.m as u32,
            self.n,
            self.seed_graph.one_h,
            self.seed_graph.nu_h,
            self.one_n as u32,
            self.nu_n as u32,
            self.edge_min,
            endpoints,
        ))
    }
}
