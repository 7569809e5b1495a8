//! Event-driven simulation of the continuous-time branching process used as
//! the local limit of the graph: every individual lives for time 1 and gives
//! birth at the arrivals of a rate-`alpha` Poisson process on its lifetime.
//!
//! `d(tau)` counts processes born in `(tau - 1, tau]` (alive at `tau`), and
//! `b(tau)` counts all births up to `tau`. For every fixed `tau`, `d(tau)` is
//! distributed as the zero-inflated geometric `G(p(tau), q(tau))` from the
//! theory layer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::stats::derive_seed;
use crate::theory::{p_for_alpha, solve_zeta, SpectralConstants};

/// Default hard cap on births per trace; hit only with `alpha` far above 1
/// and long horizons. A capped trace is flagged, never silently truncated.
pub const DEFAULT_BIRTH_CAP: usize = 10_000_000;

/// Internal seed used by [`calibrate_lambda`], which has no seed input.
const CALIBRATION_SEED: u64 = 0xC0FF_EE00;

/// One birth event. The root has `parent == u32::MAX` and ordinal 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Birth {
    /// Index of the parent in the trace's birth list.
    pub parent: u32,
    /// 1-based arrival number within the parent's lifetime (0 for the root).
    pub ordinal: u32,
    pub time: f64,
}

/// A generated trace: births in generation order (parents before children,
/// subtrees in arrival order), root first at time 0.
#[derive(Debug, Clone)]
pub struct CmjTrace {
    pub alpha: f64,
    pub tau_max: f64,
    pub seed: u64,
    pub births: Vec<Birth>,
    pub capped: bool,
    times_sorted: Vec<f64>,
}

impl CmjTrace {
    /// Dotted label of a birth, root = "0", its j-th child "0.j", and so on.
    pub fn label(&self, idx: usize) -> String {
        let mut parts = Vec::new();
        let mut cur = idx;
        loop {
            let b = &self.births[cur];
            if b.parent == u32::MAX {
                parts.push(0u32);
                break;
            }
            parts.push(b.ordinal);
            cur = b.parent as usize;
        }
        parts.reverse();
        parts
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }

    fn check_range(&self, tau: f64) -> Result<()> {
        if !(0.0..=self.tau_max).contains(&tau) {
            return Err(Error::Query(format!(
                "tau = {tau} outside [0, {}]",
                self.tau_max
            )));
        }
        Ok(())
    }

    fn births_up_to(&self, tau: f64) -> usize {
        self.times_sorted.partition_point(|&t| t <= tau)
    }

    /// `d(tau)`: number of processes with birth time in `(tau - 1, tau]`.
    pub fn alive_at(&self, tau: f64) -> Result<usize> {
        self.check_range(tau)?;
        Ok(self.births_up_to(tau) - self.births_up_to(tau - 1.0))
    }

    /// `b(tau)`: number of processes born at or before `tau`.
    pub fn born_before(&self, tau: f64) -> Result<usize> {
        self.check_range(tau)?;
        Ok(self.births_up_to(tau))
    }
}

/// Generate a trace. Children beyond `tau_max` are not recorded, which leaves
/// `d` and `b` at times `<= tau_max` unaffected. Each process draws from its
/// own stream derived from `(seed, label path)`, so the result does not
/// depend on expansion order.
pub fn simulate_cmj(alpha: f64, tau_max: f64, seed: u64) -> Result<CmjTrace> {
    simulate_cmj_capped(alpha, tau_max, seed, DEFAULT_BIRTH_CAP)
}

pub fn simulate_cmj_capped(
    alpha: f64,
    tau_max: f64,
    seed: u64,
    birth_cap: usize,
) -> Result<CmjTrace> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParam(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(tau_max >= 0.0) || !tau_max.is_finite() {
        return Err(Error::InvalidParam(format!(
            "tau_max must be nonnegative, got {tau_max}"
        )));
    }
    let exp = Exp::new(alpha).expect("alpha > 0");
    let mut births = vec![Birth {
        parent: u32::MAX,
        ordinal: 0,
        time: 0.0,
    }];
    let mut capped = false;
    // Stack of processes still to expand; preorder matches the lexicographic
    // label order of the generating algorithm.
    let mut stack = vec![(0u32, derive_seed(seed, 0))];
    let mut children = Vec::new();
    while let Some((idx, stream)) = stack.pop() {
        let birth_time = births[idx as usize].time;
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        let mut elapsed = 0.0;
        children.clear();
        loop {
            elapsed += exp.sample(&mut rng);
            if elapsed > 1.0 {
                break;
            }
            let t = birth_time + elapsed;
            if t > tau_max {
                continue; // born after the horizon: recorded as absent
            }
            let ordinal = children.len() as u32 + 1;
            if births.len() >= birth_cap {
                capped = true;
                break;
            }
            births.push(Birth {
                parent: idx,
                ordinal,
                time: t,
            });
            children.push((births.len() as u32 - 1, derive_seed(stream, ordinal as u64)));
        }
        if capped {
            break;
        }
        // push in reverse so the first child is expanded first
        for &c in children.iter().rev() {
            stack.push(c);
        }
    }
    let mut times_sorted: Vec<f64> = births.iter().map(|b| b.time).collect();
    times_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(CmjTrace {
        alpha,
        tau_max,
        seed,
        births,
        capped,
        times_sorted,
    })
}

/// Empirically pick the smallest `lambda` such that the chosen quantile of
/// `b(log_gamma n)` stays below `B(n)`.
///
/// The paper only asserts that some constant works; experiments need a
/// number, so it is measured here and stored in experiment configs. Uses the
/// `alpha < 1` scaling `B(n) = lambda ln n` or the `alpha > 1` scaling
/// `B(n) = lambda n^{1/eta} ln n` as appropriate.
pub fn calibrate_lambda(alpha: f64, n: u64, runs: usize, quantile: f64) -> Result<f64> {
    if runs < 1000 {
        return Err(Error::InvalidParam(
            "lambda calibration needs at least 10^3 runs".into(),
        ));
    }
    if !(0.0..=1.0).contains(&quantile) {
        return Err(Error::InvalidParam("quantile must lie in [0, 1]".into()));
    }
    let p = p_for_alpha::<f64>(alpha)?;
    let gamma = p / (1.0 - p);
    let tau_max = (n as f64).ln() / gamma.ln();
    let mut counts: Vec<usize> = (0..runs)
        .map(|i| {
            let trace = simulate_cmj(alpha, tau_max, derive_seed(CALIBRATION_SEED, i as u64))?;
            trace.born_before(tau_max)
        })
        .collect::<Result<_>>()?;
    counts.sort_unstable();
    let idx = ((quantile * runs as f64).ceil() as usize).clamp(1, runs) - 1;
    let q_value = counts[idx] as f64;
    let ln_n = (n as f64).ln();
    let scale = if alpha < 1.0 {
        ln_n
    } else {
        let zeta = solve_zeta::<f64>(alpha)?;
        let eta = -gamma.ln() / zeta.ln();
        (n as f64).powf(1.0 / eta) * ln_n
    };
    Ok(q_value / scale)
}

/// Budget `B(n)` for a raw `alpha` (convenience for CLI paths that start
/// from `alpha` rather than `p`).
pub fn budget_for_alpha(alpha: f64, n: u64, lambda: f64) -> Result<f64> {
    let p = p_for_alpha::<f64>(alpha)?;
    let params = crate::theory::derive_params::<f64>(p, 1)?;
    let constants = SpectralConstants::for_params(&params)?;
    crate::theory::b_of_n(&params, &constants, n, lambda)
}
