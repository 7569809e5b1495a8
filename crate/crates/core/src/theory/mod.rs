//! Limiting constants and functions of the model.
//!
//! For parameters `1/2 < p < 1` and `m >= 1` the model is governed by
//!
//! * `gamma = p / (1 - p)`, `mu = m(2p - 1)`,
//!   `alpha = p/(4p - 2) * ln(gamma)` (independent of `m`),
//! * `zeta`, the solution in `R \ {1}` of `zeta * exp(alpha(1 - zeta)) = 1`,
//! * `eta = -ln(gamma) / ln(zeta)` when `alpha > 1`,
//! * a sequence `a_k` and a piecewise function `Q(tau)` built from it, from
//!   which the survival probability `q(tau)` and the rate `p(tau)` of the
//!   limiting zero-inflated geometric degree law are derived.
//!
//! Raw `a_k` and `Q` grow geometrically, so everything here works in the
//! rescaled basis `b_k = (-alpha)^k a_k` and
//! `S(tau) = (-alpha)^floor(tau) Q(tau)`. In that basis
//!
//! * `b_0 = 1`, `b_k = e^alpha * sum_{j<k} b_j (-alpha)^{k-1-j}/(k-1-j)!`,
//! * `S(tau) = sum_i b_{k-i} (-alpha(tau-k))^i / i!` on `[k, k+1)`,
//! * `q(tau) = 1 - S(tau-1)/S(tau)` for `tau >= 1` and `q = 1` on `[0, 1)`,
//! * `p(tau) = e^{-alpha(tau-k)} / S(tau)` on `[k, k+1)`,
//!
//! all ratios of like-sized quantities, free of the sign-alternating
//! cancellation of the raw basis.

mod quadrature;
mod tables;

pub use quadrature::{adaptive_simpson, adaptive_simpson_rel};
pub use tables::{GridRow, TheoryTables};

use crate::error::{Error, Result};
use crate::Scalar;

/// Largest age `tau` the function tables support.
const MAX_TAU: usize = 400;

/// Alpha window treated as critical: the two roots of the `zeta` equation
/// merge at `alpha = 1` and the solve becomes ill-conditioned.
const CRITICAL_WINDOW: f64 = 1e-9;

/// Model parameters `(p, m)` with the derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub p: F,
    pub m: u32,
    pub alpha: F,
    pub gamma: F,
    pub mu: F,
}

/// Derive all constants from `(p, m)`.
pub fn derive_params<F: Scalar>(p: F, m: u32) -> Result<ModelParams<F>> {
    let half = F::of(0.5);
    if !(p > half && p < F::one()) || !p.is_finite() {
        return Err(Error::InvalidParam(format!(
            "p must lie in (1/2, 1), got {p}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidParam("m must be at least 1".into()));
    }
    let gamma = p / (F::one() - p);
    let mf = F::of_usize(m as usize);
    let mu = mf * (F::of(2.0) * p - F::one());
    let alpha = p / (F::of(4.0) * p - F::of(2.0)) * gamma.ln();
    Ok(ModelParams {
        p,
        m,
        alpha,
        gamma,
        mu,
    })
}

impl<F: Scalar> ModelParams<F> {
    pub fn new(p: F, m: u32) -> Result<Self> {
        derive_params(p, m)
    }

    /// `tau`-coordinate of vertex `v` at horizon `n`: `log_gamma(p n / v)`.
    pub fn vertex_age(&self, n: u64, v: u64) -> F {
        (self.p * F::of(n as f64) / F::of(v as f64)).ln() / self.gamma.ln()
    }

    /// `tau`-coordinate of edge `e` at horizon `n`: `log_gamma(p m n / e)`.
    pub fn edge_age(&self, n: u64, e: u64) -> F {
        let pmn = self.p * F::of_usize(self.m as usize) * F::of(n as f64);
        (pmn / F::of(e as f64)).ln() / self.gamma.ln()
    }
}

fn bisect<F: Scalar>(f: impl Fn(F) -> F, mut lo: F, mut hi: F) -> F {
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= F::zero(), "bisection bracket must straddle");
    for _ in 0..200 {
        let mid = (lo + hi) / F::of(2.0);
        if mid == lo || mid == hi {
            break;
        }
        let fmid = f(mid);
        if (fmid <= F::zero()) == (flo <= F::zero()) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / F::of(2.0)
}

/// The threshold `p_0`: the unique `p` in `(1/2, 1)` with `alpha(p) = 1`.
pub fn solve_p0<F: Scalar>() -> F {
    let eps = F::of(1e-9);
    bisect(
        |p| derive_params(p, 1).expect("bracket is inside (1/2,1)").alpha - F::one(),
        F::of(0.5) + eps,
        F::one() - eps,
    )
}

/// Invert `alpha(p)` over `(1/2, 1)`; `alpha` ranges over `(1/2, inf)`.
pub fn p_for_alpha<F: Scalar>(alpha: F) -> Result<F> {
    if !(alpha > F::of(0.5)) {
        return Err(Error::InvalidParam(format!(
            "alpha must exceed 1/2, got {alpha}"
        )));
    }
    let eps = F::of(1e-12);
    Ok(bisect(
        |p| derive_params(p, 1).expect("bracket is inside (1/2,1)").alpha - alpha,
        F::of(0.5) + eps,
        F::one() - eps,
    ))
}

/// Solve `zeta e^{alpha(1 - zeta)} = 1` for the root different from 1.
///
/// For `alpha > 1` the root lies in `(0, 1/alpha)`; for `alpha < 1` it lies
/// above `1 - 1/alpha + 1/alpha^2 > 1` and the upper bracket is doubled until
/// the residual changes sign.
pub fn solve_zeta<F: Scalar>(alpha: F) -> Result<F> {
    if !(alpha > F::of(0.5)) {
        return Err(Error::InvalidParam(format!(
            "alpha must exceed 1/2, got {alpha}"
        )));
    }
    if (alpha - F::one()).abs() < F::of(CRITICAL_WINDOW) {
        return Err(Error::UndefinedAtCritical("zeta"));
    }
    let residual = |z: F| z * (alpha * (F::one() - z)).exp() - F::one();
    if alpha > F::one() {
        Ok(bisect(residual, F::of(1e-300), F::one() / alpha))
    } else {
        let lo = F::one() - alpha.recip() + alpha.recip() * alpha.recip();
        let mut hi = lo * F::of(2.0);
        while residual(hi) > F::zero() {
            hi = hi * F::of(2.0);
            if !hi.is_finite() {
                return Err(Error::Eval("zeta bracket diverged".into()));
            }
        }
        Ok(bisect(residual, lo, hi))
    }
}

/// Regime-dependent asymptotic coefficients of `p(tau)` and `q(tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaConstants<F> {
    /// `alpha < 1`: `p(tau) -> 1 - alpha + lambda1 zeta^{-tau}`,
    /// `q(tau) ~ lambda2 zeta^{-tau}`.
    Subcritical { lambda1: F, lambda2: F },
    /// `alpha > 1`: `p(tau) ~ lambda3 zeta^tau`,
    /// `q(tau) -> 1 - zeta + lambda4 zeta^tau`.
    Supercritical { lambda3: F, lambda4: F },
}

/// Constants tied to the root `zeta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants<F> {
    pub alpha: F,
    pub zeta: F,
    /// `beta = 1/(1 - alpha zeta)`: the `zeta`-pole coefficient of the
    /// generating function of `b_k`.
    pub beta: F,
    /// Tail exponent parameter, defined only for `alpha > 1`.
    pub eta: Option<F>,
    pub lambda: LambdaConstants<F>,
}

impl<F: Scalar> SpectralConstants<F> {
    pub fn for_alpha(alpha: F) -> Result<Self> {
        let zeta = solve_zeta(alpha)?;
        let one = F::one();
        let beta = (one - alpha * zeta).recip();
        if alpha > one {
            let gamma_of_alpha = {
                let p = p_for_alpha(alpha)?;
                p / (one - p)
            };
            let eta = -(gamma_of_alpha.ln()) / zeta.ln();
            Ok(SpectralConstants {
                alpha,
                zeta,
                beta,
                eta: Some(eta),
                lambda: LambdaConstants::Supercritical {
                    lambda3: one - alpha * zeta,
                    lambda4: (one - zeta) * (one - alpha * zeta) / (alpha - one),
                },
            })
        } else {
            Ok(SpectralConstants {
                alpha,
                zeta,
                beta,
                eta: None,
                lambda: LambdaConstants::Subcritical {
                    lambda1: (one - alpha) * (one - alpha) / (alpha * zeta - one),
                    lambda2: (one - alpha) * (zeta - one) / (alpha * zeta - one),
                },
            })
        }
    }

    pub fn for_params(params: &ModelParams<F>) -> Result<Self> {
        let mut c = Self::for_alpha(params.alpha)?;
        // eta computed from the exact gamma rather than the alpha-roundtrip.
        if params.alpha > F::one() {
            c.eta = Some(-(params.gamma.ln()) / c.zeta.ln());
        }
        Ok(c)
    }
}

/// `b_0..b_K` via the transformed recursion
/// `b_k = e^alpha sum_{j<k} b_j (-alpha)^{k-1-j} / (k-1-j)!`.
pub fn b_sequence<F: Scalar>(alpha: F, k_max: usize) -> Vec<F> {
    let mut b = Vec::with_capacity(k_max + 1);
    b.push(F::one());
    let ealpha = alpha.exp();
    for k in 1..=k_max {
        // term over i = k-1-j: (-alpha)^i / i! paired with b_{k-1-i}
        let mut acc = F::zero();
        let mut coeff = F::one();
        for i in 0..k {
            acc = acc + b[k - 1 - i] * coeff;
            coeff = coeff * (-alpha) / F::of_usize(i + 1);
        }
        let bk = ealpha * acc;
        if !bk.is_finite() {
            break; // table is truncated at overflow; s_at reports the range
        }
        b.push(bk);
    }
    b
}

/// Function tables for `Q`, `q`, `p` at fixed parameters.
#[derive(Debug, Clone)]
pub struct TheoryFns<F> {
    pub params: ModelParams<F>,
    b: Vec<F>,
}

impl<F: Scalar> TheoryFns<F> {
    /// Build tables supporting `tau` up to `tau_max` (clamped to a large
    /// internal ceiling).
    pub fn new(params: ModelParams<F>, tau_max: usize) -> Self {
        let k_max = tau_max.min(MAX_TAU) + 2;
        let b = b_sequence(params.alpha, k_max);
        TheoryFns { params, b }
    }

    pub fn b_table(&self) -> &[F] {
        &self.b
    }

    /// Largest integer age the table can evaluate.
    pub fn max_scale(&self) -> usize {
        self.b.len().saturating_sub(1)
    }

    /// `S(tau)` evaluated with the polynomial of scale `k`; valid for
    /// `tau` in `[k, k+1]` (the endpoint gives the left limit).
    pub fn s_at(&self, k: usize, tau: F) -> Result<F> {
        if k >= self.b.len() {
            return Err(Error::Eval(format!("tau = {tau} beyond table")));
        }
        let x = -self.params.alpha * (tau - F::of_usize(k));
        let mut acc = F::zero();
        let mut term = F::one(); // x^i / i!
        for i in 0..=k {
            acc = acc + self.b[k - i] * term;
            term = term * x / F::of_usize(i + 1);
        }
        Ok(acc)
    }

    /// Rescaled `Q`: returns `(S(tau), k)` with `Q(tau) = S(tau) (-alpha)^{-k}`,
    /// `k = floor(tau)`. Negative `tau` returns the zero convention.
    pub fn big_q_scaled(&self, tau: F) -> Result<(F, i32)> {
        if tau < F::zero() {
            return Ok((F::zero(), 0));
        }
        let k = tau.floor().to_f64_lossy() as usize;
        Ok((self.s_at(k, tau)?, k as i32))
    }

    /// `Q(tau)` unscaled; only safe for small `floor(tau)`.
    pub fn big_q(&self, tau: F) -> Result<F> {
        let (s, k) = self.big_q_scaled(tau)?;
        Ok(s * (-self.params.alpha).powi(-k))
    }

    /// Survival probability `q(tau)` of the limiting law.
    pub fn q_eval(&self, tau: F) -> Result<F> {
        if tau < F::zero() {
            return Ok(F::zero());
        }
        if tau < F::one() {
            return Ok(F::one());
        }
        let k = tau.floor().to_f64_lossy() as usize;
        self.q_on(k, tau)
    }

    /// Geometric rate `p(tau)` of the limiting law.
    pub fn p_eval(&self, tau: F) -> Result<F> {
        if tau < F::zero() {
            return Ok(F::zero());
        }
        let k = tau.floor().to_f64_lossy() as usize;
        self.p_on(k, tau)
    }

    /// `q` on `[k, k+1]` using the scale-`k` polynomials; `tau = k+1` yields
    /// the left limit at the jump.
    pub fn q_on(&self, k: usize, tau: F) -> Result<F> {
        if k == 0 {
            return Ok(F::one());
        }
        let s_here = self.s_at(k, tau)?;
        if s_here.abs() < F::of(1e-300) {
            return Err(Error::Eval(format!("S({tau}) vanished")));
        }
        let s_prev = self.s_at(k - 1, tau - F::one())?;
        Ok(F::one() - s_prev / s_here)
    }

    /// `p` on `[k, k+1]`; continuous across scales.
    pub fn p_on(&self, k: usize, tau: F) -> Result<F> {
        let s_here = self.s_at(k, tau)?;
        if s_here.abs() < F::of(1e-300) {
            return Err(Error::Eval(format!("S({tau}) vanished")));
        }
        Ok((-self.params.alpha * (tau - F::of_usize(k))).exp() / s_here)
    }
}

fn binom<F: Scalar>(n: usize, r: usize) -> F {
    if r > n {
        return F::zero();
    }
    let r = r.min(n - r);
    let mut acc = F::one();
    for i in 1..=r {
        acc = acc * F::of_usize(n - r + i) / F::of_usize(i);
    }
    acc
}

fn ln_binom(n: usize, r: usize) -> f64 {
    if r > n {
        return f64::NEG_INFINITY;
    }
    let r = r.min(n - r);
    let mut acc = 0.0;
    for i in 1..=r {
        acc += ((n - r + i) as f64).ln() - (i as f64).ln();
    }
    acc
}

/// `base^exp` with the convention `0^0 = 1`.
fn pow_or_zero<F: Scalar>(base: F, exp: usize) -> F {
    if exp == 0 {
        F::one()
    } else if base <= F::zero() {
        F::zero()
    } else {
        base.powi(exp as i32)
    }
}

/// pmf of the zero-inflated geometric `G(p, q)`: mass `1 - q` at zero, else
/// geometric with rate `p`.
pub fn g_pmf<F: Scalar>(pv: F, qv: F, k: usize) -> F {
    if k == 0 {
        F::one() - qv
    } else {
        qv * pv * pow_or_zero(F::one() - pv, k - 1)
    }
}

/// pmf at `k` of the `m`-fold sum of independent `G(p, q)` variables:
///
/// `sum_l C(m,l) C(k-1,l-1) (1-q)^{m-l} q^l p^l (1-p)^{k-l}` for `k >= 1`,
/// `(1-q)^m` at `k = 0`. Above `k = 60` the term products are assembled in
/// log space.
pub fn gq_pmf<F: Scalar>(m: u32, pv: F, qv: F, k: usize) -> F {
    let m = m as usize;
    let one = F::one();
    if k == 0 {
        return pow_or_zero(one - qv, m);
    }
    let mut total = F::zero();
    for ell in 1..=m.min(k) {
        let term = if k <= 60 {
            binom::<F>(m, ell)
                * binom::<F>(k - 1, ell - 1)
                * pow_or_zero(one - qv, m - ell)
                * pow_or_zero(qv, ell)
                * pow_or_zero(pv, ell)
                * pow_or_zero(one - pv, k - ell)
        } else {
            let bases = [
                ((one - qv), (m - ell) as f64),
                (qv, ell as f64),
                (pv, ell as f64),
                ((one - pv), (k - ell) as f64),
            ];
            let mut ln_term = ln_binom(m, ell) + ln_binom(k - 1, ell - 1);
            let mut zero = false;
            for (base, e) in bases {
                if e == 0.0 {
                    continue;
                }
                if base <= F::zero() {
                    zero = true;
                    break;
                }
                ln_term += e * base.to_f64_lossy().ln();
            }
            if zero {
                F::zero()
            } else {
                F::of(ln_term.exp())
            }
        };
        total = total + term;
    }
    total
}

/// Limiting degree sequence `x_0..x_{k_max}`.
#[derive(Debug, Clone)]
pub struct DegreeLaw<F> {
    pub x: Vec<F>,
    pub k_max: usize,
    pub quadrature_tol: F,
}

impl<F: Scalar> DegreeLaw<F> {
    /// `(k, x_k)` pairs, for fitting.
    pub fn masses(&self) -> Vec<(u32, f64)> {
        self.x
            .iter()
            .enumerate()
            .map(|(k, &x)| (k as u32, x.to_f64_lossy()))
            .collect()
    }
}

/// Integrate `eval(scale, tau)` over `[0, inf)`, splitting at integers and
/// truncating once `gamma^{-T} < tol` and the unit intervals have stopped
/// contributing.
fn integrate_tail<F: Scalar>(
    eval: impl Fn(usize, F) -> F,
    gamma: F,
    tol: F,
    max_scale: usize,
) -> F {
    let t_min = ((F::one() / tol).ln() / gamma.ln())
        .ceil()
        .to_f64_lossy()
        .max(1.0) as usize;
    let rel = F::of(1e-9);
    let stop_ratio = F::of(1e-10);
    let mut total = F::zero();
    let mut quiet = 0;
    for j in 0..max_scale.min(MAX_TAU) {
        let a = F::of_usize(j);
        let b = a + F::one();
        let piece = adaptive_simpson_rel(|tau| eval(j, tau), a, b, rel);
        total = total + piece;
        if j + 1 >= t_min {
            if piece.abs() <= stop_ratio * total.abs() {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    total
}

/// Limiting degree sequence by quadrature:
///
/// `x_k = p ln(gamma) sum_l C(m,l) C(k-1,l-1) Int f_l`,
/// `f_l(tau) = (1-q)^{m-l} q^l p^l (1-p)^{k-l} gamma^{-tau}`,
/// and `x_0 = p ln(gamma) Int (1-q)^m gamma^{-tau}`.
pub fn degree_law<F: Scalar>(params: &ModelParams<F>, k_max: usize, tol: F) -> Result<DegreeLaw<F>> {
    let fns = TheoryFns::new(params.clone(), MAX_TAU);
    let max_scale = fns.max_scale().saturating_sub(1);
    let m = params.m as usize;
    let gamma = params.gamma;
    let ln_gamma = gamma.ln();
    let front = params.p * ln_gamma;
    let one = F::one();

    let qp_at = |scale: usize, tau: F| -> (F, F) {
        let q = fns.q_on(scale, tau).unwrap_or(F::zero());
        let p = fns.p_on(scale, tau).unwrap_or(F::zero());
        (q.max(F::zero()).min(one), p.max(F::zero()).min(one))
    };

    let mut x = Vec::with_capacity(k_max + 1);
    let x0 = front
        * integrate_tail(
            |scale, tau| {
                let (q, _) = qp_at(scale, tau);
                pow_or_zero(one - q, m) * (-tau * ln_gamma).exp()
            },
            gamma,
            tol,
            max_scale,
        );
    x.push(x0);

    for k in 1..=k_max {
        let mut xk = F::zero();
        for ell in 1..=m.min(k) {
            let integral = integrate_tail(
                |scale, tau| {
                    let (q, p) = qp_at(scale, tau);
                    pow_or_zero(one - q, m - ell)
                        * pow_or_zero(q, ell)
                        * pow_or_zero(p, ell)
                        * pow_or_zero(one - p, k - ell)
                        * (-tau * ln_gamma).exp()
                },
                gamma,
                tol,
                max_scale,
            );
            xk = xk + binom::<F>(m, ell) * binom::<F>(k - 1, ell - 1) * integral;
        }
        x.push(front * xk);
    }
    Ok(DegreeLaw {
        x,
        k_max,
        quadrature_tol: tol,
    })
}

/// Exploration budget `B(n)`: `lambda ln n` below the threshold,
/// `lambda n^{1/eta} ln n` above it.
pub fn b_of_n<F: Scalar>(
    params: &ModelParams<F>,
    constants: &SpectralConstants<F>,
    n: u64,
    lambda: F,
) -> Result<F> {
    if n < 2 {
        return Err(Error::InvalidParam("n must be at least 2".into()));
    }
    if !(lambda > F::zero()) {
        return Err(Error::InvalidParam("lambda must be positive".into()));
    }
    let ln_n = F::of(n as f64).ln();
    if params.alpha < F::one() {
        Ok(lambda * ln_n)
    } else {
        let eta = constants.eta.ok_or(Error::UndefinedAtCritical("eta"))?;
        Ok(lambda * F::of(n as f64).powf(eta.recip()) * ln_n)
    }
}
