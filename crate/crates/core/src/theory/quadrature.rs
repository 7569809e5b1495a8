//! Adaptive Simpson quadrature.
//!
//! The integrands in this crate are smooth inside each unit interval and only
//! lose continuity at integer points, so callers split there and hand each
//! piece to [`adaptive_simpson`].

use crate::Scalar;

struct Panel<F> {
    a: F,
    fa: F,
    b: F,
    fb: F,
    m: F,
    fm: F,
    whole: F,
    tol: F,
    depth: u32,
}

fn simpson<F: Scalar>(a: F, fa: F, b: F, fb: F, fm: F) -> F {
    (b - a) * (fa + F::of(4.0) * fm + fb) / F::of(6.0)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Scalar>(f: impl Fn(F) -> F, a: F, b: F, tol: F) -> F {
    if a == b {
        return F::zero();
    }
    let two = F::of(2.0);
    let m = (a + b) / two;
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let mut stack = vec![Panel {
        a,
        fa,
        b,
        fb,
        m,
        fm,
        whole: simpson(a, fa, b, fb, fm),
        tol,
        depth: 40,
    }];
    let mut total = F::zero();
    while let Some(p) = stack.pop() {
        let lm = (p.a + p.m) / two;
        let rm = (p.m + p.b) / two;
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(p.a, p.fa, p.m, p.fm, flm);
        let right = simpson(p.m, p.fm, p.b, p.fb, frm);
        let err = left + right - p.whole;
        if p.depth == 0 || err.abs() <= F::of(15.0) * p.tol {
            total = total + left + right + err / F::of(15.0);
        } else {
            let half_tol = p.tol / two;
            stack.push(Panel {
                a: p.a,
                fa: p.fa,
                b: p.m,
                fb: p.fm,
                m: lm,
                fm: flm,
                whole: left,
                tol: half_tol,
                depth: p.depth - 1,
            });
            stack.push(Panel {
                a: p.m,
                fa: p.fm,
                b: p.b,
                fb: p.fb,
                m: rm,
                fm: frm,
                whole: right,
                tol: half_tol,
                depth: p.depth - 1,
            });
        }
    }
    total
}

/// Integrate to a tolerance relative to a rough composite-Simpson estimate.
pub fn adaptive_simpson_rel<F: Scalar>(f: impl Fn(F) -> F, a: F, b: F, rel_tol: F) -> F {
    let n = 8;
    let h = (b - a) / F::of_usize(n);
    let mut rough = F::zero();
    for i in 0..n {
        let lo = a + h * F::of_usize(i);
        let hi = lo + h;
        let m = (lo + hi) / F::of(2.0);
        rough = rough + simpson(lo, f(lo), hi, f(hi), f(m));
    }
    let floor = F::of(1e-300);
    adaptive_simpson(f, a, b, rel_tol * (rough.abs() + floor))
}
