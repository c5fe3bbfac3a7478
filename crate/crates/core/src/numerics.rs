//! One-dimensional numerical kernels shared by the solvers: bracketing root
//! finders, golden-section minimization, adaptive quadrature and a streaming
//! log-sum-exp accumulator.

use crate::error::{BegError, Result};

/// Bracket width at which the hybrid root finder hands over from bisection
/// to Newton steps.
pub const NEWTON_SWITCH_WIDTH: f64 = 1e-6;

const MAX_ITER: usize = 400;

fn opposite_signs(a: f64, b: f64) -> bool {
    (a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0)
}

/// Plain bisection on `[lo, hi]` until the bracket is narrower than `xtol`
/// or `|f| <= ftol`. Returns the midpoint of the final bracket.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, xtol: f64, ftol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !opposite_signs(fa, fb) {
        return Err(BegError::Bracket(format!(
            "f({a}) = {fa} and f({b}) = {fb} have the same sign"
        )));
    }
    for _ in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= xtol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm.abs() <= ftol {
            return Ok(m);
        }
        if opposite_signs(fa, fm) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bisection down to [`NEWTON_SWITCH_WIDTH`], then safeguarded Newton steps
/// until `|f(x)| < ftol`. `f` returns `(value, derivative)`. Newton iterates
/// that leave the current bracket are replaced by a bisection step, so the
/// method never loses the root.
pub fn bisect_newton<F>(mut f: F, lo: f64, hi: f64, ftol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (mut fa, _) = f(a);
    let (fb, _) = f(b);
    if fa.abs() < ftol {
        return Ok(a);
    }
    if fb.abs() < ftol {
        return Ok(b);
    }
    if !opposite_signs(fa, fb) {
        return Err(BegError::Bracket(format!(
            "f({a}) = {fa} and f({b}) = {fb} have the same sign"
        )));
    }

    let mut iter = 0;
    while b - a > NEWTON_SWITCH_WIDTH && iter < MAX_ITER {
        let m = 0.5 * (a + b);
        let (fm, _) = f(m);
        if fm.abs() < ftol {
            return Ok(m);
        }
        if opposite_signs(fa, fm) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        iter += 1;
    }

    let mut x = 0.5 * (a + b);
    for _ in 0..MAX_ITER {
        let (fx, dfx) = f(x);
        if fx.abs() < ftol {
            return Ok(x);
        }
        if opposite_signs(fa, fx) {
            b = x;
        } else {
            a = x;
            fa = fx;
        }
        let newton = if dfx != 0.0 { x - fx / dfx } else { f64::NAN };
        let next = if newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if next == x || b - a <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        x = next;
    }
    Err(BegError::NoConvergence(format!(
        "hybrid root finder stalled in [{a}, {b}]"
    )))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`,
/// stopping when the bracket is narrower than `width`. Returns `(x, f(x))`
/// for the best point seen, including the interval endpoints.
pub fn golden_section<F>(mut f: F, a: f64, b: f64, width: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let f_lo = f(lo);
    let f_hi = f(hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_ITER {
        if hi - lo <= width {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if f_lo < best.1 {
        best = (a.min(b), f_lo);
    }
    if f_hi < best.1 {
        best = (a.max(b), f_hi);
    }
    best
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute error
/// target `tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Streaming `log(sum(exp(x_i)))` with a running maximum shift.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled_sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled_sum: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled_sum = self.scaled_sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled_sum += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.scaled_sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled_sum.ln()
        }
    }
}

/// `x log x` with the convention `0 log 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}
