//! Double-exponential quadrature (tanh-sinh on finite intervals, exp-sinh on
//! half lines). Tolerates integrable algebraic or logarithmic endpoint
//! singularities, which is the situation for power-log integrands at `r = 0`.

use crate::math::{cosh, exp, sinh, PI};

const MAX_LEVEL: u32 = 12;
const T_MAX: f64 = 6.5;

/// Outcome of a quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
}

/// `int_a^b f`, where `b` may be `f64::INFINITY`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Quadrature {
    debug_assert!(a < b && a.is_finite());
    if b.is_infinite() {
        refine(|h, odd_only| exp_sinh_sum(&f, a, h, odd_only), rel_tol)
    } else {
        refine(|h, odd_only| tanh_sinh_sum(&f, a, b, h, odd_only), rel_tol)
    }
}

// Trapezoidal sums on successively halved steps. `sum(h, odd_only)` returns the
// unscaled sum over nodes `t = j h` (odd `j` only after the first level).
fn refine<S: FnMut(f64, bool) -> f64>(mut sum: S, rel_tol: f64) -> Quadrature {
    let mut h = 1.0;
    let mut total = sum(h, false);
    let mut estimate = total * h;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        total += sum(h, true);
        let next = total * h;
        let err = (next - estimate).abs();
        estimate = next;
        if err <= rel_tol * next.abs() || next == 0.0 {
            return Quadrature { value: next, error: err };
        }
    }
    Quadrature {
        value: estimate,
        error: f64::NAN,
    }
}

fn nodes(h: f64, odd_only: bool) -> impl Iterator<Item = f64> {
    let step = if odd_only { 2 } else { 1 };
    let start = if odd_only { 1 } else { 0 };
    let count = (T_MAX / h) as i64;
    (start..=count).step_by(step).map(move |j| j as f64 * h)
}

fn tanh_sinh_sum<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, h: f64, odd_only: bool) -> f64 {
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for t in nodes(h, odd_only) {
        let u = 0.5 * PI * sinh(t);
        let e = exp(-2.0 * u);
        // distance from the nearer endpoint, computed without cancellation
        let delta = 2.0 * half * e / (1.0 + e);
        if delta == 0.0 {
            break;
        }
        let w = half * 0.5 * PI * cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if t == 0.0 {
            acc += w * f(a + half);
        } else {
            let left = f(a + delta);
            let right = f(b - delta);
            acc += w * (left + right);
        }
    }
    acc
}

fn exp_sinh_sum<F: Fn(f64) -> f64>(f: &F, a: f64, h: f64, odd_only: bool) -> f64 {
    let mut acc = 0.0;
    for t in nodes(h, odd_only) {
        let signs: &[f64] = if t == 0.0 { &[1.0] } else { &[1.0, -1.0] };
        for &s in signs {
            let tt = s * t;
            let u = 0.5 * PI * sinh(tt);
            let dx = exp(u);
            if dx == 0.0 || !dx.is_finite() {
                continue;
            }
            let w = dx * 0.5 * PI * cosh(tt);
            let v = f(a + dx);
            if v != 0.0 {
                acc += w * v;
            }
        }
    }
    acc
}
