//! Regularized incomplete gamma functions, needed for `int r^b |ln r|^m dr`
//! with non-integer `m`.

use crate::math::{exp, lgamma, ln};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

/// Lower regularized incomplete gamma `P(a, x)`, `a > 0`, `x >= 0`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < a + 1.0 {
        series(a, x)
    } else {
        1.0 - continued_fraction(a, x)
    }
}

/// Upper regularized incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < a + 1.0 {
        1.0 - series(a, x)
    } else {
        continued_fraction(a, x)
    }
}

fn prefactor(a: f64, x: f64) -> f64 {
    exp(-x + a * ln(x) - lgamma(a))
}

fn series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * prefactor(a, x)
}

// Modified Lentz evaluation of the continued fraction for Q.
fn continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    prefactor(a, x) * h
}

/// `int_0^U e^{k u} u^m du` for `k >= 0`, `m > -1`, by the positive series
/// `U^{m+1} sum_j (kU)^j / (j! (m+1+j))`.
pub fn growing_moment(k: f64, m: f64, upper: f64) -> f64 {
    debug_assert!(k >= 0.0 && m > -1.0 && upper >= 0.0);
    if upper == 0.0 {
        return 0.0;
    }
    let z = k * upper;
    let mut term = 1.0; // z^j / j!
    let mut sum = 1.0 / (m + 1.0);
    let mut j = 0.0;
    loop {
        j += 1.0;
        term *= z / j;
        let add = term / (m + 1.0 + j);
        sum += add;
        if !sum.is_finite() || (add < sum * EPS && j > z) {
            break;
        }
    }
    crate::math::pow(upper, m + 1.0) * sum
}
