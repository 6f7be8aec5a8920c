//! Closed-form integrals of power-log monomials `r^b (ln r)^m` over
//! subintervals of `(0, inf]`.

use alloc::format;

use crate::error::{Error, Result};
use crate::math::{exp, expm1, lgamma, ln, pow};
use crate::special::{gamma_p, gamma_q, growing_moment};

/// Exponents within this distance of a critical value (the `-1` of
/// `int r^{-1} dr`) are treated as hitting it exactly.
pub const EXP_EPS: f64 = 1e-12;

#[inline]
pub(crate) fn is_critical(e: f64) -> bool {
    e.abs() <= EXP_EPS
}

pub(crate) fn ipow(x: f64, m: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..m {
        acc *= x;
    }
    acc
}

/// Antiderivative of `r^b (ln r)^m` evaluated at a finite `r > 0`.
fn antiderivative(b: f64, m: u32, r: f64) -> f64 {
    let c = b + 1.0;
    let l = ln(r);
    if is_critical(c) {
        return ipow(l, m + 1) / (m as f64 + 1.0);
    }
    // r^c sum_j (-1)^j m!/(m-j)! (ln r)^{m-j} / c^{j+1}
    let mut sum = 0.0;
    let mut falling = 1.0;
    let mut cpow = c;
    for j in 0..=m {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * falling * ipow(l, m - j) / cpow;
        falling *= (m - j) as f64;
        cpow *= c;
    }
    pow(r, c) * sum
}

// `int_0^len e^{c s} s^j ds` for j = 0, 1, accurate when `c len` is small.
fn exp_moment_small(c: f64, len: f64, j: u32) -> f64 {
    let x = c * len;
    if x.abs() < 0.5 {
        // sum_k x^k / (k! (k+j+1)) times len^{j+1}
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..40u32 {
            let add = term / (k + j + 1) as f64;
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() {
                break;
            }
            term *= x / (k + 1) as f64;
        }
        return sum * ipow(len, j + 1);
    }
    let e1 = expm1(x) / c;
    if j == 0 {
        e1
    } else {
        (len * exp(x) - e1) / c
    }
}

/// `int_lo^hi r^b (ln r)^m dr` for `0 < lo < hi < inf` and `m <= 1`,
/// without the cancellation of subtracting antiderivatives when `b` is
/// close to `-1`.
fn definite_small_log(b: f64, m: u32, lo: f64, hi: f64) -> f64 {
    let c = b + 1.0;
    let u1 = ln(lo);
    let len = ln(hi / lo);
    let scale = pow(lo, c);
    let e0 = exp_moment_small(c, len, 0);
    if m == 0 {
        scale * e0
    } else {
        scale * (u1 * e0 + exp_moment_small(c, len, 1))
    }
}

/// `int_lo^hi r^b (ln r)^m dr` for integer `m`, signed.
/// `lo` may be `0` and `hi` may be `inf`; divergent improper integrals are
/// reported as [`Error::Divergence`].
pub fn signed_power_log(b: f64, m: u32, lo: f64, hi: f64) -> Result<f64> {
    debug_assert!(lo >= 0.0 && lo < hi);
    if lo > 0.0 && hi.is_finite() && m <= 1 {
        return Ok(definite_small_log(b, m, lo, hi));
    }
    let c = b + 1.0;
    let at_lo = if lo == 0.0 {
        if c > EXP_EPS {
            0.0
        } else {
            return Err(Error::Divergence(format!(
                "int_0 r^{b} (ln r)^{m} dr diverges at 0"
            )));
        }
    } else {
        antiderivative(b, m, lo)
    };
    let at_hi = if hi.is_infinite() {
        if c < -EXP_EPS {
            0.0
        } else {
            return Err(Error::Divergence(format!(
                "int^inf r^{b} (ln r)^{m} dr diverges at infinity"
            )));
        }
    } else {
        antiderivative(b, m, hi)
    };
    Ok(at_hi - at_lo)
}

/// `int_lo^hi r^b |ln r|^m dr` for real `m >= 0`; `+inf` when divergent.
pub fn abs_power_log(b: f64, m: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo >= 0.0 && lo < hi && m >= 0.0);
    let c = b + 1.0;
    if m == 0.0 {
        if is_critical(c) {
            if lo == 0.0 || hi.is_infinite() {
                return f64::INFINITY;
            }
            return ln(hi / lo);
        }
        let top = if hi.is_infinite() {
            if c < 0.0 {
                0.0
            } else {
                return f64::INFINITY;
            }
        } else {
            pow(hi, c)
        };
        let bottom = if lo == 0.0 {
            if c > 0.0 {
                0.0
            } else {
                return f64::INFINITY;
            }
        } else {
            pow(lo, c)
        };
        return (top - bottom) / c;
    }
    let mut total = 0.0;
    if lo < 1.0 {
        // r = e^{-u}: int e^{-c u} u^m du over [-ln min(hi,1), -ln lo]
        let u1 = -ln(hi.min(1.0));
        let u2 = if lo == 0.0 { f64::INFINITY } else { -ln(lo) };
        total += exp_moment(c, m, u1.max(0.0), u2);
    }
    if hi > 1.0 {
        // r = e^{u}: int e^{c u} u^m du over [ln max(lo,1), ln hi]
        let u1 = ln(lo.max(1.0));
        let u2 = if hi.is_infinite() { f64::INFINITY } else { ln(hi) };
        total += exp_moment(-c, m, u1.max(0.0), u2);
    }
    total
}

/// `int_{u1}^{u2} e^{-k u} u^m du` with `0 <= u1 < u2 <= inf`.
fn exp_moment(k: f64, m: f64, u1: f64, u2: f64) -> f64 {
    if u1 >= u2 {
        return 0.0;
    }
    let s = m + 1.0;
    if is_critical(k) {
        if u2.is_infinite() {
            return f64::INFINITY;
        }
        return (pow(u2, s) - pow(u1, s)) / s;
    }
    if k > 0.0 {
        let scale = exp(lgamma(s) - s * ln(k));
        let (x1, x2) = (k * u1, k * u2);
        let diff = if x1 >= s {
            gamma_q(s, x1) - gamma_q(s, x2)
        } else {
            gamma_p(s, x2) - gamma_p(s, x1)
        };
        scale * diff
    } else {
        if u2.is_infinite() {
            return f64::INFINITY;
        }
        growing_moment(-k, m, u2) - growing_moment(-k, m, u1)
    }
}
