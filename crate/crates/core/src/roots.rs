//! Real roots of exponential polynomials `h(u) = sum_j P_j(u) e^{a_j u}`.
//!
//! A piece `sum c r^a (ln r)^k` becomes such a sum under `u = ln r`. Roots are
//! isolated by Rolle's theorem: after dividing by the leading exponential the
//! derivative has one fewer degree of freedom, its roots split the line into
//! segments on which `h` is monotone in sign, and each segment holds at most one
//! root, found by bisection.

use alloc::vec;
use alloc::vec::Vec;

use crate::integrate::EXP_EPS;
use crate::math::{exp, ln};

/// Bracket expansion toward an infinite end stops here.
const U_MAX: f64 = 1e6;
const BISECT_ITERS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
struct Group {
    rate: f64,
    // coefficient of u^i at index i; last entry non-zero
    poly: Vec<f64>,
}

fn horner(poly: &[f64], u: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

fn trim(poly: &mut Vec<f64>) {
    while poly.last() == Some(&0.0) {
        poly.pop();
    }
}

/// Sign of a polynomial as `u -> -inf` (`toward_neg`) or `u -> +inf`.
fn poly_sign_at_infinity(poly: &[f64], toward_neg: bool) -> i8 {
    let lead = *poly.last().expect("trimmed polynomial is non-empty");
    let deg = poly.len() - 1;
    let mut s = if lead > 0.0 { 1 } else { -1 };
    if toward_neg && deg % 2 == 1 {
        s = -s;
    }
    s
}

/// Limit of a polynomial-times-exponential as `u -> +-inf` where it is the
/// dominant group.
fn dominant_limit(g: &Group, toward_neg: bool) -> f64 {
    let s = poly_sign_at_infinity(&g.poly, toward_neg) as f64;
    let decays = if toward_neg { g.rate > 0.0 } else { g.rate < 0.0 };
    if g.rate == 0.0 && g.poly.len() == 1 {
        g.poly[0]
    } else if decays {
        0.0
    } else {
        s * f64::INFINITY
    }
}

/// `sum_j P_j(u) e^{a_j u}` with distinct rates in increasing order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    groups: Vec<Group>,
}

impl ExpPoly {
    /// Builds the sum of `coeff * u^degree * e^{rate u}` over the given
    /// monomials. Rates closer than [`EXP_EPS`] are merged.
    pub fn from_monomials<I: IntoIterator<Item = (f64, f64, u32)>>(monomials: I) -> Self {
        let mut groups: Vec<Group> = Vec::new();
        for (coeff, rate, degree) in monomials {
            if coeff == 0.0 {
                continue;
            }
            let rate = if rate.abs() <= EXP_EPS { 0.0 } else { rate };
            let idx = match groups.iter().position(|g| (g.rate - rate).abs() <= EXP_EPS) {
                Some(i) => i,
                None => {
                    groups.push(Group {
                        rate,
                        poly: Vec::new(),
                    });
                    groups.len() - 1
                }
            };
            let poly = &mut groups[idx].poly;
            if poly.len() <= degree as usize {
                poly.resize(degree as usize + 1, 0.0);
            }
            poly[degree as usize] += coeff;
        }
        Self::normalize(groups)
    }

    fn normalize(mut groups: Vec<Group>) -> Self {
        for g in groups.iter_mut() {
            trim(&mut g.poly);
        }
        groups.retain(|g| !g.poly.is_empty());
        groups.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        ExpPoly { groups }
    }

    pub fn is_zero(&self) -> bool {
        self.groups.is_empty()
    }

    /// True when the function is a non-zero constant.
    pub fn is_constant(&self) -> bool {
        self.groups.len() == 1 && self.groups[0].rate == 0.0 && self.groups[0].poly.len() == 1
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.groups
            .iter()
            .map(|g| horner(&g.poly, u) * exp(g.rate * u))
            .sum()
    }

    /// Sign of `h(u)`, evaluated with the largest term factored out so that
    /// it stays reliable where the individual exponentials overflow.
    pub fn sign_at(&self, u: f64) -> i8 {
        let mut best = f64::NEG_INFINITY;
        let mut parts: Vec<(f64, f64)> = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let v = horner(&g.poly, u);
            if v == 0.0 {
                continue;
            }
            let l = ln(v.abs()) + g.rate * u;
            best = best.max(l);
            parts.push((v.signum(), l));
        }
        let sum: f64 = parts.iter().map(|&(s, l)| s * exp(l - best)).sum();
        if sum > 0.0 {
            1
        } else if sum < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Sign as `u -> -inf`; zero only for the zero function.
    pub fn sign_at_neg_inf(&self) -> i8 {
        self.groups
            .first()
            .map_or(0, |g| poly_sign_at_infinity(&g.poly, true))
    }

    /// Sign as `u -> +inf`; zero only for the zero function.
    pub fn sign_at_pos_inf(&self) -> i8 {
        self.groups
            .last()
            .map_or(0, |g| poly_sign_at_infinity(&g.poly, false))
    }

    /// `lim_{u -> -inf} h(u)`, possibly infinite.
    pub fn limit_neg_inf(&self) -> f64 {
        self.groups.first().map_or(0.0, |g| dominant_limit(g, true))
    }

    /// `lim_{u -> +inf} h(u)`, possibly infinite.
    pub fn limit_pos_inf(&self) -> f64 {
        self.groups.last().map_or(0.0, |g| dominant_limit(g, false))
    }

    /// Rate and polynomial degree of the group dominating as `u -> -inf`.
    pub fn dominant_neg(&self) -> Option<(f64, usize)> {
        self.groups.first().map(|g| (g.rate, g.poly.len() - 1))
    }

    /// Rate and polynomial degree of the group dominating as `u -> +inf`.
    pub fn dominant_pos(&self) -> Option<(f64, usize)> {
        self.groups.last().map(|g| (g.rate, g.poly.len() - 1))
    }

    /// Leading coefficient of the dominant group toward `-inf` or `+inf`.
    pub fn dominant_coeff(&self, toward_neg: bool) -> Option<f64> {
        let g = if toward_neg {
            self.groups.first()
        } else {
            self.groups.last()
        }?;
        g.poly.last().copied()
    }

    /// `dh/du`.
    pub fn derivative(&self) -> ExpPoly {
        let groups = self
            .groups
            .iter()
            .map(|g| Group {
                rate: g.rate,
                poly: differentiate(&g.poly, g.rate),
            })
            .collect();
        Self::normalize(groups)
    }

    /// `d/du (e^{-a_0 u} h)` where `a_0` is the smallest rate. Has the same
    /// sign structure as needed for Rolle and strictly fewer coefficients.
    fn reduced_derivative(&self) -> ExpPoly {
        let base = self.groups[0].rate;
        let groups = self
            .groups
            .iter()
            .map(|g| {
                let rate = g.rate - base;
                Group {
                    rate,
                    poly: differentiate(&g.poly, rate),
                }
            })
            .collect();
        Self::normalize(groups)
    }

    fn sign_at_end(&self, u: f64) -> i8 {
        if u == f64::NEG_INFINITY {
            self.sign_at_neg_inf()
        } else if u == f64::INFINITY {
            self.sign_at_pos_inf()
        } else {
            self.sign_at(u)
        }
    }

    /// All roots in the open interval `(lo, hi)`, increasing. Either end may
    /// be infinite. The zero function reports no roots.
    pub fn roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if self.groups.is_empty() || lo >= hi {
            return out;
        }
        if self.groups.len() == 1 && self.groups[0].poly.len() == 1 {
            return out;
        }
        let crit = self.reduced_derivative().roots(lo, hi);
        let mut pts = vec![lo];
        pts.extend(crit);
        pts.push(hi);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a >= b {
                continue;
            }
            let sa = self.sign_at_end(a);
            let sb = self.sign_at_end(b);
            if sa == 0 && a > lo {
                out.push(a);
            }
            if sa * sb < 0 {
                if let Some(r) = self.bracketed_root(a, b, sa, sb) {
                    out.push(r);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// The root in `(lo, hi)` given opposite signs `s_lo`, `s_hi` at the ends
    /// (limits for infinite ends). `None` if an infinite end could not be
    /// bracketed within `|u| <= 1e6`.
    pub fn bracketed_root(&self, lo: f64, hi: f64, s_lo: i8, s_hi: i8) -> Option<f64> {
        debug_assert!(s_lo * s_hi < 0);
        let (mut a, mut b) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo, hi),
            _ => {
                let m = match (lo.is_finite(), hi.is_finite()) {
                    (false, false) => 0.0,
                    (false, true) => hi - 1.0,
                    _ => lo + 1.0,
                };
                let sm = self.sign_at(m);
                if sm == 0 {
                    return Some(m);
                }
                if sm == s_lo {
                    (m, if hi.is_finite() { hi } else { self.expand(m, 1.0, s_hi)? })
                } else {
                    (if lo.is_finite() { lo } else { self.expand(m, -1.0, s_lo)? }, m)
                }
            }
        };
        if a.is_nan() || b.is_nan() {
            return None;
        }
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let s = self.sign_at(mid);
            if s == 0 {
                return Some(mid);
            }
            if s == s_lo {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }

    // Walks from `start` in `direction` with doubling steps until the sign
    // equals `target`.
    fn expand(&self, start: f64, direction: f64, target: i8) -> Option<f64> {
        let mut step = 1.0;
        loop {
            let x = start + direction * step;
            if x.abs() > U_MAX {
                return None;
            }
            let s = self.sign_at(x);
            if s == target || s == 0 {
                return Some(x);
            }
            step *= 2.0;
        }
    }
}

fn differentiate(poly: &[f64], rate: f64) -> Vec<f64> {
    // d/du (P(u) e^{rate u}) = (P'(u) + rate P(u)) e^{rate u}
    let mut out: Vec<f64> = poly.iter().map(|&c| rate * c).collect();
    for (i, &c) in poly.iter().enumerate().skip(1) {
        out[i - 1] += i as f64 * c;
    }
    trim(&mut out);
    out
}
