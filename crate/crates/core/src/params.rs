//! Parameter tuples `(n, p, q, alpha, beta, gamma)` for the weighted spaces
//! `L^p(|x|^alpha) -> L^{q,inf}(|x|^gamma)` and the scaling relation
//! `(gamma+n)/q + beta = (alpha+n)/p` tying them together.

use alloc::format;

use crate::error::{Error, Result};
use crate::math::PI;

/// Absolute tolerance on the scaling-relation residual.
pub const RELATION_TOL: f64 = 1e-12;

/// Volume of the unit ball and area of the unit sphere in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomConstants {
    pub v_n: f64,
    pub omega_n: f64,
}

/// Volume `v_n` and sphere area `omega_n = n v_n`.
///
/// Uses the recurrence `v_n = 2 pi v_{n-2} / n` from `v_0 = 1`, `v_1 = 2`,
/// which is exact up to one rounding per step.
pub fn geom(n: u32) -> Result<GeomConstants> {
    if n == 0 {
        return Err(Error::Dimension(0));
    }
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    Ok(GeomConstants {
        v_n: v,
        omega_n: n as f64 * v,
    })
}

/// Conjugate exponent `p/(p-1)`; `p = 1` maps to `f64::INFINITY`.
pub fn conjugate(p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Range(format!("p must lie in [1, inf), got {p}")));
    }
    if p == 1.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(p / (p - 1.0))
    }
}

/// `1/p'` computed as `1 - 1/p`, exactly zero at `p = 1`.
pub fn inv_conjugate(p: f64) -> f64 {
    1.0 - 1.0 / p
}

/// A parameter tuple as typed by a user: at most one of `q`, `alpha`, `gamma`
/// may be left out and is then solved from the scaling relation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RawParams {
    pub n: i64,
    pub p: f64,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub gamma: Option<f64>,
}

impl RawParams {
    pub fn full(n: i64, p: f64, q: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        RawParams {
            n,
            p,
            q: Some(q),
            alpha: Some(alpha),
            beta,
            gamma: Some(gamma),
        }
    }
}

/// A validated tuple. Construct through [`validate_forward`],
/// [`validate_adjoint`] or [`validate_lebesgue`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceParams {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SpaceParams {
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn geom(&self) -> GeomConstants {
        geom(self.n).expect("validated params have n >= 1")
    }

    /// `1/p'`, zero at `p = 1`.
    pub fn inv_p_conj(&self) -> f64 {
        inv_conjugate(self.p)
    }

    /// `(gamma+n)/q + beta - (alpha+n)/p`.
    pub fn residual(&self) -> f64 {
        let n = self.nf();
        (self.gamma + n) / self.q + self.beta - (self.alpha + n) / self.p
    }

    /// The same tuple with `alpha` and `gamma` replaced and nothing re-checked.
    /// Used internally for reduced one-dimensional problems.
    pub(crate) fn unchecked(n: u32, p: f64, q: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        SpaceParams {
            n,
            p,
            q,
            alpha,
            beta,
            gamma,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Branch {
    Forward,
    Adjoint,
}

fn check_common_ranges(raw: &RawParams) -> Result<u32> {
    if raw.n < 1 || raw.n > u32::MAX as i64 {
        return Err(Error::Dimension(raw.n));
    }
    let n = raw.n as f64;
    if !(raw.p >= 1.0) || !raw.p.is_finite() {
        return Err(Error::Range(format!("p must lie in [1, inf), got {}", raw.p)));
    }
    if !(raw.beta >= 0.0 && raw.beta < n) {
        return Err(Error::Range(format!(
            "beta must lie in [0, n) = [0, {n}), got {}",
            raw.beta
        )));
    }
    if let Some(q) = raw.q {
        check_q(q)?;
    }
    if let Some(g) = raw.gamma {
        check_gamma(g, n)?;
    }
    if let Some(a) = raw.alpha {
        if !a.is_finite() {
            return Err(Error::Range(format!("alpha must be finite, got {a}")));
        }
    }
    Ok(raw.n as u32)
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::Range(format!("q must lie in (1, inf), got {q}")));
    }
    Ok(())
}

fn check_gamma(g: f64, n: f64) -> Result<()> {
    if !(g > -n) || !g.is_finite() {
        return Err(Error::Range(format!("gamma must exceed -n = {}, got {g}", -n)));
    }
    Ok(())
}

fn validate(raw: &RawParams, branch: Branch) -> Result<SpaceParams> {
    let n_int = check_common_ranges(raw)?;
    let n = n_int as f64;
    let (p, beta) = (raw.p, raw.beta);
    let missing = raw.q.is_none() as u8 + raw.alpha.is_none() as u8 + raw.gamma.is_none() as u8;
    if missing > 1 {
        return Err(Error::Scaling(format!(
            "{missing} of q, alpha, gamma are unspecified; at most one can be solved for"
        )));
    }

    let (q, alpha, gamma) = match (raw.q, raw.alpha, raw.gamma) {
        (None, Some(alpha), Some(gamma)) => {
            let rhs = (alpha + n) / p - beta;
            if rhs <= 0.0 {
                return Err(match branch {
                    Branch::Adjoint => Error::AdjointConstraint(rhs),
                    Branch::Forward => Error::Scaling(format!(
                        "(alpha+n)/p - beta = {rhs} <= 0 admits no finite q"
                    )),
                });
            }
            let q = (gamma + n) / rhs;
            check_q(q)?;
            (q, alpha, gamma)
        }
        (Some(q), Some(alpha), None) => {
            let gamma = q * ((alpha + n) / p - beta) - n;
            check_gamma(gamma, n)?;
            (q, alpha, gamma)
        }
        (Some(q), None, Some(gamma)) => {
            let alpha = p * ((gamma + n) / q + beta) - n;
            (q, alpha, gamma)
        }
        (Some(q), Some(alpha), Some(gamma)) => (q, alpha, gamma),
        _ => unreachable!("at most one member is missing"),
    };

    let params = SpaceParams {
        n: n_int,
        p,
        q,
        alpha,
        beta,
        gamma,
    };
    match branch {
        Branch::Forward => {
            let bound = beta * (p - 1.0);
            if alpha > bound {
                return Err(Error::ForwardConstraint { alpha, bound });
            }
        }
        Branch::Adjoint => {
            let rhs = (alpha + n) / p - beta;
            if rhs <= 0.0 {
                return Err(Error::AdjointConstraint(rhs));
            }
        }
    }
    let residual = params.residual();
    if !(residual.abs() <= RELATION_TOL) {
        return Err(Error::Scaling(format!("residual {residual:e}")));
    }
    Ok(params)
}

/// Validate a tuple for the forward operator: the common ranges, the scaling
/// relation and `alpha <= beta(p-1)`.
pub fn validate_forward(raw: &RawParams) -> Result<SpaceParams> {
    validate(raw, Branch::Forward)
}

/// Validate a tuple for the adjoint operator: the common ranges, the scaling
/// relation and `(alpha+n)/p - beta > 0`.
pub fn validate_adjoint(raw: &RawParams) -> Result<SpaceParams> {
    validate(raw, Branch::Adjoint)
}

/// Unweighted (`alpha = gamma = 0`) parameters for the limiting experiments,
/// with `1/q = 1/p - beta/n`. Unlike the weighted validators this admits
/// `q = 1` (the case `p = 1`, `beta = 0`).
pub fn validate_lebesgue(n: i64, p: f64, beta: f64) -> Result<SpaceParams> {
    let raw = RawParams {
        n,
        p,
        q: None,
        alpha: Some(0.0),
        beta,
        gamma: Some(0.0),
    };
    let n_int = check_common_ranges(&raw)?;
    let nf = n_int as f64;
    let inv_q = 1.0 / p - beta / nf;
    if !(inv_q > 0.0) {
        return Err(Error::Scaling(format!("1/p - beta/n = {inv_q} <= 0 admits no finite q")));
    }
    let q = if beta == 0.0 { p } else { 1.0 / inv_q };
    Ok(SpaceParams {
        n: n_int,
        p,
        q,
        alpha: 0.0,
        beta,
        gamma: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(n: i64, p: f64, q: f64, a: f64, b: f64, g: f64) -> RawParams {
        RawParams::full(n, p, q, a, b, g)
    }

    #[test]
    fn forward_examples() {
        // (gamma+1)/4 + 0 = 1/4 = (alpha+1)/2
        let sp = validate_forward(&full(1, 2.0, 4.0, -0.5, 0.0, 0.0)).unwrap();
        assert!(sp.residual().abs() < 1e-15);

        let e = validate_forward(&full(2, 1.0, 2.0, 0.0, 1.0, -2.0)).unwrap_err();
        assert_eq!(e.tag(), "RangeError");

        let e = validate_forward(&full(2, 2.0, 2.0, 1.0, 0.5, -1.0)).unwrap_err();
        assert_eq!(e.tag(), "ForwardConstraintError");
    }

    #[test]
    fn adjoint_examples() {
        validate_adjoint(&full(2, 2.0, 2.0, 0.0, 0.5, -1.0)).unwrap();

        let raw = RawParams {
            n: 1,
            p: 2.0,
            q: None,
            alpha: Some(0.0),
            beta: 0.5,
            gamma: Some(0.0),
        };
        assert_eq!(validate_adjoint(&raw).unwrap_err().tag(), "AdjointConstraintError");

        let raw = RawParams {
            n: 3,
            p: 1.0,
            q: None,
            alpha: Some(0.0),
            beta: 1.0,
            gamma: Some(0.0),
        };
        let sp = validate_adjoint(&raw).unwrap();
        assert!((sp.q - 1.5).abs() < 1e-15);
    }

    #[test]
    fn solves_each_unknown() {
        let base = full(2, 2.0, 2.0, 0.0, 0.5, -1.0);
        let mut raw = base;
        raw.gamma = None;
        assert!((validate_adjoint(&raw).unwrap().gamma + 1.0).abs() < 1e-15);
        let mut raw = base;
        raw.alpha = None;
        assert!(validate_adjoint(&raw).unwrap().alpha.abs() < 1e-15);
        let mut raw = base;
        raw.q = None;
        assert!((validate_adjoint(&raw).unwrap().q - 2.0).abs() < 1e-15);
        let mut raw = base;
        raw.q = None;
        raw.alpha = None;
        assert_eq!(validate_adjoint(&raw).unwrap_err().tag(), "ScalingError");
    }

    #[test]
    fn relation_violation_rejected() {
        let e = validate_adjoint(&full(2, 2.0, 2.0, 0.0, 0.5, -0.9)).unwrap_err();
        assert_eq!(e.tag(), "ScalingError");
        assert_eq!(validate_forward(&full(0, 2.0, 2.0, 0.0, 0.0, 0.0)).unwrap_err().tag(), "DimensionError");
        assert_eq!(validate_forward(&full(1, 0.5, 2.0, 0.0, 0.0, 0.0)).unwrap_err().tag(), "RangeError");
        assert_eq!(validate_forward(&full(1, 2.0, 1.0, 0.0, 0.0, 0.0)).unwrap_err().tag(), "RangeError");
        assert_eq!(validate_forward(&full(1, 2.0, 2.0, 0.0, 1.0, 0.0)).unwrap_err().tag(), "RangeError");
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate(2.0).unwrap(), 2.0);
        assert_eq!(conjugate(1.0).unwrap(), f64::INFINITY);
        assert!((conjugate(4.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(conjugate(0.9).unwrap_err().tag(), "RangeError");
        for &p in &[1.1, 1.5, 2.5, 7.0, 100.0] {
            let back = conjugate(conjugate(p).unwrap()).unwrap();
            assert!((back - p).abs() <= 1e-14 * p);
        }
    }

    #[test]
    fn geometry() {
        let g1 = geom(1).unwrap();
        assert_eq!((g1.v_n, g1.omega_n), (2.0, 2.0));
        let g2 = geom(2).unwrap();
        assert_eq!((g2.v_n, g2.omega_n), (PI, 2.0 * PI));
        let g3 = geom(3).unwrap();
        assert!((g3.v_n - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((g3.omega_n - 4.0 * PI).abs() < 1e-14);
        for n in 1..=20 {
            let g = geom(n).unwrap();
            assert!((g.omega_n / g.v_n - n as f64).abs() <= 1e-14 * n as f64);
            // cross-check against the Gamma-function formula
            let gamma_form =
                crate::math::exp(0.5 * n as f64 * crate::math::ln(PI) - crate::math::lgamma(0.5 * n as f64 + 1.0));
            assert!(crate::math::rel_diff(g.v_n, gamma_form) < 1e-13, "n={n}");
        }
        assert_eq!(geom(0).unwrap_err().tag(), "DimensionError");
    }

    #[test]
    fn lebesgue_allows_q_one() {
        let sp = validate_lebesgue(2, 1.0, 0.0).unwrap();
        assert_eq!(sp.q, 1.0);
        let sp = validate_lebesgue(1, 1.0, 0.5).unwrap();
        assert!((sp.q - 2.0).abs() < 1e-15);
        assert!(validate_lebesgue(1, 2.0, 0.5).is_err());
    }
}
