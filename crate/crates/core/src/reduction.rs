//! Power substitutions `s = x^kappa / kappa` that turn the weighted
//! `n`-dimensional problem into an unweighted-source problem on the line.
//!
//! With `g(s) = f(x) x^zeta` and `kappa + p zeta = alpha + n` the source norm
//! becomes `||f|| = (omega_n/2)^{1/p} ||g||_{L^p(R)}`, and the operator
//! becomes `A` times the one-dimensional operator of order `beta_red` applied
//! to `g`. The target weight turns into `|s|^{gamma_red}` up to the factor
//! `(omega_n/2) kappa^{gamma_red}`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{pow, rel_diff};
use crate::operators::{hardy_adjoint, hardy_forward};
use crate::params::SpaceParams;
use crate::profile::RadialProfile;
use crate::sharpness::{c_sharp, c_sharp_adjoint};
use crate::weaknorm::LevelSets;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Forward,
    Adjoint,
}

impl Branch {
    pub fn tag(&self) -> &'static str {
        match self {
            Branch::Forward => "FORWARD",
            Branch::Adjoint => "ADJOINT",
        }
    }
}

/// The one-dimensional problem a weighted tuple reduces to, together with
/// the substitution that produces it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    pub gamma_red: f64,
    /// Always zero: the source weight is absorbed by the substitution.
    pub alpha_red: f64,
    pub beta_red: f64,
    pub branch: Branch,
    /// `kappa` in `s = x^kappa / kappa`.
    pub exponent: f64,
    /// `zeta` in `g(s) = f(x) x^zeta`.
    pub weight: f64,
    source: SpaceParams,
}

impl ReducedParams {
    /// The tuple this was reduced from.
    pub fn source(&self) -> &SpaceParams {
        &self.source
    }

    /// `(gamma_red+1)/q + beta_red - 1/p`.
    pub fn residual(&self) -> f64 {
        (self.gamma_red + 1.0) / self.source.q + self.beta_red - 1.0 / self.source.p
    }

    /// The reduced tuple as parameters on the line.
    pub fn one_dim(&self) -> SpaceParams {
        let s = &self.source;
        SpaceParams::unchecked(1, s.p, s.q, 0.0, self.beta_red, self.gamma_red)
    }

    /// `s(x)`.
    pub fn substitute(&self, x: f64) -> f64 {
        pow(x, self.exponent) / self.exponent
    }

    /// `x(s)`.
    pub fn invert(&self, s: f64) -> f64 {
        pow(self.exponent * s, 1.0 / self.exponent)
    }

    /// `g(s) = f(x) x^zeta`.
    pub fn transform(&self, f: &RadialProfile) -> Result<RadialProfile> {
        f.substitute(1.0 / self.exponent, self.exponent, self.weight)
    }

    /// Inverse of [`transform`](Self::transform): `f(x) = g(s(x)) x^{-zeta}`.
    pub fn pull_back(&self, g: &RadialProfile) -> Result<RadialProfile> {
        let k = self.exponent;
        let z = -self.weight / k;
        Ok(g.substitute(pow(k, 1.0 / k), 1.0 / k, z)?.scale(pow(k, z)))
    }

    /// `A` with `H f(x) = A (H_red g)(s(x))`, where `H_red` is the operator of
    /// order `beta_red` on the line.
    pub fn operator_factor(&self) -> f64 {
        let s = &self.source;
        let n = s.nf();
        let b = self.beta_red;
        n * pow(s.geom().v_n, s.beta / n) * pow(self.exponent, b - 1.0) * pow(2.0, -b)
    }

    /// `Phi` with `ratio_n(f) = Phi ratio_1(g)` for every `f`.
    pub fn ratio_factor(&self) -> f64 {
        let s = &self.source;
        let half_omega = s.geom().omega_n / 2.0;
        self.operator_factor()
            * pow(half_omega, 1.0 / s.q - 1.0 / s.p)
            * pow(self.exponent, self.gamma_red / s.q)
    }

    /// `kappa^{-(1/p' + 1/q)}`, the factor between the normalized weak
    /// quantities of the two problems.
    pub fn weak_prefactor(&self) -> f64 {
        let s = &self.source;
        pow(self.exponent, -(s.inv_p_conj() + 1.0 / s.q))
    }
}

fn degenerate(what: &str) -> Error {
    Error::DegenerateSubstitution(format!("{what}: the substitution exponent is not positive"))
}

pub fn reduced_params_forward(params: &SpaceParams) -> Result<ReducedParams> {
    let SpaceParams { p, alpha, beta, gamma, .. } = *params;
    let n = params.nf();
    if p == 1.0 {
        return Err(Error::DegenerateSubstitution(
            "the forward substitution needs p > 1".into(),
        ));
    }
    let den = n * (p - 1.0) - alpha;
    if !(den > 0.0) {
        return Err(degenerate("forward"));
    }
    let kappa = den / (p - 1.0);
    Ok(ReducedParams {
        gamma_red: (gamma + n) / kappa - 1.0,
        alpha_red: 0.0,
        beta_red: (beta * (p - 1.0) - alpha) / den,
        branch: Branch::Forward,
        exponent: kappa,
        weight: alpha / (p - 1.0),
        source: *params,
    })
}

pub fn reduced_params_adjoint(params: &SpaceParams) -> Result<ReducedParams> {
    let SpaceParams { p, q, alpha, beta, .. } = *params;
    let n = params.nf();
    let c = alpha + n - p * beta;
    if !(c > 0.0) {
        return Err(Error::AdjointConstraint((alpha + n) / p - beta));
    }
    let theta = n * c / (n - beta);
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(degenerate("adjoint"));
    }
    Ok(ReducedParams {
        gamma_red: q * (n - beta) / (p * n) - 1.0,
        alpha_red: 0.0,
        beta_red: beta / (p * n),
        branch: Branch::Adjoint,
        exponent: theta,
        weight: beta * (n * p - alpha - n) / ((n - beta) * p),
        source: *params,
    })
}

pub fn reduced_params(params: &SpaceParams, branch: Branch) -> Result<ReducedParams> {
    match branch {
        Branch::Forward => reduced_params_forward(params),
        Branch::Adjoint => reduced_params_adjoint(params),
    }
}

fn check_point(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(x));
    }
    Ok(())
}

pub fn substitute_forward(x: f64, params: &SpaceParams) -> Result<f64> {
    check_point(x)?;
    Ok(reduced_params_forward(params)?.substitute(x))
}

pub fn inverse_forward(s: f64, params: &SpaceParams) -> Result<f64> {
    check_point(s)?;
    Ok(reduced_params_forward(params)?.invert(s))
}

pub fn substitute_adjoint(x: f64, params: &SpaceParams) -> Result<f64> {
    check_point(x)?;
    Ok(reduced_params_adjoint(params)?.substitute(x))
}

pub fn inverse_adjoint(s: f64, params: &SpaceParams) -> Result<f64> {
    check_point(s)?;
    Ok(reduced_params_adjoint(params)?.invert(s))
}

pub fn transform_profile_forward(f: &RadialProfile, params: &SpaceParams) -> Result<RadialProfile> {
    reduced_params_forward(params)?.transform(f)
}

pub fn transform_profile_adjoint(f: &RadialProfile, params: &SpaceParams) -> Result<RadialProfile> {
    reduced_params_adjoint(params)?.transform(f)
}

/// Both sides of `int f^p x^{alpha+n-1} dx = int g^p ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormComparison {
    pub weighted: f64,
    pub reduced: f64,
    pub residual: f64,
}

pub fn norm_preservation(f: &RadialProfile, params: &SpaceParams, branch: Branch) -> Result<NormComparison> {
    let red = reduced_params(params, branch)?;
    let g = red.transform(f)?;
    let weighted = f.power_integral(params.p, params.alpha + params.nf() - 1.0);
    let reduced = g.power_integral(params.p, 0.0);
    Ok(NormComparison {
        weighted,
        reduced,
        residual: rel_diff(weighted, reduced),
    })
}

/// One point of the weak-quantity comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutationRow {
    pub lambda: f64,
    /// `lambda (mu_gamma(|H f| > n v_n^{beta/n} lambda) / omega_n)^{1/q}`.
    pub direct: f64,
    /// The prefactor times the same quantity for the reduced problem at the
    /// rescaled level `kappa^{1-beta_red} lambda`.
    pub reduced: f64,
    pub residual: f64,
}

/// Evaluates the weak quantity of `f` in `n` dimensions and of its transform
/// on the line at each `lambda`, and compares them.
pub fn commutation_check(
    f: &RadialProfile,
    params: &SpaceParams,
    branch: Branch,
    lambdas: &[f64],
) -> Result<Vec<CommutationRow>> {
    let red = reduced_params(params, branch)?;
    let line = red.one_dim();
    let g = red.transform(f)?;
    let (hf, hg) = match branch {
        Branch::Forward => (hardy_forward(f, params)?, hardy_forward(&g, &line)?),
        Branch::Adjoint => (hardy_adjoint(f, params)?, hardy_adjoint(&g, &line)?),
    };
    let n = params.nf();
    let geo = params.geom();
    let inv_q = 1.0 / params.q;
    let sets_n = LevelSets::new(&hf, params.gamma, params.n)?;
    let sets_1 = LevelSets::new(&hg, red.gamma_red, 1)?;
    let level_n = n * pow(geo.v_n, params.beta / n);
    let level_1 = pow(2.0, red.beta_red);
    let shift = pow(red.exponent, 1.0 - red.beta_red);
    let pre = red.weak_prefactor();
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(Error::Range(format!("levels must be positive, got {lambda}")));
            }
            let direct = lambda * pow(sets_n.measure(level_n * lambda, true)? / geo.omega_n, inv_q);
            let l1 = shift * lambda;
            let reduced = pre * l1 * pow(sets_1.measure(level_1 * l1, true)? / 2.0, inv_q);
            Ok(CommutationRow {
                lambda,
                direct,
                reduced,
                residual: rel_diff(direct, reduced),
            })
        })
        .collect()
}

/// The sharp constant rebuilt from the constant of the reduced problem,
/// `Phi C_red`.
pub fn reconstructed_constant(params: &SpaceParams, branch: Branch) -> Result<f64> {
    let red = reduced_params(params, branch)?;
    let line = red.one_dim();
    let c1 = match branch {
        Branch::Forward => c_sharp(&line),
        Branch::Adjoint => c_sharp_adjoint(&line),
    };
    Ok(red.ratio_factor() * c1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_adjoint, validate_forward, RawParams};
    use crate::weaknorm::weak_norm;
    use crate::profile::lp_weighted_norm;

    fn fwd(n: i64, p: f64, q: f64, alpha: f64, beta: f64) -> SpaceParams {
        validate_forward(&RawParams { gamma: None, ..RawParams::full(n, p, q, alpha, beta, 0.0) }).unwrap()
    }

    fn adj(n: i64, p: f64, q: f64, alpha: f64, beta: f64) -> SpaceParams {
        validate_adjoint(&RawParams { gamma: None, ..RawParams::full(n, p, q, alpha, beta, 0.0) }).unwrap()
    }

    #[test]
    fn substitution_examples() {
        let sp = fwd(3, 2.0, 3.0, 0.0, 0.5);
        assert!(rel_diff(substitute_forward(1.7, &sp).unwrap(), 1.7f64.powi(3) / 3.0) < 1e-15);
        let sp = fwd(1, 2.0, 4.0, -0.5, 0.0);
        assert!(rel_diff(substitute_forward(2.0, &sp).unwrap(), 2.0 / 3.0 * 2f64.powf(1.5)) < 1e-15);
        let s = substitute_forward(0.37, &sp).unwrap();
        assert!(rel_diff(inverse_forward(s, &sp).unwrap(), 0.37) < 1e-12);

        let sp = adj(2, 2.0, 2.0, 0.0, 0.0);
        assert!(rel_diff(substitute_adjoint(1.3, &sp).unwrap(), 1.69 / 2.0) < 1e-15);
        let sp = adj(1, 2.0, 4.0, 0.0, 0.25);
        assert!(rel_diff(substitute_adjoint(2.0, &sp).unwrap(), 1.5 * 2f64.powf(2.0 / 3.0)) < 1e-15);
        let s = substitute_adjoint(5.5, &sp).unwrap();
        assert!(rel_diff(inverse_adjoint(s, &sp).unwrap(), 5.5) < 1e-12);
    }

    #[test]
    fn p_one_forward_is_degenerate() {
        let sp = fwd(2, 1.0, 2.0, 0.0, 1.0);
        assert_eq!(reduced_params_forward(&sp).unwrap_err().tag(), "DegenerateSubstitutionError");
        assert_eq!(substitute_forward(1.0, &sp).unwrap_err().tag(), "DegenerateSubstitutionError");
    }

    #[test]
    fn reduced_parameter_examples() {
        let sp = validate_forward(&RawParams::full(2, 2.0, 2.0, 0.0, 0.5, -1.0)).unwrap();
        let r = reduced_params_forward(&sp).unwrap();
        assert!((r.gamma_red + 0.5).abs() < 1e-15 && (r.beta_red - 0.25).abs() < 1e-15);
        assert!(r.residual().abs() < 1e-12);

        let sp = fwd(2, 3.0, 4.0, 0.5, 0.25);
        assert_eq!(reduced_params_forward(&sp).unwrap().beta_red, 0.0);

        let sp = adj(2, 2.0, 2.0, 0.0, 0.5);
        let r = reduced_params_adjoint(&sp).unwrap();
        assert!((r.gamma_red + 0.25).abs() < 1e-15 && (r.beta_red - 0.125).abs() < 1e-15);
        assert!(r.residual().abs() < 1e-12);

        let sp = adj(3, 2.0, 3.0, 0.0, 0.0);
        let r = reduced_params_adjoint(&sp).unwrap();
        assert!((r.gamma_red - 0.5).abs() < 1e-15 && r.beta_red == 0.0);
    }

    #[test]
    fn transform_examples() {
        let sp = fwd(2, 2.0, 2.0, 0.0, 0.0);
        let g = transform_profile_forward(&RadialProfile::indicator(0.0, 1.0).unwrap(), &sp).unwrap();
        assert_eq!(g, RadialProfile::indicator(0.0, 0.5).unwrap());

        // the weight cancels
        let sp = fwd(1, 2.0, 4.0, -0.5, 0.0);
        let f = RadialProfile::power(1.0, 0.5, 1.0, 2.0).unwrap();
        let g = transform_profile_forward(&f, &sp).unwrap();
        let red = reduced_params_forward(&sp).unwrap();
        let [piece] = g.pieces() else { panic!("one piece") };
        assert!(rel_diff(piece.lo, red.substitute(1.0)) < 1e-15);
        assert!(rel_diff(piece.hi, red.substitute(2.0)) < 1e-15);
        assert!(rel_diff(g.evaluate(1.0).unwrap(), 1.0) < 1e-14);
        assert!(piece.terms[0].exponent.abs() < 1e-15);

        let back = red.pull_back(&g).unwrap();
        for &x in &[1.1, 1.5, 1.99] {
            assert!(rel_diff(back.evaluate(x).unwrap(), f.evaluate(x).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn ratio_factor_links_both_problems() {
        let sp = fwd(2, 2.0, 3.0, -0.5, 0.4);
        let red = reduced_params_forward(&sp).unwrap();
        let g = RadialProfile::power(1.0, -0.2, 0.3, 1.4).unwrap();
        let f = red.pull_back(&g).unwrap();
        let line = red.one_dim();
        let rn = weak_norm(&hardy_forward(&f, &sp).unwrap(), &sp).unwrap().value / lp_weighted_norm(&f, &sp);
        let r1 = weak_norm(&hardy_forward(&g, &line).unwrap(), &line).unwrap().value / lp_weighted_norm(&g, &line);
        assert!(rel_diff(rn, red.ratio_factor() * r1) < 1e-10, "{rn} vs {}", red.ratio_factor() * r1);
    }

    #[test]
    fn constants_are_reconstructed() {
        for sp in [fwd(2, 2.0, 3.0, -0.5, 0.4), fwd(3, 1.5, 2.5, 0.1, 0.5), fwd(1, 2.0, 4.0, -0.5, 0.0)] {
            assert!(rel_diff(reconstructed_constant(&sp, Branch::Forward).unwrap(), c_sharp(&sp)) < 1e-12);
        }
        for sp in [adj(2, 2.0, 3.0, 0.7, 0.4), adj(3, 1.0, 2.5, -0.5, 0.5), adj(1, 3.0, 4.0, 0.0, 0.1)] {
            let c = reconstructed_constant(&sp, Branch::Adjoint).unwrap();
            assert!(rel_diff(c, c_sharp_adjoint(&sp)) < 1e-12);
        }
    }
}
