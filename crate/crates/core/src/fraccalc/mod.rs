//! One-dimensional fractional calculus: Gamma function, Riemann–Liouville
//! integrals and Caputo / Riemann–Liouville derivatives of analytic
//! functions, evaluated by composite Gauss quadrature.
//!
//! All operators are left-sided with lower limit `a`. The interval `[a, x]`
//! is split into `panels` equal panels. The panel touching `x` carries the
//! kernel singularity `(x - t)^{β-1}` and uses Gauss–Jacobi with that
//! weight; the remaining panels use Gauss–Legendre on the full integrand.

mod quadrature;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::{Axis, Box3};
use crate::error::{FdecError, Result};
use crate::forms::Component;

pub use quadrature::{gauss_jacobi, gauss_legendre, GaussRule};

/// Γ(x) for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(FdecError::InvalidArgument(format!(
            "gamma_fn requires a finite positive argument, got {x}"
        )));
    }
    if x.fract() == 0.0 && x <= 30.0 {
        return Ok((2..x as u64).fold(1.0, |acc, k| acc * k as f64));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// Checks a derivative order `α ∈ (0, 1)`.
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(FdecError::InvalidOrder {
            value: alpha,
            reason: "derivative order must lie in (0, 1)",
        })
    }
}

/// Checks an integral order `β > 0`.
pub fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(FdecError::InvalidOrder {
            value: beta,
            reason: "integral order must be positive",
        })
    }
}

/// Quadrature budget: Gauss points per panel and panels per integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub points: usize,
    pub panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            points: 16,
            panels: 4,
        }
    }
}

impl QuadratureSpec {
    pub fn new(points: usize, panels: usize) -> Result<Self> {
        let spec = Self { points, panels };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(FdecError::InvalidArgument(format!(
                "quadrature needs at least 2 points per panel, got {}",
                self.points
            )));
        }
        if self.panels < 1 {
            return Err(FdecError::InvalidArgument(
                "quadrature needs at least one panel".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for QuadratureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.points, self.panels)
    }
}

fn check_interval(a: f64, x: f64) -> Result<()> {
    if !(a.is_finite() && x.is_finite()) || x < a {
        return Err(FdecError::InvalidArgument(format!(
            "evaluation point {x} lies below the lower limit {a}"
        )));
    }
    Ok(())
}

/// `I^β g(x) = 1/Γ(β) ∫_a^x (x-t)^{β-1} g(t) dt` with precomputed rules.
#[derive(Debug, Clone)]
pub struct RlIntegrator {
    beta: f64,
    panels: usize,
    interior: GaussRule,
    singular: GaussRule,
    inv_gamma: f64,
}

impl RlIntegrator {
    pub fn new(beta: f64, spec: QuadratureSpec) -> Result<Self> {
        check_beta(beta)?;
        spec.validate()?;
        Ok(Self {
            beta,
            panels: spec.panels,
            interior: gauss_legendre(spec.points)?,
            singular: gauss_jacobi(spec.points, beta - 1.0, 0.0)?,
            inv_gamma: 1.0 / gamma_fn(beta)?,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64, a: f64, x: f64) -> Result<f64> {
        check_interval(a, x)?;
        Ok(self.integrate_unchecked(g, a, x))
    }

    /// Same as [`RlIntegrator::integrate`] for callers that already
    /// validated `a <= x`.
    pub(crate) fn integrate_unchecked(&self, g: impl Fn(f64) -> f64, a: f64, x: f64) -> f64 {
        if x <= a {
            return 0.0;
        }
        let beta = self.beta;
        let len = (x - a) / self.panels as f64;
        let half = 0.5 * len;
        let mut sum = 0.0;
        for k in 0..self.panels - 1 {
            let lo = a + k as f64 * len;
            let mid = lo + half;
            sum += half
                * self
                    .interior
                    .apply(|s| {
                        let t = mid + half * s;
                        (x - t).powf(beta - 1.0) * g(t)
                    });
        }
        let mid = x - half;
        sum += half.powf(beta) * self.singular.apply(|s| g(mid + half * s));
        sum * self.inv_gamma
    }

    /// Nodes and weights (kernel and `1/Γ(β)` included) of the rule used
    /// for `[a, x]`; empty when `x <= a`.
    pub fn rule(&self, a: f64, x: f64) -> Vec<(f64, f64)> {
        if x <= a {
            return Vec::new();
        }
        let beta = self.beta;
        let len = (x - a) / self.panels as f64;
        let half = 0.5 * len;
        let mut out = Vec::with_capacity(self.panels * self.interior.len());
        for k in 0..self.panels - 1 {
            let mid = a + k as f64 * len + half;
            for (&s, &w) in self.interior.nodes.iter().zip(&self.interior.weights) {
                let t = mid + half * s;
                out.push((t, half * w * (x - t).powf(beta - 1.0) * self.inv_gamma));
            }
        }
        let mid = x - half;
        let scale = half.powf(beta) * self.inv_gamma;
        for (&s, &w) in self.singular.nodes.iter().zip(&self.singular.weights) {
            out.push((mid + half * s, scale * w));
        }
        out
    }
}

/// `1/Γ(β) ∫_a^x (x-t)^{β-1} (t-a)^μ g(t) dt` for smooth `g`, `μ > -1`.
///
/// Used for integrands carrying an algebraic factor at the lower limit,
/// e.g. `I^β` of a fractional integral or of a Riemann–Liouville derivative.
#[derive(Debug, Clone)]
pub struct EndpointIntegrator {
    beta: f64,
    mu: f64,
    panels: usize,
    interior: GaussRule,
    upper: GaussRule,
    lower: GaussRule,
    both: GaussRule,
    inv_gamma: f64,
}

impl EndpointIntegrator {
    pub fn new(beta: f64, mu: f64, spec: QuadratureSpec) -> Result<Self> {
        check_beta(beta)?;
        spec.validate()?;
        if !(mu > -1.0) {
            return Err(FdecError::InvalidArgument(format!(
                "endpoint exponent must exceed -1, got {mu}"
            )));
        }
        Ok(Self {
            beta,
            mu,
            panels: spec.panels,
            interior: gauss_legendre(spec.points)?,
            upper: gauss_jacobi(spec.points, beta - 1.0, 0.0)?,
            lower: gauss_jacobi(spec.points, 0.0, mu)?,
            both: gauss_jacobi(spec.points, beta - 1.0, mu)?,
            inv_gamma: 1.0 / gamma_fn(beta)?,
        })
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64, a: f64, x: f64) -> Result<f64> {
        check_interval(a, x)?;
        if x == a {
            return Ok(0.0);
        }
        let (beta, mu) = (self.beta, self.mu);
        if self.panels == 1 {
            let half = 0.5 * (x - a);
            let mid = a + half;
            let s = half.powf(beta + mu) * self.both.apply(|s| g(mid + half * s));
            return Ok(s * self.inv_gamma);
        }
        let len = (x - a) / self.panels as f64;
        let half = 0.5 * len;
        let mut sum = half.powf(mu + 1.0)
            * self.lower.apply(|s| {
                let t = a + half + half * s;
                (x - t).powf(beta - 1.0) * g(t)
            });
        for k in 1..self.panels - 1 {
            let mid = a + k as f64 * len + half;
            sum += half
                * self.interior.apply(|s| {
                    let t = mid + half * s;
                    (x - t).powf(beta - 1.0) * (t - a).powf(mu) * g(t)
                });
        }
        let mid = x - half;
        sum += half.powf(beta)
            * self.upper.apply(|s| {
                let t = mid + half * s;
                (t - a).powf(mu) * g(t)
            });
        Ok(sum * self.inv_gamma)
    }
}

/// `I^β g(x)` with lower limit `a`.
pub fn rl_integral_1d(
    g: impl Fn(f64) -> f64,
    beta: f64,
    a: f64,
    x: f64,
    spec: QuadratureSpec,
) -> Result<f64> {
    RlIntegrator::new(beta, spec)?.integrate(g, a, x)
}

/// Fractional derivative of order `α ∈ (0, 1]`; `α = 1` is the classical
/// derivative.
#[derive(Debug, Clone)]
pub struct FracDerivative {
    alpha: f64,
    integrator: Option<RlIntegrator>,
    inv_gamma_boundary: f64,
}

impl FracDerivative {
    pub fn new(alpha: f64, spec: QuadratureSpec) -> Result<Self> {
        if alpha == 1.0 {
            return Ok(Self {
                alpha,
                integrator: None,
                inv_gamma_boundary: 0.0,
            });
        }
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            integrator: Some(RlIntegrator::new(1.0 - alpha, spec)?),
            inv_gamma_boundary: 1.0 / gamma_fn(1.0 - alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Caputo derivative `I^{1-α} f'` given the analytic derivative `df`.
    pub fn caputo(&self, df: impl Fn(f64) -> f64, a: f64, x: f64) -> Result<f64> {
        check_interval(a, x)?;
        Ok(self.caputo_unchecked(df, a, x))
    }

    pub(crate) fn caputo_unchecked(&self, df: impl Fn(f64) -> f64, a: f64, x: f64) -> f64 {
        match &self.integrator {
            Some(integ) => integ.integrate_unchecked(df, a, x),
            None => df(x),
        }
    }

    /// Riemann–Liouville derivative from the Caputo derivative plus the
    /// boundary term `f(a) (x-a)^{-α} / Γ(1-α)`.
    pub fn riemann_liouville(&self, f_at_a: f64, df: impl Fn(f64) -> f64, a: f64, x: f64) -> Result<f64> {
        check_interval(a, x)?;
        let caputo = self.caputo_unchecked(df, a, x);
        if self.integrator.is_none() || f_at_a == 0.0 {
            return Ok(caputo);
        }
        if x == a {
            return Err(FdecError::SingularEvaluation(format!(
                "Riemann-Liouville derivative diverges at the lower limit {a} (f(a) = {f_at_a})"
            )));
        }
        Ok(caputo + f_at_a * (x - a).powf(-self.alpha) * self.inv_gamma_boundary)
    }

    fn restrict<'a>(f: &'a (dyn Fn([f64; 3]) -> f64 + Send + Sync), axis: Axis, point: [f64; 3]) -> impl Fn(f64) -> f64 + 'a {
        move |t| {
            let mut q = point;
            q[axis.index()] = t;
            f(q)
        }
    }

    /// Caputo partial of a form component along `axis`, from the domain's
    /// lower bound to `point`.
    pub fn caputo_partial(&self, comp: &Component, axis: Axis, point: [f64; 3], domain: &Box3) -> Result<f64> {
        if !domain.contains(point) {
            return Err(FdecError::OutsideDomain { point });
        }
        let df = comp.partial(axis)?;
        let a = domain.lo[axis.index()];
        Ok(self.caputo_unchecked(Self::restrict(df.as_ref(), axis, point), a, point[axis.index()]))
    }

    /// Riemann–Liouville partial of a form component along `axis`.
    pub fn rl_partial(&self, comp: &Component, axis: Axis, point: [f64; 3], domain: &Box3) -> Result<f64> {
        if !domain.contains(point) {
            return Err(FdecError::OutsideDomain { point });
        }
        let df = comp.partial(axis)?;
        let a = domain.lo[axis.index()];
        let mut lower = point;
        lower[axis.index()] = a;
        let f_a = (comp.value)(lower);
        self.riemann_liouville(f_a, Self::restrict(df.as_ref(), axis, point), a, point[axis.index()])
    }
}

/// Caputo derivative of order `α` given the analytic first derivative.
pub fn caputo_1d(df: impl Fn(f64) -> f64, alpha: f64, a: f64, x: f64, spec: QuadratureSpec) -> Result<f64> {
    FracDerivative::new(alpha, spec)?.caputo(df, a, x)
}

/// Riemann–Liouville derivative of order `α` given `f` and `f'`.
pub fn rl_derivative_1d(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    alpha: f64,
    a: f64,
    x: f64,
    spec: QuadratureSpec,
) -> Result<f64> {
    FracDerivative::new(alpha, spec)?.riemann_liouville(f(a), df, a, x)
}

/// Caputo partial `∂^α_axis` of a form component at `point`.
pub fn caputo_partial(
    comp: &Component,
    axis: Axis,
    alpha: f64,
    point: [f64; 3],
    domain: &Box3,
    spec: QuadratureSpec,
) -> Result<f64> {
    check_alpha(alpha)?;
    FracDerivative::new(alpha, spec)?.caputo_partial(comp, axis, point, domain)
}

/// Riemann–Liouville partial `D^α_axis` of a form component at `point`.
pub fn rl_partial(
    comp: &Component,
    axis: Axis,
    alpha: f64,
    point: [f64; 3],
    domain: &Box3,
    spec: QuadratureSpec,
) -> Result<f64> {
    check_alpha(alpha)?;
    FracDerivative::new(alpha, spec)?.rl_partial(comp, axis, point, domain)
}
