//! Gauss rules on [-1, 1] via the Golub–Welsch eigenvalue method.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{FdecError, Result};
use crate::fraccalc::gamma_fn;

/// Nodes (ascending) and weights of an interpolatory rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f` on [-1, 1].
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }
}

/// Gauss–Legendre rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> Result<GaussRule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Gauss–Jacobi rule with `n` nodes for the weight `(1-s)^a (1+s)^b`,
/// `a, b > -1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<GaussRule> {
    if n == 0 {
        return Err(FdecError::InvalidArgument(
            "quadrature rule needs at least one node".into(),
        ));
    }
    if !(a > -1.0 && b > -1.0 && a.is_finite() && b.is_finite()) {
        return Err(FdecError::InvalidArgument(format!(
            "Jacobi exponents must exceed -1, got a={a}, b={b}"
        )));
    }
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let off_sq = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                let s = 2.0 * m + ab;
                4.0 * m * (m + a) * (m + b) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            let off = off_sq.sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma_fn(a + 1.0)? * gamma_fn(b + 1.0)? / gamma_fn(ab + 2.0)?;
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(5).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for k in 0..10 {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((r.apply(|s| s.powi(k)) - exact).abs() < 1e-14, "k={k}");
        }
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_moments_match_beta_integrals() {
        // ∫ (1-s)^a (1+s)^b (1+s)^k ds = 2^{a+b+k+1} B(a+1, b+k+1)
        for &(a, b) in &[(-0.5, 0.0), (0.0, -0.75), (-0.1, 0.3), (0.5, -0.9), (-0.9, -0.9)] {
            let r = gauss_jacobi(7, a, b).unwrap();
            for k in 0..14 {
                let kf = k as f64;
                let exact = 2f64.powf(a + b + kf + 1.0) * gamma_fn(a + 1.0).unwrap() * gamma_fn(b + kf + 1.0).unwrap()
                    / gamma_fn(a + b + kf + 2.0).unwrap();
                let got = r.apply(|s| (1.0 + s).powi(k));
                assert!(((got - exact) / exact).abs() < 5e-13, "a={a} b={b} k={k}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn odd_degree_asymmetric_rule_has_no_forced_zero_node() {
        let r = gauss_jacobi(3, -0.5, 0.0).unwrap();
        assert!(r.nodes.iter().all(|&s| s.abs() > 1e-3));
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gauss_jacobi(0, 0.0, 0.0).is_err());
        assert!(gauss_jacobi(4, -1.0, 0.0).is_err());
        assert!(gauss_jacobi(4, 0.0, f64::NAN).is_err());
    }
}
