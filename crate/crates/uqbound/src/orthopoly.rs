//! Orthonormal polynomial families and Gauss quadrature rules.
//!
//! All weight functions are normalized to unit mass (they are probability
//! densities), so quadrature weights sum to 1 and a rule directly
//! approximates an expectation under the weight law. Nodes and weights come
//! from the eigen-decomposition of the symmetric tridiagonal Jacobi matrix
//! built from the three-term recurrence coefficients (Golub-Welsch).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The continuous polynomial families used as gPC bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Probabilists' Hermite; weight is the standard normal density.
    Hermite,
    /// Legendre; weight is the uniform density on a bounded interval.
    Legendre,
    /// Jacobi with shape parameters `alpha`, `beta` > -1; weight is
    /// proportional to (1-x)^alpha (1+x)^beta on the standard interval.
    Jacobi { alpha: f64, beta: f64 },
    /// Generalized Laguerre with `alpha` > -1; weight is the Gamma(alpha+1)
    /// density on the half line.
    Laguerre { alpha: f64 },
}

/// An orthonormal polynomial family together with the affine map that
/// carries the standard domain onto the actual support.
///
/// Standard domains: Hermite (-inf, inf), Legendre/Jacobi [-1, 1],
/// Laguerre [0, inf). The support is the image `shift + scale * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialFamily {
    kind: FamilyKind,
    shift: f64,
    scale: f64,
}

impl PolynomialFamily {
    /// Hermite family for the standard normal weight.
    pub fn hermite() -> Self {
        PolynomialFamily { kind: FamilyKind::Hermite, shift: 0.0, scale: 1.0 }
    }

    /// Hermite family for the N(mu, sigma^2) weight.
    pub fn hermite_scaled(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(PolynomialFamily { kind: FamilyKind::Hermite, shift: mu, scale: sigma })
    }

    /// Legendre family for the uniform weight on [lo, hi].
    pub fn legendre(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(PolynomialFamily {
            kind: FamilyKind::Legendre,
            shift: 0.5 * (lo + hi),
            scale: 0.5 * (hi - lo),
        })
    }

    /// Jacobi family on [lo, hi]; the weight on [lo, hi] is the affine image
    /// of (1-x)^alpha (1+x)^beta on [-1, 1], i.e. the Beta(beta+1, alpha+1)
    /// law rescaled to the interval.
    pub fn jacobi(alpha: f64, beta: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(alpha > -1.0) || !(beta > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "Jacobi shape parameters must exceed -1, got alpha={alpha}, beta={beta}"
            )));
        }
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(PolynomialFamily {
            kind: FamilyKind::Jacobi { alpha, beta },
            shift: 0.5 * (lo + hi),
            scale: 0.5 * (hi - lo),
        })
    }

    /// Laguerre family; weight is the Gamma(alpha+1, rate) density.
    pub fn laguerre(alpha: f64, rate: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "Laguerre shape parameter must exceed -1, got {alpha}"
            )));
        }
        if !(rate > 0.0) {
            return Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")));
        }
        Ok(PolynomialFamily { kind: FamilyKind::Laguerre { alpha }, shift: 0.0, scale: 1.0 / rate })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// Support of the weight law, `(lo, hi)` with infinities for unbounded
    /// directions.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            FamilyKind::Hermite => (f64::NEG_INFINITY, f64::INFINITY),
            FamilyKind::Legendre | FamilyKind::Jacobi { .. } => {
                (self.shift - self.scale, self.shift + self.scale)
            }
            FamilyKind::Laguerre { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Recurrence coefficients `(a, b)` of the symmetric three-term
    /// recurrence for the orthonormal polynomials, in the mapped variable.
    /// `a` holds the Jacobi-matrix diagonal `a_0..a_{n-1}`; `b[0] = 1`
    /// (the unit total mass) and `b[k]` for `k >= 1` are the off-diagonals.
    pub fn recurrence_coefficients(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if n == 0 {
            return Err(Error::InvalidParameter("recurrence length must be >= 1".into()));
        }
        let (mut a, mut b) = self.standard_recurrence(n);
        for ak in a.iter_mut() {
            *ak = self.shift + self.scale * *ak;
        }
        for bk in b.iter_mut().skip(1) {
            *bk *= self.scale;
        }
        Ok((a, b))
    }

    fn standard_recurrence(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        match self.kind {
            FamilyKind::Hermite => {
                for k in 1..n {
                    b[k] = (k as f64).sqrt();
                }
            }
            FamilyKind::Legendre => {
                for k in 1..n {
                    let kf = k as f64;
                    b[k] = kf / (4.0 * kf * kf - 1.0).sqrt();
                }
            }
            FamilyKind::Jacobi { alpha, beta } => {
                let s = alpha + beta;
                a[0] = (beta - alpha) / (s + 2.0);
                for k in 1..n {
                    let kf = k as f64;
                    let den = (2.0 * kf + s) * (2.0 * kf + s + 2.0);
                    a[k] = (beta * beta - alpha * alpha) / den;
                }
                if n > 1 {
                    b[1] = (4.0 * (alpha + 1.0) * (beta + 1.0)
                        / ((s + 2.0) * (s + 2.0) * (s + 3.0)))
                        .sqrt();
                }
                for k in 2..n {
                    let kf = k as f64;
                    let t = 2.0 * kf + s;
                    b[k] = (4.0 * kf * (kf + alpha) * (kf + beta) * (kf + s)
                        / (t * t * (t + 1.0) * (t - 1.0)))
                        .sqrt();
                }
            }
            FamilyKind::Laguerre { alpha } => {
                for k in 0..n {
                    let kf = k as f64;
                    a[k] = 2.0 * kf + alpha + 1.0;
                    if k >= 1 {
                        b[k] = (kf * (kf + alpha)).sqrt();
                    }
                }
            }
        }
        (a, b)
    }

    /// Value of the degree-`degree` orthonormal polynomial at `z`, by
    /// forward recurrence in the orthonormal normalization.
    pub fn evaluate_basis(&self, degree: usize, z: f64) -> Result<f64> {
        let (a, b) = self.recurrence_coefficients(degree + 1)?;
        let mut prev = 0.0;
        let mut cur = 1.0;
        for k in 0..degree {
            let next = ((z - a[k]) * cur - if k > 0 { b[k] * prev } else { 0.0 }) / b[k + 1];
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// Values of the orthonormal polynomials of degrees `0..=max_degree` at
    /// `z`, filled into a caller-visible vector (single recurrence sweep).
    pub fn evaluate_basis_all(&self, max_degree: usize, z: f64) -> Result<Vec<f64>> {
        let (a, b) = self.recurrence_coefficients(max_degree + 1)?;
        let mut out = Vec::with_capacity(max_degree + 1);
        let mut prev = 0.0;
        let mut cur = 1.0;
        out.push(cur);
        for k in 0..max_degree {
            let next = ((z - a[k]) * cur - if k > 0 { b[k] * prev } else { 0.0 }) / b[k + 1];
            prev = cur;
            cur = next;
            out.push(cur);
        }
        Ok(out)
    }
}

/// Nodes and weights of a Gauss rule for one polynomial family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    family: PolynomialFamily,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss rule with `order` nodes: exact for polynomials of degree
    /// `2*order - 1` against the family's weight law.
    pub fn gauss(family: &PolynomialFamily, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("quadrature order must be >= 1".into()));
        }
        let (a, b) = family.recurrence_coefficients(order)?;
        let mut jac = DMatrix::zeros(order, order);
        for k in 0..order {
            jac[(k, k)] = a[k];
            if k >= 1 {
                jac[(k, k - 1)] = b[k];
                jac[(k - 1, k)] = b[k];
            }
        }
        let eig = jac.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|i| {
                let q0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], q0 * q0)
            })
            .collect();
        if pairs.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
            return Err(Error::Numerical(format!(
                "eigen-solve failed for {:?} at order {order}",
                family.kind()
            )));
        }
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        // eigenvectors are unit-norm, so the weights already sum to b[0]^2 = 1
        // up to roundoff; renormalize to keep the probability invariant tight
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(QuadratureRule { family: *family, nodes, weights })
    }

    pub fn family(&self) -> &PolynomialFamily {
        &self.family
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Expectation of `f` under the weight law.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }
}

/// Full tensor product of two one-dimensional rules, r1-major ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorRule {
    rule1: QuadratureRule,
    rule2: QuadratureRule,
    nodes: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl TensorRule {
    pub fn new(rule1: QuadratureRule, rule2: QuadratureRule) -> Self {
        let n1 = rule1.order();
        let n2 = rule2.order();
        let mut nodes = Vec::with_capacity(n1 * n2);
        let mut weights = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                nodes.push([rule1.nodes[i], rule2.nodes[j]]);
                weights.push(rule1.weights[i] * rule2.weights[j]);
            }
        }
        TensorRule { rule1, rule2, nodes, weights }
    }

    pub fn rule1(&self) -> &QuadratureRule {
        &self.rule1
    }

    pub fn rule2(&self) -> &QuadratureRule {
        &self.rule2
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Expectation of `f` under the product weight law.
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(z, &w)| w * f(z[0], z[1])).sum()
    }
}
