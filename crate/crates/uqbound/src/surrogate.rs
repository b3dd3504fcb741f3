//! Stochastic-collocation gPC surrogates on full tensor grids.
//!
//! The model is solved at Gauss collocation nodes and projected onto the
//! orthonormal tensor basis with the discrete inner product, so the
//! Vandermonde system is never formed. Mean and second moment fall out of
//! the coefficients directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Model;
use crate::orthopoly::{PolynomialFamily, QuadratureRule, TensorRule};

/// Model values aligned with the nodes of a tensor rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    rule: TensorRule,
    values: Vec<f64>,
}

impl CollocationGrid {
    pub fn rule(&self) -> &TensorRule {
        &self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Solve the model at every node of the rule (decoupled evaluations).
pub fn solve_at_nodes(model: &Model, rule: &TensorRule) -> Result<CollocationGrid> {
    let mut values = Vec::with_capacity(rule.len());
    for node in rule.nodes() {
        let v = model.evaluate(node[0], node[1])?;
        if !v.is_finite() {
            return Err(Error::Model {
                z1: node[0],
                z2: node[1],
                message: format!("non-finite model output {v}"),
            });
        }
        values.push(v);
    }
    Ok(CollocationGrid { rule: rule.clone(), values })
}

/// Same as [`solve_at_nodes`] but for the state u (before the output
/// functional); used when the indicator is applied at risk-integral
/// quadrature nodes instead of being interpolated.
pub fn solve_state_at_nodes(model: &Model, rule: &TensorRule) -> Result<CollocationGrid> {
    let mut values = Vec::with_capacity(rule.len());
    for node in rule.nodes() {
        let v = model.state(node[0], node[1])?;
        if !v.is_finite() {
            return Err(Error::Model {
                z1: node[0],
                z2: node[1],
                message: format!("non-finite model state {v}"),
            });
        }
        values.push(v);
    }
    Ok(CollocationGrid { rule: rule.clone(), values })
}

/// gPC expansion in the orthonormal tensor basis.
///
/// Coefficient order is j1-fastest: index = j2 * (p1 + 1) + j1.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    coefficients: Vec<f64>,
    family1: PolynomialFamily,
    family2: PolynomialFamily,
    degree1: usize,
    degree2: usize,
    grid_orders: (usize, usize),
}

/// Project a collocation grid onto the tensor basis of the given maximum
/// degrees, using the grid's own cubature weights.
pub fn compute_coefficients(grid: &CollocationGrid, degrees: (usize, usize)) -> Result<Surrogate> {
    let (p1, p2) = degrees;
    let rule = grid.rule();
    let n1 = rule.rule1().order();
    let n2 = rule.rule2().order();
    if n1 < p1 + 1 || n2 < p2 + 1 {
        return Err(Error::Config(format!(
            "under-resolved grid: degrees ({p1}, {p2}) need rule orders >= ({}, {}), got ({n1}, {n2})",
            p1 + 1,
            p2 + 1
        )));
    }
    let family1 = *rule.rule1().family();
    let family2 = *rule.rule2().family();
    // per-dimension basis values at the grid nodes
    let basis1: Vec<Vec<f64>> = rule
        .rule1()
        .nodes()
        .iter()
        .map(|&z| family1.evaluate_basis_all(p1, z))
        .collect::<Result<_>>()?;
    let basis2: Vec<Vec<f64>> = rule
        .rule2()
        .nodes()
        .iter()
        .map(|&z| family2.evaluate_basis_all(p2, z))
        .collect::<Result<_>>()?;

    let w1 = rule.rule1().weights();
    let w2 = rule.rule2().weights();
    let mut coefficients = vec![0.0; (p1 + 1) * (p2 + 1)];
    for i in 0..n1 {
        for j in 0..n2 {
            let v = grid.values()[i * n2 + j] * w1[i] * w2[j];
            for j2 in 0..=p2 {
                let vb2 = v * basis2[j][j2];
                let row = j2 * (p1 + 1);
                for j1 in 0..=p1 {
                    coefficients[row + j1] += vb2 * basis1[i][j1];
                }
            }
        }
    }
    Ok(Surrogate {
        coefficients,
        family1,
        family2,
        degree1: p1,
        degree2: p2,
        grid_orders: (n1, n2),
    })
}

impl Surrogate {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.degree1, self.degree2)
    }

    pub fn families(&self) -> (&PolynomialFamily, &PolynomialFamily) {
        (&self.family1, &self.family2)
    }

    /// Grid orders the surrogate was built from.
    pub fn grid_orders(&self) -> (usize, usize) {
        self.grid_orders
    }

    /// Expansion value at (z1, z2); extrapolation outside the support is
    /// permitted but untrusted.
    pub fn evaluate(&self, z1: f64, z2: f64) -> f64 {
        let phi1 = self
            .family1
            .evaluate_basis_all(self.degree1, z1)
            .expect("valid family parameters");
        let phi2 = self
            .family2
            .evaluate_basis_all(self.degree2, z2)
            .expect("valid family parameters");
        let mut total = 0.0;
        for j2 in 0..=self.degree2 {
            let row = j2 * (self.degree1 + 1);
            let mut inner = 0.0;
            for j1 in 0..=self.degree1 {
                inner += self.coefficients[row + j1] * phi1[j1];
            }
            total += inner * phi2[j2];
        }
        total
    }

    /// Expansion values at every node of a tensor rule, r1-major, via the
    /// two-stage basis-matrix product.
    pub fn evaluate_on_tensor(&self, rule: &TensorRule) -> Result<Vec<f64>> {
        let n1 = rule.rule1().order();
        let n2 = rule.rule2().order();
        let basis1: Vec<Vec<f64>> = rule
            .rule1()
            .nodes()
            .iter()
            .map(|&z| self.family1.evaluate_basis_all(self.degree1, z))
            .collect::<Result<_>>()?;
        let basis2: Vec<Vec<f64>> = rule
            .rule2()
            .nodes()
            .iter()
            .map(|&z| self.family2.evaluate_basis_all(self.degree2, z))
            .collect::<Result<_>>()?;
        // partial[j1][j] = sum_j2 c[j1, j2] phi_{j2}(z2_j)
        let mut partial = vec![vec![0.0; n2]; self.degree1 + 1];
        for j1 in 0..=self.degree1 {
            for j in 0..n2 {
                let mut s = 0.0;
                for j2 in 0..=self.degree2 {
                    s += self.coefficients[j2 * (self.degree1 + 1) + j1] * basis2[j][j2];
                }
                partial[j1][j] = s;
            }
        }
        let mut out = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                let mut s = 0.0;
                for j1 in 0..=self.degree1 {
                    s += basis1[i][j1] * partial[j1][j];
                }
                out[i * n2 + j] = s;
            }
        }
        Ok(out)
    }

    /// E[v] = first coefficient.
    pub fn mean(&self) -> f64 {
        self.coefficients[0]
    }

    /// E[v^2] = sum of squared coefficients (orthonormality).
    pub fn second_moment(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    pub fn to_artifact(&self) -> SurrogateArtifact {
        SurrogateArtifact {
            family1: self.family1,
            family2: self.family2,
            degrees: [self.degree1, self.degree2],
            grid_orders: [self.grid_orders.0, self.grid_orders.1],
            coefficients: self.coefficients.iter().map(|c| format!("{c:.17e}")).collect(),
        }
    }
}

/// JSON-serializable surrogate (coefficients as decimal strings so the
/// artifact survives any JSON number handling bit-exactly).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateArtifact {
    pub family1: PolynomialFamily,
    pub family2: PolynomialFamily,
    pub degrees: [usize; 2],
    pub grid_orders: [usize; 2],
    pub coefficients: Vec<String>,
}

impl SurrogateArtifact {
    pub fn into_surrogate(self) -> Result<Surrogate> {
        let coefficients: Vec<f64> = self
            .coefficients
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("bad coefficient {s}: {e}"))))
            .collect::<Result<_>>()?;
        if coefficients.len() != (self.degrees[0] + 1) * (self.degrees[1] + 1) {
            return Err(Error::Config(format!(
                "coefficient count {} does not match degrees {:?}",
                coefficients.len(),
                self.degrees
            )));
        }
        Ok(Surrogate {
            coefficients,
            family1: self.family1,
            family2: self.family2,
            degree1: self.degrees[0],
            degree2: self.degrees[1],
            grid_orders: (self.grid_orders[0], self.grid_orders[1]),
        })
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub order: usize,
    pub mean_error: f64,
    pub second_moment_error: f64,
}

/// Relative errors of surrogate mean/second moment against reference
/// values, per collocation order (square grids, degrees = order - 1).
pub fn convergence_study(
    model: &Model,
    families: (&PolynomialFamily, &PolynomialFamily),
    orders: &[usize],
    reference: (f64, f64),
) -> Result<Vec<ConvergenceRow>> {
    let (ref_mean, ref_second) = reference;
    let mut rows = Vec::with_capacity(orders.len());
    for &order in orders {
        let r1 = QuadratureRule::gauss(families.0, order)?;
        let r2 = QuadratureRule::gauss(families.1, order)?;
        let grid = solve_at_nodes(model, &TensorRule::new(r1, r2))?;
        let s = compute_coefficients(&grid, (order - 1, order - 1))?;
        let denom_mean = if ref_mean == 0.0 { 1.0 } else { ref_mean.abs() };
        let denom_second = if ref_second == 0.0 { 1.0 } else { ref_second.abs() };
        rows.push(ConvergenceRow {
            order,
            mean_error: (s.mean() - ref_mean).abs() / denom_mean,
            second_moment_error: (s.second_moment() - ref_second).abs() / denom_second,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DecayOde, Model, ModelKind, OutputFunctional};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform_grid(order: usize) -> TensorRule {
        let fam = PolynomialFamily::legendre(0.0, 1.0).unwrap();
        let r = QuadratureRule::gauss(&fam, order).unwrap();
        TensorRule::new(r.clone(), r)
    }

    fn decay_model(output: OutputFunctional) -> Model {
        Model::new(ModelKind::DecayOde(DecayOde::default()), output)
    }

    const DECAY_MEAN: f64 = (1.0 - 0.36787944117144233) / 2.0; // (1 - e^-1)/2
    const DECAY_SECOND: f64 = (1.0 - 0.1353352832366127) / 6.0; // (1/3)(1 - e^-2)/2

    #[test]
    fn constant_model_has_trivial_coefficients() {
        let model = Model::analytic(|_, _| 3.5);
        let grid = solve_at_nodes(&model, &uniform_grid(4)).unwrap();
        let s = compute_coefficients(&grid, (3, 3)).unwrap();
        assert_abs_diff_eq!(s.coefficients()[0], 3.5, epsilon = 1e-12);
        for &c in &s.coefficients()[1..] {
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(s.evaluate(0.123, 0.987), 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.mean(), 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.second_moment(), 3.5 * 3.5, epsilon = 1e-10);
    }

    #[test]
    fn basis_function_model_yields_unit_coefficient() {
        let fam = PolynomialFamily::legendre(0.0, 1.0).unwrap();
        let model = Model::analytic(move |z1, _| fam.evaluate_basis(2, z1).unwrap());
        let grid = solve_at_nodes(&model, &uniform_grid(5)).unwrap();
        let s = compute_coefficients(&grid, (3, 3)).unwrap();
        for j2 in 0..=3usize {
            for j1 in 0..=3usize {
                let c = s.coefficients()[j2 * 4 + j1];
                let expect = if (j1, j2) == (2, 0) { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(c, expect, epsilon = 1e-10);
            }
        }
        assert_abs_diff_eq!(s.second_moment(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn decay_surrogate_moments() {
        let grid = solve_at_nodes(&decay_model(OutputFunctional::Identity), &uniform_grid(9)).unwrap();
        let s = compute_coefficients(&grid, (8, 8)).unwrap();
        assert_abs_diff_eq!(s.mean(), DECAY_MEAN, epsilon = 1e-10);
        assert_abs_diff_eq!(s.second_moment(), DECAY_SECOND, epsilon = 1e-10);

        let grid2 = solve_at_nodes(&decay_model(OutputFunctional::Square), &uniform_grid(9)).unwrap();
        let s2 = compute_coefficients(&grid2, (8, 8)).unwrap();
        assert_abs_diff_eq!(s2.mean(), DECAY_SECOND, epsilon = 1e-10);
    }

    #[test]
    fn decay_surrogate_pointwise() {
        let grid = solve_at_nodes(&decay_model(OutputFunctional::Identity), &uniform_grid(9)).unwrap();
        let s = compute_coefficients(&grid, (8, 8)).unwrap();
        assert_abs_diff_eq!(s.evaluate(0.5, 0.5), 0.5 * (-0.5_f64).exp(), epsilon = 1e-6);
    }

    #[test]
    fn interpolation_at_collocation_nodes() {
        let rule = uniform_grid(6);
        let grid = solve_at_nodes(&decay_model(OutputFunctional::Identity), &rule).unwrap();
        let s = compute_coefficients(&grid, (5, 5)).unwrap();
        for (node, &value) in rule.nodes().iter().zip(grid.values()) {
            let v = s.evaluate(node[0], node[1]);
            assert!((v - value).abs() <= 1e-8 * value.abs().max(1.0));
        }
    }

    #[test]
    fn evaluate_on_tensor_matches_pointwise() {
        let grid = solve_at_nodes(&decay_model(OutputFunctional::Identity), &uniform_grid(6)).unwrap();
        let s = compute_coefficients(&grid, (5, 5)).unwrap();
        let probe = uniform_grid(7);
        let fast = s.evaluate_on_tensor(&probe).unwrap();
        for (idx, node) in probe.nodes().iter().enumerate() {
            assert_abs_diff_eq!(fast[idx], s.evaluate(node[0], node[1]), epsilon = 1e-12);
        }
    }

    #[test]
    fn polynomial_reproduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = coeffs.clone();
        let poly = move |z1: f64, z2: f64| {
            let mut s = 0.0;
            for j2 in 0..4 {
                for j1 in 0..4 {
                    s += c[j2 * 4 + j1] * z1.powi(j1 as i32) * z2.powi(j2 as i32);
                }
            }
            s
        };
        let model = Model::analytic(poly.clone());
        let grid = solve_at_nodes(&model, &uniform_grid(4)).unwrap();
        let s = compute_coefficients(&grid, (3, 3)).unwrap();
        for _ in 0..100 {
            let z1 = rng.gen_range(0.0..1.0);
            let z2 = rng.gen_range(0.0..1.0);
            assert_abs_diff_eq!(s.evaluate(z1, z2), poly(z1, z2), epsilon = 1e-10);
        }
    }

    #[test]
    fn parseval_and_mean_consistency() {
        let grid = solve_at_nodes(&decay_model(OutputFunctional::Identity), &uniform_grid(9)).unwrap();
        let s = compute_coefficients(&grid, (8, 8)).unwrap();
        let probe = uniform_grid(20);
        let mean_quad = probe.integrate(|z1, z2| s.evaluate(z1, z2));
        let second_quad = probe.integrate(|z1, z2| s.evaluate(z1, z2).powi(2));
        assert_abs_diff_eq!(s.mean(), mean_quad, epsilon = 1e-10);
        assert_abs_diff_eq!(s.second_moment(), second_quad, epsilon = 1e-8);
    }

    #[test]
    fn coefficient_magnitudes_decay() {
        let grid = solve_at_nodes(&decay_model(OutputFunctional::Identity), &uniform_grid(11)).unwrap();
        let s = compute_coefficients(&grid, (10, 10)).unwrap();
        // diagonal-ish norms per total degree
        let mut by_degree = vec![0.0f64; 21];
        for j2 in 0..=10usize {
            for j1 in 0..=10usize {
                by_degree[j1 + j2] += s.coefficients()[j2 * 11 + j1].powi(2);
            }
        }
        for d in 2..12 {
            assert!(
                by_degree[d] < by_degree[d - 1],
                "degree-{d} energy {} not below degree-{} energy {}",
                by_degree[d],
                d - 1,
                by_degree[d - 1]
            );
        }
    }

    #[test]
    fn under_resolved_grid_rejected() {
        let grid = solve_at_nodes(&decay_model(OutputFunctional::Identity), &uniform_grid(3)).unwrap();
        match compute_coefficients(&grid, (4, 2)) {
            Err(Error::Config(msg)) => assert!(msg.contains("5")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn convergence_study_decay() {
        let fam = PolynomialFamily::legendre(0.0, 1.0).unwrap();
        let rows = convergence_study(
            &decay_model(OutputFunctional::Identity),
            (&fam, &fam),
            &[2, 3, 4, 5, 6, 7, 8],
            (DECAY_MEAN, DECAY_SECOND),
        )
        .unwrap();
        for pair in rows.windows(2) {
            // strict decrease until the error reaches rounding noise
            if pair[0].mean_error > 1e-13 {
                assert!(pair[1].mean_error < pair[0].mean_error, "{rows:?}");
            }
            if pair[0].second_moment_error > 1e-13 {
                assert!(pair[1].second_moment_error < pair[0].second_moment_error, "{rows:?}");
            }
        }
        assert!(rows.last().unwrap().mean_error < 1e-12);
        // log(error) vs order slope well below -1
        let first = rows.first().unwrap();
        let last = rows.last().unwrap();
        let slope = (last.mean_error.max(1e-16).ln() - first.mean_error.ln())
            / (last.order as f64 - first.order as f64);
        assert!(slope < -1.0, "slope = {slope}");
    }

    #[test]
    fn convergence_study_polynomial_floor() {
        let fam = PolynomialFamily::legendre(0.0, 1.0).unwrap();
        let model = Model::analytic(|z1, z2| 1.0 + z1 + z2 * z2);
        let mean = 1.0 + 0.5 + 1.0 / 3.0;
        let probe = uniform_grid(12);
        let second = probe.integrate(|z1, z2| (1.0 + z1 + z2 * z2).powi(2));
        let rows = convergence_study(&model, (&fam, &fam), &[4, 6], (mean, second)).unwrap();
        for row in rows {
            assert!(row.mean_error <= 1e-12, "{row:?}");
            assert!(row.second_moment_error <= 1e-10, "{row:?}");
        }
    }

    #[test]
    fn artifact_round_trip() {
        let grid = solve_at_nodes(&decay_model(OutputFunctional::Identity), &uniform_grid(5)).unwrap();
        let s = compute_coefficients(&grid, (4, 4)).unwrap();
        let json = serde_json::to_string(&s.to_artifact()).unwrap();
        let back: SurrogateArtifact = serde_json::from_str(&json).unwrap();
        let s2 = back.into_surrogate().unwrap();
        assert_eq!(s, s2);
    }
}
