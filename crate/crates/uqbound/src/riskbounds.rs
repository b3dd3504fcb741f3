//! Risk-sensitive integrals over relative-entropy ambiguity sets.
//!
//! Everything is quadrature-backed: a `RiskConfig` caches the performance
//! measure F at the tensor nodes of the aleatoric x epistemic rules, and
//! each risk-sensitive functional is a max-shifted log-sum-exp over those
//! cached values, so large risk sensitivities c never overflow.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::models::{Model, OutputFunctional};
use crate::orthopoly::QuadratureRule;
use crate::surrogate::Surrogate;

/// Default per-dimension quadrature order for the risk integrals.
pub const DEFAULT_RISK_ORDER: usize = 256;

type Evaluator = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

/// Kahan-compensated sum, index-ascending for reproducibility.
fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// log sum_i w_i e^{x_i} with max subtraction; weights must be positive.
fn log_sum_exp_weighted(xs: &[f64], ws: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ws.len());
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s = kahan_sum(xs.iter().zip(ws).map(|(&x, &w)| w * (x - m).exp()));
    m + s.ln()
}

/// Which risk-sensitive integral a bound is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    /// Fully risk-sensitive Lambda_c.
    Full,
    /// Epistemic-only Lambda_c^1 (inner aleatoric average).
    One,
    /// Hybrid Lambda_c^2 (per-aleatoric-node exponential, outer average).
    Two,
}

/// The performance measure F together with the nominal quadrature rules
/// for the aleatoric (z1) and epistemic (z2) variables.
#[derive(Clone)]
pub struct RiskConfig {
    f: Evaluator,
    rule1: QuadratureRule,
    rule2: QuadratureRule,
    /// F cached at the tensor nodes, rule1-major.
    values: Vec<f64>,
}

impl std::fmt::Debug for RiskConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RiskConfig")
            .field("rule1_order", &self.rule1.order())
            .field("rule2_order", &self.rule2.order())
            .finish()
    }
}

impl RiskConfig {
    /// Cache F at all tensor nodes; rejects non-finite values and rules
    /// whose weights do not sum to one.
    pub fn new(
        f: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
        rule1: QuadratureRule,
        rule2: QuadratureRule,
    ) -> Result<Self> {
        for (name, rule) in [("aleatoric", &rule1), ("epistemic", &rule2)] {
            let total: f64 = rule.weights().iter().sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::Config(format!(
                    "{name} rule weights sum to {total}, expected 1"
                )));
            }
        }
        let f: Evaluator = Arc::new(f);
        let mut values = Vec::with_capacity(rule1.order() * rule2.order());
        for &x in rule1.nodes() {
            for &y in rule2.nodes() {
                let v = f(x, y)?;
                if !v.is_finite() {
                    return Err(Error::Model {
                        z1: x,
                        z2: y,
                        message: format!("non-finite performance measure {v}"),
                    });
                }
                values.push(v);
            }
        }
        Ok(RiskConfig { f, rule1, rule2, values })
    }

    /// F evaluated by solving the model exactly at each node.
    pub fn from_model(model: Model, rule1: QuadratureRule, rule2: QuadratureRule) -> Result<Self> {
        RiskConfig::new(move |z1, z2| model.evaluate(z1, z2), rule1, rule2)
    }

    /// F backed by a surrogate of F itself (the non-smooth output was
    /// interpolated together with the state).
    pub fn from_surrogate(
        surrogate: Surrogate,
        rule1: QuadratureRule,
        rule2: QuadratureRule,
    ) -> Result<Self> {
        RiskConfig::new(move |z1, z2| Ok(surrogate.evaluate(z1, z2)), rule1, rule2)
    }

    /// F = h(u) with the state u interpolated by the surrogate and the
    /// output functional h applied at the quadrature nodes.
    pub fn from_state_surrogate(
        surrogate: Surrogate,
        output: OutputFunctional,
        rule1: QuadratureRule,
        rule2: QuadratureRule,
    ) -> Result<Self> {
        RiskConfig::new(move |z1, z2| Ok(output.apply(surrogate.evaluate(z1, z2))), rule1, rule2)
    }

    pub fn aleatoric_rule(&self) -> &QuadratureRule {
        &self.rule1
    }

    pub fn epistemic_rule(&self) -> &QuadratureRule {
        &self.rule2
    }

    pub fn evaluate_f(&self, z1: f64, z2: f64) -> Result<f64> {
        (self.f)(z1, z2)
    }

    /// E[F] under the nominal product law, by quadrature.
    pub fn mean(&self) -> f64 {
        let w1 = self.rule1.weights();
        let w2 = self.rule2.weights();
        let n2 = self.rule2.order();
        kahan_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(idx, &v)| v * w1[idx / n2] * w2[idx % n2]),
        )
    }

    /// Var[F] under the nominal product law, by quadrature.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let w1 = self.rule1.weights();
        let w2 = self.rule2.weights();
        let n2 = self.rule2.order();
        kahan_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(idx, &v)| (v - mean).powi(2) * w1[idx / n2] * w2[idx % n2]),
        )
        .max(0.0)
    }
}

fn check_c(c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("risk sensitivity c must be positive and finite, got {c}")));
    }
    Ok(c)
}

/// Fully risk-sensitive integral: (1/c) log E[e^{cF}] over the product law.
pub fn lambda_c(cfg: &RiskConfig, c: f64) -> Result<f64> {
    let c = check_c(c)?;
    let w1 = cfg.rule1.weights();
    let w2 = cfg.rule2.weights();
    let n2 = cfg.rule2.order();
    let xs: Vec<f64> = cfg.values.iter().map(|&v| c * v).collect();
    let ws: Vec<f64> = (0..cfg.values.len()).map(|idx| w1[idx / n2] * w2[idx % n2]).collect();
    Ok(log_sum_exp_weighted(&xs, &ws) / c)
}

/// Epistemic-only integral: the aleatoric average is taken inside the
/// exponential, the log-sum-exp runs over the epistemic rule only.
pub fn lambda1_c(cfg: &RiskConfig, c: f64) -> Result<f64> {
    let c = check_c(c)?;
    let w1 = cfg.rule1.weights();
    let n1 = cfg.rule1.order();
    let n2 = cfg.rule2.order();
    // a_j = sum_i F_ij w1_i
    let inner: Vec<f64> = (0..n2)
        .map(|j| c * kahan_sum((0..n1).map(|i| cfg.values[i * n2 + j] * w1[i])))
        .collect();
    Ok(log_sum_exp_weighted(&inner, cfg.rule2.weights()) / c)
}

/// Hybrid integral: per-aleatoric-node log-sum-exp over the epistemic
/// rule, then the ordinary average over the aleatoric rule.
pub fn lambda2_c(cfg: &RiskConfig, c: f64) -> Result<f64> {
    let c = check_c(c)?;
    let w1 = cfg.rule1.weights();
    let w2 = cfg.rule2.weights();
    let n1 = cfg.rule1.order();
    let n2 = cfg.rule2.order();
    let per_node: Vec<f64> = (0..n1)
        .map(|i| {
            let row: Vec<f64> = (0..n2).map(|j| c * cfg.values[i * n2 + j]).collect();
            log_sum_exp_weighted(&row, w2) * w1[i]
        })
        .collect();
    Ok(kahan_sum(per_node.into_iter()) / c)
}

/// Dispatch on the integral selector.
pub fn lambda(cfg: &RiskConfig, which: Which, c: f64) -> Result<f64> {
    match which {
        Which::Full => lambda_c(cfg, c),
        Which::One => lambda1_c(cfg, c),
        Which::Two => lambda2_c(cfg, c),
    }
}

/// Build the config for a dependent aleatoric variable Z1 = T(Z, Z2):
/// G(z, z2) = F(T(z, z2), z2) with `base_rule` the quadrature for the
/// independent auxiliary Z. The epistemic-only integral of this config is
/// the conditional form.
pub fn conditional_aleatoric_config(
    f: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
    transform: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    base_rule: QuadratureRule,
    epistemic_rule: QuadratureRule,
) -> Result<RiskConfig> {
    RiskConfig::new(move |z, z2| f(transform(z, z2), z2), base_rule, epistemic_rule)
}

/// Conditional epistemic-only integral; identical to [`lambda1_c`] on a
/// config produced by [`conditional_aleatoric_config`], named for clarity
/// at call sites.
pub fn lambda1_bar_c(cfg: &RiskConfig, c: f64) -> Result<f64> {
    lambda1_c(cfg, c)
}

/// Conditional hybrid integral: the nominal epistemic law may depend on
/// the aleatoric value, so each aleatoric node carries its own rule.
pub fn lambda2_bar_c(
    f: impl Fn(f64, f64) -> Result<f64>,
    aleatoric_rule: &QuadratureRule,
    conditional_rule: impl Fn(f64) -> Result<QuadratureRule>,
    c: f64,
) -> Result<f64> {
    let c = check_c(c)?;
    let mut total = 0.0;
    let mut carry = 0.0;
    for (&x, &w1) in aleatoric_rule.nodes().iter().zip(aleatoric_rule.weights()) {
        let rule = conditional_rule(x)?;
        let total_w: f64 = rule.weights().iter().sum();
        if (total_w - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!(
                "conditional epistemic rule at x={x} has weights summing to {total_w}"
            )));
        }
        let mut xs = Vec::with_capacity(rule.order());
        for &y in rule.nodes() {
            let v = f(x, y)?;
            if !v.is_finite() {
                return Err(Error::Model { z1: x, z2: y, message: format!("non-finite performance measure {v}") });
            }
            xs.push(c * v);
        }
        let term = log_sum_exp_weighted(&xs, rule.weights()) * w1;
        let y = term - carry;
        let t = total + y;
        carry = (t - total) - y;
        total = t;
    }
    Ok(total / c)
}

/// Ambiguity-set bound B/c + Lambda for a relative-entropy budget B.
pub fn bound(b: f64, c: f64, lambda_value: f64) -> f64 {
    b / c + lambda_value
}

/// Logarithmically spaced c grid.
pub fn log_c_grid(c_min: f64, c_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(c_min > 0.0) || !(c_max > c_min) || points < 2 {
        return Err(Error::Config(format!(
            "need 0 < c_min < c_max and at least 2 points, got ({c_min}, {c_max}, {points})"
        )));
    }
    let (l0, l1) = (c_min.ln(), c_max.ln());
    Ok((0..points)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (points - 1) as f64).exp())
        .collect())
}

/// The default grid: 200 log-spaced points on [0.01, 1000].
pub fn default_c_grid() -> Vec<f64> {
    log_c_grid(0.01, 1e3, 200).expect("valid default grid")
}

/// One sampled point of the risk curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskRow {
    pub c: f64,
    pub lambda: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub bound: f64,
    pub bound1: f64,
    pub bound2: f64,
}

/// Sampled values of c -> Lambda_c^i and the derived bounds B/c + Lambda.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskCurve {
    pub b: f64,
    pub rows: Vec<RiskRow>,
}

impl RiskCurve {
    pub fn compute(cfg: &RiskConfig, c_grid: &[f64], b: f64) -> Result<Self> {
        if b < 0.0 {
            return Err(Error::InvalidParameter(format!("relative-entropy budget B must be nonnegative, got {b}")));
        }
        let mut rows = Vec::with_capacity(c_grid.len());
        for &c in c_grid {
            let l = lambda_c(cfg, c)?;
            let l1 = lambda1_c(cfg, c)?;
            let l2 = lambda2_c(cfg, c)?;
            rows.push(RiskRow {
                c,
                lambda: l,
                lambda1: l1,
                lambda2: l2,
                bound: bound(b, c, l),
                bound1: bound(b, c, l1),
                bound2: bound(b, c, l2),
            });
        }
        Ok(RiskCurve { b, rows })
    }

    /// CSV with 12 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("c,lambda,lambda1,lambda2,bound,bound1,bound2\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
                r.c, r.lambda, r.lambda1, r.lambda2, r.bound, r.bound1, r.bound2
            ));
        }
        out
    }
}

/// Result of the optimal-c search for the bound B/c + Lambda_c^i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalC {
    /// `None` encodes c* = +infinity (the objective decreases forever and
    /// the Lambda curve has plateaued).
    pub c_star: Option<f64>,
    pub bound_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize c -> B/c + Lambda(c) for a user-supplied Lambda evaluator.
/// Unimodality of the exact objective justifies bracket + golden section;
/// a plateau of Lambda under successive doublings of c signals c* = +inf.
pub fn optimal_c_with(
    lambda_fn: impl Fn(f64) -> Result<f64>,
    b: f64,
    tol: f64,
) -> Result<OptimalC> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("B must be positive, got {b}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let iterations = std::cell::Cell::new(0usize);
    let mut eval = |c: f64| -> Result<f64> {
        iterations.set(iterations.get() + 1);
        let l = lambda_fn(c)?;
        if !l.is_finite() {
            return Err(Error::Numerical(format!("non-finite Lambda at c={c}")));
        }
        Ok(b / c + l)
    };

    let grid = default_c_grid();
    let mut values = Vec::with_capacity(grid.len());
    for &c in &grid {
        values.push(eval(c)?);
    }
    let argmin = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();

    if argmin + 1 == grid.len() {
        // still decreasing at the right edge: double c until either the
        // Lambda plateau confirms c* = +inf or a minimum appears
        let mut c = *grid.last().unwrap();
        let mut lam = lambda_fn(c)?;
        let mut obj = b / c + lam;
        for _ in 0..40 {
            let c2 = 2.0 * c;
            let lam2 = lambda_fn(c2)?;
            iterations.set(iterations.get() + 1);
            if !lam2.is_finite() {
                return Err(Error::Numerical(format!("non-finite Lambda at c={c2}; largest finite c was {c}")));
            }
            let obj2 = b / c2 + lam2;
            if (lam2 - lam).abs() < tol && obj2 <= obj {
                return Ok(OptimalC { c_star: None, bound_value: lam2, iterations: iterations.get(), converged: true });
            }
            if obj2 > obj {
                // a genuine interior minimum past the grid edge
                break;
            }
            c = c2;
            lam = lam2;
            obj = obj2;
        }
        // bracket [c/2, 4c] around the turning point and fall through
        let lo = c / 2.0;
        let hi = 4.0 * c;
        let (c_star, bound_value, extra) = golden_section(&mut eval, lo, hi, tol)?;
        return Ok(OptimalC { c_star: Some(c_star), bound_value, iterations: iterations.get() + extra, converged: true });
    }

    let lo = if argmin == 0 { grid[0] * 0.5 } else { grid[argmin - 1] };
    let hi = grid[argmin + 1];
    let (c_star, bound_value, extra) = golden_section(&mut eval, lo, hi, tol)?;
    Ok(OptimalC { c_star: Some(c_star), bound_value, iterations: iterations.get() + extra, converged: true })
}

/// Golden-section minimization in log c to relative tolerance `tol`.
fn golden_section(
    eval: &mut impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64, usize)> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c1 = b - PHI * (b - a);
    let mut c2 = a + PHI * (b - a);
    let mut f1 = eval(c1.exp())?;
    let mut f2 = eval(c2.exp())?;
    let mut extra = 0usize;
    while (b - a) > tol {
        if f1 < f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - PHI * (b - a);
            f1 = eval(c1.exp())?;
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + PHI * (b - a);
            f2 = eval(c2.exp())?;
        }
        extra += 1;
        if extra > 200 {
            break;
        }
    }
    let c_star = (0.5 * (a + b)).exp();
    let value = eval(c_star)?;
    Ok((c_star, value, extra))
}

/// Optimal-c search for the bound built from one of the config's
/// risk-sensitive integrals.
pub fn optimal_c(cfg: &RiskConfig, which: Which, b: f64, tol: f64) -> Result<OptimalC> {
    optimal_c_with(|c| lambda(cfg, which, c), b, tol)
}

/// The c -> infinity limit of the epistemic-only integral when the
/// nominal epistemic law is uniform on [y_lo, y_hi]: the sup over y of
/// the aleatoric average of F(., y). Coarse 256-point grid plus two
/// refinement passes of 256 points around the running maximizer.
pub fn lambda1_infinity(cfg: &RiskConfig, y_lo: f64, y_hi: f64) -> Result<f64> {
    if !(y_hi > y_lo) {
        return Err(Error::InvalidParameter(format!("need y_lo < y_hi, got [{y_lo}, {y_hi}]")));
    }
    let w1 = cfg.rule1.weights();
    let nodes1 = cfg.rule1.nodes();
    let average = |y: f64| -> Result<f64> {
        let mut terms = Vec::with_capacity(nodes1.len());
        for (&x, &w) in nodes1.iter().zip(w1) {
            terms.push(cfg.evaluate_f(x, y)? * w);
        }
        Ok(kahan_sum(terms.into_iter()))
    };

    const POINTS: usize = 256;
    let mut lo = y_lo;
    let mut hi = y_hi;
    let mut best = f64::NEG_INFINITY;
    for _pass in 0..3 {
        let h = (hi - lo) / (POINTS - 1) as f64;
        let mut arg = lo;
        for k in 0..POINTS {
            let y = lo + h * k as f64;
            let v = average(y)?;
            if v > best {
                best = v;
                arg = y;
            }
        }
        lo = (arg - 2.0 * h).max(y_lo);
        hi = (arg + 2.0 * h).min(y_hi);
    }
    Ok(best)
}

/// Outcome of checking one alternative law against the duality bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_entropy: f64,
    pub satisfied: bool,
}

/// Check E_{mu x theta}[F] <= R(theta || gamma)/c + Lambda_c^1 for an
/// alternative epistemic law theta against the nominal `gamma`.
pub fn verify_duality_bound(
    cfg: &RiskConfig,
    c: f64,
    alternative: &Distribution,
    nominal: &Distribution,
) -> Result<DualityReport> {
    let c = check_c(c)?;
    let re = match alternative.relative_entropy_closed(nominal) {
        Ok(v) => v,
        Err(Error::Incompatible(_)) | Err(Error::Unsupported(_)) => {
            alternative.relative_entropy_numeric(nominal, 2000)?
        }
        Err(e) => return Err(e),
    };
    let l1 = lambda1_c(cfg, c)?;
    if !re.is_finite() {
        return Ok(DualityReport { lhs: f64::NAN, rhs: f64::INFINITY, relative_entropy: re, satisfied: true });
    }
    // mean of F under mu x theta via the alternative's own Gauss rule
    let family = alternative.basis_for()?;
    let alt_rule = QuadratureRule::gauss(&family, DEFAULT_RISK_ORDER.min(128))?;
    let mut terms = Vec::new();
    for (&y, &wy) in alt_rule.nodes().iter().zip(alt_rule.weights()) {
        for (&x, &wx) in cfg.rule1.nodes().iter().zip(cfg.rule1.weights()) {
            terms.push(cfg.evaluate_f(x, y)? * wx * wy);
        }
    }
    let lhs = kahan_sum(terms.into_iter());
    let rhs = re / c + l1;
    Ok(DualityReport { lhs, rhs, relative_entropy: re, satisfied: lhs <= rhs + 1e-9 })
}

/// Nested Monte Carlo estimate of a risk-sensitive integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

/// Sample-based estimate of Lambda_c^which under the product law
/// mu x gamma. The hybrid forms need the nested inner loop; the standard
/// error comes from the outer-sample variance (delta method through the
/// final log for the exponential forms).
pub fn mc_estimate(
    f: impl Fn(f64, f64) -> Result<f64>,
    mu: &Distribution,
    gamma: &Distribution,
    which: Which,
    c: f64,
    n_outer: usize,
    n_inner: usize,
    seed: u64,
) -> Result<McEstimate> {
    let c = check_c(c)?;
    if n_outer == 0 || n_inner == 0 {
        return Err(Error::InvalidParameter("n_outer and n_inner must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // outer statistics s_k, combined either as (1/c) log mean e^{s_k}
    // (exponential combine) or as (1/c) mean s_k
    let mut stats = Vec::with_capacity(n_outer);
    let exponential_combine = match which {
        Which::Full => {
            for _ in 0..n_outer {
                let x = mu.sample(&mut rng);
                let y = gamma.sample(&mut rng);
                stats.push(c * f(x, y)?);
            }
            true
        }
        Which::One => {
            for _ in 0..n_outer {
                let y = gamma.sample(&mut rng);
                let mut inner = Vec::with_capacity(n_inner);
                for _ in 0..n_inner {
                    let x = mu.sample(&mut rng);
                    inner.push(f(x, y)?);
                }
                stats.push(c * kahan_sum(inner.into_iter()) / n_inner as f64);
            }
            true
        }
        Which::Two => {
            let uniform_w = vec![1.0 / n_inner as f64; n_inner];
            for _ in 0..n_outer {
                let x = mu.sample(&mut rng);
                let mut inner = Vec::with_capacity(n_inner);
                for _ in 0..n_inner {
                    let y = gamma.sample(&mut rng);
                    inner.push(c * f(x, y)?);
                }
                stats.push(log_sum_exp_weighted(&inner, &uniform_w));
            }
            false
        }
    };

    let n = n_outer as f64;
    if exponential_combine {
        let m = stats.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = stats.iter().map(|&s| (s - m).exp()).collect();
        let mean = kahan_sum(shifted.iter().cloned()) / n;
        let var = kahan_sum(shifted.iter().map(|&s| (s - mean).powi(2))) / (n - 1.0).max(1.0);
        let estimate = (m + mean.ln()) / c;
        let stderr = (var / n).sqrt() / (mean * c);
        Ok(McEstimate { estimate, stderr })
    } else {
        let mean = kahan_sum(stats.iter().cloned()) / n;
        let var = kahan_sum(stats.iter().map(|&s| (s - mean).powi(2))) / (n - 1.0).max(1.0);
        Ok(McEstimate { estimate: mean / c, stderr: (var / n).sqrt() / c })
    }
}
