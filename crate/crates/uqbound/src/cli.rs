//! Experiment configuration and the command implementations behind the
//! `uqbound` binary.
//!
//! A JSON `ExperimentConfig` binds together a model, the nominal input
//! laws, surrogate and quadrature controls, the c grid, and the
//! relative-entropy budget; each `cmd_*` function is pure apart from its
//! returned text, so the binary only parses flags, dispatches, and writes
//! files.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::models::{DecayOde, Heat1d, Model, ModelKind, Oscillator, OutputFunctional};
use crate::orthopoly::{PolynomialFamily, QuadratureRule, TensorRule};
use crate::riskbounds::{
    self, RiskConfig, RiskCurve, Which, conditional_aleatoric_config, log_c_grid,
};
use crate::surrogate::{self, ConvergenceRow};

/// Default collocation order (points per dimension) for smooth outputs.
pub const DEFAULT_SMOOTH_ORDER: usize = 8;
/// Default collocation order for indicator outputs, which converge slowly.
pub const DEFAULT_INDICATOR_ORDER: usize = 12;

/// Which system the experiment runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Decay(DecayOde),
    Oscillator(Oscillator),
    Heat1d(Heat1d),
    /// z-independent output; useful for smoke tests and the infinite-c
    /// branch of the optimizer.
    Constant { value: f64 },
}

impl ModelSpec {
    fn build(&self, output: OutputFunctional) -> Model {
        match self {
            ModelSpec::Decay(p) => Model::new(ModelKind::DecayOde(*p), output),
            ModelSpec::Oscillator(p) => Model::new(ModelKind::Oscillator(*p), output),
            ModelSpec::Heat1d(p) => Model::new(ModelKind::Heat1d(*p), output),
            ModelSpec::Constant { value } => {
                let v = *value;
                Model::new(ModelKind::Analytic(std::sync::Arc::new(move |_, _| v)), output)
            }
        }
    }
}

/// Optional dependence of the aleatoric variable on the epistemic one,
/// re-expressed through an independent auxiliary variable Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    /// Z1 = Z + Z2 with Z ~ N(0,1).
    ShiftByEpistemic,
    /// Z1 = Z (declared dependence that drops out; for regression tests).
    Independent,
}

impl TransformSpec {
    fn apply(&self, z: f64, z2: f64) -> f64 {
        match self {
            TransformSpec::ShiftByEpistemic => z + z2,
            TransformSpec::Independent => z,
        }
    }
}

/// How the performance measure F is evaluated at risk-quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateMode {
    /// Interpolate F = h(u) directly (default).
    #[default]
    Output,
    /// Interpolate the state u, apply h at the quadrature nodes; avoids
    /// interpolating a discontinuity.
    State,
    /// No surrogate: solve the model at every risk-quadrature node.
    Exact,
}

/// Logarithmic c grid specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CGridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for CGridSpec {
    fn default() -> Self {
        CGridSpec { min: 0.01, max: 1e3, points: 200 }
    }
}

impl CGridSpec {
    pub fn build(&self) -> Result<Vec<f64>> {
        log_c_grid(self.min, self.max, self.points)
    }
}

/// The relative-entropy budget B, either given explicitly or computed as
/// R(alternative || nominal epistemic law).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BudgetSpec {
    Value { value: f64 },
    Alternative { alternative: Distribution },
}

/// One runnable experiment, fully determined by its JSON representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub output: OutputFunctional,
    /// Nominal aleatoric law (or the law of the auxiliary Z when a
    /// transform is present).
    pub z1: Distribution,
    /// Nominal epistemic law.
    pub z2: Distribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformSpec>,
    /// Collocation points per dimension; defaults by output smoothness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collocation_order: Option<usize>,
    #[serde(default = "default_risk_order")]
    pub risk_order: usize,
    #[serde(default)]
    pub surrogate_mode: SurrogateMode,
    #[serde(default)]
    pub c_grid: CGridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetSpec>,
}

fn default_risk_order() -> usize {
    riskbounds::DEFAULT_RISK_ORDER
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.risk_order < 2 {
            return Err(Error::Config(format!("risk_order must be at least 2, got {}", self.risk_order)));
        }
        if let Some(order) = self.collocation_order {
            if order < 1 {
                return Err(Error::Config("collocation_order must be at least 1".into()));
            }
        }
        self.c_grid.build()?;
        if let Some(BudgetSpec::Value { value }) = &self.budget {
            if *value < 0.0 {
                return Err(Error::Config(format!("budget value must be nonnegative, got {value}")));
            }
        }
        Ok(())
    }

    pub fn collocation_order_or_default(&self) -> usize {
        self.collocation_order.unwrap_or(if self.output.is_smooth() {
            DEFAULT_SMOOTH_ORDER
        } else {
            DEFAULT_INDICATOR_ORDER
        })
    }

    /// Resolve B; `None` when the config carries no budget.
    pub fn resolve_budget(&self) -> Result<Option<f64>> {
        match &self.budget {
            None => Ok(None),
            Some(BudgetSpec::Value { value }) => Ok(Some(*value)),
            Some(BudgetSpec::Alternative { alternative }) => {
                let b = match alternative.relative_entropy_closed(&self.z2) {
                    Ok(v) => v,
                    Err(Error::Incompatible(_)) | Err(Error::Unsupported(_)) => {
                        alternative.relative_entropy_numeric(&self.z2, 2000)?
                    }
                    Err(e) => return Err(e),
                };
                Ok(Some(b))
            }
        }
    }

    /// Aleatoric basis family: the auxiliary Z is standard normal when a
    /// transform is present.
    fn aleatoric_family(&self) -> Result<PolynomialFamily> {
        if self.transform.is_some() {
            Ok(PolynomialFamily::hermite())
        } else {
            self.z1.basis_for()
        }
    }

    /// Assemble the risk configuration: surrogate (per mode) over the
    /// collocation grid, then nominal Gauss rules of `risk_order`.
    pub fn build_risk_config(&self) -> Result<RiskConfig> {
        let model = self.model.build(self.output);
        let fam1 = self.aleatoric_family()?;
        let fam2 = self.z2.basis_for()?;
        let rule1 = QuadratureRule::gauss(&fam1, self.risk_order)?;
        let rule2 = QuadratureRule::gauss(&fam2, self.risk_order)?;

        // fold the transform into the model so everything downstream sees
        // independent coordinates
        let eval_model: Model = match self.transform {
            None => model,
            Some(t) => {
                let inner = model;
                Model::new(
                    ModelKind::Analytic(std::sync::Arc::new(move |z, z2| {
                        inner.state(t.apply(z, z2), z2).unwrap_or(f64::NAN)
                    })),
                    self.output,
                )
            }
        };

        match self.surrogate_mode {
            SurrogateMode::Exact => RiskConfig::from_model(eval_model, rule1, rule2),
            SurrogateMode::Output => {
                let s = self.fit_surrogate(&eval_model, &fam1, &fam2, false)?;
                RiskConfig::from_surrogate(s, rule1, rule2)
            }
            SurrogateMode::State => {
                let s = self.fit_surrogate(&eval_model, &fam1, &fam2, true)?;
                RiskConfig::from_state_surrogate(s, self.output, rule1, rule2)
            }
        }
    }

    fn fit_surrogate(
        &self,
        model: &Model,
        fam1: &PolynomialFamily,
        fam2: &PolynomialFamily,
        state: bool,
    ) -> Result<surrogate::Surrogate> {
        let order = self.collocation_order_or_default();
        let r1 = QuadratureRule::gauss(fam1, order)?;
        let r2 = QuadratureRule::gauss(fam2, order)?;
        let grid = TensorRule::new(r1, r2);
        let colloc = if state {
            surrogate::solve_state_at_nodes(model, &grid)?
        } else {
            surrogate::solve_at_nodes(model, &grid)?
        };
        surrogate::compute_coefficients(&colloc, (order - 1, order - 1))
    }

    /// Conditional epistemic-only configuration; only meaningful when a
    /// transform is present (otherwise identical to the plain one).
    pub fn build_conditional_config(&self) -> Result<RiskConfig> {
        let t = self
            .transform
            .ok_or_else(|| Error::Config("conditional form requires a transform".into()))?;
        let model = self.model.build(self.output);
        let base = QuadratureRule::gauss(&PolynomialFamily::hermite(), self.risk_order)?;
        let rule2 = QuadratureRule::gauss(&self.z2.basis_for()?, self.risk_order)?;
        conditional_aleatoric_config(
            move |z1, z2| model.evaluate(z1, z2),
            move |z, z2| t.apply(z, z2),
            base,
            rule2,
        )
    }
}

/// SHA-256 of the raw config bytes, hex-encoded; stamped into every CSV.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

fn csv_comment(hash: &str) -> String {
    format!("# uqbound {} config_sha256={hash}\n", env!("CARGO_PKG_VERSION"))
}

/// `sweep` output: the curve, its stamped CSV, and a per-column summary.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub curve: RiskCurve,
    pub csv: String,
    pub summary: String,
}

/// Sample all three risk integrals and their bounds over the c grid.
pub fn cmd_sweep(cfg: &ExperimentConfig, hash: &str) -> Result<SweepResult> {
    let risk = cfg.build_risk_config()?;
    let grid = cfg.c_grid.build()?;
    let b = cfg.resolve_budget()?.unwrap_or(0.0);
    let curve = RiskCurve::compute(&risk, &grid, b)?;
    let csv = format!("{}{}", csv_comment(hash), curve.to_csv());

    let mut summary = String::new();
    let cols: [(&str, fn(&riskbounds::RiskRow) -> f64); 6] = [
        ("lambda", |r| r.lambda),
        ("lambda1", |r| r.lambda1),
        ("lambda2", |r| r.lambda2),
        ("bound", |r| r.bound),
        ("bound1", |r| r.bound1),
        ("bound2", |r| r.bound2),
    ];
    for (name, get) in cols {
        let min = curve.rows.iter().map(get).fold(f64::INFINITY, f64::min);
        let max = curve.rows.iter().map(get).fold(f64::NEG_INFINITY, f64::max);
        summary.push_str(&format!("{name}: min={min:.6e} max={max:.6e}\n"));
    }
    Ok(SweepResult { curve, csv, summary })
}

/// One line of the optimize report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormResult {
    pub which: u8,
    /// `null` in JSON encodes c* = +infinity.
    pub c_star: Option<f64>,
    pub bound: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Machine-readable `optimize` report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub b: f64,
    pub forms: Vec<FormResult>,
}

impl OptimizeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn human_lines(&self) -> String {
        let mut out = String::new();
        for f in &self.forms {
            let c = match f.c_star {
                Some(c) => format!("{c:.6}"),
                None => "infinite".into(),
            };
            out.push_str(&format!("form {}: c_star={c} bound={:.8} converged={}\n", f.which, f.bound, f.converged));
        }
        out
    }
}

fn which_of(index: u8) -> Which {
    match index {
        0 => Which::Full,
        1 => Which::One,
        _ => Which::Two,
    }
}

/// Minimize B/c + Lambda_c^i for the selected forms (all three when
/// `which` is `None`). B = 0 degenerates to the grid infimum of Lambda.
pub fn cmd_optimize(cfg: &ExperimentConfig, which: Option<u8>) -> Result<OptimizeReport> {
    let b = cfg
        .resolve_budget()?
        .ok_or_else(|| Error::Config("optimize needs a budget (explicit value or alternative law)".into()))?;
    let risk = cfg.build_risk_config()?;
    let selectors: Vec<u8> = match which {
        Some(w) if w <= 2 => vec![w],
        Some(w) => return Err(Error::Config(format!("--which must be 0, 1, 2 or all, got {w}"))),
        None => vec![0, 1, 2],
    };
    let mut forms = Vec::new();
    for w in selectors {
        if b == 0.0 {
            let grid = cfg.c_grid.build()?;
            let mut best = (grid[0], f64::INFINITY);
            for &c in &grid {
                let l = riskbounds::lambda(&risk, which_of(w), c)?;
                if l < best.1 {
                    best = (c, l);
                }
            }
            forms.push(FormResult { which: w, c_star: Some(best.0), bound: best.1, converged: true, iterations: grid.len() });
        } else {
            let res = riskbounds::optimal_c(&risk, which_of(w), b, 1e-6)?;
            forms.push(FormResult {
                which: w,
                c_star: res.c_star,
                bound: res.bound_value,
                converged: res.converged,
                iterations: res.iterations,
            });
        }
    }
    Ok(OptimizeReport { b, forms })
}

/// `re` calculator output: closed form, numerical oracle, difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReReport {
    pub closed: f64,
    pub numeric: f64,
    pub difference: f64,
}

/// Relative entropy R(p || q) by the closed form and the quadrature
/// oracle, side by side.
pub fn cmd_re(p: &Distribution, q: &Distribution) -> Result<ReReport> {
    let closed = p.relative_entropy_closed(q)?;
    let numeric = if closed.is_finite() {
        p.relative_entropy_numeric(q, 2000)?
    } else {
        closed
    };
    let difference = if closed.is_finite() { (closed - numeric).abs() } else { 0.0 };
    Ok(ReReport { closed, numeric, difference })
}

/// Per-order surrogate accuracy against a high-order self-reference.
pub fn cmd_surrogate_report(cfg: &ExperimentConfig, orders: &[usize], hash: &str) -> Result<String> {
    if orders.is_empty() {
        return Err(Error::Config("surrogate-report needs at least one order".into()));
    }
    let model = cfg.model.build(cfg.output);
    let fam1 = cfg.aleatoric_family()?;
    let fam2 = cfg.z2.basis_for()?;
    // reference: a substantially finer collocation of the same model
    let ref_order = orders.iter().copied().max().unwrap() + 6;
    let r1 = QuadratureRule::gauss(&fam1, ref_order)?;
    let r2 = QuadratureRule::gauss(&fam2, ref_order)?;
    let grid = surrogate::solve_at_nodes(&model, &TensorRule::new(r1, r2))?;
    let reference = surrogate::compute_coefficients(&grid, (ref_order - 1, ref_order - 1))?;

    let rows: Vec<ConvergenceRow> = surrogate::convergence_study(
        &model,
        (&fam1, &fam2),
        orders,
        (reference.mean(), reference.second_moment()),
    )?;
    let mut out = csv_comment(hash);
    out.push_str("order,mean_error,second_moment_error\n");
    for r in rows {
        out.push_str(&format!("{},{:.11e},{:.11e}\n", r.order, r.mean_error, r.second_moment_error));
    }
    Ok(out)
}

/// `limit` report: the sup-limit of the epistemic-only integral vs its
/// large-c evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitReport {
    pub lambda1_infinity: f64,
    pub lambda1_at_c_max: f64,
    pub gap: f64,
}

/// Compare lambda1 at the top of the c grid with the c -> infinity limit;
/// requires a uniform nominal epistemic law.
pub fn cmd_limit(cfg: &ExperimentConfig) -> Result<LimitReport> {
    let (lo, hi) = match cfg.z2 {
        Distribution::Uniform { lo, hi } => (lo, hi),
        ref other => {
            return Err(Error::Config(format!(
                "limit requires a uniform epistemic nominal (the sup-limit theorem's hypothesis); got {other:?}"
            )))
        }
    };
    let risk = cfg.build_risk_config()?;
    let sup = riskbounds::lambda1_infinity(&risk, lo, hi)?;
    let at_c_max = riskbounds::lambda1_c(&risk, cfg.c_grid.max)?;
    Ok(LimitReport { lambda1_infinity: sup, lambda1_at_c_max: at_c_max, gap: (sup - at_c_max).abs() })
}
