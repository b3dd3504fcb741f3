//! Example systems mapping uncertain inputs (z1, z2) to a scalar quantity
//! of interest, composed with an output functional h.
//!
//! All solution operations are pure and deterministic; repeated evaluation
//! at identical inputs is bit-identical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine reparameterization of an uncertain input, `scale * z + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub scale: f64,
    #[serde(default)]
    pub shift: f64,
}

impl LinearMap {
    pub fn identity() -> Self {
        LinearMap { scale: 1.0, shift: 0.0 }
    }

    pub fn apply(&self, z: f64) -> f64 {
        self.scale * z + self.shift
    }
}

impl Default for LinearMap {
    fn default() -> Self {
        LinearMap::identity()
    }
}

/// Output functional h applied to the state u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "h", rename_all = "lowercase", deny_unknown_fields)]
pub enum OutputFunctional {
    Identity,
    Square,
    /// Closed indicator 1{a <= u <= b}; use -inf / +inf for one-sided tests.
    Indicator {
        #[serde(default = "neg_inf")]
        a: f64,
        #[serde(default = "pos_inf")]
        b: f64,
    },
}

fn neg_inf() -> f64 {
    f64::NEG_INFINITY
}
fn pos_inf() -> f64 {
    f64::INFINITY
}

impl OutputFunctional {
    pub fn apply(&self, u: f64) -> f64 {
        match *self {
            OutputFunctional::Identity => u,
            OutputFunctional::Square => u * u,
            OutputFunctional::Indicator { a, b } => {
                if a <= u && u <= b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, OutputFunctional::Indicator { .. })
    }
}

/// du/dt = -k(z1) u, u(0) = g(z2); solved in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayOde {
    #[serde(default = "default_time")]
    pub t: f64,
    #[serde(default)]
    pub k_map: LinearMap,
    #[serde(default)]
    pub g_map: LinearMap,
}

fn default_time() -> f64 {
    1.0
}

impl Default for DecayOde {
    fn default() -> Self {
        DecayOde { t: 1.0, k_map: LinearMap::identity(), g_map: LinearMap::identity() }
    }
}

pub fn decay_solution(z1: f64, z2: f64, t: f64, k_map: &LinearMap, g_map: &LinearMap) -> f64 {
    g_map.apply(z2) * (-k_map.apply(z1) * t).exp()
}

/// u'' + gamma(z2) u' + k(z1) u = f(t) with f(t) = amp*cos(freq*t) + offset,
/// integrated with the classical fixed-step 4th-order scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillator {
    pub spring_map: LinearMap,
    pub damping_map: LinearMap,
    pub forcing_amplitude: f64,
    pub forcing_frequency: f64,
    pub forcing_offset: f64,
    #[serde(default)]
    pub u0: f64,
    #[serde(default)]
    pub v0: f64,
    pub t_critical: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_dt() -> f64 {
    1e-3
}

impl Oscillator {
    /// Reference parameterization of the random oscillator:
    /// k(z1) = 4 z1, gamma(z2) = z2/5, f(t) = 10 cos(10 t) + 3.
    pub fn reference() -> Self {
        Oscillator {
            spring_map: LinearMap { scale: 4.0, shift: 0.0 },
            damping_map: LinearMap { scale: 0.2, shift: 0.0 },
            forcing_amplitude: 10.0,
            forcing_frequency: 10.0,
            forcing_offset: 3.0,
            u0: 0.0,
            v0: 0.0,
            t_critical: 4.0,
            dt: 1e-3,
        }
    }
}

pub fn oscillator_solution(z1: f64, z2: f64, params: &Oscillator) -> Result<f64> {
    oscillator_solution_with_dt(z1, z2, params, params.dt)
}

pub fn oscillator_solution_with_dt(z1: f64, z2: f64, params: &Oscillator, dt: f64) -> Result<f64> {
    let spring = params.spring_map.apply(z1);
    let damping = params.damping_map.apply(z2);
    if damping < 0.0 {
        return Err(Error::InvalidParameter(format!("negative damping {damping} at z2={z2}")));
    }
    let forcing = |t: f64| {
        params.forcing_amplitude * (params.forcing_frequency * t).cos() + params.forcing_offset
    };
    let rhs = |t: f64, u: f64, v: f64| (v, forcing(t) - damping * v - spring * u);

    let t_end = params.t_critical;
    let n = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / n as f64;
    let mut u = params.u0;
    let mut v = params.v0;
    let mut t = 0.0;
    for _ in 0..n {
        let (k1u, k1v) = rhs(t, u, v);
        let (k2u, k2v) = rhs(t + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = rhs(t + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = rhs(t + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t += h;
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::Model {
                z1,
                z2,
                message: format!("non-finite oscillator state at t={t}"),
            });
        }
    }
    Ok(u)
}

/// Initial temperature profile for the heat model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialCondition {
    Constant { value: f64 },
    /// mean + amplitude * cos(mode * pi * x / L); an insulated eigenmode.
    Cosine { mean: f64, amplitude: f64, mode: u32 },
}

impl InitialCondition {
    fn eval(&self, x: f64, length: f64) -> f64 {
        match *self {
            InitialCondition::Constant { value } => value,
            InitialCondition::Cosine { mean, amplitude, mode } => {
                mean + amplitude * (mode as f64 * std::f64::consts::PI * x / length).cos()
            }
        }
    }
}

/// du/dt = (k(u; z1)/m(z2)) d2u/dx2 on (0, L) with flux q injected at x=0
/// and an insulated far end; method of lines, implicit time stepping with
/// the conductivity lagged one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Heat1d {
    /// k(u; z1) = k_map(z1) + k_u * u
    #[serde(default)]
    pub k_map: LinearMap,
    #[serde(default)]
    pub k_u: f64,
    /// m(z2) = m_map(z2)
    #[serde(default)]
    pub m_map: LinearMap,
    pub q: f64,
    pub length: f64,
    pub initial: InitialCondition,
    pub t_final: f64,
    pub x_star: f64,
    #[serde(default = "default_nx")]
    pub n_x: usize,
    #[serde(default = "default_nt")]
    pub n_t: usize,
}

fn default_nx() -> usize {
    192
}
fn default_nt() -> usize {
    2000
}

impl Heat1d {
    /// Reference parameterization of the heat equation:
    /// k(u; z1) = z1 + 1.5e-7 u, m(z2) = 1e-6 z2, q = 0.35, L = 1.90,
    /// u0 = 25, observed at x* = 0, t_final = 1000.
    pub fn reference() -> Self {
        Heat1d {
            k_map: LinearMap::identity(),
            k_u: 1.5e-7,
            m_map: LinearMap { scale: 1e-6, shift: 0.0 },
            q: 0.35,
            length: 1.90,
            initial: InitialCondition::Constant { value: 25.0 },
            t_final: 1000.0,
            x_star: 0.0,
            n_x: 192,
            n_t: 2000,
        }
    }
}

pub fn heat1d_solution(z1: f64, z2: f64, params: &Heat1d) -> Result<f64> {
    let profile = heat1d_profile(z1, z2, params)?;
    let dx = params.length / params.n_x as f64;
    // linear interpolation at the query point
    let s = (params.x_star / dx).clamp(0.0, params.n_x as f64);
    let i = (s.floor() as usize).min(params.n_x - 1);
    let frac = s - i as f64;
    Ok(profile[i] * (1.0 - frac) + profile[i + 1] * frac)
}

/// Full temperature profile at t_final on the n_x+1 grid nodes.
pub fn heat1d_profile(z1: f64, z2: f64, params: &Heat1d) -> Result<Vec<f64>> {
    let n = params.n_x;
    if n < 2 {
        return Err(Error::InvalidParameter("heat grid needs at least 2 cells".into()));
    }
    let m = params.m_map.apply(z2);
    if !(m > 0.0) {
        return Err(Error::Model { z1, z2, message: format!("nonpositive heat capacity {m}") });
    }
    let dx = params.length / n as f64;
    let dt = params.t_final / params.n_t as f64;
    let mut u: Vec<f64> =
        (0..=n).map(|i| params.initial.eval(i as f64 * dx, params.length)).collect();

    let conductivity = |ui: f64| params.k_map.apply(z1) + params.k_u * ui;

    // backward Euler: (I - dt*A(u_old)) u_new = u_old + dt*src(u_old)
    let mut lower = vec![0.0; n + 1];
    let mut diag = vec![0.0; n + 1];
    let mut upper = vec![0.0; n + 1];
    let mut rhs = vec![0.0; n + 1];
    for _ in 0..params.n_t {
        for i in 0..=n {
            let k = conductivity(u[i]);
            if !(k > 0.0) {
                return Err(Error::Model {
                    z1,
                    z2,
                    message: format!("nonpositive conductivity {k} at grid node {i}"),
                });
            }
            let d = k / m;
            let r = dt * d / (dx * dx);
            if i == 0 {
                // ghost node: u_{-1} = u_1 + 2 dx q / k
                diag[0] = 1.0 + 2.0 * r;
                upper[0] = -2.0 * r;
                rhs[0] = u[0] + dt * 2.0 * params.q / (m * dx);
            } else if i == n {
                // ghost node: u_{n+1} = u_{n-1}
                lower[n] = -2.0 * r;
                diag[n] = 1.0 + 2.0 * r;
                rhs[n] = u[n];
            } else {
                lower[i] = -r;
                diag[i] = 1.0 + 2.0 * r;
                upper[i] = -r;
                rhs[i] = u[i];
            }
        }
        thomas_solve(&lower, &mut diag, &upper, &mut rhs)
            .map_err(|msg| Error::Model { z1, z2, message: msg })?;
        u.copy_from_slice(&rhs);
    }
    Ok(u)
}

/// Tridiagonal solve; `diag` and `rhs` are scratch, solution lands in `rhs`.
fn thomas_solve(
    lower: &[f64],
    diag: &mut [f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> std::result::Result<(), String> {
    let n = diag.len();
    for i in 1..n {
        if diag[i - 1] == 0.0 {
            return Err(format!("tridiagonal pivot vanished at row {}", i - 1));
        }
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if diag[n - 1] == 0.0 {
        return Err("tridiagonal pivot vanished at last row".into());
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
    Ok(())
}

/// Which underlying system produces the state u(z1, z2).
#[derive(Clone)]
pub enum ModelKind {
    DecayOde(DecayOde),
    Oscillator(Oscillator),
    Heat1d(Heat1d),
    /// Closed-form test model.
    Analytic(std::sync::Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl PartialEq for ModelKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ModelKind::DecayOde(a), ModelKind::DecayOde(b)) => a == b,
            (ModelKind::Oscillator(a), ModelKind::Oscillator(b)) => a == b,
            (ModelKind::Heat1d(a), ModelKind::Heat1d(b)) => a == b,
            _ => false,
        }
    }
}

impl std::fmt::Debug for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::DecayOde(p) => f.debug_tuple("DecayOde").field(p).finish(),
            ModelKind::Oscillator(p) => f.debug_tuple("Oscillator").field(p).finish(),
            ModelKind::Heat1d(p) => f.debug_tuple("Heat1d").field(p).finish(),
            ModelKind::Analytic(_) => f.write_str("Analytic(..)"),
        }
    }
}

/// A deterministic map (z1, z2) -> F, the state solve composed with h.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    pub output: OutputFunctional,
}

impl Model {
    pub fn new(kind: ModelKind, output: OutputFunctional) -> Self {
        Model { kind, output }
    }

    pub fn analytic(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Model {
            kind: ModelKind::Analytic(std::sync::Arc::new(f)),
            output: OutputFunctional::Identity,
        }
    }

    /// State u(z1, z2) before the output functional.
    pub fn state(&self, z1: f64, z2: f64) -> Result<f64> {
        match &self.kind {
            ModelKind::DecayOde(p) => Ok(decay_solution(z1, z2, p.t, &p.k_map, &p.g_map)),
            ModelKind::Oscillator(p) => oscillator_solution(z1, z2, p),
            ModelKind::Heat1d(p) => heat1d_solution(z1, z2, p),
            ModelKind::Analytic(f) => Ok(f(z1, z2)),
        }
    }

    /// F(z1, z2) = h(u(z1, z2)).
    pub fn evaluate(&self, z1: f64, z2: f64) -> Result<f64> {
        Ok(self.output.apply(self.state(z1, z2)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn decay_closed_form() {
        let id = LinearMap::identity();
        assert_abs_diff_eq!(decay_solution(0.0, 1.0, 1.0, &id, &id), 1.0);
        assert_abs_diff_eq!(
            decay_solution(1.0, 1.0, 1.0, &id, &id),
            (-1.0_f64).exp(),
            epsilon = 1e-15
        );
        let u = decay_solution(0.5, 0.5, 1.0, &id, &id);
        assert_abs_diff_eq!(OutputFunctional::Square.apply(u), 0.09196986029286058, epsilon = 1e-12);
    }

    #[test]
    fn output_functionals() {
        assert_abs_diff_eq!(OutputFunctional::Square.apply(0.5), 0.25);
        let ind = OutputFunctional::Indicator { a: 0.8, b: 1.0 };
        assert_abs_diff_eq!(ind.apply(0.9), 1.0);
        assert_abs_diff_eq!(ind.apply(0.79), 0.0);
        let upper = OutputFunctional::Indicator { a: f64::NEG_INFINITY, b: 2.0 };
        assert_abs_diff_eq!(upper.apply(2.0), 1.0, epsilon = 0.0);
    }

    #[test]
    fn decay_monotone_in_z1() {
        let id = LinearMap::identity();
        let mut prev = decay_solution(0.0, 1.0, 1.0, &id, &id);
        for i in 1..20 {
            let v = decay_solution(i as f64 * 0.1, 1.0, 1.0, &id, &id);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn oscillator_undamped_period() {
        // u'' + u = 0, u(0)=1, u'(0)=0: u(2*pi) = 1
        let params = Oscillator {
            spring_map: LinearMap::identity(),
            damping_map: LinearMap { scale: 0.0, shift: 0.0 },
            forcing_amplitude: 0.0,
            forcing_frequency: 1.0,
            forcing_offset: 0.0,
            u0: 1.0,
            v0: 0.0,
            t_critical: 2.0 * std::f64::consts::PI,
            dt: 1e-3,
        };
        let u = oscillator_solution(1.0, 0.0, &params).unwrap();
        assert_abs_diff_eq!(u, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn oscillator_fourth_order_self_convergence() {
        let params = Oscillator::reference();
        for (z1, z2) in [(0.5, 0.5), (0.2, 0.8), (0.9, 0.1)] {
            let u1 = oscillator_solution_with_dt(z1, z2, &params, 8e-3).unwrap();
            let u2 = oscillator_solution_with_dt(z1, z2, &params, 4e-3).unwrap();
            let u3 = oscillator_solution_with_dt(z1, z2, &params, 2e-3).unwrap();
            let ratio = (u1 - u2).abs() / (u2 - u3).abs();
            assert!((12.0..=20.0).contains(&ratio), "ratio = {ratio}");
        }
    }

    #[test]
    fn oscillator_matches_fine_reference() {
        let params = Oscillator::reference();
        let coarse = oscillator_solution_with_dt(0.5, 0.5, &params, 1e-3).unwrap();
        let fine = oscillator_solution_with_dt(0.5, 0.5, &params, 1.25e-4).unwrap();
        assert_abs_diff_eq!(coarse, fine, epsilon = 1e-7);
    }

    fn tame_heat(initial: InitialCondition, q: f64, t_final: f64, n_x: usize, n_t: usize) -> Heat1d {
        Heat1d {
            k_map: LinearMap::identity(),
            k_u: 0.0,
            m_map: LinearMap::identity(),
            q,
            length: 1.90,
            initial,
            t_final,
            x_star: 0.0,
            n_x,
            n_t,
        }
    }

    #[test]
    fn heat_insulated_equilibrium_is_exact() {
        let p = tame_heat(InitialCondition::Constant { value: 25.0 }, 0.0, 2.0, 32, 50);
        let profile = heat1d_profile(1.0, 1.0, &p).unwrap();
        for &v in &profile {
            assert_abs_diff_eq!(v, 25.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn heat_eigenmode_decay_rate() {
        // u0 = 10 + cos(pi x / L), insulated: amplitude decays at exp(-D (pi/L)^2 t)
        let length: f64 = 1.90;
        let t_final = 0.5;
        let p = tame_heat(
            InitialCondition::Cosine { mean: 10.0, amplitude: 1.0, mode: 1 },
            0.0,
            t_final,
            96,
            8000,
        );
        let d = 1.0; // k/m with both maps the identity at (1, 1)
        let rate = d * (std::f64::consts::PI / length).powi(2);
        let expected = 10.0 + (-rate * t_final).exp();
        let u0 = heat1d_solution(1.0, 1.0, &p).unwrap();
        assert!((u0 - expected).abs() / (expected - 10.0) < 0.01, "u0 = {u0}, expected {expected}");
    }

    #[test]
    fn heat_energy_balance() {
        // constant k: d/dt integral(u) = q/m
        let t_final = 0.3;
        let q = 0.35;
        let p = tame_heat(InitialCondition::Constant { value: 25.0 }, q, t_final, 96, 6000);
        let profile = heat1d_profile(1.0, 1.0, &p).unwrap();
        let dx = p.length / p.n_x as f64;
        let mut integral = 0.0;
        for i in 0..p.n_x {
            integral += 0.5 * (profile[i] + profile[i + 1]) * dx;
        }
        let initial_integral = 25.0 * p.length;
        let gained = integral - initial_integral;
        let expected = q * t_final; // m = 1
        assert!((gained - expected).abs() / expected < 0.01, "gained {gained}, expected {expected}");
    }

    #[test]
    fn heat_spatial_order_near_two() {
        // nonlinear conductivity, flux-driven; Richardson ratio under
        // grid doubling with a fixed fine time step
        let mut p = tame_heat(InitialCondition::Constant { value: 1.0 }, 0.5, 0.2, 24, 20000);
        p.k_u = 0.3;
        let run = |n_x: usize| {
            let mut cfg = p;
            cfg.n_x = n_x;
            heat1d_solution(1.0, 1.0, &cfg).unwrap()
        };
        let c = run(24);
        let m = run(48);
        let f = run(96);
        let order = ((c - m).abs() / (m - f).abs()).log2();
        assert!(order >= 1.9, "observed spatial order {order}");
    }

    #[test]
    fn heat_nonpositive_conductivity_rejected() {
        let mut p = tame_heat(InitialCondition::Constant { value: 1.0 }, 0.1, 1.0, 16, 10);
        p.k_map = LinearMap { scale: 1.0, shift: -5.0 };
        match heat1d_solution(1.0, 1.0, &p) {
            Err(Error::Model { .. }) => {}
            other => panic!("expected model error, got {other:?}"),
        }
    }

    #[test]
    fn model_determinism() {
        let m = Model::new(ModelKind::Oscillator(Oscillator::reference()), OutputFunctional::Identity);
        let a = m.evaluate(0.3, 0.7).unwrap();
        let b = m.evaluate(0.3, 0.7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
