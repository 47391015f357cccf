//! Baseline solvers on the unfiltered equations (Strang splitting and its
//! fourth-order Yoshida composition), the ε → 0 averaged models, and the
//! recipes used to build reference solutions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::dd::{reduced_fast_time, DoubleDouble, TWO_PI};
use crate::error::{argument, Error, Result};
use crate::initdata::{prepare_initial_data, PreparationOrder};
use crate::integrators::{extract_at_phase, integrate, IntegrateOptions, Scheme};
use crate::models::{cubic, nkg_reconstruct, Model, ModelId, NkgModel, NlsModel, VectorField};
use crate::spectral::fft::Plan;
use crate::spectral::{hs_norm, tau_average, SpatialField, TwoScaleField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Triple-jump weights `(w₁, w₀)`: `w₁ = 1/(2 - 2^{1/3})`, `w₀ = 1 - 2w₁`.
pub fn yoshida_weights() -> (f64, f64) {
    let w1 = 1.0 / (2.0 - 2f64.cbrt());
    (w1, 1.0 - 2.0 * w1)
}

/// `base(w₁dt) ∘ base(w₀dt) ∘ base(w₁dt)` for a symmetric second-order map.
pub fn yoshida4_step<S>(state: &S, dt: f64, mut base: impl FnMut(&S, f64) -> S) -> S {
    let (w1, w0) = yoshida_weights();
    let a = base(state, w1 * dt);
    let b = base(&a, w0 * dt);
    base(&b, w1 * dt)
}

fn check_step(dt: f64) -> Result<()> {
    if !dt.is_finite() || dt == 0.0 {
        return Err(argument(format!(
            "splitting step must be finite and nonzero, got {dt}"
        )));
    }
    Ok(())
}

/// Strang step for `i∂_t u = -ε⁻¹Δu + γ|u|²u`: half free flight, exact
/// potential rotation, half free flight. Negative `dt` runs backwards.
#[derive(Debug, Clone)]
pub struct StrangNls {
    dt: f64,
    /// `e^{-i(dt/2ε)ξ²}`
    half: Vec<Complex64>,
    gamma: Vec<f64>,
}

impl StrangNls {
    pub fn new(model: &NlsModel, dt: f64) -> Result<Self> {
        check_step(dt)?;
        let ratio = DoubleDouble::div_f64(dt, 2.0 * model.epsilon());
        let half = model
            .grid()
            .wavenumbers()
            .iter()
            .map(|xi| {
                let phase = (ratio * (xi * xi)).rem_euclid(TWO_PI).to_f64();
                Complex64::from_polar(1.0, -phase)
            })
            .collect();
        let gamma = model.gamma().values().iter().map(|z| z.re).collect();
        Ok(StrangNls { dt, half, gamma })
    }

    fn apply(&self, u: &mut [Complex64], plan: &mut Plan) {
        multiply_spectral(u, &self.half, plan);
        for (z, g) in u.iter_mut().zip(&self.gamma) {
            *z *= Complex64::from_polar(1.0, -g * z.norm_sqr() * self.dt);
        }
        multiply_spectral(u, &self.half, plan);
    }
}

/// Strang step for `i∂_t v = -ε⁻¹Bv - B⁻¹f̃(v)`, `B = (1 - εΔ)^{1/2}`.
///
/// The nonlinear substep conserves `v₊ + v̄₋`, so `f̃(v)` is frozen over the
/// substep and the flow is `v ← v + i dt B⁻¹ f̃(v)`.
#[derive(Debug, Clone)]
pub struct StrangNkg {
    dt: f64,
    lambda: f64,
    /// `e^{i(dt/2ε)B}`
    half: Vec<Complex64>,
    /// `i dt B⁻¹`
    kick: Vec<Complex64>,
    nx: usize,
}

impl StrangNkg {
    pub fn new(model: &NkgModel, dt: f64) -> Result<Self> {
        check_step(dt)?;
        let eps = model.epsilon();
        // (dt/2ε)·b(ξ) = dt/2ε + (dt/2)·a_ε(ξ)
        let fast = DoubleDouble::div_f64(dt, 2.0 * eps)
            .rem_euclid(TWO_PI)
            .to_f64();
        let half = model
            .a_eps_symbol()
            .iter()
            .map(|a| Complex64::from_polar(1.0, fast + 0.5 * dt * a))
            .collect();
        let kick = model
            .grid()
            .wavenumbers()
            .iter()
            .map(|xi| I * (dt / (1.0 + eps * xi * xi).sqrt()))
            .collect();
        Ok(StrangNkg {
            dt,
            lambda: model.lambda(),
            half,
            kick,
            nx: model.grid().nx(),
        })
    }

    fn apply(&self, v: &mut [Complex64], plan: &mut Plan) {
        let n = self.nx;
        let (vp, vm) = v.split_at_mut(n);
        multiply_spectral(vp, &self.half, plan);
        multiply_spectral(vm, &self.half, plan);
        let mut g = vec![Complex64::new(0.0, 0.0); 2 * n];
        for i in 0..n {
            let w = cubic(self.lambda, (vp[i] + vm[i].conj()) * 0.5);
            g[i] = w;
            g[n + i] = w.conj();
        }
        plan.forward(&mut g);
        plan.forward(vp);
        plan.forward(vm);
        let (gp, gm) = g.split_at(n);
        for i in 0..n {
            vp[i] = (vp[i] + self.kick[i] * gp[i]) * self.half[i];
            vm[i] = (vm[i] + self.kick[i] * gm[i]) * self.half[i];
        }
        plan.inverse(vp);
        plan.inverse(vm);
    }
}

fn multiply_spectral(u: &mut [Complex64], table: &[Complex64], plan: &mut Plan) {
    plan.forward(u);
    for (z, m) in u.iter_mut().zip(table) {
        *z *= m;
    }
    plan.inverse(u);
}

/// Strang splitting for either model.
#[derive(Debug, Clone)]
pub enum Strang {
    Nkg(StrangNkg),
    Nls(StrangNls),
}

impl Strang {
    pub fn new(model: &Model, dt: f64) -> Result<Self> {
        Ok(match model {
            Model::Nkg(m) => Strang::Nkg(StrangNkg::new(m, dt)?),
            Model::Nls(m) => Strang::Nls(StrangNls::new(m, dt)?),
        })
    }

    pub fn dt(&self) -> f64 {
        match self {
            Strang::Nkg(s) => s.dt,
            Strang::Nls(s) => s.dt,
        }
    }

    fn apply(&self, u: &mut [Complex64], plan: &mut Plan) {
        match self {
            Strang::Nkg(s) => s.apply(u, plan),
            Strang::Nls(s) => s.apply(u, plan),
        }
    }

    pub fn step(&self, u: &SpatialField) -> SpatialField {
        let mut out = u.clone();
        self.apply(out.values_mut(), &mut Plan::new(u.nx()));
        out
    }
}

/// Fourth-order triple-jump composition of [`Strang`].
#[derive(Debug, Clone)]
pub struct Yoshida4 {
    outer: Strang,
    inner: Strang,
}

impl Yoshida4 {
    pub fn new(model: &Model, dt: f64) -> Result<Self> {
        let (w1, w0) = yoshida_weights();
        Ok(Yoshida4 {
            outer: Strang::new(model, w1 * dt)?,
            inner: Strang::new(model, w0 * dt)?,
        })
    }

    fn apply(&self, u: &mut [Complex64], plan: &mut Plan) {
        self.outer.apply(u, plan);
        self.inner.apply(u, plan);
        self.outer.apply(u, plan);
    }

    pub fn step(&self, u: &SpatialField) -> SpatialField {
        let mut out = u.clone();
        self.apply(out.values_mut(), &mut Plan::new(u.nx()));
        out
    }
}

/// `strang_step_nls(u, dt, ε, γ)` as a one-off call.
pub fn strang_step_nls(
    u: &SpatialField,
    dt: f64,
    eps: f64,
    gamma: &SpatialField,
) -> Result<SpatialField> {
    if dt <= 0.0 {
        return Err(argument("time step must be positive"));
    }
    let model = NlsModel::new(*u.grid(), eps, gamma)?;
    Ok(Strang::Nls(StrangNls::new(&model, dt)?).step(u))
}

/// `strang_step_nkg(v, dt, ε, λ)` as a one-off call.
pub fn strang_step_nkg(v: &SpatialField, dt: f64, eps: f64, lambda: f64) -> Result<SpatialField> {
    if dt <= 0.0 {
        return Err(argument("time step must be positive"));
    }
    let model = NkgModel::new(*v.grid(), eps, lambda)?;
    Ok(Strang::Nkg(StrangNkg::new(&model, dt)?).step(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingOrder {
    Strang,
    Yoshida4,
}

/// Integrates the unfiltered equation from `u0` over `[0, t_final]` with
/// `n_steps` splitting steps.
pub fn run_splitting(
    model: &Model,
    u0: &SpatialField,
    t_final: f64,
    n_steps: usize,
    order: SplittingOrder,
) -> Result<SpatialField> {
    run_splitting_with(model, u0, t_final, n_steps, order, |_, _| {})
}

/// As [`run_splitting`], also returning `(t, u(t))` after every `every`
/// steps (and at `t = 0`).
pub fn run_splitting_sampled(
    model: &Model,
    u0: &SpatialField,
    t_final: f64,
    n_steps: usize,
    order: SplittingOrder,
    every: usize,
) -> Result<Vec<(f64, SpatialField)>> {
    if every == 0 {
        return Err(argument("sampling interval must be positive"));
    }
    let dt = t_final / n_steps as f64;
    let mut out = vec![(0.0, u0.clone())];
    run_splitting_with(model, u0, t_final, n_steps, order, |n, buf| {
        if n % every == 0 {
            let f = SpatialField::from_raw(*u0.grid(), u0.ncomp(), buf.to_vec());
            out.push((n as f64 * dt, f));
        }
    })?;
    Ok(out)
}

fn run_splitting_with(
    model: &Model,
    u0: &SpatialField,
    t_final: f64,
    n_steps: usize,
    order: SplittingOrder,
    mut visit: impl FnMut(usize, &[Complex64]),
) -> Result<SpatialField> {
    if n_steps == 0 || !(t_final > 0.0) {
        return Err(argument("splitting run needs n_steps ≥ 1 and t_final > 0"));
    }
    if u0.grid() != model.grid() || u0.ncomp() != model.field().ncomp() {
        return Err(argument("state does not match the model grid"));
    }
    let dt = t_final / n_steps as f64;
    let mut plan = Plan::new(u0.nx());
    let mut u = u0.clone();
    let buf = u.values_mut();
    let step: Box<StepFn> = match order {
        SplittingOrder::Strang => {
            let s = Strang::new(model, dt)?;
            Box::new(move |b, p| s.apply(b, p))
        }
        SplittingOrder::Yoshida4 => {
            let s = Yoshida4::new(model, dt)?;
            Box::new(move |b, p| s.apply(b, p))
        }
    };
    for n in 1..=n_steps {
        step(buf, &mut plan);
        if (n.is_multiple_of(1024) || n == n_steps)
            && !buf.iter().all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(Error::Diverged { step: n });
        }
        visit(n, buf);
    }
    Ok(u)
}

type StepFn = dyn Fn(&mut [Complex64], &mut Plan);

/// τ nodes used for the NKG averaged nonlinearity; its integrand is a
/// trigonometric polynomial of degree 4 in τ.
pub const NKG_AVERAGE_NODES: usize = 16;

/// Right-hand side of the averaged (ε → 0) equation.
///
/// - NKG: `∂_t w = i[-½Δw + (1/2π)∫ e^{-iτ} f̃(e^{iτ}w) dτ]`
/// - NLS: `∂_t w = -(i/P)∫ e^{-iτΔ}(γ|e^{iτΔ}w|² e^{iτΔ}w) dτ`
///
/// The τ integral is the rectangle rule on `ntau` nodes.
pub fn averaged_rhs(model: &Model, w: &SpatialField, ntau: usize) -> Result<SpatialField> {
    if w.grid() != model.grid() || w.ncomp() != model.field().ncomp() {
        return Err(argument("state does not match the model grid"));
    }
    match model {
        Model::Nls(m) => {
            let tg = m.tau_grid(ntau)?;
            Ok(tau_average(&m.eval(0.0, &TwoScaleField::constant(tg, w))))
        }
        Model::Nkg(m) => {
            if ntau == 0 {
                return Err(argument("need at least one quadrature node"));
            }
            let n = w.nx();
            let (wp, wm) = (w.component(0), w.component(1));
            let mut acc = vec![Complex64::new(0.0, 0.0); 2 * n];
            for j in 0..ntau {
                let s =
                    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / ntau as f64);
                for i in 0..n {
                    let g = cubic(m.lambda(), (s * wp[i] + (s * wm[i]).conj()) * 0.5);
                    acc[i] += s.conj() * g;
                    acc[n + i] += s.conj() * g.conj();
                }
            }
            let scale = I / ntau as f64;
            let mut spec = w.spectrum();
            let xi = m.grid().wavenumbers();
            for c in 0..2 {
                for (k, z) in spec[c * n..(c + 1) * n].iter_mut().enumerate() {
                    *z *= I * (0.5 * xi[k] * xi[k]);
                }
            }
            let lin = SpatialField::from_spectrum(*w.grid(), 2, spec);
            let values = lin
                .values()
                .iter()
                .zip(&acc)
                .map(|(l, a)| l + a * scale)
                .collect();
            SpatialField::new(*w.grid(), 2, values)
        }
    }
}

/// Classical RK4 on [`averaged_rhs`].
pub fn integrate_averaged(
    model: &Model,
    w0: &SpatialField,
    t_final: f64,
    n_steps: usize,
    ntau: usize,
) -> Result<SpatialField> {
    if n_steps == 0 || !(t_final > 0.0) {
        return Err(argument("averaged run needs n_steps ≥ 1 and t_final > 0"));
    }
    let h = t_final / n_steps as f64;
    let mut w = w0.clone();
    for n in 0..n_steps {
        let k1 = averaged_rhs(model, &w, ntau);
        let k1 = k1.map_err(|_| Error::Diverged { step: n + 1 })?;
        let k2 = averaged_rhs(model, &(&w + &(&k1 * (0.5 * h))), ntau)
            .map_err(|_| Error::Diverged { step: n + 1 })?;
        let k3 = averaged_rhs(model, &(&w + &(&k2 * (0.5 * h))), ntau)
            .map_err(|_| Error::Diverged { step: n + 1 })?;
        let k4 = averaged_rhs(model, &(&w + &(&k3 * h)), ntau)
            .map_err(|_| Error::Diverged { step: n + 1 })?;
        let incr = &(&(&k1 + &k4) + &(&(&k2 + &k3) * 2.0)) * (h / 6.0);
        w = &w + &incr;
        if !w.is_finite() {
            return Err(Error::Diverged { step: n + 1 });
        }
    }
    Ok(w)
}

/// Unfiltered approximation built from the averaged solution at time `t`:
/// `e^{i(t/ε)Δ}w` for NLS, `e^{it/ε}w` for NKG.
pub fn averaged_to_state(model: &Model, w: &SpatialField, t: f64) -> SpatialField {
    match model {
        Model::Nls(m) => m.unfilter(w, t),
        Model::Nkg(m) => {
            let phase = reduced_fast_time(t, m.epsilon(), TWO_PI);
            w.scale(Complex64::from_polar(1.0, phase))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReferencePolicy {
    /// The grids and steps quoted for the published figures.
    Paper,
    /// Desk-scale variant: same Yoshida steps, UA2 on the run's own grids
    /// with `2^14` steps.
    #[default]
    Desk,
}

impl fmt::Display for ReferencePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferencePolicy::Paper => "paper",
            ReferencePolicy::Desk => "desk",
        })
    }
}

impl FromStr for ReferencePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(ReferencePolicy::Paper),
            "desk" => Ok(ReferencePolicy::Desk),
            _ => Err(argument(format!("unknown reference policy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceSolver {
    Yoshida4,
    Ua2,
}

impl fmt::Display for ReferenceSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceSolver::Yoshida4 => "yoshida4",
            ReferenceSolver::Ua2 => "ua2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub solver: ReferenceSolver,
    pub n_steps: usize,
    pub nx: usize,
    /// τ points for the UA2 solver; 0 for splitting.
    pub ntau: usize,
}

impl Recipe {
    pub fn dt(&self, t_final: f64) -> f64 {
        t_final / self.n_steps as f64
    }
}

/// Smallest ε handled by the splitting reference.
pub const SPLITTING_EPS_MIN: f64 = 1e-2;
/// `2^14` steps for the desk-scale UA2 reference.
pub const DESK_UA2_STEPS: usize = 1 << 14;

pub fn recipe(
    policy: ReferencePolicy,
    id: ModelId,
    eps: f64,
    t_final: f64,
    nx: usize,
    ntau: usize,
) -> Recipe {
    let paper_nx = match id {
        ModelId::Nkg => 256,
        ModelId::Nls => 128,
    };
    if eps >= SPLITTING_EPS_MIN * (1.0 - 1e-12) {
        // Δt = ε T_f / c
        let c = match id {
            ModelId::Nkg => 2000.0,
            ModelId::Nls => 32768.0,
        };
        Recipe {
            solver: ReferenceSolver::Yoshida4,
            n_steps: (c / eps).round().max(1.0) as usize,
            nx: if policy == ReferencePolicy::Paper {
                paper_nx
            } else {
                nx
            },
            ntau: 0,
        }
    } else {
        match policy {
            ReferencePolicy::Paper => Recipe {
                solver: ReferenceSolver::Ua2,
                // Δt = 2π/512000, rounded to an integer number of steps
                n_steps: (t_final * 512000.0 / (2.0 * std::f64::consts::PI))
                    .round()
                    .max(1.0) as usize,
                nx: paper_nx,
                ntau: match id {
                    ModelId::Nkg => 128,
                    ModelId::Nls => 4096,
                },
            },
            ReferencePolicy::Desk => Recipe {
                solver: ReferenceSolver::Ua2,
                n_steps: DESK_UA2_STEPS,
                nx,
                ntau,
            },
        }
    }
}

/// High-accuracy unfiltered state at `t_final` with the recipe that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub model: ModelId,
    pub eps: f64,
    pub t_final: f64,
    pub recipe: Recipe,
    pub state: SpatialField,
    pub checksum: f64,
    /// Estimated relative H¹ error of `state`, from a companion run with
    /// half the steps.
    pub self_error: f64,
}

impl ReferenceSolution {
    pub fn new(
        model: ModelId,
        eps: f64,
        t_final: f64,
        recipe: Recipe,
        state: SpatialField,
        self_error: f64,
    ) -> Self {
        let checksum = value_checksum(state.values());
        ReferenceSolution {
            model,
            eps,
            t_final,
            recipe,
            state,
            checksum,
            self_error,
        }
    }

    pub fn nx(&self) -> usize {
        self.state.nx()
    }

    pub fn solver(&self) -> ReferenceSolver {
        self.recipe.solver
    }

    pub fn dt_used(&self) -> f64 {
        self.recipe.dt(self.t_final)
    }

    /// The physical wave `u(t_final)`.
    pub fn physical(&self) -> SpatialField {
        match self.model {
            ModelId::Nkg => nkg_reconstruct(&self.state, self.eps).0,
            ModelId::Nls => self.state.clone(),
        }
    }
}

/// Sum of every real and imaginary part, in storage order.
pub fn value_checksum(values: &[Complex64]) -> f64 {
    values.iter().fold(0.0, |acc, z| acc + z.re + z.im)
}

/// Builds the reference for `model` started from `state0` (unfiltered state
/// on the model grid). `ntau` is the run's τ resolution, used by the desk
/// policy.
pub fn build_reference(
    model: &Model,
    state0: &SpatialField,
    t_final: f64,
    policy: ReferencePolicy,
    ntau: usize,
) -> Result<ReferenceSolution> {
    let eps = model.epsilon();
    let r = recipe(policy, model.id(), eps, t_final, model.grid().nx(), ntau);
    let m = model.with_nx(r.nx)?;
    let u0 = state0.resample(r.nx)?;
    let fine = run_recipe(&m, &u0, t_final, &r, r.n_steps)?;
    let coarse = run_recipe(&m, &u0, t_final, &r, (r.n_steps / 2).max(1))?;
    let order = match r.solver {
        ReferenceSolver::Yoshida4 => 4,
        ReferenceSolver::Ua2 => 2,
    };
    let (pf, pc) = (m.physical(&fine), m.physical(&coarse));
    let denom = hs_norm(&pf, 1.0);
    let self_error = if denom > 0.0 {
        hs_norm(&(&pf - &pc), 1.0) / denom / ((1u32 << order) - 1) as f64
    } else {
        0.0
    };
    Ok(ReferenceSolution::new(
        model.id(),
        eps,
        t_final,
        r,
        fine,
        self_error,
    ))
}

fn run_recipe(
    m: &Model,
    u0: &SpatialField,
    t_final: f64,
    r: &Recipe,
    n_steps: usize,
) -> Result<SpatialField> {
    match r.solver {
        ReferenceSolver::Yoshida4 => {
            run_splitting(m, u0, t_final, n_steps, SplittingOrder::Yoshida4)
        }
        ReferenceSolver::Ua2 => {
            let f = m.field();
            let tg = f.tau_grid(r.ntau)?;
            let data = prepare_initial_data(f, &f.filter(u0, 0.0), &tg, PreparationOrder::Two)?;
            let tr = integrate(
                f,
                &data,
                t_final,
                n_steps,
                Scheme::Ua2,
                IntegrateOptions::default(),
                &mut [],
            )?;
            Ok(extract_at_phase(f, &tr.final_state, t_final, tr.tau_star))
        }
    }
}
