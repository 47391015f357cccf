//! Klein-Gordon in the nonrelativistic scaling, written for the filtered
//! first-order unknown `ũ = e^{-i(t/ε)B} v`, `B = (1 - εΔ)^{1/2}`:
//!
//! `F(t, τ, u) = i B⁻¹ e^{-iτ} e^{-itA_ε} f̃(e^{iτ} e^{itA_ε} u)`,
//! `A_ε = (B - 1)/ε`, `f̃(v₊, v₋) = (f((v₊ + v̄₋)/2), f((v̄₊ + v₋)/2))`.
//!
//! Real solutions `u` correspond to `v₋ = v₊`; that relation is preserved
//! by `F`.

use num_complex::Complex64;

use super::{cubic, cubic_derivative, turn, two_thirds_mask, ModelId, VectorField};
use crate::dd::{reduced_fast_time, DoubleDouble, TWO_PI};
use crate::error::{argument, Result};
use crate::spectral::fft::Plan;
use crate::spectral::{SpatialField, SpatialGrid, TwoScaleField};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct NkgModel {
    grid: SpatialGrid,
    eps: f64,
    lambda: f64,
    /// `(1 + εξ²)^{-1/2}`
    binv: Vec<f64>,
    /// `A_ε` symbol, evaluated as `ξ²/(√(1+εξ²) + 1)` to avoid cancellation
    aeps: Vec<f64>,
    dealias: Option<Vec<f64>>,
}

struct Work {
    plan: Plan,
    zp: Vec<Complex64>,
    zm: Vec<Complex64>,
    dzp: Vec<Complex64>,
    dzm: Vec<Complex64>,
}

impl Work {
    fn new(nx: usize) -> Self {
        Work {
            plan: Plan::new(nx),
            zp: vec![ZERO; nx],
            zm: vec![ZERO; nx],
            dzp: vec![ZERO; nx],
            dzm: vec![ZERO; nx],
        }
    }
}

impl NkgModel {
    pub fn new(grid: SpatialGrid, eps: f64, lambda: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(argument(format!("epsilon must be positive, got {eps}")));
        }
        if !lambda.is_finite() {
            return Err(argument("nonlinearity coefficient must be finite"));
        }
        let xi2: Vec<f64> = grid.wavenumbers().iter().map(|x| x * x).collect();
        let binv = xi2.iter().map(|&q| 1.0 / (1.0 + eps * q).sqrt()).collect();
        let aeps = xi2
            .iter()
            .map(|&q| q / ((1.0 + eps * q).sqrt() + 1.0))
            .collect();
        Ok(NkgModel {
            grid,
            eps,
            lambda,
            binv,
            aeps,
            dealias: None,
        })
    }

    /// `f(u) = 4|u|²u` on `[-8, 8]`.
    pub fn paper(nx: usize, eps: f64) -> Result<Self> {
        NkgModel::new(SpatialGrid::new(-8.0, 8.0, nx)?, eps, 4.0)
    }

    /// `φ(x) = 2/(e^{x²} + e^{-x²})`, `γ = 0`, mapped to `v(0)`.
    pub fn paper_initial_data(grid: SpatialGrid, eps: f64) -> Result<SpatialField> {
        let phi = SpatialField::from_real_fn(grid, |x| 2.0 / ((x * x).exp() + (-x * x).exp()));
        let gamma = SpatialField::zeros(grid, 1);
        nkg_to_first_order(&phi, &gamma, eps)
    }

    pub fn with_dealiasing(mut self, on: bool) -> Self {
        self.dealias = on.then(|| two_thirds_mask(&self.grid));
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_epsilon(&self, eps: f64) -> Result<Self> {
        NkgModel::new(self.grid, eps, self.lambda)
            .map(|m| m.with_dealiasing(self.dealias.is_some()))
    }

    pub fn with_nx(&self, nx: usize) -> Result<Self> {
        NkgModel::new(self.grid.with_nx(nx)?, self.eps, self.lambda)
            .map(|m| m.with_dealiasing(self.dealias.is_some()))
    }

    /// Symbol of `A_ε` in FFT bin order.
    pub fn a_eps_symbol(&self) -> &[f64] {
        &self.aeps
    }

    fn eta(&self, t: f64) -> Vec<Complex64> {
        self.aeps
            .iter()
            .map(|&a| Complex64::from_polar(1.0, t * a))
            .collect()
    }

    /// `z = s · IDFT(m · DFT(u))` for one component.
    fn lift(
        &self,
        u: &[Complex64],
        m: &[Complex64],
        s: Complex64,
        out: &mut [Complex64],
        plan: &mut Plan,
    ) {
        out.copy_from_slice(u);
        plan.forward(out);
        for (z, e) in out.iter_mut().zip(m) {
            *z *= e;
        }
        plan.inverse(out);
        for z in out.iter_mut() {
            *z *= s;
        }
    }

    /// `i s̄ B⁻¹ e^{-itA} g` with `g` in physical space, in place; `extra`
    /// adds `c·A_ε·ĝ₀` from a second buffer already in Fourier space.
    fn project(&self, g: &mut [Complex64], eta: &[Complex64], s: Complex64, plan: &mut Plan) {
        plan.forward(g);
        self.project_spectral(g, eta, s, plan);
    }

    fn project_spectral(
        &self,
        g: &mut [Complex64],
        eta: &[Complex64],
        s: Complex64,
        plan: &mut Plan,
    ) {
        let pre = I * s.conj();
        match &self.dealias {
            Some(mask) => {
                for (i, z) in g.iter_mut().enumerate() {
                    *z *= eta[i].conj() * self.binv[i] * mask[i] * pre;
                }
            }
            None => {
                for (i, z) in g.iter_mut().enumerate() {
                    *z *= eta[i].conj() * self.binv[i] * pre;
                }
            }
        }
        plan.inverse(g);
    }

    fn slice_eval(
        &self,
        eta: &[Complex64],
        s: Complex64,
        u: &[Complex64],
        out: &mut [Complex64],
        w: &mut Work,
    ) {
        let n = self.grid.nx();
        self.lift(&u[..n], eta, s, &mut w.zp, &mut w.plan);
        self.lift(&u[n..], eta, s, &mut w.zm, &mut w.plan);
        let (op, om) = out.split_at_mut(n);
        for i in 0..n {
            let g = cubic(self.lambda, (w.zp[i] + w.zm[i].conj()) * 0.5);
            op[i] = g;
            om[i] = g.conj();
        }
        self.project(op, eta, s, &mut w.plan);
        self.project(om, eta, s, &mut w.plan);
    }

    fn slice_directional(
        &self,
        eta: &[Complex64],
        s: Complex64,
        u: &[Complex64],
        dir: &[Complex64],
        out: &mut [Complex64],
        w: &mut Work,
    ) {
        let n = self.grid.nx();
        self.lift(&u[..n], eta, s, &mut w.zp, &mut w.plan);
        self.lift(&u[n..], eta, s, &mut w.zm, &mut w.plan);
        self.lift(&dir[..n], eta, s, &mut w.dzp, &mut w.plan);
        self.lift(&dir[n..], eta, s, &mut w.dzm, &mut w.plan);
        let (op, om) = out.split_at_mut(n);
        for i in 0..n {
            let z = (w.zp[i] + w.zm[i].conj()) * 0.5;
            let dz = (w.dzp[i] + w.dzm[i].conj()) * 0.5;
            let dg = cubic_derivative(self.lambda, z, dz);
            op[i] = dg;
            om[i] = dg.conj();
        }
        self.project(op, eta, s, &mut w.plan);
        self.project(om, eta, s, &mut w.plan);
    }

    fn slice_time_derivative(
        &self,
        eta: &[Complex64],
        s: Complex64,
        u: &[Complex64],
        out: &mut [Complex64],
        w: &mut Work,
    ) {
        let n = self.grid.nx();
        // d/dt of the lifted argument is i A_ε z
        let ieta_a: Vec<Complex64> = eta
            .iter()
            .zip(&self.aeps)
            .map(|(e, a)| e * I * *a)
            .collect();
        self.lift(&u[..n], eta, s, &mut w.zp, &mut w.plan);
        self.lift(&u[n..], eta, s, &mut w.zm, &mut w.plan);
        self.lift(&u[..n], &ieta_a, s, &mut w.dzp, &mut w.plan);
        self.lift(&u[n..], &ieta_a, s, &mut w.dzm, &mut w.plan);
        let mut gp = vec![ZERO; n];
        let mut gm = vec![ZERO; n];
        let (op, om) = out.split_at_mut(n);
        for i in 0..n {
            let z = (w.zp[i] + w.zm[i].conj()) * 0.5;
            let dz = (w.dzp[i] + w.dzm[i].conj()) * 0.5;
            let g = cubic(self.lambda, z);
            let dg = cubic_derivative(self.lambda, z, dz);
            gp[i] = g;
            gm[i] = g.conj();
            op[i] = dg;
            om[i] = dg.conj();
        }
        for (g, o) in [(&mut gp, op), (&mut gm, om)] {
            w.plan.forward(g);
            w.plan.forward(o);
            // -i A_ε ĝ + (dg)^
            for i in 0..n {
                o[i] += -I * self.aeps[i] * g[i];
            }
            self.project_spectral(o, eta, s, &mut w.plan);
        }
    }

    fn node_phase(j: usize, ntau: usize) -> Complex64 {
        turn(j as f64 / ntau as f64)
    }

    fn phase_at(tau: f64) -> Complex64 {
        let r = DoubleDouble::from_f64(tau).rem_euclid(TWO_PI).to_f64();
        Complex64::from_polar(1.0, r)
    }

    /// `e^{∓i(t/ε)B}` per bin, with `t/ε` reduced modulo 2π in double-double.
    fn filter_table(&self, t: f64, sign: f64) -> Vec<Complex64> {
        let fast = reduced_fast_time(t, self.eps, TWO_PI);
        self.aeps
            .iter()
            .map(|&a| Complex64::from_polar(1.0, sign * (fast + t * a)))
            .collect()
    }
}

impl VectorField for NkgModel {
    fn id(&self) -> ModelId {
        ModelId::Nkg
    }

    fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    fn epsilon(&self) -> f64 {
        self.eps
    }

    fn ncomp(&self) -> usize {
        2
    }

    fn period(&self) -> f64 {
        TWO_PI.hi
    }

    fn period_dd(&self) -> DoubleDouble {
        TWO_PI
    }

    fn eval_at(&self, t: f64, tau: f64, u: &SpatialField) -> SpatialField {
        let mut out = vec![ZERO; 2 * u.nx()];
        let mut w = Work::new(u.nx());
        self.slice_eval(
            &self.eta(t),
            Self::phase_at(tau),
            u.values(),
            &mut out,
            &mut w,
        );
        SpatialField::from_raw(self.grid, 2, out)
    }

    fn eval(&self, t: f64, u: &TwoScaleField) -> TwoScaleField {
        let eta = self.eta(t);
        let ntau = u.ntau();
        let mut w = Work::new(self.grid.nx());
        u.map_slices(|j, src, dst| {
            self.slice_eval(&eta, Self::node_phase(j, ntau), src, dst, &mut w);
        })
    }

    fn directional(&self, t: f64, u: &TwoScaleField, dir: &TwoScaleField) -> TwoScaleField {
        assert!(u.same_layout(dir));
        let eta = self.eta(t);
        let ntau = u.ntau();
        let mut w = Work::new(self.grid.nx());
        u.map_slices(|j, src, dst| {
            self.slice_directional(
                &eta,
                Self::node_phase(j, ntau),
                src,
                dir.slice(j),
                dst,
                &mut w,
            );
        })
    }

    fn directional_at(
        &self,
        t: f64,
        tau: f64,
        u: &SpatialField,
        dir: &SpatialField,
    ) -> SpatialField {
        let mut out = vec![ZERO; 2 * u.nx()];
        let mut w = Work::new(u.nx());
        self.slice_directional(
            &self.eta(t),
            Self::phase_at(tau),
            u.values(),
            dir.values(),
            &mut out,
            &mut w,
        );
        SpatialField::from_raw(self.grid, 2, out)
    }

    fn time_derivative(&self, t: f64, u: &TwoScaleField) -> TwoScaleField {
        let eta = self.eta(t);
        let ntau = u.ntau();
        let mut w = Work::new(self.grid.nx());
        u.map_slices(|j, src, dst| {
            self.slice_time_derivative(&eta, Self::node_phase(j, ntau), src, dst, &mut w);
        })
    }

    fn filter(&self, f: &SpatialField, t: f64) -> SpatialField {
        crate::spectral::apply_x_table(f, &self.filter_table(t, -1.0))
    }

    fn unfilter(&self, f: &SpatialField, t: f64) -> SpatialField {
        crate::spectral::apply_x_table(f, &self.filter_table(t, 1.0))
    }
}

fn b_power_table(grid: &SpatialGrid, eps: f64, power: f64) -> Vec<Complex64> {
    grid.wavenumbers()
        .iter()
        .map(|xi| Complex64::new((1.0 + eps * xi * xi).powf(power), 0.0))
        .collect()
}

/// `v₊ = φ - i B⁻¹γ`, `v₋ = φ̄ - i B⁻¹γ̄` from `u(0) = φ`, `∂_t u(0) = γ/ε`.
pub fn nkg_to_first_order(
    phi: &SpatialField,
    gamma: &SpatialField,
    eps: f64,
) -> Result<SpatialField> {
    if phi.grid() != gamma.grid() || phi.ncomp() != 1 || gamma.ncomp() != 1 {
        return Err(argument(
            "phi and gamma must be scalar fields on the same grid",
        ));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(argument(format!("epsilon must be positive, got {eps}")));
    }
    let binv = b_power_table(phi.grid(), eps, -0.5);
    let bg = crate::spectral::apply_x_table(gamma, &binv);
    let bgc = crate::spectral::apply_x_table(&gamma.conj(), &binv);
    let n = phi.nx();
    let mut values = Vec::with_capacity(2 * n);
    values.extend(phi.values().iter().zip(bg.values()).map(|(p, g)| p - I * g));
    values.extend(
        phi.values()
            .iter()
            .zip(bgc.values())
            .map(|(p, g)| p.conj() - I * g),
    );
    Ok(SpatialField::from_raw(*phi.grid(), 2, values))
}

/// `u = (v₊ + v̄₋)/2`, `∂_t u = (i/2ε) B (v₊ - v̄₋)` for an unfiltered `v`.
pub fn nkg_reconstruct(v: &SpatialField, eps: f64) -> (SpatialField, SpatialField) {
    assert_eq!(v.ncomp(), 2, "expected the two-component unknown");
    let grid = *v.grid();
    let (vp, vm) = (v.component(0), v.component(1));
    let sum = vp
        .iter()
        .zip(vm)
        .map(|(a, b)| (a + b.conj()) * 0.5)
        .collect();
    let diff: Vec<Complex64> = vp.iter().zip(vm).map(|(a, b)| a - b.conj()).collect();
    let u = SpatialField::from_raw(grid, 1, sum);
    let d = SpatialField::from_raw(grid, 1, diff);
    let ut =
        crate::spectral::apply_x_table(&d, &b_power_table(&grid, eps, 0.5)).scale(I * (0.5 / eps));
    (u, ut)
}
