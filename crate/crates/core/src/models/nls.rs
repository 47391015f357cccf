//! Filtered cubic Schrödinger field
//! `F(τ, u) = -i e^{-iτΔ}(γ |e^{iτΔ}u|² e^{iτΔ}u)` on the torus `[0, a]`.
//!
//! On the torus `τξ_k² = 2π (τ/P) k²` with `P = a²/(2π)`, so at the τ nodes
//! `τ_j = jP/N_τ` every free-flight phase is an exact root of unity indexed
//! by `j·k² mod N_τ`.

use num_complex::Complex64;

use super::{cubic, cubic_derivative, turn, two_thirds_mask, ModelId, VectorField};
use crate::dd::{period_from_length, DoubleDouble};
use crate::error::{argument, Result};
use crate::spectral::fft::Plan;
use crate::spectral::{SpatialField, SpatialGrid, TwoScaleField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `γ(x) = 2 cos(2x)`.
pub fn paper_gamma(grid: SpatialGrid) -> SpatialField {
    SpatialField::from_real_fn(grid, |x| 2.0 * (2.0 * x).cos())
}

fn unit_roots(n: usize) -> Vec<Complex64> {
    (0..n).map(|m| turn(-(m as f64) / n as f64)).collect()
}

#[derive(Debug, Clone)]
pub struct NlsModel {
    grid: SpatialGrid,
    eps: f64,
    gamma: Vec<f64>,
    period: DoubleDouble,
    k2: Vec<u64>,
    dealias: Option<Vec<f64>>,
}

/// Per-slice scratch buffers.
struct Work {
    plan: Plan,
    v: Vec<Complex64>,
    dv: Vec<Complex64>,
}

impl Work {
    fn new(nx: usize) -> Self {
        Work {
            plan: Plan::new(nx),
            v: vec![Complex64::new(0.0, 0.0); nx],
            dv: vec![Complex64::new(0.0, 0.0); nx],
        }
    }
}

impl NlsModel {
    pub fn new(grid: SpatialGrid, eps: f64, gamma: &SpatialField) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(argument(format!("epsilon must be positive, got {eps}")));
        }
        if gamma.grid() != &grid || gamma.ncomp() != 1 {
            return Err(argument("gamma must be a scalar field on the model grid"));
        }
        if gamma.values().iter().any(|z| z.im != 0.0) {
            return Err(argument("gamma must be real-valued"));
        }
        let k2 = (0..grid.nx())
            .map(|i| {
                let k = grid.mode(i).unsigned_abs();
                k * k
            })
            .collect();
        Ok(NlsModel {
            grid,
            eps,
            gamma: gamma.values().iter().map(|z| z.re).collect(),
            period: period_from_length(grid.length()),
            k2,
            dealias: None,
        })
    }

    /// The standard test problem: `[0, 2π]`, `γ = 2cos(2x)`.
    pub fn paper(nx: usize, eps: f64) -> Result<Self> {
        let grid = SpatialGrid::new(0.0, 2.0 * std::f64::consts::PI, nx)?;
        NlsModel::new(grid, eps, &paper_gamma(grid))
    }

    /// `u₀ = cos x + sin x`.
    pub fn paper_initial_data(grid: SpatialGrid) -> SpatialField {
        SpatialField::from_real_fn(grid, |x| x.cos() + x.sin())
    }

    /// Enables the 2/3-rule on the cubic term.
    pub fn with_dealiasing(mut self, on: bool) -> Self {
        self.dealias = on.then(|| two_thirds_mask(&self.grid));
        self
    }

    pub fn gamma(&self) -> SpatialField {
        let values = self.gamma.iter().map(|&g| Complex64::new(g, 0.0)).collect();
        SpatialField::from_raw(self.grid, 1, values)
    }

    /// Same problem with a different ε.
    pub fn with_epsilon(&self, eps: f64) -> Result<Self> {
        let mut m = self.clone();
        if !(eps.is_finite() && eps > 0.0) {
            return Err(argument(format!("epsilon must be positive, got {eps}")));
        }
        m.eps = eps;
        Ok(m)
    }

    /// Same problem on `nx` points of the same interval; `γ` is resampled
    /// spectrally.
    pub fn with_nx(&self, nx: usize) -> Result<Self> {
        let gamma = self.gamma().resample(nx)?;
        let real = SpatialField::from_raw(
            *gamma.grid(),
            1,
            gamma
                .values()
                .iter()
                .map(|z| Complex64::new(z.re, 0.0))
                .collect(),
        );
        NlsModel::new(*gamma.grid(), self.eps, &real)
            .map(|m| m.with_dealiasing(self.dealias.is_some()))
    }

    /// Free-flight multipliers `e^{-iτ_jξ²}` at node `j`, looked up in the
    /// table `roots[m] = e^{-2πi m/N_τ}`.
    fn node_phases(&self, roots: &[Complex64], j: usize, out: &mut [Complex64]) {
        let n = roots.len() as u64;
        let j = j as u64;
        for (o, &k2) in out.iter_mut().zip(&self.k2) {
            *o = roots[((j * (k2 % n)) % n) as usize];
        }
    }

    /// `e^{-iτξ²}` at arbitrary `τ`.
    fn phases_at(&self, tau: f64) -> Vec<Complex64> {
        let frac = (DoubleDouble::from_f64(tau) / self.period).fract();
        self.k2
            .iter()
            .map(|&k2| turn(-(frac * k2 as f64).fract().to_f64()))
            .collect()
    }

    /// `e^{+i s ξ²}` where `s = (t/ε) mod P`; the filter at time `t`.
    fn filter_phases(&self, t: f64) -> Vec<Complex64> {
        let frac = (DoubleDouble::div_f64(t, self.eps) / self.period).fract();
        self.k2
            .iter()
            .map(|&k2| turn((frac * k2 as f64).fract().to_f64()))
            .collect()
    }

    fn apply(&self, buf: &mut [Complex64], table: &[Complex64], plan: &mut Plan, conj: bool) {
        plan.forward(buf);
        if conj {
            for (z, p) in buf.iter_mut().zip(table) {
                *z *= p.conj();
            }
        } else {
            for (z, p) in buf.iter_mut().zip(table) {
                *z *= p;
            }
        }
        plan.inverse(buf);
    }

    fn back_to_filtered(&self, g: &mut [Complex64], phases: &[Complex64], plan: &mut Plan) {
        plan.forward(g);
        match &self.dealias {
            Some(mask) => {
                for ((z, p), m) in g.iter_mut().zip(phases).zip(mask) {
                    *z *= p.conj() * (-I) * *m;
                }
            }
            None => {
                for (z, p) in g.iter_mut().zip(phases) {
                    *z *= p.conj() * (-I);
                }
            }
        }
        plan.inverse(g);
    }

    fn slice_eval(
        &self,
        phases: &[Complex64],
        u: &[Complex64],
        out: &mut [Complex64],
        w: &mut Work,
    ) {
        w.v.copy_from_slice(u);
        self.apply(&mut w.v, phases, &mut w.plan, false);
        for ((o, v), g) in out.iter_mut().zip(&w.v).zip(&self.gamma) {
            *o = cubic(*g, *v);
        }
        self.back_to_filtered(out, phases, &mut w.plan);
    }

    fn slice_directional(
        &self,
        phases: &[Complex64],
        u: &[Complex64],
        dir: &[Complex64],
        out: &mut [Complex64],
        w: &mut Work,
    ) {
        w.v.copy_from_slice(u);
        self.apply(&mut w.v, phases, &mut w.plan, false);
        w.dv.copy_from_slice(dir);
        self.apply(&mut w.dv, phases, &mut w.plan, false);
        for (((o, v), dv), g) in out.iter_mut().zip(&w.v).zip(&w.dv).zip(&self.gamma) {
            *o = cubic_derivative(*g, *v, *dv);
        }
        self.back_to_filtered(out, phases, &mut w.plan);
    }
}

impl VectorField for NlsModel {
    fn id(&self) -> ModelId {
        ModelId::Nls
    }

    fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    fn epsilon(&self) -> f64 {
        self.eps
    }

    fn ncomp(&self) -> usize {
        1
    }

    fn period(&self) -> f64 {
        self.period.to_f64()
    }

    fn period_dd(&self) -> DoubleDouble {
        self.period
    }

    fn eval_at(&self, _t: f64, tau: f64, u: &SpatialField) -> SpatialField {
        let mut out = vec![Complex64::new(0.0, 0.0); u.nx()];
        let mut w = Work::new(u.nx());
        self.slice_eval(&self.phases_at(tau), u.values(), &mut out, &mut w);
        SpatialField::from_raw(self.grid, 1, out)
    }

    fn eval(&self, _t: f64, u: &TwoScaleField) -> TwoScaleField {
        let roots = unit_roots(u.ntau());
        let mut w = Work::new(self.grid.nx());
        let mut phases = vec![Complex64::new(0.0, 0.0); self.grid.nx()];
        u.map_slices(|j, src, dst| {
            self.node_phases(&roots, j, &mut phases);
            self.slice_eval(&phases, src, dst, &mut w);
        })
    }

    fn directional(&self, _t: f64, u: &TwoScaleField, dir: &TwoScaleField) -> TwoScaleField {
        assert!(u.same_layout(dir));
        let roots = unit_roots(u.ntau());
        let mut w = Work::new(self.grid.nx());
        let mut phases = vec![Complex64::new(0.0, 0.0); self.grid.nx()];
        u.map_slices(|j, src, dst| {
            self.node_phases(&roots, j, &mut phases);
            self.slice_directional(&phases, src, dir.slice(j), dst, &mut w);
        })
    }

    fn directional_at(
        &self,
        _t: f64,
        tau: f64,
        u: &SpatialField,
        dir: &SpatialField,
    ) -> SpatialField {
        let mut out = vec![Complex64::new(0.0, 0.0); u.nx()];
        let mut w = Work::new(u.nx());
        self.slice_directional(
            &self.phases_at(tau),
            u.values(),
            dir.values(),
            &mut out,
            &mut w,
        );
        SpatialField::from_raw(self.grid, 1, out)
    }

    /// The filtered NLS field is autonomous.
    fn time_derivative(&self, _t: f64, u: &TwoScaleField) -> TwoScaleField {
        TwoScaleField::zeros_like(u)
    }

    /// `ũ = e^{-i(t/ε)Δ} u`
    fn filter(&self, f: &SpatialField, t: f64) -> SpatialField {
        let table = self.filter_phases(t);
        crate::spectral::apply_x_table(f, &table)
    }

    /// `u = e^{i(t/ε)Δ} ũ`
    fn unfilter(&self, f: &SpatialField, t: f64) -> SpatialField {
        let table: Vec<Complex64> = self.filter_phases(t).iter().map(|z| z.conj()).collect();
        crate::spectral::apply_x_table(f, &table)
    }
}
