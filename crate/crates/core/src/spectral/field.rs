use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

use super::fft::Plan;
use super::grid::{SpatialGrid, TauGrid};
use crate::error::{argument, domain, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex samples of `ncomp` functions of `x`, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    grid: SpatialGrid,
    ncomp: usize,
    values: Vec<Complex64>,
}

impl SpatialField {
    pub fn new(grid: SpatialGrid, ncomp: usize, values: Vec<Complex64>) -> Result<Self> {
        if ncomp == 0 {
            return Err(argument("field needs at least one component"));
        }
        if values.len() != ncomp * grid.nx() {
            return Err(argument(format!(
                "expected {} values, got {}",
                ncomp * grid.nx(),
                values.len()
            )));
        }
        if values
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(domain("non-finite field value"));
        }
        Ok(SpatialField {
            grid,
            ncomp,
            values,
        })
    }

    pub(crate) fn from_raw(grid: SpatialGrid, ncomp: usize, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), ncomp * grid.nx());
        SpatialField {
            grid,
            ncomp,
            values,
        }
    }

    pub fn zeros(grid: SpatialGrid, ncomp: usize) -> Self {
        Self::from_raw(grid, ncomp, vec![ZERO; ncomp * grid.nx()])
    }

    /// Samples `f(component, x)` at the grid points.
    pub fn from_fn(grid: SpatialGrid, ncomp: usize, f: impl Fn(usize, f64) -> Complex64) -> Self {
        let xs = grid.points();
        let values = (0..ncomp)
            .flat_map(|c| xs.iter().map(move |&x| (c, x)))
            .map(|(c, x)| f(c, x))
            .collect();
        Self::from_raw(grid, ncomp, values)
    }

    /// Real-valued single-component field.
    pub fn from_real_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, 1, |_, x| Complex64::new(f(x), 0.0))
    }

    /// Inverse of [`SpatialField::spectrum`].
    pub fn from_spectrum(grid: SpatialGrid, ncomp: usize, mut spec: Vec<Complex64>) -> Self {
        let mut plan = Plan::new(grid.nx());
        plan.inverse(&mut spec);
        Self::from_raw(grid, ncomp, spec)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn nx(&self) -> usize {
        self.grid.nx()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.nx();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.nx();
        &mut self.values[c * n..(c + 1) * n]
    }

    /// Single-component field holding component `c`.
    pub fn extract_component(&self, c: usize) -> SpatialField {
        Self::from_raw(self.grid, 1, self.component(c).to_vec())
    }

    /// Normalized DFT coefficients `f̂_k = (1/nx) Σ_m f(x_m) e^{-iξ_k (x_m - x0)}`,
    /// component-major, FFT bin order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        Plan::new(self.nx()).forward(&mut buf);
        buf
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> SpatialField {
        let values = self.values.iter().map(|z| z.conj()).collect();
        Self::from_raw(self.grid, self.ncomp, values)
    }

    pub fn scale(&self, a: Complex64) -> SpatialField {
        let values = self.values.iter().map(|z| z * a).collect();
        Self::from_raw(self.grid, self.ncomp, values)
    }

    fn check_compatible(&self, other: &SpatialField) {
        assert!(
            self.grid == other.grid && self.ncomp == other.ncomp,
            "incompatible spatial fields"
        );
    }

    /// Spectral resampling onto `nx` points of the same interval: Fourier
    /// coefficients are truncated or zero-padded; the Nyquist bin is split
    /// symmetrically when padding and folded when truncating.
    pub fn resample(&self, nx: usize) -> Result<SpatialField> {
        let grid = self.grid.with_nx(nx)?;
        if nx == self.nx() {
            return Ok(self.clone());
        }
        let spec = self.spectrum();
        let n_old = self.nx();
        let mut out = vec![ZERO; self.ncomp * nx];
        for c in 0..self.ncomp {
            let src = &spec[c * n_old..(c + 1) * n_old];
            let dst = &mut out[c * nx..(c + 1) * nx];
            for (i, &coef) in src.iter().enumerate() {
                let k = self.grid.mode(i);
                let nyq_old = 2 * i == n_old;
                if nyq_old && nx > n_old {
                    let half = coef * 0.5;
                    let m = (n_old / 2) as i64;
                    dst[grid.bin_of_mode(-m).unwrap()] += half;
                    dst[(m as usize) % nx] += half;
                    continue;
                }
                let kk = k.unsigned_abs() as usize;
                if 2 * kk < nx {
                    dst[grid.bin_of_mode(k).unwrap()] += coef;
                } else if 2 * kk == nx {
                    dst[nx / 2] += coef;
                }
            }
        }
        Ok(SpatialField::from_spectrum(grid, self.ncomp, out))
    }
}

impl<'a> Sub<&'a SpatialField> for &'a SpatialField {
    type Output = SpatialField;
    fn sub(self, rhs: &SpatialField) -> SpatialField {
        self.check_compatible(rhs);
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| a - b)
            .collect();
        SpatialField::from_raw(self.grid, self.ncomp, values)
    }
}

impl<'a> Add<&'a SpatialField> for &'a SpatialField {
    type Output = SpatialField;
    fn add(self, rhs: &SpatialField) -> SpatialField {
        self.check_compatible(rhs);
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| a + b)
            .collect();
        SpatialField::from_raw(self.grid, self.ncomp, values)
    }
}

impl Mul<f64> for &SpatialField {
    type Output = SpatialField;
    fn mul(self, a: f64) -> SpatialField {
        self.scale(Complex64::new(a, 0.0))
    }
}

/// The augmented unknown `U(τ, x)`: one [`SpatialField`] layout per τ node,
/// stored `[ntau][ncomp][nx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoScaleField {
    taugrid: TauGrid,
    grid: SpatialGrid,
    ncomp: usize,
    values: Vec<Complex64>,
}

impl TwoScaleField {
    pub fn new(
        taugrid: TauGrid,
        grid: SpatialGrid,
        ncomp: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.len() != taugrid.ntau() * ncomp * grid.nx() {
            return Err(argument("two-scale field has wrong number of values"));
        }
        Ok(Self::from_raw(taugrid, grid, ncomp, values))
    }

    pub(crate) fn from_raw(
        taugrid: TauGrid,
        grid: SpatialGrid,
        ncomp: usize,
        values: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(values.len(), taugrid.ntau() * ncomp * grid.nx());
        TwoScaleField {
            taugrid,
            grid,
            ncomp,
            values,
        }
    }

    pub fn zeros(taugrid: TauGrid, grid: SpatialGrid, ncomp: usize) -> Self {
        Self::from_raw(
            taugrid,
            grid,
            ncomp,
            vec![ZERO; taugrid.ntau() * ncomp * grid.nx()],
        )
    }

    pub fn zeros_like(other: &TwoScaleField) -> Self {
        Self::zeros(other.taugrid, other.grid, other.ncomp)
    }

    /// τ-independent field equal to `f` on every slice.
    pub fn constant(taugrid: TauGrid, f: &SpatialField) -> Self {
        let mut values = Vec::with_capacity(taugrid.ntau() * f.values.len());
        for _ in 0..taugrid.ntau() {
            values.extend_from_slice(&f.values);
        }
        Self::from_raw(taugrid, f.grid, f.ncomp, values)
    }

    /// `U(τ_j) = f(τ_j)` for every node.
    pub fn from_tau_fn(taugrid: TauGrid, f: impl Fn(f64) -> SpatialField) -> Self {
        let slices: Vec<SpatialField> = taugrid.nodes().into_iter().map(f).collect();
        let grid = slices[0].grid;
        let ncomp = slices[0].ncomp;
        let mut values = Vec::with_capacity(taugrid.ntau() * ncomp * grid.nx());
        for s in &slices {
            assert!(s.grid == grid && s.ncomp == ncomp, "inconsistent slices");
            values.extend_from_slice(&s.values);
        }
        Self::from_raw(taugrid, grid, ncomp, values)
    }

    pub fn taugrid(&self) -> &TauGrid {
        &self.taugrid
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn ntau(&self) -> usize {
        self.taugrid.ntau()
    }

    pub fn slice_len(&self) -> usize {
        self.ncomp * self.grid.nx()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn slice(&self, j: usize) -> &[Complex64] {
        let n = self.slice_len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn slice_mut(&mut self, j: usize) -> &mut [Complex64] {
        let n = self.slice_len();
        &mut self.values[j * n..(j + 1) * n]
    }

    /// Owned copy of the slice at node `j`.
    pub fn slice_field(&self, j: usize) -> SpatialField {
        SpatialField::from_raw(self.grid, self.ncomp, self.slice(j).to_vec())
    }

    pub fn set_slice(&mut self, j: usize, f: &SpatialField) {
        assert!(f.grid == self.grid && f.ncomp == self.ncomp);
        self.slice_mut(j).copy_from_slice(&f.values);
    }

    pub fn same_layout(&self, other: &TwoScaleField) -> bool {
        self.taugrid == other.taugrid && self.grid == other.grid && self.ncomp == other.ncomp
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Normalized `L²(τ, x)` norm: root mean square over all collocation
    /// points, summed over components.
    pub fn l2_norm(&self) -> f64 {
        let npts = (self.ntau() * self.grid.nx()) as f64;
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / npts).sqrt()
    }

    /// Real part of the normalized `L²(τ, x)` inner product.
    pub fn inner_re(&self, other: &TwoScaleField) -> f64 {
        assert!(self.same_layout(other));
        let npts = (self.ntau() * self.grid.nx()) as f64;
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a * b.conj()).re)
            .sum::<f64>()
            / npts
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `self + a·other`
    pub fn axpy(&self, a: f64, other: &TwoScaleField) -> TwoScaleField {
        assert!(self.same_layout(other), "incompatible two-scale fields");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + y * a)
            .collect();
        Self::from_raw(self.taugrid, self.grid, self.ncomp, values)
    }

    pub fn scale(&self, a: Complex64) -> TwoScaleField {
        let values = self.values.iter().map(|z| z * a).collect();
        Self::from_raw(self.taugrid, self.grid, self.ncomp, values)
    }

    /// Adds `f` to every slice.
    pub fn add_constant(&self, f: &SpatialField) -> TwoScaleField {
        assert!(f.grid == self.grid && f.ncomp == self.ncomp);
        let mut out = self.clone();
        let n = self.slice_len();
        for chunk in out.values.chunks_mut(n) {
            for (z, w) in chunk.iter_mut().zip(&f.values) {
                *z += w;
            }
        }
        out
    }

    pub fn map_slices(&self, mut f: impl FnMut(usize, &[Complex64], &mut [Complex64])) -> Self {
        let mut out = Self::zeros_like(self);
        let n = self.slice_len();
        for (j, (src, dst)) in self
            .values
            .chunks(n)
            .zip(out.values.chunks_mut(n))
            .enumerate()
        {
            f(j, src, dst);
        }
        out
    }
}

impl<'a> Sub<&'a TwoScaleField> for &'a TwoScaleField {
    type Output = TwoScaleField;
    fn sub(self, rhs: &TwoScaleField) -> TwoScaleField {
        self.axpy(-1.0, rhs)
    }
}

impl<'a> Add<&'a TwoScaleField> for &'a TwoScaleField {
    type Output = TwoScaleField;
    fn add(self, rhs: &TwoScaleField) -> TwoScaleField {
        self.axpy(1.0, rhs)
    }
}

impl Mul<f64> for &TwoScaleField {
    type Output = TwoScaleField;
    fn mul(self, a: f64) -> TwoScaleField {
        self.scale(Complex64::new(a, 0.0))
    }
}
