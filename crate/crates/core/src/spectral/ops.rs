//! Diagonal-in-Fourier operators.
//!
//! In `x`: multipliers `m(ξ)` applied per component. In `τ`: the averaging
//! projector `Π`, the derivative `L = ∂_τ`, the zero-mean antiderivative
//! `A = L⁻¹(I - Π)` and the transport solves `Q_μ⁻¹` with
//! `Q_μ = I + μ⁻¹∂_τ`.
//!
//! The unpaired Nyquist τ-mode is treated as a cosine: `∂_τ` and `A` send it
//! to zero, so `Q_μ`, `Q_μ⁻¹` and `2I - Q_{2μ}` all act on it as the identity.

use num_complex::Complex64;

use super::fft::Plan;
use super::field::{SpatialField, TwoScaleField};
use super::grid::{SpatialGrid, TauGrid};
use crate::error::{domain, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Multiplier table in FFT bin order for `symbol(ξ_k)`.
pub fn x_symbol_table(
    grid: &SpatialGrid,
    symbol: impl Fn(f64) -> Complex64,
) -> Result<Vec<Complex64>> {
    let table: Vec<Complex64> = grid.wavenumbers().into_iter().map(symbol).collect();
    if table.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(domain("non-finite multiplier symbol"));
    }
    Ok(table)
}

/// `IDFT(symbol(ξ) · DFT(f))`, component by component.
pub fn apply_x_multiplier(
    f: &SpatialField,
    symbol: impl Fn(f64) -> Complex64,
) -> Result<SpatialField> {
    let table = x_symbol_table(f.grid(), symbol)?;
    Ok(apply_x_table(f, &table))
}

/// Same as [`apply_x_multiplier`] with a precomputed table.
pub fn apply_x_table(f: &SpatialField, table: &[Complex64]) -> SpatialField {
    let nx = f.nx();
    assert_eq!(table.len(), nx);
    let mut buf = f.values().to_vec();
    let mut plan = Plan::new(nx);
    plan.forward(&mut buf);
    for chunk in buf.chunks_mut(nx) {
        for (z, m) in chunk.iter_mut().zip(table) {
            *z *= m;
        }
    }
    plan.inverse(&mut buf);
    SpatialField::from_raw(*f.grid(), f.ncomp(), buf)
}

/// `( Σ_c Σ_k (1 + ξ_k²)^s |f̂_k|² )^{1/2}` with the normalized DFT.
pub fn hs_norm(f: &SpatialField, s: f64) -> f64 {
    assert!(s >= 0.0, "Sobolev index must be nonnegative");
    let weights: Vec<f64> = f
        .grid()
        .wavenumbers()
        .into_iter()
        .map(|xi| (1.0 + xi * xi).powf(s))
        .collect();
    hs_norm_weighted(f.values(), f.nx(), &weights)
}

pub(crate) fn hs_norm_weighted(values: &[Complex64], nx: usize, weights: &[f64]) -> f64 {
    let mut buf = values.to_vec();
    Plan::new(nx).forward(&mut buf);
    buf.chunks(nx)
        .flat_map(|chunk| chunk.iter().zip(weights).map(|(z, w)| w * z.norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

/// Cache-blocked transpose of a row-major `rows × cols` matrix.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 16;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// τ-Fourier coefficients of a two-scale field, column-major: column
/// `c·nx + m` holds the `ntau` coefficients of `U(·, c, x_m)`.
pub(crate) fn tau_forward(u: &TwoScaleField) -> Vec<Complex64> {
    let ntau = u.ntau();
    let cols = u.slice_len();
    let mut buf = vec![ZERO; ntau * cols];
    transpose(u.values(), &mut buf, ntau, cols);
    Plan::new(ntau).forward(&mut buf);
    buf
}

pub(crate) fn tau_inverse(like: &TwoScaleField, mut buf: Vec<Complex64>) -> TwoScaleField {
    let ntau = like.ntau();
    let cols = like.slice_len();
    Plan::new(ntau).inverse(&mut buf);
    let mut out = TwoScaleField::zeros_like(like);
    transpose(&buf, out.values_mut(), cols, ntau);
    out
}

/// Multiplier table in τ-bin order. `symbol` receives the angular frequency
/// `kω` of every paired mode; the Nyquist bin gets `nyquist`.
pub fn tau_symbol_table(
    taugrid: &TauGrid,
    nyquist: Complex64,
    symbol: impl Fn(f64) -> Complex64,
) -> Vec<Complex64> {
    let omega = taugrid.omega();
    (0..taugrid.ntau())
        .map(|j| {
            if taugrid.is_nyquist(j) {
                nyquist
            } else {
                symbol(taugrid.mode(j) as f64 * omega)
            }
        })
        .collect()
}

/// Applies a diagonal τ-multiplier given as a bin-ordered table.
pub fn apply_tau_table(u: &TwoScaleField, table: &[Complex64]) -> TwoScaleField {
    let ntau = u.ntau();
    assert_eq!(table.len(), ntau);
    let mut buf = tau_forward(u);
    for column in buf.chunks_mut(ntau) {
        for (z, m) in column.iter_mut().zip(table) {
            *z *= m;
        }
    }
    tau_inverse(u, buf)
}

/// `M_a a + M_b b` for two diagonal τ-multipliers, with a single inverse
/// transform.
pub fn combine_tau_tables(
    a: &TwoScaleField,
    table_a: &[Complex64],
    b: &TwoScaleField,
    table_b: &[Complex64],
) -> TwoScaleField {
    assert!(a.same_layout(b));
    let ntau = a.ntau();
    let mut fa = tau_forward(a);
    let fb = tau_forward(b);
    for (ca, cb) in fa.chunks_mut(ntau).zip(fb.chunks(ntau)) {
        for j in 0..ntau {
            ca[j] = ca[j] * table_a[j] + cb[j] * table_b[j];
        }
    }
    tau_inverse(a, fa)
}

/// `Π U`: mean over one period, exact for resolved trigonometric polynomials.
pub fn tau_average(u: &TwoScaleField) -> SpatialField {
    let n = u.slice_len();
    let mut acc = vec![ZERO; n];
    for j in 0..u.ntau() {
        for (a, z) in acc.iter_mut().zip(u.slice(j)) {
            *a += z;
        }
    }
    let s = 1.0 / u.ntau() as f64;
    for a in acc.iter_mut() {
        *a *= s;
    }
    SpatialField::from_raw(*u.grid(), u.ncomp(), acc)
}

pub fn antiderivative_table(taugrid: &TauGrid) -> Vec<Complex64> {
    tau_symbol_table(taugrid, ZERO, |w| {
        if w == 0.0 {
            ZERO
        } else {
            Complex64::new(0.0, -1.0 / w)
        }
    })
}

/// `A = L⁻¹(I - Π)`: zero-mean τ-antiderivative.
pub fn tau_antiderivative_a(u: &TwoScaleField) -> TwoScaleField {
    apply_tau_table(u, &antiderivative_table(u.taugrid()))
}

/// `L = ∂_τ`.
pub fn tau_derivative(u: &TwoScaleField) -> TwoScaleField {
    let table = tau_symbol_table(u.taugrid(), ZERO, |w| Complex64::new(0.0, w));
    apply_tau_table(u, &table)
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(domain(format!("mu must be positive and finite, got {mu}")));
    }
    Ok(())
}

/// Bin table of `Q_μ⁻¹`: `1 / (1 + ikω/μ)`.
pub fn q_inverse_table(taugrid: &TauGrid, mu: f64) -> Result<Vec<Complex64>> {
    check_mu(mu)?;
    Ok(tau_symbol_table(taugrid, ONE, |w| {
        ONE / Complex64::new(1.0, w / mu)
    }))
}

/// Bin table of `2I - Q_{2μ}`: `1 - ikω/(2μ)`.
pub fn two_minus_q_table(taugrid: &TauGrid, mu: f64) -> Result<Vec<Complex64>> {
    check_mu(mu)?;
    Ok(tau_symbol_table(taugrid, ONE, |w| {
        Complex64::new(1.0, -w / (2.0 * mu))
    }))
}

/// `Q_μ⁻¹ U`, the periodic solution `V` of `V + μ⁻¹ ∂_τ V = U`.
pub fn q_mu_inverse(u: &TwoScaleField, mu: f64) -> Result<TwoScaleField> {
    Ok(apply_tau_table(u, &q_inverse_table(u.taugrid(), mu)?))
}

/// `(2I - Q_{2μ}) U = U - (2μ)⁻¹ ∂_τ U`.
pub fn two_minus_q_apply(u: &TwoScaleField, mu: f64) -> Result<TwoScaleField> {
    Ok(apply_tau_table(u, &two_minus_q_table(u.taugrid(), mu)?))
}

/// Trigonometric interpolation of `U` at an arbitrary `τ*`; the Nyquist
/// coefficient contributes `cos(ntau·ω·τ*/2)`.
pub fn evaluate_at_tau(u: &TwoScaleField, tau_star: f64) -> SpatialField {
    let tg = u.taugrid();
    let ntau = tg.ntau();
    let period = tg.period();
    let tau = tau_star.rem_euclid(period);
    let pos = tau * ntau as f64 / period;
    if pos == pos.round() {
        return u.slice_field((pos.round() as usize) % ntau);
    }
    // e^{ikωτ} with the angle reduced per mode: k·(τ/P) mod 1
    let frac = tau / period;
    let basis: Vec<Complex64> = (0..ntau)
        .map(|j| {
            if tg.is_nyquist(j) {
                let half = (ntau / 2) as f64;
                let theta = 2.0 * std::f64::consts::PI * (half * frac).fract();
                Complex64::new(theta.cos(), 0.0)
            } else {
                let k = tg.mode(j) as f64;
                let theta = 2.0 * std::f64::consts::PI * (k * frac).rem_euclid(1.0);
                Complex64::from_polar(1.0, theta)
            }
        })
        .collect();
    let coeffs = tau_forward(u);
    let cols = u.slice_len();
    let values = (0..cols)
        .map(|col| {
            coeffs[col * ntau..(col + 1) * ntau]
                .iter()
                .zip(&basis)
                .map(|(c, b)| c * b)
                .sum()
        })
        .collect();
    SpatialField::from_raw(*u.grid(), u.ncomp(), values)
}
