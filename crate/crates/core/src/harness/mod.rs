//! Experiment driver: error metrics, (ε, Δt) sweeps, trajectory diagnostics
//! and the on-disk reference cache.

mod cache;
mod config;
mod diagnostics;
mod sweep;

pub use cache::{decode_reference, encode_reference, CachedField, ReferenceStore, CACHE_MAGIC};
pub use config::{SweepConfig, SweepScheme};
pub use diagnostics::{derivative_diagnostic, mode_trace, stroboscopic_check, ModeTrace};
pub use sweep::{run_cell, run_sweep, write_csv, ErrorRecord, CSV_HEADER};

use crate::error::{argument, domain, Result};
use crate::spectral::{hs_norm, SpatialField};

/// `‖u_num - u_ref‖_{Hˢ} / ‖u_ref‖_{Hˢ}`. Fields on different point counts
/// of the same interval are compared on the finer of the two.
pub fn relative_error(u_num: &SpatialField, u_ref: &SpatialField, s: f64) -> Result<f64> {
    if !u_num.grid().same_interval(u_ref.grid()) || u_num.ncomp() != u_ref.ncomp() {
        return Err(argument("fields live on different domains"));
    }
    if !(s >= 0.0) {
        return Err(argument(format!(
            "Sobolev index must be nonnegative, got {s}"
        )));
    }
    let nx = u_num.nx().max(u_ref.nx());
    let (a, b) = (u_num.resample(nx)?, u_ref.resample(nx)?);
    let denom = hs_norm(&b, s);
    if !(denom > 0.0) {
        return Err(domain("reference has zero norm"));
    }
    Ok(hs_norm(&(&a - &b), s) / denom)
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// usable (positive, finite) points or degenerate abscissae.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite() && **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Convergence order from `(Δt, error)` pairs: drops points with error below
/// `10·floor`, then fits the three smallest remaining Δt.
pub fn order_slope(points: &[(f64, f64)], floor: f64) -> Option<f64> {
    let mut kept: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(_, e)| e.is_finite() && e >= 10.0 * floor)
        .collect();
    kept.sort_by(|a, b| a.0.total_cmp(&b.0));
    kept.truncate(3);
    let (x, y): (Vec<f64>, Vec<f64>) = kept.into_iter().unzip();
    fit_slope(&x, &y)
}
