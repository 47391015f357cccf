use std::io::Write;

use crate::error::{argument, Result};
use crate::integrators::{extract_at_phase, Snapshot};
use crate::models::VectorField;
use crate::spectral::{evaluate_at_tau, hs_norm, hs_norm_weighted, SpatialField, TwoScaleField};

/// `max_τ ‖D_h^k U(t)‖_{Hˢ_x}` along the trajectory, where `D_h^k` is the
/// k-th difference over `k + 1` consecutive snapshots divided by `h^k`,
/// stamped at the window midpoint.
pub fn derivative_diagnostic(snapshots: &[Snapshot], k: usize, s: f64) -> Result<Vec<(f64, f64)>> {
    if !(1..=4).contains(&k) {
        return Err(argument(format!("derivative order {k} outside 1..=4")));
    }
    if snapshots.len() < k + 1 {
        return Err(argument(format!(
            "need at least {} snapshots, got {}",
            k + 1,
            snapshots.len()
        )));
    }
    let h = snapshots[1].t - snapshots[0].t;
    let uniform = h > 0.0
        && snapshots
            .windows(2)
            .all(|w| ((w[1].t - w[0].t) - h).abs() <= 1e-9 * h.max(w[1].t.abs() * 1e-6));
    if !uniform {
        return Err(argument("snapshots are not uniformly spaced"));
    }
    let first = &snapshots[0].state;
    if snapshots.iter().any(|s| !s.state.same_layout(first)) {
        return Err(argument("snapshots have different layouts"));
    }
    let weights: Vec<f64> = first
        .grid()
        .wavenumbers()
        .into_iter()
        .map(|xi| (1.0 + xi * xi).powf(s))
        .collect();
    let scale = h.powi(k as i32).recip();
    Ok(snapshots
        .windows(k + 1)
        .map(|win| {
            // repeated first differences: exact zero on repeated states
            let mut level: Vec<TwoScaleField> = win.iter().map(|w| w.state.clone()).collect();
            while level.len() > 1 {
                level = level.windows(2).map(|p| &p[1] - &p[0]).collect();
            }
            let diff = &level[0];
            let norm = (0..diff.ntau())
                .map(|j| hs_norm_weighted(diff.slice(j), diff.grid().nx(), &weights))
                .fold(0.0, f64::max)
                * scale;
            let t = win.iter().map(|w| w.t).sum::<f64>() / (k + 1) as f64;
            (t, norm)
        })
        .collect())
}

/// `|û_m(t, τ*)|` for several x-modes along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrace {
    pub modes: Vec<i64>,
    pub times: Vec<f64>,
    /// `values[i][j]` is mode `modes[j]` at `times[i]`.
    pub values: Vec<Vec<f64>>,
}

impl ModeTrace {
    /// Column of mode `m`.
    pub fn column(&self, m: i64) -> Option<Vec<f64>> {
        let j = self.modes.iter().position(|&x| x == m)?;
        Some(self.values.iter().map(|row| row[j]).collect())
    }

    /// Plain text: a `#` header naming the modes, then `t |u_m1| |u_m2| ...`.
    pub fn write_text(&self, mut out: impl Write) -> Result<()> {
        let names: Vec<String> = self.modes.iter().map(|m| format!("|u_{m}|")).collect();
        writeln!(out, "# t {}", names.join(" "))?;
        for (t, row) in self.times.iter().zip(&self.values) {
            let cols: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{t:.16e} {}", cols.join(" "))?;
        }
        Ok(())
    }
}

/// Moduli of the normalized x-Fourier coefficients of `U(t, τ*)`, first
/// component, for each snapshot.
pub fn mode_trace(snapshots: &[Snapshot], modes: &[i64], tau_star: f64) -> Result<ModeTrace> {
    let mut values = Vec::with_capacity(snapshots.len());
    for snap in snapshots {
        let slice = evaluate_at_tau(&snap.state, tau_star);
        let grid = slice.grid();
        let spec = slice.spectrum();
        let row = modes
            .iter()
            .map(|&m| {
                grid.bin_of_mode(m).map(|b| spec[b].norm()).ok_or_else(|| {
                    argument(format!("mode {m} is not resolved on {} points", grid.nx()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    Ok(ModeTrace {
        modes: modes.to_vec(),
        times: snapshots.iter().map(|s| s.t).collect(),
        values,
    })
}

fn find_at<T>(items: &[T], t: f64, time: impl Fn(&T) -> f64) -> Option<&T> {
    let tol = 1e-9 * t.abs().max(1e-3);
    items.iter().find(|x| (time(x) - t).abs() <= tol)
}

/// `‖unfilter(U(t_k, 0)) - u_ref(t_k)‖_{Hˢ}` at the stroboscopic times
/// `t_k = kPε` inside the run. Both trajectories must contain every such
/// time; the reference is a list of `(t, unfiltered state)`.
pub fn stroboscopic_check(
    model: &dyn VectorField,
    snapshots: &[Snapshot],
    reference: &[(f64, SpatialField)],
    s: f64,
) -> Result<Vec<(f64, f64)>> {
    let t_end = snapshots
        .iter()
        .map(|s| s.t)
        .fold(f64::NEG_INFINITY, f64::max);
    let stride = model.period() * model.epsilon();
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let tk = k as f64 * stride;
        if snapshots.is_empty() || tk > t_end * (1.0 + 1e-12) {
            break;
        }
        let snap = find_at(snapshots, tk, |s| s.t)
            .ok_or_else(|| argument(format!("no snapshot at stroboscopic time {tk}")))?;
        let (_, r) = find_at(reference, tk, |r| r.0)
            .ok_or_else(|| argument(format!("no reference sample at stroboscopic time {tk}")))?;
        let u = extract_at_phase(model, &snap.state, tk, 0.0);
        let r = r.resample(u.nx())?;
        out.push((tk, hs_norm(&(&u - &r), s)));
        k += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::NlsModel;
    use crate::spectral::{SpatialGrid, TauGrid};
    use crate::Complex64;
    use std::f64::consts::PI;

    fn snaps(f: impl Fn(f64) -> f64, n: usize, h: f64) -> Vec<Snapshot> {
        let g = SpatialGrid::new(0.0, 2.0 * PI, 8).unwrap();
        let tg = TauGrid::new(2.0 * PI, 4).unwrap();
        let base = SpatialField::from_fn(g, 1, |_, x| Complex64::new(x.cos(), 0.0));
        (0..n)
            .map(|i| {
                let t = i as f64 * h;
                Snapshot {
                    step: i,
                    t,
                    tau_star: 0.0,
                    state: TwoScaleField::constant(tg, &base.scale(f(t).into())),
                }
            })
            .collect()
    }

    #[test]
    fn constant_and_quadratic() {
        let c = snaps(|_| 1.0, 6, 0.1);
        for k in 1..=4 {
            let d = derivative_diagnostic(&c, k, 1.0).unwrap();
            assert!(d.iter().all(|p| p.1 == 0.0), "{k} {d:?}");
        }
        let q = snaps(|t| t * t, 6, 0.1);
        // ‖cos x‖_{H¹} = 1 with the normalized DFT
        let d2 = derivative_diagnostic(&q, 2, 1.0).unwrap();
        assert!(d2.iter().all(|p| (p.1 - 2.0).abs() < 1e-10), "{d2:?}");
        let d3 = derivative_diagnostic(&q, 3, 1.0).unwrap();
        assert!(d3.iter().all(|p| p.1 < 1e-9));
        assert!((d2[0].0 - 0.1).abs() < 1e-15);
    }

    #[test]
    fn diagnostic_rejections() {
        let q = snaps(|t| t, 3, 0.1);
        assert!(derivative_diagnostic(&q, 3, 1.0).is_err());
        assert!(derivative_diagnostic(&q, 0, 1.0).is_err());
        let mut bad = snaps(|t| t, 4, 0.1);
        bad[2].t = 0.25;
        assert!(derivative_diagnostic(&bad, 1, 1.0).is_err());
    }

    #[test]
    fn trace_of_known_modes() {
        let tr = mode_trace(&snaps(|t| 1.0 + t, 3, 0.5), &[1, -1, 2], 0.0).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.5, 1.0]);
        assert!((tr.values[2][0] - 1.0).abs() < 1e-14);
        assert!(tr.values[0][2] < 1e-15);
        assert_eq!(tr.column(-1).unwrap().len(), 3);
        let mut text = Vec::new();
        tr.write_text(&mut text).unwrap();
        let text = String::from_utf8(text).unwrap();
        assert!(text.starts_with("# t |u_1| |u_-1| |u_2|\n"));
        assert_eq!(text.lines().count(), 4);
        assert!(mode_trace(&snaps(|_| 0.0, 2, 0.5), &[0], 0.0)
            .unwrap()
            .values
            .iter()
            .all(|r| r[0] == 0.0));
        assert!(mode_trace(&snaps(|_| 0.0, 2, 0.5), &[9], 0.0).is_err());
    }

    #[test]
    fn strobe_without_points_in_range_is_empty() {
        let m = NlsModel::paper(8, 0.1).unwrap();
        assert!(stroboscopic_check(&m, &[], &[], 1.0).unwrap().is_empty());
    }
}
