//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test -p ua-core --test acceptance -- [N ...]` runs the listed
//! criteria only. References are cached under the cargo target directory, so
//! only the first run pays for them. The process exits nonzero on a FAIL
//! line only when `UA_ACCEPTANCE_STRICT` is set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use ua_core::harness::{
    decode_reference, derivative_diagnostic, encode_reference, fit_slope, mode_trace, order_slope,
    relative_error, run_sweep, ErrorRecord, ReferenceStore, SweepConfig, SweepScheme,
};
use ua_core::initdata::prepare_initial_data;
use ua_core::integrators::{extract_at_phase, integrate, IntegrateOptions, Snapshot};
use ua_core::models::{NkgModel, NlsModel};
use ua_core::reference::{ReferencePolicy, ReferenceSolution};
use ua_core::spectral::{
    evaluate_at_tau, hs_norm, q_mu_inverse, tau_antiderivative_a, tau_average, tau_derivative,
};
use ua_core::{
    Complex64, Model, ModelId, PreparationOrder, Scheme, SpatialField, SpatialGrid, TauGrid,
    TwoScaleField, VectorField,
};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ua-reference-cache")
}

fn config(model: ModelId, scheme: SweepScheme, order: u8) -> SweepConfig {
    SweepConfig {
        cache_dir: Some(cache_dir()),
        ..SweepConfig::paper(model, scheme, PreparationOrder::try_from(order).unwrap())
    }
}

fn reference(cfg: &SweepConfig, eps: f64) -> Result<ReferenceSolution, ua_core::Error> {
    let m = Model::paper(cfg.model, cfg.nx, eps)?;
    let u0 = m.paper_initial_data()?;
    let store = ReferenceStore::new(cfg.cache_dir());
    Ok(store
        .get_or_build(&m, &u0, cfg.t_final, cfg.reference_policy, cfg.ntau, false)?
        .0)
}

fn by_eps(records: &[ErrorRecord]) -> BTreeMap<u64, Vec<&ErrorRecord>> {
    let mut out: BTreeMap<u64, Vec<&ErrorRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.eps.to_bits()).or_default().push(r);
    }
    out
}

/// Per-ε order slopes with the reference floor excluded.
fn order_slopes(
    cfg: &SweepConfig,
    records: &[ErrorRecord],
) -> Result<Vec<(f64, Option<f64>)>, ua_core::Error> {
    let mut out = Vec::new();
    for (bits, recs) in by_eps(records) {
        let eps = f64::from_bits(bits);
        let floor = reference(cfg, eps)?.self_error;
        let pts: Vec<(f64, f64)> = recs.iter().map(|r| (r.dt, r.error_hs)).collect();
        out.push((eps, order_slope(&pts, floor)));
    }
    Ok(out)
}

fn fmt_slopes(s: &[(f64, Option<f64>)]) -> String {
    s.iter()
        .map(|(e, p)| match p {
            Some(p) => format!("{e:e}:{p:.2}"),
            None => format!("{e:e}:-"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn min_slope(s: &[(f64, Option<f64>)]) -> f64 {
    s.iter()
        .map(|(_, p)| p.unwrap_or(f64::NAN))
        .fold(
            f64::INFINITY,
            |a, b| if b.is_nan() { f64::NAN } else { a.min(b) },
        )
}

fn max_error_at(records: &[ErrorRecord], dt: f64) -> f64 {
    records
        .iter()
        .filter(|r| (r.dt / dt - 1.0).abs() < 1e-12)
        .map(|r| r.error_hs)
        .fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn random_field(
    rng: &mut ChaCha8Rng,
    tg: TauGrid,
    grid: SpatialGrid,
    degree: i64,
) -> (TwoScaleField, Vec<Vec<Complex64>>) {
    // coefficient c[k + degree][i] of e^{ikωτ} at x_i
    let coef: Vec<Vec<Complex64>> = (-degree..=degree)
        .map(|_| {
            (0..grid.nx())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let field = TwoScaleField::from_tau_fn(tg, |tau| {
        SpatialField::new(grid, 1, eval_trig(&coef, degree, tg.omega(), tau)).unwrap()
    });
    (field, coef)
}

fn eval_trig(coef: &[Vec<Complex64>], degree: i64, omega: f64, tau: f64) -> Vec<Complex64> {
    let nx = coef[0].len();
    let mut out = vec![Complex64::new(0.0, 0.0); nx];
    for (j, row) in coef.iter().enumerate() {
        let e = Complex64::from_polar(1.0, (j as i64 - degree) as f64 * omega * tau);
        for (o, c) in out.iter_mut().zip(row) {
            *o += c * e;
        }
    }
    out
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn c1_operator_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tg = TauGrid::new(2.0 * PI, 16).unwrap();
    let grid = SpatialGrid::new(0.0, 2.0 * PI, 8).unwrap();
    let gl = gauss_legendre(16);
    let panels = 32;
    let (mut pia, mut la, mut qint, mut ineq, mut eq, mut dq) =
        (0f64, 0f64, 0f64, 0f64, 0f64, f64::NEG_INFINITY);
    for _ in 0..100 {
        let (u, coef) = random_field(&mut rng, tg, grid, 7);
        let scale = u.max_abs();
        let a = tau_antiderivative_a(&u);
        pia = pia.max(tau_average(&a).max_abs() / scale);
        let lhs = tau_derivative(&a);
        let rhs = u.add_constant(&tau_average(&u).scale((-1.0).into()));
        la = la.max((&lhs - &rhs).max_abs() / scale);

        let mu = 10f64.powf(rng.gen_range(-1.0..1.0));
        let q = q_mu_inverse(&u, mu)?;
        // (μ/(e^{μP} - 1)) ∫_τ^{τ+P} e^{μ(θ-τ)} g(θ) dθ, written with e^{μ(θ-τ-P)}
        let p = tg.period();
        let pref = mu / (1.0 - (-mu * p).exp());
        for j in 0..tg.ntau() {
            let tau = tg.node(j);
            let mut acc = vec![Complex64::new(0.0, 0.0); grid.nx()];
            let h = p / panels as f64;
            for pn in 0..panels {
                for &(x, w) in &gl {
                    let s = pn as f64 * h + 0.5 * h * (x + 1.0);
                    let weight = 0.5 * h * w * (mu * (s - p)).exp();
                    for (o, g) in acc.iter_mut().zip(eval_trig(&coef, 7, tg.omega(), tau + s)) {
                        *o += g * weight;
                    }
                }
            }
            for (o, qv) in acc.iter().zip(q.slice(j)) {
                qint = qint.max((o * pref - qv).norm() / scale);
            }
        }

        let gn = u.l2_norm();
        for beta in [-1.0, 0.0, 1.0] {
            let f = (&q * (1.0 + beta)).axpy(-beta, &u);
            let r = f.l2_norm() / gn;
            ineq = ineq.max(r - 1.0);
            if beta != 0.0 {
                eq = eq.max((r - 1.0).abs());
            }
        }
        dq = dq.max(tau_derivative(&q).l2_norm() / (2.0 * mu * gn));
    }
    let ok =
        pia <= 1e-12 && la <= 1e-12 && qint <= 1e-10 && ineq <= 1e-12 && eq <= 1e-12 && dq <= 1.0;
    Ok((
        ok,
        format!(
            "|ΠA| {pia:.1e}, |LA-(I-Π)| {la:.1e}, Q⁻¹ vs integral {qint:.1e}, β-bound excess {ineq:.1e}, \
             |β|=1 equality {eq:.1e}, max ‖∂τQ⁻¹g‖/(2μ‖g‖) {dq:.3}"
        ),
    ))
}

fn fd_slope(model: &dyn ua_core::VectorField, u: &TwoScaleField, w: &TwoScaleField) -> f64 {
    let exact = model.directional(0.0, u, w);
    let etas = [0.1, 0.05, 0.025, 0.0125];
    let errs: Vec<f64> = etas
        .iter()
        .map(|&eta| {
            let plus = model.eval(0.0, &u.axpy(eta, w));
            let minus = model.eval(0.0, &u.axpy(-eta, w));
            let fd = &(&plus - &minus) * (0.5 / eta);
            (&fd - &exact).max_abs()
        })
        .collect();
    fit_slope(&etas, &errs).unwrap_or(f64::NAN)
}

fn c2_model_oracles() -> Outcome {
    let nls = NlsModel::paper(32, 0.1)?;
    let g = *nls.grid();
    let u = SpatialField::from_fn(g, 1, |_, x| Complex64::from_polar(1.0, x));
    let i = Complex64::new(0.0, 1.0);
    let mut worst = 0f64;
    for tau in [0.0, 0.3, 1.7, 4.0] {
        let f = nls.eval_at(0.0, tau, &u);
        let want = SpatialField::from_fn(g, 1, |_, x| {
            -i * (Complex64::from_polar(1.0, 8.0 * tau + 3.0 * x) + Complex64::from_polar(1.0, -x))
        });
        worst = worst.max((&f - &want).max_abs());
    }

    let tg = nls.tau_grid(64)?;
    let u0 = NlsModel::paper_initial_data(g);
    let base = TwoScaleField::from_tau_fn(tg, |tau| {
        u0.scale(Complex64::from_polar(1.0 + 0.1 * tau.sin(), 0.2 * tau))
    });
    let dir = TwoScaleField::from_tau_fn(tg, |tau| {
        SpatialField::from_fn(g, 1, |_, x| {
            Complex64::new((x + tau).sin(), (2.0 * x).cos())
        })
    });
    let s_nls = fd_slope(&nls, &base, &dir);

    let nkg = NkgModel::paper(64, 0.1)?;
    let kg = *nkg.grid();
    let tgk = nkg.tau_grid(16)?;
    let v0 = NkgModel::paper_initial_data(kg, 0.1)?;
    let basek = TwoScaleField::from_tau_fn(tgk, |tau| {
        v0.scale(Complex64::from_polar(1.0, 0.3 * tau.cos()))
    });
    let dirk = TwoScaleField::from_tau_fn(tgk, |tau| {
        SpatialField::from_fn(kg, 2, |c, x| {
            Complex64::new(
                (-x * x).exp() * (1.0 + c as f64),
                tau.sin() * (-x * x / 2.0).exp(),
            )
        })
    });
    let s_nkg = fd_slope(&nkg, &basek, &dirk);
    let ok = worst <= 1e-12 && (s_nls - 2.0).abs() <= 0.1 && (s_nkg - 2.0).abs() <= 0.1;
    Ok((
        ok,
        format!("closed form {worst:.1e}; FD slopes NLS {s_nls:.3}, NKG {s_nkg:.3}"),
    ))
}

fn c3_preparation() -> Outcome {
    let eps_list = [0.04, 0.02, 0.01, 0.005];
    let mut origin = 0f64;
    let (mut d1, mut d2, mut d21) = (Vec::new(), Vec::new(), Vec::new());
    for &eps in &eps_list {
        let m = NlsModel::paper(32, eps)?;
        let u0 = NlsModel::paper_initial_data(*m.grid());
        let tg = m.tau_grid(256)?;
        let mut prepared = Vec::new();
        for order in [
            PreparationOrder::Zero,
            PreparationOrder::One,
            PreparationOrder::Two,
        ] {
            let u = prepare_initial_data(&m, &u0, &tg, order)?;
            origin = origin.max((&evaluate_at_tau(&u, 0.0) - &u0).max_abs());
            prepared.push(u);
        }
        let base = TwoScaleField::constant(tg, &u0);
        d1.push((&prepared[1] - &base).max_abs());
        d2.push((&prepared[2] - &base).max_abs());
        d21.push((&prepared[2] - &prepared[1]).max_abs());
    }
    let s1 = fit_slope(&eps_list, &d1).unwrap_or(f64::NAN);
    let s2 = fit_slope(&eps_list, &d2).unwrap_or(f64::NAN);
    let s21 = fit_slope(&eps_list, &d21).unwrap_or(f64::NAN);
    let ok = origin <= 1e-12
        && (s1 - 1.0).abs() <= 0.15
        && (s2 - 1.0).abs() <= 0.15
        && (s21 - 2.0).abs() <= 0.15;
    Ok((
        ok,
        format!("|U₀(0)-u₀| {origin:.1e}; slopes order1 {s1:.3}, order2 {s2:.3}, order2-order1 {s21:.3}"),
    ))
}

fn c4_nls_ua2() -> Outcome {
    let cfg = config(ModelId::Nls, SweepScheme::Ua2, 2);
    let recs = run_sweep(&cfg, None)?;
    let slopes = order_slopes(&cfg, &recs)?;
    let (e12, e8) = (
        max_error_at(&recs, cfg.dt(12)),
        max_error_at(&recs, cfg.dt(8)),
    );
    let monotone = cfg
        .k_list
        .windows(2)
        .all(|w| max_error_at(&recs, cfg.dt(w[1])) <= max_error_at(&recs, cfg.dt(w[0])));
    let min = min_slope(&slopes);
    let ok = min >= 1.9 && e8 / e12 >= 10.0;
    Ok((
        ok,
        format!(
            "min slope {min:.2} [{}]; max error K=8 {e8:.2e}, K=12 {e12:.2e} (ratio {:.0}); max-over-ε nonincreasing in K: {monotone}",
            fmt_slopes(&slopes),
            e8 / e12
        ),
    ))
}

fn c5_nls_ua1() -> Outcome {
    let cfg = config(ModelId::Nls, SweepScheme::Ua1, 1);
    let recs = run_sweep(&cfg, None)?;
    let slopes = order_slopes(&cfg, &recs)?;
    let min = min_slope(&slopes);

    let cfg0 = SweepConfig {
        eps_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
        k_list: (7..=10).collect(),
        ..config(ModelId::Nls, SweepScheme::Ua1, 0)
    };
    let recs0 = run_sweep(&cfg0, None)?;
    let mid: Vec<(f64, f64)> = by_eps(&recs0)
        .into_iter()
        .map(|(bits, rs)| {
            let (x, y): (Vec<f64>, Vec<f64>) = rs.iter().map(|r| (r.dt, r.error_hs)).unzip();
            (f64::from_bits(bits), fit_slope(&x, &y).unwrap_or(f64::NAN))
        })
        .collect();
    let worst = mid.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mid_s: Vec<String> = mid.iter().map(|(e, s)| format!("{e:e}:{s:.2}")).collect();
    let ok = min >= 0.9 && worst <= 0.7;
    Ok((
        ok,
        format!(
            "order-1 data min slope {min:.2} [{}]; order-0 data mid-K slopes [{}], min {worst:.2}",
            fmt_slopes(&slopes),
            mid_s.join(" ")
        ),
    ))
}

fn nkg_imaginary_part(eps: f64, cfg: &SweepConfig, k: u32) -> Result<f64, ua_core::Error> {
    let m = NkgModel::paper(cfg.nx, eps)?;
    let v0 = NkgModel::paper_initial_data(*m.grid(), eps)?;
    let tg = m.tau_grid(cfg.ntau)?;
    let data = prepare_initial_data(&m, &v0, &tg, PreparationOrder::Two)?;
    let mut worst = 0f64;
    let mut obs = |_: usize, t: f64, tau: f64, s: &TwoScaleField| {
        let v = extract_at_phase(&m, s, t, tau);
        let (u, _) = ua_core::models::nkg_reconstruct(&v, eps);
        let im: Vec<Complex64> = u
            .values()
            .iter()
            .map(|z| Complex64::new(z.im, 0.0))
            .collect();
        let im = SpatialField::new(*u.grid(), 1, im).unwrap();
        worst = worst.max(hs_norm(&im, 1.0) / hs_norm(&u, 1.0));
    };
    integrate(
        &m,
        &data,
        cfg.t_final,
        1 << k,
        Scheme::Ua2,
        IntegrateOptions::default(),
        &mut [&mut obs],
    )?;
    Ok(worst)
}

fn c6_nkg_ua2() -> Outcome {
    let cfg = config(ModelId::Nkg, SweepScheme::Ua2, 2);
    let recs = run_sweep(&cfg, None)?;
    let slopes = order_slopes(&cfg, &recs)?;
    let min = min_slope(&slopes);
    let mut imag = 0f64;
    for &eps in &cfg.eps_list {
        imag = imag.max(nkg_imaginary_part(eps, &cfg, 9)?);
    }
    let ok = min >= 1.9 && imag <= 1e-6;
    Ok((
        ok,
        format!(
            "min slope {min:.2} [{}]; max relative H¹ imaginary part {imag:.1e}",
            fmt_slopes(&slopes)
        ),
    ))
}

fn eps_slope(cfg: &SweepConfig) -> Result<(f64, String), Box<dyn std::error::Error>> {
    let recs = run_sweep(cfg, None)?;
    let (x, y): (Vec<f64>, Vec<f64>) = recs.iter().map(|r| (r.eps, r.error_hs)).unzip();
    let s = fit_slope(&x, &y).unwrap_or(f64::NAN);
    let pts: Vec<String> = recs
        .iter()
        .map(|r| format!("{:e}:{:.2e}", r.eps, r.error_hs))
        .collect();
    Ok((s, pts.join(" ")))
}

fn c7_strang() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for model in [ModelId::Nkg, ModelId::Nls] {
        let cfg = SweepConfig {
            eps_list: vec![1e-3, 1e-2, 1e-1],
            k_list: vec![10],
            ..config(model, SweepScheme::Strang, 0)
        };
        let (s, pts) = eps_slope(&cfg)?;
        ok &= (s + 1.0).abs() <= 0.2;
        parts.push(format!("{model} slope {s:.2} [{pts}]"));
    }
    Ok((ok, parts.join("; ")))
}

fn c8_averaged() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for model in [ModelId::Nkg, ModelId::Nls] {
        let cfg = SweepConfig {
            eps_list: vec![1e-4, 1e-3, 1e-2],
            k_list: vec![12],
            ..config(model, SweepScheme::Averaged, 0)
        };
        let (s, pts) = eps_slope(&cfg)?;
        ok &= (s - 1.0).abs() <= 0.2;
        parts.push(format!("{model} slope {s:.2} [{pts}]"));
    }
    Ok((ok, parts.join("; ")))
}

/// `max_t max_τ ‖∂_t^k U‖_{H¹}` for `k = 1..=4` from a UA2 run with `Δt = ε/32`.
fn derivative_maxima(
    eps: f64,
    order: PreparationOrder,
    t_window: f64,
) -> Result<[f64; 4], ua_core::Error> {
    let m = NlsModel::paper(64, eps)?;
    let u0 = NlsModel::paper_initial_data(*m.grid());
    let tg = m.tau_grid(2048)?;
    let data = prepare_initial_data(&m, &u0, &tg, order)?;
    let dt = eps / 32.0;
    let n = (t_window / dt).round() as usize;
    let mut window: Vec<Snapshot> = Vec::new();
    let mut maxima = [0f64; 4];
    let mut err = None;
    let mut obs = |step: usize, t: f64, tau: f64, s: &TwoScaleField| {
        window.push(Snapshot {
            step,
            t,
            tau_star: tau,
            state: s.clone(),
        });
        if window.len() > 5 {
            window.remove(0);
        }
        for k in 1..=4 {
            if window.len() > k {
                match derivative_diagnostic(&window[window.len() - k - 1..], k, 1.0) {
                    Ok(series) => {
                        maxima[k - 1] = series.iter().fold(maxima[k - 1], |a, p| a.max(p.1))
                    }
                    Err(e) => err = Some(e),
                }
            }
        }
    };
    integrate(
        &m,
        &data,
        n as f64 * dt,
        n,
        Scheme::Ua2,
        IntegrateOptions::default(),
        &mut [&mut obs],
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(maxima),
    }
}

fn c9_derivatives() -> Outcome {
    let eps_list = [0.01, 0.005, 0.0025, 0.00125];
    let mut ok = true;
    let mut parts = Vec::new();
    for order in [
        PreparationOrder::Zero,
        PreparationOrder::One,
        PreparationOrder::Two,
    ] {
        let maxima: Vec<[f64; 4]> = eps_list
            .iter()
            .map(|&e| derivative_maxima(e, order, 0.05))
            .collect::<Result<_, _>>()?;
        let mut line = Vec::new();
        for k in 1..=4usize {
            let y: Vec<f64> = maxima.iter().map(|m| m[k - 1]).collect();
            let s = fit_slope(&eps_list, &y).unwrap_or(f64::NAN);
            let want = (order.as_u8() as f64 + 1.0 - k as f64).min(0.0);
            ok &= (s - want).abs() <= 0.3;
            line.push(format!("k{k} {s:.2}/{want}"));
        }
        parts.push(format!("n={order}: {}", line.join(" ")));
    }
    Ok((ok, format!("measured/expected slopes {}", parts.join("; "))))
}

fn c10_modes() -> Outcome {
    let eps_list = [0.04, 0.02, 0.01, 0.005];
    let modes = [3i64, 5, 7, 9, 11, 13];
    let mut rows = Vec::new();
    for &eps in &eps_list {
        let m = NlsModel::paper(64, eps)?;
        let u0 = NlsModel::paper_initial_data(*m.grid());
        let tg = m.tau_grid(2048)?;
        let data = prepare_initial_data(&m, &u0, &tg, PreparationOrder::Three)?;
        let tr = integrate(
            &m,
            &data,
            0.4,
            1 << 10,
            Scheme::Ua2,
            IntegrateOptions::default(),
            &mut [],
        )?;
        let snap = Snapshot {
            step: 1 << 10,
            t: 0.4,
            tau_star: tr.tau_star,
            state: tr.final_state,
        };
        rows.push(
            mode_trace(std::slice::from_ref(&snap), &modes, 0.0)?
                .values
                .remove(0),
        );
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (j, &mode) in modes.iter().enumerate() {
        let y: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let s = fit_slope(&eps_list, &y).unwrap_or(f64::NAN);
        let want = ((mode + 1) / 4) as f64;
        ok &= (s - want).abs() <= 0.3;
        parts.push(format!("u{mode} {s:.2}/{want}"));
    }
    Ok((ok, format!("measured/expected slopes {}", parts.join(" "))))
}

fn final_state(
    m: &Model,
    ntau: usize,
    k: u32,
    t_final: f64,
) -> Result<SpatialField, ua_core::Error> {
    let f = m.field();
    let u0 = m.paper_initial_data()?;
    let tg = f.tau_grid(ntau)?;
    let data = prepare_initial_data(f, &u0, &tg, PreparationOrder::Two)?;
    let tr = integrate(
        f,
        &data,
        t_final,
        1 << k,
        Scheme::Ua2,
        IntegrateOptions::default(),
        &mut [],
    )?;
    Ok(m.physical(&extract_at_phase(f, &tr.final_state, t_final, tr.tau_star)))
}

/// Errors against a finer run, and whether successive halving ratios grow.
fn spectral_series(errors: &[f64]) -> (bool, String) {
    let usable: Vec<f64> = errors.iter().copied().take_while(|e| *e > 1e-13).collect();
    let ratios: Vec<f64> = usable.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.len() >= 2 && ratios.windows(2).all(|w| w[1] > w[0]);
    let e: Vec<String> = errors.iter().map(|e| format!("{e:.1e}")).collect();
    let r: Vec<String> = ratios.iter().map(|r| format!("{r:.1}")).collect();
    (
        ok,
        format!("errors [{}] ratios [{}]", e.join(" "), r.join(" ")),
    )
}

fn c11_spectral() -> Outcome {
    let t = 0.4;
    let mut ok = true;
    let mut parts = Vec::new();

    let nkg = Model::paper(ModelId::Nkg, 200, 0.05)?;
    let fine = final_state(&nkg, 128, 6, t)?;
    let errs: Vec<f64> = [4usize, 8, 16, 32]
        .iter()
        .map(|&nt| Ok(relative_error(&final_state(&nkg, nt, 6, t)?, &fine, 1.0)?))
        .collect::<Result<_, ua_core::Error>>()?;
    let (o, s) = spectral_series(&errs);
    ok &= o;
    parts.push(format!("NKG Nτ 4..32: {s}"));

    let fine = final_state(&Model::paper(ModelId::Nkg, 512, 0.05)?, 64, 6, t)?;
    let errs: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&nx| {
            Ok(relative_error(
                &final_state(&Model::paper(ModelId::Nkg, nx, 0.05)?, 64, 6, t)?,
                &fine,
                1.0,
            )?)
        })
        .collect::<Result<_, ua_core::Error>>()?;
    let (o, s) = spectral_series(&errs);
    ok &= o;
    parts.push(format!("NKG Nx 32..128: {s}"));

    let nls = Model::paper(ModelId::Nls, 64, 0.01)?;
    let fine = final_state(&nls, 4096, 5, t)?;
    let errs: Vec<f64> = [128usize, 256, 512, 1024]
        .iter()
        .map(|&nt| Ok(relative_error(&final_state(&nls, nt, 5, t)?, &fine, 1.0)?))
        .collect::<Result<_, ua_core::Error>>()?;
    let (o, s) = spectral_series(&errs);
    ok &= o;
    parts.push(format!("NLS Nτ 128..1024: {s}"));

    let fine = final_state(&Model::paper(ModelId::Nls, 128, 0.01)?, 2048, 5, t)?;
    let errs: Vec<f64> = [6usize, 12, 24]
        .iter()
        .map(|&nx| {
            Ok(relative_error(
                &final_state(&Model::paper(ModelId::Nls, nx, 0.01)?, 2048, 5, t)?,
                &fine,
                1.0,
            )?)
        })
        .collect::<Result<_, ua_core::Error>>()?;
    let (o, s) = spectral_series(&errs);
    ok &= o;
    parts.push(format!("NLS Nx 6..24: {s}"));
    Ok((ok, parts.join("; ")))
}

fn c12_persistence() -> Outcome {
    let dir = tempfile::tempdir()?;
    let m = Model::paper(ModelId::Nls, 16, 0.1)?;
    let u0 = m.paper_initial_data()?;
    let store = ReferenceStore::new(dir.path().join("refs"));
    let (r, built) = store.get_or_build(&m, &u0, 0.05, ReferencePolicy::Desk, 64, false)?;
    let (again, rebuilt) = store.get_or_build(&m, &u0, 0.05, ReferencePolicy::Desk, 64, false)?;
    let bytes = encode_reference(&r);
    let decoded = decode_reference(&bytes)?;
    let exact = built
        && !rebuilt
        && again == r
        && decoded.state == r.state
        && encode_reference(&ReferenceSolution {
            state: decoded.state,
            ..r.clone()
        }) == bytes;

    // every single-bit flip in the value block and the stored checksum
    let start = 48;
    let (mut flips, mut by_sum) = (0usize, 0usize);
    for byte in start..bytes.len() {
        for bit in 0..8 {
            let mut bad = bytes.clone();
            bad[byte] ^= 1 << bit;
            flips += 1;
            if decode_reference(&bad).is_err() {
                by_sum += 1;
            }
        }
    }
    // the store's digest check on a sample of the same flips
    let (bin, _) = store.paths(&ReferenceStore::key(&m, &u0, 0.05, &r.recipe));
    let clean = std::fs::read(&bin)?;
    let mut by_store = 0usize;
    let mut sampled = 0usize;
    for byte in (start..clean.len()).step_by(7) {
        let mut bad = clean.clone();
        bad[byte] ^= 1;
        std::fs::write(&bin, &bad)?;
        sampled += 1;
        if store
            .load(
                &ReferenceStore::key(&m, &u0, 0.05, &r.recipe),
                r.model,
                r.eps,
                r.t_final,
                &r.recipe,
            )
            .is_err()
        {
            by_store += 1;
        }
    }
    std::fs::write(&bin, &clean)?;

    let mut cfg = SweepConfig {
        eps_list: vec![0.5, 0.1],
        k_list: vec![3, 4],
        t_final: 0.05,
        nx: 8,
        ntau: 128,
        cache_dir: Some(dir.path().join("refs")),
        ..SweepConfig::paper(ModelId::Nls, SweepScheme::Ua2, PreparationOrder::Two)
    };
    let strip = |path: &std::path::Path| -> std::io::Result<Vec<String>> {
        Ok(std::fs::read_to_string(path)?
            .lines()
            .map(|l| {
                l.rsplit_once(',')
                    .map(|p| p.0.to_string())
                    .unwrap_or_default()
            })
            .collect())
    };
    cfg.output = Some(dir.path().join("a.csv"));
    run_sweep(&cfg, None)?;
    cfg.output = Some(dir.path().join("b.csv"));
    run_sweep(&cfg, None)?;
    let same_csv = strip(&dir.path().join("a.csv"))? == strip(&dir.path().join("b.csv"))?;

    let ok = exact && by_sum == flips && by_store == sampled && same_csv;
    Ok((
        ok,
        format!(
            "round trip bit-exact: {exact}; format checksum caught {by_sum}/{flips} single-bit flips; \
             store digest caught {by_store}/{sampled}; repeated sweep CSV identical: {same_csv}"
        ),
    ))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "operator algebra", c1_operator_algebra),
        (2, "model oracles", c2_model_oracles),
        (3, "data preparation", c3_preparation),
        (4, "NLS uniform second order", c4_nls_ua2),
        (5, "NLS uniform first order", c5_nls_ua1),
        (6, "NKG uniform second order", c6_nkg_ua2),
        (7, "Strang non-uniformity", c7_strang),
        (8, "averaged-model error", c8_averaged),
        (9, "derivative scaling", c9_derivatives),
        (10, "mode scaling", c10_modes),
        (11, "spectral τ/x convergence", c11_spectral),
        (12, "persistence round-trip", c12_persistence),
    ];
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let clock = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "{} {id:>2} {name} ({:.1} s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            clock.elapsed().as_secs_f64()
        );
    }
    if failed > 0 && std::env::var_os("UA_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
