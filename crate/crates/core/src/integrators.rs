//! Uniformly accurate two-scale steppers and diagonal extraction.
//!
//! With `μ = ε/Δt`:
//! - UA1: `U_{n+1} = Q_μ⁻¹(U_n + Δt F(t_n, U_n))`
//! - UA2: `U_{n+½} = Q_{2μ}⁻¹(U_n + Δt/2 F(t_n, U_n))`,
//!   `U_{n+1} = Q_{2μ}⁻¹((2I - Q_{2μ})U_n + Δt F(t_n + Δt/2, U_{n+½}))`

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::dd::{reduced_fast_time, PhaseAccumulator};
use crate::error::{argument, Error, Result};
use crate::models::VectorField;
use crate::spectral::{
    apply_tau_table, combine_tau_tables, evaluate_at_tau, q_inverse_table, two_minus_q_table,
    SpatialField, TauGrid, TwoScaleField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ua1,
    Ua2,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ua1 => "ua1",
            Scheme::Ua2 => "ua2",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ua1" => Ok(Scheme::Ua1),
            "ua2" => Ok(Scheme::Ua2),
            _ => Err(argument(format!("unknown scheme '{s}'"))),
        }
    }
}

/// Multiplier tables for one `(Δt, ε, τ-grid)` triple.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: Scheme,
    dt: f64,
    taugrid: TauGrid,
    /// `Q_μ⁻¹` (UA1) or `Q_{2μ}⁻¹` (UA2)
    q_inv: Vec<Complex64>,
    /// `Q_{2μ}⁻¹ (2I - Q_{2μ})`, UA2 only
    cn: Vec<Complex64>,
    /// `Δt Q_{2μ}⁻¹`, UA2 only
    dt_q_inv: Vec<Complex64>,
}

impl Stepper {
    pub fn new(scheme: Scheme, eps: f64, dt: f64, taugrid: TauGrid) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(argument(format!("time step must be positive, got {dt}")));
        }
        let mu = eps / dt;
        let (q_inv, cn, dt_q_inv) = match scheme {
            Scheme::Ua1 => (q_inverse_table(&taugrid, mu)?, Vec::new(), Vec::new()),
            Scheme::Ua2 => {
                let q = q_inverse_table(&taugrid, 2.0 * mu)?;
                let tm = two_minus_q_table(&taugrid, mu)?;
                let cn = q.iter().zip(&tm).map(|(a, b)| a * b).collect();
                let dq = q.iter().map(|a| a * dt).collect();
                (q, cn, dq)
            }
        };
        Ok(Stepper {
            scheme,
            dt,
            taugrid,
            q_inv,
            cn,
            dt_q_inv,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn step(&self, model: &dyn VectorField, u: &TwoScaleField, t: f64) -> TwoScaleField {
        assert_eq!(
            *u.taugrid(),
            self.taugrid,
            "state lives on a different tau grid"
        );
        let dt = self.dt;
        match self.scheme {
            Scheme::Ua1 => {
                let f = model.eval(t, u);
                apply_tau_table(&u.axpy(dt, &f), &self.q_inv)
            }
            Scheme::Ua2 => {
                let f = model.eval(t, u);
                let half = apply_tau_table(&u.axpy(0.5 * dt, &f), &self.q_inv);
                let g = model.eval(t + 0.5 * dt, &half);
                combine_tau_tables(u, &self.cn, &g, &self.dt_q_inv)
            }
        }
    }
}

pub fn step_ua1(
    model: &dyn VectorField,
    u: &TwoScaleField,
    t: f64,
    dt: f64,
) -> Result<TwoScaleField> {
    Ok(Stepper::new(Scheme::Ua1, model.epsilon(), dt, *u.taugrid())?.step(model, u, t))
}

pub fn step_ua2(
    model: &dyn VectorField,
    u: &TwoScaleField,
    t: f64,
    dt: f64,
) -> Result<TwoScaleField> {
    Ok(Stepper::new(Scheme::Ua2, model.epsilon(), dt, *u.taugrid())?.step(model, u, t))
}

/// Read-only hook called after every accepted step (and once at `t = 0`).
pub trait Observer {
    fn observe(&mut self, step: usize, t: f64, tau_star: f64, state: &TwoScaleField);
}

impl<F: FnMut(usize, f64, f64, &TwoScaleField)> Observer for F {
    fn observe(&mut self, step: usize, t: f64, tau_star: f64, state: &TwoScaleField) {
        self(step, t, tau_star, state)
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub tau_star: f64,
    pub state: TwoScaleField,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: TwoScaleField,
    /// `(t_final/ε) mod P`, accumulated step by step in double-double.
    pub tau_star: f64,
}

impl Trajectory {
    pub fn t_final(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one time")
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrateOptions {
    /// Store a snapshot every `m` steps (including step 0 and the last step).
    pub snapshot_every: Option<usize>,
}

pub fn integrate(
    model: &dyn VectorField,
    u0: &TwoScaleField,
    t_final: f64,
    n_steps: usize,
    scheme: Scheme,
    options: IntegrateOptions,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(argument("number of steps must be at least 1"));
    }
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(argument(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    if let Some(0) = options.snapshot_every {
        return Err(argument("snapshot interval must be at least 1"));
    }
    let dt = t_final / n_steps as f64;
    let stepper = Stepper::new(scheme, model.epsilon(), dt, *u0.taugrid())?;
    let mut phase = PhaseAccumulator::new(dt, model.epsilon(), model.period_dd());
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut snapshots = Vec::new();
    let mut state = u0.clone();
    let wants = |n: usize| match options.snapshot_every {
        Some(m) => n.is_multiple_of(m) || n == n_steps,
        None => false,
    };

    times.push(0.0);
    for obs in observers.iter_mut() {
        obs.observe(0, 0.0, 0.0, &state);
    }
    if wants(0) {
        snapshots.push(Snapshot {
            step: 0,
            t: 0.0,
            tau_star: 0.0,
            state: state.clone(),
        });
    }
    for n in 0..n_steps {
        let t = n as f64 * dt;
        state = stepper.step(model, &state, t);
        if !state.is_finite() {
            return Err(Error::Diverged { step: n + 1 });
        }
        phase.advance();
        let t_next = (n + 1) as f64 * dt;
        times.push(t_next);
        for obs in observers.iter_mut() {
            obs.observe(n + 1, t_next, phase.value(), &state);
        }
        if wants(n + 1) {
            snapshots.push(Snapshot {
                step: n + 1,
                t: t_next,
                tau_star: phase.value(),
                state: state.clone(),
            });
        }
    }
    Ok(Trajectory {
        times,
        snapshots,
        final_state: state,
        tau_star: phase.value(),
    })
}

/// Physical solution `u(t) = unfilter(U(t, τ*))` with `τ* = (t/ε) mod P`.
pub fn extract_solution(model: &dyn VectorField, u: &TwoScaleField, t: f64) -> SpatialField {
    let tau = reduced_fast_time(t, model.epsilon(), model.period_dd());
    extract_at_phase(model, u, t, tau)
}

/// As [`extract_solution`] with an externally tracked diagonal phase.
pub fn extract_at_phase(
    model: &dyn VectorField,
    u: &TwoScaleField,
    t: f64,
    tau_star: f64,
) -> SpatialField {
    model.unfilter(&evaluate_at_tau(u, tau_star), t)
}
