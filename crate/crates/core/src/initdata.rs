//! Chapman-Enskog preparation of the two-scale initial datum `U₀(τ)`.
//!
//! Every order satisfies `U₀(0) = u₀`, so the diagonal of the two-scale
//! solution starts on the physical initial condition.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{argument, domain, Result};
use crate::models::VectorField;
use crate::spectral::{tau_antiderivative_a, tau_average, SpatialField, TauGrid, TwoScaleField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum PreparationOrder {
    Zero,
    One,
    Two,
    /// Built by iterating the corrector recursion three times with
    /// finite-difference time derivatives. Experimental.
    Three,
}

impl PreparationOrder {
    pub const ALL: [PreparationOrder; 4] = [
        PreparationOrder::Zero,
        PreparationOrder::One,
        PreparationOrder::Two,
        PreparationOrder::Three,
    ];

    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for PreparationOrder {
    type Error = crate::Error;
    fn try_from(n: u8) -> Result<Self> {
        PreparationOrder::ALL
            .get(n as usize)
            .copied()
            .ok_or_else(|| argument(format!("unsupported preparation order {n}")))
    }
}

impl From<PreparationOrder> for u8 {
    fn from(o: PreparationOrder) -> u8 {
        o.as_u8()
    }
}

impl fmt::Display for PreparationOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

fn check_layout(model: &dyn VectorField, u: &SpatialField) -> Result<()> {
    if u.grid() != model.grid() || u.ncomp() != model.ncomp() {
        return Err(argument("initial datum does not match the model grid"));
    }
    if !u.is_finite() {
        return Err(domain("initial datum is not finite"));
    }
    Ok(())
}

/// `h₁(τ, u) = A F(0, τ, u)`.
pub fn h1(model: &dyn VectorField, u: &SpatialField, taugrid: &TauGrid) -> TwoScaleField {
    let f = model.eval(0.0, &TwoScaleField::constant(*taugrid, u));
    tau_antiderivative_a(&f)
}

/// `h₂(τ, u) = A ∂_uF[AF] - A²(∂_uF[ΠF] + ∂_tF)`, everything at `t = 0`.
pub fn h2(model: &dyn VectorField, u: &SpatialField, taugrid: &TauGrid) -> TwoScaleField {
    let base = TwoScaleField::constant(*taugrid, u);
    let f = model.eval(0.0, &base);
    second_corrector(model, &base, &f, &tau_antiderivative_a(&f))
}

fn second_corrector(
    model: &dyn VectorField,
    base: &TwoScaleField,
    f: &TwoScaleField,
    h1: &TwoScaleField,
) -> TwoScaleField {
    let mean = TwoScaleField::constant(*base.taugrid(), &tau_average(f));
    let first = tau_antiderivative_a(&model.directional(0.0, base, h1));
    let inner = &model.directional(0.0, base, &mean) + &model.time_derivative(0.0, base);
    let second = tau_antiderivative_a(&tau_antiderivative_a(&inner));
    &first - &second
}

/// `U(τ) - U(0)` broadcast back onto the grid.
fn minus_origin(u: &TwoScaleField) -> TwoScaleField {
    u.add_constant(&u.slice_field(0).scale((-1.0).into()))
}

pub fn prepare_initial_data(
    model: &dyn VectorField,
    u0: &SpatialField,
    taugrid: &TauGrid,
    order: PreparationOrder,
) -> Result<TwoScaleField> {
    check_layout(model, u0)?;
    let eps = model.epsilon();
    let base = TwoScaleField::constant(*taugrid, u0);
    let out = match order {
        PreparationOrder::Zero => base,
        PreparationOrder::One => {
            let h = h1(model, u0, taugrid);
            base.axpy(eps, &minus_origin(&h))
        }
        PreparationOrder::Two => {
            let f = model.eval(0.0, &base);
            let h1 = tau_antiderivative_a(&f);
            let h2 = second_corrector(model, &base, &f, &h1);
            let origin = TwoScaleField::constant(*taugrid, &h1.slice_field(0));
            let dh1 = tau_antiderivative_a(&model.directional(0.0, &base, &origin));
            let corr = &minus_origin(&h2) - &minus_origin(&dh1);
            base.axpy(eps, &minus_origin(&h1)).axpy(eps * eps, &corr)
        }
        PreparationOrder::Three => third_order(model, u0, taugrid)?,
    };
    if !out.is_finite() {
        return Err(domain("prepared initial datum is not finite"));
    }
    Ok(out)
}

const FD_STEP: f64 = 1e-3;
const FD_NODES: [(f64, f64); 4] = [
    (-2.0, 1.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

/// Corrector `h^{(level)}(t, τ, ū)` from `level` sweeps of
/// `h ← εA F(ū + h) - εA (d/dt) h`, with `d/dt` taken along the averaged
/// drift `ΠF(ū + h)` by a fourth-order central difference.
fn corrector(
    model: &dyn VectorField,
    taugrid: &TauGrid,
    t: f64,
    ubar: &SpatialField,
    level: usize,
) -> TwoScaleField {
    let base = TwoScaleField::constant(*taugrid, ubar);
    if level == 0 {
        return TwoScaleField::zeros_like(&base);
    }
    let eps = model.epsilon();
    let prev = corrector(model, taugrid, t, ubar, level - 1);
    let f = model.eval(t, &(&base + &prev));
    let mut out = &tau_antiderivative_a(&f) * eps;
    if level >= 2 {
        let drift = tau_average(&f);
        let mut deriv = TwoScaleField::zeros_like(&base);
        for (j, w) in FD_NODES {
            let shifted = ubar + &(&drift * (j * FD_STEP));
            let h = corrector(model, taugrid, t + j * FD_STEP, &shifted, level - 1);
            deriv = deriv.axpy(w / FD_STEP, &h);
        }
        out = out.axpy(-eps, &tau_antiderivative_a(&deriv));
    }
    out
}

fn third_order(
    model: &dyn VectorField,
    u0: &SpatialField,
    taugrid: &TauGrid,
) -> Result<TwoScaleField> {
    let scale = u0.max_abs().max(f64::MIN_POSITIVE);
    let mut ubar = u0.clone();
    let mut h = corrector(model, taugrid, 0.0, &ubar, 3);
    for _ in 0..100 {
        let next = u0 - &h.slice_field(0);
        let change = (&next - &ubar).max_abs();
        ubar = next;
        h = corrector(model, taugrid, 0.0, &ubar, 3);
        if !h.is_finite() {
            break;
        }
        if change <= 1e-13 * scale {
            return Ok(minus_origin(&h).add_constant(u0));
        }
    }
    Err(domain(format!(
        "third-order preparation did not converge at epsilon = {}",
        model.epsilon()
    )))
}
