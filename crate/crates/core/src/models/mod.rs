//! Oscillatory vector fields `F(t, τ, u)` for the two test problems, with
//! their directional derivatives, explicit time derivatives and filters.

mod nkg;
mod nls;

pub use nkg::{nkg_reconstruct, nkg_to_first_order, NkgModel};
pub use nls::{paper_gamma, NlsModel};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::dd::DoubleDouble;
use crate::spectral::{SpatialField, SpatialGrid, TauGrid, TwoScaleField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Nkg,
    Nls,
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelId::Nkg => "nkg",
            ModelId::Nls => "nls",
        })
    }
}

impl FromStr for ModelId {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "nkg" => Ok(ModelId::Nkg),
            "nls" => Ok(ModelId::Nls),
            _ => Err(crate::error::argument(format!("unknown model '{s}'"))),
        }
    }
}

/// The right-hand side of `∂_t u = F(t, t/ε, u)` together with everything
/// the two-scale machinery needs from it.
///
/// Field-level methods evaluate on every node of the input's τ grid; the
/// `*_at` variants take an arbitrary `τ`.
pub trait VectorField: Send + Sync {
    fn id(&self) -> ModelId;
    fn grid(&self) -> &SpatialGrid;
    fn epsilon(&self) -> f64;
    fn ncomp(&self) -> usize;
    /// Period `P` in τ.
    fn period(&self) -> f64;
    fn period_dd(&self) -> DoubleDouble;

    fn eval_at(&self, t: f64, tau: f64, u: &SpatialField) -> SpatialField;

    fn eval(&self, t: f64, u: &TwoScaleField) -> TwoScaleField;

    /// Real-linear derivative `∂_u F(t, τ, u)[w]`, slice by slice.
    fn directional(&self, t: f64, u: &TwoScaleField, w: &TwoScaleField) -> TwoScaleField;

    fn directional_at(&self, t: f64, tau: f64, u: &SpatialField, w: &SpatialField) -> SpatialField;

    /// `∂_t F(t, τ, u)` at fixed `u`.
    fn time_derivative(&self, t: f64, u: &TwoScaleField) -> TwoScaleField;

    /// Physical unknown → filtered unknown at time `t`.
    fn filter(&self, f: &SpatialField, t: f64) -> SpatialField;

    /// Filtered unknown → physical unknown at time `t`.
    fn unfilter(&self, f: &SpatialField, t: f64) -> SpatialField;

    fn tau_grid(&self, ntau: usize) -> crate::Result<TauGrid> {
        TauGrid::new(self.period(), ntau)
    }
}

/// Either test problem behind one concrete type.
#[derive(Debug, Clone)]
pub enum Model {
    Nkg(NkgModel),
    Nls(NlsModel),
}

impl Model {
    /// The standard configuration of each problem on `nx` points.
    pub fn paper(id: ModelId, nx: usize, eps: f64) -> crate::Result<Model> {
        Ok(match id {
            ModelId::Nkg => Model::Nkg(NkgModel::paper(nx, eps)?),
            ModelId::Nls => Model::Nls(NlsModel::paper(nx, eps)?),
        })
    }

    /// Initial state in the model's unknowns: `u₀` for NLS, `v(0)` for NKG.
    pub fn paper_initial_data(&self) -> crate::Result<SpatialField> {
        match self {
            Model::Nkg(m) => NkgModel::paper_initial_data(*m.grid(), m.epsilon()),
            Model::Nls(m) => Ok(NlsModel::paper_initial_data(*m.grid())),
        }
    }

    pub fn field(&self) -> &dyn VectorField {
        match self {
            Model::Nkg(m) => m,
            Model::Nls(m) => m,
        }
    }

    pub fn id(&self) -> ModelId {
        self.field().id()
    }

    pub fn epsilon(&self) -> f64 {
        self.field().epsilon()
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.field().grid()
    }

    pub fn with_epsilon(&self, eps: f64) -> crate::Result<Model> {
        Ok(match self {
            Model::Nkg(m) => Model::Nkg(m.with_epsilon(eps)?),
            Model::Nls(m) => Model::Nls(m.with_epsilon(eps)?),
        })
    }

    pub fn with_nx(&self, nx: usize) -> crate::Result<Model> {
        Ok(match self {
            Model::Nkg(m) => Model::Nkg(m.with_nx(nx)?),
            Model::Nls(m) => Model::Nls(m.with_nx(nx)?),
        })
    }

    /// The physical wave `u` from the (unfiltered) state: identity for NLS,
    /// `(v₊ + v̄₋)/2` for NKG.
    pub fn physical(&self, state: &SpatialField) -> SpatialField {
        match self {
            Model::Nkg(m) => nkg_reconstruct(state, m.epsilon()).0,
            Model::Nls(_) => state.clone(),
        }
    }
}

/// `f(z) = λ|z|²z`
#[inline]
pub(crate) fn cubic(lambda: f64, z: Complex64) -> Complex64 {
    z * (lambda * z.norm_sqr())
}

/// `d f(z)[ζ] = λ(2|z|²ζ + z²ζ̄)`
#[inline]
pub(crate) fn cubic_derivative(lambda: f64, z: Complex64, dz: Complex64) -> Complex64 {
    (dz * (2.0 * z.norm_sqr()) + z * z * dz.conj()) * lambda
}

/// Zeroes Fourier bins above two thirds of the Nyquist mode.
pub(crate) fn two_thirds_mask(grid: &SpatialGrid) -> Vec<f64> {
    let nx = grid.nx() as i64;
    (0..grid.nx())
        .map(|i| {
            if 3 * grid.mode(i).abs() < nx {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// `e^{iθ}` with `θ = 2π·frac`, `frac` already reduced to `[0, 1)`.
#[inline]
pub(crate) fn turn(frac: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * frac)
}
