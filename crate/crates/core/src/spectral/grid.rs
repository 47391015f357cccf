use crate::error::{argument, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::fft::signed_mode;

/// Uniform periodic collocation grid on `[x0, x1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x0: f64,
    x1: f64,
    nx: usize,
}

impl SpatialGrid {
    pub fn new(x0: f64, x1: f64, nx: usize) -> Result<Self> {
        if !(x0.is_finite() && x1.is_finite()) || x1 <= x0 {
            return Err(argument(format!("empty interval [{x0}, {x1}]")));
        }
        if nx < 4 || !nx.is_multiple_of(2) {
            return Err(argument(format!("nx must be even and >= 4, got {nx}")));
        }
        Ok(SpatialGrid { x0, x1, nx })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn length(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.nx as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nx)
            .map(|m| self.x0 + m as f64 * self.dx())
            .collect()
    }

    /// Integer mode number of FFT bin `i`.
    pub fn mode(&self, i: usize) -> i64 {
        signed_mode(i, self.nx)
    }

    /// Wavenumber `ξ = 2πk/(x1 - x0)` of FFT bin `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.mode(i) as f64 / self.length()
    }

    /// Wavenumbers in FFT bin order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.wavenumber(i)).collect()
    }

    /// FFT bin holding integer mode `k`, if it is resolved by the grid.
    pub fn bin_of_mode(&self, k: i64) -> Option<usize> {
        let n = self.nx as i64;
        if k >= n / 2 || k < -n / 2 {
            return None;
        }
        Some(k.rem_euclid(n) as usize)
    }

    /// Same interval, different resolution.
    pub fn with_nx(&self, nx: usize) -> Result<Self> {
        SpatialGrid::new(self.x0, self.x1, nx)
    }

    pub fn same_interval(&self, other: &SpatialGrid) -> bool {
        self.x0 == other.x0 && self.x1 == other.x1
    }
}

/// Collocation grid on one period `[0, P)` of the fast variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    period: f64,
    ntau: usize,
}

impl TauGrid {
    pub fn new(period: f64, ntau: usize) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(argument(format!("period must be positive, got {period}")));
        }
        if ntau < 2 || !ntau.is_multiple_of(2) {
            return Err(argument(format!("ntau must be even, got {ntau}")));
        }
        Ok(TauGrid { period, ntau })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn ntau(&self) -> usize {
        self.ntau
    }

    /// Fundamental frequency `2π/P`.
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.period / self.ntau as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.ntau).map(|j| self.node(j)).collect()
    }

    pub fn mode(&self, j: usize) -> i64 {
        signed_mode(j, self.ntau)
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        2 * j == self.ntau
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(SpatialGrid::new(1.0, 0.0, 8).is_err());
        assert!(SpatialGrid::new(0.0, 1.0, 7).is_err());
        assert!(SpatialGrid::new(0.0, 1.0, 2).is_err());
        assert!(TauGrid::new(0.0, 8).is_err());
        assert!(TauGrid::new(1.0, 9).is_err());
    }

    #[test]
    fn wavenumbers_are_symmetric() {
        let g = SpatialGrid::new(0.0, 2.0 * PI, 8).unwrap();
        let k: Vec<i64> = (0..8).map(|i| g.mode(i)).collect();
        assert_eq!(k, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!((g.wavenumber(3) - 3.0).abs() < 1e-15);
        assert_eq!(g.bin_of_mode(-1), Some(7));
        assert_eq!(g.bin_of_mode(4), None);
    }

    #[test]
    fn non_power_of_two_is_fine() {
        let g = SpatialGrid::new(-8.0, 8.0, 200).unwrap();
        assert!((g.dx() - 0.08).abs() < 1e-15);
        let t = TauGrid::new(2.0 * PI, 64).unwrap();
        assert!((t.omega() - 1.0).abs() < 1e-15);
        assert!(t.is_nyquist(32));
    }
}
