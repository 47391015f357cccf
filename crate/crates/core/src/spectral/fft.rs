//! Thin wrapper over `rustfft` with the crate-wide normalization: the
//! forward transform carries the `1/n` factor, the inverse is a plain sum.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) struct Plan {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Plan {
    pub(crate) fn new(n: usize) -> Self {
        let (fwd, inv) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        });
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Plan {
            n,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Normalized forward transform of every contiguous length-`n` chunk.
    pub(crate) fn forward(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.n, 0);
        self.fwd.process_with_scratch(buf, &mut self.scratch);
        let s = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= s;
        }
    }

    pub(crate) fn inverse(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.n, 0);
        self.inv.process_with_scratch(buf, &mut self.scratch);
    }
}

/// Index of FFT bin `i` in the symmetric integer range; the Nyquist bin of an
/// even transform maps to `-n/2`.
#[inline]
pub fn signed_mode(i: usize, n: usize) -> i64 {
    if 2 * i < n {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
