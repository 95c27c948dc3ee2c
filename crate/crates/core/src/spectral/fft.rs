//! Unnormalised n-dimensional FFTs over the row-major sample layout.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((len, forward))
            .or_insert_with(|| {
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

/// In-place DFT along every axis; `forward` uses `e^{-2πi jk/N}`.
/// No normalisation is applied in either direction.
///
/// Each pass transforms the contiguous last axis and then rotates the axes
/// with a blocked transpose, so after `dim` passes the layout is restored.
pub(crate) fn fft_nd(grid: &Grid, data: &mut [Complex64], forward: bool) {
    let n = grid.points();
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    if grid.dim() == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    let rest = data.len() / n;
    let mut buf = vec![Complex64::new(0.0, 0.0); data.len()];
    for _ in 0..grid.dim() {
        fft.process_with_scratch(data, &mut scratch);
        // (rest rows × n cols) -> (n rows × rest cols): last axis becomes first
        transpose::transpose(data, &mut buf, n, rest);
        data.copy_from_slice(&buf);
    }
}

/// Forward FFT followed by pointwise multiplication and an inverse FFT,
/// normalised so that a unit multiplier is the identity.
pub(crate) fn apply_multiplier(grid: &Grid, data: &mut [Complex64], multiplier: impl Fn(usize) -> Complex64) {
    fft_nd(grid, data, true);
    let norm = 1.0 / grid.len() as f64;
    for (k, v) in data.iter_mut().enumerate() {
        *v *= multiplier(k) * norm;
    }
    fft_nd(grid, data, false);
}
