//! FFT plumbing shared by the delay-domain and delay-Doppler transforms.
//!
//! Plans are cached in a thread-local planner so per-region transforms stay
//! cheap and threads never contend on a shared planner.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn plan_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Runs `fft` over each length-`len` chunk of `data` in place.
pub(crate) fn process_chunks(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
    let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
    for chunk in data.chunks_exact_mut(fft.len()) {
        fft.process_with_scratch(chunk, &mut scratch);
    }
}

/// Scales every element by `factor`.
pub(crate) fn scale(data: &mut [Complex64], factor: f64) {
    for z in data.iter_mut() {
        *z *= factor;
    }
}
