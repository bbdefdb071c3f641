use std::cell::RefCell;

use rustfft::FftPlanner;

use crate::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalised forward DFT: `out_k = sum_j a_j e^{-2 pi i jk/n}`.
pub(crate) fn forward(buf: &mut [C64]) {
    if buf.len() <= 1 {
        return;
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// Unnormalised inverse DFT: `out_k = sum_j a_j e^{+2 pi i jk/n}`.
pub(crate) fn inverse(buf: &mut [C64]) {
    if buf.len() <= 1 {
        return;
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

/// Apply a 1D transform along both axes of a row-major `rows x cols` buffer.
pub(crate) fn along_both_axes(buf: &mut [C64], rows: usize, cols: usize, tf: fn(&mut [C64])) {
    for r in buf.chunks_mut(cols) {
        tf(r);
    }
    let mut column = vec![C64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = buf[r * cols + c];
        }
        tf(&mut column);
        for r in 0..rows {
            buf[r * cols + c] = column[r];
        }
    }
}
