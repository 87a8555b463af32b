//! Fixtures shared by the benchmarks.

use muskat_core::{BubbleState, Complex64, PhysicalParams, SpectralField};

/// Perturbed bubble 0.05·2cos(2α) + 0.01·2cos(5α) at `n` modes.
pub fn perturbed_state(n: usize) -> BubbleState {
    let th = &SpectralField::cosine(n, 2, 0.1, 0.0) + &SpectralField::cosine(n, 5, 0.02, 0.3);
    BubbleState::new(th, 0.2, 1.0, Complex64::new(0.0, 0.0)).expect("admissible fixture")
}

pub fn params() -> PhysicalParams {
    PhysicalParams::new(0.3, 1.0, 1.0, 1.0).expect("valid fixture")
}
