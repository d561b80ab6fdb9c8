//! Deterministic numerical kernels.

mod eigen;
mod newton;
mod roots;

pub use eigen::{symmetric_eigen, symmetric_eigenvalues, EigenResult, MAX_JACOBI_SWEEPS};
pub use newton::{damped_newton, MAX_NEWTON_STEPS};
pub use roots::{bisect, bisect_largest_root, MAX_BISECTION_STEPS};

/// `points` values spaced evenly in `log10` from `min` to `max` inclusive.
pub fn log_space(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (a, b) = (min.log10(), max.log10());
            (0..points)
                .map(|i| match i {
                    0 => min,
                    i if i == points - 1 => max,
                    i => 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64),
                })
                .collect()
        }
    }
}
