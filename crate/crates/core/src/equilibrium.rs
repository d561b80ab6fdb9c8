//! Equilibrium positions of the string along the trap axis.
//!
//! In units of `ℓ` the potential energy (divided by `q a₀ ℓ²`) is
//! `½ Σ u_i² + Σ_{i<j} 1/|u_i − u_j|`, and force balance reads
//! `u_i − Σ_{j≠i} (u_i − u_j)/|u_i − u_j|³ = 0`. Masses never enter, so the
//! positions depend only on the ion count.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::damped_newton;
use crate::types::{validate_ion_count, EquilibriumConfiguration};

const NEWTON_TOL: f64 = 1e-13;

/// Force-balance residual for normalized positions `u`.
pub fn force_residual(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let coulomb: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = u[i] - u[j];
                    d.signum() / (d * d)
                })
                .sum();
            u[i] - coulomb
        })
        .collect()
}

/// Jacobian of [`force_residual`]. This is the axial Hessian `A` of the
/// potential: diagonal `1 + 2Σ 1/|Δu|³`, off-diagonal `−2/|Δu|³`.
pub fn force_jacobian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (u[i] - u[j]).abs();
            let k = 2.0 / (d * d * d);
            a[(i, j)] = -k;
            a[(j, i)] = -k;
            a[(i, i)] += k;
            a[(j, j)] += k;
        }
        a[(i, i)] += 1.0;
    }
    a
}

/// Normalized potential energy of an arbitrary set of positions.
pub fn potential_energy(positions: &[f64]) -> Result<f64> {
    let n = positions.len();
    let mut energy = 0.5 * positions.iter().map(|u| u * u).sum::<f64>();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (positions[i] - positions[j]).abs();
            if d == 0.0 {
                return Err(Error::CoincidentIons(i, j));
            }
            energy += 1.0 / d;
        }
    }
    Ok(energy)
}

/// Starting point for Newton: evenly spaced over `[−(N−1)/2, (N−1)/2]`,
/// scaled by `N^(−1/3)`.
pub fn initial_guess(n: usize) -> Vec<f64> {
    let half = (n as f64 - 1.0) / 2.0;
    let scale = (n as f64).powf(-1.0 / 3.0);
    (0..n).map(|i| (i as f64 - half) * scale).collect()
}

/// Solves force balance for an odd string of `n` ions (3 ≤ n ≤ 25).
///
/// The Newton solution is antisymmetrized afterwards so that
/// `u_i = −u_{N+1−i}` and the center sits exactly at zero.
pub fn equilibrium_positions(n: usize) -> Result<EquilibriumConfiguration> {
    validate_ion_count(n)?;
    let raw = damped_newton(
        force_residual,
        force_jacobian,
        &initial_guess(n),
        NEWTON_TOL,
    )?;

    let mut positions = vec![0.0; n];
    for i in 0..n / 2 {
        let mirrored = 0.5 * (raw[n - 1 - i] - raw[i]);
        positions[i] = -mirrored;
        positions[n - 1 - i] = mirrored;
    }

    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NoConvergence {
            what: "equilibrium (ordering lost)",
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let residual = force_residual(&positions)
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.abs()));
    if !(residual < 1e-12) {
        return Err(Error::NoConvergence {
            what: "equilibrium",
            iterations: crate::numerics::MAX_NEWTON_STEPS,
            residual,
        });
    }
    Ok(EquilibriumConfiguration {
        positions,
        residual,
    })
}
