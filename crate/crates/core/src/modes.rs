//! Dynamical matrices and normal-mode spectra.
//!
//! Normalized coordinates are `Q_i = q_i √(q a₀)` for outer ions and
//! `Q_c = q_c √(q a₀ μ)` for the center ion, which turns the small-oscillation
//! Lagrangian into canonical form with a symmetric stiffness matrix. Every
//! entry touching the center row or column picks up `1/√μ`, the center
//! diagonal `1/μ`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::equilibrium::equilibrium_positions;
use crate::error::{Error, Result};
use crate::numerics::symmetric_eigen;
use crate::types::{
    Branch, CrystalConfig, DynamicalMatrix, EquilibriumConfiguration, ModeClass, ModeSpectrum,
    ModeTrajectory, ALPHA,
};

/// Relative tolerance under which two fractional spacings count as tied.
const SPACING_TIE: f64 = 1e-12;

fn mass_scale(m: &mut DMatrix<f64>, center: usize, mu: f64) {
    let root = mu.sqrt();
    let n = m.nrows();
    for k in 0..n {
        if k != center {
            m[(center, k)] /= root;
            m[(k, center)] /= root;
        }
    }
    m[(center, center)] /= mu;
}

fn check_size(config: &CrystalConfig, eq: &EquilibriumConfiguration) {
    assert_eq!(
        config.n,
        eq.len(),
        "equilibrium has {} ions but config asks for {}",
        eq.len(),
        config.n
    );
}

/// Mass-scaled axial matrix `A′` for a precomputed equilibrium.
pub fn axial_matrix_with(config: &CrystalConfig, eq: &EquilibriumConfiguration) -> DynamicalMatrix {
    check_size(config, eq);
    let n = config.n;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let k = 2.0 * eq.inverse_cube(i, j);
            a[(i, j)] = -k;
            a[(j, i)] = -k;
        }
        let coulomb: f64 = (0..n)
            .filter(|&k| k != i)
            .map(|k| eq.inverse_cube(i, k))
            .sum();
        a[(i, i)] = 1.0 + 2.0 * coulomb;
    }
    mass_scale(&mut a, config.center(), config.mu);
    DynamicalMatrix::new(Branch::Axial, a, *config)
}

pub fn axial_matrix(config: &CrystalConfig) -> Result<DynamicalMatrix> {
    let eq = equilibrium_positions(config.n)?;
    Ok(axial_matrix_with(config, &eq))
}

/// Mass-scaled transverse (x) matrix `B′` for a precomputed equilibrium.
///
/// The pseudopotential on the center ion scales as `1/M`, which gives the
/// `ε²/μ` term on the center diagonal before mass scaling.
pub fn transverse_matrix_with(
    config: &CrystalConfig,
    eq: &EquilibriumConfiguration,
) -> DynamicalMatrix {
    check_size(config, eq);
    let n = config.n;
    let center = config.center();
    let eps2 = config.epsilon * config.epsilon;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let k = eq.inverse_cube(i, j);
            b[(i, j)] = k;
            b[(j, i)] = k;
        }
        let coulomb: f64 = (0..n)
            .filter(|&k| k != i)
            .map(|k| eq.inverse_cube(i, k))
            .sum();
        let radial = if i == center { eps2 / config.mu } else { eps2 };
        b[(i, i)] = radial - ALPHA - coulomb;
    }
    mass_scale(&mut b, center, config.mu);
    DynamicalMatrix::new(Branch::Transverse, b, *config)
}

pub fn transverse_matrix(config: &CrystalConfig) -> Result<DynamicalMatrix> {
    let eq = equilibrium_positions(config.n)?;
    Ok(transverse_matrix_with(config, &eq))
}

pub fn matrix_with(
    config: &CrystalConfig,
    eq: &EquilibriumConfiguration,
    branch: Branch,
) -> DynamicalMatrix {
    match branch {
        Branch::Axial => axial_matrix_with(config, eq),
        Branch::Transverse => transverse_matrix_with(config, eq),
    }
}

/// Diagonalizes a dynamical matrix. Unstable modes are kept with a negative
/// squared frequency.
pub fn solve_spectrum(matrix: &DynamicalMatrix) -> Result<ModeSpectrum> {
    let eig = symmetric_eigen(matrix.entries())?;
    let vectors = (0..eig.values.len()).map(|k| eig.vector(k)).collect();
    Ok(ModeSpectrum::new(
        matrix.branch(),
        eig.values,
        vectors,
        *matrix.config(),
    ))
}

/// Builds the matrix for `branch` and diagonalizes it.
pub fn spectrum(config: &CrystalConfig, branch: Branch) -> Result<ModeSpectrum> {
    let eq = equilibrium_positions(config.n)?;
    solve_spectrum(&matrix_with(config, &eq, branch))
}

/// Closed-form axial modes of three ions.
///
/// Modes are labelled as in the identical-ion case: 0 is the COM-like mode,
/// 1 the μ-independent stretch mode `√3`, 2 the upper hot mode. This label
/// order is not frequency order once `μ > 17/3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticSpectrum {
    pub frequencies: [f64; 3],
    pub eigenvectors: [[f64; 3]; 3],
}

impl AnalyticSpectrum {
    /// Modes reordered by ascending frequency.
    pub fn sorted(&self) -> Self {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| self.frequencies[a].total_cmp(&self.frequencies[b]));
        Self {
            frequencies: idx.map(|k| self.frequencies[k]),
            eigenvectors: idx.map(|k| self.eigenvectors[k]),
        }
    }
}

pub fn axial_n3_analytic(mu: f64) -> AnalyticSpectrum {
    let root = (441.0 - 34.0 * mu + 169.0 * mu * mu).sqrt();
    let z1_sq = 1.3 + (21.0 - root) / (10.0 * mu);
    let z3_sq = 1.3 + (21.0 + root) / (10.0 * mu);
    let hot = |z_sq: f64| {
        let mid = mu.sqrt() / 8.0 * (13.0 - 5.0 * z_sq);
        let norm = (2.0 + mid * mid).sqrt();
        [1.0 / norm, mid / norm, 1.0 / norm]
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    AnalyticSpectrum {
        frequencies: [z1_sq.sqrt(), 3.0_f64.sqrt(), z3_sq.sqrt()],
        eigenvectors: [hot(z1_sq), [s, 0.0, -s], hot(z3_sq)],
    }
}

/// Samples the motion of mode `k` excited with amplitude `amplitude` and
/// phase `phase` at normalized times `times`.
pub fn mode_trajectory(
    spectrum: &ModeSpectrum,
    k: usize,
    amplitude: f64,
    phase: f64,
    times: &[f64],
) -> Result<ModeTrajectory> {
    if k >= spectrum.len() {
        return Err(Error::Invalid(format!(
            "mode index {k} out of range for {} modes",
            spectrum.len()
        )));
    }
    let zeta = spectrum.frequency(k).ok_or(Error::UnstableMode(k))?;
    let config = spectrum.config();
    let center = config.center();
    let center_factor = 1.0 / config.mu.sqrt();
    let v = spectrum.eigenvector(k);
    let displacements = times
        .iter()
        .map(|&t| {
            let c = amplitude * (zeta * t + phase).cos();
            v.iter()
                .enumerate()
                .map(|(i, vi)| {
                    if i == center {
                        c * vi * center_factor
                    } else {
                        c * vi
                    }
                })
                .collect()
        })
        .collect();
    Ok(ModeTrajectory {
        mode: k,
        amplitude,
        phase,
        times: times.to_vec(),
        displacements,
    })
}

/// Separation of a mode from its nearest stable neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spacing {
    pub mode: usize,
    pub neighbor: usize,
    /// `|ζ_j − ζ_k|`, in units of `ω_z`.
    pub absolute: f64,
    /// `|ζ_j − ζ_k| / ((ζ_j + ζ_k)/2)`.
    pub fractional: f64,
}

pub fn fractional_spacing(spectrum: &ModeSpectrum, k: usize) -> Result<Spacing> {
    if k >= spectrum.len() {
        return Err(Error::Invalid(format!("mode index {k} out of range")));
    }
    let zk = spectrum.frequency(k).ok_or(Error::UnstableMode(k))?;
    let mut best: Option<Spacing> = None;
    for j in (0..spectrum.len()).filter(|&j| j != k) {
        let Some(zj) = spectrum.frequency(j) else {
            continue;
        };
        let absolute = (zj - zk).abs();
        let fractional = absolute / (0.5 * (zj + zk));
        if best.is_none_or(|b| fractional < b.fractional) {
            best = Some(Spacing {
                mode: k,
                neighbor: j,
                absolute,
                fractional,
            });
        }
    }
    best.ok_or_else(|| Error::Invalid("spectrum has no other stable mode".into()))
}

/// Cold mode best separated from the rest of the spectrum.
///
/// Ties go to the lower-frequency mode.
pub fn select_logic_mode(spectrum: &ModeSpectrum) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for k in 0..spectrum.len() {
        if spectrum.class(k) != ModeClass::Cold || spectrum.frequency(k).is_none() {
            continue;
        }
        let s = fractional_spacing(spectrum, k)?.fractional;
        match best {
            Some((_, b)) if s <= b * (1.0 + SPACING_TIE) => {}
            _ => best = Some((k, s)),
        }
    }
    best.map(|(k, _)| k).ok_or(Error::NoColdMode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(n: usize, mu: f64, eps: f64) -> CrystalConfig {
        CrystalConfig::new(n, mu, eps).unwrap()
    }

    #[test]
    fn axial_three_ions_identical() {
        let m = axial_matrix(&cfg(3, 1.0, 1.0)).unwrap();
        let want = [[2.8, -1.6, -0.2], [-1.6, 4.2, -1.6], [-0.2, -1.6, 2.8]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(m.get(i, j), want[i][j], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn axial_three_ions_heavy_center() {
        let m = axial_matrix(&cfg(3, 4.0, 1.0)).unwrap();
        assert_abs_diff_eq!(m.get(0, 1), -0.8, epsilon = 1e-13);
        assert_abs_diff_eq!(m.get(1, 1), 1.05, epsilon = 1e-13);
        assert_abs_diff_eq!(m.get(0, 2), -0.2, epsilon = 1e-13);
    }

    #[test]
    fn matrices_exactly_symmetric() {
        for n in [3, 5, 9, 15] {
            for mu in [0.013, 0.7, 3.3, 88.0] {
                let c = cfg(n, mu, 2.5);
                for m in [axial_matrix(&c).unwrap(), transverse_matrix(&c).unwrap()] {
                    assert_eq!(m.entries(), &m.entries().transpose());
                }
            }
        }
    }

    #[test]
    fn axial_ignores_epsilon() {
        let a = axial_matrix(&cfg(5, 2.0, 1.3)).unwrap();
        let b = axial_matrix(&cfg(5, 2.0, 7.0)).unwrap();
        assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn transverse_three_ions() {
        let m = transverse_matrix(&cfg(3, 1.0, 2.0)).unwrap();
        let want = [[2.6, 0.8, 0.1], [0.8, 1.9, 0.8], [0.1, 0.8, 2.6]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(m.get(i, j), want[i][j], epsilon = 1e-13);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(m.get(i, j) > 0.0);
                }
            }
        }
    }

    #[test]
    fn transverse_cold_mode_three_ions() {
        for eps in [1.3, 2.0, 4.0] {
            let s = spectrum(&cfg(3, 1.0, eps), Branch::Transverse).unwrap();
            let cold: Vec<usize> = s.cold_modes().collect();
            assert_eq!(cold.len(), 1);
            let k = cold[0];
            assert_abs_diff_eq!(s.squared_frequencies()[k], eps * eps - 1.5, epsilon = 1e-12);
            let v = s.eigenvector(k);
            assert_abs_diff_eq!(v[0], std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
            assert_abs_diff_eq!(v[2], -std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        }
    }

    #[test]
    fn transverse_rocking_mode_unstable_below_threshold() {
        let s = spectrum(&cfg(3, 1.0, 1.2), Branch::Transverse).unwrap();
        assert!(!s.is_stable());
        let unstable: Vec<usize> = s.unstable_modes().collect();
        assert!(unstable.iter().any(|&k| s.class(k) == ModeClass::Cold));
        assert!(s.frequency(unstable[0]).is_none());
        assert!(s.signed_frequencies()[unstable[0]] < 0.0);
    }

    #[test]
    fn axial_three_ions_spectrum() {
        let s = spectrum(&cfg(3, 1.0, 1.0), Branch::Axial).unwrap();
        let z = s.signed_frequencies();
        assert_abs_diff_eq!(z[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], 3.0_f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(z[2], 5.8_f64.sqrt(), epsilon = 1e-12);
        let r3 = 1.0 / 3.0_f64.sqrt();
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let r6 = 1.0 / 6.0_f64.sqrt();
        let want = [[r3, r3, r3], [r2, 0.0, -r2], [r6, -2.0 * r6, r6]];
        for k in 0..3 {
            for i in 0..3 {
                assert_abs_diff_eq!(s.eigenvector(k)[i], want[k][i], epsilon = 1e-12);
            }
        }
        assert_eq!(
            s.classes(),
            &[ModeClass::Hot, ModeClass::Cold, ModeClass::Hot]
        );
    }

    #[test]
    fn analytic_identical_ions() {
        let a = axial_n3_analytic(1.0);
        assert_abs_diff_eq!(a.frequencies[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a.frequencies[1], 1.7320508075688772, epsilon = 1e-15);
        assert_abs_diff_eq!(a.frequencies[2], 2.4083189157584592, epsilon = 1e-14);
    }

    #[test]
    fn analytic_be_mg_be_spacing() {
        let a = axial_n3_analytic(24.0 / 9.0);
        let d = a.frequencies[2] - a.frequencies[1];
        assert!((d - 0.157).abs() < 0.001, "{d}");
    }

    #[test]
    fn trajectory_phase_zero() {
        let s = spectrum(&cfg(3, 1.0, 1.0), Branch::Axial).unwrap();
        let t = mode_trajectory(&s, 1, 1.0, 0.0, &[0.0]).unwrap();
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(t.displacements[0][0], r2, epsilon = 1e-12);
        assert_abs_diff_eq!(t.displacements[0][1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.displacements[0][2], -r2, epsilon = 1e-12);
    }

    #[test]
    fn trajectory_center_scaling_and_period() {
        let s = spectrum(&cfg(3, 4.0, 1.0), Branch::Axial).unwrap();
        let c = 0.7;
        let t = mode_trajectory(&s, 0, c, 0.0, &[0.0]).unwrap();
        assert_abs_diff_eq!(
            t.displacements[0][1],
            c * s.eigenvector(0)[1] / 2.0,
            epsilon = 1e-15
        );

        for k in 0..3 {
            let zeta = s.frequency(k).unwrap();
            let period = 2.0 * std::f64::consts::PI / zeta;
            let t0 = 0.37;
            let tr = mode_trajectory(&s, k, 1.3, 0.4, &[t0, t0 + period]).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(
                    tr.displacements[0][i],
                    tr.displacements[1][i],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn trajectory_rejects_unstable_and_out_of_range() {
        let s = spectrum(&cfg(3, 1.0, 1.0), Branch::Transverse).unwrap();
        let k = s.unstable_modes().next().unwrap();
        assert!(matches!(
            mode_trajectory(&s, k, 1.0, 0.0, &[0.0]),
            Err(Error::UnstableMode(_))
        ));
        assert!(mode_trajectory(&s, 9, 1.0, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn axial_breathing_spacing() {
        let s = spectrum(&cfg(3, 1.0, 1.0), Branch::Axial).unwrap();
        let sp = fractional_spacing(&s, 1).unwrap();
        assert_eq!(sp.neighbor, 2);
        let (a, b) = (3.0_f64.sqrt(), 5.8_f64.sqrt());
        assert_abs_diff_eq!(sp.fractional, 2.0 * (b - a) / (a + b), epsilon = 1e-12);
        assert!((sp.fractional - 0.3266).abs() < 1e-4);
    }

    #[test]
    fn logic_mode_selection() {
        let s = spectrum(&cfg(3, 1.0, 1.0), Branch::Axial).unwrap();
        assert_eq!(select_logic_mode(&s).unwrap(), 1);

        let s = spectrum(&cfg(3, 24.0 / 9.0, 1.0), Branch::Axial).unwrap();
        let k = select_logic_mode(&s).unwrap();
        assert_abs_diff_eq!(s.frequency(k).unwrap(), 3.0_f64.sqrt(), epsilon = 1e-12);
        assert_eq!(fractional_spacing(&s, k).unwrap().neighbor, 2);

        let s = spectrum(&cfg(3, 9.0 / 24.0, 1.0), Branch::Axial).unwrap();
        let k = select_logic_mode(&s).unwrap();
        assert_abs_diff_eq!(s.frequency(k).unwrap(), 3.0_f64.sqrt(), epsilon = 1e-12);
        assert_eq!(fractional_spacing(&s, k).unwrap().neighbor, 0);
        assert!((s.frequency(0).unwrap() - 1.109).abs() < 1e-3);
        assert!((s.frequency(2).unwrap() - 3.54).abs() < 1e-2);
    }

    #[test]
    fn logic_mode_requires_stable_cold_mode() {
        // ε < √1.5: the only cold transverse mode of three ions is unstable.
        let s = spectrum(&cfg(3, 0.05, 1.2), Branch::Transverse).unwrap();
        assert!(matches!(select_logic_mode(&s), Err(Error::NoColdMode)));
    }
}
