//! Sweeps over the mass ratio with mode-identity tracking, and the CSV
//! datasets behind the frequency, stability and heating figures.
//!
//! Tracks are labelled by ascending frequency at `μ = 1` and followed outward
//! in both directions by maximal eigenvector overlap with the previous grid
//! point. When two candidate overlaps are within 1e-3 the one closer in
//! frequency wins and a warning is recorded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::equilibrium::equilibrium_positions;
use crate::error::{Error, Result};
use crate::heating::{normalized_heating, HeatingRates};
use crate::modes::{matrix_with, solve_spectrum};
use crate::numerics::log_space;
use crate::stability::{epsilon_s_with, stability_curve_on};
use crate::types::{
    validate_ion_count, validate_mass_ratio, Branch, CrystalConfig, EquilibriumConfiguration,
    ModeSpectrum,
};

pub const FIGURE_MU_MIN: f64 = 0.01;
pub const FIGURE_MU_MAX: f64 = 100.0;
/// Odd so that `μ = 1` is a grid point.
pub const FIGURE_POINTS: usize = 201;
pub const FIGURE_PANELS: [usize; 4] = [3, 5, 7, 9];
pub const FIGURE_EPSILON_RATIO: f64 = 1.1;

const OVERLAP_AMBIGUITY: f64 = 1e-3;

/// The grid used by every figure dataset.
pub fn figure_grid() -> Vec<f64> {
    log_space(FIGURE_MU_MIN, FIGURE_MU_MAX, FIGURE_POINTS)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub mu: f64,
    /// Trap anisotropy used at this point (transverse sweeps only).
    pub epsilon: Option<f64>,
    pub epsilon_s: Option<f64>,
    pub spectrum: ModeSpectrum,
    pub heating: HeatingRates,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackWarning {
    pub grid_index: usize,
    pub track: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub n: usize,
    pub branch: Branch,
    pub epsilon_ratio: Option<f64>,
    pub rows: Vec<SweepRow>,
    /// `tracks[i][t]` is the spectrum index of track `t` at grid point `i`.
    pub tracks: Vec<Vec<usize>>,
    pub warnings: Vec<TrackWarning>,
}

impl SweepTable {
    pub fn mu_grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mu).collect()
    }

    pub fn track_count(&self) -> usize {
        self.n
    }

    /// Signed frequency of track `t` at grid point `i`.
    pub fn track_frequency(&self, t: usize, i: usize) -> f64 {
        let k = self.tracks[i][t];
        self.rows[i].spectrum.signed_frequencies()[k]
    }

    pub fn track_heating(&self, t: usize, i: usize) -> f64 {
        self.rows[i].heating.normalized[self.tracks[i][t]]
    }

    pub fn track_vector(&self, t: usize, i: usize) -> &[f64] {
        self.rows[i].spectrum.eigenvector(self.tracks[i][t])
    }

    /// `|v(μ_i)·v(μ_{i+1})|` along track `t`.
    pub fn track_overlap(&self, t: usize, i: usize) -> f64 {
        dot(self.track_vector(t, i), self.track_vector(t, i + 1)).abs()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Matches each previous track to one current mode.
fn assign_tracks(
    prev_vectors: &[Vec<f64>],
    prev_freqs: &[f64],
    current: &ModeSpectrum,
    grid_index: usize,
    warnings: &mut Vec<TrackWarning>,
) -> Vec<usize> {
    let n = prev_vectors.len();
    let freqs = current.signed_frequencies();
    let overlap: Vec<Vec<f64>> = prev_vectors
        .iter()
        .map(|p| {
            (0..n)
                .map(|j| dot(p, current.eigenvector(j)).abs())
                .collect()
        })
        .collect();

    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|t| (0..n).map(move |j| (t, j))).collect();
    pairs.sort_by(|a, b| {
        overlap[b.0][b.1]
            .total_cmp(&overlap[a.0][a.1])
            .then(a.cmp(b))
    });

    let mut track_to_mode = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (t, j) in pairs {
        if track_to_mode[t] != usize::MAX || taken[j] {
            continue;
        }
        let best = overlap[t][j];
        let rival = (0..n)
            .filter(|&k| k != j && !taken[k] && best - overlap[t][k] < OVERLAP_AMBIGUITY)
            .min_by(|&a, &b| {
                (freqs[a] - prev_freqs[t])
                    .abs()
                    .total_cmp(&(freqs[b] - prev_freqs[t]).abs())
            });
        let chosen = match rival {
            Some(r) => {
                let pick = if (freqs[r] - prev_freqs[t]).abs() < (freqs[j] - prev_freqs[t]).abs() {
                    r
                } else {
                    j
                };
                warnings.push(TrackWarning {
                    grid_index,
                    track: t,
                    message: format!(
                        "overlaps {:.6} and {:.6} within {OVERLAP_AMBIGUITY}; chose mode {pick} by frequency",
                        best, overlap[t][r]
                    ),
                });
                pick
            }
            None => j,
        };
        track_to_mode[t] = chosen;
        taken[chosen] = true;
    }
    track_to_mode
}

fn tracked_state(spectrum: &ModeSpectrum, mapping: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let freqs = spectrum.signed_frequencies();
    (
        mapping
            .iter()
            .map(|&k| spectrum.eigenvector(k).to_vec())
            .collect(),
        mapping.iter().map(|&k| freqs[k]).collect(),
    )
}

fn build_tracks(rows: &[SweepRow], seed: &ModeSpectrum) -> (Vec<Vec<usize>>, Vec<TrackWarning>) {
    let n = seed.len();
    let identity: Vec<usize> = (0..n).collect();
    let mut tracks = vec![Vec::new(); rows.len()];
    let mut warnings = Vec::new();

    let first_up = rows.iter().position(|r| r.mu >= 1.0).unwrap_or(rows.len());
    let up = first_up..rows.len();
    let down = (0..first_up).rev();

    for order in [up.collect::<Vec<_>>(), down.collect::<Vec<_>>()] {
        let (mut vecs, mut freqs) = tracked_state(seed, &identity);
        for i in order {
            let mapping = assign_tracks(&vecs, &freqs, &rows[i].spectrum, i, &mut warnings);
            (vecs, freqs) = tracked_state(&rows[i].spectrum, &mapping);
            tracks[i] = mapping;
        }
    }
    warnings.sort_by_key(|w| (w.grid_index, w.track));
    (tracks, warnings)
}

fn validate_grid(mu_grid: &[f64]) -> Result<()> {
    if mu_grid.is_empty() {
        return Err(Error::Invalid("empty mass-ratio grid".into()));
    }
    for &mu in mu_grid {
        validate_mass_ratio(mu)?;
    }
    if mu_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(
            "mass-ratio grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn row_at(
    eq: &EquilibriumConfiguration,
    branch: Branch,
    mu: f64,
    epsilon_ratio: Option<f64>,
) -> Result<SweepRow> {
    let n = eq.len();
    let (epsilon, eps_s) = match epsilon_ratio {
        Some(ratio) => {
            let s = epsilon_s_with(eq, mu)?.epsilon_s;
            (Some(ratio * s), Some(s))
        }
        None => (None, None),
    };
    let config = CrystalConfig::new(n, mu, epsilon.unwrap_or(1.0))?;
    let spectrum = solve_spectrum(&matrix_with(&config, eq, branch))?;
    let heating = normalized_heating(&spectrum)?;
    Ok(SweepRow {
        mu,
        epsilon,
        epsilon_s: eps_s,
        spectrum,
        heating,
    })
}

fn sweep(
    n: usize,
    mu_grid: &[f64],
    branch: Branch,
    epsilon_ratio: Option<f64>,
) -> Result<SweepTable> {
    validate_ion_count(n)?;
    validate_grid(mu_grid)?;
    let eq = equilibrium_positions(n)?;
    let rows = mu_grid
        .iter()
        .map(|&mu| row_at(&eq, branch, mu, epsilon_ratio))
        .collect::<Result<Vec<_>>>()?;
    let seed = match rows.iter().find(|r| (r.mu - 1.0).abs() < 1e-12) {
        Some(r) => r.spectrum.clone(),
        None => row_at(&eq, branch, 1.0, epsilon_ratio)?.spectrum,
    };
    let (tracks, warnings) = build_tracks(&rows, &seed);
    Ok(SweepTable {
        n,
        branch,
        epsilon_ratio,
        rows,
        tracks,
        warnings,
    })
}

pub fn sweep_axial(n: usize, mu_grid: &[f64]) -> Result<SweepTable> {
    sweep(n, mu_grid, Branch::Axial, None)
}

/// Transverse sweep with `ε = epsilon_ratio · ε_s(μ)` at every point.
pub fn sweep_transverse(n: usize, mu_grid: &[f64], epsilon_ratio: f64) -> Result<SweepTable> {
    if !(epsilon_ratio.is_finite() && epsilon_ratio > 1.0) {
        return Err(Error::Invalid(format!(
            "epsilon ratio must exceed 1, got {epsilon_ratio}"
        )));
    }
    sweep(n, mu_grid, Branch::Transverse, Some(epsilon_ratio))
}

/// Twelve significant digits, scientific notation.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

fn header(figure_id: u8, n: usize, ratio: Option<f64>) -> String {
    let ratio = ratio.map_or_else(|| "na".to_string(), |r| r.to_string());
    format!(
        "# figure={figure_id} panel_n={n} epsilon_ratio={ratio} generated_by=ionstring-{}\n",
        crate::VERSION
    )
}

fn sweep_csv(figure_id: u8, table: &SweepTable, with_heating: bool) -> String {
    let n = table.n;
    let mut out = header(figure_id, n, table.epsilon_ratio);
    out.push_str("mu");
    for t in 1..=n {
        let _ = write!(out, ",mode_{t}_freq");
    }
    if with_heating {
        for t in 1..=n {
            let _ = write!(out, ",mode_{t}_heat");
        }
    }
    out.push('\n');
    for (i, row) in table.rows.iter().enumerate() {
        out.push_str(&format_value(row.mu));
        for t in 0..n {
            let _ = write!(out, ",{}", format_value(table.track_frequency(t, i)));
        }
        if with_heating {
            for t in 0..n {
                let _ = write!(out, ",{}", format_value(table.track_heating(t, i)));
            }
        }
        out.push('\n');
    }
    out
}

/// CSV text of one figure panel.
pub fn figure_csv(figure_id: u8, n: usize) -> Result<String> {
    let grid = figure_grid();
    match figure_id {
        1 | 4 => Ok(sweep_csv(
            figure_id,
            &sweep_axial(n, &grid)?,
            figure_id == 4,
        )),
        3 | 5 => Ok(sweep_csv(
            figure_id,
            &sweep_transverse(n, &grid, FIGURE_EPSILON_RATIO)?,
            figure_id == 5,
        )),
        2 => {
            let curve = stability_curve_on(n, &grid)?;
            let cusp_row = curve.cusp_row();
            let mut out = header(2, n, None);
            out.push_str("mu,epsilon_s,governing_mode,cusp\n");
            for i in 0..grid.len() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    format_value(grid[i]),
                    format_value(curve.epsilon_s[i]),
                    curve.governing_mode[i].as_str(),
                    u8::from(cusp_row == Some(i))
                );
            }
            Ok(out)
        }
        other => Err(Error::Invalid(format!(
            "figure id must be 1..=5, got {other}"
        ))),
    }
}

pub fn figure_file_name(figure_id: u8, n: usize) -> String {
    format!("figure{figure_id}_n{n}.csv")
}

/// Writes one CSV per panel (`N = 3, 5, 7, 9`) into `out_dir`.
pub fn figure_dataset(figure_id: u8, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if !(1..=5).contains(&figure_id) {
        return Err(Error::Invalid(format!(
            "figure id must be 1..=5, got {figure_id}"
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    FIGURE_PANELS
        .iter()
        .map(|&n| {
            let path = out_dir.join(figure_file_name(figure_id, n));
            std::fs::write(&path, figure_csv(figure_id, n)?)?;
            Ok(path)
        })
        .collect()
}
