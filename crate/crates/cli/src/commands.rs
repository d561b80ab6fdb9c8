use std::path::Path;

use anyhow::{Context, Result};
use ionstring::equilibrium::{equilibrium_positions, potential_energy};
use ionstring::heating::{normalized_heating, physical_heating, sum_rule, FieldSpectrum};
use ionstring::modes::{mode_trajectory, select_logic_mode, spectrum};
use ionstring::physical::{
    epsilon_for_ratio, mass_ratio, physical_spectrum, IonSpecies, PhysicalTrapParams, SpeciesTable,
};
use ionstring::stability::{branch_roots, epsilon_s, stability_curve};
use ionstring::sweep::{figure_dataset, FIGURE_PANELS};
use ionstring::{Branch, CrystalConfig, ModeSpectrum};
use serde_json::{json, Value};

use crate::report::{Cell, Report};
use crate::{Anisotropy, BranchArg, Cli, Command, Crystal, Format, Usage};

const MHZ: f64 = 1e6;

pub fn run(cli: &Cli) -> Result<String> {
    let note = |msg: &str| {
        if !cli.quiet {
            eprintln!("note: {msg}");
        }
    };
    let report = match &cli.command {
        Command::Equilibrium { n } => equilibrium(*n)?,
        Command::Modes(crystal) => modes(crystal, note)?,
        Command::Stability {
            n,
            mu,
            mu_min,
            mu_max,
            points,
        } => match (mu, mu_min, mu_max) {
            (Some(mu), _, _) => stability_point(*n, *mu)?,
            (None, Some(lo), Some(hi)) => stability_range(*n, *lo, *hi, *points)?,
            _ => {
                return Err(
                    Usage("stability needs --mu or both --mu-min and --mu-max".into()).into(),
                )
            }
        },
        Command::Heating {
            n,
            mu,
            branch,
            anisotropy,
            physical,
            outer,
            center,
            fz_mhz,
            se,
        } => {
            let physical = if *physical {
                Some(PhysicalArgs {
                    outer: outer.as_deref().unwrap_or_default(),
                    center: center.as_deref().unwrap_or_default(),
                    fz_mhz: fz_mhz.unwrap_or(f64::NAN),
                    se: se.unwrap_or(f64::NAN),
                })
            } else {
                None
            };
            heating(
                &species_table(cli)?,
                *n,
                *mu,
                *branch,
                *anisotropy,
                physical,
            )?
        }
        Command::Trajectory {
            crystal,
            mode,
            amplitude,
            phase,
            t_max,
            samples,
        } => trajectory(crystal, *mode, *amplitude, *phase, *t_max, *samples)?,
        Command::Physical {
            outer,
            center,
            fz_mhz,
            n,
            branch,
            epsilon_ratio,
        } => physical(
            &species_table(cli)?,
            outer,
            center,
            *fz_mhz,
            *n,
            *branch,
            *epsilon_ratio,
            note,
        )?,
        Command::Figure { id, out } => {
            let paths = figure_dataset(*id, out)
                .with_context(|| format!("writing figure {id} to {}", out.display()))?;
            let mut report = Report::new("figure")
                .with("id", *id)
                .with("out", out.display().to_string())
                .columns(["panel_n", "file"]);
            for (n, p) in FIGURE_PANELS.iter().zip(&paths) {
                report.row(vec![(*n).into(), p.display().to_string().into()]);
            }
            report.payload = json!({
                "files": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            });
            if cli.quiet && cli.format == Format::Csv {
                return Ok(String::new());
            }
            report
        }
        Command::Species { add, .. } => {
            let mut table = species_table(cli)?;
            if let Some(path) = add {
                load_species(&mut table, path)?;
            }
            species(&table)
        }
    };
    Ok(match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    })
}

fn species_table(cli: &Cli) -> Result<SpeciesTable> {
    let mut table = SpeciesTable::builtin();
    if let Some(path) = &cli.species_file {
        load_species(&mut table, path)?;
    }
    Ok(table)
}

fn load_species(table: &mut SpeciesTable, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
    table.extend_from_str(&text)?;
    Ok(())
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Usage(format!("{name} must be finite, got {x}")).into())
    }
}

/// Crystal configuration plus `ε_s` when it was needed to resolve `ε`.
fn resolve(
    n: usize,
    mu: f64,
    branch: BranchArg,
    anisotropy: Anisotropy,
) -> Result<(CrystalConfig, Option<f64>)> {
    let axial = CrystalConfig::axial(n, mu)?;
    match (branch, anisotropy.epsilon, anisotropy.epsilon_ratio) {
        (BranchArg::Axial, None, None) => Ok((axial, None)),
        (BranchArg::Axial, _, _) => Err(Usage(
            "--epsilon and --epsilon-ratio apply only to the transverse branch".into(),
        )
        .into()),
        (BranchArg::Transverse, Some(eps), _) => Ok((axial.with_epsilon(eps)?, None)),
        (BranchArg::Transverse, None, Some(ratio)) => {
            if !(ratio.is_finite() && ratio > 0.0) {
                return Err(Usage(format!("--epsilon-ratio must be positive, got {ratio}")).into());
            }
            let eps_s = epsilon_s(n, mu)?.epsilon_s;
            Ok((axial.with_epsilon(ratio * eps_s)?, Some(eps_s)))
        }
        (BranchArg::Transverse, None, None) => {
            Err(Usage("the transverse branch needs --epsilon or --epsilon-ratio".into()).into())
        }
    }
}

fn crystal_config(report: Report, config: &CrystalConfig, branch: Branch) -> Report {
    let report = report
        .with("n", config.n)
        .with("mu", config.mu)
        .with("branch", branch.as_str());
    match branch {
        Branch::Axial => report,
        Branch::Transverse => report.with("epsilon", config.epsilon),
    }
}

fn equilibrium(n: usize) -> Result<Report> {
    CrystalConfig::axial(n, 1.0)?;
    let eq = equilibrium_positions(n)?;
    let mut report = Report::new("equilibrium")
        .with("n", n)
        .columns(["ion", "position"]);
    for (i, u) in eq.positions.iter().enumerate() {
        report.row(vec![(i + 1).into(), (*u).into()]);
    }
    report.payload = json!({
        "positions": eq.positions,
        "residual": eq.residual,
        "potential_energy": potential_energy(&eq.positions)?,
    });
    Ok(report)
}

fn spectrum_payload(s: &ModeSpectrum) -> Value {
    json!({
        "frequencies": s.signed_frequencies(),
        "squared_frequencies": s.squared_frequencies(),
        "classes": s.classes().iter().map(|c| c.as_str()).collect::<Vec<_>>(),
        "eigenvectors": s.eigenvectors(),
        "stable": s.is_stable(),
    })
}

fn modes(crystal: &Crystal, note: impl Fn(&str)) -> Result<Report> {
    let (config, eps_s) = resolve(crystal.n, crystal.mu, crystal.branch, crystal.anisotropy)?;
    let branch = crystal.branch.into();
    let s = spectrum(&config, branch)?;
    let unstable: Vec<usize> = s.unstable_modes().map(|k| k + 1).collect();
    if !unstable.is_empty() {
        note(&format!(
            "modes {unstable:?} are unstable; their frequencies are reported negative"
        ));
    }

    let n = config.n;
    let mut columns = vec![
        "mode".to_string(),
        "frequency".into(),
        "squared_frequency".into(),
        "class".into(),
    ];
    columns.extend((1..=n).map(|i| format!("v_{i}")));
    let mut report = crystal_config(Report::new("modes"), &config, branch).columns(columns);
    let freqs = s.signed_frequencies();
    for (k, &f) in freqs.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            (k + 1).into(),
            f.into(),
            s.squared_frequencies()[k].into(),
            s.class(k).as_str().into(),
        ];
        row.extend(s.eigenvector(k).iter().map(|&v| Cell::from(v)));
        report.row(row);
    }
    let mut payload = spectrum_payload(&s);
    payload["epsilon_s"] = json!(eps_s);
    report.payload = payload;
    Ok(report)
}

fn stability_point(n: usize, mu: f64) -> Result<Report> {
    let cp = epsilon_s(n, mu)?;
    let roots = branch_roots(n, mu)?;
    let mut report = Report::new("stability")
        .with("n", n)
        .with("mu", mu)
        .columns(["mu", "epsilon_s", "governing_mode"]);
    report.row(vec![
        mu.into(),
        cp.epsilon_s.into(),
        cp.governing_mode.as_str().into(),
    ]);
    report.payload = json!({
        "epsilon_s": cp.epsilon_s,
        "governing_mode": cp.governing_mode.as_str(),
        "critical_vector": cp.critical_vector,
        "branch_roots": roots,
    });
    Ok(report)
}

fn stability_range(n: usize, mu_min: f64, mu_max: f64, points: usize) -> Result<Report> {
    let curve = stability_curve(n, mu_min, mu_max, points)?;
    let cusp_row = curve.cusp_row();
    let mut report = Report::new("stability")
        .with("n", n)
        .with("mu_min", mu_min)
        .with("mu_max", mu_max)
        .with("points", points)
        .columns(["mu", "epsilon_s", "governing_mode", "cusp"]);
    for i in 0..curve.mu_grid.len() {
        report.row(vec![
            curve.mu_grid[i].into(),
            curve.epsilon_s[i].into(),
            curve.governing_mode[i].as_str().into(),
            usize::from(cusp_row == Some(i)).into(),
        ]);
    }
    report.payload = json!({
        "mu": curve.mu_grid,
        "epsilon_s": curve.epsilon_s,
        "governing_mode": curve.governing_mode,
        "cusp": curve.cusp,
    });
    Ok(report)
}

struct PhysicalArgs<'a> {
    outer: &'a str,
    center: &'a str,
    fz_mhz: f64,
    se: f64,
}

fn heating(
    table: &SpeciesTable,
    n: usize,
    mu: Option<f64>,
    branch: BranchArg,
    anisotropy: Anisotropy,
    physical: Option<PhysicalArgs>,
) -> Result<Report> {
    let species = match &physical {
        Some(p) => Some((table.get(p.outer)?.clone(), table.get(p.center)?.clone())),
        None => None,
    };
    let mu = match (&species, mu) {
        (Some((outer, center)), given) => {
            let from_species = mass_ratio(outer, center);
            if let Some(given) = given {
                if (given - from_species).abs() > 1e-12 * from_species {
                    return Err(Usage(format!(
                        "--mu {given} contradicts {}/{} = {from_species}",
                        center.name, outer.name
                    ))
                    .into());
                }
            }
            from_species
        }
        (None, Some(mu)) => mu,
        (None, None) => return Err(Usage("heating needs --mu".into()).into()),
    };
    let (config, _) = resolve(n, mu, branch, anisotropy)?;
    let branch: Branch = branch.into();
    let s = spectrum(&config, branch)?;

    let mut report = crystal_config(Report::new("heating"), &config, branch);
    let rates = match (&physical, &species) {
        (Some(p), Some((outer, center))) => {
            let fz_hz = finite("--fz-mhz", p.fz_mhz)? * MHZ;
            let mut trap = PhysicalTrapParams::new(outer.clone(), fz_hz)?;
            if branch == Branch::Transverse {
                trap = trap.with_radial_hz(config.epsilon * fz_hz)?;
            }
            report = report
                .with("outer", outer.name.as_str())
                .with("center", center.name.as_str())
                .with("fz_mhz", p.fz_mhz)
                .with("se", p.se);
            physical_heating(&s, &trap, &FieldSpectrum::Flat(p.se))?
        }
        _ => normalized_heating(&s)?,
    };

    let mut columns = vec!["mode", "frequency", "class", "rate"];
    if rates.physical.is_some() {
        columns.push("rate_quanta_per_s");
    }
    report = report.columns(columns);
    for k in 0..n {
        let mut row: Vec<Cell> = vec![
            (k + 1).into(),
            s.frequency(k).expect("checked stable").into(),
            s.class(k).as_str().into(),
            rates.normalized[k].into(),
        ];
        if let Some(phys) = &rates.physical {
            row.push(phys[k].into());
        }
        report.row(row);
    }
    let weighted: f64 = (0..n)
        .map(|k| s.frequency(k).unwrap_or(0.0) * rates.normalized[k])
        .sum();
    report.payload = json!({
        "frequencies": s.signed_frequencies(),
        "classes": s.classes().iter().map(|c| c.as_str()).collect::<Vec<_>>(),
        "normalized": rates.normalized,
        "physical": rates.physical,
        "weighted_sum": weighted,
        "sum_rule": sum_rule(n, mu),
    });
    Ok(report)
}

fn trajectory(
    crystal: &Crystal,
    mode: usize,
    amplitude: f64,
    phase: f64,
    t_max: f64,
    samples: usize,
) -> Result<Report> {
    let (config, _) = resolve(crystal.n, crystal.mu, crystal.branch, crystal.anisotropy)?;
    let branch = crystal.branch.into();
    if !(1..=config.n).contains(&mode) {
        return Err(Usage(format!("--mode must be in 1..={}, got {mode}", config.n)).into());
    }
    finite("--amplitude", amplitude)?;
    finite("--phase", phase)?;
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Usage(format!("--t-max must be positive, got {t_max}")).into());
    }
    if samples < 2 {
        return Err(Usage(format!("--samples must be at least 2, got {samples}")).into());
    }
    let s = spectrum(&config, branch)?;
    if !s.is_stable() {
        let eps_s = epsilon_s(config.n, config.mu)?.epsilon_s;
        return Err(Usage(format!(
            "string is unstable at epsilon {} (threshold {eps_s})",
            config.epsilon
        ))
        .into());
    }
    let times: Vec<f64> = (0..samples)
        .map(|i| t_max * i as f64 / (samples - 1) as f64)
        .collect();
    let traj = mode_trajectory(&s, mode - 1, amplitude, phase, &times)?;

    let mut columns = vec!["t".to_string()];
    columns.extend((1..=config.n).map(|i| format!("q_{i}")));
    let mut report = crystal_config(Report::new("trajectory"), &config, branch)
        .with("mode", mode)
        .with("amplitude", amplitude)
        .with("phase", phase)
        .with("t_max", t_max)
        .with("samples", samples)
        .columns(columns);
    for (t, q) in traj.times.iter().zip(&traj.displacements) {
        let mut row = vec![Cell::from(*t)];
        row.extend(q.iter().map(|&x| Cell::from(x)));
        report.row(row);
    }
    report.payload = json!({
        "frequency": s.frequency(mode - 1),
        "times": traj.times,
        "displacements": traj.displacements,
    });
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn physical(
    table: &SpeciesTable,
    outer: &str,
    center: &str,
    fz_mhz: f64,
    n: usize,
    branch: BranchArg,
    epsilon_ratio: f64,
    note: impl Fn(&str),
) -> Result<Report> {
    let outer: IonSpecies = table.get(outer)?.clone();
    let center: IonSpecies = table.get(center)?.clone();
    let mu = mass_ratio(&outer, &center);
    let fz_hz = finite("--fz-mhz", fz_mhz)? * MHZ;
    let config = CrystalConfig::axial(n, mu)?;
    let mut trap = PhysicalTrapParams::new(outer.clone(), fz_hz)?;
    let branch: Branch = branch.into();

    let requirement = match branch {
        Branch::Axial => None,
        Branch::Transverse => {
            let req = epsilon_for_ratio(n, &outer, &center, fz_hz, epsilon_ratio)?;
            if req.marginal {
                note("epsilon ratio 1 puts the string exactly at its instability");
            }
            trap = trap.with_radial_hz(req.radial_hz)?;
            Some(req)
        }
    };
    let ps = physical_spectrum(&config, &outer, &center, &trap, branch)?;
    let logic = select_logic_mode(&ps.spectrum)?;
    let spacing = ps.spacing(logic)?;
    let spacing_hz = ps.spacing_hz(logic)?;

    let mut report = Report::new("physical")
        .with("outer", outer.name.as_str())
        .with("center", center.name.as_str())
        .with("fz_mhz", fz_mhz)
        .with("n", n)
        .with("branch", branch.as_str());
    if branch == Branch::Transverse {
        report = report.with("epsilon_ratio", epsilon_ratio);
    }
    report = report.columns(["quantity", "value", "unit"]);
    let mut push = |q: &str, v: Cell, unit: &str| report.row(vec![q.into(), v, unit.into()]);
    push("mass_ratio", mu.into(), "1");
    push("length_scale", trap.length_scale().into(), "m");
    push("axial_frequency", fz_hz.into(), "Hz");
    if let Some(req) = &requirement {
        push("epsilon_s", req.epsilon_s.into(), "1");
        push("epsilon", req.epsilon.into(), "1");
        push("radial_frequency", req.radial_hz.into(), "Hz");
    }
    push("logic_mode", (logic + 1).into(), "index");
    push("logic_frequency", ps.frequencies_hz[logic].into(), "Hz");
    push("neighbor_mode", (spacing.neighbor + 1).into(), "index");
    push("spacing", spacing_hz.into(), "Hz");
    push("fractional_spacing", spacing.fractional.into(), "1");
    for (k, f) in ps.frequencies_hz.iter().enumerate() {
        push(&format!("mode_{}_frequency", k + 1), (*f).into(), "Hz");
    }

    report.payload = json!({
        "outer": outer,
        "center": center,
        "mass_ratio": mu,
        "length_scale_m": trap.length_scale(),
        "axial_hz": fz_hz,
        "radial": requirement,
        "frequencies_hz": ps.frequencies_hz,
        "classes": ps.spectrum.classes().iter().map(|c| c.as_str()).collect::<Vec<_>>(),
        "logic_mode": logic + 1,
        "neighbor_mode": spacing.neighbor + 1,
        "spacing_hz": spacing_hz,
        "fractional_spacing": spacing.fractional,
    });
    Ok(report)
}

fn species(table: &SpeciesTable) -> Report {
    let mut report = Report::new("species").columns(["name", "mass_u", "charge"]);
    for s in table.iter() {
        report.row(vec![
            s.name.as_str().into(),
            s.mass_u.into(),
            (s.charge as usize).into(),
        ]);
    }
    report.payload = json!({ "species": table.iter().collect::<Vec<_>>() });
    report
}
