//! Executes scenario tasks and writes their output files.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use subchain::radiation::{evanescence_plane, evanescence_ratio_of, format_number};
use subchain::spectrum::{gamma_exact, gamma_infinite, gamma_sinc_approx, omega_finite, omega_infinite};
use subchain::{density, integrate, intensity_map, ChainConfig, Model, SpectralGrid};

use crate::output::{provenance, write_atomic, Table};
use crate::scenario::{DynamicsTask, IntensityTask, OutputSpec, Scenario, SpectrumTask, Task};

/// What a finished scenario produced.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    /// One-line results worth echoing to the user.
    pub notes: Vec<String>,
}

pub fn run_scenario(scenario: &Scenario, base: &Path, out_dir: &Path) -> Result<Report> {
    let name = &scenario.name;
    let result = match scenario.task().expect("checked at load time") {
        Task::Spectrum(t) => run_spectrum(name, t, out_dir),
        Task::Dynamics(t) => run_dynamics(name, t, base, out_dir),
        Task::Intensity(t) => run_intensity(name, t, base, &out_dir.join(format!("{name}.intensity"))),
    };
    result.with_context(|| format!("scenario '{name}'"))
}

const SPECTRUM_COLUMNS: [&str; 5] = ["gamma_exact", "gamma_sinc", "gamma_infinite", "omega_finite", "omega_infinite"];

/// Spectrum table plus the largest `|gamma_exact − gamma_sinc|` per model.
pub fn spectrum_table(task: &SpectrumTask, comment: String) -> Result<(Table, Vec<f64>)> {
    let grid = SpectralGrid::uniform(task.grid_points, task.a)?;
    let mut header = vec!["x".to_string()];
    for m in &task.models {
        for c in SPECTRUM_COLUMNS {
            header.push(if task.models.len() == 1 { c.to_string() } else { format!("{}.{c}", m.tag()) });
        }
    }
    let cfgs: Vec<ChainConfig> =
        task.models.iter().map(|m| ChainConfig::new(task.n_atoms, task.a, *m)).collect::<Result<_, _>>()?;
    let mut table = Table::new(comment, header);
    let mut deviation = vec![0.0f64; cfgs.len()];
    for &x in grid.points() {
        let mut row = vec![x];
        for (k, cfg) in cfgs.iter().enumerate() {
            let exact = gamma_exact(cfg, x);
            let sinc = gamma_sinc_approx(cfg, x);
            deviation[k] = deviation[k].max((exact - sinc).abs());
            row.extend([
                exact,
                sinc,
                gamma_infinite(cfg.a, x, cfg.model).rate,
                omega_finite(cfg, x),
                omega_infinite(cfg.a, x, cfg.model).unwrap_or(f64::NAN),
            ]);
        }
        table.rows.push(row);
    }
    Ok((table, deviation))
}

pub fn deviation_notes(models: &[Model], deviation: &[f64]) -> Vec<String> {
    models
        .iter()
        .zip(deviation)
        .map(|(m, d)| format!("{}: max |gamma_exact - gamma_sinc| = {}", m.tag(), format_number(*d)))
        .collect()
}

fn run_spectrum(name: &str, task: &SpectrumTask, out_dir: &Path) -> Result<Report> {
    let (table, deviation) = spectrum_table(task, provenance(name, task))?;
    let path = out_dir.join(format!("{name}.spectrum.csv"));
    table.save(&path)?;
    Ok(Report { files: vec![path], notes: deviation_notes(&task.models, &deviation) })
}

fn snapshot_label(t: f64) -> String {
    format!("t={}", format_number(t))
}

fn run_dynamics(name: &str, task: &DynamicsTask, base: &Path, out_dir: &Path) -> Result<Report> {
    let cfg = task.chain;
    let initial = task.initial_state.build(&cfg, base)?;
    let drive = task.drive.resolve();
    let icfg = task.integration.resolve();
    let traj = integrate(&initial, &cfg, &drive, &icfg)?;

    #[derive(Serialize)]
    struct Resolved<'a> {
        task: &'a DynamicsTask,
        drive: subchain::DriveConfig,
    }
    let mut report = Report::default();
    for output in &task.outputs {
        let comment = provenance(name, &Resolved { task, drive });
        match output {
            OutputSpec::SpectralDensitySeries { grid_points } => {
                let grid = SpectralGrid::uniform(*grid_points, cfg.a)?;
                let mut header = vec!["x".to_string()];
                let mut columns = Vec::new();
                for snap in &traj.snapshots {
                    header.push(snapshot_label(snap.time));
                    columns.push(density(snap, &grid).with_context(|| format!("density at t = {}", snap.time))?.p);
                }
                let mut table = Table::new(comment, header);
                for (i, &x) in grid.points().iter().enumerate() {
                    let mut row = vec![x];
                    row.extend(columns.iter().map(|c| c[i]));
                    table.rows.push(row);
                }
                let path = out_dir.join(format!("{name}.density.csv"));
                table.save(&path)?;
                report.files.push(path);
            }
            OutputSpec::MeanExcitation { stride } => {
                let mean = traj.mean_excitation();
                let mut table = Table::new(comment, vec!["t".into(), "mean_excitation".into()]);
                let last = traj.times.len() - 1;
                for i in (0..=last).filter(|i| i % stride == 0 || *i == last) {
                    table.rows.push(vec![traj.times[i], mean[i]]);
                }
                let path = out_dir.join(format!("{name}.mean_excitation.csv"));
                table.save(&path)?;
                report.files.push(path);
            }
            OutputSpec::BetaSnapshots {} => {
                let mut header = vec!["j".to_string()];
                for snap in &traj.snapshots {
                    let label = snapshot_label(snap.time);
                    header.push(format!("re({label})"));
                    header.push(format!("im({label})"));
                }
                let mut table = Table::new(comment, header);
                for j in 0..cfg.n_atoms {
                    let mut row = vec![(j + 1) as f64];
                    for snap in &traj.snapshots {
                        row.push(snap.beta[j].re);
                        row.push(snap.beta[j].im);
                    }
                    table.rows.push(row);
                }
                let path = out_dir.join(format!("{name}.beta.csv"));
                table.save(&path)?;
                report.files.push(path);
            }
            OutputSpec::FieldMap { plane, dipole_axis } => {
                let map = intensity_map(plane, &traj.final_state, &cfg, *dipole_axis)?;
                report.files.extend(save_map(&map, &out_dir.join(format!("{name}.field")), &comment)?);
            }
        }
    }
    let mean = traj.mean_excitation();
    report.notes.push(format!(
        "mean excitation {} at t = {}",
        format_number(mean[mean.len() - 1]),
        format_number(traj.final_state.time)
    ));
    Ok(report)
}

/// Write `<stem>.csv` and `<stem>.pgm`.
fn save_map(map: &subchain::FieldMap, stem: &Path, comment: &str) -> Result<Vec<PathBuf>> {
    let with_ext = |ext: &str| {
        let mut p = stem.as_os_str().to_owned();
        p.push(ext);
        PathBuf::from(p)
    };
    let (csv, pgm) = (with_ext(".csv"), with_ext(".pgm"));
    write_atomic(&csv, |w| map.write_csv(w, comment))?;
    write_atomic(&pgm, |w| map.write_pgm(w))?;
    Ok(vec![csv, pgm])
}

/// Intensity map of `task`, written to `<stem>.csv` and `<stem>.pgm`.
pub fn run_intensity(name: &str, task: &IntensityTask, base: &Path, stem: &Path) -> Result<Report> {
    let cfg = task.chain;
    let state = task.state.build(&cfg, base)?;
    let plane = task.resolved_plane();
    let map = intensity_map(&plane, &state, &cfg, task.dipole_axis)?;

    #[derive(Serialize)]
    struct Resolved<'a> {
        task: &'a IntensityTask,
        plane: subchain::PlaneSpec,
    }
    let comment = provenance(name, &Resolved { task, plane });
    let mut report = Report { files: save_map(&map, stem, &comment)?, notes: vec![] };
    if plane == evanescence_plane(&cfg, plane.resolution) {
        report.notes.push(format!("evanescence ratio {}", format_number(evanescence_ratio_of(&map, &cfg))));
    }
    Ok(report)
}
