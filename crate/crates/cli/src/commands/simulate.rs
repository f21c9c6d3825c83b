//! `simulate`: run the ETD integrator from a config file, writing KWF1
//! snapshots, a JSON manifest and a diagnostics CSV.

use crate::config::{norm_label, RunConfig};
use crate::output::csv_row;
use korteweg::error::Error as CoreError;
use korteweg::io::write_kwf1;
use korteweg::linear::LinearCoeffs;
use korteweg::physics::FlowState;
use korteweg::solver::{simulate, stability_warning, Trajectory};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    times: &'a [f64],
    config: &'a RunConfig,
    model: &'a crate::config::ModelSection,
    diagnostics: &'a [korteweg::solver::SnapshotDiagnostics],
    snapshots: Vec<String>,
    diagnostic_columns: Vec<String>,
}

#[derive(Serialize)]
struct BlowupReport {
    error: String,
    step: usize,
}

fn write_outputs(out_dir: &Path, cfg: &RunConfig, traj: &Trajectory) -> anyhow::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let grid = cfg.grid_spec()?;

    let mut snapshot_names = Vec::new();
    for (i, state) in traj.states.iter().enumerate() {
        let name = format!("snapshot_{i:06}.kwf1");
        write_kwf1(&out_dir.join(&name), &grid, &state.to_components())?;
        snapshot_names.push(name);
    }

    let norm_labels: Vec<String> =
        cfg.diagnostics_config().norms.iter().map(norm_label).collect();
    let mut columns = vec!["t".to_string(), "energy".to_string(), "dissipation".to_string()];
    columns.extend(norm_labels.iter().cloned());

    let mut csv = columns.join(",") + "\n";
    // a zero-length run produces a header-only (empty but valid) table
    if traj.times.len() > 1 {
        for d in &traj.diagnostics {
            let mut row = vec![d.t, d.energy, d.dissipation];
            row.extend(&d.norms);
            csv.push_str(&csv_row(&row));
            csv.push('\n');
        }
    }
    std::fs::write(out_dir.join("diagnostics.csv"), csv)?;

    let manifest = Manifest {
        times: &traj.times,
        config: cfg,
        model: &cfg.model,
        diagnostics: &traj.diagnostics,
        snapshots: snapshot_names,
        diagnostic_columns: columns,
    };
    std::fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn run(args: &SimulateArgs, out_dir: &Path, seed_flag: Option<u64>) -> anyhow::Result<u8> {
    let cfg = RunConfig::load(&args.config)?;
    let grid = cfg.grid_spec()?;
    let model = cfg.model.to_model();
    let seed = seed_flag.unwrap_or(cfg.seed.value);
    let initial =
        FlowState::random_perturbation(grid, cfg.solver.amplitude, cfg.solver.init_band, seed);

    let lc = LinearCoeffs::from_equilibrium(&model)?;
    if let Some(warning) = stability_warning(&lc) {
        log::warn!("{warning}");
        eprintln!("warning: {warning}");
    }

    match simulate(&initial, &model, &cfg.solver_config()?, &cfg.diagnostics_config()) {
        Ok(traj) => {
            write_outputs(out_dir, &cfg, &traj)?;
            println!(
                "{}",
                serde_json::json!({
                    "status": "ok",
                    "steps": cfg.solver_config()?.steps()?,
                    "snapshots": traj.states.len(),
                    "out": out_dir.display().to_string(),
                })
            );
            Ok(0)
        }
        Err(
            err @ (CoreError::DensityFloor { .. }
            | CoreError::NormOverflow { .. }
            | CoreError::PicardDensityFloor { .. }),
        ) => {
            let step = match &err {
                CoreError::DensityFloor { step, .. } | CoreError::NormOverflow { step } => *step,
                CoreError::PicardDensityFloor { step, .. } => *step,
                _ => unreachable!(),
            };
            let report = BlowupReport { error: err.to_string(), step };
            let body = serde_json::to_string_pretty(&report)?;
            std::fs::create_dir_all(out_dir)?;
            std::fs::write(out_dir.join("error.json"), &body)?;
            println!("{body}");
            Ok(3)
        }
        Err(other) => Err(other.into()),
    }
}
