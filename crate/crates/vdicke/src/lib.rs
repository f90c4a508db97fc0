//! Command-line front end for `vdicke-core`: configuration loading, parallel
//! sweeps over parameter grids, CSV/JSON export and bundled figure recipes.
//!
//! The binary is a thin wrapper around [`prepare`] and [`execute`].

pub mod config;
pub mod output;
pub mod recipes;
pub mod tasks;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;
use vdicke_core::grid::GridPoint;
use vdicke_core::model::RESOLVED_OMEGA_CONVENTION;

use crate::config::{ConfigError, Source, TaskKind, ValidatedRun};
use crate::output::{col, num, Table};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// What a subcommand was asked to do, before the config is read.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub task: TaskKind,
    pub config: Option<PathBuf>,
    pub recipe: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    /// `key=value` overrides in dotted-path form.
    pub set: Vec<String>,
}

/// Reads, overrides and validates the configuration. Never touches the
/// output directory.
pub fn prepare(inv: &Invocation) -> Result<ValidatedRun, ConfigError> {
    let source = match (&inv.config, &inv.recipe) {
        (Some(path), None) => Source::from_path(path)?,
        (None, Some(name)) => {
            let r = recipes::find(name).ok_or_else(|| {
                ConfigError::Usage(format!("unknown recipe `{name}`; run `vdicke recipes` for the list"))
            })?;
            Source::inline(format!("recipe {}", r.name), r.source)
        }
        (Some(_), Some(_)) => return Err(ConfigError::Usage("give either --config or --recipe, not both".into())),
        (None, None) => return Err(ConfigError::Usage("a config is required: pass --config PATH or --recipe NAME".into())),
    };
    let mut cfg = config::load(&source, &inv.set)?;
    if let Some(w) = inv.workers {
        cfg.workers = Some(w);
    }
    if let Some(dir) = &inv.out {
        cfg.output.dir = Some(dir.clone());
    }
    config::validate(cfg, inv.task, &source)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub points: usize,
    pub failed: usize,
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Grid points with their parameters, in grid order.
fn points(run: &ValidatedRun) -> Vec<(GridPoint, vdicke_core::Result<vdicke_core::model::ModelParams>)> {
    match &run.grid {
        Some(g) => g.points().into_iter().map(|pt| (pt, g.apply(&run.base, &pt))).collect(),
        None => vec![(
            GridPoint {
                ix: 0,
                iy: 0,
                x: f64::NAN,
                y: f64::NAN,
            },
            Ok(run.base),
        )],
    }
}

fn lead_columns(run: &ValidatedRun) -> Vec<String> {
    let mut h = vec!["index".to_string()];
    if let Some(g) = &run.grid {
        h.push(format!("grid_x_{}", col(g.x.axis.name(), g.x.axis.unit())));
        if let Some(y) = &g.y {
            h.push(format!("grid_y_{}", col(y.axis.name(), y.axis.unit())));
        }
    }
    for (name, unit) in [
        ("omega", "omega_ref"),
        ("omega0", "omega_ref"),
        ("lambda1", "omega_ref"),
        ("lambda2", "omega_ref"),
        ("phi", "rad"),
        ("kappa", "omega_ref"),
    ] {
        h.push(col(name, unit));
    }
    h
}

/// Runs every grid point on a pool of `run.workers` threads, then writes the
/// dataset, any side tables and the manifest. Rows follow grid order
/// regardless of which worker finished first.
pub fn execute(run: &ValidatedRun) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let pts = points(run);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(run.workers).build()?;
    let results: Vec<_> = pool.install(|| {
        pts.par_iter()
            .enumerate()
            .map(|(i, (_, p))| match p {
                Ok(p) => tasks::evaluate(run, i, p).map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            })
            .collect()
    });

    let task_cols = tasks::columns(run.task);
    let mut header = lead_columns(run);
    let n_lead = header.len();
    header.extend(task_cols.iter().cloned());
    header.push("error".to_string());
    let mut table = Table::new(header);
    let mut attachments = Vec::new();
    let mut failed = 0;
    for (i, ((pt, p), res)) in pts.iter().zip(results).enumerate() {
        let mut lead = vec![i.to_string()];
        if let Some(g) = &run.grid {
            lead.push(num(pt.x));
            if g.y.is_some() {
                lead.push(num(pt.y));
            }
        }
        match p {
            Ok(p) => lead.extend([p.omega(), p.omega0(), p.lambda1(), p.lambda2(), p.phi(), p.kappa()].map(num)),
            Err(_) => lead.extend(std::iter::repeat(String::new()).take(6)),
        }
        debug_assert_eq!(lead.len(), n_lead);
        match res {
            Ok(ev) => {
                for cells in ev.rows {
                    let mut row = lead.clone();
                    row.extend(cells);
                    row.push(String::new());
                    table.push(row);
                }
                attachments.extend(ev.attachments);
            }
            Err(msg) => {
                failed += 1;
                let mut row = lead;
                row.extend(std::iter::repeat(String::new()).take(task_cols.len()));
                row.push(msg);
                table.push(row);
            }
        }
    }

    let dir = &run.out_dir;
    let io = |path: &std::path::Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut outputs = Vec::new();
    let main = dir.join(format!("{}.csv", run.name));
    output::write_csv(&main, &table).map_err(io(&main))?;
    outputs.push(main);
    for a in &attachments {
        let path = dir.join(format!("{}.{}.csv", run.name, a.suffix));
        output::write_csv(&path, &a.table).map_err(io(&path))?;
        outputs.push(path);
    }

    let p = &run.base;
    let file_names: Vec<String> = outputs
        .iter()
        .map(|o| o.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    let manifest = json!({
        "tool": "vdicke",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": vdicke_core::VERSION,
        "task": run.task.as_str(),
        "config": run.config,
        "base_params": {
            "omega": p.omega(),
            "omega0": p.omega0(),
            "lambda1": p.lambda1(),
            "lambda2": p.lambda2(),
            "phi": p.phi(),
            "kappa": p.kappa(),
            "n_atoms": p.n_atoms(),
        },
        "omega_convention": RESOLVED_OMEGA_CONVENTION.as_str(),
        "workers": run.workers,
        "points": pts.len(),
        "rows": table.rows.len(),
        "failed_points": failed,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "outputs": file_names,
    });
    let manifest_path = dir.join(format!("{}.manifest.json", run.name));
    output::write_json(&manifest_path, &manifest).map_err(io(&manifest_path))?;
    Ok(RunSummary {
        points: pts.len(),
        failed,
        outputs,
        manifest: manifest_path,
    })
}
