//! The `run` subcommand: evolve a configured state and write its outputs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use qwalk_core::observables::{sample_times, unwrap_coordinate};
use qwalk_core::{
    decomposition_series, dump, marginal, mean_position, newton_wigner_series, probability_distribution,
    DispersionApprox, FieldState, GridSpec, PositionStepper, Propagator,
};
use serde::Serialize;

use crate::config::{Engine, ExperimentConfig, Observable};

/// Norm drift above which a run is marked degraded.
pub const NORM_TOLERANCE: f64 = 1e-9;

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

/// Fixed 17-significant-digit rendering.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub setup_seconds: f64,
    pub evolution_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub sites: usize,
    pub coin_dim: usize,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub degraded: bool,
    /// Samples whose mean position had too much mass near the torus seam.
    pub unreliable_mean_samples: usize,
    pub outputs: Vec<String>,
    pub threads: usize,
    pub timing: Timing,
}

enum Evolver {
    Spectral(Box<Propagator>, DispersionApprox),
    Position(PositionStepper, FieldState),
}

impl Evolver {
    fn state_at(&mut self, t: u64) -> Result<FieldState> {
        Ok(match self {
            Evolver::Spectral(prop, approx) => prop.state_at(t, *approx)?,
            Evolver::Position(stepper, state) => {
                let steps = t - state.time();
                stepper.step(state, steps)?;
                state.clone()
            }
        })
    }
}

fn marginal_name(kept: &[usize], several: bool, t: u64) -> String {
    if several {
        let axes: String = kept.iter().map(|&a| AXIS_NAMES[a]).collect();
        format!("dist_t{t}_{axes}.csv")
    } else {
        format!("dist_t{t}.csv")
    }
}

/// Probability rows `coords..., p` with coordinates unwrapped around the
/// state's origin.
fn distribution_csv(state: &FieldState, kept: &[usize]) -> Result<String> {
    let grid: &GridSpec = state.grid();
    let d = grid.dimension();
    let origin = state.origin();
    let p = probability_distribution(state)?;
    let mut out = String::new();
    let all = kept.is_empty() || (kept.len() == d && kept.iter().enumerate().all(|(i, &a)| i == a));
    let kept: Vec<usize> = if all { (0..d).collect() } else { kept.to_vec() };
    for &a in &kept {
        write!(out, "{},", AXIS_NAMES[a]).unwrap();
    }
    out.push_str("p\n");
    if all {
        for (i, v) in p.iter().enumerate() {
            let x = grid.position_of_index(i);
            for a in 0..d {
                write!(out, "{},", unwrap_coordinate(x[a], origin[a], grid.period(a))).unwrap();
            }
            writeln!(out, "{}", fmt_f64(*v)).unwrap();
        }
    } else {
        let m = marginal(grid, &p, &kept)?;
        for (idx, v) in m.values.iter().enumerate() {
            let mut rem = idx;
            let mut coords = vec![0i64; kept.len()];
            for k in (0..kept.len()).rev() {
                coords[k] = (rem % m.extents[k]) as i64;
                rem /= m.extents[k];
            }
            for (k, &a) in kept.iter().enumerate() {
                write!(out, "{},", unwrap_coordinate(coords[k], origin[a], grid.period(a))).unwrap();
            }
            writeln!(out, "{}", fmt_f64(*v)).unwrap();
        }
    }
    Ok(out)
}

fn write(dir: &Path, name: &str, contents: &[u8], outputs: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    outputs.push(name.to_string());
    Ok(())
}

pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    let start = Instant::now();
    config.validate()?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let grid = config.grid.build()?;
    let model = config.model.build()?;
    let d = grid.dimension();
    let initial = config.build_initial(&grid, &model)?;
    let initial_norm = initial.norm();

    let series_times = sample_times(config.steps, config.stride);
    let snapshot_set: BTreeSet<u64> = config.snapshots.iter().copied().collect();
    let all_times: BTreeSet<u64> = series_times.iter().copied().chain(snapshot_set.iter().copied()).collect();

    let mut evolver = match config.engine {
        Engine::Spectral => Evolver::Spectral(Box::new(Propagator::new(&initial)?), DispersionApprox::Exact),
        Engine::Truncated { order } => Evolver::Spectral(
            Box::new(Propagator::new(&initial)?),
            DispersionApprox::Taylor {
                order,
                centre: config.initial.k_prime(),
            },
        ),
        Engine::Position => Evolver::Position(PositionStepper::new(&grid, &model)?, initial.clone()),
    };
    let setup = start.elapsed().as_secs_f64();

    let mut outputs = Vec::new();
    let mut means = Vec::new();
    let mut unreliable = 0;
    let mut final_norm = initial_norm;
    let several = config.marginals.len() > 1;
    for &t in &all_times {
        let state = evolver.state_at(t)?;
        if t == config.steps {
            final_norm = state.norm();
        }
        if series_times.binary_search(&t).is_ok() {
            let m = mean_position(&state)?;
            unreliable += usize::from(!m.valid);
            means.push(m.mean);
        }
        if snapshot_set.contains(&t) {
            let sets: Vec<Vec<usize>> = if config.marginals.is_empty() {
                vec![vec![]]
            } else {
                config.marginals.clone()
            };
            for kept in &sets {
                let csv = distribution_csv(&state, kept)?;
                write(out_dir, &marginal_name(kept, several, t), csv.as_bytes(), &mut outputs)?;
            }
            if config.dumps {
                let mut bytes = Vec::new();
                dump::write_state(&state, &mut bytes)?;
                write(out_dir, &format!("state_t{t}.qwlk"), &bytes, &mut outputs)?;
            }
        }
    }

    let decomposition = if config.observables.contains(&Observable::Decomposition) {
        Some(decomposition_series(&initial, &series_times)?)
    } else {
        None
    };
    let newton_wigner = if config.observables.contains(&Observable::NewtonWigner) {
        Some(newton_wigner_series(&initial, &series_times)?)
    } else {
        None
    };
    let evolution = start.elapsed().as_secs_f64() - setup;

    let mut csv = String::from("t");
    let columns = |csv: &mut String, prefix: &str| {
        for a in 1..=d {
            write!(csv, ",{prefix}_{a}").unwrap();
        }
    };
    columns(&mut csv, "x_mean");
    if decomposition.is_some() {
        columns(&mut csv, "xplus");
        columns(&mut csv, "xminus");
        columns(&mut csv, "xint");
    }
    if newton_wigner.is_some() {
        columns(&mut csv, "x_nw");
    }
    csv.push('\n');
    for (i, &t) in series_times.iter().enumerate() {
        write!(csv, "{t}").unwrap();
        let values = |csv: &mut String, v: &[f64; 3]| {
            for x in &v[..d] {
                write!(csv, ",{}", fmt_f64(*x)).unwrap();
            }
        };
        values(&mut csv, &means[i]);
        if let Some(dec) = &decomposition {
            values(&mut csv, &dec[i].x_plus);
            values(&mut csv, &dec[i].x_minus);
            values(&mut csv, &dec[i].x_int);
        }
        if let Some(nw) = &newton_wigner {
            values(&mut csv, &nw[i].mean);
        }
        csv.push('\n');
    }
    write(out_dir, "series.csv", csv.as_bytes(), &mut outputs)?;
    outputs.push("run.json".into());

    let summary = RunSummary {
        config: config.clone(),
        sites: grid.site_count(),
        coin_dim: model.coin_dim(),
        initial_norm,
        final_norm,
        degraded: (final_norm - 1.0).abs() >= NORM_TOLERANCE,
        unreliable_mean_samples: unreliable,
        outputs,
        threads: rayon::current_num_threads(),
        timing: Timing {
            setup_seconds: setup,
            evolution_seconds: evolution,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    };
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(out_dir.join("run.json"), json).context("writing run.json")?;
    Ok(summary)
}

/// Output directory: explicit flag, then `QWALK_OUT_DIR`, then the config,
/// then `qwalk-out/<name>`.
pub fn resolve_out_dir(flag: Option<PathBuf>, env: Option<String>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| env.map(|root| PathBuf::from(root).join(&config.name)))
        .or_else(|| config.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("qwalk-out").join(&config.name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        for v in [0.1 + 0.2, 1.0 / 3.0, -6.02e23, 5e-324] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn output_directory_precedence() {
        let mut config = crate::presets::preset("fig5").unwrap();
        assert_eq!(resolve_out_dir(None, None, &config), PathBuf::from("qwalk-out/fig5"));
        config.output = Some("here".into());
        assert_eq!(resolve_out_dir(None, None, &config), PathBuf::from("here"));
        assert_eq!(resolve_out_dir(None, Some("/env".into()), &config), PathBuf::from("/env/fig5"));
        assert_eq!(
            resolve_out_dir(Some("flag".into()), Some("/env".into()), &config),
            PathBuf::from("flag")
        );
    }
}
