//! The `dispersion` subcommand: dispersion, group velocity and eigenvectors
//! sampled on a regular grid of wave-vectors.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::{ensure, Result};
use qwalk_core::{WalkModel, WaveVector};

use crate::run::fmt_f64;

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

/// Sample `j` of `resolution` points per axis: `2 pi (j - floor(R/2)) / R`,
/// the centred frequency ladder of a grid with `R` cells.
pub fn sample(resolution: usize, j: usize) -> f64 {
    2.0 * PI * (j as f64 - (resolution / 2) as f64) / resolution as f64
}

/// One row per wave-vector: `k_*, omega, sin_omega, v_*`, then the real and
/// imaginary parts of every eigenvector component. Group velocities at
/// degenerate points are written as `NaN`.
pub fn dispersion_csv(model: &WalkModel, resolution: usize) -> Result<String> {
    ensure!(resolution > 0, "resolution must be positive");
    let d = model.dimension();
    let s = model.coin_dim();
    let mut out = String::new();
    for a in 0..d {
        write!(out, "k_{},", AXIS_NAMES[a]).unwrap();
    }
    out.push_str("omega,sin_omega");
    for a in 0..d {
        write!(out, ",v_{}", AXIS_NAMES[a]).unwrap();
    }
    for r in 0..s {
        for c in 0..s {
            write!(out, ",u{r}_{c}_re,u{r}_{c}_im").unwrap();
        }
    }
    out.push('\n');
    let rows = resolution.pow(d as u32);
    for row in 0..rows {
        let mut k = [0.0; 3];
        let mut rem = row;
        for a in (0..d).rev() {
            k[a] = sample(resolution, rem % resolution);
            rem /= resolution;
        }
        let kv = WaveVector(k);
        let es = model.eigensystem(&kv);
        let v = model.group_velocity(&kv).unwrap_or([f64::NAN; 3]);
        for ka in &k[..d] {
            write!(out, "{},", fmt_f64(*ka)).unwrap();
        }
        write!(out, "{},{}", fmt_f64(es.omega), fmt_f64(es.sin_omega)).unwrap();
        for va in &v[..d] {
            write!(out, ",{}", fmt_f64(*va)).unwrap();
        }
        for r in 0..s {
            for c in es.eigenvectors[r].as_slice() {
                write!(out, ",{},{}", fmt_f64(c.re), fmt_f64(c.im)).unwrap();
            }
        }
        out.push('\n');
    }
    Ok(out)
}
