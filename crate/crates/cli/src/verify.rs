//! The `verify` subcommand: the invariant suite with measured residuals.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use qwalk_core::walk::{transition_matrices, weyl_scalars};
use qwalk_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            pass: residual.is_finite() && residual < tolerance,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Models to check; empty selects a default set covering every family
    /// and dimension.
    pub models: Vec<WalkModel>,
    /// Perturb one transition matrix entry by this amount (test hook).
    pub corrupt_transition: Option<f64>,
    pub seed: u64,
}

fn default_models() -> Vec<WalkModel> {
    vec![
        WalkModel::weyl(1).unwrap(),
        WalkModel::weyl(2).unwrap(),
        WalkModel::weyl(3).unwrap(),
        WalkModel::dirac(1, 0.15).unwrap(),
        WalkModel::dirac(2, 0.3).unwrap(),
        WalkModel::dirac(3, 0.3).unwrap(),
    ]
}

fn label(m: &WalkModel) -> String {
    if m.is_dirac() {
        format!("dirac d={} m={}", m.dimension(), m.mass())
    } else {
        format!("weyl d={}", m.dimension())
    }
}

fn small_grid(d: usize) -> GridSpec {
    match d {
        1 => GridSpec::cubic(&[32]).unwrap(),
        2 => GridSpec::cubic(&[12, 10]).unwrap(),
        _ => GridSpec::bcc([4, 4, 3]).unwrap(),
    }
}

fn random_kappa(rng: &mut ChaCha8Rng, d: usize) -> WaveVector {
    let mut k = [0.0; 3];
    for ka in k.iter_mut().take(d) {
        *ka = rng.random_range(-PI..PI);
    }
    WaveVector(k)
}

fn random_field(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// BCC transform evaluated from its definition by direct summation.
fn brute_bcc(grid: &GridSpec, f: &[Complex64]) -> Vec<Complex64> {
    let n = grid.sizes();
    let cells = grid.cell_count();
    let centred = |k: &[i64], a: usize| (k[a] - (n[a] / 2) as i64) as f64 / n[a] as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * cells];
    for k in 0..cells {
        let kc = grid.cell_of_index(k);
        let mut parts = [Complex64::new(0.0, 0.0); 2];
        for (sub, part) in parts.iter_mut().enumerate() {
            for x in 0..cells {
                let xc = grid.cell_of_index(x);
                let phase: f64 = (0..3).map(|a| -2.0 * PI * centred(&kc, a) * xc[a] as f64).sum();
                *part += f[sub * cells + x] * Complex64::from_polar(1.0, phase);
            }
            *part /= (cells as f64).sqrt();
        }
        let a_k = Complex64::from_polar(1.0, (0..3).map(|a| -PI * centred(&kc, a)).sum());
        out[k] = (parts[0] - a_k * parts[1]) * FRAC_1_SQRT_2;
        out[cells + k] = (parts[0] + a_k * parts[1]) * FRAC_1_SQRT_2;
    }
    out
}

pub fn verify(options: &VerifyOptions) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let models = if options.models.is_empty() {
        default_models()
    } else {
        options.models.clone()
    };
    let mut checks = Vec::new();
    for model in &models {
        let name = label(model);
        let d = model.dimension();
        let (mut unitarity, mut eigen, mut rebuild) = (0.0f64, 0.0f64, 0.0f64);
        let mut transitions = transition_matrices(model);
        if let Some(delta) = options.corrupt_transition {
            transitions.terms[0].1[(0, 0)] += Complex64::new(delta, 0.0);
        }
        for _ in 0..50 {
            let k = random_kappa(&mut rng, d);
            let u = model.unitary(&k);
            unitarity = unitarity.max(u.unitarity_defect());
            let (u_k, _) = weyl_scalars(d, &k);
            let omega = (model.n() * u_k).clamp(-1.0, 1.0).acos();
            let es = model.eigensystem(&k);
            for r in 0..model.coin_dim() {
                let v = &es.eigenvectors[r];
                let lambda = Complex64::from_polar(1.0, -(es.signs[r] as f64) * omega);
                eigen = eigen.max(u.mul_vec(v).max_abs_diff(&v.scale(lambda)));
            }
            rebuild = rebuild.max((transitions.reconstruct(&k) - u).max_abs());
        }
        checks.push(Check::new(format!("{name}: walk unitarity"), unitarity, 1e-12));
        checks.push(Check::new(format!("{name}: eigenphases"), eigen, 1e-10));
        checks.push(Check::new(
            format!("{name}: transition unitarity conditions"),
            transitions.unitarity_residual(),
            1e-12,
        ));
        checks.push(Check::new(format!("{name}: transition reconstruction"), rebuild, 1e-12));

        let grid = small_grid(d);
        let amps = random_field(&mut rng, grid.site_count() * model.coin_dim());
        let state = FieldState::new(grid.clone(), *model, Domain::Position, amps).unwrap();
        let engines = PositionStepper::with_transitions(&grid, model, transitions.clone())
            .and_then(|stepper| {
                let mut stepped = state.clone();
                stepper.step(&mut stepped, 12)?;
                let spectral = evolve_spectral(&state, 12)?;
                Ok(max_diff(stepped.amplitudes(), spectral.amplitudes()))
            })
            .unwrap_or(f64::INFINITY);
        checks.push(Check::new(format!("{name}: engine equivalence"), engines, 1e-10));

        if model.is_dirac() {
            let (mut anti, mut fid, mut mixed) = (0.0f64, 0.0f64, 0.0f64);
            for _ in 0..50 {
                let k = random_kappa(&mut rng, d);
                let Ok(ops) = kinematic_operators(&k, model, 3.0) else { continue };
                let (_, nt) = weyl_scalars(d, &k);
                let es = model.eigensystem(&k);
                for j in 0..d {
                    anti = anti.max(ops.h.anticommutator(&ops.a[j]).max_abs());
                    fid = fid.max(ops.f_identity(nt, j).abs());
                    for r in 0..model.coin_dim() {
                        for q in 0..model.coin_dim() {
                            let (a, b) = (&es.eigenvectors[r], &es.eigenvectors[q]);
                            let m = if es.signs[r] != es.signs[q] { ops.v_hat[j] } else { ops.z_x[j] };
                            mixed = mixed.max(m.sandwich(a, b).norm());
                        }
                    }
                }
            }
            checks.push(Check::new(format!("{name}: {{H, A}} = 0"), anti, 1e-12));
            checks.push(Check::new(format!("{name}: f identity"), fid, 1e-12));
            checks.push(Check::new(format!("{name}: branch selection rules"), mixed, 1e-10));
        }
    }

    // Transforms.
    let mut round = 0.0f64;
    let mut parseval = 0.0f64;
    for sizes in [vec![64], vec![8, 6], vec![4, 3, 5]] {
        let grid = GridSpec::cubic(&sizes).unwrap();
        let f = random_field(&mut rng, grid.site_count());
        let spec = dft_rect(&grid, 1, &f).unwrap();
        parseval = parseval.max((spec.coefficients.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs());
        round = round.max(max_diff(&idft_rect(&spec).unwrap(), &f));
    }
    checks.push(Check::new("rectangular transform round trip", round, 1e-12));
    checks.push(Check::new("rectangular transform Parseval", parseval, 1e-12));
    let (mut round, mut parseval, mut brute) = (0.0f64, 0.0f64, 0.0f64);
    for n in [[2, 2, 2], [4, 4, 4], [3, 2, 5]] {
        let grid = GridSpec::bcc(n).unwrap();
        let f = random_field(&mut rng, grid.site_count());
        let (f0, f1) = bcc_dft(&grid, 1, &f).unwrap();
        let fast: Vec<Complex64> = f0.coefficients.iter().chain(&f1.coefficients).copied().collect();
        parseval = parseval.max((fast.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs());
        round = round.max(max_diff(&bcc_idft(&grid, &f0, &f1).unwrap(), &f));
        brute = brute.max(max_diff(&brute_bcc(&grid, &f), &fast));
    }
    checks.push(Check::new("BCC transform round trip", round, 1e-12));
    checks.push(Check::new("BCC transform Parseval", parseval, 1e-12));
    checks.push(Check::new("BCC transform brute-force equivalence", brute, 1e-12));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let checks = verify(&VerifyOptions::default());
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
        assert!(checks.len() > 30);
    }

    #[test]
    fn corrupted_transition_is_caught() {
        let checks = verify(&VerifyOptions {
            models: vec![WalkModel::dirac(1, 0.2).unwrap()],
            corrupt_transition: Some(1e-3),
            seed: 0,
        });
        let failing: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        assert!(failing.iter().any(|n| n.ends_with("transition unitarity conditions")));
        assert!(failing.iter().any(|n| n.ends_with("engine equivalence")));
    }
}
