//! Localized states, Gaussian particle states on an eigenbranch, and
//! particle/antiparticle superpositions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QwError, Result};
use crate::evolution::{check_compatible, Domain, FieldState, Propagator};
use crate::lattice::{GridSpec, WaveVector};
use crate::spectral::SpectralPlan;
use crate::walk::{Branch, WalkModel, DEGENERACY_THRESHOLD};

/// Envelopes are required to avoid degenerate slots within this many
/// standard deviations of the centre.
pub const DEGENERACY_REACH: f64 = 6.0;

/// Gaussian particle-state parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleStateSpec {
    pub k_prime: WaveVector,
    /// Per-axis standard deviation of `|g|^2` in wave-vector space.
    pub sigma: [f64; 3],
    pub branch: Branch,
}

impl ParticleStateSpec {
    pub fn new(k_prime: WaveVector, sigma: [f64; 3], branch: Branch) -> Self {
        Self {
            k_prime,
            sigma,
            branch,
        }
    }

    /// Isotropic width on the first `d` axes.
    pub fn isotropic(k_prime: WaveVector, sigma: f64, d: usize, branch: Branch) -> Self {
        let mut s = [0.0; 3];
        s[..d].iter_mut().for_each(|v| *v = sigma);
        Self::new(k_prime, s, branch)
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.sigma[..d].iter().any(|s| !(*s > 0.0)) {
            return Err(QwError::InvalidParameter(format!(
                "widths must be positive, got {:?}",
                &self.sigma[..d]
            )));
        }
        Ok(())
    }

    /// The grid slot nearest to `k_prime`.
    pub fn nearest_slot(&self, grid: &GridSpec) -> usize {
        grid.nearest_slot(self.k_prime)
    }
}

/// `|x0> (x) |zeta>`.
pub fn localized_state(
    grid: &GridSpec,
    model: &WalkModel,
    x0: [i64; 3],
    zeta: &[Complex64],
) -> Result<FieldState> {
    check_compatible(grid, model)?;
    if zeta.len() != model.coin_dim() {
        return Err(QwError::InvalidCoin(format!(
            "spinor has {} components, walk needs {}",
            zeta.len(),
            model.coin_dim()
        )));
    }
    let norm: f64 = zeta.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(QwError::InvalidCoin(format!("|zeta|^2 = {norm}, expected 1")));
    }
    let d = grid.dimension();
    let inside = (0..d).all(|a| (0..grid.period(a)).contains(&x0[a])) && x0[d..].iter().all(|&c| c == 0);
    let site = if inside { grid.index_of_position(&x0) } else { None };
    let site = site.ok_or_else(|| QwError::SiteOutOfGrid(x0[..d].to_vec()))?;
    let mut state = FieldState::zeros(grid.clone(), *model, Domain::Position)?;
    let s = model.coin_dim();
    state.amplitudes_mut()[site * s..(site + 1) * s].copy_from_slice(zeta);
    state.set_origin(x0);
    Ok(state)
}

/// Gaussian envelope `exp(-sum_i dk_i^2 / (4 sigma_i^2))` with wrapped `dk`.
fn envelope(grid: &GridSpec, k_prime: WaveVector, sigma: &[f64; 3], slot: usize) -> (f64, WaveVector) {
    let dk = grid.wrap_difference(grid.wavevector_unchecked(slot), k_prime);
    let mut e = 0.0;
    for a in 0..grid.dimension() {
        e += dk.0[a] * dk.0[a] / (4.0 * sigma[a] * sigma[a]);
    }
    ((-e).exp(), dk)
}

/// State with the common envelope `g` on several branches:
/// `psi^(k) = g(k) sum_r weights[r] |u_r(k)>`, returned in position domain.
pub fn branch_weighted_state(
    grid: &GridSpec,
    model: &WalkModel,
    k_prime: WaveVector,
    sigma: [f64; 3],
    weights: &[Complex64],
) -> Result<FieldState> {
    check_compatible(grid, model)?;
    let s = model.coin_dim();
    if weights.len() != s {
        return Err(QwError::ShapeMismatch(format!(
            "{} branch weights given, walk has {s} branches",
            weights.len()
        )));
    }
    let d = grid.dimension();
    let slots = grid.slot_count();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); slots * s];
    let degenerate: Vec<Option<QwError>> = amplitudes
        .par_chunks_mut(s)
        .enumerate()
        .map(|(slot, out)| {
            let (g, dk) = envelope(grid, k_prime, &sigma, slot);
            let es = model.eigensystem(&grid.wavevector_unchecked(slot));
            if es.sin_omega < DEGENERACY_THRESHOLD
                && (0..d).all(|a| dk.0[a].abs() <= DEGENERACY_REACH * sigma[a])
            {
                return Some(QwError::Degenerate {
                    kappa: es.kappa.0,
                    sin_omega: es.sin_omega,
                });
            }
            if g == 0.0 {
                return None;
            }
            for (r, w) in weights.iter().enumerate() {
                if *w != Complex64::new(0.0, 0.0) {
                    for (o, e) in out.iter_mut().zip(es.eigenvectors[r].as_slice()) {
                        *o += w * g * e;
                    }
                }
            }
            None
        })
        .collect();
    if let Some(err) = degenerate.into_iter().flatten().next() {
        return Err(err);
    }
    let mut state = FieldState::new(grid.clone(), *model, Domain::Momentum, amplitudes)?;
    state.normalize();
    state.in_domain_with(Domain::Position, &SpectralPlan::new(grid))
}

/// Gaussian particle state on a single eigenbranch.
pub fn gaussian_particle_state(
    grid: &GridSpec,
    model: &WalkModel,
    spec: &ParticleStateSpec,
) -> Result<FieldState> {
    spec.validate(grid.dimension())?;
    let r = model.branch_index(spec.branch)?;
    let mut weights = vec![Complex64::new(0.0, 0.0); model.coin_dim()];
    weights[r] = Complex64::new(1.0, 0.0);
    branch_weighted_state(grid, model, spec.k_prime, spec.sigma, &weights)
}

/// `c+ |psi_{+,p}> + c- |psi_{-,p}>` with a common Gaussian envelope. The
/// `p` label of `spec.branch` selects the pair for 4-component walks.
pub fn superposition_state(
    grid: &GridSpec,
    model: &WalkModel,
    spec: &ParticleStateSpec,
    c_plus: Complex64,
    c_minus: Complex64,
) -> Result<FieldState> {
    spec.validate(grid.dimension())?;
    let total = c_plus.norm_sqr() + c_minus.norm_sqr();
    if (total - 1.0).abs() > 1e-12 {
        return Err(QwError::WeightNormalization(total));
    }
    let p = if model.coin_dim() == 4 {
        if spec.branch.p == 0 {
            1
        } else {
            spec.branch.p
        }
    } else {
        0
    };
    let mut weights = vec![Complex64::new(0.0, 0.0); model.coin_dim()];
    weights[model.branch_index(Branch { s: 1, p })?] = c_plus;
    weights[model.branch_index(Branch { s: -1, p })?] = c_minus;
    branch_weighted_state(grid, model, spec.k_prime, spec.sigma, &weights)
}

/// Probability mass in the box `|k_i - k'_i| <= half_widths_i` (wrapped).
pub fn band_concentration(state: &FieldState, k_prime: WaveVector, half_widths: [f64; 3]) -> Result<f64> {
    let momentum = state.in_domain(Domain::Momentum)?;
    let grid = state.grid();
    let s = state.coin_dim();
    let d = grid.dimension();
    let mut mass = 0.0;
    for slot in 0..grid.slot_count() {
        let dk = grid.wrap_difference(grid.wavevector_unchecked(slot), k_prime);
        if (0..d).all(|a| dk.0[a].abs() <= half_widths[a] * (1.0 + 1e-12)) {
            mass += momentum.amplitudes()[slot * s..(slot + 1) * s]
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>();
        }
    }
    Ok(mass / momentum.norm_sqr())
}

/// Per-branch components of a state.
#[derive(Clone, Debug)]
pub struct BranchDecomposition {
    pub components: Vec<(Branch, FieldState)>,
    /// Slots handled by the dense eigensolver fallback.
    pub degenerate_slots: usize,
    pub degenerate_mass: f64,
}

/// Projects a state onto each eigenbranch; components are returned in the
/// input's domain.
pub fn branch_decompose(state: &FieldState) -> Result<BranchDecomposition> {
    let prop = Propagator::new(state)?;
    let model = *state.model();
    let s = model.coin_dim();
    let mut degenerate_slots = 0;
    let mut degenerate_mass = 0.0;
    for (slot, deg) in prop.degenerate().iter().enumerate() {
        if *deg {
            degenerate_slots += 1;
            degenerate_mass += prop.coefficients()[slot * s..(slot + 1) * s]
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>();
        }
    }
    let mut components = Vec::with_capacity(s);
    for (r, branch) in model.branches().into_iter().enumerate() {
        let mut single = Propagator::new(state)?;
        single.restrict_branches(&[r]);
        let mut comp = single.momentum_at(0, crate::evolution::DispersionApprox::Exact)?;
        comp.set_time(state.time());
        components.push((branch, comp.in_domain_with(state.domain(), prop.plan())?));
    }
    Ok(BranchDecomposition {
        components,
        degenerate_slots,
        degenerate_mass,
    })
}
