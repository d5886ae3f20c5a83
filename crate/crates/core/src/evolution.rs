//! Field states and the three time-evolution engines.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::{CoinMatrix, CoinVector};
use crate::error::{QwError, Result};
use crate::lattice::{GridSpec, WaveVector};
use crate::spectral::SpectralPlan;
use crate::walk::{transition_matrices, TransitionSet, WalkModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Position,
    Momentum,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Position => "position",
            Domain::Momentum => "momentum",
        }
    }
}

/// Complex amplitudes over `(site, coin)` or `(slot, coin)`, coin index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    grid: GridSpec,
    model: WalkModel,
    domain: Domain,
    time: u64,
    /// Lattice position the state was prepared around; mean positions are
    /// unwrapped relative to it.
    origin: [i64; 3],
    amplitudes: Vec<Complex64>,
}

pub(crate) fn check_compatible(grid: &GridSpec, model: &WalkModel) -> Result<()> {
    if grid.kind() != model.lattice_kind() || grid.dimension() != model.dimension() {
        return Err(QwError::InvalidGrid(format!(
            "a {}-dimensional {:?} walk needs a {:?} grid of that dimension",
            model.dimension(),
            model.family(),
            model.lattice_kind()
        )));
    }
    Ok(())
}

impl FieldState {
    pub fn new(
        grid: GridSpec,
        model: WalkModel,
        domain: Domain,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        check_compatible(&grid, &model)?;
        let expected = grid.site_count() * model.coin_dim();
        if amplitudes.len() != expected {
            return Err(QwError::ShapeMismatch(format!(
                "{} amplitudes given, {expected} needed",
                amplitudes.len()
            )));
        }
        Ok(Self {
            grid,
            model,
            domain,
            time: 0,
            origin: [0; 3],
            amplitudes,
        })
    }

    pub fn zeros(grid: GridSpec, model: WalkModel, domain: Domain) -> Result<Self> {
        let len = grid.site_count() * model.coin_dim();
        Self::new(grid, model, domain, vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn model(&self) -> &WalkModel {
        &self.model
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn set_time(&mut self, time: u64) {
        self.time = time;
    }

    pub fn origin(&self) -> [i64; 3] {
        self.origin
    }

    pub fn set_origin(&mut self, origin: [i64; 3]) {
        self.origin = origin;
    }

    pub fn coin_dim(&self) -> usize {
        self.model.coin_dim()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Coin vector at a site (position domain) or slot (momentum domain).
    pub fn coin_at(&self, index: usize) -> CoinVector {
        let s = self.coin_dim();
        CoinVector::from_slice(&self.amplitudes[index * s..(index + 1) * s])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
    }

    pub(crate) fn require_domain(&self, domain: Domain) -> Result<()> {
        if self.domain != domain {
            return Err(QwError::DomainMismatch {
                expected: domain.name(),
                found: self.domain.name(),
            });
        }
        Ok(())
    }

    /// Copy of the state in the requested domain.
    pub fn in_domain(&self, domain: Domain) -> Result<FieldState> {
        self.in_domain_with(domain, &SpectralPlan::new(&self.grid))
    }

    pub fn in_domain_with(&self, domain: Domain, plan: &SpectralPlan) -> Result<FieldState> {
        let mut out = self.clone();
        match (self.domain, domain) {
            (Domain::Position, Domain::Momentum) => plan.forward(&mut out.amplitudes, self.coin_dim())?,
            (Domain::Momentum, Domain::Position) => plan.inverse(&mut out.amplitudes, self.coin_dim())?,
            _ => {}
        }
        out.domain = domain;
        Ok(out)
    }

    pub fn to_momentum(&self) -> Result<FieldState> {
        self.in_domain(Domain::Momentum)
    }

    pub fn to_position(&self) -> Result<FieldState> {
        self.in_domain(Domain::Position)
    }

    fn check_same_shape(&self, other: &FieldState) -> Result<()> {
        if self.grid != other.grid || self.coin_dim() != other.coin_dim() {
            return Err(QwError::ShapeMismatch(
                "states live on different grids or coin spaces".into(),
            ));
        }
        Ok(())
    }
}

/// `<a|b>`; `b` is transformed to the domain of `a` when they differ.
pub fn overlap(a: &FieldState, b: &FieldState) -> Result<Complex64> {
    a.check_same_shape(b)?;
    let converted;
    let b = if a.domain == b.domain {
        b
    } else {
        converted = b.in_domain(a.domain)?;
        &converted
    };
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Local update `psi(x, t+1) = sum_h U_h psi(x - h, t)` with precomputed
/// neighbour tables.
pub struct PositionStepper {
    grid: GridSpec,
    model: WalkModel,
    transitions: TransitionSet,
    /// Per transition term, the source site of every target site.
    sources: Vec<Vec<u32>>,
}

impl PositionStepper {
    pub fn new(grid: &GridSpec, model: &WalkModel) -> Result<Self> {
        Self::with_transitions(grid, model, transition_matrices(model))
    }

    /// Stepper with caller-supplied transition matrices.
    pub fn with_transitions(
        grid: &GridSpec,
        model: &WalkModel,
        transitions: TransitionSet,
    ) -> Result<Self> {
        check_compatible(grid, model)?;
        let sources = transitions
            .terms
            .iter()
            .map(|(h, _)| {
                (0..grid.site_count())
                    .map(|i| {
                        let x = grid.position_of_index(i);
                        let src = [x[0] - h[0], x[1] - h[1], x[2] - h[2]];
                        grid.index_of_position(&src)
                            .expect("generators map lattice sites to lattice sites") as u32
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            model: *model,
            transitions,
            sources,
        })
    }

    pub fn transitions(&self) -> &TransitionSet {
        &self.transitions
    }

    /// Advances a position-domain state by `steps`.
    pub fn step(&self, state: &mut FieldState, steps: u64) -> Result<()> {
        state.require_domain(Domain::Position)?;
        if state.grid != self.grid || state.model != self.model {
            return Err(QwError::ShapeMismatch(
                "stepper built for a different grid or model".into(),
            ));
        }
        let s = self.model.coin_dim();
        let mats: Vec<&CoinMatrix> = self.transitions.terms.iter().map(|(_, u)| u).collect();
        let mut next = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
        for _ in 0..steps {
            let current = &state.amplitudes;
            next.par_chunks_mut(s).enumerate().for_each(|(i, out)| {
                let mut tmp = [Complex64::new(0.0, 0.0); 4];
                out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for (m, src) in mats.iter().zip(&self.sources) {
                    let j = src[i] as usize;
                    m.apply_slice(&current[j * s..(j + 1) * s], &mut tmp);
                    for (o, t) in out.iter_mut().zip(&tmp) {
                        *o += t;
                    }
                }
            });
            std::mem::swap(&mut state.amplitudes, &mut next);
        }
        state.time += steps;
        Ok(())
    }
}

/// Advances a position-domain state by `steps` local updates.
pub fn step_position(state: &FieldState, steps: u64) -> Result<FieldState> {
    state.require_domain(Domain::Position)?;
    let stepper = PositionStepper::new(&state.grid, &state.model)?;
    let mut out = state.clone();
    stepper.step(&mut out, steps)?;
    Ok(out)
}

/// How the phase of each branch is advanced in time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DispersionApprox {
    /// The exact dispersion `w(k)`.
    Exact,
    /// Taylor polynomial of order 1 or 2 around the given wave-vector.
    Taylor { order: usize, centre: WaveVector },
}

/// Polynomial `w~(k) = w(k') + sum_{1<=|a|<=n} w^(a)(k') (k - k')^a / a!`.
#[derive(Clone, Copy, Debug)]
struct TaylorDispersion {
    centre: WaveVector,
    value: f64,
    gradient: [f64; 3],
    hessian: Option<[[f64; 3]; 3]>,
}

impl TaylorDispersion {
    fn new(model: &WalkModel, centre: WaveVector, order: usize) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(QwError::InvalidParameter(format!(
                "truncation order must be 1 or 2, got {order}"
            )));
        }
        Ok(Self {
            centre,
            value: model.dispersion(&centre),
            gradient: model.group_velocity(&centre)?,
            hessian: if order == 2 {
                Some(model.diffusion_tensor(&centre)?)
            } else {
                None
            },
        })
    }

    fn eval(&self, grid: &GridSpec, k: &WaveVector) -> f64 {
        let dk = grid.wrap_difference(*k, self.centre).0;
        let mut w = self.value;
        for i in 0..3 {
            w += self.gradient[i] * dk[i];
        }
        if let Some(h) = self.hessian {
            for i in 0..3 {
                for j in 0..3 {
                    w += 0.5 * h[i][j] * dk[i] * dk[j];
                }
            }
        }
        w
    }
}

/// Branch decomposition of a state: per slot, the coefficients
/// `c_r(k) = <u_r(k)|psi^(k)>` and the dispersion `w(k)`.
pub struct Propagator {
    grid: GridSpec,
    model: WalkModel,
    plan: SpectralPlan,
    origin: [i64; 3],
    time: u64,
    coefficients: Vec<Complex64>,
    omega: Vec<f64>,
    degenerate: Vec<bool>,
}

impl Propagator {
    pub fn new(state: &FieldState) -> Result<Self> {
        let plan = SpectralPlan::new(&state.grid);
        let momentum = state.in_domain_with(Domain::Momentum, &plan)?;
        let s = state.coin_dim();
        let model = state.model;
        let grid = state.grid.clone();
        let slots = grid.slot_count();
        let mut coefficients = vec![Complex64::new(0.0, 0.0); slots * s];
        let mut omega = vec![0.0; slots];
        let mut degenerate = vec![false; slots];
        coefficients
            .par_chunks_mut(s)
            .zip(omega.par_iter_mut())
            .zip(degenerate.par_iter_mut())
            .enumerate()
            .for_each(|(slot, ((c, w), deg))| {
                let es = model.eigensystem(&grid.wavevector_unchecked(slot));
                let psi = &momentum.amplitudes[slot * s..(slot + 1) * s];
                for (r, cr) in c.iter_mut().enumerate() {
                    *cr = es.eigenvectors[r].dot_slice(psi);
                }
                *w = es.omega;
                *deg = es.degenerate;
            });
        Ok(Self {
            grid,
            model,
            plan,
            origin: state.origin,
            time: state.time,
            coefficients,
            omega,
            degenerate,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn model(&self) -> &WalkModel {
        &self.model
    }

    pub fn plan(&self) -> &SpectralPlan {
        &self.plan
    }

    /// Branch coefficients, indexed `slot * coin_dim + branch`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    /// Keeps only the listed branches (by storage index).
    pub fn restrict_branches(&mut self, keep: &[usize]) {
        let s = self.model.coin_dim();
        for (i, c) in self.coefficients.iter_mut().enumerate() {
            if !keep.contains(&(i % s)) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Momentum-domain state after `t` further steps.
    pub fn momentum_at(&self, t: u64, approx: DispersionApprox) -> Result<FieldState> {
        let taylor = match approx {
            DispersionApprox::Exact => None,
            DispersionApprox::Taylor { order, centre } => {
                Some(TaylorDispersion::new(&self.model, centre, order)?)
            }
        };
        let s = self.model.coin_dim();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.coefficients.len()];
        let (grid, model) = (&self.grid, &self.model);
        amplitudes.par_chunks_mut(s).enumerate().for_each(|(slot, out)| {
            let c = &self.coefficients[slot * s..(slot + 1) * s];
            if c.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                return;
            }
            let k = grid.wavevector_unchecked(slot);
            let es = model.eigensystem(&k);
            let w = match &taylor {
                None => es.omega,
                Some(tp) => tp.eval(grid, &k),
            };
            for r in 0..s {
                let phase = Complex64::from_polar(1.0, -(es.signs[r] as f64) * w * t as f64);
                let coeff = c[r] * phase;
                for (o, e) in out.iter_mut().zip(es.eigenvectors[r].as_slice()) {
                    *o += coeff * e;
                }
            }
        });
        let mut state = FieldState::new(grid.clone(), *model, Domain::Momentum, amplitudes)?;
        state.time = self.time + t;
        state.origin = self.origin;
        Ok(state)
    }

    /// Position-domain state after `t` further steps.
    pub fn state_at(&self, t: u64, approx: DispersionApprox) -> Result<FieldState> {
        self.momentum_at(t, approx)?.in_domain_with(Domain::Position, &self.plan)
    }
}

/// Exact evolution by `t` steps through the branch decomposition; the result
/// is returned in the input's domain.
pub fn evolve_spectral(state: &FieldState, t: u64) -> Result<FieldState> {
    let prop = Propagator::new(state)?;
    let out = prop.momentum_at(t, DispersionApprox::Exact)?;
    out.in_domain_with(state.domain, &prop.plan)
}

/// Evolution with the dispersion replaced by its Taylor polynomial of order
/// `order` around `k_prime`, eigenvectors unchanged.
pub fn evolve_truncated(
    state: &FieldState,
    k_prime: WaveVector,
    order: usize,
    t: u64,
) -> Result<FieldState> {
    let prop = Propagator::new(state)?;
    let out = prop.momentum_at(
        t,
        DispersionApprox::Taylor {
            order,
            centre: k_prime,
        },
    )?;
    out.in_domain_with(state.domain, &prop.plan)
}

/// The computable part of the truncated-evolution overlap bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ApproximationBound {
    /// `1 - eps - gamma Sigma^(n+1) t`.
    pub bound: f64,
    pub gamma: f64,
    pub sigma_max: f64,
    /// Size scale `Sigma^(n+3) t` of the uncontrolled remainder.
    pub remainder_scale: f64,
}

/// Multi-indices `a` with `|a| = order` over the first `d` axes.
fn multi_indices(d: usize, order: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..=order {
        for b in 0..=(order - a) {
            let c = order - a - b;
            let alpha = [a, b, c];
            if (d..3).all(|i| alpha[i] == 0) {
                out.push(alpha);
            }
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Lower bound `1 - eps - gamma Sigma^(n+1) t` on `|<psi~(t)|psi(t)>|` with
/// `gamma = (n+1) sum_{|a|=n+1} |w^(a)(k')| / a! * box_mass`, where
/// `box_mass` is the envelope mass inside the box `|k_i - k'_i| <= sigma_i`.
pub fn approximation_bound(
    model: &WalkModel,
    k_prime: WaveVector,
    sigma: [f64; 3],
    epsilon: f64,
    box_mass: f64,
    order: usize,
    t: u64,
) -> Result<ApproximationBound> {
    let d = model.dimension();
    let mut sum = 0.0;
    for alpha in multi_indices(d, order + 1) {
        let deriv = model.dispersion_derivative(&k_prime, alpha)?;
        let alpha_fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        sum += deriv.abs() / alpha_fact;
    }
    let gamma = (order + 1) as f64 * sum * box_mass;
    let sigma_max = sigma[..d].iter().copied().fold(0.0, f64::max);
    let t = t as f64;
    Ok(ApproximationBound {
        bound: 1.0 - epsilon - gamma * sigma_max.powi(order as i32 + 1) * t,
        gamma,
        sigma_max,
        remainder_scale: sigma_max.powi(order as i32 + 3) * t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(grid: GridSpec, model: WalkModel, seed: u64) -> FieldState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = grid.site_count() * model.coin_dim();
        let amps = (0..len)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut s = FieldState::new(grid, model, Domain::Position, amps).unwrap();
        s.normalize();
        s
    }

    fn delta(grid: GridSpec, model: WalkModel, site: usize, spinor: &[Complex64]) -> FieldState {
        let mut s = FieldState::zeros(grid, model, Domain::Position).unwrap();
        let dim = model.coin_dim();
        s.amplitudes_mut()[site * dim..(site + 1) * dim].copy_from_slice(spinor);
        s
    }

    fn max_diff(a: &FieldState, b: &FieldState) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn weyl_delta_moves_right() {
        let g = GridSpec::cubic(&[16]).unwrap();
        let m = WalkModel::weyl(1).unwrap();
        let s = delta(g.clone(), m, 0, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let out = step_position(&s, 1).unwrap();
        assert_eq!(out.coin_at(1).as_slice(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(out.time(), 1);
        let left = delta(g, m, 0, &[c(0.0, 0.0), c(1.0, 0.0)]);
        let out = step_position(&left, 1).unwrap();
        assert_eq!(out.coin_at(15).as_slice(), &[c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn heavy_dirac_stays_put() {
        let g = GridSpec::cubic(&[8]).unwrap();
        let m = WalkModel::dirac(1, 1.0).unwrap();
        let s = delta(g, m, 0, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let out = step_position(&s, 1).unwrap();
        assert!((out.coin_at(0)[1] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(out.coin_at(0)[0].norm() < 1e-15);
        assert!((out.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn domain_is_checked() {
        let g = GridSpec::cubic(&[8]).unwrap();
        let m = WalkModel::weyl(1).unwrap();
        let s = FieldState::zeros(g, m, Domain::Momentum).unwrap();
        assert!(matches!(
            step_position(&s, 1),
            Err(QwError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn incompatible_grid_is_rejected() {
        let g = GridSpec::cubic(&[8, 8, 8]).unwrap();
        assert!(FieldState::zeros(g, WalkModel::weyl(3).unwrap(), Domain::Position).is_err());
    }

    #[test]
    fn engines_agree_in_one_dimension() {
        let g = GridSpec::cubic(&[64]).unwrap();
        for (seed, model) in [
            (1, WalkModel::weyl(1).unwrap()),
            (2, WalkModel::dirac(1, 0.15).unwrap()),
        ] {
            let s = random_state(g.clone(), model, seed);
            let a = step_position(&s, 50).unwrap();
            let b = evolve_spectral(&s, 50).unwrap();
            assert!(max_diff(&a, &b) < 1e-10);
            assert!((a.norm() - 1.0).abs() < 1e-10);
            assert!((b.norm() - 1.0).abs() < 1e-12 * 50.0);
        }
    }

    #[test]
    fn engines_agree_on_bcc() {
        let g = GridSpec::bcc([4, 4, 4]).unwrap();
        for (seed, model) in [
            (3, WalkModel::weyl(3).unwrap()),
            (4, WalkModel::dirac(3, 0.3).unwrap()),
        ] {
            let s = random_state(g.clone(), model, seed);
            let a = step_position(&s, 7).unwrap();
            let b = evolve_spectral(&s, 7).unwrap();
            assert!(max_diff(&a, &b) < 1e-10);
        }
    }

    #[test]
    fn spectral_zero_time_is_identity() {
        let g = GridSpec::cubic(&[6, 5]).unwrap();
        let s = random_state(g, WalkModel::dirac(2, 0.2).unwrap(), 5);
        assert!(max_diff(&evolve_spectral(&s, 0).unwrap(), &s) < 1e-14);
    }

    #[test]
    fn exact_dispersion_through_taylor_path() {
        let g = GridSpec::cubic(&[32]).unwrap();
        let s = random_state(g, WalkModel::dirac(1, 0.4).unwrap(), 6);
        let prop = Propagator::new(&s).unwrap();
        let a = prop.state_at(9, DispersionApprox::Exact).unwrap();
        let b = evolve_spectral(&s, 9).unwrap();
        assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn weyl_truncation_is_exact() {
        // Positive-branch state supported on 0 < k < pi, where w(k) = k.
        let g = GridSpec::cubic(&[64]).unwrap();
        let model = WalkModel::weyl(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = FieldState::zeros(g.clone(), model, Domain::Momentum).unwrap();
        for slot in 0..g.slot_count() {
            let k = g.wavevector_of_slot(slot).unwrap();
            if k.0[0] > 0.0 {
                let v = model.eigensystem(&k).eigenvectors[0]
                    .scale(c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                s.amplitudes_mut()[2 * slot..2 * slot + 2].copy_from_slice(v.as_slice());
            }
        }
        s.normalize();
        let k = WaveVector::new(&[0.4]);
        for order in [1, 2] {
            let a = evolve_truncated(&s, k, order, 30).unwrap();
            let b = evolve_spectral(&s, 30).unwrap();
            assert!((overlap(&a, &b).unwrap().norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bound_values() {
        let w = WalkModel::weyl(1).unwrap();
        let b = approximation_bound(&w, WaveVector::new(&[0.3]), [0.1, 0.0, 0.0], 0.01, 1.0, 2, 500)
            .unwrap();
        assert!(b.gamma.abs() < 1e-6);
        assert!((b.bound - 0.99).abs() < 1e-6);
        let m = WalkModel::dirac(3, 0.02).unwrap();
        let b = approximation_bound(&m, WaveVector::new(&[0.0, 0.01, 0.0]), [1.0 / 32.0; 3], 0.05, 0.9, 2, 0)
            .unwrap();
        assert_eq!(b.bound, 0.95);
        assert!(b.gamma > 0.0);
        assert_eq!(multi_indices(3, 3).len(), 10);
        assert_eq!(multi_indices(2, 3).len(), 4);
    }

    #[test]
    fn overlap_identities() {
        let g = GridSpec::cubic(&[16]).unwrap();
        let s = random_state(g, WalkModel::weyl(1).unwrap(), 8);
        assert!((overlap(&s, &s).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        let m = s.to_momentum().unwrap();
        assert!((overlap(&s, &m).unwrap() - c(1.0, 0.0)).norm() < 1e-13);
        let other = FieldState::zeros(GridSpec::cubic(&[8]).unwrap(), *s.model(), Domain::Position)
            .unwrap();
        assert!(overlap(&s, &other).is_err());
    }
}
