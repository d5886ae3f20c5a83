//! Position distributions, mean position and its branch decomposition,
//! kinematic operators, the Newton-Wigner mean and the commutator boundary
//! term.
//!
//! Position means are taken with coordinates unwrapped around the state's
//! origin `o`: each coordinate is mapped into `[o - L/2, o + L/2)` where `L`
//! is the period of the axis.

use std::borrow::Cow;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coin::{CoinMatrix, CoinVector};
use crate::error::{QwError, Result};
use crate::evolution::{DispersionApprox, Domain, FieldState, Propagator};
use crate::lattice::{wrap_angle, GridSpec, WaveVector};
use crate::walk::{weyl_jacobian, weyl_scalars, WalkModel, DEGENERACY_THRESHOLD};

/// Mass fraction allowed beyond `SEAM_FRACTION * L` from the origin before a
/// mean position is flagged as unreliable.
pub const SEAM_MASS_LIMIT: f64 = 0.2;
pub const SEAM_FRACTION: f64 = 0.4;

/// Slots per parallel work unit; partial sums are combined in slot order so
/// results do not depend on the number of threads.
const CHUNK: usize = 4096;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `P(x) = sum_r |psi_r(x)|^2` in site order.
pub fn probability_distribution(state: &FieldState) -> Result<Vec<f64>> {
    if state.domain() != Domain::Position {
        return Err(QwError::DomainMismatch {
            expected: "position",
            found: state.domain().name(),
        });
    }
    let s = state.coin_dim();
    Ok(state
        .amplitudes()
        .chunks(s)
        .map(|c| c.iter().map(|a| a.norm_sqr()).sum())
        .collect())
}

/// Distribution summed over all but the kept axes, indexed row-major over the
/// kept axes by lattice coordinate in `[0, L)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Marginal {
    pub axes: Vec<usize>,
    pub extents: Vec<usize>,
    pub values: Vec<f64>,
}

pub fn marginal(grid: &GridSpec, distribution: &[f64], kept: &[usize]) -> Result<Marginal> {
    let d = grid.dimension();
    for (i, &axis) in kept.iter().enumerate() {
        if axis >= d || kept[..i].contains(&axis) {
            return Err(QwError::BadAxis { axis, dimension: d });
        }
    }
    if distribution.len() != grid.site_count() {
        return Err(QwError::ShapeMismatch(format!(
            "distribution has {} entries, grid has {} sites",
            distribution.len(),
            grid.site_count()
        )));
    }
    let extents: Vec<usize> = kept.iter().map(|&a| grid.period(a) as usize).collect();
    let mut values = vec![0.0; extents.iter().product()];
    for (i, p) in distribution.iter().enumerate() {
        let x = grid.position_of_index(i);
        let mut idx = 0;
        for (&axis, &ext) in kept.iter().zip(&extents) {
            idx = idx * ext + x[axis].rem_euclid(ext as i64) as usize;
        }
        values[idx] += p;
    }
    Ok(Marginal {
        axes: kept.to_vec(),
        extents,
        values,
    })
}

/// Coordinate `x` unwrapped into `[o - L/2, o + L/2)`.
pub fn unwrap_coordinate(x: i64, origin: i64, period: i64) -> i64 {
    let half = period / 2;
    origin + (x - origin + half).rem_euclid(period) - half
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanPosition {
    pub mean: [f64; 3],
    /// False when too much mass sits near the wrap seam of the torus.
    pub valid: bool,
}

fn unwrapped_positions(grid: &GridSpec, origin: [i64; 3]) -> impl Fn(usize) -> [f64; 3] + '_ {
    let d = grid.dimension();
    move |i| {
        let x = grid.position_of_index(i);
        let mut out = [0.0; 3];
        for a in 0..d {
            out[a] = unwrap_coordinate(x[a], origin[a], grid.period(a)) as f64;
        }
        out
    }
}

/// Mean and validity of a position-domain amplitude field.
pub fn mean_position_of(grid: &GridSpec, origin: [i64; 3], amplitudes: &[Complex64], coin_dim: usize) -> MeanPosition {
    let d = grid.dimension();
    let pos = unwrapped_positions(grid, origin);
    let mut total = 0.0;
    let mut sum = [0.0; 3];
    let mut seam = 0.0;
    for (i, c) in amplitudes.chunks(coin_dim).enumerate() {
        let p: f64 = c.iter().map(|a| a.norm_sqr()).sum();
        if p == 0.0 {
            continue;
        }
        let x = pos(i);
        total += p;
        let mut near_seam = false;
        for a in 0..d {
            sum[a] += p * x[a];
            if (x[a] - origin[a] as f64).abs() > SEAM_FRACTION * grid.period(a) as f64 {
                near_seam = true;
            }
        }
        if near_seam {
            seam += p;
        }
    }
    let mut mean = [0.0; 3];
    if total > 0.0 {
        for a in 0..d {
            mean[a] = sum[a] / total;
        }
    }
    MeanPosition {
        mean,
        valid: total > 0.0 && seam <= SEAM_MASS_LIMIT * total,
    }
}

/// The state in the position domain, borrowed when it already is.
fn position_view(state: &FieldState) -> Result<Cow<'_, FieldState>> {
    Ok(match state.domain() {
        Domain::Position => Cow::Borrowed(state),
        Domain::Momentum => Cow::Owned(state.in_domain(Domain::Position)?),
    })
}

/// `<X>` of a state, evaluated in the position domain.
pub fn mean_position(state: &FieldState) -> Result<MeanPosition> {
    let pos = position_view(state)?;
    Ok(mean_position_of(pos.grid(), pos.origin(), pos.amplitudes(), pos.coin_dim()))
}

/// Per-axis standard deviation of the position distribution.
pub fn position_spread(state: &FieldState) -> Result<[f64; 3]> {
    let pos = position_view(state)?;
    let grid = pos.grid();
    let mean = mean_position_of(grid, pos.origin(), pos.amplitudes(), pos.coin_dim()).mean;
    let at = unwrapped_positions(grid, pos.origin());
    let mut var = [0.0; 3];
    let mut total = 0.0;
    for (i, c) in pos.amplitudes().chunks(pos.coin_dim()).enumerate() {
        let p: f64 = c.iter().map(|a| a.norm_sqr()).sum();
        let x = at(i);
        total += p;
        for a in 0..grid.dimension() {
            var[a] += p * (x[a] - mean[a]).powi(2);
        }
    }
    Ok(var.map(|v| (v / total).sqrt()))
}

/// `sum_x x <a(x)|b(x)>` with unwrapped coordinates.
pub fn position_cross(
    grid: &GridSpec,
    origin: [i64; 3],
    a: &[Complex64],
    b: &[Complex64],
    coin_dim: usize,
) -> [Complex64; 3] {
    let d = grid.dimension();
    let pos = unwrapped_positions(grid, origin);
    let mut out = [ZERO; 3];
    for (i, (ca, cb)) in a.chunks(coin_dim).zip(b.chunks(coin_dim)).enumerate() {
        let inner: Complex64 = ca.iter().zip(cb).map(|(x, y)| x.conj() * y).sum();
        if inner == ZERO {
            continue;
        }
        let x = pos(i);
        for k in 0..d {
            out[k] += inner * x[k];
        }
    }
    out
}

/// Sampled vector observable.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub dimension: usize,
    pub times: Vec<u64>,
    pub values: Vec<[f64; 3]>,
    pub valid: Vec<bool>,
}

impl ObservableSeries {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            ..Self::default()
        }
    }

    pub fn push(&mut self, t: u64, value: [f64; 3], valid: bool) {
        assert!(self.times.last().is_none_or(|&last| t > last), "times must increase");
        self.times.push(t);
        self.values.push(value);
        self.valid.push(valid);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Values of one component.
    pub fn component(&self, axis: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[axis]).collect()
    }

    pub fn times_f64(&self) -> Vec<f64> {
        self.times.iter().map(|&t| t as f64).collect()
    }
}

/// Sample times `0, stride, 2 stride, ...` up to and including `total`.
pub fn sample_times(total: u64, stride: u64) -> Vec<u64> {
    let stride = stride.max(1);
    let mut times: Vec<u64> = (0..=total).step_by(stride as usize).collect();
    if *times.last().unwrap() != total {
        times.push(total);
    }
    times
}

/// `<X>(t)` of the spectrally evolved state, sampled every `stride` steps.
pub fn position_series(state0: &FieldState, total: u64, stride: u64) -> Result<ObservableSeries> {
    let prop = Propagator::new(state0)?;
    let mut series = ObservableSeries::new(state0.grid().dimension());
    for t in sample_times(total, stride) {
        let s = prop.state_at(t, DispersionApprox::Exact)?;
        let m = mean_position_of(s.grid(), s.origin(), s.amplitudes(), s.coin_dim());
        series.push(t, m.mean, m.valid);
    }
    Ok(series)
}

/// Least-squares line `y = slope t + intercept` and the largest absolute residual.
pub fn least_squares_line(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|v| (v - mt).powi(2)).sum();
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mt;
    let resid = t
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).abs())
        .fold(0.0, f64::max);
    (slope, intercept, resid)
}

/// Angular frequency (radians per step) of the largest peak of the
/// discrete-time Fourier transform of the linearly detrended series,
/// scanned on a grid of `resolution` points in `(0, pi]`.
pub fn dominant_frequency(t: &[f64], y: &[f64], resolution: usize) -> f64 {
    let (slope, intercept, _) = least_squares_line(t, y);
    let r: Vec<f64> = t.iter().zip(y).map(|(a, b)| b - slope * a - intercept).collect();
    let mut best = (0.0, 0.0);
    for i in 1..=resolution {
        let w = std::f64::consts::PI * i as f64 / resolution as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (ti, ri) in t.iter().zip(&r) {
            let (s, c) = (w * ti).sin_cos();
            re += ri * c;
            im += ri * s;
        }
        let power = re * re + im * im;
        if power > best.0 {
            best = (power, w);
        }
    }
    best.1
}

/// Per-wave-vector velocity, acceleration and Zitterbewegung operators of a
/// Dirac walk. Components `j >= d` are zero.
#[derive(Clone, Copy, Debug)]
pub struct KinematicOperators {
    pub dimension: usize,
    pub omega: f64,
    pub h: CoinMatrix,
    pub v: [CoinMatrix; 3],
    pub a: [CoinMatrix; 3],
    pub v_hat: [CoinMatrix; 3],
    /// `Z^V(t)`, `Z^X(t)` at the requested time and `Z^X(0)`.
    pub z_v: [CoinMatrix; 3],
    pub z_x: [CoinMatrix; 3],
    pub z_x0: [CoinMatrix; 3],
    /// `f[j][mu][nu] = n~_nu d_j n~_mu - n~_mu d_j n~_nu`.
    pub f: [[[f64; 3]; 3]; 3],
    /// `w[j] = (n3 f13 + n2 f12, -n1 f12 + n3 f23, -n1 f13 + n2 f23)` with `n = n~`.
    pub w: [[f64; 3]; 3],
}

impl KinematicOperators {
    /// `n~_3 f_12 - n~_2 f_13 + n~_1 f_23` for component `j`; vanishes identically.
    pub fn f_identity(&self, n_tilde: [f64; 3], j: usize) -> f64 {
        let f = &self.f[j];
        n_tilde[2] * f[0][1] - n_tilde[1] * f[0][2] + n_tilde[0] * f[1][2]
    }
}

/// `exp(2 i H t) = cos(2wt) I + i sin(2wt) H / w`.
fn double_phase(h: &CoinMatrix, omega: f64, t: f64) -> CoinMatrix {
    let (s, c) = (2.0 * omega * t).sin_cos();
    CoinMatrix::identity(h.dim()).scale_re(c) + h.scale(I * (s / omega))
}

pub fn kinematic_operators(k: &WaveVector, model: &WalkModel, t: f64) -> Result<KinematicOperators> {
    if !model.is_dirac() {
        return Err(QwError::FamilyMismatch { expected: "Dirac" });
    }
    let d = model.dimension();
    let dim = model.coin_dim();
    let (n, m) = (model.n(), model.mass());
    let (cos_w, sin_w) = model.cos_sin(k);
    if sin_w < DEGENERACY_THRESHOLD {
        return Err(QwError::Degenerate {
            kappa: k.0,
            sin_omega: sin_w,
        });
    }
    let omega = sin_w.atan2(cos_w);
    let h = model.interpolating_hamiltonian(k)?;
    let velocity = model.group_velocity(k)?;
    let (_, n_tilde) = weyl_scalars(d, k);
    let (_, dn) = weyl_jacobian(d, k);
    let (_, big_gamma) = model.gammas();
    let gamma = model.spatial_gammas();

    let zero = CoinMatrix::zeros(dim);
    let mut ops = KinematicOperators {
        dimension: d,
        omega,
        h,
        v: [zero; 3],
        a: [zero; 3],
        v_hat: [zero; 3],
        z_v: [zero; 3],
        z_x: [zero; 3],
        z_x0: [zero; 3],
        f: [[[0.0; 3]; 3]; 3],
        w: [[0.0; 3]; 3],
    };
    let c1 = (sin_w - omega * cos_w) / (omega * sin_w);
    let ratio = omega / sin_w;
    let phase_t = double_phase(&h, omega, t);
    let inv_w2 = 1.0 / (omega * omega);
    for j in 0..d {
        let mut dm = zero;
        for i in 0..3 {
            dm = dm + big_gamma[i].scale_re(n * dn[j][i]);
        }
        let v = h.scale_re(c1 * velocity[j]) + dm.scale_re(ratio);

        let mut f = [[0.0; 3]; 3];
        for mu in 0..3 {
            for nu in 0..3 {
                f[mu][nu] = n_tilde[nu] * dn[j][mu] - n_tilde[mu] * dn[j][nu];
            }
        }
        let mut pair = zero;
        for mu in 0..3 {
            for nu in (mu + 1)..3 {
                pair = pair + (gamma[mu] * gamma[nu]).scale_re(f[mu][nu]);
            }
        }
        let mut gdn = zero;
        for i in 0..3 {
            gdn = gdn + gamma[i].scale_re(dn[j][i]);
        }
        let a = (pair.scale_re(n) - gdn.scale_re(m)).scale(I * (2.0 * n * ratio * ratio));

        let zv0 = (h * a).scale(Complex64::new(0.0, -0.5 * inv_w2));
        ops.v[j] = v;
        ops.a[j] = a;
        ops.v_hat[j] = v - zv0;
        ops.z_v[j] = (h * phase_t * a).scale(Complex64::new(0.0, -0.5 * inv_w2));
        ops.z_x[j] = (phase_t * a).scale_re(-0.25 * inv_w2);
        ops.z_x0[j] = a.scale_re(-0.25 * inv_w2);
        ops.f[j] = f;
        let nt = n_tilde;
        ops.w[j] = [
            nt[2] * f[0][2] + nt[1] * f[0][1],
            -nt[0] * f[0][1] + nt[2] * f[1][2],
            -nt[0] * f[0][2] + nt[1] * f[1][2],
        ];
    }
    Ok(ops)
}

/// Mean position split into the two classical branch terms and the
/// interference term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub time: u64,
    pub x_plus: [f64; 3],
    pub x_minus: [f64; 3],
    pub x_int: [f64; 3],
    /// Mass on degenerate slots, which are left out of the slot sums.
    pub degenerate_mass: f64,
    pub valid: bool,
}

impl Decomposition {
    pub fn total(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for a in 0..3 {
            out[a] = self.x_plus[a] + self.x_minus[a] + self.x_int[a];
        }
        out
    }
}

/// Per-slot sums entering the decomposition.
#[derive(Clone)]
struct SlotSums {
    v_plus: [f64; 3],
    v_minus: [f64; 3],
    z0: [Complex64; 3],
    zt: Vec<[Complex64; 3]>,
    degenerate_mass: f64,
}

impl SlotSums {
    fn new(times: usize) -> Self {
        Self {
            v_plus: [0.0; 3],
            v_minus: [0.0; 3],
            z0: [ZERO; 3],
            zt: vec![[ZERO; 3]; times],
            degenerate_mass: 0.0,
        }
    }

    fn add(&mut self, o: &SlotSums) {
        for a in 0..3 {
            self.v_plus[a] += o.v_plus[a];
            self.v_minus[a] += o.v_minus[a];
            self.z0[a] += o.z0[a];
        }
        for (x, y) in self.zt.iter_mut().zip(&o.zt) {
            for a in 0..3 {
                x[a] += y[a];
            }
        }
        self.degenerate_mass += o.degenerate_mass;
    }
}

/// Positive- and negative-frequency parts of a propagator's state at time 0,
/// in the momentum domain.
fn frequency_parts(prop: &Propagator) -> Result<(FieldState, FieldState)> {
    let model = *prop.model();
    let plus: Vec<usize> = model
        .branches()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.s > 0)
        .map(|(i, _)| i)
        .collect();
    let minus: Vec<usize> = (0..model.coin_dim()).filter(|i| !plus.contains(i)).collect();
    let part = |keep: &[usize]| -> Result<FieldState> {
        let mut amplitudes = vec![ZERO; prop.coefficients().len()];
        let s = model.coin_dim();
        let grid = prop.grid();
        amplitudes.par_chunks_mut(s).enumerate().for_each(|(slot, out)| {
            let c = &prop.coefficients()[slot * s..(slot + 1) * s];
            if keep.iter().all(|&r| c[r] == ZERO) {
                return;
            }
            let es = model.eigensystem(&grid.wavevector_unchecked(slot));
            for &r in keep {
                for (o, e) in out.iter_mut().zip(es.eigenvectors[r].as_slice()) {
                    *o += c[r] * e;
                }
            }
        });
        FieldState::new(grid.clone(), model, Domain::Momentum, amplitudes)
    };
    Ok((part(&plus)?, part(&minus)?))
}

/// `x+(t)`, `x-(t)` and `x_int(t)` for each requested time, for the state
/// evolved from `state` (taken as time 0).
pub fn decomposition_series(state: &FieldState, times: &[u64]) -> Result<Vec<Decomposition>> {
    let model = *state.model();
    if !model.is_dirac() {
        return Err(QwError::FamilyMismatch { expected: "Dirac" });
    }
    let prop = Propagator::new(state)?;
    let grid = prop.grid().clone();
    let d = grid.dimension();
    let s = model.coin_dim();
    let (plus_k, minus_k) = frequency_parts(&prop)?;
    let plus_x = plus_k.in_domain_with(Domain::Position, prop.plan())?;
    let minus_x = minus_k.in_domain_with(Domain::Position, prop.plan())?;
    let origin = state.origin();
    let x_pp = position_cross(&grid, origin, plus_x.amplitudes(), plus_x.amplitudes(), s);
    let x_mm = position_cross(&grid, origin, minus_x.amplitudes(), minus_x.amplitudes(), s);
    let x_pm = position_cross(&grid, origin, plus_x.amplitudes(), minus_x.amplitudes(), s);
    let validity = mean_position_of(&grid, origin, position_view(state)?.amplitudes(), s).valid;

    let slots = grid.slot_count();
    let chunks: Vec<SlotSums> = (0..slots.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut acc = SlotSums::new(times.len());
            for slot in chunk * CHUNK..((chunk + 1) * CHUNK).min(slots) {
                let p = CoinVector::from_slice(&plus_k.amplitudes()[slot * s..(slot + 1) * s]);
                let q = CoinVector::from_slice(&minus_k.amplitudes()[slot * s..(slot + 1) * s]);
                let mass = p.norm_sqr() + q.norm_sqr();
                if mass == 0.0 {
                    continue;
                }
                let k = grid.wavevector_unchecked(slot);
                let ops = match kinematic_operators(&k, &model, 0.0) {
                    Ok(o) => o,
                    Err(_) => {
                        acc.degenerate_mass += mass;
                        continue;
                    }
                };
                let aq: Vec<CoinVector> = (0..d).map(|j| ops.a[j].mul_vec(&q)).collect();
                for j in 0..d {
                    acc.v_plus[j] += ops.v_hat[j].sandwich(&p, &p).re;
                    acc.v_minus[j] += ops.v_hat[j].sandwich(&q, &q).re;
                    acc.z0[j] += ops.z_x0[j].sandwich(&p, &q);
                }
                let pref = -0.25 / (ops.omega * ops.omega);
                for (ti, &t) in times.iter().enumerate() {
                    let e = double_phase(&ops.h, ops.omega, t as f64);
                    let ep = e.adjoint().mul_vec(&p);
                    for j in 0..d {
                        acc.zt[ti][j] += ep.dot(&aq[j]) * pref;
                    }
                }
            }
            acc
        })
        .collect();
    let mut sums = SlotSums::new(times.len());
    for c in &chunks {
        sums.add(c);
    }

    Ok(times
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let tf = t as f64;
            let mut out = Decomposition {
                time: state.time() + t,
                x_plus: [0.0; 3],
                x_minus: [0.0; 3],
                x_int: [0.0; 3],
                degenerate_mass: sums.degenerate_mass,
                valid: validity && sums.degenerate_mass <= 1e-10,
            };
            for j in 0..d {
                out.x_plus[j] = x_pp[j].re + tf * sums.v_plus[j];
                out.x_minus[j] = x_mm[j].re + tf * sums.v_minus[j];
                out.x_int[j] = 2.0 * (x_pm[j] - sums.z0[j] + sums.zt[ti][j]).re;
            }
            out
        })
        .collect())
}

pub fn mean_position_decomposition(state: &FieldState, t: u64) -> Result<Decomposition> {
    Ok(decomposition_series(state, &[t])?.remove(0))
}

/// `<X>` in the Foldy-Wouthuysen frame: the mean position of the branch
/// coefficient field `c_r(k, t) = exp(-i s_r w t) <u_r(k)|psi^(k)>`.
pub fn newton_wigner_series(state: &FieldState, times: &[u64]) -> Result<Vec<MeanPosition>> {
    let model = *state.model();
    if !model.is_dirac() {
        return Err(QwError::FamilyMismatch { expected: "Dirac" });
    }
    let prop = Propagator::new(state)?;
    let s = model.coin_dim();
    let signs: Vec<f64> = model.branches().iter().map(|b| b.s as f64).collect();
    times
        .iter()
        .map(|&t| {
            let mut amplitudes = prop.coefficients().to_vec();
            amplitudes
                .par_chunks_mut(s)
                .zip(prop.omega().par_iter())
                .for_each(|(c, w)| {
                    for (r, v) in c.iter_mut().enumerate() {
                        *v *= Complex64::from_polar(1.0, -signs[r] * w * t as f64);
                    }
                });
            prop.plan().inverse(&mut amplitudes, s)?;
            Ok(mean_position_of(prop.grid(), state.origin(), &amplitudes, s))
        })
        .collect()
}

pub fn newton_wigner_mean(state: &FieldState, t: u64) -> Result<MeanPosition> {
    Ok(newton_wigner_series(state, &[t])?.remove(0))
}

/// `<psi| V_j |psi>` for a Dirac state, evaluated slot-wise.
pub fn velocity_expectation(state: &FieldState) -> Result<[f64; 3]> {
    let momentum = state.in_domain(Domain::Momentum)?;
    let grid = momentum.grid();
    let model = *momentum.model();
    let s = model.coin_dim();
    let mut out = [0.0; 3];
    for slot in 0..grid.slot_count() {
        let psi = momentum.coin_at(slot);
        if psi.norm_sqr() == 0.0 {
            continue;
        }
        let ops = kinematic_operators(&grid.wavevector_unchecked(slot), &model, 0.0)?;
        for j in 0..grid.dimension() {
            out[j] += ops.v[j].sandwich(&psi, &psi).re;
        }
    }
    let _ = s;
    Ok(out)
}

/// `<[X_i, P_j]> = i (1 - boundary) delta_ij`, where `boundary` averages the
/// spectral density of the wave-vector component `k_i` at the two values
/// nearest `-pi` and `+pi`. The density of a value is its marginal
/// probability times the number of distinct values on the axis. BCC slots
/// are binned by their family label, which spreads a localized state
/// uniformly over the `2N` values of each axis.
pub fn commutator_expectation(state: &FieldState, i: usize, j: usize) -> Result<Complex64> {
    let d = state.grid().dimension();
    for axis in [i, j] {
        if axis >= d {
            return Err(QwError::BadAxis { axis, dimension: d });
        }
    }
    if i != j {
        return Ok(ZERO);
    }
    let momentum = state.in_domain(Domain::Momentum)?;
    let grid = momentum.grid();
    let s = momentum.coin_dim();
    let total = momentum.norm_sqr();
    // Bin slots by the per-axis wave-vector component, in units of pi / N.
    let scale = grid.period(i) as f64 / (2.0 * std::f64::consts::PI);
    let mut bins: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
    for slot in 0..grid.slot_count() {
        let k = wrap_angle(grid.family_label(slot).0[i]);
        let key = (k * scale).round() as i64;
        let p: f64 = momentum.amplitudes()[slot * s..(slot + 1) * s]
            .iter()
            .map(|a| a.norm_sqr())
            .sum();
        *bins.entry(key).or_default() += p / total;
    }
    let values = bins.len() as f64;
    let nearest = |target: f64| {
        bins.iter()
            .min_by(|a, b| {
                let da = wrap_angle(*a.0 as f64 / scale - target).abs();
                let db = wrap_angle(*b.0 as f64 / scale - target).abs();
                da.total_cmp(&db)
            })
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    };
    let pi = std::f64::consts::PI;
    let boundary = 0.5 * values * (nearest(-pi) + nearest(pi));
    Ok(Complex64::new(0.0, 1.0 - boundary))
}
