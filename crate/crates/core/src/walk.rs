//! Weyl and Dirac walk unitaries in the wave-vector representation.
//!
//! Every model is written as
//!
//! ```text
//! U_k = n u_k I - i n Gamma . n~_k + i m Gamma_0 = cos(w_k) I - i M_k
//! M_k = n Gamma . n~_k - m Gamma_0,      M_k^2 = sin^2(w_k) I
//! ```
//!
//! with `u_k^2 + |n~_k|^2 = 1`. Weyl walks use `Gamma_i = sigma_i`, `m = 0`.
//! The 4-component Dirac walks use the spinorial representation
//! `gamma^0 = offdiag(I, I)`, `gamma^i = (0, -sigma_i; sigma_i, 0)`, so that
//! `Gamma_i = gamma^0 gamma^i = diag(sigma_i, -sigma_i)` and `Gamma_0 = gamma^0`.
//! The 1D Dirac walk uses `Gamma_z = sigma_z`, `Gamma_0 = sigma_x`.
//!
//! Grid axes: d=1 and d=3 evaluate the closed forms at the wave-vector
//! itself. For d=2 the grid axes are the generator axes `(k1, k2)` and the
//! walk is evaluated at `kx = (k1 + k2)/2`, `ky = (k1 - k2)/2`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coin::{CoinMatrix, CoinVector, MAX_COIN};
use crate::error::{QwError, Result};
use crate::lattice::{LatticeKind, WaveVector};

/// Below this value of `sin w` the closed-form eigenvectors are 0/0.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// Finite-difference step for the Hessian of the dispersion.
pub const HESSIAN_STEP: f64 = 1e-4;

/// Finite-difference step for third derivatives of the dispersion.
pub const THIRD_DERIVATIVE_STEP: f64 = 1e-3;

pub type WalkMatrix = CoinMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WalkFamily {
    Weyl,
    Dirac,
}

/// A walk family in a given dimension, with its mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct WalkModel {
    family: WalkFamily,
    dimension: usize,
    mass: f64,
    n: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    family: WalkFamily,
    dimension: usize,
    #[serde(default)]
    mass: f64,
}

impl TryFrom<ModelRepr> for WalkModel {
    type Error = QwError;
    fn try_from(r: ModelRepr) -> Result<Self> {
        match r.family {
            WalkFamily::Weyl if r.mass != 0.0 => Err(QwError::InvalidParameter(
                "Weyl walks are massless".into(),
            )),
            WalkFamily::Weyl => WalkModel::weyl(r.dimension),
            WalkFamily::Dirac => WalkModel::dirac(r.dimension, r.mass),
        }
    }
}

impl From<WalkModel> for ModelRepr {
    fn from(m: WalkModel) -> Self {
        ModelRepr {
            family: m.family,
            dimension: m.dimension,
            mass: m.mass,
        }
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(QwError::InvalidParameter(format!(
            "dimension must be 1, 2 or 3, got {d}"
        )));
    }
    Ok(())
}

impl WalkModel {
    pub fn weyl(dimension: usize) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(Self {
            family: WalkFamily::Weyl,
            dimension,
            mass: 0.0,
            n: 1.0,
        })
    }

    /// Dirac walk with mass `m` in `[0, 1]` (`m = 1` freezes transport).
    pub fn dirac(dimension: usize, mass: f64) -> Result<Self> {
        check_dimension(dimension)?;
        if !(0.0..=1.0).contains(&mass) {
            return Err(QwError::InvalidParameter(format!(
                "mass must lie in [0, 1], got {mass}"
            )));
        }
        Ok(Self {
            family: WalkFamily::Dirac,
            dimension,
            mass,
            n: (1.0 - mass * mass).sqrt(),
        })
    }

    pub fn family(&self) -> WalkFamily {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `n = sqrt(1 - m^2)`.
    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn is_dirac(&self) -> bool {
        self.family == WalkFamily::Dirac
    }

    pub fn coin_dim(&self) -> usize {
        if self.is_dirac() && self.dimension > 1 {
            4
        } else {
            2
        }
    }

    pub fn lattice_kind(&self) -> LatticeKind {
        if self.dimension == 3 {
            LatticeKind::Bcc
        } else {
            LatticeKind::SimpleCubic
        }
    }

    /// Branch labels in storage order. Two-component walks have `s = +, -`;
    /// four-component walks `(s, p) = (+,+), (+,-), (-,+), (-,-)`.
    pub fn branches(&self) -> Vec<Branch> {
        if self.coin_dim() == 4 {
            vec![
                Branch { s: 1, p: 1 },
                Branch { s: 1, p: -1 },
                Branch { s: -1, p: 1 },
                Branch { s: -1, p: -1 },
            ]
        } else {
            vec![Branch { s: 1, p: 0 }, Branch { s: -1, p: 0 }]
        }
    }

    /// Storage index of a branch label.
    pub fn branch_index(&self, branch: Branch) -> Result<usize> {
        self.branches()
            .iter()
            .position(|b| *b == branch)
            .ok_or_else(|| QwError::InvalidParameter(format!("no branch {branch:?} for this walk")))
    }

    /// Coin-space matrices `(Gamma_0, [Gamma_x, Gamma_y, Gamma_z])`.
    pub fn gammas(&self) -> (CoinMatrix, [CoinMatrix; 3]) {
        let (sx, sy, sz) = (
            CoinMatrix::pauli_x(),
            CoinMatrix::pauli_y(),
            CoinMatrix::pauli_z(),
        );
        match (self.family, self.coin_dim()) {
            (WalkFamily::Weyl, _) => (CoinMatrix::zeros(2), [sx, sy, sz]),
            (WalkFamily::Dirac, 2) => (sx, [CoinMatrix::zeros(2), CoinMatrix::zeros(2), sz]),
            _ => {
                let z = CoinMatrix::zeros(2);
                let id = CoinMatrix::identity(2);
                let diag = |s: &CoinMatrix| CoinMatrix::from_blocks(s, &z, &z, &s.scale_re(-1.0));
                (
                    CoinMatrix::from_blocks(&z, &id, &id, &z),
                    [diag(&sx), diag(&sy), diag(&sz)],
                )
            }
        }
    }

    /// Spatial gamma matrices `gamma^i` (Dirac only).
    pub fn spatial_gammas(&self) -> [CoinMatrix; 3] {
        let (g0, big) = self.gammas();
        // gamma^i = gamma^0 Gamma_i since (gamma^0)^2 = I.
        [g0 * big[0], g0 * big[1], g0 * big[2]]
    }

    /// Walk unitary at wave-vector `k`.
    pub fn unitary(&self, k: &WaveVector) -> WalkMatrix {
        let p = weyl_point(self.dimension, k);
        let (g0, g) = self.gammas();
        let s = self.coin_dim();
        let mut out = CoinMatrix::identity(s).scale_re(self.n * p.u);
        for (gi, ni) in g.iter().zip(p.n_tilde) {
            out = out - gi.scale(I * (self.n * ni));
        }
        out + g0.scale(I * self.mass)
    }

    /// `M_k = n Gamma . n~ - m Gamma_0`, so that `U = cos w - i M`.
    pub fn generator(&self, k: &WaveVector) -> CoinMatrix {
        let p = weyl_point(self.dimension, k);
        let (g0, g) = self.gammas();
        let mut out = g0.scale_re(-self.mass);
        for (gi, ni) in g.iter().zip(p.n_tilde) {
            out = out + gi.scale_re(self.n * ni);
        }
        out
    }

    /// `(cos w, sin w)` at `k`.
    pub fn cos_sin(&self, k: &WaveVector) -> (f64, f64) {
        let p = weyl_point(self.dimension, k);
        let nt2: f64 = p.n_tilde.iter().map(|x| x * x).sum();
        (
            self.n * p.u,
            (self.mass * self.mass + self.n * self.n * nt2).sqrt(),
        )
    }

    pub fn dispersion(&self, k: &WaveVector) -> f64 {
        let (c, s) = self.cos_sin(k);
        s.atan2(c)
    }

    /// Gradient of the dispersion, padded with zeros beyond the dimension.
    pub fn group_velocity(&self, k: &WaveVector) -> Result<[f64; 3]> {
        let (_, s) = self.cos_sin(k);
        if s < DEGENERACY_THRESHOLD {
            return Err(degenerate(k, s));
        }
        let (grad_u, _) = weyl_jacobian(self.dimension, k);
        let mut v = [0.0; 3];
        for (vi, gi) in v.iter_mut().zip(grad_u).take(self.dimension) {
            *vi = -self.n * gi / s;
        }
        Ok(v)
    }

    /// Hessian of the dispersion from central differences of the gradient.
    /// Entry `[i][j]` is `d_j v_i`.
    pub fn diffusion_tensor(&self, k: &WaveVector) -> Result<[[f64; 3]; 3]> {
        self.group_velocity(k)?;
        let h = HESSIAN_STEP;
        let mut out = [[0.0; 3]; 3];
        for j in 0..self.dimension {
            let plus = self.group_velocity(&k.shifted(j, h))?;
            let minus = self.group_velocity(&k.shifted(j, -h))?;
            for i in 0..self.dimension {
                out[i][j] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        Ok(out)
    }

    /// Partial derivative `d^alpha w` for `1 <= |alpha| <= 3`: analytic for
    /// first order, finite differences of the analytic gradient above that.
    pub fn dispersion_derivative(&self, k: &WaveVector, alpha: [usize; 3]) -> Result<f64> {
        let order: usize = alpha.iter().sum();
        if order == 0 || order > 3 || (self.dimension..3).any(|a| alpha[a] > 0) {
            return Err(QwError::InvalidParameter(format!(
                "unsupported derivative multi-index {alpha:?}"
            )));
        }
        // Differentiate the gradient component `i` along the remaining axes.
        let i = alpha.iter().position(|&a| a > 0).unwrap_or(0);
        let mut rest = alpha;
        rest[i] -= 1;
        let axes: Vec<usize> = (0..3).flat_map(|a| std::iter::repeat_n(a, rest[a])).collect();
        let g = |q: &WaveVector| self.group_velocity(q).map(|v| v[i]);
        match axes.as_slice() {
            [] => g(k),
            [a] => {
                let h = HESSIAN_STEP;
                Ok((g(&k.shifted(*a, h))? - g(&k.shifted(*a, -h))?) / (2.0 * h))
            }
            [a, b] if a == b => {
                let h = THIRD_DERIVATIVE_STEP;
                Ok((g(&k.shifted(*a, h))? - 2.0 * g(k)? + g(&k.shifted(*a, -h))?) / (h * h))
            }
            [a, b] => {
                let h = THIRD_DERIVATIVE_STEP;
                let at = |sa: f64, sb: f64| g(&k.shifted(*a, sa * h).shifted(*b, sb * h));
                Ok((at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?)
                    / (4.0 * h * h))
            }
            _ => unreachable!(),
        }
    }

    /// Interpolating Hamiltonian `H = (w / sin w) M` with `exp(-iH) = U`.
    pub fn interpolating_hamiltonian(&self, k: &WaveVector) -> Result<CoinMatrix> {
        let (c, s) = self.cos_sin(k);
        if s < DEGENERACY_THRESHOLD {
            return Err(degenerate(k, s));
        }
        Ok(self.generator(k).scale_re(s.atan2(c) / s))
    }

    /// Eigenvalues, eigenvectors and auxiliary scalars at `k`.
    pub fn eigensystem(&self, k: &WaveVector) -> SpectrumSlot {
        let p = weyl_point(self.dimension, k);
        let (cos_w, sin_w) = self.cos_sin(k);
        let omega = sin_w.atan2(cos_w);
        let nt2: f64 = p.n_tilde.iter().map(|x| x * x).sum();
        let nt = nt2.sqrt();
        let z = Complex64::new(p.u, -p.n_tilde[2]);
        let w = Complex64::new(p.n_tilde[1], -p.n_tilde[0]);
        let transverse = p.n_tilde[0] * p.n_tilde[0] + p.n_tilde[1] * p.n_tilde[1];
        let (v_weyl, phi, weyl_perp) = if nt > 0.0 {
            (-p.n_tilde[2] / nt, w.arg() - FRAC_PI_2, transverse / nt2)
        } else {
            (0.0, 0.0, 1.0)
        };
        let v_dirac = if sin_w > 0.0 { self.n * nt / sin_w } else { 0.0 };
        let mut slot = SpectrumSlot {
            kappa: *k,
            omega,
            sin_omega: sin_w,
            u: p.u,
            n_tilde: p.n_tilde,
            z,
            w,
            phi,
            v_weyl,
            v_dirac,
            signs: [0; MAX_COIN],
            eigenvectors: [CoinVector::zeros(self.coin_dim()); MAX_COIN],
            degenerate: sin_w < DEGENERACY_THRESHOLD,
        };
        for (i, b) in self.branches().iter().enumerate() {
            slot.signs[i] = b.s;
        }
        if slot.degenerate {
            slot.eigenvectors = dense_eigenvectors(&self.generator(k));
            return slot;
        }
        let e_phi = Complex64::from_polar(1.0, phi);
        match (self.family, self.coin_dim()) {
            (WalkFamily::Weyl, _) => {
                let (minus, plus) = sqrt_pair(v_weyl, weyl_perp);
                for (i, s) in [1.0, -1.0].into_iter().enumerate() {
                    let (a, b) = if s > 0.0 { (minus, plus) } else { (plus, minus) };
                    slot.eigenvectors[i] = CoinVector::from_slice(&[
                        Complex64::new(a * std::f64::consts::FRAC_1_SQRT_2, 0.0),
                        e_phi * (-s * b * std::f64::consts::FRAC_1_SQRT_2),
                    ]);
                }
            }
            (WalkFamily::Dirac, 2) => {
                let v = self.n * p.n_tilde[2] / sin_w;
                let perp = (self.mass / sin_w).powi(2);
                let (minus, plus) = sqrt_pair(v, perp);
                let h = std::f64::consts::FRAC_1_SQRT_2;
                slot.eigenvectors[0] =
                    CoinVector::from_slice(&[Complex64::new(plus * h, 0.0), Complex64::new(-minus * h, 0.0)]);
                slot.eigenvectors[1] =
                    CoinVector::from_slice(&[Complex64::new(minus * h, 0.0), Complex64::new(plus * h, 0.0)]);
            }
            _ => {
                let (w_minus, w_plus) = sqrt_pair(v_weyl, weyl_perp);
                let (d_minus, d_plus) = sqrt_pair(v_dirac, (self.mass / sin_w).powi(2));
                for (i, b) in self.branches().iter().enumerate() {
                    let (s, pp) = (b.s as f64, b.p as f64);
                    // sqrt(1 - p vW), sqrt(1 + p vW)
                    let (a_w, b_w) = if pp > 0.0 { (w_minus, w_plus) } else { (w_plus, w_minus) };
                    // sqrt(1 + sp vD), sqrt(1 - sp vD)
                    let (a_d, b_d) = if s * pp > 0.0 { (d_plus, d_minus) } else { (d_minus, d_plus) };
                    slot.eigenvectors[i] = CoinVector::from_slice(&[
                        Complex64::new(0.5 * a_w * a_d, 0.0),
                        e_phi * (-0.5 * pp * b_w * a_d),
                        Complex64::new(-0.5 * s * a_w * b_d, 0.0),
                        e_phi * (0.5 * s * pp * b_w * b_d),
                    ]);
                }
            }
        }
        slot
    }
}

/// Branch label: frequency sign `s` and, for 4-component walks, the
/// helicity-like label `p` (zero otherwise).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub s: i8,
    pub p: i8,
}

impl Branch {
    pub const POSITIVE: Branch = Branch { s: 1, p: 0 };
    pub const NEGATIVE: Branch = Branch { s: -1, p: 0 };
}

/// Per-wave-vector spectral data of the walk unitary.
#[derive(Clone, Copy, Debug)]
pub struct SpectrumSlot {
    pub kappa: WaveVector,
    /// Dispersion `w` in `[0, pi]`.
    pub omega: f64,
    pub sin_omega: f64,
    pub u: f64,
    pub n_tilde: [f64; 3],
    pub z: Complex64,
    pub w: Complex64,
    pub phi: f64,
    pub v_weyl: f64,
    pub v_dirac: f64,
    /// Frequency sign per branch; branch `r` has eigenvalue `exp(-i s_r w)`.
    pub signs: [i8; MAX_COIN],
    pub eigenvectors: [CoinVector; MAX_COIN],
    /// True when the dense fallback produced the eigenvectors.
    pub degenerate: bool,
}

impl SpectrumSlot {
    pub fn branch_count(&self) -> usize {
        self.eigenvectors[0].dim()
    }

    pub fn eigenvalue(&self, branch: usize) -> Complex64 {
        Complex64::from_polar(1.0, -(self.signs[branch] as f64) * self.omega)
    }

    pub fn frequency(&self, branch: usize) -> f64 {
        self.signs[branch] as f64 * self.omega
    }
}

/// `(sqrt(1 - v), sqrt(1 + v))` given `1 - v^2` computed without cancellation.
fn sqrt_pair(v: f64, one_minus_v_sq: f64) -> (f64, f64) {
    if v >= 0.0 {
        let plus = 1.0 + v;
        ((one_minus_v_sq / plus).sqrt(), plus.sqrt())
    } else {
        let minus = 1.0 - v;
        (minus.sqrt(), (one_minus_v_sq / minus).sqrt())
    }
}

/// Orthonormal eigenvectors of a Hermitian generator, eigenvalues descending,
/// each with its first nonzero component real positive.
fn dense_eigenvectors(m: &CoinMatrix) -> [CoinVector; MAX_COIN] {
    let dim = m.dim();
    let eig = m.to_dmatrix().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out = [CoinVector::zeros(dim); MAX_COIN];
    for (slot, &idx) in order.iter().enumerate() {
        let col: Vec<Complex64> = (0..dim).map(|r| eig.eigenvectors[(r, idx)]).collect();
        let mut v = CoinVector::from_slice(&col);
        let norm = v.norm();
        v = v.scale(Complex64::new(1.0 / norm, 0.0));
        v.fix_phase();
        out[slot] = v;
    }
    out
}

fn degenerate(k: &WaveVector, sin_omega: f64) -> QwError {
    QwError::Degenerate {
        kappa: k.0,
        sin_omega,
    }
}

/// Massless walk data `u_k`, `n~_k` at a grid wave-vector.
#[derive(Clone, Copy, Debug)]
struct WeylPoint {
    u: f64,
    n_tilde: [f64; 3],
}

fn weyl_point(d: usize, k: &WaveVector) -> WeylPoint {
    let [k1, k2, k3] = k.0;
    match d {
        1 => WeylPoint {
            u: k1.cos(),
            n_tilde: [0.0, 0.0, k1.sin()],
        },
        2 => {
            let (s1, c1) = k1.sin_cos();
            let (s2, c2) = k2.sin_cos();
            WeylPoint {
                u: 0.5 * (c1 + c2),
                n_tilde: [0.5 * (s1 + s2), 0.5 * (s1 - s2), 0.5 * (c2 - c1)],
            }
        }
        _ => {
            let (sx, cx) = k1.sin_cos();
            let (sy, cy) = k2.sin_cos();
            let (sz, cz) = k3.sin_cos();
            WeylPoint {
                u: cx * cy * cz + sx * sy * sz,
                n_tilde: [
                    sx * cy * cz - cx * sy * sz,
                    cx * sy * cz + sx * cy * sz,
                    cx * cy * sz - sx * sy * cz,
                ],
            }
        }
    }
}

/// `(grad u, [d_1 n~, d_2 n~, d_3 n~])` along the grid axes.
pub fn weyl_jacobian(d: usize, k: &WaveVector) -> ([f64; 3], [[f64; 3]; 3]) {
    let [k1, k2, k3] = k.0;
    match d {
        1 => {
            let (s, c) = k1.sin_cos();
            ([-s, 0.0, 0.0], [[0.0, 0.0, c], [0.0; 3], [0.0; 3]])
        }
        2 => {
            let (s1, c1) = k1.sin_cos();
            let (s2, c2) = k2.sin_cos();
            (
                [-0.5 * s1, -0.5 * s2, 0.0],
                [
                    [0.5 * c1, 0.5 * c1, 0.5 * s1],
                    [0.5 * c2, -0.5 * c2, -0.5 * s2],
                    [0.0; 3],
                ],
            )
        }
        _ => {
            let (sx, cx) = k1.sin_cos();
            let (sy, cy) = k2.sin_cos();
            let (sz, cz) = k3.sin_cos();
            (
                [
                    -sx * cy * cz + cx * sy * sz,
                    -cx * sy * cz + sx * cy * sz,
                    -cx * cy * sz + sx * sy * cz,
                ],
                [
                    [
                        cx * cy * cz + sx * sy * sz,
                        -sx * sy * cz + cx * cy * sz,
                        -sx * cy * sz - cx * sy * cz,
                    ],
                    [
                        -sx * sy * cz - cx * cy * sz,
                        cx * cy * cz - sx * sy * sz,
                        -cx * sy * sz - sx * cy * cz,
                    ],
                    [
                        -sx * cy * sz - cx * sy * cz,
                        -cx * sy * sz + sx * cy * cz,
                        cx * cy * cz + sx * sy * sz,
                    ],
                ],
            )
        }
    }
}

/// `u_k` and `n~_k` at a grid wave-vector.
pub fn weyl_scalars(d: usize, k: &WaveVector) -> (f64, [f64; 3]) {
    let p = weyl_point(d, k);
    (p.u, p.n_tilde)
}

pub fn weyl_unitary(k: &WaveVector, model: &WalkModel) -> Result<WalkMatrix> {
    if model.is_dirac() {
        return Err(QwError::FamilyMismatch { expected: "Weyl" });
    }
    Ok(model.unitary(k))
}

/// Dirac walk in the block form `(n W, i m; i m, n W^dag)` (d = 2, 3) or
/// `(n e^{-ik}, i m; i m, n e^{ik})` (d = 1).
pub fn dirac_unitary(k: &WaveVector, model: &WalkModel) -> Result<WalkMatrix> {
    if !model.is_dirac() {
        return Err(QwError::FamilyMismatch { expected: "Dirac" });
    }
    let (n, m) = (model.n(), model.mass());
    let im = Complex64::new(0.0, m);
    if model.dimension() == 1 {
        let k1 = k.0[0];
        return Ok(CoinMatrix::from_rows(
            2,
            &[Complex64::from_polar(n, -k1), im, im, Complex64::from_polar(n, k1)],
        ));
    }
    let weyl = WalkModel::weyl(model.dimension())?.unitary(k);
    let mass = CoinMatrix::identity(2).scale(im);
    Ok(CoinMatrix::from_blocks(
        &weyl.scale_re(n),
        &mass,
        &mass,
        &weyl.adjoint().scale_re(n),
    ))
}

/// Dirac walk from the gamma-matrix form `n u I - i n gamma^0 gamma . n~ + i m gamma^0`.
pub fn dirac_unitary_gamma(k: &WaveVector, model: &WalkModel) -> Result<WalkMatrix> {
    if !model.is_dirac() {
        return Err(QwError::FamilyMismatch { expected: "Dirac" });
    }
    let (u, nt) = weyl_scalars(model.dimension(), k);
    let (g0, _) = model.gammas();
    let g = model.spatial_gammas();
    let n = model.n();
    let mut out = CoinMatrix::identity(model.coin_dim()).scale_re(n * u);
    for (gi, ni) in g.iter().zip(nt) {
        out = out - (g0 * *gi).scale(I * (n * ni));
    }
    Ok(out + g0.scale(I * model.mass()))
}

pub fn dispersion(k: &WaveVector, model: &WalkModel) -> f64 {
    model.dispersion(k)
}

pub fn eigensystem(k: &WaveVector, model: &WalkModel) -> SpectrumSlot {
    model.eigensystem(k)
}

pub fn interpolating_hamiltonian(k: &WaveVector, model: &WalkModel) -> Result<CoinMatrix> {
    model.interpolating_hamiltonian(k)
}

pub fn group_velocity(k: &WaveVector, model: &WalkModel) -> Result<[f64; 3]> {
    model.group_velocity(k)
}

pub fn diffusion_tensor(k: &WaveVector, model: &WalkModel) -> Result<[[f64; 3]; 3]> {
    model.diffusion_tensor(k)
}

/// Position-space transition matrices `U_h` with `U_k = sum_h exp(-i k.h) U_h`.
#[derive(Clone, Debug)]
pub struct TransitionSet {
    pub dimension: usize,
    pub coin_dim: usize,
    pub terms: Vec<([i64; 3], CoinMatrix)>,
}

/// Samples per axis when extracting transition matrices; the walks only
/// contain frequencies in `{-1, 0, 1}`.
const TRANSITION_SAMPLES: usize = 4;

pub fn transition_matrices(model: &WalkModel) -> TransitionSet {
    let d = model.dimension();
    let s = model.coin_dim();
    let m = TRANSITION_SAMPLES;
    let total = m.pow(d as u32);
    let samples: Vec<(WaveVector, CoinMatrix)> = (0..total)
        .map(|idx| {
            let mut k = [0.0; 3];
            let mut rem = idx;
            for ka in k.iter_mut().take(d) {
                *ka = 2.0 * std::f64::consts::PI * (rem % m) as f64 / m as f64;
                rem /= m;
            }
            let k = WaveVector(k);
            (k, model.unitary(&k))
        })
        .collect();
    let mut terms = Vec::new();
    let reach = |a: usize| if a < d { -1..=1i64 } else { 0..=0 };
    for h0 in reach(0) {
        for h1 in reach(1) {
            for h2 in reach(2) {
                let h = [h0, h1, h2];
                let mut acc = CoinMatrix::zeros(s);
                for (k, u) in &samples {
                    let phase = Complex64::from_polar(1.0 / total as f64, k.dot_position(&h));
                    acc = acc + u.scale(phase);
                }
                // Clean sampling round-off so exact zeros stay exact.
                for r in 0..s {
                    for c in 0..s {
                        let v = acc[(r, c)];
                        acc[(r, c)] = Complex64::new(snap(v.re), snap(v.im));
                    }
                }
                if acc.max_abs() > 1e-13 {
                    terms.push((h, acc));
                }
            }
        }
    }
    TransitionSet {
        dimension: d,
        coin_dim: s,
        terms,
    }
}

fn snap(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        0.0
    } else {
        x
    }
}

impl TransitionSet {
    /// `sum_h exp(-i k.h) U_h`.
    pub fn reconstruct(&self, k: &WaveVector) -> CoinMatrix {
        self.terms.iter().fold(CoinMatrix::zeros(self.coin_dim), |acc, (h, u)| {
            acc + u.scale(Complex64::from_polar(1.0, -k.dot_position(h)))
        })
    }

    pub fn get(&self, h: [i64; 3]) -> Option<&CoinMatrix> {
        self.terms.iter().find(|(g, _)| *g == h).map(|(_, u)| u)
    }

    /// Largest residual over the unitarity conditions: for every shift `g`,
    /// `sum_h U_h^dag U_{h+g} = delta_g I` and `sum_h U_{h+g} U_h^dag = delta_g I`.
    pub fn unitarity_residual(&self) -> f64 {
        let mut shifts: Vec<[i64; 3]> = Vec::new();
        for (a, _) in &self.terms {
            for (b, _) in &self.terms {
                let g = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                if !shifts.contains(&g) {
                    shifts.push(g);
                }
            }
        }
        let id = CoinMatrix::identity(self.coin_dim);
        let mut worst: f64 = 0.0;
        for g in shifts {
            let mut left = CoinMatrix::zeros(self.coin_dim);
            let mut right = CoinMatrix::zeros(self.coin_dim);
            for (h, u) in &self.terms {
                if let Some(v) = self.get([h[0] + g[0], h[1] + g[1], h[2] + g[2]]) {
                    left = left + u.adjoint() * *v;
                    right = right + *v * u.adjoint();
                }
            }
            if g == [0, 0, 0] {
                left = left - id;
                right = right - id;
            }
            worst = worst.max(left.max_abs()).max(right.max_abs());
        }
        worst
    }
}
