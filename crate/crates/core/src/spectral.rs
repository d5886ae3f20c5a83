//! Centred unitary discrete Fourier transforms on cubic and BCC grids.
//!
//! Conventions (`N = N1*...*Nd`, `p_i = floor(N_i/2)`):
//!
//! ```text
//! forward  f^_k = N^-1/2 sum_n f_n exp(-2 pi i (k - p) . N^-1 n)
//! inverse  f_n  = N^-1/2 sum_k f^_k exp(+2 pi i (k - p) . N^-1 n)
//! ```
//!
//! so slot `k` carries the plane wave `exp(i kappa_k . n)` with
//! `kappa_k = 2 pi (k - p) / N`. The BCC transform splits the field into its
//! even and odd sublattice sequences, applies two rectangular transforms and
//! mixes them with the phase `a_k = exp(-i kappa_k . t / 2)`:
//!
//! ```text
//! f^0_k = (F f0 - a_k F f1) / sqrt 2      f0 = F^-1 (f^0 + f^1) / sqrt 2
//! f^1_k = (F f0 + a_k F f1) / sqrt 2      f1 = F^-1 (a* (f^1 - f^0)) / sqrt 2
//! ```
//!
//! Multi-component fields are stored site-major with the coin index fastest;
//! each component is transformed independently.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{QwError, Result};
use crate::lattice::{GridSpec, LatticeKind, BCC_SHIFT};

/// Cached FFT plans and phase tables for one grid.
pub struct SpectralPlan {
    grid: GridSpec,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    /// Per-axis centring phases `exp(2 pi i p n / N)`.
    centring: Vec<Vec<Complex64>>,
    /// BCC mixing phase per cell slot.
    bcc_phase: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan").field("grid", &self.grid).finish()
    }
}

impl SpectralPlan {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let sizes = grid.sizes();
        let forward = sizes.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = sizes.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let centring = sizes
            .iter()
            .enumerate()
            .map(|(axis, &n)| {
                let p = grid.centre_shift(axis) as f64;
                (0..n)
                    .map(|x| Complex64::from_polar(1.0, 2.0 * PI * p * x as f64 / n as f64))
                    .collect()
            })
            .collect();
        let bcc_phase = if grid.is_bcc() {
            (0..grid.cell_count())
                .map(|slot| {
                    let cell = grid.cell_of_index(slot);
                    let half: f64 = (0..3)
                        .map(|a| 0.5 * grid.rect_frequency(a, cell[a]) * BCC_SHIFT[a] as f64)
                        .sum();
                    Complex64::from_polar(1.0, -half)
                })
                .collect()
        } else {
            Vec::new()
        };
        Self {
            grid: grid.clone(),
            forward,
            inverse,
            centring,
            bcc_phase,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// BCC mixing phase `a_k` for a cell slot.
    pub fn bcc_phase(&self, cell_slot: usize) -> Complex64 {
        self.bcc_phase[cell_slot]
    }

    /// In-place position -> momentum transform of a field with `coin_dim`
    /// interleaved components.
    pub fn forward(&self, data: &mut [Complex64], coin_dim: usize) -> Result<()> {
        self.check_len(data, coin_dim)?;
        let cells = self.grid.cell_count();
        let mut buf = vec![Complex64::new(0.0, 0.0); cells];
        let mut buf_odd = vec![Complex64::new(0.0, 0.0); cells];
        for c in 0..coin_dim {
            match self.grid.kind() {
                LatticeKind::SimpleCubic => {
                    gather(data, coin_dim, c, 0, &mut buf);
                    self.rect_forward(&mut buf);
                    scatter(data, coin_dim, c, 0, &buf);
                }
                LatticeKind::Bcc => {
                    gather(data, coin_dim, c, 0, &mut buf);
                    gather(data, coin_dim, c, cells, &mut buf_odd);
                    self.rect_forward(&mut buf);
                    self.rect_forward(&mut buf_odd);
                    for k in 0..cells {
                        let e = buf[k];
                        let o = self.bcc_phase[k] * buf_odd[k];
                        buf[k] = (e - o) * FRAC_1_SQRT_2;
                        buf_odd[k] = (e + o) * FRAC_1_SQRT_2;
                    }
                    scatter(data, coin_dim, c, 0, &buf);
                    scatter(data, coin_dim, c, cells, &buf_odd);
                }
            }
        }
        Ok(())
    }

    /// In-place momentum -> position transform.
    pub fn inverse(&self, data: &mut [Complex64], coin_dim: usize) -> Result<()> {
        self.check_len(data, coin_dim)?;
        let cells = self.grid.cell_count();
        let mut buf = vec![Complex64::new(0.0, 0.0); cells];
        let mut buf_odd = vec![Complex64::new(0.0, 0.0); cells];
        for c in 0..coin_dim {
            match self.grid.kind() {
                LatticeKind::SimpleCubic => {
                    gather(data, coin_dim, c, 0, &mut buf);
                    self.rect_inverse(&mut buf);
                    scatter(data, coin_dim, c, 0, &buf);
                }
                LatticeKind::Bcc => {
                    gather(data, coin_dim, c, 0, &mut buf);
                    gather(data, coin_dim, c, cells, &mut buf_odd);
                    for k in 0..cells {
                        let f0 = buf[k];
                        let f1 = buf_odd[k];
                        buf[k] = (f0 + f1) * FRAC_1_SQRT_2;
                        buf_odd[k] = self.bcc_phase[k].conj() * (f1 - f0) * FRAC_1_SQRT_2;
                    }
                    self.rect_inverse(&mut buf);
                    self.rect_inverse(&mut buf_odd);
                    scatter(data, coin_dim, c, 0, &buf);
                    scatter(data, coin_dim, c, cells, &buf_odd);
                }
            }
        }
        Ok(())
    }

    fn check_len(&self, data: &[Complex64], coin_dim: usize) -> Result<()> {
        let expected = self.grid.site_count() * coin_dim;
        if data.len() != expected {
            return Err(QwError::ShapeMismatch(format!(
                "field has {} entries, grid x coin needs {expected}",
                data.len()
            )));
        }
        Ok(())
    }

    /// Centred rectangular forward transform of one component over the
    /// generating region.
    pub fn rect_forward(&self, buf: &mut [Complex64]) {
        self.apply_centring(buf, false);
        self.fft_nd(buf, true);
        let norm = 1.0 / (buf.len() as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= norm);
    }

    pub fn rect_inverse(&self, buf: &mut [Complex64]) {
        self.fft_nd(buf, false);
        self.apply_centring(buf, true);
        let norm = 1.0 / (buf.len() as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= norm);
    }

    fn apply_centring(&self, buf: &mut [Complex64], conjugate: bool) {
        let sizes = self.grid.sizes();
        let d = sizes.len();
        let inner: usize = sizes[1..].iter().product();
        for (i, v) in buf.iter_mut().enumerate() {
            let mut phase = Complex64::new(1.0, 0.0);
            let mut rem = i;
            let mut stride = inner;
            for axis in 0..d {
                let x = rem / stride;
                rem %= stride;
                if axis + 1 < d {
                    stride /= sizes[axis + 1];
                }
                phase *= self.centring[axis][x];
            }
            *v *= if conjugate { phase.conj() } else { phase };
        }
    }

    fn fft_nd(&self, buf: &mut [Complex64], forward: bool) {
        let sizes = self.grid.sizes();
        let plans = if forward { &self.forward } else { &self.inverse };
        let total = buf.len();
        for (axis, plan) in plans.iter().enumerate() {
            let len = sizes[axis];
            if len == 1 {
                continue;
            }
            let stride: usize = sizes[axis + 1..].iter().product();
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            if stride == 1 {
                plan.process_with_scratch(buf, &mut scratch);
                continue;
            }
            // Gather `stride` lines of one outer block contiguously, transform
            // them together and scatter back.
            let block = len * stride;
            let mut lines = vec![Complex64::new(0.0, 0.0); block];
            for start in (0..total).step_by(block) {
                let src = &buf[start..start + block];
                for j in 0..len {
                    for i in 0..stride {
                        lines[i * len + j] = src[j * stride + i];
                    }
                }
                plan.process_with_scratch(&mut lines, &mut scratch);
                let dst = &mut buf[start..start + block];
                for j in 0..len {
                    for i in 0..stride {
                        dst[j * stride + i] = lines[i * len + j];
                    }
                }
            }
        }
    }
}

fn gather(data: &[Complex64], coin_dim: usize, c: usize, offset: usize, out: &mut [Complex64]) {
    for (i, v) in out.iter_mut().enumerate() {
        *v = data[(offset + i) * coin_dim + c];
    }
}

fn scatter(data: &mut [Complex64], coin_dim: usize, c: usize, offset: usize, src: &[Complex64]) {
    for (i, v) in src.iter().enumerate() {
        data[(offset + i) * coin_dim + c] = *v;
    }
}

/// Momentum-domain field: one coefficient vector per spectral slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coin_dim: usize,
    pub coefficients: Vec<Complex64>,
}

fn require_cubic(grid: &GridSpec) -> Result<()> {
    if grid.is_bcc() {
        return Err(QwError::GridKindMismatch {
            expected: "simple cubic",
        });
    }
    Ok(())
}

fn require_bcc(grid: &GridSpec) -> Result<()> {
    if !grid.is_bcc() {
        return Err(QwError::GridKindMismatch { expected: "BCC" });
    }
    Ok(())
}

/// Rectangular centred DFT of a position field.
pub fn dft_rect(grid: &GridSpec, coin_dim: usize, field: &[Complex64]) -> Result<SpectralField> {
    require_cubic(grid)?;
    let mut data = field.to_vec();
    SpectralPlan::new(grid).forward(&mut data, coin_dim)?;
    Ok(SpectralField {
        grid: grid.clone(),
        coin_dim,
        coefficients: data,
    })
}

/// Inverse of [`dft_rect`].
pub fn idft_rect(spectrum: &SpectralField) -> Result<Vec<Complex64>> {
    require_cubic(&spectrum.grid)?;
    let mut data = spectrum.coefficients.clone();
    SpectralPlan::new(&spectrum.grid).inverse(&mut data, spectrum.coin_dim)?;
    Ok(data)
}

/// BCC transform of a position field, returned as the two reduced families.
pub fn bcc_dft(
    grid: &GridSpec,
    coin_dim: usize,
    field: &[Complex64],
) -> Result<(SpectralField, SpectralField)> {
    require_bcc(grid)?;
    let mut data = field.to_vec();
    SpectralPlan::new(grid).forward(&mut data, coin_dim)?;
    let half = grid.cell_count() * coin_dim;
    let family1 = data.split_off(half);
    let cell_grid = GridSpec::cubic(grid.sizes())?;
    Ok((
        SpectralField {
            grid: cell_grid.clone(),
            coin_dim,
            coefficients: data,
        },
        SpectralField {
            grid: cell_grid,
            coin_dim,
            coefficients: family1,
        },
    ))
}

/// Inverse of [`bcc_dft`].
pub fn bcc_idft(
    grid: &GridSpec,
    family0: &SpectralField,
    family1: &SpectralField,
) -> Result<Vec<Complex64>> {
    require_bcc(grid)?;
    if family0.coin_dim != family1.coin_dim
        || family0.coefficients.len() != family1.coefficients.len()
        || family0.coefficients.len() != grid.cell_count() * family0.coin_dim
    {
        return Err(QwError::ShapeMismatch(
            "BCC families must both cover the generating region".into(),
        ));
    }
    let mut data = family0.coefficients.clone();
    data.extend_from_slice(&family1.coefficients);
    SpectralPlan::new(grid).inverse(&mut data, family0.coin_dim)?;
    Ok(data)
}
