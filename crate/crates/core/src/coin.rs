//! Small dense linear algebra on the coin space (dimension 2 or 4).
//!
//! Matrices and vectors live on the stack so that per-slot work in the
//! spectral loops does not allocate.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub const MAX_COIN: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix acting on the coin space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinMatrix {
    dim: usize,
    data: [Complex64; MAX_COIN * MAX_COIN],
}

/// Vector in the coin space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinVector {
    dim: usize,
    data: [Complex64; MAX_COIN],
}

impl CoinMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_COIN, "coin dimension {dim} unsupported");
        Self {
            dim,
            data: [ZERO; MAX_COIN * MAX_COIN],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, rows: &[Complex64]) -> Self {
        assert_eq!(rows.len(), dim * dim);
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = rows[r * dim + c];
            }
        }
        m
    }

    /// Places `a`, `b`, `c`, `d` as the 2x2 blocks `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &CoinMatrix, b: &CoinMatrix, c: &CoinMatrix, d: &CoinMatrix) -> Self {
        let h = a.dim;
        assert!(b.dim == h && c.dim == h && d.dim == h && 2 * h <= MAX_COIN);
        let mut m = Self::zeros(2 * h);
        for r in 0..h {
            for col in 0..h {
                m[(r, col)] = a[(r, col)];
                m[(r, col + h)] = b[(r, col)];
                m[(r + h, col)] = c[(r, col)];
                m[(r + h, col + h)] = d[(r, col)];
            }
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_rows(2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(2, &[ZERO, -I, I, ZERO])
    }

    pub fn pauli_z() -> Self {
        Self::from_rows(2, &[ONE, ZERO, ZERO, -ONE])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(r, c)] = self[(c, r)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        for v in m.data.iter_mut() {
            *v *= s;
        }
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn mul_vec(&self, v: &CoinVector) -> CoinVector {
        debug_assert_eq!(self.dim, v.dim);
        let mut out = CoinVector::zeros(self.dim);
        for r in 0..self.dim {
            let mut acc = ZERO;
            for c in 0..self.dim {
                acc += self[(r, c)] * v.data[c];
            }
            out.data[r] = acc;
        }
        out
    }

    /// Applies the matrix to a coin vector stored in a slice.
    pub fn apply_slice(&self, input: &[Complex64], out: &mut [Complex64]) {
        for r in 0..self.dim {
            let mut acc = ZERO;
            for c in 0..self.dim {
                acc += self[(r, c)] * input[c];
            }
            out[r] = acc;
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data[..]
            .iter()
            .enumerate()
            .filter(|(i, _)| i / MAX_COIN < self.dim && i % MAX_COIN < self.dim)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Distance from unitarity, `max |U^dag U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Self::identity(self.dim)).max_abs()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    /// Bilinear form `<a| M |b>`.
    pub fn sandwich(&self, a: &CoinVector, b: &CoinVector) -> Complex64 {
        a.dot(&self.mul_vec(b))
    }

    pub fn column(&self, c: usize) -> CoinVector {
        let mut v = CoinVector::zeros(self.dim);
        for r in 0..self.dim {
            v.data[r] = self[(r, c)];
        }
        v
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self[(r, c)])
    }

    pub fn from_dmatrix(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut out = Self::zeros(m.nrows());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out[(r, c)] = m[(r, c)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CoinMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * MAX_COIN + c]
    }
}

impl IndexMut<(usize, usize)> for CoinMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * MAX_COIN + c]
    }
}

impl Mul for CoinMatrix {
    type Output = CoinMatrix;
    fn mul(self, rhs: CoinMatrix) -> CoinMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = CoinMatrix::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                let mut acc = ZERO;
                for k in 0..self.dim {
                    acc += self[(r, k)] * rhs[(k, c)];
                }
                out[(r, c)] = acc;
            }
        }
        out
    }
}

impl Add for CoinMatrix {
    type Output = CoinMatrix;
    fn add(self, rhs: CoinMatrix) -> CoinMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for (o, r) in out.data.iter_mut().zip(rhs.data.iter()) {
            *o += *r;
        }
        out
    }
}

impl Sub for CoinMatrix {
    type Output = CoinMatrix;
    fn sub(self, rhs: CoinMatrix) -> CoinMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for (o, r) in out.data.iter_mut().zip(rhs.data.iter()) {
            *o -= *r;
        }
        out
    }
}

impl CoinVector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_COIN, "coin dimension {dim} unsupported");
        Self {
            dim,
            data: [ZERO; MAX_COIN],
        }
    }

    pub fn from_slice(values: &[Complex64]) -> Self {
        let mut v = Self::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data[..self.dim]
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data[..self.dim]
    }

    /// Inner product `<self|other>`, antilinear in `self`.
    pub fn dot(&self, other: &CoinVector) -> Complex64 {
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Inner product against a raw coin slice.
    pub fn dot_slice(&self, other: &[Complex64]) -> Complex64 {
        self.as_slice()
            .iter()
            .zip(other)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.as_slice().iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut v = *self;
        for x in v.as_mut_slice() {
            *x *= s;
        }
        v
    }

    /// Rotates the global phase so that the first nonzero component is real positive.
    pub fn fix_phase(&mut self) {
        if let Some(first) = self.as_slice().iter().copied().find(|c| c.norm() > 0.0) {
            let rot = first.conj() / first.norm();
            for x in self.as_mut_slice() {
                *x *= rot;
            }
        }
    }

    pub fn max_abs_diff(&self, other: &CoinVector) -> f64 {
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for CoinVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for CoinVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.as_mut_slice()[i]
    }
}

impl Add for CoinVector {
    type Output = CoinVector;
    fn add(self, rhs: CoinVector) -> CoinVector {
        let mut out = self;
        for (o, r) in out.as_mut_slice().iter_mut().zip(rhs.as_slice()) {
            *o += *r;
        }
        out
    }
}

impl Sub for CoinVector {
    type Output = CoinVector;
    fn sub(self, rhs: CoinVector) -> CoinVector {
        let mut out = self;
        for (o, r) in out.as_mut_slice().iter_mut().zip(rhs.as_slice()) {
            *o -= *r;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (
            CoinMatrix::pauli_x(),
            CoinMatrix::pauli_y(),
            CoinMatrix::pauli_z(),
        );
        // xy = iz
        assert!((x * y - z.scale(I)).max_abs() < 1e-15);
        assert!((x * x - CoinMatrix::identity(2)).max_abs() < 1e-15);
        assert!(x.anticommutator(&z).max_abs() < 1e-15);
        assert!(y.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn blocks_and_phase() {
        let z = CoinMatrix::zeros(2);
        let id = CoinMatrix::identity(2);
        let g0 = CoinMatrix::from_blocks(&z, &id, &id, &z);
        assert!((g0 * g0 - CoinMatrix::identity(4)).max_abs() < 1e-15);

        let mut v = CoinVector::from_slice(&[Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0)]);
        v.fix_phase();
        assert_eq!(v[1], Complex64::new(2.0, 0.0));
    }
}
