//! Finite periodic lattices: simple cubic `Z^d` and body-centred cubic.
//!
//! Sites are ordered row-major over the generating region (last axis
//! fastest). A BCC grid stores the even sublattice `2n` first and the odd
//! sublattice `2n + t`, `t = (1,1,1)`, second. Spectral slots use the same
//! row-major order over the centred frequency ladder; BCC slots are split
//! into two families of `N1*N2*N3` slots each.

use std::f64::consts::PI;
use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{QwError, Result};

/// Shift between the two BCC sublattices.
pub const BCC_SHIFT: [i64; 3] = [1, 1, 1];

/// Wave-vector offset of BCC slot family 0 relative to family 1.
///
/// Family 1 slot `k` carries `q = kappa_k / 2`, family 0 carries
/// `q = kappa_k / 2 + BCC_FAMILY0_OFFSET` (modulo the reciprocal lattice).
/// Obtained from a brute-force plane-wave transform on small grids; see the
/// `bcc_family_offset_*` tests.
pub const BCC_FAMILY0_OFFSET: [f64; 3] = [PI, PI, PI];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeKind {
    SimpleCubic,
    Bcc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    Even,
    Odd,
}

/// Physical wave-vector. Components beyond the lattice dimension are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WaveVector(pub [f64; 3]);

impl WaveVector {
    pub fn new(components: &[f64]) -> Self {
        assert!(components.len() <= 3);
        let mut k = [0.0; 3];
        k[..components.len()].copy_from_slice(components);
        Self(k)
    }

    pub fn zero() -> Self {
        Self([0.0; 3])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot_position(&self, x: &[i64; 3]) -> f64 {
        self.0[0] * x[0] as f64 + self.0[1] * x[1] as f64 + self.0[2] * x[2] as f64
    }

    pub fn with_component(mut self, axis: usize, value: f64) -> Self {
        self.0[axis] = value;
        self
    }

    pub fn shifted(mut self, axis: usize, delta: f64) -> Self {
        self.0[axis] += delta;
        self
    }
}

impl Index<usize> for WaveVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for WaveVector {
    type Output = WaveVector;
    fn add(self, o: WaveVector) -> WaveVector {
        WaveVector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for WaveVector {
    type Output = WaveVector;
    fn sub(self, o: WaveVector) -> WaveVector {
        WaveVector([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

/// A site of the grid: a cell of the generating region plus, for BCC, the
/// sublattice it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SiteCoord {
    pub cell: [i64; 3],
    pub sublattice: Sublattice,
}

impl SiteCoord {
    /// Lattice position: `n` on cubic grids, `2n` or `2n + t` on BCC.
    pub fn position(&self, kind: LatticeKind) -> [i64; 3] {
        match kind {
            LatticeKind::SimpleCubic => self.cell,
            LatticeKind::Bcc => {
                let odd = i64::from(self.sublattice == Sublattice::Odd);
                [
                    2 * self.cell[0] + odd * BCC_SHIFT[0],
                    2 * self.cell[1] + odd * BCC_SHIFT[1],
                    2 * self.cell[2] + odd * BCC_SHIFT[2],
                ]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    kind: LatticeKind,
    sizes: Vec<usize>,
}

impl GridSpec {
    pub fn new(kind: LatticeKind, sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > 3 {
            return Err(QwError::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {}",
                sizes.len()
            )));
        }
        if kind == LatticeKind::Bcc && sizes.len() != 3 {
            return Err(QwError::InvalidGrid(
                "BCC grids are three-dimensional".into(),
            ));
        }
        if sizes.iter().any(|&n| n == 0) {
            return Err(QwError::InvalidGrid(format!("sizes must be positive: {sizes:?}")));
        }
        Ok(Self {
            kind,
            sizes: sizes.to_vec(),
        })
    }

    pub fn cubic(sizes: &[usize]) -> Result<Self> {
        Self::new(LatticeKind::SimpleCubic, sizes)
    }

    pub fn bcc(sizes: [usize; 3]) -> Result<Self> {
        Self::new(LatticeKind::Bcc, &sizes)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn is_bcc(&self) -> bool {
        self.kind == LatticeKind::Bcc
    }

    /// Number of cells of the generating region, `N1*...*Nd`.
    pub fn cell_count(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn site_count(&self) -> usize {
        match self.kind {
            LatticeKind::SimpleCubic => self.cell_count(),
            LatticeKind::Bcc => 2 * self.cell_count(),
        }
    }

    pub fn slot_count(&self) -> usize {
        self.site_count()
    }

    /// Periodicity of lattice positions along each axis.
    pub fn period(&self, axis: usize) -> i64 {
        match self.kind {
            LatticeKind::SimpleCubic => self.sizes[axis] as i64,
            LatticeKind::Bcc => 2 * self.sizes[axis] as i64,
        }
    }

    /// Centring shift `p_i = floor(N_i / 2)` of the frequency ladder.
    pub fn centre_shift(&self, axis: usize) -> usize {
        self.sizes[axis] / 2
    }

    /// Row-major decomposition of a cell index.
    pub fn cell_of_index(&self, mut index: usize) -> [i64; 3] {
        let mut cell = [0i64; 3];
        for axis in (0..self.dimension()).rev() {
            let n = self.sizes[axis];
            cell[axis] = (index % n) as i64;
            index /= n;
        }
        cell
    }

    /// Row-major index of a cell, reducing coordinates periodically.
    pub fn index_of_cell(&self, cell: &[i64; 3]) -> usize {
        let mut index = 0usize;
        for axis in 0..self.dimension() {
            let n = self.sizes[axis] as i64;
            index = index * n as usize + cell[axis].rem_euclid(n) as usize;
        }
        index
    }

    pub fn site(&self, index: usize) -> SiteCoord {
        let cells = self.cell_count();
        let (sublattice, cell_index) = if index < cells {
            (Sublattice::Even, index)
        } else {
            (Sublattice::Odd, index - cells)
        };
        SiteCoord {
            cell: self.cell_of_index(cell_index),
            sublattice,
        }
    }

    pub fn site_index(&self, site: &SiteCoord) -> usize {
        let base = self.index_of_cell(&site.cell);
        match site.sublattice {
            Sublattice::Even => base,
            Sublattice::Odd => base + self.cell_count(),
        }
    }

    /// All sites in storage order.
    pub fn iterate_sites(&self) -> impl Iterator<Item = SiteCoord> + '_ {
        (0..self.site_count()).map(move |i| self.site(i))
    }

    pub fn position_of_index(&self, index: usize) -> [i64; 3] {
        self.site(index).position(self.kind)
    }

    /// Storage index of the site at lattice position `x`, reducing
    /// periodically. Returns `None` for points that are not BCC vertices.
    pub fn index_of_position(&self, x: &[i64; 3]) -> Option<usize> {
        match self.kind {
            LatticeKind::SimpleCubic => Some(self.index_of_cell(x)),
            LatticeKind::Bcc => {
                let parity = x[0].rem_euclid(2);
                if x[1].rem_euclid(2) != parity || x[2].rem_euclid(2) != parity {
                    return None;
                }
                let cell = [
                    (x[0] - parity).div_euclid(2),
                    (x[1] - parity).div_euclid(2),
                    (x[2] - parity).div_euclid(2),
                ];
                let sub = if parity == 0 {
                    Sublattice::Even
                } else {
                    Sublattice::Odd
                };
                Some(self.site_index(&SiteCoord {
                    cell,
                    sublattice: sub,
                }))
            }
        }
    }

    /// Rectangular frequency of cell-slot `k` along `axis`, `2 pi (k - p) / N`.
    pub fn rect_frequency(&self, axis: usize, k: i64) -> f64 {
        let n = self.sizes[axis] as f64;
        2.0 * PI * (k - self.centre_shift(axis) as i64) as f64 / n
    }

    /// BCC slot family (0 or 1) and the cell-slot index within it.
    pub fn slot_family(&self, slot: usize) -> (usize, usize) {
        let cells = self.cell_count();
        if slot < cells {
            (0, slot)
        } else {
            (1, slot - cells)
        }
    }

    /// Physical wave-vector `kappa` of a spectral slot: the plane wave
    /// `exp(i kappa . x)` transforms to a unit-modulus multiple of a delta at
    /// this slot.
    pub fn wavevector_of_slot(&self, slot: usize) -> Result<WaveVector> {
        if slot >= self.slot_count() {
            return Err(QwError::SlotOutOfRange {
                slot,
                count: self.slot_count(),
            });
        }
        Ok(self.wavevector_unchecked(slot))
    }

    pub(crate) fn wavevector_unchecked(&self, slot: usize) -> WaveVector {
        match self.kind {
            LatticeKind::SimpleCubic => {
                let cell = self.cell_of_index(slot);
                let mut k = [0.0; 3];
                for (axis, ka) in k.iter_mut().enumerate().take(self.dimension()) {
                    *ka = self.rect_frequency(axis, cell[axis]);
                }
                WaveVector(k)
            }
            LatticeKind::Bcc => reduce_fcc(self.family_label(slot)),
        }
    }

    /// Unreduced BCC wave-vector of a slot: `kappa/2` for family 1 and
    /// `kappa/2 + (pi, pi, pi)` for family 0. Equals the slot wave-vector
    /// modulo the reciprocal lattice. Cubic slots return their wave-vector.
    pub fn family_label(&self, slot: usize) -> WaveVector {
        if !self.is_bcc() {
            return self.wavevector_unchecked(slot);
        }
        let (family, cell_slot) = self.slot_family(slot);
        let cell = self.cell_of_index(cell_slot);
        let mut q = [0.0; 3];
        for axis in 0..3 {
            q[axis] = 0.5 * self.rect_frequency(axis, cell[axis]);
            if family == 0 {
                q[axis] += BCC_FAMILY0_OFFSET[axis];
            }
        }
        WaveVector(q)
    }

    /// Reduces a wave-vector to its representative nearest the origin
    /// (per-axis `(-pi, pi]` for cubic grids, the rhombic dodecahedron for BCC).
    pub fn reduce_wavevector(&self, q: WaveVector) -> WaveVector {
        match self.kind {
            LatticeKind::SimpleCubic => {
                let mut out = q;
                for axis in 0..self.dimension() {
                    out.0[axis] = wrap_angle(q.0[axis]);
                }
                out
            }
            LatticeKind::Bcc => reduce_fcc(q),
        }
    }

    /// `q - k` reduced to the representative nearest zero.
    pub fn wrap_difference(&self, q: WaveVector, k: WaveVector) -> WaveVector {
        self.reduce_wavevector(q - k)
    }

    /// Slot whose wave-vector is closest to `k` (ties resolved by lowest slot).
    pub fn nearest_slot(&self, k: WaveVector) -> usize {
        let d = self.dimension();
        let families: &[(usize, [f64; 3])] = match self.kind {
            LatticeKind::SimpleCubic => &[(0, [0.0; 3])],
            LatticeKind::Bcc => &[(1, [0.0; 3]), (0, BCC_FAMILY0_OFFSET)],
        };
        let mut candidates = Vec::new();
        for &(family, offset) in families {
            // Rectangular frequency that the family maps onto `k`.
            let mut centre = [0i64; 3];
            for axis in 0..d {
                let scale = if self.is_bcc() { 2.0 } else { 1.0 };
                let kappa = wrap_angle(scale * (k.0[axis] - offset[axis]));
                let n = self.sizes[axis] as f64;
                centre[axis] =
                    (kappa * n / (2.0 * PI)).round() as i64 + self.centre_shift(axis) as i64;
            }
            let reach = |axis: usize| if axis < d { -1..=1 } else { 0..=0 };
            for a in reach(0) {
                for b in reach(1) {
                    for c in reach(2) {
                        let cell = [centre[0] + a, centre[1] + b, centre[2] + c];
                        let base = self.index_of_cell(&cell);
                        candidates.push(base + family * self.cell_count() * usize::from(self.is_bcc()));
                    }
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut best = (f64::INFINITY, 0);
        for slot in candidates {
            let dist = self.wrap_difference(self.wavevector_unchecked(slot), k).norm();
            if dist < best.0 - 1e-15 {
                best = (dist, slot);
            }
        }
        best.1
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x.rem_euclid(two_pi);
    if y > PI {
        y -= two_pi;
    }
    y
}

/// Minimum-norm representative of `q` modulo the BCC reciprocal lattice
/// `pi * (a, b, c)`, `a + b + c` even.
fn reduce_fcc(q: WaveVector) -> WaveVector {
    // Fold into the cube first so a small search window suffices.
    let mut base = q;
    for axis in 0..3 {
        base.0[axis] = wrap_angle(q.0[axis]);
    }
    let mut best = base;
    let mut best_norm = base.norm();
    for a in -2i32..=2 {
        for b in -2i32..=2 {
            for c in -2i32..=2 {
                if (a + b + c).rem_euclid(2) != 0 {
                    continue;
                }
                let cand = WaveVector([
                    base.0[0] + PI * a as f64,
                    base.0[1] + PI * b as f64,
                    base.0[2] + PI * c as f64,
                ]);
                let n = cand.norm();
                if n < best_norm - 1e-12 {
                    best = cand;
                    best_norm = n;
                }
            }
        }
    }
    best
}
