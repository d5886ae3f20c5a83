//! Binary state dumps.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `QWLK` |
//! | 1 | format version (1) |
//! | 1 | lattice kind: 0 cubic, 1 BCC |
//! | 1 | dimension `d` |
//! | 1 | walk family: 0 Weyl, 1 Dirac |
//! | 1 | coin dimension `s` |
//! | 1 | domain: 0 position, 1 momentum |
//! | 8 | mass (f64) |
//! | 8 d | sizes `N_1..N_d` (u64) |
//! | 8 | time step (u64) |
//! | 8 d | origin (i64) |
//! | 16 s S | amplitudes as (re, im) f64 pairs |
//!
//! Amplitudes follow the in-memory order: sites (or slots) in grid order with
//! the coin index fastest. `S` is the site count.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{QwError, Result};
use crate::evolution::{Domain, FieldState};
use crate::lattice::{GridSpec, LatticeKind};
use crate::walk::{WalkFamily, WalkModel};

pub const MAGIC: [u8; 4] = *b"QWLK";
pub const VERSION: u8 = 1;

pub fn write_state<W: Write>(state: &FieldState, mut out: W) -> Result<()> {
    let grid = state.grid();
    let model = state.model();
    let d = grid.dimension();
    let mut header = Vec::with_capacity(32 + 16 * d);
    header.extend_from_slice(&MAGIC);
    header.push(VERSION);
    header.push(grid.is_bcc() as u8);
    header.push(d as u8);
    header.push(model.is_dirac() as u8);
    header.push(state.coin_dim() as u8);
    header.push(match state.domain() {
        Domain::Position => 0,
        Domain::Momentum => 1,
    });
    header.extend_from_slice(&model.mass().to_le_bytes());
    for &n in grid.sizes() {
        header.extend_from_slice(&(n as u64).to_le_bytes());
    }
    header.extend_from_slice(&state.time().to_le_bytes());
    for &o in &state.origin()[..d] {
        header.extend_from_slice(&o.to_le_bytes());
    }
    out.write_all(&header)?;
    let mut body = Vec::with_capacity(16 * state.amplitudes().len());
    for a in state.amplitudes() {
        body.extend_from_slice(&a.re.to_le_bytes());
        body.extend_from_slice(&a.im.to_le_bytes());
    }
    out.write_all(&body)?;
    Ok(())
}

fn take<const K: usize, R: Read>(input: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    input
        .read_exact(&mut buf)
        .map_err(|e| QwError::InvalidDump(format!("truncated header: {e}")))?;
    Ok(buf)
}

pub fn read_state<R: Read>(mut input: R) -> Result<FieldState> {
    if take::<4, _>(&mut input)? != MAGIC {
        return Err(QwError::InvalidDump("bad magic".into()));
    }
    let [version, kind, d, family, coin, domain] = take::<6, _>(&mut input)?;
    if version != VERSION {
        return Err(QwError::InvalidDump(format!("unsupported version {version}")));
    }
    let mass = f64::from_le_bytes(take(&mut input)?);
    let d = d as usize;
    if !(1..=3).contains(&d) {
        return Err(QwError::InvalidDump(format!("dimension {d}")));
    }
    let mut sizes = Vec::with_capacity(d);
    for _ in 0..d {
        sizes.push(u64::from_le_bytes(take(&mut input)?) as usize);
    }
    let kind = match kind {
        0 => LatticeKind::SimpleCubic,
        1 => LatticeKind::Bcc,
        k => return Err(QwError::InvalidDump(format!("lattice kind {k}"))),
    };
    let grid = GridSpec::new(kind, &sizes)?;
    let model = match family {
        0 => WalkModel::weyl(d)?,
        1 => WalkModel::dirac(d, mass)?,
        f => return Err(QwError::InvalidDump(format!("walk family {f}"))),
    };
    debug_assert_eq!(model.family() == WalkFamily::Dirac, family == 1);
    if coin as usize != model.coin_dim() {
        return Err(QwError::InvalidDump(format!("coin dimension {coin}")));
    }
    let domain = match domain {
        0 => Domain::Position,
        1 => Domain::Momentum,
        x => return Err(QwError::InvalidDump(format!("domain {x}"))),
    };
    let time = u64::from_le_bytes(take(&mut input)?);
    let mut origin = [0i64; 3];
    for o in origin.iter_mut().take(d) {
        *o = i64::from_le_bytes(take(&mut input)?);
    }
    let count = grid.site_count() * model.coin_dim();
    let mut body = vec![0u8; 16 * count];
    input
        .read_exact(&mut body)
        .map_err(|e| QwError::InvalidDump(format!("truncated amplitudes: {e}")))?;
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(QwError::InvalidDump("trailing bytes".into()));
    }
    let amplitudes = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let mut state = FieldState::new(grid, model, domain, amplitudes)?;
    state.set_time(time);
    state.set_origin(origin);
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{gaussian_particle_state, ParticleStateSpec};
    use crate::walk::Branch;
    use crate::WaveVector;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = GridSpec::bcc([2, 3, 2]).unwrap();
        let m = WalkModel::dirac(3, 0.3).unwrap();
        let spec = ParticleStateSpec::isotropic(WaveVector::new(&[0.2, 0.1, 0.0]), 0.3, 3, Branch { s: 1, p: -1 });
        let mut s = gaussian_particle_state(&g, &m, &spec).unwrap();
        s.set_time(17);
        let mut buf = Vec::new();
        write_state(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), 18 + 24 + 8 + 24 + 16 * 4 * 24);
        assert_eq!(&buf[..5], b"QWLK\x01");
        let back = read_state(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        let mut again = Vec::new();
        write_state(&back, &mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn header_layout_one_dimension() {
        let g = GridSpec::cubic(&[2]).unwrap();
        let m = WalkModel::weyl(1).unwrap();
        let mut s = FieldState::zeros(g, m, Domain::Position).unwrap();
        s.amplitudes_mut()[1] = Complex64::new(1.0, -0.0);
        let mut buf = Vec::new();
        write_state(&s, &mut buf).unwrap();
        let mut expected = b"QWLK".to_vec();
        expected.extend_from_slice(&[1, 0, 1, 0, 2, 0]);
        expected.extend_from_slice(&0f64.to_le_bytes());
        expected.extend_from_slice(&2u64.to_le_bytes());
        expected.extend_from_slice(&0u64.to_le_bytes());
        expected.extend_from_slice(&0i64.to_le_bytes());
        for v in [0.0, 0.0, 1.0, -0.0, 0.0, 0.0, 0.0, 0.0] {
            expected.extend_from_slice(&f64::to_le_bytes(v));
        }
        assert_eq!(buf, expected);
    }

    #[test]
    fn rejects_corruption() {
        let g = GridSpec::cubic(&[4]).unwrap();
        let s = FieldState::zeros(g, WalkModel::weyl(1).unwrap(), Domain::Momentum).unwrap();
        let mut buf = Vec::new();
        write_state(&s, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_state(bad.as_slice()), Err(QwError::InvalidDump(_))));
        assert!(read_state(&buf[..buf.len() - 1]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_state(long.as_slice()).is_err());
        let mut v = buf.clone();
        v[4] = 9;
        assert!(read_state(v.as_slice()).is_err());
    }
}
