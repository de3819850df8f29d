//! Little-endian binary snapshots.
//!
//! Record layout: magic `MCLS`, `u32` version, `u32` nx, ny, nz, m,
//! `f64` dealias fraction, `f64` t, `i64` shear shift, `u32` component count
//! (6: U1 U2 U3 B1 B2 B3), then for each component every coefficient in
//! storage order as `f64` real part followed by `f64` imaginary part.
//! A file holds any number of consecutive records.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{MhdState, SpectralScalarField, SpectralVectorField};
use crate::grid::{GridSpec, PhysParams};
use crate::spectral::div_l_residual;

pub const MAGIC: &[u8; 4] = b"MCLS";
pub const VERSION: u32 = 1;

pub fn write_snapshot(w: &mut impl Write, state: &MhdState) -> Result<()> {
    let g = state.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in [g.nx, g.ny, g.nz, g.m] {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    w.write_all(&g.dealias_fraction.to_le_bytes())?;
    w.write_all(&state.t.to_le_bytes())?;
    w.write_all(&state.u.comps[0].shear_shift.to_le_bytes())?;
    w.write_all(&6u32.to_le_bytes())?;
    for c in state.u.comps.iter().chain(state.b.comps.iter()) {
        for z in &c.coeffs {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_exact_or_eof(r: &mut impl Read, buf: &mut [u8]) -> Result<bool> {
    match r.read_exact(buf) {
        Ok(()) => Ok(true),
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => Ok(false),
        Err(e) => Err(e.into()),
    }
}

fn u32_of(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn f64_of(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads the next record, or `None` at a clean end of input.
pub fn read_snapshot(r: &mut impl Read, params: PhysParams) -> Result<Option<MhdState>> {
    let mut magic = [0u8; 4];
    if !read_exact_or_eof(r, &mut magic)? {
        return Ok(None);
    }
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!("bad magic {magic:?}")));
    }
    let version = u32_of(r)?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let dims: Vec<usize> = (0..4).map(|_| u32_of(r).map(|v| v as usize)).collect::<Result<_>>()?;
    let mut grid = GridSpec::new(dims[0], dims[1], dims[2], dims[3])?;
    grid.dealias_fraction = f64_of(r)?;
    grid.validate()?;
    let t = f64_of(r)?;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let shift = i64::from_le_bytes(b8);
    let ncomp = u32_of(r)?;
    if ncomp != 6 {
        return Err(Error::Snapshot(format!("expected 6 components, found {ncomp}")));
    }
    let mut comps = Vec::with_capacity(6);
    for _ in 0..6 {
        let mut f = SpectralScalarField::zeros(grid, t);
        f.shear_shift = shift;
        for z in f.coeffs.iter_mut() {
            *z = Complex64::new(f64_of(r)?, f64_of(r)?);
        }
        comps.push(f);
    }
    let mut it = comps.into_iter();
    let mut next3 = || [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()];
    let mut u = SpectralVectorField::new(next3());
    let mut b = SpectralVectorField::new(next3());
    u.div_free_moving_frame = div_l_residual(&u, t) <= 1e-11;
    b.div_free_moving_frame = div_l_residual(&b, t) <= 1e-11;
    Ok(Some(MhdState { u, b, t, params }))
}

pub fn write_snapshots(path: &Path, states: &[MhdState]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in states {
        write_snapshot(&mut w, s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshots(path: &Path, params: PhysParams) -> Result<Vec<MhdState>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    while let Some(s) = read_snapshot(&mut r, params)? {
        out.push(s);
    }
    Ok(out)
}
