//! Bit-packed grid layout shared by grid exports and dataset files.
//!
//! One bit per voxel, LSB first, x fastest then y; every z-slice is padded
//! to whole bytes.

use std::io::{Read, Write};

use super::grid::{GridSpec, VoxelGrid};
use crate::error::{Error, Result};

const GRID_MAGIC: &[u8; 4] = b"VOXG";
const GRID_VERSION: u16 = 1;
pub const GRID_HEADER_LEN: usize = 16;

pub fn slice_bytes(n: usize) -> usize {
    (n * n).div_ceil(8)
}

pub fn packed_len(n: usize) -> usize {
    slice_bytes(n) * n
}

pub fn pack_bits(grid: &VoxelGrid) -> Vec<u8> {
    let n = grid.resolution();
    let sb = slice_bytes(n);
    let mut out = vec![0u8; sb * n];
    for (z, slice) in grid.occupancy().chunks_exact(n * n).enumerate() {
        let dst = &mut out[z * sb..(z + 1) * sb];
        for (i, &v) in slice.iter().enumerate() {
            dst[i / 8] |= v << (i % 8);
        }
    }
    out
}

pub fn unpack_bits(spec: GridSpec, bytes: &[u8]) -> Result<VoxelGrid> {
    let n = spec.resolution;
    let sb = slice_bytes(n);
    if bytes.len() != sb * n {
        return Err(Error::corrupt(
            "grid",
            format!("expected {} packed bytes, got {}", sb * n, bytes.len()),
        ));
    }
    let mut occ = Vec::with_capacity(n * n * n);
    for slice in bytes.chunks_exact(sb) {
        occ.extend((0..n * n).map(|i| (slice[i / 8] >> (i % 8)) & 1));
    }
    VoxelGrid::from_occupancy(spec, occ)
}

/// Write a standalone grid: 16-byte header then packed bits.
pub fn write_grid<W: Write>(grid: &VoxelGrid, mut w: W) -> Result<()> {
    let mut header = [0u8; GRID_HEADER_LEN];
    header[0..4].copy_from_slice(GRID_MAGIC);
    header[4..6].copy_from_slice(&GRID_VERSION.to_le_bytes());
    header[6..8].copy_from_slice(&(grid.resolution() as u16).to_le_bytes());
    header[8..12].copy_from_slice(&(grid.pitch() as f32).to_le_bytes());
    w.write_all(&header)?;
    w.write_all(&pack_bits(grid))?;
    Ok(())
}

/// Read a standalone grid. The origin is not stored and comes back as zero.
pub fn read_grid<R: Read>(mut r: R) -> Result<VoxelGrid> {
    let mut header = [0u8; GRID_HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::corrupt("grid", format!("short header: {e}")))?;
    if &header[0..4] != GRID_MAGIC {
        return Err(Error::corrupt("grid", "bad magic"));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != GRID_VERSION {
        return Err(Error::corrupt("grid", format!("unsupported version {version}")));
    }
    let n = u16::from_le_bytes([header[6], header[7]]) as usize;
    let pitch = f32::from_le_bytes(header[8..12].try_into().unwrap()) as f64;
    let spec = GridSpec::new(n, pitch, [0.0; 3])?;
    let mut bytes = vec![0u8; packed_len(n)];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::corrupt("grid", format!("short body: {e}")))?;
    unpack_bits(spec, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_fixed() {
        let spec = GridSpec::new(8, 0.022, [0.0; 3]).unwrap();
        let mut g = VoxelGrid::empty(spec).unwrap();
        g.set(0, 0, 0, true);
        g.set(1, 0, 0, true);
        g.set(0, 1, 1, true);
        let mut buf = Vec::new();
        write_grid(&g, &mut buf).unwrap();
        assert_eq!(&buf[0..4], b"VOXG");
        assert_eq!(u16::from_le_bytes([buf[4], buf[5]]), 1);
        assert_eq!(u16::from_le_bytes([buf[6], buf[7]]), 8);
        assert_eq!(f32::from_le_bytes(buf[8..12].try_into().unwrap()), 0.022f32);
        assert_eq!(&buf[12..16], &[0, 0, 0, 0]);
        assert_eq!(buf.len(), 16 + 8 * 8);
        // slice z=0: bits 0 and 1 set
        assert_eq!(buf[16], 0b11);
        // slice z=1: voxel (0,1) is bit 8 -> second byte of the slice
        assert_eq!(buf[16 + 8], 0);
        assert_eq!(buf[16 + 8 + 1], 1);
        let back = read_grid(&buf[..]).unwrap();
        assert_eq!(back.occupancy(), g.occupancy());
    }

    #[test]
    fn truncated_input_is_rejected() {
        let spec = GridSpec::new(8, 0.022, [0.0; 3]).unwrap();
        let mut buf = Vec::new();
        write_grid(&VoxelGrid::full(spec).unwrap(), &mut buf).unwrap();
        assert!(read_grid(&buf[..buf.len() - 1]).is_err());
        buf[0] = b'X';
        assert!(read_grid(&buf[..]).is_err());
    }
}
