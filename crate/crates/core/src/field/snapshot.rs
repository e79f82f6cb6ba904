//! `F2D1` field snapshots.
//!
//! Layout (little-endian): 4-byte magic `F2D1`, `u32` n, `f64` extent,
//! `u32` flags, 12 zero bytes of padding (32-byte header), then `n²` pairs of
//! `f64` (re, im) in row-major order.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Field, Grid2D};
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"F2D1";
/// Flag bit set when the field has unit mass.
pub const FLAG_NORMALIZED: u32 = 1;
const HEADER_LEN: usize = 32;

pub fn write_snapshot<W: Write>(field: &Field, mut out: W) -> Result<()> {
    let grid = field.grid();
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&SNAPSHOT_MAGIC);
    header[4..8].copy_from_slice(&(grid.n() as u32).to_le_bytes());
    header[8..16].copy_from_slice(&grid.extent().to_le_bytes());
    let flags = if field.is_normalized(1e-9) { FLAG_NORMALIZED } else { 0 };
    header[16..20].copy_from_slice(&flags.to_le_bytes());
    out.write_all(&header)?;
    let mut body = Vec::with_capacity(field.values().len() * 16);
    for v in field.values() {
        body.extend_from_slice(&v.re.to_le_bytes());
        body.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&body)?;
    Ok(())
}

/// Reads a snapshot; returns the field and its flags word.
pub fn read_snapshot<R: Read>(mut input: R) -> Result<(Field, u32)> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if header[0..4] != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad magic, expected F2D1".into()));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let extent = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let flags = u32::from_le_bytes(header[16..20].try_into().unwrap());
    let grid = Grid2D::new(n, extent).map_err(|e| Error::Format(e.to_string()))?;
    let mut body = vec![0u8; n * n * 16];
    input.read_exact(&mut body)?;
    let values = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok((Field::from_values(grid, values), flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid2D::new(64, 5.0).unwrap();
        let f = Field::gaussian(&g);
        let mut buf = Vec::new();
        write_snapshot(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 64 * 64 * 16);
        assert_eq!(&buf[0..4], b"F2D1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 64);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 5.0);
        assert_eq!(u32::from_le_bytes(buf[16..20].try_into().unwrap()), FLAG_NORMALIZED);
        assert!(buf[20..32].iter().all(|&b| b == 0));
    }

    #[test]
    fn rejects_bad_magic() {
        let mut buf = [0u8; 64];
        buf[0..4].copy_from_slice(b"XXXX");
        assert!(matches!(read_snapshot(&buf[..]), Err(Error::Format(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), extent in 1.0f64..20.0) {
            let g = Grid2D::new(64, extent).unwrap();
            let f = Field::from_fn(&g, |x, y| {
                let s = (seed as f64 * 1e-19 + x * 1.3 + y * 0.7).sin();
                Complex64::new(s * 1e-3, (x - y).cos() * f64::EPSILON)
            });
            let mut buf = Vec::new();
            write_snapshot(&f, &mut buf).unwrap();
            let (back, _) = read_snapshot(&buf[..]).unwrap();
            prop_assert_eq!(back.grid().extent().to_bits(), extent.to_bits());
            for (a, b) in f.values().iter().zip(back.values()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}
