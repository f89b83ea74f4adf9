//! Binary field snapshots.
//!
//! Layout (little endian): magic `NLCH1`, version byte, `dim: u8`, `n: u64`,
//! then `L, t, γ, ε, p_H` as `f64`, then `n^dim` density values.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, TorusGrid};
use crate::model::{ModelParams, ModelState};

pub const MAGIC: &[u8; 5] = b"NLCH1";
pub const VERSION: u8 = 1;
const HEADER: usize = 5 + 1 + 1 + 8 + 5 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: Field,
    pub t: f64,
    pub gamma: f64,
    pub eps: f64,
    pub p_h: f64,
}

impl Snapshot {
    pub fn new(state: &ModelState, params: &ModelParams) -> Self {
        Snapshot {
            field: state.u.clone(),
            t: state.t,
            gamma: params.gamma,
            eps: params.eps,
            p_h: params.p_h,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let grid = self.field.grid();
        let mut out = Vec::with_capacity(HEADER + 8 * self.field.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(grid.dim() as u8);
        out.extend_from_slice(&(grid.n() as u64).to_le_bytes());
        for v in [grid.length(), self.t, self.gamma, self.eps, self.p_h] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.field.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 6 || &bytes[..5] != MAGIC {
            return Err(Error::Snapshot("bad magic; not a snapshot file".into()));
        }
        if bytes[5] != VERSION {
            return Err(Error::UnsupportedVersion {
                found: bytes[5],
                supported: VERSION,
            });
        }
        if bytes.len() < HEADER {
            return Err(Error::Snapshot(format!(
                "truncated header ({} bytes)",
                bytes.len()
            )));
        }
        let f64_at = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
        let dim = bytes[6] as usize;
        let n = u64::from_le_bytes(bytes[7..15].try_into().expect("8 bytes")) as usize;
        let grid = TorusGrid::new(dim, n, f64_at(15))?;
        let payload = &bytes[HEADER..];
        if payload.len() != 8 * grid.cells() {
            return Err(Error::Snapshot(format!(
                "payload has {} bytes, expected {}",
                payload.len(),
                8 * grid.cells()
            )));
        }
        let values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect::<Vec<f64>>();
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Snapshot(format!(
                "non-finite value {} at cell {cell}",
                values[cell]
            )));
        }
        Ok(Snapshot {
            field: Field::new(grid, values)?,
            t: f64_at(23),
            gamma: f64_at(31),
            eps: f64_at(39),
            p_h: f64_at(47),
        })
    }
}

pub fn write_snapshot(path: impl AsRef<Path>, snap: &Snapshot) -> Result<()> {
    fs::write(path, snap.to_bytes())?;
    Ok(())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    Snapshot::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let g = TorusGrid::new(2, 8, 2.5).unwrap();
        let field = Field::from_fn(g, |x| (x[0] * 3.1).sin().abs() + x[1] / 7.0).unwrap();
        Snapshot {
            field,
            t: 0.125,
            gamma: 10.0,
            eps: 1.0 / 3.0,
            p_h: 0.7,
        }
    }

    #[test]
    fn roundtrip_is_exact() {
        let s = sample();
        assert_eq!(Snapshot::from_bytes(&s.to_bytes()).unwrap(), s);
    }

    #[test]
    fn header_errors() {
        let mut b = sample().to_bytes();
        assert!(matches!(
            Snapshot::from_bytes(&b[..30]),
            Err(Error::Snapshot(_))
        ));
        assert!(matches!(
            Snapshot::from_bytes(&b[..b.len() - 3]),
            Err(Error::Snapshot(_))
        ));
        b[5] = 2;
        assert!(matches!(
            Snapshot::from_bytes(&b),
            Err(Error::UnsupportedVersion { found: 2, .. })
        ));
        b[0] = b'X';
        assert!(matches!(Snapshot::from_bytes(&b), Err(Error::Snapshot(_))));
    }
}
