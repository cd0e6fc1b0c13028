//! Field snapshots.
//!
//! The binary layout (all little-endian) is
//!
//! ```text
//! magic    8 bytes  "WVSNAP\0\0"
//! schema   u32      1
//! h, v     u32, u32
//! nx, nz   u64, u64
//! dx, dz   f64, f64
//! time     f64
//! 4 × { len: u64, values: len × f64 }   in u, w, p, b order
//! ```

use std::io::{Read, Write};

use super::mesh::{DofMap, SliceMesh};
use super::state::{evaluate_in_cell, StateVector};
use crate::error::{domain, Result};
use crate::fespace::{Field, OrderCase};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"WVSNAP\0\0";
pub const SNAPSHOT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub case: OrderCase,
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub time: f64,
    pub fields: [Vec<f64>; 4],
}

impl Snapshot {
    pub fn new(state: &StateVector, mesh: &SliceMesh, dofs: &DofMap, time: f64) -> Self {
        Self {
            case: dofs.case,
            nx: mesh.nx,
            nz: mesh.nz,
            dx: mesh.dx,
            dz: mesh.dz,
            time,
            fields: Field::ALL.map(|f| state.field(f).to_vec()),
        }
    }

    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_SCHEMA.to_le_bytes())?;
        w.write_all(&(self.case.h() as u32).to_le_bytes())?;
        w.write_all(&(self.case.v() as u32).to_le_bytes())?;
        w.write_all(&(self.nx as u64).to_le_bytes())?;
        w.write_all(&(self.nz as u64).to_le_bytes())?;
        for x in [self.dx, self.dz, self.time] {
            w.write_all(&x.to_le_bytes())?;
        }
        for f in &self.fields {
            w.write_all(&(f.len() as u64).to_le_bytes())?;
            for x in f {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return domain("not a snapshot file (bad magic)");
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let mut u32_ = |r: &mut dyn Read| -> Result<u32> {
            r.read_exact(&mut b4)?;
            Ok(u32::from_le_bytes(b4))
        };
        let schema = u32_(&mut r)?;
        if schema != SNAPSHOT_SCHEMA {
            return domain(format!("unsupported snapshot schema {schema}"));
        }
        let h = u32_(&mut r)? as usize;
        let v = u32_(&mut r)? as usize;
        let mut u64_ = |r: &mut dyn Read| -> Result<u64> {
            r.read_exact(&mut b8)?;
            Ok(u64::from_le_bytes(b8))
        };
        let nx = u64_(&mut r)? as usize;
        let nz = u64_(&mut r)? as usize;
        let dx = f64::from_bits(u64_(&mut r)?);
        let dz = f64::from_bits(u64_(&mut r)?);
        let time = f64::from_bits(u64_(&mut r)?);
        let mut fields: [Vec<f64>; 4] = Default::default();
        for f in &mut fields {
            let len = u64_(&mut r)? as usize;
            f.reserve(len);
            for _ in 0..len {
                f.push(f64::from_bits(u64_(&mut r)?));
            }
        }
        Ok(Self { case: OrderCase::new(h, v)?, nx, nz, dx, dz, time, fields })
    }
}

/// Writes all four fields evaluated at cell centres as `x,z,u,w,p,b` rows
/// (`z` outer, `x` inner), after the given `#` metadata lines.
pub fn write_csv(mut w: impl Write, header: &[String], state: &StateVector, mesh: &SliceMesh, dofs: &DofMap) -> Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "x,z,u,w,p,b")?;
    for cz in 0..mesh.nz {
        for cx in 0..mesh.nx {
            let cell = cz * mesh.nx + cx;
            let v = Field::ALL.map(|f| evaluate_in_cell(state, dofs, f, cell, 0.5, 0.5));
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{:e}",
                (cx as f64 + 0.5) * mesh.dx,
                (cz as f64 + 0.5) * mesh.dz,
                v[0],
                v[1],
                v[2],
                v[3]
            )?;
        }
    }
    Ok(())
}
