//! Global finite-element assembly on a periodic vertical slice.

mod assemble;
mod mesh;
mod snapshot;
mod state;

pub use assemble::{assemble_global, ColumnLayout, GlobalSystem};
pub use mesh::{build_dofmap, build_mesh, DofMap, FieldMap, SliceMesh, ZBoundary};
pub use snapshot::{write_csv, Snapshot, SNAPSHOT_MAGIC, SNAPSHOT_SCHEMA};
pub use state::{evaluate, evaluate_in_cell, project_initial, StateVector};

use faer::c64;

use crate::bloch::BlochSystem;
use crate::error::{domain, Result};
use crate::fespace::Field;

/// Samples a Bloch vector `x̂` onto the global DoFs of a periodic mesh:
/// each DoF takes its owner's amplitude times `e^{i(kX + lZ)}` at its own
/// position. The wavenumbers must be commensurate with the mesh.
pub fn sample_bloch_vector(sys: &BlochSystem, x_hat: &[c64], mesh: &SliceMesh, dofs: &DofMap) -> Result<Vec<c64>> {
    if mesh.z_boundary != ZBoundary::Periodic {
        return domain("Bloch sampling needs a doubly periodic mesh");
    }
    if sys.case != dofs.case || x_hat.len() != sys.dim() {
        return domain("Bloch vector does not match the mesh's order case");
    }
    let commensurate = |k: f64, len: f64| {
        let m = k * len / (2.0 * std::f64::consts::PI);
        (m - m.round()).abs() < 1e-9
    };
    if !commensurate(sys.k, mesh.width()) || !commensurate(sys.l, mesh.height()) {
        return domain(format!("wavenumbers ({}, {}) are not periodic on the mesh", sys.k, sys.l));
    }
    if (sys.dx - mesh.dx).abs() > 1e-12 * mesh.dx || (sys.dz - mesh.dz).abs() > 1e-12 * mesh.dz {
        return domain("Bloch system and mesh use different cell sizes");
    }
    let nb = sys.case.dofs_per_cell();
    let mut out = vec![c64::new(0.0, 0.0); dofs.total()];
    for f in Field::ALL {
        let fs = dofs.spaces.get(f);
        let fm = dofs.field(f);
        let off = dofs.offset(f);
        for cell in 0..mesh.cells() {
            for (i, n) in fs.nodes().iter().enumerate() {
                if n.shift != (0, 0) {
                    continue;
                }
                if let Some(g) = fm.global(cell, i) {
                    let (x, z) = fm.positions[g];
                    out[off + g] = x_hat[f.index() * nb + n.owner] * c64::cis(sys.k * x + sys.l * z);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
