use super::mesh::{DofMap, SliceMesh};
use crate::basis1d::gauss_rule;
use crate::error::{domain, Result};
use crate::fespace::Field;
use crate::sparse::pcg;

/// Stacked `(u, w, p, b)` coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub data: Vec<f64>,
    offsets: [usize; 5],
}

impl StateVector {
    pub fn zeros(dofs: &DofMap) -> Self {
        let mut offsets = [0; 5];
        for f in Field::ALL {
            offsets[f.index() + 1] = dofs.range(f).end;
        }
        Self { data: vec![0.0; dofs.total()], offsets }
    }

    pub fn from_vec(dofs: &DofMap, data: Vec<f64>) -> Result<Self> {
        let mut s = Self::zeros(dofs);
        if data.len() != s.data.len() {
            return domain(format!("state length {} does not match DoF total {}", data.len(), s.data.len()));
        }
        s.data = data;
        Ok(s)
    }

    pub fn field(&self, f: Field) -> &[f64] {
        &self.data[self.offsets[f.index()]..self.offsets[f.index() + 1]]
    }

    pub fn field_mut(&mut self, f: Field) -> &mut [f64] {
        &mut self.data[self.offsets[f.index()]..self.offsets[f.index() + 1]]
    }
}

/// Quadrature points per direction for right-hand sides of projections.
const PROJECTION_QUAD: usize = 5;

/// L2 projection of each field's analytic profile onto its FE space.
pub fn project_initial(
    init: impl Fn(Field, f64, f64) -> f64 + Sync,
    mesh: &SliceMesh,
    dofs: &DofMap,
    mass: &crate::sparse::CsrMatrix,
) -> Result<StateVector> {
    let q = gauss_rule(PROJECTION_QUAD)?;
    let mut state = StateVector::zeros(dofs);
    for f in Field::ALL {
        let fs = dofs.spaces.get(f);
        let fm = dofs.field(f);
        let range = dofs.range(f);
        let mut rhs = vec![0.0; fm.len()];
        for cell in 0..mesh.cells() {
            let (cx, cz) = ((cell % mesh.nx) as f64, (cell / mesh.nx) as f64);
            for (a, &s) in q.points.iter().enumerate() {
                for (b, &t) in q.points.iter().enumerate() {
                    let w = q.weights[a] * q.weights[b] * mesh.dx * mesh.dz;
                    let val = init(f, (cx + s) * mesh.dx, (cz + t) * mesh.dz);
                    if val == 0.0 {
                        continue;
                    }
                    for (i, n) in fs.nodes().iter().enumerate() {
                        if let Some(g) = fm.global(cell, i) {
                            rhs[g] += w * val * fs.eval(n, s, t);
                        }
                    }
                }
            }
        }
        if rhs.iter().all(|&v| v == 0.0) {
            continue;
        }
        let block = mass.block(range.start, range.len(), range.start, range.len());
        let x = pcg(&block, &rhs, 1e-14, 10 * rhs.len() + 100)?;
        state.field_mut(f).copy_from_slice(&x);
    }
    Ok(state)
}

/// FE field value at physical point `(x, z)`; `x` wraps periodically.
pub fn evaluate(state: &StateVector, dofs: &DofMap, mesh: &SliceMesh, f: Field, x: f64, z: f64) -> Result<f64> {
    let h = mesh.height();
    if !(0.0..=h).contains(&z) {
        return domain(format!("height {z} outside [0, {h}]"));
    }
    let xw = x.rem_euclid(mesh.width());
    let cx = ((xw / mesh.dx).floor() as usize).min(mesh.nx - 1);
    let cz = ((z / mesh.dz).floor() as usize).min(mesh.nz - 1);
    let s = xw / mesh.dx - cx as f64;
    let t = z / mesh.dz - cz as f64;
    Ok(evaluate_in_cell(state, dofs, f, cz * mesh.nx + cx, s, t))
}

/// FE field value at reference point `(s, t)` of cell `cell`.
pub fn evaluate_in_cell(state: &StateVector, dofs: &DofMap, f: Field, cell: usize, s: f64, t: f64) -> f64 {
    let fs = dofs.spaces.get(f);
    let fm = dofs.field(f);
    let vals = state.field(f);
    fs.nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, n)| fm.global(cell, i).map(|g| vals[g] * fs.eval(n, s, t)))
        .sum()
}
