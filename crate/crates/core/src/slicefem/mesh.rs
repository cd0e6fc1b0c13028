use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fespace::{build_case, CaseSpaces, DofTag, Field, OrderCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ZBoundary {
    Periodic,
    /// `w = 0` on the bottom and top boundaries.
    RigidLid,
}

/// Uniform structured vertical slice, periodic in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceMesh {
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub z_boundary: ZBoundary,
}

impl SliceMesh {
    pub fn new(nx: usize, nz: usize, dx: f64, dz: f64, z_boundary: ZBoundary) -> Result<Self> {
        if nx < 4 || nz < 4 {
            return domain(format!("mesh needs at least 4 × 4 cells, got {nx} × {nz}"));
        }
        if !(dx > 0.0 && dz > 0.0 && dx.is_finite() && dz.is_finite()) {
            return domain(format!("cell sizes must be positive, got dx={dx}, dz={dz}"));
        }
        Ok(Self { nx, nz, dx, dz, z_boundary })
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn height(&self) -> f64 {
        self.nz as f64 * self.dz
    }

    pub fn cells(&self) -> usize {
        self.nx * self.nz
    }
}

/// Global numbering of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    /// `cell_local[cell * nloc + local]` is the free global index (within the
    /// field) of that local node, or `None` if it is constrained to zero.
    cell_local: Vec<Option<usize>>,
    nloc: usize,
    /// Physical position of each free DoF.
    pub positions: Vec<(f64, f64)>,
    /// Owning cell column and x-invariant class `(cz, unique id)` of each free DoF.
    pub columns: Vec<(usize, (usize, usize))>,
    /// Number of DoFs eliminated by boundary constraints.
    pub constrained: usize,
}

impl FieldMap {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn global(&self, cell: usize, local: usize) -> Option<usize> {
        self.cell_local[cell * self.nloc + local]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub case: OrderCase,
    pub spaces: CaseSpaces,
    fields: [FieldMap; 4],
    offsets: [usize; 5],
}

impl DofMap {
    pub fn field(&self, f: Field) -> &FieldMap {
        &self.fields[f.index()]
    }

    /// Start of field `f` in the stacked `(u, w, p, b)` vector.
    pub fn offset(&self, f: Field) -> usize {
        self.offsets[f.index()]
    }

    pub fn range(&self, f: Field) -> std::ops::Range<usize> {
        self.offsets[f.index()]..self.offsets[f.index() + 1]
    }

    pub fn total(&self) -> usize {
        self.offsets[4]
    }

    /// Global stacked index of a local node, `None` if constrained.
    pub fn global(&self, f: Field, cell: usize, local: usize) -> Option<usize> {
        self.field(f).global(cell, local).map(|g| g + self.offset(f))
    }
}

pub fn build_mesh(c: OrderCase, nx: usize, nz: usize, dx: f64, dz: f64, z_boundary: ZBoundary) -> Result<(SliceMesh, DofMap)> {
    let mesh = SliceMesh::new(nx, nz, dx, dz, z_boundary)?;
    let dofs = build_dofmap(c, &mesh);
    Ok((mesh, dofs))
}

pub fn build_dofmap(c: OrderCase, mesh: &SliceMesh) -> DofMap {
    let spaces = build_case(c);
    let fields = Field::ALL.map(|f| field_map(&spaces, f, mesh));
    let mut offsets = [0; 5];
    for (i, fm) in fields.iter().enumerate() {
        offsets[i + 1] = offsets[i] + fm.len();
    }
    DofMap { case: c, spaces, fields, offsets }
}

fn field_map(spaces: &CaseSpaces, f: Field, mesh: &SliceMesh) -> FieldMap {
    let fs = spaces.get(f);
    let nu = fs.unique_dofs_per_cell();
    let nloc = fs.local_count();
    let (nx, nz) = (mesh.nx, mesh.nz);
    let rigid = mesh.z_boundary == ZBoundary::RigidLid;
    // raw ids cover one extra row of cells so top-boundary DoFs of a rigid lid have a home
    let raw_rows = nz + 1;
    let raw = |cx: usize, cz: usize, u: usize| (cz * nx + cx) * nu + u;

    let mut owner_raw = Vec::with_capacity(mesh.cells() * nloc);
    let mut used = vec![false; raw_rows * nx * nu];
    for cz in 0..nz {
        for cx in 0..nx {
            for n in fs.nodes() {
                let ox = (cx + n.shift.0) % nx;
                let oz = if rigid { cz + n.shift.1 } else { (cz + n.shift.1) % nz };
                let r = raw(ox, oz, n.owner);
                used[r] = true;
                owner_raw.push(r);
            }
        }
    }

    let uniq = fs.dof_numbering();
    let mut free = vec![None; used.len()];
    let mut positions = Vec::new();
    let mut columns = Vec::new();
    let mut constrained = 0;
    for (r, &is_used) in used.iter().enumerate() {
        if !is_used {
            continue;
        }
        let u = r % nu;
        let cell = r / nu;
        let (cx, cz) = (cell % nx, cell / nx);
        let d = &uniq[u];
        let on_lid = rigid && f == Field::W && d.tag == DofTag::SharedZ && (cz == 0 || cz == nz);
        if on_lid {
            constrained += 1;
            continue;
        }
        free[r] = Some(positions.len());
        positions.push(((cx as f64 + d.xi) * mesh.dx, (cz as f64 + d.eta) * mesh.dz));
        columns.push((cx, (cz, u)));
    }
    let cell_local = owner_raw.into_iter().map(|r| free[r]).collect();
    FieldMap { cell_local, nloc, positions, columns, constrained }
}
