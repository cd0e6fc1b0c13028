use rayon::prelude::*;

use super::mesh::{DofMap, SliceMesh};
use crate::bloch::PhysParams;
use crate::element::ElementMatrices;
use crate::fespace::Field;
use crate::sparse::{dot, CsrMatrix};

/// Global semi-discrete system `M ẋ = S' x` over the stacked `(u, w, p, b)` vector.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub mass: CsrMatrix,
    /// Tendency operator `S'`.
    pub tendency: CsrMatrix,
    pub phys: PhysParams,
    /// Block boundaries of the stacked vector.
    pub offsets: [usize; 5],
    pub columns: ColumnLayout,
}

/// x-translation structure of the stacked vector: every DoF is the copy in
/// cell column `cx` of one of `classes` column DoFs.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnLayout {
    pub nx: usize,
    pub classes: usize,
    /// `(class, cx)` of each stacked index.
    pub of_dof: Vec<(usize, usize)>,
    /// Stacked index of `(class, cx)` at `class * nx + cx`.
    pub dof_of: Vec<usize>,
}

impl ColumnLayout {
    fn new(mesh: &SliceMesh, dofs: &DofMap) -> Self {
        let nx = mesh.nx;
        let mut of_dof = Vec::with_capacity(dofs.total());
        let mut class_ids = std::collections::BTreeMap::new();
        for f in Field::ALL {
            for &(cx, key) in &dofs.field(f).columns {
                let next = class_ids.len();
                let class = *class_ids.entry((f.index(), key)).or_insert(next);
                of_dof.push((class, cx));
            }
        }
        let classes = class_ids.len();
        let mut dof_of = vec![usize::MAX; classes * nx];
        for (g, &(c, cx)) in of_dof.iter().enumerate() {
            dof_of[c * nx + cx] = g;
        }
        debug_assert!(dof_of.iter().all(|&g| g != usize::MAX));
        Self { nx, classes, of_dof, dof_of }
    }
}

impl GlobalSystem {
    pub fn dim(&self) -> usize {
        self.mass.nrows
    }

    /// Diagonal of `Λ = diag(1, 1, 1/cs², 1/N²)` per DoF.
    pub fn energy_weights(&self) -> Vec<f64> {
        let c2 = self.phys.cs * self.phys.cs;
        let n2 = self.phys.n * self.phys.n;
        let mut w = vec![1.0; self.dim()];
        for i in self.offsets[2]..self.offsets[3] {
            w[i] = 1.0 / c2;
        }
        for i in self.offsets[3]..self.offsets[4] {
            w[i] = if n2 > 0.0 { 1.0 / n2 } else { 0.0 };
        }
        w
    }

    /// `E = ½ xᵀ Λ M x`, conserved by the semi-discrete flow.
    pub fn energy(&self, x: &[f64]) -> f64 {
        let mx = self.mass.matvec(x);
        let w = self.energy_weights();
        0.5 * x.iter().zip(&mx).zip(&w).map(|((a, b), c)| a * b * c).sum::<f64>()
    }

    /// `xᵀ Λ S' x`, which vanishes when the operator is energy-neutral.
    pub fn energy_rate(&self, x: &[f64]) -> f64 {
        let sx = self.tendency.matvec(x);
        let w = self.energy_weights();
        let wx: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a * b).collect();
        dot(&wx, &sx)
    }
}

pub fn assemble_global(mesh: &SliceMesh, dofs: &DofMap, p: PhysParams) -> GlobalSystem {
    let el = ElementMatrices::new(dofs.case, mesh.dx, mesh.dz);
    let n = dofs.total();
    let blocks = el.tendency_blocks(p.cs, p.n);

    // one triplet buffer per cell row, concatenated in row order
    let rows: Vec<(Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>)> = (0..mesh.nz)
        .into_par_iter()
        .map(|cz| {
            let mut mt = Vec::new();
            let mut st = Vec::new();
            for cx in 0..mesh.nx {
                let cell = cz * mesh.nx + cx;
                for f in Field::ALL {
                    let nl = dofs.spaces.get(f).local_count();
                    let m = &el.mass[f.index()];
                    for i in 0..nl {
                        let Some(gi) = dofs.global(f, cell, i) else { continue };
                        for j in 0..nl {
                            if let Some(gj) = dofs.global(f, cell, j) {
                                let v = m.get(i, j);
                                if v != 0.0 {
                                    mt.push((gi, gj, v));
                                }
                            }
                        }
                    }
                }
                for b in &blocks {
                    for i in 0..b.rows() {
                        let Some(gi) = dofs.global(b.row, cell, i) else { continue };
                        for j in 0..b.cols() {
                            if let Some(gj) = dofs.global(b.col, cell, j) {
                                let v = b.entry(i, j);
                                if v != 0.0 {
                                    st.push((gi, gj, v));
                                }
                            }
                        }
                    }
                }
            }
            (mt, st)
        })
        .collect();
    let (mut mt, mut st) = (Vec::new(), Vec::new());
    for (a, b) in rows {
        mt.extend(a);
        st.extend(b);
    }
    let mut offsets = [0; 5];
    for f in Field::ALL {
        offsets[f.index() + 1] = dofs.range(f).end;
    }
    GlobalSystem {
        mass: CsrMatrix::from_triplets(n, n, mt),
        tendency: CsrMatrix::from_triplets(n, n, st),
        phys: p,
        offsets,
        columns: ColumnLayout::new(mesh, dofs),
    }
}
