//! Element integrals on a single `dx × dz` cell, shared by the Bloch and the
//! global assembly.
//!
//! With `S'` the tendency operator (`M ẋ = S' x`) the blocks are
//!
//! ```text
//! M_u u_t =  Gx p
//! M_w w_t =  Gz p + Q b
//! M_p p_t = -cs² (Gxᵀ u + Gzᵀ w)
//! M_b b_t = -N² Qᵀ w
//! ```
//!
//! where `Gx[i][j] = ∫ ψ_j ∂χ_i/∂x`, `Gz[i][j] = ∫ ψ_j ∂ν_i/∂z` and
//! `Q[i][j] = ∫ γ_j ν_i`, all over local (not unique) nodes.

use crate::basis1d::{gauss_rule, DEFAULT_QUAD_POINTS};
use crate::fespace::{build_case, CaseSpaces, Field, FieldSpace, OrderCase};

/// Dense row-major local matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl LocalMatrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }
}

/// Which operator a coupling block represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// `Gx`: rows U, columns P.
    GradX,
    /// `Gz`: rows W, columns P.
    GradZ,
    /// `Q`: rows W, columns B.
    Buoyancy,
}

#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub spaces: CaseSpaces,
    pub dx: f64,
    pub dz: f64,
    pub mass: [LocalMatrix; 4],
    pub grad_x: LocalMatrix,
    pub grad_z: LocalMatrix,
    pub coupling: LocalMatrix,
}

impl ElementMatrices {
    pub fn new(case: OrderCase, dx: f64, dz: f64) -> Self {
        let spaces = build_case(case);
        let q = gauss_rule(DEFAULT_QUAD_POINTS).expect("fixed rule size");
        let mut pts = Vec::with_capacity(q.len() * q.len());
        for (a, &s) in q.points.iter().enumerate() {
            for (b, &t) in q.points.iter().enumerate() {
                pts.push((s, t, q.weights[a] * q.weights[b]));
            }
        }
        let integrate = |r: &FieldSpace, c: &FieldSpace, f: &dyn Fn(&FieldSpace, usize, &FieldSpace, usize, f64, f64) -> f64| {
            let mut m = LocalMatrix::zeros(r.local_count(), c.local_count());
            for i in 0..r.local_count() {
                for j in 0..c.local_count() {
                    let v: f64 = pts.iter().map(|&(s, t, w)| w * f(r, i, c, j, s, t)).sum();
                    m.add(i, j, v);
                }
            }
            m
        };
        let mass_of = |fs: &FieldSpace| {
            integrate(fs, fs, &|r, i, c, j, s, t| {
                r.eval(&r.nodes()[i], s, t) * c.eval(&c.nodes()[j], s, t) * dx * dz
            })
        };
        let mass = Field::ALL.map(|f| mass_of(spaces.get(f)));
        let grad_x = integrate(spaces.get(Field::U), spaces.get(Field::P), &|r, i, c, j, s, t| {
            c.eval(&c.nodes()[j], s, t) * r.grad(&r.nodes()[i], s, t).0 * dz
        });
        let grad_z = integrate(spaces.get(Field::W), spaces.get(Field::P), &|r, i, c, j, s, t| {
            c.eval(&c.nodes()[j], s, t) * r.grad(&r.nodes()[i], s, t).1 * dx
        });
        let coupling = integrate(spaces.get(Field::W), spaces.get(Field::B), &|r, i, c, j, s, t| {
            c.eval(&c.nodes()[j], s, t) * r.eval(&r.nodes()[i], s, t) * dx * dz
        });
        Self { spaces, dx, dz, mass, grad_x, grad_z, coupling }
    }

    pub fn case(&self) -> OrderCase {
        self.spaces.case
    }

    pub fn block(&self, c: Coupling) -> &LocalMatrix {
        match c {
            Coupling::GradX => &self.grad_x,
            Coupling::GradZ => &self.grad_z,
            Coupling::Buoyancy => &self.coupling,
        }
    }

    /// Entries of the tendency operator `S'` as `(row field, col field, matrix, factor)`
    /// in element-local numbering; the global/Bloch assemblers scatter these.
    pub fn tendency_blocks(&self, cs: f64, n: f64) -> Vec<TendencyBlock<'_>> {
        let c2 = cs * cs;
        let n2 = n * n;
        vec![
            TendencyBlock { row: Field::U, col: Field::P, mat: &self.grad_x, factor: 1.0, transpose: false },
            TendencyBlock { row: Field::W, col: Field::P, mat: &self.grad_z, factor: 1.0, transpose: false },
            TendencyBlock { row: Field::W, col: Field::B, mat: &self.coupling, factor: 1.0, transpose: false },
            TendencyBlock { row: Field::P, col: Field::U, mat: &self.grad_x, factor: -c2, transpose: true },
            TendencyBlock { row: Field::P, col: Field::W, mat: &self.grad_z, factor: -c2, transpose: true },
            TendencyBlock { row: Field::B, col: Field::W, mat: &self.coupling, factor: -n2, transpose: true },
        ]
    }
}

/// One block of `S'` in element-local numbering: entry `(i, j)` equals
/// `factor · mat[i][j]` or `factor · mat[j][i]` when `transpose` is set.
#[derive(Debug, Clone, Copy)]
pub struct TendencyBlock<'a> {
    pub row: Field,
    pub col: Field,
    pub mat: &'a LocalMatrix,
    pub factor: f64,
    pub transpose: bool,
}

impl TendencyBlock<'_> {
    pub fn rows(&self) -> usize {
        if self.transpose { self.mat.cols } else { self.mat.rows }
    }

    pub fn cols(&self) -> usize {
        if self.transpose { self.mat.rows } else { self.mat.cols }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let v = if self.transpose { self.mat.get(j, i) } else { self.mat.get(i, j) };
        self.factor * v
    }
}
