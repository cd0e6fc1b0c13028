//! Per-wavenumber (Bloch) reduction of the linearised system.
//!
//! A global coefficient at physical position `(X, Z)` is written as
//! `â e^{i(kX + lZ)}`, with every DoF referenced to its own position. Folding
//! a cell's element integrals onto the owned DoFs then yields dense matrices
//! `(M, S)` of size `4(h+1)(v+1)` whose generalised eigenvalues
//! `ω x̂ = −i M⁻¹ S x̂` are the discrete frequencies.
//!
//! `S` uses the sign convention `−iω M x̂ + S x̂ = 0`, i.e. `S = −S'` where
//! `S'` is the tendency operator of [`crate::element`].

mod closed_form;

pub use closed_form::closed_form_bloch;

use std::collections::VecDeque;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::element::ElementMatrices;
use crate::error::{domain, Result, WaveError};
use crate::fespace::{Field, OrderCase};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    /// Sound speed (m/s).
    pub cs: f64,
    /// Buoyancy frequency (1/s).
    pub n: f64,
}

impl PhysParams {
    pub fn new(cs: f64, n: f64) -> Result<Self> {
        if !(cs > 0.0 && cs.is_finite()) {
            return domain(format!("sound speed must be positive, got {cs}"));
        }
        if !(n >= 0.0 && n.is_finite()) {
            return domain(format!("buoyancy frequency must be non-negative, got {n}"));
        }
        Ok(Self { cs, n })
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        Self { cs: 340.0, n: 0.01 }
    }
}

#[derive(Debug, Clone)]
pub struct BlochSystem {
    pub case: OrderCase,
    pub k: f64,
    pub l: f64,
    pub dx: f64,
    pub dz: f64,
    pub phys: PhysParams,
    pub m: Mat<c64>,
    pub s: Mat<c64>,
}

impl BlochSystem {
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `−i M⁻¹ S`, whose eigenvalues are the discrete frequencies.
    pub fn frequency_operator(&self) -> Result<Mat<c64>> {
        let f = eigen::solve(&self.m, &self.s).map_err(|_| {
            WaveError::Numerical(format!(
                "singular Bloch mass matrix for case {} at k={}, l={}",
                self.case, self.k, self.l
            ))
        })?;
        Ok(Mat::from_fn(f.nrows(), f.ncols(), |i, j| f[(i, j)] * c64::new(0.0, -1.0)))
    }

    /// All eigenvalues of `−i M⁻¹ S`, sorted by real part.
    pub fn omegas(&self) -> Result<Vec<c64>> {
        let mut ev = eigen::eigenvalues(&self.frequency_operator()?)?;
        eigen::sort_complex(&mut ev);
        Ok(ev)
    }

    /// Frequencies from the energy-weighted Hermitian pencil
    /// `(−i Λ S, Λ M)`, `Λ = diag(1, 1, 1/cs², 1/N²)`. Real by construction,
    /// so this is an independent route to the same spectrum. Requires `N > 0`.
    pub fn hermitian_omegas(&self) -> Result<Vec<f64>> {
        if self.phys.n <= 0.0 {
            return domain("energy-weighted pencil needs N > 0");
        }
        let nb = self.case.dofs_per_cell();
        let w = |i: usize| match i / nb {
            2 => 1.0 / (self.phys.cs * self.phys.cs),
            3 => 1.0 / (self.phys.n * self.phys.n),
            _ => 1.0,
        };
        let n = self.dim();
        let a = Mat::from_fn(n, n, |i, j| self.s[(i, j)] * c64::new(0.0, -w(i)));
        let b = Mat::from_fn(n, n, |i, j| self.m[(i, j)] * w(i));
        eigen::hermitian_pencil_eigenvalues(&a, &b)
    }

    /// Which 4 × 4 field blocks of `S` contain a nonzero entry.
    pub fn s_block_pattern(&self, tol: f64) -> [[bool; 4]; 4] {
        let nb = self.case.dofs_per_cell();
        let mut out = [[false; 4]; 4];
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if self.s[(i, j)].norm() > tol {
                    out[i / nb][j / nb] = true;
                }
            }
        }
        out
    }
}

/// Block pattern of `S` in `(u, w, p, b)` order.
pub const S_BLOCK_PATTERN: [[bool; 4]; 4] = [
    [false, false, true, false],
    [false, false, true, true],
    [true, true, false, false],
    [false, true, false, false],
];

fn check_wavenumbers(k: f64, l: f64, dx: f64, dz: f64) -> Result<()> {
    if !(dx > 0.0 && dz > 0.0) {
        return domain(format!("cell sizes must be positive, got dx={dx}, dz={dz}"));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let ok = |t: f64| t.is_finite() && (-1e-12..two_pi).contains(&t);
    if !ok(k * dx) || !ok(l * dz) {
        return domain(format!(
            "scaled wavenumbers ({}, {}) outside [0, 2π)",
            k * dx,
            l * dz
        ));
    }
    Ok(())
}

pub fn assemble_bloch(c: OrderCase, k: f64, l: f64, dx: f64, dz: f64, p: PhysParams) -> Result<BlochSystem> {
    check_wavenumbers(k, l, dx, dz)?;
    let el = ElementMatrices::new(c, dx, dz);
    Ok(assemble_from_elements(&el, k, l, p))
}

/// Bloch assembly reusing precomputed element matrices (sweeps call this).
pub fn assemble_from_elements(el: &ElementMatrices, k: f64, l: f64, p: PhysParams) -> BlochSystem {
    let c = el.case();
    let nb = c.dofs_per_cell();
    let dim = c.system_dim();
    let (dx, dz) = (el.dx, el.dz);
    let mut m = Mat::<c64>::zeros(dim, dim);
    let mut s = Mat::<c64>::zeros(dim, dim);
    let phase = |xi0: f64, eta0: f64, xi1: f64, eta1: f64| {
        c64::cis(k * (xi1 - xi0) * dx + l * (eta1 - eta0) * dz)
    };

    for f in Field::ALL {
        let fs = el.spaces.get(f);
        let off = f.index() * nb;
        let mass = &el.mass[f.index()];
        for (i, a) in fs.nodes().iter().enumerate() {
            for (j, b) in fs.nodes().iter().enumerate() {
                let v = mass.get(i, j);
                if v != 0.0 {
                    m[(off + a.owner, off + b.owner)] += phase(a.xi, a.eta, b.xi, b.eta) * v;
                }
            }
        }
    }
    for blk in el.tendency_blocks(p.cs, p.n) {
        let rs = el.spaces.get(blk.row);
        let cs = el.spaces.get(blk.col);
        let (ro, co) = (blk.row.index() * nb, blk.col.index() * nb);
        for (i, a) in rs.nodes().iter().enumerate() {
            for (j, b) in cs.nodes().iter().enumerate() {
                let v = blk.entry(i, j);
                if v != 0.0 {
                    s[(ro + a.owner, co + b.owner)] -= phase(a.xi, a.eta, b.xi, b.eta) * v;
                }
            }
        }
    }
    BlochSystem { case: c, k, l, dx, dz, phys: p, m, s }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    /// Largest distance between the sorted eigenvalue lists of `−i M⁻¹ S`.
    pub eig_mismatch: f64,
    /// `max |D F_a D⁻¹ − F_b| / max |F_b|` for the best diagonal phase similarity `D`,
    /// with `F = M⁻¹ S`.
    pub entry_mismatch_after_phase: f64,
}

pub fn oracle_compare(a: &BlochSystem, b: &BlochSystem) -> Result<OracleReport> {
    if a.dim() != b.dim() || a.case != b.case {
        return domain(format!(
            "cannot compare Bloch systems of case {} (dim {}) and case {} (dim {})",
            a.case,
            a.dim(),
            b.case,
            b.dim()
        ));
    }
    let ea = a.omegas()?;
    let eb = b.omegas()?;
    let eig_mismatch = ea.iter().zip(&eb).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);

    let fa = eigen::solve(&a.m, &a.s)?;
    let fb = eigen::solve(&b.m, &b.s)?;
    let n = a.dim();
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| fb[(i, j)].norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = 1e-8 * scale;

    // propagate phases along the coupling graph: F_b[i][j] = d_i F_a[i][j] / d_j
    let mut d: Vec<Option<c64>> = vec![None; n];
    for root in 0..n {
        if d[root].is_some() {
            continue;
        }
        d[root] = Some(c64::new(1.0, 0.0));
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let di = d[i].unwrap();
            for j in 0..n {
                if d[j].is_some() {
                    continue;
                }
                if fa[(i, j)].norm() > tol && fb[(i, j)].norm() > tol {
                    let r = di * fa[(i, j)] / fb[(i, j)];
                    d[j] = Some(r / r.norm());
                    queue.push_back(j);
                } else if fa[(j, i)].norm() > tol && fb[(j, i)].norm() > tol {
                    let r = fb[(j, i)] * di / fa[(j, i)];
                    d[j] = Some(r / r.norm());
                    queue.push_back(j);
                }
            }
        }
    }
    let d: Vec<c64> = d.into_iter().map(|x| x.unwrap()).collect();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let r = d[i] * fa[(i, j)] / d[j] - fb[(i, j)];
            worst = worst.max(r.norm());
        }
    }
    Ok(OracleReport { eig_mismatch, entry_mismatch_after_phase: worst / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn case(h: usize, v: usize) -> OrderCase {
        OrderCase::new(h, v).unwrap()
    }

    #[test]
    fn p1_0_zero_wavenumber_blocks() {
        let sys = assemble_bloch(case(1, 0), 0.0, 0.0, 1000.0, 1000.0, PhysParams::default()).unwrap();
        let mp = 1.0e6 / 6.0;
        assert_relative_eq!(sys.m[(4, 4)].re, 2.0 * mp, max_relative = 1e-13);
        assert_relative_eq!(sys.m[(4, 5)].re, mp, max_relative = 1e-13);
        assert_relative_eq!(sys.m[(5, 5)].re, 2.0 * mp, max_relative = 1e-13);
        // D_x^u is the (u, p) block of S
        let d = 1000.0 / 6.0;
        let expect = [[4.0, -4.0], [-4.0, 4.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((sys.s[(i, 4 + j)] - c64::new(expect[i][j] * d, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn dimensions_and_pattern() {
        for c in OrderCase::ALL {
            let sys = assemble_bloch(c, 1e-3, 2e-3, 1000.0, 1000.0, PhysParams::default()).unwrap();
            assert_eq!(sys.dim(), c.system_dim());
            assert_eq!(sys.s_block_pattern(0.0), S_BLOCK_PATTERN);
        }
    }

    #[test]
    fn mass_is_hermitian() {
        for c in OrderCase::ALL {
            let sys = assemble_bloch(c, 2.1e-3, 4.7e-3, 1000.0, 800.0, PhysParams::default()).unwrap();
            for i in 0..sys.dim() {
                for j in 0..sys.dim() {
                    assert!((sys.m[(i, j)] - sys.m[(j, i)].conj()).norm() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = PhysParams::default();
        assert!(assemble_bloch(case(0, 0), 0.0, 0.0, 0.0, 1.0, p).is_err());
        assert!(assemble_bloch(case(0, 0), 7e-3, 0.0, 1000.0, 1000.0, p).is_err());
        assert!(PhysParams::new(-1.0, 0.01).is_err());
        assert!(PhysParams::new(340.0, -0.01).is_err());
    }

    #[test]
    fn hermitian_route_agrees() {
        for c in OrderCase::ALL {
            let sys = assemble_bloch(c, 1.3e-3, 2.9e-3, 1000.0, 1000.0, PhysParams::default()).unwrap();
            let a: Vec<f64> = sys.omegas().unwrap().iter().map(|z| z.re).collect();
            let b = sys.hermitian_omegas().unwrap();
            let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9 * scale, "{c}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn compare_identical_is_zero() {
        let sys = assemble_bloch(case(1, 1), 1e-3, 1e-3, 1000.0, 1000.0, PhysParams::default()).unwrap();
        let r = oracle_compare(&sys, &sys).unwrap();
        assert_eq!(r.eig_mismatch, 0.0);
        assert!(r.entry_mismatch_after_phase < 1e-15);
        let other = assemble_bloch(case(1, 0), 1e-3, 1e-3, 1000.0, 1000.0, PhysParams::default()).unwrap();
        assert!(oracle_compare(&sys, &other).is_err());
    }
}
