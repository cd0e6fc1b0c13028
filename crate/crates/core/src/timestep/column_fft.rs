//! Direct solver for operators that commute with cell shifts in `x`.
//!
//! On a uniform x-periodic mesh the implicit operator is block circulant:
//! an entry depends only on the two DoF classes and the column offset. A
//! discrete Fourier transform across columns therefore splits one large
//! solve into `nx` independent dense solves of the size of a single column.

use std::sync::Arc;

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, WaveError};
use crate::slicefem::ColumnLayout;
use crate::sparse::CsrMatrix;

pub(crate) struct ColumnFftSolver {
    layout: ColumnLayout,
    /// Real and imaginary parts of the inverse column operators for
    /// wavenumbers `0..=nx/2`; the rest follow by conjugate symmetry since the
    /// operator is real. Columns are small, so an explicit inverse beats
    /// repeated triangular solves, and split real parts use faster kernels
    /// than complex products.
    inverses: Vec<(Mat<f64>, Mat<f64>)>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ColumnFftSolver {
    pub(crate) fn new(a: &CsrMatrix, layout: &ColumnLayout) -> Result<Self> {
        let (nx, nc) = (layout.nx, layout.classes);
        // couplings seen from the column cx = 0: (row class, col class, offset, value)
        let mut entries = Vec::new();
        for c in 0..nc {
            let row = layout.dof_of[c * nx];
            for (j, v) in a.row(row) {
                let (cc, cx) = layout.of_dof[j];
                entries.push((c, cc, cx, v));
            }
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let inverses = (0..=nx / 2)
            .into_par_iter()
            .map(|m| {
                let theta = two_pi * m as f64 / nx as f64;
                let mut am = Mat::<c64>::zeros(nc, nc);
                for &(c, cc, cx, v) in &entries {
                    am[(c, cc)] += c64::cis(theta * cx as f64) * v;
                }
                let inv = am.partial_piv_lu().inverse();
                (Mat::from_fn(nc, nc, |i, j| inv[(i, j)].re), Mat::from_fn(nc, nc, |i, j| inv[(i, j)].im))
            })
            .collect::<Vec<_>>();
        if !inverses.iter().all(|(re, im)| re.is_all_finite() && im.is_all_finite()) {
            return Err(WaveError::Numerical("singular column operator".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            layout: layout.clone(),
            inverses,
            forward: planner.plan_fft_forward(nx),
            inverse: planner.plan_fft_inverse(nx),
        })
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let (nx, nc) = (self.layout.nx, self.layout.classes);
        // rows: classes, columns: cx -> Fourier index
        let mut modes: Vec<c64> = self.layout.dof_of.iter().map(|&g| c64::new(rhs[g], 0.0)).collect();
        let mut scratch = vec![c64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for row in modes.chunks_mut(nx) {
            self.forward.process_with_scratch(row, &mut scratch);
        }
        let half = nx / 2;
        let solved: Vec<Vec<c64>> = (0..=half)
            .into_par_iter()
            .map(|m| {
                let b = Mat::<f64>::from_fn(nc, 2, |c, j| {
                    let z = modes[c * nx + m];
                    if j == 0 { z.re } else { z.im }
                });
                let (re, im) = &self.inverses[m];
                let (p, q) = (re * &b, im * &b);
                (0..nc).map(|c| c64::new(p[(c, 0)] - q[(c, 1)], p[(c, 1)] + q[(c, 0)])).collect()
            })
            .collect();
        for (m, col) in solved.iter().enumerate() {
            for (c, &v) in col.iter().enumerate() {
                modes[c * nx + m] = v;
                if m != 0 && m != nx - m {
                    modes[c * nx + nx - m] = v.conj();
                }
            }
        }
        for row in modes.chunks_mut(nx) {
            self.inverse.process_with_scratch(row, &mut scratch);
        }
        let scale = 1.0 / nx as f64;
        let mut out = vec![0.0; rhs.len()];
        for (i, &g) in self.layout.dof_of.iter().enumerate() {
            out[g] = modes[i].re * scale;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(WaveError::Numerical("column Fourier solve produced non-finite values".into()));
        }
        Ok(out)
    }
}
