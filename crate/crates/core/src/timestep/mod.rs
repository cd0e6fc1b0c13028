//! Off-centred implicit time integration of `M ẋ = S' x`.
//!
//! One step solves `(M − α Δt S') x⁺ = (M + (1−α) Δt S') x`. The update is
//! written as the outer/inner quasi-Newton loop used for the nonlinear
//! equations: an explicit forcing stage, an advection stage (the identity for
//! a state linearised about rest) and repeated corrections from the
//! residual. For this linear system a single correction is exact, so
//! `k_max = i_max = 1` by default.

mod column_fft;
mod frequency;

pub use frequency::{extract_frequency, trapezoid_frequency, FrequencyFit};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::Mat;

use crate::error::{domain, Result, WaveError};
use crate::slicefem::{GlobalSystem, StateVector};
use crate::sparse::{bicgstab, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    /// Cached sparse LU factorisation.
    #[default]
    Direct,
    /// Jacobi-preconditioned BiCGSTAB.
    Iterative,
    /// Fourier transform across cell columns plus one dense LU per
    /// horizontal wavenumber; exact, and much cheaper than sparse LU on long
    /// thin slices.
    ColumnFft,
}

/// Relative tolerance of the iterative fallback.
pub const ITERATIVE_TOLERANCE: f64 = 1e-10;

enum Factor {
    Direct(Box<Lu<usize, f64>>),
    /// `D^{-1/2} Λ A D^{-1/2}` with `Λ` the energy weights and `D` the
    /// diagonal of `Λ A`: the symmetric part is positive definite and the
    /// skew part stays skew, which keeps BiCGSTAB well behaved.
    Iterative { scaled: CsrMatrix, left: Vec<f64>, right: Vec<f64> },
    ColumnFft(Box<column_fft::ColumnFftSolver>),
}

pub struct ThetaScheme {
    pub alpha: f64,
    pub dt: f64,
    /// Outer (advection) iterations per step.
    pub k_max: usize,
    /// Inner (implicit correction) iterations per outer iteration.
    pub i_max: usize,
    mass: CsrMatrix,
    tendency: CsrMatrix,
    factor: Factor,
}

impl std::fmt::Debug for ThetaScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThetaScheme")
            .field("alpha", &self.alpha)
            .field("dt", &self.dt)
            .field("k_max", &self.k_max)
            .field("i_max", &self.i_max)
            .field("dim", &self.mass.nrows)
            .finish()
    }
}

impl ThetaScheme {
    pub fn new(sys: &GlobalSystem, dt: f64, alpha: f64, solver: LinearSolver) -> Result<Self> {
        if !(0.5..=1.0).contains(&alpha) {
            return domain(format!("implicit weight alpha must lie in [0.5, 1], got {alpha}"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("timestep must be positive, got {dt}"));
        }
        let implicit = sys.mass.axpby(1.0, &sys.tendency, -alpha * dt);
        let factor = match solver {
            LinearSolver::Direct => {
                let lu = implicit
                    .to_faer()?
                    .sp_lu()
                    .map_err(|e| WaveError::Numerical(format!("implicit operator factorisation failed: {e:?}")))?;
                Factor::Direct(Box::new(lu))
            }
            LinearSolver::Iterative => {
                let weights: Vec<f64> = sys.energy_weights().into_iter().map(|w| if w > 0.0 { w } else { 1.0 }).collect();
                let weighted = implicit.scale_rows(&weights);
                let right: Vec<f64> = weighted.diagonal().iter().map(|d| 1.0 / d.abs().sqrt()).collect();
                let scaled = weighted.scale_rows(&right).scale_cols(&right);
                let left = weights.iter().zip(&right).map(|(w, r)| w * r).collect();
                Factor::Iterative { scaled, left, right }
            }
            LinearSolver::ColumnFft => {
                Factor::ColumnFft(Box::new(column_fft::ColumnFftSolver::new(&implicit, &sys.columns)?))
            }
        };
        Ok(Self {
            alpha,
            dt,
            k_max: 1,
            i_max: 1,
            mass: sys.mass.clone(),
            tendency: sys.tendency.clone(),
            factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match &self.factor {
            Factor::Direct(lu) => {
                let mut b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
                lu.solve_in_place(b.as_mut());
                let out: Vec<f64> = (0..rhs.len()).map(|i| b[(i, 0)]).collect();
                if out.iter().any(|v| !v.is_finite()) {
                    return Err(WaveError::Numerical("implicit solve produced non-finite values".into()));
                }
                Ok(out)
            }
            Factor::Iterative { scaled, left, right } => {
                let n = rhs.len();
                let b: Vec<f64> = rhs.iter().zip(left).map(|(r, w)| r * w).collect();
                let y = bicgstab(scaled, &b, &vec![0.0; n], ITERATIVE_TOLERANCE, 20 * n + 1000)?;
                Ok(y.iter().zip(right).map(|(y, r)| y * r).collect())
            }
            Factor::ColumnFft(s) => s.solve(rhs),
        }
    }

    /// Advances a raw stacked vector by one step.
    pub fn step_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return domain(format!("state has length {}, scheme expects {}", x.len(), self.dim()));
        }
        let n = x.len();
        let mx = self.mass.matvec(x);
        let sx = self.tendency.matvec(x);
        // explicit forcing, in weak form: M x + (1−α) Δt S' x
        let forcing: Vec<f64> = (0..n).map(|i| mx[i] + (1.0 - self.alpha) * self.dt * sx[i]).collect();
        let mut next = x.to_vec();
        let mut m_next = vec![0.0; n];
        let mut s_next = vec![0.0; n];
        for _ in 0..self.k_max {
            // advection about a resting state is the identity, so the advected
            // forcing is the forcing itself
            let advected = &forcing;
            for _ in 0..self.i_max {
                self.mass.matvec_into(&next, &mut m_next);
                self.tendency.matvec_into(&next, &mut s_next);
                let residual: Vec<f64> = (0..n)
                    .map(|i| advected[i] + self.alpha * self.dt * s_next[i] - m_next[i])
                    .collect();
                let delta = self.solve(&residual)?;
                for (a, d) in next.iter_mut().zip(&delta) {
                    *a += d;
                }
            }
        }
        Ok(next)
    }

    pub fn step(&self, x: &StateVector) -> Result<StateVector> {
        let mut out = x.clone();
        out.data = self.step_vec(&x.data)?;
        Ok(out)
    }
}

/// Free function form of [`ThetaScheme::step`].
pub fn step(scheme: &ThetaScheme, x: &StateVector) -> Result<StateVector> {
    scheme.step(x)
}

#[cfg(test)]
mod tests;
