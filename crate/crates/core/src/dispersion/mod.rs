//! Discrete dispersion relations and their comparison with the exact one.
//!
//! A case of order `(h, v)` has `(h+1)(v+1)` positive frequencies per regime
//! at every base wavenumber `(k, l)` with `kΔx, lΔz ∈ (0, π)`. The extra
//! branches are read as aliases of waves at extended wavenumbers in
//! `(π, 2π)`, so each base point serves `(h+1)(v+1)` images of the
//! extended square; [`allocate_branches`] decides which eigenvalue goes to
//! which image.

mod analytic;
mod surface;

pub use analytic::{analytic_omega, AnalyticModes};
pub use surface::{
    allocate_branches, allocate_branches_with, error_stats, matched_omega, AllocationMode,
    AllocationOptions, BaseAssignment, DispersionSurface, ErrorStats, FoldConvention, Regime,
    SurfacePoint,
};

use crate::bloch::{assemble_from_elements, PhysParams};
use crate::element::ElementMatrices;
use crate::error::{Result, WaveError};
use crate::fespace::OrderCase;

/// Relative bound on imaginary parts of the discrete frequencies.
pub const IMAG_TOLERANCE: f64 = 1e-6;

/// The `2(h+1)(v+1)` non-negative discrete frequencies at `(k, l)`, ascending.
pub fn discrete_omega(c: OrderCase, k: f64, l: f64, dx: f64, dz: f64, p: PhysParams) -> Result<Vec<f64>> {
    crate::bloch::assemble_bloch(c, k, l, dx, dz, p)?;
    discrete_omega_from(&ElementMatrices::new(c, dx, dz), k, l, p)
}

pub(crate) fn discrete_omega_from(el: &ElementMatrices, k: f64, l: f64, p: PhysParams) -> Result<Vec<f64>> {
    let sys = assemble_from_elements(el, k, l, p);
    let ev = sys.omegas()?;
    let scale = ev.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let worst = ev.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if worst > IMAG_TOLERANCE * scale {
        return Err(WaveError::Integrity(format!(
            "complex discrete frequency for case {} at k={k}, l={l}: |Im ω| = {worst:e}, max |Re ω| = {scale:e}",
            el.case()
        )));
    }
    // spectrum is symmetric under negation; keep the upper half
    let half = ev.len() / 2;
    Ok(ev[half..].iter().map(|z| z.re.max(0.0)).collect())
}

/// Splits sorted positive frequencies into (gravity, acoustic) halves.
pub fn split_regimes(sorted: &[f64]) -> (&[f64], &[f64]) {
    sorted.split_at(sorted.len() / 2)
}
