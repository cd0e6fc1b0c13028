use serde::Serialize;

use crate::bloch::PhysParams;

/// Exact frequencies of the continuous linear system at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticModes {
    /// Acoustic branch (rad/s).
    pub omega_plus: f64,
    /// Gravity branch (rad/s).
    pub omega_minus: f64,
}

/// Roots of `ω⁴ − ω² A + k² N² cs² = 0` with `A = N² + (k² + l²) cs²`.
///
/// The gravity root is formed from the product of roots rather than the
/// difference, which would cancel catastrophically at small `k`.
pub fn analytic_omega(k: f64, l: f64, p: PhysParams) -> AnalyticModes {
    let c2 = p.cs * p.cs;
    let n2 = p.n * p.n;
    let a = n2 + (k * k + l * l) * c2;
    if a == 0.0 {
        return AnalyticModes { omega_plus: 0.0, omega_minus: 0.0 };
    }
    let prod = k * k * n2 * c2;
    let disc = (1.0 - 4.0 * prod / (a * a)).max(0.0);
    let plus2 = 0.5 * a * (1.0 + disc.sqrt());
    let minus2 = prod / plus2;
    AnalyticModes { omega_plus: plus2.sqrt(), omega_minus: minus2.sqrt() }
}
