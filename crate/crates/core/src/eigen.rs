//! Thin wrappers over the dense complex linear algebra used by the Bloch
//! analysis (matrices are at most 16 × 16).

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, Side};

use crate::error::{Result, WaveError};

/// `A⁻¹ B` via partially pivoted LU. Fails if the result is not finite.
pub fn solve(a: &Mat<c64>, b: &Mat<c64>) -> Result<Mat<c64>> {
    let lu = a.partial_piv_lu();
    let x = lu.solve(b);
    if x.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(WaveError::Numerical("singular matrix in dense solve".into()));
    }
    Ok(x)
}

pub fn eigenvalues(a: &Mat<c64>) -> Result<Vec<c64>> {
    a.eigenvalues()
        .map_err(|e| WaveError::Numerical(format!("dense eigensolver failed: {e:?}")))
}

/// Eigenvalues and unit eigenvectors (as columns).
pub fn eigenpairs(a: &Mat<c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let evd = a
        .eigen()
        .map_err(|e| WaveError::Numerical(format!("dense eigensolver failed: {e:?}")))?;
    let vals = (0..a.nrows()).map(|i| evd.S()[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigenvalues of the Hermitian-definite pencil `(A, B)`, ascending.
pub fn hermitian_pencil_eigenvalues(a: &Mat<c64>, b: &Mat<c64>) -> Result<Vec<f64>> {
    let llt = b
        .llt(Side::Lower)
        .map_err(|e| WaveError::Numerical(format!("pencil matrix not positive definite: {e:?}")))?;
    let l = llt.L().to_owned();
    // C = L⁻¹ A L⁻ᴴ
    let mut y = a.clone();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l.as_ref(), y.as_mut(), faer::Par::Seq);
    let mut c = y.adjoint().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), faer::Par::Seq);
    let n = c.nrows();
    let sym = Mat::<c64>::from_fn(n, n, |i, j| (c[(i, j)] + c[(j, i)].conj()) * 0.5);
    sym.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| WaveError::Numerical(format!("Hermitian eigensolver failed: {e:?}")))
}

/// Sorts complex numbers by real part then imaginary part.
pub fn sort_complex(v: &mut [c64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pencil_matches_plain_eigen() {
        let a = Mat::<c64>::from_fn(3, 3, |i, j| {
            let base = c64::new((i + j) as f64, i as f64 - j as f64);
            if i == j { c64::new(base.re + 1.0, 0.0) } else { base }
        });
        let b = Mat::<c64>::from_fn(3, 3, |i, j| if i == j { c64::new(2.0, 0.0) } else { c64::new(0.0, 0.0) });
        let ev = hermitian_pencil_eigenvalues(&a, &b).unwrap();
        let mut plain: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.re / 2.0).collect();
        plain.sort_by(f64::total_cmp);
        for (x, y) in ev.iter().zip(&plain) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_solve_fails() {
        let a = Mat::<c64>::zeros(2, 2);
        let b = Mat::<c64>::identity(2, 2);
        assert!(solve(&a, &b).is_err());
    }
}
