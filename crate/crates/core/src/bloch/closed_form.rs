//! Hand-derived Bloch matrices for the `(1,0)` and `(0,1)` cases, used only
//! as an independent check on the quadrature assembly.
//!
//! These reproduce the published closed forms with three corrections, each
//! confirmed against quadrature to round-off:
//! * the `(0,1)` horizontal-velocity mass carries the `Δx Δz / 36` prefactor;
//! * the buoyancy rows use `Q` itself (equal to `M_b`) rather than its literal transpose;
//! * `S` is built from the block form with `cs²`, `N²` and the sign of `Q` restored.
//!
//! Row phase factors differ from the quadrature convention; they cancel in `M⁻¹ S`.

use faer::{c64, Mat};

use super::{check_wavenumbers, BlochSystem, PhysParams};
use crate::error::{domain, Result};
use crate::fespace::OrderCase;

type B2 = [[c64; 2]; 2];

fn e(t: f64) -> c64 {
    c64::cis(t)
}

fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

fn scaled(s: f64, m: B2) -> B2 {
    m.map(|row| row.map(|z| z * s))
}

struct Blocks {
    mu: B2,
    mw: B2,
    mp: B2,
    dux: B2,
    dpx: B2,
    dwz: B2,
    dpz: B2,
}

/// The `(1,0)` matrices; `(0,1)` is the same family with the roles of
/// `(a, Δx)` and `(b, Δz)` and of `u` and `w` exchanged.
fn blocks_1_0(a: f64, b: f64, dx: f64, dz: f64) -> Blocks {
    let eb2 = e(b / 2.0);
    let ea = e(a);
    let ea2 = e(a / 2.0);
    let i = c64::new(0.0, 1.0);
    let sb2 = (b / 2.0).sin();
    let cb = re(b.cos() + 2.0);
    Blocks {
        mu: scaled(dx * dz / 30.0, [
            [re(8.0 - 2.0 * a.cos()) * eb2, re(4.0 * (a / 2.0).cos()) * eb2],
            [(ea * 2.0 + 2.0) * eb2, ea2 * eb2 * 16.0],
        ]),
        mw: scaled(dx * dz / 36.0, [[cb * 4.0, cb * ea * 2.0], [cb * 2.0, cb * ea * 4.0]]),
        mp: scaled(dx * dz / 6.0, [[eb2 * 2.0, eb2 * ea], [eb2, eb2 * ea * 2.0]]),
        dux: scaled(dz / 6.0, [
            [(re(5.0) - e(-a)) * eb2, (ea - 5.0) * eb2],
            [eb2 * -4.0, eb2 * ea * 4.0],
        ]),
        dpx: scaled(dz / 6.0, [
            [(ea - 5.0) * eb2, eb2 * ea2 * 4.0],
            [(ea * 5.0 - 1.0) * eb2, eb2 * ea2 * -4.0],
        ]),
        dwz: scaled(dx / 6.0, [
            [i * 4.0 * sb2, i * 2.0 * sb2 * ea],
            [i * 2.0 * sb2, i * 4.0 * sb2 * ea],
        ]),
        dpz: scaled(dx / 6.0, [
            [(e(b) - 1.0) * 2.0, (e(b) - 1.0) * ea],
            [e(b) - 1.0, (e(b) - 1.0) * ea * 2.0],
        ]),
    }
}

pub fn closed_form_bloch(c: OrderCase, k: f64, l: f64, dx: f64, dz: f64, p: PhysParams) -> Result<BlochSystem> {
    check_wavenumbers(k, l, dx, dz)?;
    let (mu, mw, mp, dux, dpx, dwz, dpz) = match (c.h(), c.v()) {
        (1, 0) => {
            let b = blocks_1_0(k * dx, l * dz, dx, dz);
            (b.mu, b.mw, b.mp, b.dux, b.dpx, b.dwz, b.dpz)
        }
        (0, 1) => {
            let b = blocks_1_0(l * dz, k * dx, dz, dx);
            (b.mw, b.mu, b.mp, b.dwz, b.dpz, b.dux, b.dpx)
        }
        _ => return domain(format!("no closed form for case {c}")),
    };
    let q = mw;
    let mb = mw;
    let (c2, n2) = (p.cs * p.cs, p.n * p.n);

    let mut m = Mat::<c64>::zeros(8, 8);
    let mut s = Mat::<c64>::zeros(8, 8);
    let put = |target: &mut Mat<c64>, bi: usize, bj: usize, blk: &B2, f: f64| {
        for i in 0..2 {
            for j in 0..2 {
                target[(2 * bi + i, 2 * bj + j)] = blk[i][j] * f;
            }
        }
    };
    put(&mut m, 0, 0, &mu, 1.0);
    put(&mut m, 1, 1, &mw, 1.0);
    put(&mut m, 2, 2, &mp, 1.0);
    put(&mut m, 3, 3, &mb, 1.0);
    put(&mut s, 0, 2, &dux, 1.0);
    put(&mut s, 1, 2, &dwz, 1.0);
    put(&mut s, 1, 3, &q, -1.0);
    put(&mut s, 2, 0, &dpx, c2);
    put(&mut s, 2, 1, &dpz, c2);
    put(&mut s, 3, 1, &q, n2);
    Ok(BlochSystem { case: c, k, l, dx, dz, phys: p, m, s })
}
