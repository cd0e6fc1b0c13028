use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bloch::{assemble_bloch, PhysParams};
use crate::eigen::eigenpairs;
use crate::fespace::OrderCase;
use crate::slicefem::{assemble_global, build_mesh, sample_bloch_vector, DofMap, SliceMesh, ZBoundary};

fn small(c: OrderCase, zb: ZBoundary) -> (SliceMesh, DofMap, GlobalSystem) {
    let (mesh, dofs) = build_mesh(c, 6, 5, 1000.0, 800.0, zb).unwrap();
    let sys = assemble_global(&mesh, &dofs, PhysParams::default());
    (mesh, dofs, sys)
}

fn random_state(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn rejects_bad_parameters() {
    let (_, _, sys) = small(OrderCase::new(0, 0).unwrap(), ZBoundary::RigidLid);
    assert!(ThetaScheme::new(&sys, 1.0, 0.4, LinearSolver::Direct).is_err());
    assert!(ThetaScheme::new(&sys, 0.0, 0.5, LinearSolver::Direct).is_err());
    let s = ThetaScheme::new(&sys, 1.0, 0.5, LinearSolver::Direct).unwrap();
    assert!(s.step_vec(&[1.0]).is_err());
}

#[test]
fn zero_stays_zero() {
    let (_, dofs, sys) = small(OrderCase::new(1, 1).unwrap(), ZBoundary::RigidLid);
    let s = ThetaScheme::new(&sys, 2.0, 0.5, LinearSolver::Direct).unwrap();
    let x = StateVector::zeros(&dofs);
    assert_eq!(step(&s, &x).unwrap(), x);
}

#[test]
fn trapezoid_conserves_energy() {
    for c in OrderCase::ALL {
        let (_, _, sys) = small(c, ZBoundary::RigidLid);
        let s = ThetaScheme::new(&sys, 5.0, 0.5, LinearSolver::Direct).unwrap();
        let mut x = random_state(sys.dim(), 11);
        let e0 = sys.energy(&x);
        for _ in 0..20 {
            x = s.step_vec(&x).unwrap();
        }
        let e1 = sys.energy(&x);
        assert!(((e1 - e0) / e0).abs() < 1e-11, "{c}: {e0} -> {e1}");
    }
}

#[test]
fn off_centring_dissipates_monotonically() {
    let (_, _, sys) = small(OrderCase::new(1, 0).unwrap(), ZBoundary::RigidLid);
    let s = ThetaScheme::new(&sys, 5.0, 0.51, LinearSolver::Direct).unwrap();
    let mut x = random_state(sys.dim(), 5);
    let mut e = sys.energy(&x);
    for _ in 0..1000 {
        x = s.step_vec(&x).unwrap();
        let e1 = sys.energy(&x);
        assert!(e1 <= e * (1.0 + 1e-14));
        e = e1;
    }
}

#[test]
fn update_is_contractive_in_energy_norm() {
    // power iteration on the update operator, measured in the energy norm
    for c in OrderCase::ALL {
        for alpha in [0.5, 0.75, 1.0] {
            let (_, _, sys) = small(c, ZBoundary::Periodic);
            let s = ThetaScheme::new(&sys, 30.0, alpha, LinearSolver::Direct).unwrap();
            let mut x = random_state(sys.dim(), 17);
            let mut ratio = 0.0;
            for _ in 0..50 {
                let e0 = sys.energy(&x);
                x = s.step_vec(&x).unwrap();
                let e1 = sys.energy(&x);
                ratio = (e1 / e0).sqrt();
                let scale = 1.0 / e1.sqrt();
                x.iter_mut().for_each(|v| *v *= scale);
            }
            assert!(ratio <= 1.0 + 1e-10, "{c} alpha={alpha}: {ratio}");
        }
    }
}

#[test]
fn iterative_matches_direct() {
    let (_, _, sys) = small(OrderCase::new(1, 1).unwrap(), ZBoundary::RigidLid);
    let d = ThetaScheme::new(&sys, 3.0, 0.55, LinearSolver::Direct).unwrap();
    let it = ThetaScheme::new(&sys, 3.0, 0.55, LinearSolver::Iterative).unwrap();
    let x = random_state(sys.dim(), 2);
    let a = d.step_vec(&x).unwrap();
    let b = it.step_vec(&x).unwrap();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-8 * scale));
}

#[test]
fn column_fft_matches_direct() {
    for c in OrderCase::ALL {
        for zb in [ZBoundary::Periodic, ZBoundary::RigidLid] {
            for nx in [6, 7] {
                let (mesh, dofs) = build_mesh(c, nx, 5, 1000.0, 800.0, zb).unwrap();
                let sys = assemble_global(&mesh, &dofs, PhysParams::default());
                let d = ThetaScheme::new(&sys, 3.0, 0.6, LinearSolver::Direct).unwrap();
                let f = ThetaScheme::new(&sys, 3.0, 0.6, LinearSolver::ColumnFft).unwrap();
                let x = random_state(sys.dim(), 4);
                let a = d.step_vec(&x).unwrap();
                let b = f.step_vec(&x).unwrap();
                let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let err = a.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
                assert!(err < 1e-12 * scale, "{c} {zb:?} nx={nx}: {err:e}");
            }
        }
    }
}

#[test]
fn extra_loop_iterations_do_not_change_linear_result() {
    let (_, _, sys) = small(OrderCase::new(0, 1).unwrap(), ZBoundary::RigidLid);
    let one = ThetaScheme::new(&sys, 3.0, 0.5, LinearSolver::Direct).unwrap();
    let mut three = ThetaScheme::new(&sys, 3.0, 0.5, LinearSolver::Direct).unwrap();
    three.k_max = 2;
    three.i_max = 3;
    let x = random_state(sys.dim(), 8);
    let a = one.step_vec(&x).unwrap();
    let b = three.step_vec(&x).unwrap();
    assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
}

/// Evolves the acoustic Bloch mode of a periodic mesh and returns
/// (fitted frequency, semi-discrete frequency).
fn bloch_mode_run(c: OrderCase, n: usize, dt: f64, steps: usize) -> (f64, f64) {
    let p = PhysParams::default();
    let (mesh, dofs) = build_mesh(c, n, n, 1000.0, 1000.0, ZBoundary::Periodic).unwrap();
    let sys = assemble_global(&mesh, &dofs, p);
    let two_pi = 2.0 * std::f64::consts::PI;
    let b = assemble_bloch(c, two_pi * 2.0 / mesh.width(), two_pi / mesh.height(), mesh.dx, mesh.dz, p).unwrap();
    let (vals, vecs) = eigenpairs(&b.frequency_operator().unwrap()).unwrap();
    let j = (0..vals.len()).max_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re)).unwrap();
    let v: Vec<c64> = (0..b.dim()).map(|i| vecs[(i, j)]).collect();
    let mut x: Vec<f64> = sample_bloch_vector(&b, &v, &mesh, &dofs).unwrap().iter().map(|z| z.re).collect();
    let probe = (0..x.len()).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap();
    let s = ThetaScheme::new(&sys, dt, 0.5, LinearSolver::Direct).unwrap();
    let mut series = vec![x[probe]];
    for _ in 0..steps {
        x = s.step_vec(&x).unwrap();
        series.push(x[probe]);
    }
    (extract_frequency(&series, dt).unwrap().omega, vals[j].re)
}

#[test]
fn bloch_mode_phase_follows_trapezoid_distortion() {
    let c = OrderCase::new(0, 0).unwrap();
    let dt = 1.2;
    let (measured, omega) = bloch_mode_run(c, 8, dt, 200);
    let expect = trapezoid_frequency(omega, dt);
    assert!(((measured - expect) / expect).abs() < 1e-8, "{measured} vs {expect}");
}

#[test]
fn frequency_error_is_second_order_in_dt() {
    let c = OrderCase::new(0, 0).unwrap();
    let (m1, omega) = bloch_mode_run(c, 8, 0.4, 400);
    let (m2, _) = bloch_mode_run(c, 8, 0.2, 800);
    let ratio = (m1 - omega) / (m2 - omega);
    assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
}
