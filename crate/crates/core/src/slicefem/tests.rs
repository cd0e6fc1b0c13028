use approx::assert_relative_eq;
use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bloch::{assemble_bloch, PhysParams};
use crate::fespace::OrderCase;
use crate::sparse::CsrMatrix;

fn complex_matvec(a: &CsrMatrix, x: &[c64]) -> Vec<c64> {
    let re: Vec<f64> = x.iter().map(|z| z.re).collect();
    let im: Vec<f64> = x.iter().map(|z| z.im).collect();
    a.matvec(&re).into_iter().zip(a.matvec(&im)).map(|(r, i)| c64::new(r, i)).collect()
}

fn setup(c: OrderCase, zb: ZBoundary) -> (SliceMesh, DofMap, GlobalSystem) {
    let (mesh, dofs) = build_mesh(c, 6, 4, 1000.0, 500.0, zb).unwrap();
    let sys = assemble_global(&mesh, &dofs, PhysParams::default());
    (mesh, dofs, sys)
}

#[test]
fn gradient_of_constant_pressure_vanishes() {
    for c in OrderCase::ALL {
        for zb in [ZBoundary::Periodic, ZBoundary::RigidLid] {
            let (_, dofs, sys) = setup(c, zb);
            let mut x = vec![0.0; dofs.total()];
            for i in dofs.range(Field::P) {
                x[i] = 1.0;
            }
            let y = sys.tendency.matvec(&x);
            for i in dofs.range(Field::U) {
                assert!(y[i].abs() < 1e-9, "{c} {zb:?}: {}", y[i]);
            }
        }
    }
}

#[test]
fn bloch_action_matches_global_operators() {
    let p = PhysParams::default();
    for c in OrderCase::ALL {
        let (mesh, dofs) = build_mesh(c, 6, 4, 1000.0, 500.0, ZBoundary::Periodic).unwrap();
        let sys = assemble_global(&mesh, &dofs, p);
        let two_pi = 2.0 * std::f64::consts::PI;
        for (mk, ml) in [(1, 1), (2, 3), (5, 0)] {
            let k = two_pi * mk as f64 / mesh.width();
            let l = two_pi * ml as f64 / mesh.height();
            let b = assemble_bloch(c, k, l, mesh.dx, mesh.dz, p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(mk as u64 * 31 + ml as u64);
            let xh: Vec<c64> = (0..b.dim()).map(|_| c64::new(rng.gen(), rng.gen())).collect();
            let xg = sample_bloch_vector(&b, &xh, &mesh, &dofs).unwrap();
            // the action of M and −S on x̂, re-sampled on the mesh
            let mx: Vec<c64> = (0..b.dim()).map(|i| (0..b.dim()).map(|j| b.m[(i, j)] * xh[j]).sum()).collect();
            let sx: Vec<c64> = (0..b.dim()).map(|i| (0..b.dim()).map(|j| -b.s[(i, j)] * xh[j]).sum()).collect();
            let want_m = sample_bloch_vector(&b, &mx, &mesh, &dofs).unwrap();
            let want_s = sample_bloch_vector(&b, &sx, &mesh, &dofs).unwrap();
            for (got, want) in [(complex_matvec(&sys.mass, &xg), want_m), (complex_matvec(&sys.tendency, &xg), want_s)] {
                let scale = want.iter().fold(0.0f64, |m, z| m.max(z.norm()));
                let err = got.iter().zip(&want).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
                assert!(err < 1e-11 * scale, "{c} ({mk},{ml}): {err:e} vs {scale:e}");
            }
        }
    }
}

#[test]
fn spatial_operator_conserves_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for c in OrderCase::ALL {
        for zb in [ZBoundary::Periodic, ZBoundary::RigidLid] {
            let (_, dofs, sys) = setup(c, zb);
            for _ in 0..20 {
                let x: Vec<f64> = (0..dofs.total()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let rate = sys.energy_rate(&x);
                let scale = sys.energy(&x) * 340.0 / 500.0;
                assert!(rate.abs() < 1e-12 * scale, "{c} {zb:?}: {rate:e}");
            }
        }
    }
}

#[test]
fn mass_is_spd() {
    for c in OrderCase::ALL {
        let (_, _, sys) = setup(c, ZBoundary::RigidLid);
        let m = sys.mass.to_faer().unwrap();
        assert!(m.sp_cholesky(faer::Side::Lower).is_ok(), "{c}");
        let mt = sys.mass.transpose();
        assert_eq!(mt, sys.mass);
    }
}

#[test]
fn projections() {
    let c = OrderCase::new(0, 0).unwrap();
    let (mesh, dofs, sys) = setup(c, ZBoundary::RigidLid);
    let st = project_initial(|f, _, _| if f == Field::P { 2.5 } else { 0.0 }, &mesh, &dofs, &sys.mass).unwrap();
    assert!(st.field(Field::P).iter().all(|&v| (v - 2.5).abs() < 1e-12));

    let h = mesh.height();
    let f = |z: f64| (std::f64::consts::PI * z / h).sin();
    let errs: Vec<f64> = [4usize, 8, 16]
        .iter()
        .map(|&nz| {
            let (mesh, dofs) = build_mesh(c, 4, nz, 1000.0, h / nz as f64, ZBoundary::RigidLid).unwrap();
            let sys = assemble_global(&mesh, &dofs, PhysParams::default());
            let st = project_initial(|fl, _, z| if fl == Field::B { f(z) } else { 0.0 }, &mesh, &dofs, &sys.mass).unwrap();
            let fm = dofs.field(Field::B);
            st.field(Field::B).iter().zip(&fm.positions).map(|(v, &(_, z))| (v - f(z)).abs()).fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[0] / errs[1] > 3.0 && errs[1] / errs[2] > 3.0, "{errs:?}");
}

#[test]
fn evaluate_reproduces_linear_field() {
    let c = OrderCase::new(1, 1).unwrap();
    let (mesh, dofs, sys) = setup(c, ZBoundary::RigidLid);
    let st = project_initial(|f, _, z| if f == Field::B { 3.0 + z * 1e-3 } else { 0.0 }, &mesh, &dofs, &sys.mass).unwrap();
    for &(x, z) in &[(10.0, 0.0), (2500.0, 1234.0), (5999.0, 2000.0)] {
        let v = evaluate(&st, &dofs, &mesh, Field::B, x, z).unwrap();
        assert_relative_eq!(v, 3.0 + z * 1e-3, max_relative = 1e-10);
    }
    assert!(evaluate(&st, &dofs, &mesh, Field::B, 0.0, 2001.0).is_err());
}

#[test]
fn snapshot_roundtrip() {
    let c = OrderCase::new(1, 0).unwrap();
    let (mesh, dofs, sys) = setup(c, ZBoundary::RigidLid);
    let st = project_initial(|_, x, z| (x * 1e-3).sin() + z * 1e-4, &mesh, &dofs, &sys.mass).unwrap();
    let snap = Snapshot::new(&st, &mesh, &dofs, 12.5);
    let mut buf = Vec::new();
    snap.write_binary(&mut buf).unwrap();
    let back = Snapshot::read_binary(buf.as_slice()).unwrap();
    assert_eq!(back, snap);
    buf[0] = b'X';
    assert!(Snapshot::read_binary(buf.as_slice()).is_err());

    let mut csv = Vec::new();
    write_csv(&mut csv, &["case (1,0)".into()], &st, &mesh, &dofs).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("# case (1,0)\nx,z,u,w,p,b\n"));
    assert_eq!(text.lines().count(), 2 + mesh.cells());
}
