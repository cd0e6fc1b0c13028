//! Canned configurations: the Skamarock–Klemp gravity wave in a rigid-lid
//! slice and a horizontal-resolution convergence study.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis1d::gauss_rule;
use crate::sparse::pcg;
use crate::bloch::PhysParams;
use crate::error::{domain, Result, WaveError};
use crate::fespace::{Field, OrderCase};
use crate::slicefem::{
    assemble_global, build_mesh, evaluate, evaluate_in_cell, project_initial, DofMap, GlobalSystem, SliceMesh,
    StateVector, ZBoundary,
};
use crate::timestep::{LinearSolver, ThetaScheme};

/// Relative energy growth treated as an instability.
pub const MAX_ENERGY_GROWTH: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GravityWaveConfig {
    pub case: OrderCase,
    pub length: f64,
    pub height: f64,
    /// Half-width of the initial perturbation (m).
    pub a: f64,
    /// Perturbation amplitude (m/s²).
    pub b0: f64,
    pub xc: f64,
    pub cs: f64,
    pub n: f64,
    pub t_end: f64,
    pub dt: f64,
    pub alpha: f64,
    pub dx: f64,
    pub dz: f64,
}

impl Default for GravityWaveConfig {
    fn default() -> Self {
        Self::for_case(OrderCase::new(1, 1).expect("valid case"))
    }
}

impl GravityWaveConfig {
    /// Standard set-up at the reference resolution of each case: higher
    /// order in a direction doubles the cell size there.
    pub fn for_case(case: OrderCase) -> Self {
        let length = 3.0e5;
        Self {
            case,
            length,
            height: 1.0e4,
            a: 5.0e3,
            b0: 1.0e-3,
            xc: length / 2.0,
            cs: 340.0,
            n: 0.01,
            t_end: 3600.0,
            dt: 1.2,
            alpha: 0.5,
            dx: 1000.0 * (case.h() + 1) as f64,
            dz: 1000.0 * (case.v() + 1) as f64,
        }
    }

    pub fn phys(&self) -> Result<PhysParams> {
        PhysParams::new(self.cs, self.n)
    }

    /// Mesh with `nx = round(L/dx)`, `nz = round(H/dz)` and sizes adjusted so
    /// the domain is covered exactly.
    pub fn mesh(&self) -> Result<SliceMesh> {
        if !(self.length > 0.0 && self.height > 0.0 && self.dx > 0.0 && self.dz > 0.0) {
            return domain("domain and cell sizes must be positive");
        }
        let nx = (self.length / self.dx).round().max(1.0) as usize;
        let nz = (self.height / self.dz).round().max(1.0) as usize;
        SliceMesh::new(nx, nz, self.length / nx as f64, self.height / nz as f64, ZBoundary::RigidLid)
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || self.t_end < 0.0 {
            return domain(format!("need dt > 0 and t_end >= 0, got dt={}, t_end={}", self.dt, self.t_end));
        }
        Ok((self.t_end / self.dt).round() as usize)
    }

    /// Initial buoyancy perturbation `b0 sin(πz/H) / (1 + ((x − xc)/a)²)`.
    pub fn perturbation(&self, x: f64, z: f64) -> f64 {
        let r = (x - self.xc) / self.a;
        self.b0 * (PI * z / self.height).sin() / (1.0 + r * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremaRecord {
    pub step: usize,
    pub time: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct GravityWaveResult {
    pub mesh: SliceMesh,
    pub dofs: DofMap,
    pub system: GlobalSystem,
    pub initial: StateVector,
    pub state: StateVector,
    pub time: f64,
    pub history: Vec<ExtremaRecord>,
}

impl GravityWaveResult {
    pub fn initial_energy(&self) -> f64 {
        self.history.first().map_or(0.0, |r| r.energy)
    }

    pub fn final_energy(&self) -> f64 {
        self.history.last().map_or(0.0, |r| r.energy)
    }

    /// Largest `|E(t) − E(0)| / E(0)` over the run.
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.initial_energy();
        self.history.iter().map(|r| ((r.energy - e0) / e0).abs()).fold(0.0, f64::max)
    }

    pub fn b_extrema(&self) -> (f64, f64) {
        min_max(self.state.field(Field::B))
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

pub fn run_gravity_wave(cfg: &GravityWaveConfig) -> Result<GravityWaveResult> {
    run_gravity_wave_with(cfg, LinearSolver::ColumnFft, 1)
}

/// Runs the gravity wave, recording extrema and energy every `record_every` steps
/// (and always at the start and end).
pub fn run_gravity_wave_with(cfg: &GravityWaveConfig, solver: LinearSolver, record_every: usize) -> Result<GravityWaveResult> {
    let phys = cfg.phys()?;
    let steps = cfg.steps()?;
    let mesh = cfg.mesh()?;
    let (mesh, dofs) = build_mesh(cfg.case, mesh.nx, mesh.nz, mesh.dx, mesh.dz, mesh.z_boundary)?;
    let system = assemble_global(&mesh, &dofs, phys);
    let initial = project_initial(
        |f, x, z| if f == Field::B { cfg.perturbation(x, z) } else { 0.0 },
        &mesh,
        &dofs,
        &system.mass,
    )?;
    let record = |step: usize, x: &StateVector| {
        let (b_min, b_max) = min_max(x.field(Field::B));
        ExtremaRecord { step, time: step as f64 * cfg.dt, b_min, b_max, energy: system.energy(&x.data) }
    };
    let mut history = vec![record(0, &initial)];
    let e0 = history[0].energy;
    let mut state = initial.clone();
    if steps > 0 {
        let scheme = ThetaScheme::new(&system, cfg.dt, cfg.alpha, solver)?;
        for n in 1..=steps {
            state = scheme.step(&state)?;
            if n % record_every.max(1) == 0 || n == steps {
                let r = record(n, &state);
                if !(r.energy <= e0 * (1.0 + MAX_ENERGY_GROWTH)) {
                    return Err(WaveError::Integrity(format!(
                        "energy grew from {e0:e} to {:e} by step {n} (case {})",
                        r.energy, cfg.case
                    )));
                }
                history.push(r);
            }
        }
    }
    Ok(GravityWaveResult { mesh, dofs, system, initial, state, time: steps as f64 * cfg.dt, history })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    pub dx_list: Vec<f64>,
    pub dz: f64,
    pub dt: f64,
    pub reference_dx: f64,
    pub alpha: f64,
    pub t_end: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            dx_list: vec![450.0, 500.0, 600.0, 700.0, 750.0, 800.0, 850.0, 900.0],
            dz: 1000.0,
            dt: 1.2,
            reference_dx: 120.0,
            alpha: 0.5,
            t_end: 3600.0,
        }
    }
}

impl ConvergenceConfig {
    /// Reduced study: reference at 240 m and four coarse resolutions.
    pub fn desk_scale() -> Self {
        Self { dx_list: vec![450.0, 600.0, 750.0, 900.0], reference_dx: 240.0, ..Self::default() }
    }

    fn member(&self, case: OrderCase, dx: f64) -> GravityWaveConfig {
        GravityWaveConfig { dx, dz: self.dz, dt: self.dt, alpha: self.alpha, t_end: self.t_end, ..GravityWaveConfig::for_case(case) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    /// Cell size actually used (`L / round(L/dx)`).
    pub dx: f64,
    pub nx: usize,
    pub error: f64,
    /// See [`buoyancy_projected_difference`].
    pub projected_error: f64,
    /// Seconds spent on this member (not part of any reproducible output).
    pub wallclock: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceResult {
    pub case: OrderCase,
    pub reference_dx: f64,
    pub rows: Vec<ConvergenceRow>,
    pub slope: f64,
    pub projected_slope: f64,
}

/// Least-squares slope of `log(error)` against `log(dx)`.
pub fn loglog_slope(dx: &[f64], err: &[f64]) -> f64 {
    let x: Vec<f64> = dx.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// L2 norm over the domain of `b_coarse − b_ref`, integrated with Gauss
/// points of the reference mesh.
pub fn buoyancy_l2_difference(coarse: &GravityWaveResult, reference: &GravityWaveResult) -> Result<f64> {
    let q = gauss_rule(3)?;
    let rm = &reference.mesh;
    let sum: f64 = (0..rm.cells())
        .into_par_iter()
        .map(|cell| -> Result<f64> {
            let (cx, cz) = ((cell % rm.nx) as f64, (cell / rm.nx) as f64);
            let mut acc = 0.0;
            for (a, &s) in q.points.iter().enumerate() {
                for (b, &t) in q.points.iter().enumerate() {
                    let br = evaluate_in_cell(&reference.state, &reference.dofs, Field::B, cell, s, t);
                    let (x, z) = ((cx + s) * rm.dx, (cz + t) * rm.dz);
                    let bc = evaluate(&coarse.state, &coarse.dofs, &coarse.mesh, Field::B, x, z)?;
                    acc += q.weights[a] * q.weights[b] * (bc - br).powi(2);
                }
            }
            Ok(acc * rm.dx * rm.dz)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    Ok(sum.sqrt())
}

/// Energy-norm distance `‖Π b_ref − b_coarse‖` in the coarse buoyancy space,
/// where `Π` is the L2 projection onto that space. Unlike
/// [`buoyancy_l2_difference`] this does not include the error of
/// representing a smooth field in the coarse space, so it measures how well
/// the coarse solution tracks the true dynamics.
pub fn buoyancy_projected_difference(coarse: &GravityWaveResult, reference: &GravityWaveResult) -> Result<f64> {
    let (cm, rm) = (&coarse.mesh, &reference.mesh);
    if (cm.dz - rm.dz).abs() > 1e-9 * cm.dz || cm.nz != rm.nz {
        return domain("projected comparison needs the same vertical mesh");
    }
    let q = gauss_rule(3)?;
    let fs = coarse.dofs.spaces.get(Field::B);
    let fm = coarse.dofs.field(Field::B);
    let range = coarse.dofs.range(Field::B);
    // x-breakpoints of each coarse column: its edges and the reference edges inside
    let columns: Vec<Vec<f64>> = (0..cm.nx)
        .map(|cx| {
            let (x0, x1) = (cx as f64 * cm.dx, (cx + 1) as f64 * cm.dx);
            let mut b = vec![x0];
            let first = (x0 / rm.dx).floor() as usize + 1;
            b.extend((first..).map(|i| i as f64 * rm.dx).take_while(|&x| x < x1 - 1e-9 * rm.dx).filter(|&x| x > x0 + 1e-9 * rm.dx));
            b.push(x1);
            b
        })
        .collect();
    let contributions: Vec<Vec<(usize, f64)>> = (0..cm.cells())
        .into_par_iter()
        .map(|cell| -> Result<Vec<(usize, f64)>> {
            let (cx, cz) = (cell % cm.nx, cell / cm.nx);
            let mut local = vec![0.0; fs.nodes().len()];
            for seg in columns[cx].windows(2) {
                let len = seg[1] - seg[0];
                for (a, &sp) in q.points.iter().enumerate() {
                    let x = seg[0] + sp * len;
                    let s = x / cm.dx - cx as f64;
                    for (b, &t) in q.points.iter().enumerate() {
                        let z = (cz as f64 + t) * cm.dz;
                        let w = q.weights[a] * q.weights[b] * len * cm.dz;
                        let br = evaluate(&reference.state, &reference.dofs, rm, Field::B, x, z)?;
                        for (i, n) in fs.nodes().iter().enumerate() {
                            local[i] += w * br * fs.eval(n, s, t);
                        }
                    }
                }
            }
            Ok((0..local.len()).filter_map(|i| fm.global(cell, i).map(|g| (g, local[i]))).collect())
        })
        .collect::<Result<_>>()?;
    let mut rhs = vec![0.0; fm.len()];
    for (g, v) in contributions.into_iter().flatten() {
        rhs[g] += v;
    }
    let mass = coarse.system.mass.block(range.start, range.len(), range.start, range.len());
    let proj = pcg(&mass, &rhs, 1e-14, 10 * rhs.len() + 100)?;
    let diff: Vec<f64> = proj.iter().zip(coarse.state.field(Field::B)).map(|(p, c)| p - c).collect();
    let md = mass.matvec(&diff);
    Ok(diff.iter().zip(&md).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
}

pub fn run_convergence(case: OrderCase, cfg: &ConvergenceConfig) -> Result<ConvergenceResult> {
    if cfg.dx_list.len() < 2 {
        return domain("convergence study needs at least two resolutions");
    }
    let reference = run_gravity_wave(&cfg.member(case, cfg.reference_dx))?;
    let rows: Vec<ConvergenceRow> = cfg
        .dx_list
        .par_iter()
        .map(|&dx| -> Result<ConvergenceRow> {
            let start = Instant::now();
            let run = run_gravity_wave(&cfg.member(case, dx))?;
            let error = buoyancy_l2_difference(&run, &reference)?;
            let projected_error = buoyancy_projected_difference(&run, &reference)?;
            Ok(ConvergenceRow {
                dx: run.mesh.dx,
                nx: run.mesh.nx,
                error,
                projected_error,
                wallclock: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;
    let dxs: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let proj: Vec<f64> = rows.iter().map(|r| r.projected_error).collect();
    Ok(ConvergenceResult {
        case,
        reference_dx: reference.mesh.dx,
        slope: loglog_slope(&dxs, &errs),
        projected_slope: loglog_slope(&dxs, &proj),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_resolutions() {
        let expect = [((0, 0), 1000.0, 1000.0), ((0, 1), 1000.0, 2000.0), ((1, 0), 2000.0, 1000.0), ((1, 1), 2000.0, 2000.0)];
        for ((h, v), dx, dz) in expect {
            let cfg = GravityWaveConfig::for_case(OrderCase::new(h, v).unwrap());
            assert_eq!((cfg.dx, cfg.dz), (dx, dz));
            let m = cfg.mesh().unwrap();
            assert_eq!(m.nx as f64 * m.dx, cfg.length);
            assert_eq!(cfg.xc, cfg.length / 2.0);
        }
    }

    #[test]
    fn non_dividing_dx_is_adjusted() {
        let cfg = GravityWaveConfig { dx: 450.0, ..GravityWaveConfig::for_case(OrderCase::new(0, 0).unwrap()) };
        let m = cfg.mesh().unwrap();
        assert_eq!(m.nx, 667);
        assert!((m.dx * m.nx as f64 - 3.0e5).abs() < 1e-6);
    }

    #[test]
    fn perturbation_shape() {
        let cfg = GravityWaveConfig::default();
        assert!((cfg.perturbation(cfg.xc, cfg.height / 2.0) - cfg.b0).abs() < 1e-18);
        assert_eq!(cfg.perturbation(cfg.xc, 0.0), 0.0);
        assert!((cfg.perturbation(cfg.xc + cfg.a, cfg.height / 2.0) - cfg.b0 / 2.0).abs() < 1e-18);
    }

    #[test]
    fn slope_of_power_law() {
        let dx = [1.0, 2.0, 4.0, 8.0];
        let e: Vec<f64> = dx.iter().map(|d: &f64| 3.0 * d.powf(2.5)).collect();
        assert!((loglog_slope(&dx, &e) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn projected_difference_vanishes_against_itself() {
        let cfg = GravityWaveConfig { t_end: 0.0, dx: 10000.0, ..GravityWaveConfig::for_case(OrderCase::new(1, 0).unwrap()) };
        let r = run_gravity_wave(&cfg).unwrap();
        let b = r.state.field(Field::B);
        let range = r.dofs.range(Field::B);
        let m = r.system.mass.block(range.start, range.len(), range.start, range.len());
        let norm: f64 = b.iter().zip(m.matvec(b)).map(|(x, y)| x * y).sum::<f64>().sqrt();
        assert!(buoyancy_projected_difference(&r, &r).unwrap() < 1e-10 * norm);
        assert!(buoyancy_l2_difference(&r, &r).unwrap() < 1e-12 * norm);
    }

    #[test]
    fn zero_end_time_returns_projection() {
        let cfg = GravityWaveConfig { t_end: 0.0, dx: 10000.0, dz: 2000.0, ..GravityWaveConfig::default() };
        let r = run_gravity_wave(&cfg).unwrap();
        assert_eq!(r.state, r.initial);
        assert_eq!(r.history.len(), 1);
    }
}
