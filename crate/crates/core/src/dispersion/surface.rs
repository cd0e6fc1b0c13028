use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analytic_omega, discrete_omega_from, split_regimes};
use crate::bloch::PhysParams;
use crate::element::ElementMatrices;
use crate::error::{domain, Result};
use crate::fespace::OrderCase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Gravity,
    Acoustic,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::Gravity, Regime::Acoustic];

    fn index(self) -> usize {
        self as usize
    }

    fn analytic(self, k: f64, l: f64, p: PhysParams) -> f64 {
        let m = analytic_omega(k, l, p);
        match self {
            Regime::Gravity => m.omega_minus,
            Regime::Acoustic => m.omega_plus,
        }
    }
}

/// How a base scaled wavenumber `t ∈ (0, π)` maps to the extended sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FoldConvention {
    /// `t ↦ 2π − t`
    Reflect,
    /// `t ↦ π + t`
    Shift,
}

impl FoldConvention {
    fn image(self, t: f64) -> f64 {
        match self {
            FoldConvention::Reflect => 2.0 * PI - t,
            FoldConvention::Shift => PI + t,
        }
    }

    /// Lattice index of the image of base index `i` on a `2m`-point midpoint lattice.
    fn image_index(self, i: usize, m: usize) -> usize {
        match self {
            FoldConvention::Reflect => 2 * m - 1 - i,
            FoldConvention::Shift => m + i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationMode {
    /// Best permutation chosen independently at each base wavenumber.
    PerPoint,
    /// One permutation per regime, shared by the whole base square.
    PerSector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationOptions {
    /// `None` runs both conventions and keeps the one with lower error.
    pub fold: Option<FoldConvention>,
    pub mode: AllocationMode,
}

impl Default for AllocationOptions {
    fn default() -> Self {
        Self { fold: None, mode: AllocationMode::PerPoint }
    }
}

/// One lattice point of the extended square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub k_tilde: f64,
    pub l_tilde: f64,
    /// Inside the range the case can represent: `k̃Δx < (h+1)π`, `l̃Δz < (v+1)π`.
    pub resolved: bool,
    /// Discrete frequency per regime (gravity, acoustic).
    pub omega: [f64; 2],
    pub analytic: [f64; 2],
}

impl SurfacePoint {
    pub fn discrete(&self, r: Regime) -> f64 {
        self.omega[r.index()]
    }

    pub fn exact(&self, r: Regime) -> f64 {
        self.analytic[r.index()]
    }

    /// Signed relative error `(ω_d − ω_a)/ω_a`.
    pub fn rel_err(&self, r: Regime) -> f64 {
        (self.discrete(r) - self.exact(r)) / self.exact(r)
    }
}

/// Eigenvalues at one base point and the image each one was given to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseAssignment {
    pub ix: usize,
    pub iz: usize,
    /// Sorted discrete frequencies per regime.
    pub eigs: [Vec<f64>; 2],
    /// Lattice indices of the images, sector order (x-fastest).
    pub images: Vec<(usize, usize)>,
    /// Analytic frequency at each image per regime.
    pub targets: [Vec<f64>; 2],
    /// `perm[r][q]` is the eigenvalue index assigned to image `q`.
    pub perm: [Vec<usize>; 2],
}

impl BaseAssignment {
    pub fn score(&self, r: Regime, perm: &[usize]) -> f64 {
        let (e, a) = (&self.eigs[r.index()], &self.targets[r.index()]);
        perm.iter().zip(a).map(|(&p, &t)| (e[p] - t).powi(2)).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionSurface {
    pub case: OrderCase,
    pub dx: f64,
    pub dz: f64,
    pub phys: PhysParams,
    pub grid_n: usize,
    pub fold: FoldConvention,
    pub mode: AllocationMode,
    /// `grid_n × grid_n` points, `l̃` outer and `k̃` inner.
    pub points: Vec<SurfacePoint>,
    pub sector_map: Vec<BaseAssignment>,
}

impl DispersionSurface {
    pub fn point(&self, ix: usize, iz: usize) -> &SurfacePoint {
        &self.points[iz * self.grid_n + ix]
    }

    pub fn resolved(&self) -> impl Iterator<Item = &SurfacePoint> {
        self.points.iter().filter(|p| p.resolved)
    }

    /// Replaces every discrete value by the analytic one (used to check that
    /// downstream error reporting vanishes).
    pub fn overwrite_with_analytic(&mut self) {
        for p in &mut self.points {
            p.omega = p.analytic;
        }
    }
}

/// Lexicographic permutations of `0..n`.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn best_perm(perms: &[Vec<usize>], score: impl Fn(&[usize]) -> f64) -> Vec<usize> {
    let mut best = &perms[0];
    let mut best_score = score(best);
    for p in &perms[1..] {
        let s = score(p);
        if s < best_score {
            best = p;
            best_score = s;
        }
    }
    best.clone()
}

fn lattice(grid_n: usize) -> Vec<f64> {
    (0..grid_n).map(|i| (i as f64 + 0.5) * 2.0 * PI / grid_n as f64).collect()
}

pub fn allocate_branches(c: OrderCase, dx: f64, dz: f64, p: PhysParams, grid_n: usize) -> Result<DispersionSurface> {
    allocate_branches_with(c, dx, dz, p, grid_n, AllocationOptions::default())
}

pub fn allocate_branches_with(
    c: OrderCase,
    dx: f64,
    dz: f64,
    p: PhysParams,
    grid_n: usize,
    opts: AllocationOptions,
) -> Result<DispersionSurface> {
    if grid_n < 8 || grid_n % 2 != 0 {
        return domain(format!("grid_n must be even and at least 8, got {grid_n}"));
    }
    if !(dx > 0.0 && dz > 0.0) {
        return domain(format!("cell sizes must be positive, got dx={dx}, dz={dz}"));
    }
    let m = grid_n / 2;
    let t = lattice(grid_n);
    let el = ElementMatrices::new(c, dx, dz);
    let base: Vec<(usize, usize)> = (0..m).flat_map(|iz| (0..m).map(move |ix| (ix, iz))).collect();
    let eigs: Vec<Vec<f64>> = base
        .par_iter()
        .map(|&(ix, iz)| discrete_omega_from(&el, t[ix] / dx, t[iz] / dz, p))
        .collect::<Result<_>>()?;

    let folds = match opts.fold {
        Some(f) => vec![f],
        None => vec![FoldConvention::Reflect, FoldConvention::Shift],
    };
    let mut best: Option<(f64, DispersionSurface)> = None;
    for fold in folds {
        let s = build_surface(c, dx, dz, p, grid_n, fold, opts.mode, &base, &eigs);
        let total: f64 = s
            .resolved()
            .map(|q| Regime::ALL.iter().map(|&r| q.rel_err(r).powi(2)).sum::<f64>())
            .sum();
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, s));
        }
    }
    Ok(best.expect("at least one fold").1)
}

#[allow(clippy::too_many_arguments)]
fn build_surface(
    c: OrderCase,
    dx: f64,
    dz: f64,
    p: PhysParams,
    grid_n: usize,
    fold: FoldConvention,
    mode: AllocationMode,
    base: &[(usize, usize)],
    eigs: &[Vec<f64>],
) -> DispersionSurface {
    let m = grid_n / 2;
    let t = lattice(grid_n);
    let nb = c.dofs_per_cell();
    let perms = permutations(nb);

    let mut sector_map: Vec<BaseAssignment> = base
        .iter()
        .zip(eigs)
        .map(|(&(ix, iz), e)| {
            let (g, a) = split_regimes(e);
            let mut images = Vec::with_capacity(nb);
            for sz in 0..=c.v() {
                for sx in 0..=c.h() {
                    let jx = if sx == 0 { ix } else { fold.image_index(ix, m) };
                    let jz = if sz == 0 { iz } else { fold.image_index(iz, m) };
                    images.push((jx, jz));
                }
            }
            let targets = Regime::ALL.map(|r| {
                images.iter().map(|&(jx, jz)| r.analytic(t[jx] / dx, t[jz] / dz, p)).collect()
            });
            BaseAssignment {
                ix,
                iz,
                eigs: [g.to_vec(), a.to_vec()],
                images,
                targets,
                perm: [(0..nb).collect(), (0..nb).collect()],
            }
        })
        .collect();

    match mode {
        AllocationMode::PerPoint => {
            for b in &mut sector_map {
                for r in Regime::ALL {
                    b.perm[r.index()] = best_perm(&perms, |q| b.score(r, q));
                }
            }
        }
        AllocationMode::PerSector => {
            for r in Regime::ALL {
                let chosen = best_perm(&perms, |q| sector_map.iter().map(|b| b.score(r, q)).sum());
                for b in &mut sector_map {
                    b.perm[r.index()] = chosen.clone();
                }
            }
        }
    }

    let mut points = vec![None; grid_n * grid_n];
    for b in &sector_map {
        for (q, &(jx, jz)) in b.images.iter().enumerate() {
            points[jz * grid_n + jx] = Some(SurfacePoint {
                k_tilde: t[jx] / dx,
                l_tilde: t[jz] / dz,
                resolved: true,
                omega: Regime::ALL.map(|r| b.eigs[r.index()][b.perm[r.index()][q]]),
                analytic: Regime::ALL.map(|r| b.targets[r.index()][q]),
            });
        }
    }
    // points beyond the resolvable range carry the alias of their mirror image
    let mirror = |i: usize| 2 * m - 1 - i;
    let filled = points.clone();
    for iz in 0..grid_n {
        for ix in 0..grid_n {
            if points[iz * grid_n + ix].is_some() {
                continue;
            }
            let src = [(mirror(ix), iz), (ix, mirror(iz)), (mirror(ix), mirror(iz))]
                .into_iter()
                .find_map(|(a, b)| filled[b * grid_n + a])
                .expect("every lattice point has a resolved mirror");
            let (k, l) = (t[ix] / dx, t[iz] / dz);
            points[iz * grid_n + ix] = Some(SurfacePoint {
                k_tilde: k,
                l_tilde: l,
                resolved: false,
                omega: src.omega,
                analytic: Regime::ALL.map(|r| r.analytic(k, l, p)),
            });
        }
    }

    DispersionSurface {
        case: c,
        dx,
        dz,
        phys: p,
        grid_n,
        fold,
        mode,
        points: points.into_iter().map(Option::unwrap).collect(),
        sector_map,
    }
}

/// Discrete and analytic frequency of each regime at one extended scaled
/// wavenumber, allocated exactly as [`AllocationMode::PerPoint`] does.
pub fn matched_omega(
    c: OrderCase,
    k_tilde: f64,
    l_tilde: f64,
    dx: f64,
    dz: f64,
    p: PhysParams,
    fold: FoldConvention,
) -> Result<[(f64, f64); 2]> {
    let (a, b) = (k_tilde * dx, l_tilde * dz);
    let limit = |order: usize| (order + 1) as f64 * PI;
    if !(a > 0.0 && b > 0.0 && a < limit(c.h()) && b < limit(c.v())) {
        return domain(format!("scaled wavenumber ({a}, {b}) outside the resolvable range of case {c}"));
    }
    let unfold = |t: f64| {
        if t < PI {
            (t, 0)
        } else {
            match fold {
                FoldConvention::Reflect => (2.0 * PI - t, 1),
                FoldConvention::Shift => (t - PI, 1),
            }
        }
    };
    let ((ba, sa), (bb, sb)) = (unfold(a), unfold(b));
    let el = ElementMatrices::new(c, dx, dz);
    let e = discrete_omega_from(&el, ba / dx, bb / dz, p)?;
    let (g, ac) = split_regimes(&e);
    let mut images = Vec::new();
    for sz in 0..=c.v() {
        for sx in 0..=c.h() {
            let x = if sx == 0 { ba } else { fold.image(ba) };
            let z = if sz == 0 { bb } else { fold.image(bb) };
            images.push((x / dx, z / dz));
        }
    }
    let q = sb * (c.h() + 1) + sa;
    let perms = permutations(c.dofs_per_cell());
    let out = Regime::ALL.map(|r| {
        let eig = if r == Regime::Gravity { g } else { ac };
        let targets: Vec<f64> = images.iter().map(|&(k, l)| r.analytic(k, l, p)).collect();
        let perm = best_perm(&perms, |pm| pm.iter().zip(&targets).map(|(&i, &tt)| (eig[i] - tt).powi(2)).sum());
        (eig[perm[q]], targets[q])
    });
    Ok(out)
}

/// Error of one regime over the resolved points.
///
/// `normalized_l2 = sqrt(Σ(ω_d − ω_a)² / Σω_a²)`, and `max_err`/`min_err` are
/// extremes of `|ω_d − ω_a|/ω_a`. The published tables instead report
/// statistics of the squared relative error `r² = ((ω_d − ω_a)/ω_a)²`:
/// `table_max`/`table_min` are its extremes and `table_l2 = ‖r²‖₂ / n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub normalized_l2: f64,
    pub max_err: f64,
    pub min_err: f64,
    pub table_l2: f64,
    pub table_max: f64,
    pub table_min: f64,
    pub abs_max: f64,
    pub abs_min: f64,
    pub points: usize,
}

pub fn error_stats(surface: &DispersionSurface, regime: Regime) -> Result<ErrorStats> {
    let pts: Vec<&SurfacePoint> = surface.resolved().collect();
    if pts.is_empty() {
        return domain("no resolved points on the dispersion surface");
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut r4 = 0.0;
    let mut rel = (f64::INFINITY, 0.0f64);
    let mut abs = (f64::INFINITY, 0.0f64);
    for p in &pts {
        let e = p.discrete(regime) - p.exact(regime);
        let a = p.exact(regime);
        num += e * e;
        den += a * a;
        let r = (e / a).abs();
        r4 += r.powi(4);
        rel = (rel.0.min(r), rel.1.max(r));
        abs = (abs.0.min(e.abs()), abs.1.max(e.abs()));
    }
    let n = pts.len();
    Ok(ErrorStats {
        normalized_l2: (num / den).sqrt(),
        max_err: rel.1,
        min_err: rel.0,
        table_l2: r4.sqrt() / n as f64,
        table_max: rel.1 * rel.1,
        table_min: rel.0 * rel.0,
        abs_max: abs.1,
        abs_min: abs.0,
        points: n,
    })
}
