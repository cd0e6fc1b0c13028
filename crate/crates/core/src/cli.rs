//! Command-line front end. Every data file is a pure function of the
//! configuration: wall-clock time only appears in the convergence ledger's
//! `wallclock` column.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bloch::PhysParams;
use crate::dispersion::{
    allocate_branches_with, analytic_omega, error_stats, AllocationOptions, DispersionSurface, FoldConvention, Regime,
};
use crate::error::{domain, Result, WaveError};
use crate::experiments::{run_convergence, run_gravity_wave_with, ConvergenceConfig, GravityWaveConfig};
use crate::fespace::OrderCase;
use crate::slicefem::{write_csv, Snapshot};
use crate::timestep::LinearSolver;

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "WAVECORE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wavecore", version, about = "Dispersion analysis and slice runs for split-order compatible finite elements")]
pub struct Cli {
    /// Output directory for data files.
    #[arg(long, global = true, default_value = "wavecore-out")]
    pub out: PathBuf,
    /// Worker threads (falls back to WAVECORE_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the continuous dispersion relation on a wavenumber grid.
    Analytic(AnalyticArgs),
    /// Discrete dispersion surfaces and error statistics.
    Dispersion(DispersionArgs),
    /// Gravity wave in a rigid-lid slice.
    GravityWave(GravityWaveArgs),
    /// Buoyancy convergence against a fine reference run.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PhysArgs {
    /// Sound speed (m/s).
    #[arg(long, default_value_t = 340.0)]
    pub cs: f64,
    /// Buoyancy frequency N (1/s).
    #[arg(long = "n-freq", default_value_t = 0.01)]
    pub n_freq: f64,
}

impl PhysArgs {
    fn params(&self) -> Result<PhysParams> {
        PhysParams::new(self.cs, self.n_freq)
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub phys: PhysArgs,
    #[arg(long, default_value_t = 1000.0)]
    pub dx: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub dz: f64,
    /// Points per direction; `k` runs over `j·2π/(grid_n·dx)`.
    #[arg(long, default_value_t = 100)]
    pub grid_n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DispersionArgs {
    /// Order case `h,v`; all four cases when omitted.
    #[arg(long)]
    pub case: Option<OrderCase>,
    #[command(flatten)]
    pub phys: PhysArgs,
    #[arg(long, default_value_t = 1000.0)]
    pub dx: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub dz: f64,
    #[arg(long, default_value_t = 100)]
    pub grid_n: usize,
    /// Fold for the aliased sector; the better of the two when omitted.
    #[arg(long, value_enum)]
    pub fold: Option<FoldConvention>,
}

#[derive(Debug, Clone, Args)]
pub struct GravityWaveArgs {
    /// Order case `h,v` (default 1,1); sets the standard resolution for it.
    #[arg(long)]
    pub case: Option<OrderCase>,
    /// JSON file with a (partial) gravity-wave configuration; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dz: Option<f64>,
    #[arg(long)]
    pub cs: Option<f64>,
    #[arg(long = "n-freq")]
    pub n_freq: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    /// Order case `h,v`; all four cases when omitted.
    #[arg(long)]
    pub case: Option<OrderCase>,
    /// JSON file with a (partial) convergence configuration; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Reference at 240 m with four coarse resolutions.
    #[arg(long)]
    pub desk_scale: bool,
    #[arg(long)]
    pub dz: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

/// Exit status for a finished command: 0 on success, 2 when a run went
/// unstable, 1 for anything else.
pub fn exit_code(r: &Result<()>) -> i32 {
    match r {
        Ok(()) => 0,
        Err(WaveError::Integrity(_)) => 2,
        Err(_) => 1,
    }
}

pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return if n > 0 { Ok(Some(n)) } else { domain("--threads must be positive") };
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => domain(format!("{THREADS_ENV} must be a positive integer, got {s:?}")),
        },
        Err(_) => Ok(None),
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = thread_count(cli.threads)? {
        // a second call fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    faer::set_global_parallelism(faer::Par::Seq);
    fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Analytic(a) => cmd_analytic(a, &cli.out),
        Command::Dispersion(a) => cmd_dispersion(a, &cli.out),
        Command::GravityWave(a) => cmd_gravity_wave(a, &cli.out),
        Command::Convergence(a) => cmd_convergence(a, &cli.out),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    log::info!("writing {}", path.display());
    Ok(BufWriter::new(File::create(path)?))
}

fn metadata(command: &str, config: &impl Serialize) -> Result<Vec<String>> {
    Ok(vec![
        format!("wavecore {}", env!("CARGO_PKG_VERSION")),
        format!("schema: {SCHEMA}"),
        format!("command: {command}"),
        format!("config: {}", serde_json::to_string(config)?),
    ])
}

fn write_header(w: &mut impl Write, lines: &[String]) -> Result<()> {
    for l in lines {
        writeln!(w, "# {l}")?;
    }
    Ok(())
}

fn case_tag(c: OrderCase) -> String {
    format!("{}{}", c.h(), c.v())
}

pub fn cmd_analytic(a: &AnalyticArgs, out: &Path) -> Result<()> {
    let p = a.phys.params()?;
    if a.grid_n == 0 || !(a.dx > 0.0 && a.dz > 0.0) {
        return domain("grid_n, dx and dz must be positive");
    }
    let mut w = create(out, "analytic.csv")?;
    let cfg = json!({ "cs": p.cs, "n": p.n, "dx": a.dx, "dz": a.dz, "grid_n": a.grid_n });
    write_header(&mut w, &metadata("analytic", &cfg)?)?;
    writeln!(w, "k,l,omega_acoustic,omega_gravity")?;
    let step = |n: usize, d: f64| n as f64 * 2.0 * std::f64::consts::PI / (a.grid_n as f64 * d);
    for j in 0..a.grid_n {
        for i in 0..a.grid_n {
            let (k, l) = (step(i, a.dx), step(j, a.dz));
            let m = analytic_omega(k, l, p);
            writeln!(w, "{k:e},{l:e},{:e},{:e}", m.omega_plus, m.omega_minus)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_surface_csv(w: &mut impl Write, header: &[String], s: &DispersionSurface) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "k_tilde,l_tilde,omega_gravity,omega_acoustic,err_gravity_pct,err_acoustic_pct")?;
    for p in &s.points {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            p.k_tilde,
            p.l_tilde,
            p.discrete(Regime::Gravity),
            p.discrete(Regime::Acoustic),
            100.0 * p.rel_err(Regime::Gravity),
            100.0 * p.rel_err(Regime::Acoustic),
        )?;
    }
    Ok(())
}

pub fn cmd_dispersion(a: &DispersionArgs, out: &Path) -> Result<()> {
    let p = a.phys.params()?;
    let cases = a.case.map_or(OrderCase::ALL.to_vec(), |c| vec![c]);
    let opts = AllocationOptions { fold: a.fold, ..AllocationOptions::default() };
    for c in cases {
        let s = allocate_branches_with(c, a.dx, a.dz, p, a.grid_n, opts)?;
        let cfg = json!({
            "case": c.to_string(), "cs": p.cs, "n": p.n, "dx": a.dx, "dz": a.dz,
            "grid_n": a.grid_n, "fold": s.fold, "mode": s.mode,
        });
        let tag = case_tag(c);
        let mut w = create(out, &format!("dispersion_{tag}.csv"))?;
        write_surface_csv(&mut w, &metadata("dispersion", &cfg)?, &s)?;
        w.flush()?;
        let (grav, acou) = (error_stats(&s, Regime::Gravity)?, error_stats(&s, Regime::Acoustic)?);
        let stats = json!({
            "schema": SCHEMA,
            "tool": format!("wavecore {}", env!("CARGO_PKG_VERSION")),
            "config": cfg,
            "gravity": grav,
            "acoustic": acou,
        });
        let mut j = create(out, &format!("dispersion_{tag}.json"))?;
        serde_json::to_writer_pretty(&mut j, &stats)?;
        writeln!(j)?;
        j.flush()?;
        println!(
            "{c}: gravity normalized_l2 {:.4e}, acoustic normalized_l2 {:.4e}",
            grav.normalized_l2, acou.normalized_l2
        );
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn gravity_wave_config(a: &GravityWaveArgs) -> Result<GravityWaveConfig> {
    let mut cfg: GravityWaveConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => GravityWaveConfig::default(),
    };
    if let Some(c) = a.case {
        let std = GravityWaveConfig::for_case(c);
        (cfg.case, cfg.dx, cfg.dz) = (c, std.dx, std.dz);
    }
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut cfg.dx, a.dx);
    set(&mut cfg.dz, a.dz);
    set(&mut cfg.cs, a.cs);
    set(&mut cfg.n, a.n_freq);
    set(&mut cfg.alpha, a.alpha);
    set(&mut cfg.dt, a.dt);
    set(&mut cfg.t_end, a.t_end);
    Ok(cfg)
}

pub fn cmd_gravity_wave(a: &GravityWaveArgs, out: &Path) -> Result<()> {
    let cfg = gravity_wave_config(a)?;
    let run = run_gravity_wave_with(&cfg, LinearSolver::ColumnFft, 1)?;
    let header = metadata("gravity-wave", &cfg)?;
    let tag = case_tag(cfg.case);

    let snap = Snapshot::new(&run.state, &run.mesh, &run.dofs, run.time);
    let mut w = create(out, &format!("gravity_wave_{tag}.bin"))?;
    snap.write_binary(&mut w)?;
    w.flush()?;

    let mut w = create(out, &format!("gravity_wave_{tag}_fields.csv"))?;
    write_csv(&mut w, &header, &run.state, &run.mesh, &run.dofs)?;
    w.flush()?;

    let mut w = create(out, &format!("gravity_wave_{tag}_extrema.csv"))?;
    write_header(&mut w, &header)?;
    writeln!(w, "step,time,b_min,b_max,energy")?;
    for r in &run.history {
        writeln!(w, "{},{:e},{:e},{:e},{:e}", r.step, r.time, r.b_min, r.b_max, r.energy)?;
    }
    w.flush()?;

    let (lo, hi) = run.b_extrema();
    println!(
        "{}: t = {} s, b in [{lo:.4e}, {hi:.4e}], relative energy drift {:.3e}",
        cfg.case,
        run.time,
        run.max_energy_drift()
    );
    Ok(())
}

pub fn convergence_config(a: &ConvergenceArgs) -> Result<ConvergenceConfig> {
    let mut cfg = match (&a.config, a.desk_scale) {
        (Some(p), _) => read_json(p)?,
        (None, true) => ConvergenceConfig::desk_scale(),
        (None, false) => ConvergenceConfig::default(),
    };
    if let Some(v) = a.dz {
        cfg.dz = v;
    }
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.dt {
        cfg.dt = v;
    }
    if let Some(v) = a.t_end {
        cfg.t_end = v;
    }
    Ok(cfg)
}

pub const LEDGER: &str = "convergence.csv";
pub const LEDGER_COLUMNS: &str = "case,dx,dz,dt,alpha,error,slope,wallclock";

pub fn cmd_convergence(a: &ConvergenceArgs, out: &Path) -> Result<()> {
    let cfg = convergence_config(a)?;
    let cases = a.case.map_or(OrderCase::ALL.to_vec(), |c| vec![c]);
    let path = out.join(LEDGER);
    let fresh = !path.exists();
    let mut w = BufWriter::new(OpenOptions::new().create(true).append(true).open(&path)?);
    if fresh {
        write_header(&mut w, &metadata("convergence", &cfg)?)?;
        writeln!(w, "{LEDGER_COLUMNS}")?;
    }
    for c in cases {
        let res = run_convergence(c, &cfg)?;
        for r in &res.rows {
            writeln!(
                w,
                "\"{c}\",{:e},{:e},{:e},{:e},{:e},{:e},{:.3}",
                r.dx, cfg.dz, cfg.dt, cfg.alpha, r.error, res.slope, r.wallclock
            )?;
        }
        w.flush()?;
        println!(
            "{c}: slope {:.3} over {} resolutions (projected-reference slope {:.3})",
            res.slope,
            res.rows.len(),
            res.projected_slope
        );
    }
    Ok(())
}
