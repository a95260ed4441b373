//! The four experiment commands.

use super::config::{
    matrix_from_rows, vector_from_entries, BenchConfig, DistanceAt, Rho0Source, RunConfig, SweepAxis, SweepConfig,
};
use crate::analysis::distance;
use crate::clock::{
    commutator_error, default_alpha0, evolution_error, lemma1_error_with_alpha, ClockModel, QuasiIdealParams,
};
use crate::constraint::{history_state_coupled, Ensemble, GlobalState, SystemModel};
use crate::dynamics::{
    fmt_f, initial_density, integrate_commutator, integrate_ideal, integrate_master, integrate_pure, oracle_trajectory,
    uniform_grid, validate_density, IntegratorConfig, Method, Summary, Trajectory,
};
use crate::linalg::{eigh, projector};
use crate::{CMat, CVec, Error, Result, C64};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;

/// Everything a run needs, resolved from a [`RunConfig`].
pub struct Prepared {
    pub clock: ClockModel,
    pub params: QuasiIdealParams,
    pub sys: SystemModel,
    pub g: f64,
    pub grid: Vec<f64>,
    pub dt: f64,
    /// Pure system members, when the initial state was given that way.
    pub members: Option<Vec<(f64, CVec)>>,
    /// Global states given directly as files.
    pub files: Option<Ensemble>,
    pub rho0_source: Rho0Source,
}

fn cfg_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let (clock, params) = cfg.clock.build().map_err(cfg_err)?;
    if !(cfg.g >= 0.0) {
        return Err(Error::Config(format!("g must be non-negative, got {}", cfg.g)));
    }
    let sys = cfg.system.build(&clock, cfg.g).map_err(cfg_err)?;
    let (t_max, dt) = cfg.grid.resolve(&clock)?;
    let grid: Vec<f64> = uniform_grid(t_max, dt).map_err(cfg_err)?.into_iter().map(|t| t + params.k0).collect();
    let init = &cfg.initial;
    let given = [init.members.is_some(), init.density_matrix.is_some(), init.global_states.is_some()];
    if given.iter().filter(|b| **b).count() != 1 {
        return Err(Error::Config("initial needs exactly one of members, density_matrix, global_states".into()));
    }
    let mut members = None;
    let mut files = None;
    if let Some(ms) = &init.members {
        let v: Vec<(f64, CVec)> = ms.iter().map(|m| (m.weight, vector_from_entries(&m.state))).collect();
        let total: f64 = v.iter().map(|m| m.0).sum();
        if v.is_empty() || v.iter().any(|m| !(m.0 > 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("member weights must be positive and sum to 1 (sum {total})")));
        }
        for (_, s) in &v {
            if s.len() != sys.dim() || (s.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Config(format!("member states must be normalized vectors of length {}", sys.dim())));
            }
        }
        members = Some(v);
    } else if let Some(rows) = &init.density_matrix {
        let rho = matrix_from_rows(rows)?;
        validate_density(&rho).map_err(cfg_err)?;
        if rho.nrows() != sys.dim() {
            return Err(Error::Config("density matrix size differs from the system".into()));
        }
        let e = eigh(&rho)?;
        let mut v: Vec<(f64, CVec)> = e
            .values
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 1e-14)
            .map(|(i, &p)| (p, e.vectors.column(i).into_owned()))
            .collect();
        let total: f64 = v.iter().map(|m| m.0).sum();
        for m in &mut v {
            m.0 /= total;
        }
        members = Some(v);
    } else if let Some(fs) = &init.global_states {
        let ms = fs
            .iter()
            .map(|f| Ok((f.weight, GlobalState::read_json(Path::new(&f.path)).map_err(cfg_err)?)))
            .collect::<Result<Vec<_>>>()?;
        let ens = Ensemble::new(ms).map_err(cfg_err)?;
        if ens.dims() != (clock.d(), sys.dim()) {
            return Err(Error::Config("global state files do not match the clock and system".into()));
        }
        files = Some(ens);
    }
    Ok(Prepared { clock, params, sys, g: cfg.g, grid, dt, members, files, rho0_source: init.rho0 })
}

impl Prepared {
    pub fn ensemble(&self) -> Result<Ensemble> {
        if let Some(e) = &self.files {
            return Ok(e.clone());
        }
        let ms = self.members.as_ref().expect("members or files are always set");
        let states = ms
            .iter()
            .map(|(p, s)| Ok((*p, history_state_coupled(&self.sys, &self.clock, self.g, s).map_err(cfg_err)?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(states)
    }

    pub fn rho0(&self) -> Result<CMat> {
        match &self.members {
            Some(ms) if self.rho0_source == Rho0Source::Members => {
                Ok(ms.iter().fold(CMat::zeros(self.sys.dim(), self.sys.dim()), |acc, (p, s)| {
                    acc + projector(s) * C64::new(*p, 0.0)
                }))
            }
            _ => Ok(initial_density(&self.ensemble()?, &self.clock, &self.params, self.grid[0])?.0),
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Trajectory> {
    let p = prepare(cfg)?;
    let ic = IntegratorConfig {
        dt: cfg.integrator.substep.unwrap_or(p.dt),
        stepper: cfg.integrator.stepper,
        second_term: cfg.integrator.second_term,
        ensemble_mode: cfg.integrator.ensemble_mode,
        hermitize_potential: cfg.integrator.hermitize_potential,
        force_zero_potential: cfg.integrator.force_zero_potential,
        ..IntegratorConfig::default()
    };
    let traj = match cfg.method {
        Method::Oracle => {
            let t = oracle_trajectory(&p.ensemble()?, &p.clock, &p.params, &p.grid)?;
            if let Some((i, dg)) = t
                .diagnostics
                .iter()
                .enumerate()
                .find(|(_, dg)| dg.oracle_norm.is_some_and(|n| n < cfg.tolerances.norm_floor))
            {
                return Err(Error::NormFloor { tau: t.grid[i], norm: dg.oracle_norm.unwrap_or(0.0) });
            }
            t
        }
        Method::Oursch => {
            let psi0 = match &p.members {
                Some(ms) if ms.len() == 1 => ms[0].1.clone(),
                _ => return Err(Error::Config("method oursch needs exactly one pure member".into())),
            };
            integrate_pure(&p.sys, &p.clock, p.g, &psi0, &p.grid, &ic)?
        }
        Method::Ourvon => integrate_commutator(&p.sys, &p.clock, p.g, &p.rho0()?, &p.grid, &ic)?,
        Method::Master => {
            let ic = IntegratorConfig { dt: p.dt, ..ic };
            integrate_master(&p.ensemble()?, &p.sys, &p.clock, &p.params, p.g, &p.grid, &ic)?
        }
        Method::Ideal => {
            let tick = p.clock.tick();
            let phys: Vec<f64> = p.grid.iter().map(|t| t * tick).collect();
            let ic = IntegratorConfig { dt: ic.dt * tick, ..ic };
            let mut t = integrate_ideal(&p.sys, p.g, &p.rho0()?, &phys, &ic)?;
            t.grid = p.grid.clone();
            t
        }
    };
    if let Some(prefix) = &cfg.save_global_states {
        for (i, (_, s)) in p.ensemble()?.members.iter().enumerate() {
            s.write_json(Path::new(&format!("{prefix}_{i}.json")))?;
        }
    }
    Ok(traj)
}

#[derive(Serialize)]
pub struct EvolveSidecar<'a> {
    pub config: &'a RunConfig,
    pub method: &'static str,
    pub rows: usize,
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub summary: Summary,
}

pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut buf = Vec::new();
    t.write_csv(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Runs one configuration; returns the trajectory CSV and the JSON sidecar.
pub fn cmd_evolve(cfg: &RunConfig, seed: Option<u64>) -> Result<(String, String, Trajectory)> {
    let t = run(cfg)?;
    let side = EvolveSidecar { config: cfg, method: cfg.method.name(), rows: t.grid.len(), seed, summary: t.summary() };
    let json = serde_json::to_string_pretty(&side)? + "\n";
    Ok((trajectory_csv(&t), json, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompareSummary {
    pub max_trace_distance: f64,
    pub mean_trace_distance: f64,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
}

/// `(tau, trace distance, fidelity)`.
pub type DistanceRow = (f64, f64, f64);

/// Per-time distances between two trajectories on the same grid.
pub fn compare_trajectories(a: &Trajectory, b: &Trajectory) -> Result<(Vec<DistanceRow>, CompareSummary)> {
    if a.grid.len() != b.grid.len() || a.grid.iter().zip(&b.grid).any(|(x, y)| (x - y).abs() > 1e-9 * x.abs().max(1.0))
    {
        return Err(Error::Config("trajectories are on different grids".into()));
    }
    if a.dim() != b.dim() {
        return Err(Error::Config("trajectories differ in system dimension".into()));
    }
    let rows = a
        .grid
        .iter()
        .zip(a.states.iter().zip(&b.states))
        .map(|(t, (x, y))| {
            let d = distance(x, y)?;
            Ok((*t, d.trace_distance, d.fidelity))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len() as f64;
    let s = CompareSummary {
        max_trace_distance: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        mean_trace_distance: rows.iter().map(|r| r.1).sum::<f64>() / n,
        min_fidelity: rows.iter().map(|r| r.2).fold(1.0, f64::min),
        mean_fidelity: rows.iter().map(|r| r.2).sum::<f64>() / n,
    };
    Ok((rows, s))
}

pub fn cmd_compare(a: &RunConfig, b: &RunConfig) -> Result<(String, CompareSummary)> {
    let (ta, tb) = rayon::join(|| run(a), || run(b));
    let (rows, s) = compare_trajectories(&ta?, &tb?)?;
    let mut out = String::from("tau,trace_distance,fidelity\n");
    for (t, d, f) in rows {
        out += &format!("{},{},{}\n", fmt_f(t), fmt_f(d), fmt_f(f));
    }
    Ok((out, s))
}

fn apply_axis(base: &RunConfig, axis: SweepAxis, v: f64) -> Result<RunConfig> {
    let mut c = base.clone();
    match axis {
        SweepAxis::D => {
            if v.fract() != 0.0 || v < 2.0 {
                return Err(Error::Config(format!("d must be an integer >= 2, got {v}")));
            }
            c.clock.d = v as usize;
        }
        SweepAxis::Sigma => c.clock.sigma = super::config::SigmaSpec::Value(v),
        SweepAxis::G => c.g = v,
        SweepAxis::Dt => c.grid.dt = v,
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub summary: Summary,
    pub distance: Option<f64>,
}

/// One summary row per value, in input order; points run on the current
/// rayon pool.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.values.is_empty() {
        return Err(Error::Config("sweep has no values".into()));
    }
    cfg.values
        .par_iter()
        .map(|&v| {
            let c = apply_axis(&cfg.base, cfg.axis, v)?;
            let t = run(&c)?;
            let distance = match &cfg.reference {
                None => None,
                Some(r) => {
                    let mut rc = c.clone();
                    if let Some(m) = r.method {
                        rc.method = m;
                    }
                    if let Some(s) = r.stepper {
                        rc.integrator.stepper = s;
                    }
                    let (rows, s) = compare_trajectories(&t, &run(&rc)?)?;
                    Some(match cfg.distance {
                        DistanceAt::Final => rows.last().map_or(0.0, |r| r.1),
                        DistanceAt::Max => s.max_trace_distance,
                    })
                }
            };
            Ok(SweepRow { value: v, summary: t.summary(), distance })
        })
        .collect()
}

pub fn cmd_sweep(cfg: &SweepConfig) -> Result<String> {
    let rows = sweep_rows(cfg)?;
    let mut out = String::from("value,final_purity,max_trace_defect,max_herm_defect,distance,ratio\n");
    let mut prev: Option<f64> = None;
    for r in &rows {
        let dist = r.distance.map(fmt_f).unwrap_or_default();
        let ratio = match (prev, r.distance) {
            (Some(a), Some(b)) if b > 0.0 => fmt_f(a / b),
            _ => String::new(),
        };
        out += &format!(
            "{},{},{},{},{},{}\n",
            fmt_f(r.value),
            fmt_f(r.summary.final_purity),
            fmt_f(r.summary.max_trace_defect),
            fmt_f(r.summary.max_herm_defect),
            dist,
            ratio
        );
        prev = r.distance;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub d: usize,
    pub sigma: f64,
    pub eps_evol: f64,
    pub eps_prime: f64,
    pub eps_comm: f64,
    pub bound: Option<f64>,
}

pub fn bench_rows(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.d_values.is_empty() {
        return Err(Error::Config("d_values is empty".into()));
    }
    cfg.d_values
        .par_iter()
        .map(|&d| {
            let clock = ClockModel::new(d, cfg.omega).map_err(cfg_err)?;
            let sigma = cfg.sigma.resolve(d);
            let j0 = cfg.j0.resolve(d);
            let p = QuasiIdealParams::new(cfg.tau, sigma, j0).map_err(cfg_err)?;
            p.validate(&clock).map_err(cfg_err)?;
            let t = cfg.evolution_time.unwrap_or(clock.period() / (2.0 * d as f64));
            let alpha = cfg.alpha0.or_else(|| default_alpha0(d, j0));
            let lp = lemma1_error_with_alpha(&clock, &p, cfg.tau, alpha).map_err(cfg_err)?;
            let row = BenchRow {
                d,
                sigma,
                eps_evol: evolution_error(&clock, &p, t)?.numeric_norm,
                eps_prime: lp.numeric_norm,
                eps_comm: commutator_error(&clock, &p)?.numeric_norm,
                bound: lp.analytic_bound,
            };
            if [row.eps_evol, row.eps_prime, row.eps_comm].iter().any(|x| !x.is_finite()) {
                return Err(Error::Numerical(format!("non-finite error norm at d = {d}")));
            }
            Ok(row)
        })
        .collect()
}

pub fn cmd_clock_bench(cfg: &BenchConfig) -> Result<String> {
    let mut out = String::from("d,sigma,eps_evol,eps_prime,eps_comm,bound\n");
    for r in bench_rows(cfg)? {
        out += &format!(
            "{},{},{},{},{},{}\n",
            r.d,
            fmt_f(r.sigma),
            fmt_f(r.eps_evol),
            fmt_f(r.eps_prime),
            fmt_f(r.eps_comm),
            r.bound.map(fmt_f).unwrap_or_default()
        );
    }
    Ok(out)
}

/// Process exit code for an error: 2 configuration, 3 numerical,
/// 4 conditioning norm floor.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NormFloor { .. } | Error::DegenerateState { .. } => 4,
        Error::Numerical(_) | Error::Io(_) => 3,
        _ => 2,
    }
}
