//! Memory-kernel master equation: purity loss against clock dimension, and
//! the gap between evolving ensemble members separately or mixing first.
//!
//! cargo run --release --example memory_kernel

use relclock::analysis::distance;
use relclock::clock::{ClockModel, QuasiIdealParams};
use relclock::constraint::{history_state_coupled, Ensemble, SystemModel};
use relclock::dynamics::{integrate_master, uniform_grid, EnsembleMode, IntegratorConfig, Trajectory};
use relclock::{CVec, C64};

fn state(b: C64) -> CVec {
    CVec::from_vec(vec![C64::new(1.0, 0.0), b]) / C64::new(2f64.sqrt(), 0.0)
}

fn master(
    d: usize,
    sigma: f64,
    levels: [usize; 2],
    members: &[CVec],
    cfg: IntegratorConfig,
    horizon: f64,
) -> relclock::Result<Trajectory> {
    let g = 0.01;
    let clock = ClockModel::new(d, 1.0)?;
    let p = QuasiIdealParams::new(0.0, sigma, (d as f64 - 1.0) / 2.0)?;
    let sys = SystemModel::clock_levels(&clock, g, &levels)?;
    let w = 1.0 / members.len() as f64;
    let ens = Ensemble::new(
        members.iter().map(|s| Ok((w, history_state_coupled(&sys, &clock, g, s)?))).collect::<relclock::Result<_>>()?,
    )?;
    integrate_master(&ens, &sys, &clock, &p, g, &uniform_grid(horizon, cfg.dt)?, &cfg)
}

fn main() -> relclock::Result<()> {
    let cfg = IntegratorConfig { dt: 0.02, ..IntegratorConfig::default() };
    let plus = state(C64::new(1.0, 0.0));
    println!("purity change over tau in [0, 2], sigma = sqrt d");
    for d in [8usize, 16, 32] {
        let t = master(d, (d as f64).sqrt(), [d / 2 - 1, d / 2], std::slice::from_ref(&plus), cfg, 2.0)?;
        let p0 = t.diagnostics[0].purity;
        let dp = t.diagnostics.iter().map(|x| (x.purity - p0).abs()).fold(0.0, f64::max);
        println!("  d = {d:>2}: {dp:.3e}  (trace drift {:.1e})", t.summary().max_trace_defect);
    }

    let members = [plus, state(C64::new(0.0, 1.0))];
    let etm = master(8, 2.0, [2, 3], &members, cfg, 1.0)?;
    let mte =
        master(8, 2.0, [2, 3], &members, IntegratorConfig { ensemble_mode: EnsembleMode::MixThenEvolve, ..cfg }, 1.0)?;
    let gap = etm
        .states
        .iter()
        .zip(&mte.states)
        .map(|(a, b)| distance(a, b).map(|x| x.trace_distance))
        .collect::<relclock::Result<Vec<_>>>()?;
    println!(
        "evolve-then-mix vs mix-then-evolve, d = 8: max trace distance {:.3e}",
        gap.iter().fold(0.0f64, |m, x| m.max(*x))
    );
    Ok(())
}
