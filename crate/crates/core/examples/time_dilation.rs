//! Coherence frequency shift of the conditioned system state against the
//! first-order dilation prediction g (E0^2 - E1^2) T/d.
//!
//! cargo run --example time_dilation

use relclock::analysis::phase_frequency;
use relclock::clock::{ClockModel, QuasiIdealParams};
use relclock::constraint::{history_state_coupled, Ensemble, SystemModel};
use relclock::dynamics::{oracle_trajectory, uniform_grid};
use relclock::{CVec, C64};

fn main() -> relclock::Result<()> {
    let d = 64;
    let clock = ClockModel::new(d, 1.0)?;
    let p = QuasiIdealParams::new(0.0, 8.0, 0.5)?;
    let grid = uniform_grid(d as f64 / 8.0, 0.25)?;
    let psi0 = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]) / C64::new(2f64.sqrt(), 0.0);
    println!("{:>8} {:>14} {:>14} {:>10}", "g", "shift", "predicted", "rel.err");
    for g in [0.0025, 0.005, 0.01, 0.02] {
        let sys = SystemModel::clock_levels(&clock, g, &[0, 1])?;
        let (e0, e1) = (sys.hamiltonian()[(0, 0)].re, sys.hamiltonian()[(1, 1)].re);
        let ens = Ensemble::pure(history_state_coupled(&sys, &clock, g, &psi0)?);
        let orc = oracle_trajectory(&ens, &clock, &p, &grid)?;
        let shift = phase_frequency(&grid, &orc.states, 0, 1)? + clock.tick() * (e0 - e1);
        let predicted = -clock.tick() * g * (e0 * e0 - e1 * e1);
        println!("{g:>8} {shift:>14.6e} {predicted:>14.6e} {:>10.2e}", (shift / predicted - 1.0).abs());
    }
    Ok(())
}
