//! Distance between the conditioned (oracle) trajectory and the unitary
//! relational equation as the clock dimension grows and as the coupling
//! changes.
//!
//! cargo run --example oracle_vs_unitary

use relclock::analysis::distance;
use relclock::clock::{ClockModel, QuasiIdealParams};
use relclock::constraint::{history_state_coupled, Ensemble, SystemModel};
use relclock::dynamics::{integrate_commutator, oracle_trajectory, IntegratorConfig};
use relclock::linalg::projector;
use relclock::{CVec, C64};

fn gap(d: usize, g: f64, j0: f64, from_oracle: bool) -> relclock::Result<f64> {
    let clock = ClockModel::new(d, 1.0)?;
    let p = QuasiIdealParams::new(0.0, (d as f64).sqrt(), j0)?;
    let sys = SystemModel::clock_levels(&clock, g, &[0, 1])?;
    let psi0 = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]) / C64::new(2f64.sqrt(), 0.0);
    let ens = Ensemble::pure(history_state_coupled(&sys, &clock, g, &psi0)?);
    let grid = [0.0, d as f64 / 8.0];
    let orc = oracle_trajectory(&ens, &clock, &p, &grid)?;
    let rho0 = if from_oracle { orc.states[0].clone() } else { projector(&psi0) };
    let von = integrate_commutator(&sys, &clock, g, &rho0, &grid, &IntegratorConfig::default())?;
    Ok(distance(orc.last(), von.last())?.trace_distance)
}

fn main() -> relclock::Result<()> {
    println!("trace distance at tau = d/8, two-level system on clock levels 0 and 1");
    println!("{:>4} {:>22} {:>22}", "d", "j0=1, rho0 = psi0", "j0=1/2, rho0 = oracle");
    for d in [16, 32, 64] {
        println!("{d:>4} {:>22.4e} {:>22.4e}", gap(d, 0.01, 1.0, false)?, gap(d, 0.01, 0.5, true)?);
    }
    for (j0, seed, name) in [(1.0, false, "j0=1"), (0.5, true, "j0=1/2")] {
        let r = gap(64, 0.01, j0, seed)? / gap(64, 0.005, j0, seed)?;
        println!("{name}: gap(g = 0.01) / gap(g = 0.005) at d = 64 is {r:.3}");
    }
    Ok(())
}
