//! The relational equation at finite d against the ideal-clock equation in
//! physical time, and the unitary regime's closed form against RK4.
//!
//! cargo run --example ideal_clock_limit

use relclock::analysis::distance;
use relclock::clock::ClockModel;
use relclock::constraint::SystemModel;
use relclock::dynamics::{integrate_commutator, integrate_ideal, uniform_grid, IntegratorConfig, Stepper};
use relclock::linalg::projector;
use relclock::{CVec, C64};

fn main() -> relclock::Result<()> {
    let sys = SystemModel::diagonal(&[0.0, 1.0])?;
    let rho0 = projector(&CVec::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]));
    let g = 0.05;
    for d in [8usize, 16, 64] {
        let clock = ClockModel::new(d, 1.0)?;
        let grid = uniform_grid(d as f64 / 4.0, 0.05)?;
        let von = integrate_commutator(&sys, &clock, g, &rho0, &grid, &IntegratorConfig::default())?;
        let phys: Vec<f64> = grid.iter().map(|t| t * clock.tick()).collect();
        let ideal = integrate_ideal(&sys, g, &rho0, &phys, &IntegratorConfig::default())?;
        let rk = IntegratorConfig { stepper: Stepper::Rk4, ..IntegratorConfig::default() };
        let von_rk = integrate_commutator(&sys, &clock, g, &rho0, &grid, &rk)?;
        let mut worst = (0.0f64, 0.0f64);
        for i in 0..grid.len() {
            worst.0 = worst.0.max(distance(&von.states[i], &ideal.states[i])?.trace_distance);
            worst.1 = worst.1.max(distance(&von.states[i], &von_rk.states[i])?.trace_distance);
        }
        println!(
            "d = {d:>2}: tau -> t = tau T/d gap {:.2e}, rk4 vs closed form {:.2e}, final purity {:.15}",
            worst.0,
            worst.1,
            ideal.summary().final_purity
        );
    }
    Ok(())
}
