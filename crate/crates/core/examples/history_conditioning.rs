//! Build a history state, check it solves the constraint, and condition it on
//! clock readings two ways.
//!
//! cargo run --example history_conditioning

use relclock::clock::{ClockModel, QuasiIdealParams};
use relclock::constraint::{
    condition_qic, condition_qic_from_ticks, condition_time_basis, history_state_coupled, kernel_states, sector_report,
    total_hamiltonian, SystemModel,
};
use relclock::{CVec, C64};

fn main() -> relclock::Result<()> {
    let d = 16;
    let g = 0.01;
    let clock = ClockModel::new(d, 1.0)?;
    let sys = SystemModel::clock_levels(&clock, g, &[6, 7, 9])?;
    for s in sector_report(&sys, &clock, g) {
        println!("E = {:+.6}  pairs with clock level {:.3}  commensurate {}", s.energy, s.clock_index, s.commensurate);
    }

    let psi0 = CVec::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.6), C64::new(0.28f64.sqrt(), 0.0)]);
    let hist = history_state_coupled(&sys, &clock, g, &psi0)?;
    let h = total_hamiltonian(&sys, &clock, g);
    println!("||H Psi|| = {:.3e}", (&h * &hist.vector).norm());
    println!("kernel dimension at tol 1e-10: {}", kernel_states(&h, d, 3, 1e-10)?.len());

    let p = QuasiIdealParams::new(0.0, 4.0, 7.5)?;
    println!("{:>6} {:>10} {:>12} {:>12}", "tau", "norm", "dual gap", "1-|overlap|");
    for &tau in &[0.0, 1.0, 2.5, 5.0] {
        let a = condition_qic(&hist, &clock, &p, tau)?;
        let b = condition_qic_from_ticks(&hist, &clock, &p, tau)?;
        // on whole ticks the sharp time state gives the system state directly
        let tick = condition_time_basis(&hist, &clock, tau.round() as i64);
        let overlap = (a.dotc(&tick).norm() / (a.norm() * tick.norm()) - 1.0).abs();
        println!("{tau:>6.2} {:>10.6} {:>12.3e} {:>12.3e}", a.norm(), (&a - &b).norm(), overlap);
    }
    Ok(())
}
