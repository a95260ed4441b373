//! Error vectors of the quasi-ideal clock against dimension, with the
//! derivative-error envelope.
//!
//! cargo run --example clock_errors

use relclock::analysis::decay_fit;
use relclock::clock::{commutator_error, evolution_error, lemma1_error, ClockModel, QuasiIdealParams};

fn main() -> relclock::Result<()> {
    let ds = [8usize, 16, 32, 64];
    let mut cols: [Vec<f64>; 3] = Default::default();
    println!("{:>4} {:>12} {:>12} {:>12} {:>12}", "d", "eps_evol", "eps_prime", "eps_comm", "bound");
    for &d in &ds {
        let clock = ClockModel::new(d, 1.0)?;
        let p = QuasiIdealParams::symmetric(d, 0.0);
        let ev = evolution_error(&clock, &p, clock.period() / (2.0 * d as f64))?;
        let lp = lemma1_error(&clock, &p, 0.0)?;
        let cm = commutator_error(&clock, &p)?;
        println!(
            "{:>4} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            d,
            ev.numeric_norm,
            lp.numeric_norm,
            cm.numeric_norm,
            lp.analytic_bound.unwrap_or(f64::NAN)
        );
        cols[0].push(ev.numeric_norm);
        cols[1].push(lp.numeric_norm);
        cols[2].push(cm.numeric_norm);
    }
    let xs: Vec<f64> = ds.iter().map(|&d| d as f64).collect();
    for (name, ys) in ["eps_evol", "eps_prime", "eps_comm"].iter().zip(&cols) {
        let f = decay_fit(&xs, ys)?;
        println!("{name}: log-slope {:.4} per level, r^2 {:.4}", f.slope, f.r_squared);
    }
    Ok(())
}
