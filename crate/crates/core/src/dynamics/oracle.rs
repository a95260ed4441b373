use super::{check_grid, Method, Trajectory};
use crate::clock::{ClockModel, QuasiIdealParams};
use crate::constraint::{condition_qic, Ensemble};
use crate::linalg::projector;
use crate::{CMat, Error, Result, C64};
use rayon::prelude::*;

pub const NORM_FLOOR: f64 = 1e-12;

/// Mixture of the normalized conditioned states at `tau`, and the smallest
/// member norm before normalization.
pub fn initial_density(ens: &Ensemble, clock: &ClockModel, params: &QuasiIdealParams, tau: f64) -> Result<(CMat, f64)> {
    let (_, d_s) = ens.dims();
    let mut rho = CMat::zeros(d_s, d_s);
    let mut min_norm = f64::INFINITY;
    for (p, psi) in &ens.members {
        let v = condition_qic(psi, clock, params, tau)?;
        let n = v.norm();
        if !(n >= NORM_FLOOR) {
            return Err(Error::NormFloor { tau, norm: n });
        }
        min_norm = min_norm.min(n);
        rho += projector(&(v / C64::new(n, 0.0))) * C64::new(*p, 0.0);
    }
    Ok((rho, min_norm))
}

/// Exact relational trajectory: condition every member on the clock state
/// centred at each grid time, normalize, and mix.
pub fn oracle_trajectory(
    ens: &Ensemble,
    clock: &ClockModel,
    params: &QuasiIdealParams,
    grid: &[f64],
) -> Result<Trajectory> {
    check_grid(grid)?;
    if ens.dims().0 != clock.d() {
        return Err(Error::DimensionMismatch(format!(
            "global states have clock dimension {}, clock has {}",
            ens.dims().0,
            clock.d()
        )));
    }
    let rows: Vec<(CMat, f64)> =
        grid.par_iter().map(|&t| initial_density(ens, clock, params, t)).collect::<Result<_>>()?;
    let (states, norms): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(Trajectory::new(Method::Oracle, grid.to_vec(), states, Some(norms)))
}
