//! State metrics, distances and fits.

use crate::linalg::{eigh, herm_defect, hermitian_part, sqrt_psd, trace};
use crate::{CMat, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateMetrics {
    pub purity: f64,
    pub l1_coherence: f64,
}

/// Purity and l1 coherence, with `rho` already expressed in the system
/// energy basis.
pub fn state_metrics(rho: &CMat) -> Result<StateMetrics> {
    let h = herm_defect(rho);
    if h > 1e-6 {
        return Err(Error::InvalidDensity(format!("hermiticity defect {h:e} exceeds 1e-6")));
    }
    let purity = trace(&(rho * rho)).re;
    let mut l1 = 0.0;
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            if i != j {
                l1 += rho[(i, j)].norm();
            }
        }
    }
    Ok(StateMetrics { purity, l1_coherence: l1 })
}

/// [`state_metrics`] after rotating `rho` into the basis given by the
/// columns of `basis` (e.g. `SystemModel::eigenvectors`).
pub fn state_metrics_in_basis(rho: &CMat, basis: &CMat) -> Result<StateMetrics> {
    state_metrics(&(basis.adjoint() * rho * basis))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distance {
    pub trace_distance: f64,
    /// `(tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2`.
    pub fidelity: f64,
}

/// Trace distance and fidelity of the Hermitian parts of two states.
pub fn distance(rho1: &CMat, rho2: &CMat) -> Result<Distance> {
    if rho1.shape() != rho2.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", rho1.shape(), rho2.shape())));
    }
    let a = hermitian_part(rho1);
    let b = hermitian_part(rho2);
    let trace_distance = 0.5 * eigh(&(&a - &b))?.values.iter().map(|x| x.abs()).sum::<f64>();
    let sa = sqrt_psd(&a)?;
    let inner = hermitian_part(&(&sa * &b * &sa));
    let root: f64 = eigh(&inner)?.values.iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok(Distance { trace_distance, fidelity: (root * root).clamp(0.0, 1.0) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares line through `(x, y)`. `r_squared` is 1 when `y` is
/// constant.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("line fit needs at least 2 paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("line fit needs distinct x values".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept, r_squared, n_points: xs.len() })
}

/// Line through `(x, ln y)`.
pub fn decay_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() < 3 {
        return Err(Error::InvalidParameter(format!("decay fit needs at least 3 points, got {}", xs.len())));
    }
    if let Some(y) = ys.iter().find(|y| !(**y > 0.0)) {
        return Err(Error::InvalidParameter(format!("decay fit needs positive values, got {y}")));
    }
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    line_fit(xs, &logs)
}

pub fn convergence_ratio(err_big: f64, err_small: f64) -> Result<f64> {
    if !(err_big > 0.0 && err_small > 0.0) {
        return Err(Error::InvalidParameter(format!("errors must be positive ({err_big}, {err_small})")));
    }
    Ok(err_big / err_small)
}

/// Angular frequency of `rho[i][j]` over the grid, from a least-squares fit
/// of its unwrapped phase.
pub fn phase_frequency(grid: &[f64], states: &[CMat], i: usize, j: usize) -> Result<f64> {
    let mut phases = Vec::with_capacity(states.len());
    let mut prev: Option<f64> = None;
    for r in states {
        let mut p = r[(i, j)].arg();
        if let Some(q) = prev {
            while p - q > std::f64::consts::PI {
                p -= 2.0 * std::f64::consts::PI;
            }
            while p - q < -std::f64::consts::PI {
                p += 2.0 * std::f64::consts::PI;
            }
        }
        prev = Some(p);
        phases.push(p);
    }
    Ok(line_fit(grid, &phases)?.slope)
}
