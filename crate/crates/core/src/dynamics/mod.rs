//! Relational system dynamics: the exact conditioning oracle and the
//! approximate equations of motion.

mod master;
mod oracle;
mod unitary;

pub use master::{
    build_potential, build_potential_from_ticks, integrate_master, potential_from_error, MemoryKernelEquation,
    Potential,
};
pub use oracle::{initial_density, oracle_trajectory};
pub use unitary::{integrate_commutator, integrate_ideal, integrate_pure, validate_density};

use crate::clock::ClockModel;
use crate::constraint::SystemModel;
use crate::linalg::{herm_defect, trace, Eigh};
use crate::{CMat, Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// `H_d = (T/d) H_S (1 + g H_S)`, sharing the eigenvectors of `H_S`.
#[derive(Clone, Debug)]
pub struct DilatedHamiltonian {
    pub matrix: CMat,
    pub g: f64,
    pub period: f64,
    pub d: usize,
    eig: Eigh,
}

impl DilatedHamiltonian {
    pub fn eigh(&self) -> &Eigh {
        &self.eig
    }
}

pub fn dilated_hamiltonian(sys: &SystemModel, clock: &ClockModel, g: f64) -> DilatedHamiltonian {
    let tick = clock.tick();
    let values: Vec<f64> = sys.energies().iter().map(|&e| tick * e * (1.0 + g * e)).collect();
    let eig = Eigh { values, vectors: sys.eigenvectors().clone() };
    let hs = sys.hamiltonian();
    let n = sys.dim();
    let matrix = (hs * (CMat::identity(n, n) + hs.scale(g))).scale(tick);
    DilatedHamiltonian { matrix, g, period: clock.period(), d: clock.d(), eig }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Oracle,
    Oursch,
    Ourvon,
    Master,
    Ideal,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Oursch => "oursch",
            Method::Ourvon => "ourvon",
            Method::Master => "master",
            Method::Ideal => "ideal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Stepper {
    #[default]
    ClosedForm,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryQuadrature {
    #[default]
    Trapezoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SecondTerm {
    #[default]
    TruncatedBch,
    ExactConjugation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleMode {
    #[default]
    EvolveThenMix,
    MixThenEvolve,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub stepper: Stepper,
    pub memory_quadrature: MemoryQuadrature,
    pub second_term: SecondTerm,
    pub ensemble_mode: EnsembleMode,
    pub hermitize_potential: bool,
    /// Replace the potential by zero (reduction checks).
    pub force_zero_potential: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 0.01,
            stepper: Stepper::ClosedForm,
            memory_quadrature: MemoryQuadrature::Trapezoid,
            second_term: SecondTerm::TruncatedBch,
            ensemble_mode: EnsembleMode::EvolveThenMix,
            hermitize_potential: false,
            force_zero_potential: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// `|tr rho - 1|`.
    pub trace_defect: f64,
    /// `||rho - rho^dagger||_F`.
    pub herm_defect: f64,
    /// `Re tr rho^2`.
    pub purity: f64,
    /// Smallest pre-normalization conditioned norm over members (oracle only).
    pub oracle_norm: Option<f64>,
}

impl Diagnostics {
    pub fn of(rho: &CMat, oracle_norm: Option<f64>) -> Self {
        Diagnostics {
            trace_defect: (trace(rho) - C64::new(1.0, 0.0)).norm(),
            herm_defect: herm_defect(rho),
            purity: trace(&(rho * rho)).re,
            oracle_norm,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub method: Method,
    pub grid: Vec<f64>,
    pub states: Vec<CMat>,
    pub diagnostics: Vec<Diagnostics>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub final_purity: f64,
    pub max_trace_defect: f64,
    pub max_herm_defect: f64,
}

impl Trajectory {
    pub fn new(method: Method, grid: Vec<f64>, states: Vec<CMat>, norms: Option<Vec<f64>>) -> Self {
        let diagnostics =
            states.iter().enumerate().map(|(i, r)| Diagnostics::of(r, norms.as_ref().map(|n| n[i]))).collect();
        Trajectory { method, grid, states, diagnostics }
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |r| r.nrows())
    }

    pub fn last(&self) -> &CMat {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn summary(&self) -> Summary {
        Summary {
            final_purity: self.diagnostics.last().map_or(f64::NAN, |d| d.purity),
            max_trace_defect: self.diagnostics.iter().map(|d| d.trace_defect).fold(0.0, f64::max),
            max_herm_defect: self.diagnostics.iter().map(|d| d.herm_defect).fold(0.0, f64::max),
        }
    }

    pub fn csv_header(dim: usize) -> String {
        let mut cols = vec!["tau".to_string()];
        for i in 0..dim {
            for j in 0..dim {
                cols.push(format!("re_rho_{i}_{j}"));
                cols.push(format!("im_rho_{i}_{j}"));
            }
        }
        cols.extend(["trace_defect", "herm_defect", "purity", "oracle_norm"].map(String::from));
        cols.join(",")
    }

    /// One header row, then one row per grid point; floats carry 17
    /// significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.dim();
        writeln!(w, "{}", Self::csv_header(n))?;
        for ((t, r), dg) in self.grid.iter().zip(&self.states).zip(&self.diagnostics) {
            let mut row = vec![fmt_f(*t)];
            for i in 0..n {
                for j in 0..n {
                    row.push(fmt_f(r[(i, j)].re));
                    row.push(fmt_f(r[(i, j)].im));
                }
            }
            row.push(fmt_f(dg.trace_defect));
            row.push(fmt_f(dg.herm_defect));
            row.push(fmt_f(dg.purity));
            row.push(dg.oracle_norm.map(fmt_f).unwrap_or_default());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// `t_max / dt` equal steps starting at 0.
pub fn uniform_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid needs dt > 0 and t_max >= 0 (dt {dt}, t_max {t_max})")));
    }
    let n = (t_max / dt).round();
    if (n * dt - t_max).abs() > 1e-9 * t_max.max(1.0) {
        return Err(Error::InvalidParameter(format!("t_max = {t_max} is not a multiple of dt = {dt}")));
    }
    Ok((0..=n as usize).map(|i| i as f64 * dt).collect())
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Classic fourth-order Runge-Kutta step.
pub(crate) fn rk4_step(f: impl Fn(f64, &CMat) -> CMat, t: f64, y: &CMat, h: f64) -> CMat {
    let k1 = f(t, y);
    let k2 = f(t + h / 2.0, &(y + &k1 * C64::new(h / 2.0, 0.0)));
    let k3 = f(t + h / 2.0, &(y + &k2 * C64::new(h / 2.0, 0.0)));
    let k4 = f(t + h, &(y + &k3 * C64::new(h, 0.0)));
    y + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
}
