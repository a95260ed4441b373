//! Run configuration documents.

use crate::clock::{ClockModel, QuasiIdealParams};
use crate::constraint::SystemModel;
use crate::dynamics::{EnsembleMode, Method, SecondTerm, Stepper};
use crate::{CMat, CVec, Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NamedSigma {
    #[serde(rename = "sqrt_d")]
    SqrtD,
}

/// A number, or `"sqrt_d"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    Value(f64),
    Named(NamedSigma),
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec::Named(NamedSigma::SqrtD)
    }
}

impl SigmaSpec {
    pub fn resolve(&self, d: usize) -> f64 {
        match self {
            SigmaSpec::Value(s) => *s,
            SigmaSpec::Named(NamedSigma::SqrtD) => (d as f64).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NamedJ0 {
    #[serde(rename = "center")]
    Center,
}

/// A number, or `"center"` for `(d - 1) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum J0Spec {
    Value(f64),
    Named(NamedJ0),
}

impl Default for J0Spec {
    fn default() -> Self {
        J0Spec::Named(NamedJ0::Center)
    }
}

impl J0Spec {
    pub fn resolve(&self, d: usize) -> f64 {
        match self {
            J0Spec::Value(j) => *j,
            J0Spec::Named(NamedJ0::Center) => (d as f64 - 1.0) / 2.0,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockSpec {
    pub d: usize,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub sigma: SigmaSpec,
    #[serde(default)]
    pub j0: J0Spec,
    /// Start of the time grid, in ticks.
    #[serde(default)]
    pub k0: f64,
}

impl ClockSpec {
    pub fn build(&self) -> Result<(ClockModel, QuasiIdealParams)> {
        let clock = ClockModel::new(self.d, self.omega)?;
        let p = QuasiIdealParams::new(self.k0, self.sigma.resolve(self.d), self.j0.resolve(self.d))?;
        p.validate(&clock)?;
        Ok((clock, p))
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(&self) -> C64 {
        match self {
            Entry::Real(x) => C64::new(*x, 0.0),
            Entry::Complex([a, b]) => C64::new(*a, *b),
        }
    }
}

pub fn matrix_from_rows(rows: &[Vec<Entry>]) -> Result<CMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("matrix must be square and non-empty".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j].value()))
}

pub fn vector_from_entries(v: &[Entry]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(Entry::value))
}

/// Exactly one of `hamiltonian`, `energies` or `clock_levels`.
/// `clock_levels` builds the diagonal system that pairs exactly with the
/// listed clock levels at the configured coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock_levels: Option<Vec<usize>>,
}

impl SystemSpec {
    pub fn build(&self, clock: &ClockModel, g: f64) -> Result<SystemModel> {
        let given = [self.hamiltonian.is_some(), self.energies.is_some(), self.clock_levels.is_some()];
        if given.iter().filter(|b| **b).count() != 1 {
            return Err(Error::Config("system needs exactly one of hamiltonian, energies, clock_levels".into()));
        }
        let sys = if let Some(h) = &self.hamiltonian {
            SystemModel::new(matrix_from_rows(h)?)?
        } else if let Some(e) = &self.energies {
            SystemModel::diagonal(e)?
        } else {
            SystemModel::clock_levels(clock, g, self.clock_levels.as_deref().unwrap_or_default())?
        };
        if let Some(n) = self.dim_s {
            if n != sys.dim() {
                return Err(Error::Config(format!("dim_s = {n} but the system has dimension {}", sys.dim())));
            }
        }
        Ok(sys)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScale {
    /// Times in clock ticks.
    #[default]
    Grid,
    /// Physical times; divided by `T/d` on load.
    Physical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Horizon as a multiple of `d` (used when `t_max` is absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max_per_d: Option<f64>,
    pub dt: f64,
    #[serde(default)]
    pub time_scale: TimeScale,
}

impl GridSpec {
    /// `(t_max, dt)` in ticks.
    pub fn resolve(&self, clock: &ClockModel) -> Result<(f64, f64)> {
        let t_max = match (self.t_max, self.t_max_per_d) {
            (Some(t), None) => t,
            (None, Some(f)) => f * clock.d() as f64,
            _ => return Err(Error::Config("grid needs exactly one of t_max, t_max_per_d".into())),
        };
        Ok(match self.time_scale {
            TimeScale::Grid => (t_max, self.dt),
            TimeScale::Physical => (t_max / clock.tick(), self.dt / clock.tick()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub weight: f64,
    pub state: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMemberSpec {
    pub weight: f64,
    pub path: String,
}

/// Exactly one of `members` (pure system states), `density_matrix`, or
/// `global_states` (files written by `save_global_states`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<MemberSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_matrix: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_states: Option<Vec<FileMemberSpec>>,
    /// Starting density for the unitary methods.
    #[serde(default)]
    pub rho0: Rho0Source,
}

/// `members` mixes the given pure states; `oracle` conditions the global
/// state at the first grid point, the same start the master equation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Rho0Source {
    #[default]
    Members,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSpec {
    pub stepper: Stepper,
    pub second_term: SecondTerm,
    pub ensemble_mode: EnsembleMode,
    pub hermitize_potential: bool,
    pub force_zero_potential: bool,
    /// RK4 step for the unitary equations; defaults to the grid step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substep: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Smallest acceptable conditioned norm before exit code 4.
    pub norm_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { norm_floor: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub clock: ClockSpec,
    pub system: SystemSpec,
    #[serde(default)]
    pub g: f64,
    pub grid: GridSpec,
    pub method: Method,
    pub initial: InitialSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Trajectory CSV path; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Write each member's global state to `<prefix>_<i>.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub save_global_states: Option<String>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Sweep over one configuration axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    D,
    Sigma,
    G,
    Dt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceAt {
    #[default]
    Final,
    Max,
}

/// Overrides that turn a sweep point into its reference run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stepper: Option<Stepper>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSpec>,
    #[serde(default)]
    pub distance: DistanceAt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub d_values: Vec<usize>,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub sigma: SigmaSpec,
    #[serde(default)]
    pub j0: J0Spec,
    /// Clock position for the derivative and commutator errors.
    #[serde(default)]
    pub tau: f64,
    /// Evolution time for the evolution error; defaults to `T / (2d)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution_time: Option<f64>,
    /// Spectrum-edge parameter for the envelope when `j0` is off centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
}
