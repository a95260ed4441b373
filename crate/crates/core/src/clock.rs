//! Finite clock with evenly spaced levels, its time basis and quasi-ideal
//! clock states.

use crate::linalg::root_of_unity;
use crate::{precise, CMat, CVec, Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockModel {
    d: usize,
    omega: f64,
    period: f64,
}

impl ClockModel {
    pub fn new(d: usize, omega: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("clock dimension must be >= 2, got {d}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        Ok(ClockModel { d, omega, period: 2.0 * PI / omega })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Physical duration of one tick, `T / d`.
    pub fn tick(&self) -> f64 {
        self.period / self.d as f64
    }

    /// Energy eigenvalues `omega * j`.
    pub fn energies(&self) -> Vec<f64> {
        (0..self.d).map(|j| self.omega * j as f64).collect()
    }
}

pub fn clock_hamiltonian(clock: &ClockModel) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(clock.d, clock.energies().into_iter().map(|e| C64::new(e, 0.0))))
}

/// `|theta_k>` in the energy basis; `k` is reduced mod `d`.
pub fn time_state(clock: &ClockModel, k: i64) -> CVec {
    let d = clock.d;
    let s = 1.0 / (d as f64).sqrt();
    CVec::from_iterator(d, (0..d).map(|j| root_of_unity(j as i64 * k, d) * s))
}

/// Time operator `sum_k t_k |theta_k><theta_k|` with `t_k = (T/d) k` for
/// `k = 0..d`, in the energy basis.
pub fn time_operator(clock: &ClockModel) -> CMat {
    time_operator_labels(clock, 0)
}

/// Time operator whose eigenvalues are `(T/d) k` for the labels
/// `k = start..start+d`.
pub fn time_operator_labels(clock: &ClockModel, start: i64) -> CMat {
    let d = clock.d;
    let pref = clock.tick() / d as f64;
    let mut m = CMat::zeros(d, d);
    for j in 0..d {
        for l in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in start..start + d as i64 {
                acc += root_of_unity((j as i64 - l as i64) * k, d) * k as f64;
            }
            m[(j, l)] = acc * pref;
        }
    }
    m
}

/// `e^{-i H_C t} v`, computed as a phase per energy level.
pub fn evolve_clock(clock: &ClockModel, v: &CVec, t: f64) -> CVec {
    CVec::from_iterator(
        v.len(),
        v.iter().enumerate().map(|(j, z)| z * C64::from_polar(1.0, -clock.omega * j as f64 * t)),
    )
}

/// First label of the window of `d` consecutive time labels centred on `k0`.
///
/// Even `d`: `ceil(k0) - d/2`. Odd `d`: the window is centred on `k0`
/// rounded half up, which keeps `k0` within 1/2 of the midpoint.
pub fn window_start(d: usize, k0: f64) -> i64 {
    let half = (d / 2) as i64;
    if d.is_multiple_of(2) {
        k0.ceil() as i64 - half
    } else {
        (k0 + 0.5).floor() as i64 - half
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiIdealParams {
    pub k0: f64,
    pub sigma: f64,
    pub j0: f64,
}

impl QuasiIdealParams {
    pub fn new(k0: f64, sigma: f64, j0: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if !k0.is_finite() || !j0.is_finite() {
            return Err(Error::InvalidParameter("k0 and j0 must be finite".into()));
        }
        Ok(QuasiIdealParams { k0, sigma, j0 })
    }

    /// `sigma = sqrt(d)`, `j0 = (d-1)/2`.
    pub fn symmetric(d: usize, k0: f64) -> Self {
        QuasiIdealParams { k0, sigma: (d as f64).sqrt(), j0: (d as f64 - 1.0) / 2.0 }
    }

    /// The same wavepacket centred at `tau`.
    pub fn at(&self, tau: f64) -> Self {
        QuasiIdealParams { k0: tau, ..*self }
    }

    pub fn validate(&self, clock: &ClockModel) -> Result<()> {
        let d = clock.d as f64;
        if !(self.sigma > 0.0 && self.sigma < d) {
            return Err(Error::InvalidParameter(format!("sigma must lie in (0, {d}), got {}", self.sigma)));
        }
        if !(self.j0 > 0.0 && self.j0 < d - 1.0) {
            return Err(Error::InvalidParameter(format!("j0 must lie in (0, {}), got {}", d - 1.0, self.j0)));
        }
        Ok(())
    }

    pub fn window(&self, d: usize) -> std::ops::Range<i64> {
        let s = window_start(d, self.k0);
        s..s + d as i64
    }
}

#[derive(Clone, Debug)]
pub struct QuasiIdealState {
    pub params: QuasiIdealParams,
    /// First window label; the window is `start..start + d`.
    pub start: i64,
    /// Normalization constant `A`.
    pub norm_const: f64,
    /// Amplitudes indexed by time label reduced mod `d`.
    pub amplitudes: CVec,
}

impl QuasiIdealState {
    pub fn d(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitude for the window label `k`.
    pub fn amplitude_at_label(&self, k: i64) -> C64 {
        self.amplitudes[k.rem_euclid(self.d() as i64) as usize]
    }

    /// `sum_k psi(k) |theta_k>` in the energy basis.
    pub fn energy_vector(&self) -> CVec {
        time_to_energy(&self.amplitudes)
    }
}

/// Energy components of a vector given by time-basis components indexed
/// `0..d`.
pub fn time_to_energy(c: &CVec) -> CVec {
    let d = c.len();
    let s = 1.0 / (d as f64).sqrt();
    CVec::from_iterator(d, (0..d).map(|j| (0..d).map(|k| c[k] * root_of_unity((j * k) as i64, d)).sum::<C64>() * s))
}

/// Time-basis components (`<theta_k|v>`, `k = 0..d`) of an energy vector.
pub fn energy_to_time(v: &CVec) -> CVec {
    let d = v.len();
    let s = 1.0 / (d as f64).sqrt();
    CVec::from_iterator(
        d,
        (0..d).map(|k| (0..d).map(|j| v[j] * root_of_unity((j * k) as i64, d).conj()).sum::<C64>() * s),
    )
}

/// Gaussian quasi-ideal clock state centred at `params.k0`.
pub fn qic_state(clock: &ClockModel, params: &QuasiIdealParams) -> Result<QuasiIdealState> {
    QuasiIdealParams::new(params.k0, params.sigma, params.j0)?;
    let d = clock.d;
    let start = window_start(d, params.k0);
    let s2 = params.sigma * params.sigma;
    let mut amps = CVec::zeros(d);
    let mut weight = 0.0;
    for k in start..start + d as i64 {
        let x = k as f64 - params.k0;
        let g = (-PI * x * x / s2).exp();
        weight += g * g;
        amps[k.rem_euclid(d as i64) as usize] = C64::from_polar(g, 2.0 * PI * params.j0 * x / d as f64);
    }
    let a = 1.0 / weight.sqrt();
    amps.scale_mut(a);
    Ok(QuasiIdealState { params: *params, start, norm_const: a, amplitudes: amps })
}

/// `|psi(k0 + t d / T)>`: the wavepacket moved along the time lattice.
pub fn qic_shift(clock: &ClockModel, params: &QuasiIdealParams, t: f64) -> Result<QuasiIdealState> {
    qic_state(clock, &params.at(params.k0 + t / clock.tick()))
}

/// `<psi(tau)|psi(tau')>` on the tick scale.
pub fn qic_overlap(clock: &ClockModel, params: &QuasiIdealParams, tau: f64, tau_prime: f64) -> Result<C64> {
    let a = qic_state(clock, &params.at(tau))?.energy_vector();
    let b = qic_state(clock, &params.at(tau_prime))?.energy_vector();
    Ok(a.dotc(&b))
}

/// `d/dtau psi(tau; k)` with `A` and the window held fixed, indexed by time
/// label mod `d`.
pub fn qic_derivative(clock: &ClockModel, params: &QuasiIdealParams, tau: f64) -> Result<CVec> {
    let st = qic_state(clock, &params.at(tau))?;
    let d = clock.d;
    let s2 = params.sigma * params.sigma;
    let mut out = CVec::zeros(d);
    for k in st.start..st.start + d as i64 {
        let idx = k.rem_euclid(d as i64) as usize;
        let x = k as f64 - tau;
        let f = C64::new(2.0 * PI * x / s2, -2.0 * PI * params.j0 / d as f64);
        out[idx] = st.amplitudes[idx] * f;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub numeric_norm: f64,
    pub analytic_bound: Option<f64>,
    /// Energy-basis components of the error vector.
    pub components: Option<CVec>,
}

fn report(parts: (Vec<C64>, f64), bound: Option<f64>) -> ErrorReport {
    let (c, n) = parts;
    ErrorReport { numeric_norm: n, analytic_bound: bound, components: Some(CVec::from_vec(c)) }
}

/// `e^{-i H_C t}|psi(k0)> - |psi(k0 + t d/T)>`.
pub fn evolution_error(clock: &ClockModel, params: &QuasiIdealParams, t: f64) -> Result<ErrorReport> {
    QuasiIdealParams::new(params.k0, params.sigma, params.j0)?;
    let d = clock.d;
    let parts =
        precise::evolution(d, params.sigma, params.j0, params.k0, clock.omega, t, window_start(d, params.k0), |k| {
            window_start(d, k)
        });
    Ok(report(parts, None))
}

/// The same vector as [`evolution_error`] evaluated in double precision.
pub fn evolution_error_f64(clock: &ClockModel, params: &QuasiIdealParams, t: f64) -> Result<ErrorReport> {
    let a = evolve_clock(clock, &qic_state(clock, params)?.energy_vector(), t);
    let b = qic_shift(clock, params, t)?.energy_vector();
    let e = a - b;
    Ok(ErrorReport { numeric_norm: e.norm(), analytic_bound: None, components: Some(e) })
}

/// `|eps'> = -d/dtau|psi(tau)> - i (T/d) H_C |psi(tau)>`, with the
/// envelope bound attached when `alpha0` is known (see [`default_alpha0`]).
pub fn lemma1_error(clock: &ClockModel, params: &QuasiIdealParams, tau: f64) -> Result<ErrorReport> {
    lemma1_error_with_alpha(clock, params, tau, default_alpha0(clock.d, params.j0))
}

pub fn lemma1_error_with_alpha(
    clock: &ClockModel,
    params: &QuasiIdealParams,
    tau: f64,
    alpha0: Option<f64>,
) -> Result<ErrorReport> {
    let st = qic_state(clock, &params.at(tau))?;
    let d = clock.d;
    let parts = precise::lemma1(d, params.sigma, params.j0, tau, st.start);
    let bound = match alpha0 {
        Some(a) => Some(analytic_bound(&BoundParams::new(a, params.sigma, d)?, st.norm_const)),
        None => None,
    };
    Ok(report(parts, bound))
}

/// The same vector as [`lemma1_error`] evaluated in double precision.
pub fn lemma1_error_f64(clock: &ClockModel, params: &QuasiIdealParams, tau: f64) -> Result<ErrorReport> {
    let psi = qic_state(clock, &params.at(tau))?.energy_vector();
    let dpsi = time_to_energy(&qic_derivative(clock, params, tau)?);
    let h = clock_hamiltonian(clock);
    let e = -dpsi - (h * psi) * C64::new(0.0, clock.tick());
    Ok(ErrorReport { numeric_norm: e.norm(), analytic_bound: None, components: Some(e) })
}

/// `[H_C, T_op]|psi> + i|psi>` where `T_op` uses the window labels of the
/// state, so its branch cut sits opposite the wavepacket.
pub fn commutator_error(clock: &ClockModel, params: &QuasiIdealParams) -> Result<ErrorReport> {
    QuasiIdealParams::new(params.k0, params.sigma, params.j0)?;
    let d = clock.d;
    let parts = precise::commutator(d, params.sigma, params.j0, params.k0, window_start(d, params.k0));
    Ok(report(parts, None))
}

/// `[H_C, T_op]|v> + i|v>` for an arbitrary energy-basis vector, in double
/// precision, using the time labels `start..start+d`.
pub fn commutator_error_of(clock: &ClockModel, v: &CVec, start: i64) -> ErrorReport {
    let h = clock_hamiltonian(clock);
    let t = time_operator_labels(clock, start);
    let e = (&h * &t - &t * &h) * v + v * C64::new(0.0, 1.0);
    ErrorReport { numeric_norm: e.norm(), analytic_bound: None, components: Some(e) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    pub alpha0: f64,
    pub sigma: f64,
    pub d: usize,
}

impl BoundParams {
    pub fn new(alpha0: f64, sigma: f64, d: usize) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0 <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha0 must lie in (0, 1], got {alpha0}")));
        }
        if !(sigma > 0.0) || d < 2 {
            return Err(Error::InvalidParameter("bound needs sigma > 0 and d >= 2".into()));
        }
        Ok(BoundParams { alpha0, sigma, d })
    }
}

/// `alpha0 = 1` for a centred mean energy; otherwise unknown.
pub fn default_alpha0(d: usize, j0: f64) -> Option<f64> {
    ((j0 - (d as f64 - 1.0) / 2.0).abs() < 1e-12).then_some(1.0)
}

/// Envelope for `||eps'||`, with decaying exponentials and every
/// `1/(1 - e^x)` term taken in absolute value.
pub fn analytic_bound(p: &BoundParams, norm_a: f64) -> f64 {
    let d = p.d as f64;
    let s = p.sigma;
    let s2 = s * s;
    if (s - d.sqrt()).abs() <= 1e-12 * d.sqrt() {
        let a = 0.5 + 1.0 / (2.0 * PI * d) + (1.0 / (1.0 - PI.exp())).abs();
        let e = (-PI * d / 4.0).exp();
        2.0 * PI * norm_a * (2.0 * d.sqrt() * a * e + a * e)
    } else {
        let a0 = p.alpha0;
        let f1 = a0 / 2.0 + 1.0 / (2.0 * PI * s2) + (1.0 / (1.0 - (PI * s2 * a0).exp())).abs();
        let t1 = 2.0 * s * f1 * (-PI * s2 * a0 / 4.0).exp();
        let f2 = 1.0 / (2.0 * PI * d)
            + d / (2.0 * s2)
            + (1.0 / (1.0 - (PI * d / s2).exp())).abs()
            + (1.0 / (1.0 - (PI * d * d / s2).exp())).abs();
        let t2 = f2 * (-PI * d * d / (4.0 * s2)).exp();
        2.0 * PI * norm_a * (t1 + t2)
    }
}
