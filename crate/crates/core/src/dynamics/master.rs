use super::{
    check_grid, dilated_hamiltonian, initial_density, rk4_step, DilatedHamiltonian, EnsembleMode, IntegratorConfig,
    Method, SecondTerm, Trajectory,
};
use crate::clock::{energy_to_time, lemma1_error, qic_state, ClockModel, QuasiIdealParams};
use crate::constraint::{condition_qic, condition_time_basis, Ensemble, GlobalState, SystemModel};
use crate::linalg::{commutator, herm_defect, hermitian_part};
use crate::{CMat, CVec, Error, Result, C64};
use rayon::prelude::*;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug)]
pub struct Potential {
    pub matrix: CMat,
    pub tau: f64,
    pub hermiticity_defect: f64,
}

impl Potential {
    fn new(matrix: CMat, tau: f64) -> Self {
        let hermiticity_defect = herm_defect(&matrix);
        Potential { matrix, tau, hermiticity_defect }
    }
}

/// `1 + g H_S (1 + d/T)`.
fn prefactor(sys: &SystemModel, clock: &ClockModel, g: f64) -> CMat {
    let n = sys.dim();
    let c = g * (1.0 + clock.d() as f64 / clock.period());
    CMat::identity(n, n) + sys.hamiltonian().scale(c)
}

fn effective_bra(psi: &GlobalState, clock: &ClockModel, params: &QuasiIdealParams, tau: f64) -> Result<CVec> {
    let v = condition_qic(psi, clock, params, tau)?;
    let n = v.norm();
    if !(n >= 1e-12) {
        return Err(Error::DegenerateState { tau, norm: n });
    }
    Ok(v / C64::new(n, 0.0))
}

/// `V = |eps_sg><psi_S(tau)|` with `|eps_sg> = (1 + g H_S (1 + d/T)) i <eps'|Psi>`
/// for a given energy-basis error vector `eps`.
pub fn potential_from_error(
    psi: &GlobalState,
    sys: &SystemModel,
    clock: &ClockModel,
    params: &QuasiIdealParams,
    tau: f64,
    g: f64,
    eps: &CVec,
) -> Result<Potential> {
    if eps.len() != psi.d || sys.dim() != psi.d_s {
        return Err(Error::DimensionMismatch("error vector, system and global state disagree".into()));
    }
    let e_s = (psi.as_matrix().transpose() * eps.conjugate()) * I;
    let e_sg = prefactor(sys, clock, g) * e_s;
    let bra = effective_bra(psi, clock, params, tau)?;
    Ok(Potential::new(&e_sg * bra.adjoint(), tau))
}

/// Potential built from the clock's derivative error at `tau`.
pub fn build_potential(
    psi: &GlobalState,
    sys: &SystemModel,
    clock: &ClockModel,
    params: &QuasiIdealParams,
    tau: f64,
    g: f64,
) -> Result<Potential> {
    let eps = lemma1_error(clock, params, tau)?.components.expect("components are always filled");
    potential_from_error(psi, sys, clock, params, tau, g, &eps)
}

/// The same matrix as [`build_potential`], assembled from time-basis
/// conditioned states:
/// `(i/d) P sum_{k,k'} eps'*_k psi(tau; k') |psi_S(k)><psi_S(k')| / ||psi_e||`.
pub fn build_potential_from_ticks(
    psi: &GlobalState,
    sys: &SystemModel,
    clock: &ClockModel,
    params: &QuasiIdealParams,
    tau: f64,
    g: f64,
) -> Result<Potential> {
    let d = clock.d();
    let eps = lemma1_error(clock, params, tau)?.components.expect("components are always filled");
    let eps_t = energy_to_time(&eps);
    let st = qic_state(clock, &params.at(tau))?;
    let ticks: Vec<CVec> = (0..d as i64).map(|k| condition_time_basis(psi, clock, k)).collect();
    let mut ket = CVec::zeros(psi.d_s);
    let mut bra = CVec::zeros(psi.d_s);
    for k in 0..d {
        ket += &ticks[k] * eps_t[k].conj();
        bra += &ticks[k] * st.amplitudes[k].conj();
    }
    let n = condition_qic(psi, clock, params, tau)?.norm();
    if !(n >= 1e-12) {
        return Err(Error::DegenerateState { tau, norm: n });
    }
    let m = prefactor(sys, clock, g) * (&ket * bra.adjoint()) * (I / C64::new(d as f64 * n, 0.0));
    Ok(Potential::new(m, tau))
}

/// Right-hand side of the memory-kernel equation with the potential
/// tabulated on a uniform grid of step `dt` (elapsed time from the first
/// node). Work is done in the eigenbasis of `H_d`, where conjugation by
/// `e^{-i H_d u}` is an elementwise phase.
#[derive(Clone, Debug)]
pub struct MemoryKernelEquation {
    h: Vec<f64>,
    w: CMat,
    dt: f64,
    vs: Vec<CMat>,
    second_term: SecondTerm,
}

impl MemoryKernelEquation {
    pub fn new(hd: &DilatedHamiltonian, potentials: &[CMat], dt: f64, second_term: SecondTerm) -> Self {
        let w = hd.eigh().vectors.clone();
        let vs = potentials.iter().map(|v| w.adjoint() * v * &w).collect();
        MemoryKernelEquation { h: hd.eigh().values.clone(), w, dt, vs, second_term }
    }

    fn eig_in(&self, x: &CMat) -> CMat {
        self.w.adjoint() * x * &self.w
    }

    fn eig_out(&self, x: &CMat) -> CMat {
        &self.w * x * self.w.adjoint()
    }

    /// `[H_d, x]` in the eigenbasis.
    fn comm_h(&self, x: &CMat) -> CMat {
        CMat::from_fn(x.nrows(), x.ncols(), |a, b| x[(a, b)] * (self.h[a] - self.h[b]))
    }

    /// `e^{-i H_d u} x e^{i H_d u}` in the eigenbasis.
    fn evolve(&self, x: &CMat, u: f64) -> CMat {
        CMat::from_fn(x.nrows(), x.ncols(), |a, b| x[(a, b)] * C64::from_polar(1.0, -(self.h[a] - self.h[b]) * u))
    }

    fn potential_at(&self, t: f64) -> CMat {
        let n = self.vs.len();
        if n == 1 {
            return self.vs[0].clone();
        }
        let x = t / self.dt;
        let i = ((x + 1e-9).floor().max(0.0) as usize).min(n - 2);
        let f = x - i as f64;
        &self.vs[i] * C64::new(1.0 - f, 0.0) + &self.vs[i + 1] * C64::new(f, 0.0)
    }

    fn rhs_eig(&self, t: f64, rho: &CMat, rho0: &CMat) -> CMat {
        let v = self.potential_at(t);
        let mut out = self.comm_h(rho) * (-I);
        out += match self.second_term {
            SecondTerm::TruncatedBch => {
                commutator(&v, rho0) * (-I) + commutator(&v, &self.comm_h(rho0)) * C64::new(t, 0.0)
            }
            SecondTerm::ExactConjugation => commutator(&v, &self.evolve(rho0, -t)) * (-I),
        };
        // trapezoid over stored nodes s_m <= t, plus a partial node at t
        let mut nodes: Vec<(f64, CMat)> = Vec::new();
        let mut m = 0usize;
        while m < self.vs.len() && m as f64 * self.dt <= t + 1e-12 {
            nodes.push((m as f64 * self.dt, self.vs[m].clone()));
            m += 1;
        }
        if let Some(&(s_last, _)) = nodes.last() {
            if t - s_last > 1e-12 {
                nodes.push((t, v.clone()));
            }
        }
        if nodes.len() > 1 {
            let vals: Vec<CMat> = nodes.iter().map(|(s, vs)| self.evolve(&commutator(vs, rho), t - s)).collect();
            let mut integral = CMat::zeros(rho.nrows(), rho.ncols());
            for k in 0..nodes.len() - 1 {
                let h = nodes[k + 1].0 - nodes[k].0;
                integral += (&vals[k] + &vals[k + 1]) * C64::new(0.5 * h, 0.0);
            }
            out -= commutator(&v, &integral);
        }
        out
    }

    /// `d rho / dtau` at elapsed time `tau` for the given current state and
    /// initial state.
    pub fn rhs(&self, tau: f64, rho: &CMat, rho0: &CMat) -> CMat {
        self.eig_out(&self.rhs_eig(tau, &self.eig_in(rho), &self.eig_in(rho0)))
    }

    /// RK4 over the tabulated grid; returns one state per node.
    pub fn integrate(&self, rho0: &CMat) -> Vec<CMat> {
        let r0 = self.eig_in(rho0);
        let mut r = r0.clone();
        let mut out = vec![rho0.clone()];
        for k in 0..self.vs.len().saturating_sub(1) {
            let t = k as f64 * self.dt;
            r = rk4_step(|s, y| self.rhs_eig(s, y, &r0), t, &r, self.dt);
            out.push(self.eig_out(&r));
        }
        out
    }
}

fn member_potentials(
    psi: &GlobalState,
    sys: &SystemModel,
    clock: &ClockModel,
    params: &QuasiIdealParams,
    g: f64,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<CMat>> {
    grid.par_iter()
        .map(|&t| {
            if cfg.force_zero_potential {
                return Ok(CMat::zeros(psi.d_s, psi.d_s));
            }
            let v = build_potential(psi, sys, clock, params, t, g)?.matrix;
            Ok(if cfg.hermitize_potential { hermitian_part(&v) } else { v })
        })
        .collect()
}

/// Memory-kernel master equation on a uniform grid; the initial state is
/// the oracle state at `grid[0]`.
pub fn integrate_master(
    ens: &Ensemble,
    sys: &SystemModel,
    clock: &ClockModel,
    params: &QuasiIdealParams,
    g: f64,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_grid(grid)?;
    let dt = if grid.len() > 1 { grid[1] - grid[0] } else { cfg.dt };
    if grid.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidParameter("memory-kernel integration needs a uniform grid".into()));
    }
    if (dt - cfg.dt).abs() > 1e-9 * dt {
        return Err(Error::InvalidParameter(format!("grid step {dt} differs from integrator dt {}", cfg.dt)));
    }
    if ens.dims() != (clock.d(), sys.dim()) {
        return Err(Error::DimensionMismatch("ensemble dimensions differ from clock and system".into()));
    }
    let hd = dilated_hamiltonian(sys, clock, g);
    let members: Vec<(f64, CMat, Vec<CMat>)> = ens
        .members
        .iter()
        .map(|(p, psi)| {
            let single = Ensemble::pure(psi.clone());
            let (rho0, _) = initial_density(&single, clock, params, grid[0])?;
            let vs = member_potentials(psi, sys, clock, params, g, grid, cfg)?;
            Ok((*p, rho0, vs))
        })
        .collect::<Result<_>>()?;
    let d_s = sys.dim();
    let states = match cfg.ensemble_mode {
        EnsembleMode::EvolveThenMix => {
            let runs: Vec<(f64, Vec<CMat>)> = members
                .par_iter()
                .map(|(p, rho0, vs)| (*p, MemoryKernelEquation::new(&hd, vs, dt, cfg.second_term).integrate(rho0)))
                .collect();
            (0..grid.len())
                .map(|i| runs.iter().fold(CMat::zeros(d_s, d_s), |acc, (p, rs)| acc + &rs[i] * C64::new(*p, 0.0)))
                .collect()
        }
        EnsembleMode::MixThenEvolve => {
            let mut rho0 = CMat::zeros(d_s, d_s);
            let mut vbar = vec![CMat::zeros(d_s, d_s); grid.len()];
            for (p, r, vs) in &members {
                rho0 += r * C64::new(*p, 0.0);
                for (acc, v) in vbar.iter_mut().zip(vs) {
                    *acc += v * C64::new(*p, 0.0);
                }
            }
            MemoryKernelEquation::new(&hd, &vbar, dt, cfg.second_term).integrate(&rho0)
        }
    };
    Ok(Trajectory::new(Method::Master, grid.to_vec(), states, None))
}
