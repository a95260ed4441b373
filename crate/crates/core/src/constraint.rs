//! Constrained clock-system Hamiltonian, global states and conditioning.

use crate::clock::{clock_hamiltonian, qic_overlap, qic_state, time_state, ClockModel, QuasiIdealParams};
use crate::linalg::{eigh, kron, Eigh};
use crate::{CMat, CVec, Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug)]
pub struct SystemModel {
    hamiltonian: CMat,
    eig: Eigh,
}

impl SystemModel {
    pub fn new(hamiltonian: CMat) -> Result<Self> {
        let n = hamiltonian.nrows();
        if n == 0 || hamiltonian.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "system Hamiltonian must be square and non-empty, got {}x{}",
                n,
                hamiltonian.ncols()
            )));
        }
        let defect = crate::linalg::herm_defect(&hamiltonian);
        if defect > 1e-12 * hamiltonian.norm().max(1.0) {
            return Err(Error::InvalidParameter(format!("system Hamiltonian is not Hermitian (defect {defect:e})")));
        }
        let eig = eigh(&hamiltonian)?;
        Ok(SystemModel { hamiltonian, eig })
    }

    pub fn diagonal(energies: &[f64]) -> Result<Self> {
        let v = CVec::from_iterator(energies.len(), energies.iter().map(|&e| C64::new(e, 0.0)));
        Self::new(CMat::from_diagonal(&v))
    }

    /// Diagonal system whose level `m` pairs exactly with clock level
    /// `levels[m]` under coupling `g`: `E_m = -omega j / (1 - g omega j)`.
    pub fn clock_levels(clock: &ClockModel, g: f64, levels: &[usize]) -> Result<Self> {
        let mut e = Vec::with_capacity(levels.len());
        for &j in levels {
            if j >= clock.d() {
                return Err(Error::InvalidParameter(format!("clock level {j} outside 0..{}", clock.d())));
            }
            let wj = clock.omega() * j as f64;
            let den = 1.0 - g * wj;
            if den <= 0.0 {
                return Err(Error::InvalidParameter(format!("g * omega * j = {} must stay below 1", g * wj)));
            }
            e.push(-wj / den);
        }
        Self::diagonal(&e)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    /// Eigenvalues, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.eig.values
    }

    /// Eigenvectors as columns, in the order of [`Self::energies`].
    pub fn eigenvectors(&self) -> &CMat {
        &self.eig.vectors
    }

    pub fn eigh(&self) -> &Eigh {
        &self.eig
    }

    pub fn max_abs_energy(&self) -> f64 {
        self.eig.values.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

/// True when `g * max|E_m|` leaves the perturbative regime the approximate
/// equations assume.
pub fn coupling_is_strong(sys: &SystemModel, g: f64) -> bool {
    g * sys.max_abs_energy() >= 0.1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    KernelSolver,
    HistoryConstructor,
}

#[derive(Clone, Debug)]
pub struct GlobalState {
    pub d: usize,
    pub d_s: usize,
    /// Clock-major amplitudes, index `j * d_s + m`.
    pub vector: CVec,
    pub label: Provenance,
}

impl GlobalState {
    pub fn new(d: usize, d_s: usize, vector: CVec, label: Provenance) -> Result<Self> {
        if vector.len() != d * d_s {
            return Err(Error::DimensionMismatch(format!(
                "global vector has length {}, expected {}",
                vector.len(),
                d * d_s
            )));
        }
        let n = vector.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("global state norm is {n}, expected 1")));
        }
        Ok(GlobalState { d, d_s, vector, label })
    }

    /// Amplitudes `Psi[j, m]` as a `d x d_s` matrix.
    pub fn as_matrix(&self) -> CMat {
        CMat::from_fn(self.d, self.d_s, |j, m| self.vector[j * self.d_s + m])
    }

    pub fn to_document(&self) -> GlobalStateDoc {
        let mut amplitudes = Vec::with_capacity(2 * self.vector.len());
        for z in self.vector.iter() {
            amplitudes.push(z.re);
            amplitudes.push(z.im);
        }
        GlobalStateDoc { d: self.d, d_s: self.d_s, layout: LAYOUT.to_string(), provenance: self.label, amplitudes }
    }

    pub fn from_document(doc: &GlobalStateDoc) -> Result<Self> {
        if doc.layout != LAYOUT {
            return Err(Error::Config(format!("unsupported layout {:?}, expected {LAYOUT:?}", doc.layout)));
        }
        if doc.amplitudes.len() != 2 * doc.d * doc.d_s {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitude entries for d = {}, d_s = {}",
                doc.amplitudes.len(),
                doc.d,
                doc.d_s
            )));
        }
        let v = CVec::from_iterator(doc.d * doc.d_s, doc.amplitudes.chunks(2).map(|c| C64::new(c[0], c[1])));
        GlobalState::new(doc.d, doc.d_s, v, doc.provenance)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(&self.to_document())?;
        std::fs::write(path, s + "\n")?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let doc: GlobalStateDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_document(&doc)
    }
}

pub const LAYOUT: &str = "clock-energy-major";

/// File form of a [`GlobalState`]. Amplitudes are interleaved `re, im`
/// pairs written as shortest round-trip decimals, which parse back to the
/// identical doubles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalStateDoc {
    pub d: usize,
    pub d_s: usize,
    pub layout: String,
    pub provenance: Provenance,
    pub amplitudes: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    pub members: Vec<(f64, GlobalState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, GlobalState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("ensemble has no members".into()));
        }
        let total: f64 = members.iter().map(|m| m.0).sum();
        if members.iter().any(|m| !(m.0 > 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("weights must be positive and sum to 1 (sum {total})")));
        }
        let (d, d_s) = (members[0].1.d, members[0].1.d_s);
        if members.iter().any(|m| m.1.d != d || m.1.d_s != d_s) {
            return Err(Error::DimensionMismatch("ensemble members differ in (d, d_s)".into()));
        }
        Ok(Ensemble { members })
    }

    pub fn pure(state: GlobalState) -> Self {
        Ensemble { members: vec![(1.0, state)] }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.members[0].1.d, self.members[0].1.d_s)
    }
}

/// `H = H_S + H_C - g H_S H_C` on the clock-major joint space.
pub fn total_hamiltonian(sys: &SystemModel, clock: &ClockModel, g: f64) -> CMat {
    let hc = clock_hamiltonian(clock);
    let hs = sys.hamiltonian();
    let ic = CMat::identity(clock.d(), clock.d());
    let is = CMat::identity(sys.dim(), sys.dim());
    kron(&ic, hs) + kron(&hc, &is) - kron(&hc, hs).scale(g)
}

/// Orthonormal eigenvectors of `h` with `|eigenvalue| < tol`, sorted by
/// `|eigenvalue|`. An empty list means no kernel state at this tolerance;
/// [`require_kernel`] turns that into an error.
pub fn kernel_states(h: &CMat, d: usize, d_s: usize, tol: f64) -> Result<Vec<GlobalState>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if h.nrows() != d * d_s {
        return Err(Error::DimensionMismatch(format!("Hamiltonian has size {}, expected {}", h.nrows(), d * d_s)));
    }
    let e = eigh(h)?;
    let mut idx: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i].abs() < tol).collect();
    idx.sort_by(|&a, &b| e.values[a].abs().total_cmp(&e.values[b].abs()));
    idx.into_iter()
        .map(|i| {
            let v = e.vectors.column(i).into_owned();
            let n = v.norm();
            GlobalState::new(d, d_s, v / C64::new(n, 0.0), Provenance::KernelSolver)
        })
        .collect()
}

pub fn require_kernel(h: &CMat, d: usize, d_s: usize, tol: f64) -> Result<Vec<GlobalState>> {
    let ks = kernel_states(h, d, d_s, tol)?;
    if ks.is_empty() {
        let smallest = eigh(h)?.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        return Err(Error::NoKernelState { tol, smallest });
    }
    Ok(ks)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorReport {
    pub energy: f64,
    /// `-E_m / (omega (1 - g E_m))`, the clock level the sector pairs with.
    pub clock_index: f64,
    pub commensurate: bool,
}

/// Per system eigenvalue, the clock level needed for an exact kernel state
/// at coupling `g`. A sector is commensurate when that level is an integer
/// in `0..d` to within `1e-9`.
pub fn sector_report(sys: &SystemModel, clock: &ClockModel, g: f64) -> Vec<SectorReport> {
    sys.energies()
        .iter()
        .map(|&e| {
            let j = -e / (clock.omega() * (1.0 - g * e));
            let r = j.round();
            let ok = (j - r).abs() <= 1e-9 && r >= 0.0 && r <= (clock.d() - 1) as f64;
            SectorReport { energy: e, clock_index: j, commensurate: ok }
        })
        .collect()
}

/// History state at `g = 0`:
/// `(1/sqrt d) sum_k |theta_k> (x) e^{-i H_S t_k}|psi0>`.
pub fn history_state(sys: &SystemModel, clock: &ClockModel, psi0: &CVec) -> Result<GlobalState> {
    history_state_coupled(sys, clock, 0.0, psi0)
}

/// Exact kernel state of [`total_hamiltonian`] at coupling `g` built from
/// `psi0`: each energy component `c_m` of `psi0` is paired with clock level
/// `j_m = -E_m / (omega (1 - g E_m))`. Conditioning on `|theta_k>` returns
/// `e^{-i H_S (1 - g H_S)^{-1} t_k}|psi0>`.
pub fn history_state_coupled(sys: &SystemModel, clock: &ClockModel, g: f64, psi0: &CVec) -> Result<GlobalState> {
    let d_s = sys.dim();
    if psi0.len() != d_s {
        return Err(Error::DimensionMismatch(format!("psi0 has length {}, expected {d_s}", psi0.len())));
    }
    let n = psi0.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("psi0 must be normalized (norm {n})")));
    }
    let sectors = sector_report(sys, clock, g);
    let coeff = sys.eigenvectors().adjoint() * psi0;
    let bad: Vec<String> = sectors
        .iter()
        .zip(coeff.iter())
        .filter(|(s, c)| !s.commensurate && c.norm() > 1e-14)
        .map(|(s, _)| format!("E = {} needs clock level {}", s.energy, s.clock_index))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Incommensurate(bad.join("; ")));
    }
    let d = clock.d();
    let mut v = CVec::zeros(d * d_s);
    for (m, s) in sectors.iter().enumerate() {
        if coeff[m].norm() <= 1e-14 && !s.commensurate {
            continue;
        }
        let j = s.clock_index.round() as usize;
        for a in 0..d_s {
            v[j * d_s + a] += coeff[m] * sys.eigenvectors()[(a, m)];
        }
    }
    let n = v.norm();
    GlobalState::new(d, d_s, v / C64::new(n, 0.0), Provenance::HistoryConstructor)
}

/// `sqrt(d) <theta_k|Psi>`.
pub fn condition_time_basis(psi: &GlobalState, clock: &ClockModel, k: i64) -> CVec {
    let th = time_state(clock, k);
    let m = psi.as_matrix();
    (m.transpose() * th.conjugate()) * C64::new((psi.d as f64).sqrt(), 0.0)
}

/// `<psi_QI(tau)|Psi>`, unnormalized.
pub fn condition_qic(psi: &GlobalState, clock: &ClockModel, params: &QuasiIdealParams, tau: f64) -> Result<CVec> {
    let q = qic_state(clock, &params.at(tau))?.energy_vector();
    Ok(psi.as_matrix().transpose() * q.conjugate())
}

/// The same vector as [`condition_qic`], assembled from the time-basis
/// conditioned states: `(1/sqrt d) sum_{k in S} psi*(tau; k) |psi_S(k)>`.
pub fn condition_qic_from_ticks(
    psi: &GlobalState,
    clock: &ClockModel,
    params: &QuasiIdealParams,
    tau: f64,
) -> Result<CVec> {
    let st = qic_state(clock, &params.at(tau))?;
    let mut acc = CVec::zeros(psi.d_s);
    for k in st.start..st.start + psi.d as i64 {
        acc += condition_time_basis(psi, clock, k) * st.amplitude_at_label(k).conj();
    }
    Ok(acc / C64::new((psi.d as f64).sqrt(), 0.0))
}

/// `(1/d) int_0^d dtau' F_QI(tau - tau') |psi_S(tau')>` by the trapezoid rule
/// on `n_quad` equal intervals, where `|psi_S(tau')>` is [`condition_qic`].
pub fn effective_convolution(
    psi: &GlobalState,
    clock: &ClockModel,
    params: &QuasiIdealParams,
    tau: f64,
    n_quad: usize,
) -> Result<CVec> {
    let d = clock.d();
    if n_quad < 4 * d {
        return Err(Error::InvalidParameter(format!("n_quad must be at least 4d = {}, got {n_quad}", 4 * d)));
    }
    let h = d as f64 / n_quad as f64;
    let mut acc = CVec::zeros(psi.d_s);
    for i in 0..=n_quad {
        let tp = i as f64 * h;
        let w = if i == 0 || i == n_quad { 0.5 } else { 1.0 };
        let f = qic_overlap(clock, params, tau, tp)?;
        acc += condition_qic(psi, clock, params, tp)? * (f * w);
    }
    Ok(acc * C64::new(h / d as f64, 0.0))
}
