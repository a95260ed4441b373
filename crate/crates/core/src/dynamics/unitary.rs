use super::{check_grid, dilated_hamiltonian, rk4_step, IntegratorConfig, Method, Stepper, Trajectory};
use crate::clock::ClockModel;
use crate::constraint::SystemModel;
use crate::linalg::{commutator, eigh, herm_defect, projector, trace, Eigh};
use crate::{CMat, CVec, Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Checks Hermiticity, unit trace and positivity to `1e-10`, naming the
/// first property that fails.
pub fn validate_density(rho: &CMat) -> Result<()> {
    if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
        return Err(Error::InvalidDensity(format!("not square: {}x{}", rho.nrows(), rho.ncols())));
    }
    let h = herm_defect(rho);
    if h > 1e-10 {
        return Err(Error::InvalidDensity(format!("not Hermitian (defect {h:e})")));
    }
    let tr = trace(rho);
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
    }
    let min = eigh(rho)?.values[0];
    if min < -1e-10 {
        return Err(Error::InvalidDensity(format!("not positive semidefinite (eigenvalue {min:e})")));
    }
    Ok(())
}

fn substeps(a: f64, b: f64, dt: f64) -> usize {
    (((b - a) / dt) - 1e-9).ceil().max(1.0) as usize
}

fn conjugate_trajectory(method: Method, eig: &Eigh, rho0: &CMat, grid: &[f64], cfg: &IntegratorConfig) -> Trajectory {
    let t0 = grid[0];
    let states = match cfg.stepper {
        Stepper::ClosedForm => grid
            .iter()
            .map(|&t| {
                let u = eig.propagator(t - t0);
                &u * rho0 * u.adjoint()
            })
            .collect(),
        Stepper::Rk4 => {
            let h = eig.apply_fn(|x| C64::new(x, 0.0));
            let f = |_t: f64, r: &CMat| commutator(&h, r) * (-I);
            let mut out = vec![rho0.clone()];
            let mut r = rho0.clone();
            for w in grid.windows(2) {
                let n = substeps(w[0], w[1], cfg.dt);
                let step = (w[1] - w[0]) / n as f64;
                for s in 0..n {
                    r = rk4_step(f, w[0] + s as f64 * step, &r, step);
                }
                out.push(r.clone());
            }
            out
        }
    };
    Trajectory::new(method, grid.to_vec(), states, None)
}

/// `i d psi / dtau = H_d psi`, reported as `|psi><psi|`.
pub fn integrate_pure(
    sys: &SystemModel,
    clock: &ClockModel,
    g: f64,
    psi0: &CVec,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_grid(grid)?;
    if psi0.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!("psi0 has length {}, expected {}", psi0.len(), sys.dim())));
    }
    let n = psi0.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("psi0 must be normalized (norm {n})")));
    }
    let hd = dilated_hamiltonian(sys, clock, g);
    let t0 = grid[0];
    let vecs: Vec<CVec> = match cfg.stepper {
        Stepper::ClosedForm => grid.iter().map(|&t| hd.eigh().propagator(t - t0) * psi0).collect(),
        Stepper::Rk4 => {
            let f = |_t: f64, y: &CMat| (&hd.matrix * y) * (-I);
            let mut y = CMat::from_column_slice(psi0.len(), 1, psi0.as_slice());
            let mut out = vec![psi0.clone()];
            for w in grid.windows(2) {
                let n = substeps(w[0], w[1], cfg.dt);
                let step = (w[1] - w[0]) / n as f64;
                for s in 0..n {
                    y = rk4_step(f, w[0] + s as f64 * step, &y, step);
                }
                out.push(y.column(0).into_owned());
            }
            out
        }
    };
    let states = vecs.iter().map(projector).collect();
    Ok(Trajectory::new(Method::Oursch, grid.to_vec(), states, None))
}

/// `d rho / dtau = -i [H_d, rho]`.
pub fn integrate_commutator(
    sys: &SystemModel,
    clock: &ClockModel,
    g: f64,
    rho0: &CMat,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_grid(grid)?;
    validate_density(rho0)?;
    if rho0.nrows() != sys.dim() {
        return Err(Error::DimensionMismatch("rho0 and H_S differ in size".into()));
    }
    let hd = dilated_hamiltonian(sys, clock, g);
    Ok(conjugate_trajectory(Method::Ourvon, hd.eigh(), rho0, grid, cfg))
}

/// Ideal-clock limit, `d rho / dt = -i [H_S + g H_S^2, rho]` in physical time.
pub fn integrate_ideal(
    sys: &SystemModel,
    g: f64,
    rho0: &CMat,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_grid(grid)?;
    validate_density(rho0)?;
    if rho0.nrows() != sys.dim() {
        return Err(Error::DimensionMismatch("rho0 and H_S differ in size".into()));
    }
    let values = sys.energies().iter().map(|&e| e * (1.0 + g * e)).collect();
    let eig = Eigh { values, vectors: sys.eigenvectors().clone() };
    Ok(conjugate_trajectory(Method::Ideal, &eig, rho0, grid, cfg))
}
