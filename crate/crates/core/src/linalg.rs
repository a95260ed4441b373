//! Small dense helpers on top of nalgebra.

use crate::{CMat, CVec, Error, Result, C64};
use nalgebra::SymmetricEigen;

/// `e^{-i 2 pi r / d}` with `r` reduced mod `d` before the angle is formed.
pub fn root_of_unity(r: i64, d: usize) -> C64 {
    let d = d as i64;
    let r = r.rem_euclid(d);
    let ang = -2.0 * std::f64::consts::PI * (r as f64) / (d as f64);
    C64::from_polar(1.0, ang)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

/// Frobenius norm of `a - a^dagger`.
pub fn herm_defect(a: &CMat) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub fn outer(u: &CVec, v: &CVec) -> CMat {
    u * v.adjoint()
}

pub fn projector(v: &CVec) -> CMat {
    outer(v, v)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh(a: &CMat) -> Result<Eigh> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!("eigh needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let se = SymmetricEigen::new(hermitian_part(a));
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        vectors.set_column(c, &se.eigenvectors.column(i));
    }
    Ok(Eigh { values, vectors })
}

impl Eigh {
    /// `f(A) = V diag(f(lambda)) V^dagger`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for c in 0..n {
            let z = f(self.values[c]);
            for r in 0..n {
                scaled[(r, c)] *= z;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `e^{-i A t}`.
    pub fn propagator(&self, t: f64) -> CMat {
        self.apply_fn(|x| C64::from_polar(1.0, -x * t))
    }
}

/// Principal square root of a positive semidefinite matrix (negative
/// eigenvalues from roundoff are clamped to zero).
pub fn sqrt_psd(a: &CMat) -> Result<CMat> {
    Ok(eigh(a)?.apply_fn(|x| C64::new(x.max(0.0).sqrt(), 0.0)))
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_is_unitary() {
        let h = CMat::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.2, -0.3), C64::new(0.2, 0.3), C64::new(-0.5, 0.0)],
        );
        let u = eigh(&h).unwrap().propagator(1.7);
        let id = &u * u.adjoint();
        assert!((id - CMat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let h = CMat::from_row_slice(
            3,
            3,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.5, 0.0),
                C64::new(0.0, -1.0),
                C64::new(-1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.3, 0.0),
            ],
        );
        let e = eigh(&h).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = e.apply_fn(|x| C64::new(x, 0.0));
        assert!((back - h).norm() < 1e-13);
    }

    #[test]
    fn root_reduces_large_arguments() {
        let a = root_of_unity(1_000_003, 8);
        let b = root_of_unity(3, 8);
        assert!((a - b).norm() == 0.0);
    }
}
