//! Seeded random models for property tests and the acceptance suite.
//!
//! Half the draws are generic (dense entries uniform in `[-1, 1]^2`), the
//! other half structured so that `M'` is often nontrivial: decoupled modes,
//! vanishing Hamiltonian, or sparse Kraus rows.

use rand::Rng;

use crate::model::GaussianModel;
use crate::{c, CMatrix, CVector, RVector};

pub fn random_complex<R: Rng>(rng: &mut R) -> crate::Complex64 {
    c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

pub fn random_cvector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| random_complex(rng))
}

pub fn random_rvector<R: Rng>(rng: &mut R, n: usize) -> RVector {
    RVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))
}

pub fn random_cmatrix<R: Rng>(rng: &mut R, r: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(r, cols, |_, _| random_complex(rng))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let a = random_cmatrix(rng, d, d);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

pub fn random_symmetric<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let a = random_cmatrix(rng, d, d);
    (&a + a.transpose()) * c(0.5, 0.0)
}

/// Dense model with `d` in `1..=4` (unless given) and `m` in `1..=2d`.
pub fn random_generic<R: Rng>(rng: &mut R, d: Option<usize>) -> GaussianModel {
    let d = d.unwrap_or_else(|| rng.random_range(1..=4));
    let m = rng.random_range(1..=2 * d);
    let omega = random_hermitian(rng, d);
    let kappa = random_symmetric(rng, d);
    let zeta = random_cvector(rng, d);
    let v = random_cmatrix(rng, m, d);
    let u = random_cmatrix(rng, m, d);
    GaussianModel::new(omega, kappa, zeta, v, u).expect("consistent shapes")
}

/// Structured model: the Hamiltonian and the Kraus rows only touch a random
/// subset of modes, some rows are sparse, and `H` is dropped half the time.
pub fn random_structured<R: Rng>(rng: &mut R, d: Option<usize>) -> GaussianModel {
    let d = d.unwrap_or_else(|| rng.random_range(1..=4));
    let m = rng.random_range(1..=2 * d);
    let touched: Vec<bool> = (0..d).map(|j| j == 0 || rng.random_bool(0.5)).collect();
    let mask = |j: usize, k: usize| touched[j] && touched[k];
    let mut omega = random_hermitian(rng, d);
    let mut kappa = random_symmetric(rng, d);
    let mut zeta = random_cvector(rng, d);
    for j in 0..d {
        for k in 0..d {
            if !mask(j, k) {
                omega[(j, k)] = c(0.0, 0.0);
                kappa[(j, k)] = c(0.0, 0.0);
            }
        }
        if !touched[j] {
            zeta[j] = c(0.0, 0.0);
        }
    }
    if rng.random_bool(0.5) {
        omega.fill(c(0.0, 0.0));
        kappa.fill(c(0.0, 0.0));
        zeta.fill(c(0.0, 0.0));
    }
    let mut v = random_cmatrix(rng, m, d);
    let mut u = random_cmatrix(rng, m, d);
    for l in 0..m {
        for k in 0..d {
            if !touched[k] || rng.random_bool(0.4) {
                v[(l, k)] = c(0.0, 0.0);
            }
            if !touched[k] || rng.random_bool(0.4) {
                u[(l, k)] = c(0.0, 0.0);
            }
        }
    }
    if v.iter().chain(u.iter()).all(|x| x.norm() == 0.0) {
        v[(0, 0)] = c(1.0, 0.0);
    }
    GaussianModel::new(omega, kappa, zeta, v, u).expect("consistent shapes")
}

/// Generic or structured with equal probability.
pub fn random_model<R: Rng>(rng: &mut R, d: Option<usize>) -> GaussianModel {
    if rng.random_bool(0.5) {
        random_generic(rng, d)
    } else {
        random_structured(rng, d)
    }
}

/// One Kraus operator, `H = 0`. A third of the draws are self-adjoint up to a
/// phase, a third normal, a third generic.
pub fn random_single_kraus<R: Rng>(rng: &mut R) -> GaussianModel {
    let d = rng.random_range(1..=4);
    let v = random_cvector(rng, d);
    let u = match rng.random_range(0..3) {
        0 => {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            &v * c(theta.cos(), theta.sin())
        }
        1 if d > 1 => {
            // same norm, different direction
            let w = random_cvector(rng, d);
            &w * c(v.norm() / w.norm(), 0.0)
        }
        _ => random_cvector(rng, d),
    };
    GaussianModel::new(
        CMatrix::zeros(d, d),
        CMatrix::zeros(d, d),
        CVector::zeros(d),
        CMatrix::from_fn(1, d, |_, k| v[k]),
        CMatrix::from_fn(1, d, |_, k| u[k]),
    )
    .expect("consistent shapes")
}
