//! The worked examples as ready-made models.

use crate::model::{GaussianModel, KrausComponent, KrausKind, ModelBuilder, Quadrature, QuadraticTerm};
use crate::{c, CMatrix, CVector, I};

/// A model with its (expected) structure, for table-driven tests.
#[derive(Debug, Clone)]
pub struct NamedFixture {
    pub name: &'static str,
    pub model: GaussianModel,
    /// `(d_c, d_r, d_f)`.
    pub expected: (usize, usize, usize),
}

fn single(d: usize, comps: &[KrausComponent]) -> GaussianModel {
    ModelBuilder::new(d).kraus(comps).expect("valid components").build().expect("valid model")
}

/// `d = 1`, `L = a`, `H = 0`.
pub fn lossy() -> GaussianModel {
    single(1, &[KrausComponent::unit(KrausKind::A, 1)])
}

/// `d = 1`, `L = a`, `H = a^+ a`.
pub fn damped_rotating() -> GaussianModel {
    lossy()
        .with_hamiltonian(CMatrix::identity(1, 1), CMatrix::zeros(1, 1), CVector::zeros(1))
        .expect("valid model")
}

/// `L = q_1`, `H = 0`.
pub fn q1_noise(d: usize) -> GaussianModel {
    single(d, &[KrausComponent::unit(KrausKind::Q, 1)])
}

/// `L = q_1 + i q_2`, `H = 0`.
pub fn q1_iq2_noise(d: usize) -> GaussianModel {
    single(d, &[KrausComponent::unit(KrausKind::Q, 1), KrausComponent::new(KrausKind::Q, 2, I)])
}

/// `L = a_1`, `H = 0`.
pub fn a1_noise(d: usize) -> GaussianModel {
    single(d, &[KrausComponent::unit(KrausKind::A, 1)])
}

/// `L = a_1^+`, `H = 0`.
pub fn a1_dag_noise(d: usize) -> GaussianModel {
    single(d, &[KrausComponent::unit(KrausKind::ADag, 1)])
}

/// `d = 3`, `H = N`, one Kraus operator with `v = e_1`, `u = e_2`.
pub fn number_h_mixed_noise() -> GaussianModel {
    let d = 3;
    let mut v = CVector::zeros(d);
    let mut u = CVector::zeros(d);
    v[0] = c(1.0, 0.0);
    u[1] = c(1.0, 0.0);
    ModelBuilder::new(d)
        .omega(CMatrix::identity(d, d))
        .kraus_row(v, u)
        .build()
        .expect("valid model")
}

/// `L = p_1`, `H = q_d^2 + sum_{j<d} p_{j+1} q_j`: the commutator cap is attained.
pub fn saturating_chain(d: usize) -> GaussianModel {
    let mut terms = vec![QuadraticTerm::product(1.0, (Quadrature::Q, d), (Quadrature::Q, d))];
    for j in 1..d {
        terms.push(QuadraticTerm::product(1.0, (Quadrature::P, j + 1), (Quadrature::Q, j)));
    }
    ModelBuilder::new(d)
        .hamiltonian_terms(&terms)
        .expect("self-adjoint terms")
        .kraus(&[KrausComponent::unit(KrausKind::P, 1)])
        .expect("valid component")
        .build()
        .expect("valid model")
}

/// `d = 2`, `L = q_1`, `H = q_1 p_2`.
pub fn q1_with_q1p2() -> GaussianModel {
    ModelBuilder::new(2)
        .hamiltonian_terms(&[QuadraticTerm::product(1.0, (Quadrature::Q, 1), (Quadrature::P, 2))])
        .expect("self-adjoint terms")
        .kraus(&[KrausComponent::unit(KrausKind::Q, 1)])
        .expect("valid component")
        .build()
        .expect("valid model")
}

/// Two bosons in a common bath with `H = 0`: `L = sqrt(mu_-) psi_-·a` and
/// `L = sqrt(mu_+) psi_+·a^+`, plus `sqrt(lambda_-) phi_-·a` when
/// `lambda_- > 0`.
pub fn two_boson(psi_minus: [crate::Complex64; 2], psi_plus: [crate::Complex64; 2], mu_minus: f64, mu_plus: f64, lambda_minus: f64) -> GaussianModel {
    let mut b = ModelBuilder::new(2);
    // L = sum_k psi_k a_k means conj(v_k) = psi_k
    let sm = mu_minus.sqrt();
    b = b.kraus_row(CVector::from_fn(2, |k, _| psi_minus[k].conj() * sm), CVector::zeros(2));
    let sp = mu_plus.sqrt();
    b = b.kraus_row(CVector::zeros(2), CVector::from_fn(2, |k, _| psi_plus[k] * sp));
    if lambda_minus > 0.0 {
        // phi_- orthogonal to psi_-
        let phi = [-psi_minus[1].conj(), psi_minus[0].conj()];
        let sl = lambda_minus.sqrt();
        b = b.kraus_row(CVector::from_fn(2, |k, _| phi[k].conj() * sl), CVector::zeros(2));
    }
    b.build().expect("valid model")
}

fn psi_real() -> [crate::Complex64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [c(s, 0.0), c(s, 0.0)]
}

/// Rank-one commuting `gamma_+-` with a common real range vector.
pub fn two_boson_commuting() -> GaussianModel {
    two_boson(psi_real(), psi_real(), 1.0, 0.5, 0.0)
}

/// As [`two_boson_commuting`] with a relative phase 0.1 on the second
/// component of `psi_+`.
pub fn two_boson_phase_perturbed() -> GaussianModel {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [c(s, 0.0), c(s * 0.1f64.cos(), s * 0.1f64.sin())];
    two_boson(psi_real(), plus, 1.0, 0.5, 0.0)
}

/// As [`two_boson_commuting`] with a second eigenvalue `0.3` for `gamma_-`.
pub fn two_boson_rank_two() -> GaussianModel {
    two_boson(psi_real(), psi_real(), 1.0, 0.5, 0.3)
}

/// Every fixture with its expected `(d_c, d_r, d_f)`.
pub fn all() -> Vec<NamedFixture> {
    vec![
        NamedFixture { name: "lossy", model: lossy(), expected: (0, 1, 0) },
        NamedFixture { name: "damped-rotating", model: damped_rotating(), expected: (0, 1, 0) },
        NamedFixture { name: "q1", model: q1_noise(3), expected: (1, 0, 2) },
        NamedFixture { name: "q1-iq2", model: q1_iq2_noise(3), expected: (2, 0, 1) },
        NamedFixture { name: "a1", model: a1_noise(3), expected: (0, 1, 2) },
        NamedFixture { name: "a1dag", model: a1_dag_noise(3), expected: (0, 1, 2) },
        NamedFixture { name: "number-h-mixed", model: number_h_mixed_noise(), expected: (0, 2, 1) },
        NamedFixture { name: "chain-d2", model: saturating_chain(2), expected: (0, 2, 0) },
        NamedFixture { name: "chain-d3", model: saturating_chain(3), expected: (0, 3, 0) },
        NamedFixture { name: "q1-q1p2", model: q1_with_q1p2(), expected: (1, 0, 1) },
        NamedFixture { name: "two-boson-commuting", model: two_boson_commuting(), expected: (0, 1, 1) },
        NamedFixture { name: "two-boson-phase", model: two_boson_phase_perturbed(), expected: (0, 2, 0) },
        NamedFixture { name: "two-boson-rank-two", model: two_boson_rank_two(), expected: (0, 2, 0) },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfa::structure_report;
    use crate::model::validate;
    use crate::tolerances::Tolerances;

    #[test]
    fn fixtures_validate_and_match() {
        let tol = Tolerances::default();
        for f in all() {
            assert!(validate(&f.model, &tol).passed(), "{}", f.name);
            let dec = structure_report(&f.model, &tol).unwrap().decomposition;
            assert_eq!((dec.d_c, dec.d_r, dec.d_f), f.expected, "{}", f.name);
        }
    }
}
