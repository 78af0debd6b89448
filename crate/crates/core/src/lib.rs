//! Structure of the decoherence-free subalgebra of Gaussian quantum Markov
//! semigroups on the bosonic Fock space over `C^d`.
//!
//! A semigroup is given by finite matrix data `(Omega, kappa, zeta, V, U)`
//! ([`GaussianModel`]). From it the crate computes the real subspace `M`
//! spanned by iterated commutators of the Kraus operators with the
//! Hamiltonian, its symplectic complement `M'` (the Weyl generators of the
//! decoherence-free subalgebra) and the invariants `(d_c, d_r, d_f)`; a
//! Bogoliubov normal form; and the explicit evolution of Weyl operators.
//! The [`fock`] module is an independent brute-force check on a truncated
//! Fock basis.

pub mod dfa;
pub mod error;
pub mod fixtures;
pub mod fock;
pub mod model;
pub mod quadrature;
pub mod random;
pub mod real_linear;
pub mod symplectic;
pub mod tolerances;
pub mod weyl;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub use dfa::{
    algebra_description, build_bbh, classify_single_kraus, commutator_span, commutator_span_full, decompose, m_space,
    seeds, structure_report, CommutatorSpan, Decomposition, KrausClass, StructureReport,
};
pub use error::{Error, Result};
pub use model::{
    check_minimality, expand_quadratures, hamiltonian_from_quadratures, kraus_row_from_quadrature,
    validate, GaussianModel, KrausComponent, KrausKind, ModelBuilder, ModelFile, Quadrature,
    QuadraticTerm, QuadratureExpansion, ValidationFailure, ValidationReport,
};
pub use real_linear::{
    embed, embed_inv, intersect, orth_complement, principal_angle_sines, real_span, real_unit,
    subspace_equal, subspace_sum, symplectic_complement, symplectic_form, unembed, RealLinearMap, RealSubspace, RealVectorRep,
};
pub use symplectic::{
    bogoliubov_matrix, coefficient_map, reduce_kraus, support_defect, symplectic_gram_schmidt, BogoliubovMap, SubspaceKind,
    SymplecticBasis,
};
pub use tolerances::Tolerances;
pub use weyl::{
    build_c, build_z, crosscheck_complement, drift_matrix, evolve_weyl, evolve_weyl_grid,
    kerc_z_invariant, WeylEvolution,
};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
