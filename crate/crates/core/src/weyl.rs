//! Explicit evolution of Weyl operators: `T_t(W(z))` is
//! `exp(-damping + i phase) W(e^{tZ} z)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dfa::{commutator_span, decompose, m_space};
use crate::error::{Error, Result};
use crate::model::GaussianModel;
use crate::quadrature::{integrate, QuadOptions};
use crate::real_linear::{
    embed, embed_inv, null_space, null_space_abs, orthonormal_columns, subspace_equal, RealLinearMap,
    RealSubspace,
};
use crate::tolerances::Tolerances;
use crate::{c, CMatrix, CVector, RMatrix, RVector};

/// `z -> [conj(U^*U - V^*V)/2 + i Omega] z + [(U^T V - V^T U)/2 + i kappa] conj(z)`.
pub fn build_z(model: &GaussianModel) -> RealLinearMap {
    let (v, u) = (model.v(), model.u());
    let half = c(0.5, 0.0);
    let a = (u.adjoint() * u - v.adjoint() * v).map(|x| x.conj()) * half + model.omega() * crate::I;
    let b = (u.transpose() * v - v.transpose() * u) * half + model.kappa() * crate::I;
    RealLinearMap::from_complex_parts(&a, &b)
}

/// `z -> conj(U^*U + V^*V) z + (U^T V + V^T U) conj(z)`.
pub fn build_c(model: &GaussianModel) -> RealLinearMap {
    let (v, u) = (model.v(), model.u());
    let a: CMatrix = (u.adjoint() * u + v.adjoint() * v).map(|x| x.conj());
    let b: CMatrix = u.transpose() * v + v.transpose() * u;
    RealLinearMap::from_complex_parts(&a, &b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylEvolution {
    pub t: f64,
    pub z_in: Vec<[f64; 2]>,
    pub z_out: Vec<[f64; 2]>,
    /// `1/2 ∫_0^t Re<e^{sZ}z, C e^{sZ}z> ds`.
    pub damping: f64,
    /// `∫_0^t Re<zeta, e^{sZ}z> ds`.
    pub phase: f64,
    /// Smallest sampled value of the damping integrand.
    pub min_integrand: f64,
}

impl WeylEvolution {
    pub fn z_out(&self) -> CVector {
        CVector::from_iterator(self.z_out.len(), self.z_out.iter().map(|p| c(p[0], p[1])))
    }

    pub fn z_in(&self) -> CVector {
        CVector::from_iterator(self.z_in.len(), self.z_in.iter().map(|p| c(p[0], p[1])))
    }
}

fn pairs(z: &CVector) -> Vec<[f64; 2]> {
    z.iter().map(|x| [x.re, x.im]).collect()
}

/// Drift, damping and phase of `T_t(W(z))`.
pub fn evolve_weyl(model: &GaussianModel, z: &CVector, t: f64, tol: &Tolerances) -> Result<WeylEvolution> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Dimension(format!("time must be finite and nonnegative, got {t}")));
    }
    if z.len() != model.d() {
        return Err(Error::Dimension(format!("z has length {}, expected {}", z.len(), model.d())));
    }
    let zm = build_z(model).matrix().clone();
    let cm = build_c(model).matrix().clone();
    let x0 = embed(z).into_data();
    let zeta = embed(model.zeta()).into_data();
    let mut min_integrand = f64::INFINITY;
    let opts = QuadOptions {
        tol: tol.quadrature,
        ..QuadOptions::default()
    };
    let res = integrate(
        |s| {
            let xs: RVector = (&zm * s).exp() * &x0;
            let damp = 0.5 * xs.dot(&(&cm * &xs));
            min_integrand = min_integrand.min(damp);
            vec![damp, zeta.dot(&xs)]
        },
        0.0,
        t,
        2,
        &opts,
    )?;
    let out = (&zm * t).exp() * &x0;
    Ok(WeylEvolution {
        t,
        z_in: pairs(z),
        z_out: pairs(&embed_inv(&out)),
        damping: res.value[0],
        phase: res.value[1],
        min_integrand: if t == 0.0 { 0.0 } else { min_integrand },
    })
}

/// [`evolve_weyl`] over every `(z, t)` pair, z-major. Runs in parallel; the
/// output order is deterministic.
pub fn evolve_weyl_grid(model: &GaussianModel, zs: &[CVector], ts: &[f64], tol: &Tolerances) -> Result<Vec<WeylEvolution>> {
    let pairs: Vec<(&CVector, f64)> = zs.iter().flat_map(|z| ts.iter().map(move |&t| (z, t))).collect();
    pairs.par_iter().map(|(z, t)| evolve_weyl(model, z, *t, tol)).collect()
}

/// Largest `Z`-invariant subspace of `ker C`.
pub fn kerc_z_invariant(model: &GaussianModel, tol: &Tolerances) -> RealSubspace {
    let d = model.d();
    let zm = build_z(model).matrix().clone();
    let cm = build_c(model).matrix().clone();
    let mut k = null_space(&cm, tol.rank);
    let zscale = zm.norm().max(cm.norm()).max(f64::MIN_POSITIVE);
    for _ in 0..=2 * d {
        if k.ncols() == 0 {
            break;
        }
        // K ∩ Z^{-1} K: coefficients x with (I - P_K) Z K x = 0
        let zk = &zm * &k;
        let resid = &zk - &k * (k.transpose() * &zk);
        let coeffs = null_space_abs(&resid, tol.rank * zscale);
        if coeffs.ncols() == k.ncols() {
            break;
        }
        let (next, _) = orthonormal_columns(&(&k * coeffs), 1e-12);
        k = next;
    }
    RealSubspace::from_orthonormal(k, tol.rank).expect("orthonormal by construction")
}

/// Compares the `ker C` characterization of `M'` with the symplectic
/// complement of the commutator span.
pub fn crosscheck_complement(model: &GaussianModel, tol: &Tolerances) -> Result<bool> {
    let k = kerc_z_invariant(model, tol);
    let dec = decompose(&m_space(&commutator_span(model, tol)), tol)?;
    Ok(subspace_equal(&k, &dec.mprime, tol.subspace))
}

/// `e^{tZ}` as a real matrix.
pub fn drift_matrix(model: &GaussianModel, t: f64) -> RMatrix {
    (build_z(model).matrix() * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfa::structure_report;
    use crate::fixtures;
    use crate::random;
    use crate::real_linear::real_unit;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn z_c_examples() {
        let lossy = fixtures::lossy();
        assert!((build_z(&lossy).matrix() + RMatrix::identity(2, 2) * 0.5).camax() < 1e-15);
        assert!((build_c(&lossy).matrix() - RMatrix::identity(2, 2)).camax() < 1e-15);

        let gain = lossy.with_kraus(CMatrix::zeros(1, 1), CMatrix::from_element(1, 1, c(1.0, 0.0))).unwrap();
        assert!((build_z(&gain).matrix() - RMatrix::identity(2, 2) * 0.5).camax() < 1e-15);
        assert!((build_c(&gain).matrix() - RMatrix::identity(2, 2)).camax() < 1e-15);

        // the i Omega part is a rotation
        let rot = fixtures::damped_rotating();
        let z = build_z(&rot).matrix().clone();
        let expected = RMatrix::from_row_slice(2, 2, &[-0.5, -1.0, 1.0, -0.5]);
        assert!((z - expected).camax() < 1e-15);
    }

    #[test]
    fn lossy_closed_form() {
        let m = fixtures::lossy();
        let z = CVector::from_vec(vec![c(0.3, -0.4)]);
        for t in [0.1, 0.5, 1.0, 3.0] {
            let ev = evolve_weyl(&m, &z, t, &tol()).unwrap();
            let decay = (-t / 2.0f64).exp();
            assert!((ev.z_out() - &z * c(decay, 0.0)).camax() < 1e-13);
            let expected = 0.25 * (1.0 - (-t).exp()) / 2.0;
            assert!((ev.damping - expected).abs() < 1e-12);
            assert_eq!(ev.phase, 0.0);
        }
        let ev = evolve_weyl(&m, &z, 0.0, &tol()).unwrap();
        assert_eq!(ev.z_out(), z);
        assert_eq!((ev.damping, ev.phase), (0.0, 0.0));
        assert!(evolve_weyl(&m, &z, -1.0, &tol()).is_err());
    }

    /// With `H = omega N + zeta-drive` and no noise on `z`, the phase matches
    /// the direct integral of `Re<zeta, e^{sZ} z>` for a pure rotation.
    #[test]
    fn phase_of_driven_rotation() {
        let m = crate::model::ModelBuilder::new(2)
            .omega(CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]))
            .zeta(CVector::from_vec(vec![c(0.4, 0.2), c(0.0, 0.0)]))
            .kraus(&[crate::model::KrausComponent::unit(crate::model::KrausKind::A, 2)])
            .unwrap()
            .build()
            .unwrap();
        let z = CVector::from_vec(vec![c(0.5, 0.1), c(0.0, 0.0)]);
        let t = 1.3;
        let ev = evolve_weyl(&m, &z, t, &tol()).unwrap();
        assert!(ev.damping.abs() < 1e-15);
        // e^{sZ} z = e^{i 0.7 s} z on the first mode
        let zeta = c(0.4, 0.2);
        let w = 0.7;
        let antideriv = |s: f64| ((zeta.conj() * z[0]) * c(0.0, -1.0 / w) * c((w * s).cos(), (w * s).sin())).re;
        let expected = antideriv(t) - antideriv(0.0);
        assert!((ev.phase - expected).abs() < 1e-12);
    }

    #[test]
    fn no_damping_inside_mprime() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for model in [fixtures::q1_with_q1p2(), fixtures::q1_noise(3), fixtures::number_h_mixed_noise(), fixtures::two_boson_commuting()] {
            let dec = structure_report(&model, &tol()).unwrap().decomposition;
            for _ in 0..3 {
                let coeffs = random::random_rvector(&mut rng, dec.mprime.dim());
                let z = embed_inv(&(dec.mprime.basis() * coeffs));
                for t in [0.1, 1.0, 10.0] {
                    let ev = evolve_weyl(&model, &z, t, &tol()).unwrap();
                    assert!(ev.damping.abs() < 1e-10, "damping {}", ev.damping);
                }
            }
        }
    }

    #[test]
    fn grid_matches_pointwise() {
        let m = fixtures::damped_rotating();
        let zs = vec![CVector::from_vec(vec![c(0.5, 0.0)]), CVector::from_vec(vec![c(0.0, -0.2)])];
        let ts = [0.0, 0.3, 1.0];
        let grid = evolve_weyl_grid(&m, &zs, &ts, &tol()).unwrap();
        assert_eq!(grid.len(), 6);
        for (i, ev) in grid.iter().enumerate() {
            assert_eq!(*ev, evolve_weyl(&m, &zs[i / 3], ts[i % 3], &tol()).unwrap());
        }
    }

    #[test]
    fn kerc_examples() {
        assert!(kerc_z_invariant(&fixtures::lossy(), &tol()).is_zero());

        let k = kerc_z_invariant(&fixtures::q1_with_q1p2(), &tol());
        let expected = RealSubspace::span_of(2, &[real_unit(2, 1), real_unit(2, 2), real_unit(2, 3)], 1e-9);
        assert!(subspace_equal(&k, &expected, 1e-10));

        let k = kerc_z_invariant(&fixtures::q1_noise(2), &tol());
        assert!(subspace_equal(&k, &expected, 1e-10));
    }

    #[test]
    fn crosscheck_fixtures() {
        for m in fixtures::all() {
            assert!(crosscheck_complement(&m.model, &tol()).unwrap(), "{}", m.name);
        }
        // repeated Kraus row: not minimal, still consistent
        let m = fixtures::a1_noise(2);
        let v = CMatrix::from_fn(2, 2, |_, k| m.v()[(0, k)]);
        let u = CMatrix::zeros(2, 2);
        let nonmin = m.with_kraus(v, u).unwrap();
        assert!(!crate::model::check_minimality(&nonmin, &tol()));
        assert!(crosscheck_complement(&nonmin, &tol()).unwrap());
    }

    #[test]
    fn crosscheck_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = random::random_model(&mut rng, None);
            assert!(crosscheck_complement(&m, &tol()).unwrap(), "{m:?}");
        }
    }

    #[test]
    fn kerc_output_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let m = random::random_model(&mut rng, None);
            let k = kerc_z_invariant(&m, &tol());
            let zm = build_z(&m).matrix().clone();
            let cm = build_c(&m).matrix().clone();
            let scale = zm.norm().max(cm.norm()).max(1.0);
            for col in k.basis().column_iter() {
                assert!((&cm * col).norm() < 1e-9 * scale);
                assert!(k.distance(&(&zm * col)) < 1e-9 * scale);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn semigroup_and_cocycle(seed in any::<u64>(), s in 0.0f64..1.5, t in 0.0f64..1.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random::random_model(&mut rng, Some(2));
            let z = random::random_cvector(&mut rng, 2);
            let a = evolve_weyl(&m, &z, t, &tol()).unwrap();
            let b = evolve_weyl(&m, &a.z_out(), s, &tol()).unwrap();
            let ab = evolve_weyl(&m, &z, s + t, &tol()).unwrap();
            let scale = 1.0 + ab.z_out().norm();
            prop_assert!((ab.z_out() - b.z_out()).camax() < 1e-10 * scale);
            let dscale = 1.0 + ab.damping.abs();
            prop_assert!((ab.damping - a.damping - b.damping).abs() < 1e-9 * dscale);
            prop_assert!(a.min_integrand >= -1e-12 * (1.0 + z.norm_squared()));
        }
    }
}
