use gqms_core::fixtures;
use gqms_core::fock::{assemble, multiplicativity_residual, verify_weyl_formula, Sector};
use gqms_core::{CVector, Complex64, Tolerances};

fn e(d: usize, k: usize, v: Complex64) -> CVector {
    let mut z = CVector::zeros(d);
    z[k] = v;
    z
}

#[test]
fn q1_noise_separates_membership() {
    let model = fixtures::q1_noise(2);
    let cutoffs = [16, 16];
    let gen = assemble(&model, &cutoffs);
    let sector = Sector::new(&cutoffs, 5);
    let res = |z: CVector| multiplicativity_residual(&gen, &z, 0.5, &sector, 1e-9).unwrap();
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    assert!(res(e(2, 1, one)) < 1e-5);
    assert!(res(e(2, 1, i)) < 1e-5);
    assert!(res(e(2, 0, i)) < 1e-5);
    assert!(res(e(2, 0, one)) > 1e-2);
}

#[test]
fn weyl_residual_shrinks_with_cutoff() {
    let model = fixtures::damped_rotating();
    let tol = Tolerances::default();
    let z = CVector::from_vec(vec![Complex64::new(0.6, 0.3)]);
    let residuals: Vec<f64> = [10, 20, 30]
        .iter()
        .map(|&n| verify_weyl_formula(&model, &assemble(&model, &[n]), &z, 0.5, &Sector::new(&[n], 3), &tol).unwrap())
        .collect();
    assert!(residuals[0] >= residuals[1] && residuals[1] >= residuals[2], "{residuals:?}");
    assert!(residuals[2] < 1e-6, "{residuals:?}");
}
