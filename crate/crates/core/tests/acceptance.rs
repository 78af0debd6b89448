//! Acceptance suite. One line per criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gqms_core::fock::{assemble, multiplicativity_residual, verify_generator_on_ladder, verify_weyl_formula, Sector};
use gqms_core::random::{random_cvector, random_model, random_rvector};
use gqms_core::{
    build_c, build_z, commutator_span, commutator_span_full, crosscheck_complement, drift_matrix, embed,
    evolve_weyl, fixtures, intersect, kerc_z_invariant, m_space, orth_complement, real_span, reduce_kraus,
    structure_report, subspace_equal, support_defect, symplectic_complement, symplectic_form, CVector,
    Complex64, GaussianModel, RealSubspace, RealVectorRep, Tolerances,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn dims(model: &GaussianModel) -> (usize, usize, usize) {
    let d = structure_report(model, &tol()).expect("analysis succeeds").decomposition;
    (d.d_c, d.d_r, d.d_f)
}

fn c1_single_kraus() -> Outcome {
    let got = [
        dims(&fixtures::q1_noise(3)),
        dims(&fixtures::q1_iq2_noise(3)),
        dims(&fixtures::a1_noise(3)),
    ];
    let want = [(1, 0, 2), (2, 0, 1), (0, 1, 2)];
    ok(got == want, format!("got {got:?}"))
}

fn c2_number_h() -> Outcome {
    let r = structure_report(&fixtures::number_h_mixed_noise(), &tol()).unwrap();
    let dec = &r.decomposition;
    let got = (dec.d_c, dec.d_r, dec.d_f);
    ok(got == (0, 2, 1), format!("got {got:?}, algebra {}", r.algebra_description))
}

fn c3_sharpness() -> Outcome {
    let mut pass = true;
    let mut detail = vec![];
    for d in [2, 3] {
        let model = fixtures::saturating_chain(d);
        let full = m_space(&commutator_span_full(&model, &tol()));
        let fast = commutator_span(&model, &tol());
        let mprime = symplectic_complement(&full);
        pass &= full.dim() == 2 * d && mprime.is_zero() && fast.iterations_used == 2 * d - 1;
        detail.push(format!("d={d}: dim M {}, iterations {}", full.dim(), fast.iterations_used));
    }
    ok(pass, detail.join("; "))
}

fn c4_two_boson() -> Outcome {
    let commuting = dims(&fixtures::two_boson_commuting());
    let mprime_dim = |m: &GaussianModel| structure_report(m, &tol()).unwrap().decomposition.mprime.dim();
    let phase = mprime_dim(&fixtures::two_boson_phase_perturbed());
    let rank_two = mprime_dim(&fixtures::two_boson_rank_two());
    ok(
        commuting == (0, 1, 1) && phase == 0 && rank_two == 0,
        format!("commuting {commuting:?}, dim M' phase {phase}, rank-two {rank_two}"),
    )
}

fn random_suite(seed: u64, count: usize) -> Vec<GaussianModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_model(&mut rng, None)).collect()
}

fn c5_crosscheck() -> Outcome {
    let t = Tolerances {
        subspace: 1e-8,
        ..tol()
    };
    let models = random_suite(5, 200);
    let mut failures = 0;
    let mut nontrivial = 0;
    for m in &models {
        assert!((1..=4).contains(&m.d()) && (1..=2 * m.d()).contains(&m.m()));
        if !crosscheck_complement(m, &t).unwrap_or(false) {
            failures += 1;
        }
        if !kerc_z_invariant(m, &t).is_zero() {
            nontrivial += 1;
        }
    }
    ok(failures == 0, format!("{failures}/200 disagree; {nontrivial} with nonzero M'"))
}

fn c6_weyl_formula() -> Outcome {
    let cutoffs = [40];
    let sector = Sector::interior(&cutoffs);
    let mut worst: f64 = 0.0;
    let mut worst_damp: f64 = 0.0;
    for model in [fixtures::lossy(), fixtures::damped_rotating()] {
        let gen = assemble(&model, &cutoffs);
        for phase in [0.0, 0.25 * std::f64::consts::PI, 0.5 * std::f64::consts::PI] {
            let z = CVector::from_vec(vec![Complex64::from_polar(0.5, phase)]);
            for t in [0.1, 0.5, 1.0] {
                let r = verify_weyl_formula(&model, &gen, &z, t, &sector, &tol()).unwrap();
                worst = worst.max(r);
                let ev = evolve_weyl(&model, &z, t, &tol()).unwrap();
                let closed = z.norm_squared() * (1.0 - (-t).exp()) / 2.0;
                worst_damp = worst_damp.max((ev.damping - closed).abs());
            }
        }
    }
    ok(
        worst < 1e-4 && worst_damp < 1e-9,
        format!("max residual {worst:.2e}, max damping error {worst_damp:.2e}"),
    )
}

fn c7_membership() -> Outcome {
    let model = fixtures::q1_with_q1p2();
    let cutoffs = [20, 20];
    let gen = assemble(&model, &cutoffs);
    let sector = Sector::new(&cutoffs, 6);
    let t = 1.0;
    let e = |k: usize, v: Complex64| {
        let mut z = CVector::zeros(2);
        z[k] = v;
        z
    };
    let res = |z: &CVector| multiplicativity_residual(&gen, z, t, &sector, tol().ode).unwrap();
    let in1 = res(&e(0, Complex64::new(0.0, 1.0)));
    let in2 = res(&e(1, Complex64::new(1.0, 0.0)));
    let out = res(&e(0, Complex64::new(1.0, 0.0)));
    ok(
        in1 < 1e-4 && in2 < 1e-4 && out > 1e-2,
        format!("i e1 {in1:.2e}, e2 {in2:.2e}, e1 {out:.2e}"),
    )
}

fn c8_normal_form() -> Outcome {
    let mut worst_defect: f64 = 0.0;
    for m in random_suite(5, 200) {
        let b = structure_report(&m, &tol()).unwrap().bogoliubov.expect("normal form exists");
        worst_defect = worst_defect.max(b.symplectic_defect());
    }
    let mut worst_support: f64 = 0.0;
    for f in fixtures::all() {
        let r = structure_report(&f.model, &tol()).unwrap();
        let red = reduce_kraus(&f.model, r.bogoliubov.as_ref().unwrap()).unwrap();
        let dec = &r.decomposition;
        worst_support = worst_support.max(support_defect(&red, dec.d_r + dec.d_c));
    }
    ok(
        worst_defect < 1e-10 && worst_support < 1e-9,
        format!("max |B^T J B - J| {worst_defect:.2e}, max support leak {worst_support:.2e}"),
    )
}

fn c9_ladder() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let d = rng.random_range(1..=2);
        let m = random_model(&mut rng, Some(d));
        worst = worst.max(verify_generator_on_ladder(&m, &vec![15; d], 100 + i));
    }
    ok(worst < 1e-9, format!("max interior residual {worst:.2e}"))
}

fn random_subspace(rng: &mut ChaCha8Rng, n: usize) -> (Vec<RealVectorRep>, RealSubspace) {
    let k = rng.random_range(0..=2 * n);
    let vs: Vec<RealVectorRep> = (0..k).map(|_| RealVectorRep::from_data(random_rvector(rng, 2 * n)).unwrap()).collect();
    let s = real_span(n, &vs, tol().rank).unwrap();
    (vs, s)
}

/// Returns a description of the first violated property, if any.
fn property_instance(rng: &mut ChaCha8Rng) -> Option<String> {
    let t = tol();
    let n = rng.random_range(1..=4);

    let (mut vs, s) = random_subspace(rng, n);
    let sp = symplectic_complement(&s);
    if !subspace_equal(&symplectic_complement(&sp), &s, t.subspace) {
        return Some("double symplectic complement".into());
    }
    if s.dim() + sp.dim() != 2 * n {
        return Some("dim S + dim S' != 2n".into());
    }
    if !intersect(&s, &orth_complement(&s)).is_zero() {
        return Some("S meets its orthogonal complement".into());
    }
    vs.reverse();
    if !subspace_equal(&real_span(n, &vs, t.rank).unwrap(), &s, t.subspace) {
        return Some("real_span depends on ordering".into());
    }
    let (z, w) = (random_cvector(rng, n), random_cvector(rng, n));
    if (symplectic_form(&z, &w) + symplectic_form(&w, &z)).abs() > 1e-12 {
        return Some("symplectic form not antisymmetric".into());
    }

    let model = random_model(rng, None);
    let d = model.d();
    let r = match structure_report(&model, &t) {
        Ok(r) => r,
        Err(e) => return Some(format!("analysis failed: {e}")),
    };
    let dec = &r.decomposition;
    if dec.d_c + dec.d_r + dec.d_f != d {
        return Some("d_c + d_r + d_f != d".into());
    }
    if dec.m.dim() + dec.mprime.dim() != 2 * d {
        return Some("dim M + dim M' != 2d".into());
    }
    if dec.m.dim() != dec.d_c + 2 * dec.d_r || dec.mprime.dim() != dec.d_c + 2 * dec.d_f {
        return Some("decomposition parity".into());
    }
    if r.bogoliubov.as_ref().is_none_or(|b| b.symplectic_defect() >= 1e-10) {
        return Some("Bogoliubov defect".into());
    }

    let k = kerc_z_invariant(&model, &t);
    let (zm, cm) = (build_z(&model), build_c(&model));
    for kv in k.vectors() {
        if cm.apply(&kv).norm() > 1e-9 * (1.0 + cm.matrix().norm()) {
            return Some("C k != 0 on ker C".into());
        }
        if k.distance(embed(&zm.apply(&kv)).data()) > 1e-9 * (1.0 + zm.matrix().norm()) {
            return Some("Z k outside K".into());
        }
    }

    let z = random_cvector(rng, d);
    let s1: f64 = rng.random_range(0.0..1.0);
    let t1: f64 = rng.random_range(0.0..1.0);
    let evolved = evolve_weyl(&model, &z, t1, &t)
        .and_then(|a| Ok((evolve_weyl(&model, &a.z_out(), s1, &t)?, evolve_weyl(&model, &z, s1 + t1, &t)?, a)));
    let (b, ab, a) = match evolved {
        Ok(x) => x,
        Err(e) => return Some(format!("evolution failed: {e}")),
    };
    let direct = &drift_matrix(&model, s1 + t1) * embed(&z).data();
    let composed = &drift_matrix(&model, s1) * (&drift_matrix(&model, t1) * embed(&z).data());
    if (direct - composed).amax() > 1e-10 {
        return Some("drift semigroup law".into());
    }
    if (ab.damping - a.damping - b.damping).abs() > 1e-9 {
        return Some(format!("damping cocycle off by {:.2e}", ab.damping - a.damping - b.damping));
    }
    let floor = -1e-12 * (1.0 + z.norm_squared());
    if a.min_integrand < floor || ab.min_integrand < floor || ab.damping < a.damping - 1e-12 {
        return Some("damping not monotone".into());
    }
    None
}

fn c10_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = vec![];
    for i in 0..500 {
        if let Some(why) = property_instance(&mut rng) {
            failures.push(format!("#{i}: {why}"));
        }
    }
    let shown: Vec<_> = failures.iter().take(3).cloned().collect();
    ok(failures.is_empty(), format!("{}/500 instances fail {}", failures.len(), shown.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("single Kraus classification, d = 3", Duration::from_secs(1), c1_single_kraus),
        ("H = N, v = e1, u = e2 gives (0, 2, 1)", Duration::from_secs(1), c2_number_h),
        ("commutator bound 2d-1 attained, d = 2, 3", Duration::from_secs(1), c3_sharpness),
        ("two-boson dichotomy", Duration::from_secs(1), c4_two_boson),
        ("ker C characterization on 200 random models", Duration::from_secs(30), c5_crosscheck),
        ("Weyl formula vs truncated Fock evolution", Duration::from_secs(120), c6_weyl_formula),
        ("multiplicativity discriminates M'", Duration::from_secs(180), c7_membership),
        ("symplectic normal form", Duration::from_secs(10), c8_normal_form),
        ("generator identities on ladder operators", Duration::from_secs(60), c9_ladder),
        ("property suite, 500 instances", Duration::from_secs(60), c10_properties),
    ];
    let mut all = true;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed < *limit;
        all &= pass;
        println!(
            "criterion {:>2} {}: {name} ({:.2} s, limit {} s) {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
