//! Iterated commutators, the subspace `M` and the `(d_c, d_r, d_f)`
//! decomposition of the decoherence-free subalgebra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_minimality, GaussianModel};
use crate::real_linear::{
    checked_svd, complement_within, embed, embed_inv, intersect, orthonormal_columns, symplectic_complement,
    RealSubspace,
};
use crate::symplectic::{bogoliubov_matrix, BogoliubovMap};
use crate::tolerances::Tolerances;
use crate::{CMatrix, CVector, Complex64, RMatrix, RVector, I};

/// `[[-Omega^T, conj(kappa)], [-kappa, Omega]]`: the action of `[H, .]` on the
/// coefficients `[alpha; beta]` of `sum alpha_k a_k + beta_k a_k^+`.
pub fn build_bbh(model: &GaussianModel) -> CMatrix {
    let d = model.d();
    let mut h = CMatrix::zeros(2 * d, 2 * d);
    h.view_mut((0, 0), (d, d)).copy_from(&(-model.omega().transpose()));
    h.view_mut((0, d), (d, d)).copy_from(&model.kappa().map(|x| x.conj()));
    h.view_mut((d, 0), (d, d)).copy_from(&(-model.kappa()));
    h.view_mut((d, d), (d, d)).copy_from(model.omega());
    h
}

/// The seeds `[conj(v_l); u_l]` and `[conj(u_l); v_l]` for every Kraus row.
pub fn seeds(model: &GaussianModel) -> Vec<CVector> {
    let d = model.d();
    let mut out = Vec::with_capacity(2 * model.m());
    for l in 0..model.m() {
        let v = model.v_row(l);
        let u = model.u_row(l);
        out.push(CVector::from_fn(2 * d, |k, _| if k < d { v[k].conj() } else { u[k - d] }));
        out.push(CVector::from_fn(2 * d, |k, _| if k < d { u[k].conj() } else { v[k - d] }));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorSpan {
    /// `Hn^k s` for every seed `s` and `k <= iterations_used`, where `Hn` is
    /// the commutator matrix divided by its largest entry (spans are scale-free).
    pub generators: Vec<CVector>,
    /// Real span inside `C^{2d}`.
    pub span: RealSubspace,
    /// Largest power of the commutator matrix that still enlarged the span.
    pub iterations_used: usize,
}

impl CommutatorSpan {
    pub fn d(&self) -> usize {
        self.span.n() / 2
    }
}

fn normalized_bbh(model: &GaussianModel) -> CMatrix {
    let h = build_bbh(model);
    let scale = h.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        h / Complex64::new(scale, 0.0)
    } else {
        h
    }
}

fn real_cols(vs: &[CVector]) -> RMatrix {
    let cols: Vec<RVector> = vs.iter().map(|v| embed(v).into_data()).collect();
    RMatrix::from_columns(&cols)
}

/// Krylov-style growth of `span{H^n s}`: each sweep only applies the
/// commutator matrix to the directions added by the previous sweep.
pub fn commutator_span(model: &GaussianModel, tol: &Tolerances) -> CommutatorSpan {
    let d = model.d();
    let n = 2 * d;
    let h = normalized_bbh(model);
    let seeds = seeds(model);
    let (basis, _) = orthonormal_columns(&real_cols(&seeds), tol.rank);
    let mut basis = basis;
    let mut frontier = basis.clone();
    let mut iterations_used = 0;

    for sweep in 1..n {
        if frontier.ncols() == 0 {
            break;
        }
        let images: Vec<CVector> = frontier
            .column_iter()
            .map(|c| &h * embed_inv(&c.into_owned()))
            .collect();
        let img = real_cols(&images);
        // candidates orthogonal to the current span
        let resid = &img - &basis * (basis.transpose() * &img);
        // rank relative to the unit-norm inputs, not to the residual itself
        let (u, sv, _) = checked_svd(&resid);
        let new: Vec<RVector> = (0..sv.len())
            .filter(|&i| sv[i] > tol.rank)
            .map(|i| u.column(i).into_owned())
            .collect();
        if new.is_empty() {
            frontier = RMatrix::zeros(2 * n, 0);
            continue;
        }
        let new = RMatrix::from_columns(&new);
        // re-orthogonalize against the old basis once more
        let new = &new - &basis * (basis.transpose() * &new);
        let (new, _) = orthonormal_columns(&new, 1e-12);
        let mut cols: Vec<RVector> = basis.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(new.column_iter().map(|c| c.into_owned()));
        basis = RMatrix::from_columns(&cols);
        frontier = new;
        iterations_used = sweep;
    }

    let mut generators = Vec::new();
    for s in &seeds {
        let mut g = s.clone();
        generators.push(g.clone());
        for _ in 0..iterations_used {
            g = &h * g;
            generators.push(g.clone());
        }
    }
    let span = RealSubspace::from_orthonormal(basis, tol.rank).expect("orthonormal by construction");
    CommutatorSpan {
        generators,
        span,
        iterations_used,
    }
}

/// Reference path: span of all `H^n s`, `0 <= n <= 2d-1`, in one SVD.
pub fn commutator_span_full(model: &GaussianModel, tol: &Tolerances) -> CommutatorSpan {
    let d = model.d();
    let h = normalized_bbh(model);
    let mut generators = Vec::new();
    for s in seeds(model) {
        let mut g = s;
        for _ in 0..2 * d {
            generators.push(g.clone());
            g = &h * g;
        }
    }
    let (q, _) = orthonormal_columns(&real_cols(&generators), tol.rank);
    CommutatorSpan {
        generators,
        span: RealSubspace::from_orthonormal(q, tol.rank).expect("orthonormal by construction"),
        iterations_used: 2 * d - 1,
    }
}

/// `M = span_R { i(v+u), v-u }` over the elements `[conj(v); u]` of the span.
pub fn m_space(span: &CommutatorSpan) -> RealSubspace {
    let d = span.d();
    let mut vecs = Vec::with_capacity(2 * span.span.dim());
    for g in span.span.vectors() {
        let v = CVector::from_fn(d, |k, _| g[k].conj());
        let u = CVector::from_fn(d, |k, _| g[d + k]);
        vecs.push((&v + &u) * I);
        vecs.push(v - u);
    }
    if vecs.is_empty() {
        return RealSubspace::zero(d, span.span.tol());
    }
    let (q, _) = orthonormal_columns(&real_cols(&vecs), span.span.tol());
    RealSubspace::from_orthonormal(q, span.span.tol()).expect("orthonormal by construction")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: RealSubspace,
    #[serde(rename = "Mprime")]
    pub mprime: RealSubspace,
    #[serde(rename = "Mc")]
    pub mc: RealSubspace,
    #[serde(rename = "Mr")]
    pub mr: RealSubspace,
    #[serde(rename = "Mf")]
    pub mf: RealSubspace,
    pub d_c: usize,
    pub d_r: usize,
    pub d_f: usize,
}

impl Decomposition {
    /// Rendering of the algebra, e.g. `L∞(ℝ) ⊗̄ B(Γ(ℂ^2))`.
    pub fn algebra_description(&self) -> String {
        algebra_description(self.d_c, self.d_f)
    }
}

pub fn algebra_description(d_c: usize, d_f: usize) -> String {
    fn pow(base: &str, k: usize) -> String {
        if k == 1 {
            base.to_string()
        } else {
            format!("{base}^{k}")
        }
    }
    match (d_c, d_f) {
        (0, 0) => "ℂ1".to_string(),
        (c, 0) => format!("L∞({})", pow("ℝ", c)),
        (0, f) => format!("B(Γ({}))", pow("ℂ", f)),
        (c, f) => format!("L∞({}) ⊗̄ B(Γ({}))", pow("ℝ", c), pow("ℂ", f)),
    }
}

/// Splits `M` and its symplectic complement along `Mc = M ∩ M'`.
pub fn decompose(m: &RealSubspace, tol: &Tolerances) -> Result<Decomposition> {
    let d = m.n();
    let m = m.clone().with_tol(tol.rank);
    let mprime = symplectic_complement(&m).with_tol(tol.rank);
    let mc = intersect(&m, &mprime);
    let d_c = mc.dim();
    let mr = complement_within(&m, &mc);
    let mf = complement_within(&mprime, &mc);
    if d_c > m.dim() || !(m.dim() - d_c).is_multiple_of(2) {
        return Err(Error::ParityViolation {
            space: "M",
            dim: m.dim(),
            d_c,
        });
    }
    if d_c > mprime.dim() || !(mprime.dim() - d_c).is_multiple_of(2) {
        return Err(Error::ParityViolation {
            space: "M'",
            dim: mprime.dim(),
            d_c,
        });
    }
    Ok(Decomposition {
        d,
        d_r: (m.dim() - d_c) / 2,
        d_f: (mprime.dim() - d_c) / 2,
        d_c,
        m,
        mprime,
        mc,
        mr,
        mf,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub model: GaussianModel,
    pub minimal: bool,
    pub span_dim: usize,
    pub iterations_used: usize,
    pub decomposition: Decomposition,
    pub algebra_description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bogoliubov: Option<BogoliubovMap>,
}

/// Commutator span, `M`, decomposition and (when it can be built) the
/// Bogoliubov normal form.
pub fn structure_report(model: &GaussianModel, tol: &Tolerances) -> Result<StructureReport> {
    let span = commutator_span(model, tol);
    let m = m_space(&span);
    let dec = decompose(&m, tol)?;
    let bogoliubov = Some(bogoliubov_matrix(&dec, tol)?);
    Ok(StructureReport {
        model: model.clone(),
        minimal: check_minimality(model, tol),
        span_dim: span.span.dim(),
        iterations_used: span.iterations_used,
        algebra_description: dec.algebra_description(),
        decomposition: dec,
        bogoliubov,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KrausClass {
    /// `L` is self-adjoint up to a global phase: `(d_c, d_r) = (1, 0)`.
    SelfAdjoint,
    /// `[L, L^*] = 0` but not a phase times a self-adjoint: `(2, 0)`.
    NormalNotSelfAdjoint,
    /// `||v|| != ||u||`: `(0, 1)`.
    NonNormal,
}

impl KrausClass {
    pub fn case_number(self) -> usize {
        match self {
            KrausClass::SelfAdjoint => 1,
            KrausClass::NormalNotSelfAdjoint => 2,
            KrausClass::NonNormal => 3,
        }
    }

    /// `(d_c, d_r)` of the case.
    pub fn dims(self) -> (usize, usize) {
        match self {
            KrausClass::SelfAdjoint => (1, 0),
            KrausClass::NormalNotSelfAdjoint => (2, 0),
            KrausClass::NonNormal => (0, 1),
        }
    }

    pub fn label(self) -> String {
        let ord = ["1st", "2nd", "3rd"][self.case_number() - 1];
        format!("{self:?} ({ord} case)")
    }
}

/// Classification of a single Kraus operator with vanishing Hamiltonian.
pub fn classify_single_kraus(model: &GaussianModel, tol: &Tolerances) -> Result<KrausClass> {
    if model.m() != 1 {
        return Err(Error::Unsupported(format!(
            "classification needs exactly one Kraus operator, got {}",
            model.m()
        )));
    }
    let v = model.v_row(0);
    let u = model.u_row(0);
    let scale = v.camax().max(u.camax()).max(f64::MIN_POSITIVE);
    let h_size = model
        .omega()
        .camax()
        .max(model.kappa().camax())
        .max(model.zeta().camax());
    if h_size > tol.sym * scale {
        return Err(Error::Unsupported("classification needs H = 0".into()));
    }
    let (nv, nu) = (v.norm(), u.norm());
    if (nv * nv - nu * nu).abs() > tol.sym * scale * scale * 10.0 {
        return Ok(KrausClass::NonNormal);
    }
    // u = lambda v with |lambda| = 1 makes L a phase times a self-adjoint operator
    let overlap = v.dotc(&u);
    if (overlap.norm() - nv * nu).abs() <= tol.sym * scale * scale * 10.0 {
        Ok(KrausClass::SelfAdjoint)
    } else {
        Ok(KrausClass::NormalNotSelfAdjoint)
    }
}
