//! The matrix data `(Omega, kappa, zeta, V, U)` of a Gaussian QMS.
//!
//! The Hamiltonian is
//! `H = sum Omega_jk a_j^+ a_k + kappa_jk/2 a_j^+ a_k^+ + conj(kappa_jk)/2 a_j a_k
//!      + sum zeta_j/2 a_j^+ + conj(zeta_j)/2 a_j`
//! and the Kraus operators are `L_l = sum conj(v_lk) a_k + u_lk a_k^+`, with
//! `v_l` and `u_l` the rows of `V` and `U`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;
use crate::{c, CMatrix, CVector, Complex64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelFile", try_from = "ModelFile")]
pub struct GaussianModel {
    omega: CMatrix,
    kappa: CMatrix,
    zeta: CVector,
    v: CMatrix,
    u: CMatrix,
}

impl GaussianModel {
    /// Checks shapes only; the semantic invariants are reported by [`validate`].
    pub fn new(omega: CMatrix, kappa: CMatrix, zeta: CVector, v: CMatrix, u: CMatrix) -> Result<Self> {
        let d = omega.nrows();
        if d == 0 {
            return Err(Error::Dimension("d must be positive".into()));
        }
        if omega.ncols() != d || kappa.shape() != (d, d) || zeta.len() != d {
            return Err(Error::Dimension(format!(
                "Hamiltonian data must be {d}x{d}, {d}x{d} and length {d}"
            )));
        }
        if v.ncols() != d || u.ncols() != d || v.nrows() != u.nrows() {
            return Err(Error::Dimension(format!(
                "V and U must both be m x {d}, got {:?} and {:?}",
                v.shape(),
                u.shape()
            )));
        }
        if v.nrows() == 0 {
            return Err(Error::Dimension("at least one Kraus operator is required".into()));
        }
        Ok(GaussianModel {
            omega,
            kappa,
            zeta,
            v,
            u,
        })
    }

    pub fn d(&self) -> usize {
        self.omega.nrows()
    }

    pub fn m(&self) -> usize {
        self.v.nrows()
    }

    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }

    pub fn kappa(&self) -> &CMatrix {
        &self.kappa
    }

    pub fn zeta(&self) -> &CVector {
        &self.zeta
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    /// Row `l` of `V` as a column vector.
    pub fn v_row(&self, l: usize) -> CVector {
        self.v.row(l).transpose()
    }

    pub fn u_row(&self, l: usize) -> CVector {
        self.u.row(l).transpose()
    }

    pub fn hamiltonian_is_zero(&self) -> bool {
        self.omega.iter().chain(self.kappa.iter()).chain(self.zeta.iter()).all(|x| *x == Complex64::ZERO)
    }

    pub fn with_hamiltonian(&self, omega: CMatrix, kappa: CMatrix, zeta: CVector) -> Result<Self> {
        GaussianModel::new(omega, kappa, zeta, self.v.clone(), self.u.clone())
    }

    pub fn with_kraus(&self, v: CMatrix, u: CMatrix) -> Result<Self> {
        GaussianModel::new(self.omega.clone(), self.kappa.clone(), self.zeta.clone(), v, u)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        file.into_model()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            d: self.d(),
            m: Some(self.m()),
            omega: Some(cmat_to_pairs(&self.omega)),
            kappa: Some(cmat_to_pairs(&self.kappa)),
            zeta: Some(self.zeta.iter().map(|z| [z.re, z.im]).collect()),
            v: Some(cmat_to_pairs(&self.v)),
            u: Some(cmat_to_pairs(&self.u)),
            terms: None,
            kraus: None,
        }
    }
}

/// Builds models from quadrature shorthand plus explicit matrices.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    d: usize,
    omega: CMatrix,
    kappa: CMatrix,
    zeta: CVector,
    v_rows: Vec<CVector>,
    u_rows: Vec<CVector>,
}

impl ModelBuilder {
    pub fn new(d: usize) -> Self {
        ModelBuilder {
            d,
            omega: CMatrix::zeros(d, d),
            kappa: CMatrix::zeros(d, d),
            zeta: CVector::zeros(d),
            v_rows: vec![],
            u_rows: vec![],
        }
    }

    /// Adds the expansion of a real combination of quadrature products.
    pub fn hamiltonian_terms(mut self, terms: &[QuadraticTerm]) -> Result<Self> {
        let (o, k, z) = hamiltonian_from_quadratures(terms, self.d)?;
        self.omega += o;
        self.kappa += k;
        self.zeta += z;
        Ok(self)
    }

    pub fn omega(mut self, omega: CMatrix) -> Self {
        self.omega += omega;
        self
    }

    pub fn kappa(mut self, kappa: CMatrix) -> Self {
        self.kappa += kappa;
        self
    }

    pub fn zeta(mut self, zeta: CVector) -> Self {
        self.zeta += zeta;
        self
    }

    /// Adds one Kraus operator given as a sum of components.
    pub fn kraus(mut self, components: &[KrausComponent]) -> Result<Self> {
        let mut v = CVector::zeros(self.d);
        let mut u = CVector::zeros(self.d);
        for comp in components {
            let (dv, du) = kraus_row_from_quadrature(&comp.kind, comp.mode, comp.scale, self.d)?;
            v += dv;
            u += du;
        }
        self.v_rows.push(v);
        self.u_rows.push(u);
        Ok(self)
    }

    /// Adds a Kraus operator `a(v) + a^+(u)` directly.
    pub fn kraus_row(mut self, v: CVector, u: CVector) -> Self {
        self.v_rows.push(v);
        self.u_rows.push(u);
        self
    }

    pub fn build(self) -> Result<GaussianModel> {
        let m = self.v_rows.len();
        if self.v_rows.iter().chain(self.u_rows.iter()).any(|r| r.len() != self.d) {
            return Err(Error::Dimension("Kraus row of wrong length".into()));
        }
        let v = CMatrix::from_fn(m, self.d, |r, c| self.v_rows[r][c]);
        let u = CMatrix::from_fn(m, self.d, |r, c| self.u_rows[r][c]);
        GaussianModel::new(self.omega, self.kappa, self.zeta, v, u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ValidationFailure {
    OmegaNotHermitian { row: usize, col: usize, deviation: f64 },
    KappaNotSymmetric { row: usize, col: usize, deviation: f64 },
    PureHamiltonian,
    KrausCount { m: usize, d: usize },
    NonFinite { field: &'static str },
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::OmegaNotHermitian { row, col, deviation } => write!(
                f,
                "Omega-not-Hermitian: |Omega - Omega*| = {deviation:e} at ({}, {})",
                row + 1,
                col + 1
            ),
            ValidationFailure::KappaNotSymmetric { row, col, deviation } => write!(
                f,
                "kappa-not-symmetric: |kappa - kappa^T| = {deviation:e} at ({}, {})",
                row + 1,
                col + 1
            ),
            ValidationFailure::PureHamiltonian => {
                write!(f, "pure-Hamiltonian: V and U are both zero")
            }
            ValidationFailure::KrausCount { m, d } => {
                write!(f, "Kraus-count: m = {m} outside 1..={}", 2 * d)
            }
            ValidationFailure::NonFinite { field } => write!(f, "non-finite: {field}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            let msg: Vec<String> = self.failures.iter().map(|f| f.to_string()).collect();
            Err(Error::Validation(msg.join("; ")))
        }
    }
}

fn worst_asymmetry(a: &CMatrix, partner: impl Fn(usize, usize) -> Complex64) -> (usize, usize, f64) {
    let mut worst = (0, 0, 0.0);
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            let dev = (a[(r, c)] - partner(r, c)).norm();
            if dev > worst.2 {
                worst = (r, c, dev);
            }
        }
    }
    worst
}

/// Checks the standing assumptions on the model data.
pub fn validate(model: &GaussianModel, tol: &Tolerances) -> ValidationReport {
    let mut failures = vec![];
    let d = model.d();
    let m = model.m();
    for (name, mat) in [
        ("omega", &model.omega),
        ("kappa", &model.kappa),
        ("V", &model.v),
        ("U", &model.u),
    ] {
        if mat.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            failures.push(ValidationFailure::NonFinite { field: name });
        }
    }
    if model.zeta.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        failures.push(ValidationFailure::NonFinite { field: "zeta" });
    }

    let scale = model.omega.iter().chain(model.kappa.iter()).map(|x| x.norm()).fold(0.0, f64::max);
    let thresh = tol.sym * scale;
    let (r, cc, dev) = worst_asymmetry(&model.omega, |r, c| model.omega[(c, r)].conj());
    if dev > thresh {
        failures.push(ValidationFailure::OmegaNotHermitian { row: r, col: cc, deviation: dev });
    }
    let (r, cc, dev) = worst_asymmetry(&model.kappa, |r, c| model.kappa[(c, r)]);
    if dev > thresh {
        failures.push(ValidationFailure::KappaNotSymmetric { row: r, col: cc, deviation: dev });
    }
    if model.v.iter().chain(model.u.iter()).all(|x| *x == Complex64::ZERO) {
        failures.push(ValidationFailure::PureHamiltonian);
    }
    if m < 1 || m > 2 * d {
        failures.push(ValidationFailure::KrausCount { m, d });
    }
    ValidationReport { failures }
}

/// `ker(V*) ∩ ker(U^T) = {0}`, decided as `rank([conj(V) | U]) = m`.
pub fn check_minimality(model: &GaussianModel, tol: &Tolerances) -> bool {
    let (m, d) = (model.m(), model.d());
    if m > 2 * d {
        return false;
    }
    let stacked = CMatrix::from_fn(m, 2 * d, |r, col| {
        if col < d {
            model.v[(r, col)].conj()
        } else {
            model.u[(r, col - d)]
        }
    });
    let sv = crate::real_linear::singular_values(&stacked);
    let smax = sv[0];
    if smax == 0.0 {
        return false;
    }
    let thresh = tol
        .minimality_rank
        .unwrap_or(m.max(2 * d) as f64 * f64::EPSILON * smax);
    sv.iter().filter(|&&s| s > thresh).count() == m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Q,
    P,
}

/// `coeff * first * second`, or `coeff * first` when `second` is absent.
/// Mode indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTerm {
    pub coeff: f64,
    pub factors: Vec<(Quadrature, usize)>,
}

impl QuadraticTerm {
    pub fn linear(coeff: f64, kind: Quadrature, mode: usize) -> Self {
        QuadraticTerm {
            coeff,
            factors: vec![(kind, mode)],
        }
    }

    pub fn product(coeff: f64, first: (Quadrature, usize), second: (Quadrature, usize)) -> Self {
        QuadraticTerm {
            coeff,
            factors: vec![first, second],
        }
    }
}

/// Normal-ordered expansion of a quadrature polynomial, constant included.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureExpansion {
    pub omega: CMatrix,
    pub kappa: CMatrix,
    pub zeta: CVector,
    pub constant: Complex64,
}

/// `(alpha, beta)` with `x = alpha . a + beta . a^+`.
fn quadrature_form(kind: Quadrature, j: usize, d: usize) -> (CVector, CVector) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut alpha = CVector::zeros(d);
    let mut beta = CVector::zeros(d);
    match kind {
        Quadrature::Q => {
            alpha[j] = c(s, 0.0);
            beta[j] = c(s, 0.0);
        }
        Quadrature::P => {
            alpha[j] = c(0.0, -s);
            beta[j] = c(0.0, s);
        }
    }
    (alpha, beta)
}

pub fn expand_quadratures(terms: &[QuadraticTerm], d: usize) -> Result<QuadratureExpansion> {
    // coefficients of a_j^+ a_k, a_j^+ a_k^+, a_j a_k, a_j^+, a_j
    let mut n_ord = CMatrix::zeros(d, d);
    let mut cc = CMatrix::zeros(d, d);
    let mut aa = CMatrix::zeros(d, d);
    let mut lin_c = CVector::zeros(d);
    let mut lin_a = CVector::zeros(d);
    let mut constant = Complex64::ZERO;

    for term in terms {
        if term.factors.is_empty() || term.factors.len() > 2 {
            return Err(Error::InvalidTerm(format!(
                "a term has 1 or 2 factors, got {}",
                term.factors.len()
            )));
        }
        if let Some(&(_, j)) = term.factors.iter().find(|(_, j)| *j == 0 || *j > d) {
            return Err(Error::InvalidTerm(format!("mode {j} outside 1..={d}")));
        }
        if !term.coeff.is_finite() {
            return Err(Error::InvalidTerm("non-finite coefficient".into()));
        }
        let w = c(term.coeff, 0.0);
        let (k1, j1) = term.factors[0];
        let (al, be) = quadrature_form(k1, j1 - 1, d);
        if term.factors.len() == 1 {
            lin_a += al * w;
            lin_c += be * w;
            continue;
        }
        let (k2, j2) = term.factors[1];
        let (al2, be2) = quadrature_form(k2, j2 - 1, d);
        for j in 0..d {
            for k in 0..d {
                aa[(j, k)] += w * al[j] * al2[k];
                cc[(j, k)] += w * be[j] * be2[k];
                n_ord[(j, k)] += w * be[j] * al2[k];
                // a_j a_k^+ = a_k^+ a_j + delta_jk
                n_ord[(k, j)] += w * al[j] * be2[k];
                if j == k {
                    constant += w * al[j] * be2[k];
                }
            }
        }
    }

    let omega = n_ord;
    let kappa = &cc + cc.transpose();
    let zeta = lin_c * c(2.0, 0.0);

    let scale = 1.0 + omega.camax().max(kappa.camax());
    let herm = (&omega - omega.adjoint()).camax();
    let aa_sym = (&aa + aa.transpose()) * c(0.5, 0.0);
    let aa_dev = (aa_sym - kappa.map(|x| x.conj() * 0.5)).camax();
    let lin_dev = (lin_a - zeta.map(|x| x.conj() * 0.5)).camax();
    let tol = 1e-12 * scale;
    if constant.im.abs() > tol {
        return Err(Error::SelfAdjointnessViolated(format!(
            "imaginary constant {:e}: a q_j p_j product needs its p_j q_j partner",
            constant.im
        )));
    }
    if herm > tol || aa_dev > tol || lin_dev > tol {
        return Err(Error::SelfAdjointnessViolated(format!(
            "expansion deviates from a self-adjoint form by {:e}",
            herm.max(aa_dev).max(lin_dev)
        )));
    }
    // exact symmetrization
    let omega = (&omega + omega.adjoint()) * c(0.5, 0.0);
    let kappa = (&kappa + kappa.transpose()) * c(0.5, 0.0);
    Ok(QuadratureExpansion {
        omega,
        kappa,
        zeta,
        constant: c(constant.re, 0.0),
    })
}

/// `(Omega, kappa, zeta)` of a real combination of quadrature monomials of
/// degree at most two, dropping the additive constant.
pub fn hamiltonian_from_quadratures(terms: &[QuadraticTerm], d: usize) -> Result<(CMatrix, CMatrix, CVector)> {
    let e = expand_quadratures(terms, d)?;
    Ok((e.omega, e.kappa, e.zeta))
}

#[derive(Debug, Clone, PartialEq)]
pub enum KrausKind {
    Q,
    P,
    A,
    ADag,
    Custom { v: CVector, u: CVector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausComponent {
    pub kind: KrausKind,
    /// 1-based; ignored for `Custom`.
    pub mode: usize,
    pub scale: Complex64,
}

impl KrausComponent {
    pub fn new(kind: KrausKind, mode: usize, scale: Complex64) -> Self {
        KrausComponent { kind, mode, scale }
    }

    pub fn unit(kind: KrausKind, mode: usize) -> Self {
        KrausComponent::new(kind, mode, c(1.0, 0.0))
    }
}

/// `(v, u)` with `scale * X = a(v) + a^+(u)` for the elementary operator `X`.
///
/// Since `a(v)` is conjugate-linear in `v`, a complex `scale` multiplies `u`
/// and `conj(scale)` multiplies `v`; for real scales both are just scaled.
pub fn kraus_row_from_quadrature(kind: &KrausKind, mode: usize, scale: Complex64, d: usize) -> Result<(CVector, CVector)> {
    let (v, u) = match kind {
        KrausKind::Custom { v, u } => {
            if v.len() != d || u.len() != d {
                return Err(Error::Dimension(format!("custom Kraus row must have length {d}")));
            }
            (v.clone(), u.clone())
        }
        _ => {
            if mode == 0 || mode > d {
                return Err(Error::InvalidTerm(format!("mode {mode} outside 1..={d}")));
            }
            let j = mode - 1;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let (vj, uj) = match kind {
                KrausKind::Q => (c(s, 0.0), c(s, 0.0)),
                KrausKind::P => (c(0.0, s), c(0.0, s)),
                KrausKind::A => (c(1.0, 0.0), Complex64::ZERO),
                KrausKind::ADag => (Complex64::ZERO, c(1.0, 0.0)),
                KrausKind::Custom { .. } => unreachable!(),
            };
            let mut v = CVector::zeros(d);
            let mut u = CVector::zeros(d);
            v[j] = vj;
            u[j] = uj;
            (v, u)
        }
    };
    Ok((v * scale.conj(), u * scale))
}

// ---------------------------------------------------------------------------
// JSON schema

pub type ComplexPair = [f64; 2];

fn cmat_to_pairs(m: &CMatrix) -> Vec<Vec<ComplexPair>> {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn pairs_to_cmat(rows: &[Vec<ComplexPair>], ncols: usize, what: &str) -> Result<CMatrix> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension(format!("{what}: every row must have {ncols} entries")));
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |r, cc| c(rows[r][cc][0], rows[r][cc][1])))
}

fn pairs_to_cvec(v: &[ComplexPair]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| c(p[0], p[1])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrausKindRepr {
    Q,
    P,
    A,
    Adag,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausComponentRepr {
    pub kind: KrausKindRepr,
    #[serde(default)]
    pub mode: usize,
    #[serde(default = "one_pair")]
    pub scale: ComplexPair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<ComplexPair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<ComplexPair>>,
}

fn one_pair() -> ComplexPair {
    [1.0, 0.0]
}

impl KrausComponentRepr {
    fn to_component(&self, d: usize) -> Result<KrausComponent> {
        let kind = match self.kind {
            KrausKindRepr::Q => KrausKind::Q,
            KrausKindRepr::P => KrausKind::P,
            KrausKindRepr::A => KrausKind::A,
            KrausKindRepr::Adag => KrausKind::ADag,
            KrausKindRepr::Custom => {
                let zero = vec![[0.0, 0.0]; d];
                KrausKind::Custom {
                    v: pairs_to_cvec(self.v.as_deref().unwrap_or(&zero)),
                    u: pairs_to_cvec(self.u.as_deref().unwrap_or(&zero)),
                }
            }
        };
        Ok(KrausComponent::new(kind, self.mode, c(self.scale[0], self.scale[1])))
    }
}

/// On-disk model: complex numbers as `[re, im]`. `terms` and `kraus` are
/// shorthand expanded on load and added to the explicit matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<ComplexPair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<Vec<ComplexPair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Vec<ComplexPair>>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Vec<ComplexPair>>>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<Vec<ComplexPair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<QuadraticTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<KrausComponentRepr>>>,
}

impl ModelFile {
    pub fn into_model(self) -> Result<GaussianModel> {
        let d = self.d;
        if d == 0 {
            return Err(Error::Dimension("d must be positive".into()));
        }
        let mut b = ModelBuilder::new(d);
        if let Some(o) = &self.omega {
            if o.len() != d {
                return Err(Error::Dimension(format!("omega must have {d} rows")));
            }
            b = b.omega(pairs_to_cmat(o, d, "omega")?);
        }
        if let Some(k) = &self.kappa {
            if k.len() != d {
                return Err(Error::Dimension(format!("kappa must have {d} rows")));
            }
            b = b.kappa(pairs_to_cmat(k, d, "kappa")?);
        }
        if let Some(z) = &self.zeta {
            if z.len() != d {
                return Err(Error::Dimension(format!("zeta must have {d} entries")));
            }
            b = b.zeta(pairs_to_cvec(z));
        }
        if let Some(terms) = &self.terms {
            b = b.hamiltonian_terms(terms)?;
        }
        match (&self.v, &self.u) {
            (Some(v), Some(u)) => {
                let v = pairs_to_cmat(v, d, "V")?;
                let u = pairs_to_cmat(u, d, "U")?;
                if v.nrows() != u.nrows() {
                    return Err(Error::Dimension("V and U must have the same number of rows".into()));
                }
                for l in 0..v.nrows() {
                    b = b.kraus_row(v.row(l).transpose(), u.row(l).transpose());
                }
            }
            (None, None) => {}
            _ => return Err(Error::Dimension("V and U must be given together".into())),
        }
        if let Some(kraus) = &self.kraus {
            for op in kraus {
                let comps = op.iter().map(|r| r.to_component(d)).collect::<Result<Vec<_>>>()?;
                b = b.kraus(&comps)?;
            }
        }
        let model = b.build()?;
        if let Some(m) = self.m {
            if m != model.m() {
                return Err(Error::Dimension(format!("m = {m} but {} Kraus rows given", model.m())));
            }
        }
        Ok(model)
    }
}

impl From<GaussianModel> for ModelFile {
    fn from(m: GaussianModel) -> Self {
        m.to_file()
    }
}

impl TryFrom<ModelFile> for GaussianModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        f.into_model()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock;
    use crate::I;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn lossy() -> GaussianModel {
        ModelBuilder::new(1).kraus(&[KrausComponent::unit(KrausKind::A, 1)]).unwrap().build().unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&lossy(), &tol()).passed());

        let m = lossy();
        let d2 = ModelBuilder::new(2)
            .omega(CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]))
            .kraus(&[KrausComponent::unit(KrausKind::A, 1)])
            .unwrap()
            .build()
            .unwrap();
        let rep = validate(&d2, &tol());
        assert!(matches!(rep.failures[..], [ValidationFailure::OmegaNotHermitian { .. }]));
        assert!(rep.failures[0].to_string().starts_with("Omega-not-Hermitian"));

        let pure = m.with_kraus(CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)).unwrap();
        let rep = validate(&pure, &tol());
        assert_eq!(rep.failures, vec![ValidationFailure::PureHamiltonian]);
        assert!(rep.into_result().is_err());
    }

    #[test]
    fn validate_kraus_count_and_symmetry() {
        let v = CMatrix::from_element(3, 1, c(1.0, 0.0));
        let m = lossy().with_kraus(v.clone(), CMatrix::zeros(3, 1)).unwrap();
        assert!(validate(&m, &tol()).failures.contains(&ValidationFailure::KrausCount { m: 3, d: 1 }));

        let kappa = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        let m = ModelBuilder::new(2).kappa(kappa).kraus_row(CVector::from_element(2, c(1.0, 0.0)), CVector::zeros(2)).build().unwrap();
        assert!(matches!(validate(&m, &tol()).failures[..], [ValidationFailure::KappaNotSymmetric { .. }]));
    }

    #[test]
    fn minimality_examples() {
        let one = ModelBuilder::new(2).kraus(&[KrausComponent::unit(KrausKind::A, 1)]).unwrap().build().unwrap();
        assert!(check_minimality(&one, &tol()));

        let two = ModelBuilder::new(2)
            .kraus(&[KrausComponent::unit(KrausKind::A, 1)])
            .unwrap()
            .kraus(&[KrausComponent::unit(KrausKind::A, 1)])
            .unwrap()
            .build()
            .unwrap();
        assert!(!check_minimality(&two, &tol()));

        let v = CMatrix::from_fn(3, 1, |r, _| c(r as f64 + 1.0, 0.5));
        let u = CMatrix::from_fn(3, 1, |r, _| c(0.0, r as f64));
        let many = lossy().with_kraus(v, u).unwrap();
        assert!(!check_minimality(&many, &tol()));
    }

    #[test]
    fn minimality_invariant_under_row_permutation() {
        let v = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.2), c(0.0, 1.0), c(0.0, 0.0)]);
        let u = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.4, 0.0), c(1.0, 0.0), c(0.0, -0.5)]);
        let m = ModelBuilder::new(2).kraus_row(v.row(0).transpose(), u.row(0).transpose()).kraus_row(v.row(1).transpose(), u.row(1).transpose()).build().unwrap();
        let p = ModelBuilder::new(2).kraus_row(v.row(1).transpose(), u.row(1).transpose()).kraus_row(v.row(0).transpose(), u.row(0).transpose()).build().unwrap();
        assert_eq!(check_minimality(&m, &tol()), check_minimality(&p, &tol()));
        assert!(check_minimality(&m, &tol()));
    }

    #[test]
    fn q_squared_expansion() {
        let (o, k, z) = hamiltonian_from_quadratures(&[QuadraticTerm::product(1.0, (Quadrature::Q, 1), (Quadrature::Q, 1))], 1).unwrap();
        assert!((o[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((k[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(z[0], Complex64::ZERO);
        let e = expand_quadratures(&[QuadraticTerm::product(1.0, (Quadrature::Q, 1), (Quadrature::Q, 1))], 1).unwrap();
        assert!((e.constant - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn q1_p2_expansion() {
        let (o, k, z) = hamiltonian_from_quadratures(&[QuadraticTerm::product(1.0, (Quadrature::Q, 1), (Quadrature::P, 2))], 2).unwrap();
        let h = 0.5;
        let o_exp = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -h), c(0.0, h), c(0.0, 0.0)]);
        let k_exp = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, h), c(0.0, h), c(0.0, 0.0)]);
        assert!((o - o_exp).camax() < 1e-15);
        assert!((k - k_exp).camax() < 1e-15);
        assert_eq!(z, CVector::zeros(2));
    }

    #[test]
    fn empty_terms() {
        let (o, k, z) = hamiltonian_from_quadratures(&[], 3).unwrap();
        assert_eq!(o, CMatrix::zeros(3, 3));
        assert_eq!(k, CMatrix::zeros(3, 3));
        assert_eq!(z, CVector::zeros(3));
    }

    #[test]
    fn unsymmetrized_qp_rejected() {
        let qp = QuadraticTerm::product(1.0, (Quadrature::Q, 1), (Quadrature::P, 1));
        let pq = QuadraticTerm::product(1.0, (Quadrature::P, 1), (Quadrature::Q, 1));
        assert!(matches!(hamiltonian_from_quadratures(std::slice::from_ref(&qp), 1), Err(Error::SelfAdjointnessViolated(_))));
        assert!(hamiltonian_from_quadratures(&[qp, pq], 1).is_ok());
        let bad = QuadraticTerm::linear(1.0, Quadrature::Q, 3);
        assert!(matches!(hamiltonian_from_quadratures(&[bad], 2), Err(Error::InvalidTerm(_))));
    }

    #[test]
    fn kraus_rows() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (v, u) = kraus_row_from_quadrature(&KrausKind::Q, 1, c(1.0, 0.0), 2).unwrap();
        assert_eq!(v, CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0)]));
        assert_eq!(u, v);
        let (v, u) = kraus_row_from_quadrature(&KrausKind::P, 1, c(1.0, 0.0), 2).unwrap();
        assert_eq!(v, CVector::from_vec(vec![c(0.0, s), c(0.0, 0.0)]));
        assert_eq!(u, v);
        let (v, u) = kraus_row_from_quadrature(&KrausKind::A, 1, c(1.0, 0.0), 2).unwrap();
        assert_eq!(v, CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(u, CVector::zeros(2));
        assert!(kraus_row_from_quadrature(&KrausKind::A, 3, c(1.0, 0.0), 2).is_err());
    }

    /// The truncated Hamiltonian from (Omega, kappa, zeta) plus the dropped
    /// constant equals the product of truncated quadrature matrices.
    #[test]
    fn expansion_matches_truncated_products() {
        let terms = vec![
            QuadraticTerm::product(1.0, (Quadrature::Q, 1), (Quadrature::Q, 1)),
            QuadraticTerm::product(0.7, (Quadrature::Q, 1), (Quadrature::P, 2)),
            QuadraticTerm::product(-0.3, (Quadrature::P, 2), (Quadrature::P, 2)),
            QuadraticTerm::product(0.4, (Quadrature::P, 1), (Quadrature::Q, 2)),
            QuadraticTerm::product(0.25, (Quadrature::Q, 2), (Quadrature::P, 2)),
            QuadraticTerm::product(0.25, (Quadrature::P, 2), (Quadrature::Q, 2)),
            QuadraticTerm::linear(1.5, Quadrature::P, 1),
            QuadraticTerm::linear(-0.5, Quadrature::Q, 2),
        ];
        let cutoffs = [10, 10];
        let e = expand_quadratures(&terms, 2).unwrap();
        let model = ModelBuilder::new(2)
            .omega(e.omega.clone())
            .kappa(e.kappa.clone())
            .zeta(e.zeta.clone())
            .kraus(&[KrausComponent::unit(KrausKind::A, 1)])
            .unwrap()
            .build()
            .unwrap();
        let gen = fock::assemble(&model, &cutoffs);
        let h_model = gen.hamiltonian().to_dense();

        let ladder = fock::ladder(2, &cutoffs);
        let quad = |k: Quadrature, j: usize| -> CMatrix {
            let a = &ladder[j - 1].mat;
            let ad = a.adjoint();
            let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            match k {
                Quadrature::Q => (a + ad) * s,
                Quadrature::P => (ad - a) * (s * I),
            }
        };
        let dim = 100;
        let mut h_direct = CMatrix::identity(dim, dim) * (-e.constant);
        for t in &terms {
            let mut prod = CMatrix::identity(dim, dim);
            for &(k, j) in &t.factors {
                prod *= quad(k, j);
            }
            h_direct += prod * c(t.coeff, 0.0);
        }
        let sector = fock::Sector::new(&cutoffs, 7);
        let diff = sector.restrict(&(h_model - h_direct));
        assert!(diff.camax() < 1e-10, "max deviation {}", diff.camax());
    }

    #[test]
    fn json_roundtrip_and_shorthand() {
        let s = r#"{
            "d": 2,
            "terms": [{"coeff": 1.0, "factors": [["q", 1], ["p", 2]]}],
            "kraus": [[{"kind": "q", "mode": 1}]]
        }"#;
        let m = GaussianModel::from_json_str(s).unwrap();
        assert_eq!((m.d(), m.m()), (2, 1));
        let back = GaussianModel::from_json_str(&serde_json::to_string(&m.to_file()).unwrap()).unwrap();
        assert_eq!(back, m);

        let q1_iq2 = r#"{"d": 2, "kraus": [[{"kind": "q", "mode": 1}, {"kind": "q", "mode": 2, "scale": [0, 1]}]]}"#;
        let m = GaussianModel::from_json_str(q1_iq2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.v_row(0) - CVector::from_vec(vec![c(s, 0.0), c(0.0, -s)])).camax() < 1e-15);
        assert!((m.u_row(0) - CVector::from_vec(vec![c(s, 0.0), c(0.0, s)])).camax() < 1e-15);

        let bad_m = r#"{"d": 1, "m": 2, "V": [[[1,0]]], "U": [[[0,0]]]}"#;
        assert!(GaussianModel::from_json_str(bad_m).is_err());
    }
}
