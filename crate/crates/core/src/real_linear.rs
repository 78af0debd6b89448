//! Real-linear algebra on `C^n` viewed as `R^{2n}`.
//!
//! Coordinates are laid out as `(Re z_1, .., Re z_n, Im z_1, .., Im z_n)`, so
//! multiplication by `i` is the constant block matrix `J = [[0, -I], [I, 0]]`
//! and the symplectic form `Im<z, w>` equals `<J z, w>` in real coordinates.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64, RMatrix, RVector};

/// A complex `n`-vector in real coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVectorRep {
    n: usize,
    data: RVector,
}

impl RealVectorRep {
    pub fn from_data(data: RVector) -> Result<Self> {
        if !data.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "real representation must have even length, got {}",
                data.len()
            )));
        }
        Ok(RealVectorRep {
            n: data.len() / 2,
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &RVector {
        &self.data
    }

    pub fn into_data(self) -> RVector {
        self.data
    }
}

pub fn embed(z: &CVector) -> RealVectorRep {
    let n = z.len();
    let data = RVector::from_fn(2 * n, |k, _| if k < n { z[k].re } else { z[k - n].im });
    RealVectorRep { n, data }
}

pub fn unembed(r: &RealVectorRep) -> CVector {
    embed_inv(&r.data)
}

/// Inverse of [`embed`] on raw coordinates of even length.
pub fn embed_inv(data: &RVector) -> CVector {
    let n = data.len() / 2;
    CVector::from_fn(n, |k, _| Complex64::new(data[k], data[k + n]))
}

/// `J = [[0, -I], [I, 0]]`, the real matrix of multiplication by `i`.
pub fn j_matrix(n: usize) -> RMatrix {
    let mut j = RMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = -1.0;
        j[(n + k, k)] = 1.0;
    }
    j
}

/// Applies `J` to each column without forming the matrix.
pub(crate) fn apply_j(m: &RMatrix) -> RMatrix {
    let n = m.nrows() / 2;
    RMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        if r < n {
            -m[(r + n, c)]
        } else {
            m[(r - n, c)]
        }
    })
}

/// `Im<z, w>`, conjugate-linear in `z`.
pub fn symplectic_form(z: &CVector, w: &CVector) -> f64 {
    z.iter().zip(w.iter()).map(|(a, b)| (a.conj() * b).im).sum()
}

/// Same as [`symplectic_form`] on real coordinates.
pub(crate) fn symplectic_form_real(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() / 2;
    (0..n).map(|k| x[k] * y[n + k] - x[n + k] * y[k]).sum()
}

/// A real-linear subspace of `C^n`, stored as an orthonormal basis of its
/// image in `R^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSubspace {
    n: usize,
    basis: RMatrix,
    tol: f64,
}

impl RealSubspace {
    pub fn zero(n: usize, tol: f64) -> Self {
        RealSubspace {
            n,
            basis: RMatrix::zeros(2 * n, 0),
            tol,
        }
    }

    pub fn full(n: usize, tol: f64) -> Self {
        RealSubspace {
            n,
            basis: RMatrix::identity(2 * n, 2 * n),
            tol,
        }
    }

    /// Wraps a basis that is already orthonormal (checked to `1e-10`).
    pub fn from_orthonormal(basis: RMatrix, tol: f64) -> Result<Self> {
        if !basis.nrows().is_multiple_of(2) {
            return Err(Error::Dimension("basis rows must be even".into()));
        }
        let k = basis.ncols();
        let gram = basis.transpose() * &basis;
        let dev = (gram - RMatrix::identity(k, k)).amax();
        if k > 0 && dev > 1e-10 {
            return Err(Error::Dimension(format!(
                "basis is not orthonormal (deviation {dev:e})"
            )));
        }
        Ok(RealSubspace {
            n: basis.nrows() / 2,
            basis,
            tol,
        })
    }

    /// Real span of complex vectors.
    pub fn span_of(n: usize, vectors: &[CVector], tol: f64) -> Self {
        let reps: Vec<RealVectorRep> = vectors.iter().map(embed).collect();
        real_span(n, &reps, tol).expect("vectors share the ambient dimension")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &RMatrix {
        &self.basis
    }

    /// Basis vectors as complex `n`-vectors.
    pub fn vectors(&self) -> Vec<CVector> {
        self.basis
            .column_iter()
            .map(|c| embed_inv(&c.into_owned()))
            .collect()
    }

    pub fn projector(&self) -> RMatrix {
        &self.basis * self.basis.transpose()
    }

    /// Distance from `x` (real coordinates) to the subspace.
    pub fn distance(&self, x: &RVector) -> f64 {
        let proj = &self.basis * (self.basis.transpose() * x);
        (x - proj).norm()
    }

    pub fn contains(&self, z: &CVector, tol: f64) -> bool {
        let x = embed(z).into_data();
        self.distance(&x) <= tol * x.norm().max(1.0)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Deterministic orthonormal basis: column-pivoted Gram-Schmidt on the
    /// projections of the standard real basis vectors, lowest index first
    /// among ties. Subspaces spanned by standard vectors get those vectors.
    pub fn canonical_basis(&self) -> RMatrix {
        let k = self.dim();
        let m = 2 * self.n;
        if k == 0 {
            return RMatrix::zeros(m, 0);
        }
        let mut cands: Vec<RVector> = (0..m)
            .map(|i| &self.basis * self.basis.row(i).transpose())
            .collect();
        let mut out = RMatrix::zeros(m, k);
        for col in 0..k {
            let mut best = 0;
            let mut best_norm = -1.0;
            for (i, v) in cands.iter().enumerate() {
                let nv = v.norm();
                if nv > best_norm + 1e-12 {
                    best = i;
                    best_norm = nv;
                }
            }
            let q = &cands[best] / best_norm;
            for v in cands.iter_mut() {
                let dot = q.dot(v);
                v.axpy(-dot, &q, 1.0);
            }
            out.set_column(col, &q);
        }
        // second Gram-Schmidt pass, column order preserved
        for col in 0..k {
            let mut v = out.column(col).into_owned();
            for prev in 0..col {
                let dot = out.column(prev).dot(&v);
                v.axpy(-dot, &out.column(prev), 1.0);
            }
            let nv = v.norm();
            out.set_column(col, &(v / nv));
        }
        out
    }
}

/// Linear maps `R^{2n} -> R^{2n}` representing real-linear operators on `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLinearMap {
    n: usize,
    mat: RMatrix,
}

impl RealLinearMap {
    pub fn new(mat: RMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || !mat.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "real-linear map must be 2n x 2n, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|x| !x.is_finite()) {
            return Err(Error::Dimension("real-linear map has non-finite entries".into()));
        }
        Ok(RealLinearMap {
            n: mat.nrows() / 2,
            mat,
        })
    }

    /// The map `z -> A z + B conj(z)`.
    pub fn from_complex_parts(a: &CMatrix, b: &CMatrix) -> Self {
        let n = a.nrows();
        let mut mat = RMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                let (ar, ai) = (a[(r, c)].re, a[(r, c)].im);
                let (br, bi) = (b[(r, c)].re, b[(r, c)].im);
                mat[(r, c)] = ar + br;
                mat[(r, n + c)] = bi - ai;
                mat[(n + r, c)] = ai + bi;
                mat[(n + r, n + c)] = ar - br;
            }
        }
        RealLinearMap { n, mat }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.mat
    }

    pub fn apply(&self, z: &CVector) -> CVector {
        embed_inv(&(&self.mat * embed(z).into_data()))
    }
}

/// Thin SVD `a = U diag(s) V^*` with singular values in decreasing order.
///
/// The bidiagonal solver occasionally returns factors that do not reproduce
/// `a` (seen on tall matrices with exactly zero rows), so the reconstruction
/// is checked and the decomposition retried on `a^*` and then on the `R`
/// factor of a QR step. The most accurate attempt wins.
pub(crate) fn checked_svd<T>(a: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    let (r, c) = a.shape();
    let k = r.min(c);
    if k == 0 {
        return (DMatrix::zeros(r, 0), vec![], DMatrix::zeros(0, c));
    }
    let anorm = a.norm();
    let recon_err = |f: &(DMatrix<T>, Vec<f64>, DMatrix<T>)| {
        let sig = DMatrix::from_fn(f.1.len(), f.1.len(), |i, j| {
            if i == j {
                T::from_real(f.1[i])
            } else {
                T::zero()
            }
        });
        (&f.0 * sig * &f.2 - a).norm()
    };
    let accept = 1e-13 * anorm.max(f64::MIN_POSITIVE) * ((r + c) as f64).sqrt();

    let direct = || {
        let svd = a.clone().svd(true, true);
        (svd.u.expect("requested U"), svd.singular_values.as_slice().to_vec(), svd.v_t.expect("requested V^*"))
    };
    let via_adjoint = || {
        let svd = a.adjoint().svd(true, true);
        let u = svd.v_t.expect("requested V^*").adjoint();
        let vt = svd.u.expect("requested U").adjoint();
        (u, svd.singular_values.as_slice().to_vec(), vt)
    };
    let via_qr = || {
        // tall: a = Q R; wide: a^* = Q R
        if r >= c {
            let qr = a.clone().qr();
            let svd = qr.r().svd(true, true);
            let u = qr.q() * svd.u.expect("requested U");
            (u, svd.singular_values.as_slice().to_vec(), svd.v_t.expect("requested V^*"))
        } else {
            let qr = a.adjoint().qr();
            let svd = qr.r().svd(true, true);
            let u = svd.v_t.expect("requested V^*").adjoint();
            let vt = (qr.q() * svd.u.expect("requested U")).adjoint();
            (u, svd.singular_values.as_slice().to_vec(), vt)
        }
    };
    let mut best: Option<((DMatrix<T>, Vec<f64>, DMatrix<T>), f64)> = None;
    for attempt in [&direct as &dyn Fn() -> _, &via_adjoint, &via_qr] {
        let f = attempt();
        let err = recon_err(&f);
        if err <= accept {
            best = Some((f, err));
            break;
        }
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((f, err));
        }
    }
    let ((u, s, vt), _) = best.expect("at least one attempt");
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let u = DMatrix::from_columns(&idx.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
    let vt = DMatrix::from_rows(&idx.iter().map(|&i| vt.row(i).into_owned()).collect::<Vec<_>>());
    let s = idx.iter().map(|&i| s[i]).collect();
    (u, s, vt)
}

/// Singular values in decreasing order, via [`checked_svd`].
pub(crate) fn singular_values<T>(a: &DMatrix<T>) -> Vec<f64>
where
    T: ComplexField<RealField = f64>,
{
    checked_svd(a).1
}

/// Orthonormal basis of the column space, with rank decided by singular
/// values above `rel_tol * sigma_max`. Also returns the kept singular values.
pub(crate) fn orthonormal_columns(a: &RMatrix, rel_tol: f64) -> (RMatrix, Vec<f64>) {
    let rows = a.nrows();
    if a.ncols() == 0 || rows == 0 {
        return (RMatrix::zeros(rows, 0), vec![]);
    }
    let (u, sv, _) = checked_svd(a);
    let smax = sv[0];
    if smax == 0.0 || !smax.is_finite() {
        return (RMatrix::zeros(rows, 0), vec![]);
    }
    let keep = sv.iter().take_while(|&&s| s > rel_tol * smax).count();
    (u.columns(0, keep).into_owned(), sv[..keep].to_vec())
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// (orthonormal) columns of `q` in `R^m`.
pub(crate) fn complement_of_orthonormal(q: &RMatrix, m: usize) -> RMatrix {
    let k = q.ncols();
    if k == 0 {
        return RMatrix::identity(m, m);
    }
    if k >= m {
        return RMatrix::zeros(m, 0);
    }
    let p = RMatrix::identity(m, m) - q * q.transpose();
    let eig = SymmetricEigen::new(p);
    let mut idx: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut out = RMatrix::zeros(m, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        out.set_column(c, &eig.eigenvectors.column(i));
    }
    out
}

/// Orthonormal basis of `{x : a x = 0}` with relative rank tolerance.
pub(crate) fn null_space(a: &RMatrix, rel_tol: f64) -> RMatrix {
    let cols = a.ncols();
    if a.nrows() == 0 || cols == 0 {
        return RMatrix::identity(cols, cols);
    }
    // row space = column space of a^T
    let (row_space, _) = orthonormal_columns(&a.transpose(), rel_tol);
    complement_of_orthonormal(&row_space, cols)
}

/// Orthonormal basis of `{x : a x = 0}` keeping directions whose singular
/// value is at most `abs_tol`.
pub(crate) fn null_space_abs(a: &RMatrix, abs_tol: f64) -> RMatrix {
    let cols = a.ncols();
    if a.nrows() == 0 || cols == 0 {
        return RMatrix::identity(cols, cols);
    }
    // pad to at least `cols` rows so the thin SVD yields a full V
    let padded = if a.nrows() < cols {
        let mut p = RMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let (_, sv, vt) = checked_svd(&padded);
    let keep: Vec<RVector> = (0..sv.len())
        .filter(|&i| sv[i] <= abs_tol)
        .map(|i| vt.row(i).transpose())
        .collect();
    if keep.is_empty() {
        return RMatrix::zeros(cols, 0);
    }
    RMatrix::from_columns(&keep)
}

/// Orthonormal basis of the orthogonal complement of `sub` inside `big`,
/// assuming `sub` is (numerically) contained in `big`.
pub(crate) fn complement_within(big: &RealSubspace, sub: &RealSubspace) -> RealSubspace {
    let k = big.dim().saturating_sub(sub.dim());
    let tol = big.tol.max(sub.tol);
    if k == 0 {
        return RealSubspace::zero(big.n, tol);
    }
    let resid = &big.basis - &sub.basis * (sub.basis.transpose() * &big.basis);
    let (u, _, _) = checked_svd(&resid);
    RealSubspace {
        n: big.n,
        basis: u.columns(0, k).into_owned(),
        tol,
    }
}

/// Sum of two subspaces.
pub fn subspace_sum(a: &RealSubspace, b: &RealSubspace) -> RealSubspace {
    assert_eq!(a.n, b.n, "subspace_sum: ambient dimensions differ");
    let tol = a.tol.max(b.tol);
    let mut cols: Vec<RVector> = a.basis.column_iter().map(|c| c.into_owned()).collect();
    cols.extend(b.basis.column_iter().map(|c| c.into_owned()));
    if cols.is_empty() {
        return RealSubspace::zero(a.n, tol);
    }
    let (q, _) = orthonormal_columns(&RMatrix::from_columns(&cols), 1e-10);
    RealSubspace {
        n: a.n,
        basis: q,
        tol,
    }
}

pub fn real_span(n: usize, vectors: &[RealVectorRep], tol: f64) -> Result<RealSubspace> {
    if vectors.is_empty() {
        return Ok(RealSubspace::zero(n, tol));
    }
    if let Some(bad) = vectors.iter().find(|v| v.n != n) {
        return Err(Error::Dimension(format!(
            "vector of complex dimension {} in a span over C^{n}",
            bad.n
        )));
    }
    let a = RMatrix::from_columns(&vectors.iter().map(|v| v.data.clone()).collect::<Vec<_>>());
    let (q, _) = orthonormal_columns(&a, tol);
    Ok(RealSubspace { n, basis: q, tol })
}

pub fn orth_complement(s: &RealSubspace) -> RealSubspace {
    RealSubspace {
        n: s.n,
        basis: complement_of_orthonormal(&s.basis, 2 * s.n),
        tol: s.tol,
    }
}

/// Largest subspace contained in both `a` and `b`.
///
/// Directions of `a` whose sine of principal angle to `b` is at most
/// `max(a.tol, b.tol)` are kept; the smaller subspace is scanned so the
/// result does not depend on argument order.
pub fn intersect(a: &RealSubspace, b: &RealSubspace) -> RealSubspace {
    assert_eq!(a.n, b.n, "intersect: ambient dimensions differ");
    let tol = a.tol.max(b.tol);
    let (small, large) = if a.dim() <= b.dim() { (a, b) } else { (b, a) };
    if small.dim() == 0 {
        return RealSubspace::zero(a.n, tol);
    }
    // residual of small's basis against large
    let resid = &small.basis - &large.basis * (large.basis.transpose() * &small.basis);
    let (_, sv, vt) = checked_svd(&resid);
    let k = small.dim();
    // full right-singular basis of R^k: thin V^T has min(2n, k) = k rows here
    let mut keep = Vec::new();
    for i in 0..sv.len() {
        if sv[i] <= tol {
            keep.push(vt.row(i).transpose());
        }
    }
    // rows of V^T beyond the thin factor are absent only when 2n < k, impossible
    debug_assert!(vt.nrows() == k);
    if keep.is_empty() {
        return RealSubspace::zero(a.n, tol);
    }
    let coeffs = RMatrix::from_columns(&keep);
    let raw = &small.basis * coeffs;
    let (q, _) = orthonormal_columns(&raw, 1e-12);
    RealSubspace {
        n: a.n,
        basis: q,
        tol,
    }
}

/// `{z : Im<z, s> = 0 for all s in S}`, the orthogonal complement of `J S`.
pub fn symplectic_complement(s: &RealSubspace) -> RealSubspace {
    let js = apply_j(&s.basis);
    RealSubspace {
        n: s.n,
        basis: complement_of_orthonormal(&js, 2 * s.n),
        tol: s.tol,
    }
}

/// Sines of the principal angles between `a` and `b`, measured from `a`.
pub fn principal_angle_sines(a: &RealSubspace, b: &RealSubspace) -> Vec<f64> {
    if a.dim() == 0 {
        return vec![];
    }
    let resid = &a.basis - &b.basis * (b.basis.transpose() * &a.basis);
    singular_values(&resid)
}

/// True iff dimensions agree and the largest principal angle is below `tol`.
pub fn subspace_equal(a: &RealSubspace, b: &RealSubspace, tol: f64) -> bool {
    if a.n != b.n || a.dim() != b.dim() {
        return false;
    }
    principal_angle_sines(a, b).first().is_none_or(|&s| s < tol)
}

/// Column `k` of the real identity as a complex vector: `e_k` for `k < n`,
/// `i e_{k-n}` otherwise.
pub fn real_unit(n: usize, k: usize) -> CVector {
    let mut z = CVector::zeros(n);
    if k < n {
        z[k] = Complex64::new(1.0, 0.0);
    } else {
        z[k - n] = Complex64::new(0.0, 1.0);
    }
    z
}

pub(crate) fn matrix_to_rows(m: &RMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>], ncols: usize) -> Result<RMatrix> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    n: usize,
    dim: usize,
    tol: f64,
    /// `2n x dim`, row-major.
    basis: Vec<Vec<f64>>,
}

impl Serialize for RealSubspace {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceRepr {
            n: self.n,
            dim: self.dim(),
            tol: self.tol,
            basis: matrix_to_rows(&self.basis),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for RealSubspace {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = SubspaceRepr::deserialize(de)?;
        if r.basis.len() != 2 * r.n {
            return Err(D::Error::custom("basis must have 2n rows"));
        }
        let basis = rows_to_matrix(&r.basis, r.dim).map_err(D::Error::custom)?;
        RealSubspace::from_orthonormal(basis, r.tol).map_err(D::Error::custom)
    }
}
