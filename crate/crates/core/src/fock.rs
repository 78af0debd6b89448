//! Brute-force reference on a truncated Fock basis.
//!
//! Basis vectors `e(n_1, ..., n_d)` with `n_j < N_j` are ordered
//! lexicographically, mode 1 most significant. All identities only hold
//! away from the cutoff, so comparisons are restricted to a [`Sector`] of
//! low occupation numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::GaussianModel;
use crate::tolerances::Tolerances;
use crate::weyl::evolve_weyl;
use crate::{c, CMatrix, CVector, Complex64};

/// A dense matrix on the truncated basis, tagged with its cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub cutoffs: Vec<usize>,
    pub mat: CMatrix,
}

impl TruncatedOperator {
    pub fn new(cutoffs: &[usize], mat: CMatrix) -> Result<Self> {
        let n = total_dim(cutoffs);
        if mat.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "operator must be {n}x{n} for cutoffs {cutoffs:?}, got {:?}",
                mat.shape()
            )));
        }
        Ok(TruncatedOperator {
            cutoffs: cutoffs.to_vec(),
            mat,
        })
    }

    pub fn identity(cutoffs: &[usize]) -> Self {
        let n = total_dim(cutoffs);
        TruncatedOperator {
            cutoffs: cutoffs.to_vec(),
            mat: CMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn adjoint(&self) -> Self {
        TruncatedOperator {
            cutoffs: self.cutoffs.clone(),
            mat: self.mat.adjoint(),
        }
    }
}

pub fn total_dim(cutoffs: &[usize]) -> usize {
    cutoffs.iter().product()
}

/// Occupation numbers of basis index `idx`.
pub fn occupations(cutoffs: &[usize], mut idx: usize) -> Vec<usize> {
    let mut occ = vec![0; cutoffs.len()];
    for j in (0..cutoffs.len()).rev() {
        occ[j] = idx % cutoffs[j];
        idx /= cutoffs[j];
    }
    occ
}

pub fn basis_index(cutoffs: &[usize], occ: &[usize]) -> usize {
    occ.iter().zip(cutoffs).fold(0, |acc, (&n, &nc)| acc * nc + n)
}

/// Row-compressed sparse complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    n: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    pub fn zeros(n: usize) -> Self {
        SparseOp {
            n,
            rows: vec![vec![]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseOp {
            n,
            rows: (0..n).map(|i| vec![(i, c(1.0, 0.0))]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    fn from_triplets(n: usize, mut trip: Vec<(usize, usize, Complex64)>) -> Self {
        trip.sort_by_key(|&(r, col, _)| (r, col));
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![vec![]; n];
        for (r, col, v) in trip {
            match rows[r].last_mut() {
                Some((lc, lv)) if *lc == col => *lv += v,
                _ => rows[r].push((col, v)),
            }
        }
        for r in rows.iter_mut() {
            r.retain(|&(_, v)| v != Complex64::ZERO);
        }
        SparseOp { n, rows }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let mut trip = vec![];
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                if m[(r, col)] != Complex64::ZERO {
                    trip.push((r, col, m[(r, col)]));
                }
            }
        }
        SparseOp::from_triplets(m.nrows(), trip)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for (r, row) in self.rows.iter().enumerate() {
            for &(col, v) in row {
                m[(r, col)] += v;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut trip = vec![];
        for (r, row) in self.rows.iter().enumerate() {
            for &(col, v) in row {
                trip.push((col, r, v.conj()));
            }
        }
        SparseOp::from_triplets(self.n, trip)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        SparseOp {
            n: self.n,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(col, v)| (col, v * s)).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &SparseOp) -> Self {
        let mut trip = vec![];
        for op in [self, other] {
            for (r, row) in op.rows.iter().enumerate() {
                for &(col, v) in row {
                    trip.push((r, col, v));
                }
            }
        }
        SparseOp::from_triplets(self.n, trip)
    }

    pub fn mul(&self, other: &SparseOp) -> Self {
        let mut trip = vec![];
        for (r, row) in self.rows.iter().enumerate() {
            for &(k, a) in row {
                for &(col, b) in &other.rows[k] {
                    trip.push((r, col, a * b));
                }
            }
        }
        SparseOp::from_triplets(self.n, trip)
    }

    /// `self * x`.
    pub fn mul_dense(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, x.ncols());
        for j in 0..x.ncols() {
            let xc = x.column(j);
            let xs = xc.as_slice();
            let mut oc = out.column_mut(j);
            for (r, row) in self.rows.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for &(k, a) in row {
                    acc += a * xs[k];
                }
                oc[r] = acc;
            }
        }
        out
    }

    /// `x * self`.
    pub fn dense_mul(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.nrows(), self.n);
        // (x A)_{:, col} = sum_k A_{k, col} x_{:, k}
        for (k, row) in self.rows.iter().enumerate() {
            let xk = x.column(k);
            for &(col, a) in row {
                out.column_mut(col).axpy(a, &xk, c(1.0, 0.0));
            }
        }
        out
    }
}

fn single_mode_annihilation(n: usize) -> Vec<(usize, usize, Complex64)> {
    (1..n).map(|k| (k - 1, k, c((k as f64).sqrt(), 0.0))).collect()
}

/// Sparse `a_j` for every mode.
pub fn ladder_sparse(d: usize, cutoffs: &[usize]) -> Vec<SparseOp> {
    assert_eq!(cutoffs.len(), d, "one cutoff per mode");
    let n = total_dim(cutoffs);
    (0..d)
        .map(|j| {
            let mut trip = vec![];
            for idx in 0..n {
                let occ = occupations(cutoffs, idx);
                if occ[j] > 0 {
                    let mut lower = occ.clone();
                    lower[j] -= 1;
                    trip.push((basis_index(cutoffs, &lower), idx, c((occ[j] as f64).sqrt(), 0.0)));
                }
            }
            SparseOp::from_triplets(n, trip)
        })
        .collect()
}

/// Dense annihilation operators `a_1, ..., a_d`.
pub fn ladder(d: usize, cutoffs: &[usize]) -> Vec<TruncatedOperator> {
    ladder_sparse(d, cutoffs)
        .into_iter()
        .map(|a| TruncatedOperator {
            cutoffs: cutoffs.to_vec(),
            mat: a.to_dense(),
        })
        .collect()
}

/// Truncated `H`, `L_l`, `K = sum L_l^* L_l` and `G = -K/2 - iH`.
#[derive(Debug, Clone)]
pub struct Generator {
    cutoffs: Vec<usize>,
    h: SparseOp,
    ls: Vec<SparseOp>,
    ls_adj: Vec<SparseOp>,
    g: SparseOp,
    g_adj: SparseOp,
}

impl Generator {
    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn hamiltonian(&self) -> &SparseOp {
        &self.h
    }

    pub fn kraus(&self) -> &[SparseOp] {
        &self.ls
    }

    pub fn g(&self) -> &SparseOp {
        &self.g
    }

    /// `G^* x + x G + sum L^* x L`.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = self.g_adj.mul_dense(x) + self.g.dense_mul(x);
        for (l, la) in self.ls.iter().zip(&self.ls_adj) {
            out += la.mul_dense(&l.dense_mul(x));
        }
        out
    }
}

pub fn assemble(model: &GaussianModel, cutoffs: &[usize]) -> Generator {
    let d = model.d();
    let n = total_dim(cutoffs);
    let a = ladder_sparse(d, cutoffs);
    let ad: Vec<SparseOp> = a.iter().map(|x| x.adjoint()).collect();
    let (om, ka, ze) = (model.omega(), model.kappa(), model.zeta());
    let mut h = SparseOp::zeros(n);
    let half = c(0.5, 0.0);
    for j in 0..d {
        for k in 0..d {
            if om[(j, k)] != Complex64::ZERO {
                h = h.add(&ad[j].mul(&a[k]).scale(om[(j, k)]));
            }
            if ka[(j, k)] != Complex64::ZERO {
                h = h.add(&ad[j].mul(&ad[k]).scale(ka[(j, k)] * half));
                h = h.add(&a[j].mul(&a[k]).scale(ka[(j, k)].conj() * half));
            }
        }
        if ze[j] != Complex64::ZERO {
            h = h.add(&ad[j].scale(ze[j] * half));
            h = h.add(&a[j].scale(ze[j].conj() * half));
        }
    }
    let mut ls = vec![];
    for l in 0..model.m() {
        let mut op = SparseOp::zeros(n);
        for k in 0..d {
            let v = model.v()[(l, k)];
            let u = model.u()[(l, k)];
            if v != Complex64::ZERO {
                op = op.add(&a[k].scale(v.conj()));
            }
            if u != Complex64::ZERO {
                op = op.add(&ad[k].scale(u));
            }
        }
        ls.push(op);
    }
    let ls_adj: Vec<SparseOp> = ls.iter().map(|l| l.adjoint()).collect();
    let mut k = SparseOp::zeros(n);
    for (l, la) in ls.iter().zip(&ls_adj) {
        k = k.add(&la.mul(l));
    }
    let g = k.scale(c(-0.5, 0.0)).add(&h.scale(c(0.0, -1.0)));
    let g_adj = g.adjoint();
    Generator {
        cutoffs: cutoffs.to_vec(),
        h,
        ls,
        ls_adj,
        g,
        g_adj,
    }
}

/// Box of occupation numbers `n_j <= bounds[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    cutoffs: Vec<usize>,
    bounds: Vec<usize>,
}

impl Sector {
    /// Uniform bound on every mode.
    pub fn new(cutoffs: &[usize], bound: usize) -> Self {
        Sector {
            cutoffs: cutoffs.to_vec(),
            bounds: cutoffs.iter().map(|&nc| bound.min(nc - 1)).collect(),
        }
    }

    /// Largest occupation kept, per mode.
    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    /// Default interior: occupation at most a third of the cutoff.
    pub fn interior(cutoffs: &[usize]) -> Self {
        Sector {
            cutoffs: cutoffs.to_vec(),
            bounds: cutoffs.iter().map(|&nc| nc / 3).collect(),
        }
    }

    /// Occupations at least `margin` levels below the top level.
    pub fn below_cutoff(cutoffs: &[usize], margin: usize) -> Self {
        Sector {
            cutoffs: cutoffs.to_vec(),
            bounds: cutoffs.iter().map(|&nc| nc.saturating_sub(1 + margin)).collect(),
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..total_dim(&self.cutoffs))
            .filter(|&i| {
                occupations(&self.cutoffs, i)
                    .iter()
                    .zip(&self.bounds)
                    .all(|(n, b)| n <= b)
            })
            .collect()
    }

    /// The block `P m P` as a smaller dense matrix.
    pub fn restrict(&self, m: &CMatrix) -> CMatrix {
        let idx = self.indices();
        CMatrix::from_fn(idx.len(), idx.len(), |r, col| m[(idx[r], idx[col])])
    }
}

fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    crate::real_linear::singular_values(m)[0]
}

/// `W(z) = exp(sum z_j a_j^+ - conj(z_j) a_j)`, exponentiated mode by mode.
pub fn weyl_matrix(z: &CVector, cutoffs: &[usize]) -> TruncatedOperator {
    assert_eq!(z.len(), cutoffs.len(), "one amplitude per mode");
    let mut out = CMatrix::identity(1, 1);
    for (j, &nc) in cutoffs.iter().enumerate() {
        let a = SparseOp::from_triplets(nc, single_mode_annihilation(nc)).to_dense();
        let gen = a.adjoint() * z[j] - a * z[j].conj();
        out = out.kronecker(&gen.exp());
    }
    TruncatedOperator {
        cutoffs: cutoffs.to_vec(),
        mat: out,
    }
}

pub fn lindblad_apply(gen: &Generator, x: &TruncatedOperator) -> TruncatedOperator {
    TruncatedOperator {
        cutoffs: x.cutoffs.clone(),
        mat: gen.apply(&x.mat),
    }
}

// Dormand-Prince 5(4) coefficients
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn lin(terms: &[(f64, &CMatrix)], y: &CMatrix, h: f64) -> CMatrix {
    let mut out = y.clone();
    for &(coef, k) in terms {
        if coef != 0.0 {
            out.zip_apply(k, |o, kv| *o += kv * (coef * h));
        }
    }
    out
}

/// Integrates `dy/ds = f(y)` from 0 to `t` with adaptive Dormand-Prince
/// steps; error is measured entrywise against `tol * (1 + |y|)`.
pub fn dopri5<F>(f: F, y0: &CMatrix, t: f64, tol: f64) -> Result<(CMatrix, OdeStats)>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let mut stats = OdeStats {
        accepted: 0,
        rejected: 0,
    };
    if t == 0.0 {
        return Ok((y0.clone(), stats));
    }
    let mut y = y0.clone();
    let mut s = 0.0;
    let mut k1 = f(&y);
    let scale0 = y.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let slope0 = k1.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut h = if slope0 > 0.0 {
        (0.01 * scale0 / slope0).min(t)
    } else {
        t
    };
    while s < t {
        if s + h > t {
            h = t - s;
        }
        if h < 1e-14 * t.max(1.0) {
            return Err(Error::StepSizeUnderflow { t: s, h });
        }
        let k2 = f(&lin(&[(A21, &k1)], &y, h));
        let k3 = f(&lin(&[(A31, &k1), (A32, &k2)], &y, h));
        let k4 = f(&lin(&[(A41, &k1), (A42, &k2), (A43, &k3)], &y, h));
        let k5 = f(&lin(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &y, h));
        let k6 = f(&lin(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], &y, h));
        let y_new = lin(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], &y, h);
        let k7 = f(&y_new);
        let zero = CMatrix::zeros(y.nrows(), y.ncols());
        let err = lin(&[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)], &zero, h);
        let mut en: f64 = 0.0;
        for ((e, a), b) in err.iter().zip(y.iter()).zip(y_new.iter()) {
            let sc = tol * (1.0 + a.norm().max(b.norm()));
            en = en.max(e.norm() / sc);
        }
        if en <= 1.0 {
            s += h;
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok((y, stats))
}

/// `x(t)` for `dx/ds = L(x)`, `x(0) = x`.
pub fn heisenberg_evolve(gen: &Generator, x: &TruncatedOperator, t: f64, tol: f64) -> Result<TruncatedOperator> {
    if x.cutoffs != gen.cutoffs {
        return Err(Error::Dimension("operator and generator use different cutoffs".into()));
    }
    let (mat, _) = dopri5(|y| gen.apply(y), &x.mat, t, tol)?;
    Ok(TruncatedOperator {
        cutoffs: x.cutoffs.clone(),
        mat,
    })
}

/// `||P (T_t(W^* W) - T_t(W)^* T_t(W)) P||` on the sector.
pub fn multiplicativity_residual(gen: &Generator, z: &CVector, t: f64, sector: &Sector, tol: f64) -> Result<f64> {
    let w = weyl_matrix(z, &gen.cutoffs);
    let wsw = TruncatedOperator {
        cutoffs: w.cutoffs.clone(),
        mat: w.mat.adjoint() * &w.mat,
    };
    let tw = heisenberg_evolve(gen, &w, t, tol)?;
    let twsw = heisenberg_evolve(gen, &wsw, t, tol)?;
    // T_t(W^*) = T_t(W)^* since the generator commutes with the adjoint
    let prod = tw.mat.adjoint() * &tw.mat;
    Ok(spectral_norm(&sector.restrict(&(twsw.mat - prod))))
}

/// `||P (T_t(W(z)) - e^{-damping + i phase} W(e^{tZ} z)) P||` on the sector.
pub fn verify_weyl_formula(model: &GaussianModel, gen: &Generator, z: &CVector, t: f64, sector: &Sector, tol: &Tolerances) -> Result<f64> {
    let w = weyl_matrix(z, &gen.cutoffs);
    let evolved = heisenberg_evolve(gen, &w, t, tol.ode)?;
    let ev = evolve_weyl(model, z, t, tol)?;
    let factor = Complex64::new(-ev.damping, ev.phase).exp();
    let predicted = weyl_matrix(&ev.z_out(), &gen.cutoffs).mat * factor;
    Ok(spectral_norm(&sector.restrict(&(evolved.mat - predicted))))
}

/// Closed form of `L(a_k)`: a first-order polynomial in `a_j, a_j^+` plus
/// a multiple of the identity.
pub fn lindblad_on_ladder_closed_form(model: &GaussianModel, k: usize, cutoffs: &[usize]) -> CMatrix {
    let d = model.d();
    let (v, u) = (model.v(), model.u());
    let half = c(0.5, 0.0);
    let i = crate::I;
    let coef_dag = (u.transpose() * v - v.transpose() * u) * half - model.kappa() * i;
    let coef_a = (u.transpose() * u.map(|x| x.conj()) - v.transpose() * v.map(|x| x.conj())) * half - model.omega() * i;
    let lad = ladder_sparse(d, cutoffs);
    let n = total_dim(cutoffs);
    let mut out = CMatrix::identity(n, n) * (-i * model.zeta()[k] * half);
    for j in 0..d {
        let a = lad[j].to_dense();
        out += a.adjoint() * coef_dag[(k, j)] + a * coef_a[(k, j)];
    }
    out
}

/// Largest interior deviation in the ladder closed form and in the product
/// rule `L(xy) = x L(y) + L(x) y + sum [L, x^*]^* [L, y]` for random
/// low-sector `x, y`.
pub fn verify_generator_on_ladder(model: &GaussianModel, cutoffs: &[usize], seed: u64) -> f64 {
    let gen = assemble(model, cutoffs);
    let d = model.d();
    let sector = Sector::interior(cutoffs);
    let lad = ladder(d, cutoffs);
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let lhs = gen.apply(&lad[k].mat);
        let rhs = lindblad_on_ladder_closed_form(model, k, cutoffs);
        worst = worst.max(sector.restrict(&(lhs - rhs)).camax());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = total_dim(cutoffs);
    let support = Sector::new(cutoffs, cutoffs.iter().min().copied().unwrap_or(1) / 3).indices();
    let mut random_low = || {
        let mut m = CMatrix::zeros(n, n);
        for &r in &support {
            for &col in &support {
                m[(r, col)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        m
    };
    let mut pairs = vec![(lad[0].mat.clone(), lad[0].mat.clone())];
    for _ in 0..2 {
        pairs.push((random_low(), random_low()));
    }
    for (x, y) in pairs {
        let lhs = gen.apply(&(&x * &y));
        let mut rhs = &x * gen.apply(&y) + gen.apply(&x) * &y;
        for l in &gen.ls {
            let ld = l.to_dense();
            let cx = &ld * x.adjoint() - x.adjoint() * &ld;
            let cy = &ld * &y - &y * &ld;
            rhs += cx.adjoint() * cy;
        }
        let scale = 1.0 + x.camax() * y.camax();
        worst = worst.max(sector.restrict(&(lhs - rhs)).camax() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::random;

    #[test]
    fn ladder_examples() {
        let a = &ladder(1, &[3])[0].mat;
        let s2 = 2f64.sqrt();
        let expected = CMatrix::from_row_slice(
            3,
            3,
            &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.), c(s2, 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
        );
        assert!((a - expected).camax() < 1e-15);

        let two = ladder(2, &[2, 2]);
        let a1 = &ladder(1, &[2])[0].mat;
        let id = CMatrix::identity(2, 2);
        assert_eq!(two[0].mat, a1.kronecker(&id));
        assert_eq!(two[1].mat, id.kronecker(a1));
    }

    #[test]
    fn ccr_on_interior() {
        let cutoffs = [6, 5];
        let a = ladder(2, &cutoffs);
        let sector = Sector::below_cutoff(&cutoffs, 1);
        for j in 0..2 {
            for k in 0..2 {
                let comm = &a[j].mat * a[k].mat.adjoint() - a[k].mat.adjoint() * &a[j].mat;
                let expected = if j == k { CMatrix::identity(30, 30) } else { CMatrix::zeros(30, 30) };
                assert!(sector.restrict(&(comm - expected)).camax() < 1e-13);
            }
        }
    }

    #[test]
    fn sparse_products_match_dense() {
        let m = fixtures::q1_with_q1p2();
        let gen = assemble(&m, &[5, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = CMatrix::from_fn(20, 20, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let g = gen.g.to_dense();
        assert!((gen.g.mul_dense(&x) - &g * &x).camax() < 1e-12);
        assert!((gen.g.dense_mul(&x) - &x * &g).camax() < 1e-12);
        let h = gen.hamiltonian().to_dense();
        assert!((&h - h.adjoint()).camax() < 1e-14);
    }

    #[test]
    fn weyl_matrix_properties() {
        let cut = [40];
        assert!((weyl_matrix(&CVector::zeros(1), &cut).mat - CMatrix::identity(40, 40)).camax() < 1e-15);
        for z in [c(0.3, 0.4), c(-1.0, 0.0), c(0.6, -0.8)] {
            let zv = CVector::from_vec(vec![z]);
            let w = weyl_matrix(&zv, &cut).mat;
            let vac = w[(0, 0)];
            assert!((vac - c((-z.norm_sqr() / 2.0).exp(), 0.0)).norm() < 1e-8);
            let unit = w.adjoint() * &w - CMatrix::identity(40, 40);
            assert!(Sector::new(&cut, 20).restrict(&unit).camax() < 1e-8);
        }
        // W(z) W(z') = e^{-i Im<z, z'>} W(z + z')
        let cut = [30, 30];
        let z = CVector::from_vec(vec![c(0.3, 0.1), c(-0.2, 0.4)]);
        let w = CVector::from_vec(vec![c(-0.1, 0.5), c(0.2, 0.2)]);
        let lhs = weyl_matrix(&z, &cut).mat * weyl_matrix(&w, &cut).mat;
        let phase = Complex64::new(0.0, -crate::real_linear::symplectic_form(&z, &w)).exp();
        let rhs = weyl_matrix(&(&z + &w), &cut).mat * phase;
        assert!(Sector::new(&cut, 8).restrict(&(lhs - rhs)).camax() < 1e-7);
    }

    #[test]
    fn identity_preserved_and_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let m = random::random_model(&mut rng, Some(2));
            let cut = [9, 9];
            let gen = assemble(&m, &cut);
            let sector = Sector::interior(&cut);
            let li = gen.apply(&CMatrix::identity(81, 81));
            assert!(sector.restrict(&li).camax() < 1e-10);
            let x = CMatrix::from_fn(81, 81, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let diff = gen.apply(&x).adjoint() - gen.apply(&x.adjoint());
            assert!(sector.restrict(&diff).camax() < 1e-10);
        }
    }

    #[test]
    fn ladder_closed_form_examples() {
        let cut = [12];
        let sector = Sector::interior(&cut);
        let a = &ladder(1, &cut)[0].mat;
        let lossy = fixtures::lossy();
        let la = assemble(&lossy, &cut).apply(a);
        assert!(sector.restrict(&(la + a * c(0.5, 0.0))).camax() < 1e-12);
        // H = omega N adds -i omega a
        let rot = fixtures::damped_rotating();
        let la = assemble(&rot, &cut).apply(a);
        assert!(sector.restrict(&(la + a * c(0.5, 1.0))).camax() < 1e-12);
        assert!(verify_generator_on_ladder(&lossy, &cut, 1) < 1e-12);
    }

    #[test]
    fn lossy_evolution_exact() {
        // the truncated lossy Heisenberg flow maps a to e^{-t/2} a exactly
        let m = fixtures::lossy();
        let cut = [10];
        let gen = assemble(&m, &cut);
        let a = ladder(1, &cut).remove(0);
        let out = heisenberg_evolve(&gen, &a, 1.0, 1e-10).unwrap();
        assert!((out.mat - &a.mat * c((-0.5f64).exp(), 0.0)).camax() < 1e-8);
    }

    #[test]
    fn dopri_scalar_exponential() {
        let y0 = CMatrix::from_element(1, 1, c(1.0, 0.0));
        let (y, stats) = dopri5(|y| y * c(-2.0, 3.0), &y0, 2.0, 1e-10).unwrap();
        let exact = Complex64::new(-4.0, 6.0).exp();
        assert!((y[(0, 0)] - exact).norm() < 1e-8);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn mprime_member_is_multiplicative() {
        let m = fixtures::q1_noise(2);
        let cut = [12, 12];
        let gen = assemble(&m, &cut);
        let sector = Sector::new(&cut, 3);
        let inside = CVector::from_vec(vec![c(0.0, 0.0), c(0.5, 0.0)]);
        let r = multiplicativity_residual(&gen, &inside, 0.3, &sector, 1e-9).unwrap();
        assert!(r < 1e-5, "residual {r}");
        assert_eq!(multiplicativity_residual(&assemble(&fixtures::lossy(), &[10]), &CVector::zeros(1), 0.5, &Sector::new(&[10], 3), 1e-9).unwrap(), 0.0);
    }
}
