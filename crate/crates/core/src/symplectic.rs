//! Symplectic Gram-Schmidt, Bogoliubov normal form and Kraus mode reduction.

use serde::{Deserialize, Serialize};

use crate::dfa::{build_bbh, Decomposition};
use crate::error::{Error, Result};
use crate::model::GaussianModel;
use crate::real_linear::{
    embed, embed_inv, intersect, j_matrix, matrix_to_rows, orthonormal_columns, real_span,
    rows_to_matrix, subspace_sum, symplectic_complement, symplectic_form, symplectic_form_real,
    RealSubspace,
};
use crate::tolerances::Tolerances;
use crate::{c, CMatrix, CVector, RMatrix, RVector, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubspaceKind {
    /// The symplectic form is nondegenerate on the subspace.
    Symplectic,
    /// The symplectic form vanishes on the subspace.
    Isotropic,
    /// Anything: split into a radical and a symplectic part.
    Mixed,
}

/// Pairs `(x, y)` with `Im<x, y> = 1` plus isotropic vectors, all mutually
/// symplectically orthogonal otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticBasis {
    pub pairs: Vec<(CVector, CVector)>,
    pub isotropic: Vec<CVector>,
}

impl SymplecticBasis {
    pub fn len(&self) -> usize {
        2 * self.pairs.len() + self.isotropic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vectors(&self) -> Vec<CVector> {
        let mut out: Vec<CVector> = self
            .pairs
            .iter()
            .flat_map(|(x, y)| [x.clone(), y.clone()])
            .collect();
        out.extend(self.isotropic.iter().cloned());
        out
    }

    /// Largest deviation from the defining pairing relations.
    pub fn defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let all: Vec<(usize, &CVector)> = self
            .pairs
            .iter()
            .enumerate()
            .flat_map(|(k, (x, y))| [(2 * k, x), (2 * k + 1, y)])
            .chain(
                self.isotropic
                    .iter()
                    .enumerate()
                    .map(|(k, z)| (2 * self.pairs.len() + k, z)),
            )
            .collect();
        for &(i, x) in &all {
            for &(j, y) in &all {
                let expected = if i % 2 == 0 && j == i + 1 && i < 2 * self.pairs.len() {
                    1.0
                } else if j % 2 == 0 && i == j + 1 && j < 2 * self.pairs.len() {
                    -1.0
                } else {
                    0.0
                };
                worst = worst.max((symplectic_form(x, y) - expected).abs());
            }
        }
        worst
    }
}

fn witness(z: &CVector) -> Vec<[f64; 2]> {
    z.iter().map(|x| [x.re, x.im]).collect()
}

/// Largest pairing among basis vectors, with the offending vector.
fn max_pairing(basis: &RMatrix) -> (f64, usize) {
    let mut best = (0.0, 0);
    for i in 0..basis.ncols() {
        for j in 0..basis.ncols() {
            let w = symplectic_form_real(basis.column(i).as_slice(), basis.column(j).as_slice()).abs();
            if w > best.0 {
                best = (w, i);
            }
        }
    }
    best
}

/// Pairs spanning a symplectic subspace given by the columns of `vecs`.
fn pair_up(mut vecs: Vec<RVector>, tol: f64) -> Result<Vec<(RVector, RVector)>> {
    let n2 = vecs.first().map_or(0, |v| v.len());
    let mut pairs = Vec::new();
    while !vecs.is_empty() {
        if vecs.len() == 1 {
            let z = embed_inv(&vecs[0]);
            return Err(Error::AssumptionViolated {
                assumed: SubspaceKind::Symplectic,
                witness: witness(&z),
                pairing: 0.0,
            });
        }
        // z1: largest norm, lowest index on ties
        let mut i1 = 0;
        for (i, v) in vecs.iter().enumerate() {
            if v.norm() > vecs[i1].norm() * (1.0 + 1e-12) {
                i1 = i;
            }
        }
        let z1 = vecs[i1].clone();
        let mut i2 = usize::MAX;
        let mut best = 0.0;
        for (i, v) in vecs.iter().enumerate() {
            if i == i1 {
                continue;
            }
            let w = symplectic_form_real(z1.as_slice(), v.as_slice());
            if w.abs() > best {
                best = w.abs();
                i2 = i;
            }
        }
        if i2 == usize::MAX || best <= tol * z1.norm() {
            return Err(Error::AssumptionViolated {
                assumed: SubspaceKind::Symplectic,
                witness: witness(&embed_inv(&z1)),
                pairing: best,
            });
        }
        let w12 = symplectic_form_real(z1.as_slice(), vecs[i2].as_slice());
        let z2 = &vecs[i2] / w12;
        let rest: Vec<RVector> = vecs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != i1 && i != i2)
            .map(|(_, w)| {
                let a = symplectic_form_real(w.as_slice(), z1.as_slice());
                let b = symplectic_form_real(w.as_slice(), z2.as_slice());
                w + &z2 * a - &z1 * b
            })
            .collect();
        pairs.push((z1, z2));
        if rest.is_empty() {
            break;
        }
        let (q, _) = orthonormal_columns(&RMatrix::from_columns(&rest), tol);
        // a symplectic remainder never has dimension one
        if q.ncols() == 1 {
            return Err(Error::AssumptionViolated {
                assumed: SubspaceKind::Symplectic,
                witness: witness(&embed_inv(&q.column(0).into_owned())),
                pairing: 0.0,
            });
        }
        vecs = q.column_iter().map(|c| c.into_owned()).collect();
        debug_assert!(vecs.iter().all(|v| v.len() == n2));
    }
    Ok(pairs)
}

fn to_pairs(p: Vec<(RVector, RVector)>) -> Vec<(CVector, CVector)> {
    p.into_iter().map(|(x, y)| (embed_inv(&x), embed_inv(&y))).collect()
}

/// Symplectic Gram-Schmidt on a real subspace of `C^n`.
///
/// Starts from the deterministic canonical basis; the first vector of each
/// pair is the remaining vector of largest norm, its partner the one pairing
/// most strongly with it, rescaled so that `Im<x, y> = 1`.
pub fn symplectic_gram_schmidt(s: &RealSubspace, assume: SubspaceKind) -> Result<SymplecticBasis> {
    let tol = s.tol().max(1e-12);
    match assume {
        SubspaceKind::Isotropic => {
            let (w, i) = max_pairing(s.basis());
            if w > tol {
                return Err(Error::AssumptionViolated {
                    assumed: assume,
                    witness: witness(&s.vectors()[i]),
                    pairing: w,
                });
            }
            let cb = s.canonical_basis();
            Ok(SymplecticBasis {
                pairs: vec![],
                isotropic: cb.column_iter().map(|c| embed_inv(&c.into_owned())).collect(),
            })
        }
        SubspaceKind::Symplectic => {
            let radical = intersect(s, &symplectic_complement(s));
            if let Some(z) = radical.vectors().first() {
                return Err(Error::AssumptionViolated {
                    assumed: assume,
                    witness: witness(z),
                    pairing: 0.0,
                });
            }
            let cb = s.canonical_basis();
            let pairs = pair_up(cb.column_iter().map(|c| c.into_owned()).collect(), tol)?;
            Ok(SymplecticBasis {
                pairs: to_pairs(pairs),
                isotropic: vec![],
            })
        }
        SubspaceKind::Mixed => {
            let radical = intersect(s, &symplectic_complement(s));
            let rest = crate::real_linear::complement_within(s, &radical);
            let pairs = if rest.is_zero() {
                vec![]
            } else {
                let cb = rest.canonical_basis();
                pair_up(cb.column_iter().map(|c| c.into_owned()).collect(), tol)?
            };
            let cb = radical.canonical_basis();
            Ok(SymplecticBasis {
                pairs: to_pairs(pairs),
                isotropic: cb.column_iter().map(|c| embed_inv(&c.into_owned())).collect(),
            })
        }
    }
}

/// A real symplectic matrix `B` (`B^T J B = J`) on `R^{2d}`, mapping the
/// decomposition frame to the standard one: `Mr` pairs to `(e_j, i e_j)` for
/// the first `d_r` modes, the `Mc` basis to the next `d_c` unit vectors, and
/// `Mf` pairs to the last `d_f` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMap {
    matrix: RMatrix,
    inverse: RMatrix,
    pub d_r: usize,
    pub d_c: usize,
    pub d_f: usize,
}

impl BogoliubovMap {
    /// Builds `B` from the image frame: column `j` of `B^{-1}` is the vector
    /// sent to `e_j`, column `d + j` the one sent to `i e_j`.
    pub fn from_symplectic_basis(firsts: &[CVector], seconds: &[CVector], d_r: usize, d_c: usize, d_f: usize) -> Result<Self> {
        let d = firsts.len();
        if seconds.len() != d || d != d_r + d_c + d_f {
            return Err(Error::Dimension(format!(
                "need {} vector pairs, got {} and {}",
                d_r + d_c + d_f,
                d,
                seconds.len()
            )));
        }
        let mut s = RMatrix::zeros(2 * d, 2 * d);
        for j in 0..d {
            s.set_column(j, embed(&firsts[j]).data());
            s.set_column(d + j, embed(&seconds[j]).data());
        }
        let inverse = s.clone();
        let matrix = s
            .try_inverse()
            .ok_or_else(|| Error::Dimension("frame is singular".into()))?;
        let map = BogoliubovMap {
            matrix,
            inverse,
            d_r,
            d_c,
            d_f,
        };
        let defect = map.symplectic_defect();
        let scale = map.matrix.camax().max(1.0).powi(2);
        if defect > 1e-8 * scale {
            return Err(Error::Dimension(format!("frame is not symplectic (defect {defect:e})")));
        }
        Ok(map)
    }

    pub fn identity(d: usize) -> Self {
        BogoliubovMap {
            matrix: RMatrix::identity(2 * d, 2 * d),
            inverse: RMatrix::identity(2 * d, 2 * d),
            d_r: 0,
            d_c: 0,
            d_f: d,
        }
    }

    pub fn d(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &RMatrix {
        &self.inverse
    }

    pub fn apply(&self, z: &CVector) -> CVector {
        embed_inv(&(&self.matrix * embed(z).into_data()))
    }

    /// `max |B^T J B - J|`.
    pub fn symplectic_defect(&self) -> f64 {
        let j = j_matrix(self.d());
        (self.matrix.transpose() * &j * &self.matrix - j).camax()
    }

    pub fn source(&self) -> String {
        "Mr ⊕ Mc ⊕ Mf with symplectic partners".to_string()
    }

    pub fn target(&self) -> String {
        format!(
            "C^{} ⊕ C^{} ⊕ C^{} in standard coordinates",
            self.d_r, self.d_c, self.d_f
        )
    }
}

#[derive(Serialize, Deserialize)]
struct BogoliubovRepr {
    source: String,
    target: String,
    d_r: usize,
    d_c: usize,
    d_f: usize,
    matrix: Vec<Vec<f64>>,
}

impl Serialize for BogoliubovMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BogoliubovRepr {
            source: self.source(),
            target: self.target(),
            d_r: self.d_r,
            d_c: self.d_c,
            d_f: self.d_f,
            matrix: matrix_to_rows(&self.matrix),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BogoliubovMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = BogoliubovRepr::deserialize(d)?;
        let n = r.matrix.len();
        let matrix = rows_to_matrix(&r.matrix, n).map_err(D::Error::custom)?;
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| D::Error::custom("singular Bogoliubov matrix"))?;
        Ok(BogoliubovMap {
            matrix,
            inverse,
            d_r: r.d_r,
            d_c: r.d_c,
            d_f: r.d_f,
        })
    }
}

/// Projects `x` onto the subspace.
fn project(s: &RealSubspace, x: &RVector) -> RVector {
    s.basis() * (s.basis().transpose() * x)
}

/// Completes the decomposition to a full symplectic frame and returns the
/// map sending it to the standard basis.
pub fn bogoliubov_matrix(dec: &Decomposition, _tol: &Tolerances) -> Result<BogoliubovMap> {
    let d = dec.d;
    let r_pairs = symplectic_gram_schmidt(&dec.mr, SubspaceKind::Symplectic)?.pairs;
    let f_pairs = symplectic_gram_schmidt(&dec.mf, SubspaceKind::Symplectic)?.pairs;
    let iso: Vec<RVector> = dec
        .mc
        .canonical_basis()
        .column_iter()
        .map(|c| c.into_owned())
        .collect();

    // partners for the isotropic vectors inside (Mr + Mf)'
    let mut w = symplectic_complement(&subspace_sum(&dec.mr, &dec.mf));
    let mut partners: Vec<RVector> = Vec::with_capacity(iso.len());
    for (jdx, cj) in iso.iter().enumerate() {
        let others: Vec<CVector> = iso[jdx + 1..].iter().map(embed_inv).collect();
        let t = if others.is_empty() {
            w.clone()
        } else {
            let others = RealSubspace::span_of(d, &others, 1e-12);
            intersect(&w, &symplectic_complement(&others))
        };
        // the direction in T pairing most strongly with c_j
        let jc = j_matrix(d) * cj;
        let cand = project(&t, &jc);
        let pairing = symplectic_form_real(cj.as_slice(), cand.as_slice());
        if pairing.abs() < 1e-10 {
            return Err(Error::AssumptionViolated {
                assumed: SubspaceKind::Isotropic,
                witness: witness(&embed_inv(cj)),
                pairing,
            });
        }
        let f = cand / pairing;
        let pair_space = real_span(d, &[embed(&embed_inv(cj)), embed(&embed_inv(&f))], 1e-12)?;
        w = intersect(&w, &symplectic_complement(&pair_space));
        partners.push(f);
    }

    let mut firsts = Vec::with_capacity(d);
    let mut seconds = Vec::with_capacity(d);
    for (x, y) in &r_pairs {
        firsts.push(x.clone());
        seconds.push(y.clone());
    }
    for (cj, fj) in iso.iter().zip(&partners) {
        firsts.push(embed_inv(cj));
        seconds.push(embed_inv(fj));
    }
    for (x, y) in &f_pairs {
        firsts.push(x.clone());
        seconds.push(y.clone());
    }
    if firsts.len() != d {
        return Err(Error::Dimension(format!(
            "normal form has {} modes, expected {d}",
            firsts.len()
        )));
    }
    BogoliubovMap::from_symplectic_basis(&firsts, &seconds, dec.d_r, dec.d_c, dec.d_f)
}

/// The complex-linear action on `[conj(v); u]` induced by conjugating
/// `a(v) + a^+(u)` with the unitary implementing `B`.
pub fn coefficient_map(b: &BogoliubovMap) -> CMatrix {
    let d = b.d();
    let half = c(0.5, 0.0);
    let apply = |v: &CVector, u: &CVector| -> (CVector, CVector) {
        // a(v) + a^+(u) = G(z2) - i G(z1), G(z) = a^+(z) - a(z)
        let z1 = (v + u) * (I * half);
        let z2 = (u - v) * half;
        let z1b = b.apply(&z1);
        let z2b = b.apply(&z2);
        let vp = -(&z1b * I) - &z2b;
        let up = -(&z1b * I) + &z2b;
        (vp, up)
    };
    let mut t = CMatrix::zeros(2 * d, 2 * d);
    for k in 0..2 * d {
        // coefficient vector e_k = [conj(v); u]
        let mut v = CVector::zeros(d);
        let mut u = CVector::zeros(d);
        if k < d {
            v[k] = c(1.0, 0.0);
        } else {
            u[k - d] = c(1.0, 0.0);
        }
        let (vp, up) = apply(&v, &u);
        for r in 0..d {
            t[(r, k)] = vp[r].conj();
            t[(d + r, k)] = up[r];
        }
    }
    t
}

/// Rewrites the model in the normal-form modes: Kraus rows through the
/// coefficient map, `(Omega, kappa)` by conjugating the commutator matrix,
/// `zeta` through the coefficient map of the linear part of `H`.
pub fn reduce_kraus(model: &GaussianModel, b: &BogoliubovMap) -> Result<GaussianModel> {
    let d = model.d();
    if b.d() != d {
        return Err(Error::Dimension(format!("map acts on C^{} but the model has d = {d}", b.d())));
    }
    let t = coefficient_map(b);
    let t_inv = t
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Dimension("coefficient map is singular".into()))?;
    let m = model.m();
    let mut v = CMatrix::zeros(m, d);
    let mut u = CMatrix::zeros(m, d);
    for l in 0..m {
        let vr = model.v_row(l);
        let ur = model.u_row(l);
        let g = CVector::from_fn(2 * d, |k, _| if k < d { vr[k].conj() } else { ur[k - d] });
        let gp = &t * g;
        for k in 0..d {
            v[(l, k)] = gp[k].conj();
            u[(l, k)] = gp[d + k];
        }
    }

    let hp = &t * build_bbh(model) * &t_inv;
    let omega = hp.view((d, d), (d, d)).into_owned();
    let kappa = -hp.view((d, 0), (d, d)).into_owned();
    let omega = (&omega + omega.adjoint()) * c(0.5, 0.0);
    let kappa = (&kappa + kappa.transpose()) * c(0.5, 0.0);
    let zeta = model.zeta();
    let lin = CVector::from_fn(2 * d, |k, _| if k < d { zeta[k].conj() * 0.5 } else { zeta[k - d] * 0.5 });
    let linp = &t * lin;
    let zeta = CVector::from_fn(d, |k, _| linp[d + k] * 2.0);
    GaussianModel::new(omega, kappa, zeta, v, u)
}

/// Largest `|V|, |U|` entry outside the first `k` columns.
pub fn support_defect(model: &GaussianModel, k: usize) -> f64 {
    let d = model.d();
    let mut worst: f64 = 0.0;
    for l in 0..model.m() {
        for col in k..d {
            worst = worst.max(model.v()[(l, col)].norm()).max(model.u()[(l, col)].norm());
        }
    }
    worst
}
