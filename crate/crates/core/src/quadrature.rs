//! Adaptive Gauss-Kronrod (7/15) integration of vector-valued integrands.

use crate::error::{Error, Result};

// Kronrod 15-point nodes on [0, 1] (positive half, node 0 is the centre)
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss 7-point weights for nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Relative tolerance against the integral of `|f|`.
    pub tol: f64,
    /// Absolute error below which any estimate is accepted.
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-10,
            abs_tol: 1e-15,
            max_subdivisions: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    abs: f64,
    error: f64,
}

fn gk15<F>(f: &mut F, a: f64, b: f64, dim: usize) -> Segment
where
    F: FnMut(f64) -> Vec<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut abs = 0.0;
    let mut add = |x: f64, wk: f64, wg: Option<f64>, kron: &mut [f64], gauss: &mut [f64]| {
        let y = f(x);
        debug_assert_eq!(y.len(), dim);
        let mut norm = 0.0;
        for i in 0..dim {
            kron[i] += wk * y[i];
            if let Some(w) = wg {
                gauss[i] += w * y[i];
            }
            norm += y[i].abs();
        }
        norm * wk
    };
    abs += add(centre, WGK[7], Some(WG[3]), &mut kron, &mut gauss);
    for j in 0..7 {
        let wg = if j % 2 == 1 { Some(WG[j / 2]) } else { None };
        let dx = half * XGK[j];
        abs += add(centre - dx, WGK[j], wg, &mut kron, &mut gauss);
        abs += add(centre + dx, WGK[j], wg, &mut kron, &mut gauss);
    }
    let error = kron
        .iter()
        .zip(&gauss)
        .map(|(k, g)| (k - g).abs())
        .fold(0.0, f64::max)
        * half.abs();
    for k in kron.iter_mut() {
        *k *= half;
    }
    Segment {
        a,
        b,
        value: kron,
        abs: abs * half.abs(),
        error,
    }
}

/// Integrates `f` over `[a, b]`, bisecting the segment with the largest error
/// estimate until the total estimate is below `tol * ∫|f|` (componentwise
/// max). Integrals that vanish identically converge immediately.
pub fn integrate<F>(mut f: F, a: f64, b: f64, dim: usize, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Vec<f64>,
{
    if a == b {
        return Ok(QuadResult {
            value: vec![0.0; dim],
            error: 0.0,
            subdivisions: 0,
            evaluations: 0,
        });
    }
    let mut segs = vec![gk15(&mut f, a, b, dim)];
    let mut evaluations = 15;
    loop {
        let error: f64 = segs.iter().map(|s| s.error).sum();
        let abs: f64 = segs.iter().map(|s| s.abs).sum();
        // the second test is the roundoff floor, where bisection cannot help
        if error <= opts.tol * abs || error <= 50.0 * f64::EPSILON * abs || error <= opts.abs_tol {
            let mut value = vec![0.0; dim];
            for s in &segs {
                for i in 0..dim {
                    value[i] += s.value[i];
                }
            }
            return Ok(QuadResult {
                value,
                error,
                subdivisions: segs.len() - 1,
                evaluations,
            });
        }
        if segs.len() > opts.max_subdivisions {
            return Err(Error::QuadratureNotConverged {
                error,
                subdivisions: segs.len() - 1,
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segs.push(gk15(&mut f, s.a, mid, dim));
        segs.push(gk15(&mut f, mid, s.b, dim));
        evaluations += 30;
    }
}
