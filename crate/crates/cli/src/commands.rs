use std::fmt::Write as _;
use std::path::Path;

use gqms_core::fock::{assemble, multiplicativity_residual, verify_generator_on_ladder, verify_weyl_formula, Sector};
use gqms_core::random::random_model;
use gqms_core::{
    check_minimality, classify_single_kraus, crosscheck_complement, evolve_weyl_grid, kerc_z_invariant, m_space,
    commutator_span, decompose, structure_report, validate, CVector, GaussianModel, RealSubspace, StructureReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::{parse_cvector, parse_list, Config};
use crate::error::{load_error, CliError};

/// What a command prints: the JSON document, and its text rendering.
pub struct Output {
    pub json: Value,
    pub text: String,
    /// Printed to stderr in text mode.
    pub warnings: Vec<String>,
}

fn load(path: &Path) -> Result<GaussianModel, CliError> {
    GaussianModel::from_path(path).map_err(|e| load_error(path, e))
}

/// Loads and validates; rejects invalid models with the full report.
fn load_valid(path: &Path, cfg: &Config) -> Result<GaussianModel, CliError> {
    let model = load(path)?;
    let report = validate(&model, &cfg.tolerances);
    if !report.passed() {
        return Err(CliError::Validation(report));
    }
    Ok(model)
}

fn minimality_warning(model: &GaussianModel, cfg: &Config) -> Vec<String> {
    if check_minimality(model, &cfg.tolerances) {
        vec![]
    } else {
        vec!["warning: GKLS representation is not minimal; [V̄|U] has a nontrivial kernel".into()]
    }
}

pub fn cmd_validate(path: &Path, cfg: &Config) -> Result<Output, CliError> {
    let model = load(path)?;
    let report = validate(&model, &cfg.tolerances);
    if !report.passed() {
        return Err(CliError::Validation(report));
    }
    let minimal = check_minimality(&model, &cfg.tolerances);
    let text = format!(
        "valid: d = {}, m = {}, {}\n",
        model.d(),
        model.m(),
        if minimal { "minimal" } else { "not minimal" }
    );
    Ok(Output {
        json: json!({ "valid": true, "d": model.d(), "m": model.m(), "minimal": minimal, "failures": [] }),
        text,
        warnings: minimality_warning(&model, cfg),
    })
}

fn fmt_coeff(c: f64, first: bool) -> String {
    let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
    let a = c.abs();
    let mag = if (a - 1.0).abs() < 1e-10 {
        String::new()
    } else {
        let s = format!("{a:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        format!("{s} ")
    };
    if first {
        format!("{sign}{mag}")
    } else {
        format!(" {sign} {mag}")
    }
}

/// `z = x + iy` generates `W(z)` through the quadrature `sum x_j p_j - y_j q_j`.
pub fn quadrature_form(z: &CVector) -> String {
    let mut out = String::new();
    for (j, zj) in z.iter().enumerate() {
        for (c, name) in [(zj.re, "p"), (-zj.im, "q")] {
            if c.abs() > 1e-10 {
                let first = out.is_empty();
                write!(out, "{}{name}{}", fmt_coeff(c, first), j + 1).unwrap();
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Basis vectors with the first quadrature coefficient made positive.
fn basis_vectors(s: &RealSubspace) -> Vec<CVector> {
    s.canonical_basis()
        .column_iter()
        .map(|c| {
            let z = gqms_core::embed_inv(&c.into_owned());
            let lead = z.iter().flat_map(|x| [x.re, -x.im]).find(|c| c.abs() > 1e-10).unwrap_or(0.0);
            if lead < 0.0 {
                -z
            } else {
                z
            }
        })
        .collect()
}

pub fn analyze_model(model: &GaussianModel, cfg: &Config) -> Result<StructureReport, CliError> {
    Ok(structure_report(model, &cfg.tolerances)?)
}

pub fn cmd_analyze(path: &Path, cfg: &Config) -> Result<Output, CliError> {
    let model = load_valid(path, cfg)?;
    let report = analyze_model(&model, cfg)?;
    let dec = &report.decomposition;
    let classical: Vec<String> = basis_vectors(&dec.mc).iter().map(quadrature_form).collect();

    let mut text = String::new();
    writeln!(
        text,
        "d = {}, m = {}, {}",
        model.d(),
        model.m(),
        if report.minimal { "minimal" } else { "not minimal" }
    )
    .unwrap();
    writeln!(text, "commutator span: real dim {}, sweeps used {}", report.span_dim, report.iterations_used).unwrap();
    writeln!(text, "dim M = {}, dim M' = {}", dec.m.dim(), dec.mprime.dim()).unwrap();
    writeln!(text, "d_c={}, d_r={}, d_f={}", dec.d_c, dec.d_r, dec.d_f).unwrap();
    writeln!(text, "𝒩(𝒯) ≅ {}  (d_r = {} mode(s) removed)", report.algebra_description, dec.d_r).unwrap();
    if classical.is_empty() {
        writeln!(text, "classical quadratures: none").unwrap();
    } else {
        writeln!(text, "classical quadratures (M_c):").unwrap();
        for q in &classical {
            writeln!(text, "  {q}").unwrap();
        }
    }

    let mut js = serde_json::to_value(&report).map_err(gqms_core::Error::from)?;
    js["classical_quadratures"] = json!(classical);
    Ok(Output {
        json: js,
        text,
        warnings: minimality_warning(&model, cfg),
    })
}

pub fn cmd_classify(path: &Path, cfg: &Config) -> Result<Output, CliError> {
    let model = load_valid(path, cfg)?;
    let class = classify_single_kraus(&model, &cfg.tolerances)?;
    let (d_c, d_r) = class.dims();
    let d_f = model.d() - d_c - d_r;
    Ok(Output {
        json: json!({
            "class": class,
            "label": class.label(),
            "case": class.case_number(),
            "d_c": d_c,
            "d_r": d_r,
            "d_f": d_f,
        }),
        text: format!("{}\nd_c={d_c}, d_r={d_r}, d_f={d_f}\n", class.label()),
        warnings: vec![],
    })
}

fn check_len(z: &CVector, d: usize) -> Result<(), CliError> {
    if z.len() != d {
        return Err(CliError::Usage(format!("z has {} entries, model has d = {d}", z.len())));
    }
    Ok(())
}

pub fn cmd_evolve(path: &Path, zs: &[String], ts: &str, cfg: &Config) -> Result<Output, CliError> {
    let model = load_valid(path, cfg)?;
    let zs: Vec<CVector> = zs.iter().map(|s| parse_cvector(s)).collect::<Result<_, _>>()?;
    for z in &zs {
        check_len(z, model.d())?;
    }
    let ts: Vec<f64> = parse_list(ts, "time")?;
    if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(CliError::Usage(format!("times must be finite and nonnegative, got {t}")));
    }
    let records = evolve_weyl_grid(&model, &zs, &ts, &cfg.tolerances)?;
    let mut text = String::new();
    for r in &records {
        let fmt_pairs = |v: &[[f64; 2]]| {
            v.iter()
                .map(|p| format!("({:.6}, {:.6})", p[0], p[1]))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(
            text,
            "t = {}: z = {} -> {}, damping {:.10e}, phase {:.10e}",
            r.t,
            fmt_pairs(&r.z_in),
            fmt_pairs(&r.z_out),
            r.damping,
            r.phase
        )
        .unwrap();
    }
    Ok(Output {
        json: serde_json::to_value(&records).map_err(gqms_core::Error::from)?,
        text,
        warnings: vec![],
    })
}

pub fn cmd_crosscheck(path: Option<&Path>, random: Option<usize>, cfg: &Config) -> Result<Output, CliError> {
    let tol = &cfg.tolerances;
    match (path, random) {
        (Some(p), None) => {
            let model = load_valid(p, cfg)?;
            let agree = crosscheck_complement(&model, tol)?;
            let kerc = kerc_z_invariant(&model, tol).dim();
            let span = decompose(&m_space(&commutator_span(&model, tol)), tol)?.mprime.dim();
            if !agree {
                return Err(CliError::CrosscheckMismatch { kerc, span });
            }
            Ok(Output {
                json: json!({ "agree": true, "dim_mprime": span }),
                text: format!("true (dim M' = {span})\n"),
                warnings: vec![],
            })
        }
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut failures = vec![];
            for i in 0..n {
                let model = random_model(&mut rng, None);
                if !crosscheck_complement(&model, tol)? {
                    failures.push(i);
                }
            }
            let text = format!("{}/{n} random models agree (seed {})\n", n - failures.len(), cfg.seed);
            if let Some(&first) = failures.first() {
                return Err(CliError::RandomCrosscheckMismatch {
                    failures: failures.len(),
                    models: n,
                    first,
                    seed: cfg.seed,
                });
            }
            Ok(Output {
                json: json!({ "agree": true, "models": n, "seed": cfg.seed }),
                text,
                warnings: vec![],
            })
        }
        _ => Err(CliError::Usage("give either a model file or --random N".into())),
    }
}

/// Brute-force runs stay below 1600 basis states.
const MAX_ORACLE_MODES: usize = 2;
const MAX_ORACLE_CUTOFF: usize = 40;

pub fn cmd_oracle(path: &Path, z: &str, t: f64, cutoffs: &str, sector: Option<usize>, cfg: &Config) -> Result<Output, CliError> {
    let model = load_valid(path, cfg)?;
    let z = parse_cvector(z)?;
    check_len(&z, model.d())?;
    let cutoffs: Vec<usize> = parse_list(cutoffs, "cutoff")?;
    if model.d() > MAX_ORACLE_MODES {
        return Err(CliError::Unsupported(format!(
            "oracle runs need d <= {MAX_ORACLE_MODES}, model has d = {}",
            model.d()
        )));
    }
    if cutoffs.len() != model.d() {
        return Err(CliError::Usage(format!("need {} cutoffs, got {}", model.d(), cutoffs.len())));
    }
    if cutoffs.iter().any(|&c| !(2..=MAX_ORACLE_CUTOFF).contains(&c)) {
        return Err(CliError::Unsupported(format!("cutoffs must lie in 2..={MAX_ORACLE_CUTOFF}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(CliError::Usage(format!("time must be finite and nonnegative, got {t}")));
    }
    let gen = assemble(&model, &cutoffs);
    let sec = match sector {
        Some(b) => Sector::new(&cutoffs, b),
        None => Sector::interior(&cutoffs),
    };
    let tol = &cfg.tolerances;
    let weyl = verify_weyl_formula(&model, &gen, &z, t, &sec, tol)?;
    let mult = multiplicativity_residual(&gen, &z, t, &sec, tol.ode)?;
    let ladder = verify_generator_on_ladder(&model, &cutoffs, cfg.seed);
    let in_mprime = kerc_z_invariant(&model, tol).contains(&z, tol.subspace * (1.0 + z.norm()));
    let text = format!(
        "cutoffs {cutoffs:?}, sector bound {:?}\nWeyl formula residual     {weyl:.3e}\nmultiplicativity residual {mult:.3e}\ngenerator identities      {ladder:.3e}\nz in M': {in_mprime}\n",
        sec.bounds()
    );
    Ok(Output {
        json: json!({
            "cutoffs": cutoffs,
            "sector_bounds": sec.bounds(),
            "z": z.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            "t": t,
            "weyl_formula_residual": weyl,
            "multiplicativity_residual": mult,
            "generator_residual": ladder,
            "in_mprime": in_mprime,
            "seed": cfg.seed,
        }),
        text,
        warnings: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gqms_core::Complex64;

    fn z(v: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&(r, i)| Complex64::new(r, i)))
    }

    #[test]
    fn quadrature_rendering() {
        assert_eq!(quadrature_form(&z(&[(0.0, 1.0), (0.0, 0.0)])), "-q1");
        assert_eq!(quadrature_form(&z(&[(1.0, 0.0), (0.0, 0.0)])), "p1");
        assert_eq!(quadrature_form(&z(&[(0.5, 0.0), (0.0, -2.0)])), "0.5 p1 + 2 q2");
        assert_eq!(quadrature_form(&z(&[(0.0, 0.0)])), "0");
    }
}
