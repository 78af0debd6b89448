use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity / symmetry check, relative to the largest matrix entry.
    pub sym: f64,
    /// Absolute rank threshold for the minimality test. `None` uses
    /// `max(m, 2d) * eps * sigma_max`.
    pub minimality_rank: Option<f64>,
    /// Relative singular-value cutoff for real spans and null spaces.
    pub rank: f64,
    /// Largest principal angle (as a sine) at which two subspaces compare equal.
    pub subspace: f64,
    /// Relative error target of the adaptive quadrature.
    pub quadrature: f64,
    /// Local error target of the adaptive ODE integrator.
    pub ode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sym: 1e-12,
            minimality_rank: None,
            rank: 1e-9,
            subspace: 1e-8,
            quadrature: 1e-10,
            ode: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn all_positive(&self) -> bool {
        let opt_ok = self.minimality_rank.is_none_or(|t| t > 0.0);
        opt_ok
            && [self.sym, self.rank, self.subspace, self.quadrature, self.ode]
                .iter()
                .all(|&t| t > 0.0 && t.is_finite())
    }
}
