//! Persistency of entanglement and nonlocality under particle loss, the
//! white-noise strength of that persistency, and the closed-form bounds for
//! cluster states and for the asymmetry of a state.
//!
//! Throughout, a subset lists the *removed* (traced-out) sites in ascending
//! order; the remaining sites keep their original labels.

mod entanglement;
mod nonlocality;
mod report;
mod strength;
mod symmetry;

pub use entanglement::{persistency_entanglement, EntangledEvidence, PeResult, SeparableEvidence};
pub use nonlocality::{
    persistency_hidden, persistency_nonlocality, FilteredCertificate, HiddenResult, NonlocalityResult,
    ResidueCertificate,
};
pub use report::{analyze, analyze_state, PersistencyReport, PeReport, PnlReport, PnlStarReport, Sections, StrengthReport};
pub use strength::{strength, StrengthResult, SubsetThreshold};

use serde::{Deserialize, Serialize};

use crate::bell::plane::DEFAULT_GRID;
use crate::bell::seesaw::DEFAULT_RESTARTS;
use crate::bell::{SearchConfig, SearchGoal};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Largest register accepted by the P_E subset enumeration.
pub const MAX_PE_SITES: usize = 8;
pub const DEFAULT_STRENGTH_TOL: f64 = 1e-3;

/// Search effort shared by every analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Random restarts of the nonlocality search per reduced state.
    pub restarts: usize,
    /// Grid size of the plane scan (0 disables it).
    pub plane_grid: usize,
    /// Random product states offered to the separable fit.
    pub fit_samples: usize,
    /// Restarts of the short search re-run at each bisection step.
    pub refresh_restarts: usize,
    pub strength_tol: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            restarts: DEFAULT_RESTARTS,
            plane_grid: DEFAULT_GRID,
            fit_samples: 2000,
            refresh_restarts: 4,
            strength_tol: DEFAULT_STRENGTH_TOL,
        }
    }
}

impl Budget {
    pub(crate) fn certify_config(&self) -> SearchConfig {
        SearchConfig {
            restarts: self.restarts,
            goal: SearchGoal::Certify,
            plane_grid: self.plane_grid,
            ..SearchConfig::default()
        }
    }
}

/// Seed of the analysis of the subset at `index` in its level.
pub(crate) fn sub_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

/// Sites of `0..n` not in the sorted list `removed`.
pub(crate) fn kept_sites(n: usize, removed: &[usize]) -> Vec<usize> {
    (0..n).filter(|s| removed.binary_search(s).is_err()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Ring,
    Linear,
}

fn div_ceil_signed(a: i64, b: i64) -> i64 {
    let q = a / b;
    if a % b != 0 && (a > 0) == (b > 0) {
        q + 1
    } else {
        q
    }
}

/// Analytic `(P_NL lower bound, P_E upper bound)` for cluster states.
pub fn cluster_bounds(n: usize, topology: Topology) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::ParameterOutOfRange(format!("cluster bounds need N >= 2, got {n}")));
    }
    let lower = (n - 1) / 4 + 1;
    let upper = match topology {
        Topology::Ring => 2 * n.div_ceil(5),
        Topology::Linear => (2 * div_ceil_signed(n as i64 - 6, 5) + 2).max(0) as usize,
    };
    Ok((lower, upper))
}

/// Lower bound `max(0, (S - L) / (2 ||B||))` on the trace distance to the
/// nearest permutation-symmetric state.
pub fn asymmetry_bound(s: f64, l: f64, bell_operator: &CMatrix) -> Result<f64> {
    if !s.is_finite() || !l.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("non-finite value S = {s}, L = {l}")));
    }
    let defect = linalg::hermiticity_defect(bell_operator);
    if defect > 1e-8 {
        return Err(Error::NotHermitian(defect));
    }
    let norm = linalg::operator_norm(bell_operator);
    if norm < 1e-14 {
        return Err(Error::ZeroOperator);
    }
    Ok(((s - l) / (2.0 * norm)).max(0.0))
}
