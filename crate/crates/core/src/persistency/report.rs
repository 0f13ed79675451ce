use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bell::functional::MAX_PARTIES;
use crate::error::{Error, Result};
use crate::states::{State, StateSpec};

use super::{
    persistency_entanglement, persistency_hidden, persistency_nonlocality, strength, Budget, HiddenResult,
    NonlocalityResult, PeResult, StrengthResult, MAX_PE_SITES,
};

pub type PeReport = PeResult;
pub type PnlReport = NonlocalityResult;
pub type PnlStarReport = HiddenResult;
pub type StrengthReport = StrengthResult;

/// Which parts of the analysis to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sections {
    pub entanglement: bool,
    pub hidden: bool,
    pub strength: bool,
    /// Removal size for the strength; defaults to `P_NL - 1`.
    pub k_remove: Option<usize>,
}

impl Default for Sections {
    fn default() -> Self {
        Sections { entanglement: true, hidden: true, strength: true, k_remove: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistencyReport {
    pub spec: String,
    pub n: usize,
    pub pe: Option<PeReport>,
    pub pnl: PnlReport,
    pub pnl_star: Option<PnlStarReport>,
    pub strength: Option<StrengthReport>,
    pub budget: Budget,
    pub seed: u64,
    /// Wall-clock runtime; the only field that varies between identical runs.
    pub elapsed_ms: Option<u64>,
    /// Conventions the numbers depend on, e.g. site numbering of grids.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl PersistencyReport {
    /// Re-verifies every certificate against `state` and the ordering
    /// `P_NL <= P*_NL <= P_E <= N - 1` at the level of the computed bounds.
    pub fn verify(&self, state: &State) -> Result<()> {
        let fail = |m: String| Err(Error::Certificate(m));
        if state.num_sites() != self.n {
            return fail(format!("report for {} sites, state has {}", self.n, state.num_sites()));
        }
        self.pnl.verify(state)?;
        let mut upper_nl = self.pnl.lb;
        if let Some(h) = &self.pnl_star {
            h.verify(state)?;
            if h.lb < self.pnl.lb {
                return fail(format!("P*_NL bound {} below P_NL bound {}", h.lb, self.pnl.lb));
            }
            upper_nl = h.lb;
        }
        if let Some(pe) = &self.pe {
            pe.verify(state)?;
            if pe.hi > self.n.saturating_sub(1) {
                return fail(format!("P_E upper bound {} exceeds N - 1", pe.hi));
            }
            if upper_nl > pe.hi {
                return fail(format!("nonlocality bound {upper_nl} exceeds P_E upper bound {}", pe.hi));
            }
        }
        if let Some(s) = &self.strength {
            s.verify(state)?;
        }
        Ok(())
    }

    /// `true` when the P_E interval is open.
    pub fn pe_open(&self) -> bool {
        self.pe.as_ref().is_some_and(|p| !p.is_exact())
    }
}

/// Builds the state named by `spec` and runs the requested analyses.
pub fn analyze(spec: &StateSpec, budget: &Budget, seed: u64, sections: &Sections) -> Result<PersistencyReport> {
    let state = spec.build()?;
    let mut report = analyze_state(&state, budget, seed, sections)?;
    report.spec = spec.to_string();
    if let StateSpec::Grid { rows, cols, .. } = spec {
        report.notes.push(format!("grid sites numbered row-major: site r*{cols}+c for row r < {rows}, column c"));
    }
    Ok(report)
}

pub fn analyze_state(state: &State, budget: &Budget, seed: u64, sections: &Sections) -> Result<PersistencyReport> {
    let start = Instant::now();
    let n = state.num_sites();
    let pe = if sections.entanglement && n <= MAX_PE_SITES {
        Some(persistency_entanglement(state, budget, seed)?)
    } else {
        None
    };
    let pnl = persistency_nonlocality(state, budget, seed)?;
    let pnl_star = if sections.hidden { Some(persistency_hidden(state, budget, seed)?) } else { None };
    let k_remove = sections.k_remove.unwrap_or(pnl.lb.saturating_sub(1));
    let strength = if sections.strength && k_remove + 2 <= n && n - k_remove <= MAX_PARTIES {
        Some(strength(state, k_remove, budget, seed)?)
    } else {
        None
    };
    Ok(PersistencyReport {
        spec: String::new(),
        n,
        pe,
        pnl,
        pnl_star,
        strength,
        budget: *budget,
        seed,
        elapsed_ms: Some(start.elapsed().as_millis() as u64),
        notes: Vec::new(),
    })
}
