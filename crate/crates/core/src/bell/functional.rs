use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

use super::correlators::{correlator_digits, correlator_index, num_correlators, vertex_transform};
use super::observable::MeasurementScenario;

/// Maximum party count for exhaustive deterministic enumeration.
pub const MAX_PARTIES: usize = 6;
const BOUND_TOL: f64 = 1e-9;

/// One correlator term `coeff * <prod_{i in subset} X^i_{settings_i}>`.
/// An empty subset is the constant term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub subset: Vec<usize>,
    pub settings: Vec<usize>,
    pub coeff: f64,
}

/// Linear functional on correlators with its local (deterministic) bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalJson", into = "FunctionalJson")]
pub struct BellFunctional {
    parties: usize,
    terms: Vec<Term>,
    local_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct FunctionalJson {
    parties: usize,
    settings: usize,
    terms: Vec<Term>,
    local_bound: f64,
}

impl TryFrom<FunctionalJson> for BellFunctional {
    type Error = Error;
    fn try_from(j: FunctionalJson) -> Result<Self> {
        if j.settings != 2 {
            return Err(Error::InvalidFunctional(format!("only 2 settings per party are supported, got {}", j.settings)));
        }
        let f = BellFunctional::new(j.parties, j.terms)?;
        if (f.local_bound - j.local_bound).abs() > BOUND_TOL {
            return Err(Error::InvalidFunctional(format!(
                "stored local bound {} differs from recomputed {}",
                j.local_bound, f.local_bound
            )));
        }
        Ok(f)
    }
}

impl From<BellFunctional> for FunctionalJson {
    fn from(f: BellFunctional) -> Self {
        FunctionalJson { parties: f.parties, settings: 2, terms: f.terms, local_bound: f.local_bound }
    }
}

impl BellFunctional {
    /// Validates the terms and computes the local bound by enumerating all
    /// `4^k` deterministic strategies.
    pub fn new(parties: usize, terms: Vec<Term>) -> Result<Self> {
        if parties == 0 {
            return Err(Error::InvalidFunctional("functional needs at least one party".into()));
        }
        if parties > MAX_PARTIES {
            return Err(Error::ScenarioTooLarge(parties));
        }
        for t in &terms {
            if t.subset.len() != t.settings.len() {
                return Err(Error::InvalidFunctional("subset and settings lengths differ".into()));
            }
            if t.subset.windows(2).any(|w| w[0] >= w[1]) || t.subset.iter().any(|&p| p >= parties) {
                return Err(Error::InvalidFunctional(format!("invalid party subset {:?}", t.subset)));
            }
            if t.settings.iter().any(|&x| x > 1) {
                return Err(Error::InvalidFunctional(format!("invalid settings {:?}", t.settings)));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidFunctional("non-finite coefficient".into()));
            }
        }
        let mut f = BellFunctional { parties, terms, local_bound: 0.0 };
        f.local_bound = f.compute_local_bound();
        Ok(f)
    }

    /// From a dense coefficient vector over `3^k` correlator indices.
    pub fn from_dense(parties: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != num_correlators(parties) {
            return Err(Error::InvalidFunctional(format!("expected {} coefficients", num_correlators(parties))));
        }
        let terms = dense
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(mu, &coeff)| {
                let ds = correlator_digits(mu, parties);
                let subset: Vec<usize> = (0..parties).filter(|&i| ds[i] != 0).collect();
                let settings = subset.iter().map(|&i| ds[i] - 1).collect();
                Term { subset, settings, coeff }
            })
            .collect();
        Self::new(parties, terms)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn local_bound(&self) -> f64 {
        self.local_bound
    }

    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; num_correlators(self.parties)];
        for t in &self.terms {
            let mut ds = vec![0; self.parties];
            for (&p, &x) in t.subset.iter().zip(&t.settings) {
                ds[p] = x + 1;
            }
            out[correlator_index(&ds)] += t.coeff;
        }
        out
    }

    /// Values on every deterministic strategy.
    pub fn vertex_values(&self) -> Vec<f64> {
        vertex_transform(&self.dense(), self.parties)
    }

    fn compute_local_bound(&self) -> f64 {
        self.vertex_values().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Re-enumerates the deterministic strategies and checks the stored bound.
    pub fn verify_local_bound(&self) -> Result<()> {
        let l = self.compute_local_bound();
        if (l - self.local_bound).abs() > BOUND_TOL {
            return Err(Error::Certificate(format!("local bound {} recomputes to {l}", self.local_bound)));
        }
        Ok(())
    }

    pub fn value(&self, correlators: &[f64]) -> Result<f64> {
        let d = self.dense();
        if correlators.len() != d.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} correlators for a {}-party functional",
                correlators.len(),
                self.parties
            )));
        }
        Ok(d.iter().zip(correlators).map(|(a, b)| a * b).sum())
    }

    /// `B = sum_mu f_mu (x)_i L^i_{mu_i}` on the full register.
    pub fn bell_operator(&self, scenario: &MeasurementScenario) -> Result<CMatrix> {
        if scenario.num_parties() != self.parties {
            return Err(Error::DimensionMismatch("scenario and functional party counts differ".into()));
        }
        let dims = scenario.dims();
        let total: usize = dims.iter().product();
        let mut b = CMatrix::zeros(total, total);
        for t in &self.terms {
            let ops: Vec<CMatrix> = (0..self.parties)
                .map(|i| match t.subset.iter().position(|&p| p == i) {
                    Some(pos) => scenario.observable(i, t.settings[pos]).matrix().clone(),
                    None => linalg::identity(dims[i]),
                })
                .collect();
            b += linalg::kron_all(&ops).scale(t.coeff);
        }
        Ok(b)
    }

    /// `A0 B0 + A0 B1 + A1 B0 - A1 B1` on parties `a < b` of a `parties`-party scenario.
    pub fn chsh(parties: usize, a: usize, b: usize) -> Result<Self> {
        if a >= b || b >= parties {
            return Err(Error::InvalidFunctional(format!("invalid CHSH pair ({a}, {b})")));
        }
        let term = |x, y, coeff| Term { subset: vec![a, b], settings: vec![x, y], coeff };
        Self::new(parties, vec![term(0, 0, 1.0), term(0, 1, 1.0), term(1, 0, 1.0), term(1, 1, -1.0)])
    }

    /// `(1 + A) CHSH_{BC} + 2 (1 - A)` with `A` = setting 0 of party 0 and
    /// `B`, `C` = parties 1, 2. Local bound 4.
    pub fn tripartite_i() -> Self {
        let mut terms = Vec::new();
        for (x, y, s) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)] {
            terms.push(Term { subset: vec![1, 2], settings: vec![x, y], coeff: s });
            terms.push(Term { subset: vec![0, 1, 2], settings: vec![0, x, y], coeff: s });
        }
        terms.push(Term { subset: vec![], settings: vec![], coeff: 2.0 });
        terms.push(Term { subset: vec![0], settings: vec![0], coeff: -2.0 });
        Self::new(3, terms).expect("valid terms")
    }

    /// Scales every coefficient (and the local bound) by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::InvalidFunctional("scale must be positive".into()));
        }
        let terms = self.terms.iter().map(|t| Term { coeff: t.coeff * s, ..t.clone() }).collect();
        Self::new(self.parties, terms)
    }
}
