use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::separability::{
    entanglement_status_with, EntanglementStatus, EntanglementWitness, SeparableDecomposition, StatusBudget,
};
use crate::states::State;
use crate::subsets;

use super::{kept_sites, sub_seed, Budget, MAX_PE_SITES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntangledEvidence {
    pub removed: Vec<usize>,
    pub witness: EntanglementWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableEvidence {
    pub removed: Vec<usize>,
    pub decomposition: SeparableDecomposition,
}

/// `lo <= P_E <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeResult {
    pub lo: usize,
    pub hi: usize,
    /// Reduced state certified separable after removing `hi` sites.
    pub sep_subset: Option<SeparableEvidence>,
    /// One witness per subset of size `lo - 1`.
    pub ent_witnesses: Vec<EntangledEvidence>,
}

impl PeResult {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn verify(&self, state: &State) -> Result<()> {
        for e in &self.ent_witnesses {
            e.witness.verify(&state.reduced(&kept_sites(state.num_sites(), &e.removed))?)?;
        }
        if let Some(s) = &self.sep_subset {
            let kept = kept_sites(state.num_sites(), &s.removed);
            s.decomposition.verify(&state.reduced(&kept)?)?;
        }
        if self.lo > self.hi {
            return Err(Error::Certificate(format!("interval [{}, {}] is empty", self.lo, self.hi)));
        }
        Ok(())
    }
}

enum Verdict {
    Entangled(EntanglementWitness),
    Separable(SeparableDecomposition),
    Unknown,
}

fn level_verdicts(state: &State, removal: usize, budget: &Budget, seed: u64) -> Result<Vec<(Vec<usize>, Verdict)>> {
    let n = state.num_sites();
    subsets::combinations(n, removal)
        .into_par_iter()
        .enumerate()
        .map(|(i, removed)| {
            let kept = kept_sites(n, &removed);
            let rho = state.reduced(&kept)?;
            let sb = StatusBudget {
                fit_samples: budget.fit_samples,
                bell_restarts: budget.refresh_restarts,
                seed: sub_seed(seed, i),
            };
            let v = match entanglement_status_with(&rho, &sb) {
                EntanglementStatus::Entangled(w) => Verdict::Entangled(w),
                EntanglementStatus::Separable(d) => Verdict::Separable(d),
                EntanglementStatus::Unknown => Verdict::Unknown,
            };
            Ok((removed, v))
        })
        .collect()
}

/// Brackets the persistency of entanglement: `lo` is one more than the
/// largest removal size at which every reduced state is certified entangled,
/// `hi` the smallest removal size with a certified separable reduced state.
pub fn persistency_entanglement(state: &State, budget: &Budget, seed: u64) -> Result<PeResult> {
    let n = state.num_sites();
    if n > MAX_PE_SITES {
        return Err(Error::TooManySites(n));
    }
    let mut lo = 0;
    let mut lo_open = true;
    let mut ent_witnesses = Vec::new();
    for removal in 0..n {
        // a single remaining site is separable without any test
        if removal == n - 1 {
            let removed: Vec<usize> = (1..n).collect();
            let rho = state.reduced(&[0])?;
            let decomposition = single_site_decomposition(&rho)?;
            return Ok(PeResult { lo, hi: removal, sep_subset: Some(SeparableEvidence { removed, decomposition }), ent_witnesses });
        }
        let verdicts = level_verdicts(state, removal, budget, seed)?;
        if lo_open && verdicts.iter().all(|(_, v)| matches!(v, Verdict::Entangled(_))) {
            lo = removal + 1;
            ent_witnesses = verdicts
                .iter()
                .map(|(removed, v)| match v {
                    Verdict::Entangled(w) => EntangledEvidence { removed: removed.clone(), witness: w.clone() },
                    _ => unreachable!(),
                })
                .collect();
            continue;
        }
        lo_open = false;
        if let Some((removed, Verdict::Separable(d))) = verdicts.into_iter().find(|(_, v)| matches!(v, Verdict::Separable(_))) {
            return Ok(PeResult { lo, hi: removal, sep_subset: Some(SeparableEvidence { removed, decomposition: d }), ent_witnesses });
        }
    }
    unreachable!("the single-site level always terminates")
}

fn single_site_decomposition(rho: &crate::DensityOperator) -> Result<SeparableDecomposition> {
    crate::separability::product_eigenbasis_certify(rho)
        .ok_or_else(|| Error::Certificate("single-site spectral decomposition failed".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn ghz_is_one() {
        let s = State::from(states::ghz_state(4, 2).unwrap());
        let r = persistency_entanglement(&s, &Budget::default(), 0).unwrap();
        assert_eq!((r.lo, r.hi), (1, 1));
        r.verify(&s).unwrap();
    }

    #[test]
    fn w_is_maximal() {
        for n in 3..6 {
            let s = State::from(states::w_state(n).unwrap());
            let r = persistency_entanglement(&s, &Budget::default(), 0).unwrap();
            assert_eq!((r.lo, r.hi), (n - 1, n - 1), "W{n}");
            assert_eq!(r.ent_witnesses.len(), subsets::binomial(n, n - 2));
        }
    }

    #[test]
    fn product_state_is_zero() {
        let reg = crate::QuditRegister::qubits(3).unwrap();
        let s = State::from(crate::StateVector::basis(reg, 5).unwrap());
        let r = persistency_entanglement(&s, &Budget::default(), 0).unwrap();
        assert_eq!((r.lo, r.hi), (0, 0));
    }

    #[test]
    fn too_many_sites() {
        let s = State::from(states::ghz_state(9, 2).unwrap());
        assert!(matches!(persistency_entanglement(&s, &Budget::default(), 0), Err(Error::TooManySites(9))));
    }
}
