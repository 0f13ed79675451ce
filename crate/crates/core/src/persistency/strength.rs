use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::functional::MAX_PARTIES;
use crate::bell::search::certify_with;
use crate::bell::{self, MeasurementScenario, NonlocalCertificate, SearchConfig, SearchGoal};
use crate::error::{Error, Result};
use crate::state::DensityOperator;
use crate::states::State;
use crate::subsets;

use super::symmetry::{OrbitMap, Symmetry};
use super::{kept_sites, sub_seed, Budget};

/// Visibility threshold of one reduced state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetThreshold {
    pub removed: Vec<usize>,
    /// Certified at `w_hi`; not found at `w_lo` (0 when the lower side was
    /// not explored because another subset already needed more visibility).
    pub w_lo: f64,
    pub w_hi: f64,
    pub certificate: Option<NonlocalCertificate>,
}

impl SubsetThreshold {
    pub fn verify(&self, state: &State) -> Result<()> {
        let Some(c) = &self.certificate else { return Ok(()) };
        let kept = kept_sites(state.num_sites(), &self.removed);
        c.verify(&state.reduced(&kept)?.mix_with_white_noise(self.w_hi)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthResult {
    /// Smallest visibility at which every reduced state was certified
    /// nonlocal; `None` when some reduced state was never certified.
    pub w: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    pub k_remove: usize,
    pub per_subset: Vec<SubsetThreshold>,
}

impl StrengthResult {
    pub fn verify(&self, state: &State) -> Result<()> {
        self.per_subset.iter().try_for_each(|t| t.verify(state))
    }
}

struct Probe<'a> {
    rho: &'a DensityOperator,
    incumbent: Option<MeasurementScenario>,
    cert: Option<NonlocalCertificate>,
    config: SearchConfig,
    seed: u64,
    calls: u64,
}

impl Probe<'_> {
    /// Whether `w rho + (1 - w) I / D` is certified nonlocal: the incumbent
    /// settings first, then a short search started from them.
    fn test(&mut self, w: f64) -> Result<bool> {
        let noisy = self.rho.mix_with_white_noise(w)?;
        if let Some(sc) = &self.incumbent {
            if let Some(c) = certify_with(&noisy, sc)? {
                self.cert = Some(c);
                return Ok(true);
            }
        }
        self.calls += 1;
        let report = bell::search(&noisy, self.config, self.seed.wrapping_add(self.calls), self.incumbent.as_ref())?;
        match report.outcome.certificate() {
            Some(c) => {
                self.incumbent = Some(c.scenario.clone());
                self.cert = Some(c.clone());
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

/// Minimal white-noise visibility `w` at which every reduced state with
/// `k_remove` sites removed is still certified nonlocal, bracketed to
/// `budget.strength_tol`. An upper-bound estimate of the true threshold.
pub fn strength(state: &State, k_remove: usize, budget: &Budget, seed: u64) -> Result<StrengthResult> {
    let n = state.num_sites();
    if k_remove + 2 > n {
        return Err(Error::ParameterOutOfRange(format!("removing {k_remove} of {n} sites leaves no pair")));
    }
    if n - k_remove > MAX_PARTIES {
        return Err(Error::ScenarioTooLarge(n - k_remove));
    }
    let removals = subsets::combinations(n, k_remove);
    let kept: Vec<Vec<usize>> = removals.iter().map(|r| kept_sites(n, r)).collect();
    let sym = Symmetry::of(state);
    let orbits: Vec<OrbitMap> = kept.iter().map(|k| sym.orbit(k)).collect();
    let reps: Vec<usize> = (0..removals.len()).filter(|&i| orbits[i].rep == kept[i]).collect();
    let reduced: Vec<Option<DensityOperator>> = (0..removals.len())
        .map(|i| if orbits[i].rep == kept[i] { state.reduced(&kept[i]).map(Some) } else { Ok(None) })
        .collect::<Result<_>>()?;
    let robust = SearchConfig {
        restarts: budget.refresh_restarts,
        goal: SearchGoal::Robustness,
        plane_grid: budget.plane_grid,
        ..SearchConfig::default()
    };
    // visibility estimates at w = 1 order the representatives, hardest first
    let estimates: Vec<(usize, f64, Option<MeasurementScenario>)> = reps
        .par_iter()
        .map(|&i| {
            let rho = reduced[i].as_ref().expect("representative");
            let r = bell::search(rho, robust, sub_seed(seed, i), None)?;
            Ok((i, r.best_gauge, r.best_scenario))
        })
        .collect::<Result<_>>()?;
    let mut order = estimates;
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    let refresh = SearchConfig {
        restarts: budget.refresh_restarts,
        goal: SearchGoal::Certify,
        plane_grid: 0,
        pair_seeds: false,
        ..SearchConfig::default()
    };
    let tol = budget.strength_tol.max(1e-9);
    let mut per_subset: Vec<Option<SubsetThreshold>> = vec![None; removals.len()];
    let mut worst: Option<(f64, f64)> = None;
    let mut all_certified = true;
    let mut run = |i: usize, rho: &DensityOperator, incumbent: Option<MeasurementScenario>, worst: &mut Option<(f64, f64)>| {
        let mut probe = Probe { rho, incumbent, cert: None, config: refresh, seed: sub_seed(seed, i), calls: 0 };
        let removed = removals[i].clone();
        // early exit: already certified at the current worst threshold
        if let Some((_, w_star)) = *worst {
            if probe.test(w_star)? {
                return Ok(SubsetThreshold { removed, w_lo: 0.0, w_hi: w_star, certificate: probe.cert });
            }
        }
        if !probe.test(1.0)? {
            all_certified = false;
            return Ok(SubsetThreshold { removed, w_lo: 1.0, w_hi: 1.0, certificate: None });
        }
        let mut cert = probe.cert.clone();
        let (mut lo, mut hi) = (worst.map_or(0.0, |w| w.1), 1.0);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if probe.test(mid)? {
                hi = mid;
                cert = probe.cert.clone();
            } else {
                lo = mid;
            }
        }
        *worst = Some((lo, hi));
        Ok::<_, Error>(SubsetThreshold { removed, w_lo: lo, w_hi: hi, certificate: cert })
    };
    for (i, _, incumbent) in order {
        let rho = reduced[i].as_ref().expect("representative");
        per_subset[i] = Some(run(i, rho, incumbent, &mut worst)?);
    }
    // the rest of each orbit inherits its representative's settings
    for i in 0..removals.len() {
        if per_subset[i].is_some() {
            continue;
        }
        let orbit = &orbits[i];
        let rep = kept.iter().position(|k| *k == orbit.rep).expect("representative enumerated");
        let base = per_subset[rep].clone().expect("representative visited");
        let moved = match &base.certificate {
            Some(c) => {
                let (sites, order) = orbit.carry(&orbit.rep);
                let noisy = state.reduced(&sites)?.mix_with_white_noise(base.w_hi)?;
                certify_with(&noisy, &c.scenario.permuted(&order)?)?
            }
            None => None,
        };
        per_subset[i] = Some(match (moved, &base.certificate) {
            (Some(c), _) => SubsetThreshold { removed: removals[i].clone(), certificate: Some(c), ..base },
            (None, None) => SubsetThreshold { removed: removals[i].clone(), ..base },
            (None, Some(_)) => {
                let rho = state.reduced(&kept[i])?;
                run(i, &rho, None, &mut worst)?
            }
        });
    }
    let per_subset: Vec<SubsetThreshold> = per_subset.into_iter().map(|t| t.expect("every subset visited")).collect();
    let (w, bracket) = match (all_certified, worst) {
        (true, Some((lo, hi))) => (Some(hi), Some([lo, hi])),
        _ => (None, None),
    };
    Ok(StrengthResult { w, bracket, k_remove, per_subset })
}
