use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::SeededRng;
use crate::state::DensityOperator;

use super::correlators::{correlators, PairTensor};
use super::functional::{BellFunctional, MAX_PARTIES};
use super::lp::GaugeLp;
use super::observable::MeasurementScenario;
use super::plane::{plane_seed, DEFAULT_GRID};
use super::polytope::{classify, Membership, VIOLATION_TOL};
use super::seesaw::{seesaw_from, DEFAULT_RESTARTS, MAX_SWEEPS};

const MAX_ROUNDS: usize = 40;
const ROUND_TOL: f64 = 1e-9;
const PAIR_STARTS: usize = 8;

/// Explicit Bell violation: settings, functional, value `S` and bound `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlocalCertificate {
    pub scenario: MeasurementScenario,
    pub functional: BellFunctional,
    pub value: f64,
    pub local_bound: f64,
}

impl NonlocalCertificate {
    pub fn violation(&self) -> f64 {
        self.value - self.local_bound
    }

    /// Recomputes correlators, value and local bound from scratch.
    pub fn verify(&self, rho: &DensityOperator) -> Result<()> {
        self.functional.verify_local_bound()?;
        if (self.functional.local_bound() - self.local_bound).abs() > 1e-9 {
            return Err(Error::Certificate("stored local bound differs from the functional's".into()));
        }
        let s = self.functional.value(&correlators(rho, &self.scenario)?)?;
        if (s - self.value).abs() > 1e-9 {
            return Err(Error::Certificate(format!("value {} recomputes to {s}", self.value)));
        }
        if s - self.local_bound <= VIOLATION_TOL {
            return Err(Error::Certificate(format!("no violation: S = {s}, L = {}", self.local_bound)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SearchOutcome {
    CertifiedNonlocal(NonlocalCertificate),
    /// No violation found. Not a proof of locality.
    NotFound,
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&NonlocalCertificate> {
        match self {
            SearchOutcome::CertifiedNonlocal(c) => Some(c),
            SearchOutcome::NotFound => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchGoal {
    /// Stop at the first certified violation.
    Certify,
    /// Use the whole budget to maximize the gauge (minimize the critical visibility).
    Robustness,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_rounds: usize,
    pub goal: SearchGoal,
    /// Grid size of the plane scan used as an extra start; 0 disables it.
    pub plane_grid: usize,
    /// Extra starts from see-saw maxima of CHSH on every pair of parties.
    pub pair_seeds: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: DEFAULT_RESTARTS,
            max_rounds: MAX_ROUNDS,
            goal: SearchGoal::Certify,
            plane_grid: DEFAULT_GRID,
            pair_seeds: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub outcome: SearchOutcome,
    /// Largest gauge seen; `1 / gauge` is the critical visibility of the
    /// best settings when all their observables are traceless.
    pub best_gauge: f64,
    pub best_scenario: Option<MeasurementScenario>,
}

enum Start {
    Given(MeasurementScenario),
    Plane,
    Pair(usize, usize),
    Random,
}

/// Alternates an exact LP (best functional for fixed settings) with a
/// see-saw on that functional (better settings for fixed functional).
pub fn search(
    rho: &DensityOperator,
    config: SearchConfig,
    seed: u64,
    initial: Option<&MeasurementScenario>,
) -> Result<SearchReport> {
    let k = rho.num_sites();
    if k > MAX_PARTIES {
        return Err(Error::ScenarioTooLarge(k));
    }
    if k < 2 {
        return Ok(SearchReport { outcome: SearchOutcome::NotFound, best_gauge: 0.0, best_scenario: None });
    }
    let pt = PairTensor::new(rho);
    let mut lp = GaugeLp::new(k);
    let mut rng = SeededRng::seed_from_u64(seed);
    let mut best_gauge = f64::NEG_INFINITY;
    let mut best_scenario = None;
    let mut best_cert: Option<NonlocalCertificate> = None;
    let mut best_cert_gauge = f64::NEG_INFINITY;
    // certification tries the cheap starts first; robustness pays for the
    // plane scan up front
    let mut plan: Vec<Start> = initial.into_iter().cloned().map(Start::Given).collect();
    let plane = config.plane_grid > 0;
    if plane && config.goal == SearchGoal::Robustness {
        plan.push(Start::Plane);
    }
    if config.pair_seeds {
        for a in 0..k {
            for b in a + 1..k {
                plan.push(Start::Pair(a, b));
            }
        }
    }
    if plane && config.goal == SearchGoal::Certify {
        plan.extend([Start::Random, Start::Random, Start::Plane]);
    }
    let fixed = plan.iter().filter(|s| !matches!(s, Start::Random)).count();
    while plan.len() < config.restarts.max(1) + fixed {
        plan.push(Start::Random);
    }
    for start in plan {
        let mut sc = match start {
            Start::Given(s) => s,
            Start::Plane => plane_seed(&pt, &mut lp, config.plane_grid)?.1,
            Start::Pair(a, b) => {
                let f = BellFunctional::chsh(k, a, b)?.dense();
                let mut best: Option<(f64, MeasurementScenario)> = None;
                for _ in 0..PAIR_STARTS {
                    let start = MeasurementScenario::random(rho.dims(), &mut rng);
                    let (v, sc) = seesaw_from(&pt, &f, start, MAX_SWEEPS)?;
                    if best.as_ref().is_none_or(|b| v > b.0) {
                        best = Some((v, sc));
                    }
                }
                best.expect("at least one start").1
            }
            Start::Random => MeasurementScenario::random(rho.dims(), &mut rng),
        };
        for _ in 0..config.max_rounds.max(1) {
            let c = pt.correlators(&sc)?;
            let (membership, sol) = classify(&mut lp, &c)?;
            if sol.gauge > best_gauge {
                best_gauge = sol.gauge;
                best_scenario = Some(sc.clone());
            }
            if let Membership::Nonlocal(w) = membership {
                if sol.gauge > best_cert_gauge {
                    best_cert_gauge = sol.gauge;
                    best_cert = Some(NonlocalCertificate {
                        scenario: sc.clone(),
                        local_bound: w.functional.local_bound(),
                        value: w.value,
                        functional: w.functional,
                    });
                }
                if config.goal == SearchGoal::Certify {
                    break;
                }
            }
            let (v, next) = seesaw_from(&pt, &sol.dual, sc, MAX_SWEEPS)?;
            sc = next;
            if v - sol.gauge < ROUND_TOL * sol.gauge.max(1.0) {
                break;
            }
        }
        if config.goal == SearchGoal::Certify && best_cert.is_some() {
            break;
        }
    }
    let outcome = match best_cert {
        Some(c) => SearchOutcome::CertifiedNonlocal(c),
        None => SearchOutcome::NotFound,
    };
    Ok(SearchReport { outcome, best_gauge, best_scenario })
}

/// Searches for a certified Bell violation with `restarts` random starts.
pub fn nonlocality_search(rho: &DensityOperator, restarts: usize, seed: u64) -> Result<SearchOutcome> {
    let config = SearchConfig { restarts, ..SearchConfig::default() };
    Ok(search(rho, config, seed, None)?.outcome)
}

/// Checks whether fixed settings already certify `rho` via the LP.
pub fn certify_with(rho: &DensityOperator, scenario: &MeasurementScenario) -> Result<Option<NonlocalCertificate>> {
    let k = rho.num_sites();
    if k > MAX_PARTIES {
        return Err(Error::ScenarioTooLarge(k));
    }
    let c = correlators(rho, scenario)?;
    let mut lp = GaugeLp::new(k);
    match classify(&mut lp, &c)?.0 {
        Membership::Nonlocal(w) => Ok(Some(NonlocalCertificate {
            scenario: scenario.clone(),
            local_bound: w.functional.local_bound(),
            value: w.value,
            functional: w.functional,
        })),
        Membership::Local(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::register::QuditRegister;
    use crate::states;

    #[test]
    fn phi_plus_certified() {
        let rho = states::bell_state().density().unwrap();
        let out = nonlocality_search(&rho, 8, 1).unwrap();
        let cert = out.certificate().expect("certified");
        cert.verify(&rho).unwrap();
        let r = search(&rho, SearchConfig { restarts: 8, goal: SearchGoal::Robustness, ..Default::default() }, 1, None).unwrap();
        let best = r.outcome.certificate().unwrap();
        assert!(best.violation() >= 2.0 * 2f64.sqrt() - 2.0 - 1e-6, "{}", best.violation());
    }

    #[test]
    fn zzz_mixture_not_found() {
        let reg = QuditRegister::qubits(3).unwrap();
        let z = linalg::pauli_z();
        let m = (linalg::identity(8) + linalg::kron_all([&z, &z, &z])).unscale(8.0);
        let rho = DensityOperator::new(reg, m).unwrap();
        assert_eq!(nonlocality_search(&rho, 8, 2).unwrap(), SearchOutcome::NotFound);
    }

    #[test]
    fn single_site_never_certified() {
        let rho = states::w_state(3).unwrap().reduced(&[0]).unwrap();
        assert_eq!(nonlocality_search(&rho, 4, 3).unwrap(), SearchOutcome::NotFound);
    }

    #[test]
    fn tampered_certificate_fails() {
        let rho = states::bell_state().density().unwrap();
        let mut cert = nonlocality_search(&rho, 4, 4).unwrap().certificate().unwrap().clone();
        cert.value += 0.1;
        assert!(cert.verify(&rho).is_err());
        let reg = QuditRegister::qubits(2).unwrap();
        let mixed = DensityOperator::maximally_mixed(reg).unwrap();
        let cert2 = nonlocality_search(&rho, 4, 4).unwrap().certificate().unwrap().clone();
        assert!(cert2.verify(&mixed).is_err());
    }
}
