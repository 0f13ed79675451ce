use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::functional::MAX_PARTIES;
use crate::bell::search::certify_with;
use crate::bell::{self, max_chsh, MeasurementScenario, NonlocalCertificate, SearchConfig, SearchGoal};
use crate::error::{Error, Result};
use crate::state::{DensityOperator, LocalFilter};
use crate::states::State;
use crate::subsets;

use super::symmetry::Symmetry;
use super::{kept_sites, sub_seed, Budget};

const EPS_MIN: f64 = 1e-3;
const EPS_TOL: f64 = 1e-4;
const FILTER_PASSES: usize = 2;

/// Nonlocality of the reduced state after removing `removed`, witnessed by a
/// Bell violation on the sites `witnessed_by` (a subset of the remaining
/// ones; the other remaining parties simply ignore their outcomes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueCertificate {
    pub removed: Vec<usize>,
    pub witnessed_by: Vec<usize>,
    pub certificate: NonlocalCertificate,
}

impl ResidueCertificate {
    pub fn verify(&self, state: &State) -> Result<()> {
        check_witness_sites(state.num_sites(), &self.removed, &self.witnessed_by)?;
        self.certificate.verify(&state.reduced(&self.witnessed_by)?)
    }
}

fn check_witness_sites(n: usize, removed: &[usize], witnessed_by: &[usize]) -> Result<()> {
    if witnessed_by.iter().any(|s| *s >= n || removed.contains(s)) || !witnessed_by.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Certificate(format!("witness sites {witnessed_by:?} invalid after removing {removed:?}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlocalityResult {
    /// Certified lower bound on the persistency of nonlocality.
    pub lb: usize,
    /// Certificates for every subset of size `lb - 1`.
    pub certs: Vec<ResidueCertificate>,
    /// First subset (of size `lb`) for which no violation was found.
    pub failed_subset: Option<Vec<usize>>,
}

impl NonlocalityResult {
    pub fn verify(&self, state: &State) -> Result<()> {
        self.certs.iter().try_for_each(|c| c.verify(state))
    }
}

type Hit = (Vec<usize>, NonlocalCertificate);
type Cache = Mutex<HashMap<Vec<usize>, Option<Hit>>>;

/// Registers larger than this are first certified through their reductions.
const SUB_FIRST: usize = 5;

/// Index of `subset` among the lexicographic `k`-subsets of `0..n`.
fn subset_rank(n: usize, subset: &[usize]) -> usize {
    let k = subset.len();
    let mut rank = 0;
    let mut prev = 0;
    for (i, &s) in subset.iter().enumerate() {
        for v in prev..s {
            rank += subsets::binomial(n - v - 1, k - i - 1);
        }
        prev = s + 1;
    }
    rank
}

/// Shared state of one analysis. Results depend only on the kept sites, so
/// the caches keep parallel runs deterministic.
struct Ctx<'a> {
    state: &'a State,
    sym: Symmetry,
    config: SearchConfig,
    seed: u64,
    plain: Cache,
    filtered: FilterCache,
}

impl<'a> Ctx<'a> {
    fn new(state: &'a State, budget: &Budget, seed: u64) -> Self {
        Ctx {
            state,
            sym: Symmetry::of(state),
            config: budget.certify_config(),
            seed,
            plain: Cache::default(),
            filtered: FilterCache::default(),
        }
    }

    fn seed_for(&self, kept: &[usize]) -> u64 {
        let n = self.state.num_sites();
        sub_seed(self.seed, subset_rank(n, &kept_sites(n, kept)))
    }
}

/// Certifies the reduced state on `kept`: through its orbit representative,
/// through a reduction for large registers, or by a direct search.
fn certify_kept(ctx: &Ctx, kept: &[usize]) -> Result<Option<Hit>> {
    if let Some(hit) = ctx.plain.lock().expect("cache lock").get(kept) {
        return Ok(hit.clone());
    }
    let result = if kept.len() < 2 {
        None
    } else {
        let orbit = ctx.sym.orbit(kept);
        if orbit.rep != kept {
            match certify_kept(ctx, &orbit.rep)? {
                None => None,
                Some((w, c)) => match orbit.transfer(ctx.state, &w, &c.scenario)? {
                    Some(hit) => Some(hit),
                    None => certify_direct(ctx, kept)?,
                },
            }
        } else {
            certify_direct(ctx, kept)?
        }
    };
    ctx.plain.lock().expect("cache lock").insert(kept.to_vec(), result.clone());
    Ok(result)
}

fn certify_direct(ctx: &Ctx, kept: &[usize]) -> Result<Option<Hit>> {
    if kept.len() > SUB_FIRST {
        for drop in kept {
            let smaller: Vec<usize> = kept.iter().copied().filter(|s| s != drop).collect();
            if let Some(hit) = certify_kept(ctx, &smaller)? {
                return Ok(Some(hit));
            }
        }
    }
    if kept.len() > MAX_PARTIES {
        return Ok(None);
    }
    let rho = ctx.state.reduced(kept)?;
    let report = bell::search(&rho, ctx.config, ctx.seed_for(kept), None)?;
    Ok(report.outcome.certificate().map(|c| (kept.to_vec(), c.clone())))
}

/// Largest `k` such that every reduced state with `k - 1` sites removed is
/// certified nonlocal; a certified lower bound on the persistency of
/// nonlocality.
pub fn persistency_nonlocality(state: &State, budget: &Budget, seed: u64) -> Result<NonlocalityResult> {
    let n = state.num_sites();
    let ctx = Ctx::new(state, budget, seed);
    let mut result = NonlocalityResult { lb: 0, certs: Vec::new(), failed_subset: None };
    for removal in 0..n.saturating_sub(1) {
        let level = subsets::combinations(n, removal);
        let outcomes: Vec<(Vec<usize>, Option<Hit>)> = level
            .into_par_iter()
            .map(|removed| {
                let kept = kept_sites(n, &removed);
                Ok((removed, certify_kept(&ctx, &kept)?))
            })
            .collect::<Result<_>>()?;
        if let Some((removed, _)) = outcomes.iter().find(|(_, o)| o.is_none()) {
            result.failed_subset = Some(removed.clone());
            break;
        }
        result.lb = removal + 1;
        result.certs = outcomes
            .into_iter()
            .map(|(removed, o)| {
                let (witnessed_by, certificate) = o.expect("all certified");
                ResidueCertificate { removed, witnessed_by, certificate }
            })
            .collect();
    }
    Ok(result)
}

/// A certificate for the reduced state after local filters `diag(eps, 1)`
/// on the witnessing sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredCertificate {
    pub removed: Vec<usize>,
    pub witnessed_by: Vec<usize>,
    /// One attenuation per witnessing site; `1` is the identity filter.
    pub epsilons: Vec<f64>,
    pub success_probability: f64,
    pub certificate: NonlocalCertificate,
}

fn filtered(rho: &DensityOperator, eps: &[f64]) -> Result<(DensityOperator, f64)> {
    let filters = rho
        .dims()
        .iter()
        .zip(eps)
        .map(|(&d, &e)| if e >= 1.0 { Ok(None) } else { LocalFilter::attenuate_zero(d, e).map(Some) })
        .collect::<Result<Vec<_>>>()?;
    rho.apply_filters(&filters)
}

impl FilteredCertificate {
    pub fn verify(&self, state: &State) -> Result<()> {
        check_witness_sites(state.num_sites(), &self.removed, &self.witnessed_by)?;
        if self.epsilons.len() != self.witnessed_by.len() {
            return Err(Error::Certificate("one attenuation per witnessing site expected".into()));
        }
        let (rho, p) = filtered(&state.reduced(&self.witnessed_by)?, &self.epsilons)?;
        if (p - self.success_probability).abs() > 1e-9 {
            return Err(Error::Certificate(format!("success probability {} recomputes to {p}", self.success_probability)));
        }
        self.certificate.verify(&rho)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenResult {
    pub lb: usize,
    pub certs: Vec<FilteredCertificate>,
    pub failed_subset: Option<Vec<usize>>,
}

impl HiddenResult {
    pub fn verify(&self, state: &State) -> Result<()> {
        self.certs.iter().try_for_each(|c| c.verify(state))
    }
}

/// Score of a filtered state: the maximal CHSH value for two parties, the
/// best gauge of a short search otherwise.
fn filter_score(rho: &DensityOperator, seed: u64, scenario: &mut Option<MeasurementScenario>) -> Result<f64> {
    if rho.num_sites() == 2 {
        let (v, obs) = max_chsh(rho, 4, seed)?;
        let [a0, a1, b0, b1] = obs;
        *scenario = Some(MeasurementScenario::new(vec![[a0, a1], [b0, b1]])?);
        return Ok(v / 2.0);
    }
    let config = SearchConfig {
        restarts: 1,
        goal: SearchGoal::Robustness,
        plane_grid: 0,
        pair_seeds: scenario.is_none(),
        ..SearchConfig::default()
    };
    let report = bell::search(rho, config, seed, scenario.as_ref())?;
    *scenario = report.best_scenario;
    Ok(report.best_gauge)
}

fn golden_section(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Optimizes per-site attenuations and certifies the filtered state.
fn certify_filtered(rho: &DensityOperator, config: SearchConfig, seed: u64) -> Result<Option<(Vec<f64>, f64, NonlocalCertificate)>> {
    let k = rho.num_sites();
    let mut eps = vec![1.0; k];
    let mut scenario = None;
    let mut best = filter_score(rho, seed, &mut scenario)?;
    // a common attenuation first: coordinate steps alone stall on residues
    // whose noise is shared by all sites
    let mut trial_scenario = scenario.clone();
    let (e, v) = golden_section(
        |x| {
            let (f, _) = filtered(rho, &vec![x; k])?;
            filter_score(&f, seed, &mut trial_scenario)
        },
        EPS_MIN,
        1.0,
        EPS_TOL,
    )?;
    if v > best {
        best = v;
        eps = vec![e; k];
        scenario = trial_scenario;
    }
    for _ in 0..FILTER_PASSES {
        for site in 0..k {
            let mut trial_scenario = scenario.clone();
            let (e, v) = golden_section(
                |x| {
                    let mut t = eps.clone();
                    t[site] = x;
                    let (f, _) = filtered(rho, &t)?;
                    filter_score(&f, seed, &mut trial_scenario)
                },
                EPS_MIN,
                1.0,
                EPS_TOL,
            )?;
            if v > best {
                best = v;
                eps[site] = e;
                scenario = trial_scenario;
            }
        }
    }
    let (f, p) = filtered(rho, &eps)?;
    if let Some(sc) = &scenario {
        if let Some(c) = certify_with(&f, sc)? {
            return Ok(Some((eps, p, c)));
        }
    }
    Ok(bell::search(&f, config, seed, scenario.as_ref())?.outcome.certificate().map(|c| (eps, p, c.clone())))
}

type FilteredHit = (Vec<f64>, f64, NonlocalCertificate);
type FilterCache = Mutex<HashMap<Vec<usize>, Option<FilteredHit>>>;

fn filtered_kept(ctx: &Ctx, kept: &[usize]) -> Result<Option<FilteredHit>> {
    if let Some(hit) = ctx.filtered.lock().expect("cache lock").get(kept) {
        return Ok(hit.clone());
    }
    let orbit = ctx.sym.orbit(kept);
    let mut hit = None;
    if orbit.rep != kept {
        if let Some((eps, _, c)) = filtered_kept(ctx, &orbit.rep)? {
            let (sites, order) = orbit.carry(&orbit.rep);
            let mut moved = eps.clone();
            for (j, &t) in order.iter().enumerate() {
                moved[t] = eps[j];
            }
            let (f, p) = filtered(&ctx.state.reduced(&sites)?, &moved)?;
            hit = certify_with(&f, &c.scenario.permuted(&order)?)?.map(|c| (moved, p, c));
        }
    }
    if hit.is_none() {
        let rho = ctx.state.reduced(kept)?;
        hit = certify_filtered(&rho, ctx.config, ctx.seed_for(kept))?;
    }
    ctx.filtered.lock().expect("cache lock").insert(kept.to_vec(), hit.clone());
    Ok(hit)
}

/// Certifies the reduced state on `kept` without filters, then with
/// filters on one of its pairs, then with filters on all of it.
fn certify_hidden(ctx: &Ctx, removed: &[usize]) -> Result<Option<FilteredCertificate>> {
    let n = ctx.state.num_sites();
    let kept = kept_sites(n, removed);
    let cert = |witnessed_by: Vec<usize>, (epsilons, success_probability, certificate): FilteredHit| FilteredCertificate {
        removed: removed.to_vec(),
        witnessed_by,
        epsilons,
        success_probability,
        certificate,
    };
    if let Some((witnessed_by, certificate)) = certify_kept(ctx, &kept)? {
        let epsilons = vec![1.0; witnessed_by.len()];
        return Ok(Some(cert(witnessed_by, (epsilons, 1.0, certificate))));
    }
    if kept.len() > 2 {
        for pair in subsets::combinations(kept.len(), 2) {
            let sites = vec![kept[pair[0]], kept[pair[1]]];
            if let Some(hit) = filtered_kept(ctx, &sites)? {
                return Ok(Some(cert(sites, hit)));
            }
        }
    }
    if (2..=MAX_PARTIES).contains(&kept.len()) {
        if let Some(hit) = filtered_kept(ctx, &kept)? {
            return Ok(Some(cert(kept, hit)));
        }
    }
    Ok(None)
}

/// As [`persistency_nonlocality`], but each reduced state may first be
/// locally filtered with `diag(eps, 1)` per site.
pub fn persistency_hidden(state: &State, budget: &Budget, seed: u64) -> Result<HiddenResult> {
    let n = state.num_sites();
    let ctx = Ctx::new(state, budget, seed);
    let mut result = HiddenResult { lb: 0, certs: Vec::new(), failed_subset: None };
    for removal in 0..n.saturating_sub(1) {
        let outcomes: Vec<(Vec<usize>, Option<FilteredCertificate>)> = subsets::combinations(n, removal)
            .into_par_iter()
            .map(|removed| Ok((removed.clone(), certify_hidden(&ctx, &removed)?)))
            .collect::<Result<_>>()?;
        if let Some((removed, _)) = outcomes.iter().find(|(_, o)| o.is_none()) {
            result.failed_subset = Some(removed.clone());
            break;
        }
        result.lb = removal + 1;
        result.certs = outcomes.into_iter().map(|(_, o)| o.expect("all certified")).collect();
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn rank_matches_enumeration() {
        for n in 1..7 {
            for k in 0..=n {
                for (i, s) in subsets::combinations(n, k).iter().enumerate() {
                    assert_eq!(subset_rank(n, s), i);
                }
            }
        }
    }

    #[test]
    fn ghz_persistency_one() {
        let s = State::from(states::ghz_state(3, 2).unwrap());
        let r = persistency_nonlocality(&s, &Budget::default(), 0).unwrap();
        assert_eq!(r.lb, 1);
        assert_eq!(r.failed_subset, Some(vec![0]));
        r.verify(&s).unwrap();
    }

    #[test]
    fn psi3_every_single_removal_violates() {
        let s = State::from(states::psi_max_persistency(3, 0.4518).unwrap());
        let r = persistency_nonlocality(&s, &Budget::default(), 0).unwrap();
        assert_eq!(r.lb, 2);
        assert_eq!(r.certs.len(), 3);
        r.verify(&s).unwrap();
    }

    #[test]
    fn golden_section_finds_interior_and_edge() {
        let (x, _) = golden_section(|x| Ok(-(x - 0.3) * (x - 0.3)), 0.0, 1.0, 1e-6).unwrap();
        assert!((x - 0.3).abs() < 1e-5);
        let (x, _) = golden_section(|x| Ok(-x), 1e-3, 1.0, 1e-4).unwrap();
        assert!(x < 1e-3 + 1e-4);
    }

    #[test]
    fn w_hidden_reaches_maximal() {
        for n in 3..6 {
            let s = State::from(states::w_state(n).unwrap());
            let r = persistency_hidden(&s, &Budget::default(), 0).unwrap();
            assert_eq!(r.lb, n - 1, "W{n}");
            r.verify(&s).unwrap();
            assert!(r.certs.iter().all(|c| c.success_probability > 0.0));
        }
    }

    #[test]
    fn identity_filters_recover_plain_results() {
        let s = State::from(states::linear_cluster(4).unwrap());
        let plain = persistency_nonlocality(&s, &Budget::default(), 3).unwrap();
        let hidden = persistency_hidden(&s, &Budget::default(), 3).unwrap();
        assert_eq!(hidden.lb, plain.lb);
        for (p, h) in plain.certs.iter().zip(&hidden.certs) {
            assert_eq!(p.certificate, h.certificate);
            assert!(h.epsilons.iter().all(|e| *e == 1.0));
        }
    }
}
