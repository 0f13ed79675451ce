use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::random::SeededRng;
use crate::state::DensityOperator;

use super::correlators::PairTensor;
use super::functional::BellFunctional;
use super::observable::{DichotomicObservable, MeasurementScenario};

pub const DEFAULT_RESTARTS: usize = 32;
pub const MAX_SWEEPS: usize = 500;
pub const SWEEP_TOL: f64 = 1e-10;

/// Coordinate ascent from `start`: each party in turn takes the optimal
/// response to its conditional operators. Qubits respond with the traceless
/// observable `|v_max><v_max| - |v_min><v_min|`; higher dimensions with
/// `sign(K)`. Returns the final value (nondecreasing across sweeps) and the
/// settings.
pub fn seesaw_from(
    pt: &PairTensor,
    f: &[f64],
    start: MeasurementScenario,
    max_sweeps: usize,
) -> Result<(f64, MeasurementScenario)> {
    let k = pt.dims().len();
    let mut sc = start;
    let mut value = dot(f, &pt.correlators(&sc)?);
    for _ in 0..max_sweeps {
        let mut v = value;
        for party in 0..k {
            let ks = pt.conditional_operators(&sc, party, f)?;
            let o0 = best_response(&ks[1]).unwrap_or_else(|| sc.observable(party, 0).clone());
            let o1 = best_response(&ks[2]).unwrap_or_else(|| sc.observable(party, 1).clone());
            let trial = linalg::trace(&ks[0]).re
                + linalg::trace_product(&ks[1], o0.matrix()).re
                + linalg::trace_product(&ks[2], o1.matrix()).re;
            // keep the old settings on ties so round-off cannot decrease the value
            if trial > v {
                sc.set(party, 0, o0);
                sc.set(party, 1, o1);
                v = trial;
            }
        }
        let improved = v - value;
        value = v;
        if improved < SWEEP_TOL {
            break;
        }
    }
    Ok((value, sc))
}

fn best_response(k: &CMatrix) -> Option<DichotomicObservable> {
    if k.nrows() != 2 {
        return Some(DichotomicObservable::sign_of(k));
    }
    let eig = linalg::eig_unchecked(k);
    if eig.values[0] - eig.values[1] < 1e-14 {
        return None;
    }
    let v = eig.vectors.column(0).clone_owned();
    let m = linalg::outer(&v).scale(2.0) - linalg::identity(2);
    Some(DichotomicObservable::new(linalg::hermitian_part(&m)).expect("reflection"))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Best value of `f` over `restarts` random starts (lowest index wins ties).
pub fn seesaw_maximize(
    rho: &DensityOperator,
    f: &BellFunctional,
    restarts: usize,
    seed: u64,
) -> Result<(f64, MeasurementScenario)> {
    if f.parties() != rho.num_sites() {
        return Err(Error::DimensionMismatch(format!(
            "functional has {} parties, state has {} sites",
            f.parties(),
            rho.num_sites()
        )));
    }
    let pt = PairTensor::new(rho);
    let dense = f.dense();
    let mut rng = SeededRng::seed_from_u64(seed);
    let mut best: Option<(f64, MeasurementScenario)> = None;
    for _ in 0..restarts.max(1) {
        let start = MeasurementScenario::random(rho.dims(), &mut rng);
        let (v, sc) = seesaw_from(&pt, &dense, start, MAX_SWEEPS)?;
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, sc));
        }
    }
    Ok(best.expect("at least one restart"))
}
