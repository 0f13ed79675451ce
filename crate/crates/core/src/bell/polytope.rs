use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::behavior::BehaviorTable;
use super::correlators::vertex_correlators;
use super::functional::{BellFunctional, MAX_PARTIES};
use super::lp::{GaugeLp, GaugeSolution};

pub const VIOLATION_TOL: f64 = 1e-9;
const RECONSTRUCT_TOL: f64 = 1e-9;

/// Convex weights over deterministic strategies plus a weight on the uniform
/// mixture of all `4^k` strategies (whose correlators vanish).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDecomposition {
    pub parties: usize,
    pub weights: Vec<(usize, f64)>,
    pub uniform_weight: f64,
}

impl LocalDecomposition {
    pub fn correlators(&self) -> Vec<f64> {
        let mut out = vec![0.0; super::correlators::num_correlators(self.parties)];
        out[0] = self.uniform_weight;
        for &(j, w) in &self.weights {
            for (o, v) in out.iter_mut().zip(vertex_correlators(j, self.parties)) {
                *o += w * v;
            }
        }
        out
    }

    pub fn total_weight(&self) -> f64 {
        self.uniform_weight + self.weights.iter().map(|(_, w)| w).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlocalWitness {
    pub functional: BellFunctional,
    /// Value `S` of the functional on the behavior.
    pub value: f64,
    /// `S - L`.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Membership {
    Local(LocalDecomposition),
    Nonlocal(NonlocalWitness),
}

impl Membership {
    pub fn is_local(&self) -> bool {
        matches!(self, Membership::Local(_))
    }
}

/// Classifies correlators using a (possibly warm) LP.
pub fn classify(lp: &mut GaugeLp, c: &[f64]) -> Result<(Membership, GaugeSolution)> {
    let k = lp.parties();
    let sol = lp.solve(c)?;
    if sol.gauge > 1.0 {
        if let Some(w) = witness_from_dual(k, &sol.dual, c)? {
            return Ok((Membership::Nonlocal(w), sol));
        }
    }
    let g = sol.gauge.max(1.0);
    let weights: Vec<(usize, f64)> = sol.weights.iter().map(|&(j, w)| (j, w / g)).collect();
    let dec = LocalDecomposition {
        parties: k,
        uniform_weight: (1.0 - sol.gauge / g).max(0.0),
        weights,
    };
    Ok((Membership::Local(dec), sol))
}

/// Normalizes a dual vector to unit max coefficient and re-verifies it by
/// enumeration. Returns `None` unless `S - L > 1e-9`.
pub fn witness_from_dual(parties: usize, dual: &[f64], c: &[f64]) -> Result<Option<NonlocalWitness>> {
    let scale = dual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(None);
    }
    // snap coefficients that are zero up to round-off
    let dense: Vec<f64> = dual
        .iter()
        .map(|v| {
            let x = v / scale;
            if x.abs() < 1e-12 {
                0.0
            } else {
                x
            }
        })
        .collect();
    let f = BellFunctional::from_dense(parties, &dense)?;
    let value = f.value(c)?;
    let violation = value - f.local_bound();
    if violation > VIOLATION_TOL {
        Ok(Some(NonlocalWitness { functional: f, value, violation }))
    } else {
        Ok(None)
    }
}

/// Exact membership of a behavior in the local polytope (two settings, two
/// outcomes, at most six parties).
pub fn local_polytope_membership(b: &BehaviorTable) -> Result<Membership> {
    let k = b.parties();
    if k > MAX_PARTIES {
        return Err(Error::ScenarioTooLarge(k));
    }
    let c = b.correlators();
    let mut lp = GaugeLp::new(k);
    let (m, _) = classify(&mut lp, &c)?;
    if let Membership::Local(dec) = &m {
        let rec = dec.correlators();
        let err = rec.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > RECONSTRUCT_TOL {
            return Err(Error::Lp(format!("decomposition residual {err:.3e}")));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::behavior::behavior;
    use crate::bell::observable::{DichotomicObservable, MeasurementScenario};
    use crate::random;
    use crate::register::QuditRegister;
    use proptest::prelude::*;

    fn chsh_optimal() -> MeasurementScenario {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        MeasurementScenario::new(vec![
            [DichotomicObservable::qubit([0.0, 0.0, 1.0]).unwrap(), DichotomicObservable::qubit([1.0, 0.0, 0.0]).unwrap()],
            [DichotomicObservable::qubit([s, 0.0, s]).unwrap(), DichotomicObservable::qubit([-s, 0.0, s]).unwrap()],
        ])
        .unwrap()
    }

    #[test]
    fn phi_plus_witness() {
        let rho = crate::states::bell_state().density().unwrap();
        let b = behavior(&rho, &chsh_optimal()).unwrap();
        match local_polytope_membership(&b).unwrap() {
            Membership::Nonlocal(w) => {
                assert!((w.violation - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-6, "{}", w.violation);
                w.functional.verify_local_bound().unwrap();
            }
            Membership::Local(_) => panic!("expected a witness"),
        }
    }

    #[test]
    fn uniform_behavior_is_local() {
        let b = BehaviorTable::new(2, vec![0.25; 16]).unwrap();
        match local_polytope_membership(&b).unwrap() {
            Membership::Local(d) => {
                assert!((d.total_weight() - 1.0).abs() < 1e-12);
                assert!(d.correlators()[1..].iter().all(|c| c.abs() < 1e-12));
            }
            Membership::Nonlocal(_) => panic!(),
        }
    }

    #[test]
    fn too_many_parties() {
        assert!(matches!(BehaviorTable::new(7, vec![]), Err(Error::ScenarioTooLarge(7))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn separable_states_are_local(seed in any::<u64>(), k in 2usize..4, terms in 1usize..4) {
            let mut rng = random::rng(seed);
            let reg = QuditRegister::qubits(k).unwrap();
            let parts: Vec<_> = (0..terms).map(|_| random::product_state(&reg, &mut rng).0.density().unwrap()).collect();
            let weights: Vec<f64> = (0..terms).map(|_| rand::Rng::gen_range(&mut rng, 0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let mix: Vec<(f64, &crate::state::DensityOperator)> = weights.iter().map(|w| w / total).zip(parts.iter()).collect();
            let rho = crate::state::DensityOperator::mixture(&mix).unwrap();
            let sc = MeasurementScenario::random(&vec![2; k], &mut rng);
            let b = behavior(&rho, &sc).unwrap();
            let m = local_polytope_membership(&b).unwrap();
            prop_assert!(m.is_local());
            if let Membership::Local(d) = m {
                prop_assert!(d.weights.iter().all(|(_, w)| *w >= 0.0));
                prop_assert!((d.total_weight() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn witnesses_reverify(seed in any::<u64>()) {
            let mut rng = random::rng(seed);
            let reg = QuditRegister::qubits(2).unwrap();
            let rho = random::pure_state(&reg, &mut rng).density().unwrap();
            let sc = MeasurementScenario::random(&[2, 2], &mut rng);
            let b = behavior(&rho, &sc).unwrap();
            match local_polytope_membership(&b).unwrap() {
                Membership::Nonlocal(w) => {
                    w.functional.verify_local_bound().unwrap();
                    let direct = w.functional.vertex_values().into_iter().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!((direct - w.functional.local_bound()).abs() < 1e-9);
                    prop_assert!(w.functional.value(&b.correlators()).unwrap() - direct > 1e-9);
                }
                Membership::Local(d) => {
                    let rec = d.correlators();
                    for (a, c) in rec.iter().zip(b.correlators()) {
                        prop_assert!((a - c).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
