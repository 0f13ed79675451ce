use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::DensityOperator;

use super::correlators::{correlator_digits, correlator_index, correlators, num_correlators};
use super::functional::MAX_PARTIES;
use super::observable::MeasurementScenario;

const NORMALIZATION_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-12;
pub const NO_SIGNALLING_TOL: f64 = 1e-9;

/// Joint outcome probabilities `p(a|x)` for two settings and two outcomes per
/// party. Entry `x * 2^k + a`, both indices with party 0 most significant;
/// outcome bit 0 is `+1`, bit 1 is `-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorTable {
    parties: usize,
    probabilities: Vec<f64>,
}

impl BehaviorTable {
    pub fn new(parties: usize, probabilities: Vec<f64>) -> Result<Self> {
        if parties == 0 || parties > MAX_PARTIES {
            return Err(Error::ScenarioTooLarge(parties));
        }
        let n = 1usize << parties;
        if probabilities.len() != n * n {
            return Err(Error::InvalidBehavior(format!("expected {} probabilities", n * n)));
        }
        let b = BehaviorTable { parties, probabilities };
        for x in 0..n {
            let row = &b.probabilities[x * n..(x + 1) * n];
            if let Some(p) = row.iter().find(|p| **p < -POSITIVITY_TOL || !p.is_finite()) {
                return Err(Error::InvalidBehavior(format!("negative probability {p}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidBehavior(format!("distribution for settings {x} sums to {s}")));
            }
        }
        Ok(b)
    }

    /// `p(a|x) = 2^-k sum_S prod_{i in S} a_i c_{S, x_S}`.
    pub fn from_correlators(parties: usize, c: &[f64]) -> Result<Self> {
        if c.len() != num_correlators(parties) {
            return Err(Error::InvalidBehavior("wrong correlator count".into()));
        }
        let n = 1usize << parties;
        let mut p = vec![0.0; n * n];
        let scale = 1.0 / n as f64;
        for x in 0..n {
            for s in 0..n {
                // subset bitmask s; correlator digits from x restricted to s
                let mut ds = vec![0; parties];
                for (i, d) in ds.iter_mut().enumerate() {
                    if (s >> (parties - 1 - i)) & 1 == 1 {
                        *d = 1 + ((x >> (parties - 1 - i)) & 1);
                    }
                }
                let cv = c[correlator_index(&ds)];
                for a in 0..n {
                    let parity = (a & s).count_ones() % 2;
                    let sgn = if parity == 0 { 1.0 } else { -1.0 };
                    p[x * n + a] += scale * sgn * cv;
                }
            }
        }
        Self::new(parties, p)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn probability(&self, outcomes: &[bool], settings: &[usize]) -> f64 {
        let n = 1usize << self.parties;
        let a = outcomes.iter().fold(0, |acc, &o| (acc << 1) | usize::from(!o));
        let x = settings.iter().fold(0, |acc, &s| (acc << 1) | s);
        self.probabilities[x * n + a]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Correlator of `mu` with absent parties at the settings in `x_fill`.
    fn correlator_with(&self, mu: usize, x_fill: usize) -> f64 {
        let k = self.parties;
        let n = 1usize << k;
        let ds = correlator_digits(mu, k);
        let mut x = 0;
        let mut mask = 0;
        for (i, &d) in ds.iter().enumerate() {
            let bit = if d == 0 { (x_fill >> (k - 1 - i)) & 1 } else { d - 1 };
            x = (x << 1) | bit;
            mask = (mask << 1) | usize::from(d != 0);
        }
        (0..n)
            .map(|a| {
                let parity = (a & mask).count_ones() % 2;
                let sgn = if parity == 0 { 1.0 } else { -1.0 };
                sgn * self.probabilities[x * n + a]
            })
            .sum()
    }

    /// Correlators, reading marginals at setting 0 for absent parties.
    pub fn correlators(&self) -> Vec<f64> {
        (0..num_correlators(self.parties)).map(|mu| self.correlator_with(mu, 0)).collect()
    }

    /// Largest change of any marginal correlator when absent parties switch
    /// settings.
    pub fn no_signalling_defect(&self) -> f64 {
        let n = 1usize << self.parties;
        let mut worst: f64 = 0.0;
        for mu in 0..num_correlators(self.parties) {
            let base = self.correlator_with(mu, 0);
            for x in 1..n {
                worst = worst.max((self.correlator_with(mu, x) - base).abs());
            }
        }
        worst
    }

    pub fn is_no_signalling(&self) -> bool {
        self.no_signalling_defect() <= NO_SIGNALLING_TOL
    }
}

/// Behavior of `rho` under `scenario`.
pub fn behavior(rho: &DensityOperator, scenario: &MeasurementScenario) -> Result<BehaviorTable> {
    if scenario.num_parties() > MAX_PARTIES {
        return Err(Error::ScenarioTooLarge(scenario.num_parties()));
    }
    let c = correlators(rho, scenario)?;
    BehaviorTable::from_correlators(scenario.num_parties(), &c)
}
