//! Scalar reference values: each item recomputes a number from first
//! principles and compares it with its published target.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::bell::chsh::{self, chsh_value, heralded_tripartite_i, horodecki_chsh_max, max_chsh, optimize_gme_witness};
use crate::bell::DichotomicObservable;
use crate::error::Result;
use crate::register::QuditRegister;
use crate::state::{DensityOperator, LocalFilter, StateVector};
use crate::states;

pub const THETA_PSI3: f64 = 0.6278;
pub const A_PSI3: f64 = 0.6469;
pub const SEESAW_RESTARTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineItem {
    pub name: String,
    pub target: f64,
    pub computed: f64,
    pub delta: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl HeadlineItem {
    fn new(name: &str, target: f64, computed: f64, tol: f64) -> Self {
        let delta = (computed - target).abs();
        HeadlineItem { name: name.into(), target, computed, delta, tol, pass: delta <= tol, note: None }
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineReport {
    pub seed: u64,
    pub items: Vec<HeadlineItem>,
}

impl HeadlineReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
}

/// Three-site residue of the four-qubit chain after losing an end qubit;
/// site 0 is the dephased neighbor that acts as a flag.
pub fn chain_residue() -> Result<DensityOperator> {
    states::linear_cluster(4)?.reduced(&[1, 2, 3])
}

/// `p |W2><W2| + (1 - p) |00><00|`, the two-site marginal of a W state
/// for `p = 2 / N`.
pub fn w_residue_pair(p: f64) -> Result<DensityOperator> {
    let reg = QuditRegister::qubits(2)?;
    let w2 = states::w_state(2)?.density()?;
    let zero = StateVector::basis(reg, 0)?.density()?;
    DensityOperator::mixture(&[(p, &w2), (1.0 - p, &zero)])
}

/// `2 sqrt 2 p / ((1 - p) eps^2 + p)`.
pub fn filtered_w_closed_form(p: f64, eps: f64) -> f64 {
    2.0 * SQRT_2 * p / ((1.0 - p) * eps * eps + p)
}

/// Maximal CHSH of the W residue pair after `diag(eps, 1)` on both sites.
pub fn filtered_w_chsh(p: f64, eps: f64) -> Result<f64> {
    let f = LocalFilter::attenuate_zero(2, eps)?;
    let (rho, _) = w_residue_pair(p)?.apply_filters(&[Some(f.clone()), Some(f)])?;
    Ok(horodecki_chsh_max(&rho)?.value)
}

/// Grid on which the transverse correlations dominate, so that the closed
/// form is the Horodecki maximum: the filtered singlet weight stays >= 1/3.
pub fn closed_form_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::with_capacity(100);
    for i in 0..10 {
        let p = 0.35 + 0.07 * i as f64;
        for j in 0..10 {
            g.push((p, 0.05 + 0.105 * j as f64));
        }
    }
    g
}

/// Largest deviation between the filtered CHSH and its closed form.
pub fn closed_form_deviation() -> Result<f64> {
    closed_form_grid()
        .into_iter()
        .map(|(p, e)| Ok((filtered_w_chsh(p, e)? - filtered_w_closed_form(p, e)).abs()))
        .try_fold(0.0f64, |m, d: Result<f64>| Ok(m.max(d?)))
}

/// CHSH of the three-qutrit marginal at the fixed settings `A = (Z, X)` on
/// levels `{0, 1}`, `B = (Z, cos beta Z - sin beta X)` on levels `{0, 2}`,
/// `tan beta = sin 2 theta`.
pub fn psi3_fixed_settings_chsh(theta: f64) -> Result<f64> {
    let b = states::psi_b_from_theta(3, theta);
    let rho = states::psi_max_persistency(3, b)?.reduced(&[0, 1])?;
    let beta = (2.0 * theta).sin().atan();
    let a0 = DichotomicObservable::embedded(3, (0, 1), [0.0, 0.0, 1.0])?;
    let a1 = DichotomicObservable::embedded(3, (0, 1), [1.0, 0.0, 0.0])?;
    let b0 = DichotomicObservable::embedded(3, (0, 2), [0.0, 0.0, 1.0])?;
    let b1 = DichotomicObservable::embedded(3, (0, 2), [-beta.sin(), 0.0, beta.cos()])?;
    chsh_value(&rho, &a0, &a1, &b0, &b1)
}

/// Closed-form maximum over `beta` at angle `theta`.
pub fn psi3_chsh_closed_form(theta: f64) -> f64 {
    let s2 = theta.sin().powi(2);
    (1.0 + 4.0 * s2 + (1.0 + (2.0 * theta).sin().powi(2)).sqrt()) / (1.0 + 2.0 * s2)
}

/// `S` of the three-qutrit state with `|000>` amplitude `a`.
pub fn psi3_gme_s(a: f64, seed: u64) -> Result<chsh::GmeWitness> {
    let b = ((1.0 - a * a) / 3.0).sqrt();
    let rho = states::psi_max_persistency(3, b)?.density()?;
    Ok(optimize_gme_witness(&rho, SEESAW_RESTARTS, seed)?.0)
}

/// See-saw CHSH of the four-site state with two sites kept.
pub fn psi4_pair_chsh(keep: [usize; 2], seed: u64) -> Result<f64> {
    let rho = states::psi4_appendix().reduced(&keep)?;
    Ok(max_chsh(&rho, SEESAW_RESTARTS, seed)?.0)
}

pub fn headline(seed: u64) -> Result<HeadlineReport> {
    let mut items = Vec::new();

    let rho = chain_residue()?;
    let z = DichotomicObservable::qubit([0.0, 0.0, 1.0])?;
    let (pair, _) = chsh::heralded_pair(&rho, &z)?;
    let h = horodecki_chsh_max(&pair)?;
    let [b0, b1, c0, c1] = &h.observables;
    let heralded = heralded_tripartite_i(&rho, &z, [b0, b1], [c0, c1])?;
    items.push(
        HeadlineItem::new("I heralded, chain residue", 4.0 * SQRT_2, heralded, 1e-4)
            .with_note("value on runs with A = +1; the unconditioned expectation follows"),
    );
    let plain = chsh::tripartite_i(&rho, &z, [b0, b1], [c0, c1])?;
    items.push(
        HeadlineItem::new("I expectation, chain residue", 2.0 + 2.0 * SQRT_2, plain, 1e-9)
            .with_note("local bound 4"),
    );

    items.push(HeadlineItem::new(
        "CHSH psi3 at theta = 0.6278",
        2.2247,
        psi3_fixed_settings_chsh(THETA_PSI3)?,
        1e-3,
    ));

    let s = psi3_gme_s(A_PSI3, seed)?;
    items.push(HeadlineItem::new("S psi3 at a = 0.6469", 7.2261, s.s, 1e-3).with_note(&format!(
        "bound {:.4}; pairs {:.4} {:.4} {:.4}",
        chsh::gme_bound(),
        s.chsh[0],
        s.chsh[1],
        s.chsh[2]
    )));

    let adjacent = [[2, 3], [0, 3], [0, 1], [1, 2]]
        .iter()
        .enumerate()
        .map(|(i, k)| psi4_pair_chsh(*k, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let opposite = [[1, 3], [0, 2]]
        .iter()
        .enumerate()
        .map(|(i, k)| psi4_pair_chsh(*k, seed.wrapping_add(4 + i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    items.push(
        HeadlineItem::new("CHSH psi4, adjacent pair removed", 2.3226, min(&adjacent), 2e-3)
            .with_note("minimum over the four adjacent removals"),
    );
    items.push(
        HeadlineItem::new("CHSH psi4, opposite pair removed", 2.3216, min(&opposite), 2e-3)
            .with_note("minimum over the two opposite removals"),
    );

    items.push(
        HeadlineItem::new("filtered W pair, max deviation from closed form", 0.0, closed_form_deviation()?, 1e-9)
            .with_note("10 x 10 grid, p in [0.35, 0.98], eps in [0.05, 1]"),
    );

    Ok(HeadlineReport { seed, items })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_settings_match_closed_form() {
        for theta in [0.2, 0.6278, 1.1] {
            let v = psi3_fixed_settings_chsh(theta).unwrap();
            assert!((v - psi3_chsh_closed_form(theta)).abs() < 1e-12, "theta {theta}");
        }
        assert!((psi3_chsh_closed_form(THETA_PSI3) - 2.2247).abs() < 1e-4);
    }

    #[test]
    fn closed_form_spot_value() {
        // oracle: singlet weight after filtering is p / (p + (1 - p) eps^2)
        let (p, eps) = (2.0f64 / 7.0, 0.05f64);
        let q = p / (p + (1.0 - p) * eps * eps);
        let v = filtered_w_chsh(p, eps).unwrap();
        assert!((v - 2.0 * SQRT_2 * q).abs() < 1e-12);
        assert!((v - 2.8109).abs() < 1e-4);
        assert_eq!(closed_form_grid().len(), 100);
    }

    #[test]
    fn chain_residue_has_flag() {
        let rho = chain_residue().unwrap();
        assert_eq!(rho.dims(), &[2, 2, 2]);
        let z = DichotomicObservable::qubit([0.0, 0.0, 1.0]).unwrap();
        let (pair, p) = chsh::heralded_pair(&rho, &z).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!((horodecki_chsh_max(&pair).unwrap().value - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn report_passes() {
        let r = headline(0).unwrap();
        for i in &r.items {
            assert!(i.pass, "{}: {} vs {}", i.name, i.computed, i.target);
        }
    }
}
