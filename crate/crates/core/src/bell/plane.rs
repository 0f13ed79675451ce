//! Settings restricted to the x-z plane of the `{|0>, |1>}` subspace.
//!
//! A coarse scan with the same pair of angles at every party, then a compass
//! search over all angles independently. The see-saw tends to stall on
//! positivity facets for states with vanishing outcome probabilities (W-type
//! residues); the gauge itself has no such plateau along these directions.

use std::f64::consts::PI;

use crate::error::Result;

use super::correlators::PairTensor;
use super::lp::GaugeLp;
use super::observable::{DichotomicObservable, MeasurementScenario};

pub const DEFAULT_GRID: usize = 24;
const MIN_STEP: f64 = 1e-5;

fn plane_observable(d: usize, angle: f64) -> Result<DichotomicObservable> {
    DichotomicObservable::embedded(d, (0, 1), [angle.sin(), 0.0, angle.cos()])
}

/// `angles[2i + x]` is the angle of party `i`, setting `x`, from the z axis.
pub fn plane_scenario(dims: &[usize], angles: &[f64]) -> Result<MeasurementScenario> {
    let parties = dims
        .iter()
        .zip(angles.chunks(2))
        .map(|(&d, a)| Ok([plane_observable(d, a[0])?, plane_observable(d, a[1])?]))
        .collect::<Result<Vec<_>>>()?;
    MeasurementScenario::new(parties)
}

/// Best plane settings found and their gauge.
pub fn plane_seed(pt: &PairTensor, lp: &mut GaugeLp, grid: usize) -> Result<(f64, MeasurementScenario)> {
    let dims = pt.dims().to_vec();
    let k = dims.len();
    let mut gauge = |angles: &[f64]| -> Result<f64> {
        let sc = plane_scenario(&dims, angles)?;
        Ok(lp.solve(&pt.correlators(&sc)?)?.gauge)
    };
    let grid = grid.max(2);
    let mut best = (f64::NEG_INFINITY, vec![0.0; 2 * k]);
    for i in 0..grid {
        for j in 0..grid {
            let pair = [PI * i as f64 / grid as f64, PI * j as f64 / grid as f64];
            let angles = pair.repeat(k);
            let g = gauge(&angles)?;
            if g > best.0 {
                best = (g, angles);
            }
        }
    }
    let (mut g, mut angles) = best;
    let mut step = PI / grid as f64;
    while step > MIN_STEP {
        let mut moved = false;
        for i in 0..angles.len() {
            for s in [step, -step] {
                let mut trial = angles.clone();
                trial[i] += s;
                let v = gauge(&trial)?;
                if v > g + 1e-12 {
                    g = v;
                    angles = trial;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok((g, plane_scenario(&dims, &angles)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn plane_scenario_layout() {
        let sc = plane_scenario(&[2, 2], &[0.0, PI / 2.0, PI, 0.0]).unwrap();
        let z = crate::linalg::pauli_z();
        let x = crate::linalg::pauli_x();
        assert!(crate::linalg::max_abs_diff(sc.observable(0, 0).matrix(), &z) < 1e-12);
        assert!(crate::linalg::max_abs_diff(sc.observable(0, 1).matrix(), &x) < 1e-12);
        assert!(crate::linalg::max_abs_diff(sc.observable(1, 0).matrix(), &(-z)) < 1e-12);
    }

    #[test]
    fn w3_plane_seed_reaches_known_visibility() {
        let rho = states::w_state(3).unwrap().reduced(&[0, 1, 2]).unwrap();
        let pt = PairTensor::new(&rho);
        let mut lp = GaugeLp::new(3);
        let (g, _) = plane_seed(&pt, &mut lp, DEFAULT_GRID).unwrap();
        assert!((1.0 / g - 0.6442).abs() < 5e-4, "v* = {}", 1.0 / g);
    }
}
