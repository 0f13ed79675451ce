//! Site permutations that leave a state invariant. Reduced states related by
//! such a permutation are identical up to the order of their parties, so one
//! representative per orbit is searched and its settings are carried over
//! (and re-certified) for the rest.

use itertools::Itertools;

use crate::bell::search::certify_with;
use crate::bell::{MeasurementScenario, NonlocalCertificate};
use crate::error::Result;
use crate::linalg;
use crate::states::State;

/// Registers up to this size are tested against every permutation; larger
/// ones only against rotations and reflections.
const FULL_GROUP_SITES: usize = 7;
const INVARIANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct Symmetry {
    /// Each `pi` satisfies `rho_(r1..rk) = rho_(pi(r1)..pi(rk))`.
    perms: Vec<Vec<usize>>,
}

/// Where each subset lives relative to its orbit representative.
#[derive(Debug, Clone)]
pub(crate) struct OrbitMap {
    pub rep: Vec<usize>,
    /// Site permutation taking `rep` onto the subset.
    pub perm: Vec<usize>,
}

impl OrbitMap {
    /// Image of the sorted `sites` of the representative, sorted, with the
    /// position each original party lands on.
    pub fn carry(&self, sites: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let image: Vec<usize> = sites.iter().map(|&s| self.perm[s]).collect();
        let sorted: Vec<usize> = image.iter().copied().sorted().collect();
        let order = image.iter().map(|s| sorted.binary_search(s).expect("present")).collect();
        (sorted, order)
    }

    /// Re-certifies settings found for the representative's sub-register
    /// `witnessed_by` on the corresponding sites here.
    pub fn transfer(
        &self,
        state: &State,
        witnessed_by: &[usize],
        scenario: &MeasurementScenario,
    ) -> Result<Option<(Vec<usize>, NonlocalCertificate)>> {
        let (sites, order) = self.carry(witnessed_by);
        let sc = scenario.permuted(&order)?;
        Ok(certify_with(&state.reduced(&sites)?, &sc)?.map(|c| (sites, c)))
    }
}

fn candidates(n: usize) -> Vec<Vec<usize>> {
    if n <= FULL_GROUP_SITES {
        return (0..n).permutations(n).collect();
    }
    let mut out = Vec::with_capacity(2 * n);
    for shift in 0..n {
        out.push((0..n).map(|s| (s + shift) % n).collect());
        out.push((0..n).map(|s| (n + shift - s) % n).collect());
    }
    out
}

/// `index(x o pi)` for every index `x`, with `(x o pi)_s = x_pi(s)`.
fn index_map(dims: &[usize], pi: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    (0..total)
        .map(|x| {
            let d = linalg::digits(x, dims);
            let y: Vec<usize> = pi.iter().map(|&p| d[p]).collect();
            linalg::index_of(&y, dims)
        })
        .collect()
}

fn invariant(state: &State, pi: &[usize]) -> bool {
    let dims = state.dims();
    if pi.iter().enumerate().any(|(s, &p)| dims[s] != dims[p]) {
        return false;
    }
    let map = index_map(dims, pi);
    match state {
        State::Pure(psi) => {
            let a = psi.amplitudes();
            let overlap: num_complex::Complex64 = map.iter().enumerate().map(|(x, &y)| a[x].conj() * a[y]).sum();
            overlap.norm() >= 1.0 - INVARIANCE_TOL
        }
        State::Mixed(rho) => {
            let m = rho.matrix();
            map.iter().enumerate().all(|(i, &pi_i)| {
                map.iter().enumerate().all(|(j, &pi_j)| (m[(i, j)] - m[(pi_i, pi_j)]).norm() < INVARIANCE_TOL)
            })
        }
    }
}

impl Symmetry {
    pub fn of(state: &State) -> Self {
        let n = state.num_sites();
        let mut perms: Vec<Vec<usize>> = candidates(n).into_iter().filter(|pi| invariant(state, pi)).collect();
        if perms.is_empty() {
            perms.push((0..n).collect());
        }
        Symmetry { perms }
    }

    #[cfg(test)]
    pub fn order(&self) -> usize {
        self.perms.len()
    }

    /// Lexicographically smallest image of `sites` and the permutation that
    /// maps it back onto `sites`.
    pub fn orbit(&self, sites: &[usize]) -> OrbitMap {
        let mut best: Option<(Vec<usize>, &Vec<usize>)> = None;
        for pi in &self.perms {
            let image: Vec<usize> = sites.iter().map(|&s| pi[s]).sorted().collect();
            if best.as_ref().is_none_or(|(b, _)| image < *b) {
                best = Some((image, pi));
            }
        }
        let (rep, pi) = best.expect("identity present");
        let mut inverse = vec![0; pi.len()];
        for (s, &p) in pi.iter().enumerate() {
            inverse[p] = s;
        }
        OrbitMap { rep, perm: inverse }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn group_orders() {
        let w = State::from(states::w_state(4).unwrap());
        assert_eq!(Symmetry::of(&w).order(), 24);
        // the ring is invariant under its rotations and reflections
        let r = State::from(states::ring_cluster(5).unwrap());
        assert_eq!(Symmetry::of(&r).order(), 10);
        let l = State::from(states::linear_cluster(5).unwrap());
        assert_eq!(Symmetry::of(&l).order(), 2);
    }

    #[test]
    fn orbit_members_share_reduced_states() {
        for spec in ["ti:6:2", "ring:6", "linear:5", "dicke:5:2"] {
            let s: State = spec.parse::<crate::states::StateSpec>().unwrap().build().unwrap();
            let sym = Symmetry::of(&s);
            let n = s.num_sites();
            for kept in crate::subsets::combinations(n, 3) {
                let o = sym.orbit(&kept);
                let (sites, order) = o.carry(&o.rep);
                assert_eq!(sites, kept);
                let a = s.reduced(&o.rep).unwrap();
                let b = s.reduced(&kept).unwrap();
                // same state once the parties of `a` are moved to `order`
                let dims = vec![2usize; 3];
                let map = index_map(&dims, &order);
                let (ma, mb) = (a.matrix(), b.matrix());
                for i in 0..8 {
                    for j in 0..8 {
                        assert!((ma[(map[i], map[j])] - mb[(i, j)]).norm() < 1e-12, "{spec} {kept:?}");
                    }
                }
            }
        }
    }
}
