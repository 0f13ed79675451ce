//! Revised simplex for the gauge program of the local polytope:
//!
//! ```text
//! minimize sum_l q_l   subject to   D q = c,  q >= 0
//! ```
//!
//! where the columns of `D` are the deterministic correlator vectors (the
//! constant row dropped). The optimum `g` is the gauge of `c`: `c` is local
//! iff `g <= 1`. The optimal dual `y` satisfies `y . d_l <= 1` for every
//! vertex and `y . c = g`, so it is a Bell functional whenever `g > 1`.
//!
//! The last optimal basis is kept so that a new right-hand side restarts
//! from a dual-feasible basis with the dual simplex.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::correlators::{local_values, num_correlators, vertex_transform};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_BEFORE_BLAND: usize = 64;
/// Consecutive degenerate phase-1 pivots, in units of rows, before giving up.
const STALL_FACTOR: usize = 4;
const PERTURBATION: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct GaugeSolution {
    pub gauge: f64,
    /// `(vertex, weight)` with positive weights.
    pub weights: Vec<(usize, f64)>,
    /// Dual vector over all `3^k` correlators, constant entry zero.
    pub dual: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GaugeLp {
    parties: usize,
    m: usize,
    n: usize,
    /// Column-major vertex matrix, `m` rows.
    d: Vec<f64>,
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    warm: bool,
}

enum Var {
    Vertex(usize),
    Artificial(usize),
}

impl GaugeLp {
    pub fn new(parties: usize) -> Self {
        let m = num_correlators(parties) - 1;
        let n = 4usize.pow(parties as u32);
        let locals: Vec<[f64; 3]> = (0..4).map(local_values).collect();
        let mut d = vec![0.0; m * n];
        for lambda in 0..n {
            let mut ld = vec![0usize; parties];
            let mut l = lambda;
            for slot in ld.iter_mut().rev() {
                *slot = l % 4;
                l /= 4;
            }
            for mu in 1..=m {
                let mut v = 1.0;
                let mut x = mu;
                for i in (0..parties).rev() {
                    v *= locals[ld[i]][x % 3];
                    x /= 3;
                }
                d[lambda * m + mu - 1] = v;
            }
        }
        GaugeLp { parties, m, n, d, basis: Vec::new(), binv: DMatrix::zeros(0, 0), warm: false }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    fn refactor_every(&self) -> usize {
        REFACTOR_EVERY.max(self.m)
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.d[j * self.m..(j + 1) * self.m]
    }

    /// `y . d_l` for all vertices, `y` over rows `1..3^k`.
    fn price(&self, y: &[f64]) -> Vec<f64> {
        let mut full = Vec::with_capacity(self.m + 1);
        full.push(0.0);
        full.extend_from_slice(y);
        vertex_transform(&full, self.parties)
    }

    fn binv_times(&self, col: &[f64]) -> DVector<f64> {
        &self.binv * DVector::from_column_slice(col)
    }

    fn pivot(&mut self, row: usize, u: &DVector<f64>, xb: &mut DVector<f64>) {
        let piv = u[row];
        let theta = xb[row] / piv;
        for i in 0..self.m {
            if i != row {
                xb[i] -= theta * u[i];
            }
        }
        xb[row] = theta;
        let prow: Vec<f64> = self.binv.row(row).iter().map(|v| v / piv).collect();
        for (j, &p) in prow.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut col = self.binv.column_mut(j);
            for i in 0..self.m {
                col[i] -= u[i] * p;
            }
            col[row] = p;
        }
    }

    fn refactor(&mut self, c: &[f64]) -> Result<DVector<f64>> {
        let mut b = DMatrix::zeros(self.m, self.m);
        for (k, &j) in self.basis.iter().enumerate() {
            b.set_column(k, &DVector::from_column_slice(self.column(j)));
        }
        self.binv = b
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Lp("singular basis".into()))?;
        Ok(self.binv_times(c))
    }

    /// Refactors a phase-1 basis that may still hold artificial columns.
    fn refactor_mixed(&mut self, vars: &[Var], signs: &[f64], rhs: &[f64]) -> Result<DVector<f64>> {
        let mut b = DMatrix::zeros(self.m, self.m);
        for (k, v) in vars.iter().enumerate() {
            match *v {
                Var::Vertex(j) => b.set_column(k, &DVector::from_column_slice(self.column(j))),
                Var::Artificial(i) => b[(i, k)] = signs[i],
            }
        }
        self.binv = b
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Lp("singular basis".into()))?;
        Ok(self.binv_times(rhs))
    }

    /// Solves for right-hand side `c` (all `3^k` correlators, constant first).
    pub fn solve(&mut self, c: &[f64]) -> Result<GaugeSolution> {
        if c.len() != self.m + 1 {
            return Err(Error::DimensionMismatch(format!("expected {} correlators", self.m + 1)));
        }
        let rhs = &c[1..];
        if self.warm {
            if let Ok(sol) = self.dual_simplex(rhs) {
                return Ok(sol);
            }
        }
        match self.cold(rhs) {
            Ok(sol) => Ok(sol),
            Err(_) => {
                // degenerate right-hand sides (many zero correlators) can stall
                // phase 1; solve a perturbed problem and repair with the dual
                // simplex from its optimal basis
                self.cold(&perturbed(rhs))?;
                self.dual_simplex(rhs)
            }
        }
    }

    fn cold(&mut self, rhs: &[f64]) -> Result<GaugeSolution> {
        self.warm = false;
        let m = self.m;
        // phase 1: artificial basis with signs matching the right-hand side
        let signs: Vec<f64> = rhs.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let mut vars: Vec<Var> = (0..m).map(Var::Artificial).collect();
        self.binv = DMatrix::from_diagonal(&DVector::from_vec(signs.clone()));
        let mut xb = DVector::from_iterator(m, rhs.iter().map(|v| v.abs()));
        let mut in_basis = vec![false; self.n];
        let max_iter = 50 * m + 1000;
        let mut degenerate = 0usize;
        let mut since_refactor = 0usize;
        let mut stalled = false;
        for _ in 0..max_iter {
            // duals for phase-1 costs: 1 on artificials, 0 on vertices
            let cb: Vec<f64> = vars.iter().map(|v| if matches!(v, Var::Artificial(_)) { 1.0 } else { 0.0 }).collect();
            if cb.iter().all(|&x| x == 0.0) {
                break;
            }
            let infeas: f64 = xb.iter().zip(&cb).map(|(x, c)| x * c).sum();
            if infeas < 1e-13 {
                break;
            }
            let y = self.binv.tr_mul(&DVector::from_vec(cb));
            let yd = self.price(y.as_slice());
            let entering = choose_entering(&yd, &in_basis, |v| -v, degenerate >= DEGENERATE_BEFORE_BLAND);
            let Some(j) = entering else { break };
            let u = self.binv_times(self.column(j));
            let Some(row) = ratio_test(&u, &xb, degenerate >= DEGENERATE_BEFORE_BLAND, |r| var_key(&vars[r], self.n)) else {
                // a phase-1 objective is bounded, so this is drift in the inverse
                if stalled {
                    return Err(Error::Lp("phase 1 unbounded".into()));
                }
                stalled = true;
                xb = self.refactor_mixed(&vars, &signs, rhs)?;
                since_refactor = 0;
                continue;
            };
            stalled = false;
            degenerate = if xb[row].abs() < 1e-12 { degenerate + 1 } else { 0 };
            if degenerate > STALL_FACTOR * m {
                return Err(Error::Lp("phase 1 stalled on a degenerate vertex".into()));
            }
            self.pivot(row, &u, &mut xb);
            if let Var::Vertex(old) = vars[row] {
                in_basis[old] = false;
            }
            vars[row] = Var::Vertex(j);
            in_basis[j] = true;
            since_refactor += 1;
            if since_refactor >= self.refactor_every() {
                xb = self.refactor_mixed(&vars, &signs, rhs)?;
                since_refactor = 0;
            }
        }
        // drive remaining artificials out of the basis
        for row in 0..m {
            if let Var::Artificial(_) = vars[row] {
                if xb[row].abs() > 1e-9 {
                    return Err(Error::Lp(format!("phase 1 left infeasibility {:.3e}", xb[row])));
                }
                let rho = self.binv.row(row).transpose();
                let alpha = self.price(rho.as_slice());
                let best = (0..self.n)
                    .filter(|&j| !in_basis[j])
                    .max_by(|&a, &b| alpha[a].abs().total_cmp(&alpha[b].abs()));
                let Some(j) = best.filter(|&j| alpha[j].abs() > 1e-7) else {
                    return Err(Error::Lp("rank-deficient vertex matrix".into()));
                };
                let u = self.binv_times(self.column(j));
                xb[row] = 0.0;
                self.pivot(row, &u, &mut xb);
                vars[row] = Var::Vertex(j);
                in_basis[j] = true;
            }
        }
        self.basis = vars.iter().map(|v| if let Var::Vertex(j) = v { *j } else { unreachable!() }).collect();
        let mut xb = self.refactor(rhs)?;
        self.phase2(rhs, &mut xb, max_iter)?;
        self.finish(rhs)
    }

    fn phase2(&mut self, rhs: &[f64], xb: &mut DVector<f64>, max_iter: usize) -> Result<()> {
        let mut in_basis = vec![false; self.n];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        let mut degenerate = 0usize;
        let mut since_refactor = 0usize;
        for _ in 0..max_iter {
            let y = self.binv.tr_mul(&DVector::from_element(self.m, 1.0));
            let yd = self.price(y.as_slice());
            let bland = degenerate >= DEGENERATE_BEFORE_BLAND;
            // reduced cost 1 - y.d
            let Some(j) = choose_entering(&yd, &in_basis, |v| 1.0 - v, bland) else {
                return Ok(());
            };
            let u = self.binv_times(self.column(j));
            let basis = self.basis.clone();
            let Some(row) = ratio_test(&u, xb, bland, |r| basis[r]) else {
                return Err(Error::Lp("phase 2 unbounded".into()));
            };
            degenerate = if xb[row].abs() < 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(row, &u, xb);
            in_basis[self.basis[row]] = false;
            self.basis[row] = j;
            in_basis[j] = true;
            since_refactor += 1;
            if since_refactor >= self.refactor_every() {
                *xb = self.refactor(rhs)?;
                since_refactor = 0;
            }
        }
        Err(Error::Lp("iteration limit reached".into()))
    }

    /// Restores primal feasibility from a dual-feasible basis.
    fn dual_simplex(&mut self, rhs: &[f64]) -> Result<GaugeSolution> {
        let mut xb = self.binv_times(rhs);
        let mut in_basis = vec![false; self.n];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        let max_iter = 50 * self.m + 1000;
        let mut since_refactor = 0usize;
        for _ in 0..max_iter {
            let Some(row) = (0..self.m)
                .filter(|&r| xb[r] < -FEAS_TOL)
                .min_by(|&a, &b| xb[a].total_cmp(&xb[b]))
            else {
                self.phase2(rhs, &mut xb, max_iter)?;
                return self.finish(rhs);
            };
            let y = self.binv.tr_mul(&DVector::from_element(self.m, 1.0));
            let yd = self.price(y.as_slice());
            let rho = self.binv.row(row).transpose();
            let alpha = self.price(rho.as_slice());
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if in_basis[j] || alpha[j] >= -PIVOT_TOL {
                    continue;
                }
                let ratio = (1.0 - yd[j]).max(0.0) / -alpha[j];
                let better = match best {
                    None => true,
                    Some((b, r)) => ratio < r - 1e-12 || (ratio <= r + 1e-12 && alpha[j].abs() > alpha[b].abs()),
                };
                if better {
                    best = Some((j, ratio));
                }
            }
            let Some((j, _)) = best else {
                return Err(Error::Lp("dual simplex found no entering column".into()));
            };
            let u = self.binv_times(self.column(j));
            self.pivot(row, &u, &mut xb);
            in_basis[self.basis[row]] = false;
            self.basis[row] = j;
            in_basis[j] = true;
            since_refactor += 1;
            if since_refactor >= self.refactor_every() {
                xb = self.refactor(rhs)?;
                since_refactor = 0;
            }
        }
        Err(Error::Lp("dual simplex iteration limit".into()))
    }

    fn finish(&mut self, rhs: &[f64]) -> Result<GaugeSolution> {
        let xb = self.refactor(rhs)?;
        self.warm = true;
        let y = self.binv.tr_mul(&DVector::from_element(self.m, 1.0));
        let mut weights: Vec<(usize, f64)> = self
            .basis
            .iter()
            .zip(xb.iter())
            .filter(|(_, &w)| w > 0.0)
            .map(|(&j, &w)| (j, w))
            .collect();
        weights.sort_by_key(|&(j, _)| j);
        let gauge = weights.iter().map(|(_, w)| w).sum();
        let mut dual = Vec::with_capacity(self.m + 1);
        dual.push(0.0);
        dual.extend(y.iter());
        Ok(GaugeSolution { gauge, weights, dual })
    }
}

/// Pushes every entry away from zero by a distinct small amount.
fn perturbed(rhs: &[f64]) -> Vec<f64> {
    rhs.iter()
        .enumerate()
        .map(|(i, &v)| {
            let delta = PERTURBATION * (1.0 + (i as f64 * 0.618_033_988_75).fract());
            if v < 0.0 { v - delta } else { v + delta }
        })
        .collect()
}

fn var_key(v: &Var, n: usize) -> usize {
    match v {
        Var::Vertex(j) => *j,
        Var::Artificial(i) => n + i,
    }
}

/// Most negative reduced cost (Dantzig) or the first negative one (Bland).
fn choose_entering(yd: &[f64], in_basis: &[bool], reduced: impl Fn(f64) -> f64, bland: bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in yd.iter().enumerate() {
        if in_basis[j] {
            continue;
        }
        let r = reduced(v);
        if r < -COST_TOL {
            if bland {
                return Some(j);
            }
            if best.map_or(true, |(_, b)| r < b) {
                best = Some((j, r));
            }
        }
    }
    best.map(|(j, _)| j)
}

fn ratio_test(u: &DVector<f64>, xb: &DVector<f64>, bland: bool, key: impl Fn(usize) -> usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..u.len() {
        if u[i] <= PIVOT_TOL {
            continue;
        }
        let ratio = xb[i].max(0.0) / u[i];
        best = match best {
            None => Some((i, ratio)),
            Some((b, r)) => {
                let tie = (ratio - r).abs() <= 1e-12;
                let take = if ratio < r - 1e-12 {
                    true
                } else if tie {
                    if bland {
                        key(i) < key(b)
                    } else {
                        u[i] > u[b]
                    }
                } else {
                    false
                };
                if take {
                    Some((i, ratio))
                } else {
                    Some((b, r))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::correlators::vertex_correlators;
    use crate::random;

    fn check(lp: &mut GaugeLp, c: &[f64]) -> GaugeSolution {
        let k = lp.parties();
        let sol = lp.solve(c).unwrap();
        // primal reconstruction
        let mut rec = vec![0.0; c.len()];
        for &(j, w) in &sol.weights {
            assert!(w > 0.0);
            for (r, v) in rec.iter_mut().zip(vertex_correlators(j, k)) {
                *r += w * v;
            }
        }
        for mu in 1..c.len() {
            assert!((rec[mu] - c[mu]).abs() < 1e-9, "row {mu}: {} vs {}", rec[mu], c[mu]);
        }
        // dual feasibility and strong duality
        let vals = vertex_transform(&sol.dual, k);
        assert!(vals.iter().all(|&v| v <= 1.0 + 1e-8));
        let yc: f64 = sol.dual.iter().zip(c).map(|(a, b)| a * b).sum();
        assert!((yc - sol.gauge).abs() < 1e-8, "{yc} vs {}", sol.gauge);
        sol
    }

    #[test]
    fn perturbed_route_matches_cold() {
        // sparse correlators: only settings 0 and 1 on every party, GHZ-like signs
        let k = 4;
        let mut c = vec![0.0; num_correlators(k)];
        for (mu, v) in c.iter_mut().enumerate() {
            let d = crate::linalg::digits(mu, &vec![3; k]);
            if d.iter().all(|&x| x < 2) && d.iter().filter(|&&x| x == 1).count() % 2 == 0 {
                *v = 0.9;
            }
        }
        c[0] = 1.0;
        let direct = check(&mut GaugeLp::new(k), &c);
        let mut lp = GaugeLp::new(k);
        lp.cold(&perturbed(&c[1..])).unwrap();
        let repaired = lp.dual_simplex(&c[1..]).unwrap();
        assert!((repaired.gauge - direct.gauge).abs() < 1e-9);
    }

    #[test]
    fn chsh_behavior_gauge() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut c = vec![0.0; 9];
        c[0] = 1.0;
        c[4] = s;
        c[5] = s;
        c[7] = s;
        c[8] = -s;
        let mut lp = GaugeLp::new(2);
        let sol = check(&mut lp, &c);
        assert!((sol.gauge - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn vertex_has_unit_gauge() {
        for k in 1..=3 {
            let mut lp = GaugeLp::new(k);
            let c = vertex_correlators(5 % 4usize.pow(k as u32), k);
            let sol = check(&mut lp, &c);
            assert!((sol.gauge - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_points_and_warm_start() {
        let mut rng = random::rng(9);
        for k in 1..=4 {
            let mut lp = GaugeLp::new(k);
            for _ in 0..10 {
                let mut c: Vec<f64> = (0..num_correlators(k)).map(|_| random::normal(&mut rng)).collect();
                c[0] = 1.0;
                let warm = check(&mut lp, &c);
                let mut fresh = GaugeLp::new(k);
                let cold = fresh.solve(&c).unwrap();
                assert!((warm.gauge - cold.gauge).abs() < 1e-8);
            }
        }
    }
}
