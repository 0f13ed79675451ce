//! Correlator vectors of a state under a two-setting measurement scenario.
//!
//! A correlator index `mu` has one base-3 digit per party (party 0 most
//! significant): `0` means the party is absent, `1`/`2` select setting 0/1.
//! Index 0 is the constant term `tr(rho) = 1`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::state::DensityOperator;

use super::observable::MeasurementScenario;

pub fn num_correlators(parties: usize) -> usize {
    3usize.pow(parties as u32)
}

pub fn correlator_digits(mu: usize, parties: usize) -> Vec<usize> {
    linalg::digits(mu, &vec![3; parties])
}

pub fn correlator_index(digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, &d| acc * 3 + d)
}

/// `rho` reshaped so that each party owns one contiguous `(row, col)` mode of
/// size `d^2`.
#[derive(Debug, Clone)]
pub struct PairTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl PairTensor {
    pub fn new(rho: &DensityOperator) -> Self {
        Self::from_matrix(rho.dims(), rho.matrix())
    }

    pub fn from_matrix(dims: &[usize], m: &CMatrix) -> Self {
        let k = dims.len();
        let dim = m.nrows();
        let mut data = vec![ZERO; dim * dim];
        let mut strides = vec![1usize; k];
        for i in (0..k.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1] * dims[i + 1];
        }
        // per-index contributions for row and column digits
        let mut row_off = vec![0usize; dim];
        let mut col_off = vec![0usize; dim];
        for idx in 0..dim {
            let ds = linalg::digits(idx, dims);
            for i in 0..k {
                row_off[idx] += ds[i] * dims[i] * strides[i];
                col_off[idx] += ds[i] * strides[i];
            }
        }
        for r in 0..dim {
            for c in 0..dim {
                data[row_off[r] + col_off[c]] = m[(r, c)];
            }
        }
        PairTensor { dims: dims.to_vec(), data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// All `3^k` correlators.
    pub fn correlators(&self, scenario: &MeasurementScenario) -> Result<Vec<f64>> {
        scenario.check_dims(&self.dims)?;
        let gens = generators(scenario);
        let mut shape: Vec<usize> = self.dims.iter().map(|d| d * d).collect();
        let mut x = self.data.clone();
        for (i, g) in gens.iter().enumerate() {
            x = mode_product(&x, &shape, i, g);
            shape[i] = 3;
        }
        Ok(x.into_iter().map(|z| z.re).collect())
    }

    /// Operators `K_0, K_1, K_2` on `party` such that the functional value is
    /// `sum_t tr(K_t L_t)` with `L_0 = I` and `L_1, L_2` the party's settings.
    pub fn conditional_operators(
        &self,
        scenario: &MeasurementScenario,
        party: usize,
        f: &[f64],
    ) -> Result<[CMatrix; 3]> {
        scenario.check_dims(&self.dims)?;
        let k = self.dims.len();
        if f.len() != num_correlators(k) {
            return Err(Error::DimensionMismatch(format!("functional has {} entries, expected {}", f.len(), num_correlators(k))));
        }
        let gens = generators(scenario);
        let mut shape: Vec<usize> = self.dims.iter().map(|d| d * d).collect();
        let mut x = self.data.clone();
        for (i, g) in gens.iter().enumerate() {
            if i == party {
                continue;
            }
            x = mode_product(&x, &shape, i, g);
            shape[i] = 3;
        }
        let d = self.dims[party];
        let dd = d * d;
        let post: usize = shape[party + 1..].iter().product();
        let pre: usize = shape[..party].iter().product();
        let mut ks = [CMatrix::zeros(d, d), CMatrix::zeros(d, d), CMatrix::zeros(d, d)];
        for a in 0..pre {
            for b in 0..post {
                for (t, kt) in ks.iter_mut().enumerate() {
                    let coeff = f[(a * 3 + t) * post + b];
                    if coeff == 0.0 {
                        continue;
                    }
                    for rc in 0..dd {
                        kt[(rc / d, rc % d)] += x[(a * dd + rc) * post + b] * coeff;
                    }
                }
            }
        }
        Ok(ks)
    }
}

/// `G[mu][(r, c)] = L_mu[c][r]` with `L_0 = I`.
fn generators(scenario: &MeasurementScenario) -> Vec<CMatrix> {
    (0..scenario.num_parties())
        .map(|i| {
            let [o0, o1] = scenario.party(i);
            let d = o0.dim();
            let mut g = CMatrix::zeros(3, d * d);
            for r in 0..d {
                g[(0, r * d + r)] = linalg::ONE;
                for c in 0..d {
                    g[(1, r * d + c)] = o0.matrix()[(c, r)];
                    g[(2, r * d + c)] = o1.matrix()[(c, r)];
                }
            }
            g
        })
        .collect()
}

/// Contracts mode `mode` of a row-major tensor with `g` (`out x n_mode`).
pub(crate) fn mode_product(x: &[C64], shape: &[usize], mode: usize, g: &CMatrix) -> Vec<C64> {
    let n = shape[mode];
    let pre: usize = shape[..mode].iter().product();
    let post: usize = shape[mode + 1..].iter().product();
    let out_n = g.nrows();
    let mut out = vec![ZERO; pre * out_n * post];
    for a in 0..pre {
        for j in 0..n {
            let src = &x[(a * n + j) * post..(a * n + j + 1) * post];
            for o in 0..out_n {
                let w = g[(o, j)];
                if w == ZERO {
                    continue;
                }
                let dst = &mut out[(a * out_n + o) * post..(a * out_n + o + 1) * post];
                for (t, s) in dst.iter_mut().zip(src) {
                    *t += w * s;
                }
            }
        }
    }
    out
}

pub fn correlators(rho: &DensityOperator, scenario: &MeasurementScenario) -> Result<Vec<f64>> {
    PairTensor::new(rho).correlators(scenario)
}

/// Deterministic correlators of vertex `lambda`: base-4 digit per party,
/// `digit = 2 b0 + b1` with outcome `(-1)^{b_x}` for setting `x`.
pub fn vertex_correlators(lambda: usize, parties: usize) -> Vec<f64> {
    let locals: Vec<[f64; 3]> = linalg::digits(lambda, &vec![4; parties])
        .into_iter()
        .map(local_values)
        .collect();
    (0..num_correlators(parties))
        .map(|mu| {
            correlator_digits(mu, parties)
                .iter()
                .zip(&locals)
                .map(|(&t, v)| v[t])
                .product()
        })
        .collect()
}

pub(crate) fn local_values(digit: usize) -> [f64; 3] {
    let a0 = if digit & 2 == 0 { 1.0 } else { -1.0 };
    let a1 = if digit & 1 == 0 { 1.0 } else { -1.0 };
    [1.0, a0, a1]
}

/// `out[lambda] = sum_mu f[mu] d_lambda[mu]` for all `4^k` vertices.
pub fn vertex_transform(f: &[f64], parties: usize) -> Vec<f64> {
    let mut shape = vec![3usize; parties];
    let mut x = f.to_vec();
    let v: Vec<[f64; 3]> = (0..4).map(local_values).collect();
    for mode in 0..parties {
        let pre: usize = shape[..mode].iter().product();
        let post: usize = shape[mode + 1..].iter().product();
        let mut out = vec![0.0; pre * 4 * post];
        for a in 0..pre {
            for (l, vl) in v.iter().enumerate() {
                let dst = (a * 4 + l) * post;
                for (t, &w) in vl.iter().enumerate() {
                    let src = (a * 3 + t) * post;
                    for b in 0..post {
                        out[dst + b] += w * x[src + b];
                    }
                }
            }
        }
        x = out;
        shape[mode] = 4;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::observable::DichotomicObservable;
    use crate::random;
    use crate::register::QuditRegister;

    fn direct(rho: &DensityOperator, sc: &MeasurementScenario, mu: usize) -> f64 {
        let k = sc.num_parties();
        let ops: Vec<CMatrix> = correlator_digits(mu, k)
            .iter()
            .enumerate()
            .map(|(i, &t)| match t {
                0 => linalg::identity(rho.dims()[i]),
                t => sc.observable(i, t - 1).matrix().clone(),
            })
            .collect();
        linalg::trace_product(rho.matrix(), &linalg::kron_all(&ops)).re
    }

    #[test]
    fn contraction_matches_direct_trace() {
        let mut rng = random::rng(5);
        for dims in [vec![2, 2], vec![2, 3], vec![3, 2, 2], vec![2, 2, 2, 2]] {
            let reg = QuditRegister::new(dims.clone()).unwrap();
            let rho = random::density(&reg, 2, &mut rng);
            let sc = MeasurementScenario::random(&dims, &mut rng);
            let c = correlators(&rho, &sc).unwrap();
            assert!((c[0] - 1.0).abs() < 1e-12);
            for mu in 0..c.len() {
                assert!((c[mu] - direct(&rho, &sc, mu)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conditional_operators_reproduce_value() {
        let mut rng = random::rng(6);
        let dims = vec![2, 3, 2];
        let reg = QuditRegister::new(dims.clone()).unwrap();
        let rho = random::density(&reg, 3, &mut rng);
        let sc = MeasurementScenario::random(&dims, &mut rng);
        let f: Vec<f64> = (0..27).map(|_| random::normal(&mut rng)).collect();
        let pt = PairTensor::new(&rho);
        let c = pt.correlators(&sc).unwrap();
        let value: f64 = f.iter().zip(&c).map(|(a, b)| a * b).sum();
        for party in 0..3 {
            let ks = pt.conditional_operators(&sc, party, &f).unwrap();
            let d = dims[party];
            let mut v = linalg::trace(&ks[0]).re;
            v += linalg::trace_product(&ks[1], sc.observable(party, 0).matrix()).re;
            v += linalg::trace_product(&ks[2], sc.observable(party, 1).matrix()).re;
            assert!((v - value).abs() < 1e-12);
            assert!(linalg::hermiticity_defect(&ks[1]) < 1e-12);
            assert_eq!(ks[1].nrows(), d);
        }
    }

    #[test]
    fn phi_plus_chsh_settings() {
        let rho = crate::states::bell_state().density().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a0 = DichotomicObservable::qubit([0.0, 0.0, 1.0]).unwrap();
        let a1 = DichotomicObservable::qubit([1.0, 0.0, 0.0]).unwrap();
        let b0 = DichotomicObservable::qubit([s, 0.0, s]).unwrap();
        let b1 = DichotomicObservable::qubit([-s, 0.0, s]).unwrap();
        let sc = MeasurementScenario::new(vec![[a0, a1], [b0, b1]]).unwrap();
        let c = correlators(&rho, &sc).unwrap();
        // full correlators at digits (1,1), (1,2), (2,1), (2,2)
        let full = [c[4], c[5], c[7], c[8]];
        for (got, want) in full.iter().zip([s, s, s, -s]) {
            assert!((got - want).abs() < 1e-12);
        }
        for mu in [1, 2, 3, 6] {
            assert!(c[mu].abs() < 1e-12);
        }
    }

    #[test]
    fn vertex_transform_matches_enumeration() {
        let mut rng = random::rng(8);
        for k in 1..=4 {
            let f: Vec<f64> = (0..num_correlators(k)).map(|_| random::normal(&mut rng)).collect();
            let t = vertex_transform(&f, k);
            assert_eq!(t.len(), 4usize.pow(k as u32));
            for (lambda, &tv) in t.iter().enumerate() {
                let d = vertex_correlators(lambda, k);
                let v: f64 = f.iter().zip(&d).map(|(a, b)| a * b).sum();
                assert!((v - tv).abs() < 1e-12);
            }
        }
    }
}
