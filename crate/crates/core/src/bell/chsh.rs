use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::state::DensityOperator;

use super::correlators::correlators;
use super::functional::BellFunctional;
use super::observable::{DichotomicObservable, MeasurementScenario};
use super::seesaw::seesaw_maximize;

/// Biseparable bound of the three-CHSH sum.
pub fn gme_bound() -> f64 {
    4.0 + 2.0 * 2f64.sqrt()
}

/// `<A0 B0> + <A0 B1> + <A1 B0> - <A1 B1>`.
pub fn chsh_value(
    rho2: &DensityOperator,
    a0: &DichotomicObservable,
    a1: &DichotomicObservable,
    b0: &DichotomicObservable,
    b1: &DichotomicObservable,
) -> Result<f64> {
    if rho2.num_sites() != 2 {
        return Err(Error::DimensionMismatch(format!("expected 2 sites, got {}", rho2.num_sites())));
    }
    let sc = MeasurementScenario::new(vec![[a0.clone(), a1.clone()], [b0.clone(), b1.clone()]])?;
    let c = correlators(rho2, &sc)?;
    BellFunctional::chsh(2, 0, 1)?.value(&c)
}

/// `T_ij = tr(rho sigma_i (x) sigma_j)`.
pub fn correlation_matrix(rho2: &DensityOperator) -> Result<Matrix3<f64>> {
    if rho2.dims() != [2, 2] {
        return Err(Error::NotTwoQubits);
    }
    let p = linalg::paulis();
    Ok(Matrix3::from_fn(|i, j| linalg::trace_product(rho2.matrix(), &linalg::kron(&p[i + 1], &p[j + 1])).re))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorodeckiResult {
    pub value: f64,
    /// `[A0, A1, B0, B1]` attaining the value.
    pub observables: [DichotomicObservable; 4],
}

fn qubit_obs(v: Vector3<f64>) -> DichotomicObservable {
    let n = v.norm();
    DichotomicObservable::qubit([v[0] / n, v[1] / n, v[2] / n]).expect("unit vector")
}

/// Maximal CHSH over all qubit observables: `2 sqrt(s1^2 + s2^2)` with
/// `s1 >= s2` the largest singular values of `T`.
pub fn horodecki_chsh_max(rho2: &DensityOperator) -> Result<HorodeckiResult> {
    let t = correlation_matrix(rho2)?;
    let svd = t.svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let (i1, i2) = (order[0], order[1]);
    let (s1, s2) = (svd.singular_values[i1], svd.singular_values[i2]);
    let value = 2.0 * (s1 * s1 + s2 * s2).sqrt();
    let u1: Vector3<f64> = u.column(i1).into();
    let u2: Vector3<f64> = u.column(i2).into();
    let v1: Vector3<f64> = vt.row(i1).transpose();
    let v2: Vector3<f64> = vt.row(i2).transpose();
    let phi = s2.atan2(s1);
    let (c, s) = (phi.cos(), phi.sin());
    let observables = [qubit_obs(u1), qubit_obs(u2), qubit_obs(v1 * c + v2 * s), qubit_obs(v1 * c - v2 * s)];
    Ok(HorodeckiResult { value, observables })
}

/// Expectation of `(1 + A) CHSH_{BC} + 2 (1 - A)` with `A` on site 0.
pub fn tripartite_i(
    rho3: &DensityOperator,
    a: &DichotomicObservable,
    b: [&DichotomicObservable; 2],
    c: [&DichotomicObservable; 2],
) -> Result<f64> {
    if rho3.num_sites() != 3 {
        return Err(Error::DimensionMismatch(format!("expected 3 sites, got {}", rho3.num_sites())));
    }
    let sc = MeasurementScenario::new(vec![
        [a.clone(), a.clone()],
        [b[0].clone(), b[1].clone()],
        [c[0].clone(), c[1].clone()],
    ])?;
    BellFunctional::tripartite_i().value(&correlators(rho3, &sc)?)
}

/// State of sites 1, 2 conditioned on outcome `+1` of `a` on site 0, with
/// its probability.
pub fn heralded_pair(rho3: &DensityOperator, a: &DichotomicObservable) -> Result<(DensityOperator, f64)> {
    if rho3.num_sites() != 3 {
        return Err(Error::DimensionMismatch(format!("expected 3 sites, got {}", rho3.num_sites())));
    }
    let d0 = rho3.dims()[0];
    if a.dim() != d0 {
        return Err(Error::DimensionMismatch("observable does not act on site 0".into()));
    }
    let rest: usize = rho3.dims()[1..].iter().product();
    let p = linalg::kron(&a.projector(true), &linalg::identity(rest));
    let m = &p * rho3.matrix() * &p;
    let prob = linalg::trace(&m).re;
    if prob < 1e-14 {
        return Err(Error::ZeroSuccessProbability(prob));
    }
    let heralded = DensityOperator::new(rho3.register().clone(), m.unscale(prob))?;
    Ok((heralded.reduced(&[1, 2])?, prob))
}

/// `2 CHSH` of the heralded pair: the value of the three-party expression
/// restricted to runs where `A = +1`.
pub fn heralded_tripartite_i(
    rho3: &DensityOperator,
    a: &DichotomicObservable,
    b: [&DichotomicObservable; 2],
    c: [&DichotomicObservable; 2],
) -> Result<f64> {
    let (pair, _) = heralded_pair(rho3, a)?;
    Ok(2.0 * chsh_value(&pair, b[0], b[1], c[0], c[1])?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmeWitness {
    pub s: f64,
    /// `CHSH_{AB}`, `CHSH_{A'C}`, `CHSH_{B'C'}`.
    pub chsh: [f64; 3],
    pub gme_certified: bool,
    pub every_pair_violates: bool,
}

/// Settings of the three roles per party, each a CHSH pair of observables.
#[derive(Debug, Clone)]
pub struct GmeSettings {
    pub a: [DichotomicObservable; 2],
    pub a_prime: [DichotomicObservable; 2],
    pub b: [DichotomicObservable; 2],
    pub b_prime: [DichotomicObservable; 2],
    pub c: [DichotomicObservable; 2],
    pub c_prime: [DichotomicObservable; 2],
}

/// `S = CHSH_{AB} + CHSH_{A'C} + CHSH_{B'C'}`, each term on its two-party
/// marginal.
pub fn gme_witness_s(rho3: &DensityOperator, st: &GmeSettings) -> Result<GmeWitness> {
    if rho3.num_sites() != 3 {
        return Err(Error::DimensionMismatch(format!("expected 3 sites, got {}", rho3.num_sites())));
    }
    let ab = rho3.reduced(&[0, 1])?;
    let ac = rho3.reduced(&[0, 2])?;
    let bc = rho3.reduced(&[1, 2])?;
    let chsh = [
        chsh_value(&ab, &st.a[0], &st.a[1], &st.b[0], &st.b[1])?,
        chsh_value(&ac, &st.a_prime[0], &st.a_prime[1], &st.c[0], &st.c[1])?,
        chsh_value(&bc, &st.b_prime[0], &st.b_prime[1], &st.c_prime[0], &st.c_prime[1])?,
    ];
    let s = chsh.iter().sum();
    Ok(GmeWitness { s, chsh, gme_certified: s > gme_bound(), every_pair_violates: chsh.iter().all(|&v| v > 2.0) })
}

/// Optimizes each CHSH term of `S` independently by see-saw.
pub fn optimize_gme_witness(rho3: &DensityOperator, restarts: usize, seed: u64) -> Result<(GmeWitness, GmeSettings)> {
    let f = BellFunctional::chsh(2, 0, 1)?;
    let mut best = Vec::new();
    for (i, pair) in [[0, 1], [0, 2], [1, 2]].iter().enumerate() {
        let marginal = rho3.reduced(pair)?;
        let (_, sc) = seesaw_maximize(&marginal, &f, restarts, seed.wrapping_add(i as u64))?;
        best.push(sc);
    }
    let st = GmeSettings {
        a: best[0].party(0).clone(),
        b: best[0].party(1).clone(),
        a_prime: best[1].party(0).clone(),
        c: best[1].party(1).clone(),
        b_prime: best[2].party(0).clone(),
        c_prime: best[2].party(1).clone(),
    };
    Ok((gme_witness_s(rho3, &st)?, st))
}

/// Maximal CHSH of a two-site state: exact for qubits, see-saw otherwise.
pub fn max_chsh(rho2: &DensityOperator, restarts: usize, seed: u64) -> Result<(f64, [DichotomicObservable; 4])> {
    if rho2.dims() == [2, 2] {
        let h = horodecki_chsh_max(rho2)?;
        return Ok((h.value, h.observables));
    }
    let f = BellFunctional::chsh(2, 0, 1)?;
    let (v, sc) = seesaw_maximize(rho2, &f, restarts, seed)?;
    let [a0, a1] = sc.party(0).clone();
    let [b0, b1] = sc.party(1).clone();
    Ok((v, [a0, a1, b0, b1]))
}

/// CHSH Bell operator `A0B0 + A0B1 + A1B0 - A1B1` for `[A0, A1, B0, B1]`.
pub fn chsh_operator(obs: &[DichotomicObservable; 4]) -> CMatrix {
    let [a0, a1, b0, b1] = obs;
    let k = |a: &DichotomicObservable, b: &DichotomicObservable| linalg::kron(a.matrix(), b.matrix());
    k(a0, b0) + k(a0, b1) + k(a1, b0) - k(a1, b1)
}
