//! Seeded random objects: Haar-random vectors, random density operators and
//! Bloch vectors. Every generator takes an explicit RNG.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{CMatrix, CVector, C64};
use crate::register::QuditRegister;
use crate::state::{DensityOperator, StateVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Standard normal sample via Box-Muller.
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn unit_vector3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = [normal(rng), normal(rng), normal(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-9 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| C64::new(normal(rng), normal(rng)));
    let n = v.norm();
    v.unscale(n)
}

pub fn pure_state<R: Rng + ?Sized>(register: &QuditRegister, rng: &mut R) -> StateVector {
    StateVector::new(register.clone(), haar_vector(register.total_dim(), rng))
        .expect("haar vector is normalized")
}

/// Random product state with Haar-random factors.
pub fn product_state<R: Rng + ?Sized>(register: &QuditRegister, rng: &mut R) -> (StateVector, Vec<CVector>) {
    let factors: Vec<CVector> = register.dims().iter().map(|&d| haar_vector(d, rng)).collect();
    let amps = factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f));
    (StateVector::new(register.clone(), amps).expect("product of unit vectors"), factors)
}

/// Random density operator `G G^dagger / tr` with a `dim x rank` Ginibre `G`.
pub fn density<R: Rng + ?Sized>(register: &QuditRegister, rank: usize, rng: &mut R) -> DensityOperator {
    let d = register.total_dim();
    let g = CMatrix::from_fn(d, rank.max(1), |_, _| C64::new(normal(rng), normal(rng)));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(register.clone(), m.unscale(tr)).expect("ginibre matrix is a state")
}

pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let m = CMatrix::from_fn(d, d, |_, _| C64::new(normal(rng), normal(rng)));
    (&m + m.adjoint()).scale(0.5)
}
