//! Constructors for the multipartite state families.

mod graph;
mod spec;

pub use graph::{graph_state, stabilizer_defect, Graph};
pub use spec::{load_state_file, parse_state_spec, write_state_file, State, StateFile, StateSpec};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::register::QuditRegister;
use crate::state::{DensityOperator, StateVector};
use crate::subsets::{binomial, combinations};

pub fn linear_cluster(n: usize) -> Result<StateVector> {
    graph_state(&Graph::path(n)?)
}

pub fn ring_cluster(n: usize) -> Result<StateVector> {
    graph_state(&Graph::cycle(n)?)
}

pub fn grid_cluster(rows: usize, cols: usize, periodic: bool) -> Result<StateVector> {
    graph_state(&Graph::grid(rows, cols, periodic)?)
}

fn from_terms(register: QuditRegister, terms: &[(Vec<usize>, f64)]) -> Result<StateVector> {
    let mut amps = CVector::zeros(register.total_dim());
    for (digits, coeff) in terms {
        amps[linalg::index_of(digits, register.dims())] += C64::new(*coeff, 0.0);
    }
    StateVector::normalized(register, amps)
}

fn weight_strings(n: usize, m: usize) -> Vec<Vec<usize>> {
    combinations(n, m)
        .into_iter()
        .map(|ones| (0..n).map(|s| usize::from(ones.contains(&s))).collect())
        .collect()
}

pub fn w_state(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::ParameterOutOfRange(format!("W state needs N >= 2, got {n}")));
    }
    dicke_state(n, 1)
}

/// Uniform superposition of all weight-`m` computational basis strings.
pub fn dicke_state(n: usize, m: usize) -> Result<StateVector> {
    if n < 1 || m > n {
        return Err(Error::ParameterOutOfRange(format!("Dicke state needs 0 <= m <= N, got N={n} m={m}")));
    }
    let amp = 1.0 / (binomial(n, m) as f64).sqrt();
    let terms: Vec<_> = weight_strings(n, m).into_iter().map(|s| (s, amp)).collect();
    from_terms(QuditRegister::qubits(n)?, &terms)
}

/// Uniform superposition of the `n` cyclic shifts of `|0...0 1...1>` (m ones).
pub fn translational_state(n: usize, m: usize) -> Result<StateVector> {
    if m < 1 || m + 1 > n {
        return Err(Error::ParameterOutOfRange(format!("TI state needs 1 <= m <= N-1, got N={n} m={m}")));
    }
    let reference: Vec<usize> = (0..n).map(|s| usize::from(s >= n - m)).collect();
    let mut shifts: Vec<Vec<usize>> = (0..n)
        .map(|k| (0..n).map(|s| reference[(s + k) % n]).collect())
        .collect();
    shifts.sort();
    shifts.dedup();
    if shifts.len() != n {
        return Err(Error::ParameterOutOfRange("reference string is periodic".into()));
    }
    let amp = 1.0 / (n as f64).sqrt();
    let terms: Vec<_> = shifts.into_iter().map(|s| (s, amp)).collect();
    from_terms(QuditRegister::qubits(n)?, &terms)
}

pub fn ghz_state(n: usize, d: usize) -> Result<StateVector> {
    if n < 2 || d < 2 {
        return Err(Error::ParameterOutOfRange(format!("GHZ needs N >= 2 and d >= 2, got N={n} d={d}")));
    }
    let amp = 1.0 / (d as f64).sqrt();
    let terms: Vec<_> = (0..d).map(|j| (vec![j; n], amp)).collect();
    from_terms(QuditRegister::uniform(n, d)?, &terms)
}

/// `(|00> + |11>) / sqrt 2`.
pub fn bell_state() -> StateVector {
    ghz_state(2, 2).expect("valid parameters")
}

/// Every pair of the `n` parties shares a Bell pair; party `i` holds one
/// qubit per partner (ordered by partner index), so `d = 2^(n-1)`.
pub fn fully_connected_bell(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::ParameterOutOfRange(format!("need N >= 2, got {n}")));
    }
    if n > 5 {
        let d = 1usize << (n - 1);
        return Err(Error::DimensionBudgetExceeded {
            dim: d.saturating_pow(n as u32),
            budget: crate::register::MAX_PURE_DIM,
        });
    }
    let pairs = combinations(n, 2);
    let d = 1usize << (n - 1);
    let reg = QuditRegister::uniform(n, d)?;
    let amp = (0.5f64).powf(pairs.len() as f64 / 2.0);
    let mut terms = Vec::with_capacity(1 << pairs.len());
    for bits in 0..(1usize << pairs.len()) {
        let pair_bit = |i: usize, j: usize| {
            let idx = pairs.iter().position(|p| p[0] == i.min(j) && p[1] == i.max(j)).unwrap();
            (bits >> idx) & 1
        };
        let digits: Vec<usize> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).fold(0, |acc, j| (acc << 1) | pair_bit(i, j)))
            .collect();
        terms.push((digits, amp));
    }
    from_terms(reg, &terms)
}

/// Number of weight-`b` terms, `N(N-1)/2`.
pub fn psi_term_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Seed strings: for each distance `j = 1..(N-1)/2`, symbols `2j-1` and `2j`
/// placed on sites `N-1-j` and `N-1`.
fn psi_seeds(n: usize) -> Vec<Vec<usize>> {
    (1..=(n - 1) / 2)
        .map(|j| {
            let mut s = vec![0; n];
            s[n - 1 - j] = 2 * j - 1;
            s[n - 1] = 2 * j;
            s
        })
        .collect()
}

/// The odd-`N` qudit state `a|0...0> + b sym[...]` with `d = N`, where
/// `sym` runs over all cyclic shifts of the seed strings and
/// `a = sqrt(1 - D b^2)`.
pub fn psi_max_persistency(n: usize, b: f64) -> Result<StateVector> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::ParameterOutOfRange(format!("N must be odd and >= 3, got {n}")));
    }
    if !(b >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!("b must be nonnegative, got {b}")));
    }
    let dcount = psi_term_count(n);
    let a2 = 1.0 - dcount as f64 * b * b;
    if a2 < 0.0 {
        return Err(Error::InvalidAmplitude(a2));
    }
    let mut terms = vec![(vec![0; n], a2.sqrt())];
    for seed in psi_seeds(n) {
        for k in 0..n {
            terms.push(((0..n).map(|s| seed[(s + k) % n]).collect(), b));
        }
    }
    let reg = QuditRegister::uniform(n, n)?;
    let mut amps = CVector::zeros(reg.total_dim());
    for (digits, coeff) in &terms {
        amps[linalg::index_of(digits, reg.dims())] += C64::new(*coeff, 0.0);
    }
    StateVector::new(reg, amps)
}

/// Default `b` when none is given: deep in the small-`b` regime.
pub fn psi_default_b(n: usize) -> f64 {
    0.1 / (psi_term_count(n) as f64).sqrt()
}

/// `b` such that the coherent part of the two-site marginal is
/// `cos(theta)|00> + sin(theta)|11>`: `b^2 = sin^2 / (1 + (D-1) sin^2)`.
pub fn psi_b_from_theta(n: usize, theta: f64) -> f64 {
    let s2 = theta.sin().powi(2);
    (s2 / (1.0 + (psi_term_count(n) as f64 - 1.0) * s2)).sqrt()
}

pub fn psi_theta_from_b(n: usize, b: f64) -> f64 {
    let b2 = b * b;
    (b2 / (1.0 - (psi_term_count(n) as f64 - 1.0) * b2)).sqrt().asin()
}

/// Printed 4-digit coefficients of the translationally invariant four-site,
/// four-level state.
pub fn psi4_raw_terms() -> Vec<(Vec<usize>, f64)> {
    let mut t = Vec::new();
    for s in [[0, 1, 1, 2], [1, 1, 2, 0], [1, 2, 0, 1], [2, 0, 1, 1]] {
        t.push((s.to_vec(), 0.3039));
    }
    for s in [[0, 2, 0, 2], [2, 0, 2, 0]] {
        t.push((s.to_vec(), 0.2566));
    }
    for s in [[1, 3, 1, 3], [3, 1, 3, 1]] {
        t.push((s.to_vec(), -0.3033));
    }
    t.push((vec![1, 1, 1, 1], 0.4783));
    t.push((vec![3, 3, 3, 3], 0.2563));
    t
}

/// The four-site state renormalized to unit norm.
pub fn psi4_appendix() -> StateVector {
    from_terms(QuditRegister::uniform(4, 4).expect("valid"), &psi4_raw_terms()).expect("nonzero")
}

/// `|phi+_{ij}> = (|ii> + |jj>)/sqrt 2` on two `d`-level sites.
fn flagged_bell(d: usize, i: usize, j: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    v[i * d + i] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[j * d + j] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v
}

fn basis_projector(d: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(k, k)] = linalg::ONE;
    m
}

/// Equal mixture of `|0><0|_A (x) phi+_01 (BC)`, `|2><2|_B (x) phi+_23 (AC)`
/// and `|4><4|_C (x) phi+_45 (AB)` on three six-level sites. Biseparable,
/// yet every two-party marginal violates CHSH.
pub fn biseparable_example() -> DensityOperator {
    let d = 6;
    let reg = QuditRegister::uniform(3, d).expect("valid");
    let pair = |i, j| linalg::outer(&flagged_bell(d, i, j));
    // A | BC
    let t1 = linalg::kron(&basis_projector(d, 0), &pair(0, 1));
    // B | AC: assemble with B in the middle by permuting indices
    let t2 = middle_flag(d, &basis_projector(d, 2), &pair(2, 3));
    // C | AB
    let t3 = linalg::kron(&pair(4, 5), &basis_projector(d, 4));
    let m = (t1 + t2 + t3).unscale(3.0);
    DensityOperator::new(reg, m).expect("valid mixture")
}

/// `flag` on site 1 and `pair` on sites (0, 2) of a three-site register.
fn middle_flag(d: usize, flag: &CMatrix, pair: &CMatrix) -> CMatrix {
    let dim = d * d * d;
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        let (ra, rb, rc) = (r / (d * d), (r / d) % d, r % d);
        for c in 0..dim {
            let (ca, cb, cc) = (c / (d * d), (c / d) % d, c % d);
            let f = flag[(rb, cb)];
            if f == linalg::ZERO {
                continue;
            }
            out[(r, c)] = f * pair[(ra * d + rc, ca * d + cc)];
        }
    }
    out
}
