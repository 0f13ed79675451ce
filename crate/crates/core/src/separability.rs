//! Three-valued entanglement verdicts for reduced states. Every verdict
//! carries a certificate that can be re-checked against the state: a negative
//! partial-transpose eigenvalue or a Bell violation for entangled states, an
//! explicit mixture of product states for separable ones.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::bell::{self, NonlocalCertificate, SearchConfig, SearchGoal};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::random::{self, SeededRng};
use crate::serde_complex;
use crate::state::DensityOperator;
use crate::subsets;

pub const NPT_TOL: f64 = 1e-9;
pub const EIGEN_CUTOFF: f64 = 1e-10;
pub const SCHMIDT_TOL: f64 = 1e-9;
pub const WEIGHT_SUM_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-7;
pub const MAX_FIT_DIM: usize = 64;
const PROJECTION_ITERS: usize = 50;
const PROJECTION_TOL: f64 = 1e-9;
const PRODUCT_STARTS: usize = 8;
const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "witness", rename_all = "snake_case")]
pub enum EntanglementWitness {
    /// Partial transpose on `bipartition` has eigenvalue `min_eig < 0`.
    Npt { bipartition: Vec<usize>, min_eig: f64 },
    Bell { certificate: NonlocalCertificate },
}

impl EntanglementWitness {
    pub fn verify(&self, rho: &DensityOperator) -> Result<()> {
        match self {
            EntanglementWitness::Npt { bipartition, min_eig } => {
                let m = linalg::min_eigenvalue(&rho.partial_transpose(bipartition)?);
                if m > -NPT_TOL {
                    return Err(Error::Certificate(format!("partial transpose is positive (min eigenvalue {m:.3e})")));
                }
                if (m - min_eig).abs() > 1e-8 {
                    return Err(Error::Certificate(format!("min eigenvalue {min_eig} recomputes to {m}")));
                }
                Ok(())
            }
            EntanglementWitness::Bell { certificate } => certificate.verify(rho),
        }
    }
}

/// `sum_j weights[j] |p_j><p_j|` with `p_j` the tensor product of
/// `product_states[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecompositionJson", into = "DecompositionJson")]
pub struct SeparableDecomposition {
    pub weights: Vec<f64>,
    pub product_states: Vec<Vec<CVector>>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    weights: Vec<f64>,
    product_states: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<SeparableDecomposition> for DecompositionJson {
    fn from(d: SeparableDecomposition) -> Self {
        DecompositionJson {
            weights: d.weights,
            product_states: d
                .product_states
                .iter()
                .map(|sites| sites.iter().map(|v| serde_complex::to_pairs(v.as_slice())).collect())
                .collect(),
        }
    }
}

impl TryFrom<DecompositionJson> for SeparableDecomposition {
    type Error = String;

    fn try_from(j: DecompositionJson) -> std::result::Result<Self, String> {
        if j.weights.len() != j.product_states.len() {
            return Err(format!("{} weights for {} product states", j.weights.len(), j.product_states.len()));
        }
        Ok(SeparableDecomposition {
            weights: j.weights,
            product_states: j
                .product_states
                .iter()
                .map(|sites| sites.iter().map(|v| CVector::from_vec(serde_complex::from_pairs(v))).collect())
                .collect(),
        })
    }
}

fn kron_vectors(factors: &[CVector]) -> CVector {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

impl SeparableDecomposition {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let dim: usize = self.product_states.first().map_or(1, |s| s.iter().map(|v| v.len()).product());
        let mut m = CMatrix::zeros(dim, dim);
        for (w, sites) in self.weights.iter().zip(&self.product_states) {
            m += linalg::outer(&kron_vectors(sites)).scale(*w);
        }
        m
    }

    /// Checks weights, normalization of every factor and the reconstruction.
    pub fn verify(&self, rho: &DensityOperator) -> Result<()> {
        if self.is_empty() || self.weights.len() != self.product_states.len() {
            return Err(Error::Certificate("empty or ragged decomposition".into()));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::Certificate(format!("negative weight {w}")));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Certificate(format!("weights sum to {sum}")));
        }
        for sites in &self.product_states {
            if sites.len() != rho.num_sites() || sites.iter().zip(rho.dims()).any(|(v, &d)| v.len() != d) {
                return Err(Error::Certificate("product state does not match the register".into()));
            }
            if let Some(v) = sites.iter().find(|v| (v.norm() - 1.0).abs() > 1e-9) {
                return Err(Error::Certificate(format!("site vector has norm {}", v.norm())));
            }
        }
        let dist = 0.5 * linalg::trace_norm(&(self.reconstruct() - rho.matrix()));
        if dist > RECONSTRUCTION_TOL {
            return Err(Error::Certificate(format!("mixture is {dist:.3e} from the state in trace distance")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EntanglementStatus {
    Entangled(EntanglementWitness),
    Separable(SeparableDecomposition),
    Unknown,
}

impl EntanglementStatus {
    pub fn is_entangled(&self) -> bool {
        matches!(self, EntanglementStatus::Entangled(_))
    }

    pub fn is_separable(&self) -> bool {
        matches!(self, EntanglementStatus::Separable(_))
    }

    pub fn verify(&self, rho: &DensityOperator) -> Result<()> {
        match self {
            EntanglementStatus::Entangled(w) => w.verify(rho),
            EntanglementStatus::Separable(d) => d.verify(rho),
            EntanglementStatus::Unknown => Ok(()),
        }
    }
}

/// First bipartition (smaller side listed, by size then lexicographic) whose
/// partial transpose has a negative eigenvalue.
pub fn npt_any_bipartition(rho: &DensityOperator) -> Option<EntanglementWitness> {
    if rho.num_sites() < 2 {
        return None;
    }
    subsets::bipartitions(rho.num_sites()).into_iter().find_map(|side| {
        let m = linalg::min_eigenvalue(&rho.partial_transpose(&side).ok()?);
        (m <= -NPT_TOL).then_some(EntanglementWitness::Npt { bipartition: side, min_eig: m })
    })
}

/// `d_site x (dim / d_site)` unfolding of `v`.
fn unfold(v: &CVector, dims: &[usize], site: usize) -> CMatrix {
    let d = dims[site];
    let rest = v.len() / d;
    let mut m = CMatrix::zeros(d, rest);
    let mut fill = vec![0usize; d];
    for (idx, z) in v.iter().enumerate() {
        let a = linalg::digits(idx, dims)[site];
        m[(a, fill[a])] = *z;
        fill[a] += 1;
    }
    m
}

fn leading_left_vector(m: &CMatrix) -> (Vec<f64>, CVector) {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
    (sv, u.column(order[0]).into_owned())
}

/// Site factors of `v` when it has Schmidt rank one across every single-site
/// cut (which makes it a full product).
fn product_factors(v: &CVector, dims: &[usize]) -> Option<Vec<CVector>> {
    let norm = v.norm();
    let mut factors = Vec::with_capacity(dims.len());
    for site in 0..dims.len() {
        let (sv, u) = leading_left_vector(&unfold(v, dims, site));
        if sv.iter().skip(1).any(|s| *s > SCHMIDT_TOL * norm.max(1.0)) {
            return None;
        }
        factors.push(u);
    }
    Some(factors)
}

/// `<a_1 ... (skip site) ... a_k | v>` as a vector on `site`.
fn contract_except(v: &CVector, dims: &[usize], factors: &[CVector], site: usize) -> CVector {
    let mut out = CVector::zeros(dims[site]);
    for (idx, z) in v.iter().enumerate() {
        let dg = linalg::digits(idx, dims);
        let mut coeff = *z;
        for (j, f) in factors.iter().enumerate() {
            if j != site {
                coeff *= f[dg[j]].conj();
            }
        }
        out[dg[site]] += coeff;
    }
    out
}

/// Product vector approximately maximizing the overlap with `v`.
fn closest_product(v: &CVector, dims: &[usize]) -> Vec<CVector> {
    let mut factors: Vec<CVector> = (0..dims.len()).map(|s| leading_left_vector(&unfold(v, dims, s)).1).collect();
    for _ in 0..4 {
        for site in 0..dims.len() {
            let c = contract_except(v, dims, &factors, site);
            let n = c.norm();
            if n > 1e-14 {
                factors[site] = c.unscale(n);
            }
        }
    }
    factors
}

/// Orthonormal product basis of the span of the columns of `q` (orthonormal),
/// by alternating projections between the subspace and product vectors.
fn product_basis(q: &CMatrix, dims: &[usize], rng: &mut SeededRng) -> Option<Vec<Vec<CVector>>> {
    let m = q.ncols();
    let mut basis = Vec::with_capacity(m);
    let mut found: Vec<CVector> = Vec::new();
    for _ in 0..m {
        // remaining subspace: q minus the product vectors found so far
        let mut rem = q.clone();
        for f in &found {
            let coeff = rem.adjoint() * f;
            rem -= f * coeff.adjoint();
        }
        let proj = |x: &CVector| -> CVector {
            let mut y = q * (q.adjoint() * x);
            for f in &found {
                y -= f * f.dotc(&y);
            }
            y
        };
        let mut hit = None;
        'starts: for start in 0..PRODUCT_STARTS {
            let seed_vec = if start == 0 {
                // try the column of largest norm first for a deterministic start
                let j = (0..m).max_by(|&a, &b| rem.column(a).norm().total_cmp(&rem.column(b).norm()))?;
                rem.column(j).into_owned()
            } else {
                proj(&random::haar_vector(q.nrows(), rng))
            };
            let n = seed_vec.norm();
            if n < 1e-8 {
                continue;
            }
            let mut x = seed_vec.unscale(n);
            for _ in 0..PROJECTION_ITERS {
                let factors = closest_product(&x, dims);
                let p = kron_vectors(&factors);
                let px = proj(&p);
                if (&p - &px).norm() <= PROJECTION_TOL {
                    hit = Some((factors, p));
                    break 'starts;
                }
                let n = px.norm();
                if n < 1e-8 {
                    break;
                }
                x = px.unscale(n);
            }
        }
        let (factors, p) = hit?;
        found.push(p);
        basis.push(factors);
    }
    Some(basis)
}

fn diagonal_decomposition(rho: &DensityOperator) -> Option<SeparableDecomposition> {
    let m = rho.matrix();
    let dim = rho.dim();
    let off = (0..dim).flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)));
    if off.map(|(i, j)| m[(i, j)].norm()).fold(0.0, f64::max) > 1e-12 {
        return None;
    }
    let dims = rho.dims();
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for i in 0..dim {
        let p = m[(i, i)].re;
        if p > EIGEN_CUTOFF {
            weights.push(p);
            states.push(
                linalg::digits(i, dims)
                    .iter()
                    .zip(dims)
                    .map(|(&a, &d)| {
                        let mut v = CVector::zeros(d);
                        v[a] = linalg::ONE;
                        v
                    })
                    .collect(),
            );
        }
    }
    normalized(weights, states)
}

fn normalized(mut weights: Vec<f64>, product_states: Vec<Vec<CVector>>) -> Option<SeparableDecomposition> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return None;
    }
    weights.iter_mut().for_each(|w| *w /= sum);
    Some(SeparableDecomposition { weights, product_states })
}

/// Separable decomposition read off the spectral decomposition, when every
/// eigenvector with nonzero weight is a product (degenerate eigenspaces are
/// searched for a product basis). Diagonal states take a direct path.
pub fn product_eigenbasis_certify(rho: &DensityOperator) -> Option<SeparableDecomposition> {
    let verified = |d: SeparableDecomposition| d.verify(rho).is_ok().then_some(d);
    if let Some(d) = diagonal_decomposition(rho) {
        return verified(d);
    }
    let dims = rho.dims();
    let eig = linalg::hermitian_eig(rho.matrix()).ok()?;
    let mut rng = random::rng(0x5eed);
    let mut weights = Vec::new();
    let mut states = Vec::new();
    let mut i = 0;
    while i < eig.values.len() && eig.values[i] > EIGEN_CUTOFF {
        let mut j = i + 1;
        while j < eig.values.len() && (eig.values[i] - eig.values[j]).abs() < DEGENERACY_GAP {
            j += 1;
        }
        let lambda = eig.values[i..j].iter().sum::<f64>() / (j - i) as f64;
        if j - i == 1 {
            states.push(product_factors(&eig.vectors.column(i).into_owned(), dims)?);
            weights.push(lambda);
        } else {
            let q = eig.vectors.columns(i, j - i).into_owned();
            for factors in product_basis(&q, dims, &mut rng)? {
                states.push(factors);
                weights.push(lambda);
            }
        }
        i = j;
    }
    verified(normalized(weights, states)?)
}

/// Real coordinates of a Hermitian matrix, isometric for the Frobenius norm.
fn hermitian_coordinates(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        out.push(m[(i, i)].re);
        for j in i + 1..n {
            out.push(r2 * m[(i, j)].re);
            out.push(r2 * m[(i, j)].im);
        }
    }
    out
}

/// Nonnegative least-squares fit of `rho` by `samples` seeded random product
/// states (plus the computational basis). Certifies only when the fitted
/// mixture re-verifies within trace distance `1e-7`.
pub fn separable_fit(rho: &DensityOperator, samples: usize, seed: u64) -> Option<SeparableDecomposition> {
    let dim = rho.dim();
    if dim > MAX_FIT_DIM {
        return None;
    }
    let dims = rho.dims();
    let mut rng = SeededRng::seed_from_u64(seed);
    let mut candidates: Vec<Vec<CVector>> = (0..dim)
        .map(|i| {
            linalg::digits(i, dims)
                .iter()
                .zip(dims)
                .map(|(&a, &d)| CVector::from_fn(d, |r, _| if r == a { linalg::ONE } else { ZERO }))
                .collect()
        })
        .collect();
    candidates.extend((0..samples).map(|_| random::product_state(rho.register(), &mut rng).1));
    let rows = dim * dim;
    let mut a = Array2::<f64>::zeros((rows, candidates.len()));
    for (j, sites) in candidates.iter().enumerate() {
        for (i, x) in hermitian_coordinates(&linalg::outer(&kron_vectors(sites))).into_iter().enumerate() {
            a[(i, j)] = x;
        }
    }
    let b = Array1::from_vec(hermitian_coordinates(rho.matrix()));
    let (x, _) = nnls::nnls(a.view(), b.view());
    let (weights, states): (Vec<f64>, Vec<Vec<CVector>>) =
        x.iter().zip(candidates).filter(|(w, _)| **w > 0.0).map(|(w, s)| (*w, s)).unzip();
    let d = normalized(weights, states)?;
    d.verify(rho).is_ok().then_some(d)
}

#[derive(Debug, Clone, Copy)]
pub struct StatusBudget {
    pub fit_samples: usize,
    pub bell_restarts: usize,
    pub seed: u64,
}

impl Default for StatusBudget {
    fn default() -> Self {
        StatusBudget { fit_samples: 2000, bell_restarts: 4, seed: 0 }
    }
}

pub fn entanglement_status(rho: &DensityOperator) -> EntanglementStatus {
    entanglement_status_with(rho, &StatusBudget::default())
}

/// NPT, then product eigenbasis, then the separable fit, then a short Bell
/// search; `Unknown` when none of them concludes.
pub fn entanglement_status_with(rho: &DensityOperator, budget: &StatusBudget) -> EntanglementStatus {
    if let Some(w) = npt_any_bipartition(rho) {
        return EntanglementStatus::Entangled(w);
    }
    if let Some(d) = product_eigenbasis_certify(rho) {
        return EntanglementStatus::Separable(d);
    }
    if let Some(d) = separable_fit(rho, budget.fit_samples, budget.seed) {
        return EntanglementStatus::Separable(d);
    }
    if (2..=bell::functional::MAX_PARTIES).contains(&rho.num_sites()) && budget.bell_restarts > 0 {
        let config = SearchConfig {
            restarts: budget.bell_restarts,
            goal: SearchGoal::Certify,
            plane_grid: 12,
            ..SearchConfig::default()
        };
        if let Ok(report) = bell::search(rho, config, budget.seed, None) {
            if let bell::SearchOutcome::CertifiedNonlocal(certificate) = report.outcome {
                return EntanglementStatus::Entangled(EntanglementWitness::Bell { certificate });
            }
        }
    }
    EntanglementStatus::Unknown
}
