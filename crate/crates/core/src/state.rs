//! Pure and mixed states on a qudit register, and the operations that act on
//! them: tensor products, partial traces and transposes, local filtering,
//! white-noise mixing and trace distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ZERO};
use crate::register::{QuditRegister, MAX_DENSITY_DIM};

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    register: QuditRegister,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(register: QuditRegister, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != register.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for total dimension {}",
                amplitudes.len(),
                register.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { register, amplitudes })
    }

    /// Normalizes `amplitudes` before validating.
    pub fn normalized(register: QuditRegister, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(register, amplitudes.unscale(norm))
    }

    pub fn basis(register: QuditRegister, index: usize) -> Result<Self> {
        let mut a = CVector::zeros(register.total_dim());
        if index >= a.len() {
            return Err(Error::InvalidState(format!("basis index {index} out of range")));
        }
        a[index] = linalg::ONE;
        Self::new(register, a)
    }

    pub fn register(&self) -> &QuditRegister {
        &self.register
    }

    pub fn dims(&self) -> &[usize] {
        self.register.dims()
    }

    pub fn num_sites(&self) -> usize {
        self.register.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, digits: &[usize]) -> C64 {
        self.amplitudes[linalg::index_of(digits, self.dims())]
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let register = self.register.concat(&other.register)?;
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        Ok(Self { register, amplitudes: amps })
    }

    pub fn density(&self) -> Result<DensityOperator> {
        check_density_budget(self.register.total_dim())?;
        Ok(DensityOperator::trusted(self.register.clone(), linalg::outer(&self.amplitudes)))
    }

    /// Reduced state on `keep` (in original order) computed directly from the
    /// amplitudes, without forming the full density matrix.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        let keep = self.register.normalize_sites(keep)?;
        if keep.is_empty() {
            return Err(Error::TracedAllSites);
        }
        let sub = self.register.select(&keep);
        let dk = sub.total_dim();
        check_density_budget(dk)?;
        let dt = self.register.total_dim() / dk;
        let (kept, traced) = self.register.split_indices(&keep);
        let mut m = CMatrix::zeros(dk, dt);
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            m[(kept[idx], traced[idx])] = *amp;
        }
        Ok(DensityOperator::trusted(sub, &m * m.adjoint()))
    }

    pub fn partial_trace(&self, traced_sites: &[usize]) -> Result<DensityOperator> {
        let traced = self.register.normalize_sites(traced_sites)?;
        let keep = self.register.complement(&traced);
        if keep.is_empty() {
            return Err(Error::TracedAllSites);
        }
        self.reduced(&keep)
    }

    /// Reorders tensor factors: site `s` of the result is site `perm[s]` of `self`.
    pub fn permute_sites(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_sites();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidSites(format!("{perm:?} is not a permutation of {n} sites")));
        }
        let dims = self.dims();
        let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
        let register = QuditRegister::new(new_dims.clone())?;
        let mut out = CVector::zeros(self.amplitudes.len());
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let d = linalg::digits(idx, dims);
            let nd: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
            out[linalg::index_of(&nd, &new_dims)] = *amp;
        }
        Ok(Self { register, amplitudes: out })
    }

    /// Cyclic shift by one: site `s` moves to site `s + 1 mod N`.
    pub fn cyclic_shift(&self) -> Result<Self> {
        let n = self.num_sites();
        let perm: Vec<usize> = (0..n).map(|s| (s + n - 1) % n).collect();
        self.permute_sites(&perm)
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Applies a local operator to one site (no renormalization).
    pub fn apply_local(&self, site: usize, op: &CMatrix) -> Result<CVector> {
        let dims = self.dims();
        if site >= dims.len() || op.nrows() != dims[site] || op.ncols() != dims[site] {
            return Err(Error::DimensionMismatch(format!("operator does not fit site {site}")));
        }
        let d = dims[site];
        let inner: usize = dims[site + 1..].iter().product();
        let outer: usize = dims[..site].iter().product();
        let mut out = CVector::zeros(self.amplitudes.len());
        for o in 0..outer {
            for i in 0..inner {
                for r in 0..d {
                    let mut acc = ZERO;
                    for cidx in 0..d {
                        acc += op[(r, cidx)] * self.amplitudes[(o * d + cidx) * inner + i];
                    }
                    out[(o * d + r) * inner + i] = acc;
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    register: QuditRegister,
    matrix: CMatrix,
}

fn check_density_budget(dim: usize) -> Result<()> {
    if dim > MAX_DENSITY_DIM {
        return Err(Error::DimensionBudgetExceeded { dim, budget: MAX_DENSITY_DIM });
    }
    Ok(())
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(register: QuditRegister, matrix: CMatrix) -> Result<Self> {
        let dim = register.total_dim();
        check_density_budget(dim)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for total dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let h = linalg::hermiticity_defect(&matrix);
        if h > HERMITIAN_TOL {
            return Err(Error::NotHermitian(h));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:.3e} is negative")));
        }
        Ok(Self { register, matrix })
    }

    pub(crate) fn trusted(register: QuditRegister, matrix: CMatrix) -> Self {
        Self { register, matrix }
    }

    pub fn maximally_mixed(register: QuditRegister) -> Result<Self> {
        let d = register.total_dim();
        check_density_budget(d)?;
        Ok(Self::trusted(register, linalg::identity(d).unscale(d as f64)))
    }

    /// Convex combination `sum_i w_i rho_i` of states on the same register.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?.1;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.register != first.register {
                return Err(Error::DimensionMismatch("mixture of different registers".into()));
            }
            m += rho.matrix.scale(*w);
        }
        Self::new(first.register.clone(), m)
    }

    pub fn register(&self) -> &QuditRegister {
        &self.register
    }

    pub fn dims(&self) -> &[usize] {
        self.register.dims()
    }

    pub fn num_sites(&self) -> usize {
        self.register.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let register = self.register.concat(&other.register)?;
        check_density_budget(register.total_dim())?;
        Ok(Self::trusted(register, linalg::kron(&self.matrix, &other.matrix)))
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<Self> {
        let keep = self.register.normalize_sites(keep)?;
        if keep.is_empty() {
            return Err(Error::TracedAllSites);
        }
        if keep.len() == self.num_sites() {
            return Ok(self.clone());
        }
        let sub = self.register.select(&keep);
        let dk = sub.total_dim();
        let dt = self.dim() / dk;
        let (kept, traced) = self.register.split_indices(&keep);
        // groups[t][k] = full index with traced part t and kept part k
        let mut groups = vec![vec![0usize; dk]; dt];
        for idx in 0..self.dim() {
            groups[traced[idx]][kept[idx]] = idx;
        }
        let mut out = CMatrix::zeros(dk, dk);
        for g in &groups {
            for (a, &ra) in g.iter().enumerate() {
                for (b, &rb) in g.iter().enumerate() {
                    out[(a, b)] += self.matrix[(ra, rb)];
                }
            }
        }
        Ok(Self::trusted(sub, out))
    }

    /// Traces out `traced_sites`; the result keeps the remaining sites in
    /// their original relative order.
    pub fn partial_trace(&self, traced_sites: &[usize]) -> Result<Self> {
        let traced = self.register.normalize_sites(traced_sites)?;
        let keep = self.register.complement(&traced);
        if keep.is_empty() {
            return Err(Error::TracedAllSites);
        }
        self.reduced(&keep)
    }

    /// Transposes the tensor factors listed in `subset`.
    pub fn partial_transpose(&self, subset: &[usize]) -> Result<CMatrix> {
        let subset = self.register.normalize_sites(subset)?;
        if subset.is_empty() {
            return Err(Error::InvalidSites("partial transpose needs a nonempty subset".into()));
        }
        let dims = self.dims();
        let n = dims.len();
        let dim = self.dim();
        let digits: Vec<Vec<usize>> = (0..dim).map(|i| linalg::digits(i, dims)).collect();
        let mut out = CMatrix::zeros(dim, dim);
        let mut rd = vec![0usize; n];
        let mut cd = vec![0usize; n];
        for r in 0..dim {
            for cidx in 0..dim {
                rd.copy_from_slice(&digits[r]);
                cd.copy_from_slice(&digits[cidx]);
                for &s in &subset {
                    std::mem::swap(&mut rd[s], &mut cd[s]);
                }
                out[(r, cidx)] = self.matrix[(linalg::index_of(&rd, dims), linalg::index_of(&cd, dims))];
            }
        }
        Ok(out)
    }

    /// `(F rho F^dagger) / tr(...)` with `F` acting on `site`, together with
    /// the success probability `tr(F rho F^dagger)`.
    pub fn apply_local_filter(&self, site: usize, filter: &LocalFilter) -> Result<(Self, f64)> {
        let dims = self.dims();
        if site >= dims.len() {
            return Err(Error::InvalidSites(format!("site {site} out of range")));
        }
        if filter.dim() != dims[site] {
            return Err(Error::DimensionMismatch(format!(
                "filter of dimension {} on site of dimension {}",
                filter.dim(),
                dims[site]
            )));
        }
        let ops: Vec<CMatrix> = dims
            .iter()
            .enumerate()
            .map(|(s, &d)| if s == site { filter.matrix().clone() } else { linalg::identity(d) })
            .collect();
        let full = linalg::kron_all(&ops);
        let m = &full * &self.matrix * full.adjoint();
        let p = linalg::trace(&m).re;
        if p < 1e-14 {
            return Err(Error::ZeroSuccessProbability(p));
        }
        Ok((Self::trusted(self.register.clone(), m.unscale(p)), p))
    }

    /// Applies one filter per site (identity where `None`).
    pub fn apply_filters(&self, filters: &[Option<LocalFilter>]) -> Result<(Self, f64)> {
        let mut rho = self.clone();
        let mut p = 1.0;
        for (site, f) in filters.iter().enumerate() {
            if let Some(f) = f {
                let (next, q) = rho.apply_local_filter(site, f)?;
                rho = next;
                p *= q;
            }
        }
        Ok((rho, p))
    }

    /// `w rho + (1 - w) I / D`.
    pub fn mix_with_white_noise(&self, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::ParameterOutOfRange(format!("visibility {w} not in [0,1]")));
        }
        let d = self.dim();
        let m = self.matrix.scale(w) + linalg::identity(d).scale((1.0 - w) / d as f64);
        Ok(Self::trusted(self.register.clone(), m))
    }

    /// Re-checks every invariant; useful after chains of trusted operations.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.register.clone(), self.matrix.clone()).map(|_| ())
    }
}

pub fn mix_with_white_noise(psi: &StateVector, w: f64) -> Result<DensityOperator> {
    psi.density()?.mix_with_white_noise(w)
}

pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.register != sigma.register {
        return Err(Error::DimensionMismatch("trace distance between different registers".into()));
    }
    Ok(0.5 * linalg::trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// A local measurement-operator element (Kraus operator of a successful
/// filtering outcome); its singular values must not exceed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalFilter {
    #[serde(with = "crate::serde_complex::matrix")]
    matrix: CMatrix,
}

impl LocalFilter {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidFilter("filter must be square".into()));
        }
        let smax = matrix.clone().singular_values().iter().copied().fold(0.0, f64::max);
        if smax > 1.0 + 1e-12 {
            return Err(Error::InvalidFilter(format!("largest singular value {smax} exceeds 1")));
        }
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: linalg::identity(d) }
    }

    /// `diag(eps, 1)` on the qubit subspace `span{|0>, |1>}`, identity on any
    /// further levels.
    pub fn attenuate_zero(d: usize, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidFilter(format!("attenuation {eps} not in (0,1]")));
        }
        let mut m = linalg::identity(d);
        m[(0, 0)] = C64::new(eps, 0.0);
        Ok(Self { matrix: m })
    }

    /// A 2x2 block acting on levels `(i, j)` of a `d`-level site, identity
    /// elsewhere.
    pub fn embedded(d: usize, levels: (usize, usize), block: &CMatrix) -> Result<Self> {
        let (i, j) = levels;
        if i == j || i >= d || j >= d || block.nrows() != 2 || block.ncols() != 2 {
            return Err(Error::InvalidFilter("bad embedding".into()));
        }
        let mut m = linalg::identity(d);
        let lv = [i, j];
        for a in 0..2 {
            for b in 0..2 {
                m[(lv[a], lv[b])] = block[(a, b)];
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ONE};

    fn ket(dims: Vec<usize>, amps: &[(usize, f64)]) -> StateVector {
        let reg = QuditRegister::new(dims).unwrap();
        let mut a = CVector::zeros(reg.total_dim());
        for &(i, x) in amps {
            a[i] = c(x, 0.0);
        }
        StateVector::normalized(reg, a).unwrap()
    }

    fn phi_plus() -> StateVector {
        ket(vec![2, 2], &[(0, 1.0), (3, 1.0)])
    }

    #[test]
    fn tensor_of_basis_states() {
        let z = ket(vec![2], &[(0, 1.0)]);
        let zz = z.tensor(&z).unwrap();
        assert_eq!(zz.amplitudes().as_slice(), &[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(zz.dims(), &[2, 2]);
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let q = DensityOperator::maximally_mixed(QuditRegister::qubits(1).unwrap()).unwrap();
        let qq = q.tensor(&q).unwrap();
        assert!(linalg::max_abs_diff(qq.matrix(), &linalg::identity(4).unscale(4.0)) < 1e-15);
    }

    #[test]
    fn tensor_rank_one_product() {
        // |0><0| (x) |phi+><phi+| built by hand as an 8x8 matrix
        let z = ket(vec![2], &[(0, 1.0)]).density().unwrap();
        let prod = z.tensor(&phi_plus().density().unwrap()).unwrap();
        let mut expect = CMatrix::zeros(8, 8);
        for &(r, cc) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            expect[(r, cc)] = c(0.5, 0.0);
        }
        assert!(linalg::max_abs_diff(prod.matrix(), &expect) < 1e-15);
        assert_eq!(prod.dims(), &[2, 2, 2]);
        let ev = linalg::hermitian_eigenvalues(prod.matrix());
        assert!((ev[0] - 1.0).abs() < 1e-12 && ev[1].abs() < 1e-12);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = phi_plus().density().unwrap().partial_trace(&[1]).unwrap();
        assert!(linalg::max_abs_diff(r.matrix(), &linalg::identity(2).scale(0.5)) < 1e-15);
        let r2 = phi_plus().partial_trace(&[1]).unwrap();
        assert!(linalg::max_abs_diff(r2.matrix(), r.matrix()) < 1e-15);
    }

    #[test]
    fn tracing_everything_fails() {
        assert!(matches!(phi_plus().partial_trace(&[0, 1]), Err(Error::TracedAllSites)));
        let rho = phi_plus().density().unwrap();
        assert!(matches!(rho.partial_trace(&[0, 1]), Err(Error::TracedAllSites)));
    }

    #[test]
    fn bell_partial_transpose_min_eigenvalue() {
        let pt = phi_plus().density().unwrap().partial_transpose(&[1]).unwrap();
        assert!((linalg::min_eigenvalue(&pt) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn product_partial_transpose_is_psd() {
        let a = ket(vec![2], &[(0, 0.6), (1, 0.8)]).density().unwrap();
        let b = ket(vec![3], &[(0, 1.0), (2, 1.0)]).density().unwrap();
        let ab = a.tensor(&b).unwrap();
        let pt = ab.partial_transpose(&[1]).unwrap();
        assert!(linalg::min_eigenvalue(&pt) > -1e-12);
        assert!(linalg::hermiticity_defect(&pt) < 1e-15);
    }

    #[test]
    fn zzz_mixture_partial_transposes_are_psd() {
        let z = linalg::pauli_z();
        let zzz = linalg::kron_all([&z, &z, &z]);
        let m = (linalg::identity(8) + zzz).scale(0.125);
        let rho = DensityOperator::new(QuditRegister::qubits(3).unwrap(), m).unwrap();
        for sub in [vec![0], vec![1], vec![2]] {
            let ev = linalg::hermitian_eigenvalues(&rho.partial_transpose(&sub).unwrap());
            assert!(ev.iter().all(|&x| x > -1e-14 && ((x - 0.25).abs() < 1e-14 || x.abs() < 1e-14)));
        }
    }

    #[test]
    fn identity_filter_is_noop() {
        let rho = phi_plus().density().unwrap();
        let (out, p) = rho.apply_local_filter(0, &LocalFilter::identity(2)).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn filtering_w_residue_reweights() {
        // rho(p) = p |W2><W2| + (1-p) |00><00|
        let p = 0.4;
        let w2 = ket(vec![2, 2], &[(1, 1.0), (2, 1.0)]).density().unwrap();
        let zz = ket(vec![2, 2], &[(0, 1.0)]).density().unwrap();
        let rho = DensityOperator::mixture(&[(p, &w2), (1.0 - p, &zz)]).unwrap();
        let eps = 0.3;
        let f = LocalFilter::attenuate_zero(2, eps).unwrap();
        let (out, _) = rho.apply_filters(&[Some(f.clone()), Some(f)]).unwrap();
        let weight = linalg::trace_product(out.matrix(), w2.matrix()).re;
        let expect = p / ((1.0 - p) * eps * eps + p);
        assert!((weight - expect).abs() < 1e-12, "{weight} vs {expect}");
    }

    #[test]
    fn annihilating_filter_errors() {
        let zero = ket(vec![2], &[(0, 1.0)]).density().unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(1, 1)] = ONE;
        let f = LocalFilter::new(m).unwrap();
        assert!(matches!(zero.apply_local_filter(0, &f), Err(Error::ZeroSuccessProbability(_))));
    }

    #[test]
    fn filter_rejects_amplifying_operator() {
        let m = linalg::identity(2).scale(1.5);
        assert!(LocalFilter::new(m).is_err());
    }

    #[test]
    fn white_noise_endpoints_and_werner_spectrum() {
        let psi = phi_plus();
        let pure = mix_with_white_noise(&psi, 1.0).unwrap();
        assert!(linalg::max_abs_diff(pure.matrix(), psi.density().unwrap().matrix()) < 1e-15);
        let mixed = mix_with_white_noise(&psi, 0.0).unwrap();
        assert!(linalg::max_abs_diff(mixed.matrix(), &linalg::identity(4).scale(0.25)) < 1e-15);
        let half = mix_with_white_noise(&psi, 0.5).unwrap();
        let ev = linalg::hermitian_eigenvalues(half.matrix());
        let expect = [0.625, 0.125, 0.125, 0.125];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let z0 = ket(vec![2], &[(0, 1.0)]).density().unwrap();
        let z1 = ket(vec![2], &[(1, 1.0)]).density().unwrap();
        let mm = DensityOperator::maximally_mixed(QuditRegister::qubits(1).unwrap()).unwrap();
        assert!(trace_distance(&z0, &z0).unwrap().abs() < 1e-14);
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-14);
        assert!((trace_distance(&z0, &mm).unwrap() - 0.5).abs() < 1e-14);
        let two = phi_plus().density().unwrap();
        assert!(matches!(trace_distance(&z0, &two), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn constructor_rejects_invalid_density() {
        let reg = QuditRegister::qubits(1).unwrap();
        let bad_trace = linalg::identity(2);
        assert!(DensityOperator::new(reg.clone(), bad_trace).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(DensityOperator::new(reg, neg).is_err());
    }

    #[test]
    fn cyclic_shift_moves_sites() {
        let s = ket(vec![2, 2, 2], &[(0b100, 1.0)]);
        let shifted = s.cyclic_shift().unwrap();
        assert!((shifted.amplitude(&[0, 1, 0]).re - 1.0).abs() < 1e-15);
    }
}
