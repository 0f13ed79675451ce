//! Dense complex linear algebra shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `[I, X, Y, Z]`.
pub fn paulis() -> [CMatrix; 4] {
    [identity(2), pauli_x(), pauli_y(), pauli_z()]
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a>(ms: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    ms.into_iter()
        .fold(CMatrix::identity(1, 1), |acc, m| acc.kronecker(m))
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().copied().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Largest entrywise deviation `max |m - m^dagger|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; `vectors` holds the matching orthonormal columns.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= self.values[j];
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    pub fn max(&self) -> f64 {
        *self.values.first().unwrap_or(&0.0)
    }
}

pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEig> {
    let defect = hermiticity_defect(m);
    if defect > 1e-8 {
        return Err(Error::NotHermitian(defect));
    }
    Ok(eig_unchecked(m))
}

pub(crate) fn eig_unchecked(m: &CMatrix) -> HermitianEig {
    let n = m.nrows();
    if n == 0 {
        return HermitianEig { values: vec![], vectors: CMatrix::zeros(0, 0) };
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (j, &src) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(src));
    }
    HermitianEig { values, vectors }
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Projector onto the strictly positive eigenspace minus its complement.
/// Zero eigenvalues go to +1 so the result is always a valid dichotomic
/// observable.
pub fn sign_of(m: &CMatrix) -> CMatrix {
    let eig = eig_unchecked(m);
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let s = if eig.values[j] >= 0.0 { 1.0 } else { -1.0 };
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled * eig.vectors.adjoint()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Mixed-radix digits of `index` with the first site most significant.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn index_of(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        hermitian_part(&m)
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = hermitian_eig(&pauli_z()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_half_identity() {
        let e = hermitian_eig(&identity(2).scale(0.5)).unwrap();
        assert!(e.values.iter().all(|v| (v - 0.5).abs() < 1e-14));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn chsh_operator_extremes() {
        // A0 = Z, A1 = X, B0 = (Z+X)/sqrt2, B1 = (Z-X)/sqrt2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (z, x) = (pauli_z(), pauli_x());
        let b0 = (&z + &x).scale(s);
        let b1 = (&z - &x).scale(s);
        let op = kron(&z, &b0) + kron(&z, &b1) + kron(&x, &b0) - kron(&x, &b1);
        let e = hermitian_eig(&op).unwrap();
        assert!((e.max() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((e.min() + 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..200 {
            let n = 2 + case % 63;
            let m = random_hermitian(n, &mut rng);
            let e = hermitian_eig(&m).unwrap();
            let err = frobenius(&(e.reconstruct() - &m));
            assert!(err <= 1e-9 * frobenius(&m).max(1.0), "n={n} err={err}");
            let sum: f64 = e.values.iter().sum();
            assert!((sum - trace(&m).re).abs() < 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn digits_roundtrip() {
        let dims = [2, 3, 4];
        for i in 0..24 {
            assert_eq!(index_of(&digits(i, &dims), &dims), i);
        }
        assert_eq!(digits(5, &dims), vec![0, 1, 1]);
    }
}
