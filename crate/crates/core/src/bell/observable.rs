use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::random;

const SQUARE_TOL: f64 = 1e-10;

/// A two-outcome observable: Hermitian with spectrum in {+1, -1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomicObservable {
    #[serde(with = "crate::serde_complex::matrix")]
    matrix: CMatrix,
}

impl DichotomicObservable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidObservable("matrix is not square".into()));
        }
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > SQUARE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let d = matrix.nrows();
        let defect = linalg::max_abs_diff(&(&matrix * &matrix), &linalg::identity(d));
        if defect > SQUARE_TOL {
            return Err(Error::InvalidObservable(format!("O^2 deviates from identity by {defect:.3e}")));
        }
        Ok(DichotomicObservable { matrix })
    }

    /// `n . sigma` on a qubit.
    pub fn qubit(bloch: [f64; 3]) -> Result<Self> {
        Self::embedded(2, (0, 1), bloch)
    }

    /// `n . sigma` acting on `span{|i>, |j>}` of a `d`-level site, `+1` on the
    /// orthogonal complement.
    pub fn embedded(d: usize, levels: (usize, usize), bloch: [f64; 3]) -> Result<Self> {
        let (i, j) = levels;
        if i == j || i >= d || j >= d {
            return Err(Error::InvalidObservable(format!("levels {levels:?} invalid for d = {d}")));
        }
        let norm = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidObservable(format!("Bloch vector has norm {norm}")));
        }
        let [x, y, z] = bloch;
        let mut m = linalg::identity(d);
        m[(i, i)] = linalg::c(z, 0.0);
        m[(j, j)] = linalg::c(-z, 0.0);
        m[(i, j)] = linalg::c(x, -y);
        m[(j, i)] = linalg::c(x, y);
        Self::new(m)
    }

    /// `sign(k)`, with zero eigenvalues mapped to `+1`.
    pub fn sign_of(k: &CMatrix) -> Self {
        DichotomicObservable { matrix: linalg::sign_of(k) }
    }

    /// The constant observable `value * I`.
    pub fn constant(d: usize, value: bool) -> Self {
        let s = if value { 1.0 } else { -1.0 };
        DichotomicObservable { matrix: linalg::identity(d).scale(s) }
    }

    /// Bloch-embedded observable with a uniformly random direction on a
    /// random pair of levels (always `{0, 1}` for qubits).
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let levels = if d == 2 {
            (0, 1)
        } else {
            let i = rng.gen_range(0..d);
            let mut j = rng.gen_range(0..d - 1);
            if j >= i {
                j += 1;
            }
            (i, j)
        };
        Self::embedded(d, levels, random::unit_vector3(rng)).expect("unit Bloch vector")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Projector onto outcome `+1` (`a = true`) or `-1`.
    pub fn projector(&self, a: bool) -> CMatrix {
        let id = linalg::identity(self.dim());
        if a {
            (id + &self.matrix).scale(0.5)
        } else {
            (id - &self.matrix).scale(0.5)
        }
    }
}

/// Two dichotomic settings per party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementScenario {
    parties: Vec<[DichotomicObservable; 2]>,
}

impl MeasurementScenario {
    pub fn new(parties: Vec<[DichotomicObservable; 2]>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::InvalidObservable("scenario needs at least one party".into()));
        }
        Ok(MeasurementScenario { parties })
    }

    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Self {
        let parties = dims
            .iter()
            .map(|&d| [DichotomicObservable::random(d, rng), DichotomicObservable::random(d, rng)])
            .collect();
        MeasurementScenario { parties }
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn settings(&self) -> usize {
        2
    }

    pub fn party(&self, i: usize) -> &[DichotomicObservable; 2] {
        &self.parties[i]
    }

    pub fn observable(&self, party: usize, setting: usize) -> &DichotomicObservable {
        &self.parties[party][setting]
    }

    /// Scenario whose party `order[j]` carries the settings of party `j`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let k = self.parties.len();
        let mut seen = vec![false; k];
        if order.len() != k || order.iter().any(|&t| t >= k || std::mem::replace(&mut seen[t], true)) {
            return Err(Error::DimensionMismatch(format!("{order:?} is not a permutation of {k} parties")));
        }
        let mut parties = self.parties.clone();
        for (j, &t) in order.iter().enumerate() {
            parties[t] = self.parties[j].clone();
        }
        Ok(MeasurementScenario { parties })
    }

    pub(crate) fn set(&mut self, party: usize, setting: usize, o: DichotomicObservable) {
        self.parties[party][setting] = o;
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parties.iter().map(|p| p[0].dim()).collect()
    }

    pub fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if dims.len() != self.parties.len() {
            return Err(Error::DimensionMismatch(format!(
                "scenario has {} parties, state has {} sites",
                self.parties.len(),
                dims.len()
            )));
        }
        for (i, (p, &d)) in self.parties.iter().zip(dims).enumerate() {
            if p[0].dim() != d || p[1].dim() != d {
                return Err(Error::DimensionMismatch(format!("party {i}: observables do not act on dimension {d}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_squares_to_identity() {
        let mut rng = random::rng(11);
        for d in 2..=7 {
            for _ in 0..20 {
                let o = DichotomicObservable::random(d, &mut rng);
                let sq = o.matrix() * o.matrix();
                assert!(linalg::max_abs_diff(&sq, &linalg::identity(d)) < 1e-10);
            }
        }
    }

    #[test]
    fn embedding_keeps_complement_positive() {
        let o = DichotomicObservable::embedded(3, (0, 1), [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(o.matrix()[(2, 2)].re, 1.0);
        assert_eq!(o.matrix()[(1, 1)].re, -1.0);
        assert!(DichotomicObservable::embedded(3, (1, 1), [0.0, 0.0, 1.0]).is_err());
        assert!(DichotomicObservable::embedded(2, (0, 1), [0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_non_dichotomic() {
        assert!(DichotomicObservable::new(linalg::identity(2).scale(0.5)).is_err());
        assert!(DichotomicObservable::new(linalg::pauli_z()).is_ok());
    }

    #[test]
    fn projectors_sum_to_identity() {
        let o = DichotomicObservable::qubit([0.6, 0.0, 0.8]).unwrap();
        let s = o.projector(true) + o.projector(false);
        assert!(linalg::max_abs_diff(&s, &linalg::identity(2)) < 1e-15);
    }
}
