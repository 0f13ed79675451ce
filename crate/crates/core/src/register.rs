use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest total dimension allowed for a dense density operator.
pub const MAX_DENSITY_DIM: usize = 1 << 14;
/// Largest total dimension allowed for a pure state vector.
pub const MAX_PURE_DIM: usize = 1 << 20;

/// Local dimensions of a register of qudits; site 0 is the most significant
/// tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuditRegister {
    dims: Vec<usize>,
}

impl QuditRegister {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidRegister("register needs at least one site".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidRegister(format!("local dimension {d} < 2")));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total
                .checked_mul(d)
                .filter(|&t| t <= MAX_PURE_DIM)
                .ok_or(Error::DimensionBudgetExceeded { dim: usize::MAX, budget: MAX_PURE_DIM })?;
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims)
    }

    pub fn select(&self, sites: &[usize]) -> Self {
        Self { dims: sites.iter().map(|&s| self.dims[s]).collect() }
    }

    /// Sorted, deduplicated site list or an error on out-of-range indices.
    pub fn normalize_sites(&self, sites: &[usize]) -> Result<Vec<usize>> {
        let mut v = sites.to_vec();
        v.sort_unstable();
        v.dedup();
        if let Some(&s) = v.iter().find(|&&s| s >= self.len()) {
            return Err(Error::InvalidSites(format!("site {s} out of range for {} sites", self.len())));
        }
        Ok(v)
    }

    pub fn complement(&self, sites: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|s| !sites.contains(s)).collect()
    }

    /// For every basis index, its index within the `keep` factor and within
    /// the complementary factor (both mixed-radix in original site order).
    pub(crate) fn split_indices(&self, keep: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let n = self.len();
        let total = self.total_dim();
        let mut kept_stride = vec![0usize; n];
        let mut traced_stride = vec![0usize; n];
        let (mut ks, mut ts) = (1usize, 1usize);
        for s in (0..n).rev() {
            if keep.contains(&s) {
                kept_stride[s] = ks;
                ks *= self.dims[s];
            } else {
                traced_stride[s] = ts;
                ts *= self.dims[s];
            }
        }
        let mut kept = vec![0usize; total];
        let mut traced = vec![0usize; total];
        let mut digit = vec![0usize; n];
        for idx in 0..total {
            let (mut k, mut t) = (0, 0);
            for s in 0..n {
                k += digit[s] * kept_stride[s];
                t += digit[s] * traced_stride[s];
            }
            kept[idx] = k;
            traced[idx] = t;
            for s in (0..n).rev() {
                digit[s] += 1;
                if digit[s] < self.dims[s] {
                    break;
                }
                digit[s] = 0;
            }
        }
        (kept, traced)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dimension() {
        let r = QuditRegister::new(vec![2, 3, 4]).unwrap();
        assert_eq!(r.total_dim(), 24);
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(QuditRegister::new(vec![]).is_err());
        assert!(QuditRegister::new(vec![2, 1]).is_err());
        assert!(matches!(
            QuditRegister::new(vec![2; 21]),
            Err(Error::DimensionBudgetExceeded { .. })
        ));
    }

    #[test]
    fn split_indices_matches_digits() {
        let r = QuditRegister::new(vec![2, 3, 2]).unwrap();
        let (k, t) = r.split_indices(&[0, 2]);
        // index 7 = digits (1, 0, 1) -> kept (1,1) = 3, traced (0) = 0
        assert_eq!(k[7], 3);
        assert_eq!(t[7], 0);
        // index 9 = digits (1, 1, 1) -> kept 3, traced 1
        assert_eq!(k[9], 3);
        assert_eq!(t[9], 1);
    }
}
