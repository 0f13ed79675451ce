use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CVector, C64};
use crate::register::QuditRegister;
use crate::state::StateVector;

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ParameterOutOfRange("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::ParameterOutOfRange(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::ParameterOutOfRange(format!("edge ({u},{v}) outside 0..{n}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Self { n, edges: set })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let mut g = Self::path(n)?;
        if n > 2 {
            g.edges.insert((0, n - 1));
        }
        Ok(g)
    }

    /// Row-major `rows x cols` grid; `periodic` wraps both axes.
    pub fn grid(rows: usize, cols: usize, periodic: bool) -> Result<Self> {
        let at = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((at(r, c), at(r, c + 1)));
                } else if periodic && cols > 2 {
                    edges.push((at(r, c), at(r, 0)));
                }
                if r + 1 < rows {
                    edges.push((at(r, c), at(r + 1, c)));
                } else if periodic && rows > 2 {
                    edges.push((at(r, c), at(0, c)));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect()
    }
}

/// Controlled-Z on every edge applied to `|+>^n`.
pub fn graph_state(g: &Graph) -> Result<StateVector> {
    let n = g.n();
    let reg = QuditRegister::qubits(n)?;
    let dim = reg.total_dim();
    let amp = 1.0 / (dim as f64).sqrt();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let amps = CVector::from_fn(dim, |x, _| {
        // site 0 is the most significant bit
        let bit = |v: usize| (x >> (n - 1 - v)) & 1;
        let parity = edges.iter().map(|&(u, v)| bit(u) & bit(v)).sum::<usize>() & 1;
        C64::new(if parity == 0 { amp } else { -amp }, 0.0)
    });
    StateVector::new(reg, amps)
}

/// Checks `X_v prod_{u~v} Z_u |G> = |G>` for every vertex; returns the worst
/// deviation.
pub fn stabilizer_defect(g: &Graph, psi: &StateVector) -> Result<f64> {
    let (x, z) = (linalg::pauli_x(), linalg::pauli_z());
    let mut worst = 0.0f64;
    for v in 0..g.n() {
        let mut tmp = StateVector::new(psi.register().clone(), psi.apply_local(v, &x)?)?;
        for u in g.neighbors(v) {
            tmp = StateVector::new(psi.register().clone(), tmp.apply_local(u, &z)?)?;
        }
        worst = worst.max((tmp.amplitudes() - psi.amplitudes()).norm());
    }
    Ok(worst)
}
