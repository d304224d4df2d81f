//! Sparse LDLᵀ factorisation of symmetric positive definite matrices.
//!
//! Pivots are chosen by exact minimum degree on the elimination graph,
//! ties broken by index. Nodal matrices of tree-like circuits factor with
//! little or no fill under this ordering.

use std::collections::{BTreeMap, BTreeSet};

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct SparseLdl {
    /// Elimination order.
    order: Vec<usize>,
    /// Below-diagonal entries of each pivot's column, by row index.
    columns: Vec<Vec<(usize, f64)>>,
    /// Pivot values by row index.
    diag: Vec<f64>,
}

impl SparseLdl {
    /// Factors the `n × n` matrix given as `(row, col, value)` triplets.
    /// Duplicate positions are summed; each off-diagonal pair is given once
    /// from either triangle.
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut diag = vec![0.0; n];
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "entry ({i}, {j}) outside a {n}×{n} matrix"
                )));
            }
            if i == j {
                diag[i] += v;
            } else {
                *rows[i].entry(j).or_insert(0.0) += v;
                *rows[j].entry(i).or_insert(0.0) += v;
            }
        }
        let scale = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let tiny = scale * 1e-14;

        let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (rows[i].len(), i)).collect();
        let mut order = Vec::with_capacity(n);
        let mut columns = vec![Vec::new(); n];
        while let Some((_, p)) = queue.pop_first() {
            let d = diag[p];
            if !(d > tiny) {
                return Err(Error::Invariant(format!(
                    "matrix is not positive definite at pivot {p} (d = {d:e})"
                )));
            }
            let col: Vec<(usize, f64)> = std::mem::take(&mut rows[p]).into_iter().collect();
            for &(i, _) in &col {
                queue.remove(&(rows[i].len(), i));
                rows[i].remove(&p);
            }
            for (x, &(i, aip)) in col.iter().enumerate() {
                diag[i] -= aip * aip / d;
                for &(j, ajp) in &col[x + 1..] {
                    let update = aip * ajp / d;
                    *rows[i].entry(j).or_insert(0.0) -= update;
                    *rows[j].entry(i).or_insert(0.0) -= update;
                }
            }
            for &(i, _) in &col {
                queue.insert((rows[i].len(), i));
            }
            columns[p] = col.into_iter().map(|(i, a)| (i, a / d)).collect();
            order.push(p);
        }
        Ok(Self {
            order,
            columns,
            diag,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Entries of L below the diagonal.
    pub fn fill(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Overwrites `b` with the solution of `A x = b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.len(), "right-hand side length");
        for &p in &self.order {
            let bp = b[p];
            for &(i, l) in &self.columns[p] {
                b[i] -= l * bp;
            }
        }
        for (bi, d) in b.iter_mut().zip(&self.diag) {
            *bi /= d;
        }
        for &p in self.order.iter().rev() {
            let s: f64 = self.columns[p].iter().map(|&(i, l)| l * b[i]).sum();
            b[p] -= s;
        }
    }
}
