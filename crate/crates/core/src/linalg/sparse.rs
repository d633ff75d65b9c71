//! Sparse matrices over ℚ with exact rank by elimination.

use std::collections::BTreeMap;

use crate::rational::Q;

/// Column-major sparse matrix; each column maps row index to a nonzero entry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub cols: Vec<BTreeMap<usize, Q>>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, cols: vec![BTreeMap::new(); ncols] }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn add(&mut self, row: usize, col: usize, v: Q) {
        debug_assert!(row < self.nrows);
        let e = self.cols[col].entry(row).or_insert(Q::ZERO);
        *e += v;
        if e.is_zero() {
            self.cols[col].remove(&row);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Q {
        self.cols[col].get(&row).copied().unwrap_or(Q::ZERO)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols(), rhs.nrows);
        let mut out = SparseMatrix::new(self.nrows, rhs.ncols());
        for (j, col) in rhs.cols.iter().enumerate() {
            for (&k, &v) in col {
                for (&i, &w) in &self.cols[k] {
                    out.add(i, j, w * v);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    /// Drop a set of columns (by index) and return the remaining matrix.
    pub fn without_cols(&self, drop: &[usize]) -> SparseMatrix {
        let cols = self
            .cols
            .iter()
            .enumerate()
            .filter(|(j, _)| !drop.contains(j))
            .map(|(_, c)| c.clone())
            .collect();
        SparseMatrix { nrows: self.nrows, cols }
    }

    /// Rank over ℚ. Columns are eliminated against pivots keyed by their
    /// leading row; shortest columns are processed first to limit fill-in.
    pub fn rank(&self) -> usize {
        let mut order: Vec<usize> = (0..self.ncols()).collect();
        order.sort_by_key(|&j| (self.cols[j].len(), j));
        let mut pivots: BTreeMap<usize, BTreeMap<usize, Q>> = BTreeMap::new();
        for j in order {
            let mut col = self.cols[j].clone();
            loop {
                let Some((&lead, &lv)) = col.iter().next() else { break };
                match pivots.get(&lead) {
                    Some(p) => {
                        let f = lv / p[&lead];
                        for (&r, &pv) in p {
                            let e = col.entry(r).or_insert(Q::ZERO);
                            *e -= f * pv;
                            if e.is_zero() {
                                col.remove(&r);
                            }
                        }
                    }
                    None => {
                        pivots.insert(lead, col);
                        break;
                    }
                }
            }
        }
        pivots.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_path_boundary() {
        // augmented chain complex of a path with 3 vertices: ∂1 has rank 2
        let mut d = SparseMatrix::new(3, 2);
        d.add(0, 0, -Q::ONE);
        d.add(1, 0, Q::ONE);
        d.add(1, 1, -Q::ONE);
        d.add(2, 1, Q::ONE);
        assert_eq!(d.rank(), 2);
        let mut aug = SparseMatrix::new(1, 3);
        for j in 0..3 {
            aug.add(0, j, Q::ONE);
        }
        assert!(aug.mul(&d).is_zero());
        assert_eq!(d.without_cols(&[1]).rank(), 1);
    }

    #[test]
    fn rank_matches_dense() {
        let rows = [[1i64, 2, 0, 1], [0, 1, 1, 0], [1, 3, 1, 1], [2, 0, -4, 2]];
        let mut s = SparseMatrix::new(4, 4);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0 {
                    s.add(i, j, Q::from(v));
                }
            }
        }
        let dense: Vec<_> = rows.iter().map(|r| crate::rational::qvec(r)).collect();
        assert_eq!(s.rank(), crate::linalg::rank(&dense));
    }
}
