use faer::sparse::{SparseColMat, Triplet};

use super::FemError;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub nrows: usize,
    pub ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    pub symmetric: bool,
}

impl SparseOperator {
    /// Duplicate entries are summed; explicit zeros are kept so patterns stay stable.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trips: Vec<(usize, usize, f64)>, symmetric: bool) -> Self {
        trips.sort_unstable_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trips.len());
        let mut values: Vec<f64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trips {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
            symmetric,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect(), true)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_triplets(
            d.len(),
            d.len(),
            d.iter().enumerate().map(|(i, v)| (i, i, *v)).collect(),
            true,
        )
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row pointers and column indices.
    pub fn pattern(&self) -> (Vec<usize>, Vec<usize>) {
        (self.indptr.clone(), self.indices.clone())
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).filter(|(cc, _)| *cc == c).map(|(_, v)| v).sum()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn matvec_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                out[c] += v * y[r];
            }
        }
        out
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, c, v)| (c, r, v)).collect(),
            self.symmetric,
        )
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// self + alpha * other.
    pub fn add(&self, other: &Self, alpha: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t: Vec<_> = self.triplets().collect();
        t.extend(other.triplets().map(|(r, c, v)| (r, c, alpha * v)));
        Self::from_triplets(self.nrows, self.ncols, t, self.symmetric && other.symmetric)
    }

    /// Keeps rows/columns whose map entry is not `usize::MAX`, renumbered by the map.
    pub fn restrict(&self, row_map: &[usize], nrows: usize, col_map: &[usize], ncols: usize) -> Self {
        let t = self
            .triplets()
            .filter_map(|(r, c, v)| {
                let (rr, cc) = (row_map[r], col_map[c]);
                (rr != usize::MAX && cc != usize::MAX).then_some((rr, cc, v))
            })
            .collect();
        Self::from_triplets(nrows, ncols, t, self.symmetric)
    }

    /// max |A - Aᵀ| relative to max |A|.
    pub fn symmetry_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let t = self.transpose();
        let d = self.add(&t, -1.0);
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let def = d.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            0.0
        } else {
            def / scale
        }
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, f64>, FemError> {
        let t: Vec<Triplet<usize, usize, f64>> = self.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| FemError::Solve(format!("sparse matrix creation failed: {e:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_sum() {
        let a = SparseOperator::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 3.0)], false);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.matvec(&[1.0, 1.0]), vec![3.0, 3.0]);
        assert_eq!(a.matvec_transpose(&[1.0, 1.0]), vec![6.0, 0.0]);
        assert!(a.symmetry_defect() > 0.0);
    }

    #[test]
    fn restrict_drops_rows() {
        let a = SparseOperator::from_triplets(3, 3, (0..3).map(|i| (i, i, i as f64 + 1.0)).collect(), true);
        let map = [usize::MAX, 0, 1];
        let r = a.restrict(&map, 2, &map, 2);
        assert_eq!(r.diag(), vec![2.0, 3.0]);
    }
}
