//! Compressed sparse row storage built from triplets.

/// Row-compressed matrix; duplicates are summed in insertion order, so equal
/// triplet sequences give bit-identical matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(
                r < nrows && c < ncols,
                "triplet ({r}, {c}) outside {nrows}x{ncols}"
            );
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        // bucket by row keeping insertion order, then merge columns
        let mut next = counts.clone();
        let mut by_row = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            by_row[next[r]] = (c, v);
            next[r] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..nrows {
            let row = &mut by_row[counts[r]..counts[r + 1]];
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let s = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[s.clone()], &self.values[s])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (c, v) = self.row(r);
            c.iter().zip(v).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                let (c, v) = self.row(r);
                c.iter().zip(v).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            let (c, v) = self.row(r);
            for (&c, &v) in c.iter().zip(v) {
                y[c] += v * x[r];
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.iter() {
            d[r][c] = v;
        }
        d
    }
}

pub(crate) fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_summed_and_products() {
        let m =
            CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (1, 0, 2.0), (0, 2, 0.5), (0, 0, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(
            m.to_dense(),
            vec![vec![-1.0, 0.0, 1.5], vec![2.0, 0.0, 0.0]]
        );
        assert_eq!(m.mul_vec(&[1.0, 1.0, 2.0]), vec![2.0, 2.0]);
        assert_eq!(m.tr_mul_vec(&[1.0, 1.0]), vec![1.0, 0.0, 1.5]);
    }
}
