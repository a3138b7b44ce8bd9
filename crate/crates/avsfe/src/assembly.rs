//! Global assembly of saddle-point systems
//! `[G B; Bᵀ 0] [e; x] = [F; 0]` with `G` the block-diagonal test Gram matrix.

use std::collections::BTreeMap;

use avsfe_core::dense::DenseMatrix;
use avsfe_core::forms::ElementMatrices;
use avsfe_core::norms::IndicatorSet;
use rayon::prelude::*;

use crate::discretization::Discretization;
use crate::error::Result;
use crate::sparse::CsrMatrix;

/// Assembled saddle system with strongly imposed trial values kept aside.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub n_test: usize,
    pub n_trial: usize,
    /// Per-element Gram blocks and their global test dofs.
    pub gram: Vec<DenseMatrix>,
    pub test_dofs: Vec<Vec<usize>>,
    /// `n_test × n_trial`.
    pub b: CsrMatrix,
    pub f: Vec<f64>,
    /// Strongly imposed trial values.
    pub constraints: BTreeMap<usize, f64>,
}

impl SaddleSystem {
    pub fn dimension(&self) -> usize {
        self.n_test + self.n_trial
    }

    /// Element indicators `η_K = sqrt(e_Kᵀ G_K e_K)`.
    pub fn indicators(&self, e: &[f64]) -> IndicatorSet {
        let locals: Vec<Vec<f64>> = self
            .test_dofs
            .iter()
            .map(|d| d.iter().map(|&i| e[i]).collect())
            .collect();
        IndicatorSet::from_local(
            self.gram
                .iter()
                .zip(&locals)
                .map(|(g, l)| (g, l.as_slice())),
        )
    }

    /// `eᵀ G e` summed over elements.
    pub fn gram_norm_sq(&self, e: &[f64]) -> f64 {
        self.gram
            .iter()
            .zip(&self.test_dofs)
            .map(|(g, d)| {
                let l: Vec<f64> = d.iter().map(|&i| e[i]).collect();
                g.quadratic_form(&l)
            })
            .sum()
    }

    /// `G e` as a global vector.
    pub fn gram_mul(&self, e: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_test];
        for (g, d) in self.gram.iter().zip(&self.test_dofs) {
            let l: Vec<f64> = d.iter().map(|&i| e[i]).collect();
            for (k, v) in g.mul_vec(&l).into_iter().enumerate() {
                y[d[k]] += v;
            }
        }
        y
    }
}

/// Element contributions are computed in parallel and merged in element order,
/// so the assembled system does not depend on the thread count.
pub fn assemble<F>(
    disc: &Discretization,
    constraints: BTreeMap<usize, f64>,
    element: F,
) -> Result<SaddleSystem>
where
    F: Fn(usize) -> Result<ElementMatrices> + Sync,
{
    let n_tri = disc.mesh.n_triangles();
    let locals: Vec<ElementMatrices> = (0..n_tri)
        .into_par_iter()
        .map(&element)
        .collect::<Result<_>>()?;
    let mut triplets = Vec::new();
    let mut f = vec![0.0; disc.n_test()];
    let mut gram = Vec::with_capacity(n_tri);
    let mut test_dofs = Vec::with_capacity(n_tri);
    for (tri, em) in locals.into_iter().enumerate() {
        let rows = disc.test_dofs(tri);
        let cols = disc.trial_dofs(tri);
        for (i, &r) in rows.iter().enumerate() {
            f[r] += em.f[i];
            for (j, &c) in cols.iter().enumerate() {
                let v = em.b[(i, j)];
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        gram.push(em.gram);
        test_dofs.push(rows);
    }
    Ok(SaddleSystem {
        n_test: disc.n_test(),
        n_trial: disc.n_trial(),
        gram,
        test_dofs,
        b: CsrMatrix::from_triplets(disc.n_test(), disc.n_trial(), &triplets),
        f,
        constraints,
    })
}

/// Assembles a global matrix from per-element dense blocks.
pub fn assemble_matrix(
    nrows: usize,
    ncols: usize,
    blocks: impl IntoIterator<Item = (Vec<usize>, Vec<usize>, DenseMatrix)>,
) -> CsrMatrix {
    let mut triplets = Vec::new();
    for (rows, cols, m) in blocks {
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                let v = m[(i, j)];
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(nrows, ncols, &triplets)
}

/// Assembles a test-space load vector from per-element contributions.
pub fn assemble_load<F>(disc: &Discretization, element: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    let locals: Vec<Vec<f64>> = (0..disc.mesh.n_triangles())
        .into_par_iter()
        .map(&element)
        .collect::<Result<_>>()?;
    let mut f = vec![0.0; disc.n_test()];
    for (tri, l) in locals.into_iter().enumerate() {
        for (&r, v) in disc.test_dofs(tri).iter().zip(l) {
            f[r] += v;
        }
    }
    Ok(f)
}
