//! Dense normal-equation route `BᵀG⁻¹B x = BᵀG⁻¹F` for small systems, used
//! to cross-check the sparse saddle solve.

use nalgebra::{DMatrix, DVector};

use crate::assembly::SaddleSystem;
use crate::error::{Error, Result};

/// Element limit of the dense oracle.
pub const MAX_ELEMENTS: usize = 200;

/// Trial solution (including constrained values) by explicit elimination:
/// dense global `G` and `B`, `G⁻¹B` by a dense Cholesky solve, then an LU
/// solve of the dense normal matrix.
pub fn solve_normal_equations(system: &SaddleSystem) -> Result<Vec<f64>> {
    if system.gram.len() > MAX_ELEMENTS {
        return Err(Error::Core(avsfe_core::Error::InvalidInput(format!(
            "normal-equation oracle is limited to {MAX_ELEMENTS} elements (got {})",
            system.gram.len()
        ))));
    }
    let free: Vec<usize> = (0..system.n_trial)
        .filter(|j| !system.constraints.contains_key(j))
        .collect();
    let mut col_of = vec![usize::MAX; system.n_trial];
    for (k, &j) in free.iter().enumerate() {
        col_of[j] = k;
    }
    let nt = system.n_test;
    let mut g = DMatrix::<f64>::zeros(nt, nt);
    for (gk, d) in system.gram.iter().zip(&system.test_dofs) {
        for (i, &r) in d.iter().enumerate() {
            for (k, &c) in d.iter().enumerate() {
                g[(r, c)] += gk[(i, k)];
            }
        }
    }
    let mut b = DMatrix::<f64>::zeros(nt, free.len());
    let mut rhs = DVector::from_column_slice(&system.f);
    for (r, c, v) in system.b.iter() {
        match system.constraints.get(&c) {
            Some(val) => rhs[r] -= v * val,
            None => b[(r, col_of[c])] += v,
        }
    }
    let chol = g.cholesky().ok_or_else(|| Error::Solver {
        block: "error-representation",
        message: "dense Gram matrix is not SPD".into(),
    })?;
    let gib = chol.solve(&b);
    let gif = chol.solve(&rhs);
    let n = b.transpose() * &gib;
    let r = b.transpose() * gif;
    let xf = n.lu().solve(&r).ok_or_else(|| Error::Solver {
        block: "trial",
        message: "normal matrix is singular".into(),
    })?;
    let mut x = vec![0.0; system.n_trial];
    for (&j, &v) in system.constraints.iter() {
        x[j] = v;
    }
    for (k, &j) in free.iter().enumerate() {
        x[j] = xf[k];
    }
    Ok(x)
}
