//! Sparse direct solution of saddle systems, with optional element-wise
//! static condensation of the error representation.

use std::sync::atomic::{AtomicU64, Ordering};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use crate::assembly::SaddleSystem;
use crate::error::{Error, Result};
use crate::sparse::{inf_norm, CsrMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolveOptions {
    /// Eliminate the error representation element by element and factor the
    /// SPD Schur complement `BᵀG⁻¹B` instead of the indefinite saddle matrix.
    pub condense: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct Diagnostics {
    /// `‖A z − r‖∞` of the full saddle system.
    pub residual: f64,
    /// `‖r‖∞`.
    pub rhs_norm: f64,
    /// `max_j |B(φ_j; ê)|` over free trial functions.
    pub orthogonality: f64,
    /// `‖F‖∞`.
    pub load_norm: f64,
    pub refinements: usize,
}

impl Diagnostics {
    pub fn orthogonality_ratio(&self) -> f64 {
        self.orthogonality / (1.0 + self.load_norm)
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Error representation (test dofs).
    pub e: Vec<f64>,
    /// Trial solution including strongly imposed values.
    pub x: Vec<f64>,
    pub diagnostics: Diagnostics,
}

static SOLVES: AtomicU64 = AtomicU64::new(0);
static WORST_ORTHOGONALITY: AtomicU64 = AtomicU64::new(0);

/// Number of solves in this process and the largest
/// `‖Bᵀê‖∞ / (1 + ‖F‖∞)` seen so far.
pub fn orthogonality_monitor() -> (u64, f64) {
    (
        SOLVES.load(Ordering::Relaxed),
        f64::from_bits(WORST_ORTHOGONALITY.load(Ordering::Relaxed)),
    )
}

fn record(d: &Diagnostics) {
    SOLVES.fetch_add(1, Ordering::Relaxed);
    // non-negative floats order like their bit patterns
    WORST_ORTHOGONALITY.fetch_max(d.orthogonality_ratio().to_bits(), Ordering::Relaxed);
}

enum Kind {
    Saddle(Lu<usize, f64>),
    Condensed {
        schur: Llt<usize, f64>,
        /// Per element: local test dofs, free trial columns touched, Cholesky
        /// factor of `G_K` and the dense `B_K`.
        elements: Vec<CondensedElement>,
    },
}

struct CondensedElement {
    rows: Vec<usize>,
    cols: Vec<usize>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    b: DMatrix<f64>,
}

/// A factorized saddle matrix; right-hand sides and constraint values may
/// change between solves, the constrained set may not.
pub struct Factorization {
    n_test: usize,
    n_trial: usize,
    free_index: Vec<Option<usize>>,
    free: Vec<usize>,
    b: CsrMatrix,
    system: SaddleSystem,
    kind: Kind,
}

fn solver_err(block: &'static str, message: impl Into<String>) -> Error {
    Error::Solver {
        block,
        message: message.into(),
    }
}

impl Factorization {
    pub fn new(system: &SaddleSystem, opts: &SolveOptions) -> Result<Self> {
        let n_test = system.n_test;
        let n_trial = system.n_trial;
        let mut free_index = vec![None; n_trial];
        let mut free = Vec::new();
        for (j, slot) in free_index.iter_mut().enumerate() {
            if !system.constraints.contains_key(&j) {
                *slot = Some(free.len());
                free.push(j);
            }
        }
        let kind = if opts.condense {
            Self::condensed(system, &free_index, free.len())?
        } else {
            Self::saddle(system, &free_index, free.len())?
        };
        Ok(Self {
            n_test,
            n_trial,
            free_index,
            free,
            b: system.b.clone(),
            system: system.clone(),
            kind,
        })
    }

    fn saddle(system: &SaddleSystem, free_index: &[Option<usize>], n_free: usize) -> Result<Kind> {
        let n_test = system.n_test;
        let n = n_test + n_free;
        let mut trips = Vec::new();
        for (g, d) in system.gram.iter().zip(&system.test_dofs) {
            for (i, &r) in d.iter().enumerate() {
                for (k, &c) in d.iter().enumerate() {
                    trips.push(Triplet::new(r, c, g[(i, k)]));
                }
            }
        }
        for (r, c, v) in system.b.iter() {
            if let Some(fc) = free_index[c] {
                trips.push(Triplet::new(r, n_test + fc, v));
                trips.push(Triplet::new(n_test + fc, r, v));
            }
        }
        let k = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
            .map_err(|e| solver_err("saddle", format!("matrix construction failed: {e:?}")))?;
        let lu = k
            .sp_lu()
            .map_err(|e| solver_err("saddle", format!("LU factorization failed: {e:?}")))?;
        Ok(Kind::Saddle(lu))
    }

    fn condensed(
        system: &SaddleSystem,
        free_index: &[Option<usize>],
        n_free: usize,
    ) -> Result<Kind> {
        let mut elements = Vec::with_capacity(system.gram.len());
        let mut trips = Vec::new();
        for (tri, (g, rows)) in system.gram.iter().zip(&system.test_dofs).enumerate() {
            let mut cols: Vec<usize> = rows
                .iter()
                .flat_map(|&r| system.b.row(r).0.iter().copied())
                .filter(|&c| free_index[c].is_some())
                .collect();
            cols.sort_unstable();
            cols.dedup();
            let mut b = DMatrix::zeros(rows.len(), cols.len());
            for (i, &r) in rows.iter().enumerate() {
                let (cs, vs) = system.b.row(r);
                for (&c, &v) in cs.iter().zip(vs) {
                    if let Ok(j) = cols.binary_search(&c) {
                        b[(i, j)] = v;
                    }
                }
            }
            let gm = DMatrix::from_fn(rows.len(), rows.len(), |i, k| g[(i, k)]);
            let chol = gm.cholesky().ok_or_else(|| {
                solver_err(
                    "error-representation",
                    format!("Gram block of element {tri} is not SPD"),
                )
            })?;
            let gib = chol.solve(&b);
            let s = b.transpose() * gib;
            for (a, &ca) in cols.iter().enumerate() {
                for (c, &cc) in cols.iter().enumerate() {
                    trips.push(Triplet::new(
                        free_index[ca].unwrap(),
                        free_index[cc].unwrap(),
                        s[(a, c)],
                    ));
                }
            }
            elements.push(CondensedElement {
                rows: rows.clone(),
                cols,
                chol,
                b,
            });
        }
        let s = SparseColMat::<usize, f64>::try_new_from_triplets(n_free, n_free, &trips).map_err(
            |e| {
                solver_err(
                    "trial",
                    format!("Schur complement construction failed: {e:?}"),
                )
            },
        )?;
        let schur = s
            .sp_cholesky(Side::Lower)
            .map_err(|e| solver_err("trial", format!("Schur complement is not SPD: {e:?}")))?;
        Ok(Kind::Condensed { schur, elements })
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Solves with load `f` and strongly imposed values `constraints` (same
    /// keys as at factorization time).
    pub fn solve(
        &self,
        f: &[f64],
        constraints: &std::collections::BTreeMap<usize, f64>,
    ) -> Result<Solution> {
        if f.len() != self.n_test {
            return Err(solver_err(
                "error-representation",
                "load vector length mismatch",
            ));
        }
        if constraints.len() != self.n_trial - self.free.len()
            || constraints
                .keys()
                .any(|&k| k >= self.n_trial || self.free_index[k].is_some())
        {
            return Err(solver_err(
                "trial",
                "constraint set differs from the factorized one",
            ));
        }
        let mut xc = vec![0.0; self.n_trial];
        for (&k, &v) in constraints {
            xc[k] = v;
        }
        // top right-hand side F − B_c x_c
        let bxc = self.b.mul_vec(&xc);
        let top: Vec<f64> = f.iter().zip(&bxc).map(|(a, b)| a - b).collect();

        let (mut e, mut xf) = self.raw_solve(&top, &vec![0.0; self.free.len()]);
        let mut refinements = 0;
        let mut diag = self.diagnostics(f, &top, &e, &xf);
        // iterative refinement on the full saddle residual
        while diag.residual > 1e-12 * (1.0 + diag.rhs_norm)
            && refinements < 3
            && diag.residual.is_finite()
        {
            let (r_top, r_bot) = self.residual(&top, &e, &xf);
            let (de, dx) = self.raw_solve(&r_top, &r_bot);
            for (a, d) in e.iter_mut().zip(&de) {
                *a -= d;
            }
            for (a, d) in xf.iter_mut().zip(&dx) {
                *a -= d;
            }
            refinements += 1;
            diag = self.diagnostics(f, &top, &e, &xf);
        }
        diag.refinements = refinements;
        if e.iter().any(|v| !v.is_finite()) {
            return Err(solver_err(
                "error-representation",
                "non-finite values (singular system)",
            ));
        }
        if xf.iter().any(|v| !v.is_finite()) {
            return Err(solver_err("trial", "non-finite values (singular system)"));
        }
        if !(diag.residual <= 1e-8 * (1.0 + diag.rhs_norm)) {
            let (r_top, r_bot) = self.residual(&top, &e, &xf);
            let block = if inf_norm(&r_top) >= inf_norm(&r_bot) {
                "error-representation"
            } else {
                "trial"
            };
            return Err(solver_err(
                block,
                format!(
                    "residual {:.3e} exceeds tolerance (rank deficient?)",
                    diag.residual
                ),
            ));
        }
        let mut x = xc;
        for (k, &j) in self.free.iter().enumerate() {
            x[j] = xf[k];
        }
        record(&diag);
        Ok(Solution {
            e,
            x,
            diagnostics: diag,
        })
    }

    /// Solves `[G B_f; B_fᵀ 0] [e; x] = [top; bot]`.
    fn raw_solve(&self, top: &[f64], bot: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n_test = self.n_test;
        match &self.kind {
            Kind::Saddle(lu) => {
                let n = n_test + self.free.len();
                let mut rhs =
                    Mat::<f64>::from_fn(
                        n,
                        1,
                        |i, _| if i < n_test { top[i] } else { bot[i - n_test] },
                    );
                lu.solve_in_place(rhs.as_mut());
                let z: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
                (z[..n_test].to_vec(), z[n_test..].to_vec())
            }
            Kind::Condensed { schur, elements } => {
                // S x = Bᵀ G⁻¹ top − bot, then e = G⁻¹ (top − B x)
                let nf = self.free.len();
                let mut rhs = Mat::<f64>::from_fn(nf, 1, |i, _| -bot[i]);
                for el in elements {
                    let g = DVector::from_iterator(el.rows.len(), el.rows.iter().map(|&r| top[r]));
                    let y = el.chol.solve(&g);
                    let c = el.b.transpose() * y;
                    for (a, &col) in el.cols.iter().enumerate() {
                        rhs[(self.free_index[col].unwrap(), 0)] += c[a];
                    }
                }
                schur.solve_in_place(rhs.as_mut());
                let xf: Vec<f64> = (0..nf).map(|i| rhs[(i, 0)]).collect();
                let mut e = vec![0.0; n_test];
                for el in elements {
                    let xl = DVector::from_iterator(
                        el.cols.len(),
                        el.cols.iter().map(|&c| xf[self.free_index[c].unwrap()]),
                    );
                    let g = DVector::from_iterator(el.rows.len(), el.rows.iter().map(|&r| top[r]));
                    let y = el.chol.solve(&(g - &el.b * xl));
                    for (k, &r) in el.rows.iter().enumerate() {
                        e[r] = y[k];
                    }
                }
                (e, xf)
            }
        }
    }

    fn residual(&self, top: &[f64], e: &[f64], xf: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut x = vec![0.0; self.n_trial];
        for (k, &j) in self.free.iter().enumerate() {
            x[j] = xf[k];
        }
        let ge = self.system.gram_mul(e);
        let bx = self.b.mul_vec(&x);
        let r_top: Vec<f64> = (0..self.n_test).map(|i| ge[i] + bx[i] - top[i]).collect();
        let bte = self.b.tr_mul_vec(e);
        let r_bot: Vec<f64> = self.free.iter().map(|&j| bte[j]).collect();
        (r_top, r_bot)
    }

    fn diagnostics(&self, f: &[f64], top: &[f64], e: &[f64], xf: &[f64]) -> Diagnostics {
        let (r_top, r_bot) = self.residual(top, e, xf);
        Diagnostics {
            residual: inf_norm(&r_top).max(inf_norm(&r_bot)),
            rhs_norm: inf_norm(top),
            orthogonality: inf_norm(&r_bot),
            load_norm: inf_norm(f),
            refinements: 0,
        }
    }
}

/// Factor and solve once.
pub fn solve(system: &SaddleSystem, opts: &SolveOptions) -> Result<Solution> {
    Factorization::new(system, opts)?.solve(&system.f, &system.constraints)
}
