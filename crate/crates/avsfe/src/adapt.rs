//! Uniform convergence studies and adaptive refinement loops.

use std::sync::Arc;

use avsfe_core::marking::dorfler_mark;
use avsfe_core::mesh::Mesh;
use avsfe_core::norms::{exact_errors, IndicatorSet};
use avsfe_core::problems::ProblemSpec;

use crate::error::Result;
use crate::genalpha::{GenAlphaOptions, GenAlphaSolver, GenAlphaState};
use crate::report::{ErrorReport, LevelRecord};
use crate::spacetime::{solve_spacetime, SpaceTimeOptions, SpaceTimeSolution};

/// Quadrature order for error norms at trial degree `p`.
pub fn error_quad_order(p: usize) -> usize {
    2 * p + 4
}

/// Meshes of the problem domain with `n0·2^l` cells per direction.
pub fn uniform_meshes(spec: &ProblemSpec, n0: usize, levels: usize) -> Result<Vec<Arc<Mesh>>> {
    (0..levels)
        .map(|l| {
            Ok(Arc::new(Mesh::rectangle(
                spec.domain,
                n0 << l,
                n0 << l,
                spec.roles,
            )?))
        })
        .collect()
}

fn spacetime_record(
    spec: &ProblemSpec,
    level: usize,
    sol: &SpaceTimeSolution,
) -> Result<LevelRecord> {
    let mesh = &sol.disc.mesh;
    let errors = match spec.exact {
        Some(_) => Some(
            exact_errors(
                spec,
                mesh,
                &sol.u,
                &sol.q,
                0.0,
                error_quad_order(sol.disc.kernel.trial_degree()),
            )?
            .into(),
        ),
        None => None,
    };
    Ok(LevelRecord {
        level,
        dofs: sol.dofs(),
        trial_dofs: sol.disc.n_trial(),
        h_max: mesh.h_max(),
        errors,
        energy_estimate: sol.indicators.total(),
    })
}

/// Space-time solves on a sequence of meshes.
pub fn converge_spacetime(
    spec: &ProblemSpec,
    meshes: &[Arc<Mesh>],
    opts: &SpaceTimeOptions,
) -> Result<ErrorReport> {
    let mut report = ErrorReport::default();
    for (level, mesh) in meshes.iter().enumerate() {
        let sol = solve_spacetime(spec, mesh.clone(), opts)?;
        report.push(spacetime_record(spec, level, &sol)?);
    }
    Ok(report)
}

/// Final-time errors of generalized-α runs on a sequence of meshes; the
/// energy estimate is the one of the last step.
pub fn converge_genalpha(
    spec: &ProblemSpec,
    meshes: &[Arc<Mesh>],
    opts: &GenAlphaOptions,
    t_final: f64,
) -> Result<ErrorReport> {
    let mut report = ErrorReport::default();
    for (level, mesh) in meshes.iter().enumerate() {
        let solver = GenAlphaSolver::new(spec, mesh.clone(), opts)?;
        let mut last = 0.0;
        let state = solver.march(t_final, false, |r| last = r.indicators.total())?;
        report.push(genalpha_record(&solver, level, &state, last)?);
    }
    Ok(report)
}

fn genalpha_record(
    solver: &GenAlphaSolver,
    level: usize,
    state: &GenAlphaState,
    energy: f64,
) -> Result<LevelRecord> {
    let errors = match solver.spec.exact {
        Some(_) => Some(solver.errors(state)?.into()),
        None => None,
    };
    Ok(LevelRecord {
        level,
        dofs: solver.dofs(),
        trial_dofs: solver.disc.n_trial(),
        h_max: solver.mesh().h_max(),
        errors,
        energy_estimate: energy,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdaptOptions {
    /// Dörfler fraction.
    pub theta: f64,
    /// Number of solves.
    pub max_steps: usize,
    /// Stop once the total estimate falls below this value.
    pub tolerance: f64,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self {
            theta: 0.5,
            max_steps: 10,
            tolerance: 0.0,
        }
    }
}

/// History of an adaptive run. `marked[i]` holds the elements of
/// `meshes[i]` that were bisected to obtain `meshes[i + 1]`.
pub struct AdaptiveRun<S> {
    pub report: ErrorReport,
    pub meshes: Vec<Arc<Mesh>>,
    pub indicators: Vec<IndicatorSet>,
    pub marked: Vec<Vec<usize>>,
    pub last: S,
}

/// Solve, estimate, mark, bisect, repeated; no refinement follows the last
/// solve.
fn adaptive_loop<S>(
    mesh: Arc<Mesh>,
    opts: &AdaptOptions,
    mut solve: impl FnMut(usize, Arc<Mesh>) -> Result<(S, LevelRecord, IndicatorSet)>,
) -> Result<AdaptiveRun<S>> {
    if opts.max_steps == 0 {
        return Err(crate::Error::Config(
            "adaptive loop needs max_steps >= 1".into(),
        ));
    }
    let mut report = ErrorReport::default();
    let mut meshes = vec![mesh];
    let mut indicators = Vec::new();
    let mut marked = Vec::new();
    let mut step = 0;
    loop {
        let mesh = meshes.last().unwrap().clone();
        let (s, rec, ind) = solve(step, mesh.clone())?;
        report.push(rec);
        let done = step + 1 == opts.max_steps || ind.total() < opts.tolerance;
        if done {
            indicators.push(ind);
            return Ok(AdaptiveRun {
                report,
                meshes,
                indicators,
                marked,
                last: s,
            });
        }
        let m = dorfler_mark(&ind.eta, opts.theta)?;
        indicators.push(ind);
        if m.is_empty() {
            return Ok(AdaptiveRun {
                report,
                meshes,
                indicators,
                marked,
                last: s,
            });
        }
        meshes.push(Arc::new(mesh.bisect(&m)?));
        marked.push(m);
        step += 1;
    }
}

pub fn adapt_spacetime(
    spec: &ProblemSpec,
    mesh: Arc<Mesh>,
    st: &SpaceTimeOptions,
    opts: &AdaptOptions,
) -> Result<AdaptiveRun<SpaceTimeSolution>> {
    adaptive_loop(mesh, opts, |level, mesh| {
        let sol = solve_spacetime(spec, mesh, st)?;
        let rec = spacetime_record(spec, level, &sol)?;
        let ind = sol.indicators.clone();
        Ok((sol, rec, ind))
    })
}

/// Adaptive generalized-α: each round marches the whole interval on a fixed
/// mesh and marks with the time-accumulated indicators `(Σ_n η_{K,n}²)^{1/2}`
/// of the steps (the initial-data solve is not included).
pub fn adapt_genalpha(
    spec: &ProblemSpec,
    mesh: Arc<Mesh>,
    ga: &GenAlphaOptions,
    t_final: f64,
    opts: &AdaptOptions,
) -> Result<AdaptiveRun<GenAlphaState>> {
    adaptive_loop(mesh, opts, |level, mesh| {
        let solver = GenAlphaSolver::new(spec, mesh.clone(), ga)?;
        let mut acc = vec![0.0; mesh.n_triangles()];
        let mut last = 0.0;
        let state = solver.march(t_final, false, |r| {
            if r.step > 0 {
                for (a, e) in acc.iter_mut().zip(&r.indicators.eta) {
                    *a += e * e;
                }
                last = r.indicators.total();
            }
        })?;
        let rec = genalpha_record(&solver, level, &state, last)?;
        let ind = IndicatorSet {
            eta: acc.into_iter().map(f64::sqrt).collect(),
        };
        Ok((state, rec, ind))
    })
}
