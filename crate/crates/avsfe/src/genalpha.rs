//! Generalized-α time marching on spatial meshes.

use std::collections::BTreeMap;
use std::sync::Arc;

use avsfe_core::forms::LocalState;
use avsfe_core::genalpha::GenAlphaParams;
use avsfe_core::mesh::{BoundaryTag, Mesh};
use avsfe_core::norms::{exact_errors, ExactErrors, IndicatorSet};
use avsfe_core::problems::{Mode, ProblemSpec};
use avsfe_core::space::Field;

use crate::assembly::{assemble, assemble_load, assemble_matrix, SaddleSystem};
use crate::discretization::{DiscOptions, Discretization};
use crate::error::{Error, Result};
use crate::solve::{Diagnostics, Factorization, SolveOptions};
use crate::spacetime::DirichletMode;
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenAlphaOptions {
    #[serde(default)]
    pub disc: DiscOptions,
    pub rho_inf: f64,
    pub tau: f64,
    #[serde(default)]
    pub dirichlet: DirichletMode,
    #[serde(default)]
    pub solver: SolveOptions,
}

/// `(uⁿ, qⁿ, ϑⁿ)` at `t_n`.
#[derive(Clone, Debug)]
pub struct GenAlphaState {
    pub t: f64,
    pub step: usize,
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    pub theta: Vec<f64>,
}

/// What an observer sees after each step (and after the initial-data solve,
/// with `step == 0`).
pub struct StepReport<'a> {
    pub step: usize,
    pub t: f64,
    pub state: &'a GenAlphaState,
    pub indicators: &'a IndicatorSet,
    pub diagnostics: Diagnostics,
    /// Errors against the exact solution, when requested and available.
    pub errors: Option<ExactErrors>,
}

pub struct GenAlphaSolver {
    pub spec: ProblemSpec,
    pub disc: Discretization,
    pub params: GenAlphaParams,
    dirichlet: DirichletMode,
    solver: SolveOptions,
    /// Spatial form with the `u_t` term left out, `n_test × n_trial`.
    b: CsrMatrix,
    /// `(ϑ, v)`, `n_test × n_u`.
    mass: CsrMatrix,
    step_system: SaddleSystem,
    step_factor: Factorization,
    boundary: BTreeMap<usize, [f64; 2]>,
}

impl GenAlphaSolver {
    /// Builds and factors the step operator. The convection field is taken
    /// as time independent, so one factorization serves every step.
    pub fn new(spec: &ProblemSpec, mesh: Arc<Mesh>, opts: &GenAlphaOptions) -> Result<Self> {
        if spec.mode != Mode::Spatial {
            return Err(Error::Config(
                "generalized-alpha needs a spatial problem".into(),
            ));
        }
        let params = GenAlphaParams::new(opts.rho_inf, opts.tau)?;
        let disc = Discretization::new(mesh.clone(), Mode::Spatial, &opts.disc)?;
        let boundary = match opts.dirichlet {
            DirichletMode::Weak => BTreeMap::new(),
            DirichletMode::Strong => {
                if spec.boundary_dt.is_none() {
                    return Err(Error::Config(format!(
                        "problem '{}' has no boundary time derivative for the initial rate",
                        spec.name
                    )));
                }
                disc.u_dofs_on(&[BoundaryTag::Inflow])
            }
        };
        let b = assemble(&disc, BTreeMap::new(), |tri| {
            Ok(disc.kernel.element_b_f(spec, &mesh, tri, 0.0)?)
        })?
        .b;
        let nu = disc.n_u();
        let nv = disc.kernel.layout().n_v;
        let mass = assemble_matrix(
            disc.n_test(),
            nu,
            (0..mesh.n_triangles()).map(|tri| {
                let rows = disc.test_dofs(tri)[..nv].to_vec();
                (
                    rows,
                    disc.u_space.element_dofs(tri),
                    disc.kernel.mass(&mesh.geometry(tri)),
                )
            }),
        );
        let n_loc = disc.kernel.layout();
        let zu = vec![0.0; n_loc.n_u];
        let zq = vec![0.0; n_loc.n_u * n_loc.flux_components];
        let zero = LocalState {
            u: &zu,
            q: &zq,
            theta: &zu,
        };
        let constraints: BTreeMap<usize, f64> = boundary.keys().map(|&k| (k, 0.0)).collect();
        let step_system = assemble(&disc, constraints, |tri| {
            Ok(disc
                .kernel
                .element_genalpha(spec, &mesh, tri, &params, 0.0, &zero)?)
        })?;
        let step_factor = Factorization::new(&step_system, &opts.solver)?;
        Ok(Self {
            spec: spec.clone(),
            disc,
            params,
            dirichlet: opts.dirichlet,
            solver: opts.solver,
            b,
            mass,
            step_system,
            step_factor,
            boundary,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.disc.mesh
    }

    /// Trial plus test dofs of one step system.
    pub fn dofs(&self) -> usize {
        self.disc.n_trial() + self.disc.n_test()
    }

    /// `ϑ⁰` on strongly constrained dofs: the time derivative of the data.
    fn initial_constraints(&self) -> BTreeMap<usize, f64> {
        match (&self.dirichlet, &self.spec.boundary_dt) {
            (DirichletMode::Strong, Some(dt)) => self
                .boundary
                .iter()
                .map(|(&k, &p)| (k, dt(p, 0.0)))
                .collect(),
            _ => BTreeMap::new(),
        }
    }

    /// `ϑⁿ⁺¹` on strongly constrained dofs, chosen so that the Taylor update
    /// reproduces the boundary data at `t_{n+1}` exactly.
    fn step_constraints(&self, state: &GenAlphaState, t1: f64) -> BTreeMap<usize, f64> {
        let (tau, gamma) = (self.params.tau, self.params.gamma);
        self.boundary
            .iter()
            .map(|(&k, &p)| {
                let target = (self.spec.inflow)(p, t1);
                let th = state.theta[k];
                (k, th + (target - state.u[k] - tau * th) / (tau * gamma))
            })
            .collect()
    }

    /// Interpolated `u⁰`.
    pub fn initial_u(&self) -> Vec<f64> {
        let init = self.spec.initial.clone();
        self.disc
            .u_space
            .interpolate(&self.disc.mesh, |x| [init(x, 0.0), 0.0])
            .into_coeffs()
    }

    /// Solves for `ϑ⁰` and `q⁰` given `u⁰`; the scalar Gram weight is the
    /// run's `ζ`.
    pub fn initial_data(&self) -> Result<(GenAlphaState, IndicatorSet, Diagnostics)> {
        let u0 = self.initial_u();
        let system = self.initial_system(&u0)?;
        let disc = &self.disc;
        let sol = Factorization::new(&system, &self.solver)?
            .solve(&system.f, &system.constraints)
            .map_err(|e| Error::Step {
                step: 0,
                source: Box::new(e),
            })?;
        let nu = disc.n_u();
        let state = GenAlphaState {
            t: 0.0,
            step: 0,
            theta: sol.x[..nu].to_vec(),
            q: sol.x[nu..].to_vec(),
            u: u0,
        };
        Ok((state, system.indicators(&sol.e), sol.diagnostics))
    }

    /// Saddle system for `(ϑ⁰, q⁰)` given `u⁰`.
    pub fn initial_system(&self, u0: &[f64]) -> Result<SaddleSystem> {
        let mesh = self.disc.mesh.clone();
        let disc = &self.disc;
        assemble(disc, self.initial_constraints(), |tri| {
            let local: Vec<f64> = disc
                .u_space
                .element_dofs(tri)
                .iter()
                .map(|&j| u0[j])
                .collect();
            Ok(disc.kernel.element_initial_data(
                &self.spec,
                &mesh,
                tri,
                &local,
                self.params.zeta,
            )?)
        })
    }

    /// The step saddle system with load and constraints for `state`.
    pub fn step_system(&self, state: &GenAlphaState) -> Result<SaddleSystem> {
        let mut system = self.step_system.clone();
        system.f = self.step_rhs(state)?;
        system.constraints = self.step_constraints(state, state.t + self.params.tau);
        Ok(system)
    }

    /// Right-hand side of the step system for `state`.
    pub fn step_rhs(&self, state: &GenAlphaState) -> Result<Vec<f64>> {
        let p = &self.params;
        let t_af = state.t + p.alpha_f * p.tau;
        let mesh = self.disc.mesh.clone();
        let mut rhs = assemble_load(&self.disc, |tri| {
            Ok(self
                .disc
                .kernel
                .element_load(&self.spec, &mesh, tri, t_af)?)
        })?;
        let c = p.tau * p.alpha_f * (p.gamma - 1.0);
        let mut x: Vec<f64> = state
            .theta
            .iter()
            .zip(&state.u)
            .map(|(th, u)| c * th - u)
            .collect();
        x.extend(state.q.iter().map(|q| -q));
        let bx = self.b.mul_vec(&x);
        let mt = self.mass.mul_vec(&state.theta);
        for ((r, a), m) in rhs.iter_mut().zip(&bx).zip(&mt) {
            *r = (*r + a + (p.alpha_m - 1.0) * m) / p.alpha_m;
        }
        Ok(rhs)
    }

    /// One step `t_n → t_n + τ`.
    pub fn step(
        &self,
        state: &GenAlphaState,
    ) -> Result<(GenAlphaState, IndicatorSet, Diagnostics)> {
        let p = &self.params;
        let n = state.step + 1;
        let tag = |e: Error| Error::Step {
            step: n,
            source: Box::new(e),
        };
        let t1 = state.t + p.tau;
        let rhs = self.step_rhs(state).map_err(tag)?;
        let sol = self
            .step_factor
            .solve(&rhs, &self.step_constraints(state, t1))
            .map_err(tag)?;
        let nu = self.disc.n_u();
        let theta1 = &sol.x[..nu];
        let u: Vec<f64> = (0..nu)
            .map(|i| {
                state.u[i] + p.tau * state.theta[i] + p.tau * p.gamma * (theta1[i] - state.theta[i])
            })
            .collect();
        let ratio = p.alpha_m / p.alpha_f;
        let q: Vec<f64> = state
            .q
            .iter()
            .zip(&sol.x[nu..])
            .map(|(q, d)| q + ratio * d)
            .collect();
        let next = GenAlphaState {
            t: t1,
            step: n,
            u,
            q,
            theta: theta1.to_vec(),
        };
        Ok((next, self.step_system.indicators(&sol.e), sol.diagnostics))
    }

    pub fn fields(&self, state: &GenAlphaState) -> Result<(Field, Field)> {
        Ok((
            Field::new(self.disc.u_space.clone(), state.u.clone())?,
            Field::new(self.disc.q_space.clone(), state.q.clone())?,
        ))
    }

    pub fn errors(&self, state: &GenAlphaState) -> Result<ExactErrors> {
        let (u, q) = self.fields(state)?;
        let order = 2 * self.disc.kernel.trial_degree() + 4;
        Ok(exact_errors(
            &self.spec,
            &self.disc.mesh,
            &u,
            &q,
            state.t,
            order,
        )?)
    }

    /// Initial data, then steps to `t_final`. The observer is called after
    /// the initial-data solve and after every step; errors are computed for
    /// it when `track_errors` is set and the problem has an exact solution.
    pub fn march(
        &self,
        t_final: f64,
        track_errors: bool,
        mut observer: impl FnMut(&StepReport<'_>),
    ) -> Result<GenAlphaState> {
        let steps = self.params.steps_to(t_final)?;
        let track = track_errors && self.spec.exact.is_some();
        let (mut state, ind, diag) = self.initial_data()?;
        let errs = if track {
            Some(self.errors(&state)?)
        } else {
            None
        };
        observer(&StepReport {
            step: 0,
            t: 0.0,
            state: &state,
            indicators: &ind,
            diagnostics: diag,
            errors: errs,
        });
        for _ in 0..steps {
            let (next, ind, diag) = self.step(&state)?;
            state = next;
            let errs = if track {
                Some(self.errors(&state)?)
            } else {
                None
            };
            observer(&StepReport {
                step: state.step,
                t: state.t,
                state: &state,
                indicators: &ind,
                diagnostics: diag,
                errors: errs,
            });
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use avsfe_core::problems;

    fn solver(spec: &ProblemSpec, n: usize, opts: &GenAlphaOptions) -> GenAlphaSolver {
        let mesh = Arc::new(Mesh::rectangle(spec.domain, n, n, spec.roles).unwrap());
        GenAlphaSolver::new(spec, mesh, opts).unwrap()
    }

    #[test]
    fn global_rhs_matches_element_assembly() {
        let spec = problems::temporal_smooth(Mode::Spatial).unwrap();
        let opts = GenAlphaOptions {
            disc: DiscOptions::default(),
            rho_inf: 0.4,
            tau: 0.1,
            dirichlet: DirichletMode::Weak,
            solver: SolveOptions::default(),
        };
        let s = solver(&spec, 3, &opts);
        let nu = s.disc.n_u();
        let nq = s.disc.n_trial() - nu;
        let f = |i: usize, k: f64| ((i as f64) * k).sin();
        let state = GenAlphaState {
            t: 0.3,
            step: 3,
            u: (0..nu).map(|i| f(i, 0.7)).collect(),
            q: (0..nq).map(|i| f(i, 1.3)).collect(),
            theta: (0..nu).map(|i| f(i, 2.1)).collect(),
        };
        let global = s.step_rhs(&state).unwrap();
        let mesh = s.disc.mesh.clone();
        let disc = &s.disc;
        let by_element = assemble(disc, BTreeMap::new(), |tri| {
            let ud = disc.u_space.element_dofs(tri);
            let qd = disc.q_space.element_dofs(tri);
            let u: Vec<f64> = ud.iter().map(|&j| state.u[j]).collect();
            let th: Vec<f64> = ud.iter().map(|&j| state.theta[j]).collect();
            let q: Vec<f64> = qd.iter().map(|&j| state.q[j]).collect();
            let ls = LocalState {
                u: &u,
                q: &q,
                theta: &th,
            };
            Ok(disc
                .kernel
                .element_genalpha(&spec, &mesh, tri, &s.params, state.t, &ls)?)
        })
        .unwrap();
        for (a, b) in global.iter().zip(&by_element.f) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let mut spec = problems::steady_linear(Mode::Spatial).unwrap();
        let z = avsfe_core::problems::scalar_fn(|_, _| 0.0);
        spec.source = z.clone();
        spec.inflow = z.clone();
        spec.initial = z;
        let opts = GenAlphaOptions {
            disc: DiscOptions::default(),
            rho_inf: 0.9,
            tau: 0.25,
            dirichlet: DirichletMode::Weak,
            solver: SolveOptions::default(),
        };
        let s = solver(&spec, 2, &opts);
        let end = s.march(1.0, false, |_| {}).unwrap();
        assert_eq!(end.step, 4);
        assert!(end
            .u
            .iter()
            .chain(&end.q)
            .chain(&end.theta)
            .all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn single_step_when_t_final_is_tau() {
        let spec = problems::temporal_smooth(Mode::Spatial).unwrap();
        let opts = GenAlphaOptions {
            disc: DiscOptions::default(),
            rho_inf: 0.0,
            tau: 0.5,
            dirichlet: DirichletMode::Weak,
            solver: SolveOptions::default(),
        };
        let s = solver(&spec, 2, &opts);
        let mut seen = Vec::new();
        s.march(0.5, false, |r| seen.push(r.step)).unwrap();
        assert_eq!(seen, vec![0, 1]);
    }
}
