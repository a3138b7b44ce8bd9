//! Single-slab space-time solves on `(x, t)` meshes.

use std::collections::BTreeMap;
use std::sync::Arc;

use avsfe_core::mesh::{BoundaryTag, Mesh};
use avsfe_core::norms::IndicatorSet;
use avsfe_core::problems::{Mode, ProblemSpec};
use avsfe_core::space::Field;

use crate::assembly::{assemble, SaddleSystem};
use crate::discretization::{DiscOptions, Discretization};
use crate::error::{Error, Result};
use crate::solve::{solve, Diagnostics, SolveOptions};

/// How inflow data enter the system. The initial condition is always strong.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirichletMode {
    #[default]
    Weak,
    Strong,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpaceTimeOptions {
    #[serde(default)]
    pub disc: DiscOptions,
    #[serde(default)]
    pub dirichlet: DirichletMode,
    #[serde(default)]
    pub solver: SolveOptions,
}

/// Assembles the space-time saddle system; `u` dofs on initial-time edges
/// take `u₀` at their nodes.
pub fn assemble_spacetime(
    spec: &ProblemSpec,
    disc: &Discretization,
    dirichlet: DirichletMode,
) -> Result<SaddleSystem> {
    if spec.mode != Mode::SpaceTime || disc.mode != Mode::SpaceTime {
        return Err(Error::Config(
            "space-time solve needs a space-time problem and discretization".into(),
        ));
    }
    let mut constraints = BTreeMap::new();
    for (dof, p) in disc.u_dofs_on(&[BoundaryTag::InitialTime]) {
        let (x, t) = spec.split(p, 0.0);
        constraints.insert(dof, (spec.initial)(x, t));
    }
    if dirichlet == DirichletMode::Strong {
        for (dof, p) in disc.u_dofs_on(&[BoundaryTag::Inflow]) {
            let (x, t) = spec.split(p, 0.0);
            constraints
                .entry(dof)
                .or_insert_with(|| (spec.inflow)(x, t));
        }
    }
    let mesh = disc.mesh.clone();
    assemble(disc, constraints, |tri| {
        Ok(disc.kernel.element_b_f(spec, &mesh, tri, 0.0)?)
    })
}

pub struct SpaceTimeSolution {
    pub disc: Discretization,
    pub system: SaddleSystem,
    pub u: Field,
    pub q: Field,
    /// Error representation, test-dof vector.
    pub e: Vec<f64>,
    pub indicators: IndicatorSet,
    pub diagnostics: Diagnostics,
}

impl SpaceTimeSolution {
    /// Trial plus test dofs.
    pub fn dofs(&self) -> usize {
        self.disc.n_trial() + self.disc.n_test()
    }
}

pub fn solve_spacetime(
    spec: &ProblemSpec,
    mesh: Arc<Mesh>,
    opts: &SpaceTimeOptions,
) -> Result<SpaceTimeSolution> {
    let disc = Discretization::new(mesh, Mode::SpaceTime, &opts.disc)?;
    let system = assemble_spacetime(spec, &disc, opts.dirichlet)?;
    let sol = solve(&system, &opts.solver)?;
    let (u, q) = disc.trial_fields(&sol.x)?;
    let indicators = system.indicators(&sol.e);
    Ok(SpaceTimeSolution {
        u,
        q,
        indicators,
        e: sol.e,
        diagnostics: sol.diagnostics,
        system,
        disc,
    })
}
