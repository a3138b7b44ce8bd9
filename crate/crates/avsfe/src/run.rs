//! Batch drivers behind the command-line tool: execute a validated plan and
//! write CSV, JSON and VTK artifacts into the output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use avsfe_core::mesh::Mesh;
use avsfe_core::norms::IndicatorSet;
use avsfe_core::space::Field;

use crate::adapt::{
    adapt_genalpha, adapt_spacetime, converge_genalpha, converge_spacetime, uniform_meshes,
};
use crate::config::{Plan, RunMode, Task};
use crate::error::{Error, Result};
use crate::genalpha::GenAlphaSolver;
use crate::report::{steps_to_csv, write_json, write_text, ErrorReport, StepRecord};
use crate::slices::sweep;
use crate::spacetime::solve_spacetime;
use crate::vtk::{vertex_values, write_vtk, VtkData};

/// Contents of `summary.json`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Summary {
    pub mode: RunMode,
    pub problem: String,
    pub seed: u64,
    /// Trial plus error-representation dofs of the last (or largest) system.
    pub dofs: usize,
    pub trial_dofs: usize,
    pub test_dofs: usize,
    pub report: ErrorReport,
    pub rates: Vec<crate::report::Rates>,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
}

struct Out {
    dir: PathBuf,
    files: Vec<String>,
}

impl Out {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        write_text(&p, text)
    }

    fn fields(
        &mut self,
        name: &str,
        mesh: &Mesh,
        u: &Field,
        q: &Field,
        eta: Option<&IndicatorSet>,
    ) -> Result<()> {
        let mut data = vec![VtkData::Point("u", vertex_values(mesh, u, 0))];
        let names = ["q_x", "q_y"];
        for c in 0..q.space().components() {
            data.push(VtkData::Point(names[c], vertex_values(mesh, q, c)));
        }
        if let Some(eta) = eta {
            data.push(VtkData::Cell("eta", eta.eta.clone()));
        }
        let p = self.path(name);
        write_vtk(&p, mesh, name, &data)
    }

    fn mesh(&mut self, name: &str, mesh: &Mesh, eta: &IndicatorSet) -> Result<()> {
        let p = self.path(name);
        write_vtk(&p, mesh, name, &[VtkData::Cell("eta", eta.eta.clone())])
    }
}

fn base_mesh(plan: &Plan) -> Result<Arc<Mesh>> {
    let s = &plan.problem;
    Ok(Arc::new(Mesh::rectangle(
        s.domain, plan.nx, plan.ny, s.roles,
    )?))
}

/// Runs the plan and writes its artifacts, including `summary.json`.
pub fn execute(plan: &Plan) -> Result<Summary> {
    let mut out = Out::new(&plan.out)?;
    let spec = &plan.problem;
    let mut report = ErrorReport::default();
    let (dofs, trial, test);
    match &plan.task {
        Task::SpaceTime => {
            let sol = solve_spacetime(spec, base_mesh(plan)?, &plan.spacetime)?;
            report = converge_report_single(spec, &sol)?;
            out.fields(
                "solution.vtk",
                &sol.disc.mesh,
                &sol.u,
                &sol.q,
                Some(&sol.indicators),
            )?;
            (dofs, trial, test) = (sol.dofs(), sol.disc.n_trial(), sol.disc.n_test());
        }
        Task::ConvergeSpaceTime { levels } => {
            let meshes = uniform_meshes(spec, plan.nx, *levels)?;
            report = converge_spacetime(spec, &meshes, &plan.spacetime)?;
            let last = report.levels.last().unwrap();
            (dofs, trial) = (last.dofs, last.trial_dofs);
            test = dofs - trial;
        }
        Task::ConvergeGenAlpha {
            levels,
            opts,
            t_final,
        } => {
            let meshes = uniform_meshes(spec, plan.nx, *levels)?;
            report = converge_genalpha(spec, &meshes, opts, *t_final)?;
            let last = report.levels.last().unwrap();
            (dofs, trial) = (last.dofs, last.trial_dofs);
            test = dofs - trial;
        }
        Task::GenAlpha {
            opts,
            t_final,
            track_errors,
        } => {
            let solver = GenAlphaSolver::new(spec, base_mesh(plan)?, opts)?;
            let mut rows = Vec::new();
            let mut last_eta = IndicatorSet::default();
            let state = solver.march(*t_final, *track_errors, |r| {
                if r.step > 0 {
                    rows.push(StepRecord {
                        step: r.step,
                        t: r.t,
                        l2_u: r.errors.map(|e| e.l2_u),
                        energy_estimate: r.indicators.total(),
                    });
                    last_eta = r.indicators.clone();
                }
            })?;
            out.text("steps.csv", &steps_to_csv(&rows)?)?;
            let (u, q) = solver.fields(&state)?;
            out.fields("final.vtk", solver.mesh(), &u, &q, Some(&last_eta))?;
            report.push(crate::report::LevelRecord {
                level: 0,
                dofs: solver.dofs(),
                trial_dofs: solver.disc.n_trial(),
                h_max: solver.mesh().h_max(),
                errors: match spec.exact {
                    Some(_) => Some(solver.errors(&state)?.into()),
                    None => None,
                },
                energy_estimate: last_eta.total(),
            });
            (dofs, trial, test) = (solver.dofs(), solver.disc.n_trial(), solver.disc.n_test());
        }
        Task::AdaptSpaceTime(a) => {
            let run = adapt_spacetime(spec, base_mesh(plan)?, &plan.spacetime, a)?;
            for (i, (m, eta)) in run.meshes.iter().zip(&run.indicators).enumerate() {
                out.mesh(&format!("mesh_{i:03}.vtk"), m, eta)?;
            }
            let s = &run.last;
            out.fields("final.vtk", &s.disc.mesh, &s.u, &s.q, Some(&s.indicators))?;
            report = run.report;
            (dofs, trial, test) = (s.dofs(), s.disc.n_trial(), s.disc.n_test());
        }
        Task::AdaptGenAlpha {
            adapt,
            opts,
            t_final,
        } => {
            let run = adapt_genalpha(spec, base_mesh(plan)?, opts, *t_final, adapt)?;
            for (i, (m, eta)) in run.meshes.iter().zip(&run.indicators).enumerate() {
                out.mesh(&format!("mesh_{i:03}.vtk"), m, eta)?;
            }
            let last = run.report.levels.last().unwrap();
            (dofs, trial) = (last.dofs, last.trial_dofs);
            test = dofs - trial;
            report = run.report;
        }
        Task::Slices(cfg) => {
            let res = sweep(spec, cfg, &plan.spacetime)?;
            for (k, s) in res.slices.iter().enumerate() {
                let sol = &s.solution;
                out.fields(
                    &format!("slice_{k:02}.vtk"),
                    &sol.disc.mesh,
                    &sol.u,
                    &sol.q,
                    Some(&sol.indicators),
                )?;
            }
            dofs = res.max_dofs();
            let big = res.slices.iter().max_by_key(|s| s.solution.dofs()).unwrap();
            trial = big.solution.disc.n_trial();
            test = big.solution.disc.n_test();
            report = res.report;
        }
    }
    out.text("report.csv", &report.to_csv()?)?;
    let mut summary = Summary {
        mode: plan.mode,
        problem: spec.name.clone(),
        seed: plan.seed,
        dofs,
        trial_dofs: trial,
        test_dofs: test,
        rates: report.rates(),
        report,
        artifacts: Vec::new(),
    };
    let json_path = out.path("summary.json");
    summary.artifacts = out.files.clone();
    write_json(&json_path, &summary)?;
    Ok(summary)
}

fn converge_report_single(
    spec: &avsfe_core::ProblemSpec,
    sol: &crate::spacetime::SpaceTimeSolution,
) -> Result<ErrorReport> {
    let mut r = ErrorReport::default();
    let errors = match spec.exact {
        Some(_) => Some(
            avsfe_core::norms::exact_errors(
                spec,
                &sol.disc.mesh,
                &sol.u,
                &sol.q,
                0.0,
                crate::adapt::error_quad_order(sol.disc.kernel.trial_degree()),
            )?
            .into(),
        ),
        None => None,
    };
    r.push(crate::report::LevelRecord {
        level: 0,
        dofs: sol.dofs(),
        trial_dofs: sol.disc.n_trial(),
        h_max: sol.disc.mesh.h_max(),
        errors,
        energy_estimate: sol.indicators.total(),
    });
    Ok(r)
}
