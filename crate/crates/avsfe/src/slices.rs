//! Sweeping a space-time domain slab by slab. Each slice receives its initial
//! condition from the final-time trace of the previous one.

use std::sync::Arc;

use avsfe_core::marking::dorfler_mark;
use avsfe_core::mesh::{BoundaryTag, Mesh};
use avsfe_core::problems::{scalar_fn, Mode, ProblemSpec};
use avsfe_core::space::Field;

use crate::adapt::{adapt_spacetime, AdaptOptions};
use crate::error::{Error, Result};
use crate::report::{ErrorReport, Errors, LevelRecord};
use crate::spacetime::{assemble_spacetime, solve_spacetime, SpaceTimeOptions, SpaceTimeSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SliceStrategy {
    /// Adapt each slice to completion before moving to the next.
    AdaptBetween { steps: usize },
    /// Sweep all slices, then refine every slice from its own indicators and
    /// sweep again, `rounds` times.
    AdaptAfter { rounds: usize },
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SliceConfig {
    /// `t₀ < t₁ < … < t_K`, matching the problem's time interval.
    pub boundaries: Vec<f64>,
    /// Cells per direction of each slice's initial mesh.
    pub nx: usize,
    pub nt: usize,
    pub strategy: SliceStrategy,
    pub theta: f64,
}

impl SliceConfig {
    pub fn validate(&self, spec: &ProblemSpec) -> Result<()> {
        let b = &self.boundaries;
        if b.len() < 2 {
            return Err(Error::Config(
                "slices.boundaries needs at least two times".into(),
            ));
        }
        if b.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(
                "slices.boundaries must be strictly increasing".into(),
            ));
        }
        let [t0, t1] = spec.domain[1];
        let tol = 1e-12 * (1.0 + t1.abs());
        if (b[0] - t0).abs() > tol || (b[b.len() - 1] - t1).abs() > tol {
            return Err(Error::Config(format!(
                "slices.boundaries must span the problem interval [{t0}, {t1}]"
            )));
        }
        if self.nx == 0 || self.nt == 0 {
            return Err(Error::Config("slices.nx and slices.nt must be >= 1".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config("slices.theta must lie in (0, 1]".into()));
        }
        if spec.mode != Mode::SpaceTime {
            return Err(Error::Config("slices need a space-time problem".into()));
        }
        Ok(())
    }
}

/// `u_h` on the final-time edges of a slice, evaluated by spatial coordinate.
#[derive(Clone)]
pub struct TopTrace {
    mesh: Arc<Mesh>,
    u: Field,
    /// `(x at lower-index vertex, x at higher-index vertex, triangle, edge)`,
    /// sorted by the left end.
    edges: Vec<(f64, f64, usize, usize)>,
    extent: [f64; 2],
    time: f64,
}

impl TopTrace {
    pub fn new(mesh: Arc<Mesh>, u: Field) -> Result<Self> {
        let mut edges = Vec::new();
        let mut time = f64::NAN;
        for (k, e) in mesh.edges().iter().enumerate() {
            if e.tag != BoundaryTag::FinalTime {
                continue;
            }
            let [a, b] = e.vertices;
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            time = pa[1];
            edges.push((
                pa[0],
                pb[0],
                e.triangles[0].expect("boundary edge has a triangle"),
                k,
            ));
        }
        if edges.is_empty() {
            return Err(Error::Config("slice mesh has no final-time edges".into()));
        }
        edges.sort_by(|x, y| x.0.min(x.1).total_cmp(&y.0.min(y.1)));
        let lo = edges
            .iter()
            .map(|e| e.0.min(e.1))
            .fold(f64::INFINITY, f64::min);
        let hi = edges
            .iter()
            .map(|e| e.0.max(e.1))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            mesh,
            u,
            edges,
            extent: [lo, hi],
            time,
        })
    }

    pub fn extent(&self) -> [f64; 2] {
        self.extent
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self
            .edges
            .partition_point(|e| e.0.max(e.1) < x)
            .min(self.edges.len() - 1);
        let (xa, xb, tri, edge) = self.edges[i];
        let s = ((x - xa) / (xb - xa)).clamp(0.0, 1.0);
        self.u
            .trace_eval(&self.mesh, tri, edge, &[s])
            .expect("edge belongs to its triangle")[0][0]
    }
}

/// Problem restricted to `[t_a, t_b]`, with `u₀` taken from `trace` if given.
pub fn slice_problem(
    spec: &ProblemSpec,
    t_a: f64,
    t_b: f64,
    trace: Option<&TopTrace>,
) -> Result<ProblemSpec> {
    let mut s = spec.clone();
    s.domain[1] = [t_a, t_b];
    if let Some(tr) = trace {
        let [x0, x1] = spec.domain[0];
        let tol = 1e-12 * (1.0 + x1.abs().max(x0.abs()));
        if (tr.extent[0] - x0).abs() > tol || (tr.extent[1] - x1).abs() > tol {
            return Err(Error::Config(format!(
                "trace extent {:?} does not match the slice interval [{x0}, {x1}]",
                tr.extent
            )));
        }
        if (tr.time - t_a).abs() > 1e-12 * (1.0 + t_a.abs()) {
            return Err(Error::Config(format!(
                "trace at t = {} cannot start a slice at t = {t_a}",
                tr.time
            )));
        }
        let tr = tr.clone();
        s.initial = scalar_fn(move |x, _| tr.eval(x[0]));
    }
    Ok(s)
}

/// Largest mismatch between a trace and the initial values a slice imposes
/// from it, at the slice's initial-time dofs.
pub fn gluing_jump(
    spec: &ProblemSpec,
    mesh: Arc<Mesh>,
    opts: &SpaceTimeOptions,
    trace: &TopTrace,
) -> Result<f64> {
    let disc = crate::discretization::Discretization::new(mesh, Mode::SpaceTime, &opts.disc)?;
    let sys = assemble_spacetime(spec, &disc, opts.dirichlet)?;
    let bottom = disc.u_dofs_on(&[BoundaryTag::InitialTime]);
    Ok(bottom
        .iter()
        .map(|(d, p)| (sys.constraints[d] - trace.eval(p[0])).abs())
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SliceEvent {
    Solve { slice: usize, pass: usize },
    Transfer { from: usize, to: usize },
}

pub struct SliceResult {
    pub solution: SpaceTimeSolution,
    pub report: ErrorReport,
}

pub struct SweepResult {
    pub slices: Vec<SliceResult>,
    /// Combined report: row `j` joins pass `j` of every slice (max dofs,
    /// root-sum-square errors and estimates).
    pub report: ErrorReport,
    pub log: Vec<SliceEvent>,
    /// Per interface, the largest mismatch right after transfer.
    pub jumps: Vec<f64>,
}

impl SweepResult {
    pub fn max_dofs(&self) -> usize {
        self.slices
            .iter()
            .map(|s| s.solution.dofs())
            .max()
            .unwrap_or(0)
    }

    /// Final space-time `L²` error over all slices.
    pub fn global_l2(&self) -> Option<f64> {
        self.report.levels.last()?.errors.map(|e| e.l2_u)
    }
}

fn initial_mesh(spec: &ProblemSpec, cfg: &SliceConfig) -> Result<Arc<Mesh>> {
    Ok(Arc::new(Mesh::rectangle(
        spec.domain,
        cfg.nx,
        cfg.nt,
        spec.roles,
    )?))
}

fn combine(reports: &[ErrorReport]) -> ErrorReport {
    let n = reports.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut out = ErrorReport::default();
    for j in 0..n {
        let rows: Vec<&LevelRecord> = reports
            .iter()
            .map(|r| &r.levels[j.min(r.len() - 1)])
            .collect();
        let rss = |f: &dyn Fn(&LevelRecord) -> Option<f64>| -> Option<f64> {
            let mut s = 0.0;
            for r in &rows {
                s += f(r)?.powi(2);
            }
            Some(s.sqrt())
        };
        let errors = match (
            rss(&|r| r.errors.map(|e| e.l2_u)),
            rss(&|r| r.errors.map(|e| e.h1_u)),
            rss(&|r| r.errors.map(|e| e.l2_q)),
            rss(&|r| r.errors.map(|e| e.hdiv_q)),
        ) {
            (Some(l2_u), Some(h1_u), Some(l2_q), Some(hdiv_q)) => Some(Errors {
                l2_u,
                h1_u,
                l2_q,
                hdiv_q,
            }),
            _ => None,
        };
        out.push(LevelRecord {
            level: j,
            dofs: rows.iter().map(|r| r.dofs).max().unwrap(),
            trial_dofs: rows.iter().map(|r| r.trial_dofs).max().unwrap(),
            h_max: rows.iter().map(|r| r.h_max).fold(0.0, f64::max),
            errors,
            energy_estimate: rss(&|r| Some(r.energy_estimate)).unwrap(),
        });
    }
    out
}

/// Solves all slices in time order according to the configured strategy.
pub fn sweep(
    spec: &ProblemSpec,
    cfg: &SliceConfig,
    opts: &SpaceTimeOptions,
) -> Result<SweepResult> {
    cfg.validate(spec)?;
    match cfg.strategy {
        SliceStrategy::AdaptBetween { steps } => sweep_between(spec, cfg, opts, steps),
        SliceStrategy::AdaptAfter { rounds } => sweep_after(spec, cfg, opts, rounds),
    }
}

fn sweep_between(
    spec: &ProblemSpec,
    cfg: &SliceConfig,
    opts: &SpaceTimeOptions,
    steps: usize,
) -> Result<SweepResult> {
    let mut slices = Vec::new();
    let mut log = Vec::new();
    let mut jumps = Vec::new();
    let mut trace: Option<TopTrace> = None;
    let adapt = AdaptOptions {
        theta: cfg.theta,
        max_steps: steps + 1,
        tolerance: 0.0,
    };
    for (k, w) in cfg.boundaries.windows(2).enumerate() {
        let s = slice_problem(spec, w[0], w[1], trace.as_ref())?;
        let mesh = initial_mesh(&s, cfg)?;
        if let Some(tr) = &trace {
            log.push(SliceEvent::Transfer { from: k - 1, to: k });
            jumps.push(gluing_jump(&s, mesh.clone(), opts, tr)?);
        }
        let run = adapt_spacetime(&s, mesh, opts, &adapt)?;
        log.extend((0..run.report.len()).map(|pass| SliceEvent::Solve { slice: k, pass }));
        trace = Some(TopTrace::new(
            run.last.disc.mesh.clone(),
            run.last.u.clone(),
        )?);
        slices.push(SliceResult {
            solution: run.last,
            report: run.report,
        });
    }
    let report = combine(&slices.iter().map(|s| s.report.clone()).collect::<Vec<_>>());
    Ok(SweepResult {
        slices,
        report,
        log,
        jumps,
    })
}

fn sweep_after(
    spec: &ProblemSpec,
    cfg: &SliceConfig,
    opts: &SpaceTimeOptions,
    rounds: usize,
) -> Result<SweepResult> {
    let n_slices = cfg.boundaries.len() - 1;
    let mut meshes: Vec<Arc<Mesh>> = Vec::with_capacity(n_slices);
    for w in cfg.boundaries.windows(2) {
        meshes.push(initial_mesh(&slice_problem(spec, w[0], w[1], None)?, cfg)?);
    }
    let mut reports = vec![ErrorReport::default(); n_slices];
    let mut log = Vec::new();
    let mut jumps = vec![0.0f64; n_slices - 1];
    let mut last: Vec<SpaceTimeSolution> = Vec::new();
    for pass in 0..=rounds {
        if pass > 0 {
            for (k, sol) in last.iter().enumerate() {
                let marked = dorfler_mark(&sol.indicators.eta, cfg.theta)?;
                if !marked.is_empty() {
                    meshes[k] = Arc::new(meshes[k].bisect(&marked)?);
                }
            }
        }
        let mut trace: Option<TopTrace> = None;
        let mut current = Vec::with_capacity(n_slices);
        for (k, w) in cfg.boundaries.windows(2).enumerate() {
            let s = slice_problem(spec, w[0], w[1], trace.as_ref())?;
            if let Some(tr) = &trace {
                log.push(SliceEvent::Transfer { from: k - 1, to: k });
                jumps[k - 1] = jumps[k - 1].max(gluing_jump(&s, meshes[k].clone(), opts, tr)?);
            }
            let sol = solve_spacetime(&s, meshes[k].clone(), opts)?;
            log.push(SliceEvent::Solve { slice: k, pass });
            reports[k].push(slice_record(&s, pass, &sol)?);
            trace = Some(TopTrace::new(sol.disc.mesh.clone(), sol.u.clone())?);
            current.push(sol);
        }
        last = current;
    }
    let report = combine(&reports);
    let slices = last
        .into_iter()
        .zip(reports)
        .map(|(solution, report)| SliceResult { solution, report })
        .collect();
    Ok(SweepResult {
        slices,
        report,
        log,
        jumps,
    })
}

fn slice_record(spec: &ProblemSpec, level: usize, sol: &SpaceTimeSolution) -> Result<LevelRecord> {
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
    Ok(LevelRecord {
        level,
        dofs: sol.dofs(),
        trial_dofs: sol.disc.n_trial(),
        h_max: sol.disc.mesh.h_max(),
        errors,
        energy_estimate: sol.indicators.total(),
    })
}
