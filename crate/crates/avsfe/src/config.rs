//! Run configuration (TOML or JSON) and its validation.

use std::path::{Path, PathBuf};

use avsfe_core::problems::{self, Mode, ProblemSpec};

use crate::adapt::AdaptOptions;
use crate::discretization::DiscOptions;
use crate::error::{Error, Result};
use crate::genalpha::GenAlphaOptions;
use crate::slices::{SliceConfig, SliceStrategy};
use crate::solve::SolveOptions;
use crate::spacetime::{DirichletMode, SpaceTimeOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    #[serde(alias = "space-time")]
    Spacetime,
    Genalpha,
    Slices,
    Converge,
    Adapt,
}

impl std::str::FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spacetime" | "space-time" => Ok(RunMode::Spacetime),
            "genalpha" => Ok(RunMode::Genalpha),
            "slices" => Ok(RunMode::Slices),
            "converge" => Ok(RunMode::Converge),
            "adapt" => Ok(RunMode::Adapt),
            _ => Err(Error::Config(format!(
                "mode: unknown value '{s}' (expected spacetime, genalpha, slices, converge or adapt)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: Option<String>,
    pub epsilon: Option<f64>,
    /// `"spacetime"` or `"spatial"`, for problems that have both variants.
    pub mode: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Cells per direction on the coarsest mesh.
    pub n: Option<usize>,
    /// Cells in the second direction, if different from `n`.
    pub ny: Option<usize>,
    /// Uniform levels (`converge` mode).
    pub levels: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscConfig {
    pub p_u: Option<usize>,
    pub p_q: Option<usize>,
    pub delta_p: Option<usize>,
    pub quad_order: Option<usize>,
    pub dirichlet: Option<DirichletMode>,
    pub condense: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptConfig {
    pub theta: Option<f64>,
    pub steps: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenAlphaConfig {
    pub rho_inf: Option<f64>,
    pub tau: Option<f64>,
    pub t_final: Option<f64>,
    /// Compute exact errors after every step.
    pub track_errors: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlicesConfig {
    pub boundaries: Option<Vec<f64>>,
    /// `"between"` or `"after"`.
    pub strategy: Option<String>,
    /// Adaptation steps per slice (`between`).
    pub steps: Option<usize>,
    /// Global refinement rounds (`after`).
    pub rounds: Option<usize>,
}

/// Configuration as read from disk; everything optional until validated.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<RunMode>,
    pub problem: Option<ProblemConfig>,
    pub mesh: Option<MeshConfig>,
    pub disc: Option<DiscConfig>,
    pub adapt: Option<AdaptConfig>,
    pub genalpha: Option<GenAlphaConfig>,
    pub slices: Option<SlicesConfig>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub mode: Option<RunMode>,
    pub levels: Option<usize>,
    pub theta: Option<f64>,
    pub rho_inf: Option<f64>,
    pub tau: Option<f64>,
    pub out: Option<PathBuf>,
}

/// A validated run.
#[derive(Clone, Debug)]
pub struct Plan {
    pub mode: RunMode,
    pub problem: ProblemSpec,
    pub nx: usize,
    pub ny: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub spacetime: SpaceTimeOptions,
    pub task: Task,
}

#[derive(Clone, Debug)]
pub enum Task {
    SpaceTime,
    GenAlpha {
        opts: GenAlphaOptions,
        t_final: f64,
        track_errors: bool,
    },
    Slices(SliceConfig),
    ConvergeSpaceTime {
        levels: usize,
    },
    ConvergeGenAlpha {
        levels: usize,
        opts: GenAlphaOptions,
        t_final: f64,
    },
    AdaptSpaceTime(AdaptOptions),
    AdaptGenAlpha {
        adapt: AdaptOptions,
        opts: GenAlphaOptions,
        t_final: f64,
    },
}

fn missing(field: &str) -> Error {
    Error::Config(format!("missing required field '{field}'"))
}

fn invalid(field: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("field '{field}': {why}"))
}

/// Problems that only exist in one mode.
fn native_mode(name: &str) -> Option<Mode> {
    match name {
        "eriksson_johnson" | "rotating_ring" | "shock" => Some(Mode::Spatial),
        "eriksson_johnson_1d" => Some(Mode::SpaceTime),
        _ => None,
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// JSON for `.json` files, TOML otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if json {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.mode {
            self.mode = Some(m);
        }
        if let Some(l) = o.levels {
            self.mesh.get_or_insert_with(Default::default).levels = Some(l);
        }
        if let Some(t) = o.theta {
            self.adapt.get_or_insert_with(Default::default).theta = Some(t);
        }
        if let Some(r) = o.rho_inf {
            self.genalpha.get_or_insert_with(Default::default).rho_inf = Some(r);
        }
        if let Some(t) = o.tau {
            self.genalpha.get_or_insert_with(Default::default).tau = Some(t);
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
    }

    /// Checks every field the selected mode needs, before any solve.
    pub fn validate(&self) -> Result<Plan> {
        let mode = self.mode.ok_or_else(|| missing("mode"))?;
        let pc = self.problem.as_ref().ok_or_else(|| missing("problem"))?;
        let name = pc.name.as_deref().ok_or_else(|| missing("problem.name"))?;
        let wanted = match mode {
            RunMode::Spacetime | RunMode::Slices => Some(Mode::SpaceTime),
            RunMode::Genalpha => Some(Mode::Spatial),
            RunMode::Converge | RunMode::Adapt => None,
        };
        let explicit = match pc.mode.as_deref() {
            None => None,
            Some("spacetime" | "space-time") => Some(Mode::SpaceTime),
            Some("spatial") => Some(Mode::Spatial),
            Some(other) => return Err(invalid("problem.mode", format!("unknown value '{other}'"))),
        };
        let pmode = wanted
            .or(explicit)
            .or(native_mode(name))
            .unwrap_or(Mode::SpaceTime);
        if let Some(native) = native_mode(name) {
            if native != pmode {
                return Err(invalid(
                    "problem.name",
                    format!("'{name}' has no {pmode:?} variant"),
                ));
            }
        }
        if explicit.is_some_and(|m| m != pmode) {
            return Err(invalid(
                "problem.mode",
                format!("conflicts with run mode {mode:?}"),
            ));
        }
        let problem =
            problems::by_name(name, pc.epsilon, pmode).map_err(|e| invalid("problem", e))?;

        let mesh = self.mesh.as_ref().ok_or_else(|| missing("mesh"))?;
        let nx = mesh.n.ok_or_else(|| missing("mesh.n"))?;
        if nx == 0 {
            return Err(invalid("mesh.n", "must be >= 1"));
        }
        let ny = mesh.ny.unwrap_or(nx);
        if ny == 0 {
            return Err(invalid("mesh.ny", "must be >= 1"));
        }

        let d = self.disc.as_ref().ok_or_else(|| missing("disc"))?;
        let p = d.p_u.ok_or_else(|| missing("disc.p_u"))?;
        if !(1..=3).contains(&p) {
            return Err(invalid("disc.p_u", "supported degrees are 1, 2 and 3"));
        }
        if let Some(pq) = d.p_q {
            if pq != p {
                return Err(invalid("disc.p_q", "the flux degree must equal disc.p_u"));
            }
        }
        let delta_p = d.delta_p.ok_or_else(|| missing("disc.delta_p"))?;
        if delta_p > 1 {
            return Err(invalid("disc.delta_p", "must be 0 or 1"));
        }
        let spacetime = SpaceTimeOptions {
            disc: DiscOptions {
                degree: p,
                delta_p,
                quad_order: d.quad_order,
            },
            dirichlet: d.dirichlet.unwrap_or_default(),
            solver: SolveOptions {
                condense: d.condense.unwrap_or(false),
            },
        };

        let genalpha = || -> Result<(GenAlphaOptions, f64, bool)> {
            let g = self.genalpha.as_ref().ok_or_else(|| missing("genalpha"))?;
            let rho = g.rho_inf.ok_or_else(|| missing("genalpha.rho_inf"))?;
            let tau = g.tau.ok_or_else(|| missing("genalpha.tau"))?;
            let t_final = g.t_final.unwrap_or(problem.t_final);
            let params = avsfe_core::genalpha::GenAlphaParams::new(rho, tau)
                .map_err(|e| invalid("genalpha", e))?;
            params
                .steps_to(t_final)
                .map_err(|e| invalid("genalpha.t_final", e))?;
            Ok((
                GenAlphaOptions {
                    disc: spacetime.disc,
                    rho_inf: rho,
                    tau,
                    dirichlet: spacetime.dirichlet,
                    solver: spacetime.solver,
                },
                t_final,
                g.track_errors.unwrap_or(true),
            ))
        };
        let adapt = || -> Result<AdaptOptions> {
            let a = self.adapt.as_ref().ok_or_else(|| missing("adapt"))?;
            let theta = a.theta.ok_or_else(|| missing("adapt.theta"))?;
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(invalid("adapt.theta", "must lie in (0, 1]"));
            }
            let steps = a.steps.ok_or_else(|| missing("adapt.steps"))?;
            if steps == 0 {
                return Err(invalid("adapt.steps", "must be >= 1"));
            }
            Ok(AdaptOptions {
                theta,
                max_steps: steps,
                tolerance: a.tolerance.unwrap_or(0.0),
            })
        };
        let levels = || -> Result<usize> {
            let l = mesh.levels.ok_or_else(|| missing("mesh.levels"))?;
            if l == 0 {
                return Err(invalid("mesh.levels", "must be >= 1"));
            }
            Ok(l)
        };

        let task = match (mode, pmode) {
            (RunMode::Spacetime, _) => Task::SpaceTime,
            (RunMode::Genalpha, _) => {
                let (opts, t_final, track_errors) = genalpha()?;
                Task::GenAlpha {
                    opts,
                    t_final,
                    track_errors,
                }
            }
            (RunMode::Converge, Mode::SpaceTime) => Task::ConvergeSpaceTime { levels: levels()? },
            (RunMode::Converge, Mode::Spatial) => {
                let (opts, t_final, _) = genalpha()?;
                Task::ConvergeGenAlpha {
                    levels: levels()?,
                    opts,
                    t_final,
                }
            }
            (RunMode::Adapt, Mode::SpaceTime) => Task::AdaptSpaceTime(adapt()?),
            (RunMode::Adapt, Mode::Spatial) => {
                let (opts, t_final, _) = genalpha()?;
                Task::AdaptGenAlpha {
                    adapt: adapt()?,
                    opts,
                    t_final,
                }
            }
            (RunMode::Slices, _) => {
                let s = self.slices.as_ref().ok_or_else(|| missing("slices"))?;
                let boundaries = s
                    .boundaries
                    .clone()
                    .ok_or_else(|| missing("slices.boundaries"))?;
                let strategy = match s
                    .strategy
                    .as_deref()
                    .ok_or_else(|| missing("slices.strategy"))?
                {
                    "between" => SliceStrategy::AdaptBetween {
                        steps: s.steps.ok_or_else(|| missing("slices.steps"))?,
                    },
                    "after" => SliceStrategy::AdaptAfter {
                        rounds: s.rounds.ok_or_else(|| missing("slices.rounds"))?,
                    },
                    other => {
                        return Err(invalid(
                            "slices.strategy",
                            format!("unknown value '{other}' (expected 'between' or 'after')"),
                        ))
                    }
                };
                let theta = self
                    .adapt
                    .as_ref()
                    .and_then(|a| a.theta)
                    .ok_or_else(|| missing("adapt.theta"))?;
                let cfg = SliceConfig {
                    boundaries,
                    nx,
                    nt: ny,
                    strategy,
                    theta,
                };
                cfg.validate(&problem)?;
                Task::Slices(cfg)
            }
        };
        let out = self.out.clone().ok_or_else(|| missing("out"))?;
        Ok(Plan {
            mode,
            problem,
            nx,
            ny,
            out,
            seed: self.seed.unwrap_or(0),
            spacetime,
            task,
        })
    }
}
