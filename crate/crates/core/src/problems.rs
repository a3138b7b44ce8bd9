//! Problem definitions and the verification catalogue.
//!
//! All data functions take a spatial point and a time. In space-time mode the
//! mesh coordinates are `(x, t)`; [`ProblemSpec::split`] turns such a mesh
//! point into the spatial point `[x, 0]` and the time `t`, and only the first
//! component of `b` is used.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::mesh::{BoundaryRoles, BoundaryTag};

pub type ScalarFn = Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync>;

pub fn scalar_fn(f: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

pub fn vector_fn(f: impl Fn([f64; 2], f64) -> [f64; 2] + Send + Sync + 'static) -> VectorFn {
    Arc::new(f)
}

fn constant_vector(b: [f64; 2]) -> VectorFn {
    vector_fn(move |_, _| b)
}

fn zero() -> ScalarFn {
    scalar_fn(|_, _| 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// One space dimension plus time on a 2D `(x, t)` mesh.
    SpaceTime,
    /// Two space dimensions; time is handled by the generalized-α driver.
    Spatial,
}

/// Exact solution with the derivatives needed for source synthesis and
/// error norms. In space-time mode only the first gradient entry is used.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarFn,
    pub grad: VectorFn,
    pub laplacian: ScalarFn,
    pub dt: ScalarFn,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub mode: Mode,
    /// Diffusion `ε` (`D = εI`).
    pub epsilon: f64,
    pub convection: VectorFn,
    pub div_convection: ScalarFn,
    pub source: ScalarFn,
    /// Dirichlet data on inflow-tagged edges.
    pub inflow: ScalarFn,
    /// `u₀`, imposed strongly on initial-time edges (space-time) or used as the
    /// starting state (generalized-α).
    pub initial: ScalarFn,
    /// Neumann data `g` on outflow-tagged edges.
    pub neumann: Option<ScalarFn>,
    /// `∂u_in/∂t`, needed when boundary values are imposed strongly in time marching.
    pub boundary_dt: Option<ScalarFn>,
    pub exact: Option<ExactSolution>,
    /// Spatial box (spatial mode) or `[[x0, x1], [t0, T]]` (space-time).
    pub domain: [[f64; 2]; 2],
    pub t_final: f64,
    pub roles: BoundaryRoles,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("mode", &self.mode)
            .field("epsilon", &self.epsilon)
            .field("domain", &self.domain)
            .field("t_final", &self.t_final)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

/// Parameters of the Eriksson-Johnson solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErikssonJohnsonParams {
    pub epsilon: f64,
    pub l: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub r: f64,
    pub s: f64,
}

impl ErikssonJohnsonParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(invalid!(
                "Eriksson-Johnson needs epsilon > 0 (got {epsilon})"
            ));
        }
        let l = 2.0;
        let disc = 1.0 - 4.0 * epsilon * l;
        if disc < 0.0 {
            return Err(invalid!(
                "Eriksson-Johnson exponents are complex for epsilon = {epsilon}"
            ));
        }
        let d = math::sqrt(disc);
        let w = math::sqrt(1.0 + 4.0 * PI * PI * epsilon * epsilon);
        Ok(Self {
            epsilon,
            l,
            lambda1: (-1.0 + d) / (-2.0 * epsilon),
            lambda2: (-1.0 - d) / (-2.0 * epsilon),
            r: (1.0 + w) / (2.0 * epsilon),
            s: (1.0 - w) / (2.0 * epsilon),
        })
    }
}

impl ProblemSpec {
    /// Builds a problem from an exact solution: `f` is synthesized, inflow data
    /// and `∂u_in/∂t` are traces of the solution, `u₀ = u(·, t0)`.
    #[allow(clippy::too_many_arguments)]
    pub fn manufactured(
        name: &str,
        mode: Mode,
        epsilon: f64,
        convection: VectorFn,
        div_convection: ScalarFn,
        exact: ExactSolution,
        domain: [[f64; 2]; 2],
        t_final: f64,
        roles: BoundaryRoles,
    ) -> Result<Self> {
        let t0 = match mode {
            Mode::SpaceTime => domain[1][0],
            Mode::Spatial => 0.0,
        };
        let u0 = exact.u.clone();
        let mut spec = ProblemSpec {
            name: name.to_string(),
            mode,
            epsilon,
            convection,
            div_convection,
            source: zero(),
            inflow: exact.u.clone(),
            initial: scalar_fn(move |x, _| u0(x, t0)),
            neumann: None,
            boundary_dt: Some(exact.dt.clone()),
            exact: Some(exact),
            domain,
            t_final,
            roles,
        };
        spec.validate()?;
        let ex = spec.exact.clone().unwrap();
        let b = spec.convection.clone();
        spec.source = scalar_fn(move |x, t| source_from(&ex, &b, epsilon, mode, x, t));
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(invalid!(
                "epsilon must be finite and >= 0 (got {})",
                self.epsilon
            ));
        }
        for (k, r) in self.domain.iter().enumerate() {
            if !(r[1] > r[0]) {
                return Err(invalid!("degenerate domain interval {k}: {:?}", r));
            }
        }
        if !(self.t_final > 0.0) {
            return Err(invalid!("t_final must be > 0 (got {})", self.t_final));
        }
        Ok(())
    }

    /// Maps a mesh point to `(spatial point, time)`.
    #[inline]
    pub fn split(&self, p: [f64; 2], t: f64) -> ([f64; 2], f64) {
        match self.mode {
            Mode::SpaceTime => ([p[0], 0.0], p[1]),
            Mode::Spatial => (p, t),
        }
    }

    /// Convection as seen by the spatial operators (first component only in space-time).
    #[inline]
    pub fn b(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let b = (self.convection)(x, t);
        match self.mode {
            Mode::SpaceTime => [b[0], 0.0],
            Mode::Spatial => b,
        }
    }

    pub fn exact(&self) -> Result<&ExactSolution> {
        self.exact.as_ref().ok_or_else(|| {
            Error::MissingData(alloc::format!(
                "problem '{}' has no exact solution",
                self.name
            ))
        })
    }

    /// `∂u/∂t − εΔu + b·∇u` of the exact solution.
    pub fn manufactured_source(&self, x: [f64; 2], t: f64) -> Result<f64> {
        let ex = self.exact()?;
        Ok(source_from(
            ex,
            &self.convection,
            self.epsilon,
            self.mode,
            x,
            t,
        ))
    }

    /// PDE residual of the exact solution against the stored source.
    pub fn residual(&self, x: [f64; 2], t: f64) -> Result<f64> {
        Ok(self.manufactured_source(x, t)? - (self.source)(x, t))
    }

    /// Whether an edge tag carries data that this problem must supply.
    pub fn check_tag(&self, tag: BoundaryTag) -> Result<()> {
        match tag {
            BoundaryTag::Outflow if self.neumann.is_none() => {
                Err(Error::MissingData(alloc::format!(
                    "problem '{}' has outflow edges but no Neumann data",
                    self.name
                )))
            }
            BoundaryTag::InitialTime | BoundaryTag::FinalTime if self.mode == Mode::Spatial => Err(
                invalid!("time-boundary tag {} on a spatial mesh", tag.name()),
            ),
            _ => Ok(()),
        }
    }
}

fn source_from(
    ex: &ExactSolution,
    b: &VectorFn,
    epsilon: f64,
    mode: Mode,
    x: [f64; 2],
    t: f64,
) -> f64 {
    let g = (ex.grad)(x, t);
    let mut bb = b(x, t);
    if mode == Mode::SpaceTime {
        bb[1] = 0.0;
    }
    (ex.dt)(x, t) - epsilon * (ex.laplacian)(x, t) + bb[0] * g[0] + bb[1] * g[1]
}

/// Eriksson-Johnson in two space dimensions on `(−1, 0) × (−0.5, 0.5)`,
/// `t ∈ (0, 1)`, `b = (1, 0)`, Dirichlet data on the whole boundary.
pub fn eriksson_johnson(epsilon: f64) -> Result<ProblemSpec> {
    let p = ErikssonJohnsonParams::new(epsilon)?;
    let ex = ej_exact(p, true);
    ProblemSpec::manufactured(
        "eriksson_johnson",
        Mode::Spatial,
        epsilon,
        constant_vector([1.0, 0.0]),
        zero(),
        ex,
        [[-1.0, 0.0], [-0.5, 0.5]],
        1.0,
        BoundaryRoles::dirichlet(),
    )
}

/// One-dimensional analog on `x ∈ (−1, 0)`, `t ∈ (0, 1)`: the `cos(πy)` factor
/// is dropped, `b = 1`.
pub fn eriksson_johnson_1d(epsilon: f64) -> Result<ProblemSpec> {
    let p = ErikssonJohnsonParams::new(epsilon)?;
    let ex = ej_exact(p, false);
    ProblemSpec::manufactured(
        "eriksson_johnson_1d",
        Mode::SpaceTime,
        epsilon,
        constant_vector([1.0, 0.0]),
        zero(),
        ex,
        [[-1.0, 0.0], [0.0, 1.0]],
        1.0,
        BoundaryRoles::space_time(BoundaryTag::Inflow, BoundaryTag::Inflow),
    )
}

fn ej_exact(p: ErikssonJohnsonParams, with_y: bool) -> ExactSolution {
    let ErikssonJohnsonParams {
        l,
        lambda1: l1,
        lambda2: l2,
        r,
        s,
        ..
    } = p;
    let den = math::exp(-s) - math::exp(-r);
    let cy = move |y: f64| if with_y { math::cos(PI * y) } else { 1.0 };
    let sy = move |y: f64| if with_y { -PI * math::sin(PI * y) } else { 0.0 };
    let yy = if with_y { -PI * PI } else { 0.0 };
    ExactSolution {
        u: scalar_fn(move |x, t| {
            math::exp(l * t) * (math::exp(l1 * x[0]) - math::exp(l2 * x[0]))
                + cy(x[1]) * (math::exp(s * x[0]) - math::exp(r * x[0])) / den
        }),
        grad: vector_fn(move |x, t| {
            let steady = (math::exp(s * x[0]) - math::exp(r * x[0])) / den;
            [
                math::exp(l * t) * (l1 * math::exp(l1 * x[0]) - l2 * math::exp(l2 * x[0]))
                    + cy(x[1]) * (s * math::exp(s * x[0]) - r * math::exp(r * x[0])) / den,
                sy(x[1]) * steady,
            ]
        }),
        laplacian: scalar_fn(move |x, t| {
            let steady = (math::exp(s * x[0]) - math::exp(r * x[0])) / den;
            let steady_xx = (s * s * math::exp(s * x[0]) - r * r * math::exp(r * x[0])) / den;
            math::exp(l * t) * (l1 * l1 * math::exp(l1 * x[0]) - l2 * l2 * math::exp(l2 * x[0]))
                + cy(x[1]) * (steady_xx + yy * steady)
        }),
        dt: scalar_fn(move |x, t| {
            l * math::exp(l * t) * (math::exp(l1 * x[0]) - math::exp(l2 * x[0]))
        }),
    }
}

/// Pure convection of a steep ring on the unit square, `b = (−y, x)`, `ε = 0`.
pub fn rotating_ring(m: f64) -> Result<ProblemSpec> {
    if !(m > 0.0) {
        return Err(invalid!("ring steepness must be > 0 (got {m})"));
    }
    let arg = move |x: [f64; 2]| {
        let r = math::hypot(x[0], x[1]);
        (r, m * (0.15 - math::abs(0.5 - r)))
    };
    // derivatives of U(r) = 1 + tanh(a(r)), a' = M sign(0.5 − r)
    let radial = move |x: [f64; 2]| {
        let (r, a) = arg(x);
        let th = math::tanh(a);
        let sech2 = 1.0 - th * th;
        let da = if r < 0.5 { m } else { -m };
        (r, 1.0 + th, sech2 * da, -2.0 * th * sech2 * da * da)
    };
    let ex = ExactSolution {
        u: scalar_fn(move |x, t| 0.5 * t * t * radial(x).1),
        grad: vector_fn(move |x, t| {
            let (r, _, d1, _) = radial(x);
            if r == 0.0 {
                return [0.0, 0.0];
            }
            let c = 0.5 * t * t * d1 / r;
            [c * x[0], c * x[1]]
        }),
        laplacian: scalar_fn(move |x, t| {
            let (r, _, d1, d2) = radial(x);
            if r == 0.0 {
                return 0.0;
            }
            0.5 * t * t * (d2 + d1 / r)
        }),
        dt: scalar_fn(move |x, t| t * radial(x).1),
    };
    ProblemSpec::manufactured(
        "rotating_ring",
        Mode::Spatial,
        0.0,
        vector_fn(|x, _| [-x[1], x[0]]),
        zero(),
        ex,
        [[0.0, 1.0], [0.0, 1.0]],
        1.0,
        BoundaryRoles::dirichlet(),
    )
}

/// Two-shock problem on `(−1, 1)²`, `T = 1.35`. Boundary data are zero; no
/// exact solution is known.
pub fn shock_problem() -> ProblemSpec {
    let epsilon = 1e-3;
    ProblemSpec {
        name: "shock".to_string(),
        mode: Mode::Spatial,
        epsilon,
        convection: vector_fn(|x, _| [-x[0] + 2.0 * x[1], 0.0]),
        div_convection: scalar_fn(|_, _| -1.0),
        source: scalar_fn(move |x, _| -2.0 * x[0] * epsilon + x[0] * (1.0 - x[1] * x[1])),
        inflow: zero(),
        initial: zero(),
        neumann: None,
        boundary_dt: Some(zero()),
        exact: None,
        domain: [[-1.0, 1.0], [-1.0, 1.0]],
        t_final: 1.35,
        roles: BoundaryRoles::dirichlet(),
    }
}

/// `u = t·g(x)` with `g(x) = x` (`smooth = false`) or `g(x) = sin(πx/2)·e^{y}`
/// (`smooth = true`, spatial mode only; in space-time the profile is `sin(πx/2)`).
/// `ε = 0.1`, `b = (1, 0)` on the unit box.
pub fn product_tx(mode: Mode, smooth: bool) -> Result<ProblemSpec> {
    let k = PI / 2.0;
    let ey = move |x: [f64; 2]| {
        if mode == Mode::Spatial {
            math::exp(x[1])
        } else {
            1.0
        }
    };
    let dy = if mode == Mode::Spatial { 1.0 } else { 0.0 };
    let ex = if smooth {
        ExactSolution {
            u: scalar_fn(move |x, t| t * math::sin(k * x[0]) * ey(x)),
            grad: vector_fn(move |x, t| {
                [
                    t * k * math::cos(k * x[0]) * ey(x),
                    dy * t * math::sin(k * x[0]) * ey(x),
                ]
            }),
            laplacian: scalar_fn(move |x, t| t * (dy - k * k) * math::sin(k * x[0]) * ey(x)),
            dt: scalar_fn(move |x, _| math::sin(k * x[0]) * ey(x)),
        }
    } else {
        ExactSolution {
            u: scalar_fn(|x, t| t * x[0]),
            grad: vector_fn(|_, t| [t, 0.0]),
            laplacian: zero(),
            dt: scalar_fn(|x, _| x[0]),
        }
    };
    let name = if smooth {
        "product_smooth"
    } else {
        "product_tx"
    };
    manufactured_on_unit_box(name, mode, 0.1, [1.0, 0.0], ex)
}

/// Spatially linear solution with a non-polynomial time profile,
/// `u = cos(2t)(1 + x − y/2)`, `ε = 0.1`, `b = (1, 0.5)`.
pub fn temporal_smooth(mode: Mode) -> Result<ProblemSpec> {
    let ex = ExactSolution {
        u: scalar_fn(|x, t| math::cos(2.0 * t) * (1.0 + x[0] - 0.5 * x[1])),
        grad: vector_fn(|_, t| [math::cos(2.0 * t), -0.5 * math::cos(2.0 * t)]),
        laplacian: zero(),
        dt: scalar_fn(|x, t| -2.0 * math::sin(2.0 * t) * (1.0 + x[0] - 0.5 * x[1])),
    };
    manufactured_on_unit_box("temporal_smooth", mode, 0.1, [1.0, 0.5], ex)
}

/// Polynomial in time only: `u = t` (`power = 1`) or `u = t²/2` (`power = 2`).
pub fn time_polynomial(mode: Mode, power: u32) -> Result<ProblemSpec> {
    let ex = match power {
        1 => ExactSolution {
            u: scalar_fn(|_, t| t),
            grad: constant_vector([0.0, 0.0]),
            laplacian: zero(),
            dt: scalar_fn(|_, _| 1.0),
        },
        2 => ExactSolution {
            u: scalar_fn(|_, t| 0.5 * t * t),
            grad: constant_vector([0.0, 0.0]),
            laplacian: zero(),
            dt: scalar_fn(|_, t| t),
        },
        _ => {
            return Err(invalid!(
                "time_polynomial supports power 1 or 2 (got {power})"
            ))
        }
    };
    manufactured_on_unit_box("time_polynomial", mode, 0.1, [1.0, 0.5], ex)
}

/// Steady linear solution `u = 1 + x − y`, `ε = 0.1`, `b = (1, 0)`.
pub fn steady_linear(mode: Mode) -> Result<ProblemSpec> {
    let ex = ExactSolution {
        u: scalar_fn(|x, _| 1.0 + x[0] - x[1]),
        grad: constant_vector([1.0, -1.0]),
        laplacian: zero(),
        dt: zero(),
    };
    let ex = match mode {
        Mode::Spatial => ex,
        Mode::SpaceTime => ExactSolution {
            u: scalar_fn(|x, _| 1.0 + x[0]),
            grad: constant_vector([1.0, 0.0]),
            ..ex
        },
    };
    manufactured_on_unit_box("steady_linear", mode, 0.1, [1.0, 0.0], ex)
}

fn manufactured_on_unit_box(
    name: &str,
    mode: Mode,
    epsilon: f64,
    b: [f64; 2],
    ex: ExactSolution,
) -> Result<ProblemSpec> {
    let roles = match mode {
        Mode::Spatial => BoundaryRoles::dirichlet(),
        Mode::SpaceTime => BoundaryRoles::space_time(BoundaryTag::Inflow, BoundaryTag::Inflow),
    };
    ProblemSpec::manufactured(
        name,
        mode,
        epsilon,
        constant_vector(b),
        zero(),
        ex,
        [[0.0, 1.0], [0.0, 1.0]],
        1.0,
        roles,
    )
}

/// Catalogue lookup by name. `epsilon` overrides the default where the
/// problem has one; `mode` selects the variant of the generic test problems.
pub fn by_name(name: &str, epsilon: Option<f64>, mode: Mode) -> Result<ProblemSpec> {
    match name {
        "eriksson_johnson" => eriksson_johnson(epsilon.unwrap_or(0.1)),
        "eriksson_johnson_1d" => eriksson_johnson_1d(epsilon.unwrap_or(0.1)),
        "rotating_ring" => rotating_ring(500.0),
        "shock" => Ok(shock_problem()),
        "product_tx" => product_tx(mode, false),
        "product_smooth" => product_tx(mode, true),
        "temporal_smooth" => temporal_smooth(mode),
        "steady_linear" => steady_linear(mode),
        _ => Err(invalid!("unknown problem '{name}'")),
    }
}

pub const CATALOGUE: &[&str] = &[
    "eriksson_johnson",
    "eriksson_johnson_1d",
    "rotating_ring",
    "shock",
    "product_tx",
    "product_smooth",
    "temporal_smooth",
    "steady_linear",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn ej_parameters() {
        let p = ErikssonJohnsonParams::new(0.1).unwrap();
        assert!((p.lambda1 - 2.763932).abs() < 1e-6);
        assert!((p.lambda2 - 7.236068).abs() < 1e-6);
        // six-decimal values; unrounded 10.9050491 and -0.9050491
        assert!((p.r - 10.905048).abs() < 2e-6);
        assert!((p.s + 0.905048).abs() < 2e-6);
        for lam in [p.lambda1, p.lambda2] {
            assert!((0.1 * lam * lam - lam + p.l).abs() < 1e-10);
        }
        for z in [p.r, p.s] {
            assert!((0.1 * z * z - z - 0.1 * PI * PI).abs() < 1e-10);
        }
        assert!(ErikssonJohnsonParams::new(0.0).is_err());
    }

    #[test]
    fn simple_sources() {
        let spec = time_polynomial(Mode::Spatial, 1).unwrap();
        assert!((spec.manufactured_source([0.3, 0.2], 0.7).unwrap() - 1.0).abs() < 1e-15);

        // u = x², b = (1, 0): f = −2ε + 2x
        let eps = 0.3;
        let ex = ExactSolution {
            u: scalar_fn(|x, _| x[0] * x[0]),
            grad: vector_fn(|x, _| [2.0 * x[0], 0.0]),
            laplacian: scalar_fn(|_, _| 2.0),
            dt: zero(),
        };
        let spec = manufactured_on_unit_box("x2", Mode::Spatial, eps, [1.0, 0.0], ex).unwrap();
        assert!(
            (spec.manufactured_source([0.4, 0.1], 0.0).unwrap() - (-2.0 * eps + 0.8)).abs() < 1e-14
        );
    }

    #[test]
    fn shock_source() {
        let s = shock_problem();
        assert_eq!(s.epsilon, 1e-3);
        for y in [-1.0, -0.3, 0.0, 0.8] {
            assert_eq!((s.source)([0.0, y], 0.0), 0.0);
        }
        assert!(((s.source)([1.0, 0.0], 0.0) - (1.0 - 2e-3)).abs() < 1e-15);
        assert!(s.manufactured_source([0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn ring_values() {
        let s = rotating_ring(500.0).unwrap();
        let ex = s.exact().unwrap();
        assert_eq!((ex.u)([0.3, 0.4], 0.0), 0.0);
        let v = (ex.u)([0.3, 0.4], 1.0);
        assert!((v - 1.0).abs() < 1e-12, "{v}");
        // b is tangential so f = u_t
        for x in [[0.2, 0.7], [0.45, 0.1], [0.9, 0.9]] {
            assert!(rel_close((s.source)(x, 0.6), (ex.dt)(x, 0.6), 1e-12));
        }
    }

    /// Finite-difference check of the hand-coded derivatives, independent of
    /// the synthesized source.
    fn fd_residual(spec: &ProblemSpec, x: [f64; 2], t: f64) -> f64 {
        let ex = spec.exact().unwrap();
        let u = |x: [f64; 2], t: f64| (ex.u)(x, t);
        let h = 1e-4;
        let ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
        let ux = (u([x[0] + h, x[1]], t) - u([x[0] - h, x[1]], t)) / (2.0 * h);
        let uxx = (u([x[0] + h, x[1]], t) - 2.0 * u(x, t) + u([x[0] - h, x[1]], t)) / (h * h);
        let (uy, uyy) = if spec.mode == Mode::Spatial {
            (
                (u([x[0], x[1] + h], t) - u([x[0], x[1] - h], t)) / (2.0 * h),
                (u([x[0], x[1] + h], t) - 2.0 * u(x, t) + u([x[0], x[1] - h], t)) / (h * h),
            )
        } else {
            (0.0, 0.0)
        };
        let b = spec.b(x, t);
        ut - spec.epsilon * (uxx + uyy) + b[0] * ux + b[1] * uy - (spec.source)(x, t)
    }

    #[test]
    fn catalogue_residuals_vanish() {
        let mut seed = 12345u64;
        let mut rnd = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for name in CATALOGUE {
            for mode in [Mode::Spatial, Mode::SpaceTime] {
                let spec = by_name(name, None, mode).unwrap();
                if spec.exact.is_none() || spec.mode != mode {
                    continue;
                }
                for _ in 0..100 {
                    let d = spec.domain;
                    let px = d[0][0] + (d[0][1] - d[0][0]) * rnd();
                    let py = d[1][0] + (d[1][1] - d[1][0]) * rnd();
                    let (x, t) = spec.split([px, py], rnd());
                    if *name == "rotating_ring" && (math::hypot(x[0], x[1]) - 0.5).abs() < 1e-3 {
                        continue;
                    }
                    let scale = 1.0 + spec.source.as_ref()(x, t).abs();
                    assert!(spec.residual(x, t).unwrap().abs() <= 1e-8 * scale);
                    // ring derivatives are too steep for the difference check
                    if *name != "rotating_ring" {
                        let r = fd_residual(&spec, x, t);
                        assert!(r.abs() < 1e-4 * scale, "{name}: fd residual {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn ej_transient_part_residual() {
        let p = ErikssonJohnsonParams::new(0.1).unwrap();
        for (x, t) in [(-0.3, 0.2), (-0.9, 0.95), (-0.05, 0.5)] {
            for lam in [p.lambda1, p.lambda2] {
                let e = math::exp(p.l * t) * math::exp(lam * x);
                // u_t − εu_xx + u_x for u = e^{lt}e^{λx}
                let res = p.l * e - 0.1 * lam * lam * e + lam * e;
                assert!((res - 2.0 * p.l * e).abs() < 1e-8 * (1.0 + e.abs()));
            }
        }
    }

    #[test]
    fn one_d_variant_drops_y() {
        let s = eriksson_johnson_1d(0.1).unwrap();
        let ex = s.exact().unwrap();
        let ([x, y], t) = s.split([-0.4, 0.3], 123.0);
        assert_eq!((y, t), (0.0, 0.3));
        let s2 = eriksson_johnson(0.1).unwrap();
        let ex2 = s2.exact().unwrap();
        assert!(((ex.u)([x, 0.0], t) - (ex2.u)([x, 0.0], t)).abs() < 1e-14);
        assert!(rotating_ring(0.0).is_err());
        assert!(by_name("nope", None, Mode::Spatial).is_err());
    }
}
