//! Element matrices of the AVS-FE bilinear form, the load functional and the
//! test-space inner product.
//!
//! Per element, with spatial normal `n`:
//!
//! ```text
//! B((u,q);(v,w)) = ∫ −ε u ∇·w − q·w + u_t v + q·∇v − (b·∇v) u − (∇·b) u v
//!                + ∮ (b·n) u v + ε (w·n) u − (q·n) v
//! F(v,w)         = ∫ f v + ∮_out g v − ∮_in u_in [(b·n) v + ε (w·n)]
//! ```
//!
//! On inflow edges the two `u` edge terms are replaced by data, on outflow
//! edges the flux edge term is. `u_t` is present in space-time mode only.
//!
//! Local trial ordering is `[u | q_0 | q_1]`, local test ordering `[v | w_0 | w_1]`,
//! each block of one scalar basis size; the flux has one component in
//! space-time mode and two in spatial mode.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::basis::{edge_point, BasisTable, LagrangeBasis};
use crate::dense::DenseMatrix;
use crate::error::{invalid, Result};
use crate::genalpha::GenAlphaParams;
use crate::mesh::{BoundaryTag, ElementGeometry, Mesh};
use crate::problems::{Mode, ProblemSpec};
use crate::quadrature::{edge_quadrature, triangle_quadrature, EdgeRule, QuadratureRule};

/// Sizes of the local trial and test blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalLayout {
    pub n_u: usize,
    pub n_v: usize,
    pub flux_components: usize,
}

impl LocalLayout {
    pub fn n_trial(&self) -> usize {
        self.n_u * (1 + self.flux_components)
    }

    pub fn n_test(&self) -> usize {
        self.n_v * (1 + self.flux_components)
    }

    pub fn u_range(&self) -> Range<usize> {
        0..self.n_u
    }

    pub fn q_range(&self) -> Range<usize> {
        self.n_u..self.n_trial()
    }

    pub fn v_range(&self) -> Range<usize> {
        0..self.n_v
    }

    pub fn w_range(&self) -> Range<usize> {
        self.n_v..self.n_test()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestComponent {
    V,
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialComponent {
    U,
    Q,
}

/// Local matrices of one element.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementMatrices {
    pub layout: LocalLayout,
    /// `n_test × n_trial`, entry `(i, j) = B(φ_j; ψ_i)`.
    pub b: DenseMatrix,
    /// `n_test`, entry `i = F(ψ_i)`.
    pub f: Vec<f64>,
    /// `n_test × n_test` test-space Gram matrix.
    pub gram: DenseMatrix,
}

impl ElementMatrices {
    pub fn block(&self, test: TestComponent, trial: TrialComponent) -> DenseMatrix {
        let rows = match test {
            TestComponent::V => self.layout.v_range(),
            TestComponent::W => self.layout.w_range(),
        };
        let cols = match trial {
            TrialComponent::U => self.layout.u_range(),
            TrialComponent::Q => self.layout.q_range(),
        };
        self.b.block(rows, cols)
    }

    pub fn load(&self, test: TestComponent) -> &[f64] {
        match test {
            TestComponent::V => &self.f[self.layout.v_range()],
            TestComponent::W => &self.f[self.layout.w_range()],
        }
    }
}

/// Weights of the four terms of the test inner product
/// `a h²∇r·∇v + c r v + d h²(∇·z)(∇·w) + e z·w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramWeights {
    pub scalar_grad: f64,
    pub scalar_mass: f64,
    pub vector_div: f64,
    pub vector_mass: f64,
}

impl GramWeights {
    pub const UNIT: GramWeights = GramWeights {
        scalar_grad: 1.0,
        scalar_mass: 1.0,
        vector_div: 1.0,
        vector_mass: 1.0,
    };

    /// `ζ (r, v)_V + (r, v)_{L²}` on the scalar part, unit weights on the vector part.
    pub fn time_step(zeta: f64) -> Self {
        GramWeights {
            scalar_grad: zeta,
            scalar_mass: zeta + 1.0,
            vector_div: 1.0,
            vector_mass: 1.0,
        }
    }
}

/// Reference tabulations shared by all elements of a discretization.
#[derive(Clone, Debug)]
pub struct ElementKernel {
    mode: Mode,
    layout: LocalLayout,
    trial_degree: usize,
    test_degree: usize,
    rule: QuadratureRule,
    edge_rule: EdgeRule,
    trial: BasisTable,
    test: BasisTable,
    trial_edge: [BasisTable; 3],
    test_edge: [BasisTable; 3],
}

impl ElementKernel {
    /// Trial degree `p` for `u` and `q`, test degree `p + Δp`. The default
    /// quadrature order is `2(p + Δp) + 2`.
    pub fn new(
        mode: Mode,
        trial_degree: usize,
        delta_p: usize,
        quad_order: Option<usize>,
    ) -> Result<Self> {
        if delta_p > 1 {
            return Err(invalid!(
                "test degree enrichment must be 0 or 1 (got {delta_p})"
            ));
        }
        let test_degree = trial_degree + delta_p;
        let trial_basis = LagrangeBasis::new(trial_degree)?;
        let test_basis = LagrangeBasis::new(test_degree)?;
        let order = quad_order.unwrap_or(2 * test_degree + 2);
        let rule = triangle_quadrature(order)?;
        let edge_rule = edge_quadrature(order)?;
        let edge_table = |b: &LagrangeBasis, e: usize| {
            let pts: Vec<[f64; 2]> = edge_rule.points.iter().map(|&s| edge_point(e, s)).collect();
            b.tabulate(&pts)
        };
        let flux_components = match mode {
            Mode::SpaceTime => 1,
            Mode::Spatial => 2,
        };
        Ok(Self {
            mode,
            layout: LocalLayout {
                n_u: trial_basis.len(),
                n_v: test_basis.len(),
                flux_components,
            },
            trial_degree,
            test_degree,
            trial: trial_basis.tabulate(&rule.points),
            test: test_basis.tabulate(&rule.points),
            trial_edge: [0, 1, 2].map(|e| edge_table(&trial_basis, e)),
            test_edge: [0, 1, 2].map(|e| edge_table(&test_basis, e)),
            rule,
            edge_rule,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn layout(&self) -> LocalLayout {
        self.layout
    }

    pub fn trial_degree(&self) -> usize {
        self.trial_degree
    }

    pub fn test_degree(&self) -> usize {
        self.test_degree
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Spatial part of a physical gradient.
    #[inline]
    fn spatial(&self, g: [f64; 2]) -> [f64; 2] {
        match self.mode {
            Mode::SpaceTime => [g[0], 0.0],
            Mode::Spatial => g,
        }
    }

    /// `B` and `F` on triangle `tri` plus the unit-weight Gram matrix. In
    /// spatial mode the data are evaluated at time `t` and the `u_t` term is
    /// omitted (it is the `(ϑ, v)` mass term of the time-marching schemes).
    pub fn element_b_f(
        &self,
        spec: &ProblemSpec,
        mesh: &Mesh,
        tri: usize,
        t: f64,
    ) -> Result<ElementMatrices> {
        let (b, f) = self.integrate(spec, mesh, tri, t, true)?;
        Ok(ElementMatrices {
            layout: self.layout,
            b,
            f,
            gram: self.gram(&mesh.geometry(tri), GramWeights::UNIT),
        })
    }

    /// `F` alone (the load of [`Self::element_b_f`]).
    pub fn element_load(
        &self,
        spec: &ProblemSpec,
        mesh: &Mesh,
        tri: usize,
        t: f64,
    ) -> Result<Vec<f64>> {
        Ok(self.integrate(spec, mesh, tri, t, false)?.1)
    }

    fn integrate(
        &self,
        spec: &ProblemSpec,
        mesh: &Mesh,
        tri: usize,
        t: f64,
        with_matrix: bool,
    ) -> Result<(DenseMatrix, Vec<f64>)> {
        if spec.mode != self.mode {
            return Err(invalid!(
                "problem mode {:?} does not match kernel mode {:?}",
                spec.mode,
                self.mode
            ));
        }
        let geom = mesh.geometry(tri);
        let lay = self.layout;
        let (nu, nv, fc) = (lay.n_u, lay.n_v, lay.flux_components);
        let mut b = if with_matrix {
            DenseMatrix::zeros(lay.n_test(), lay.n_trial())
        } else {
            DenseMatrix::zeros(0, 0)
        };
        let mut f = vec![0.0; lay.n_test()];
        let eps = spec.epsilon;

        let mut gu = vec![[0.0; 2]; nu];
        let mut gv = vec![[0.0; 2]; nv];
        for (q, (&xi, &wq)) in self.rule.points.iter().zip(&self.rule.weights).enumerate() {
            let w = wq * geom.det;
            let (x, tt) = spec.split(geom.map(xi), t);
            let src = (spec.source)(x, tt);
            for i in 0..nv {
                f[i] += w * src * self.test.value(q, i);
            }
            if !with_matrix {
                continue;
            }
            let bb = spec.b(x, tt);
            let divb = (spec.div_convection)(x, tt);
            for (j, g) in gu.iter_mut().enumerate() {
                *g = geom.push_gradient(self.trial.gradient(q, j));
            }
            for (i, g) in gv.iter_mut().enumerate() {
                *g = geom.push_gradient(self.test.gradient(q, i));
            }
            for i in 0..nv {
                let psi = self.test.value(q, i);
                let gs = self.spatial(gv[i]);
                let b_dot = bb[0] * gs[0] + bb[1] * gs[1];
                for j in 0..nu {
                    let phi = self.trial.value(q, j);
                    let ut = if self.mode == Mode::SpaceTime {
                        gu[j][1]
                    } else {
                        0.0
                    };
                    // v rows
                    b[(i, j)] += w * (ut * psi - b_dot * phi - divb * phi * psi);
                    for c in 0..fc {
                        b[(i, nu * (1 + c) + j)] += w * phi * gs[c];
                        // w rows, component c
                        b[(nv * (1 + c) + i, j)] += -w * eps * phi * gs[c];
                        b[(nv * (1 + c) + i, nu * (1 + c) + j)] += -w * phi * psi;
                    }
                }
            }
        }

        let edges = mesh.triangle_edges(tri);
        for (e, &edge) in edges.iter().enumerate() {
            let tag = mesh.edges()[edge].tag;
            spec.check_tag(tag)?;
            let n = self.spatial(geom.normals[e]);
            if n == [0.0, 0.0] {
                continue;
            }
            let data_only = !with_matrix;
            if data_only && !matches!(tag, BoundaryTag::Inflow | BoundaryTag::Outflow) {
                continue;
            }
            let len = geom.edge_lengths[e];
            let (te, ts) = (&self.trial_edge[e], &self.test_edge[e]);
            for (q, (&s, &ws)) in self
                .edge_rule
                .points
                .iter()
                .zip(&self.edge_rule.weights)
                .enumerate()
            {
                let w = ws * len;
                let (x, tt) = spec.split(geom.map(edge_point(e, s)), t);
                let bb = spec.b(x, tt);
                let bn = bb[0] * n[0] + bb[1] * n[1];
                let uin = if tag == BoundaryTag::Inflow {
                    (spec.inflow)(x, tt)
                } else {
                    0.0
                };
                let g_out = match (tag, &spec.neumann) {
                    (BoundaryTag::Outflow, Some(g)) => g(x, tt),
                    _ => 0.0,
                };
                for i in 0..nv {
                    let psi = ts.value(q, i);
                    // convective trace from the data only where b·n < 0
                    let upwind = tag == BoundaryTag::Inflow && bn < 0.0;
                    if upwind {
                        f[i] -= w * uin * bn * psi;
                    } else if with_matrix {
                        for j in 0..nu {
                            b[(i, j)] += w * bn * te.value(q, j) * psi;
                        }
                    }
                    if tag == BoundaryTag::Inflow {
                        for c in 0..fc {
                            f[nv * (1 + c) + i] -= w * eps * uin * n[c] * psi;
                        }
                    } else if with_matrix {
                        for j in 0..nu {
                            let phi = te.value(q, j);
                            for c in 0..fc {
                                b[(nv * (1 + c) + i, j)] += w * eps * n[c] * phi * psi;
                            }
                        }
                    }
                    if tag == BoundaryTag::Outflow {
                        f[i] += w * g_out * psi;
                    } else if with_matrix {
                        for j in 0..nu {
                            let phi = te.value(q, j);
                            for c in 0..fc {
                                b[(i, nu * (1 + c) + j)] -= w * n[c] * phi * psi;
                            }
                        }
                    }
                }
            }
        }
        Ok((b, f))
    }

    /// Test-space Gram matrix with the given weights, `h` the element diameter.
    pub fn gram(&self, geom: &ElementGeometry, weights: GramWeights) -> DenseMatrix {
        let lay = self.layout;
        let (nv, fc) = (lay.n_v, lay.flux_components);
        let h2 = geom.diameter * geom.diameter;
        let mut g = DenseMatrix::zeros(lay.n_test(), lay.n_test());
        let mut gv = vec![[0.0; 2]; nv];
        for (q, &wq) in self.rule.weights.iter().enumerate() {
            let w = wq * geom.det;
            for (i, g) in gv.iter_mut().enumerate() {
                *g = self.spatial(geom.push_gradient(self.test.gradient(q, i)));
            }
            for i in 0..nv {
                let pi = self.test.value(q, i);
                for k in 0..nv {
                    let pk = self.test.value(q, k);
                    let grad = gv[i][0] * gv[k][0] + gv[i][1] * gv[k][1];
                    g[(i, k)] +=
                        w * (weights.scalar_grad * h2 * grad + weights.scalar_mass * pi * pk);
                    for c in 0..fc {
                        for d in 0..fc {
                            let mut val = weights.vector_div * h2 * gv[i][c] * gv[k][d];
                            if c == d {
                                val += weights.vector_mass * pi * pk;
                            }
                            g[(nv * (1 + c) + i, nv * (1 + d) + k)] += w * val;
                        }
                    }
                }
            }
        }
        g
    }

    /// `(φ_j, ψ_i)_{L²}` between scalar trial functions and scalar test functions
    /// (`n_v × n_u`).
    pub fn mass(&self, geom: &ElementGeometry) -> DenseMatrix {
        let lay = self.layout;
        let mut m = DenseMatrix::zeros(lay.n_v, lay.n_u);
        for (q, &wq) in self.rule.weights.iter().enumerate() {
            let w = wq * geom.det;
            for i in 0..lay.n_v {
                let pi = self.test.value(q, i);
                for j in 0..lay.n_u {
                    m[(i, j)] += w * pi * self.trial.value(q, j);
                }
            }
        }
        m
    }

    /// Per-step system of the generalized-α scheme on one element.
    ///
    /// Unknowns are `ϑⁿ⁺¹` (u columns) and the scaled flux increment
    /// `Q = (α_f/α_m)(qⁿ⁺¹ − qⁿ)` (q columns):
    ///
    /// ```text
    /// (ϑ, v) + b_h((ζϑ, Q); (v, w)) = (1/α_m)[ℓ(t_n + α_f τ) + (α_m − 1)(ϑⁿ, v)
    ///                                 + τα_f(γ − 1) b_h((ϑⁿ, 0)) − b_h((uⁿ, qⁿ))]
    /// ```
    ///
    /// `state` holds the local coefficients `(uⁿ, qⁿ, ϑⁿ)` in trial ordering
    /// (`u` block, `q` block, `u`-sized `ϑ` block). The Gram matrix carries
    /// the `ζ`-weighted inner product.
    pub fn element_genalpha(
        &self,
        spec: &ProblemSpec,
        mesh: &Mesh,
        tri: usize,
        params: &GenAlphaParams,
        t_n: f64,
        state: &LocalState<'_>,
    ) -> Result<ElementMatrices> {
        if self.mode != Mode::Spatial {
            return Err(invalid!("generalized-alpha needs a spatial discretization"));
        }
        let lay = self.layout;
        let em = self.element_b_f(spec, mesh, tri, t_n + params.alpha_f * params.tau)?;
        let geom = mesh.geometry(tri);
        let mass = self.mass(&geom);

        let mut lhs = DenseMatrix::zeros(lay.n_test(), lay.n_trial());
        for i in 0..lay.n_test() {
            for j in 0..lay.n_trial() {
                let scale = if j < lay.n_u { params.zeta } else { 1.0 };
                lhs[(i, j)] = scale * em.b[(i, j)];
            }
        }
        for i in 0..lay.n_v {
            for j in 0..lay.n_u {
                lhs[(i, j)] += mass[(i, j)];
            }
        }

        let mut rhs = em.f.clone();
        let m_theta = mass.mul_vec(state.theta);
        for (r, m) in rhs.iter_mut().zip(&m_theta) {
            *r += (params.alpha_m - 1.0) * m;
        }
        let c = params.tau * params.alpha_f * (params.gamma - 1.0);
        for i in 0..lay.n_test() {
            let mut acc = 0.0;
            for j in 0..lay.n_u {
                acc += em.b[(i, j)] * (c * state.theta[j] - state.u[j]);
            }
            for (k, j) in lay.q_range().enumerate() {
                acc -= em.b[(i, j)] * state.q[k];
            }
            rhs[i] += acc;
        }
        for r in rhs.iter_mut() {
            *r /= params.alpha_m;
        }
        Ok(ElementMatrices {
            layout: lay,
            b: lhs,
            f: rhs,
            gram: self.gram(&geom, GramWeights::time_step(params.zeta)),
        })
    }

    /// System for the initial rate `ϑ⁰` and flux `q⁰`:
    /// `(ϑ, v) + b_h((0, q)) = ℓ(0) − b_h((u⁰, 0))`, with the Gram weight `kappa`
    /// on the scalar `V` part.
    pub fn element_initial_data(
        &self,
        spec: &ProblemSpec,
        mesh: &Mesh,
        tri: usize,
        u0: &[f64],
        kappa: f64,
    ) -> Result<ElementMatrices> {
        if self.mode != Mode::Spatial {
            return Err(invalid!(
                "initial-data retrieval needs a spatial discretization"
            ));
        }
        let lay = self.layout;
        let em = self.element_b_f(spec, mesh, tri, 0.0)?;
        let geom = mesh.geometry(tri);
        let mass = self.mass(&geom);
        let mut lhs = DenseMatrix::zeros(lay.n_test(), lay.n_trial());
        for i in 0..lay.n_test() {
            for j in lay.q_range() {
                lhs[(i, j)] = em.b[(i, j)];
            }
        }
        for i in 0..lay.n_v {
            for j in 0..lay.n_u {
                lhs[(i, j)] = mass[(i, j)];
            }
        }
        let mut rhs = em.f.clone();
        for (i, r) in rhs.iter_mut().enumerate() {
            for j in 0..lay.n_u {
                *r -= em.b[(i, j)] * u0[j];
            }
        }
        Ok(ElementMatrices {
            layout: lay,
            b: lhs,
            f: rhs,
            gram: self.gram(&geom, GramWeights::time_step(kappa)),
        })
    }
}

/// Local coefficients of a generalized-α state on one element.
#[derive(Clone, Copy, Debug)]
pub struct LocalState<'a> {
    pub u: &'a [f64],
    pub q: &'a [f64],
    pub theta: &'a [f64],
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryRoles, Mesh};
    use crate::problems;

    fn unit_mesh(mode: Mode, n: usize) -> Mesh {
        let roles = match mode {
            Mode::Spatial => BoundaryRoles::dirichlet(),
            Mode::SpaceTime => BoundaryRoles::space_time(BoundaryTag::Inflow, BoundaryTag::Inflow),
        };
        Mesh::rectangle([[0.0, 1.0], [0.0, 1.0]], n, n, roles).unwrap()
    }

    #[test]
    fn constants_are_annihilated_on_interior_element() {
        // b = 0 problem: u ≡ 1, q ≡ 0, v ≡ 1 gives zero volume contribution
        let mut spec = problems::time_polynomial(Mode::SpaceTime, 1).unwrap();
        spec.convection = problems::vector_fn(|_, _| [0.0, 0.0]);
        let k = ElementKernel::new(Mode::SpaceTime, 1, 0, None).unwrap();
        let mesh = unit_mesh(Mode::SpaceTime, 4);
        // pick a triangle with no boundary edge
        let tri = (0..mesh.n_triangles())
            .find(|&t| {
                mesh.triangle_edges(t)
                    .iter()
                    .all(|&e| !mesh.edges()[e].is_boundary())
            })
            .unwrap();
        let em = k.element_b_f(&spec, &mesh, tri, 0.0).unwrap();
        let lay = k.layout();
        let mut total = 0.0;
        for i in lay.v_range() {
            for j in lay.u_range() {
                total += em.b[(i, j)];
            }
        }
        // the sum over v rows contains only edge terms (b·n = 0) and u_t = 0
        assert!(total.abs() < 1e-14);
    }

    #[test]
    fn unit_source_load_is_area() {
        let mut spec = problems::time_polynomial(Mode::Spatial, 1).unwrap();
        spec.source = problems::scalar_fn(|_, _| 1.0);
        let mesh = unit_mesh(Mode::Spatial, 3);
        let k = ElementKernel::new(Mode::Spatial, 2, 0, None).unwrap();
        let tri = (0..mesh.n_triangles())
            .find(|&t| {
                mesh.triangle_edges(t)
                    .iter()
                    .all(|&e| !mesh.edges()[e].is_boundary())
            })
            .unwrap();
        let em = k.element_b_f(&spec, &mesh, tri, 0.0).unwrap();
        let lay = k.layout();
        let sum: f64 = em.f[lay.v_range()].iter().sum();
        assert!((sum - mesh.geometry(tri).area).abs() < 1e-14);
    }

    #[test]
    fn gram_constants_and_symmetry() {
        for mode in [Mode::Spatial, Mode::SpaceTime] {
            for dp in 0..=1 {
                let k = ElementKernel::new(mode, 1, dp, None).unwrap();
                let g = ElementGeometry::new([[0.1, 0.0], [0.9, 0.2], [0.3, 0.7]]);
                let gram = k.gram(&g, GramWeights::UNIT);
                assert!(gram.max_asymmetry() < 1e-14);
                let lay = k.layout();
                let c = 1.7;
                let mut v = vec![0.0; lay.n_test()];
                for i in lay.v_range() {
                    v[i] = c;
                }
                assert!((gram.quadratic_form(&v) - c * c * g.area).abs() < 1e-13);
                let mut w = vec![0.0; lay.n_test()];
                for i in lay.n_v..2 * lay.n_v {
                    w[i] = c;
                }
                assert!((gram.quadratic_form(&w) - c * c * g.area).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn load_only_matches_full_integration() {
        let spec = problems::eriksson_johnson(0.1).unwrap();
        let mesh =
            Mesh::rectangle([[-1.0, 0.0], [-0.5, 0.5]], 3, 2, BoundaryRoles::dirichlet()).unwrap();
        let k = ElementKernel::new(Mode::Spatial, 2, 0, None).unwrap();
        for tri in 0..mesh.n_triangles() {
            let full = k.element_b_f(&spec, &mesh, tri, 0.3).unwrap();
            assert_eq!(full.f, k.element_load(&spec, &mesh, tri, 0.3).unwrap());
        }
    }

    #[test]
    fn block_shapes() {
        let k = ElementKernel::new(Mode::Spatial, 2, 1, None).unwrap();
        let spec = problems::steady_linear(Mode::Spatial).unwrap();
        let mesh = unit_mesh(Mode::Spatial, 1);
        let em = k.element_b_f(&spec, &mesh, 0, 0.0).unwrap();
        let vq = em.block(TestComponent::V, TrialComponent::Q);
        assert_eq!((vq.rows(), vq.cols()), (10, 12));
        let wu = em.block(TestComponent::W, TrialComponent::U);
        assert_eq!((wu.rows(), wu.cols()), (20, 6));
        assert_eq!(em.load(TestComponent::W).len(), 20);
        assert!(ElementKernel::new(Mode::Spatial, 1, 2, None).is_err());
    }
}
