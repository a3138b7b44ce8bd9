//! Finite element spaces (continuous or broken Lagrange, scalar or vector
//! valued) and fields living on them.
//!
//! Global numbering is component-major: dof `c * n_scalar + i` is the `c`-th
//! component of scalar dof `i`. Element-local numbering follows the same
//! rule with the local basis size in place of `n_scalar`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{edge_point, LagrangeBasis};
use crate::error::{invalid, Result};
use crate::mesh::{ElementGeometry, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// C⁰ Lagrange: dofs on vertices and edges are shared between triangles.
    Continuous,
    /// Element-local Lagrange, no inter-element continuity.
    Broken,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeSpace {
    family: Family,
    components: usize,
    basis: LagrangeBasis,
    n_scalar: usize,
    n_triangles: usize,
    local_to_global: Vec<usize>,
}

impl FeSpace {
    pub fn new(mesh: &Mesh, family: Family, degree: usize, components: usize) -> Result<Self> {
        if !(1..=2).contains(&components) {
            return Err(invalid!(
                "value shape must have 1 or 2 components (got {components})"
            ));
        }
        let basis = LagrangeBasis::new(degree)?;
        let n_loc = basis.len();
        let n_tri = mesh.n_triangles();
        let mut local_to_global = Vec::with_capacity(n_loc * n_tri);
        let n_scalar = match family {
            Family::Broken => {
                local_to_global.extend(0..n_loc * n_tri);
                n_loc * n_tri
            }
            Family::Continuous => {
                let per_edge = basis.nodes_per_edge();
                let per_cell = basis.interior_nodes();
                let nv = mesh.n_vertices();
                let edge_base = nv;
                let cell_base = nv + mesh.n_edges() * per_edge;
                for (t, tri) in mesh.triangles().iter().enumerate() {
                    local_to_global.extend_from_slice(tri);
                    let te = mesh.triangle_edges(t);
                    for i in 0..3 {
                        let a = tri[(i + 1) % 3];
                        let b = tri[(i + 2) % 3];
                        for j in 1..=per_edge {
                            // global edge nodes run from the lower to the higher vertex id
                            let k = if a < b { j - 1 } else { per_edge - j };
                            local_to_global.push(edge_base + te[i] * per_edge + k);
                        }
                    }
                    for k in 0..per_cell {
                        local_to_global.push(cell_base + t * per_cell + k);
                    }
                }
                cell_base + n_tri * per_cell
            }
        };
        Ok(Self {
            family,
            components,
            basis,
            n_scalar,
            n_triangles: n_tri,
            local_to_global,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn n_triangles(&self) -> usize {
        self.n_triangles
    }

    /// Scalar dofs per triangle.
    pub fn n_local(&self) -> usize {
        self.basis.len()
    }

    pub fn n_scalar_dofs(&self) -> usize {
        self.n_scalar
    }

    pub fn n_dofs(&self) -> usize {
        self.components * self.n_scalar
    }

    pub fn scalar_dofs(&self, tri: usize) -> &[usize] {
        let n = self.n_local();
        &self.local_to_global[tri * n..(tri + 1) * n]
    }

    /// All dofs of `tri` in local (component-major) order.
    pub fn element_dofs(&self, tri: usize) -> Vec<usize> {
        let s = self.scalar_dofs(tri);
        (0..self.components)
            .flat_map(|c| s.iter().map(move |&d| c * self.n_scalar + d))
            .collect()
    }

    /// Physical coordinates of each scalar dof node.
    pub fn dof_points(&self, mesh: &Mesh) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.n_scalar];
        let nodes = self.basis.node_points();
        for t in 0..mesh.n_triangles() {
            let g = mesh.geometry(t);
            for (&d, &xi) in self.scalar_dofs(t).iter().zip(&nodes) {
                out[d] = g.map(xi);
            }
        }
        out
    }

    /// Nodal interpolant of `f`; `f` returns one value per component.
    pub fn interpolate(self: &Arc<Self>, mesh: &Mesh, f: impl Fn([f64; 2]) -> [f64; 2]) -> Field {
        let mut coeffs = vec![0.0; self.n_dofs()];
        for (i, x) in self.dof_points(mesh).into_iter().enumerate() {
            let v = f(x);
            for c in 0..self.components {
                coeffs[c * self.n_scalar + i] = v[c];
            }
        }
        Field {
            space: Arc::clone(self),
            coeffs,
        }
    }
}

/// Coefficient vector bound to a space.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl Field {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(invalid!(
                "coefficient length {} does not match dof count {}",
                coeffs.len(),
                space.n_dofs()
            ));
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        Self {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Local coefficients of `tri` in component-major order.
    pub fn local_coeffs(&self, tri: usize) -> Vec<f64> {
        self.space
            .element_dofs(tri)
            .into_iter()
            .map(|d| self.coeffs[d])
            .collect()
    }

    /// Component values at reference point `xi` of `tri`.
    pub fn eval(&self, tri: usize, xi: [f64; 2]) -> [f64; 2] {
        let (vals, _) = self.space.basis.eval(xi);
        self.combine(tri, &vals)
    }

    /// Component values and physical gradients (`grad[c]`) at `xi`.
    pub fn eval_with_gradient(
        &self,
        geom: &ElementGeometry,
        tri: usize,
        xi: [f64; 2],
    ) -> ([f64; 2], [[f64; 2]; 2]) {
        let (vals, grads) = self.space.basis.eval(xi);
        let n_s = self.space.n_scalar;
        let mut v = [0.0; 2];
        let mut g = [[0.0; 2]; 2];
        for (k, &d) in self.space.scalar_dofs(tri).iter().enumerate() {
            let pg = geom.push_gradient(grads[k]);
            for c in 0..self.space.components {
                let a = self.coeffs[c * n_s + d];
                v[c] += a * vals[k];
                g[c][0] += a * pg[0];
                g[c][1] += a * pg[1];
            }
        }
        (v, g)
    }

    fn combine(&self, tri: usize, vals: &[f64]) -> [f64; 2] {
        let n_s = self.space.n_scalar;
        let mut v = [0.0; 2];
        for (k, &d) in self.space.scalar_dofs(tri).iter().enumerate() {
            for (c, vc) in v.iter_mut().enumerate().take(self.space.components) {
                *vc += self.coeffs[c * n_s + d] * vals[k];
            }
        }
        v
    }

    fn local_edge(mesh: &Mesh, tri: usize, edge: usize) -> Result<(usize, bool)> {
        let te = mesh.triangle_edges(tri);
        let i = te
            .iter()
            .position(|&e| e == edge)
            .ok_or_else(|| invalid!("edge {edge} is not an edge of triangle {tri}"))?;
        // local traversal runs from local vertex i+1 to i+2; the global
        // orientation runs from the lower vertex id to the higher one
        let tri_v = mesh.triangles()[tri];
        let forward = tri_v[(i + 1) % 3] < tri_v[(i + 2) % 3];
        Ok((i, forward))
    }

    /// Trace of the element-local polynomial of `tri` on `edge`, at parameters
    /// `s` measured along the edge from its lower to its higher vertex id.
    pub fn trace_eval(
        &self,
        mesh: &Mesh,
        tri: usize,
        edge: usize,
        s: &[f64],
    ) -> Result<Vec<[f64; 2]>> {
        let (i, forward) = Self::local_edge(mesh, tri, edge)?;
        Ok(s.iter()
            .map(|&s| {
                let sl = if forward { s } else { 1.0 - s };
                self.eval(tri, edge_point(i, sl))
            })
            .collect())
    }

    /// Normal trace `w · n` with the outward normal of `tri`, using as many
    /// normal components as the field has (the spatial part in space-time).
    pub fn normal_trace_eval(
        &self,
        mesh: &Mesh,
        tri: usize,
        edge: usize,
        s: &[f64],
    ) -> Result<Vec<f64>> {
        let (i, _) = Self::local_edge(mesh, tri, edge)?;
        let n = mesh.geometry(tri).normals[i];
        let comps = self.space.components;
        Ok(self
            .trace_eval(mesh, tri, edge, s)?
            .into_iter()
            .map(|v| (0..comps).map(|c| v[c] * n[c]).sum())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryRoles;

    fn square(n: usize) -> Mesh {
        Mesh::rectangle([[0.0, 1.0], [0.0, 1.0]], n, n, BoundaryRoles::dirichlet()).unwrap()
    }

    #[test]
    fn dof_counts() {
        let m = square(1);
        assert_eq!(
            FeSpace::new(&m, Family::Continuous, 1, 1).unwrap().n_dofs(),
            4
        );
        assert_eq!(FeSpace::new(&m, Family::Broken, 1, 1).unwrap().n_dofs(), 6);
        assert_eq!(
            FeSpace::new(&m, Family::Continuous, 1, 2).unwrap().n_dofs(),
            8
        );
        // P2 continuous: vertices + edges
        assert_eq!(
            FeSpace::new(&m, Family::Continuous, 2, 1).unwrap().n_dofs(),
            4 + 5
        );
        assert!(FeSpace::new(&m, Family::Continuous, 4, 1).is_err());
        assert!(FeSpace::new(&m, Family::Continuous, 0, 1).is_err());
    }

    #[test]
    fn constant_traces() {
        let m = square(2);
        let sp = Arc::new(FeSpace::new(&m, Family::Continuous, 2, 1).unwrap());
        let u = sp.interpolate(&m, |_| [3.5, 0.0]);
        for t in 0..m.n_triangles() {
            for e in m.triangle_edges(t) {
                for v in u.trace_eval(&m, t, e, &[0.0, 0.3, 1.0]).unwrap() {
                    assert!((v[0] - 3.5).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn normal_traces_cancel_on_interior_edges() {
        let m = square(2);
        let sp = Arc::new(FeSpace::new(&m, Family::Continuous, 1, 2).unwrap());
        let w = sp.interpolate(&m, |_| [1.0, 0.0]);
        for (id, e) in m.edges().iter().enumerate() {
            match e.triangles {
                [Some(a), Some(b)] => {
                    let na = w.normal_trace_eval(&m, a, id, &[0.2, 0.7]).unwrap();
                    let nb = w.normal_trace_eval(&m, b, id, &[0.2, 0.7]).unwrap();
                    for k in 0..2 {
                        assert!((na[k] + nb[k]).abs() < 1e-14);
                    }
                }
                [Some(a), None] => {
                    let g = m.geometry(a);
                    let i = m.triangle_edges(a).iter().position(|&x| x == id).unwrap();
                    let nt = w.normal_trace_eval(&m, a, id, &[0.5]).unwrap();
                    assert!((nt[0] - g.normals[i][0]).abs() < 1e-14);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn foreign_edge_rejected() {
        let m = square(2);
        let sp = Arc::new(FeSpace::new(&m, Family::Continuous, 1, 1).unwrap());
        let u = Field::zeros(sp);
        let foreign = (0..m.n_edges())
            .find(|e| !m.triangle_edges(0).contains(e))
            .unwrap();
        assert!(u.trace_eval(&m, 0, foreign, &[0.5]).is_err());
    }

    #[test]
    fn continuous_field_agrees_across_edges() {
        let m = square(3).refine_uniform().unwrap();
        for p in 1..=3 {
            let sp = Arc::new(FeSpace::new(&m, Family::Continuous, p, 1).unwrap());
            let u = sp.interpolate(&m, |x| [libm::sin(3.0 * x[0]) * libm::exp(x[1]), 0.0]);
            let s = [0.1, 0.35, 0.8];
            for (id, e) in m.edges().iter().enumerate() {
                if let [Some(a), Some(b)] = e.triangles {
                    let ua = u.trace_eval(&m, a, id, &s).unwrap();
                    let ub = u.trace_eval(&m, b, id, &s).unwrap();
                    for k in 0..s.len() {
                        assert!((ua[k][0] - ub[k][0]).abs() < 1e-12, "p={p}");
                    }
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let m = square(2).bisect(&[1, 4]).unwrap();
        for p in 1..=3 {
            let sp = Arc::new(FeSpace::new(&m, Family::Continuous, p, 1).unwrap());
            let poly = |x: [f64; 2]| -> f64 {
                let (a, b) = (x[0], x[1]);
                match p {
                    1 => 1.0 + 2.0 * a - b,
                    2 => 1.0 + a * b - 3.0 * b * b,
                    _ => a * a * b - b * b * b + 0.5 * a,
                }
            };
            let u = sp.interpolate(&m, |x| [poly(x), 0.0]);
            for t in 0..m.n_triangles() {
                let g = m.geometry(t);
                for xi in [[0.2, 0.3], [0.6, 0.1], [0.05, 0.9]] {
                    let v = u.eval(t, xi)[0];
                    assert!((v - poly(g.map(xi))).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mapped_gradients_of_linear_function() {
        let m = square(2).bisect(&[0]).unwrap();
        let sp = Arc::new(FeSpace::new(&m, Family::Continuous, 1, 1).unwrap());
        let u = sp.interpolate(&m, |x| [0.5 - 1.5 * x[0] + 2.25 * x[1], 0.0]);
        for t in 0..m.n_triangles() {
            let g = m.geometry(t);
            let (_, grad) = u.eval_with_gradient(&g, t, [0.3, 0.3]);
            assert!((grad[0][0] + 1.5).abs() < 1e-12 && (grad[0][1] - 2.25).abs() < 1e-12);
        }
    }
}
