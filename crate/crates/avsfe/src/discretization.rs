//! Trial and test spaces of one AVS-FE discretization on one mesh.

use std::collections::BTreeMap;
use std::sync::Arc;

use avsfe_core::forms::ElementKernel;
use avsfe_core::mesh::{BoundaryTag, Mesh};
use avsfe_core::problems::Mode;
use avsfe_core::space::{Family, FeSpace, Field};

use crate::error::Result;

/// Degree and quadrature choices.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiscOptions {
    /// Degree of `u` and `q`.
    pub degree: usize,
    /// Test-space enrichment `Δp ∈ {0, 1}`.
    pub delta_p: usize,
    /// Quadrature order; `None` means `2(p + Δp) + 2`.
    pub quad_order: Option<usize>,
}

impl Default for DiscOptions {
    fn default() -> Self {
        Self {
            degree: 1,
            delta_p: 0,
            quad_order: None,
        }
    }
}

/// Continuous trial spaces for `u` (scalar) and `q` (one flux component in
/// space-time mode, two in spatial mode), broken test spaces for `v` and `w`.
///
/// Global trial numbering is `[u dofs | q dofs]`, global test numbering
/// `[v dofs | w dofs]`.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mode: Mode,
    pub mesh: Arc<Mesh>,
    pub kernel: ElementKernel,
    pub u_space: Arc<FeSpace>,
    pub q_space: Arc<FeSpace>,
    pub v_space: Arc<FeSpace>,
    pub w_space: Arc<FeSpace>,
}

impl Discretization {
    pub fn new(mesh: Arc<Mesh>, mode: Mode, opts: &DiscOptions) -> Result<Self> {
        let kernel = ElementKernel::new(mode, opts.degree, opts.delta_p, opts.quad_order)?;
        let fc = kernel.layout().flux_components;
        let p = opts.degree;
        let pt = kernel.test_degree();
        Ok(Self {
            mode,
            u_space: Arc::new(FeSpace::new(&mesh, Family::Continuous, p, 1)?),
            q_space: Arc::new(FeSpace::new(&mesh, Family::Continuous, p, fc)?),
            v_space: Arc::new(FeSpace::new(&mesh, Family::Broken, pt, 1)?),
            w_space: Arc::new(FeSpace::new(&mesh, Family::Broken, pt, fc)?),
            kernel,
            mesh,
        })
    }

    pub fn n_u(&self) -> usize {
        self.u_space.n_dofs()
    }

    pub fn n_trial(&self) -> usize {
        self.u_space.n_dofs() + self.q_space.n_dofs()
    }

    pub fn n_test(&self) -> usize {
        self.v_space.n_dofs() + self.w_space.n_dofs()
    }

    /// Global trial dofs of `tri` in local kernel order.
    pub fn trial_dofs(&self, tri: usize) -> Vec<usize> {
        let nu = self.n_u();
        let mut d = self.u_space.element_dofs(tri);
        d.extend(self.q_space.element_dofs(tri).into_iter().map(|j| j + nu));
        d
    }

    /// Global test dofs of `tri` in local kernel order.
    pub fn test_dofs(&self, tri: usize) -> Vec<usize> {
        let nv = self.v_space.n_dofs();
        let mut d = self.v_space.element_dofs(tri);
        d.extend(self.w_space.element_dofs(tri).into_iter().map(|j| j + nv));
        d
    }

    /// Splits a trial vector into `(u, q)` fields.
    pub fn trial_fields(&self, x: &[f64]) -> Result<(Field, Field)> {
        let nu = self.n_u();
        Ok((
            Field::new(self.u_space.clone(), x[..nu].to_vec())?,
            Field::new(self.q_space.clone(), x[nu..].to_vec())?,
        ))
    }

    /// Splits a test vector into the error representation `(ê, Ê)`.
    pub fn test_fields(&self, e: &[f64]) -> Result<(Field, Field)> {
        let nv = self.v_space.n_dofs();
        Ok((
            Field::new(self.v_space.clone(), e[..nv].to_vec())?,
            Field::new(self.w_space.clone(), e[nv..].to_vec())?,
        ))
    }

    /// `u` dofs lying on edges with one of the given tags, with their points.
    pub fn u_dofs_on(&self, tags: &[BoundaryTag]) -> BTreeMap<usize, [f64; 2]> {
        let basis = self.u_space.basis();
        let per_edge = basis.nodes_per_edge();
        let nodes = basis.node_points();
        let mut out = BTreeMap::new();
        for edge in self.mesh.edges() {
            if !tags.contains(&edge.tag) {
                continue;
            }
            let tri = edge.triangles[0].expect("boundary edge has a triangle");
            let te = self.mesh.triangle_edges(tri);
            let e = (0..3)
                .find(|&i| self.mesh.edges()[te[i]].vertices == edge.vertices)
                .expect("edge belongs to its triangle");
            let g = self.mesh.geometry(tri);
            let dofs = self.u_space.scalar_dofs(tri);
            let mut local = vec![(e + 1) % 3, (e + 2) % 3];
            local.extend(3 + e * per_edge..3 + (e + 1) * per_edge);
            for k in local {
                out.insert(dofs[k], g.map(nodes[k]));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use avsfe_core::mesh::BoundaryRoles;

    #[test]
    fn two_triangle_counts() {
        let roles = BoundaryRoles::space_time(BoundaryTag::Inflow, BoundaryTag::Inflow);
        let mesh = Arc::new(Mesh::rectangle([[0.0, 1.0], [0.0, 1.0]], 1, 1, roles).unwrap());
        let d = Discretization::new(mesh, Mode::SpaceTime, &DiscOptions::default()).unwrap();
        // broken P1 (v, w): 2·3·(1+1); continuous P1 (u, q): 4·(1+1)
        assert_eq!(d.n_test(), 12);
        assert_eq!(d.n_trial(), 8);
        assert_eq!(d.n_test() + d.n_trial(), 20);
        let bottom = d.u_dofs_on(&[BoundaryTag::InitialTime]);
        assert_eq!(bottom.len(), 2);
        assert!(bottom.values().all(|p| p[1] == 0.0));
    }

    #[test]
    fn edge_dofs_for_p2() {
        let mesh = Arc::new(
            Mesh::rectangle([[0.0, 1.0], [0.0, 1.0]], 2, 2, BoundaryRoles::dirichlet()).unwrap(),
        );
        let opts = DiscOptions {
            degree: 2,
            ..Default::default()
        };
        let d = Discretization::new(mesh, Mode::Spatial, &opts).unwrap();
        let all = d.u_dofs_on(&[BoundaryTag::Inflow]);
        // 8 boundary vertices + 8 boundary edge midpoints
        assert_eq!(all.len(), 16);
        for p in all.values() {
            assert!(p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0);
        }
    }
}
