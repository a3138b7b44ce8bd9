//! Error norms against exact solutions and error indicators.

use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{invalid, Result};
use crate::math;
use crate::mesh::Mesh;
use crate::problems::{Mode, ProblemSpec};
use crate::quadrature::triangle_quadrature;
use crate::space::Field;

/// `‖u − u_h‖` and `‖q − q_h‖` with `q = ε∇u`. In space-time mode the norms
/// are taken over the space-time domain and the `H¹` seminorm includes the
/// time derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExactErrors {
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_q: f64,
    pub hdiv_q: f64,
}

/// Errors of `(u_h, q_h)` at time `t` (ignored in space-time mode) using a
/// triangle rule of the given order.
pub fn exact_errors(
    spec: &ProblemSpec,
    mesh: &Mesh,
    u: &Field,
    q: &Field,
    t: f64,
    order: usize,
) -> Result<ExactErrors> {
    let ex = spec.exact()?;
    let fc = q.space().components();
    let want = if spec.mode == Mode::SpaceTime { 1 } else { 2 };
    if u.space().components() != 1 || fc != want {
        return Err(invalid!("field shapes do not match the problem mode"));
    }
    let rule = triangle_quadrature(order)?;
    let eps = spec.epsilon;
    let (mut l2u, mut h1u, mut l2q, mut divq) = (0.0, 0.0, 0.0, 0.0);
    for tri in 0..mesh.n_triangles() {
        let g = mesh.geometry(tri);
        for (xi, wq) in rule.points.iter().zip(&rule.weights) {
            let w = wq * g.det;
            let (x, tt) = spec.split(g.map(*xi), t);
            let (uh, guh) = u.eval_with_gradient(&g, tri, *xi);
            let (qh, gqh) = q.eval_with_gradient(&g, tri, *xi);
            let grad = (ex.grad)(x, tt);
            let du = (ex.u)(x, tt) - uh[0];
            // second mesh direction is time in space-time mode
            let second = match spec.mode {
                Mode::SpaceTime => (ex.dt)(x, tt),
                Mode::Spatial => grad[1],
            };
            let dg = [grad[0] - guh[0][0], second - guh[0][1]];
            l2u += w * du * du;
            h1u += w * (dg[0] * dg[0] + dg[1] * dg[1]);
            let mut div_h = 0.0;
            for c in 0..fc {
                let d = eps * grad[c] - qh[c];
                l2q += w * d * d;
                div_h += gqh[c][c];
            }
            let dd = eps * (ex.laplacian)(x, tt) - div_h;
            divq += w * dd * dd;
        }
    }
    Ok(ExactErrors {
        l2_u: math::sqrt(l2u),
        h1_u: math::sqrt(l2u + h1u),
        l2_q: math::sqrt(l2q),
        hdiv_q: math::sqrt(l2q + divq),
    })
}

/// `‖f − f_h‖_{L²}` for a scalar field against a function of the mesh point.
pub fn l2_error_fn(
    mesh: &Mesh,
    u: &Field,
    f: impl Fn([f64; 2]) -> f64,
    order: usize,
) -> Result<f64> {
    let rule = triangle_quadrature(order)?;
    let mut acc = 0.0;
    for tri in 0..mesh.n_triangles() {
        let g = mesh.geometry(tri);
        for (xi, wq) in rule.points.iter().zip(&rule.weights) {
            let d = f(g.map(*xi)) - u.eval(tri, *xi)[0];
            acc += wq * g.det * d * d;
        }
    }
    Ok(math::sqrt(acc))
}

/// Element indicators `η_K` of an error representation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IndicatorSet {
    pub eta: Vec<f64>,
}

impl IndicatorSet {
    /// `η_K = sqrt(e_Kᵀ G_K e_K)` from local Gram matrices and local coefficients.
    pub fn from_local<'a>(parts: impl IntoIterator<Item = (&'a DenseMatrix, &'a [f64])>) -> Self {
        let eta = parts
            .into_iter()
            .map(|(g, e)| math::sqrt(g.quadratic_form(e).max(0.0)))
            .collect();
        Self { eta }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// `sqrt(Σ η_K²)`.
    pub fn total(&self) -> f64 {
        math::sqrt(self.eta.iter().map(|e| e * e).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryRoles;
    use crate::problems;
    use crate::space::{Family, FeSpace};
    use alloc::sync::Arc;

    #[test]
    fn interpolant_of_linear_solution_is_exact() {
        let spec = problems::steady_linear(Mode::Spatial).unwrap();
        let mesh =
            Mesh::rectangle([[0.0, 1.0], [0.0, 1.0]], 3, 3, BoundaryRoles::dirichlet()).unwrap();
        let us = Arc::new(FeSpace::new(&mesh, Family::Continuous, 1, 1).unwrap());
        let qs = Arc::new(FeSpace::new(&mesh, Family::Continuous, 1, 2).unwrap());
        let ex = spec.exact().unwrap().clone();
        let u = us.interpolate(&mesh, |x| [(ex.u)(x, 0.0), 0.0]);
        let q = qs.interpolate(&mesh, |x| {
            let g = (ex.grad)(x, 0.0);
            [0.1 * g[0], 0.1 * g[1]]
        });
        let e = exact_errors(&spec, &mesh, &u, &q, 0.0, 4).unwrap();
        assert!(
            e.l2_u < 1e-12 && e.h1_u < 1e-12 && e.l2_q < 1e-12 && e.hdiv_q < 1e-12,
            "{e:?}"
        );
    }

    #[test]
    fn zero_field_against_one() {
        let mesh =
            Mesh::rectangle([[0.0, 1.0], [0.0, 1.0]], 2, 2, BoundaryRoles::dirichlet()).unwrap();
        let us = Arc::new(FeSpace::new(&mesh, Family::Continuous, 1, 1).unwrap());
        let u = Field::zeros(us);
        assert!((l2_error_fn(&mesh, &u, |_| 1.0, 2).unwrap() - 1.0).abs() < 1e-14);
        let spec = problems::shock_problem();
        let q = u.clone();
        assert!(exact_errors(&spec, &mesh, &u, &q, 0.0, 2).is_err());
    }

    #[test]
    fn indicator_total() {
        let mut g = DenseMatrix::zeros(1, 1);
        g[(0, 0)] = 4.0;
        let e1 = [3.0];
        let e2 = [0.0];
        let set = IndicatorSet::from_local([(&g, &e1[..]), (&g, &e2[..])]);
        assert_eq!(set.eta, [6.0, 0.0]);
        assert_eq!(set.total(), 6.0);
    }
}
