//! Randomized checks of bisection, marking and the test-space Gram matrix.

use avsfe_core::forms::{ElementKernel, GramWeights};
use avsfe_core::marking::dorfler_mark;
use avsfe_core::mesh::{BoundaryRoles, ElementGeometry, Mesh};
use avsfe_core::problems::Mode;
use nalgebra::DMatrix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bisection_stays_conforming_and_preserves_area(
        n in 1usize..4,
        rounds in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 1..6), 1..4),
    ) {
        let mut mesh = Mesh::rectangle([[-1.0, 0.5], [0.0, 2.0]], n, n + 1, BoundaryRoles::dirichlet()).unwrap();
        let area = mesh.total_area();
        for picks in rounds {
            let nt = mesh.n_triangles();
            let marked: Vec<usize> = picks.iter().map(|r| ((r * nt as f64) as usize).min(nt - 1)).collect();
            let next = mesh.bisect(&marked).unwrap();
            next.check_conformity().unwrap();
            prop_assert!(next.n_triangles() > nt);
            prop_assert!((next.total_area() - area).abs() <= 1e-12 * area);
            // every marked parent was split
            for &m in &marked {
                prop_assert!(next.parents().iter().filter(|&&p| p == m).count() >= 2);
            }
            mesh = next;
        }
    }

    #[test]
    fn dorfler_set_is_minimal(
        eta in proptest::collection::vec(0.0f64..10.0, 1..40),
        theta in 0.05f64..1.0,
    ) {
        let marked = dorfler_mark(&eta, theta).unwrap();
        let total: f64 = eta.iter().map(|e| e * e).sum();
        let sum: f64 = marked.iter().map(|&k| eta[k] * eta[k]).sum();
        prop_assert!(sum >= theta * theta * total * (1.0 - 1e-12));
        // the k largest indicators are the best k-element set
        let mut sorted: Vec<f64> = eta.iter().map(|e| e * e).collect();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if marked.len() > 1 {
            let best: f64 = sorted[..marked.len() - 1].iter().sum();
            prop_assert!(best < theta * theta * total);
        }
    }

    #[test]
    fn gram_matrix_is_spd(
        v in proptest::array::uniform6(-1.0f64..1.0),
        p in 1usize..3,
        dp in 0usize..2,
        spatial in any::<bool>(),
        zeta in 1e-4f64..1.0,
    ) {
        let verts = [[v[0], v[1]], [v[2], v[3]], [v[4], v[5]]];
        let det = (verts[1][0] - verts[0][0]) * (verts[2][1] - verts[0][1])
            - (verts[2][0] - verts[0][0]) * (verts[1][1] - verts[0][1]);
        prop_assume!(det > 1e-2);
        let mode = if spatial { Mode::Spatial } else { Mode::SpaceTime };
        let kernel = ElementKernel::new(mode, p, dp, None).unwrap();
        let geom = ElementGeometry::new(verts);
        for weights in [GramWeights::UNIT, GramWeights::time_step(zeta)] {
            let g = kernel.gram(&geom, weights);
            let n = g.rows();
            let m = DMatrix::from_fn(n, n, |i, j| g[(i, j)]);
            prop_assert!((&m - m.transpose()).amax() <= 1e-14 * m.amax());
            let eig = m.symmetric_eigen().eigenvalues;
            let (lo, hi) = (eig.min(), eig.max());
            prop_assert!(lo > 1e-12 * hi, "eigenvalues {lo} .. {hi}");
        }
    }
}
