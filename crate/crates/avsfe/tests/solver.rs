//! Global solves: solver variants, exactness on the trial space, initial
//! data and thread-count independence.

use std::sync::Arc;

use avsfe::discretization::DiscOptions;
use avsfe::genalpha::{GenAlphaOptions, GenAlphaSolver};
use avsfe::oracle::solve_normal_equations;
use avsfe::solve::SolveOptions;
use avsfe::spacetime::{solve_spacetime, DirichletMode, SpaceTimeOptions};
use avsfe_core::mesh::Mesh;
use avsfe_core::problems::{self, Mode, ProblemSpec};

fn st(p: usize, dirichlet: DirichletMode, condense: bool) -> SpaceTimeOptions {
    SpaceTimeOptions {
        disc: DiscOptions {
            degree: p,
            delta_p: 1,
            quad_order: None,
        },
        dirichlet,
        solver: SolveOptions { condense },
    }
}

fn ga(p: usize, rho_inf: f64, tau: f64, dirichlet: DirichletMode) -> GenAlphaOptions {
    GenAlphaOptions {
        disc: DiscOptions {
            degree: p,
            delta_p: 1,
            quad_order: None,
        },
        rho_inf,
        tau,
        dirichlet,
        solver: SolveOptions::default(),
    }
}

fn mesh(spec: &ProblemSpec, n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::rectangle(spec.domain, n, n, spec.roles).unwrap())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn saddle_condensed_and_normal_equations_agree() {
    let spec = problems::eriksson_johnson_1d(0.1).unwrap();
    for p in [1, 2] {
        let m = mesh(&spec, 6);
        let a = solve_spacetime(&spec, m.clone(), &st(p, DirichletMode::Weak, false)).unwrap();
        let b = solve_spacetime(&spec, m, &st(p, DirichletMode::Weak, true)).unwrap();
        let scale = a.u.coeffs().iter().fold(1.0f64, |s, v| s.max(v.abs()));
        assert!(max_diff(a.u.coeffs(), b.u.coeffs()) < 1e-10 * scale);
        assert!(max_diff(a.q.coeffs(), b.q.coeffs()) < 1e-10 * scale);
        assert!(max_diff(&a.e, &b.e) < 1e-10 * scale);
        assert!(
            (a.indicators.total() - b.indicators.total()).abs()
                < 1e-10 * (1.0 + a.indicators.total())
        );

        let mut x = a.u.coeffs().to_vec();
        x.extend_from_slice(a.q.coeffs());
        let oracle = solve_normal_equations(&a.system).unwrap();
        assert!(max_diff(&x, &oracle) < 1e-8 * scale);
        for d in [a.diagnostics, b.diagnostics] {
            assert!(d.orthogonality_ratio() < 1e-9, "{d:?}");
        }
    }
}

#[test]
fn trial_space_solutions_are_reproduced_with_zero_estimate() {
    let spec = problems::steady_linear(Mode::SpaceTime).unwrap();
    let exact = spec.exact.clone().unwrap();
    for dirichlet in [DirichletMode::Weak, DirichletMode::Strong] {
        for p in [1, 2] {
            let m = mesh(&spec, 3);
            let sol = solve_spacetime(&spec, m.clone(), &st(p, dirichlet, false)).unwrap();
            let pts = sol.disc.u_space.dof_points(&m);
            let err = pts
                .iter()
                .zip(sol.u.coeffs())
                .fold(0.0f64, |e, (x, u)| e.max((u - (exact.u)(*x, 0.0)).abs()));
            assert!(err < 1e-10, "{dirichlet:?} p={p}: {err}");
            assert!(sol.indicators.total() < 1e-10, "{dirichlet:?} p={p}");
        }
    }
}

#[test]
fn initial_rate_vanishes_for_steady_and_zero_data() {
    let steady = problems::steady_linear(Mode::Spatial).unwrap();
    let ring = problems::rotating_ring(500.0).unwrap();
    for spec in [steady, ring] {
        for p in [1, 2] {
            let s = GenAlphaSolver::new(
                &spec,
                mesh(&spec, 4),
                &ga(p, 0.5, 0.05, DirichletMode::Weak),
            )
            .unwrap();
            let (state, _, d) = s.initial_data().unwrap();
            let worst = state.theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(worst < 1e-8, "{} p={p}: {worst}", spec.name);
            assert!(d.orthogonality_ratio() < 1e-9);
        }
    }
}

#[test]
fn linear_in_time_solution_is_stepped_exactly() {
    let spec = problems::time_polynomial(Mode::Spatial, 1).unwrap();
    for dirichlet in [DirichletMode::Weak, DirichletMode::Strong] {
        for rho in [0.0, 0.5, 1.0] {
            let s =
                GenAlphaSolver::new(&spec, mesh(&spec, 3), &ga(1, rho, 0.1, dirichlet)).unwrap();
            let (mut state, _, _) = s.initial_data().unwrap();
            for _ in 0..5 {
                state = s.step(&state).unwrap().0;
                let err = state
                    .u
                    .iter()
                    .fold(0.0f64, |m, u| m.max((u - state.t).abs()));
                assert!(err < 1e-8, "{dirichlet:?} rho={rho} t={}: {err}", state.t);
            }
        }
    }
}

#[test]
fn quadratic_in_time_error_is_second_order() {
    let spec = problems::time_polynomial(Mode::Spatial, 2).unwrap();
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&tau| {
            let s =
                GenAlphaSolver::new(&spec, mesh(&spec, 2), &ga(1, 0.5, tau, DirichletMode::Weak))
                    .unwrap();
            let state = s.march(1.0, false, |_| {}).unwrap();
            s.errors(&state).unwrap().l2_u
        })
        .collect();
    for w in errors.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 2.0).abs() < 0.2, "{errors:?}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = problems::eriksson_johnson_1d(0.1).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let sol =
                solve_spacetime(&spec, mesh(&spec, 8), &st(2, DirichletMode::Weak, false)).unwrap();
            (sol.u.coeffs().to_vec(), sol.indicators.eta.clone())
        })
    };
    let (u1, e1) = run(1);
    let (u4, e4) = run(4);
    assert_eq!(u1, u4);
    assert_eq!(e1, e4);
}
