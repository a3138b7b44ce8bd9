//! Gauss quadrature on the unit interval and the reference triangle
//! `{(ξ, η) : ξ, η ≥ 0, ξ + η ≤ 1}`.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRule {
    /// Parameters in `[0, 1]`.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and P_n'(z)
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if math::abs(dz) < 1e-16 {
                break;
            }
        }
        x.push(z);
        w.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

/// Gauss rule on `[0, 1]` exact for polynomials of degree `order`.
pub fn edge_quadrature(order: usize) -> Result<EdgeRule> {
    if order == 0 {
        return Err(invalid!("quadrature order must be >= 1"));
    }
    let n = order / 2 + 1;
    let (x, w) = gauss_legendre(n);
    Ok(EdgeRule {
        points: x.iter().map(|z| 0.5 * (z + 1.0)).collect(),
        weights: w.iter().map(|w| 0.5 * w).collect(),
    })
}

/// Collapsed (Duffy) Gauss rule on the reference triangle exact for
/// polynomials of total degree `order`. Weights sum to 1/2.
pub fn triangle_quadrature(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(invalid!("quadrature order must be >= 1"));
    }
    // Under (u, v) ↦ (u(1 - v), v) a degree-k polynomial becomes degree k in u
    // and k + 1 in v (Jacobian 1 - v).
    let n = (order + 1) / 2 + 1;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (xv, wv) in x.iter().zip(&w) {
        let v = 0.5 * (xv + 1.0);
        for (xu, wu) in x.iter().zip(&w) {
            let u = 0.5 * (xu + 1.0);
            points.push([u * (1.0 - v), v]);
            weights.push(0.25 * wu * wv * (1.0 - v));
        }
    }
    Ok(QuadratureRule { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: &QuadratureRule, f: impl Fn(f64, f64) -> f64) -> f64 {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }

    // ∫_T ξ^a η^b = a! b! / (a + b + 2)!
    fn monomial_exact(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn basic_integrals() {
        let r = triangle_quadrature(2).unwrap();
        assert!((integrate(&r, |_, _| 1.0) - 0.5).abs() < 1e-15);
        assert!((integrate(&r, |x, _| x) - 1.0 / 6.0).abs() < 1e-15);
        let e = edge_quadrature(2).unwrap();
        let s: f64 = e
            .points
            .iter()
            .zip(&e.weights)
            .map(|(x, w)| w * x * x)
            .sum();
        assert!((s - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_requested_order() {
        for order in 1..=10u32 {
            let r = triangle_quadrature(order as usize).unwrap();
            for a in 0..=order {
                for b in 0..=(order - a) {
                    let q = integrate(&r, |x, y| x.powi(a as i32) * y.powi(b as i32));
                    let exact = monomial_exact(a, b);
                    assert!((q - exact).abs() < 1e-14, "order {order} monomial {a},{b}");
                }
            }
            let e = edge_quadrature(order as usize).unwrap();
            for a in 0..=order {
                let q: f64 = e
                    .points
                    .iter()
                    .zip(&e.weights)
                    .map(|(x, w)| w * x.powi(a as i32))
                    .sum();
                assert!((q - 1.0 / (a as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_order_rejected() {
        assert!(triangle_quadrature(0).is_err());
        assert!(edge_quadrature(0).is_err());
    }
}
