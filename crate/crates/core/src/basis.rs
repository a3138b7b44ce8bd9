//! Lagrange bases on the reference triangle.
//!
//! Nodes sit on the equispaced barycentric lattice. Local ordering: the three
//! vertices, then the `p - 1` interior nodes of local edges 0, 1, 2 (each
//! listed from its first to its second endpoint, edge `i` running from vertex
//! `i+1` to vertex `i+2`), then the element-interior nodes.

use alloc::vec::Vec;

use crate::error::{invalid, Result};

pub const MAX_DEGREE: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangeBasis {
    degree: usize,
    /// Barycentric multi-indices `(a0, a1, a2)` with `a0 + a1 + a2 = degree`.
    nodes: Vec<[usize; 3]>,
}

/// Values and reference gradients of every basis function at a set of points,
/// stored point-major (`[point * n + function]`).
#[derive(Clone, Debug, PartialEq)]
pub struct BasisTable {
    pub n_functions: usize,
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
}

impl BasisTable {
    #[inline]
    pub fn value(&self, point: usize, function: usize) -> f64 {
        self.values[point * self.n_functions + function]
    }

    #[inline]
    pub fn gradient(&self, point: usize, function: usize) -> [f64; 2] {
        self.gradients[point * self.n_functions + function]
    }

    pub fn n_points(&self) -> usize {
        if self.n_functions == 0 {
            0
        } else {
            self.values.len() / self.n_functions
        }
    }
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(invalid!(
                "unsupported polynomial degree {degree} (supported 1..={MAX_DEGREE})"
            ));
        }
        let p = degree;
        let mut nodes = Vec::new();
        nodes.push([p, 0, 0]);
        nodes.push([0, p, 0]);
        nodes.push([0, 0, p]);
        // edge 0: v1 -> v2
        for j in 1..p {
            nodes.push([0, p - j, j]);
        }
        // edge 1: v2 -> v0
        for j in 1..p {
            nodes.push([j, 0, p - j]);
        }
        // edge 2: v0 -> v1
        for j in 1..p {
            nodes.push([p - j, j, 0]);
        }
        for a1 in 1..p {
            for a2 in 1..p {
                if a1 + a2 < p {
                    nodes.push([p - a1 - a2, a1, a2]);
                }
            }
        }
        Ok(Self { degree, nodes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes strictly inside each edge.
    pub fn nodes_per_edge(&self) -> usize {
        self.degree - 1
    }

    /// Number of nodes strictly inside the triangle.
    pub fn interior_nodes(&self) -> usize {
        self.len() - 3 - 3 * self.nodes_per_edge()
    }

    /// Reference coordinates of the local nodes.
    pub fn node_points(&self) -> Vec<[f64; 2]> {
        let p = self.degree as f64;
        self.nodes
            .iter()
            .map(|a| [a[1] as f64 / p, a[2] as f64 / p])
            .collect()
    }

    /// Values and reference gradients at `xi`, written into the output slices.
    pub fn eval_into(&self, xi: [f64; 2], values: &mut [f64], gradients: &mut [[f64; 2]]) {
        let p = self.degree;
        let lambda = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
        // d(lambda_k)/d(xi, eta)
        const DL: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        // factor(k, a) = prod_{m<a} (p λ_k - m) / (m + 1) and its λ-derivative
        let factor = |k: usize, a: usize| -> (f64, f64) {
            let s = p as f64 * lambda[k];
            let mut val = 1.0;
            let mut der = 0.0;
            for m in 0..a {
                let c = 1.0 / (m as f64 + 1.0);
                let term = (s - m as f64) * c;
                der = der * term + val * p as f64 * c;
                val *= term;
            }
            (val, der)
        };
        for (i, a) in self.nodes.iter().enumerate() {
            let f: [(f64, f64); 3] = [factor(0, a[0]), factor(1, a[1]), factor(2, a[2])];
            values[i] = f[0].0 * f[1].0 * f[2].0;
            let mut g = [0.0; 2];
            for k in 0..3 {
                let others: f64 = (0..3).filter(|&j| j != k).map(|j| f[j].0).product();
                let d = f[k].1 * others;
                g[0] += d * DL[k][0];
                g[1] += d * DL[k][1];
            }
            gradients[i] = g;
        }
    }

    pub fn eval(&self, xi: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let mut v = alloc::vec![0.0; self.len()];
        let mut g = alloc::vec![[0.0; 2]; self.len()];
        self.eval_into(xi, &mut v, &mut g);
        (v, g)
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> BasisTable {
        let n = self.len();
        let mut values = alloc::vec![0.0; n * points.len()];
        let mut gradients = alloc::vec![[0.0; 2]; n * points.len()];
        for (q, &xi) in points.iter().enumerate() {
            self.eval_into(
                xi,
                &mut values[q * n..(q + 1) * n],
                &mut gradients[q * n..(q + 1) * n],
            );
        }
        BasisTable {
            n_functions: n,
            values,
            gradients,
        }
    }
}

/// Reference coordinates of the point at parameter `s ∈ [0, 1]` on local edge `edge`.
#[inline]
pub fn edge_point(edge: usize, s: f64) -> [f64; 2] {
    match edge {
        0 => [1.0 - s, s],
        1 => [0.0, 1.0 - s],
        2 => [s, 0.0],
        _ => panic!("local edge index {edge} out of range"),
    }
}
