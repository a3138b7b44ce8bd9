//! Conforming triangle meshes with boundary roles and newest-vertex bisection.
//!
//! Every triangle is stored so that local vertex 0 is its newest vertex and
//! local edge 0 (the edge `v1–v2`, opposite vertex 0) is its refinement edge.
//! Local edge `i` always denotes the edge opposite local vertex `i`, traversed
//! from vertex `i+1` to vertex `i+2` (counter-clockwise).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;

/// Role of a mesh edge with respect to the boundary conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    /// Dirichlet data imposed on `u` (weakly by default).
    Inflow,
    /// Neumann data imposed on the normal flux.
    Outflow,
    /// `t = t_min` edge of a space-time mesh; `u` is constrained to the initial data.
    InitialTime,
    /// `t = t_max` edge of a space-time mesh; no condition.
    FinalTime,
    /// Edge shared by two triangles.
    Interior,
}

impl BoundaryTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Inflow => "inflow",
            BoundaryTag::Outflow => "outflow",
            BoundaryTag::InitialTime => "initial_time",
            BoundaryTag::FinalTime => "final_time",
            BoundaryTag::Interior => "interior",
        }
    }
}

/// Tagging rule for the four sides of an axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryRoles {
    pub left: BoundaryTag,
    pub right: BoundaryTag,
    pub bottom: BoundaryTag,
    pub top: BoundaryTag,
}

impl BoundaryRoles {
    /// Dirichlet data on every side.
    pub fn dirichlet() -> Self {
        Self {
            left: BoundaryTag::Inflow,
            right: BoundaryTag::Inflow,
            bottom: BoundaryTag::Inflow,
            top: BoundaryTag::Inflow,
        }
    }

    /// Space-time slab in `(x, t)`: bottom is the initial time, top the final time.
    pub fn space_time(left: BoundaryTag, right: BoundaryTag) -> Self {
        Self {
            left,
            right,
            bottom: BoundaryTag::InitialTime,
            top: BoundaryTag::FinalTime,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints, sorted ascending.
    pub vertices: [usize; 2],
    /// Adjacent triangles; the second slot is empty on the boundary.
    pub triangles: [Option<usize>; 2],
    pub tag: BoundaryTag,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    triangle_edges: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    parents: Vec<usize>,
}

/// Affine geometry of one triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementGeometry {
    pub vertices: [[f64; 2]; 3],
    /// Columns are `v1 - v0` and `v2 - v0`; indexed `[row][col]`.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    pub inv_jacobian_t: [[f64; 2]; 2],
    pub area: f64,
    /// Longest edge length.
    pub diameter: f64,
    pub edge_lengths: [f64; 3],
    /// Outward unit normals of the local edges.
    pub normals: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(vertices: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let jacobian = [
            [p1[0] - p0[0], p2[0] - p0[0]],
            [p1[1] - p0[1], p2[1] - p0[1]],
        ];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        let inv_jacobian_t = [
            [jacobian[1][1] / det, -jacobian[1][0] / det],
            [-jacobian[0][1] / det, jacobian[0][0] / det],
        ];
        let mut edge_lengths = [0.0; 3];
        let mut normals = [[0.0; 2]; 3];
        for i in 0..3 {
            let a = vertices[(i + 1) % 3];
            let b = vertices[(i + 2) % 3];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = math::hypot(dx, dy);
            edge_lengths[i] = len;
            normals[i] = [dy / len, -dx / len];
        }
        let diameter = edge_lengths.iter().cloned().fold(0.0, f64::max);
        Self {
            vertices,
            jacobian,
            det,
            inv_jacobian_t,
            area: 0.5 * det,
            diameter,
            edge_lengths,
            normals,
        }
    }

    /// Reference point `(ξ, η)` to physical coordinates.
    #[inline]
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let p0 = self.vertices[0];
        [
            p0[0] + self.jacobian[0][0] * xi[0] + self.jacobian[0][1] * xi[1],
            p0[1] + self.jacobian[1][0] * xi[0] + self.jacobian[1][1] * xi[1],
        ]
    }

    /// Physical point to reference coordinates (inverse affine map).
    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let p0 = self.vertices[0];
        let d = [x[0] - p0[0], x[1] - p0[1]];
        // J⁻¹ = (J⁻ᵀ)ᵀ
        let it = self.inv_jacobian_t;
        [
            it[0][0] * d[0] + it[1][0] * d[1],
            it[0][1] * d[0] + it[1][1] * d[1],
        ]
    }

    /// Maps a reference gradient to a physical gradient.
    #[inline]
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let it = self.inv_jacobian_t;
        [
            it[0][0] * g[0] + it[0][1] * g[1],
            it[1][0] * g[0] + it[1][1] * g[1],
        ]
    }
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn sorted(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])
}

/// Rotates a triangle so that its longest edge is local edge 0.
/// Ties between equally long edges go to the edge with the lowest vertex pair.
fn rotate_to_longest_edge(vertices: &[[f64; 2]], tri: [usize; 3]) -> [usize; 3] {
    let mut best = 0;
    let len = |i: usize| dist2(vertices[tri[(i + 1) % 3]], vertices[tri[(i + 2) % 3]]);
    let key = |i: usize| sorted(tri[(i + 1) % 3], tri[(i + 2) % 3]);
    for i in 1..3 {
        let (li, lb) = (len(i), len(best));
        let tol = 1e-12 * li.max(lb);
        if li > lb + tol || (math::abs(li - lb) <= tol && key(i) < key(best)) {
            best = i;
        }
    }
    [tri[best], tri[(best + 1) % 3], tri[(best + 2) % 3]]
}

impl Mesh {
    /// Builds a mesh from raw parts.
    ///
    /// Triangles must be positively oriented. Every boundary edge needs a
    /// non-interior tag in `tags` (keyed by the sorted vertex pair). Each
    /// triangle is rotated so that its longest edge becomes the refinement edge.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        tags: &BTreeMap<[usize; 2], BoundaryTag>,
    ) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(alloc::format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(a > 0.0) {
                return Err(Error::InvalidMesh(alloc::format!(
                    "triangle {t} is not positively oriented (signed area {a})"
                )));
            }
        }
        let triangles: Vec<[usize; 3]> = triangles
            .into_iter()
            .map(|tri| rotate_to_longest_edge(&vertices, tri))
            .collect();
        let parents = (0..triangles.len()).collect();
        Self::from_oriented(vertices, triangles, tags, parents)
    }

    fn from_oriented(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        tags: &BTreeMap<[usize; 2], BoundaryTag>,
        parents: Vec<usize>,
    ) -> Result<Self> {
        let mut lookup: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for (i, slot) in te.iter_mut().enumerate() {
                let key = sorted(tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: key,
                        triangles: [None, None],
                        tag: BoundaryTag::Interior,
                    });
                    edges.len() - 1
                });
                let edge = &mut edges[id];
                match edge.triangles {
                    [None, _] => edge.triangles[0] = Some(t),
                    [Some(_), None] => edge.triangles[1] = Some(t),
                    _ => {
                        return Err(Error::InvalidMesh(alloc::format!(
                            "edge {key:?} is shared by more than two triangles"
                        )))
                    }
                }
                *slot = id;
            }
            triangle_edges.push(te);
        }
        for edge in edges.iter_mut() {
            let tag = tags.get(&edge.vertices).copied();
            if edge.is_boundary() {
                match tag {
                    Some(BoundaryTag::Interior) | None => {
                        return Err(Error::InvalidMesh(alloc::format!(
                            "boundary edge {:?} has no boundary tag",
                            edge.vertices
                        )))
                    }
                    Some(tag) => edge.tag = tag,
                }
            } else if matches!(tag, Some(t) if t != BoundaryTag::Interior) {
                return Err(Error::InvalidMesh(alloc::format!(
                    "interior edge {:?} carries a boundary tag",
                    edge.vertices
                )));
            }
        }
        Ok(Self {
            vertices,
            triangles,
            triangle_edges,
            edges,
            parents,
        })
    }

    /// Structured mesh of `[x0, x1] × [y0, y1]` with `2·nx·ny` triangles.
    pub fn rectangle(
        bounds: [[f64; 2]; 2],
        nx: usize,
        ny: usize,
        roles: BoundaryRoles,
    ) -> Result<Self> {
        let [[x0, x1], [y0, y1]] = bounds;
        if nx == 0 || ny == 0 {
            return Err(invalid!(
                "rectangle mesh needs nx, ny >= 1 (got {nx}, {ny})"
            ));
        }
        if !(x1 > x0) || !(y1 > y0) {
            return Err(invalid!("degenerate bounds {bounds:?}"));
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let x = if i == nx {
                    x1
                } else {
                    x0 + (x1 - x0) * i as f64 / nx as f64
                };
                let y = if j == ny {
                    y1
                } else {
                    y0 + (y1 - y0) * j as f64 / ny as f64
                };
                vertices.push([x, y]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        let mut tags = BTreeMap::new();
        for i in 0..nx {
            tags.insert(sorted(idx(i, 0), idx(i + 1, 0)), roles.bottom);
            tags.insert(sorted(idx(i, ny), idx(i + 1, ny)), roles.top);
        }
        for j in 0..ny {
            tags.insert(sorted(idx(0, j), idx(0, j + 1)), roles.left);
            tags.insert(sorted(idx(nx, j), idx(nx, j + 1)), roles.right);
        }
        Self::new(vertices, triangles, &tags)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Global edge ids of the local edges of `tri` (edge `i` opposite vertex `i`).
    pub fn triangle_edges(&self, tri: usize) -> [usize; 3] {
        self.triangle_edges[tri]
    }

    /// Global id of the refinement edge of `tri`.
    pub fn refinement_edge(&self, tri: usize) -> usize {
        self.triangle_edges[tri][0]
    }

    /// For every triangle, the id of the triangle it was cut from in the
    /// previous mesh (the identity for a freshly built mesh).
    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn geometry(&self, tri: usize) -> ElementGeometry {
        let [a, b, c] = self.triangles[tri];
        ElementGeometry::new([self.vertices[a], self.vertices[b], self.vertices[c]])
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| self.geometry(t).diameter)
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.geometry(t).area).sum()
    }

    /// Axis-aligned bounding box `[[xmin, xmax], [ymin, ymax]]`.
    pub fn bounding_box(&self) -> [[f64; 2]; 2] {
        let mut bb = [
            [f64::INFINITY, f64::NEG_INFINITY],
            [f64::INFINITY, f64::NEG_INFINITY],
        ];
        for v in &self.vertices {
            for d in 0..2 {
                bb[d][0] = bb[d][0].min(v[d]);
                bb[d][1] = bb[d][1].max(v[d]);
            }
        }
        bb
    }

    /// Audits the structural invariants: positive orientation, one or two
    /// triangles per edge, boundary tags exactly on the boundary, and no
    /// vertex lying in the interior of another triangle's edge.
    pub fn check_conformity(&self) -> Result<()> {
        for t in 0..self.n_triangles() {
            let g = self.geometry(t);
            if !(g.area > 0.0) {
                return Err(Error::InvalidMesh(alloc::format!(
                    "triangle {t} has non-positive area"
                )));
            }
        }
        for e in &self.edges {
            let boundary_tag = e.tag != BoundaryTag::Interior;
            if e.is_boundary() != boundary_tag {
                return Err(Error::InvalidMesh(alloc::format!(
                    "edge {:?} tag/adjacency mismatch",
                    e.vertices
                )));
            }
        }
        // Bisection places new vertices at exact edge midpoints, so a hanging
        // node shows up as a used vertex sitting bit-exactly on a midpoint.
        let mut used = vec![false; self.n_vertices()];
        for tri in &self.triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        let by_coords: BTreeMap<[u64; 2], usize> = self
            .vertices
            .iter()
            .enumerate()
            .filter(|(v, _)| used[*v])
            .map(|(v, x)| ([x[0].to_bits(), x[1].to_bits()], v))
            .collect();
        for e in &self.edges {
            let (a, b) = (self.vertices[e.vertices[0]], self.vertices[e.vertices[1]]);
            let mid = [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
            if let Some(v) = by_coords.get(&[mid[0].to_bits(), mid[1].to_bits()]) {
                return Err(Error::InvalidMesh(alloc::format!(
                    "hanging node {v} on edge {:?}",
                    e.vertices
                )));
            }
        }
        Ok(())
    }

    /// Newest-vertex bisection of the marked triangles plus the conforming
    /// closure. The result records, for each new triangle, its parent id in
    /// `self`.
    pub fn bisect(&self, marked: &[usize]) -> Result<Mesh> {
        if let Some(&bad) = marked.iter().find(|&&t| t >= self.n_triangles()) {
            return Err(invalid!("marked triangle {bad} out of range"));
        }
        if marked.is_empty() {
            let mut out = self.clone();
            out.parents = (0..self.n_triangles()).collect();
            return Ok(out);
        }
        let mut marked_edge = vec![false; self.n_edges()];
        for &t in marked {
            marked_edge[self.refinement_edge(t)] = true;
        }
        // closure: a triangle with any marked edge must also split its refinement edge
        loop {
            let mut changed = false;
            for t in 0..self.n_triangles() {
                let te = self.triangle_edges[t];
                if !marked_edge[te[0]] && (marked_edge[te[1]] || marked_edge[te[2]]) {
                    marked_edge[te[0]] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut vertices = self.vertices.clone();
        let mut midpoint = vec![usize::MAX; self.n_edges()];
        for (e, edge) in self.edges.iter().enumerate() {
            if marked_edge[e] {
                let (a, b) = (
                    self.vertices[edge.vertices[0]],
                    self.vertices[edge.vertices[1]],
                );
                midpoint[e] = vertices.len();
                vertices.push([(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5]);
            }
        }
        let lookup: BTreeMap<[usize; 2], usize> = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.vertices, i))
            .collect();

        let mut triangles = Vec::with_capacity(self.n_triangles() + 2 * marked.len());
        let mut parents = Vec::with_capacity(triangles.capacity());
        let mut stack = Vec::new();
        for (t, &tri) in self.triangles.iter().enumerate() {
            stack.push(tri);
            while let Some([v0, v1, v2]) = stack.pop() {
                match lookup.get(&sorted(v1, v2)) {
                    Some(&e) if marked_edge[e] => {
                        let m = midpoint[e];
                        stack.push([m, v2, v0]);
                        stack.push([m, v0, v1]);
                    }
                    _ => {
                        triangles.push([v0, v1, v2]);
                        parents.push(t);
                    }
                }
            }
        }

        let mut tags = BTreeMap::new();
        for (e, edge) in self.edges.iter().enumerate() {
            if !edge.is_boundary() {
                continue;
            }
            let [a, b] = edge.vertices;
            if marked_edge[e] {
                let m = midpoint[e];
                tags.insert(sorted(a, m), edge.tag);
                tags.insert(sorted(m, b), edge.tag);
            } else {
                tags.insert(edge.vertices, edge.tag);
            }
        }
        Self::from_oriented(vertices, triangles, &tags, parents)
    }

    /// Bisects every triangle once.
    pub fn refine_uniform(&self) -> Result<Mesh> {
        let all: Vec<usize> = (0..self.n_triangles()).collect();
        self.bisect(&all)
    }

    /// Locates the triangle containing `x`, if any (linear scan).
    pub fn locate(&self, x: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let tol = 1e-12;
        for t in 0..self.n_triangles() {
            let g = self.geometry(t);
            let xi = g.to_reference(x);
            if xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol {
                return Some((t, xi));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> Mesh {
        Mesh::rectangle([[0.0, 1.0], [0.0, 1.0]], n, n, BoundaryRoles::dirichlet()).unwrap()
    }

    #[test]
    fn minimal_square() {
        let m = unit_square(1);
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.edges().iter().filter(|e| e.is_boundary()).count(), 4);
        m.check_conformity().unwrap();
    }

    #[test]
    fn counts_on_shifted_box() {
        let m =
            Mesh::rectangle([[-1.0, 0.0], [0.0, 1.0]], 2, 2, BoundaryRoles::dirichlet()).unwrap();
        assert_eq!(m.n_triangles(), 8);
        assert_eq!(m.n_vertices(), 9);
    }

    #[test]
    fn bottom_edges_tagged_initial_time() {
        let roles = BoundaryRoles::space_time(BoundaryTag::Inflow, BoundaryTag::Outflow);
        let m = Mesh::rectangle([[-1.0, 0.0], [0.0, 1.0]], 3, 4, roles).unwrap();
        for e in m.edges() {
            let (a, b) = (m.vertices()[e.vertices[0]], m.vertices()[e.vertices[1]]);
            if a[1] == 0.0 && b[1] == 0.0 {
                assert_eq!(e.tag, BoundaryTag::InitialTime);
            }
            if e.tag == BoundaryTag::InitialTime {
                assert!(a[1] == 0.0 && b[1] == 0.0);
            }
        }
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(
            Mesh::rectangle([[0.0, 0.0], [0.0, 1.0]], 1, 1, BoundaryRoles::dirichlet()).is_err()
        );
        assert!(
            Mesh::rectangle([[0.0, 1.0], [0.0, 1.0]], 0, 1, BoundaryRoles::dirichlet()).is_err()
        );
    }

    #[test]
    fn clockwise_triangle_rejected() {
        let mut tags = BTreeMap::new();
        tags.insert([0, 1], BoundaryTag::Inflow);
        tags.insert([1, 2], BoundaryTag::Inflow);
        tags.insert([0, 2], BoundaryTag::Inflow);
        let r = Mesh::new(
            vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
            vec![[0, 1, 2]],
            &tags,
        );
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn geometry_of_reference_triangles() {
        let g = ElementGeometry::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
        assert!((g.area - 0.5).abs() < 1e-15);
        let g = ElementGeometry::new([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]);
        assert!((g.diameter - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((g.area - 2.0).abs() < 1e-14);
        let mut s = [0.0; 2];
        for i in 0..3 {
            s[0] += g.edge_lengths[i] * g.normals[i][0];
            s[1] += g.edge_lengths[i] * g.normals[i][1];
        }
        assert!(s[0].abs() < 1e-14 && s[1].abs() < 1e-14);
    }

    #[test]
    fn reference_map_round_trip() {
        let g = ElementGeometry::new([[0.3, -0.2], [1.1, 0.4], [-0.1, 0.9]]);
        let xi = [0.25, 0.6];
        let back = g.to_reference(g.map(xi));
        assert!((back[0] - xi[0]).abs() < 1e-14 && (back[1] - xi[1]).abs() < 1e-14);
    }

    #[test]
    fn refinement_edge_is_longest() {
        let m = unit_square(3);
        for t in 0..m.n_triangles() {
            let g = m.geometry(t);
            assert!((g.edge_lengths[0] - g.diameter).abs() < 1e-14);
        }
    }

    #[test]
    fn two_uniform_rounds_give_eight() {
        let m = unit_square(1)
            .refine_uniform()
            .unwrap()
            .refine_uniform()
            .unwrap();
        assert_eq!(m.n_triangles(), 8);
        m.check_conformity().unwrap();
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = unit_square(2);
        let r = m.bisect(&[]).unwrap();
        assert_eq!(r.vertices(), m.vertices());
        assert_eq!(r.triangles(), m.triangles());
    }

    #[test]
    fn single_mark_on_two_triangle_square() {
        // Both triangles share the diagonal as refinement edge, so the closure
        // bisects the neighbour too: 4 triangles, one new vertex.
        for t in 0..2 {
            let r = unit_square(1).bisect(&[t]).unwrap();
            assert!(r.n_triangles() == 3 || r.n_triangles() == 4);
            assert_eq!(r.n_triangles(), 4);
            assert_eq!(r.n_vertices(), 5);
            r.check_conformity().unwrap();
        }
    }

    #[test]
    fn children_shrink_and_tags_inherit() {
        let m = unit_square(2);
        let r = m.bisect(&[0, 5]).unwrap();
        r.check_conformity().unwrap();
        let mut children = vec![0usize; m.n_triangles()];
        for &p in r.parents() {
            children[p] += 1;
        }
        for (t, &p) in r.parents().iter().enumerate() {
            if children[p] > 1 {
                assert!(r.geometry(t).diameter < m.geometry(p).diameter);
            }
        }
        assert!((r.total_area() - 1.0).abs() < 1e-12);
        for e in r.edges().iter().filter(|e| e.is_boundary()) {
            assert_eq!(e.tag, BoundaryTag::Inflow);
        }
    }
}
