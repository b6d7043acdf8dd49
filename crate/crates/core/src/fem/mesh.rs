use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::singular::u_sing;
use crate::tensor::Vec2;

/// Largest node count `mesh_disk` will build.
pub const MAX_NODES: usize = 5_000_000;

/// Triangulation of the unit disk by concentric rings of `6k` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskMesh {
    pub nodes: Vec<Vec2<f64>>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// Longest edge.
    pub h: f64,
}

/// Node values of a P1 field on a [`DiskMesh`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    pub values: Vec<Vec2<f64>>,
}

fn ring_start(k: usize) -> usize {
    // nodes before ring k (k >= 1) when the origin node is present
    1 + 3 * k * (k - 1)
}

/// Structured polar triangulation: ring `k` (radius `k/n`, `n = ceil(1/h)`)
/// carries `6k` nodes; consecutive rings are stitched by merging their
/// angles. With `origin_node` the first ring is fanned around a node at
/// the origin; otherwise the first hexagon is split along diagonals and the
/// origin lies on an interior edge. In both cases no interior quadrature
/// point of any triangle is the origin.
pub fn mesh_disk(h: f64, origin_node: bool) -> Result<DiskMesh> {
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::usage(format!("mesh size must lie in (0, 0.5), got {h}")));
    }
    let n = (1.0 / h).ceil() as usize;
    let total = 1 + 3 * n * (n + 1);
    if total > MAX_NODES {
        return Err(Error::Resource(format!("mesh with h = {h} needs {total} nodes (limit {MAX_NODES})")));
    }
    let mut nodes = vec![Vec2::zero()];
    let mut boundary = vec![false];
    for k in 1..=n {
        let r = k as f64 / n as f64;
        for j in 0..6 * k {
            let t = 2.0 * PI * j as f64 / (6 * k) as f64;
            let x = if k == n { Vec2::new(t.cos(), t.sin()) } else { Vec2::new(r * t.cos(), r * t.sin()) };
            nodes.push(x);
            boundary.push(k == n);
        }
    }
    let mut triangles = Vec::with_capacity(6 * n * n);
    let first = ring_start(1);
    if origin_node {
        for j in 0..6 {
            triangles.push([0, first + j, first + (j + 1) % 6]);
        }
    } else {
        for j in 1..5 {
            triangles.push([first, first + j, first + j + 1]);
        }
    }
    for k in 1..n {
        stitch(&nodes, ring_start(k), 6 * k, ring_start(k + 1), 6 * (k + 1), &mut triangles);
    }
    let mut mesh = DiskMesh { nodes, triangles, boundary, h: 0.0 };
    if !origin_node {
        mesh = mesh.without_node(0);
    }
    mesh.h = mesh.longest_edge();
    Ok(mesh)
}

fn stitch(nodes: &[Vec2<f64>], inner: usize, n_in: usize, outer: usize, n_out: usize, tris: &mut Vec<[usize; 3]>) {
    let angle = |j: usize, n: usize| 2.0 * PI * j as f64 / n as f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < n_in || j < n_out {
        let a = inner + i % n_in;
        let b = outer + j % n_out;
        let advance_inner = if i == n_in {
            false
        } else if j == n_out {
            true
        } else {
            angle(i + 1, n_in) < angle(j + 1, n_out) - 1e-12
        };
        let tri = if advance_inner {
            i += 1;
            [a, b, inner + i % n_in]
        } else {
            j += 1;
            [a, b, outer + j % n_out]
        };
        tris.push(orient(nodes, tri));
    }
}

fn signed_area(nodes: &[Vec2<f64>], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
    0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()))
}

fn orient(nodes: &[Vec2<f64>], t: [usize; 3]) -> [usize; 3] {
    if signed_area(nodes, &t) < 0.0 {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

impl DiskMesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.nodes, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        let areas: Vec<f64> = (0..self.triangles.len()).map(|t| self.area(t)).collect();
        crate::sum::pairwise(&areas)
    }

    /// Exact area of the inscribed boundary polygon.
    pub fn polygon_area(&self) -> f64 {
        let nb = self.boundary.iter().filter(|b| **b).count() as f64;
        0.5 * nb * (2.0 * PI / nb).sin()
    }

    fn longest_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |e| (t[e], t[(e + 1) % 3])))
            .map(|(a, b)| (self.nodes[a] - self.nodes[b]).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut best = 180.0f64;
        for t in &self.triangles {
            for e in 0..3 {
                let a = self.nodes[t[e]];
                let u = self.nodes[t[(e + 1) % 3]] - a;
                let v = self.nodes[t[(e + 2) % 3]] - a;
                let cos = (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0);
                best = best.min(cos.acos().to_degrees());
            }
        }
        best
    }

    /// Checks orientation, shape, boundary placement and conformity.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Internal(m));
        if self.boundary.len() != self.nodes.len() {
            return bad("boundary flags do not match node count".into());
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.nodes.len()) {
                return bad(format!("triangle {t} references a missing node"));
            }
            if self.area(t) <= 0.0 {
                return bad(format!("triangle {t} is not positively oriented"));
            }
        }
        let min_angle = self.min_angle_deg();
        if min_angle <= 15.0 {
            return bad(format!("minimum angle {min_angle:.2} deg is below 15 deg"));
        }
        for (x, b) in self.nodes.iter().zip(&self.boundary) {
            if *b && (x.norm() - 1.0).abs() > 1e-12 {
                return bad(format!("boundary node {x:?} is off the unit circle"));
            }
        }
        let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += if a < b { 1 } else { -1 };
            }
        }
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        for (edge, c) in &count {
            let on_boundary = self.boundary[edge.0] && self.boundary[edge.1];
            match (c, on_boundary) {
                (1, true) => {}
                (2, _) if edges[edge] == 0 => {}
                _ => return bad(format!("edge {edge:?} is shared inconsistently ({c} triangles)")),
            }
        }
        Ok(())
    }

    /// Renumbers nodes: new node `k` is old node `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> DiskMesh {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        DiskMesh {
            nodes: perm.iter().map(|&o| self.nodes[o]).collect(),
            boundary: perm.iter().map(|&o| self.boundary[o]).collect(),
            triangles: self.triangles.iter().map(|t| t.map(|v| inverse[v])).collect(),
            h: self.h,
        }
    }

    fn without_node(&self, drop: usize) -> DiskMesh {
        let perm: Vec<usize> = (0..self.nodes.len()).filter(|&k| k != drop).collect();
        let mut inverse = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        DiskMesh {
            nodes: perm.iter().map(|&o| self.nodes[o]).collect(),
            boundary: perm.iter().map(|&o| self.boundary[o]).collect(),
            triangles: self.triangles.iter().map(|t| t.map(|v| inverse[v])).collect(),
            h: self.h,
        }
    }

    /// Text dump with `NODES` and `TRIANGLES` sections.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "NODES {}", self.nodes.len()).unwrap();
        for (k, (x, b)) in self.nodes.iter().zip(&self.boundary).enumerate() {
            writeln!(out, "{k} {:.16e} {:.16e} {}", x.x(), x.y(), u8::from(*b)).unwrap();
        }
        writeln!(out, "TRIANGLES {}", self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<DiskMesh> {
        let perr = |line: usize, msg: &str| Error::Parse(format!("mesh line {line}: {msg}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let header = |lines: &mut dyn Iterator<Item = (usize, &str)>, name: &str| -> Result<usize> {
            let (n, l) = lines.next().ok_or_else(|| Error::Parse(format!("missing {name} section")))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(name) {
                return Err(perr(n + 1, &format!("expected {name} header")));
            }
            it.next()
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| perr(n + 1, "missing section count"))
        };
        let n_nodes = header(&mut lines, "NODES")?;
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut boundary = Vec::with_capacity(n_nodes);
        for k in 0..n_nodes {
            let (n, l) = lines.next().ok_or_else(|| Error::Parse("truncated NODES section".into()))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 || f[0].parse::<usize>().ok() != Some(k) {
                return Err(perr(n + 1, "expected: index x y boundary"));
            }
            let x: f64 = f[1].parse().map_err(|_| perr(n + 1, "bad x"))?;
            let y: f64 = f[2].parse().map_err(|_| perr(n + 1, "bad y"))?;
            nodes.push(Vec2::new(x, y));
            boundary.push(match f[3] {
                "0" => false,
                "1" => true,
                _ => return Err(perr(n + 1, "boundary flag must be 0 or 1")),
            });
        }
        let n_tris = header(&mut lines, "TRIANGLES")?;
        let mut triangles = Vec::with_capacity(n_tris);
        for _ in 0..n_tris {
            let (n, l) = lines.next().ok_or_else(|| Error::Parse("truncated TRIANGLES section".into()))?;
            let f: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| perr(n + 1, "bad triangle index"))?;
            if f.len() != 3 || f.iter().any(|&v| v >= n_nodes) {
                return Err(perr(n + 1, "expected three valid node indices"));
            }
            triangles.push([f[0], f[1], f[2]]);
        }
        let mut mesh = DiskMesh { nodes, triangles, boundary, h: 0.0 };
        mesh.h = mesh.longest_edge();
        Ok(mesh)
    }
}

impl DiscreteField {
    /// Nodal interpolant of `x/|x|`, with the value `0` at a node placed at the origin.
    pub fn singular_interpolant(mesh: &DiskMesh) -> DiscreteField {
        let values = mesh.nodes.iter().map(|x| u_sing(x).unwrap_or_else(|_| Vec2::zero())).collect();
        DiscreteField { values }
    }

    /// Boundary values `x/|x|`, interior values zero.
    pub fn zero_interior(mesh: &DiskMesh) -> DiscreteField {
        let values = mesh
            .nodes
            .iter()
            .zip(&mesh.boundary)
            .map(|(x, b)| if *b { *x * x.norm().recip() } else { Vec2::zero() })
            .collect();
        DiscreteField { values }
    }

    pub fn check(&self, mesh: &DiskMesh) -> Result<()> {
        if self.values.len() != mesh.nodes.len() {
            return Err(Error::usage(format!(
                "field has {} values for a mesh with {} nodes",
                self.values.len(),
                mesh.nodes.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("field contains non-finite values"));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.values {
            writeln!(out, "{:.16e} {:.16e}", v.x(), v.y()).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<DiscreteField> {
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("field line {}: bad number", n + 1)))?;
            if f.len() != 2 {
                return Err(Error::Parse(format!("field line {}: expected two values", n + 1)));
            }
            values.push(Vec2::new(f[0], f[1]));
        }
        Ok(DiscreteField { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_mesh_invariants() {
        let mesh = mesh_disk(0.2, true).unwrap();
        assert!((60..=200).contains(&mesh.node_count()), "{}", mesh.node_count());
        mesh.validate().unwrap();
        for (x, b) in mesh.nodes.iter().zip(&mesh.boundary) {
            if *b {
                assert!((x.norm() - 1.0).abs() <= 1e-12);
            }
        }
        assert!((mesh.total_area() - mesh.polygon_area()).abs() < 1e-12);
    }

    #[test]
    fn mesh_without_origin_node() {
        let mesh = mesh_disk(0.2, false).unwrap();
        mesh.validate().unwrap();
        assert!(mesh.nodes.iter().all(|x| x.norm() > 0.0));
        assert!((mesh.total_area() - mesh.polygon_area()).abs() < 1e-12);
    }

    #[test]
    fn area_gap_shrinks_quadratically() {
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| (mesh_disk(h, true).unwrap().total_area() - PI).abs())
            .collect();
        assert!(errs[1] < errs[0] / 3.5 && errs[2] < errs[1] / 3.5, "{errs:?}");
        assert!(errs[2] / PI < 1e-3);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(mesh_disk(0.0, true), Err(Error::Usage(_))));
        assert!(matches!(mesh_disk(0.5, true), Err(Error::Usage(_))));
        assert!(matches!(mesh_disk(1e-4, true), Err(Error::Resource(_))));
    }

    #[test]
    fn text_round_trip() {
        let mesh = mesh_disk(0.3, true).unwrap();
        let back = DiskMesh::from_text(&mesh.to_text()).unwrap();
        assert_eq!(back, mesh);
        let field = DiscreteField::singular_interpolant(&mesh);
        assert_eq!(DiscreteField::from_text(&field.to_text()).unwrap(), field);
        assert!(DiskMesh::from_text("NODES 2\n0 0 0 0\n").is_err());
        assert!(DiscreteField::from_text("1.0\n").is_err());
    }
}
