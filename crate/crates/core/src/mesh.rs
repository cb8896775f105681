//! Goal-mesh loading, validation and indexing.
//!
//! A mesh is a set of convex planar faces, counter-clockwise with respect to
//! their outward normals, glued along edges. Interior edges (shared by exactly
//! two faces) are the candidate creases; boundary edges stay boundary. All
//! coordinates are millimeters.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::geom::{v3, Plane, Vec3};

/// Faces must be planar within this distance (mm).
pub const PLANARITY_TOL: f64 = 1e-6;
/// Dihedral angles smaller than this (radians) count as a trivial crease.
pub const ANGLE_TOL: f64 = 1e-9;

pub type FaceId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("obj parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-manifold edge between vertices {0} and {1} (shared by more than two faces)")]
    Manifold(usize, usize),
    #[error("mesh is not consistently orientable")]
    Orientation,
    #[error("face {face}: {msg}")]
    Geometry { face: FaceId, msg: String },
    #[error("face-adjacency graph is disconnected")]
    Disconnected,
    #[error("mesh has no faces")]
    Empty,
}

/// An interior edge: the two vertices as traversed by `faces.0`, and the two
/// incident faces (`faces.0` is the lower face id).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub v: (usize, usize),
    pub faces: (FaceId, FaceId),
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<usize>>,
    /// Interior edges only, sorted by vertex pair.
    pub edges: Vec<Edge>,
    normals: Vec<Vec3>,
    centroids: Vec<Vec3>,
    areas: Vec<f64>,
}

/// Dual of the mesh: one node per face, one arc per interior edge, weighted
/// by face-centroid distance.
#[derive(Debug, Clone)]
pub struct DualGraph {
    pub node_count: usize,
    /// (edge id, face, face, weight)
    pub arcs: Vec<(EdgeId, FaceId, FaceId, f64)>,
    /// per-face list of (edge id, neighbor face)
    pub adjacency: Vec<Vec<(EdgeId, FaceId)>>,
}

/// Signed fold target for one interior edge: the rotation carrying the two
/// incident faces from coplanar to their goal dihedral. Positive folds move
/// the free side toward the laser (+z) when the fixed side lies in the plane.
#[derive(Debug, Clone, Copy)]
pub struct FoldTarget {
    pub edge: EdgeId,
    pub angle: f64,
    pub trivial: bool,
}

impl TriMesh {
    /// Builds and validates a mesh from vertex positions and face loops.
    /// Face orientation is repaired by flood fill when possible.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> Result<TriMesh, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut faces = faces;
        for (fid, loop_) in faces.iter().enumerate() {
            if loop_.len() < 3 {
                return Err(MeshError::Geometry { face: fid, msg: "fewer than three vertices".into() });
            }
            for &v in loop_ {
                if v >= vertices.len() {
                    return Err(MeshError::Geometry { face: fid, msg: format!("vertex index {v} out of range") });
                }
            }
        }

        // undirected edge incidence
        let incidence = edge_incidence(&faces)?;
        reorient(&mut faces, &incidence)?;
        let incidence = edge_incidence(&faces)?;
        // after repair every interior edge must be traversed in opposite directions
        for ((a, b), occs) in &incidence {
            if occs.len() == 2 && occs[0].1 == occs[1].1 {
                let _ = (a, b);
                return Err(MeshError::Orientation);
            }
        }

        let mut normals = Vec::with_capacity(faces.len());
        let mut centroids = Vec::with_capacity(faces.len());
        let mut areas = Vec::with_capacity(faces.len());
        for (fid, loop_) in faces.iter().enumerate() {
            let pts: Vec<Vec3> = loop_.iter().map(|&v| vertices[v]).collect();
            let plane = Plane::of_polygon(&pts);
            for p in &pts {
                if plane.signed_dist(*p).abs() > PLANARITY_TOL {
                    return Err(MeshError::Geometry {
                        face: fid,
                        msg: format!("not planar within {PLANARITY_TOL} mm"),
                    });
                }
            }
            check_strictly_convex(fid, &pts, plane.n)?;
            let mut c = v3(0.0, 0.0, 0.0);
            for p in &pts {
                c = c + *p;
            }
            let n = pts.len();
            let mut area2 = v3(0.0, 0.0, 0.0);
            for i in 1..n - 1 {
                area2 = area2 + (pts[i] - pts[0]).cross(pts[i + 1] - pts[0]);
            }
            normals.push(plane.n);
            centroids.push(c / n as f64);
            areas.push(area2.norm() * 0.5);
        }

        let mut edges = Vec::new();
        for ((_, _), occs) in &incidence {
            if occs.len() == 2 {
                let (f0, dir0) = occs[0];
                let (f1, _) = occs[1];
                let (lo, hi, dir_lo) = if f0 < f1 { (f0, f1, dir0) } else { (f1, f0, occs[1].1) };
                edges.push(Edge { v: dir_lo, faces: (lo, hi) });
            }
        }
        edges.sort_by_key(|e| (e.v.0.min(e.v.1), e.v.0.max(e.v.1)));

        let mesh = TriMesh { vertices, faces, edges, normals, centroids, areas };
        mesh.check_connected()?;
        Ok(mesh)
    }

    fn check_connected(&self) -> Result<(), MeshError> {
        if self.faces.is_empty() {
            return Ok(());
        }
        let dual = self.dual_graph();
        let mut seen = vec![false; self.faces.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(f) = stack.pop() {
            for &(_, g) in &dual.adjacency[f] {
                if !seen[g] {
                    seen[g] = true;
                    count += 1;
                    stack.push(g);
                }
            }
        }
        if count != self.faces.len() {
            return Err(MeshError::Disconnected);
        }
        Ok(())
    }

    pub fn face_normal(&self, f: FaceId) -> Vec3 {
        self.normals[f]
    }

    pub fn face_centroid(&self, f: FaceId) -> Vec3 {
        self.centroids[f]
    }

    pub fn face_area(&self, f: FaceId) -> f64 {
        self.areas[f]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn face_points(&self, f: FaceId) -> Vec<Vec3> {
        self.faces[f].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Area-weighted outward normal summed over all faces; the zero vector
    /// for closed meshes.
    pub fn area_vector_sum(&self) -> Vec3 {
        let mut s = v3(0.0, 0.0, 0.0);
        for (fid, loop_) in self.faces.iter().enumerate() {
            let _ = loop_;
            s = s + self.normals[fid] * self.areas[fid];
        }
        s
    }

    pub fn dual_graph(&self) -> DualGraph {
        let mut arcs = Vec::with_capacity(self.edges.len());
        let mut adjacency = vec![Vec::new(); self.faces.len()];
        for (eid, e) in self.edges.iter().enumerate() {
            let (f0, f1) = e.faces;
            let w = self.centroids[f0].dist(self.centroids[f1]);
            arcs.push((eid, f0, f1, w));
            adjacency[f0].push((eid, f1));
            adjacency[f1].push((eid, f0));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&(eid, _)| eid);
        }
        DualGraph { node_count: self.faces.len(), arcs, adjacency }
    }

    /// Signed fold targets, one per interior edge (same order as `edges`).
    pub fn fold_targets(&self) -> Vec<FoldTarget> {
        self.edges
            .iter()
            .enumerate()
            .map(|(eid, e)| {
                let (f0, f1) = e.faces;
                let n0 = self.normals[f0];
                let n1 = self.normals[f1];
                let axis = (self.vertices[e.v.1] - self.vertices[e.v.0]).normalized();
                let angle = n0.cross(n1).dot(axis).atan2(n0.dot(n1));
                if angle.abs() < ANGLE_TOL {
                    FoldTarget { edge: eid, angle: 0.0, trivial: true }
                } else {
                    FoldTarget { edge: eid, angle, trivial: false }
                }
            })
            .collect()
    }

    pub fn load_obj(path: &Path) -> Result<TriMesh, MeshError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_obj(&text)
    }

    pub fn parse_obj(text: &str) -> Result<TriMesh, MeshError> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let mut coord = |name: &str| -> Result<f64, MeshError> {
                        it.next()
                            .ok_or_else(|| MeshError::Parse {
                                line: lineno + 1,
                                msg: format!("missing {name} coordinate"),
                            })?
                            .parse()
                            .map_err(|e| MeshError::Parse { line: lineno + 1, msg: format!("{e}") })
                    };
                    let x = coord("x")?;
                    let y = coord("y")?;
                    let z = coord("z")?;
                    vertices.push(v3(x, y, z));
                }
                Some("f") => {
                    let mut loop_ = Vec::new();
                    for field in it {
                        let first = field.split('/').next().unwrap_or("");
                        let idx: i64 = first
                            .parse()
                            .map_err(|e| MeshError::Parse { line: lineno + 1, msg: format!("{e}") })?;
                        if idx < 1 {
                            return Err(MeshError::Parse {
                                line: lineno + 1,
                                msg: format!("vertex reference {idx} not positive"),
                            });
                        }
                        loop_.push(idx as usize - 1);
                    }
                    faces.push(loop_);
                }
                _ => {} // vn/vt/comments/etc ignored
            }
        }
        TriMesh::new(vertices, faces)
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {:.9} {:.9} {:.9}", v.x, v.y, v.z);
        }
        for f in &self.faces {
            out.push('f');
            for &v in f {
                let _ = write!(out, " {}", v + 1);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_obj(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.to_obj())?;
        Ok(())
    }
}

type Incidence = BTreeMap<(usize, usize), Vec<(FaceId, (usize, usize))>>;

fn edge_incidence(faces: &[Vec<usize>]) -> Result<Incidence, MeshError> {
    let mut map: Incidence = BTreeMap::new();
    for (fid, loop_) in faces.iter().enumerate() {
        let n = loop_.len();
        for i in 0..n {
            let a = loop_[i];
            let b = loop_[(i + 1) % n];
            if a == b {
                return Err(MeshError::Geometry { face: fid, msg: "degenerate edge".into() });
            }
            let key = (a.min(b), a.max(b));
            let entry = map.entry(key).or_default();
            entry.push((fid, (a, b)));
            if entry.len() > 2 {
                return Err(MeshError::Manifold(key.0, key.1));
            }
        }
    }
    Ok(map)
}

/// Flood-fills consistent orientation from face 0, flipping loops as needed.
fn reorient(faces: &mut [Vec<usize>], incidence: &Incidence) -> Result<(), MeshError> {
    if faces.is_empty() {
        return Ok(());
    }
    // adjacency over undirected edges
    let mut adj: Vec<Vec<(FaceId, (usize, usize))>> = vec![Vec::new(); faces.len()];
    for occs in incidence.values() {
        if occs.len() == 2 {
            let (f0, _) = occs[0];
            let (f1, _) = occs[1];
            let key = occs[0].1;
            let key = (key.0.min(key.1), key.0.max(key.1));
            adj[f0].push((f1, key));
            adj[f1].push((f0, key));
        }
    }
    let traverses = |loop_: &[usize], a: usize, b: usize| -> Option<bool> {
        let n = loop_.len();
        for i in 0..n {
            if loop_[i] == a && loop_[(i + 1) % n] == b {
                return Some(true);
            }
            if loop_[i] == b && loop_[(i + 1) % n] == a {
                return Some(false);
            }
        }
        None
    };
    let mut state = vec![0u8; faces.len()]; // 0 unseen, 1 keep, 2 flipped
    for start in 0..faces.len() {
        if state[start] != 0 {
            continue;
        }
        state[start] = 1;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            let f_flipped = state[f] == 2;
            for &(g, (a, b)) in &adj[f] {
                let f_dir = traverses(&faces[f], a, b).unwrap() ^ f_flipped;
                let g_dir_raw = traverses(&faces[g], a, b).unwrap();
                // consistent orientation: opposite traversal
                let want_flip = g_dir_raw == f_dir;
                let want_state = if want_flip { 2 } else { 1 };
                if state[g] == 0 {
                    state[g] = want_state;
                    queue.push_back(g);
                } else if state[g] != want_state {
                    return Err(MeshError::Orientation);
                }
            }
        }
    }
    for (f, s) in state.iter().enumerate() {
        if *s == 2 {
            faces[f].reverse();
        }
    }
    Ok(())
}

fn check_strictly_convex(fid: FaceId, pts: &[Vec3], normal: Vec3) -> Result<(), MeshError> {
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let c = pts[(i + 2) % n];
        let e1 = b - a;
        let e2 = c - b;
        let turn = e1.cross(e2).dot(normal);
        if turn <= ANGLE_TOL * e1.norm() * e2.norm() {
            return Err(MeshError::Geometry { face: fid, msg: "not strictly convex".into() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn cube_topology() {
        let mesh = shapes::cube(10.0);
        assert_eq!(mesh.vertices.len(), 8);
        assert_eq!(mesh.faces.len(), 6);
        assert_eq!(mesh.edges.len(), 12);
        // V - E + F = 2
        assert_eq!(8 + 6 - 12, 2);
    }

    #[test]
    fn cube_obj_round_trip() {
        let mesh = shapes::cube(10.0);
        let text = mesh.to_obj();
        let again = TriMesh::parse_obj(&text).unwrap();
        assert_eq!(mesh.vertices.len(), again.vertices.len());
        for (a, b) in mesh.vertices.iter().zip(&again.vertices) {
            assert!(a.dist(*b) < 1e-9);
        }
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        // three triangles fanning around one shared edge
        let vertices = vec![
            v3(0.0, 0.0, 0.0),
            v3(1.0, 0.0, 0.0),
            v3(0.0, 1.0, 0.0),
            v3(0.0, -1.0, 0.5),
            v3(0.5, 0.5, 1.0),
        ];
        let faces = vec![vec![0, 1, 2], vec![1, 0, 3], vec![0, 1, 4]];
        match TriMesh::new(vertices, faces) {
            Err(MeshError::Manifold(0, 1)) => {}
            other => panic!("expected ManifoldError, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_winding_is_repaired() {
        let good = shapes::cube(10.0);
        let mut faces = good.faces.clone();
        faces[2].reverse();
        faces[5].reverse();
        let repaired = TriMesh::new(good.vertices.clone(), faces).unwrap();
        // closed mesh with outward or fully inward normals; area vector sums to zero
        assert!(repaired.area_vector_sum().norm() < 1e-6);
        assert_eq!(repaired.edges.len(), 12);
    }

    #[test]
    fn non_planar_face_is_rejected() {
        let vertices = vec![
            v3(0.0, 0.0, 0.0),
            v3(1.0, 0.0, 0.0),
            v3(1.0, 1.0, 0.3),
            v3(0.0, 1.0, 0.0),
        ];
        let faces = vec![vec![0, 1, 2, 3]];
        match TriMesh::new(vertices, faces) {
            Err(MeshError::Geometry { .. }) => {}
            other => panic!("expected GeometryError, got {other:?}"),
        }
    }

    #[test]
    fn cube_fold_targets_are_uniform_quarter_turns() {
        let mesh = shapes::cube(10.0);
        let targets = mesh.fold_targets();
        assert_eq!(targets.len(), 12);
        for t in &targets {
            assert!((t.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12, "angle {}", t.angle);
            assert!(!t.trivial);
        }
    }

    #[test]
    fn tetrahedron_fold_target_magnitude() {
        let mesh = shapes::tetrahedron(10.0);
        let expect = std::f64::consts::PI - (1.0f64 / 3.0).acos();
        for t in mesh.fold_targets() {
            assert!((t.angle.abs() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn coplanar_faces_give_trivial_target() {
        // two unit squares side by side in one plane
        let vertices = vec![
            v3(0.0, 0.0, 0.0),
            v3(1.0, 0.0, 0.0),
            v3(2.0, 0.0, 0.0),
            v3(2.0, 1.0, 0.0),
            v3(1.0, 1.0, 0.0),
            v3(0.0, 1.0, 0.0),
        ];
        let faces = vec![vec![0, 1, 4, 5], vec![1, 2, 3, 4]];
        let mesh = TriMesh::new(vertices, faces).unwrap();
        let targets = mesh.fold_targets();
        assert_eq!(targets.len(), 1);
        assert!(targets[0].trivial);
        assert_eq!(targets[0].angle, 0.0);
    }

    #[test]
    fn closed_convex_targets_share_sign() {
        for mesh in [shapes::cube(8.0), shapes::tetrahedron(9.0), shapes::octahedron(7.0)] {
            let targets = mesh.fold_targets();
            assert!(targets.iter().all(|t| t.angle > 0.0));
        }
    }

    #[test]
    fn closed_mesh_area_vector_vanishes() {
        for mesh in [shapes::cube(10.0), shapes::tetrahedron(12.0), shapes::bunny()] {
            assert!(mesh.area_vector_sum().norm() < 1e-6 * mesh.total_area());
        }
    }

    #[test]
    fn bunny_euler_characteristic() {
        let mesh = shapes::bunny();
        let text = mesh.to_obj();
        // independent recount from the serialized file
        let mut v = 0usize;
        let mut f = 0usize;
        let mut edge_set = std::collections::BTreeSet::new();
        let mut loops: Vec<Vec<usize>> = Vec::new();
        for line in text.lines() {
            if line.starts_with("v ") {
                v += 1;
            } else if let Some(rest) = line.strip_prefix("f ") {
                f += 1;
                loops.push(rest.split_whitespace().map(|s| s.parse::<usize>().unwrap()).collect());
            }
        }
        for l in &loops {
            for i in 0..l.len() {
                let a = l[i];
                let b = l[(i + 1) % l.len()];
                edge_set.insert((a.min(b), a.max(b)));
            }
        }
        let e = edge_set.len();
        assert!(f <= 200, "bunny must stay at or under 200 faces, got {f}");
        assert_eq!(v as i64 - e as i64 + f as i64, 2);
    }
}
