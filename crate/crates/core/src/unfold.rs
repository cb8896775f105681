//! Cut-tree generation and planar layout.
//!
//! A cut tree is a spanning tree of the face dual rooted at the stationary
//! face: tree arcs stay connected (creases), all other interior edges are
//! severed (cuts). Laying the tree out flat gives the net.
//!
//! Net coordinate convention: faces keep their mesh size exactly and wind
//! clockwise viewed from +z (the sheet's laser-facing side is up, face
//! normals point down). Positive fold angles lift the child subtree toward
//! the laser.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{convex_overlap_depth, v2, Aabb2, Iso2, Vec2, Vec3};
use crate::mesh::{DualGraph, EdgeId, FaceId, TriMesh};

/// Separations smaller than this (mm) count as touching, not overlapping.
pub const OVERLAP_EPS: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum UnfoldError {
    #[error("face-adjacency graph is disconnected")]
    Connectivity,
    #[error("tree does not span the mesh")]
    NotSpanning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutTree {
    pub root: FaceId,
    /// `parent[f] = Some((parent face, hinge edge))` for every non-root face.
    pub parent: Vec<Option<(FaceId, EdgeId)>>,
    /// Arcs changed relative to the blooming tree of the same mesh and root.
    pub edit_count: usize,
    /// Set when the tree came from beam search rather than exhaustive search.
    pub heuristic: bool,
    /// Overlaps left over when no overlap-free tree was found in budget.
    pub residual_overlaps: Vec<(FaceId, FaceId)>,
}

impl CutTree {
    pub fn arcs(&self) -> Vec<EdgeId> {
        let mut arcs: Vec<EdgeId> = self.parent.iter().flatten().map(|&(_, e)| e).collect();
        arcs.sort_unstable();
        arcs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crease {
    pub edge: EdgeId,
    pub parent: FaceId,
    pub child: FaceId,
    /// Hinge endpoints in net coordinates; the fold axis runs a -> b in the
    /// parent's traversal direction.
    pub a: Vec2,
    pub b: Vec2,
    /// Signed target fold angle (radians).
    pub angle: f64,
    pub trivial: bool,
    /// Number of creases between this one and the root.
    pub depth: usize,
}

impl Crease {
    pub fn len(&self) -> f64 {
        self.a.dist(self.b)
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetFace {
    pub face: FaceId,
    pub loop2: Vec<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutSeg {
    pub face: FaceId,
    pub a: Vec2,
    pub b: Vec2,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub seed: Option<u64>,
    pub edit_count: usize,
    pub heuristic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub root: FaceId,
    pub faces: Vec<NetFace>,
    /// Sorted by mesh edge id; crease ids are indices into this list.
    pub creases: Vec<Crease>,
    pub cuts: Vec<CutSeg>,
    pub overlaps: Vec<(FaceId, FaceId)>,
    pub provenance: Provenance,
    #[serde(skip)]
    children: Vec<Vec<usize>>,
    #[serde(skip)]
    parent_crease: Vec<Option<usize>>,
    #[serde(skip)]
    subtrees: Vec<Vec<FaceId>>,
}

impl Net {
    /// Crease ids of the subtree hanging below crease `c`, excluding `c`.
    pub fn descendant_creases(&self, c: usize) -> Vec<usize> {
        self.subtrees[c]
            .iter()
            .filter_map(|&f| self.parent_crease[f])
            .filter(|&d| d != c)
            .collect()
    }

    /// Faces moved when crease `c` folds (the child subtree).
    pub fn moving_faces(&self, c: usize) -> &[FaceId] {
        &self.subtrees[c]
    }

    pub fn parent_crease_of_face(&self, f: FaceId) -> Option<usize> {
        self.parent_crease[f]
    }

    /// Crease ids on the path from face `f` up to the root.
    pub fn root_path_creases(&self, f: FaceId) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = f;
        while let Some(c) = self.parent_crease[cur] {
            out.push(c);
            cur = self.creases[c].parent;
        }
        out
    }

    pub fn crease_children_of_face(&self, f: FaceId) -> &[usize] {
        &self.children[f]
    }

    /// Hinge-adjacent face pairs (never overlap candidates).
    pub fn adjacent(&self, f: FaceId, g: FaceId) -> bool {
        self.creases
            .iter()
            .any(|c| (c.parent == f && c.child == g) || (c.parent == g && c.child == f))
    }

    pub fn total_area(&self) -> f64 {
        self.faces.iter().map(|f| crate::geom::signed_area(&f.loop2).abs()).sum()
    }

    /// Rebuilds the derived indices after deserialization.
    pub fn reindex(&mut self) {
        let nf = self.faces.len();
        let mut children = vec![Vec::new(); nf];
        let mut parent_crease = vec![None; nf];
        for (ci, c) in self.creases.iter().enumerate() {
            children[c.parent].push(ci);
            parent_crease[c.child] = Some(ci);
        }
        let mut subtrees = vec![Vec::new(); self.creases.len()];
        for (ci, c) in self.creases.iter().enumerate() {
            let mut acc = Vec::new();
            let mut stack = vec![c.child];
            while let Some(f) = stack.pop() {
                acc.push(f);
                for &cc in &children[f] {
                    stack.push(self.creases[cc].child);
                }
            }
            acc.sort_unstable();
            subtrees[ci] = acc;
        }
        self.children = children;
        self.parent_crease = parent_crease;
        self.subtrees = subtrees;
    }
}

/// Deterministic stationary-face choice: maximum area, ties to lowest id.
pub fn choose_root(mesh: &TriMesh) -> FaceId {
    let mut best = 0;
    for f in 1..mesh.faces.len() {
        if mesh.face_area(f) > mesh.face_area(best) + 1e-12 {
            best = f;
        }
    }
    best
}

/// Shortest-path spanning tree of the dual from `root` under centroid
/// distances; ties broken by arriving edge id.
pub fn blooming_tree(mesh: &TriMesh, root: FaceId) -> Result<CutTree, UnfoldError> {
    let dual = mesh.dual_graph();
    let n = dual.node_count;
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<(FaceId, EdgeId)>> = vec![None; n];
    let mut settled = vec![false; n];
    // (dist, arriving edge id, face, parent face)
    let mut heap: BTreeSet<(u64, EdgeId, FaceId, FaceId)> = BTreeSet::new();
    let key = |d: f64| -> u64 { d.to_bits() }; // nonnegative finite: order-preserving
    dist[root] = 0.0;
    heap.insert((key(0.0), usize::MAX, root, root));
    let mut settled_count = 0;
    while let Some(&entry) = heap.iter().next() {
        heap.remove(&entry);
        let (_, via, f, pf) = entry;
        if settled[f] {
            continue;
        }
        settled[f] = true;
        settled_count += 1;
        if f != root {
            parent[f] = Some((pf, via));
        }
        for &(eid, g) in &dual.adjacency[f] {
            if settled[g] {
                continue;
            }
            let w = dual.arcs[eid].3;
            let nd = dist[f] + w;
            if nd < dist[g] {
                dist[g] = nd;
                heap.insert((key(nd), eid, g, f));
            } else if nd == dist[g] {
                heap.insert((key(nd), eid, g, f));
            }
        }
    }
    if settled_count != n {
        return Err(UnfoldError::Connectivity);
    }
    Ok(CutTree { root, parent, edit_count: 0, heuristic: false, residual_overlaps: Vec::new() })
}

/// Orients an arc set into a parent map from `root`. Returns None when the
/// arcs do not form a spanning tree.
pub fn orient_arcs(mesh: &TriMesh, root: FaceId, arcs: &[EdgeId]) -> Option<Vec<Option<(FaceId, EdgeId)>>> {
    let n = mesh.faces.len();
    if arcs.len() + 1 != n {
        return None;
    }
    let mut adj: Vec<Vec<(EdgeId, FaceId)>> = vec![Vec::new(); n];
    for &e in arcs {
        let (f0, f1) = mesh.edges[e].faces;
        adj[f0].push((e, f1));
        adj[f1].push((e, f0));
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    let mut count = 1;
    while let Some(f) = queue.pop_front() {
        for &(e, g) in &adj[f] {
            if !seen[g] {
                seen[g] = true;
                count += 1;
                parent[g] = Some((f, e));
                queue.push_back(g);
            }
        }
    }
    if count == n {
        Some(parent)
    } else {
        None
    }
}

struct Chart {
    origin: Vec3,
    u: Vec3,
    v: Vec3,
}

impl Chart {
    fn of_face(mesh: &TriMesh, f: FaceId) -> Chart {
        let pts = mesh.face_points(f);
        let n = mesh.face_normal(f);
        let u = (pts[1] - pts[0]).normalized();
        let v = n.cross(u);
        Chart { origin: mesh.face_centroid(f), u, v }
    }
    /// Isometric drop into 2D with the face winding clockwise (normal down).
    fn map(&self, p: Vec3) -> Vec2 {
        let d = p - self.origin;
        v2(d.dot(self.u), -d.dot(self.v))
    }
}

/// Unrolls the tree into the plane. The root face sits with its centroid at
/// the origin and its longest edge along +x; children unroll about their
/// hinges. Overlaps are detected, not rejected.
pub fn layout(mesh: &TriMesh, tree: &CutTree, provenance: Provenance) -> Result<Net, UnfoldError> {
    let n = mesh.faces.len();
    if tree.parent.len() != n || tree.parent.iter().filter(|p| p.is_some()).count() + 1 != n {
        return Err(UnfoldError::NotSpanning);
    }
    let targets = mesh.fold_targets();
    let mut children: Vec<Vec<(EdgeId, FaceId)>> = vec![Vec::new(); n];
    for (f, p) in tree.parent.iter().enumerate() {
        if let Some((pf, e)) = p {
            children[*pf].push((*e, f));
        }
    }
    for c in &mut children {
        c.sort_unstable();
    }

    let mut transforms: Vec<Option<Iso2>> = vec![None; n];
    let charts: Vec<Chart> = (0..n).map(|f| Chart::of_face(mesh, f)).collect();

    // root placement: longest edge along +x, centroid at origin
    {
        let pts = mesh.face_points(tree.root);
        let chart = &charts[tree.root];
        let m = pts.len();
        let mut best = 0;
        let mut best_len = -1.0;
        for i in 0..m {
            let l = pts[i].dist(pts[(i + 1) % m]);
            if l > best_len + 1e-12 {
                best_len = l;
                best = i;
            }
        }
        let a = chart.map(pts[best]);
        let b = chart.map(pts[(best + 1) % m]);
        let rot = Iso2::rotation(-(b - a).angle());
        // centroid of the chart is the origin already (chart origin = centroid)
        transforms[tree.root] = Some(rot);
    }

    let mut order = vec![tree.root];
    let mut queue = VecDeque::from([tree.root]);
    while let Some(f) = queue.pop_front() {
        for &(e, c) in &children[f] {
            let edge = &mesh.edges[e];
            // hinge endpoints in parent traversal order
            let (a3, b3) = if edge.faces.0 == f {
                (mesh.vertices[edge.v.0], mesh.vertices[edge.v.1])
            } else {
                (mesh.vertices[edge.v.1], mesh.vertices[edge.v.0])
            };
            let tp = transforms[f].as_ref().unwrap();
            let a2 = tp.apply(charts[f].map(a3));
            let b2 = tp.apply(charts[f].map(b3));
            let pc = charts[c].map(a3);
            let qc = charts[c].map(b3);
            transforms[c] = Some(Iso2::from_segment_match(pc, qc, a2, b2));
            order.push(c);
            queue.push_back(c);
        }
    }

    let mut faces = Vec::with_capacity(n);
    for f in 0..n {
        let t = transforms[f].as_ref().unwrap();
        let loop2 = mesh.face_points(f).iter().map(|&p| t.apply(charts[f].map(p))).collect();
        faces.push(NetFace { face: f, loop2 });
    }

    let mut depth = vec![0usize; n];
    for &f in &order {
        if let Some((pf, _)) = tree.parent[f] {
            depth[f] = depth[pf] + 1;
        }
    }

    let mut creases = Vec::new();
    for (f, p) in tree.parent.iter().enumerate() {
        if let Some((pf, e)) = p {
            let edge = &mesh.edges[*e];
            let (a3, b3) = if edge.faces.0 == *pf {
                (mesh.vertices[edge.v.0], mesh.vertices[edge.v.1])
            } else {
                (mesh.vertices[edge.v.1], mesh.vertices[edge.v.0])
            };
            let tp = transforms[*pf].as_ref().unwrap();
            let a2 = tp.apply(charts[*pf].map(a3));
            let b2 = tp.apply(charts[*pf].map(b3));
            creases.push(Crease {
                edge: *e,
                parent: *pf,
                child: f,
                a: a2,
                b: b2,
                angle: targets[*e].angle,
                trivial: targets[*e].trivial,
                depth: depth[f],
            });
        }
    }
    creases.sort_by_key(|c| c.edge);

    // cuts: every face boundary edge that is not that face's hinge
    let mut hinges: BTreeSet<(FaceId, usize, usize)> = BTreeSet::new();
    for c in &creases {
        let e = &mesh.edges[c.edge];
        for f in [c.parent, c.child] {
            hinges.insert((f, e.v.0.min(e.v.1), e.v.0.max(e.v.1)));
        }
    }
    let mut cuts = Vec::new();
    for f in 0..n {
        let loop_ = &mesh.faces[f];
        let m = loop_.len();
        for i in 0..m {
            let (va, vb) = (loop_[i], loop_[(i + 1) % m]);
            if hinges.contains(&(f, va.min(vb), va.max(vb))) {
                continue;
            }
            cuts.push(CutSeg { face: f, a: faces[f].loop2[i], b: faces[f].loop2[(i + 1) % m] });
        }
    }

    let mut net = Net {
        root: tree.root,
        faces,
        creases,
        cuts,
        overlaps: Vec::new(),
        provenance: Provenance { edit_count: tree.edit_count, heuristic: tree.heuristic, ..provenance },
        children: Vec::new(),
        parent_crease: Vec::new(),
        subtrees: Vec::new(),
    };
    net.reindex();
    net.overlaps = detect_overlaps(&net);
    Ok(net)
}

/// Face pairs whose open interiors intersect by more than [`OVERLAP_EPS`].
/// Hinge-adjacent pairs are excluded.
pub fn detect_overlaps(net: &Net) -> Vec<(FaceId, FaceId)> {
    let n = net.faces.len();
    let boxes: Vec<Aabb2> = net.faces.iter().map(|f| Aabb2::of(&f.loop2)).collect();
    let mut out = Vec::new();
    for f in 0..n {
        for g in f + 1..n {
            if !boxes[f].overlaps(&boxes[g], OVERLAP_EPS) || net.adjacent(f, g) {
                continue;
            }
            if convex_overlap_depth(&net.faces[f].loop2, &net.faces[g].loop2) > OVERLAP_EPS {
                out.push((f, g));
            }
        }
    }
    out
}

fn arcs_key(arcs: &[EdgeId]) -> Vec<EdgeId> {
    let mut k = arcs.to_vec();
    k.sort_unstable();
    k
}

fn edit_count_vs(base: &[EdgeId], arcs: &[EdgeId]) -> usize {
    let base: BTreeSet<_> = base.iter().collect();
    arcs.iter().filter(|e| !base.contains(e)).count()
}

/// Tree path between two faces as a list of arc ids.
fn tree_path(parent: &[Option<(FaceId, EdgeId)>], f: FaceId, g: FaceId) -> Vec<EdgeId> {
    let depth_of = |mut x: FaceId| {
        let mut d = 0;
        while let Some((p, _)) = parent[x] {
            x = p;
            d += 1;
        }
        d
    };
    let (mut a, mut b) = (f, g);
    let (mut da, mut db) = (depth_of(a), depth_of(b));
    let mut path = Vec::new();
    while da > db {
        let (p, e) = parent[a].unwrap();
        path.push(e);
        a = p;
        da -= 1;
    }
    let mut tail = Vec::new();
    while db > da {
        let (p, e) = parent[b].unwrap();
        tail.push(e);
        b = p;
        db -= 1;
    }
    while a != b {
        let (pa, ea) = parent[a].unwrap();
        let (pb, eb) = parent[b].unwrap();
        path.push(ea);
        tail.push(eb);
        a = pa;
        b = pb;
    }
    path.extend(tail.into_iter().rev());
    path
}

/// All single-swap neighbors of `arcs` obtained by removing one arc on the
/// tree path of an overlapping pair and reconnecting across the cut.
fn swap_neighbors(mesh: &TriMesh, dual: &DualGraph, root: FaceId, arcs: &[EdgeId], overlaps: &[(FaceId, FaceId)]) -> Vec<Vec<EdgeId>> {
    let parent = match orient_arcs(mesh, root, arcs) {
        Some(p) => p,
        None => return Vec::new(),
    };
    let mut removable: BTreeSet<EdgeId> = BTreeSet::new();
    for &(f, g) in overlaps {
        for e in tree_path(&parent, f, g) {
            removable.insert(e);
        }
    }
    let arc_set: BTreeSet<EdgeId> = arcs.iter().copied().collect();
    let mut out = Vec::new();
    for &e in &removable {
        // split into components without e
        let keep: Vec<EdgeId> = arcs.iter().copied().filter(|&x| x != e).collect();
        let mut comp = vec![usize::MAX; mesh.faces.len()];
        let mut adj: Vec<Vec<FaceId>> = vec![Vec::new(); mesh.faces.len()];
        for &k in &keep {
            let (f0, f1) = mesh.edges[k].faces;
            adj[f0].push(f1);
            adj[f1].push(f0);
        }
        for start in 0..mesh.faces.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let label = start;
            let mut stack = vec![start];
            comp[start] = label;
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = label;
                        stack.push(y);
                    }
                }
            }
        }
        for &(eid, f0, f1, _) in &dual.arcs {
            if eid == e || arc_set.contains(&eid) || comp[f0] == comp[f1] {
                continue;
            }
            let mut next = keep.clone();
            next.push(eid);
            next.sort_unstable();
            out.push(next);
        }
    }
    out
}

fn tree_from_arcs(mesh: &TriMesh, root: FaceId, arcs: &[EdgeId], base: &[EdgeId]) -> Option<CutTree> {
    let parent = orient_arcs(mesh, root, arcs)?;
    Some(CutTree {
        root,
        parent,
        edit_count: edit_count_vs(base, arcs),
        heuristic: false,
        residual_overlaps: Vec::new(),
    })
}

/// Overlap-free tree with the fewest arc edits from the blooming tree.
///
/// Breadth-first over swap count (exact while the frontier fits in
/// `edit_budget` levels and the node cap), then beam search of width
/// `beam_width` with a heuristic flag. When nothing overlap-free is found,
/// the least-overlapping tree is returned with its residual pairs attached.
pub fn nearly_blooming(mesh: &TriMesh, root: FaceId, edit_budget: usize, beam_width: usize) -> Result<CutTree, UnfoldError> {
    const NODE_CAP: usize = 20_000;
    let dual = mesh.dual_graph();
    let base = blooming_tree(mesh, root)?;
    let base_arcs = base.arcs();
    let provenance = Provenance { method: "nb".into(), ..Default::default() };
    let overlaps0 = layout(mesh, &base, provenance.clone())?.overlaps;
    if overlaps0.is_empty() {
        return Ok(base);
    }

    let mut visited: BTreeSet<Vec<EdgeId>> = BTreeSet::new();
    visited.insert(arcs_key(&base_arcs));
    let mut frontier: Vec<(Vec<EdgeId>, Vec<(FaceId, FaceId)>)> = vec![(base_arcs.clone(), overlaps0)];
    let mut expansions = 0usize;
    let mut capped = false;

    for _depth in 1..=edit_budget {
        let mut next = Vec::new();
        let mut found: Option<Vec<EdgeId>> = None;
        'level: for (arcs, overlaps) in &frontier {
            for cand in swap_neighbors(mesh, &dual, root, arcs, overlaps) {
                if !visited.insert(cand.clone()) {
                    continue;
                }
                expansions += 1;
                let tree = match tree_from_arcs(mesh, root, &cand, &base_arcs) {
                    Some(t) => t,
                    None => continue,
                };
                let net = layout(mesh, &tree, provenance.clone())?;
                if net.overlaps.is_empty() {
                    match &found {
                        Some(best) if edit_count_vs(&base_arcs, best) <= tree.edit_count => {}
                        _ => found = Some(cand.clone()),
                    }
                } else {
                    next.push((cand, net.overlaps));
                }
                if expansions >= NODE_CAP {
                    capped = true;
                    break 'level;
                }
            }
        }
        if let Some(best) = found {
            // all trees at this swap depth have been generated unless capped;
            // the minimum edit count at the first feasible depth is exact
            let mut tree = tree_from_arcs(mesh, root, &best, &base_arcs).unwrap();
            tree.heuristic = capped;
            return Ok(tree);
        }
        if capped || next.is_empty() {
            break;
        }
        frontier = next;
    }

    // beam fallback: rank by (overlap count, edit count, arcs)
    let mut beam: Vec<(Vec<EdgeId>, Vec<(FaceId, FaceId)>)> = frontier;
    beam.sort_by_key(|(arcs, ov)| (ov.len(), edit_count_vs(&base_arcs, arcs), arcs.clone()));
    beam.truncate(beam_width);
    let mut best_partial: Option<(Vec<EdgeId>, Vec<(FaceId, FaceId)>)> = beam.first().cloned();
    for _round in 0..edit_budget.max(2) * 2 {
        let mut pool: Vec<(Vec<EdgeId>, Vec<(FaceId, FaceId)>)> = Vec::new();
        for (arcs, overlaps) in &beam {
            for cand in swap_neighbors(mesh, &dual, root, arcs, overlaps) {
                if !visited.insert(cand.clone()) {
                    continue;
                }
                let tree = match tree_from_arcs(mesh, root, &cand, &base_arcs) {
                    Some(t) => t,
                    None => continue,
                };
                let net = layout(mesh, &tree, provenance.clone())?;
                if net.overlaps.is_empty() {
                    let mut tree = tree;
                    tree.heuristic = true;
                    return Ok(tree);
                }
                pool.push((cand, net.overlaps));
            }
        }
        if pool.is_empty() {
            break;
        }
        pool.sort_by_key(|(arcs, ov)| (ov.len(), edit_count_vs(&base_arcs, arcs), arcs.clone()));
        pool.truncate(beam_width);
        if let Some(first) = pool.first() {
            let better = match &best_partial {
                Some((ba, bo)) => (first.1.len(), edit_count_vs(&base_arcs, &first.0))
                    < (bo.len(), edit_count_vs(&base_arcs, ba)),
                None => true,
            };
            if better {
                best_partial = Some(first.clone());
            }
        }
        beam = pool;
    }

    let (arcs, overlaps) = best_partial.expect("frontier nonempty");
    let mut tree = tree_from_arcs(mesh, root, &arcs, &base_arcs).unwrap();
    tree.heuristic = true;
    tree.residual_overlaps = overlaps;
    Ok(tree)
}

/// GA baseline parameters.
#[derive(Debug, Clone, Copy)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams { population: 16, generations: 10, seed: 0 }
    }
}

/// Genetic-algorithm baseline: one real weight per dual arc, decoded as the
/// minimum spanning tree under those weights, rooted at `root`. Fitness is
/// (overlap pairs, then fold completion from a coarse freeze-on-violation
/// dry run). Deterministic for a fixed seed.
pub fn ga_unfold(mesh: &TriMesh, root: FaceId, params: GaParams) -> Result<CutTree, UnfoldError> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    let dual = mesh.dual_graph();
    let n_arcs = dual.arcs.len();
    let base_arcs = blooming_tree(mesh, root)?.arcs();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let decode = |genes: &[f64]| -> Vec<EdgeId> {
        // Kruskal with (weight, edge id) keys
        let mut order: Vec<usize> = (0..n_arcs).collect();
        order.sort_by(|&a, &b| {
            genes[a].partial_cmp(&genes[b]).unwrap().then(a.cmp(&b))
        });
        let mut comp: Vec<usize> = (0..mesh.faces.len()).collect();
        fn find(comp: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while comp[r] != r {
                r = comp[r];
            }
            let mut c = x;
            while comp[c] != r {
                let next = comp[c];
                comp[c] = r;
                c = next;
            }
            r
        }
        let mut arcs = Vec::with_capacity(mesh.faces.len() - 1);
        for eid in order {
            let (_, f0, f1, _) = dual.arcs[eid];
            let (a, b) = (find(&mut comp, f0), find(&mut comp, f1));
            if a != b {
                comp[a] = b;
                arcs.push(eid);
            }
        }
        arcs.sort_unstable();
        arcs
    };

    let evaluate = |arcs: &[EdgeId]| -> (usize, f64) {
        let tree = tree_from_arcs(mesh, root, arcs, &base_arcs).expect("MST spans");
        let net = layout(mesh, &tree, Provenance { method: "ga".into(), ..Default::default() })
            .expect("tree spans");
        if !net.overlaps.is_empty() {
            return (net.overlaps.len(), 0.0);
        }
        // coarse dry run
        let substrate = crate::substrate::make_substrate(&net, 5.0, 3.0).expect("params valid");
        let cfg = crate::planner::PlannerCfg { step_deg: 4.0, ..Default::default() };
        let plan = crate::planner::plan_mp(&net, &substrate, &cfg).expect("overlap-free");
        (0, crate::planner::completion(&net, &plan.final_q))
    };

    let pop_n = params.population.max(1);
    let mut pop: Vec<Vec<f64>> = (0..pop_n)
        .map(|_| (0..n_arcs).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let mut scored: Vec<(usize, f64, Vec<EdgeId>)> = pop
        .iter()
        .map(|g| {
            let arcs = decode(g);
            let (ov, comp) = evaluate(&arcs);
            (ov, comp, arcs)
        })
        .collect();

    let better = |a: &(usize, f64, Vec<EdgeId>), b: &(usize, f64, Vec<EdgeId>)| -> bool {
        (a.0, -a.1, &a.2) < (b.0, -b.1, &b.2)
    };

    for _gen in 0..params.generations {
        let mut next_pop: Vec<Vec<f64>> = Vec::with_capacity(pop_n);
        // elitism: carry the best chromosome over
        let best_idx = (0..pop_n).fold(0, |acc, i| if better(&scored[i], &scored[acc]) { i } else { acc });
        next_pop.push(pop[best_idx].clone());
        while next_pop.len() < pop_n {
            let tournament = |rng: &mut ChaCha8Rng| -> usize {
                let mut best = rng.gen_range(0..pop_n);
                for _ in 0..2 {
                    let c = rng.gen_range(0..pop_n);
                    if better(&scored[c], &scored[best]) {
                        best = c;
                    }
                }
                best
            };
            let pa = tournament(&mut rng);
            let pb = tournament(&mut rng);
            let mut child: Vec<f64> = (0..n_arcs)
                .map(|i| if rng.gen_bool(0.5) { pop[pa][i] } else { pop[pb][i] })
                .collect();
            for gene in child.iter_mut() {
                if rng.gen_bool(0.2) {
                    *gene += rng.sample::<f64, _>(rand_distr::StandardNormal) * 0.15;
                }
            }
            next_pop.push(child);
        }
        pop = next_pop;
        scored = pop
            .iter()
            .map(|g| {
                let arcs = decode(g);
                let (ov, comp) = evaluate(&arcs);
                (ov, comp, arcs)
            })
            .collect();
    }

    let best_idx = (0..pop_n).fold(0, |acc, i| if better(&scored[i], &scored[acc]) { i } else { acc });
    let arcs = scored[best_idx].2.clone();
    let mut tree = tree_from_arcs(mesh, root, &arcs, &base_arcs).expect("MST spans");
    tree.heuristic = true;
    if scored[best_idx].0 > 0 {
        let net = layout(mesh, &tree, Provenance { method: "ga".into(), ..Default::default() })?;
        tree.residual_overlaps = net.overlaps;
    }
    Ok(tree)
}
