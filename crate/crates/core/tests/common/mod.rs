//! Independent oracles for the integration suite: brute-force geometry
//! checks and exhaustive enumerations kept deliberately separate from the
//! library's own algorithms.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use laserfold::foldsim::{fold_state, sweep, Configuration, SweepMode, SweepOutcome};
use laserfold::geom::{v3, Vec2, Vec3};
use laserfold::mesh::{EdgeId, TriMesh};
use laserfold::planner::{completion, direction_ok, Action};
use laserfold::substrate::Substrate;
use laserfold::unfold::Net;

/// Half-plane clipping from scratch (kept independent of the library's
/// separating-axis overlap test).
fn clip(poly: &[Vec2], a: Vec2, b: Vec2) -> Vec<Vec2> {
    // keep the left side of a->b
    let side = |p: Vec2| (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    let n = poly.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let t = sp / (sp - sq);
            out.push(Vec2 { x: p.x + (q.x - p.x) * t, y: p.y + (q.y - p.y) * t });
        }
    }
    out
}

fn shoelace(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        s += p.x * q.y - p.y * q.x;
    }
    s / 2.0
}

/// Open-interior intersection of two convex polygons by polygon clipping:
/// true when the clipped region has real area.
pub fn polygons_overlap_oracle(a: &[Vec2], b: &[Vec2]) -> bool {
    let mut subject: Vec<Vec2> = a.to_vec();
    if shoelace(&subject) < 0.0 {
        subject.reverse();
    }
    let mut clip_poly: Vec<Vec2> = b.to_vec();
    if shoelace(&clip_poly) < 0.0 {
        clip_poly.reverse();
    }
    let n = clip_poly.len();
    for i in 0..n {
        subject = clip(&subject, clip_poly[i], clip_poly[(i + 1) % n]);
        if subject.len() < 3 {
            return false;
        }
    }
    shoelace(&subject).abs() > 1e-8
}

/// All face pairs of a net whose interiors overlap, by the clipping oracle.
pub fn net_overlaps_oracle(net: &Net) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for f in 0..net.faces.len() {
        for g in f + 1..net.faces.len() {
            if net.adjacent(f, g) {
                continue;
            }
            if polygons_overlap_oracle(&net.faces[f].loop2, &net.faces[g].loop2) {
                out.push((f, g));
            }
        }
    }
    out
}

/// Every spanning tree of the mesh dual, as sorted arc lists. Only intended
/// for meshes with at most ~10 faces.
pub fn all_spanning_trees(mesh: &TriMesh) -> Vec<Vec<EdgeId>> {
    let dual = mesh.dual_graph();
    let n = mesh.faces.len();
    let arcs: Vec<(EdgeId, usize, usize)> = dual.arcs.iter().map(|&(e, f0, f1, _)| (e, f0, f1)).collect();
    let k = n - 1;
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    fn rec(
        arcs: &[(EdgeId, usize, usize)],
        start: usize,
        k: usize,
        n: usize,
        pick: &mut Vec<usize>,
        out: &mut Vec<Vec<EdgeId>>,
    ) {
        if pick.len() == k {
            // union-find acyclicity/connectivity check
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut Vec<usize>, x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                r
            }
            for &i in pick.iter() {
                let (_, a, b) = arcs[i];
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    return;
                }
                parent[ra] = rb;
            }
            out.push(pick.iter().map(|&i| arcs[i].0).collect());
            return;
        }
        if start + (k - pick.len()) > arcs.len() {
            return;
        }
        for i in start..arcs.len() {
            pick.push(i);
            rec(arcs, i + 1, k, n, pick, out);
            pick.pop();
            if arcs.len() - i <= k - pick.len() {
                break;
            }
        }
    }
    rec(&arcs, 0, k, n, &mut pick, &mut out);
    out
}

fn tri_plane(t: &[Vec3; 3]) -> (Vec3, f64) {
    let n = (t[1] - t[0]).cross(t[2] - t[0]);
    (n, n.dot(t[0]))
}

fn seg_crosses_tri(a: Vec3, b: Vec3, t: &[Vec3; 3], tol: f64) -> bool {
    let (n, d) = tri_plane(t);
    let da = n.dot(a) - d;
    let db = n.dot(b) - d;
    let scale = n.norm();
    if scale < 1e-12 {
        return false;
    }
    if !((da > tol * scale && db < -tol * scale) || (da < -tol * scale && db > tol * scale)) {
        return false;
    }
    let s = da / (da - db);
    let p = a + (b - a) * s;
    // barycentric containment with a small interior margin
    let v0 = t[1] - t[0];
    let v1 = t[2] - t[0];
    let v2 = p - t[0];
    let d00 = v0.dot(v0);
    let d01 = v0.dot(v1);
    let d11 = v1.dot(v1);
    let d20 = v2.dot(v0);
    let d21 = v2.dot(v1);
    let den = d00 * d11 - d01 * d01;
    let v = (d11 * d20 - d01 * d21) / den;
    let w = (d00 * d21 - d01 * d20) / den;
    let u = 1.0 - v - w;
    let m = 1e-9;
    u > m && v > m && w > m
}

/// Transversal intersection of two planar convex polygons via fan
/// triangulation and edge-through-triangle tests.
pub fn polys_cross_oracle(pa: &[Vec3], pb: &[Vec3]) -> bool {
    let fans = |p: &[Vec3]| -> Vec<[Vec3; 3]> {
        (1..p.len() - 1).map(|i| [p[0], p[i], p[i + 1]]).collect()
    };
    let ta = fans(pa);
    let tb = fans(pb);
    let edges = |p: &[Vec3]| -> Vec<(Vec3, Vec3)> {
        (0..p.len()).map(|i| (p[i], p[(i + 1) % p.len()])).collect()
    };
    for t in &tb {
        for (a, b) in edges(pa) {
            if seg_crosses_tri(a, b, t, 1e-6) {
                return true;
            }
        }
    }
    for t in &ta {
        for (a, b) in edges(pb) {
            if seg_crosses_tri(a, b, t, 1e-6) {
                return true;
            }
        }
    }
    false
}

/// Root-mean-square vertex error between the folded state and the goal mesh
/// after a rigid alignment derived from the root face's frame.
pub fn round_trip_rms(mesh: &TriMesh, net: &Net, cfg: &Configuration) -> f64 {
    let state = fold_state(net, cfg);
    let root = net.root;
    let frame = |pts: &[Vec3]| {
        let u = (pts[1] - pts[0]).normalized();
        let n = laserfold::geom::Plane::of_polygon(pts).n;
        let v = n.cross(u);
        (pts[0], u, v, n)
    };
    let m_pts = mesh.face_points(root);
    let (mo, mu, mv, mn) = frame(&m_pts);
    let (so, su, sv, sn) = frame(&state.polys[root]);
    let mut sum = 0.0;
    let mut count = 0usize;
    for f in 0..mesh.faces.len() {
        let goal = mesh.face_points(f);
        for (i, &sp) in state.polys[f].iter().enumerate() {
            let d = sp - so;
            let local = v3(d.dot(su), d.dot(sv), d.dot(sn));
            let world = mo + mu * local.x + mv * local.y + mn * local.z;
            sum += world.dist(goal[i]).powi(2);
            count += 1;
        }
    }
    (sum / count as f64).sqrt()
}

/// Exhaustive interleaving search over fold-to-max, reopen-to-level, and
/// flip moves under the same admissibility rules the planners obey. Returns
/// the best (completion, least reopened work at that completion).
pub struct ExhaustiveBest {
    pub completion: f64,
    pub unfold_work: f64,
}

pub fn exhaustive_plan_oracle(net: &Net, substrate: &Substrate, step_deg: f64, max_moves: usize) -> ExhaustiveBest {
    #[derive(Clone)]
    struct St {
        cfg: Configuration,
        committed: Vec<Option<f64>>,
        displaced: BTreeSet<usize>,
        unfold_work: f64,
        flips: usize,
    }
    let n = net.creases.len();
    let levels = 8usize;
    let mut best = ExhaustiveBest { completion: -1.0, unfold_work: f64::INFINITY };
    let mut memo: BTreeMap<(Vec<i64>, bool), f64> = BTreeMap::new();

    fn admissible(net: &Net, st: &St, c: usize) -> bool {
        for d in net.descendant_creases(c) {
            if st.displaced.contains(&d) {
                return false;
            }
        }
        let child = net.creases[c].child;
        net.root_path_creases(child).iter().all(|&a| a == c || st.cfg.q[a].abs() <= 1e-9)
    }

    fn apply_move(
        net: &Net,
        substrate: &Substrate,
        step_deg: f64,
        st: &St,
        c: usize,
        target: f64,
    ) -> Option<(St, f64)> {
        // returns the state after moving crease c toward target (with an
        // automatic flip when needed) and the fraction actually reached
        let mut next = st.clone();
        let from = next.cfg.q[c];
        let theta = net.creases[c].angle;
        if (target - from).abs() < 1e-12 {
            return None;
        }
        if !direction_ok(theta, target - from, next.cfg.flipped) {
            let flip_ok = matches!(
                sweep(net, &next.cfg, &Action::Flip, substrate, SweepMode::Clip, step_deg),
                Ok(SweepOutcome::Clear { .. })
            );
            if !flip_ok {
                return None;
            }
            next.cfg.flipped = !next.cfg.flipped;
            next.flips += 1;
        }
        // fold as far as the sweep allows, backing off step by step
        let mut reach = target;
        loop {
            let action = Action::Fold { crease: c, from, to: reach };
            match sweep(net, &next.cfg, &action, substrate, SweepMode::Clip, step_deg).ok()? {
                SweepOutcome::Clear { .. } => break,
                SweepOutcome::Violation { fraction, .. } => {
                    let span_deg = ((reach - from) * theta).abs().to_degrees();
                    let steps = (span_deg / step_deg).ceil().max(1.0);
                    let back = fraction - (reach - from) / steps;
                    if (back - from) * (target - from).signum() <= 1e-9 {
                        return None;
                    }
                    reach = back;
                }
            }
        }
        if reach < from {
            next.unfold_work += (from - reach) * theta.abs() * net.creases[c].len();
        }
        next.cfg.q[c] = reach;
        for d in net.descendant_creases(c) {
            if next.committed[d].is_none() {
                next.committed[d] = Some(next.cfg.q[d]);
            }
        }
        match next.committed[c] {
            Some(v) if (v - reach).abs() > 1e-9 => {
                next.displaced.insert(c);
            }
            Some(_) => {
                next.displaced.remove(&c);
            }
            None => {}
        }
        Some((next, reach))
    }

    fn rec(
        net: &Net,
        substrate: &Substrate,
        step_deg: f64,
        levels: usize,
        st: &St,
        moves_left: usize,
        best: &mut ExhaustiveBest,
        memo: &mut BTreeMap<(Vec<i64>, bool), f64>,
    ) {
        if st.displaced.is_empty() {
            let c = completion(net, &st.cfg.q);
            if c > best.completion + 1e-9 {
                best.completion = c;
                best.unfold_work = st.unfold_work;
            } else if (c - best.completion).abs() <= 1e-9 && st.unfold_work < best.unfold_work {
                best.unfold_work = st.unfold_work;
            }
        }
        if moves_left == 0 {
            return;
        }
        let key = (
            st.cfg.q.iter().map(|q| (q * 1e6).round() as i64).collect::<Vec<_>>(),
            st.cfg.flipped,
        );
        if let Some(&w) = memo.get(&key) {
            if w <= st.unfold_work + 1e-12 {
                return;
            }
        }
        memo.insert(key, st.unfold_work);
        for c in 0..net.creases.len() {
            if net.creases[c].trivial || !admissible(net, st, c) {
                continue;
            }
            // fold toward the target
            if st.cfg.q[c] < 1.0 - 1e-9 {
                if let Some((next, _)) = apply_move(net, substrate, step_deg, st, c, 1.0) {
                    rec(net, substrate, step_deg, levels, &next, moves_left - 1, best, memo);
                }
            }
            // reopen to each lower level
            for k in 0..levels {
                let v = k as f64 / levels as f64;
                if v < st.cfg.q[c] - 1e-9 {
                    if let Some((next, reach)) = apply_move(net, substrate, step_deg, st, c, v) {
                        if (reach - v).abs() < 1e-9 {
                            rec(net, substrate, step_deg, levels, &next, moves_left - 1, best, memo);
                        }
                    }
                }
            }
        }
    }

    let st = St {
        cfg: Configuration::flat(n),
        committed: vec![None; n],
        displaced: BTreeSet::new(),
        unfold_work: 0.0,
        flips: 0,
    };
    rec(net, substrate, step_deg, levels, &st, max_moves, &mut best, &mut memo);
    best
}

/// Builds a net for a mesh with the given tree generator, panicking on error.
pub fn net_for(mesh: &TriMesh) -> Net {
    let root = laserfold::unfold::choose_root(mesh);
    let tree = laserfold::unfold::nearly_blooming(mesh, root, 6, 64).expect("tree");
    laserfold::unfold::layout(mesh, &tree, Default::default()).expect("layout")
}
