//! Rigid-folding forward kinematics and the validity queries used by the
//! planners: self-collision, substrate penetration, and laser line of sight.
//!
//! The laser is orthographic from +z. A flip turns the whole assembly over
//! by a half-turn about the x-axis; the root face stays in the z = 0 plane
//! either way.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{polygon_plane_chord, ray_up_hit, v3, Aabb3, Iso3, Plane, Vec3};
use crate::mesh::FaceId;
use crate::planner::Action;
use crate::substrate::{CellId, Substrate};
use crate::unfold::Net;

/// Contact closer than this (mm) is touching, not collision.
pub const CONTACT_TOL: f64 = 1e-6;
/// Crease sample endpoints are inset by this much (mm).
pub const VIS_INSET: f64 = 1e-3;
/// Number of line-of-sight samples per crease.
pub const VIS_SAMPLES: usize = 16;
/// Default sweep discretization (degrees of crease angle per step).
pub const DEFAULT_STEP_DEG: f64 = 1.0;

#[derive(Debug, Error)]
pub enum FoldError {
    #[error("sweep step must be positive, got {0}")]
    Parameter(f64),
}

/// Per-crease fold fractions plus the flip parity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub q: Vec<f64>,
    pub flipped: bool,
}

impl Configuration {
    pub fn flat(n_creases: usize) -> Configuration {
        Configuration { q: vec![0.0; n_creases], flipped: false }
    }
}

/// World-frame poses and polygons for one configuration.
#[derive(Debug, Clone)]
pub struct FoldedState {
    pub poses: Vec<Iso3>,
    pub polys: Vec<Vec<Vec3>>,
    pub planes: Vec<Plane>,
    pub aabbs: Vec<Aabb3>,
}

/// Forward kinematics by pre-order traversal: each child rotates about its
/// hinge (in net coordinates) by fraction times target angle, composed with
/// its parent's pose.
pub fn fold_state(net: &Net, cfg: &Configuration) -> FoldedState {
    assert_eq!(cfg.q.len(), net.creases.len(), "configuration size mismatch");
    let n = net.faces.len();
    let base = if cfg.flipped { Iso3::flip_x() } else { Iso3::identity() };
    let mut poses = vec![base; n];
    // creases are tree arcs; process in depth order so parents come first
    let mut order: Vec<usize> = (0..net.creases.len()).collect();
    order.sort_by_key(|&c| (net.creases[c].depth, c));
    for c in order {
        let crease = &net.creases[c];
        let qc = cfg.q[c];
        let a = v3(crease.a.x, crease.a.y, 0.0);
        let b = v3(crease.b.x, crease.b.y, 0.0);
        let rot = if crease.trivial || qc == 0.0 {
            Iso3::identity()
        } else {
            Iso3::rotation_about_line(a, (b - a).normalized(), qc * crease.angle)
        };
        poses[crease.child] = poses[crease.parent].compose(&rot);
    }
    let polys: Vec<Vec<Vec3>> = (0..n)
        .map(|f| {
            net.faces[f]
                .loop2
                .iter()
                .map(|p| poses[f].apply(v3(p.x, p.y, 0.0)))
                .collect()
        })
        .collect();
    let planes = polys.iter().map(|p| Plane::of_polygon(p)).collect();
    let aabbs = polys.iter().map(|p| Aabb3::of(p)).collect();
    FoldedState { poses, polys, planes, aabbs }
}

/// Transversal intersection of two convex planar polygons in 3D, allowing
/// contact within `tol`. Coplanar stacking is contact, not collision.
fn polygons_cross(pa: &[Vec3], plane_a: &Plane, pb: &[Vec3], plane_b: &Plane, tol: f64) -> bool {
    let straddles = |poly: &[Vec3], plane: &Plane| -> bool {
        let mut above = false;
        let mut below = false;
        for &p in poly {
            let d = plane.signed_dist(p);
            above |= d > tol;
            below |= d < -tol;
        }
        above && below
    };
    if !straddles(pa, plane_b) || !straddles(pb, plane_a) {
        return false;
    }
    let w = plane_a.n.cross(plane_b.n);
    let w2 = w.dot(w);
    if w2 < 1e-18 {
        return false;
    }
    let p0 = (plane_b.n * plane_a.d - plane_a.n * plane_b.d).cross(w) / w2;
    let dir = w / w2.sqrt();
    let ca = match polygon_plane_chord(pa, plane_b, p0, dir) {
        Some(c) => c,
        None => return false,
    };
    let cb = match polygon_plane_chord(pb, plane_a, p0, dir) {
        Some(c) => c,
        None => return false,
    };
    let overlap = ca.1.min(cb.1) - ca.0.max(cb.0);
    overlap > tol
}

/// Non-adjacent face pairs whose polygons cross beyond [`CONTACT_TOL`].
pub fn self_collides(net: &Net, state: &FoldedState) -> Vec<(FaceId, FaceId)> {
    let n = state.polys.len();
    let mut out = Vec::new();
    for f in 0..n {
        for g in f + 1..n {
            if !state.aabbs[f].overlaps(&state.aabbs[g], CONTACT_TOL) || net.adjacent(f, g) {
                continue;
            }
            if polygons_cross(&state.polys[f], &state.planes[f], &state.polys[g], &state.planes[g], CONTACT_TOL) {
                out.push((f, g));
            }
        }
    }
    out
}

/// Like [`self_collides`] but only pairs with one face in `moving`.
fn collides_moving(net: &Net, state: &FoldedState, moving: &[bool]) -> Option<(FaceId, FaceId)> {
    let n = state.polys.len();
    for f in 0..n {
        if !moving[f] {
            continue;
        }
        for g in 0..n {
            if moving[g] {
                continue; // rigid within the moving subtree
            }
            if !state.aabbs[f].overlaps(&state.aabbs[g], CONTACT_TOL) || net.adjacent(f, g) {
                continue;
            }
            if polygons_cross(&state.polys[f], &state.planes[f], &state.polys[g], &state.planes[g], CONTACT_TOL) {
                return Some((f.min(g), f.max(g)));
            }
        }
    }
    None
}

/// Substrate cells whose open slab volume the given faces pass through.
pub fn substrate_penetrations_of(state: &FoldedState, substrate: &Substrate, faces: &[FaceId]) -> BTreeSet<CellId> {
    let mut out = BTreeSet::new();
    for &f in faces {
        substrate.penetrated_cells(&state.polys[f], &mut out);
    }
    out
}

/// Substrate cells whose open slab volume any face passes through.
pub fn substrate_penetrations(state: &FoldedState, substrate: &Substrate) -> BTreeSet<CellId> {
    let all: Vec<FaceId> = (0..state.polys.len()).collect();
    substrate_penetrations_of(state, substrate, &all)
}

/// True when every sample point along the hinge of crease `c` can see the
/// laser: the open vertical ray hits no face other than the two adjacent.
pub fn crease_visible(net: &Net, state: &FoldedState, c: usize) -> bool {
    let crease = &net.creases[c];
    visible_excluding(state, crease, &[crease.parent, crease.child])
}

/// Line-of-sight variant used inside sweeps: the crease's whole moving
/// subtree is ignored, since it rides the fold being scanned. Without this
/// a pre-folded flap doubles back over its own carrier hinge mid-sweep and
/// no lidded shape could ever close.
pub fn crease_visible_in_sweep(net: &Net, state: &FoldedState, c: usize) -> bool {
    let crease = &net.creases[c];
    let mut skip = net.moving_faces(c).to_vec();
    skip.push(crease.parent);
    visible_excluding(state, crease, &skip)
}

fn visible_excluding(state: &FoldedState, crease: &crate::unfold::Crease, skip: &[FaceId]) -> bool {
    let pose = &state.poses[crease.parent];
    let a = pose.apply(v3(crease.a.x, crease.a.y, 0.0));
    let b = pose.apply(v3(crease.b.x, crease.b.y, 0.0));
    let len = a.dist(b);
    if len <= 2.0 * VIS_INSET {
        return true;
    }
    let dir = (b - a) / len;
    let span = len - 2.0 * VIS_INSET;
    for k in 0..VIS_SAMPLES {
        let t = VIS_INSET + span * k as f64 / (VIS_SAMPLES - 1) as f64;
        let p = a + dir * t;
        for f in 0..state.polys.len() {
            if skip.contains(&f) {
                continue;
            }
            if state.aabbs[f].max.z <= p.z + 1e-9 {
                continue;
            }
            if ray_up_hit(p, &state.polys[f], &state.planes[f], 1e-9, 1e-7).is_some() {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Substrate penetrations are collected for clipping.
    Clip,
    /// Substrate penetrations are violations.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ViolationKind {
    SelfCollision(FaceId, FaceId),
    Penetration(CellId),
    Visibility,
}

#[derive(Debug, Clone)]
pub enum SweepOutcome {
    Clear { penetrated: BTreeSet<CellId> },
    Violation { kind: ViolationKind, fraction: f64, penetrated: BTreeSet<CellId> },
}

impl SweepOutcome {
    pub fn is_clear(&self) -> bool {
        matches!(self, SweepOutcome::Clear { .. })
    }
    pub fn penetrated(&self) -> &BTreeSet<CellId> {
        match self {
            SweepOutcome::Clear { penetrated } => penetrated,
            SweepOutcome::Violation { penetrated, .. } => penetrated,
        }
    }
}

/// Simulates one action from `cfg` in angle steps of `step_deg`, checking
/// self-collision, substrate penetration (fatal only in strict mode), and
/// line of sight to the active crease at every step including the endpoints.
/// Flips check the flipped pose for collisions and penetration only.
pub fn sweep(
    net: &Net,
    cfg: &Configuration,
    action: &Action,
    substrate: &Substrate,
    mode: SweepMode,
    step_deg: f64,
) -> Result<SweepOutcome, FoldError> {
    if step_deg <= 0.0 {
        return Err(FoldError::Parameter(step_deg));
    }
    match *action {
        Action::Flip => {
            let mut flipped_cfg = cfg.clone();
            flipped_cfg.flipped = !flipped_cfg.flipped;
            let state = fold_state(net, &flipped_cfg);
            if let Some((f, g)) = self_collides(net, &state).first().copied() {
                return Ok(SweepOutcome::Violation {
                    kind: ViolationKind::SelfCollision(f, g),
                    fraction: 0.0,
                    penetrated: BTreeSet::new(),
                });
            }
            let cells = substrate_penetrations(&state, substrate);
            if mode == SweepMode::Strict {
                if let Some(&cell) = cells.iter().next() {
                    return Ok(SweepOutcome::Violation {
                        kind: ViolationKind::Penetration(cell),
                        fraction: 0.0,
                        penetrated: cells,
                    });
                }
            }
            Ok(SweepOutcome::Clear { penetrated: cells })
        }
        Action::Fold { crease, from, to } => {
            let c = crease;
            debug_assert!((cfg.q[c] - from).abs() < 1e-9, "action start must match configuration");
            let theta = net.creases[c].angle;
            let span_deg = ((to - from) * theta).abs().to_degrees();
            let steps = (span_deg / step_deg).ceil().max(1.0) as usize;
            let moving: Vec<bool> = {
                let mut m = vec![false; net.faces.len()];
                for &f in net.moving_faces(c) {
                    m[f] = true;
                }
                m
            };
            let static_faces: Vec<FaceId> =
                (0..net.faces.len()).filter(|&f| !moving[f]).collect();
            let moving_faces: Vec<FaceId> =
                (0..net.faces.len()).filter(|&f| moving[f]).collect();

            let mut work = cfg.clone();
            let mut penetrated: BTreeSet<CellId> = BTreeSet::new();
            let mut static_cells: Option<BTreeSet<CellId>> = None;
            for k in 0..=steps {
                let fraction = from + (to - from) * k as f64 / steps as f64;
                work.q[c] = fraction;
                let state = fold_state(net, &work);
                let hit = if k == 0 {
                    self_collides(net, &state).first().copied()
                } else {
                    collides_moving(net, &state, &moving)
                };
                if let Some((f, g)) = hit {
                    return Ok(SweepOutcome::Violation {
                        kind: ViolationKind::SelfCollision(f, g),
                        fraction,
                        penetrated,
                    });
                }
                let cells_static = static_cells
                    .get_or_insert_with(|| substrate_penetrations_of(&state, substrate, &static_faces))
                    .clone();
                let mut cells = substrate_penetrations_of(&state, substrate, &moving_faces);
                cells.extend(cells_static);
                if mode == SweepMode::Strict {
                    if let Some(&cell) = cells.iter().next() {
                        return Ok(SweepOutcome::Violation {
                            kind: ViolationKind::Penetration(cell),
                            fraction,
                            penetrated,
                        });
                    }
                }
                penetrated.extend(cells);
                if !net.creases[c].trivial && !crease_visible_in_sweep(net, &state, c) {
                    return Ok(SweepOutcome::Violation {
                        kind: ViolationKind::Visibility,
                        fraction,
                        penetrated,
                    });
                }
            }
            Ok(SweepOutcome::Clear { penetrated })
        }
    }
}

#[cfg(test)]
mod tests;
