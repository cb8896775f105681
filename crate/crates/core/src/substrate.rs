//! Sacrificial substrate: a uniform grid slab just below the sheet plane.
//! Cells the workpiece sweeps through during fabrication are clipped
//! (cut out) beforehand; their count is the objective `F`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{clip_convex_halfplane, v2, v3, Vec2, Vec3};
use crate::unfold::Net;

/// Column-major cell index (ix, iy).
pub type CellId = (usize, usize);

/// Face portions closer to the slab boundary than this (mm) do not count as
/// being inside the open slab volume.
const SLAB_EPS: f64 = 1e-9;
/// Contact narrower than this (mm) against a cell wall is not penetration.
const CELL_EPS: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum SubstrateError {
    #[error("substrate parameter must be positive: {0}")]
    Parameter(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substrate {
    pub origin: Vec2,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    /// Slab thickness: the slab occupies z in (-h, 0).
    pub h: f64,
    pub clipped: BTreeSet<CellId>,
}

/// Grid covering the net's bounding box inflated by one cell ring, anchored
/// at the bounding-box min corner.
pub fn make_substrate(net: &Net, cell: f64, h: f64) -> Result<Substrate, SubstrateError> {
    if cell <= 0.0 {
        return Err(SubstrateError::Parameter("cell"));
    }
    if h <= 0.0 {
        return Err(SubstrateError::Parameter("h"));
    }
    let mut min = v2(f64::INFINITY, f64::INFINITY);
    let mut max = v2(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for f in &net.faces {
        for p in &f.loop2 {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
    }
    let nx = (((max.x - min.x) / cell).ceil() as usize).max(1) + 2;
    let ny = (((max.y - min.y) / cell).ceil() as usize).max(1) + 2;
    Ok(Substrate {
        origin: v2(min.x - cell, min.y - cell),
        cell,
        nx,
        ny,
        h,
        clipped: BTreeSet::new(),
    })
}

impl Substrate {
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_min(&self, id: CellId) -> Vec2 {
        v2(self.origin.x + id.0 as f64 * self.cell, self.origin.y + id.1 as f64 * self.cell)
    }

    /// Adds to `out` every cell whose open box (cell x cell x slab) the given
    /// planar polygon passes through.
    pub fn penetrated_cells(&self, poly: &[Vec3], out: &mut BTreeSet<CellId>) {
        let zmin = poly.iter().fold(f64::INFINITY, |a, p| a.min(p.z));
        let zmax = poly.iter().fold(f64::NEG_INFINITY, |a, p| a.max(p.z));
        if zmin >= -SLAB_EPS || zmax <= -self.h + SLAB_EPS {
            return;
        }
        // clip to the open slab
        let piece = clip3_halfspace(poly, v3(0.0, 0.0, 1.0), -SLAB_EPS);
        let piece = clip3_halfspace(&piece, v3(0.0, 0.0, -1.0), self.h - SLAB_EPS);
        if piece.len() < 2 {
            return;
        }
        let flat: Vec<Vec2> = piece.iter().map(|p| v2(p.x, p.y)).collect();
        let (mut lo_x, mut lo_y) = (f64::INFINITY, f64::INFINITY);
        let (mut hi_x, mut hi_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &flat {
            lo_x = lo_x.min(p.x);
            lo_y = lo_y.min(p.y);
            hi_x = hi_x.max(p.x);
            hi_y = hi_y.max(p.y);
        }
        let ix0 = (((lo_x - self.origin.x) / self.cell).floor().max(0.0)) as usize;
        let iy0 = (((lo_y - self.origin.y) / self.cell).floor().max(0.0)) as usize;
        let ix1 = ((((hi_x - self.origin.x) / self.cell).floor()) as isize).min(self.nx as isize - 1);
        let iy1 = ((((hi_y - self.origin.y) / self.cell).floor()) as isize).min(self.ny as isize - 1);
        if ix1 < 0 || iy1 < 0 {
            return;
        }
        for ix in ix0..=(ix1 as usize) {
            for iy in iy0..=(iy1 as usize) {
                let id = (ix, iy);
                if out.contains(&id) {
                    continue;
                }
                let min = self.cell_min(id);
                // shrink the cell so wall contact does not count
                let x0 = min.x + CELL_EPS;
                let y0 = min.y + CELL_EPS;
                let x1 = min.x + self.cell - CELL_EPS;
                let y1 = min.y + self.cell - CELL_EPS;
                let mut clipped = flat.clone();
                for (n, d) in [
                    (v2(-1.0, 0.0), -x0),
                    (v2(1.0, 0.0), x1),
                    (v2(0.0, -1.0), -y0),
                    (v2(0.0, 1.0), y1),
                ] {
                    clipped = clip_convex_halfplane(&clipped, n, d);
                    if clipped.is_empty() {
                        break;
                    }
                }
                // surviving piece must have real extent, not a grazing point
                let mut diam: f64 = 0.0;
                for i in 0..clipped.len() {
                    for j in i + 1..clipped.len() {
                        diam = diam.max(clipped[i].dist(clipped[j]));
                    }
                }
                if diam > 1e-9 {
                    out.insert(id);
                }
            }
        }
    }
}

fn clip3_halfspace(poly: &[Vec3], n: Vec3, d: f64) -> Vec<Vec3> {
    // keep n·p <= d
    let len = poly.len();
    let mut out = Vec::with_capacity(len + 1);
    for i in 0..len {
        let cur = poly[i];
        let nxt = poly[(i + 1) % len];
        let dc = n.dot(cur) - d;
        let dn = n.dot(nxt) - d;
        if dc <= 0.0 {
            out.push(cur);
        }
        if (dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0) {
            let t = dc / (dc - dn);
            out.push(cur + (nxt - cur) * t);
        }
    }
    out
}

/// Union of per-step penetrations for a verified plan; `F` is the count.
pub fn clip_plan(net: &Net, plan: &crate::planner::Plan, substrate: &Substrate) -> Substrate {
    let mut out = substrate.clone();
    out.clipped = crate::planner::replay_penetrations(net, plan, substrate);
    out
}
