//! Small fixed-size linear algebra and convex polygon predicates.
//!
//! Everything operates on `f64` millimeters. Polygons are convex, stored as
//! vertex loops; 2D loops may wind either way unless a function says otherwise.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const fn v2(x: f64, y: f64) -> Vec2 {
    Vec2 { x, y }
}

pub const fn v3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3 { x, y, z }
}

impl Vec2 {
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }
    /// z-component of the 3D cross product of the two vectors lifted to z=0.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }
    pub fn perp(self) -> Vec2 {
        v2(-self.y, self.x)
    }
    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Vec3 {
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }
    pub fn cross(self, o: Vec3) -> Vec3 {
        v3(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
    pub fn normalized(self) -> Vec3 {
        self / self.norm()
    }
    pub fn dist(self, o: Vec3) -> f64 {
        (self - o).norm()
    }
}

macro_rules! impl_vec_ops {
    ($t:ty { $($f:ident),+ }) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t { Self { $($f: self.$f + o.$f),+ } }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t { Self { $($f: self.$f - o.$f),+ } }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t { Self { $($f: -self.$f),+ } }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t { Self { $($f: self.$f * s),+ } }
        }
        impl Div<f64> for $t {
            type Output = $t;
            fn div(self, s: f64) -> $t { Self { $($f: self.$f / s),+ } }
        }
    };
}

impl_vec_ops!(Vec2 { x, y });
impl_vec_ops!(Vec3 { x, y, z });

/// Proper (orientation-preserving) rigid motion of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iso2 {
    pub cos: f64,
    pub sin: f64,
    pub t: Vec2,
}

impl Iso2 {
    pub fn identity() -> Iso2 {
        Iso2 { cos: 1.0, sin: 0.0, t: v2(0.0, 0.0) }
    }
    pub fn rotation(angle: f64) -> Iso2 {
        Iso2 { cos: angle.cos(), sin: angle.sin(), t: v2(0.0, 0.0) }
    }
    pub fn translation(t: Vec2) -> Iso2 {
        Iso2 { cos: 1.0, sin: 0.0, t }
    }
    pub fn apply(&self, p: Vec2) -> Vec2 {
        v2(
            self.cos * p.x - self.sin * p.y + self.t.x,
            self.sin * p.x + self.cos * p.y + self.t.y,
        )
    }
    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Iso2) -> Iso2 {
        Iso2 {
            cos: self.cos * other.cos - self.sin * other.sin,
            sin: self.sin * other.cos + self.cos * other.sin,
            t: self.apply(other.t),
        }
    }
    /// The unique proper rigid motion sending `(p0, p1)` to `(q0, q1)`;
    /// segment lengths must agree.
    pub fn from_segment_match(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> Iso2 {
        let a = (p1 - p0).angle();
        let b = (q1 - q0).angle();
        let rot = Iso2::rotation(b - a);
        let t = q0 - rot.apply(p0);
        Iso2 { t, ..rot }
    }
}

/// Rigid motion of 3-space: rotation matrix (row-major) plus translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iso3 {
    pub m: [[f64; 3]; 3],
    pub t: Vec3,
}

impl Iso3 {
    pub fn identity() -> Iso3 {
        Iso3 { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], t: v3(0.0, 0.0, 0.0) }
    }

    /// Rotation by `angle` about the line through `point` with unit direction `axis`.
    pub fn rotation_about_line(point: Vec3, axis: Vec3, angle: f64) -> Iso3 {
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let (x, y, z) = (axis.x, axis.y, axis.z);
        let m = [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ];
        let rot = Iso3 { m, t: v3(0.0, 0.0, 0.0) };
        let t = point - rot.apply(point);
        Iso3 { m, t }
    }

    /// Rotation by π about the x-axis through the origin (the rotary flip).
    pub fn flip_x() -> Iso3 {
        Iso3 { m: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]], t: v3(0.0, 0.0, 0.0) }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        v3(
            self.m[0][0] * p.x + self.m[0][1] * p.y + self.m[0][2] * p.z + self.t.x,
            self.m[1][0] * p.x + self.m[1][1] * p.y + self.m[1][2] * p.z + self.t.y,
            self.m[2][0] * p.x + self.m[2][1] * p.y + self.m[2][2] * p.z + self.t.z,
        )
    }

    pub fn apply_vec(&self, p: Vec3) -> Vec3 {
        v3(
            self.m[0][0] * p.x + self.m[0][1] * p.y + self.m[0][2] * p.z,
            self.m[1][0] * p.x + self.m[1][1] * p.y + self.m[1][2] * p.z,
            self.m[2][0] * p.x + self.m[2][1] * p.y + self.m[2][2] * p.z,
        )
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Iso3) -> Iso3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Iso3 { m, t: self.apply(other.t) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb2 {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb2 {
    pub fn of(points: &[Vec2]) -> Aabb2 {
        let mut min = v2(f64::INFINITY, f64::INFINITY);
        let mut max = v2(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Aabb2 { min, max }
    }
    pub fn overlaps(&self, o: &Aabb2, margin: f64) -> bool {
        self.min.x <= o.max.x + margin
            && o.min.x <= self.max.x + margin
            && self.min.y <= o.max.y + margin
            && o.min.y <= self.max.y + margin
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb3 {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb3 {
    pub fn of(points: &[Vec3]) -> Aabb3 {
        let mut min = v3(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut max = v3(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            min.z = min.z.min(p.z);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
            max.z = max.z.max(p.z);
        }
        Aabb3 { min, max }
    }
    pub fn overlaps(&self, o: &Aabb3, margin: f64) -> bool {
        self.min.x <= o.max.x + margin
            && o.min.x <= self.max.x + margin
            && self.min.y <= o.max.y + margin
            && o.min.y <= self.max.y + margin
            && self.min.z <= o.max.z + margin
            && o.min.z <= self.max.z + margin
    }
}

/// Signed area of a simple polygon (positive when counter-clockwise).
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    s * 0.5
}

pub fn centroid2(poly: &[Vec2]) -> Vec2 {
    let mut c = v2(0.0, 0.0);
    for p in poly {
        c = c + *p;
    }
    c / poly.len() as f64
}

/// Least overlap extent of two convex polygons over all edge-normal axes.
///
/// Positive: interiors interpenetrate by that depth. Zero/negative: touching
/// or separated by that gap. This is the separating-axis test; both windings
/// are accepted.
pub fn convex_overlap_depth(a: &[Vec2], b: &[Vec2]) -> f64 {
    debug_assert!(a.len() >= 3 && b.len() >= 3);
    let mut depth = f64::INFINITY;
    for (poly, other) in [(a, b), (b, a)] {
        let n = poly.len();
        for i in 0..n {
            let edge = poly[(i + 1) % n] - poly[i];
            let len = edge.norm();
            if len <= 0.0 {
                continue;
            }
            let axis = edge.perp() / len;
            let (min_a, max_a) = project(poly, axis);
            let (min_b, max_b) = project(other, axis);
            let overlap = (max_a - min_b).min(max_b - min_a);
            depth = depth.min(overlap);
            if depth <= f64::NEG_INFINITY {
                break;
            }
        }
    }
    depth
}

fn project(poly: &[Vec2], axis: Vec2) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in poly {
        let d = p.dot(axis);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

/// Clips a convex polygon to the half-plane `n·p <= d`. Works for any winding.
pub fn clip_convex_halfplane(poly: &[Vec2], n: Vec2, d: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let len = poly.len();
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

/// Area of the intersection of two convex polygons (winding-insensitive).
pub fn convex_intersection_area(a: &[Vec2], b: &[Vec2]) -> f64 {
    let mut poly: Vec<Vec2> = a.to_vec();
    if signed_area(&poly) < 0.0 {
        poly.reverse();
    }
    let mut clipper: Vec<Vec2> = b.to_vec();
    if signed_area(&clipper) < 0.0 {
        clipper.reverse();
    }
    let n = clipper.len();
    for i in 0..n {
        if poly.len() < 3 {
            return 0.0;
        }
        let p0 = clipper[i];
        let p1 = clipper[(i + 1) % n];
        // interior of a CCW clipper is left of each edge: normal points right
        let edge = p1 - p0;
        let normal = v2(edge.y, -edge.x);
        poly = clip_convex_halfplane(&poly, normal, normal.dot(p0));
    }
    if poly.len() < 3 {
        0.0
    } else {
        signed_area(&poly).abs()
    }
}

/// True when `p` lies inside the convex polygon with at least `margin`
/// clearance from every edge (negative margin admits boundary points).
pub fn point_in_convex(p: Vec2, poly: &[Vec2], margin: f64) -> bool {
    let ccw = signed_area(poly) >= 0.0;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        let len = e.norm();
        if len <= 0.0 {
            continue;
        }
        let side = e.cross(p - a) / len;
        let inside = if ccw { side } else { -side };
        if inside < margin {
            return false;
        }
    }
    true
}

/// Plane through a planar polygon: unit normal and offset (`n·p = d`).
#[derive(Debug, Clone, Copy)]
pub struct Plane {
    pub n: Vec3,
    pub d: f64,
}

impl Plane {
    /// Newell's method; robust for nearly-degenerate loops.
    pub fn of_polygon(poly: &[Vec3]) -> Plane {
        let mut n = v3(0.0, 0.0, 0.0);
        let len = poly.len();
        let mut c = v3(0.0, 0.0, 0.0);
        for i in 0..len {
            let a = poly[i];
            let b = poly[(i + 1) % len];
            n.x += (a.y - b.y) * (a.z + b.z);
            n.y += (a.z - b.z) * (a.x + b.x);
            n.z += (a.x - b.x) * (a.y + b.y);
            c = c + a;
        }
        let n = n.normalized();
        Plane { n, d: n.dot(c / len as f64) }
    }

    pub fn signed_dist(&self, p: Vec3) -> f64 {
        self.n.dot(p) - self.d
    }
}

/// The chord where a planar convex polygon crosses another plane, as an
/// interval along `line_dir` (a unit vector in that plane). Returns `None`
/// when the polygon does not reach the plane.
pub fn polygon_plane_chord(poly: &[Vec3], plane: &Plane, line_point: Vec3, line_dir: Vec3) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = poly.len();
    let mut any = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let da = plane.signed_dist(a);
        let db = plane.signed_dist(b);
        if da == 0.0 {
            let t = (a - line_point).dot(line_dir);
            lo = lo.min(t);
            hi = hi.max(t);
            any = true;
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            let p = a + (b - a) * t;
            let s = (p - line_point).dot(line_dir);
            lo = lo.min(s);
            hi = hi.max(s);
            any = true;
        }
    }
    if any {
        Some((lo, hi))
    } else {
        None
    }
}

/// Intersection of the open upward ray from `origin` with a planar convex
/// polygon: the ray parameter `t > t_min` of the hit, if any. Polygons
/// parallel to the ray never hit.
pub fn ray_up_hit(origin: Vec3, poly: &[Vec3], plane: &Plane, t_min: f64, interior_margin: f64) -> Option<f64> {
    let denom = plane.n.z;
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (plane.d - plane.n.dot(origin)) / denom;
    if t <= t_min {
        return None;
    }
    let hit = origin + v3(0.0, 0.0, t);
    // test in the polygon's dominant-axis projection
    let (proj, hit2) = project_to_plane_2d(poly, plane, hit);
    if point_in_convex(hit2, &proj, interior_margin) {
        Some(t)
    } else {
        None
    }
}

/// Projects a planar 3D polygon (and one extra point) to 2D by dropping the
/// dominant normal axis; preserves containment relations.
fn project_to_plane_2d(poly: &[Vec3], plane: &Plane, extra: Vec3) -> (Vec<Vec2>, Vec2) {
    let ax = plane.n.x.abs();
    let ay = plane.n.y.abs();
    let az = plane.n.z.abs();
    let pick = if az >= ax && az >= ay {
        |p: Vec3| v2(p.x, p.y)
    } else if ay >= ax {
        |p: Vec3| v2(p.x, p.z)
    } else {
        |p: Vec3| v2(p.y, p.z)
    };
    (poly.iter().map(|&p| pick(p)).collect(), pick(extra))
}
