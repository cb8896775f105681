//! Built-in goal meshes: reference solids, corpus shapes, and planner
//! fixtures. Everything is generated procedurally and deterministically.
//!
//! Fixture meshes encode their folded goal directly; several are open
//! surfaces (boundary edges are allowed and simply are not creases).

use crate::geom::{v3, Vec3};
use crate::mesh::TriMesh;

fn build(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> TriMesh {
    TriMesh::new(vertices, faces).expect("generated mesh must validate")
}

/// Flips all face loops when the enclosed signed volume is negative, so
/// closed meshes come out with outward normals.
fn closed_outward(vertices: Vec<Vec3>, mut faces: Vec<Vec<usize>>) -> TriMesh {
    let mut vol = 0.0;
    for loop_ in &faces {
        let a = vertices[loop_[0]];
        for i in 1..loop_.len() - 1 {
            let b = vertices[loop_[i]];
            let c = vertices[loop_[i + 1]];
            vol += a.dot(b.cross(c)) / 6.0;
        }
    }
    if vol < 0.0 {
        for loop_ in &mut faces {
            loop_.reverse();
        }
    }
    build(vertices, faces)
}

pub fn cube(s: f64) -> TriMesh {
    box3(s, s, s)
}

/// Axis-aligned box with one corner at the origin.
pub fn box3(dx: f64, dy: f64, dz: f64) -> TriMesh {
    let vertices = vec![
        v3(0.0, 0.0, 0.0),
        v3(dx, 0.0, 0.0),
        v3(dx, dy, 0.0),
        v3(0.0, dy, 0.0),
        v3(0.0, 0.0, dz),
        v3(dx, 0.0, dz),
        v3(dx, dy, dz),
        v3(0.0, dy, dz),
    ];
    let faces = vec![
        vec![0, 3, 2, 1], // bottom, normal -z
        vec![4, 5, 6, 7], // top
        vec![0, 1, 5, 4], // y = 0
        vec![1, 2, 6, 5], // x = dx
        vec![2, 3, 7, 6], // y = dy
        vec![3, 0, 4, 7], // x = 0
    ];
    build(vertices, faces)
}

pub fn tetrahedron(s: f64) -> TriMesh {
    let k = s / 2.0;
    let vertices = vec![
        v3(k, k, k),
        v3(k, -k, -k),
        v3(-k, k, -k),
        v3(-k, -k, k),
    ];
    let faces = vec![vec![0, 1, 2], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]];
    build(vertices, faces)
}

pub fn octahedron(s: f64) -> TriMesh {
    let k = s / 2.0;
    let vertices = vec![
        v3(k, 0.0, 0.0),
        v3(-k, 0.0, 0.0),
        v3(0.0, k, 0.0),
        v3(0.0, -k, 0.0),
        v3(0.0, 0.0, k),
        v3(0.0, 0.0, -k),
    ];
    let faces = vec![
        vec![0, 2, 4],
        vec![2, 1, 4],
        vec![1, 3, 4],
        vec![3, 0, 4],
        vec![2, 0, 5],
        vec![1, 2, 5],
        vec![3, 1, 5],
        vec![0, 3, 5],
    ];
    closed_outward(vertices, faces)
}

fn icosahedron_raw(s: f64) -> (Vec<Vec3>, Vec<Vec<usize>>) {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let k = s / 2.0;
    let mut vertices = vec![
        v3(-1.0, phi, 0.0),
        v3(1.0, phi, 0.0),
        v3(-1.0, -phi, 0.0),
        v3(1.0, -phi, 0.0),
        v3(0.0, -1.0, phi),
        v3(0.0, 1.0, phi),
        v3(0.0, -1.0, -phi),
        v3(0.0, 1.0, -phi),
        v3(phi, 0.0, -1.0),
        v3(phi, 0.0, 1.0),
        v3(-phi, 0.0, -1.0),
        v3(-phi, 0.0, 1.0),
    ];
    for v in &mut vertices {
        *v = *v * (k / v.norm());
    }
    let faces: Vec<Vec<usize>> = vec![
        vec![0, 11, 5],
        vec![0, 5, 1],
        vec![0, 1, 7],
        vec![0, 7, 10],
        vec![0, 10, 11],
        vec![1, 5, 9],
        vec![5, 11, 4],
        vec![11, 10, 2],
        vec![10, 7, 6],
        vec![7, 1, 8],
        vec![3, 9, 4],
        vec![3, 4, 2],
        vec![3, 2, 6],
        vec![3, 6, 8],
        vec![3, 8, 9],
        vec![4, 9, 5],
        vec![2, 4, 11],
        vec![6, 2, 10],
        vec![8, 6, 7],
        vec![9, 8, 1],
    ];
    (vertices, faces)
}

pub fn icosahedron(s: f64) -> TriMesh {
    let (v, f) = icosahedron_raw(s);
    closed_outward(v, f)
}

/// Dodecahedron as the dual of the icosahedron (pentagon per icosa vertex).
pub fn dodecahedron(s: f64) -> TriMesh {
    let (iv, ifaces) = icosahedron_raw(1.0);
    let mut centers = Vec::with_capacity(ifaces.len());
    for f in &ifaces {
        let c = (iv[f[0]] + iv[f[1]] + iv[f[2]]) / 3.0;
        centers.push(c * (s / 2.0 / c.norm()));
    }
    let mut faces = Vec::new();
    for (vi, v) in iv.iter().enumerate() {
        let mut ring: Vec<usize> = (0..ifaces.len()).filter(|&fi| ifaces[fi].contains(&vi)).collect();
        // order the five centers around the vertex direction
        let n = v.normalized();
        let ref0 = (centers[ring[0]] - n * centers[ring[0]].dot(n)).normalized();
        let ref1 = n.cross(ref0);
        ring.sort_by(|&a, &b| {
            let pa = centers[a];
            let pb = centers[b];
            let aa = pa.dot(ref1).atan2(pa.dot(ref0));
            let ab = pb.dot(ref1).atan2(pb.dot(ref0));
            aa.partial_cmp(&ab).unwrap()
        });
        faces.push(ring);
    }
    closed_outward(centers, faces)
}

/// A closed, gently lumpy ~30 mm rabbit-ish test body: a frequency-3
/// geodesic sphere (180 triangles) displaced by smooth radial lobes for the
/// ears, head, and tail. Stays star-shaped, so it is manifold and
/// self-intersection free.
pub fn bunny() -> TriMesh {
    const FREQ: usize = 3;
    let (iv, ifaces) = icosahedron_raw(2.0);
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut index = std::collections::BTreeMap::new();
    let key_of = |p: Vec3| -> (i64, i64, i64) {
        let q = 1e7;
        ((p.x * q).round() as i64, (p.y * q).round() as i64, (p.z * q).round() as i64)
    };
    let mut faces = Vec::new();
    for f in &ifaces {
        let (a, b, c) = (iv[f[0]], iv[f[1]], iv[f[2]]);
        // lattice points p(i, j) = a + (b-a)*i/n + (c-a)*j/n, i + j <= n
        let n = FREQ;
        let mut grid = vec![vec![0usize; n + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=(n - i) {
                let p = a + (b - a) * (i as f64 / n as f64) + (c - a) * (j as f64 / n as f64);
                let p = p.normalized();
                let k = key_of(p);
                let id = *index.entry(k).or_insert_with(|| {
                    vertices.push(p);
                    vertices.len() - 1
                });
                grid[i][j] = id;
            }
        }
        for i in 0..n {
            for j in 0..(n - i) {
                faces.push(vec![grid[i][j], grid[i + 1][j], grid[i][j + 1]]);
                if j < n - i - 1 {
                    faces.push(vec![grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]]);
                }
            }
        }
    }
    // radial lobes: ears, head, tail
    let lobes = [
        (v3(0.30, 0.25, 0.92), 0.55, 0.38),
        (v3(-0.30, 0.25, 0.92), 0.55, 0.38),
        (v3(0.0, 0.85, 0.40), 0.30, 0.55),
        (v3(0.0, -0.95, -0.20), 0.22, 0.45),
    ];
    for v in &mut vertices {
        let dir = v.normalized();
        let mut scale = 1.0;
        for (c, amp, width) in lobes {
            let d = (dir - c.normalized()).norm();
            scale += amp * (-d * d / (width * width)).exp();
        }
        *v = dir * (15.0 * scale);
    }
    closed_outward(vertices, faces)
}

/// Extrudes a rectilinear cross-section (in the xz plane) along y and closes
/// one end with the given convex cap pieces. Every loop in `cap` must reuse
/// cross-section vertex indices.
fn open_prism(section: &[(f64, f64)], cap: &[Vec<usize>], depth: f64) -> TriMesh {
    let n = section.len();
    let mut vertices = Vec::with_capacity(2 * n);
    for &(x, z) in section {
        vertices.push(v3(x, 0.0, z));
    }
    for &(x, z) in section {
        vertices.push(v3(x, depth, z));
    }
    let mut faces = Vec::new();
    // cap at y = 0, outward -y: cross-section loops listed CCW in (x, z)
    for piece in cap {
        faces.push(piece.clone());
    }
    // sides: section edge (i -> i+1) becomes quad [a0, ad, bd, b0]
    for i in 0..n {
        let a = i;
        let b = (i + 1) % n;
        faces.push(vec![a, a + n, b + n, b]);
    }
    build(vertices, faces)
}

/// 8-face open L-shaped prism (one cap, split along a diagonal).
pub fn l_prism(s: f64, depth: f64) -> TriMesh {
    let section: Vec<(f64, f64)> =
        [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
            .iter()
            .map(|&(x, z)| (x * s, z * s))
            .collect();
    let cap = vec![vec![0, 1, 2, 3], vec![0, 3, 4, 5]];
    open_prism(&section, &cap, depth)
}

/// 11-face open U-channel prism (one cap in three convex pieces).
pub fn u_prism(s: f64, depth: f64) -> TriMesh {
    let section: Vec<(f64, f64)> = [
        (0.0, 0.0),
        (3.0, 0.0),
        (3.0, 2.0),
        (2.0, 2.0),
        (2.0, 1.0),
        (1.0, 1.0),
        (1.0, 2.0),
        (0.0, 2.0),
    ]
    .iter()
    .map(|&(x, z)| (x * s, z * s))
    .collect();
    let cap = vec![vec![0, 1, 4, 5], vec![1, 2, 3, 4], vec![0, 5, 6, 7]];
    open_prism(&section, &cap, depth)
}

/// Open accordion strip: `n` quads of size `pitch` x `width` with alternating
/// ridge height `amp`. Mixed mountain/valley targets.
pub fn zigzag(n: usize, width: f64, pitch: f64, amp: f64) -> TriMesh {
    let mut vertices = Vec::new();
    for i in 0..=n {
        let x = i as f64 * pitch;
        let z = if i % 2 == 0 { 0.0 } else { amp };
        vertices.push(v3(x, 0.0, z));
        vertices.push(v3(x, width, z));
    }
    let mut faces = Vec::new();
    for i in 0..n {
        let a = 2 * i;
        faces.push(vec![a, a + 2, a + 3, a + 1]);
    }
    build(vertices, faces)
}

/// Open staircase surface: alternating treads and risers.
pub fn staircase(steps: usize, width: f64, rise: f64, run: f64) -> TriMesh {
    let mut profile = vec![(0.0, 0.0)];
    for i in 0..steps {
        let (x, z) = *profile.last().unwrap();
        profile.push((x + run, z));
        let _ = i;
        profile.push((x + run, z + rise));
    }
    let mut vertices = Vec::new();
    for &(x, z) in &profile {
        vertices.push(v3(x, 0.0, z));
        vertices.push(v3(x, width, z));
    }
    let mut faces = Vec::new();
    for i in 0..profile.len() - 1 {
        let a = 2 * i;
        faces.push(vec![a, a + 2, a + 3, a + 1]);
    }
    build(vertices, faces)
}

/// Square base with four walls, open top.
pub fn open_box(s: f64, h: f64) -> TriMesh {
    let vertices = vec![
        v3(0.0, 0.0, 0.0),
        v3(s, 0.0, 0.0),
        v3(s, s, 0.0),
        v3(0.0, s, 0.0),
        v3(0.0, 0.0, h),
        v3(s, 0.0, h),
        v3(s, s, h),
        v3(0.0, s, h),
    ];
    let faces = vec![
        vec![0, 3, 2, 1],
        vec![0, 1, 5, 4],
        vec![1, 2, 6, 5],
        vec![2, 3, 7, 6],
        vec![3, 0, 4, 7],
    ];
    build(vertices, faces)
}

/// Occlusion fixture: trapezoid base, a long flap that folds 150 degrees into
/// a roof shading the opposite edge, and a short wall on that edge. Folding
/// the roof first makes the wall crease invisible; wall first, both complete.
///
/// Crease order (by edge id): roof = 0, wall = 1. Both depth 1.
pub fn awning() -> TriMesh {
    let ry = 10.0; // base depth
    let la = 13.0; // roof length (reaches past y = 0 when folded)
    let (s150, c150) = (0.5, -(3.0f64.sqrt()) / 2.0);
    let yf = ry + la * c150; // roof far edge y when folded
    let zf = la * s150;
    let vertices = vec![
        v3(4.0, ry, 0.0),  // 0 roof hinge left
        v3(16.0, ry, 0.0), // 1 roof hinge right
        v3(20.0, 0.0, 0.0), // 2 wall hinge right
        v3(0.0, 0.0, 0.0),  // 3 wall hinge left
        v3(4.0, yf, zf),   // 4 roof far, above 0
        v3(16.0, yf, zf),  // 5 roof far, above 1
        v3(20.0, 0.0, 4.0), // 6 wall top, above 2
        v3(0.0, 0.0, 4.0),  // 7 wall top, above 3
    ];
    let faces = vec![
        vec![0, 1, 2, 3],
        vec![0, 4, 5, 1],
        vec![2, 6, 7, 3],
    ];
    build(vertices, faces)
}

/// Forced-unfolding fixture. A skewed long flap A (150 deg) ends up shading
/// the hinge of a low skewed lid C (170 deg), while C's folded lid hovers
/// over A's flat zone and blocks the first degrees of A's own sweep. Reaching
/// full completion requires folding A, then temporarily reopening it to fold
/// C underneath, then closing A again. B is an independent side wall.
///
/// Crease order (by edge id): A = 0, C = 1, B = 2. All depth 1.
pub fn vault() -> TriMesh {
    let (sa, ca) = ((std::f64::consts::PI - 2.617_993_877_991_494_3f64).sin(), 2.617_993_877_991_494_3f64.cos());
    // A folds 150 deg: far points at y = 10 + 12*cos150, z = 12*sin150
    let ya = 10.0 + 12.0 * ca;
    let za = 12.0 * sa;
    let th_c = 170.0f64.to_radians();
    let (sc, cc) = th_c.sin_cos();
    // C folds 170 deg about the x = 17 line: x = 17 + w*cos170, z = w*sin170
    let cx = |w: f64| 17.0 + w * cc;
    let cz = |w: f64| w * sc;
    let vertices = vec![
        v3(1.5, 10.0, 0.0),        // 0 A hinge left
        v3(11.0, 10.0, 0.0),       // 1 A hinge right
        v3(17.0, 5.0, 0.0),        // 2 C hinge top
        v3(17.0, 0.0, 0.0),        // 3 C hinge bottom
        v3(0.0, 0.0, 0.0),         // 4 B hinge bottom
        v3(0.0, 8.0, 0.0),         // 5 B hinge top
        v3(9.0, ya, za),           // 6 A far, above flat (9, 22)
        v3(21.0, ya, za),          // 7 A far, above flat (21, 22)
        v3(0.0, 0.0, 4.0),         // 8 B top, above 4
        v3(0.0, 8.0, 4.0),         // 9 B top, above 5
        v3(cx(10.0), 20.0, cz(10.0)), // 10 C far, from flat (27, 20)
        v3(cx(10.0), 23.0, cz(10.0)), // 11 C far, from flat (27, 23)
    ];
    let faces = vec![
        vec![0, 1, 2, 3, 4, 5],
        vec![0, 6, 7, 1],   // A
        vec![2, 11, 10, 3], // C
        vec![4, 8, 9, 5],   // B
    ];
    build(vertices, faces)
}

/// Self-collision fixture: a standing wall and a long tapered wing whose
/// sweep passes through the wall's plane late in its fold. The folded goal
/// interpenetrates on purpose; only the kinematics are exercised.
pub fn wing_wall() -> TriMesh {
    let th = 150.0f64.to_radians();
    let (s, c) = th.sin_cos();
    let wx = |u: f64| -u * c; // wing folds about x = 0
    let wz = |u: f64| u * s;
    let vertices = vec![
        v3(12.0, 14.0, 0.0),           // 0 wall hinge
        v3(12.0, 0.0, 0.0),            // 1 wall hinge
        v3(0.0, 0.0, 0.0),             // 2 wing hinge
        v3(0.0, 14.0, 0.0),            // 3 wing hinge
        v3(12.0, 14.0, 10.0),          // 4 wall top, above 0
        v3(12.0, 0.0, 10.0),           // 5 wall top, above 1
        v3(wx(20.0), 6.0, wz(20.0)),   // 6 wing far, from flat (-20, 6)
        v3(wx(20.0), 8.0, wz(20.0)),   // 7 wing far, from flat (-20, 8)
    ];
    let faces = vec![
        vec![0, 1, 2, 3],
        vec![0, 4, 5, 1], // wall, +90
        vec![2, 6, 7, 3], // wing, +150
    ];
    build(vertices, faces)
}

/// Substrate fixture: a chain base - wall - flap where the committed flap
/// overhangs the wall hinge, so closing the wall sweeps the flap tip below
/// the plane (the goal itself ends 2.1 mm deep).
pub fn dip_chain() -> TriMesh {
    let l = 14.0;
    let th = 150.0f64.to_radians();
    let (s, c) = th.sin_cos();
    // flap at the goal: the point u along the flap sits at
    // (x, 10 - u*sin150, 10 + u*cos150) after the wall's own 90-degree fold.
    // The wall is sheared +x so the flap's dip lands beside the base, on
    // bare substrate, instead of through the base face.
    let fy = |u: f64| 10.0 - u * s;
    let fz = |u: f64| 10.0 + u * c;
    let vertices = vec![
        v3(0.0, -6.0, 0.0),         // 0
        v3(10.0, -6.0, 0.0),        // 1
        v3(10.0, 10.0, 0.0),        // 2 wall hinge
        v3(0.0, 10.0, 0.0),         // 3 wall hinge
        v3(22.0, 10.0, 10.0),       // 4 wall top / flap hinge
        v3(12.0, 10.0, 10.0),       // 5 wall top / flap hinge
        v3(22.0, fy(l), fz(l)),     // 6 flap far, above 4
        v3(12.0, fy(l), fz(l)),     // 7 flap far, above 5
    ];
    let faces = vec![
        vec![0, 3, 2, 1],   // base, normal -z; traverses hinge 3->2
        vec![3, 5, 4, 2],   // wall, traverses 2->3 and 5->4
        vec![5, 7, 6, 4],   // flap, traverses 4->5
    ];
    build(vertices, faces)
}

/// Five-face strip whose goal is a squashed tube: the last face lands
/// exactly coplanar with (and on top of) the first. Folded flat states are
/// contact, not collision.
pub fn flat_tube() -> TriMesh {
    let profile = [(0.0, 0.0), (10.0, 0.0), (10.0, 3.0), (0.0, 3.0), (0.0, 0.0), (10.0, 0.0)];
    let mut vertices = Vec::new();
    for &(x, z) in &profile {
        vertices.push(v3(x, 0.0, z));
        vertices.push(v3(x, 10.0, z));
    }
    let mut faces = Vec::new();
    for i in 0..profile.len() - 1 {
        let a = 2 * i;
        faces.push(vec![a, a + 1, a + 3, a + 2]);
    }
    build(vertices, faces)
}

/// Visibility fixture: trapezoid base, a 160-degree roof flap, and a short
/// skirt whose crease sits in the roof's shadow.
pub fn flap_shadow() -> TriMesh {
    let th = 160.0f64.to_radians();
    let (s, c) = th.sin_cos();
    let l = 13.0;
    let vertices = vec![
        v3(4.0, 10.0, 0.0),               // 0 roof hinge
        v3(16.0, 10.0, 0.0),              // 1 roof hinge
        v3(20.0, 0.0, 0.0),               // 2 skirt hinge
        v3(0.0, 0.0, 0.0),                // 3 skirt hinge
        v3(4.0, 10.0 + l * c, l * s),     // 4 roof far, above 0
        v3(16.0, 10.0 + l * c, l * s),    // 5 roof far, above 1
        v3(20.0, 0.0, 4.0),               // 6 skirt top, above 2
        v3(0.0, 0.0, 4.0),                // 7 skirt top, above 3
    ];
    let faces = vec![
        vec![0, 1, 2, 3],
        vec![0, 4, 5, 1],
        vec![2, 6, 7, 3],
    ];
    build(vertices, faces)
}
