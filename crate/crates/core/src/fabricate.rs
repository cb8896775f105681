//! Fabrication accounting and output generation: the energy model, the
//! `.lfi` laser-instruction stream, SVG nets, and OBJ fold snapshots.
//!
//! `.lfi` grammar (UTF-8, one instruction per line, mm, 4 decimals):
//!
//! ```text
//! LFI 1
//! UNITS MM
//! CALIB <sha256 of calibration JSON>
//! CUT x0 y0 x1 y1 [x2 y2 ...]
//! FOLD <crease-id> x0 y0 x1 y1 ANGLE <signed degrees> PASSES <int> POWER <W> SPEED <mm/s>
//! FLIP
//! END
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::foldsim::{fold_state, Configuration};
use crate::geom::{v2, Vec2};
use crate::planner::{Action, Plan};
use crate::substrate::Substrate;
use crate::unfold::Net;

#[derive(Debug, Error)]
pub enum FabError {
    #[error("plan is not verified; refusing to emit")]
    Refused,
    #[error("calibration field {0} must be positive")]
    Calibration(&'static str),
    #[error("fold instruction for crease {crease} leaves the laser plane (z = {z:.6})")]
    NotFlat { crease: usize, z: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub fold_power_w: f64,
    pub fold_speed_mm_s: f64,
    pub passes_per_degree: f64,
    pub cut_power_w: f64,
    pub cut_speed_mm_s: f64,
    pub flip_cost_j: f64,
    pub thickness_mm: f64,
    pub kerf_mm: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            fold_power_w: 40.0,
            fold_speed_mm_s: 50.0,
            passes_per_degree: 0.5,
            cut_power_w: 80.0,
            cut_speed_mm_s: 8.0,
            flip_cost_j: 0.0,
            thickness_mm: 1.0,
            kerf_mm: 0.2,
        }
    }
}

impl Calibration {
    pub fn validate(&self) -> Result<(), FabError> {
        let fields = [
            (self.fold_power_w, "fold_power_w"),
            (self.fold_speed_mm_s, "fold_speed_mm_s"),
            (self.passes_per_degree, "passes_per_degree"),
            (self.cut_power_w, "cut_power_w"),
            (self.cut_speed_mm_s, "cut_speed_mm_s"),
            (self.thickness_mm, "thickness_mm"),
            (self.kerf_mm, "kerf_mm"),
        ];
        for (v, name) in fields {
            if v <= 0.0 {
                return Err(FabError::Calibration(name));
            }
        }
        if self.flip_cost_j < 0.0 {
            return Err(FabError::Calibration("flip_cost_j"));
        }
        Ok(())
    }

    pub fn sha256(&self) -> String {
        let json = serde_json::to_string(self).expect("calibration serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        hex_string(&h.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub fn passes_for(calib: &Calibration, delta_deg: f64) -> u64 {
    (calib.passes_per_degree * delta_deg.abs()).ceil() as u64
}

/// Modeled fabrication energy in joules: cutting the net outline and the
/// clipped substrate cells, plus one scan pass-set per fold action
/// (reopening costs the same as folding), plus flip bookkeeping.
pub fn energy(plan: &Plan, net: &Net, calib: &Calibration) -> f64 {
    let cut_len: f64 = net.cuts.iter().map(|c| c.a.dist(c.b)).sum();
    let clip_len = plan.penetrated.len() as f64 * 4.0 * plan.cell;
    let e_cut = calib.cut_power_w * (cut_len + clip_len) / calib.cut_speed_mm_s;
    let mut e_fold = 0.0;
    let mut flips = 0u64;
    for step in &plan.steps {
        match step.action {
            Action::Flip => flips += 1,
            Action::Fold { crease, from, to } => {
                let hinge = net.creases[crease].len();
                let delta_deg = ((to - from) * net.creases[crease].angle).to_degrees();
                let passes = passes_for(calib, delta_deg);
                e_fold += calib.fold_power_w * (hinge * passes as f64) / calib.fold_speed_mm_s;
            }
        }
    }
    e_cut + e_fold + flips as f64 * calib.flip_cost_j
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instr {
    Cut(Vec<Vec2>),
    Fold { crease: usize, a: Vec2, b: Vec2, angle_deg: f64, passes: u64, power: f64, speed: f64 },
    Flip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserJob {
    pub calib_sha256: String,
    pub instructions: Vec<Instr>,
}

impl LaserJob {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("LFI 1\n");
        out.push_str("UNITS MM\n");
        let _ = writeln!(out, "CALIB {}", self.calib_sha256);
        for instr in &self.instructions {
            match instr {
                Instr::Cut(points) => {
                    out.push_str("CUT");
                    for p in points {
                        let _ = write!(out, " {:.4} {:.4}", p.x, p.y);
                    }
                    out.push('\n');
                }
                Instr::Fold { crease, a, b, angle_deg, passes, power, speed } => {
                    let _ = writeln!(
                        out,
                        "FOLD {crease} {:.4} {:.4} {:.4} {:.4} ANGLE {angle_deg:.4} PASSES {passes} POWER {power:.4} SPEED {speed:.4}",
                        a.x, a.y, b.x, b.y
                    );
                }
                Instr::Flip => out.push_str("FLIP\n"),
            }
        }
        out.push_str("END\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitMode {
    Interleaved,
    AllCutsFirst,
}

/// Emits the instruction stream for a verified plan. In interleaved mode the
/// clipped-cell cuts come first, and each face's outline cuts appear right
/// before the first fold that moves it (while it still lies flat at its net
/// position); cuts never needed by a fold go just before END. Byte-for-byte
/// deterministic.
pub fn emit(
    plan: &Plan,
    net: &Net,
    substrate: &Substrate,
    calib: &Calibration,
    mode: EmitMode,
) -> Result<LaserJob, FabError> {
    if !plan.verified {
        return Err(FabError::Refused);
    }
    calib.validate()?;
    let mut instructions = Vec::new();

    // clipped substrate cells as closed rectangles
    for &cell in &substrate.clipped {
        let min = substrate.cell_min(cell);
        let s = substrate.cell;
        instructions.push(Instr::Cut(vec![
            min,
            v2(min.x + s, min.y),
            v2(min.x + s, min.y + s),
            v2(min.x, min.y + s),
            min,
        ]));
    }

    let mirror = |p: Vec2, flipped: bool| if flipped { v2(p.x, -p.y) } else { p };
    let face_cuts = |f: usize, flipped: bool| -> Vec<Instr> {
        net.cuts
            .iter()
            .filter(|c| c.face == f)
            .map(|c| Instr::Cut(vec![mirror(c.a, flipped), mirror(c.b, flipped)]))
            .collect()
    };

    let mut cut_done = vec![false; net.faces.len()];
    if mode == EmitMode::AllCutsFirst {
        for f in 0..net.faces.len() {
            instructions.extend(face_cuts(f, false));
            cut_done[f] = true;
        }
    }

    let mut cfg = Configuration::flat(net.creases.len());
    let mut folded_once = vec![false; net.creases.len()];
    for step in &plan.steps {
        match step.action {
            Action::Flip => {
                instructions.push(Instr::Flip);
                cfg.flipped = !cfg.flipped;
            }
            Action::Fold { crease, from, to } => {
                if !folded_once[crease] {
                    folded_once[crease] = true;
                    // free every face this fold moves
                    for &f in net.moving_faces(crease) {
                        if !cut_done[f] {
                            cut_done[f] = true;
                            instructions.extend(face_cuts(f, cfg.flipped));
                        }
                    }
                }
                let state = fold_state(net, &cfg);
                let c = &net.creases[crease];
                let a3 = state.poses[c.parent].apply(crate::geom::v3(c.a.x, c.a.y, 0.0));
                let b3 = state.poses[c.parent].apply(crate::geom::v3(c.b.x, c.b.y, 0.0));
                if a3.z.abs() > 1e-6 || b3.z.abs() > 1e-6 {
                    return Err(FabError::NotFlat { crease, z: a3.z.abs().max(b3.z.abs()) });
                }
                let delta_deg = ((to - from) * c.angle).to_degrees();
                instructions.push(Instr::Fold {
                    crease,
                    a: v2(a3.x, a3.y),
                    b: v2(b3.x, b3.y),
                    angle_deg: delta_deg,
                    passes: passes_for(calib, delta_deg),
                    power: calib.fold_power_w,
                    speed: calib.fold_speed_mm_s,
                });
                cfg.q[crease] = to;
            }
        }
    }

    // release cuts for faces no fold ever moved (root and frozen subtrees)
    for f in 0..net.faces.len() {
        if !cut_done[f] {
            instructions.extend(face_cuts(f, cfg.flipped));
        }
    }

    Ok(LaserJob { calib_sha256: calib.sha256(), instructions })
}

/// SVG of the net: solid cuts, dashed valley creases, dash-dotted mountain
/// creases, plus the clipped-cell overlay when a substrate is given.
/// One user unit is one millimeter.
pub fn export_svg(net: &Net, substrate: Option<&Substrate>) -> String {
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
    let pad = 2.0;
    let (w, h) = (max.x - min.x + 2.0 * pad, max.y - min.y + 2.0 * pad);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.4} {:.4} {:.4} {:.4}" width="{w:.4}mm" height="{h:.4}mm">"#,
        min.x - pad,
        min.y - pad,
        w,
        h
    );
    if let Some(sub) = substrate {
        out.push_str("  <g id=\"clip\" fill=\"#fbb\" stroke=\"none\">\n");
        for &cell in &sub.clipped {
            let m = sub.cell_min(cell);
            let _ = writeln!(
                out,
                r#"    <rect x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}"/>"#,
                m.x, m.y, sub.cell, sub.cell
            );
        }
        out.push_str("  </g>\n");
    }
    let line = |out: &mut String, a: Vec2, b: Vec2| {
        let _ = writeln!(
            out,
            r#"    <line x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}"/>"#,
            a.x, a.y, b.x, b.y
        );
    };
    out.push_str("  <g id=\"cuts\" stroke=\"#000\" stroke-width=\"0.2\" fill=\"none\">\n");
    for c in &net.cuts {
        line(&mut out, c.a, c.b);
    }
    out.push_str("  </g>\n");
    out.push_str("  <g id=\"valley\" stroke=\"#06c\" stroke-width=\"0.2\" stroke-dasharray=\"4 2\" fill=\"none\">\n");
    for c in net.creases.iter().filter(|c| c.angle >= 0.0) {
        line(&mut out, c.a, c.b);
    }
    out.push_str("  </g>\n");
    out.push_str("  <g id=\"mountain\" stroke=\"#c33\" stroke-width=\"0.2\" stroke-dasharray=\"6 2 1 2\" fill=\"none\">\n");
    for c in net.creases.iter().filter(|c| c.angle < 0.0) {
        line(&mut out, c.a, c.b);
    }
    out.push_str("  </g>\n");
    out.push_str("</svg>\n");
    out
}

/// OBJ snapshot of one folded state.
pub fn state_obj(net: &Net, cfg: &Configuration) -> String {
    let state = fold_state(net, cfg);
    let mut out = String::new();
    let mut base = 1usize;
    for poly in &state.polys {
        for p in poly {
            let _ = writeln!(out, "v {:.6} {:.6} {:.6}", p.x, p.y, p.z);
        }
        out.push('f');
        for i in 0..poly.len() {
            let _ = write!(out, " {}", base + i);
        }
        out.push('\n');
        base += poly.len();
    }
    out
}

/// One OBJ per plan step, starting from the flat state.
pub fn export_obj_sequence(net: &Net, plan: &Plan) -> Vec<String> {
    let mut cfg = Configuration::flat(net.creases.len());
    let mut out = vec![state_obj(net, &cfg)];
    for step in &plan.steps {
        match step.action {
            Action::Flip => cfg.flipped = !cfg.flipped,
            Action::Fold { crease, to, .. } => cfg.q[crease] = to,
        }
        out.push(state_obj(net, &cfg));
    }
    out
}
