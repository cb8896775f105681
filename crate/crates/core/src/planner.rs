//! Fold planning: turning a net into a valid, ordered action sequence.
//!
//! Two planners share the same kinematic checks. `plan_mp` is the baseline:
//! it walks creases outside-in, folds each once, and freezes a crease at the
//! last clear fraction when a sweep fails. `plan_fp` searches over action
//! orders and may temporarily reopen an already-folded crease to let a
//! blocked one pass, closing it again afterwards.
//!
//! Admissibility rules shared by both:
//! - a crease scan bends toward the laser: folding toward the target needs
//!   the unflipped orientation for valley creases and the flipped one for
//!   mountain creases (reopening is the other way around);
//! - outside-in commitment: when a crease folds, every deeper crease in its
//!   subtree is committed at its current fraction, and whenever it moves
//!   thereafter it must return to that fraction before any ancestor folds;
//! - flat scan: a crease may only be scanned while all of its ancestors sit
//!   at zero, which keeps the hinge in the laser plane at emission time.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::foldsim::{
    fold_state, sweep, Configuration, SweepMode, SweepOutcome, ViolationKind,
};
use crate::substrate::{CellId, Substrate};
use crate::unfold::Net;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("net has {0} overlapping face pairs; refusing to plan")]
    Refused(usize),
    #[error("verification failed at step {step}: {predicate}")]
    Verification { step: usize, predicate: String },
    #[error("invalid plan parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Fold { crease: usize, from: f64, to: f64 },
    Flip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: Action,
    pub q_after: Vec<f64>,
    pub flipped_after: bool,
    pub penetrated: BTreeSet<CellId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub final_q: Vec<f64>,
    pub final_flipped: bool,
    pub fully_folded: bool,
    pub heuristic: bool,
    pub verified: bool,
    /// Planning step in degrees; verification re-simulates at half of it.
    pub step_deg: f64,
    /// Substrate geometry the plan was checked against.
    pub cell: f64,
    pub slab_h: f64,
    pub penetrated: BTreeSet<CellId>,
    pub unfold_work: f64,
    pub flips: usize,
}

impl Plan {
    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub completion: f64,
    pub energy_j: f64,
    pub clipped_cells: usize,
    pub flips: usize,
    pub unfold_work: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PlannerCfg {
    pub step_deg: f64,
    pub max_flips: usize,
    /// Nesting bound for reopen-resolutions.
    pub lookahead: usize,
    /// Expansion budget for the search planner.
    pub node_budget: usize,
    /// Weight on reopened work in the search ordering.
    pub unfold_penalty: f64,
    pub strict_substrate: bool,
}

impl Default for PlannerCfg {
    fn default() -> Self {
        PlannerCfg {
            step_deg: crate::foldsim::DEFAULT_STEP_DEG,
            max_flips: 16,
            lookahead: 4,
            node_budget: 4000,
            unfold_penalty: 2.0,
            strict_substrate: false,
        }
    }
}

impl PlannerCfg {
    fn mode(&self) -> SweepMode {
        if self.strict_substrate {
            SweepMode::Strict
        } else {
            SweepMode::Clip
        }
    }
    /// Sweeps used to commit actions run at half the nominal step so the
    /// verifier's re-simulation sees exactly the same samples.
    fn commit_step(&self) -> f64 {
        self.step_deg / 2.0
    }
}

/// Percent of total target angle achieved; trivial creases excluded.
pub fn completion(net: &Net, q: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (c, crease) in net.creases.iter().enumerate() {
        if crease.trivial {
            continue;
        }
        num += q[c] * crease.angle.abs();
        den += crease.angle.abs();
    }
    if den == 0.0 {
        100.0
    } else {
        100.0 * num / den
    }
}

/// Crease ids grouped by depth, deepest batch first, ascending id within.
pub fn depth_schedule(net: &Net) -> Vec<Vec<usize>> {
    let mut by_depth: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (c, crease) in net.creases.iter().enumerate() {
        by_depth.entry(crease.depth).or_default().push(c);
    }
    by_depth.into_values().rev().collect()
}

/// Whether moving crease `c` by `dq` bends toward the laser in the given
/// orientation.
pub fn direction_ok(theta: f64, dq: f64, flipped: bool) -> bool {
    (dq * theta > 0.0) != flipped
}

struct Ctx<'a> {
    net: &'a Net,
    substrate: &'a Substrate,
    cfg: &'a PlannerCfg,
}

#[derive(Debug, Clone)]
struct WorkState {
    cfg: Configuration,
    committed: Vec<Option<f64>>,
    displaced: BTreeSet<usize>,
    steps: Vec<PlanStep>,
    penetrated: BTreeSet<CellId>,
    unfold_work: f64,
    flips: usize,
    scan_cost: f64,
}

impl WorkState {
    fn new(n: usize) -> WorkState {
        WorkState {
            cfg: Configuration::flat(n),
            committed: vec![None; n],
            displaced: BTreeSet::new(),
            steps: Vec::new(),
            penetrated: BTreeSet::new(),
            unfold_work: 0.0,
            flips: 0,
            scan_cost: 0.0,
        }
    }
}

impl<'a> Ctx<'a> {
    fn crease_len(&self, c: usize) -> f64 {
        self.net.creases[c].len()
    }

    /// Appends a flip if the pending move of `c` by `dq` needs the other
    /// orientation. Returns false if the flip itself is blocked.
    fn ensure_orientation(&self, st: &mut WorkState, c: usize, dq: f64) -> bool {
        let theta = self.net.creases[c].angle;
        if direction_ok(theta, dq, st.cfg.flipped) {
            return true;
        }
        if st.flips >= self.cfg.max_flips {
            return false;
        }
        match sweep(self.net, &st.cfg, &Action::Flip, self.substrate, self.cfg.mode(), self.cfg.commit_step()) {
            Ok(SweepOutcome::Clear { penetrated }) => {
                st.cfg.flipped = !st.cfg.flipped;
                st.flips += 1;
                st.penetrated.extend(penetrated.iter().copied());
                st.steps.push(PlanStep {
                    action: Action::Flip,
                    q_after: st.cfg.q.clone(),
                    flipped_after: st.cfg.flipped,
                    penetrated,
                });
                true
            }
            _ => false,
        }
    }

    /// Folds `c` from its current fraction as far toward `to` as the sweep
    /// allows, committing the action. Returns the reached fraction and the
    /// first violation encountered on the full attempt, if any.
    fn fold_max(&self, st: &mut WorkState, c: usize, to: f64) -> (f64, Option<ViolationKind>) {
        let from = st.cfg.q[c];
        if (to - from).abs() < 1e-12 {
            return (from, None);
        }
        if !self.ensure_orientation(st, c, to - from) {
            return (from, None);
        }
        let theta = self.net.creases[c].angle;
        let mut target = to;
        let mut first_violation = None;
        loop {
            let action = Action::Fold { crease: c, from, to: target };
            match sweep(self.net, &st.cfg, &action, self.substrate, self.cfg.mode(), self.cfg.commit_step())
                .expect("positive step")
            {
                SweepOutcome::Clear { penetrated } => {
                    self.commit_fold(st, c, target, penetrated);
                    return (target, first_violation);
                }
                SweepOutcome::Violation { kind, fraction, .. } => {
                    if first_violation.is_none() {
                        first_violation = Some(kind);
                    }
                    // back off one sweep sample before the violation
                    let span_deg = ((target - from) * theta).abs().to_degrees();
                    let steps = (span_deg / self.cfg.commit_step()).ceil().max(1.0);
                    let step_frac = (target - from) / steps;
                    let backed = fraction - step_frac;
                    if (backed - from) * (to - from).signum() <= 1e-9 {
                        return (from, first_violation);
                    }
                    target = backed;
                }
            }
        }
    }

    /// Records a clear fold of `c` to `target` plus commitment bookkeeping.
    fn commit_fold(&self, st: &mut WorkState, c: usize, target: f64, penetrated: BTreeSet<CellId>) {
        let from = st.cfg.q[c];
        let theta = self.net.creases[c].angle;
        if target < from {
            st.unfold_work += (from - target) * theta.abs() * self.crease_len(c);
        }
        st.scan_cost += ((target - from) * theta).abs().to_degrees() * self.crease_len(c);
        st.cfg.q[c] = target;
        // the move commits every uncommitted descendant at its current value
        for d in self.net.descendant_creases(c) {
            if st.committed[d].is_none() {
                st.committed[d] = Some(st.cfg.q[d]);
            }
        }
        match st.committed[c] {
            Some(v) if (v - target).abs() > 1e-9 => {
                st.displaced.insert(c);
            }
            Some(_) => {
                st.displaced.remove(&c);
            }
            None => {}
        }
        st.penetrated.extend(penetrated.iter().copied());
        st.steps.push(PlanStep {
            action: Action::Fold { crease: c, from, to: target },
            q_after: st.cfg.q.clone(),
            flipped_after: st.cfg.flipped,
            penetrated,
        });
    }

    /// Commitment rule: no displaced descendant; flat scan: ancestors at 0.
    fn admissible(&self, st: &WorkState, c: usize) -> bool {
        for d in self.net.descendant_creases(c) {
            if st.displaced.contains(&d) {
                return false;
            }
        }
        let child = self.net.creases[c].child;
        for anc in self.net.root_path_creases(child) {
            if anc != c && st.cfg.q[anc].abs() > 1e-9 {
                return false;
            }
        }
        true
    }

    fn pending(&self, st: &WorkState, c: usize) -> bool {
        let crease = &self.net.creases[c];
        !crease.trivial && st.cfg.q[c] < 1.0 - 1e-9 && st.committed[c].is_none()
    }

    fn finish(&self, st: WorkState, heuristic: bool) -> Plan {
        let fully = self
            .net
            .creases
            .iter()
            .enumerate()
            .all(|(c, cr)| cr.trivial || st.cfg.q[c] >= 1.0 - 1e-9);
        Plan {
            final_q: st.cfg.q.clone(),
            final_flipped: st.cfg.flipped,
            fully_folded: fully,
            heuristic,
            verified: false,
            step_deg: self.cfg.step_deg,
            cell: self.substrate.cell,
            slab_h: self.substrate.h,
            penetrated: st.penetrated,
            unfold_work: st.unfold_work,
            flips: st.flips,
            steps: st.steps,
        }
    }
}

/// Baseline planner: outside-in batches, one attempt per crease in schedule
/// order, freeze at the last clear fraction, never revisit.
pub fn plan_mp(net: &Net, substrate: &Substrate, cfg: &PlannerCfg) -> Result<Plan, PlanError> {
    if !net.overlaps.is_empty() {
        return Err(PlanError::Refused(net.overlaps.len()));
    }
    let ctx = Ctx { net, substrate, cfg };
    let mut st = WorkState::new(net.creases.len());
    for batch in depth_schedule(net) {
        for c in batch {
            if net.creases[c].trivial {
                continue;
            }
            ctx.fold_max(&mut st, c, 1.0);
        }
    }
    Ok(ctx.finish(st, false))
}

/// Search planner: explores fold orders (including temporarily reopening a
/// blocking crease) and returns the best plan by (completion, reopened work,
/// scan cost). Its search space contains the baseline's trajectory, so its
/// completion never falls below the baseline's; this is asserted.
pub fn plan_fp(net: &Net, substrate: &Substrate, cfg: &PlannerCfg) -> Result<Plan, PlanError> {
    if !net.overlaps.is_empty() {
        return Err(PlanError::Refused(net.overlaps.len()));
    }
    let ctx = Ctx { net, substrate, cfg };

    let mut search = FpSearch {
        ctx: &ctx,
        budget: cfg.node_budget,
        best: None,
        visited: BTreeMap::new(),
        exhausted: false,
    };
    let st = WorkState::new(net.creases.len());
    search.explore(st, 0);

    let (best_state, _) = search.best.expect("at least the empty plan is explored");
    let mut plan = ctx.finish(best_state, search.exhausted);

    let mp = plan_mp(net, substrate, cfg)?;
    let (fp_c, mp_c) = (completion(net, &plan.final_q), completion(net, &mp.final_q));
    assert!(
        fp_c >= mp_c - 1e-9,
        "search planner must dominate the baseline ({fp_c:.4} < {mp_c:.4})"
    );
    if fp_c < mp_c {
        plan = mp;
    }
    Ok(plan)
}

type Score = (i64, i64, i64);

struct FpSearch<'a, 'b> {
    ctx: &'a Ctx<'b>,
    budget: usize,
    best: Option<(WorkState, Score)>,
    visited: BTreeMap<(Vec<i64>, bool), Score>,
    exhausted: bool,
}

impl FpSearch<'_, '_> {
    /// Lexicographic score: higher completion, lower penalized reopen work,
    /// lower scan cost. Stored negated-for-max where needed.
    fn score(&self, st: &WorkState) -> Score {
        let comp = completion(self.ctx.net, &st.cfg.q);
        let work = st.unfold_work * self.ctx.cfg.unfold_penalty;
        (
            -(comp * 1e7) as i64,
            (work * 1e6) as i64,
            (st.scan_cost * 1e3) as i64 + st.flips as i64,
        )
    }

    fn state_key(&self, st: &WorkState) -> (Vec<i64>, bool) {
        (st.cfg.q.iter().map(|q| (q * 1e7).round() as i64).collect(), st.cfg.flipped)
    }

    fn offer(&mut self, st: &WorkState) {
        if st.displaced.is_empty() {
            let s = self.score(st);
            if self.best.as_ref().map_or(true, |(_, bs)| s < *bs) {
                self.best = Some((st.clone(), s));
            }
        }
    }

    fn explore(&mut self, st: WorkState, resolution_depth: usize) {
        self.offer(&st);
        if self.budget == 0 {
            self.exhausted = true;
            return;
        }
        let key = self.state_key(&st);
        let s = self.score(&st);
        if let Some(prev) = self.visited.get(&key) {
            if *prev <= s {
                return;
            }
        }
        self.visited.insert(key, s);

        // candidate creases, deepest first then id (baseline order first)
        let mut cands: Vec<usize> = (0..self.ctx.net.creases.len())
            .filter(|&c| self.ctx.pending(&st, c) && self.ctx.admissible(&st, c))
            .collect();
        cands.sort_by_key(|&c| (usize::MAX - self.ctx.net.creases[c].depth, c));

        for c in cands {
            if self.budget == 0 {
                self.exhausted = true;
                return;
            }
            self.budget -= 1;
            let mut child = st.clone();
            let (reached, violation) = self.ctx.fold_max(&mut child, c, 1.0);
            let moved = reached > st.cfg.q[c] + 1e-12;
            if moved {
                self.explore(child.clone(), resolution_depth);
            }
            if let Some(kind) = violation {
                if resolution_depth < self.ctx.cfg.lookahead {
                    // resolve from the pre-move state: reopen a blocker first
                    for blocker in self.blockers_of(&st, c, &kind) {
                        if self.budget == 0 {
                            self.exhausted = true;
                            return;
                        }
                        self.budget -= 1;
                        if let Some(resolved) = self.try_resolution(&st, blocker, c) {
                            self.explore(resolved, resolution_depth + 1);
                        }
                    }
                }
            }
        }
    }

    /// Creases that currently hold the offending geometry in place.
    fn blockers_of(&self, st: &WorkState, c: usize, kind: &ViolationKind) -> Vec<usize> {
        let net = self.ctx.net;
        let faces: Vec<usize> = match kind {
            ViolationKind::SelfCollision(f, g) => vec![*f, *g],
            ViolationKind::Visibility => {
                let state = fold_state(net, &st.cfg);
                match visibility_blocker(net, &state, c) {
                    Some(f) => vec![f],
                    None => {
                        // occlusion appears mid-sweep; consider every face
                        (0..net.faces.len()).collect()
                    }
                }
            }
            ViolationKind::Penetration(_) => Vec::new(),
        };
        let mut out = BTreeSet::new();
        for f in faces {
            for b in net.root_path_creases(f) {
                if b != c && st.cfg.q[b] > 1e-9 && !st.displaced.contains(&b) {
                    out.insert(b);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Macro-move: reopen `b` as little as possible, fold `c` fully, close
    /// `b` back to its committed fraction. None when no amount works.
    fn try_resolution(&self, st: &WorkState, b: usize, c: usize) -> Option<WorkState> {
        let ctx = self.ctx;
        let vb = st.cfg.q[b];
        if vb <= 1e-9 {
            return None;
        }
        // b and c must be scannable: ancestors at zero, not on each other's path
        if !ctx.admissible(st, b) || ctx.net.root_path_creases(ctx.net.creases[c].child).contains(&b) {
            return None;
        }
        let attempt = |v: f64| -> Option<WorkState> {
            let mut t = st.clone();
            if (v - vb).abs() > 1e-12 {
                if !ctx.ensure_orientation(&mut t, b, v - vb) {
                    return None;
                }
                let action = Action::Fold { crease: b, from: vb, to: v };
                match sweep(ctx.net, &t.cfg, &action, ctx.substrate, ctx.cfg.mode(), ctx.cfg.commit_step()).ok()? {
                    SweepOutcome::Clear { penetrated } => ctx.commit_fold(&mut t, b, v, penetrated),
                    SweepOutcome::Violation { .. } => return None,
                }
            }
            // the blocked crease must now clear fully
            let dq_c = 1.0 - t.cfg.q[c];
            if !ctx.ensure_orientation(&mut t, c, dq_c) {
                return None;
            }
            let action = Action::Fold { crease: c, from: t.cfg.q[c], to: 1.0 };
            match sweep(ctx.net, &t.cfg, &action, ctx.substrate, ctx.cfg.mode(), ctx.cfg.commit_step()).ok()? {
                SweepOutcome::Clear { penetrated } => ctx.commit_fold(&mut t, c, 1.0, penetrated),
                SweepOutcome::Violation { .. } => return None,
            }
            // close b again
            if (t.cfg.q[b] - vb).abs() > 1e-12 {
                let dq_b = vb - t.cfg.q[b];
                if !ctx.ensure_orientation(&mut t, b, dq_b) {
                    return None;
                }
                let action = Action::Fold { crease: b, from: t.cfg.q[b], to: vb };
                match sweep(ctx.net, &t.cfg, &action, ctx.substrate, ctx.cfg.mode(), ctx.cfg.commit_step()).ok()? {
                    SweepOutcome::Clear { penetrated } => ctx.commit_fold(&mut t, b, vb, penetrated),
                    SweepOutcome::Violation { .. } => return None,
                }
            }
            Some(t)
        };
        // The feasible reopen amounts can be an interior window (reopening
        // too far re-blocks the close-up leg), so scan levels from least to
        // most reopening, then refine upward toward the window's top edge.
        const LEVELS: usize = 16;
        let mut found: Option<(f64, WorkState)> = None;
        for k in (0..LEVELS).rev() {
            let v = vb * k as f64 / LEVELS as f64;
            if let Some(t) = attempt(v) {
                found = Some((v, t));
                break;
            }
        }
        let (mut lo, mut best) = found?;
        let mut hi = (lo + vb / LEVELS as f64).min(vb);
        for _ in 0..6 {
            let mid = 0.5 * (lo + hi);
            match attempt(mid) {
                Some(t) => {
                    best = t;
                    lo = mid;
                }
                None => hi = mid,
            }
        }
        Some(best)
    }
}

/// First face whose polygon blocks the hinge line of sight, if any.
pub fn visibility_blocker(net: &Net, state: &crate::foldsim::FoldedState, c: usize) -> Option<usize> {
    use crate::foldsim::{VIS_INSET, VIS_SAMPLES};
    use crate::geom::{ray_up_hit, v3};
    let crease = &net.creases[c];
    let pose = &state.poses[crease.parent];
    let a = pose.apply(v3(crease.a.x, crease.a.y, 0.0));
    let b = pose.apply(v3(crease.b.x, crease.b.y, 0.0));
    let len = a.dist(b);
    if len <= 2.0 * VIS_INSET {
        return None;
    }
    let dir = (b - a) / len;
    let span = len - 2.0 * VIS_INSET;
    for k in 0..VIS_SAMPLES {
        let t = VIS_INSET + span * k as f64 / (VIS_SAMPLES - 1) as f64;
        let p = a + dir * t;
        for f in 0..state.polys.len() {
            if f == crease.parent || f == crease.child {
                continue;
            }
            if ray_up_hit(p, &state.polys[f], &state.planes[f], 1e-9, 1e-7).is_some() {
                return Some(f);
            }
        }
    }
    None
}

/// Re-simulates every action at half the plan's step, recomputes the
/// penetrated-cell union, and checks the admissibility invariants. On
/// success the returned plan carries `verified = true`.
pub fn verify(
    net: &Net,
    substrate: &Substrate,
    plan: &Plan,
    calib: &crate::fabricate::Calibration,
) -> Result<(Plan, PlanReport), PlanError> {
    let n = net.creases.len();
    let mut cfg = Configuration::flat(n);
    let verify_step = plan.step_deg / 2.0;
    let mut penetrated: BTreeSet<CellId> = BTreeSet::new();
    let mut unfold_work = 0.0;
    let mut flips = 0usize;
    let mut fold_events: Vec<(usize, usize, Vec<f64>)> = Vec::new(); // (step, crease, q before)

    for (i, step) in plan.steps.iter().enumerate() {
        match step.action {
            Action::Flip => {
                match sweep(net, &cfg, &Action::Flip, substrate, SweepMode::Clip, verify_step)
                    .map_err(|e| PlanError::Parameter(e.to_string()))?
                {
                    SweepOutcome::Clear { penetrated: cells } => penetrated.extend(cells),
                    SweepOutcome::Violation { kind, .. } => {
                        return Err(PlanError::Verification {
                            step: i,
                            predicate: format!("{kind:?}"),
                        });
                    }
                }
                cfg.flipped = !cfg.flipped;
                flips += 1;
            }
            Action::Fold { crease, from, to } => {
                if crease >= n || !(0.0..=1.0).contains(&to) || (to - from).abs() < 1e-12 {
                    return Err(PlanError::Verification {
                        step: i,
                        predicate: "malformed fold action".into(),
                    });
                }
                if (cfg.q[crease] - from).abs() > 1e-9 {
                    return Err(PlanError::Verification {
                        step: i,
                        predicate: "fold does not start at current fraction".into(),
                    });
                }
                let theta = net.creases[crease].angle;
                if !direction_ok(theta, to - from, cfg.flipped) {
                    return Err(PlanError::Verification {
                        step: i,
                        predicate: "fold bends away from the laser".into(),
                    });
                }
                let child = net.creases[crease].child;
                for anc in net.root_path_creases(child) {
                    if anc != crease && cfg.q[anc].abs() > 1e-9 {
                        return Err(PlanError::Verification {
                            step: i,
                            predicate: "hinge not in the laser plane (ancestor folded)".into(),
                        });
                    }
                }
                fold_events.push((i, crease, cfg.q.clone()));
                match sweep(net, &cfg, &step.action, substrate, SweepMode::Clip, verify_step)
                    .map_err(|e| PlanError::Parameter(e.to_string()))?
                {
                    SweepOutcome::Clear { penetrated: cells } => penetrated.extend(cells),
                    SweepOutcome::Violation { kind, fraction, .. } => {
                        return Err(PlanError::Verification {
                            step: i,
                            predicate: format!("{kind:?} at fraction {fraction:.4}"),
                        });
                    }
                }
                if to < from {
                    unfold_work += (from - to) * theta.abs() * net.creases[crease].len();
                }
                cfg.q[crease] = to;
            }
        }
    }

    // outside-in: at every fold, deeper creases already sit at their final value
    for (i, crease, q_at) in &fold_events {
        for d in net.descendant_creases(*crease) {
            if (q_at[d] - cfg.q[d]).abs() > 1e-9 {
                return Err(PlanError::Verification {
                    step: *i,
                    predicate: format!("descendant crease {d} moved after an ancestor fold"),
                });
            }
        }
    }

    let mut verified = plan.clone();
    verified.verified = true;
    verified.penetrated = penetrated.clone();
    let energy = crate::fabricate::energy(&verified, net, calib);
    let report = PlanReport {
        completion: completion(net, &cfg.q),
        energy_j: energy,
        clipped_cells: penetrated.len(),
        flips,
        unfold_work,
    };
    Ok((verified, report))
}

/// Penetrated-cell union from re-simulating the plan (no validity checks).
pub fn replay_penetrations(net: &Net, plan: &Plan, substrate: &Substrate) -> BTreeSet<CellId> {
    let n = net.creases.len();
    let mut cfg = Configuration::flat(n);
    let mut out = BTreeSet::new();
    for step in &plan.steps {
        if let Ok(outcome) = sweep(net, &cfg, &step.action, substrate, SweepMode::Clip, plan.step_deg / 2.0) {
            out.extend(outcome.penetrated().iter().copied());
        }
        match step.action {
            Action::Flip => cfg.flipped = !cfg.flipped,
            Action::Fold { crease, to, .. } => cfg.q[crease] = to,
        }
    }
    out
}

#[cfg(test)]
mod tests;
