//! Cut-tree improvement by simulated annealing over single parent
//! reassignments, scoring candidates with a full plan-and-verify cycle.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fabricate::Calibration;
use crate::mesh::{EdgeId, TriMesh};
use crate::planner::{plan_fp, verify, PlanReport, PlannerCfg};
use crate::substrate::make_substrate;
use crate::unfold::{layout, orient_arcs, CutTree, Provenance};

#[derive(Debug, Error)]
pub enum OptError {
    #[error("initial tree lays out with {0} overlapping pairs; refusing to optimize")]
    Refused(usize),
    #[error(transparent)]
    Unfold(#[from] crate::unfold::UnfoldError),
    #[error(transparent)]
    Plan(#[from] crate::planner::PlanError),
}

#[derive(Debug, Clone, Copy)]
pub struct OptConfig {
    pub iterations: usize,
    pub initial_temperature: f64,
    pub cooling: f64,
    pub seed: u64,
    /// Also propose re-rooting moves (off by default).
    pub mutate_root: bool,
    /// Weighted-sum objective instead of lexicographic acceptance.
    pub weights: Option<(f64, f64, f64)>,
    pub cell: f64,
    pub slab_h: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            iterations: 500,
            initial_temperature: 50.0,
            cooling: 0.99,
            seed: 0,
            mutate_root: false,
            weights: None,
            cell: 5.0,
            slab_h: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub edit: String,
    pub completion: f64,
    pub clipped_cells: usize,
    pub energy_j: f64,
    pub accepted: bool,
}

/// (completion desc, F asc, E asc) as an orderable key.
fn lex_key(r: &PlanReport) -> (i64, usize, i64) {
    (-(r.completion * 1e6).round() as i64, r.clipped_cells, (r.energy_j * 1e6).round() as i64)
}

fn scalar(r: &PlanReport, w: (f64, f64, f64)) -> f64 {
    (100.0 - r.completion) * w.0 + r.clipped_cells as f64 * w.1 + r.energy_j * w.2
}

const DEFAULT_WEIGHTS: (f64, f64, f64) = (1e4, 1e2, 1e-2);

fn evaluate(
    mesh: &TriMesh,
    arcs: &[EdgeId],
    root: usize,
    base_arcs: &[EdgeId],
    calib: &Calibration,
    cfg: &OptConfig,
) -> Result<Option<(CutTree, PlanReport)>, OptError> {
    let parent = match orient_arcs(mesh, root, arcs) {
        Some(p) => p,
        None => return Ok(None),
    };
    let edit_count = {
        let base: std::collections::BTreeSet<_> = base_arcs.iter().collect();
        arcs.iter().filter(|e| !base.contains(e)).count()
    };
    let tree = CutTree { root, parent, edit_count, heuristic: false, residual_overlaps: Vec::new() };
    let net = layout(mesh, &tree, Provenance { method: "opt".into(), ..Default::default() })?;
    if !net.overlaps.is_empty() {
        return Ok(None);
    }
    let substrate = make_substrate(&net, cfg.cell, cfg.slab_h).expect("positive params");
    let plan = plan_fp(&net, &substrate, &PlannerCfg::default())?;
    let (_, report) = verify(&net, &substrate, &plan, calib)?;
    Ok(Some((tree, report)))
}

/// Anneals single-arc edits of `tree0`, never returning anything worse than
/// the input under (completion, clipped cells, energy). Deterministic per
/// seed.
pub fn optimize_net(
    mesh: &TriMesh,
    tree0: &CutTree,
    calib: &Calibration,
    cfg: &OptConfig,
) -> Result<(CutTree, PlanReport, Vec<TraceRow>), OptError> {
    let dual = mesh.dual_graph();
    let base_arcs = crate::unfold::blooming_tree(mesh, tree0.root)?.arcs();
    let arcs0 = tree0.arcs();
    let (mut cur_tree, mut cur_report) = match evaluate(mesh, &arcs0, tree0.root, &base_arcs, calib, cfg)? {
        Some(x) => x,
        None => {
            let net = layout(mesh, tree0, Provenance::default())?;
            return Err(OptError::Refused(net.overlaps.len()));
        }
    };
    let mut best = (cur_tree.clone(), cur_report);
    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut temperature = cfg.initial_temperature;

    for iteration in 0..cfg.iterations {
        let cur_arcs = cur_tree.arcs();
        // neighbor: swap one tree arc for a reconnecting non-tree arc
        let (cand_arcs, cand_root, edit_label) = propose(mesh, &dual, &cur_tree, &cur_arcs, cfg, &mut rng);
        let outcome = evaluate(mesh, &cand_arcs, cand_root, &base_arcs, calib, cfg)?;
        let (accepted, row) = match outcome {
            None => (false, (f64::NAN, 0, f64::NAN)),
            Some((tree, report)) => {
                let better = lex_key(&report) < lex_key(&cur_report);
                let accept = better || {
                    let w = cfg.weights.unwrap_or(DEFAULT_WEIGHTS);
                    let delta = scalar(&report, w) - scalar(&cur_report, w);
                    delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature.max(1e-12)).exp()
                };
                let row = (report.completion, report.clipped_cells, report.energy_j);
                if accept {
                    if lex_key(&report) < lex_key(&best.1) {
                        best = (tree.clone(), report);
                    }
                    cur_tree = tree;
                    cur_report = report;
                }
                (accept, row)
            }
        };
        trace.push(TraceRow {
            iteration,
            edit: edit_label,
            completion: row.0,
            clipped_cells: row.1,
            energy_j: row.2,
            accepted,
        });
        temperature *= cfg.cooling;
    }

    Ok((best.0, best.1, trace))
}

fn propose(
    mesh: &TriMesh,
    dual: &crate::mesh::DualGraph,
    cur: &CutTree,
    cur_arcs: &[EdgeId],
    cfg: &OptConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<EdgeId>, usize, String) {
    if cfg.mutate_root && rng.gen_bool(0.2) {
        let new_root = rng.gen_range(0..mesh.faces.len());
        return (cur_arcs.to_vec(), new_root, format!("reroot {new_root}"));
    }
    let arc_set: std::collections::BTreeSet<EdgeId> = cur_arcs.iter().copied().collect();
    for _ in 0..32 {
        let drop = cur_arcs[rng.gen_range(0..cur_arcs.len())];
        let keep: Vec<EdgeId> = cur_arcs.iter().copied().filter(|&e| e != drop).collect();
        // component labels without the dropped arc
        let mut comp = vec![usize::MAX; mesh.faces.len()];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); mesh.faces.len()];
        for &k in &keep {
            let (f0, f1) = mesh.edges[k].faces;
            adj[f0].push(f1);
            adj[f1].push(f0);
        }
        for start in 0..mesh.faces.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = start;
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = start;
                        stack.push(y);
                    }
                }
            }
        }
        let candidates: Vec<EdgeId> = dual
            .arcs
            .iter()
            .filter(|&&(e, f0, f1, _)| e != drop && !arc_set.contains(&e) && comp[f0] != comp[f1])
            .map(|&(e, _, _, _)| e)
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let add = candidates[rng.gen_range(0..candidates.len())];
        let mut arcs = keep;
        arcs.push(add);
        arcs.sort_unstable();
        return (arcs, cur.root, format!("swap {drop}->{add}"));
    }
    (cur_arcs.to_vec(), cur.root, "noop".into())
}
