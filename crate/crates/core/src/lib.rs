//! laserfold turns a 3D surface mesh into a flat net that a laser cutter can
//! cut out and fold back into the goal shape, entirely from one side.
//!
//! The pipeline:
//!
//! 1. [`mesh`] loads and validates the goal mesh and derives per-edge fold
//!    targets.
//! 2. [`unfold`] picks a cut tree over the face-adjacency dual (blooming,
//!    nearly-blooming, or a GA baseline), lays the faces out flat, and
//!    reports overlaps.
//! 3. [`foldsim`] is the rigid-folding kinematics: partial fold states,
//!    self-collision, substrate penetration, and laser line-of-sight.
//! 4. [`planner`] turns a net into an ordered fold/flip action sequence
//!    (a freeze-on-violation baseline and a search planner that may reorder
//!    and temporarily unfold creases), plus an independent verifier.
//! 5. [`substrate`] accounts for sacrificial-grid cells the workpiece sweeps
//!    through; [`fabricate`] prices the job and emits `.lfi` instructions,
//!    SVG, and OBJ snapshots.
//! 6. [`optimize`] anneals the cut tree against completion, clipped cells,
//!    and energy.
//!
//! All geometry is in millimeters; angles are radians unless a name says
//! degrees. The laser looks straight down the −z axis; folds toward +z are
//! "valley" folds and carry positive target angles.

pub mod fabricate;
pub mod foldsim;
pub mod geom;
pub mod mesh;
pub mod optimize;
pub mod planner;
pub mod shapes;
pub mod substrate;
pub mod unfold;

pub use fabricate::{Calibration, LaserJob};
pub use foldsim::{Configuration, FoldedState, SweepMode, SweepOutcome};
pub use mesh::{DualGraph, FoldTarget, MeshError, TriMesh};
pub use planner::{Action, Plan, PlanReport, PlannerCfg};
pub use substrate::Substrate;
pub use unfold::{CutTree, Net};
