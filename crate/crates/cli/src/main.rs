//! Pipeline driver: unfold, plan, clip, optimize, emit, export, report, or
//! run everything end to end. All stages exchange JSON files so they can be
//! scripted and tested independently.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use laserfold::fabricate::{self, Calibration, EmitMode};
use laserfold::optimize::{optimize_net, OptConfig};
use laserfold::planner::{self, Plan, PlanError, PlanReport, PlannerCfg};
use laserfold::substrate::{clip_plan, make_substrate, Substrate};
use laserfold::unfold::{self, CutTree, GaParams, Net, Provenance};
use laserfold::TriMesh;

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "laserfold", version, about = "Unfold meshes into laser-formable nets and fold plans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Nb,
    Ga,
    Blooming,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Nb => "nb",
            Method::Ga => "ga",
            Method::Blooming => "blooming",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Planner {
    Fp,
    Mp,
}

impl Planner {
    fn name(self) -> &'static str {
        match self {
            Planner::Fp => "fp",
            Planner::Mp => "mp",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Interleaved,
    AllCutsFirst,
}

#[derive(Args, Clone)]
struct UnfoldArgs {
    /// Goal mesh (OBJ, millimeters)
    mesh: PathBuf,
    #[arg(long, value_enum, default_value = "nb")]
    method: Method,
    /// Stationary face: "auto" picks the largest
    #[arg(long, default_value = "auto")]
    root: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    edit_budget: usize,
    #[arg(long, default_value_t = 64)]
    beam_width: usize,
    #[arg(long, default_value_t = 16)]
    ga_population: usize,
    #[arg(long, default_value_t = 10)]
    ga_generations: usize,
}

#[derive(Args, Clone)]
struct PlanArgs {
    /// Net JSON produced by `unfold`
    net: PathBuf,
    #[arg(long, value_enum, default_value = "fp")]
    planner: Planner,
    #[arg(long, default_value_t = 1.0)]
    step_deg: f64,
    #[arg(long, default_value_t = 16)]
    max_flips: usize,
    #[arg(long, default_value_t = 5.0)]
    cell: f64,
    #[arg(long, default_value_t = 3.0)]
    slab_h: f64,
    #[arg(long)]
    calib: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a cut tree and lay it out as a net
    Unfold {
        #[command(flatten)]
        args: UnfoldArgs,
        #[arg(short, long, default_value = "net.json")]
        out: PathBuf,
    },
    /// Plan the folding actions for a net and verify the plan
    Plan {
        #[command(flatten)]
        args: PlanArgs,
        #[arg(short, long, default_value = "plan.json")]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compute the clipped substrate cells required by a plan
    Clip {
        net: PathBuf,
        plan: PathBuf,
        #[arg(short, long, default_value = "clip.json")]
        out: PathBuf,
    },
    /// Improve a net by annealing tree edits against completion, F, and E
    Optimize {
        mesh: PathBuf,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5.0)]
        cell: f64,
        #[arg(long, default_value_t = 3.0)]
        slab_h: f64,
        #[arg(long)]
        calib: Option<PathBuf>,
        #[arg(long)]
        mutate_root: bool,
        #[arg(long, default_value = "opt")]
        out_dir: PathBuf,
    },
    /// Emit the .lfi laser job for a verified plan
    Emit {
        net: PathBuf,
        plan: PathBuf,
        #[arg(long, value_enum, default_value = "interleaved")]
        mode: Mode,
        #[arg(long)]
        calib: Option<PathBuf>,
        #[arg(long)]
        clip: Option<PathBuf>,
        #[arg(short, long, default_value = "job.lfi")]
        out: PathBuf,
    },
    /// Export SVG nets and OBJ fold sequences
    Export {
        net: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        clip: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        obj_seq: Option<PathBuf>,
    },
    /// Aggregate run reports into a comparison table (CSV and JSON)
    Report {
        reports: Vec<PathBuf>,
        #[arg(short, long, default_value = "summary")]
        out: PathBuf,
    },
    /// Run unfold, plan, clip, and emit in one go
    Pipeline {
        #[command(flatten)]
        unfold: UnfoldArgs,
        #[arg(long, value_enum, default_value = "fp")]
        planner: Planner,
        #[arg(long, default_value_t = 1.0)]
        step_deg: f64,
        #[arg(long, default_value_t = 16)]
        max_flips: usize,
        #[arg(long, default_value_t = 5.0)]
        cell: f64,
        #[arg(long, default_value_t = 3.0)]
        slab_h: f64,
        #[arg(long, value_enum, default_value = "interleaved")]
        mode: Mode,
        #[arg(long)]
        calib: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Serialize, Deserialize)]
struct RunReport {
    mesh: String,
    method: String,
    planner: String,
    seed: u64,
    #[serde(flatten)]
    report: PlanReport,
}

#[derive(Serialize)]
struct Manifest {
    input: ManifestInput,
    method: String,
    planner: String,
    seed: u64,
    step_deg: f64,
    cell: f64,
    slab_h: f64,
    mode: String,
    calib_sha256: String,
    version: String,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct ManifestInput {
    path: String,
    sha256: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_calib(path: &Option<PathBuf>) -> Result<Calibration> {
    let calib = match path {
        None => Calibration::default(),
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
    };
    calib.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(calib)
}

fn load_net(path: &Path) -> Result<Net> {
    let mut net: Net =
        serde_json::from_str(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
    net.reindex();
    Ok(net)
}

fn load_plan(path: &Path) -> Result<Plan> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn unfold_tree(mesh: &TriMesh, args: &UnfoldArgs) -> Result<(CutTree, usize)> {
    let root = if args.root == "auto" {
        unfold::choose_root(mesh)
    } else {
        let id: usize = args.root.parse().context("--root must be 'auto' or a face id")?;
        if id >= mesh.faces.len() {
            bail!("--root {id} out of range ({} faces)", mesh.faces.len());
        }
        id
    };
    let tree = match args.method {
        Method::Blooming => unfold::blooming_tree(mesh, root)?,
        Method::Nb => unfold::nearly_blooming(mesh, root, args.edit_budget, args.beam_width)?,
        Method::Ga => unfold::ga_unfold(
            mesh,
            root,
            GaParams { population: args.ga_population, generations: args.ga_generations, seed: args.seed },
        )?,
    };
    Ok((tree, root))
}

fn build_net(mesh: &TriMesh, args: &UnfoldArgs) -> Result<Net> {
    let (tree, _) = unfold_tree(mesh, args)?;
    let provenance = Provenance {
        method: args.method.name().into(),
        seed: if args.method == Method::Ga { Some(args.seed) } else { None },
        edit_count: tree.edit_count,
        heuristic: tree.heuristic,
    };
    Ok(unfold::layout(mesh, &tree, provenance)?)
}

struct Planned {
    substrate: Substrate,
    plan: Plan,
    report: PlanReport,
}

fn plan_net(net: &Net, args: &PlanArgs) -> Result<std::result::Result<Planned, u8>> {
    let calib = load_calib(&args.calib)?;
    let substrate = make_substrate(net, args.cell, args.slab_h).map_err(|e| anyhow::anyhow!("{e}"))?;
    let cfg = PlannerCfg {
        step_deg: args.step_deg,
        max_flips: args.max_flips,
        ..Default::default()
    };
    let planned = match args.planner {
        Planner::Fp => planner::plan_fp(net, &substrate, &cfg),
        Planner::Mp => planner::plan_mp(net, &substrate, &cfg),
    };
    let plan = match planned {
        Ok(p) => p,
        Err(PlanError::Refused(n)) => {
            eprintln!("net is infeasible: {n} overlapping face pairs");
            return Ok(Err(EXIT_INFEASIBLE));
        }
        Err(e) => bail!("{e}"),
    };
    match planner::verify(net, &substrate, &plan, &calib) {
        Ok((verified, report)) => Ok(Ok(Planned { substrate, plan: verified, report })),
        Err(PlanError::Verification { step, predicate }) => {
            eprintln!("verification failed at step {step}: {predicate}");
            Ok(Err(EXIT_VERIFICATION))
        }
        Err(e) => bail!("{e}"),
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Unfold { args, out } => {
            let mesh = TriMesh::load_obj(&args.mesh).map_err(|e| anyhow::anyhow!("{e}"))?;
            let net = build_net(&mesh, &args)?;
            write_json(&out, &net)?;
            println!(
                "net: {} faces, {} creases, {} cuts, {} overlaps (method {}, edits {})",
                net.faces.len(),
                net.creases.len(),
                net.cuts.len(),
                net.overlaps.len(),
                net.provenance.method,
                net.provenance.edit_count
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Plan { args, out, report } => {
            let net = load_net(&args.net)?;
            match plan_net(&net, &args)? {
                Err(code) => Ok(ExitCode::from(code)),
                Ok(planned) => {
                    write_json(&out, &planned.plan)?;
                    if let Some(report_path) = report {
                        write_json(&report_path, &planned.report)?;
                    }
                    println!(
                        "plan: {} actions, completion {:.2}%, {} flips, F={}, E={:.1} J",
                        planned.plan.steps.len(),
                        planned.report.completion,
                        planned.report.flips,
                        planned.report.clipped_cells,
                        planned.report.energy_j
                    );
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::Clip { net, plan, out } => {
            let net = load_net(&net)?;
            let plan = load_plan(&plan)?;
            let substrate = make_substrate(&net, plan.cell, plan.slab_h).map_err(|e| anyhow::anyhow!("{e}"))?;
            let clipped = clip_plan(&net, &plan, &substrate);
            println!("F = {} clipped cells", clipped.clipped.len());
            write_json(&out, &clipped)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Optimize { mesh, iters, seed, cell, slab_h, calib, mutate_root, out_dir } => {
            let mesh_path = mesh;
            let mesh = TriMesh::load_obj(&mesh_path).map_err(|e| anyhow::anyhow!("{e}"))?;
            let calib = load_calib(&calib)?;
            let root = unfold::choose_root(&mesh);
            let tree0 = unfold::nearly_blooming(&mesh, root, 6, 64)?;
            let cfg = OptConfig { iterations: iters, seed, cell, slab_h, mutate_root, ..Default::default() };
            let (tree, report, trace) = match optimize_net(&mesh, &tree0, &calib, &cfg) {
                Ok(x) => x,
                Err(laserfold::optimize::OptError::Refused(n)) => {
                    eprintln!("initial net is infeasible: {n} overlapping face pairs");
                    return Ok(ExitCode::from(EXIT_INFEASIBLE));
                }
                Err(e) => bail!("{e}"),
            };
            std::fs::create_dir_all(&out_dir)?;
            let provenance = Provenance {
                method: "opt".into(),
                seed: Some(seed),
                edit_count: tree.edit_count,
                heuristic: tree.heuristic,
            };
            let net = unfold::layout(&mesh, &tree, provenance)?;
            write_json(&out_dir.join("net.json"), &net)?;
            write_json(&out_dir.join("report.json"), &report)?;
            let mut csv = String::from("iteration,edit,completion,clipped_cells,energy_j,accepted\n");
            for row in &trace {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.iteration, row.edit, row.completion, row.clipped_cells, row.energy_j, row.accepted
                ));
            }
            std::fs::write(out_dir.join("trace.csv"), csv)?;
            println!(
                "optimized: completion {:.2}%, F={}, E={:.1} J ({} edits from blooming)",
                report.completion, report.clipped_cells, report.energy_j, tree.edit_count
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Emit { net, plan, mode, calib, clip, out } => {
            let net = load_net(&net)?;
            let plan = load_plan(&plan)?;
            let calib = load_calib(&calib)?;
            let substrate = match clip {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(&p)?)?,
                None => {
                    let base = make_substrate(&net, plan.cell, plan.slab_h).map_err(|e| anyhow::anyhow!("{e}"))?;
                    clip_plan(&net, &plan, &base)
                }
            };
            let mode = match mode {
                Mode::Interleaved => EmitMode::Interleaved,
                Mode::AllCutsFirst => EmitMode::AllCutsFirst,
            };
            let job = match fabricate::emit(&plan, &net, &substrate, &calib, mode) {
                Ok(j) => j,
                Err(fabricate::FabError::Refused) => {
                    eprintln!("plan is not verified; run `laserfold plan` first");
                    return Ok(ExitCode::from(EXIT_VERIFICATION));
                }
                Err(e) => bail!("{e}"),
            };
            if let Some(dir) = out.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(&out, job.to_text())?;
            println!("{} instructions -> {}", job.instructions.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Export { net, plan, clip, svg, obj_seq } => {
            let net = load_net(&net)?;
            if let Some(svg_path) = svg {
                let substrate: Option<Substrate> = match &clip {
                    Some(p) => Some(serde_json::from_str(&std::fs::read_to_string(p)?)?),
                    None => None,
                };
                std::fs::write(&svg_path, fabricate::export_svg(&net, substrate.as_ref()))?;
                println!("wrote {}", svg_path.display());
            }
            if let Some(dir) = obj_seq {
                let plan = match &plan {
                    Some(p) => load_plan(p)?,
                    None => bail!("--obj-seq needs --plan"),
                };
                std::fs::create_dir_all(&dir)?;
                for (i, obj) in fabricate::export_obj_sequence(&net, &plan).iter().enumerate() {
                    std::fs::write(dir.join(format!("step_{i:04}.obj")), obj)?;
                }
                println!("wrote {} snapshots to {}", plan.steps.len() + 1, dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { reports, out } => {
            let mut rows = Vec::new();
            for p in &reports {
                let row: RunReport = serde_json::from_str(&std::fs::read_to_string(p)?)?;
                rows.push(row);
            }
            let mut groups: BTreeMap<(String, String), Vec<&RunReport>> = BTreeMap::new();
            for r in &rows {
                groups.entry((r.method.clone(), r.planner.clone())).or_default().push(r);
            }
            let mut csv = String::from("method,planner,runs,completion_mean,clipped_cells_mean,energy_mean_j\n");
            let mut summary = Vec::new();
            for ((method, planner), rs) in &groups {
                let n = rs.len() as f64;
                let comp = rs.iter().map(|r| r.report.completion).sum::<f64>() / n;
                let f = rs.iter().map(|r| r.report.clipped_cells as f64).sum::<f64>() / n;
                let e = rs.iter().map(|r| r.report.energy_j).sum::<f64>() / n;
                csv.push_str(&format!("{method},{planner},{},{comp},{f},{e}\n", rs.len()));
                summary.push(serde_json::json!({
                    "method": method,
                    "planner": planner,
                    "runs": rs.len(),
                    "completion_mean": comp,
                    "clipped_cells_mean": f,
                    "energy_mean_j": e,
                }));
            }
            std::fs::write(out.with_extension("csv"), &csv)?;
            write_json(&out.with_extension("json"), &summary)?;
            print!("{csv}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Pipeline {
            unfold: uargs,
            planner,
            step_deg,
            max_flips,
            cell,
            slab_h,
            mode,
            calib,
            out_dir,
        } => {
            let mesh = TriMesh::load_obj(&uargs.mesh).map_err(|e| anyhow::anyhow!("{e}"))?;
            let calibration = load_calib(&calib)?;
            std::fs::create_dir_all(&out_dir)?;
            let net = build_net(&mesh, &uargs)?;
            write_json(&out_dir.join("net.json"), &net)?;
            std::fs::write(out_dir.join("net.svg"), fabricate::export_svg(&net, None))?;

            let plan_args = PlanArgs {
                net: out_dir.join("net.json"),
                planner,
                step_deg,
                max_flips,
                cell,
                slab_h,
                calib: calib.clone(),
            };
            let planned = match plan_net(&net, &plan_args)? {
                Ok(p) => p,
                Err(code) => return Ok(ExitCode::from(code)),
            };
            write_json(&out_dir.join("plan.json"), &planned.plan)?;
            let clipped = clip_plan(&net, &planned.plan, &planned.substrate);
            write_json(&out_dir.join("clip.json"), &clipped)?;
            let emit_mode = match mode {
                Mode::Interleaved => EmitMode::Interleaved,
                Mode::AllCutsFirst => EmitMode::AllCutsFirst,
            };
            let job = fabricate::emit(&planned.plan, &net, &clipped, &calibration, emit_mode)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            std::fs::write(out_dir.join("job.lfi"), job.to_text())?;
            let run_report = RunReport {
                mesh: uargs.mesh.display().to_string(),
                method: uargs.method.name().into(),
                planner: planner.name().into(),
                seed: uargs.seed,
                report: planned.report,
            };
            write_json(&out_dir.join("report.json"), &run_report)?;
            let manifest = Manifest {
                input: ManifestInput {
                    path: uargs.mesh.display().to_string(),
                    sha256: sha256_file(&uargs.mesh)?,
                },
                method: uargs.method.name().into(),
                planner: planner.name().into(),
                seed: uargs.seed,
                step_deg,
                cell,
                slab_h,
                mode: match mode {
                    Mode::Interleaved => "interleaved".into(),
                    Mode::AllCutsFirst => "all-cuts-first".into(),
                },
                calib_sha256: calibration.sha256(),
                version: env!("CARGO_PKG_VERSION").into(),
                outputs: vec![
                    "net.json".into(),
                    "net.svg".into(),
                    "plan.json".into(),
                    "clip.json".into(),
                    "job.lfi".into(),
                    "report.json".into(),
                ],
            };
            write_json(&out_dir.join("manifest.json"), &manifest)?;
            println!(
                "pipeline done: completion {:.2}%, F={}, E={:.1} J -> {}",
                planned.report.completion,
                planned.report.clipped_cells,
                planned.report.energy_j,
                out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
