use laserfold::fabricate::Calibration;
use laserfold::planner::*;
use laserfold::shapes;
use laserfold::substrate::make_substrate;
use laserfold::unfold::*;
use std::time::Instant;

fn run(mesh: &laserfold::TriMesh, name: &str) {
    let root = choose_root(mesh);
    let calib = Calibration::default();
    let t0 = Instant::now();
    let nb = nearly_blooming(mesh, root, 6, 64).unwrap();
    let t_nb = t0.elapsed().as_millis();
    let mut rows = Vec::new();
    for (label, tree) in [("nb", Some(nb.clone()))] {
        if let Some(tree) = tree {
            let net = layout(mesh, &tree, Default::default()).unwrap();
            if !net.overlaps.is_empty() {
                println!("{name} {label}: OVERLAPPING tree (res {:?})", tree.residual_overlaps.len());
                continue;
            }
            let sub = make_substrate(&net, 5.0, 3.0).unwrap();
            for (pl, f) in [
                ("mp", plan_mp as fn(&Net, &laserfold::Substrate, &PlannerCfg) -> Result<Plan, PlanError>),
                ("fp", plan_fp as fn(&Net, &laserfold::Substrate, &PlannerCfg) -> Result<Plan, PlanError>),
            ] {
                let t1 = Instant::now();
                let plan = f(&net, &sub, &PlannerCfg::default()).unwrap();
                let (_, rep) = verify(&net, &sub, &plan, &calib).unwrap();
                rows.push(format!(
                    "{label}+{pl}: comp {:6.2} F {:3} E {:8.1} flips {} uw {:6.1} [{} ms]",
                    rep.completion, rep.clipped_cells, rep.energy_j, rep.flips, rep.unfold_work,
                    t1.elapsed().as_millis()
                ));
            }
        }
    }
    // GA over 5 seeds
    for seed in 0..5u64 {
        let t1 = Instant::now();
        let ga = ga_unfold(mesh, root, GaParams { population: 16, generations: 10, seed }).unwrap();
        let t_ga = t1.elapsed().as_millis();
        let net = layout(mesh, &ga, Default::default()).unwrap();
        if !net.overlaps.is_empty() {
            rows.push(format!("ga(s{seed}): OVERLAPPING [{t_ga} ms]"));
            continue;
        }
        let sub = make_substrate(&net, 5.0, 3.0).unwrap();
        for (pl, f) in [
                ("mp", plan_mp as fn(&Net, &laserfold::Substrate, &PlannerCfg) -> Result<Plan, PlanError>),
                ("fp", plan_fp as fn(&Net, &laserfold::Substrate, &PlannerCfg) -> Result<Plan, PlanError>),
            ] {
            let t2 = Instant::now();
            let plan = f(&net, &sub, &PlannerCfg::default()).unwrap();
            let (_, rep) = verify(&net, &sub, &plan, &calib).unwrap();
            rows.push(format!(
                "ga(s{seed})+{pl}: comp {:6.2} F {:3} E {:8.1} uw {:6.1} [ga {} ms, plan {} ms]",
                rep.completion, rep.clipped_cells, rep.energy_j, rep.unfold_work, t_ga,
                t2.elapsed().as_millis()
            ));
        }
    }
    println!("== {name} (faces {}, nb edits {}, nb {} ms)", mesh.faces.len(), nb.edit_count, t_nb);
    for r in rows {
        println!("   {r}");
    }
}

fn main() {
    run(&shapes::l_prism(10.0, 25.0), "l_prism_10_25");
    run(&shapes::u_prism(8.0, 12.0), "u_prism_8_12");
    run(&shapes::zigzag(5, 10.0, 8.0, 5.0), "zigzag5");
    run(&shapes::staircase(3, 10.0, 6.0, 8.0), "stair3");
    run(&shapes::awning(), "awning");
    run(&shapes::vault(), "vault");
    run(&shapes::flap_shadow(), "flap_shadow");
    run(&shapes::dip_chain(), "dip_chain");
    run(&shapes::flat_tube(), "flat_tube");
}
