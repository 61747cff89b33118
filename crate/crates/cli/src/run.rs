//! Mode execution and artifact writing.
//!
//! Everything lands in the output directory: `solution.json` (the full
//! machine-readable result), `report.txt`/`report.csv` (the comparison
//! table), `dispatch.csv` (hour-by-hour operation of the chosen system),
//! `model.lp` (export-milp), and `load.csv` (synth-load). Synthetic
//! scenarios are also persisted as `weather.csv`/`load.csv` so a run can
//! be reproduced from files alone.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mgplan_core::catalog::ProjectParams;
use mgplan_core::milp::{self, MilpOptions};
use mgplan_core::planner::{
    self, InfeasibilityReport, PlanOutcome, PlannerOptions, SearchSpace,
};
use mgplan_core::resources::{
    self, read_power_curve, read_scenario, synthetic_desert_year, write_scenario, LoadShape,
    PowerCurve,
};
use mgplan_core::{AvailabilitySeries, Catalog, Error as CoreError, PlanSolution, Sizing};
use serde_json::json;

use crate::args::{Mode, RunConfig};
use crate::report;

const DEFAULT_CATALOG_JSON: &str = include_str!("../../../data/catalog_la.json");
const DEFAULT_CATALOG_LABEL: &str = "catalog_la";

/// Exit code for an error bubbled out of [`execute`]: resource-limit
/// failures get their own code, everything else is an input problem.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::ResourceLimit(_)) => 4,
        _ => 2,
    }
}

pub fn execute(cfg: &RunConfig) -> Result<i32> {
    fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    match cfg.mode {
        Mode::SynthLoad => synth_load(cfg),
        Mode::ExportMilp => export_milp(cfg),
        Mode::Plan | Mode::Autonomy | Mode::Evaluate => plan_like(cfg),
    }
}

fn load_catalog(path: Option<&Path>) -> Result<(Catalog, String)> {
    let (text, label) = match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let label = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "catalog".into());
            (text, label)
        }
        None => (DEFAULT_CATALOG_JSON.to_string(), DEFAULT_CATALOG_LABEL.into()),
    };
    let catalog: Catalog =
        serde_json::from_str(&text).with_context(|| format!("parsing catalog {label}"))?;
    catalog.validate()?;
    Ok((catalog, label))
}

fn load_params(cfg: &RunConfig) -> Result<ProjectParams> {
    let mut params = match &cfg.params {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing parameters {}", p.display()))?
        }
        None => ProjectParams::default(),
    };
    if let Some(cap) = cfg.unmet_cap {
        params.max_unserved_fraction = cap;
    }
    if let Some(cap) = cfg.reserve_cap {
        params.max_unmet_reserve_fraction = cap;
    }
    params.validate()?;
    Ok(params)
}

/// Scenario from the given files, or the bundled synthetic year
/// (persisted next to the other artifacts for reproducibility).
fn load_scenario(cfg: &RunConfig) -> Result<resources::ScenarioSeries> {
    match (&cfg.weather, &cfg.load) {
        (Some(w), Some(l)) => Ok(read_scenario(w, l)?),
        _ => {
            let series = synthetic_desert_year(cfg.seed);
            write_scenario(&series, &cfg.out.join("weather.csv"), &cfg.out.join("load.csv"))?;
            Ok(series)
        }
    }
}

fn load_curve(cfg: &RunConfig) -> Result<PowerCurve> {
    match &cfg.curve {
        Some(p) => Ok(read_power_curve(p)?),
        None => Ok(PowerCurve::gv2kw()),
    }
}

fn search_space(cfg: &RunConfig, catalog: &Catalog) -> Result<SearchSpace> {
    let mut space = SearchSpace::from_catalog(catalog);
    if cfg.no_wt {
        space = space.without_wt();
    }
    if let Some(n) = cfg.fix_pv {
        space = space.fix_pv(n)?;
    }
    if let Some(n) = cfg.fix_wt {
        space = space.fix_wt(n)?;
    }
    // In plan mode a fixed battery count is just another pinned axis;
    // autonomy mode pins it through plan_autonomy instead.
    if cfg.mode == Mode::Plan {
        if let Some(n) = cfg.fix_bess {
            space = space.fix_bess(n)?;
        }
    }
    Ok(space)
}

struct PlannedSystem {
    label: String,
    catalog: Catalog,
    solution: PlanSolution,
}

/// One full planning run against a catalog; `Err(report)` is the
/// infeasibility certificate.
fn run_one(
    cfg: &RunConfig,
    catalog: &Catalog,
    params: &ProjectParams,
    series: &resources::ScenarioSeries,
    availability: &AvailabilitySeries,
) -> Result<std::result::Result<PlanSolution, InfeasibilityReport>> {
    let options = PlannerOptions {
        jobs: cfg.jobs,
        ..PlannerOptions::default()
    };
    let space = search_space(cfg, catalog)?;
    let outcome = match cfg.mode {
        Mode::Autonomy => {
            let n = cfg.fix_bess.expect("resolve() enforces --fix-bess");
            planner::plan_autonomy(catalog, series, availability, n, &space, params, &options)?
        }
        _ if cfg.brute_force => {
            planner::brute_force_plan(catalog, series, availability, &space, params, &options)?
        }
        _ => planner::plan_optimal(catalog, series, availability, &space, params, &options)?,
    };
    Ok(match outcome {
        PlanOutcome::Feasible(sol) => Ok(*sol),
        PlanOutcome::Infeasible(report) => Err(report),
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).context("serializing artifact")?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn infeasible_exit(cfg: &RunConfig, report: &InfeasibilityReport) -> Result<i32> {
    write_json(&cfg.out.join("solution.json"), &json!({ "infeasible": report }))?;
    eprintln!(
        "infeasible: even {} leaves {:.4}% load and {:.4}% reserve unmet (caps are binding)",
        report.max_corner,
        report.unserved_ratio * 100.0,
        report.unmet_reserve_ratio * 100.0
    );
    Ok(3)
}

fn plan_like(cfg: &RunConfig) -> Result<i32> {
    let (catalog, label) = load_catalog(cfg.catalog.as_deref())?;
    let params = load_params(cfg)?;
    let series = load_scenario(cfg)?;
    let curve = load_curve(cfg)?;
    let availability = AvailabilitySeries::derive(&series, &curve, cfg.pv_derate)?;

    let mut systems: Vec<PlannedSystem> = Vec::new();
    if cfg.mode == Mode::Evaluate {
        let sizing = Sizing::new(
            cfg.fix_pv.expect("resolve() enforces fixed counts"),
            cfg.fix_wt.expect("resolve() enforces fixed counts"),
            cfg.fix_bess.expect("resolve() enforces fixed counts"),
        );
        let solution = planner::evaluate(&sizing, &catalog, &series, &availability, &params)?;
        systems.push(PlannedSystem {
            label,
            catalog,
            solution,
        });
    } else {
        match run_one(cfg, &catalog, &params, &series, &availability)? {
            Ok(solution) => systems.push(PlannedSystem {
                label,
                catalog,
                solution,
            }),
            Err(report) => return infeasible_exit(cfg, &report),
        }
        if let Some(second) = &cfg.compare {
            let (catalog2, mut label2) = load_catalog(Some(second))?;
            if label2 == systems[0].label {
                label2.push_str("_2");
            }
            match run_one(cfg, &catalog2, &params, &series, &availability)? {
                Ok(solution) => systems.push(PlannedSystem {
                    label: label2,
                    catalog: catalog2,
                    solution,
                }),
                Err(report) => return infeasible_exit(cfg, &report),
            }
        }
    }

    write_system_artifacts(cfg, &params, &series, &availability, &systems)?;
    let feasible = systems.iter().all(|s| s.solution.feasible);
    if !feasible {
        let worst = systems.iter().find(|s| !s.solution.feasible).expect("checked");
        eprintln!(
            "infeasible: {} leaves {:.4}% load and {:.4}% reserve unmet",
            worst.solution.sizing,
            worst.solution.real_unserved_fraction * 100.0,
            worst.solution.real_unmet_reserve_fraction * 100.0
        );
        return Ok(3);
    }
    Ok(0)
}

fn write_system_artifacts(
    cfg: &RunConfig,
    params: &ProjectParams,
    series: &resources::ScenarioSeries,
    availability: &AvailabilitySeries,
    systems: &[PlannedSystem],
) -> Result<()> {
    if systems.len() == 1 {
        write_json(&cfg.out.join("solution.json"), &systems[0].solution)?;
    } else {
        let labeled: Vec<serde_json::Value> = systems
            .iter()
            .map(|s| json!({ "label": s.label, "solution": s.solution }))
            .collect();
        write_json(&cfg.out.join("solution.json"), &labeled)?;
    }

    let pairs: Vec<(String, &PlanSolution)> =
        systems.iter().map(|s| (s.label.clone(), &s.solution)).collect();
    let (table, csv) = report::compare_report(&pairs);
    fs::write(cfg.out.join("report.txt"), &table)?;
    fs::write(cfg.out.join("report.csv"), &csv)?;
    print!("{table}");

    for (i, system) in systems.iter().enumerate() {
        let dispatch = mgplan_core::dispatch::simulate_greedy(
            &system.solution.sizing,
            series,
            availability,
            &system.catalog,
            params,
        )?;
        let name = if i == 0 {
            "dispatch.csv".to_string()
        } else {
            format!("dispatch_{}.csv", system.label)
        };
        dispatch.write_csv(&cfg.out.join(name))?;
    }
    Ok(())
}

fn export_milp(cfg: &RunConfig) -> Result<i32> {
    let (catalog, _) = load_catalog(cfg.catalog.as_deref())?;
    let params = load_params(cfg)?;
    let series = load_scenario(cfg)?;
    let curve = load_curve(cfg)?;
    let availability = AvailabilitySeries::derive(&series, &curve, cfg.pv_derate)?;
    let space = search_space(cfg, &catalog)?;
    let options = MilpOptions {
        enforce_terminal_soc: cfg.terminal_soc,
        ..MilpOptions::default()
    };
    let model = milp::build_model(&catalog, &series, &availability, &space, &params, &options)?;
    let lp_path = cfg.out.join("model.lp");
    fs::write(&lp_path, milp::export_lp(&model))
        .with_context(|| format!("writing {}", lp_path.display()))?;
    let (continuous, integer, binary) = model.kind_counts();
    println!(
        "wrote {}: {} variables ({continuous} continuous, {integer} integer, {binary} binary), {} rows",
        lp_path.display(),
        model.n_variables(),
        model.n_constraints()
    );

    if let Some(sol_path) = &cfg.check_solution {
        let text = fs::read_to_string(sol_path)
            .with_context(|| format!("reading {}", sol_path.display()))?;
        let assignment = milp::parse_assignment(&text)?;
        let report = milp::validate_solution(&model, &assignment, 1e-6)?;
        write_json(&cfg.out.join("validation.json"), &report)?;
        println!(
            "checked {}: max violation {:.3e}, objective {:.2}",
            sol_path.display(),
            report.max_violation,
            report.objective
        );
        if !report.feasible {
            let mut detail = String::new();
            for v in report.violations.iter().take(5) {
                let _ = writeln!(detail, "  {}: off by {:.6}", v.requirement, v.amount);
            }
            eprintln!("infeasible: solution violates the model\n{detail}");
            return Ok(3);
        }
    }
    Ok(0)
}

fn synth_load(cfg: &RunConfig) -> Result<i32> {
    let shape = match cfg.window_end {
        Some(end) => {
            let shape = LoadShape {
                base_kw: cfg.base_kw,
                peak_kw: cfg.peak_kw,
                window_start: cfg.window_start,
                window_end: end,
            };
            shape.validate()?;
            shape
        }
        None => LoadShape::for_daily_energy(
            cfg.base_kw,
            cfg.peak_kw,
            cfg.daily_kwh,
            cfg.window_start,
        )?,
    };
    let loads = resources::synthesize_load(&shape, cfg.days as usize)?;
    let path = cfg.out.join("load.csv");
    let mut text = String::from("timestamp,load_kw\n");
    for (i, kw) in loads.iter().enumerate() {
        let _ = writeln!(text, "{i},{kw}");
    }
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "wrote {}: {} days at {:.2} kWh/day (base {:.2} kW, peak {:.2} kW, window {:.2}-{:.2} h)",
        path.display(),
        cfg.days,
        shape.daily_energy_kwh(),
        shape.base_kw,
        shape.peak_kw,
        shape.window_start,
        shape.window_end
    );
    Ok(0)
}
