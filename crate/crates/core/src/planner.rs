//! Cost-ordered search for the cheapest feasible sizing.
//!
//! Unit costs are positive and feasibility is monotone in every unit count,
//! so best-first expansion of the integer lattice by nondecreasing fleet
//! cost returns the global optimum at the first feasible candidate. A
//! brute-force scanner provides an independent optimality oracle.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{
    self, Catalog, CatalogEconomics, ComponentSpec, ProjectParams, UnitEconomics,
};
use crate::dispatch::{
    check_feasible, simulate_greedy, DispatchResult, DispatchTotals, Feasibility, Ratings, Sizing,
};
use crate::error::{Error, Result};
use crate::resources::{AvailabilitySeries, ScenarioSeries};

/// Hours in the reference year used to annualize served energy.
const HOURS_PER_YEAR: f64 = 8760.0;

/// Inclusive unit-count ranges the planner may explore, one per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub pv: (u32, u32),
    pub wt: (u32, u32),
    pub bess: (u32, u32),
}

impl SearchSpace {
    /// Full range allowed by the catalog bounds.
    pub fn from_catalog(catalog: &Catalog) -> Self {
        SearchSpace {
            pv: (catalog.pv.n_min, catalog.pv.n_max),
            wt: (catalog.wt.n_min, catalog.wt.n_max),
            bess: (catalog.bess.n_min, catalog.bess.n_max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("pv", self.pv), ("wt", self.wt), ("bess", self.bess)] {
            if lo > hi {
                return Err(Error::Invalid {
                    field: "search space",
                    reason: format!("{name} range [{lo}, {hi}] is empty"),
                });
            }
        }
        Ok(())
    }

    fn fix_range(range: (u32, u32), n: u32, name: &'static str) -> Result<(u32, u32)> {
        if n < range.0 || n > range.1 {
            return Err(Error::Invalid {
                field: name,
                reason: format!("{n} outside [{}, {}]", range.0, range.1),
            });
        }
        Ok((n, n))
    }

    pub fn fix_pv(mut self, n: u32) -> Result<Self> {
        self.pv = Self::fix_range(self.pv, n, "fixed pv count")?;
        Ok(self)
    }

    pub fn fix_wt(mut self, n: u32) -> Result<Self> {
        self.wt = Self::fix_range(self.wt, n, "fixed wt count")?;
        Ok(self)
    }

    pub fn fix_bess(mut self, n: u32) -> Result<Self> {
        self.bess = Self::fix_range(self.bess, n, "fixed bess count")?;
        Ok(self)
    }

    /// Exclude wind turbines entirely.
    pub fn without_wt(mut self) -> Self {
        self.wt = (0, 0);
        self
    }

    pub fn lower(&self) -> Sizing {
        Sizing::new(self.pv.0, self.wt.0, self.bess.0)
    }

    pub fn upper(&self) -> Sizing {
        Sizing::new(self.pv.1, self.wt.1, self.bess.1)
    }

    pub fn contains(&self, s: &Sizing) -> bool {
        (self.pv.0..=self.pv.1).contains(&s.n_pv)
            && (self.wt.0..=self.wt.1).contains(&s.n_wt)
            && (self.bess.0..=self.bess.1).contains(&s.n_bess)
    }

    /// Number of lattice points.
    pub fn volume(&self) -> u64 {
        let d = |(lo, hi): (u32, u32)| (hi - lo + 1) as u64;
        d(self.pv) * d(self.wt) * d(self.bess)
    }
}

/// Tunables for planner runs. `Default` is suitable everywhere.
#[derive(Debug, Clone, Copy)]
pub struct PlannerOptions {
    /// Worker threads for candidate evaluation; 0 uses the global pool.
    pub jobs: usize,
    /// Candidates dispatched per parallel round; 0 picks a default.
    pub batch: usize,
    /// Ceiling on distinct candidates admitted to the frontier.
    pub max_visited: usize,
    /// Ceiling on lattice volume for brute-force scans.
    pub brute_force_limit: u64,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            jobs: 0,
            batch: 0,
            max_visited: 20_000_000,
            brute_force_limit: 1_000_000,
        }
    }
}

/// Per-slot cost contribution inside a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotCost {
    pub count: u32,
    pub unit: UnitEconomics,
    pub subtotal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBreakdown {
    pub pv: SlotCost,
    pub wt: SlotCost,
    pub bess: SlotCost,
}

/// Complete audit of one sizing: economics, dispatch outcome, feasibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSolution {
    pub sizing: Sizing,
    pub ratings: Ratings,
    pub npc: f64,
    /// NPC over undiscounted lifetime served energy; absent when nothing
    /// is served.
    pub lcoe: Option<f64>,
    /// CRF-annualized variant, reported for reference only.
    pub lcoe_annualized: Option<f64>,
    pub annual_served_energy: f64,
    pub breakdown: SolutionBreakdown,
    pub real_unserved_fraction: f64,
    pub real_unmet_reserve_fraction: f64,
    pub feasible: bool,
    pub dispatch_summary: DispatchTotals,
    /// Hours the battery alone covers the mean load across its usable SoC
    /// window; absent when the scenario has no load.
    pub autonomy_hours: Option<f64>,
    pub candidates_evaluated: u64,
    pub wall_time_s: f64,
}

/// Evidence that no sizing in the space satisfies the caps: even the
/// all-maximum corner misses them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport {
    pub max_corner: Sizing,
    pub unserved_ratio: f64,
    pub unmet_reserve_ratio: f64,
    pub candidates_evaluated: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanOutcome {
    Feasible(Box<PlanSolution>),
    Infeasible(InfeasibilityReport),
}

impl PlanOutcome {
    pub fn solution(&self) -> Option<&PlanSolution> {
        match self {
            PlanOutcome::Feasible(s) => Some(s),
            PlanOutcome::Infeasible(_) => None,
        }
    }

    pub fn into_solution(self) -> Option<PlanSolution> {
        match self {
            PlanOutcome::Feasible(s) => Some(*s),
            PlanOutcome::Infeasible(_) => None,
        }
    }
}

/// Heap key: fleet cost, then the documented deterministic tie-break
/// (fewest turbines, then batteries, then panels).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    cost: f64,
    wt: u32,
    bess: u32,
    pv: u32,
}

impl Key {
    fn of(sizing: &Sizing, econ: &CatalogEconomics) -> Self {
        Key {
            cost: catalog::total_npc(sizing, econ),
            wt: sizing.n_wt,
            bess: sizing.n_bess,
            pv: sizing.n_pv,
        }
    }
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.wt.cmp(&other.wt))
            .then(self.bess.cmp(&other.bess))
            .then(self.pv.cmp(&other.pv))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct Candidate {
    dispatch: DispatchResult,
    feasibility: Feasibility,
}

fn evaluate_candidate(
    sizing: &Sizing,
    catalog: &Catalog,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    params: &ProjectParams,
) -> Result<Candidate> {
    let dispatch = simulate_greedy(sizing, series, availability, catalog, params)?;
    let feasibility = check_feasible(&dispatch, series, params);
    Ok(Candidate {
        dispatch,
        feasibility,
    })
}

fn slot_cost(count: u32, unit: &UnitEconomics) -> SlotCost {
    SlotCost {
        count,
        unit: unit.clone(),
        subtotal: count as f64 * unit.unit_npc,
    }
}

/// Search effort counters attached to every returned solution.
#[derive(Debug, Clone, Copy)]
struct SearchStats {
    candidates_evaluated: u64,
    wall_time_s: f64,
}

fn build_solution(
    sizing: Sizing,
    candidate: &Candidate,
    catalog: &Catalog,
    econ: &CatalogEconomics,
    series: &ScenarioSeries,
    params: &ProjectParams,
    stats: SearchStats,
) -> PlanSolution {
    let npc = catalog::total_npc(&sizing, econ);
    let horizon_hours = series.len() as f64 * params.step_hours;
    let annual_served_energy = if horizon_hours > 0.0 {
        candidate.dispatch.totals.served_energy * HOURS_PER_YEAR / horizon_hours
    } else {
        0.0
    };
    let (lcoe, lcoe_annualized) = if annual_served_energy > 0.0 {
        (
            catalog::lcoe(npc, annual_served_energy, params).ok(),
            catalog::lcoe_annualized(npc, annual_served_energy, params).ok(),
        )
    } else {
        (None, None)
    };
    let daily_load = series.daily_load_kwh();
    let autonomy = if daily_load > 0.0 {
        autonomy_hours(&catalog.bess, sizing.n_bess, daily_load).ok()
    } else {
        None
    };
    PlanSolution {
        sizing,
        ratings: sizing.ratings(catalog),
        npc,
        lcoe,
        lcoe_annualized,
        annual_served_energy,
        breakdown: SolutionBreakdown {
            pv: slot_cost(sizing.n_pv, &econ.pv),
            wt: slot_cost(sizing.n_wt, &econ.wt),
            bess: slot_cost(sizing.n_bess, &econ.bess),
        },
        real_unserved_fraction: candidate.feasibility.unserved_ratio,
        real_unmet_reserve_fraction: candidate.feasibility.unmet_reserve_ratio,
        feasible: candidate.feasibility.feasible,
        dispatch_summary: candidate.dispatch.totals,
        autonomy_hours: autonomy,
        candidates_evaluated: stats.candidates_evaluated,
        wall_time_s: stats.wall_time_s,
    }
}

fn validate_inputs(
    catalog: &Catalog,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    space: &SearchSpace,
    params: &ProjectParams,
) -> Result<()> {
    catalog.validate()?;
    params.validate()?;
    space.validate()?;
    if availability.len() != series.len() {
        return Err(Error::LengthMismatch {
            context: "availability vs series".into(),
            expected: series.len(),
            found: availability.len(),
        });
    }
    Ok(())
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if jobs == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    pool.install(f)
}

/// Cheapest feasible sizing in the space, by best-first lattice search.
///
/// Candidates are popped in nondecreasing `(cost, tie-break)` order; a
/// popped feasible candidate whose key is below everything still pending is
/// optimal. Evaluation runs in cost-ordered batches so parallelism cannot
/// change the answer. Returns an infeasibility report when even the
/// all-maximum corner violates the caps.
pub fn plan_optimal(
    catalog: &Catalog,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    space: &SearchSpace,
    params: &ProjectParams,
    options: &PlannerOptions,
) -> Result<PlanOutcome> {
    let start = Instant::now();
    validate_inputs(catalog, series, availability, space, params)?;
    // Positive unit costs are required for first-feasible-is-optimal.
    let econ = catalog.economics(params)?;

    with_pool(options.jobs, || {
        let mut evaluated: u64 = 0;

        // Monotone feasibility makes the all-maximum corner a certificate.
        let top = space.upper();
        let top_eval = evaluate_candidate(&top, catalog, series, availability, params)?;
        evaluated += 1;
        if !top_eval.feasibility.feasible {
            return Ok(PlanOutcome::Infeasible(InfeasibilityReport {
                max_corner: top,
                unserved_ratio: top_eval.feasibility.unserved_ratio,
                unmet_reserve_ratio: top_eval.feasibility.unmet_reserve_ratio,
                candidates_evaluated: evaluated,
                wall_time_s: start.elapsed().as_secs_f64(),
            }));
        }

        let batch_size = if options.batch > 0 {
            options.batch
        } else {
            rayon::current_num_threads().max(1) * 2
        };

        let mut heap: BinaryHeap<Reverse<(Key, Sizing)>> = BinaryHeap::new();
        let mut visited: HashSet<Sizing> = HashSet::new();
        let lower = space.lower();
        visited.insert(lower);
        heap.push(Reverse((Key::of(&lower, &econ), lower)));

        let mut incumbent: Option<(Key, Sizing, Candidate)> = None;

        loop {
            match (heap.peek(), &incumbent) {
                (None, _) => break,
                (Some(Reverse((k, _))), Some((inc, _, _))) if *k >= *inc => break,
                _ => {}
            }

            let mut batch: Vec<(Key, Sizing)> = Vec::with_capacity(batch_size);
            while batch.len() < batch_size {
                let take = match heap.peek() {
                    Some(Reverse((k, _))) => {
                        incumbent.as_ref().is_none_or(|(inc, _, _)| k < inc)
                    }
                    None => false,
                };
                if !take {
                    break;
                }
                let Reverse(item) = heap.pop().expect("peeked above");
                batch.push(item);
            }
            if batch.is_empty() {
                break;
            }

            let evals: Vec<Candidate> = batch
                .par_iter()
                .map(|(_, s)| evaluate_candidate(s, catalog, series, availability, params))
                .collect::<Result<Vec<_>>>()?;
            evaluated += batch.len() as u64;

            // Commit in key order; the batch came off the heap sorted.
            for ((key, sizing), eval) in batch.into_iter().zip(evals) {
                if let Some((inc, _, _)) = &incumbent {
                    if key >= *inc {
                        continue;
                    }
                }
                if eval.feasibility.feasible {
                    // Any feasible successor is strictly costlier, so the
                    // feasible node is a leaf of the search.
                    incumbent = Some((key, sizing, eval));
                    continue;
                }
                let up = space.upper();
                let successors = [
                    Sizing::new(sizing.n_pv + 1, sizing.n_wt, sizing.n_bess),
                    Sizing::new(sizing.n_pv, sizing.n_wt + 1, sizing.n_bess),
                    Sizing::new(sizing.n_pv, sizing.n_wt, sizing.n_bess + 1),
                ];
                for next in successors {
                    if next.n_pv > up.n_pv || next.n_wt > up.n_wt || next.n_bess > up.n_bess {
                        continue;
                    }
                    if visited.insert(next) {
                        if visited.len() > options.max_visited {
                            return Err(Error::ResourceLimit(format!(
                                "planner frontier exceeded max_visited = {}",
                                options.max_visited
                            )));
                        }
                        heap.push(Reverse((Key::of(&next, &econ), next)));
                    }
                }
            }
        }

        match incumbent {
            Some((_, sizing, eval)) => Ok(PlanOutcome::Feasible(Box::new(build_solution(
                sizing,
                &eval,
                catalog,
                &econ,
                series,
                params,
                SearchStats {
                    candidates_evaluated: evaluated,
                    wall_time_s: start.elapsed().as_secs_f64(),
                },
            )))),
            // Unreachable when the certificate above passed; kept as a
            // defensive completion.
            None => Ok(PlanOutcome::Infeasible(InfeasibilityReport {
                max_corner: top,
                unserved_ratio: top_eval.feasibility.unserved_ratio,
                unmet_reserve_ratio: top_eval.feasibility.unmet_reserve_ratio,
                candidates_evaluated: evaluated,
                wall_time_s: start.elapsed().as_secs_f64(),
            })),
        }
    })
}

/// Exhaustive lattice scan; the optimality oracle for [`plan_optimal`].
pub fn brute_force_plan(
    catalog: &Catalog,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    space: &SearchSpace,
    params: &ProjectParams,
    options: &PlannerOptions,
) -> Result<PlanOutcome> {
    let start = Instant::now();
    validate_inputs(catalog, series, availability, space, params)?;
    let econ = catalog.economics(params)?;
    let volume = space.volume();
    if volume > options.brute_force_limit {
        return Err(Error::ResourceLimit(format!(
            "lattice volume {volume} exceeds brute-force limit {}",
            options.brute_force_limit
        )));
    }

    let mut lattice: Vec<Sizing> = Vec::with_capacity(volume as usize);
    for pv in space.pv.0..=space.pv.1 {
        for wt in space.wt.0..=space.wt.1 {
            for bess in space.bess.0..=space.bess.1 {
                lattice.push(Sizing::new(pv, wt, bess));
            }
        }
    }

    with_pool(options.jobs, || {
        let evals: Vec<(Key, Sizing, Candidate)> = lattice
            .par_iter()
            .map(|s| {
                evaluate_candidate(s, catalog, series, availability, params)
                    .map(|c| (Key::of(s, &econ), *s, c))
            })
            .collect::<Result<Vec<_>>>()?;

        let evaluated = evals.len() as u64;
        let best = evals
            .iter()
            .filter(|(_, _, c)| c.feasibility.feasible)
            .min_by(|a, b| a.0.cmp(&b.0));

        match best {
            Some((_, sizing, eval)) => Ok(PlanOutcome::Feasible(Box::new(build_solution(
                *sizing,
                eval,
                catalog,
                &econ,
                series,
                params,
                SearchStats {
                    candidates_evaluated: evaluated,
                    wall_time_s: start.elapsed().as_secs_f64(),
                },
            )))),
            None => {
                let top = space.upper();
                let top_eval = evals
                    .iter()
                    .find(|(_, s, _)| *s == top)
                    .expect("upper corner is in the lattice");
                Ok(PlanOutcome::Infeasible(InfeasibilityReport {
                    max_corner: top,
                    unserved_ratio: top_eval.2.feasibility.unserved_ratio,
                    unmet_reserve_ratio: top_eval.2.feasibility.unmet_reserve_ratio,
                    candidates_evaluated: evaluated,
                    wall_time_s: start.elapsed().as_secs_f64(),
                }))
            }
        }
    })
}

/// Hours the battery bank alone can serve the mean load:
/// `24 * (soc_max - soc_min) * rated_energy / daily_load`.
pub fn autonomy_hours(bess_spec: &ComponentSpec, n_bess: u32, daily_load_kwh: f64) -> Result<f64> {
    if !(daily_load_kwh.is_finite() && daily_load_kwh > 0.0) {
        return Err(Error::invalid("daily_load_kwh", "must be > 0"));
    }
    let window = bess_spec.soc_max.unwrap_or(1.0) - bess_spec.soc_min.unwrap_or(0.0);
    let rated = n_bess as f64 * bess_spec.unit_energy.unwrap_or(0.0);
    Ok(24.0 * window * rated / daily_load_kwh)
}

/// Plan with the battery count pinned; the autonomy-driven study mode.
pub fn plan_autonomy(
    catalog: &Catalog,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    n_bess_fixed: u32,
    space: &SearchSpace,
    params: &ProjectParams,
    options: &PlannerOptions,
) -> Result<PlanOutcome> {
    let pinned = space.fix_bess(n_bess_fixed)?;
    plan_optimal(catalog, series, availability, &pinned, params, options)
}

/// Full audit of a single sizing, feasible or not.
pub fn evaluate(
    sizing: &Sizing,
    catalog: &Catalog,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    params: &ProjectParams,
) -> Result<PlanSolution> {
    let start = Instant::now();
    catalog.validate()?;
    params.validate()?;
    if availability.len() != series.len() {
        return Err(Error::LengthMismatch {
            context: "availability vs series".into(),
            expected: series.len(),
            found: availability.len(),
        });
    }
    let econ = catalog.economics(params)?;
    let candidate = evaluate_candidate(sizing, catalog, series, availability, params)?;
    Ok(build_solution(
        *sizing,
        &candidate,
        catalog,
        &econ,
        series,
        params,
        SearchStats {
            candidates_evaluated: 1,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ComponentKind;

    fn toy_catalog(pv_max: u32, wt_max: u32, bess_max: u32) -> Catalog {
        Catalog {
            pv: ComponentSpec::generator(ComponentKind::Pv, 0.1, 348.85, 0.015, 25, pv_max),
            wt: ComponentSpec::generator(ComponentKind::Wt, 2.0, 5617.92, 0.015, 25, wt_max),
            bess: ComponentSpec::storage(9.32, 7951.49, 0.015, 4, bess_max, 0.4, 1.0, 5.0, 0.95),
        }
    }

    fn no_reserve_params() -> ProjectParams {
        ProjectParams {
            reserve_factor: 0.0,
            ..ProjectParams::default()
        }
    }

    fn flat_scenario(
        pv_per_kw: Vec<f64>,
        load: Vec<f64>,
    ) -> (ScenarioSeries, AvailabilitySeries) {
        let t = load.len();
        let series = ScenarioSeries::from_hourly(vec![0.0; t], vec![0.0; t], load).unwrap();
        let availability = AvailabilitySeries {
            pv_per_kw,
            wt_per_unit: vec![0.0; t],
        };
        (series, availability)
    }

    #[test]
    fn zero_load_selects_lower_corner() {
        let catalog = toy_catalog(50, 5, 5);
        let params = no_reserve_params();
        let (series, avail) = flat_scenario(vec![0.5, 0.5], vec![0.0, 0.0]);
        let space = SearchSpace::from_catalog(&catalog);
        let out = plan_optimal(&catalog, &series, &avail, &space, &params, &Default::default())
            .unwrap();
        let sol = out.solution().expect("feasible");
        assert_eq!(sol.sizing, Sizing::new(0, 0, 0));
        assert_eq!(sol.npc, 0.0);
        assert!(sol.lcoe.is_none());
    }

    #[test]
    fn pv_only_closed_form() {
        // One step, load 1 kW, half-sun: need ceil(1 / (0.5 * 0.1)) = 20 units.
        let catalog = toy_catalog(50, 0, 0);
        let params = no_reserve_params();
        let (series, avail) = flat_scenario(vec![0.5], vec![1.0]);
        let space = SearchSpace::from_catalog(&catalog);
        let out = plan_optimal(&catalog, &series, &avail, &space, &params, &Default::default())
            .unwrap();
        let sol = out.solution().expect("feasible");
        assert_eq!(sol.sizing, Sizing::new(20, 0, 0));
        let unit = catalog::unit_economics(&catalog.pv, &params).unwrap().unit_npc;
        assert!((sol.npc - 20.0 * unit).abs() < 1e-9);
        assert!(sol.feasible);
        assert_eq!(sol.real_unserved_fraction, 0.0);
    }

    #[test]
    fn matches_brute_force_on_small_lattice() {
        let catalog = toy_catalog(30, 2, 4);
        let mut params = no_reserve_params();
        params.max_unserved_fraction = 0.05;
        // Two days with a gap night.
        let mut pv = Vec::new();
        let mut load = Vec::new();
        for d in 0..2 {
            for h in 0..24 {
                let x = (h as f64 - 12.0) / 6.0;
                let sun = if x.abs() < 1.0 { 0.9 * (1.0 - x * x) } else { 0.0 };
                pv.push(if d == 1 && h < 14 { 0.0 } else { sun });
                load.push(0.3 + if (10..19).contains(&h) { 0.7 } else { 0.0 });
            }
        }
        let (series, avail) = flat_scenario(pv, load);
        let space = SearchSpace::from_catalog(&catalog);
        let fast = plan_optimal(&catalog, &series, &avail, &space, &params, &Default::default())
            .unwrap();
        let slow = brute_force_plan(&catalog, &series, &avail, &space, &params, &Default::default())
            .unwrap();
        let (f, s) = (fast.solution().unwrap(), slow.solution().unwrap());
        assert_eq!(f.sizing, s.sizing);
        assert_eq!(f.npc, s.npc);
    }

    #[test]
    fn infeasible_space_returns_certificate() {
        // No resources can serve load: caps at zero, nothing installed.
        let catalog = toy_catalog(0, 0, 0);
        let params = no_reserve_params();
        let (series, avail) = flat_scenario(vec![0.0], vec![1.0]);
        let space = SearchSpace::from_catalog(&catalog);
        let out = plan_optimal(&catalog, &series, &avail, &space, &params, &Default::default())
            .unwrap();
        match out {
            PlanOutcome::Infeasible(report) => {
                assert_eq!(report.max_corner, Sizing::new(0, 0, 0));
                assert_eq!(report.unserved_ratio, 1.0);
            }
            PlanOutcome::Feasible(_) => panic!("expected infeasible"),
        }
        let bf = brute_force_plan(&catalog, &series, &avail, &space, &params, &Default::default())
            .unwrap();
        assert!(matches!(bf, PlanOutcome::Infeasible(_)));
    }

    #[test]
    fn autonomy_hours_formula() {
        let catalog = toy_catalog(1, 1, 9);
        // 3 strings of 9.32 kWh, usable window 0.6, daily load 19.01 kWh.
        let h3 = autonomy_hours(&catalog.bess, 3, 19.01).unwrap();
        assert!((h3 - 21.1795896896).abs() < 1e-6);
        assert_eq!(autonomy_hours(&catalog.bess, 0, 19.01).unwrap(), 0.0);
        let h6 = autonomy_hours(&catalog.bess, 6, 19.01).unwrap();
        assert!((h6 - 2.0 * h3).abs() < 1e-9);
        assert!(autonomy_hours(&catalog.bess, 1, 0.0).is_err());
    }

    #[test]
    fn autonomy_mode_pins_battery_count() {
        let catalog = toy_catalog(40, 0, 5);
        let mut params = no_reserve_params();
        params.max_unserved_fraction = 0.0;
        let (series, avail) = flat_scenario(
            vec![0.8, 0.0, 0.8, 0.0],
            vec![0.2, 0.2, 0.2, 0.2],
        );
        let space = SearchSpace::from_catalog(&catalog);
        let out = plan_autonomy(&catalog, &series, &avail, 2, &space, &params, &Default::default())
            .unwrap();
        let sol = out.solution().expect("feasible with 2 strings");
        assert_eq!(sol.sizing.n_bess, 2);
        assert!(sol.autonomy_hours.is_some());
        assert!(plan_autonomy(
            &catalog, &series, &avail, 9, &space, &params, &Default::default()
        )
        .is_err());
    }

    #[test]
    fn evaluate_reports_infeasible_configurations() {
        let catalog = toy_catalog(10, 2, 2);
        let params = no_reserve_params();
        let (series, avail) = flat_scenario(vec![0.0, 0.0], vec![1.0, 1.0]);
        let sol = evaluate(&Sizing::new(1, 0, 0), &catalog, &series, &avail, &params).unwrap();
        assert!(!sol.feasible);
        assert!(sol.real_unserved_fraction > params.max_unserved_fraction);
        assert_eq!(sol.candidates_evaluated, 1);
        // The reported NPC is the recomputed fleet NPC.
        let econ = catalog.economics(&params).unwrap();
        assert_eq!(sol.npc, catalog::total_npc(&sol.sizing, &econ));
    }

    #[test]
    fn search_space_overrides() {
        let catalog = toy_catalog(10, 5, 5);
        let space = SearchSpace::from_catalog(&catalog);
        assert_eq!(space.volume(), 11 * 6 * 6);
        let pinned = space.fix_bess(3).unwrap();
        assert_eq!(pinned.bess, (3, 3));
        assert!(space.fix_bess(6).is_err());
        let dry = space.without_wt();
        assert_eq!(dry.wt, (0, 0));
        assert!(dry.contains(&Sizing::new(10, 0, 5)));
        assert!(!dry.contains(&Sizing::new(10, 1, 5)));
    }

    #[test]
    fn parallel_runs_match_serial() {
        let catalog = toy_catalog(15, 1, 2);
        let mut params = no_reserve_params();
        params.max_unserved_fraction = 0.02;
        let mut pv = Vec::new();
        let mut load = Vec::new();
        for h in 0..48 {
            let x = ((h % 24) as f64 - 12.0) / 7.0;
            pv.push(if x.abs() < 1.0 { 0.8 * (1.0 - x * x) } else { 0.0 });
            load.push(0.25 + if (9..18).contains(&(h % 24)) { 0.4 } else { 0.0 });
        }
        let (series, avail) = flat_scenario(pv, load);
        let space = SearchSpace::from_catalog(&catalog);
        let serial = plan_optimal(
            &catalog,
            &series,
            &avail,
            &space,
            &params,
            &PlannerOptions { jobs: 1, batch: 1, ..Default::default() },
        )
        .unwrap();
        let parallel = plan_optimal(
            &catalog,
            &series,
            &avail,
            &space,
            &params,
            &PlannerOptions { jobs: 4, batch: 16, ..Default::default() },
        )
        .unwrap();
        let (a, b) = (serial.solution().unwrap(), parallel.solution().unwrap());
        assert_eq!(a.sizing, b.sizing);
        assert_eq!(a.npc, b.npc);
        assert!(a.candidates_evaluated > 0);
    }

    #[test]
    fn brute_force_volume_limit() {
        let catalog = toy_catalog(100, 100, 100);
        let params = no_reserve_params();
        let (series, avail) = flat_scenario(vec![0.5], vec![0.1]);
        let space = SearchSpace::from_catalog(&catalog);
        let err = brute_force_plan(
            &catalog,
            &series,
            &avail,
            &space,
            &params,
            &PlannerOptions { brute_force_limit: 1000, ..Default::default() },
        )
        .unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }
}
